//! The two product inequalities behind the constant coefficient floors, and
//! the per-benchmark floors themselves, evaluated at finite `n`.

use crate::error::{invalid, Result};
use crate::numeric::{ExtendedReal, Precision, Real};
use crate::problem::{Benchmark, ProblemSpec};

use super::PaperAnalytic;

#[derive(Clone, Debug)]
pub struct AppendixProducts {
    /// `prod_{i=2}^{n} 1/(1 + C/((i-1) n^(n-i)))`
    pub product1: ExtendedReal,
    /// `(1 - C/(n-1))^(n-1)`, defined only for `n > C + 1`.
    pub floor1: Option<ExtendedReal>,
    /// `prod_{i=1}^{n} 1/(1 + C/i!)`
    pub product2: ExtendedReal,
    /// `exp(-C (e - 1))`
    pub floor2: ExtendedReal,
}

impl AppendixProducts {
    pub fn first_holds(&self) -> Option<bool> {
        self.floor1.as_ref().map(|f| self.product1 >= *f)
    }

    pub fn second_holds(&self) -> bool {
        self.product2 >= self.floor2
    }
}

pub fn appendix_products(c: &ExtendedReal, n: u32) -> Result<AppendixProducts> {
    let prec = c.precision();
    let zero = ExtendedReal::zero(prec);
    if *c <= zero || !c.is_finite() {
        return Err(invalid("C must be a positive real"));
    }
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    let one = ExtendedReal::one(prec);
    let nn = ExtendedReal::from_u64(prec, n.into());

    let mut product1 = one.clone();
    for i in 2..=n {
        let den = ExtendedReal::from_u64(prec, (i - 1).into()) * &nn.pow_u32(n - i);
        product1 = product1 / &(one.clone() + &(c.clone() / &den));
    }
    let n_minus_1 = ExtendedReal::from_u64(prec, (n - 1).into());
    let floor1 = (nn > c.clone() + &one).then(|| (one.clone() - &(c.clone() / &n_minus_1)).pow_u32(n - 1));

    let mut product2 = one.clone();
    let mut factorial = one.clone();
    for i in 1..=n {
        factorial *= &ExtendedReal::from_u64(prec, i.into());
        product2 = product2 / &(one.clone() + &(c.clone() / &factorial));
    }
    let floor2 = (zero - &(c.clone() * &(ExtendedReal::e(prec) - &one))).exp();

    Ok(AppendixProducts {
        product1,
        floor1,
        product2,
        floor2,
    })
}

/// The printed coefficient row `c(K, l)` next to the closed-form floor that
/// is claimed to bound it from below.
#[derive(Clone, Debug)]
pub struct FloorCheck {
    pub benchmark: Benchmark,
    pub n: u32,
    /// `products[l - 1]` is the printed coefficient at `l`.
    pub products: Vec<ExtendedReal>,
    pub floors: Vec<ExtendedReal>,
    pub min_product: ExtendedReal,
    pub min_floor: ExtendedReal,
    /// `products[l] >= floors[l]` at every `l`.
    pub holds: bool,
}

fn floor_factor(prec: Precision, b: Benchmark, n: u32, i: u32, l: u32) -> ExtendedReal {
    let one = ExtendedReal::one(prec);
    let e = ExtendedReal::e(prec);
    let int = |v: u64| ExtendedReal::from_u64(prec, v);
    let inv = |x: ExtendedReal| one.clone() / &(one.clone() + &x);
    let fact = |m: u32| ExtendedReal::factorial(prec, m);
    let nn = int(n.into());
    match b {
        Benchmark::OneMax => inv(e / &fact(i - l + 1)),
        Benchmark::FullyDeceptive => {
            let two_e = int(2) * &e;
            inv(two_e.clone() / &fact(i - l + 1))
                * &inv(two_e / &(int((i - 1).into()) * &nn.pow_u32(n - i)))
        }
        Benchmark::TwoMax1 => {
            inv(int(2) * &e / &fact(i - l + 1)) * &inv(e / &(int(i.into()) * &nn.pow_u32(n - i - 1)))
        }
        Benchmark::Deceptive => {
            inv(int(2) * &e / &fact(i - l + 1)) * &inv(int(4) * &e / &fact(n + 2 - 2 * i))
        }
    }
}

/// Evaluates the printed coefficient row of a benchmark and its floor.
pub fn coefficient_floor_check(spec: &ProblemSpec, prec: Precision) -> Result<FloorCheck> {
    let analytic = PaperAnalytic::new(spec, prec)?;
    let b = analytic.benchmark();
    let n = spec.n();
    let products = analytic.lower_row()?;
    let top = products.len() as u32 + 1;
    let one = ExtendedReal::one(prec);
    let floors: Vec<ExtendedReal> = (1..top)
        .map(|l| {
            let (prefix, last) = match b {
                Benchmark::OneMax | Benchmark::FullyDeceptive => (one.clone(), n),
                Benchmark::TwoMax1 => (one.clone() / &(one.clone() + &ExtendedReal::e(prec)), n / 2),
                Benchmark::Deceptive => (one.clone(), n / 2 + 1),
            };
            ((l + 1)..=last).fold(prefix, |acc, i| acc * &floor_factor(prec, b, n, i, l))
        })
        .collect();
    let min = |v: &[ExtendedReal]| v.iter().cloned().reduce(|a, b| a.min_of(b)).unwrap_or_else(|| one.clone());
    let holds = products.iter().zip(&floors).all(|(p, f)| p >= f);
    Ok(FloorCheck {
        benchmark: b,
        n,
        min_product: min(&products),
        min_floor: min(&floors),
        products,
        floors,
        holds,
    })
}
