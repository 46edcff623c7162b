//! The closed-form probability bounds used in the worked examples, kept
//! verbatim so they can be audited against the exact kernel.

use crate::error::{Error, Result};
use crate::levels::{LevelKernel, LevelPartition};
use crate::numeric::{binomial, ExtendedReal, Precision, Real};
use crate::problem::{Benchmark, ProblemSpec};
use crate::shortcuts::preset_subset;

use super::coefficients::{ratio_row, SkipBounds};
use super::{assemble_row, Direction};

/// Analytic surrogate for the kernel of one benchmark.
///
/// OneMax and FullyDeceptive use the fitness partition (`K = n`); TwoMax1
/// and Deceptive use the preset sub-digraph (`K = n/2 + 1`).
#[derive(Clone, Debug)]
pub struct PaperAnalytic {
    benchmark: Benchmark,
    n: u32,
    prec: Precision,
    top: usize,
    q_pow: Vec<ExtendedReal>,
    keep_pow: Vec<ExtendedReal>,
    // stay_prefix[i][t] = sum_{j=1}^{t} C(m_i, j) q^j (1-q)^(n-j)
    stay_prefix: Vec<Vec<ExtendedReal>>,
    // OneMax only: skip_suffix[i][s] = sum_{j=s}^{i} C(i, j) q^j (1-q)^(i-j)
    skip_suffix: Vec<Vec<ExtendedReal>>,
    // OneMax only, row K: sum_{j=s}^{n} C(n, j) q^j (1-q)^(n-j)
    top_suffix: Vec<ExtendedReal>,
}

/// An analytic bound that lands on the wrong side of the exact value.
#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub quantity: &'static str,
    pub i: usize,
    pub l: usize,
    pub analytic: ExtendedReal,
    pub exact: ExtendedReal,
}

impl PaperAnalytic {
    pub fn new(spec: &ProblemSpec, prec: Precision) -> Result<Self> {
        let benchmark = spec
            .benchmark()
            .ok_or_else(|| Error::Unsupported("no analytic bounds for custom functions".into()))?;
        let n = spec.n();
        let top = match benchmark {
            Benchmark::OneMax | Benchmark::FullyDeceptive => n as usize,
            Benchmark::TwoMax1 | Benchmark::Deceptive => n as usize / 2 + 1,
        };
        let q = ExtendedReal::from_ratio(prec, &1.into(), &n.into());
        let keep = ExtendedReal::one(prec) - &q;
        let q_pow: Vec<ExtendedReal> = (0..=n).map(|j| q.pow_u32(j)).collect();
        let keep_pow: Vec<ExtendedReal> = (0..=n).map(|j| keep.pow_u32(j)).collect();
        let term = |m: u32, j: u32, rest: u32| -> ExtendedReal {
            ExtendedReal::from_integer(prec, &binomial(m, j)) * &q_pow[j as usize] * &keep_pow[rest as usize]
        };

        let mut stay_prefix = vec![Vec::new()];
        for i in 1..=top as u32 {
            let m = match benchmark {
                Benchmark::OneMax | Benchmark::TwoMax1 => i,
                Benchmark::FullyDeceptive | Benchmark::Deceptive => i - 1,
            };
            let mut acc = ExtendedReal::zero(prec);
            let mut row = vec![acc.clone()];
            for j in 1..i {
                acc += &term(m, j, n - j);
                row.push(acc.clone());
            }
            stay_prefix.push(row);
        }

        let mut skip_suffix = Vec::new();
        let mut top_suffix = Vec::new();
        if benchmark == Benchmark::OneMax {
            for i in 0..=n {
                let mut row = vec![ExtendedReal::zero(prec); i as usize + 2];
                for s in (0..=i).rev() {
                    row[s as usize] = row[s as usize + 1].clone() + &term(i, s, i - s);
                }
                skip_suffix.push(row);
            }
            top_suffix = vec![ExtendedReal::zero(prec); n as usize + 2];
            for s in (0..=n).rev() {
                top_suffix[s as usize] = top_suffix[s as usize + 1].clone() + &term(n, s, n - s);
            }
        }

        Ok(PaperAnalytic {
            benchmark,
            n,
            prec,
            top,
            q_pow,
            keep_pow,
            stay_prefix,
            skip_suffix,
            top_suffix,
        })
    }

    pub fn benchmark(&self) -> Benchmark {
        self.benchmark
    }

    /// The partition the analytic bounds refer to.
    pub fn partition(&self, spec: &ProblemSpec) -> Result<LevelPartition> {
        match self.benchmark {
            Benchmark::OneMax | Benchmark::FullyDeceptive => Ok(LevelPartition::fitness_levels(spec)),
            Benchmark::TwoMax1 | Benchmark::Deceptive => {
                LevelPartition::retained(spec, &preset_subset(spec)?.retained)
            }
        }
    }

    /// Exact kernel on [`PaperAnalytic::partition`].
    pub fn reference_kernel(&self, spec: &ProblemSpec) -> Result<LevelKernel<ExtendedReal>> {
        LevelKernel::build(spec, &self.partition(spec)?, self.prec)
    }

    fn is_tm1_top(&self, i: usize) -> bool {
        self.benchmark == Benchmark::TwoMax1 && i == self.top
    }

    fn binom_q(&self, m: i64, j: i64) -> ExtendedReal {
        if m < 0 || j < 0 || j > m {
            return ExtendedReal::zero(self.prec);
        }
        ExtendedReal::from_integer(self.prec, &binomial(m as u32, j as u32)) * &self.q_pow[j as usize]
    }

    /// Upper bound on the escape probability of level `l`, as used in the
    /// denominators of the lower bound.
    pub fn escape_max(&self, l: usize) -> ExtendedReal {
        let n = self.n;
        let (ln, lu) = (l as i64, l as u32);
        let ctx = self.prec;
        let n_to_minus_n = self.q_pow[n as usize].clone();
        let frac = |a: u32| ExtendedReal::from_ratio(ctx, &a.into(), &n.into());
        match self.benchmark {
            Benchmark::OneMax => self.skip_suffix[l][1].clone(),
            Benchmark::FullyDeceptive => {
                if l == 1 {
                    n_to_minus_n
                } else {
                    frac(lu - 1) + &self.q_pow[(n - lu + 1) as usize]
                }
            }
            Benchmark::TwoMax1 => {
                if l == self.top {
                    ExtendedReal::one(ctx)
                } else {
                    frac(lu) + &(self.q_pow[(n - lu) as usize].clone() * &self.keep_pow[l])
                }
            }
            Benchmark::Deceptive => {
                if l == 1 {
                    n_to_minus_n
                } else if l == self.top {
                    ExtendedReal::one(ctx)
                } else {
                    let nn = i64::from(n);
                    frac(lu - 1) + &self.binom_q(nn - ln + 1, nn - 2 * ln + 2)
                }
            }
        }
    }

    /// Lower bound on the escape probability of level `l` (OneMax only).
    pub fn escape_min(&self, l: usize) -> Option<ExtendedReal> {
        (self.benchmark == Benchmark::OneMax).then(|| self.stay_prefix_onemax_escape(l))
    }

    fn stay_prefix_onemax_escape(&self, l: usize) -> ExtendedReal {
        // sum_{j=1}^{l} C(l, j) q^j (1-q)^(n-j)
        let n = self.n as usize;
        (1..=l).fold(ExtendedReal::zero(self.prec), |acc, j| {
            acc + &(self.binom_q(l as i64, j as i64) * &self.keep_pow[n - j])
        })
    }

    /// Row `K` of the lower coefficients exactly as printed. For Deceptive
    /// the printed product stops at `i = n/2` and leaves out the top factor.
    pub fn lower_row(&self) -> Result<Vec<ExtendedReal>> {
        if self.benchmark != Benchmark::Deceptive {
            return ratio_row(self, Direction::Lower, self.top);
        }
        let last = self.top - 1;
        Ok((1..self.top)
            .map(|l| {
                let mut product = ExtendedReal::one(self.prec);
                for i in (l + 1)..=last {
                    let skip = self.skip_max(i, l).expect("in range");
                    let stay = self.stay_min(i, l).expect("in range");
                    product = product * &stay.clone() / &(stay + &skip);
                }
                product
            })
            .collect())
    }

    /// Row `K` of the upper coefficients (OneMax only).
    pub fn upper_row(&self) -> Result<Vec<ExtendedReal>> {
        if self.benchmark != Benchmark::OneMax {
            return Err(Error::Unsupported(format!("no analytic upper bound for {}", self.benchmark)));
        }
        ratio_row(self, Direction::Upper, self.top)
    }

    fn escapes(&self, upper: bool) -> Vec<ExtendedReal> {
        (0..=self.top)
            .map(|l| match (l, upper) {
                (0, _) => ExtendedReal::one(self.prec),
                (_, false) => self.escape_max(l),
                (_, true) => self.escape_min(l).expect("OneMax"),
            })
            .collect()
    }

    /// `d_K` assembled from the analytic coefficients and denominators.
    pub fn lower_bound(&self) -> Result<ExtendedReal> {
        Ok(assemble_row(&self.lower_row()?, &self.escapes(false)))
    }

    pub fn upper_bound(&self) -> Result<ExtendedReal> {
        Ok(assemble_row(&self.upper_row()?, &self.escapes(true)))
    }

    /// Every analytic bound that contradicts the exact kernel on the same
    /// partition, beyond a relative slack of `1e-30`.
    pub fn discrepancies(&self, kernel: &LevelKernel<ExtendedReal>) -> Result<Vec<Discrepancy>> {
        if kernel.top() != self.top {
            return Err(Error::MismatchedPartition);
        }
        let slack = ExtendedReal::from_f64(self.prec, 1e-30);
        let one = ExtendedReal::one(self.prec);
        let mut out = Vec::new();
        // `bound` must be >= exact when `is_upper`, <= exact otherwise
        let mut check = |quantity, i, l, bound: ExtendedReal, exact: ExtendedReal, is_upper: bool| {
            let bad = if is_upper {
                bound < exact.clone() * &(one.clone() - &slack)
            } else {
                bound > exact.clone() * &(one.clone() + &slack)
            };
            if bad {
                out.push(Discrepancy {
                    quantity,
                    i,
                    l,
                    analytic: bound,
                    exact,
                });
            }
        };
        for i in 2..=self.top {
            for l in 1..i {
                let skip = self.skip_max(i, l).expect("in range");
                check("skip_max", i, l, skip, kernel.range_max(i, 0, l - 1), true);
                let stay = self.stay_min(i, l).expect("in range");
                check("stay_min", i, l, stay, kernel.range_min(i, l, i - 1), false);
            }
        }
        for l in 1..=self.top {
            check("escape_max", l, l, self.escape_max(l), kernel.escape_max(l), true);
            if let Some(lo) = self.escape_min(l) {
                check("escape_min", l, l, lo, kernel.escape_min(l), false);
            }
        }
        if self.benchmark == Benchmark::OneMax {
            let k = self.top;
            for l in 1..k {
                check("skip_min", k, l, self.skip_min(k, l).unwrap(), kernel.range_min(k, 0, l - 1), false);
                check("stay_max", k, l, self.stay_max(k, l).unwrap(), kernel.range_max(k, l, k - 1), true);
            }
        }
        Ok(out)
    }
}

impl SkipBounds<ExtendedReal> for PaperAnalytic {
    fn top(&self) -> usize {
        self.top
    }

    fn context(&self) -> Precision {
        self.prec
    }

    fn skip_max(&self, i: usize, l: usize) -> Option<ExtendedReal> {
        if !(1 <= l && l < i && i <= self.top) {
            return None;
        }
        if self.is_tm1_top(i) {
            return Some(ExtendedReal::one(self.prec));
        }
        let (n, i, l) = (i64::from(self.n), i as i64, l as i64);
        let jump = i - l + 1;
        Some(match self.benchmark {
            Benchmark::OneMax => self.skip_suffix[i as usize][jump as usize].clone(),
            Benchmark::FullyDeceptive => {
                self.binom_q(i - 1, jump)
                    + &(self.q_pow[(n - i + 1) as usize].clone() * &self.keep_pow[(i - 1) as usize])
            }
            Benchmark::TwoMax1 => {
                self.binom_q(i, jump) + &(self.q_pow[(n - i) as usize].clone() * &self.keep_pow[i as usize])
            }
            Benchmark::Deceptive => self.binom_q(i - 1, jump) + &self.binom_q(n - i + 1, n - 2 * i + 2),
        })
    }

    fn stay_min(&self, i: usize, l: usize) -> Option<ExtendedReal> {
        if !(1 <= l && l < i && i <= self.top) {
            return None;
        }
        if self.is_tm1_top(i) {
            return Some(ExtendedReal::one(self.prec) / &ExtendedReal::e(self.prec));
        }
        Some(self.stay_prefix[i][i - l].clone())
    }

    fn skip_min(&self, i: usize, l: usize) -> Option<ExtendedReal> {
        (self.benchmark == Benchmark::OneMax && i == self.top && 1 <= l && l < i)
            .then(|| self.top_suffix[i - l + 1].clone())
    }

    fn stay_max(&self, i: usize, l: usize) -> Option<ExtendedReal> {
        (self.benchmark == Benchmark::OneMax && i == self.top && 1 <= l && l < i)
            .then(|| self.stay_prefix[i][i - l].clone())
    }
}
