use rug::ops::Pow;
use rug::Integer;

use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, clamp_unit, Real};
use crate::problem::ProblemSpec;

use super::partition::{LevelPartition, PartitionKind};

/// Numerators of the weight-to-weight mutation law from weight `w`; entry
/// `w'` over `n^n` is the probability that a mutant has `w'` ones.
pub fn weight_transition_numerators(n: u32, w: u32) -> Vec<Integer> {
    let powers = flip_powers(n);
    numerators_with(n, w, &powers)
}

// (n-1)^(n-d): the weight of one specific mask with d flipped bits, times n^n.
fn flip_powers(n: u32) -> Vec<Integer> {
    (0..=n).map(|d| Integer::from(n - 1).pow(n - d)).collect()
}

fn numerators_with(n: u32, w: u32, powers: &[Integer]) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n as usize + 1];
    for a in 0..=w {
        let ones = binomial(w, a);
        for b in 0..=(n - w) {
            let term = Integer::from(&ones * &binomial(n - w, b)) * &powers[(a + b) as usize];
            out[(w - a + b) as usize] += term;
        }
    }
    out
}

/// Probability that standard bit mutation at rate `1/n` turns a string with
/// `w` ones into one with `w_after` ones.
pub fn weight_transition_probability<T: Real>(
    n: u32,
    w: u32,
    w_after: u32,
    ctx: T::Context,
) -> Result<T> {
    if n == 0 || w > n || w_after > n {
        return Err(invalid(format!("weights ({w}, {w_after}) outside [0, {n}]")));
    }
    let shift = i64::from(w_after) - i64::from(w);
    let mut num = Integer::new();
    for a in 0..=w {
        let b = i64::from(a) + shift;
        if b < 0 || b > i64::from(n - w) {
            continue;
        }
        let b = b as u32;
        num += binomial(w, a) * binomial(n - w, b) * Integer::from(n - 1).pow(n - a - b);
    }
    Ok(T::from_ratio(ctx, &num, &Integer::from(n).pow(n)))
}

/// Level-to-level transition probabilities, with separate lower and upper
/// tables so that bound-only kernels fit the same interface.
///
/// Range sums are cached as prefix sums `[0, j]` and suffix sums `[j, k-1]`,
/// both accumulated by addition only; differencing cumulative sums loses
/// everything when tiny and large probabilities share a row.
#[derive(Clone, Debug)]
pub struct LevelKernel<T: Real> {
    partition: LevelPartition,
    exact: bool,
    p_min: Vec<Vec<T>>,
    p_max: Vec<Vec<T>>,
    self_loop: Vec<Option<T>>,
    prefix_min: Vec<Vec<T>>,
    prefix_max: Vec<Vec<T>>,
    suffix_min: Vec<Vec<T>>,
    suffix_max: Vec<Vec<T>>,
    folded: Vec<T>,
    ctx: T::Context,
}

impl<T: Real> LevelKernel<T> {
    /// Exact kernel of the (1+1) EA under `partition`.
    ///
    /// Every level except level 0 must be a single weight class. Accepted
    /// moves that land on a retained level with a larger index (possible
    /// only in a level partition whose order breaks fitness) are counted as
    /// absorption; see [`LevelKernel::folded_mass`].
    pub fn build(spec: &ProblemSpec, partition: &LevelPartition, ctx: T::Context) -> Result<Self> {
        let n = spec.n();
        if partition.n() != n {
            return Err(Error::MismatchedPartition);
        }
        let top = partition.top();
        for k in 1..=top {
            let classes = partition.level(k).weights.len();
            if classes != 1 {
                return Err(Error::UnsupportedPartition { level: k, classes });
            }
        }
        let powers = flip_powers(n);
        let denom = Integer::from(n).pow(n);
        let mut p = vec![Vec::new()];
        let mut self_loop = vec![Some(T::one(ctx))];
        let mut folded = vec![T::zero(ctx)];
        for k in 1..=top {
            let w = partition.single_weight(k).expect("checked above");
            let numerators = numerators_with(n, w, &powers);
            let mut acc = vec![Integer::new(); k];
            let mut stay = Integer::new();
            let mut backward = Integer::new();
            for (target, num) in numerators.into_iter().enumerate() {
                let target = target as u32;
                if target == w || spec.fitness(target) < spec.fitness(w) {
                    stay += num;
                    continue;
                }
                let ell = partition.level_of_weight(target);
                if ell < k {
                    acc[ell] += num;
                } else {
                    debug_assert!(ell > k && partition.kind() == PartitionKind::Level);
                    acc[0] += &num;
                    backward += num;
                }
            }
            debug_assert_eq!(
                acc.iter().fold(stay.clone(), |s, x| s + x),
                denom,
                "row {k} does not sum to one"
            );
            if backward != 0 {
                log::info!("level {k}: accepted moves to deeper retained levels folded into level 0");
            }
            p.push(acc.iter().map(|x| T::from_ratio(ctx, x, &denom)).collect());
            self_loop.push(Some(T::from_ratio(ctx, &stay, &denom)));
            folded.push(T::from_ratio(ctx, &backward, &denom));
        }
        let kernel = Self::assemble(partition.clone(), true, p.clone(), p, self_loop, folded, ctx);
        kernel.check_stochastic()?;
        Ok(kernel)
    }

    /// Kernel from externally supplied bounds: `p_min[k][l]` and `p_max[k][l]`
    /// for `l < k`. Marked exact only when the tables coincide.
    pub fn from_tables(
        partition: LevelPartition,
        p_min: Vec<Vec<T>>,
        p_max: Vec<Vec<T>>,
        ctx: T::Context,
    ) -> Result<Self> {
        let levels = partition.top() + 1;
        if p_min.len() != levels || p_max.len() != levels {
            return Err(invalid("tables need one row per level"));
        }
        let zero = T::zero(ctx);
        let one = T::one(ctx);
        for k in 0..levels {
            if p_min[k].len() != k || p_max[k].len() != k {
                return Err(invalid(format!("row {k} must have {k} entries")));
            }
            for l in 0..k {
                let (lo, hi) = (&p_min[k][l], &p_max[k][l]);
                if *lo < zero || lo > hi || *hi > one {
                    return Err(invalid(format!("entry ({k}, {l}) violates 0 <= p_min <= p_max <= 1")));
                }
            }
        }
        let exact = p_min == p_max;
        let self_loop = (0..levels)
            .map(|k| {
                if k == 0 {
                    Some(T::one(ctx))
                } else if exact {
                    let moved = p_min[k].iter().fold(T::zero(ctx), |s, x| s + x);
                    Some(clamp_unit(T::one(ctx) - &moved, "self-loop"))
                } else {
                    None
                }
            })
            .collect();
        let folded = vec![T::zero(ctx); levels];
        Ok(Self::assemble(partition, exact, p_min, p_max, self_loop, folded, ctx))
    }

    fn assemble(
        partition: LevelPartition,
        exact: bool,
        p_min: Vec<Vec<T>>,
        p_max: Vec<Vec<T>>,
        self_loop: Vec<Option<T>>,
        folded: Vec<T>,
        ctx: T::Context,
    ) -> Self {
        let prefix = |rows: &Vec<Vec<T>>| -> Vec<Vec<T>> {
            rows.iter()
                .map(|row| {
                    let mut acc = T::zero(ctx);
                    row.iter()
                        .map(|x| {
                            acc += x;
                            acc.clone()
                        })
                        .collect()
                })
                .collect()
        };
        let suffix = |rows: &Vec<Vec<T>>| -> Vec<Vec<T>> {
            rows.iter()
                .map(|row| {
                    let mut acc = T::zero(ctx);
                    let mut out: Vec<T> = row
                        .iter()
                        .rev()
                        .map(|x| {
                            acc += x;
                            acc.clone()
                        })
                        .collect();
                    out.reverse();
                    out
                })
                .collect()
        };
        LevelKernel {
            prefix_min: prefix(&p_min),
            prefix_max: prefix(&p_max),
            suffix_min: suffix(&p_min),
            suffix_max: suffix(&p_max),
            partition,
            exact,
            p_min,
            p_max,
            self_loop,
            folded,
            ctx,
        }
    }

    fn check_stochastic(&self) -> Result<()> {
        let tol = T::epsilon(self.ctx) * &T::from_u64(self.ctx, 4 * (self.top() as u64 + 1));
        for k in 1..=self.top() {
            let stay = self.self_loop(k).expect("exact kernel");
            let total = self.escape_min(k) + stay;
            let gap = (total - &T::one(self.ctx)).abs();
            if gap > tol {
                return Err(invalid(format!("row {k} of the kernel does not sum to 1")));
            }
        }
        Ok(())
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn context(&self) -> T::Context {
        self.ctx
    }

    /// `K`, the index of the deepest level.
    pub fn top(&self) -> usize {
        self.partition.top()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn p_min(&self, k: usize, l: usize) -> &T {
        &self.p_min[k][l]
    }

    pub fn p_max(&self, k: usize, l: usize) -> &T {
        &self.p_max[k][l]
    }

    /// Probability of staying put, when known.
    pub fn self_loop(&self, k: usize) -> Option<&T> {
        self.self_loop[k].as_ref()
    }

    /// Mass of accepted moves from level `k` to deeper retained levels that
    /// was counted as absorption.
    pub fn folded_mass(&self, k: usize) -> &T {
        &self.folded[k]
    }

    fn range(&self, k: usize, lo: usize, hi: usize, upper: bool) -> T {
        assert!(lo <= hi && hi < k, "range [{lo}, {hi}] is not below level {k}");
        let (rows, prefix, suffix) = if upper {
            (&self.p_max, &self.prefix_max, &self.suffix_max)
        } else {
            (&self.p_min, &self.prefix_min, &self.suffix_min)
        };
        if lo == 0 {
            prefix[k][hi].clone()
        } else if hi == k - 1 {
            suffix[k][lo].clone()
        } else {
            rows[k][lo..=hi].iter().fold(T::zero(self.ctx), |s, x| s + x)
        }
    }

    /// Lower bound on `p(k, [lo, hi])`.
    pub fn range_min(&self, k: usize, lo: usize, hi: usize) -> T {
        self.range(k, lo, hi, false)
    }

    /// Upper bound on `p(k, [lo, hi])`.
    pub fn range_max(&self, k: usize, lo: usize, hi: usize) -> T {
        self.range(k, lo, hi, true)
    }

    /// Lower bound on the probability of leaving level `k`.
    pub fn escape_min(&self, k: usize) -> T {
        self.range_min(k, 0, k - 1)
    }

    pub fn escape_max(&self, k: usize) -> T {
        self.range_max(k, 0, k - 1)
    }

    /// `(r_min, r_max)` for the move from level `k` into `[lo, hi]`,
    /// conditioned on leaving `k`.
    pub fn conditional_probability(&self, k: usize, lo: usize, hi: usize) -> Result<(T, T)> {
        if !(lo <= hi && hi < k && k <= self.top()) {
            return Err(invalid(format!("need lo <= hi < k <= K, got ({lo}, {hi}, {k})")));
        }
        let floor = self.escape_min(k);
        if floor.is_zero() {
            return Err(Error::Absorbing(k));
        }
        let r_min = self.range_min(k, lo, hi) / &self.escape_max(k);
        let r_max = self.range_max(k, lo, hi) / &floor;
        Ok((clamp_unit(r_min, "r_min"), clamp_unit(r_max, "r_max")))
    }

    /// Fails when some non-optimal level can never move up.
    pub fn require_escapes(&self) -> Result<()> {
        match (1..=self.top()).find(|&k| self.escape_min(k).is_zero()) {
            Some(k) => Err(Error::Absorbing(k)),
            None => Ok(()),
        }
    }
}
