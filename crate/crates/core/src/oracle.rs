//! Ground truth for the bounds: exact mean hitting times from the level
//! chain, and independently from enumerating every bit string.

use std::collections::HashMap;

use rug::ops::Pow;
use rug::Integer;

use crate::error::{invalid, Error, Result};
use crate::levels::{LevelKernel, LevelPartition};
use crate::numeric::Real;
use crate::problem::ProblemSpec;

pub const FULL_STATE_GUARD: usize = 20;
pub const FULL_STATE_EXACT_GUARD: usize = 12;
pub const PATH_SUM_GUARD: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum HittingTime<T> {
    Finite(T),
    /// The level can be trapped forever with positive probability.
    Unreachable,
}

impl<T: Real> HittingTime<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            HittingTime::Finite(v) => Some(v),
            HittingTime::Unreachable => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    LevelChain,
    FullState,
}

impl OracleMode {
    pub fn name(self) -> &'static str {
        match self {
            OracleMode::LevelChain => "level_chain",
            OracleMode::FullState => "full_state",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult<T: Real> {
    pub mode: OracleMode,
    /// `m_k` for every level, `m_0 = 0`.
    pub per_level: Vec<HittingTime<T>>,
    /// Full-state mode only: mean hitting time of each weight class.
    pub per_weight: Option<Vec<T>>,
    /// Full-state mode only: largest relative gap between a class value and
    /// the first-step value recomputed for a single string in that class.
    pub lumpability_deviation: Option<T>,
}

impl<T: Real> OracleResult<T> {
    pub fn finite(&self, k: usize) -> Option<&T> {
        self.per_level[k].value()
    }
}

/// Backward substitution on the level chain:
/// `m_k = (1 + sum_{l=1}^{k-1} p(k,l) m_l) / p(k,[0,k-1])`.
pub fn exact_level_hitting<T: Real>(kernel: &LevelKernel<T>) -> Result<OracleResult<T>> {
    if !kernel.is_exact() {
        return Err(Error::Unsupported("the level-chain oracle needs an exact kernel".into()));
    }
    let ctx = kernel.context();
    let mut per_level = vec![HittingTime::Finite(T::zero(ctx))];
    for k in 1..=kernel.top() {
        let escape = kernel.escape_min(k);
        let mut numerator = T::one(ctx);
        let mut trapped = escape.is_zero();
        for l in 1..k {
            let p = kernel.p_min(k, l);
            if p.is_zero() {
                continue;
            }
            match &per_level[l] {
                HittingTime::Finite(m) => numerator += &(p.clone() * m),
                HittingTime::Unreachable => trapped = true,
            }
        }
        per_level.push(if trapped {
            HittingTime::Unreachable
        } else {
            HittingTime::Finite(numerator / &escape)
        });
    }
    Ok(OracleResult {
        mode: OracleMode::LevelChain,
        per_level,
        per_weight: None,
        lumpability_deviation: None,
    })
}

/// `counts[a * (bits + 1) + b]` = number of masks over `bits` positions that
/// flip `a` ones and `b` zeros of `h`.
fn half_histogram(h: u32, bits: u32) -> Vec<u64> {
    let width = bits as usize + 1;
    let full = if bits == 0 { 0 } else { (1u32 << bits) - 1 };
    let mut counts = vec![0u64; width * width];
    for m in 0..=full {
        let a = (h & m).count_ones() as usize;
        let b = (!h & full & m).count_ones() as usize;
        counts[a * width + b] += 1;
    }
    counts
}

// Histograms of every half string, deduplicated by content.
fn half_tables(bits: u32) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut ids = Vec::with_capacity(1 << bits);
    let mut tables: Vec<Vec<u64>> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for h in 0..(1u32 << bits) {
        let t = half_histogram(h, bits);
        let id = *seen.entry(t.clone()).or_insert_with(|| {
            tables.push(t);
            tables.len() - 1
        });
        ids.push(id);
    }
    (ids, tables)
}

/// For every string `x`, the number of masks flipping `a` of its ones and
/// `b` of its zeros, as `hist[a][b]`. Built from the two halves of `x`,
/// each enumerated exhaustively. Returns one histogram id per string and
/// the distinct histograms.
pub fn mask_histograms(n: u32) -> (Vec<usize>, Vec<Vec<Vec<u64>>>) {
    let lo_bits = n / 2;
    let hi_bits = n - lo_bits;
    let (lo_ids, lo_tables) = half_tables(lo_bits);
    let (hi_ids, hi_tables) = half_tables(hi_bits);
    let (wl, wh) = (lo_bits as usize + 1, hi_bits as usize + 1);
    let width = n as usize + 1;

    let mut pair_id = vec![usize::MAX; lo_tables.len() * hi_tables.len()];
    let mut distinct: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut seen: HashMap<Vec<Vec<u64>>, usize> = HashMap::new();
    let mut ids = Vec::with_capacity(1usize << n);
    for x in 0u32..(1u32 << n) {
        let (lo, hi) = (x & ((1 << lo_bits) - 1), x >> lo_bits);
        let slot = lo_ids[lo as usize] * hi_tables.len() + hi_ids[hi as usize];
        if pair_id[slot] == usize::MAX {
            let (tl, th) = (&lo_tables[lo_ids[lo as usize]], &hi_tables[hi_ids[hi as usize]]);
            let mut hist = vec![vec![0u64; width]; width];
            for (i, &cl) in tl.iter().enumerate().filter(|(_, c)| **c > 0) {
                for (j, &ch) in th.iter().enumerate().filter(|(_, c)| **c > 0) {
                    hist[i / wl + j / wh][i % wl + j % wh] += cl * ch;
                }
            }
            pair_id[slot] = *seen.entry(hist.clone()).or_insert_with(|| {
                distinct.push(hist);
                distinct.len() - 1
            });
        }
        ids.push(pair_id[slot]);
    }
    (ids, distinct)
}

/// Mean hitting times by brute force over all `2^n` strings.
///
/// Strings are grouped by their mask histogram; all strings of one weight
/// must share a histogram, otherwise lumping by weight is refused. The
/// weight chain is solved by Gaussian elimination, and each distinct
/// string-level first-step equation is then re-evaluated against that
/// solution to measure the lumping error.
pub fn exact_full_hitting<T: Real>(spec: &ProblemSpec, ctx: T::Context) -> Result<OracleResult<T>> {
    let n = spec.n();
    let exact = T::epsilon(ctx).is_zero();
    let limit = if exact { FULL_STATE_EXACT_GUARD } else { FULL_STATE_GUARD };
    if n as usize > limit {
        return Err(Error::Guard {
            what: "full-state enumeration",
            value: n as usize,
            limit,
        });
    }
    let width = n as usize + 1;
    let (ids, hists) = mask_histograms(n);
    let mut class_hist: Vec<Option<usize>> = vec![None; width];
    for (x, &id) in ids.iter().enumerate() {
        let w = (x as u32).count_ones() as usize;
        match class_hist[w] {
            None => class_hist[w] = Some(id),
            Some(prev) if prev != id => {
                return Err(Error::Unsupported(format!(
                    "strings of weight {w} have different mutation histograms"
                )))
            }
            Some(_) => {}
        }
    }

    let powers: Vec<Integer> = (0..=n).map(|d| Integer::from(n - 1).pow(n - d)).collect();
    let denom = Integer::from(n).pow(n);
    let fitness_of = |x: u32| spec.fitness(x.count_ones());
    let weight_fitness = |w: usize| fitness_of(if w == 0 { 0 } else { (1u32 << w) - 1 });

    // Accepted moves to other strings, by target weight, as numerators over n^n.
    let moves = |w: usize, hist: &Vec<Vec<u64>>| -> Vec<Integer> {
        let mut out = vec![Integer::new(); width];
        for a in 0..=w {
            for b in 0..(width - w) {
                let count = hist[a][b];
                if count == 0 || (a == 0 && b == 0) {
                    continue;
                }
                let target = w - a + b;
                if weight_fitness(target) >= weight_fitness(w) {
                    out[target] += Integer::from(count) * &powers[a + b];
                }
            }
        }
        out
    };

    let best = spec.max_fitness();
    let open: Vec<usize> = (0..width).filter(|&w| weight_fitness(w) != best).collect();
    let index_of: HashMap<usize, usize> = open.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let size = open.len();
    let mut matrix = vec![vec![T::zero(ctx); size + 1]; size];
    for (row, &w) in open.iter().enumerate() {
        let hist = &hists[class_hist[w].expect("every weight occurs")];
        let out = moves(w, hist);
        let leaving: Integer = out.iter().enumerate().filter(|(t, _)| *t != w).map(|(_, v)| v).sum();
        matrix[row][row] = T::from_ratio(ctx, &leaving, &denom);
        for (target, num) in out.iter().enumerate() {
            if target == w || *num == 0 {
                continue;
            }
            if let Some(&col) = index_of.get(&target) {
                matrix[row][col] -= &T::from_ratio(ctx, num, &denom);
            }
        }
        matrix[row][size] = T::one(ctx);
    }
    let solution = gaussian_solve(matrix)?;
    let mut per_weight = vec![T::zero(ctx); width];
    for (i, &w) in open.iter().enumerate() {
        per_weight[w] = solution[i].clone();
    }

    let mut deviation = T::zero(ctx);
    let mut checked: Vec<bool> = vec![false; hists.len()];
    for (x, &id) in ids.iter().enumerate() {
        let w = (x as u32).count_ones() as usize;
        if checked[id] || !index_of.contains_key(&w) {
            continue;
        }
        checked[id] = true;
        let out = moves(w, &hists[id]);
        let mut mass = T::zero(ctx);
        let mut value = T::one(ctx);
        for (target, num) in out.iter().enumerate() {
            if *num == 0 {
                continue;
            }
            let p = T::from_ratio(ctx, num, &denom);
            value += &(p.clone() * &per_weight[target]);
            mass += &p;
        }
        let local = value / &mass;
        let gap = (local - &per_weight[w]).abs() / &per_weight[w];
        deviation = deviation.max_of(gap);
    }

    let partition = LevelPartition::fitness_levels(spec);
    let per_level = partition
        .levels()
        .iter()
        .enumerate()
        .map(|(k, level)| {
            if k == 0 {
                HittingTime::Finite(T::zero(ctx))
            } else {
                HittingTime::Finite(per_weight[level.weights[0] as usize].clone())
            }
        })
        .collect();
    Ok(OracleResult {
        mode: OracleMode::FullState,
        per_level,
        per_weight: Some(per_weight),
        lumpability_deviation: Some(deviation),
    })
}

/// Solves an augmented system `[A | b]` with partial pivoting.
fn gaussian_solve<T: Real>(mut m: Vec<Vec<T>>) -> Result<Vec<T>> {
    let size = m.len();
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).expect("ordered"))
            .expect("non-empty");
        if m[pivot][col].is_zero() {
            return Err(invalid("singular first-step system"));
        }
        m.swap(col, pivot);
        for row in (col + 1)..size {
            if m[row][col].is_zero() {
                continue;
            }
            let factor = m[row][col].clone() / &m[col][col];
            for j in col..=size {
                let delta = factor.clone() * &m[col][j];
                m[row][j] -= &delta;
            }
        }
    }
    let mut x: Vec<T> = Vec::with_capacity(size);
    for row in (0..size).rev() {
        let mut acc = m[row][size].clone();
        for (j, xj) in ((row + 1)..size).zip(x.iter().rev()) {
            acc -= &(m[row][j].clone() * xj);
        }
        x.push(acc / &m[row][row]);
    }
    x.reverse();
    Ok(x)
}

/// Sum over every digraph path `k = v_0 > v_1 > ... > v_m = l` of the
/// product of `r_min(v_i, S_{v_{i+1}})`.
pub fn path_sum_coefficient<T: Real>(kernel: &LevelKernel<T>, k: usize, l: usize) -> Result<T> {
    if kernel.top() > PATH_SUM_GUARD {
        return Err(Error::Guard {
            what: "path enumeration",
            value: kernel.top(),
            limit: PATH_SUM_GUARD,
        });
    }
    if !(1 <= l && l < k && k <= kernel.top()) {
        return Err(invalid(format!("need 1 <= l < k <= K, got ({k}, {l})")));
    }
    kernel.require_escapes()?;
    let mut r = vec![Vec::new()];
    for i in 1..=k {
        r.push((0..i).map(|j| kernel.conditional_probability(i, j, j).map(|x| x.0)).collect::<Result<Vec<T>>>()?);
    }
    fn walk<T: Real>(r: &[Vec<T>], at: usize, target: usize, weight: T, total: &mut T) {
        for next in target..at {
            if r[at][next].is_zero() {
                continue;
            }
            let w = weight.clone() * &r[at][next];
            if next == target {
                *total += &w;
            } else {
                walk(r, next, target, w, total);
            }
        }
    }
    let ctx = kernel.context();
    let mut total = T::zero(ctx);
    walk(&r, k, l, T::one(ctx), &mut total);
    Ok(total)
}

/// Probability that the chain started on `start` ever occupies each level.
pub fn visit_probabilities<T: Real>(kernel: &LevelKernel<T>, start: usize) -> Result<Vec<T>> {
    if start > kernel.top() {
        return Err(invalid(format!("level {start} does not exist")));
    }
    let ctx = kernel.context();
    let mut v = vec![T::zero(ctx); kernel.top() + 1];
    v[start] = T::one(ctx);
    for i in (1..=start).rev() {
        if v[i].is_zero() {
            continue;
        }
        let escape = kernel.escape_min(i);
        if escape.is_zero() {
            return Err(Error::Absorbing(i));
        }
        for j in 0..i {
            let step = v[i].clone() * kernel.p_min(i, j) / &escape;
            v[j] += &step;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Exact, ExtendedReal, Precision};
    use crate::problem::Benchmark;
    use rug::Rational;

    fn q(num: i64, den: i64) -> Exact {
        Exact::from(Rational::from((num, den)))
    }

    fn kernel(b: Benchmark, n: u32) -> LevelKernel<Exact> {
        let spec = ProblemSpec::new(b, n).unwrap();
        LevelKernel::build(&spec, &LevelPartition::fitness_levels(&spec), ()).unwrap()
    }

    #[test]
    fn two_bit_level_chains() {
        for b in [Benchmark::OneMax, Benchmark::FullyDeceptive] {
            let r = exact_level_hitting(&kernel(b, 2)).unwrap();
            let values: Vec<Exact> = r.per_level.iter().map(|m| m.value().unwrap().clone()).collect();
            assert_eq!(values, vec![q(0, 1), q(4, 1), q(4, 1)], "{b}");
        }
    }

    #[test]
    fn histograms_match_direct_enumeration() {
        for n in [2u32, 3, 5, 6] {
            let (ids, hists) = mask_histograms(n);
            for x in 0..(1u32 << n) {
                let full = (1u32 << n) - 1;
                let mut direct = vec![vec![0u64; n as usize + 1]; n as usize + 1];
                for m in 0..=full {
                    direct[(x & m).count_ones() as usize][(!x & full & m).count_ones() as usize] += 1;
                }
                assert_eq!(hists[ids[x as usize]], direct, "n={n}, x={x:b}");
            }
        }
    }

    #[test]
    fn full_state_two_bits() {
        let spec = ProblemSpec::new(Benchmark::OneMax, 2).unwrap();
        let r = exact_full_hitting::<Exact>(&spec, ()).unwrap();
        assert_eq!(r.finite(1), Some(&q(4, 1)));
        assert_eq!(r.finite(2), Some(&q(4, 1)));
        assert_eq!(r.per_weight.as_ref().unwrap()[2], q(0, 1));
        assert!(r.lumpability_deviation.unwrap().is_zero());
    }

    #[test]
    fn full_state_deceptive_six() {
        let spec = ProblemSpec::new(Benchmark::Deceptive, 6).unwrap();
        let p = Precision::default();
        let full = exact_full_hitting::<ExtendedReal>(&spec, p).unwrap();
        let k = LevelKernel::build(&spec, &LevelPartition::fitness_levels(&spec), p).unwrap();
        let chain = exact_level_hitting(&k).unwrap();
        for level in 0..=k.top() {
            let (a, b) = (full.finite(level).unwrap(), chain.finite(level).unwrap());
            assert!(a.relative_gap(b) < 1e-12);
        }
    }

    #[test]
    fn guards() {
        let big = ProblemSpec::new(Benchmark::OneMax, 21).unwrap();
        assert!(matches!(
            exact_full_hitting::<ExtendedReal>(&big, Precision::default()),
            Err(Error::Guard { .. })
        ));
        let mid = ProblemSpec::new(Benchmark::OneMax, 13).unwrap();
        assert!(exact_full_hitting::<Exact>(&mid, ()).is_err());
        assert!(path_sum_coefficient(&kernel(Benchmark::OneMax, 13), 3, 1).is_err());
    }

    #[test]
    fn path_sums_small() {
        let k = kernel(Benchmark::OneMax, 2);
        assert_eq!(path_sum_coefficient(&k, 2, 1).unwrap(), q(2, 3));
        let k5 = kernel(Benchmark::OneMax, 5);
        for l in 1..5 {
            let r = k5.conditional_probability(l + 1, l, l).unwrap().0;
            assert_eq!(path_sum_coefficient(&k5, l + 1, l).unwrap(), r);
        }
    }

    #[test]
    fn unreachable_levels_are_explicit() {
        let spec = ProblemSpec::new(Benchmark::OneMax, 2).unwrap();
        let part = LevelPartition::fitness_levels(&spec);
        let rows = vec![vec![], vec![q(0, 1)], vec![q(0, 1), q(1, 2)]];
        let k = LevelKernel::from_tables(part, rows.clone(), rows, ()).unwrap();
        let r = exact_level_hitting(&k).unwrap();
        assert_eq!(r.per_level[1], HittingTime::Unreachable);
        assert_eq!(r.per_level[2], HittingTime::Unreachable);
    }

    #[test]
    fn visits_from_the_start() {
        let k = kernel(Benchmark::OneMax, 2);
        let v = visit_probabilities(&k, 2).unwrap();
        assert_eq!(v, vec![q(1, 1), q(2, 3), q(1, 1)]);
    }
}
