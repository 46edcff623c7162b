use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::levels::LevelKernel;
use crate::numeric::{clamp_unit, Real};

use super::{CoefficientTable, Direction, MethodId, StartDistribution};

/// Bounds on the two halves of the mass leaving level `i` when level `l`
/// is the split point: the part that skips past `l` (into `[0, l-1]`) and
/// the part that stays in `[l, i-1]`. Any entry may be unavailable.
pub trait SkipBounds<T: Real> {
    fn top(&self) -> usize;
    fn context(&self) -> T::Context;
    /// Upper bound on `p(i, [0, l-1])`.
    fn skip_max(&self, i: usize, l: usize) -> Option<T>;
    /// Lower bound on `p(i, [l, i-1])`.
    fn stay_min(&self, i: usize, l: usize) -> Option<T>;
    /// Lower bound on `p(i, [0, l-1])`.
    fn skip_min(&self, i: usize, l: usize) -> Option<T>;
    /// Upper bound on `p(i, [l, i-1])`.
    fn stay_max(&self, i: usize, l: usize) -> Option<T>;
}

impl<T: Real> SkipBounds<T> for LevelKernel<T> {
    fn top(&self) -> usize {
        LevelKernel::top(self)
    }

    fn context(&self) -> T::Context {
        LevelKernel::context(self)
    }

    fn skip_max(&self, i: usize, l: usize) -> Option<T> {
        Some(self.range_max(i, 0, l - 1))
    }

    fn stay_min(&self, i: usize, l: usize) -> Option<T> {
        Some(self.range_min(i, l, i - 1))
    }

    fn skip_min(&self, i: usize, l: usize) -> Option<T> {
        Some(self.range_min(i, 0, l - 1))
    }

    fn stay_max(&self, i: usize, l: usize) -> Option<T> {
        Some(self.range_max(i, l, i - 1))
    }
}

pub fn coeff_constant<T: Real>(kernel: &LevelKernel<T>, which: u8) -> Result<CoefficientTable<T>> {
    let ctx = kernel.context();
    let (method, value) = match which {
        0 => (MethodId::Type0, T::zero(ctx)),
        1 => (MethodId::Type1, T::one(ctx)),
        _ => return Err(invalid(format!("constant coefficients are 0 or 1, got {which}"))),
    };
    Ok(CoefficientTable::from_fn(method, kernel.top(), ctx, Some(kernel.partition().clone()), |_, _| {
        value.clone()
    }))
}

// min over k > l of p_min(k, l) / p_max(k, [0, l]); pairs whose denominator
// vanishes say nothing and are skipped. None when no pair qualifies.
fn single_level_floor<T: Real>(kernel: &LevelKernel<T>, l: usize) -> Option<T> {
    let mut best: Option<T> = None;
    for k in (l + 1)..=kernel.top() {
        let den = kernel.range_max(k, 0, l);
        if den.is_zero() {
            continue;
        }
        let ratio = kernel.p_min(k, l).clone() / &den;
        best = Some(match best {
            Some(b) => b.min_of(ratio),
            None => ratio,
        });
    }
    best
}

/// One constant `c` for every pair: the smallest probability, over all
/// `k > l`, of landing exactly on `l` given a jump into `[0, l]`.
pub fn coeff_viscosity<T: Real>(kernel: &LevelKernel<T>) -> Result<CoefficientTable<T>> {
    kernel.require_escapes()?;
    let ctx = kernel.context();
    let c = (1..kernel.top())
        .filter_map(|l| single_level_floor(kernel, l))
        .reduce(|a, b| a.min_of(b))
        .map_or_else(|| T::one(ctx), |c| clamp_unit(c, "viscosity"));
    let mut table =
        CoefficientTable::from_fn(MethodId::Viscosity, kernel.top(), ctx, Some(kernel.partition().clone()), |_, _| {
            c.clone()
        });
    table.scalar = Some(c);
    Ok(table)
}

/// Per-level `c_l`: the viscosity-style floor at `l`, further capped by the
/// chance that the start already lies on `l` given it lies in `[0, l]`.
/// A start law with no mass on `[0, l]` gives `c_l = 0`.
pub fn coeff_visit_probability<T: Real>(
    kernel: &LevelKernel<T>,
    start: &StartDistribution<T>,
) -> Result<CoefficientTable<T>> {
    kernel.require_escapes()?;
    if start.top() != kernel.top() {
        return Err(invalid("start distribution and kernel have different level counts"));
    }
    let ctx = kernel.context();
    let probs = start.probabilities();
    let mut per_level = vec![T::zero(ctx); kernel.top() + 1];
    let mut below = T::zero(ctx);
    for l in 0..=kernel.top() {
        below += &probs[l];
        if l == 0 || l == kernel.top() {
            continue;
        }
        let start_term = if below.is_zero() {
            T::zero(ctx)
        } else {
            probs[l].clone() / &below
        };
        let c = match single_level_floor(kernel, l) {
            Some(kernel_term) => kernel_term.min_of(start_term),
            None => start_term,
        };
        per_level[l] = clamp_unit(c, "visit probability");
    }
    let mut table = CoefficientTable::from_fn(
        MethodId::VisitProbability,
        kernel.top(),
        ctx,
        Some(kernel.partition().clone()),
        |_, l| per_level[l].clone(),
    );
    table.per_level = Some(per_level);
    Ok(table)
}

// Single-level conditional probabilities r(k, l) for l < k.
fn single_level_ratios<T: Real>(kernel: &LevelKernel<T>, direction: Direction) -> Result<Vec<Vec<T>>> {
    (0..=kernel.top())
        .map(|k| {
            (0..k)
                .map(|l| {
                    let (lo, hi) = kernel.conditional_probability(k, l, l)?;
                    Ok(match direction {
                        Direction::Lower => lo,
                        Direction::Upper => hi,
                    })
                })
                .collect()
        })
        .collect()
}

// Assembles a table from columns computed independently per level l; column
// l holds c(l+1..=K, l).
fn from_columns<T: Real>(
    method: MethodId,
    kernel: &LevelKernel<T>,
    columns: Vec<Vec<T>>,
) -> CoefficientTable<T> {
    CoefficientTable::from_fn(method, kernel.top(), kernel.context(), Some(kernel.partition().clone()), |k, l| {
        columns[l][k - l - 1].clone()
    })
}

/// Coefficients from the recursions taken with equality:
/// `c(k,l) = r(k,l) + sum_{j=l+1}^{k-1} r(k,j) c(j,l)`, using `r_min` for
/// the lower direction and `r_max` for the upper one.
pub fn coeff_recursive<T: Real>(kernel: &LevelKernel<T>, direction: Direction) -> Result<CoefficientTable<T>> {
    kernel.require_escapes()?;
    let r = single_level_ratios(kernel, direction)?;
    let top = kernel.top();
    let columns: Vec<Vec<T>> = (0..top.max(1))
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                return Vec::new();
            }
            let mut column: Vec<T> = Vec::with_capacity(top - l);
            for k in (l + 1)..=top {
                let mut c = r[k][l].clone();
                for j in (l + 1)..k {
                    c += &(r[k][j].clone() * &column[j - l - 1]);
                }
                column.push(clamp_unit(c, "recursive coefficient"));
            }
            column
        })
        .collect();
    let method = match direction {
        Direction::Lower => MethodId::RecursiveLower,
        Direction::Upper => MethodId::RecursiveUpper,
    };
    Ok(from_columns(method, kernel, columns))
}

/// `c(k,l) = prod_{i=l+1}^{k} r_min(i, [l, i-1])`: the chance of landing
/// somewhere in `[l, i-1]` at every step down from `k`, which forces a
/// visit to `l`.
pub fn coeff_digraph_product<T: Real>(kernel: &LevelKernel<T>) -> Result<CoefficientTable<T>> {
    kernel.require_escapes()?;
    let top = kernel.top();
    let ctx = kernel.context();
    let columns: Vec<Vec<T>> = (0..top.max(1))
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                return Ok(Vec::new());
            }
            let mut running = T::one(ctx);
            let mut column = Vec::with_capacity(top - l);
            for i in (l + 1)..=top {
                let (r_min, _) = kernel.conditional_probability(i, l, i - 1)?;
                running *= &r_min;
                column.push(clamp_unit(running.clone(), "digraph product"));
            }
            Ok(column)
        })
        .collect::<Result<_>>()?;
    Ok(from_columns(MethodId::DigraphProduct, kernel, columns))
}

fn missing(what: &str, i: usize, l: usize) -> Error {
    Error::Unsupported(format!("provider has no {what} bound at ({i}, {l})"))
}

// 1 / (1 + skip / stay), with a vanishing stay giving 0 and a vanishing skip 1.
fn ratio_factor<T: Real>(skip: T, stay: T) -> T {
    let ctx = skip.context();
    if stay.is_zero() {
        return T::zero(ctx);
    }
    if skip.is_zero() {
        return T::one(ctx);
    }
    stay.clone() / &(stay + &skip)
}

fn lower_factor<T: Real, P: SkipBounds<T> + ?Sized>(provider: &P, i: usize, l: usize) -> Result<T> {
    let skip = provider.skip_max(i, l).ok_or_else(|| missing("skip_max", i, l))?;
    let stay = provider.stay_min(i, l).ok_or_else(|| missing("stay_min", i, l))?;
    Ok(ratio_factor(skip, stay))
}

fn upper_value<T: Real, P: SkipBounds<T> + ?Sized>(provider: &P, k: usize, l: usize) -> Result<T> {
    let skip = provider.skip_min(k, l).ok_or_else(|| missing("skip_min", k, l))?;
    let stay = provider.stay_max(k, l).ok_or_else(|| missing("stay_max", k, l))?;
    Ok(ratio_factor(skip, stay))
}

/// Row `k` of the ratio coefficients, indexed from `l = 1`. Lower:
/// `prod_{i=l+1}^{k} 1/(1 + skip_max(i,l)/stay_min(i,l))`; upper: the single
/// factor `1/(1 + skip_min(k,l)/stay_max(k,l))`.
pub fn ratio_row<T: Real, P: SkipBounds<T> + ?Sized>(
    provider: &P,
    direction: Direction,
    k: usize,
) -> Result<Vec<T>> {
    let ctx = provider.context();
    (1..k)
        .map(|l| {
            let value = match direction {
                Direction::Lower => {
                    let mut product = T::one(ctx);
                    for i in (l + 1)..=k {
                        product *= &lower_factor(provider, i, l)?;
                    }
                    product
                }
                Direction::Upper => upper_value(provider, k, l)?,
            };
            Ok(clamp_unit(value, "ratio coefficient"))
        })
        .collect()
}

/// Full ratio table. The lower direction extends one running product per
/// `l`, so the cost is one factor per pair.
pub fn coeff_ratio<T: Real, P: SkipBounds<T> + Sync + ?Sized>(
    provider: &P,
    direction: Direction,
) -> Result<CoefficientTable<T>> {
    let top = provider.top();
    let ctx = provider.context();
    let columns: Vec<Vec<T>> = (0..top.max(1))
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                return Ok(Vec::new());
            }
            let mut running = T::one(ctx);
            ((l + 1)..=top)
                .map(|k| {
                    let value = match direction {
                        Direction::Lower => {
                            running *= &lower_factor(provider, k, l)?;
                            running.clone()
                        }
                        Direction::Upper => upper_value(provider, k, l)?,
                    };
                    Ok(clamp_unit(value, "ratio coefficient"))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let method = match direction {
        Direction::Lower => MethodId::RatioLower,
        Direction::Upper => MethodId::RatioUpper,
    };
    Ok(CoefficientTable::from_fn(method, top, ctx, None, |k, l| columns[l][k - l - 1].clone()))
}

/// `c(k,l) = r_max(k, [l, k-1])`.
pub fn coeff_conditional_upper<T: Real>(kernel: &LevelKernel<T>) -> Result<CoefficientTable<T>> {
    kernel.require_escapes()?;
    let top = kernel.top();
    let rows: Vec<Vec<T>> = (0..=top)
        .map(|k| {
            (0..k)
                .map(|l| {
                    if l == 0 {
                        Ok(T::zero(kernel.context()))
                    } else {
                        Ok(kernel.conditional_probability(k, l, k - 1)?.1)
                    }
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    Ok(CoefficientTable::from_fn(
        MethodId::ConditionalUpper,
        top,
        kernel.context(),
        Some(kernel.partition().clone()),
        |k, l| rows[k][l].clone(),
    ))
}

/// Dispatches on `method` for every kernel-based family.
pub fn coefficients<T: Real>(
    kernel: &LevelKernel<T>,
    method: MethodId,
    start: &StartDistribution<T>,
) -> Result<CoefficientTable<T>> {
    let mut table = match method {
        MethodId::Type0 => coeff_constant(kernel, 0),
        MethodId::Type1 => coeff_constant(kernel, 1),
        MethodId::Viscosity => coeff_viscosity(kernel),
        MethodId::VisitProbability => coeff_visit_probability(kernel, start),
        MethodId::RecursiveLower => coeff_recursive(kernel, Direction::Lower),
        MethodId::RecursiveUpper => coeff_recursive(kernel, Direction::Upper),
        MethodId::DigraphProduct => coeff_digraph_product(kernel),
        MethodId::RatioLower => {
            kernel.require_escapes()?;
            coeff_ratio(kernel, Direction::Lower)
        }
        MethodId::RatioUpper => {
            kernel.require_escapes()?;
            coeff_ratio(kernel, Direction::Upper)
        }
        MethodId::ConditionalUpper => coeff_conditional_upper(kernel),
        MethodId::PaperAnalyticLower | MethodId::PaperAnalyticUpper => Err(Error::Unsupported(
            "paper-analytic coefficients come from PaperAnalytic, not a kernel".into(),
        )),
    }?;
    if table.partition.is_none() {
        table.partition = Some(kernel.partition().clone());
    }
    Ok(table)
}
