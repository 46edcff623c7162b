//! Coefficient families and the linear bounds they produce.
//!
//! A lower bound on the mean hitting time from level `k` has the form
//! `d_k = 1/p(k,[0,k-1]) + sum_l c(k,l) / p(l,[0,l-1])`; the methods differ
//! only in how the coefficients `c(k,l)` are chosen.

mod analytic;
mod appendix;
mod assemble;
mod coefficients;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::levels::LevelPartition;
use crate::numeric::Real;

pub use analytic::{Discrepancy, PaperAnalytic};
pub use appendix::{appendix_products, coefficient_floor_check, AppendixProducts, FloorCheck};
pub use assemble::{assemble_bound, assemble_row, BoundReport};
pub use coefficients::{
    coeff_conditional_upper, coeff_constant, coeff_digraph_product, coeff_ratio, coeff_recursive,
    coeff_visit_probability, coeff_viscosity, coefficients, ratio_row, SkipBounds,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Type0,
    Type1,
    Viscosity,
    VisitProbability,
    RecursiveLower,
    RecursiveUpper,
    DigraphProduct,
    RatioLower,
    ConditionalUpper,
    RatioUpper,
    PaperAnalyticLower,
    PaperAnalyticUpper,
}

impl MethodId {
    pub const ALL: [MethodId; 12] = [
        MethodId::Type0,
        MethodId::Type1,
        MethodId::Viscosity,
        MethodId::VisitProbability,
        MethodId::RecursiveLower,
        MethodId::RecursiveUpper,
        MethodId::DigraphProduct,
        MethodId::RatioLower,
        MethodId::ConditionalUpper,
        MethodId::RatioUpper,
        MethodId::PaperAnalyticLower,
        MethodId::PaperAnalyticUpper,
    ];

    /// Methods computed from the kernel alone.
    pub const KERNEL: [MethodId; 10] = [
        MethodId::Type0,
        MethodId::Type1,
        MethodId::Viscosity,
        MethodId::VisitProbability,
        MethodId::RecursiveLower,
        MethodId::RecursiveUpper,
        MethodId::DigraphProduct,
        MethodId::RatioLower,
        MethodId::ConditionalUpper,
        MethodId::RatioUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Type0 => "type0",
            MethodId::Type1 => "type1",
            MethodId::Viscosity => "viscosity",
            MethodId::VisitProbability => "visit-probability",
            MethodId::RecursiveLower => "recursive-lower",
            MethodId::RecursiveUpper => "recursive-upper",
            MethodId::DigraphProduct => "digraph-product",
            MethodId::RatioLower => "ratio-lower",
            MethodId::ConditionalUpper => "conditional-upper",
            MethodId::RatioUpper => "ratio-upper",
            MethodId::PaperAnalyticLower => "paper-analytic-lower",
            MethodId::PaperAnalyticUpper => "paper-analytic-upper",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            MethodId::Type0
            | MethodId::Viscosity
            | MethodId::VisitProbability
            | MethodId::RecursiveLower
            | MethodId::DigraphProduct
            | MethodId::RatioLower
            | MethodId::PaperAnalyticLower => Direction::Lower,
            _ => Direction::Upper,
        }
    }

    pub fn is_paper_analytic(self) -> bool {
        matches!(self, MethodId::PaperAnalyticLower | MethodId::PaperAnalyticUpper)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let id = match key.as_str() {
            "type0" | "type-0" => MethodId::Type0,
            "type1" | "type-1" => MethodId::Type1,
            "viscosity" | "viscosity-c" => MethodId::Viscosity,
            "visit" | "visit-probability" | "visit-cl" => MethodId::VisitProbability,
            "recursive-lower" => MethodId::RecursiveLower,
            "recursive-upper" => MethodId::RecursiveUpper,
            "digraph-product" | "digraph-product-lower" | "digraph" => MethodId::DigraphProduct,
            "ratio-lower" => MethodId::RatioLower,
            "conditional-upper" => MethodId::ConditionalUpper,
            "ratio-upper" => MethodId::RatioUpper,
            "paper-analytic-lower" | "paper-analytic" => MethodId::PaperAnalyticLower,
            "paper-analytic-upper" => MethodId::PaperAnalyticUpper,
            _ => return Err(invalid(format!("unknown method `{s}`"))),
        };
        Ok(id)
    }
}

/// Coefficients `c(k,l)` for `1 <= l < k <= K`, with `c(k,k) = 1`.
#[derive(Clone, Debug)]
pub struct CoefficientTable<T: Real> {
    pub method: MethodId,
    rows: Vec<Vec<T>>,
    /// The single constant of the viscosity method.
    pub scalar: Option<T>,
    /// Per-level values `c_l` of the visit-probability method, indexed by `l`.
    pub per_level: Option<Vec<T>>,
    partition: Option<LevelPartition>,
    ctx: T::Context,
}

impl<T: Real> CoefficientTable<T> {
    pub(crate) fn from_fn(
        method: MethodId,
        top: usize,
        ctx: T::Context,
        partition: Option<LevelPartition>,
        mut value: impl FnMut(usize, usize) -> T,
    ) -> Self {
        let rows = (0..=top)
            .map(|k| {
                (0..k)
                    .map(|l| if l == 0 { T::zero(ctx) } else { value(k, l) })
                    .collect()
            })
            .collect();
        CoefficientTable {
            method,
            rows,
            scalar: None,
            per_level: None,
            partition,
            ctx,
        }
    }

    pub fn top(&self) -> usize {
        self.rows.len() - 1
    }

    /// `c(k, l)` for `1 <= l <= k`.
    pub fn get(&self, k: usize, l: usize) -> T {
        assert!(l >= 1 && l <= k && k <= self.top(), "({k}, {l}) is outside the table");
        if l == k {
            T::one(self.ctx)
        } else {
            self.rows[k][l].clone()
        }
    }

    /// `c(k, 1..k)`, indexed from `l = 1`.
    pub fn row(&self, k: usize) -> &[T] {
        &self.rows[k][1.min(k)..]
    }

    pub fn partition(&self) -> Option<&LevelPartition> {
        self.partition.as_ref()
    }
}

/// Law of the starting level.
#[derive(Clone, Debug, PartialEq)]
pub struct StartDistribution<T: Real> {
    probabilities: Vec<T>,
}

impl<T: Real> StartDistribution<T> {
    pub fn new(probabilities: Vec<T>) -> Result<Self> {
        let first = probabilities.first().ok_or_else(|| invalid("empty start distribution"))?;
        let ctx = first.context();
        let zero = T::zero(ctx);
        if probabilities.iter().any(|p| *p < zero) {
            return Err(invalid("start probabilities must be nonnegative"));
        }
        let total = probabilities.iter().fold(T::zero(ctx), |s, p| s + p);
        let tol = T::epsilon(ctx) * &T::from_u64(ctx, probabilities.len() as u64 + 1);
        if (total - &T::one(ctx)).abs() > tol {
            return Err(invalid("start probabilities must sum to 1"));
        }
        Ok(StartDistribution { probabilities })
    }

    /// All mass on `level`, with `top + 1` levels in total.
    pub fn deterministic(top: usize, level: usize, ctx: T::Context) -> Self {
        assert!(level <= top);
        let probabilities = (0..=top)
            .map(|k| if k == level { T::one(ctx) } else { T::zero(ctx) })
            .collect();
        StartDistribution { probabilities }
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn top(&self) -> usize {
        self.probabilities.len() - 1
    }
}
