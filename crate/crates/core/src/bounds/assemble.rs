use crate::error::{Error, Result};
use crate::levels::LevelKernel;
use crate::numeric::Real;

use super::{CoefficientTable, Direction, MethodId};

/// Bounds `d_k` on the mean hitting time from every level.
#[derive(Clone, Debug)]
pub struct BoundReport<T: Real> {
    pub method: MethodId,
    pub direction: Direction,
    /// `values[k] = d_k`, with `d_0 = 0`.
    pub values: Vec<T>,
}

/// `1/escape[k] + sum_{l=1}^{k-1} row[l-1] / escape[l]` where `row` holds
/// `c(k, 1..k)` and `escape[l]` bounds the probability of leaving `l`.
pub fn assemble_row<T: Real>(row: &[T], escape: &[T]) -> T {
    let k = row.len() + 1;
    let mut d = escape[k].recip();
    for (l, c) in (1..k).zip(row) {
        if !c.is_zero() {
            d += &(c.clone() / &escape[l]);
        }
    }
    d
}

/// Lower bounds divide by `p_max(l, [0, l-1])`, upper bounds by `p_min`.
pub fn assemble_bound<T: Real>(
    kernel: &LevelKernel<T>,
    table: &CoefficientTable<T>,
    direction: Direction,
) -> Result<BoundReport<T>> {
    if table.top() != kernel.top() || table.partition().is_some_and(|p| p != kernel.partition()) {
        return Err(Error::MismatchedPartition);
    }
    kernel.require_escapes()?;
    let ctx = kernel.context();
    let escape: Vec<T> = (0..=kernel.top())
        .map(|l| match (l, direction) {
            (0, _) => T::one(ctx),
            (_, Direction::Lower) => kernel.escape_max(l),
            (_, Direction::Upper) => kernel.escape_min(l),
        })
        .collect();
    let values = (0..=kernel.top())
        .map(|k| if k == 0 { T::zero(ctx) } else { assemble_row(table.row(k), &escape) })
        .collect();
    Ok(BoundReport {
        method: table.method,
        direction,
        values,
    })
}
