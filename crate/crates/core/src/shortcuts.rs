//! Weak and strong shortcuts, and sub-digraphs built from a retained subset
//! of levels.

use crate::error::{Error, Result};
use crate::levels::{LevelDigraph, LevelKernel, LevelPartition};
use crate::numeric::Real;
use crate::problem::{Benchmark, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    None,
    WeakOnly,
    Strong,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::None => "none",
            Classification::WeakOnly => "weak_only",
            Classification::Strong => "strong",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortcutPair<T> {
    pub k: usize,
    pub l: usize,
    pub ratio: T,
}

#[derive(Clone, Debug)]
pub struct ShortcutReport<T: Real> {
    pub epsilon: T,
    /// `p(k,l) / p(k,[0,l]) <= epsilon`: level `l` is almost always jumped over.
    pub weak: Vec<ShortcutPair<T>>,
    /// `p(k,[l,k-1]) / p(k,[0,k-1]) <= epsilon`: the whole block is jumped over.
    pub strong: Vec<ShortcutPair<T>>,
    pub classification: Classification,
}

impl<T: Real> ShortcutReport<T> {
    pub fn has_weak(&self, k: usize, l: usize) -> bool {
        self.weak.iter().any(|p| p.k == k && p.l == l)
    }

    pub fn has_strong(&self, k: usize, l: usize) -> bool {
        self.strong.iter().any(|p| p.k == k && p.l == l)
    }
}

/// Threshold `epsilon` defaults to `1/n`.
pub fn detect_shortcuts<T: Real>(kernel: &LevelKernel<T>, epsilon: Option<T>) -> Result<ShortcutReport<T>> {
    if !kernel.is_exact() {
        return Err(Error::Unsupported("shortcut detection needs an exact kernel".into()));
    }
    let ctx = kernel.context();
    let epsilon = epsilon.unwrap_or_else(|| T::one(ctx) / &T::from_u64(ctx, kernel.partition().n().into()));
    let mut weak = Vec::new();
    let mut strong = Vec::new();
    for k in 2..=kernel.top() {
        let escape = kernel.escape_min(k);
        for l in 1..k {
            let reach = kernel.range_min(k, 0, l);
            if !reach.is_zero() {
                let ratio = kernel.p_min(k, l).clone() / &reach;
                if ratio <= epsilon {
                    weak.push(ShortcutPair { k, l, ratio });
                }
            }
            if !escape.is_zero() {
                let ratio = kernel.range_min(k, l, k - 1) / &escape;
                if ratio <= epsilon {
                    strong.push(ShortcutPair { k, l, ratio });
                }
            }
        }
    }
    let classification = if !strong.is_empty() {
        Classification::Strong
    } else if !weak.is_empty() {
        Classification::WeakOnly
    } else {
        Classification::None
    };
    Ok(ShortcutReport {
        epsilon,
        weak,
        strong,
        classification,
    })
}

/// Flags the arcs that realise each detected shortcut: for a pair `(k, l)`,
/// every arc from `k` into `[0, l-1]`.
pub fn annotate<T: Real>(digraph: &mut LevelDigraph<T>, report: &ShortcutReport<T>) {
    for arc in &mut digraph.arcs {
        arc.weak_shortcut = report.weak.iter().any(|p| p.k == arc.from && arc.to < p.l);
        arc.strong_shortcut = report.strong.iter().any(|p| p.k == arc.from && arc.to < p.l);
    }
}

/// Retained weight classes, in level order `1..=K'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubDigraphSpec {
    pub retained: Vec<u32>,
}

/// Sub-digraph chain: retained levels keep their outgoing mass, everything
/// else is one absorbing level 0.
pub fn build_subdigraph<T: Real>(
    spec: &ProblemSpec,
    subset: &SubDigraphSpec,
    ctx: T::Context,
) -> Result<(LevelPartition, LevelKernel<T>)> {
    let partition = LevelPartition::retained(spec, &subset.retained)?;
    let kernel = LevelKernel::build(spec, &partition, ctx)?;
    Ok((partition, kernel))
}

/// The sub-digraphs used for the two landscapes with strong shortcuts.
///
/// TwoMax1 keeps weights `n-1, ..., n/2` and then `n/2 - 1`. Deceptive keeps
/// the deceptive basin `n, n-1, ..., n/2+1` followed by weight `n/2`, whose
/// fitness is higher than the level before it.
pub fn preset_subset(spec: &ProblemSpec) -> Result<SubDigraphSpec> {
    let n = spec.n();
    let retained = match spec.benchmark() {
        Some(Benchmark::TwoMax1) => (n / 2..n).rev().chain([n / 2 - 1]).collect(),
        Some(Benchmark::Deceptive) => (n / 2 + 1..=n).rev().chain([n / 2]).collect(),
        _ => return Err(Error::Unsupported(format!("no preset sub-digraph for {}", spec.name()))),
    };
    Ok(SubDigraphSpec { retained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Exact, ExtendedReal, Precision};

    fn kernel(b: Benchmark, n: u32) -> LevelKernel<ExtendedReal> {
        let spec = ProblemSpec::new(b, n).unwrap();
        LevelKernel::build(&spec, &LevelPartition::fitness_levels(&spec), Precision::default()).unwrap()
    }

    #[test]
    fn presets() {
        let tm = ProblemSpec::new(Benchmark::TwoMax1, 10).unwrap();
        assert_eq!(preset_subset(&tm).unwrap().retained, vec![9, 8, 7, 6, 5, 4]);
        let tm4 = ProblemSpec::new(Benchmark::TwoMax1, 4).unwrap();
        assert_eq!(preset_subset(&tm4).unwrap().retained, vec![3, 2, 1]);
        let de = ProblemSpec::new(Benchmark::Deceptive, 10).unwrap();
        assert_eq!(preset_subset(&de).unwrap().retained, vec![10, 9, 8, 7, 6, 5]);
        let om = ProblemSpec::new(Benchmark::OneMax, 10).unwrap();
        assert!(preset_subset(&om).is_err());
    }

    #[test]
    fn onemax_has_no_shortcut() {
        let report = detect_shortcuts(&kernel(Benchmark::OneMax, 100), None).unwrap();
        assert_eq!(report.classification, Classification::None);
    }

    #[test]
    fn fully_deceptive_weak_only() {
        let report = detect_shortcuts(&kernel(Benchmark::FullyDeceptive, 10), None).unwrap();
        assert_eq!(report.classification, Classification::WeakOnly);
        assert!(report.has_weak(10, 1));
    }

    #[test]
    fn twomax1_strong_from_the_far_slope() {
        // At n = 10 the block [1, 5] still takes 16% of the escape mass from
        // level 6, above 1/n; from n = 20 on it falls below.
        let small = detect_shortcuts(&kernel(Benchmark::TwoMax1, 10), None).unwrap();
        assert!(!small.has_strong(6, 1));
        let report = detect_shortcuts(&kernel(Benchmark::TwoMax1, 20), None).unwrap();
        assert_eq!(report.classification, Classification::Strong);
        assert!(report.has_strong(11, 1));
    }

    #[test]
    fn annotation_marks_the_skip_arc() {
        let k = kernel(Benchmark::FullyDeceptive, 10);
        let report = detect_shortcuts(&k, None).unwrap();
        let mut g = LevelDigraph::new(&k);
        annotate(&mut g, &report);
        assert!(g.arc(10, 0).unwrap().weak_shortcut);
        assert!(!g.arc(10, 9).unwrap().weak_shortcut);
    }

    #[test]
    fn full_subset_reproduces_the_kernel() {
        let spec = ProblemSpec::new(Benchmark::OneMax, 6).unwrap();
        let subset = SubDigraphSpec {
            retained: (0..6).rev().collect(),
        };
        let (_, sub) = build_subdigraph::<Exact>(&spec, &subset, ()).unwrap();
        let full = LevelKernel::<Exact>::build(&spec, &LevelPartition::fitness_levels(&spec), ()).unwrap();
        for k in 1..=6 {
            for l in 0..k {
                assert_eq!(sub.p_min(k, l), full.p_min(k, l));
            }
        }
    }

    #[test]
    fn singleton_subset_keeps_escape() {
        let spec = ProblemSpec::new(Benchmark::OneMax, 6).unwrap();
        let (_, sub) = build_subdigraph::<Exact>(&spec, &SubDigraphSpec { retained: vec![5] }, ()).unwrap();
        let full = LevelKernel::<Exact>::build(&spec, &LevelPartition::fitness_levels(&spec), ()).unwrap();
        assert_eq!(*sub.p_min(1, 0), full.escape_min(1));
    }

    #[test]
    fn optimal_weights_cannot_be_retained() {
        let spec = ProblemSpec::new(Benchmark::TwoMax1, 6).unwrap();
        assert!(build_subdigraph::<Exact>(&spec, &SubDigraphSpec { retained: vec![6] }, ()).is_err());
    }
}
