//! Property tests for the invariants every kernel, bound and report must
//! satisfy.

use levelbound::bounds::{
    appendix_products, assemble_bound, coefficients, CoefficientTable, Direction, MethodId, StartDistribution,
};
use levelbound::levels::weight_transition_probability;
use levelbound::oracle::exact_level_hitting;
use levelbound::shortcuts::{build_subdigraph, detect_shortcuts, preset_subset, SubDigraphSpec};
use levelbound::simulate::{run_trials, SimulationConfig, Start};
use levelbound::{Benchmark, ExtendedReal, LevelKernel, LevelPartition, Precision, ProblemSpec, Real};
use proptest::prelude::*;
use proptest::sample::{select, subsequence};

const PREC: Precision = Precision::DEFAULT;

fn benchmark() -> impl Strategy<Value = Benchmark> {
    select(Benchmark::ALL.to_vec())
}

fn problem(sizes: Vec<u32>) -> impl Strategy<Value = ProblemSpec> {
    (benchmark(), select(sizes)).prop_map(|(b, n)| ProblemSpec::new(b, n).unwrap())
}

fn kernel(spec: &ProblemSpec) -> LevelKernel<ExtendedReal> {
    LevelKernel::build(spec, &LevelPartition::fitness_levels(spec), PREC).unwrap()
}

fn table(k: &LevelKernel<ExtendedReal>, method: MethodId) -> CoefficientTable<ExtendedReal> {
    let start = StartDistribution::deterministic(k.top(), k.top(), PREC);
    coefficients(k, method, &start).unwrap()
}

fn bound(k: &LevelKernel<ExtendedReal>, method: MethodId) -> Vec<ExtendedReal> {
    assemble_bound(k, &table(k, method), method.direction()).unwrap().values
}

fn hitting(k: &LevelKernel<ExtendedReal>) -> Vec<ExtendedReal> {
    exact_level_hitting(k).unwrap().per_level.iter().map(|m| m.value().unwrap().clone()).collect()
}

fn at_most(a: &ExtendedReal, b: &ExtendedReal, slack: f64) -> bool {
    a <= b || a.relative_gap(b) <= slack
}

// Kernel entries within [0, 1] and rows summing to one.
fn assert_stochastic(k: &LevelKernel<ExtendedReal>) {
    let one = ExtendedReal::one(PREC);
    for i in 1..=k.top() {
        // Folded mass is already part of p(i, 0).
        let mut total = k.self_loop(i).unwrap().clone();
        for l in 0..i {
            let p = k.p_min(i, l);
            assert!(*p >= ExtendedReal::zero(PREC) && *p <= one);
            total += p;
        }
        assert!(total.relative_gap(&one) < 1e-60, "row {i} sums to {total}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weight_rows_sum_to_one(n in 1u32..=64, w_frac in 0.0f64..=1.0) {
        let w = (w_frac * n as f64).round() as u32;
        let mut total = ExtendedReal::zero(PREC);
        for after in 0..=n {
            let p: ExtendedReal = weight_transition_probability(n, w, after, PREC).unwrap();
            prop_assert!(p >= ExtendedReal::zero(PREC));
            total += &p;
        }
        prop_assert!(total.relative_gap(&ExtendedReal::one(PREC)) <= ExtendedReal::epsilon(PREC).to_f64());
    }

    #[test]
    fn fitness_kernels_are_stochastic(spec in problem(vec![2, 4, 6, 10, 16, 30])) {
        assert_stochastic(&kernel(&spec));
    }

    #[test]
    fn retained_kernels_are_stochastic_and_never_step_down(
        b in benchmark(),
        n in select(vec![6u32, 8, 10, 12]),
        pick in subsequence((0u32..=12).collect::<Vec<_>>(), 1..=6),
    ) {
        let spec = ProblemSpec::new(b, n).unwrap();
        let retained: Vec<u32> = pick.into_iter().filter(|&w| w <= n && !spec.is_optimal(w)).collect();
        prop_assume!(!retained.is_empty());
        let (part, k) = build_subdigraph::<ExtendedReal>(&spec, &SubDigraphSpec { retained }, PREC).unwrap();
        assert_stochastic(&k);
        for i in 1..=k.top() {
            for l in 1..i {
                if part.level(l).fitness < part.level(i).fitness {
                    prop_assert!(k.p_min(i, l).is_zero());
                }
            }
        }
    }

    #[test]
    fn sandwich(spec in problem(vec![6, 8, 10, 12, 20, 50]), method in select(MethodId::KERNEL.to_vec())) {
        let k = kernel(&spec);
        let m = hitting(&k);
        let d = bound(&k, method);
        for i in 1..=k.top() {
            match method.direction() {
                Direction::Lower => prop_assert!(at_most(&d[i], &m[i], 1e-9), "{} d_{i} > m_{i}", method.name()),
                Direction::Upper => prop_assert!(at_most(&m[i], &d[i], 1e-9), "{} d_{i} < m_{i}", method.name()),
            }
        }
    }

    #[test]
    fn lower_bounds_improve_along_the_hierarchy(spec in problem(vec![4, 8, 12, 20, 40])) {
        let k = kernel(&spec);
        let type0 = bound(&k, MethodId::Type0);
        let viscosity = bound(&k, MethodId::Viscosity);
        let recursive = bound(&k, MethodId::RecursiveLower);
        for i in 1..=k.top() {
            prop_assert!(at_most(&type0[i], &viscosity[i], 1e-60));
            prop_assert!(at_most(&viscosity[i], &recursive[i], 1e-60));
        }
    }

    #[test]
    fn digraph_product_is_below_each_factor(spec in problem(vec![6, 10, 20])) {
        let k = kernel(&spec);
        let c = table(&k, MethodId::DigraphProduct);
        for i in 2..=k.top() {
            for l in 1..i {
                for j in (l + 1)..=i {
                    let factor = k.conditional_probability(j, l, j - 1).unwrap().0;
                    prop_assert!(at_most(&c.get(i, l), &factor, 1e-60));
                }
            }
        }
    }

    #[test]
    fn strong_pairs_are_weak_pairs(spec in problem(vec![6, 10, 20, 30]), inv_eps in 2u32..200) {
        let k = kernel(&spec);
        let eps = ExtendedReal::from_ratio(PREC, &1.into(), &inv_eps.into());
        let report = detect_shortcuts(&k, Some(eps)).unwrap();
        for pair in &report.strong {
            prop_assert!(report.has_weak(pair.k, pair.l));
        }
    }

    #[test]
    fn appendix_floors_hold(c in 0.1f64..=10.9, n in 2u32..=2000) {
        let p = appendix_products(&ExtendedReal::from_f64(PREC, c), n).unwrap();
        prop_assert!(p.first_holds().unwrap_or(true));
        prop_assert!(p.second_holds());
    }

    #[test]
    fn simulation_is_reproducible_and_monotone(spec in problem(vec![4, 6, 8]), seed in any::<u64>()) {
        let top = LevelPartition::fitness_levels(&spec).top();
        let mut config = SimulationConfig::new(spec, Start::Level(top), 16, seed);
        config.record_trajectories = true;
        let a = run_trials(&config).unwrap();
        let b = run_trials(&config).unwrap();
        prop_assert_eq!(a.hitting_times(), b.hitting_times());
        for t in &a.trials {
            let path = t.trajectory.as_ref().unwrap();
            prop_assert!(path.windows(2).all(|p| p[1].1 < p[0].1));
        }
        prop_assert_eq!(a.visit_frequency[top], 1.0);
    }
}

#[test]
fn onemax_hitting_times_grow_with_distance() {
    for n in [2u32, 5, 10, 25, 50] {
        let m = hitting(&kernel(&ProblemSpec::new(Benchmark::OneMax, n).unwrap()));
        assert!(m.windows(2).all(|p| p[0] <= p[1]), "n={n}");
    }
}

#[test]
fn subdigraph_times_never_exceed_full_times() {
    for b in [Benchmark::TwoMax1, Benchmark::Deceptive] {
        for n in [8u32, 10, 20] {
            let spec = ProblemSpec::new(b, n).unwrap();
            let full = hitting(&kernel(&spec));
            let levels = LevelPartition::fitness_levels(&spec);
            let (part, sub) = build_subdigraph::<ExtendedReal>(&spec, &preset_subset(&spec).unwrap(), PREC).unwrap();
            assert_stochastic(&sub);
            let m_sub = hitting(&sub);
            for k in 1..=sub.top() {
                let w = part.single_weight(k).unwrap();
                assert!(at_most(&m_sub[k], &full[levels.level_of_weight(w)], 1e-9), "{b} n={n} level {k}");
            }
        }
    }
}
