//! Kernels checked against direct enumeration of every mutation mask on
//! concrete bit strings.

use levelbound::levels::weight_transition_probability;
use levelbound::shortcuts::{build_subdigraph, preset_subset};
use levelbound::{Benchmark, Exact, ExtendedReal, LevelKernel, LevelPartition, Precision, ProblemSpec, Real};
use rug::ops::Pow;
use rug::{Integer, Rational};

// Three strings of weight w: lowest bits, highest bits, and a scattered pick.
fn representatives(n: u32, w: u32) -> Vec<u32> {
    let low = if w == 0 { 0 } else { (1u32 << w) - 1 };
    let high = low << (n - w);
    let mut scattered = 0u32;
    let mut pos = 0u32;
    for _ in 0..w {
        while scattered >> pos & 1 == 1 {
            pos = (pos + 1) % n;
        }
        scattered |= 1 << pos;
        pos = (pos + 5) % n;
    }
    vec![low, high, scattered]
}

// Numerators over n^n of moving from `x` to each level, with rejected and
// same-level moves collected as the last entry.
fn enumerate(spec: &ProblemSpec, part: &LevelPartition, x: u32) -> Vec<Integer> {
    let n = spec.n();
    let from = part.level_of_weight(x.count_ones());
    let mut out = vec![Integer::new(); part.top() + 2];
    let stay = part.top() + 1;
    for m in 0..(1u32 << n) {
        let y = x ^ m;
        let mass = Integer::from(n - 1).pow(n - m.count_ones());
        let accepted = spec.fitness(y.count_ones()) >= spec.fitness(x.count_ones());
        let to = part.level_of_weight(y.count_ones());
        let slot = match (accepted, to) {
            (false, _) => stay,
            (true, t) if t == from => stay,
            // Landing on a retained level above the current one leaves the
            // chain, like any other exit.
            (true, t) if t > from => 0,
            (true, t) => t,
        };
        out[slot] += mass;
    }
    out
}

fn check_exact(spec: &ProblemSpec, part: &LevelPartition) {
    let n = spec.n();
    let kernel = LevelKernel::<Exact>::build(spec, part, ()).unwrap();
    let denom = Integer::from(n).pow(n);
    for k in 1..=part.top() {
        let mut rows = Vec::new();
        for &w in &part.level(k).weights {
            for x in representatives(n, w) {
                rows.push(enumerate(spec, part, x));
            }
        }
        assert!(rows.windows(2).all(|r| r[0] == r[1]), "{} n={n} level {k}: representatives differ", spec.name());
        let row = &rows[0];
        for l in 0..k {
            let expected = Exact::from(Rational::from((row[l].clone(), denom.clone())));
            assert_eq!(kernel.p_min(k, l), &expected, "{} n={n} p({k},{l})", spec.name());
        }
        let stay = Exact::from(Rational::from((row[part.top() + 1].clone(), denom.clone())));
        assert_eq!(kernel.self_loop(k), Some(&stay), "{} n={n} stay at {k}", spec.name());
    }
}

fn sizes(b: Benchmark) -> Vec<u32> {
    (2..=10).filter(|n| !b.needs_even_n() || n % 2 == 0).collect()
}

#[test]
fn fitness_kernels_match_enumeration_exactly() {
    for b in Benchmark::ALL {
        for n in sizes(b) {
            let spec = ProblemSpec::new(b, n).unwrap();
            check_exact(&spec, &LevelPartition::fitness_levels(&spec));
        }
    }
}

#[test]
fn preset_subdigraphs_match_enumeration_exactly() {
    for b in [Benchmark::TwoMax1, Benchmark::Deceptive] {
        for n in [4u32, 6, 8, 10] {
            let spec = ProblemSpec::new(b, n).unwrap();
            let (part, _) = build_subdigraph::<Exact>(&spec, &preset_subset(&spec).unwrap(), ()).unwrap();
            check_exact(&spec, &part);
        }
    }
}

#[test]
fn float_kernels_match_enumeration_at_twelve_bits() {
    let prec = Precision::default();
    let n = 12u32;
    let denom = Integer::from(n).pow(n);
    for b in Benchmark::ALL {
        let spec = ProblemSpec::new(b, n).unwrap();
        let part = LevelPartition::fitness_levels(&spec);
        let kernel = LevelKernel::<ExtendedReal>::build(&spec, &part, prec).unwrap();
        for k in 1..=part.top() {
            let w = part.single_weight(k).unwrap();
            let row = enumerate(&spec, &part, representatives(n, w)[2]);
            for l in 0..k {
                let expected = ExtendedReal::from_ratio(prec, &row[l], &denom);
                assert!(kernel.p_min(k, l).relative_gap(&expected) <= 1e-12, "{b} p({k},{l})");
            }
        }
    }
}

#[test]
fn weight_probabilities_match_enumeration() {
    for n in 1..=9u32 {
        for w in 0..=n {
            let x = representatives(n, w)[2];
            let mut counts = vec![Integer::new(); n as usize + 1];
            for m in 0..(1u32 << n) {
                counts[(x ^ m).count_ones() as usize] += Integer::from(n - 1).pow(n - m.count_ones());
            }
            for (after, c) in counts.iter().enumerate() {
                let p: Exact = weight_transition_probability(n, w, after as u32, ()).unwrap();
                let expected = Rational::from((c.clone(), Integer::from(n).pow(n)));
                assert_eq!(p.as_rational(), &expected, "n={n} {w}->{after}");
            }
        }
    }
}
