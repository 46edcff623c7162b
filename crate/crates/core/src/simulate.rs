//! Monte Carlo runs of the (1+1) EA at the bit-string level.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::levels::LevelPartition;
use crate::numeric::binomial;
use crate::problem::ProblemSpec;

/// Name of the generator written into output metadata.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha), stream = trial index";

#[derive(Clone, Debug, PartialEq)]
pub enum Start {
    Level(usize),
    /// Probability of each level of the fitness partition.
    Distribution(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub spec: ProblemSpec,
    pub start: Start,
    pub trials: usize,
    pub seed: u64,
    /// Defaults to `10^4 * n * ln(n + 1)` generations.
    pub max_generations: Option<u64>,
    pub record_trajectories: bool,
}

impl SimulationConfig {
    pub fn new(spec: ProblemSpec, start: Start, trials: usize, seed: u64) -> Self {
        SimulationConfig {
            spec,
            start,
            trials,
            seed,
            max_generations: None,
            record_trajectories: false,
        }
    }

    pub fn cap(&self) -> u64 {
        self.max_generations.unwrap_or_else(|| default_cap(self.spec.n()))
    }
}

pub fn default_cap(n: u32) -> u64 {
    (1e4 * n as f64 * (n as f64 + 1.0).ln()).ceil() as u64
}

#[derive(Clone, Debug)]
pub struct Trial {
    /// `None` when the cap was reached first.
    pub hitting_time: Option<u64>,
    /// Levels occupied, each with the generation it was entered.
    pub trajectory: Option<Vec<(u64, usize)>>,
    visited: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub trials: Vec<Trial>,
    pub cap: u64,
    /// Over uncensored trials; `None` if every trial was censored.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub se: Option<f64>,
    pub censored_fraction: f64,
    /// More than half the trials hit the cap.
    pub unreliable: bool,
    /// Fraction of trials that ever occupy each level.
    pub visit_frequency: Vec<f64>,
}

impl SimulationResult {
    pub fn hitting_times(&self) -> Vec<Option<u64>> {
        self.trials.iter().map(|t| t.hitting_time).collect()
    }
}

struct Sampler {
    n: u32,
    ranks: Vec<usize>,
    level_of: Vec<usize>,
    // Weight classes of each level and their sizes as sampling weights.
    classes: Vec<(Vec<u32>, Option<WeightedIndex<f64>>)>,
    start: Option<WeightedIndex<f64>>,
    fixed_start: usize,
    geometric: Option<Geometric>,
}

impl Sampler {
    fn new(config: &SimulationConfig, partition: &LevelPartition) -> Result<Sampler> {
        let n = config.spec.n();
        let top = partition.top();
        let (start, fixed_start) = match &config.start {
            Start::Level(k) if *k <= top => (None, *k),
            Start::Level(k) => return Err(invalid(format!("start level {k} does not exist"))),
            Start::Distribution(p) => {
                if p.len() != top + 1 {
                    return Err(invalid(format!("start law has {} entries, need {}", p.len(), top + 1)));
                }
                let index = WeightedIndex::new(p).map_err(|e| invalid(format!("start law: {e}")))?;
                (Some(index), 0)
            }
        };
        let classes = partition
            .levels()
            .iter()
            .map(|level| {
                let sizes: Vec<f64> = level.weights.iter().map(|&w| binomial(n, w).to_f64()).collect();
                let index = (sizes.len() > 1).then(|| WeightedIndex::new(&sizes).expect("class sizes are positive"));
                (level.weights.clone(), index)
            })
            .collect();
        Ok(Sampler {
            n,
            ranks: config.spec.ranks(),
            level_of: (0..=n).map(|w| partition.level_of_weight(w)).collect(),
            classes,
            start,
            fixed_start,
            geometric: (n > 1).then(|| Geometric::new(1.0 / n as f64).expect("valid rate")),
        })
    }

    fn run(&self, seed: u64, trial: u64, cap: u64, record: bool) -> Trial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let n = self.n as usize;
        let level = match &self.start {
            Some(law) => law.sample(&mut rng),
            None => self.fixed_start,
        };
        let (weights, law) = &self.classes[level];
        let weight = match law {
            Some(law) => weights[law.sample(&mut rng)],
            None => weights[0],
        };
        let mut bits = vec![0u64; n.div_ceil(64)];
        for i in sample(&mut rng, n, weight as usize) {
            bits[i / 64] |= 1 << (i % 64);
        }

        let mut visited = vec![false; self.classes.len()];
        visited[level] = true;
        let mut trajectory = record.then(|| vec![(0, level)]);
        let mut w = weight as usize;
        let mut current = level;
        let mut flips: Vec<usize> = Vec::new();
        let mut generation = 0u64;
        while current != 0 {
            if generation == cap {
                return Trial { hitting_time: None, trajectory, visited };
            }
            generation += 1;
            flips.clear();
            self.mutate(&mut rng, &mut flips);
            let mut next = w;
            for &i in &flips {
                if bits[i / 64] >> (i % 64) & 1 == 1 {
                    next -= 1;
                } else {
                    next += 1;
                }
            }
            if self.ranks[next] > self.ranks[w] {
                continue;
            }
            for &i in &flips {
                bits[i / 64] ^= 1 << (i % 64);
            }
            w = next;
            let entered = self.level_of[w];
            if entered != current {
                debug_assert!(entered < current, "elitism keeps levels monotone");
                current = entered;
                visited[current] = true;
                if let Some(t) = trajectory.as_mut() {
                    t.push((generation, current));
                }
            }
        }
        Trial { hitting_time: Some(generation), trajectory, visited }
    }

    // Positions flipped by standard bit mutation, drawn by skipping geometric gaps.
    fn mutate(&self, rng: &mut ChaCha8Rng, flips: &mut Vec<usize>) {
        let n = self.n as u64;
        match &self.geometric {
            // With n = 1 the single bit always flips.
            None => flips.push(0),
            Some(gap) => {
                let mut pos = gap.sample(rng);
                while pos < n {
                    flips.push(pos as usize);
                    pos += 1 + gap.sample(rng);
                }
            }
        }
    }
}

/// Runs independent trials in parallel. Each trial depends only on
/// `(seed, trial index)`, so results do not depend on scheduling.
pub fn run_trials(config: &SimulationConfig) -> Result<SimulationResult> {
    if config.trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let cap = config.cap();
    if cap == 0 {
        return Err(invalid("the generation cap must be at least 1"));
    }
    let partition = LevelPartition::fitness_levels(&config.spec);
    let sampler = Sampler::new(config, &partition)?;
    let trials: Vec<Trial> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| sampler.run(config.seed, t, cap, config.record_trajectories))
        .collect();

    let done: Vec<f64> = trials.iter().filter_map(|t| t.hitting_time).map(|g| g as f64).collect();
    let count = done.len();
    let mean = (count > 0).then(|| done.iter().sum::<f64>() / count as f64);
    let sd = mean.filter(|_| count > 1).map(|m| {
        (done.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (count - 1) as f64).sqrt()
    });
    let se = sd.map(|s| s / (count as f64).sqrt());
    let censored_fraction = 1.0 - count as f64 / trials.len() as f64;
    let mut visit_frequency = vec![0.0; partition.top() + 1];
    for t in &trials {
        for (k, _) in t.visited.iter().enumerate().filter(|(_, v)| **v) {
            visit_frequency[k] += 1.0;
        }
    }
    for f in &mut visit_frequency {
        *f /= trials.len() as f64;
    }
    if censored_fraction > 0.5 {
        log::warn!("{:.0}% of trials hit the cap of {cap} generations", 100.0 * censored_fraction);
    }
    Ok(SimulationResult {
        trials,
        cap,
        mean,
        sd,
        se,
        censored_fraction,
        unreliable: censored_fraction > 0.5,
        visit_frequency,
    })
}
