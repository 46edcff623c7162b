use rug::Rational;

use crate::error::{invalid, Result};
use crate::problem::ProblemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    /// Every weight class belongs to a level ranked by fitness.
    Fitness,
    /// Levels `1..=K` are a chosen subset; level 0 absorbs everything else.
    Level,
}

impl PartitionKind {
    pub fn name(self) -> &'static str {
        match self {
            PartitionKind::Fitness => "fitness_partition",
            PartitionKind::Level => "level_partition",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub weights: Vec<u32>,
    /// Fitness of the level; for the complement level of a level partition
    /// this is the best fitness it contains.
    pub fitness: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelPartition {
    n: u32,
    kind: PartitionKind,
    levels: Vec<Level>,
    level_of_weight: Vec<usize>,
    warnings: Vec<String>,
}

impl LevelPartition {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    /// Index of the deepest level, `K`.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn level_of_weight(&self, w: u32) -> usize {
        self.level_of_weight[w as usize]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Weight of a level holding one class.
    pub fn single_weight(&self, k: usize) -> Option<u32> {
        match self.levels[k].weights.as_slice() {
            [w] => Some(*w),
            _ => None,
        }
    }

    /// Partition of `[0, n]` by strictly descending fitness.
    pub fn fitness_levels(spec: &ProblemSpec) -> LevelPartition {
        let n = spec.n();
        let ranks = spec.ranks();
        let count = ranks.iter().max().map_or(0, |r| r + 1);
        let mut levels: Vec<Level> = (0..count)
            .map(|_| Level {
                weights: Vec::new(),
                fitness: Rational::new(),
            })
            .collect();
        for w in 0..=n {
            let level = &mut levels[ranks[w as usize]];
            level.weights.push(w);
            level.fitness = spec.fitness(w).clone();
        }
        LevelPartition {
            n,
            kind: PartitionKind::Fitness,
            levels,
            level_of_weight: ranks,
            warnings: Vec::new(),
        }
    }

    /// Level partition retaining `retained[i]` as level `i + 1`; every other
    /// weight class, optimal ones included, forms level 0.
    pub fn retained(spec: &ProblemSpec, retained: &[u32]) -> Result<LevelPartition> {
        let n = spec.n();
        if retained.is_empty() {
            return Err(invalid("a sub-digraph needs at least one retained level"));
        }
        let mut level_of_weight = vec![0usize; n as usize + 1];
        for (i, &w) in retained.iter().enumerate() {
            if w > n {
                return Err(invalid(format!("weight {w} is outside [0, {n}]")));
            }
            if spec.is_optimal(w) {
                return Err(invalid(format!("weight {w} is optimal and cannot be retained")));
            }
            if level_of_weight[w as usize] != 0 {
                return Err(invalid(format!("weight {w} is retained twice")));
            }
            level_of_weight[w as usize] = i + 1;
        }
        let complement: Vec<u32> = (0..=n).filter(|&w| level_of_weight[w as usize] == 0).collect();
        let best = complement
            .iter()
            .map(|&w| spec.fitness(w))
            .max()
            .expect("the optimum is never retained")
            .clone();
        let mut levels = vec![Level {
            weights: complement,
            fitness: best,
        }];
        levels.extend(retained.iter().map(|&w| Level {
            weights: vec![w],
            fitness: spec.fitness(w).clone(),
        }));

        let mut warnings = Vec::new();
        for k in 2..levels.len() {
            if levels[k].fitness >= levels[k - 1].fitness {
                warnings.push(format!(
                    "level {k} (w={}, f={}) is not below level {} (w={}, f={}) in fitness",
                    levels[k].weights[0],
                    levels[k].fitness,
                    k - 1,
                    levels[k - 1].weights[0],
                    levels[k - 1].fitness
                ));
            }
        }
        for warning in &warnings {
            log::warn!("{warning}");
        }
        Ok(LevelPartition {
            n,
            kind: PartitionKind::Level,
            levels,
            level_of_weight,
            warnings,
        })
    }
}
