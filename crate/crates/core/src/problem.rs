use std::fmt;
use std::str::FromStr;

use rug::Rational;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    OneMax,
    FullyDeceptive,
    TwoMax1,
    Deceptive,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::OneMax,
        Benchmark::FullyDeceptive,
        Benchmark::TwoMax1,
        Benchmark::Deceptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::OneMax => "onemax",
            Benchmark::FullyDeceptive => "fullydeceptive",
            Benchmark::TwoMax1 => "twomax1",
            Benchmark::Deceptive => "deceptive",
        }
    }

    pub fn needs_even_n(self) -> bool {
        matches!(self, Benchmark::TwoMax1 | Benchmark::Deceptive)
    }

    /// Fitness of any string with `w` ones.
    pub fn fitness(self, n: u32, w: u32) -> i64 {
        let (n, w) = (i64::from(n), i64::from(w));
        match self {
            Benchmark::OneMax => w,
            Benchmark::FullyDeceptive => {
                if w == 0 {
                    n + 1
                } else {
                    w
                }
            }
            Benchmark::TwoMax1 => {
                if w == 0 || w == n {
                    n
                } else if w >= n / 2 {
                    w
                } else {
                    n / 2 - w
                }
            }
            Benchmark::Deceptive => {
                if w <= n / 2 {
                    n - 2 * w
                } else {
                    w - n - 1
                }
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "onemax" | "om" => Ok(Benchmark::OneMax),
            "fullydeceptive" | "fd" => Ok(Benchmark::FullyDeceptive),
            "twomax1" | "tm1" => Ok(Benchmark::TwoMax1),
            "deceptive" | "de" => Ok(Benchmark::Deceptive),
            other => Err(invalid(format!("unknown function `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Function {
    Benchmark(Benchmark),
    /// Fitness indexed by Hamming weight.
    Custom(Vec<Rational>),
}

/// A pseudo-Boolean function of the Hamming weight together with the string
/// length. The mutation rate is always `1/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    function: Function,
    n: u32,
    fitness: Vec<Rational>,
}

impl ProblemSpec {
    pub fn new(benchmark: Benchmark, n: u32) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("n must be at least 2, got {n}")));
        }
        if benchmark.needs_even_n() && n % 2 != 0 {
            return Err(invalid(format!("{benchmark} needs an even n, got {n}")));
        }
        let fitness = (0..=n)
            .map(|w| Rational::from(benchmark.fitness(n, w)))
            .collect();
        Ok(ProblemSpec {
            function: Function::Benchmark(benchmark),
            n,
            fitness,
        })
    }

    /// `weight_fitness[w]` is the fitness of every string with `w` ones.
    pub fn custom(weight_fitness: Vec<Rational>) -> Result<Self> {
        if weight_fitness.len() < 3 {
            return Err(invalid("a custom map needs entries for weights 0..=n with n >= 2"));
        }
        let n = (weight_fitness.len() - 1) as u32;
        Ok(ProblemSpec {
            function: Function::Custom(weight_fitness.clone()),
            n,
            fitness: weight_fitness,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn function(&self) -> &Function {
        &self.function
    }

    pub fn benchmark(&self) -> Option<Benchmark> {
        match self.function {
            Function::Benchmark(b) => Some(b),
            Function::Custom(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.benchmark().map_or("custom", Benchmark::name)
    }

    pub fn fitness(&self, w: u32) -> &Rational {
        &self.fitness[w as usize]
    }

    pub fn fitness_table(&self) -> &[Rational] {
        &self.fitness
    }

    pub fn max_fitness(&self) -> &Rational {
        self.fitness.iter().max().expect("non-empty")
    }

    pub fn is_optimal(&self, w: u32) -> bool {
        self.fitness(w) == self.max_fitness()
    }

    /// Dense ranks of the weight classes, 0 for the best fitness. Strings
    /// compare by rank exactly as they compare by fitness.
    pub fn ranks(&self) -> Vec<usize> {
        let mut distinct: Vec<&Rational> = self.fitness.iter().collect();
        distinct.sort_by(|a, b| b.cmp(a));
        distinct.dedup();
        self.fitness
            .iter()
            .map(|f| distinct.iter().position(|d| *d == f).expect("present"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_odd_inputs() {
        assert!(ProblemSpec::new(Benchmark::OneMax, 1).is_err());
        assert!(ProblemSpec::new(Benchmark::TwoMax1, 7).is_err());
        assert!(ProblemSpec::new(Benchmark::Deceptive, 5).is_err());
        assert!(ProblemSpec::new(Benchmark::FullyDeceptive, 5).is_ok());
    }

    #[test]
    fn deceptive_values() {
        let n = 10;
        let f: Vec<i64> = (0..=n).map(|w| Benchmark::Deceptive.fitness(n, w)).collect();
        assert_eq!(f, vec![10, 8, 6, 4, 2, 0, -5, -4, -3, -2, -1]);
    }

    #[test]
    fn twomax1_values() {
        let f: Vec<i64> = (0..=6).map(|w| Benchmark::TwoMax1.fitness(6, w)).collect();
        assert_eq!(f, vec![6, 2, 1, 3, 4, 5, 6]);
    }

    #[test]
    fn ranks_follow_fitness() {
        let spec = ProblemSpec::new(Benchmark::FullyDeceptive, 3).unwrap();
        assert_eq!(spec.ranks(), vec![0, 3, 2, 1]);
    }

    #[test]
    fn parses_names() {
        assert_eq!("TwoMax1".parse::<Benchmark>().unwrap(), Benchmark::TwoMax1);
        assert!("leadingones".parse::<Benchmark>().is_err());
    }
}
