//! Fitness-level bounds on the expected optimisation time of the elitist
//! (1+1) EA with standard bit mutation on functions of unitation.
//!
//! The pipeline is: [`ProblemSpec`] → [`LevelPartition`] → [`LevelKernel`]
//! → coefficient tables in [`bounds`] → [`bounds::BoundReport`], checked
//! against [`oracle`] and [`simulate`].

pub mod bounds;
pub mod error;
pub mod levels;
pub mod numeric;
pub mod oracle;
pub mod problem;
pub mod shortcuts;
pub mod simulate;

pub use error::{Error, Result};
pub use levels::{LevelDigraph, LevelKernel, LevelPartition, PartitionKind};
pub use numeric::{Exact, ExtendedReal, Precision, Real};
pub use problem::{Benchmark, ProblemSpec};
