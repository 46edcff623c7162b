//! Fitness-level partitions, the exact level kernel and its digraph.

mod digraph;
mod kernel;
mod partition;

pub use digraph::{Arc, LevelDigraph, Vertex};
pub use kernel::{weight_transition_numerators, weight_transition_probability, LevelKernel};
pub use partition::{Level, LevelPartition, PartitionKind};
