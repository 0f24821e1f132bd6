//! Simple random walks on supercritical Galton–Watson trees.

pub mod anneal;
pub mod corpus;
pub mod dist;
pub mod error;
pub mod graph;
pub mod io;
pub mod isolation;
pub mod linalg;
pub mod lumped;
pub mod ocean;
pub mod rational;
pub mod regularise;
pub mod rng;
pub mod series;
pub mod spectral;
pub mod tree;
pub mod verify;
pub mod walk;

pub use dist::OffspringDistribution;
pub use error::{Error, Result};
pub use rational::Rational;
pub use series::{ReturnSeries, SeriesEntry};
pub use tree::{sample_tree, RootedTree, TreeSampleSpec};
