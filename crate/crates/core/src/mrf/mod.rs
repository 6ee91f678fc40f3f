//! Region graphs and exact maximization of binary submodular energies.

mod brute;
mod energy;
mod graph;
mod maxflow;

pub use brute::{brute_force, BRUTE_FORCE_MAX};
pub use energy::EnergyProblem;
pub use graph::{build_graph, RegionGraph};
pub use maxflow::max_benefit_labeling;

/// A binary labeling and its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    pub labels: Vec<bool>,
    pub value: f64,
}
