//! Combinatorial search used by the constructions: maximum clique for the
//! directional probe, weighted set cover for coverings and maximum-weight
//! independent set for packings.

pub mod clique;
pub mod independent_set;
pub mod set_cover;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// Proven optimal over the finite candidate family.
    Exact,
    /// Heuristic answer, local search found nothing better.
    Greedy,
    /// Heuristic answer improved by local search.
    Improved,
    /// The candidates do not cover the target.
    Infeasible,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverStatus::Exact => "exact",
            SolverStatus::Greedy => "greedy",
            SolverStatus::Improved => "improved",
            SolverStatus::Infeasible => "infeasible",
        }
    }

    pub fn is_exact(self) -> bool {
        self == SolverStatus::Exact
    }
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
