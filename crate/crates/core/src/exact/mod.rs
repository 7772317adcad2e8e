//! Exact methods: the time-indexed model with MPS export and an LP backend,
//! a placement branch-and-bound, an exhaustive oracle and the machine
//! destroy-and-resolve search built on the branch-and-bound.

mod bnb;
pub mod mps;
mod oracle;
mod search;
pub mod tif;

use std::time::Duration;

use serde::Serialize;

use crate::model::Schedule;

pub use bnb::branch_and_bound;
pub use oracle::{oracle_enumerate, OracleError, ORACLE_NODE_LIMIT};
pub use search::{milp_search, MilpSearchConfig, MilpSearchResult};
pub use tif::{build_tif, TifError, TifModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleIncumbent,
    Infeasible,
    TimeLimitNoSolution,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::FeasibleIncumbent => "feasible",
            Self::Infeasible => "infeasible",
            Self::TimeLimitNoSolution => "no_solution",
        }
    }

    pub fn has_solution(&self) -> bool {
        matches!(self, Self::Optimal | Self::FeasibleIncumbent)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub incumbent: Option<Schedule>,
    pub z_ub: Option<f64>,
    pub z_lb: Option<f64>,
    pub runtime_s: f64,
    pub nodes: u64,
}

/// Limits for one search. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchBudget {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn time(limit: Duration) -> Self {
        Self {
            time_limit: Some(limit),
            node_limit: None,
        }
    }

    pub fn nodes(limit: u64) -> Self {
        Self {
            time_limit: None,
            node_limit: Some(limit),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BnbOptions {
    pub budget: SearchBudget,
    pub stop_at_first_feasible: bool,
    /// Only schedules strictly cheaper than this are accepted.
    pub cutoff: Option<f64>,
}

impl BnbOptions {
    pub fn unlimited() -> Self {
        Self::default()
    }
}
