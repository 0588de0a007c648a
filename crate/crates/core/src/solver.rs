//! Solver selection by name.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::config::SolverConfig;
use crate::pdqn;
use crate::problem::ProblemInstance;
use crate::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Pdqn,
    Iht,
    Pss,
    Gss,
    Bfs,
    Zcws,
}

impl Solver {
    pub const ALL: [Solver; 6] = [Solver::Pdqn, Solver::Iht, Solver::Pss, Solver::Gss, Solver::Bfs, Solver::Zcws];

    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Pdqn => "pdqn",
            Solver::Iht => "iht",
            Solver::Pss => "pss",
            Solver::Gss => "gss",
            Solver::Bfs => "bfs",
            Solver::Zcws => "zcws",
        }
    }

    /// Name written into records.
    pub fn record_name(self, cfg: &SolverConfig) -> String {
        match self {
            Solver::Pdqn => format!("pd-{}", cfg.hessian),
            other => other.as_str().to_string(),
        }
    }

    /// Runs the solver. The record's `solver` field names the method; for
    /// PD-QN it carries the Hessian variant (`pd-lm1`, ...).
    pub fn solve(self, problem: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
        match self {
            Solver::Pdqn => pdqn::solve(problem, cfg),
            Solver::Iht => baselines::iht(problem, cfg),
            Solver::Pss => baselines::pss(problem, cfg),
            Solver::Gss => baselines::gss(problem, cfg),
            Solver::Bfs => baselines::bfs(problem, cfg),
            Solver::Zcws => baselines::zcws(problem, cfg),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase();
        match key.as_str() {
            "pd" | "pd-qn" | "pdqn" => Ok(Solver::Pdqn),
            _ => Solver::ALL
                .into_iter()
                .find(|v| v.as_str() == key)
                .ok_or_else(|| format!("unknown solver `{s}`")),
        }
    }
}

/// Parses a comma-separated solver list.
pub fn parse_list(s: &str) -> Result<Vec<Solver>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}
