use serde::{Deserialize, Serialize};

use crate::stationarity::{classify_solved, q_sol, Criterion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    Budget,
    Stagnation,
    /// The run could not start (invalid instance, projection failure).
    Failed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::Budget => "budget",
            Termination::Stagnation => "stagnation",
            Termination::Failed => "failed",
        }
    }
}

/// Snapshot taken whenever the best objective or the best residual improves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nf2g: u64,
    pub sec: f64,
    pub f_best: f64,
    pub rgs_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub problem: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub f0: f64,
    pub f_best: f64,
    pub rgs_best: f64,
    /// Relative gap; unknown until a reference value is supplied.
    pub q: Option<f64>,
    pub nf: u64,
    pub ng: u64,
    pub nf2g: u64,
    pub wall_seconds: f64,
    pub solved_q6: bool,
    pub solved_q3: bool,
    pub solved_s6: bool,
    pub solved_s3: bool,
    pub termination: Termination,
    pub x_best: Vec<f64>,
    pub trace: Vec<TracePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// First point of the trace at which the residual dropped to `eps`.
pub fn first_hit(trace: &[TracePoint], criterion: Criterion, eps: f64, f_opt: f64, f0: f64) -> Option<TracePoint> {
    trace.iter().copied().find(|t| match criterion {
        Criterion::Objective => q_sol(t.f_best, f_opt, f0) <= eps,
        Criterion::Strong => t.rgs_best <= eps,
    })
}

impl RunRecord {
    /// Fills `q` and the four solved flags against the reference value
    /// `f_opt`. A flag is set when the trace reaches the accuracy inside the
    /// budgets.
    pub fn finalize(&mut self, f_opt: f64, nf2g_max: u64, sec_max: f64) {
        self.q = Some(q_sol(self.f_best, f_opt, self.f0));
        let hit = |c: Criterion, eps: f64| {
            first_hit(&self.trace, c, eps, f_opt, self.f0)
                .map(|t| {
                    let r = match c {
                        Criterion::Objective => q_sol(t.f_best, f_opt, self.f0),
                        Criterion::Strong => t.rgs_best,
                    };
                    classify_solved(r, t.nf2g, t.sec, eps, nf2g_max, sec_max)
                })
                .unwrap_or(false)
        };
        self.solved_q6 = hit(Criterion::Objective, 1e-6);
        self.solved_q3 = hit(Criterion::Objective, 1e-3);
        self.solved_s6 = hit(Criterion::Strong, 1e-6);
        self.solved_s3 = hit(Criterion::Strong, 1e-3);
    }

    /// Cost needed to reach `eps` under `criterion`, if ever reached.
    pub fn cost_to(&self, criterion: Criterion, eps: f64, f_opt: f64) -> Option<(u64, f64)> {
        first_hit(&self.trace, criterion, eps, f_opt, self.f0).map(|t| (t.nf2g, t.sec))
    }
}
