//! Problem instances: a smooth objective, a symmetric set and a sparsity level.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{SetDescriptor, SupportSet, FEAS_TOL};

/// Smooth objective with an analytic gradient.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// Adapter turning two closures into an [`Objective`].
pub struct FnObjective<F, G> {
    n: usize,
    f: F,
    g: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(n: usize, f: F, g: G) -> Self {
        Self { n, f, g }
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.g)(x, out)
    }
}

/// `½ xᵀdiag(a)x + cᵀx`; convenient for tests and small examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableQuadratic {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl Objective for SeparableQuadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.a).zip(&self.c).map(|((x, a), c)| 0.5 * a * x * x + c * x).sum()
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = self.a[i] * x[i] + self.c[i];
        }
    }
}

/// The benchmark families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SparseQuadratic,
    Portfolio,
    SparseRegression,
    LogisticRegression,
    SparsePca,
    DisjunctiveQuadratic,
    PhaseRetrieval,
    SparseControl,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::SparseQuadratic,
        Family::Portfolio,
        Family::SparseRegression,
        Family::LogisticRegression,
        Family::SparsePca,
        Family::DisjunctiveQuadratic,
        Family::PhaseRetrieval,
        Family::SparseControl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::SparseQuadratic => "sparse_quadratic",
            Family::Portfolio => "portfolio",
            Family::SparseRegression => "sparse_regression",
            Family::LogisticRegression => "logistic_regression",
            Family::SparsePca => "sparse_pca",
            Family::DisjunctiveQuadratic => "disjunctive_quadratic",
            Family::PhaseRetrieval => "phase_retrieval",
            Family::SparseControl => "sparse_control",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == key)
            .or(match key.as_str() {
                "quadratic" => Some(Family::SparseQuadratic),
                "boston" | "regression" => Some(Family::SparseRegression),
                "iris" | "logistic" => Some(Family::LogisticRegression),
                "wine" | "pca" => Some(Family::SparsePca),
                "disjunctive" => Some(Family::DisjunctiveQuadratic),
                "phase" => Some(Family::PhaseRetrieval),
                "control" => Some(Family::SparseControl),
                _ => None,
            })
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Clone)]
pub struct ProblemInstance {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub family: Option<Family>,
    pub set: SetDescriptor,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// `f(x0)`, evaluated once at construction outside any run's counters.
    pub f0: f64,
    pub objective: Arc<dyn Objective>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("s", &self.s)
            .field("family", &self.family)
            .field("set", &self.set)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl ProblemInstance {
    /// Checks `1 <= s <= n`, the objective dimension and that `x0` is an
    /// `s`-sparse point of the set.
    pub fn new(
        id: impl Into<String>,
        set: SetDescriptor,
        s: usize,
        x0: Vec<f64>,
        objective: Arc<dyn Objective>,
    ) -> Result<Self> {
        let n = x0.len();
        if objective.dim() != n {
            return Err(Error::Problem(format!(
                "objective has dimension {} but x0 has {}",
                objective.dim(),
                n
            )));
        }
        if s == 0 || s > n {
            return Err(Error::Problem(format!("sparsity {s} outside [1, {n}]")));
        }
        let nnz = SupportSet::of(&x0).len();
        if nnz > s {
            return Err(Error::Problem(format!("x0 has {nnz} nonzeros, more than s = {s}")));
        }
        if !set.contains(&x0, FEAS_TOL) {
            return Err(Error::Problem("x0 is not in the feasible set".into()));
        }
        let f0 = objective.value(&x0);
        Ok(Self {
            id: id.into(),
            n,
            m: 1,
            s,
            family: None,
            set,
            x0,
            seed: 0,
            f0,
            objective,
        })
    }

    pub fn with_meta(mut self, family: Option<Family>, m: usize, seed: u64) -> Self {
        self.family = family;
        self.m = m;
        self.seed = seed;
        self
    }

    pub fn family_name(&self) -> &str {
        self.family.map(Family::as_str).unwrap_or("custom")
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.objective.gradient(x, &mut g);
        g
    }

    /// Membership in `C ∩ C_s` with the default tolerance.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.n && SupportSet::of(x).len() <= self.s && self.set.contains(x, FEAS_TOL)
    }

    /// Gradient secant along `-g(x)` (or the all-ones direction at a
    /// critical point), floored at 1e-8.
    pub fn local_lipschitz(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = if gn > 0.0 {
            g.iter().map(|v| -v / gn).collect()
        } else {
            vec![1.0 / (self.n as f64).sqrt(); self.n]
        };
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-4 * (1.0 + xn);
        let xh: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
        let gh = self.gradient(&xh);
        let diff = g.iter().zip(&gh).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        (diff / h).max(1e-8)
    }
}
