//! Optimality diagnostics for points of `C ∩ C_s`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::SetError;
use crate::sets::{
    project_onto_support, sparse_project, sq_dist, SetDescriptor, SupportSet, Symmetry, FEAS_TOL,
};

pub const BF_TOL: f64 = 1e-6;
pub const LU_ZHANG_TOL: f64 = 1e-8;
pub const L_STAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Relative objective gap `q`.
    Objective,
    /// Strong stationarity residual `rg_S`.
    Strong,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Objective => "objective",
            Criterion::Strong => "strong",
        }
    }
}

/// `(f_sol - f_opt) / (f0 - f_opt)`; zero when all three agree and `+∞`
/// when no progress was possible yet `f_sol` misses `f_opt`.
pub fn q_sol(f_sol: f64, f_opt: f64, f0: f64) -> f64 {
    let num = f_sol - f_opt;
    let den = f0 - f_opt;
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Index set of the `s` largest entries of `p(x)`. Ties (in particular among
/// zeros) go to the larger `p(-g)` first, then to the smaller index.
fn ranked_support(x: &[f64], g: &[f64], sym: Symmetry, s: usize) -> SupportSet {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        sym.score(x[b])
            .total_cmp(&sym.score(x[a]))
            .then_with(|| sym.score(-g[b]).total_cmp(&sym.score(-g[a])))
            .then(a.cmp(&b))
    });
    order.truncate(s);
    SupportSet::new(order, x.len()).expect("indices in range")
}

/// Strong stationarity residual.
///
/// The swap term compares `p(-g)` between the inactive and the active
/// indices, i.e. the largest first-order gain from activating an index in
/// place of the weakest active one.
pub fn rg_s(x: &[f64], g: &[f64], set: &SetDescriptor, s: usize) -> Result<f64, SetError> {
    let n = x.len();
    if g.len() != n {
        return Err(SetError::Dimension { expected: n, got: g.len() });
    }
    if s == 0 || s > n {
        return Err(SetError::Sparsity { s, n });
    }
    let active = SupportSet::of(x);
    if active.len() > s || !set.contains(x, FEAS_TOL) {
        return Err(SetError::Infeasible);
    }
    let sym = set.symmetry();
    let support = ranked_support(x, g, sym, s);
    let trial: Vec<f64> = (0..n).map(|i| x[i] - g[i]).collect();
    let p = project_onto_support(&trial, set, &support)?;
    let mut res = support.iter().fold(0.0f64, |m, i| m.max((x[i] - p[i]).abs()));

    if active.len() == s && s < n {
        let pneg = |i: usize| sym.score(-g[i]);
        let best_off = (0..n).filter(|&j| x[j] == 0.0).map(pneg).fold(f64::NEG_INFINITY, f64::max);
        let worst_on = active.iter().map(pneg).fold(f64::INFINITY, f64::min);
        if best_off.is_finite() && worst_on.is_finite() {
            res = res.max((best_off - worst_on).max(0.0));
        }
    }
    Ok(res)
}

/// Super-support used for the basic-feasibility test: the support of `x`
/// completed by the inactive indices with the largest `p(-g)`.
pub fn bf_super_support(x: &[f64], g: &[f64], sym: Symmetry, s: usize) -> SupportSet {
    let mut chosen: Vec<usize> = SupportSet::of(x).indices().to_vec();
    let mut off: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
    off.sort_by(|&a, &b| match sym.score(-g[b]).total_cmp(&sym.score(-g[a])) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let need = s.saturating_sub(chosen.len());
    chosen.extend(off.into_iter().take(need));
    SupportSet::new(chosen, x.len()).expect("indices in range")
}

fn restricted_fixed_point_residual(x: &[f64], g: &[f64], set: &SetDescriptor, t: &SupportSet, step: f64) -> f64 {
    let trial: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - step * gi).collect();
    match project_onto_support(&trial, set, t) {
        Ok(p) => t.iter().fold(0.0f64, |m, i| m.max((x[i] - p[i]).abs())),
        Err(_) => f64::INFINITY,
    }
}

/// Basic feasibility: `x_T = P_{C_T}(x_T - g_T / L)` on the super-support
/// `T`, required at `L/10`, `L` and `10 L`.
pub fn check_bf(x: &[f64], g: &[f64], set: &SetDescriptor, s: usize, l: f64) -> bool {
    check_bf_tol(x, g, set, s, l, BF_TOL)
}

pub fn check_bf_tol(x: &[f64], g: &[f64], set: &SetDescriptor, s: usize, l: f64, tol: f64) -> bool {
    if SupportSet::of(x).len() > s || !set.contains(x, FEAS_TOL) || !(l > 0.0) {
        return false;
    }
    let t = bf_super_support(x, g, set.symmetry(), s);
    [l / 10.0, l, 10.0 * l]
        .iter()
        .all(|&lt| restricted_fixed_point_residual(x, g, set, &t, 1.0 / lt) <= tol)
}

/// Lu-Zhang stationarity: some `|L| = s` with `I₁(x) ⊆ L` and `g_L = 0`.
pub fn check_lu_zhang(x: &[f64], g: &[f64], s: usize) -> bool {
    let on = SupportSet::of(x);
    if on.len() > s {
        return false;
    }
    if on.iter().any(|i| g[i].abs() > LU_ZHANG_TOL) {
        return false;
    }
    let zeros_needed = s - on.len();
    let small_off = (0..x.len()).filter(|&i| x[i] == 0.0 && g[i].abs() <= LU_ZHANG_TOL).count();
    small_off >= zeros_needed
}

/// `x` is a closest point of `C ∩ C_s` to `x - g/L`.
pub fn check_l_stationarity(x: &[f64], g: &[f64], set: &SetDescriptor, s: usize, l: f64) -> bool {
    if !(l > 0.0) || SupportSet::of(x).len() > s || !set.contains(x, FEAS_TOL) {
        return false;
    }
    let z: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi / l).collect();
    match sparse_project(&z, set, s) {
        Ok(p) => sq_dist(x, &z) <= sq_dist(&p, &z) + L_STAT_TOL,
        Err(_) => false,
    }
}

/// `R <= eps` within the evaluation and time budgets.
pub fn classify_solved(residual: f64, nf2g: u64, wall: f64, eps: f64, nf2g_max: u64, sec_max: f64) -> bool {
    residual <= eps && nf2g <= nf2g_max && wall <= sec_max
}

/// Every diagnostic at once, as printed by the `check` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub f: f64,
    pub rg_s: f64,
    pub bf: bool,
    pub lu_zhang: bool,
    pub l_stationary: bool,
    pub nnz: usize,
    pub lipschitz: f64,
}

pub fn report(x: &[f64], f: f64, g: &[f64], set: &SetDescriptor, s: usize, l: f64) -> Result<StationarityReport, SetError> {
    Ok(StationarityReport {
        f,
        rg_s: rg_s(x, g, set, s)?,
        bf: check_bf(x, g, set, s, l),
        lu_zhang: check_lu_zhang(x, g, s),
        l_stationary: check_l_stationarity(x, g, set, s, l),
        nnz: SupportSet::of(x).len(),
        lipschitz: l,
    })
}
