//! Symmetric convex sets, their (restricted) Euclidean projections and the
//! sparse projection onto `C ∩ {‖x‖₀ ≤ s}`.
//!
//! Index ties are always broken towards the smaller index so that every
//! selection below is deterministic.

use std::cmp::Ordering;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::SetError;

/// Absolute tolerance for membership tests on each defining constraint.
pub const FEAS_TOL: f64 = 1e-12;

/// Largest dimension accepted by [`oracle_sparse_project`].
pub const ORACLE_MAX_N: usize = 12;

const LP_ROOT_TOL: f64 = 1e-12;
const LP_ROOT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    FullSpace,
    NonnegOrthant,
    /// `{x ≥ 0, Σx = 1}`
    Simplex,
    /// `{Σx = 1}`
    UnitSum,
    LpBall {
        #[serde(with = "extended_f64")]
        p: f64,
        radius: f64,
    },
    Box { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// Permutation invariant and contained in the nonnegative orthant.
    NonnegType1,
    /// Invariant under permutations and sign flips.
    Type2,
}

impl Symmetry {
    /// The symmetry function: `v` for nonnegative sets, `|v|` for sign-symmetric ones.
    #[inline]
    pub fn score(self, v: f64) -> f64 {
        match self {
            Symmetry::NonnegType1 => v,
            Symmetry::Type2 => v.abs(),
        }
    }

    pub fn apply(self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.score(x)).collect()
    }
}

/// A validated symmetric convex set together with the sorting rule used for
/// sparse selection on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetKind", into = "SetKind")]
pub struct SetDescriptor {
    kind: SetKind,
    symmetry: Symmetry,
}

impl TryFrom<SetKind> for SetDescriptor {
    type Error = SetError;
    fn try_from(kind: SetKind) -> Result<Self, SetError> {
        SetDescriptor::new(kind)
    }
}

impl From<SetDescriptor> for SetKind {
    fn from(d: SetDescriptor) -> SetKind {
        d.kind
    }
}

impl SetDescriptor {
    pub fn new(kind: SetKind) -> Result<Self, SetError> {
        let symmetry = match kind {
            SetKind::FullSpace => Symmetry::Type2,
            SetKind::NonnegOrthant | SetKind::Simplex | SetKind::UnitSum => Symmetry::NonnegType1,
            SetKind::LpBall { p, radius } => {
                if !(p >= 1.0) || !(radius > 0.0) || !radius.is_finite() {
                    return Err(SetError::InvalidBall { p, radius });
                }
                Symmetry::Type2
            }
            SetKind::Box { lower, upper } => {
                if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
                    return Err(SetError::InvalidBox { lower, upper });
                }
                // Symmetric boxes sort by magnitude; every other box uses the
                // signed rule.
                if lower == -upper {
                    Symmetry::Type2
                } else {
                    Symmetry::NonnegType1
                }
            }
        };
        Ok(Self { kind, symmetry })
    }

    pub fn full_space() -> Self {
        Self::new(SetKind::FullSpace).unwrap()
    }
    pub fn nonneg_orthant() -> Self {
        Self::new(SetKind::NonnegOrthant).unwrap()
    }
    pub fn simplex() -> Self {
        Self::new(SetKind::Simplex).unwrap()
    }
    pub fn unit_sum() -> Self {
        Self::new(SetKind::UnitSum).unwrap()
    }
    pub fn lp_ball(p: f64, radius: f64) -> Result<Self, SetError> {
        Self::new(SetKind::LpBall { p, radius })
    }
    pub fn boxed(lower: f64, upper: f64) -> Result<Self, SetError> {
        Self::new(SetKind::Box { lower, upper })
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Whether the set carries an equality constraint `Σx = 1`.
    pub fn has_sum_constraint(&self) -> bool {
        matches!(self.kind, SetKind::Simplex | SetKind::UnitSum)
    }

    /// Whether a coordinate may be set to zero (the origin is "allowed"
    /// coordinate-wise). False only for boxes excluding zero.
    pub fn zero_admissible(&self) -> bool {
        match self.kind {
            SetKind::Box { lower, upper } => lower <= 0.0 && upper >= 0.0,
            _ => true,
        }
    }

    /// Membership test with absolute tolerance `tol` on every constraint.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            SetKind::FullSpace => true,
            SetKind::NonnegOrthant => x.iter().all(|&v| v >= -tol),
            SetKind::Simplex => x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol,
            SetKind::UnitSum => (x.iter().sum::<f64>() - 1.0).abs() <= tol,
            SetKind::LpBall { p, radius } => lp_norm(x, p) <= radius + tol,
            SetKind::Box { lower, upper } => x.iter().all(|&v| v >= lower - tol && v <= upper + tol),
        }
    }

    /// Projects `v` in place onto the set restricted to `v.len()` coordinates,
    /// all other coordinates of the ambient `n`-vector being zero.
    pub fn project_restricted_in_place(&self, v: &mut [f64], n: usize) -> Result<(), SetError> {
        let k = v.len();
        if k > n {
            return Err(SetError::Dimension { expected: n, got: k });
        }
        match self.kind {
            SetKind::FullSpace => {}
            SetKind::NonnegOrthant => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            SetKind::Simplex => {
                if k == 0 {
                    return Err(SetError::InfeasibleRestriction { support: k, n });
                }
                project_simplex(v, 1.0);
            }
            SetKind::UnitSum => {
                if k == 0 {
                    return Err(SetError::InfeasibleRestriction { support: k, n });
                }
                let shift = (1.0 - v.iter().sum::<f64>()) / k as f64;
                v.iter_mut().for_each(|x| *x += shift);
            }
            SetKind::LpBall { p, radius } => project_lp_ball(v, p, radius),
            SetKind::Box { lower, upper } => {
                if k < n && !(lower <= 0.0 && upper >= 0.0) {
                    return Err(SetError::InfeasibleRestriction { support: k, n });
                }
                v.iter_mut().for_each(|x| *x = x.clamp(lower, upper));
            }
        }
        Ok(())
    }
}

/// `P_C(x)`.
pub fn project_convex(x: &[f64], set: &SetDescriptor) -> Result<Vec<f64>, SetError> {
    let mut v = x.to_vec();
    set.project_restricted_in_place(&mut v, x.len())?;
    Ok(v)
}

/// Projection of `x_l` onto the restriction `C_L = {w : U_L w ∈ C}`.
pub fn project_convex_restricted(
    x_l: &[f64],
    set: &SetDescriptor,
    support: &SupportSet,
) -> Result<Vec<f64>, SetError> {
    if x_l.len() != support.len() {
        return Err(SetError::Dimension {
            expected: support.len(),
            got: x_l.len(),
        });
    }
    let mut v = x_l.to_vec();
    set.project_restricted_in_place(&mut v, support.n())?;
    Ok(v)
}

/// Projects the entries of `x` indexed by `support` onto `C_L` and embeds the
/// result into a zero `n`-vector.
pub fn project_onto_support(x: &[f64], set: &SetDescriptor, support: &SupportSet) -> Result<Vec<f64>, SetError> {
    let mut sub: Vec<f64> = support.iter().map(|i| x[i]).collect();
    set.project_restricted_in_place(&mut sub, x.len())?;
    Ok(support.embed(&sub))
}

/// A sparse projection of `x` onto `C ∩ C_s`.
pub fn sparse_project(x: &[f64], set: &SetDescriptor, s: usize) -> Result<Vec<f64>, SetError> {
    let n = x.len();
    if s == 0 || s > n {
        return Err(SetError::Sparsity { s, n });
    }
    let support = sparse_support(x, set, s)?;
    project_onto_support(x, set, &support)
}

/// The support used by [`sparse_project`].
pub fn sparse_support(x: &[f64], set: &SetDescriptor, s: usize) -> Result<SupportSet, SetError> {
    let n = x.len();
    if s == 0 || s > n {
        return Err(SetError::Sparsity { s, n });
    }
    match set.kind {
        SetKind::Box { lower, upper } => {
            if s < n && !set.zero_admissible() {
                return Err(SetError::InfeasibleRestriction { support: s, n });
            }
            // Separable: keep the coordinates whose clamped value saves the most.
            let gain: Vec<f64> = x
                .iter()
                .map(|&v| {
                    let r = v - v.clamp(lower, upper);
                    v * v - r * r
                })
                .collect();
            Ok(SupportSet::from_sorted_unchecked(top_k(&gain, s), n))
        }
        SetKind::UnitSum => Ok(unit_sum_support(x, s)),
        _ => {
            let scores = set.symmetry.apply(x);
            Ok(SupportSet::from_sorted_unchecked(top_k(&scores, s), n))
        }
    }
}

/// The optimal support for the hyperplane `{Σx = 1}` is always made of the
/// `a` largest and `s - a` smallest entries for some `a`; scan all splits.
fn unit_sum_support(x: &[f64], s: usize) -> SupportSet {
    let n = x.len();
    let order = SortingPermutation::new(x);
    let ord = order.order();
    let total_sq: f64 = x.iter().map(|v| v * v).sum();
    let mut best: Option<(f64, usize)> = None;
    for a in 0..=s {
        let b = s - a;
        let idx = ord[..a].iter().chain(ord[n - b..].iter());
        let (mut sum, mut sq) = (0.0, 0.0);
        for &i in idx {
            sum += x[i];
            sq += x[i] * x[i];
        }
        let dist = total_sq - sq + (1.0 - sum).powi(2) / s as f64;
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, a));
        }
    }
    let a = best.map(|(_, a)| a).unwrap_or(s);
    let chosen: Vec<usize> = ord[..a].iter().chain(ord[n - (s - a)..].iter()).copied().collect();
    SupportSet::new(chosen, n).expect("indices come from a permutation")
}

/// Exact sparse projection by enumerating every support of size `s`.
/// Reference implementation for tests; limited to `n <= 12`.
pub fn oracle_sparse_project(x: &[f64], set: &SetDescriptor, s: usize) -> Result<Vec<f64>, SetError> {
    let n = x.len();
    if n > ORACLE_MAX_N {
        return Err(SetError::OracleTooLarge { n, max: ORACLE_MAX_N });
    }
    if s == 0 || s > n {
        return Err(SetError::Sparsity { s, n });
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut last_err = None;
    for combo in (0..n).combinations(s) {
        let support = SupportSet::from_sorted_unchecked(combo, n);
        match project_onto_support(x, set, &support) {
            Ok(z) => {
                let d = sq_dist(&z, x);
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, z));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, z)) => Ok(z),
        None => Err(last_err.unwrap_or(SetError::Infeasible)),
    }
}

/// Super-support for the restricted y-update.
///
/// With `‖y‖₀ < s` the support of `y` is completed by the off-support indices
/// with the largest `p(-score)`. With a full support, a single off-support
/// index may replace the weakest on-support index when its `p(-score)` is
/// strictly larger.
pub fn select_super_support(
    y: &[f64],
    score: &[f64],
    s: usize,
    symmetry: Symmetry,
) -> Result<SupportSet, SetError> {
    let n = y.len();
    if score.len() != n {
        return Err(SetError::Dimension { expected: n, got: score.len() });
    }
    if s == 0 || s > n {
        return Err(SetError::Sparsity { s, n });
    }
    let on = SupportSet::of(y);
    if on.len() > s {
        return Err(SetError::TooDense { nnz: on.len(), s });
    }
    let pv: Vec<f64> = score.iter().map(|&g| symmetry.score(-g)).collect();
    let mut off: Vec<usize> = (0..n).filter(|&i| y[i] == 0.0).collect();
    off.sort_by(|&a, &b| desc(pv[a], pv[b]).then(a.cmp(&b)));

    let mut chosen: Vec<usize> = on.indices().to_vec();
    if on.len() < s {
        chosen.extend(off.iter().take(s - on.len()));
    } else if let Some(&enter) = off.first() {
        let (pos, &leave) = chosen
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| pv[a].total_cmp(&pv[b]).then(a.cmp(&b)))
            .expect("support is nonempty when s >= 1");
        if pv[enter] > pv[leave] {
            chosen[pos] = enter;
        }
    }
    SupportSet::new(chosen, n)
}

/// Sorted, duplicate-free index set in `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
    n: usize,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self, SetError> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(SetError::Dimension { expected: n, got: last + 1 });
            }
        }
        Ok(Self { indices, n })
    }

    fn from_sorted_unchecked(mut indices: Vec<usize>, n: usize) -> Self {
        indices.sort_unstable();
        Self { indices, n }
    }

    /// `I₁(x)`.
    pub fn of(x: &[f64]) -> Self {
        let indices = x.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
        Self { indices, n: x.len() }
    }

    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect(), n }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.indices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// `x_L`.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.iter().map(|i| x[i]).collect()
    }

    /// `U_L w`.
    pub fn embed(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, &v) in self.indices.iter().zip(w) {
            out[i] = v;
        }
        out
    }

    /// `I₀(x)` relative to this set's dimension.
    pub fn complement(&self) -> SupportSet {
        let indices = (0..self.n).filter(|&i| !self.contains(i)).collect();
        Self { indices, n: self.n }
    }
}

/// Indices ordered so that values are nonincreasing, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortingPermutation {
    order: Vec<usize>,
}

impl SortingPermutation {
    pub fn new(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| desc(values[a], values[b]).then(a.cmp(&b)));
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The window `{π(j1), …, π(j2)}` in 1-based positions; empty unless
    /// `0 < j1 <= j2 <= n`.
    pub fn window(&self, j1: usize, j2: usize) -> Vec<usize> {
        if j1 == 0 || j1 > j2 || j2 > self.order.len() {
            return Vec::new();
        }
        self.order[j1 - 1..j2].to_vec()
    }
}

/// Indices of the `k` largest values (ties by ascending index), in rank order.
pub(crate) fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| desc(values[a], values[b]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

#[inline]
fn desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Sort-and-shift projection onto `{w ≥ 0, Σw = total}`.
fn project_simplex(v: &mut [f64], total: f64) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

fn project_lp_ball(v: &mut [f64], p: f64, radius: f64) {
    if lp_norm(v, p) <= radius {
        return;
    }
    if p.is_infinite() {
        v.iter_mut().for_each(|x| *x = x.clamp(-radius, radius));
    } else if p == 2.0 {
        let scale = radius / lp_norm(v, 2.0);
        v.iter_mut().for_each(|x| *x *= scale);
    } else if p == 1.0 {
        let mut mag: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        project_simplex(&mut mag, radius);
        for (x, m) in v.iter_mut().zip(mag) {
            *x = m.copysign(*x);
        }
    } else {
        project_lp_general(v, p, radius);
    }
}

/// Root search on the multiplier of `Σ|w|^p ≤ r^p`; each coordinate solves
/// `u + λ p u^{p-1} = |v_i|` on `[0, |v_i|]` by bisection.
fn project_lp_general(v: &mut [f64], p: f64, radius: f64) {
    let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let target = radius.powf(p);
    let coord = |lambda: f64, ai: f64| -> f64 {
        if ai == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, ai);
        for _ in 0..LP_ROOT_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid + lambda * p * mid.powf(p - 1.0) > ai {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= LP_ROOT_TOL * ai {
                break;
            }
        }
        lo
    };
    let excess = |lambda: f64| -> f64 { a.iter().map(|&ai| coord(lambda, ai).powf(p)).sum::<f64>() - target };

    let (mut lo, mut hi) = (0.0, 1.0);
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..LP_ROOT_MAX_ITER {
        if hi - lo <= LP_ROOT_TOL * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u: Vec<f64> = a.iter().map(|&ai| coord(hi, ai)).collect();
    // The feasible side of the bracket may still overshoot by rounding.
    let norm = lp_norm(&u, p);
    if norm > radius {
        let s = radius / norm;
        u.iter_mut().for_each(|x| *x *= s);
    }
    for (x, ui) in v.iter_mut().zip(u) {
        *x = ui.copysign(*x);
    }
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Num(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn convex_projection_examples() {
        close(&project_convex(&[2.0, -3.0], &SetDescriptor::nonneg_orthant()).unwrap(), &[2.0, 0.0], 0.0);
        let shift = (1.0 - 1.2) / 3.0;
        close(
            &project_convex(&[0.5, 0.4, 0.3], &SetDescriptor::simplex()).unwrap(),
            &[0.5 + shift, 0.4 + shift, 0.3 + shift],
            1e-15,
        );
        close(&project_convex(&[3.0, 4.0], &SetDescriptor::lp_ball(2.0, 1.0).unwrap()).unwrap(), &[0.6, 0.8], 1e-15);
    }

    #[test]
    fn restricted_projection_examples() {
        let l2 = SupportSet::new(vec![0, 1], 4).unwrap();
        close(&project_convex_restricted(&[0.7, 0.7], &SetDescriptor::simplex(), &l2).unwrap(), &[0.5, 0.5], 1e-15);
        let l1 = SupportSet::new(vec![2], 4).unwrap();
        close(&project_convex_restricted(&[2.0], &SetDescriptor::boxed(0.0, 1.0).unwrap(), &l1).unwrap(), &[1.0], 0.0);
        let ball = SetDescriptor::lp_ball(1.0, 1.0).unwrap();
        close(&project_convex_restricted(&[3.0, -1.0], &ball, &l2).unwrap(), &[1.0, 0.0], 1e-15);
    }

    #[test]
    fn empty_restriction_is_an_error() {
        let empty = SupportSet::new(vec![], 3).unwrap();
        assert!(matches!(
            project_convex_restricted(&[], &SetDescriptor::unit_sum(), &empty),
            Err(SetError::InfeasibleRestriction { .. })
        ));
        assert!(matches!(
            project_convex_restricted(&[], &SetDescriptor::simplex(), &empty),
            Err(SetError::InfeasibleRestriction { .. })
        ));
    }

    #[test]
    fn descriptor_validation() {
        assert!(SetDescriptor::lp_ball(0.5, 1.0).is_err());
        assert!(SetDescriptor::lp_ball(2.0, 0.0).is_err());
        assert!(SetDescriptor::boxed(1.0, 1.0).is_err());
        assert_eq!(SetDescriptor::boxed(-2.0, 2.0).unwrap().symmetry(), Symmetry::Type2);
        assert_eq!(SetDescriptor::boxed(0.0, 2.0).unwrap().symmetry(), Symmetry::NonnegType1);
        assert_eq!(SetDescriptor::boxed(-1.0, 2.0).unwrap().symmetry(), Symmetry::NonnegType1);
        assert_eq!(SetDescriptor::lp_ball(f64::INFINITY, 1.0).unwrap().symmetry(), Symmetry::Type2);
        assert_eq!(SetDescriptor::unit_sum().symmetry(), Symmetry::NonnegType1);
    }

    #[test]
    fn serde_roundtrip_keeps_infinite_p() {
        let d = SetDescriptor::lp_ball(f64::INFINITY, 2.0).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"inf\""));
        let back: SetDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<SetDescriptor>(r#"{"kind":"box","lower":1.0,"upper":0.0}"#).is_err());
    }

    #[test]
    fn sparse_projection_examples() {
        close(&sparse_project(&[3.0, 1.0, -4.0], &SetDescriptor::full_space(), 2).unwrap(), &[3.0, 0.0, -4.0], 0.0);
        close(&sparse_project(&[0.5, 0.4, 0.3], &SetDescriptor::simplex(), 2).unwrap(), &[0.55, 0.45, 0.0], 1e-15);
        close(&sparse_project(&[-1.0, -2.0, -3.0], &SetDescriptor::nonneg_orthant(), 1).unwrap(), &[0.0; 3], 0.0);
    }

    #[test]
    fn unit_sum_prefers_extremes_when_they_pay() {
        // Keeping the large negative entry is far cheaper than zeroing it.
        let x = [5.0, -10.0, 0.0];
        let z = sparse_project(&x, &SetDescriptor::unit_sum(), 2).unwrap();
        let o = oracle_sparse_project(&x, &SetDescriptor::unit_sum(), 2).unwrap();
        assert_abs_diff_eq!(sq_dist(&z, &x), sq_dist(&o, &x), epsilon = 1e-12);
        assert_eq!(z[2], 0.0);
    }

    #[test]
    fn oracle_bounds() {
        assert!(matches!(
            oracle_sparse_project(&[0.0; 13], &SetDescriptor::full_space(), 2),
            Err(SetError::OracleTooLarge { .. })
        ));
        close(
            &oracle_sparse_project(&[3.0, 1.0, -4.0], &SetDescriptor::full_space(), 2).unwrap(),
            &[3.0, 0.0, -4.0],
            0.0,
        );
    }

    #[test]
    fn simplex_and_box_match_oracle_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let simplex = SetDescriptor::simplex();
        for _ in 0..500 {
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = sparse_project(&x, &simplex, 2).unwrap();
            let b = oracle_sparse_project(&x, &simplex, 2).unwrap();
            assert_abs_diff_eq!(sq_dist(&a, &x), sq_dist(&b, &x), epsilon = 1e-10);
        }
        let bx = SetDescriptor::boxed(-1.0, 1.0).unwrap();
        for _ in 0..500 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let a = sparse_project(&x, &bx, 3).unwrap();
            let b = oracle_sparse_project(&x, &bx, 3).unwrap();
            assert_abs_diff_eq!(sq_dist(&a, &x), sq_dist(&b, &x), epsilon = 1e-10);
        }
    }

    #[test]
    fn general_lp_projection_is_feasible_and_optimal_direction() {
        let ball = SetDescriptor::lp_ball(1.5, 1.0).unwrap();
        let x = [2.0, -1.0, 0.5];
        let z = project_convex(&x, &ball).unwrap();
        assert!(ball.contains(&z, 1e-12));
        assert_abs_diff_eq!(lp_norm(&z, 1.5), 1.0, epsilon = 1e-9);
        // Projection onto a convex set: <x - z, w - z> <= 0 for feasible w.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = project_convex(&w, &ball).unwrap();
            let ip: f64 = (0..3).map(|i| (x[i] - z[i]) * (w[i] - z[i])).sum();
            assert!(ip <= 1e-8, "variational inequality violated: {ip}");
        }
    }

    #[test]
    fn infinity_ball_clamps() {
        let ball = SetDescriptor::lp_ball(f64::INFINITY, 0.5).unwrap();
        close(&project_convex(&[1.0, -0.2, -3.0], &ball).unwrap(), &[0.5, -0.2, -0.5], 0.0);
    }

    #[test]
    fn super_support_examples() {
        // p(-score) = (5, 1, 3) for a type-2 set.
        let score = [-5.0, 1.0, 3.0];
        let l = select_super_support(&[0.0, 2.0, 0.0], &score, 2, Symmetry::Type2).unwrap();
        assert_eq!(l.indices(), &[0, 1]);

        let l = select_super_support(&[0.0, 0.0, 0.0], &[1.0, -3.0, 2.0], 2, Symmetry::Type2).unwrap();
        assert_eq!(l.indices(), &[1, 2]);

        // Full support, off-support score does not beat any on-support score.
        let l = select_super_support(&[1.0, 1.0, 0.0], &[4.0, 5.0, 1.0], 2, Symmetry::Type2).unwrap();
        assert_eq!(l.indices(), &[0, 1]);

        // Full support with a strictly better off-support index: one swap.
        let l = select_super_support(&[1.0, 1.0, 0.0], &[4.0, 0.5, 9.0], 2, Symmetry::Type2).unwrap();
        assert_eq!(l.indices(), &[0, 2]);

        assert!(select_super_support(&[1.0, 1.0, 1.0], &[0.0; 3], 2, Symmetry::Type2).is_err());
    }

    #[test]
    fn nonneg_super_support_uses_signed_descent() {
        // p(-g) = -g: the most negative gradient is preferred.
        let l = select_super_support(&[0.0, 0.0, 0.0], &[-1.0, 5.0, -2.0], 1, Symmetry::NonnegType1).unwrap();
        assert_eq!(l.indices(), &[2]);
    }

    #[test]
    fn sorting_permutation_and_windows() {
        let p = SortingPermutation::new(&[4.0, 1.0, 6.0, 4.0]);
        assert_eq!(p.order(), &[2, 0, 3, 1]);
        assert_eq!(p.window(2, 3), vec![0, 3]);
        assert!(p.window(0, 2).is_empty());
        assert!(p.window(3, 2).is_empty());
        assert!(p.window(1, 5).is_empty());
    }

    #[test]
    fn support_set_helpers() {
        let s = SupportSet::new(vec![3, 1, 3], 5).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
        assert_eq!(s.complement().indices(), &[0, 2, 4]);
        assert_eq!(s.embed(&[7.0, 8.0]), vec![0.0, 7.0, 0.0, 8.0, 0.0]);
        assert!(SupportSet::new(vec![5], 5).is_err());
        assert_eq!(SupportSet::of(&[0.0, -1.0, 0.0]).indices(), &[1]);
    }

    #[test]
    fn box_excluding_zero_cannot_be_sparse() {
        let bx = SetDescriptor::boxed(0.5, 1.0).unwrap();
        assert!(sparse_project(&[1.0, 1.0, 1.0], &bx, 2).is_err());
        assert!(sparse_project(&[1.0, 1.0, 1.0], &bx, 3).is_ok());
    }
}
