#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparse_pd::problem::{Objective, ProblemInstance};
use sparse_pd::sets::{SetDescriptor, SetKind, SupportSet};

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn six_sets() -> Vec<SetDescriptor> {
    vec![
        SetDescriptor::full_space(),
        SetDescriptor::nonneg_orthant(),
        SetDescriptor::simplex(),
        SetDescriptor::unit_sum(),
        SetDescriptor::lp_ball(2.0, 1.5).unwrap(),
        SetDescriptor::boxed(-1.0, 1.0).unwrap(),
    ]
}

/// `½ xᵀQx + cᵀx` that counts its own calls.
pub struct CountingQuadratic {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub values: AtomicU64,
    pub gradients: AtomicU64,
}

impl CountingQuadratic {
    pub fn new(q: DMatrix<f64>, c: DVector<f64>) -> Self {
        Self { q, c, values: AtomicU64::new(0), gradients: AtomicU64::new(0) }
    }

    pub fn reset(&self) {
        self.values.store(0, Ordering::SeqCst);
        self.gradients.store(0, Ordering::SeqCst);
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.values.load(Ordering::SeqCst), self.gradients.load(Ordering::SeqCst))
    }
}

impl Objective for CountingQuadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.values.fetch_add(1, Ordering::SeqCst);
        let x = DVector::from_column_slice(x);
        0.5 * x.dot(&(&self.q * &x)) + self.c.dot(&x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.gradients.fetch_add(1, Ordering::SeqCst);
        let g = &self.q * DVector::from_column_slice(x) + &self.c;
        out.copy_from_slice(g.as_slice());
    }
}

/// SPD matrix `BᵀB/n + ridge·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    b.transpose() * &b / n as f64 + DMatrix::identity(n, n) * ridge
}

pub fn quadratic_instance(
    id: &str,
    q: DMatrix<f64>,
    c: DVector<f64>,
    set: SetDescriptor,
    s: usize,
) -> (ProblemInstance, Arc<CountingQuadratic>) {
    let n = c.len();
    let obj = Arc::new(CountingQuadratic::new(q, c));
    let mut x0 = vec![0.0; n];
    if !set.contains(&x0, 1e-12) {
        x0[0] = 1.0;
    }
    let p = ProblemInstance::new(id, set, s, x0, obj.clone()).unwrap();
    obj.reset();
    (p, obj)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Global minimum of a strictly convex quadratic over `{‖x‖₀ ≤ s}` (and
/// `x ≥ 0` when `nonneg`) by enumerating supports: the optimum is the
/// unconstrained minimiser on its own support.
pub fn enumerate_optimum(q: &DMatrix<f64>, c: &DVector<f64>, s: usize, nonneg: bool) -> f64 {
    let n = c.len();
    let mut best = 0.0f64;
    for k in 1..=s {
        for t in subsets(n, k) {
            let qt = DMatrix::from_fn(k, k, |i, j| q[(t[i], t[j])]);
            let ct = DVector::from_fn(k, |i, _| c[t[i]]);
            let Some(chol) = qt.clone().cholesky() else { continue };
            let xt = chol.solve(&(-&ct));
            if nonneg && xt.iter().any(|&v| v <= 0.0) {
                continue;
            }
            best = best.min(0.5 * ct.dot(&xt));
        }
    }
    best
}

/// A point together with a gradient at which the strong stationarity
/// conditions hold by construction.
pub fn stationary_pair(rng: &mut ChaCha8Rng, set: &SetDescriptor, n: usize, s: usize) -> (Vec<f64>, Vec<f64>) {
    let full = rng.gen_bool(0.7);
    let k = if full { s } else { rng.gen_range(1..=s.max(1)) };
    let k = k.min(s);
    let mut x = vec![0.0; n];
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let on = &idx[..k];
    let mut g = vec![0.0; n];
    let u = |rng: &mut ChaCha8Rng| rng.gen_range(0.05..1.0);
    match set.kind() {
        SetKind::FullSpace => {
            for &i in on {
                x[i] = rng.sample::<f64, _>(StandardNormal) + 0.5f64.copysign(rng.gen_range(-1.0..1.0));
            }
        }
        SetKind::NonnegOrthant => {
            for &i in on {
                x[i] = u(rng) + 0.1;
            }
            for j in 0..n {
                if x[j] == 0.0 {
                    g[j] = u(rng);
                }
            }
        }
        SetKind::Simplex | SetKind::UnitSum => {
            let w: Vec<f64> = on.iter().map(|_| u(rng)).collect();
            let total: f64 = w.iter().sum();
            for (&i, wi) in on.iter().zip(&w) {
                x[i] = wi / total;
            }
            let lambda = rng.gen_range(-1.0..1.0);
            for j in 0..n {
                let off = x[j] == 0.0 && k == s && set.kind() == SetKind::Simplex;
                g[j] = if off { lambda + u(rng) } else { lambda };
            }
        }
        SetKind::LpBall { radius, .. } => {
            let mut v: Vec<f64> = on.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let boundary = rng.gen_bool(0.5);
            let scale = if boundary { radius / norm } else { 0.5 * radius / norm };
            v.iter_mut().for_each(|a| *a *= scale);
            for (&i, vi) in on.iter().zip(&v) {
                x[i] = *vi;
            }
            if boundary {
                let mu = u(rng);
                for &i in on {
                    g[i] = -mu * x[i];
                }
                let min_on = on.iter().map(|&i| g[i].abs()).fold(f64::INFINITY, f64::min);
                for j in 0..n {
                    if x[j] == 0.0 && k == s {
                        g[j] = rng.gen_range(-1.0..1.0) * min_on;
                    }
                }
            }
        }
        SetKind::Box { lower, upper } => {
            for &i in on {
                x[i] = match rng.gen_range(0..3) {
                    0 => upper,
                    1 => lower,
                    _ => rng.gen_range(0.2..0.8) * upper,
                };
                g[i] = if x[i] == upper {
                    -u(rng)
                } else if x[i] == lower {
                    u(rng)
                } else {
                    0.0
                };
            }
            let min_on = on.iter().map(|&i| g[i].abs()).fold(f64::INFINITY, f64::min);
            for j in 0..n {
                if x[j] == 0.0 && k == s {
                    g[j] = rng.gen_range(-1.0..1.0) * min_on;
                }
            }
        }
    }
    debug_assert!(SupportSet::of(&x).len() <= s);
    (x, g)
}
