//! Seeded benchmark instances for the eight problem families.
//!
//! Every instance is a pure function of `(seed, family)`. Objectives are
//! divided by `max(1, ‖∇f(x0)‖∞)` so budgets mean the same across families.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bench::dataset::{load_dataset, standardize_columns, DatasetName};
use crate::error::{Error, Result};
use crate::problem::{Family, Objective, ProblemInstance};
use crate::sets::{sparse_project, SetDescriptor};

pub const N_MIN: usize = 10;
pub const N_MAX: usize = 500;
/// Ridge added to the random SPD matrix.
pub const SPD_RIDGE: f64 = 1e-3;
pub const TOEPLITZ_BASE: f64 = 0.9;
/// Pole of the first-order system behind the control family.
pub const CONTROL_POLE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityBranch {
    Low,
    Medium,
    HighHalf,
    HighThreeQuarters,
}

/// Sparsity from the three-range rule, clamped to `[2, n - 1]`.
pub fn sparsity_level(n: usize, branch: SparsityBranch) -> usize {
    let frac = match branch {
        SparsityBranch::Low => 0.15,
        SparsityBranch::Medium => 0.25,
        SparsityBranch::HighHalf => 0.5,
        SparsityBranch::HighThreeQuarters => 0.75,
    };
    let s = (frac * n as f64).floor() as usize;
    s.max(2).min(n - 1)
}

pub fn sample_size(n: usize) -> usize {
    (n / 2).max(2)
}

/// Objective data, serialisable so instances can be written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyData {
    /// `½xᵀQx + cᵀx`
    Quadratic { q: DMatrix<f64>, c: DVector<f64> },
    /// `½‖Ax - b‖²`
    LeastSquares { a: DMatrix<f64>, b: DVector<f64> },
    /// `(1/m) Σ log(1 + exp(-bᵢ aᵢᵀx))`
    Logistic { a: DMatrix<f64>, b: DVector<f64> },
    /// `-xᵀΣx`
    NegQuadratic { sigma: DMatrix<f64> },
    /// `½‖|Ax| - b‖²`
    PhaseRetrieval { a: DMatrix<f64>, b: DVector<f64> },
}

impl FamilyData {
    fn dim(&self) -> usize {
        match self {
            FamilyData::Quadratic { q, .. } => q.ncols(),
            FamilyData::LeastSquares { a, .. } | FamilyData::Logistic { a, .. } | FamilyData::PhaseRetrieval { a, .. } => {
                a.ncols()
            }
            FamilyData::NegQuadratic { sigma } => sigma.ncols(),
        }
    }

    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let xv = DVector::from_column_slice(x);
        let (f, g) = match self {
            FamilyData::Quadratic { q, c } => {
                let qx = q * &xv;
                (0.5 * xv.dot(&qx) + c.dot(&xv), grad.is_some().then(|| qx + c))
            }
            FamilyData::LeastSquares { a, b } => {
                let r = a * &xv - b;
                (0.5 * r.norm_squared(), grad.is_some().then(|| a.tr_mul(&r)))
            }
            FamilyData::Logistic { a, b } => {
                let m = a.nrows() as f64;
                let t = (a * &xv).component_mul(b);
                let f = t.iter().map(|&t| softplus(-t)).sum::<f64>() / m;
                let g = grad.is_some().then(|| {
                    let w = DVector::from_fn(t.len(), |i, _| -b[i] * sigmoid(-t[i]) / m);
                    a.tr_mul(&w)
                });
                (f, g)
            }
            FamilyData::NegQuadratic { sigma } => {
                let sx = sigma * &xv;
                (-xv.dot(&sx), grad.is_some().then(|| -2.0 * sx))
            }
            FamilyData::PhaseRetrieval { a, b } => {
                let ax = a * &xv;
                let r = DVector::from_fn(ax.len(), |i, _| ax[i].abs() - b[i]);
                let g = grad.is_some().then(|| {
                    // sign(0) = +1
                    let w = DVector::from_fn(ax.len(), |i, _| if ax[i] >= 0.0 { r[i] } else { -r[i] });
                    a.tr_mul(&w)
                });
                (0.5 * r.norm_squared(), g)
            }
        };
        if let (Some(out), Some(g)) = (grad, g) {
            out.copy_from_slice(g.as_slice());
        }
        f
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Family data with its normalisation factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchObjective {
    pub data: FamilyData,
    pub scale: f64,
}

impl Objective for BenchObjective {
    fn dim(&self) -> usize {
        self.data.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.data.eval(x, None) / self.scale
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.data.eval(x, Some(out));
        for v in out.iter_mut() {
            *v /= self.scale;
        }
    }
}

/// Self-contained description of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub id: String,
    pub family: Family,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub set: SetDescriptor,
    pub x0: Vec<f64>,
    pub objective: BenchObjective,
}

impl ProblemFile {
    pub fn instance(&self) -> Result<ProblemInstance> {
        Ok(
            ProblemInstance::new(self.id.clone(), self.set, self.s, self.x0.clone(), Arc::new(self.objective.clone()))?
                .with_meta(Some(self.family), self.m, self.seed),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    // Row-major draw order keeps the stream independent of storage layout.
    let vals: Vec<f64> = (0..rows * cols).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &vals)
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn sparse_signal(rng: &mut ChaCha8Rng, n: usize, s: usize) -> DVector<f64> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut x = DVector::zeros(n);
    for &i in &idx[..s] {
        x[i] = rng.sample(StandardNormal);
    }
    x
}

pub fn toeplitz(n: usize, base: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| base.powi((i as i32 - j as i32).abs()))
}

/// Widens a standardised data matrix to `n` columns. Extra columns are
/// products of random pairs from the growing pool, each standardised.
pub fn expand_columns(base: &DMatrix<f64>, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let rows = base.nrows();
    let mut cols: Vec<DVector<f64>> = base.column_iter().take(n).map(|c| c.into_owned()).collect();
    while cols.len() < n {
        let i = rng.gen_range(0..cols.len());
        let j = rng.gen_range(0..cols.len());
        let mut prod = DMatrix::from_column_slice(rows, 1, cols[i].component_mul(&cols[j]).as_slice());
        standardize_columns(&mut prod);
        cols.push(prod.column(0).into_owned());
    }
    DMatrix::from_fn(rows, n, |r, c| cols[c][r])
}

/// `m` record indices: a seeded permutation, cycled when `m > rows`.
pub fn select_rows(rows: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..rows).collect();
    perm.shuffle(rng);
    (0..m).map(|r| perm[r % rows]).collect()
}

fn standardized_target(b: &DVector<f64>) -> DVector<f64> {
    let mut t = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    standardize_columns(&mut t);
    t.column(0).into_owned()
}

fn dataset_rows(name: DatasetName, n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let d = load_dataset(name, None)?;
    let b_full = if name == DatasetName::Iris { d.b.clone() } else { standardized_target(&d.b) };
    let a_full = expand_columns(&d.a, n, rng);
    let idx = select_rows(d.a.nrows(), m, rng);
    let a = DMatrix::from_fn(m, n, |r, c| a_full[(idx[r], c)]);
    let b = DVector::from_fn(m, |r, _| b_full[idx[r]]);
    Ok((a, b))
}

/// Seed of instance `index` under `master`.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

pub fn generate_file(seed: u64, family: Family, id: impl Into<String>) -> Result<ProblemFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(N_MIN..=N_MAX);
    let branch = match rng.gen_range(0..3) {
        0 => SparsityBranch::Low,
        1 => SparsityBranch::Medium,
        _ if rng.gen_bool(0.5) => SparsityBranch::HighHalf,
        _ => SparsityBranch::HighThreeQuarters,
    };
    let s = sparsity_level(n, branch);
    let mut m = sample_size(n);
    let mut set = SetDescriptor::full_space();
    let data = match family {
        Family::SparseQuadratic => {
            let b = gaussian_matrix(&mut rng, n, n, 1.0);
            let mut q = b.tr_mul(&b) / n as f64;
            for i in 0..n {
                q[(i, i)] += SPD_RIDGE;
            }
            FamilyData::Quadratic { q, c: gaussian_vector(&mut rng, n) }
        }
        Family::Portfolio => {
            set = SetDescriptor::simplex();
            let ret = DVector::from_fn(n, |_, _| rng.gen_range(0.0..1.0));
            FamilyData::Quadratic {
                q: toeplitz(n, TOEPLITZ_BASE),
                c: -ret,
            }
        }
        Family::SparseRegression => {
            let (a, b) = dataset_rows(DatasetName::Boston, n, m, &mut rng)?;
            FamilyData::LeastSquares { a, b }
        }
        Family::LogisticRegression => {
            let (a, b) = dataset_rows(DatasetName::Iris, n, m, &mut rng)?;
            FamilyData::Logistic { a, b }
        }
        Family::SparsePca => {
            set = SetDescriptor::lp_ball(2.0, 1.0)?;
            let (a, _) = dataset_rows(DatasetName::Wine, n, m, &mut rng)?;
            FamilyData::NegQuadratic {
                sigma: a.tr_mul(&a) / m as f64,
            }
        }
        Family::DisjunctiveQuadratic => {
            m = n.div_ceil(2);
            FamilyData::LeastSquares {
                a: gaussian_matrix(&mut rng, m, n, 1.0),
                b: DVector::zeros(m),
            }
        }
        Family::PhaseRetrieval => {
            let a = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
            let truth = sparse_signal(&mut rng, n, s);
            let b = (&a * truth).abs();
            FamilyData::PhaseRetrieval { a, b }
        }
        Family::SparseControl => {
            // Impulse response of x⁺ = a·x + u sampled at m instants.
            let a = DMatrix::from_fn(m, n, |i, j| {
                let t = ((i + 1) * n) / m - 1;
                if j <= t {
                    CONTROL_POLE.powi((t - j) as i32)
                } else {
                    0.0
                }
            });
            let u = sparse_signal(&mut rng, n, s);
            let b = &a * u;
            FamilyData::LeastSquares { a, b }
        }
    };
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let x0 = sparse_project(&z, &set, s)?;
    let mut obj = BenchObjective { data, scale: 1.0 };
    let mut g0 = vec![0.0; n];
    obj.gradient(&x0, &mut g0);
    let gmax = g0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !gmax.is_finite() {
        return Err(Error::Problem(format!("non-finite gradient at x0 for {family}")));
    }
    obj.scale = gmax.max(1.0);
    Ok(ProblemFile {
        id: id.into(),
        family,
        seed,
        n,
        m,
        s,
        set,
        x0,
        objective: obj,
    })
}

pub fn generate_instance(seed: u64, family: Family) -> Result<ProblemInstance> {
    generate_file(seed, family, format!("{family}-{seed}"))?.instance()
}

/// `count` instances; families cycle in table order.
pub fn generate_suite(master_seed: u64, count: usize) -> Result<Vec<ProblemFile>> {
    (0..count)
        .map(|i| {
            let family = Family::ALL[i % Family::ALL.len()];
            generate_file(derive_seed(master_seed, i), family, format!("p{:02}-{}", i + 1, family))
        })
        .collect()
}
