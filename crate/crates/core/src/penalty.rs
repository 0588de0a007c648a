//! Quadratic penalty model
//! `Φ(x, y) = (x - z)ᵀg_z + ½(x - z)ᵀH(x - z) + ½ρ‖x - y‖²`
//! with diagonal `H`, and the adaptive Lipschitz estimate shared by the
//! first-order baselines.

/// Binary64 unit roundoff used by [`update_lipschitz`].
pub const EPS_MACHINE: f64 = f64::EPSILON;

/// Snapshot of the model around the expansion point `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyModel {
    pub z: Vec<f64>,
    pub g_z: Vec<f64>,
    pub h: Vec<f64>,
    pub rho: f64,
}

impl PenaltyModel {
    pub fn new(z: Vec<f64>, g_z: Vec<f64>, h: Vec<f64>, rho: f64) -> Self {
        debug_assert_eq!(z.len(), g_z.len());
        debug_assert_eq!(z.len(), h.len());
        Self { z, g_z, h, rho }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut lin = 0.0;
        let mut quad = 0.0;
        let mut pen = 0.0;
        for i in 0..self.z.len() {
            let d = x[i] - self.z[i];
            lin += d * self.g_z[i];
            quad += d * d * self.h[i];
            let e = x[i] - y[i];
            pen += e * e;
        }
        lin + 0.5 * quad + 0.5 * self.rho * pen
    }

    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.z.len())
            .map(|i| self.g_z[i] + self.h[i] * (x[i] - self.z[i]) + self.rho * (x[i] - y[i]))
            .collect()
    }

    /// The unique minimiser of `Φ(·, y)`.
    pub fn solve_x(&self, y: &[f64]) -> Vec<f64> {
        (0..self.z.len())
            .map(|i| (self.h[i] * self.z[i] + self.rho * y[i] - self.g_z[i]) / (self.h[i] + self.rho))
            .collect()
    }

    /// `min_x Φ(x, y)` in closed form.
    pub fn min_value(&self, y: &[f64]) -> f64 {
        self.value(&self.solve_x(y), y)
    }
}

pub fn model_value(m: &PenaltyModel, x: &[f64], y: &[f64]) -> f64 {
    m.value(x, y)
}

pub fn model_grad_x(m: &PenaltyModel, x: &[f64], y: &[f64]) -> Vec<f64> {
    m.grad_x(x, y)
}

pub fn solve_x(m: &PenaltyModel, y: &[f64]) -> Vec<f64> {
    m.solve_x(y)
}

/// Raises `l` to the observed change `|f - f_old| / h`, where the step
/// proxy `h` scales with `max(‖y‖∞, 1)·√eps_machine`.
pub fn update_lipschitz(l: f64, f: f64, f_old: f64, y: &[f64], eps_machine: f64) -> f64 {
    let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = (ynorm.max(1.0) * eps_machine.sqrt()).clamp(1e-3, 0.9);
    let est = (f - f_old).abs() / h;
    if est.is_finite() {
        l.max(est)
    } else {
        l
    }
}
