//! Diagonal quasi-Newton Hessian approximations built from a short memory of
//! step and gradient differences.
//!
//! All four variants are clipped into `[lambda_min, lambda_max]` after every
//! update, so the model stays uniformly convex and bounded.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HessianKind {
    /// LM1 rescaled so that its geometric mean equals the spectral scalar.
    D,
    /// Entrywise secant ratio over the memory.
    Lm1,
    /// Barzilai-Borwein scalar on the whole diagonal.
    Lm2,
    /// Half-way blend of the previous diagonal and LM1.
    Lm3,
}

impl HessianKind {
    pub const ALL: [HessianKind; 4] = [HessianKind::D, HessianKind::Lm1, HessianKind::Lm2, HessianKind::Lm3];

    pub fn as_str(self) -> &'static str {
        match self {
            HessianKind::D => "d",
            HessianKind::Lm1 => "lm1",
            HessianKind::Lm2 => "lm2",
            HessianKind::Lm3 => "lm3",
        }
    }
}

impl fmt::Display for HessianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HessianKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" => Ok(HessianKind::D),
            "lm1" => Ok(HessianKind::Lm1),
            "lm2" => Ok(HessianKind::Lm2),
            "lm3" => Ok(HessianKind::Lm3),
            other => Err(format!("unknown hessian kind `{other}` (expected d, lm1, lm2 or lm3)")),
        }
    }
}

/// Bounded FIFO of `(s, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMemory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>)>,
    capacity: usize,
    varrho: f64,
}

impl CurvatureMemory {
    pub fn new(capacity: usize, varrho: f64) -> Self {
        Self {
            pairs: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            varrho,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.pairs.iter().map(|(s, y)| (s.as_slice(), y.as_slice()))
    }

    /// Appends `(x_new - x_old, g_new - g_old)`. Returns false when the step
    /// is too short to carry curvature information and was discarded.
    pub fn update(&mut self, x_new: &[f64], x_old: &[f64], g_new: &[f64], g_old: &[f64]) -> bool {
        let s: Vec<f64> = x_new.iter().zip(x_old).map(|(a, b)| a - b).collect();
        if s.iter().map(|v| v * v).sum::<f64>().sqrt() <= self.varrho {
            return false;
        }
        let y: Vec<f64> = g_new.iter().zip(g_old).map(|(a, b)| a - b).collect();
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y));
        true
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }
}

/// Computes the next diagonal. With an empty memory `d_prev` is returned as is.
pub fn diag_update(
    kind: HessianKind,
    mem: &CurvatureMemory,
    d_prev: &[f64],
    lambda_min: f64,
    lambda_max: f64,
) -> Vec<f64> {
    if mem.is_empty() {
        return d_prev.to_vec();
    }
    let clip = |v: f64| {
        if v.is_finite() {
            v.clamp(lambda_min, lambda_max)
        } else {
            lambda_max
        }
    };
    let d = match kind {
        HessianKind::Lm1 => lm1_raw(mem, d_prev.len()),
        HessianKind::Lm2 => vec![spectral(mem); d_prev.len()],
        HessianKind::Lm3 => {
            let lm1: Vec<f64> = lm1_raw(mem, d_prev.len()).into_iter().map(clip).collect();
            d_prev.iter().zip(lm1).map(|(a, b)| 0.5 * (a + b)).collect()
        }
        HessianKind::D => {
            let lm1: Vec<f64> = lm1_raw(mem, d_prev.len()).into_iter().map(clip).collect();
            let sigma = clip(spectral(mem));
            let log_mean = lm1.iter().map(|v| v.ln()).sum::<f64>() / lm1.len().max(1) as f64;
            let scale = sigma / log_mean.exp();
            lm1.into_iter().map(|v| v * scale).collect()
        }
    };
    d.into_iter().map(clip).collect()
}

fn lm1_raw(mem: &CurvatureMemory, n: usize) -> Vec<f64> {
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for (s, y) in mem.pairs() {
        for i in 0..n {
            num[i] += y[i] * y[i];
            den[i] += s[i] * y[i];
        }
    }
    num.iter().zip(&den).map(|(a, b)| a / b.max(mem.varrho)).collect()
}

fn spectral(mem: &CurvatureMemory) -> f64 {
    let (mut sy, mut ss) = (0.0, 0.0);
    for (s, y) in mem.pairs() {
        sy += s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        ss += s.iter().map(|a| a * a).sum::<f64>();
    }
    sy / ss.max(mem.varrho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const LO: f64 = 1e-3;
    const HI: f64 = 1e3;

    #[test]
    fn memory_ring_and_degenerate_steps() {
        let mut mem = CurvatureMemory::new(2, 1e-10);
        assert!(mem.update(&[1.0], &[0.0], &[1.0], &[0.0]));
        assert_eq!(mem.len(), 1);
        mem.update(&[2.0], &[0.0], &[2.0], &[0.0]);
        mem.update(&[3.0], &[0.0], &[3.0], &[0.0]);
        assert_eq!(mem.len(), 2);
        assert_eq!(mem.pairs().next().unwrap().0, &[2.0]);
        assert!(!mem.update(&[1.0], &[1.0], &[5.0], &[0.0]));
        assert_eq!(mem.len(), 2);
    }

    #[test]
    fn lm1_single_pair() {
        let mut mem = CurvatureMemory::new(10, 1e-10);
        mem.update(&[1.0, 0.0, 0.0], &[0.0; 3], &[2.0, 0.0, 0.0], &[0.0; 3]);
        let d = diag_update(HessianKind::Lm1, &mem, &[1.0; 3], LO, HI);
        assert_abs_diff_eq!(d[0], 2.0, epsilon = 1e-15);
        assert_eq!(&d[1..], &[LO, LO]);
    }

    #[test]
    fn lm2_perfect_scaling() {
        let mut mem = CurvatureMemory::new(10, 1e-10);
        mem.update(&[0.3, -1.0], &[0.0; 2], &[0.3, -1.0], &[0.0; 2]);
        let d = diag_update(HessianKind::Lm2, &mem, &[5.0; 2], LO, HI);
        for v in d {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn negative_curvature_is_clipped_for_every_kind() {
        let mut mem = CurvatureMemory::new(10, 1e-10);
        mem.update(&[1.0, 1.0], &[0.0; 2], &[-3.0, 1e9], &[0.0; 2]);
        for kind in HessianKind::ALL {
            let d = diag_update(kind, &mem, &[1.0; 2], LO, HI);
            assert!(d.iter().all(|&v| (LO..=HI).contains(&v)), "{kind}: {d:?}");
        }
    }

    #[test]
    fn empty_memory_keeps_previous() {
        let mem = CurvatureMemory::new(3, 1e-10);
        for kind in HessianKind::ALL {
            assert_eq!(diag_update(kind, &mem, &[0.5, 2.0], LO, HI), vec![0.5, 2.0]);
        }
    }

    #[test]
    fn lm1_recovers_diagonal_quadratic() {
        let a = [0.5, 3.0, 40.0, 7.0];
        let grad = |x: &[f64]| -> Vec<f64> { x.iter().zip(&a).map(|(v, ai)| v * ai).collect() };
        let mut mem = CurvatureMemory::new(10, 1e-10);
        let xs = [[1.0, 2.0, 0.0, -1.0], [0.5, -1.0, 0.3, 2.0], [0.1, 0.2, 0.3, 0.4]];
        for w in xs.windows(2) {
            mem.update(&w[1], &w[0], &grad(&w[1]), &grad(&w[0]));
        }
        let d = diag_update(HessianKind::Lm1, &mem, &[1.0; 4], LO, HI);
        for (di, ai) in d.iter().zip(a) {
            assert_abs_diff_eq!(*di, ai, epsilon = 1e-10 * ai);
        }
    }

    #[test]
    fn lm3_blends_and_d_matches_spectral_mean() {
        let mut mem = CurvatureMemory::new(10, 1e-10);
        mem.update(&[1.0, 1.0], &[0.0; 2], &[2.0, 8.0], &[0.0; 2]);
        let lm3 = diag_update(HessianKind::Lm3, &mem, &[1.0, 1.0], LO, HI);
        assert_abs_diff_eq!(lm3[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(lm3[1], 4.5, epsilon = 1e-14);
        let d = diag_update(HessianKind::D, &mem, &[1.0, 1.0], LO, HI);
        // LM1 = (2, 8), sigma = 10/2 = 5; geometric mean of result is 5.
        assert_abs_diff_eq!((d[0] * d[1]).sqrt(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1] / d[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("LM1".parse::<HessianKind>().unwrap(), HessianKind::Lm1);
        assert_eq!("d".parse::<HessianKind>().unwrap(), HessianKind::D);
        assert!("lm4".parse::<HessianKind>().is_err());
        assert_eq!(serde_json::to_string(&HessianKind::Lm3).unwrap(), "\"lm3\"");
    }
}
