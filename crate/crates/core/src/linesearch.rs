//! Step control for the x-update, evaluated on the penalty model only.
//!
//! Trials never touch the true objective. The caller is charged one
//! objective evaluation at the accepted point.

use crate::penalty::PenaltyModel;

pub const MAX_ALPHA: f64 = 64.0;
pub const MIN_ALPHA: f64 = 1.0 / 1_048_576.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub x: Vec<f64>,
    pub alpha: f64,
    /// Objective evaluations the caller must charge (1 on acceptance).
    pub f_evals_used: u32,
    pub stagnated: bool,
}

/// Searches along `x_star - x_cur` for a strict model decrease of at least
/// `varrho·(1 + |Φ(x_cur, y)|)`.
pub fn search(m: &PenaltyModel, x_cur: &[f64], y: &[f64], x_star: &[f64], varrho: f64) -> SearchOutcome {
    let dir: Vec<f64> = x_star.iter().zip(x_cur).map(|(a, b)| a - b).collect();
    let stagnant = || SearchOutcome {
        x: x_cur.to_vec(),
        alpha: 0.0,
        f_evals_used: 0,
        stagnated: true,
    };
    if dir.iter().all(|&d| d == 0.0) {
        return stagnant();
    }
    let trial = |alpha: f64| -> Vec<f64> { x_cur.iter().zip(&dir).map(|(x, d)| x + alpha * d).collect() };
    let m0 = m.value(x_cur, y);
    let need = varrho * (1.0 + m0.abs());

    let mut alpha = 1.0;
    let mut x = trial(alpha);
    let mut val = m.value(&x, y);
    if m0 - val > need {
        while alpha < MAX_ALPHA {
            let xn = trial(2.0 * alpha);
            let vn = m.value(&xn, y);
            if vn < val {
                alpha *= 2.0;
                x = xn;
                val = vn;
            } else {
                break;
            }
        }
    } else {
        loop {
            alpha *= 0.5;
            if alpha < MIN_ALPHA {
                return stagnant();
            }
            x = trial(alpha);
            val = m.value(&x, y);
            if m0 - val > need {
                break;
            }
        }
    }
    SearchOutcome {
        x,
        alpha,
        f_evals_used: 1,
        stagnated: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PenaltyModel {
        PenaltyModel::new(vec![0.0, 0.0], vec![1.0, -2.0], vec![2.0, 0.5], 1.0)
    }

    #[test]
    fn zero_direction_stagnates() {
        let m = model();
        let y = [0.3, 0.1];
        let x = m.solve_x(&y);
        let out = search(&m, &x, &y, &x, 1e-10);
        assert!(out.stagnated);
        assert_eq!((out.alpha, out.f_evals_used), (0.0, 0));
        assert_eq!(out.x, x);
    }

    #[test]
    fn unit_step_at_exact_minimiser() {
        let m = model();
        let y = [0.3, 0.1];
        let star = m.solve_x(&y);
        let out = search(&m, &[4.0, -4.0], &y, &star, 1e-10);
        assert_eq!(out.alpha, 1.0);
        for (a, b) in out.x.iter().zip(&star) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert_eq!(out.f_evals_used, 1);
    }

    #[test]
    fn extrapolates_when_target_is_short() {
        let m = model();
        let y = [0.3, 0.1];
        let star = m.solve_x(&y);
        let x_cur = [10.0, 10.0];
        // A target a quarter of the way to the minimiser.
        let short: Vec<f64> = x_cur.iter().zip(&star).map(|(a, b)| a + 0.25 * (b - a)).collect();
        let out = search(&m, &x_cur, &y, &short, 1e-10);
        // Scan of the quadratic in alpha: the model keeps dropping up to alpha = 4.
        let vals: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&a| m.value(&[x_cur[0] + a * (short[0] - x_cur[0]), x_cur[1] + a * (short[1] - x_cur[1])], &y))
            .collect();
        assert!(vals[1] < vals[0] && vals[2] < vals[1] && vals[3] >= vals[2]);
        assert_eq!(out.alpha, 4.0);
        assert!(m.value(&out.x, &y) <= m.value(&x_cur, &y));
    }

    #[test]
    fn backtracks_on_overshoot() {
        let m = model();
        let y = [0.3, 0.1];
        let star = m.solve_x(&y);
        let x_cur = [1.0, 1.0];
        let over: Vec<f64> = x_cur.iter().zip(&star).map(|(a, b)| a + 3.0 * (b - a)).collect();
        let out = search(&m, &x_cur, &y, &over, 1e-10);
        assert_eq!(out.alpha, 0.5);
        assert!(m.value(&out.x, &y) < m.value(&x_cur, &y));
    }
}
