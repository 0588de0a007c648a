//! Solver configuration, tolerance schedule and the penalty-parameter
//! assumption validator.
//!
//! Every tunable constant lives in [`SolverConfig`]. The defaults are the
//! values used for the benchmark runs; a config file only needs to list the
//! keys it overrides:
//!
//! ```text
//! # pdqn.conf
//! rho_max = 50
//! hessian = lm2
//! nf2g_max = 5000
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::hessian::HessianKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Penalty growth factor.
    pub r: f64,
    pub rho0: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Primal-dual agreement contraction factor.
    pub tau: f64,
    pub eps0: f64,
    pub eps_min: f64,
    /// Curvature memory length.
    pub memory: usize,
    /// Lower bound used when initialising the descent bound.
    pub c_hat: f64,
    pub c_small: f64,
    /// Curvature floor guarding secant divisions and degenerate steps.
    pub varrho: f64,
    /// Initial diagonal scale.
    pub mu: f64,
    pub nf2g_max: u64,
    pub sec_max: f64,
    /// Target accuracy for the stopping test.
    pub eps: f64,
    pub bfs_max_iter: usize,
    pub pss_max_iter: usize,
    pub pss_tol: f64,
    pub bfs_tol: f64,
    pub fista_max_iter: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub inner_max_iter: usize,
    pub hessian: HessianKind,
    pub linesearch: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            r: 1.15,
            rho0: 1e-2,
            rho_min: 1e-2,
            rho_max: 1e2,
            tau: 0.999,
            eps0: 0.1,
            eps_min: f64::EPSILON,
            memory: 10,
            c_hat: 100.0,
            c_small: 1e-8,
            varrho: 1e-10,
            mu: 1.0,
            nf2g_max: 20_000,
            sec_max: f64::INFINITY,
            eps: 1e-6,
            bfs_max_iter: 15,
            pss_max_iter: 5,
            pss_tol: 1e-3,
            bfs_tol: 1e-20,
            fista_max_iter: 100,
            lambda_min: 1e-3,
            lambda_max: 1e3,
            inner_max_iter: 10_000,
            hessian: HessianKind::Lm1,
            linesearch: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if !(self.r > 1.0) {
            return fail("r must exceed 1");
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho0 && self.rho0 <= self.rho_max) {
            return fail("need 0 < rho_min <= rho0 <= rho_max");
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return fail("tau must lie in (0, 1)");
        }
        if !(self.eps0 > 0.0 && self.eps_min > 0.0 && self.eps > 0.0) {
            return fail("tolerances must be positive");
        }
        if self.memory == 0 {
            return fail("memory must be positive");
        }
        if !(self.c_hat > 0.0 && self.c_small > 0.0 && self.varrho > 0.0 && self.mu > 0.0) {
            return fail("c_hat, c_small, varrho and mu must be positive");
        }
        if self.nf2g_max == 0 {
            return fail("nf2g_max must be positive");
        }
        if !(self.sec_max > 0.0) {
            return fail("sec_max must be positive (or inf)");
        }
        if self.bfs_max_iter == 0 || self.pss_max_iter == 0 || self.fista_max_iter == 0 {
            return fail("iteration caps must be positive");
        }
        if self.inner_max_iter == 0 {
            return fail("inner_max_iter must be positive");
        }
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max) {
            return fail("need 0 < lambda_min <= lambda_max");
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; absent keys keep their default.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: line_no })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| match e {
                    ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: line_no, key },
                    ConfigError::Value { key, value, .. } => ConfigError::Value { line: line_no, key, value },
                    other => other,
                })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_kv_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv_str(&text)
    }

    /// Sets one field by name. Does not re-validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse::<T>().map_err(|_| ConfigError::Value {
                line: 0,
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "r" => self.r = parse(key, value)?,
            "rho0" => self.rho0 = parse(key, value)?,
            "rho_min" => self.rho_min = parse(key, value)?,
            "rho_max" => self.rho_max = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "eps0" => self.eps0 = parse(key, value)?,
            "eps_min" => self.eps_min = parse(key, value)?,
            "memory" | "m" => self.memory = parse(key, value)?,
            "c_hat" => self.c_hat = parse(key, value)?,
            "c_small" => self.c_small = parse(key, value)?,
            "varrho" => self.varrho = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "nf2g_max" => self.nf2g_max = parse(key, value)?,
            "sec_max" => self.sec_max = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "bfs_max_iter" => self.bfs_max_iter = parse(key, value)?,
            "pss_max_iter" => self.pss_max_iter = parse(key, value)?,
            "pss_tol" => self.pss_tol = parse(key, value)?,
            "bfs_tol" => self.bfs_tol = parse(key, value)?,
            "fista_max_iter" => self.fista_max_iter = parse(key, value)?,
            "lambda_min" => self.lambda_min = parse(key, value)?,
            "lambda_max" => self.lambda_max = parse(key, value)?,
            "inner_max_iter" => self.inner_max_iter = parse(key, value)?,
            "hessian" => self.hessian = parse(key, value)?,
            "linesearch" => {
                self.linesearch = match value {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => {
                        return Err(ConfigError::Value {
                            line: 0,
                            key: key.to_string(),
                            value: value.to_string(),
                        })
                    }
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Inner and agreement tolerances at outer index `k`.
    pub fn tolerances(&self, k: usize) -> (f64, f64) {
        tolerance_schedule(k, self.eps_min)
    }
}

/// `eps_k = eta_k = max(eps_min, 0.1 * exp(-1e-3 * k))`.
pub fn tolerance_schedule(k: usize, eps_min: f64) -> (f64, f64) {
    let eps = (0.1 * (-1e-3 * k as f64).exp()).max(eps_min);
    (eps, eps)
}

/// Constants derived from the penalty-bound assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub theta_bar: f64,
    pub kappa_bar: f64,
    /// Smallest admissible balance constant; `None` when contraction fails.
    pub c_min: Option<f64>,
    /// Radius of the invariant ball; `None` when contraction fails.
    pub r_inf: Option<f64>,
    pub ok: bool,
}

/// Contraction constants for Hessian bounds `[lambda_min, lambda_max]`,
/// gradient growth `gamma`, penalty floor `rho_min` and set scale `zeta`.
pub fn validate_assumptions(
    lambda_min: f64,
    lambda_max: f64,
    gamma: f64,
    rho_min: f64,
    zeta: f64,
) -> Result<AssumptionReport, ConfigError> {
    if !(lambda_min > 0.0 && lambda_max > 0.0 && gamma > 0.0 && rho_min > 0.0) {
        return Err(ConfigError::Invalid("all inputs must be positive".into()));
    }
    if !(zeta >= 1.0) {
        return Err(ConfigError::Invalid("zeta must be at least 1".into()));
    }
    let denom = lambda_min + rho_min;
    let theta_bar = (lambda_max + gamma) / denom;
    let kappa_bar = 1f64
        .max((rho_min + gamma) / denom)
        .max((rho_min + gamma / zeta) / denom);
    let ok = theta_bar < 1.0;
    let (c_min, r_inf) = if ok {
        let gap = 1.0 - theta_bar;
        (Some(kappa_bar / gap), Some(kappa_bar * zeta / gap))
    } else {
        (None, None)
    };
    Ok(AssumptionReport {
        theta_bar,
        kappa_bar,
        c_min,
        r_inf,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_values() {
        assert_eq!(tolerance_schedule(0, 2.2e-16).0, 0.1);
        assert_eq!(tolerance_schedule(10_000_000, 1e-12).0, 1e-12);
        assert_relative_eq!(tolerance_schedule(1000, 1e-16).0, 0.1 * (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(tolerance_schedule(1000, 1e-16).0, 0.036_787_944_117_144_23, max_relative = 1e-12);
    }

    #[test]
    fn schedule_monotone_and_floored() {
        let floor = 1e-3;
        let mut prev = f64::INFINITY;
        for k in 0..=1_000_000 {
            let (e, eta) = tolerance_schedule(k, floor);
            assert_eq!(e, eta);
            assert!(e <= prev && e >= floor);
            prev = e;
        }
    }

    #[test]
    fn validator_examples() {
        let rep = validate_assumptions(1.0, 1.0, 1.0, 10.0, 1.0).unwrap();
        assert_relative_eq!(rep.theta_bar, 2.0 / 11.0, max_relative = 1e-12);
        assert_eq!(rep.kappa_bar, 1.0);
        assert_relative_eq!(rep.c_min.unwrap(), 11.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(rep.r_inf.unwrap(), 11.0 / 9.0, max_relative = 1e-12);
        assert!(rep.ok);

        let rep = validate_assumptions(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(rep.theta_bar, 1.0);
        assert!(!rep.ok);
        assert!(rep.r_inf.is_none());

        let rep = validate_assumptions(1.0, 2.0, 0.5, 5.0, 2.0).unwrap();
        assert_relative_eq!(rep.theta_bar, 2.5 / 6.0, max_relative = 1e-12);
        assert_eq!(rep.kappa_bar, 1.0);
        assert!(rep.ok);
    }

    #[test]
    fn validator_rejects_bad_input() {
        assert!(validate_assumptions(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(validate_assumptions(1.0, 1.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn larger_rho_min_never_raises_theta() {
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let rho_min = i as f64 * 0.37;
            let t = validate_assumptions(0.3, 2.0, 0.7, rho_min, 1.5).unwrap().theta_bar;
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn defaults_match_tuning_table() {
        let c = SolverConfig::default();
        assert_eq!((c.r, c.c_small, c.c_hat), (1.15, 1e-8, 100.0));
        assert_eq!((c.rho0, c.rho_min, c.rho_max), (1e-2, 1e-2, 1e2));
        assert_eq!((c.tau, c.eps0, c.memory, c.varrho), (0.999, 0.1, 10, 1e-10));
        assert_eq!(c.nf2g_max, 20_000);
        assert!(c.sec_max.is_infinite());
        c.validate().unwrap();
    }

    #[test]
    fn kv_file_overrides_only_listed_keys() {
        let cfg = SolverConfig::from_kv_str("# comment\nrho_max = 50\n\nhessian = lm2 # trailing\nlinesearch=off\n").unwrap();
        assert_eq!(cfg.rho_max, 50.0);
        assert_eq!(cfg.hessian, HessianKind::Lm2);
        assert!(!cfg.linesearch);
        assert_eq!(cfg.r, 1.15);
        assert_eq!(cfg.sec_max, f64::INFINITY);
    }

    #[test]
    fn kv_errors_carry_line_numbers() {
        match SolverConfig::from_kv_str("r = 1.2\nbogus = 3\n") {
            Err(ConfigError::UnknownKey { line, key }) => assert_eq!((line, key.as_str()), (2, "bogus")),
            other => panic!("unexpected {other:?}"),
        }
        match SolverConfig::from_kv_str("tau = abc") {
            Err(ConfigError::Value { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(SolverConfig::from_kv_str("tau 0.5"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(SolverConfig::from_kv_str("tau = 1.5"), Err(ConfigError::Invalid(_))));
    }
}
