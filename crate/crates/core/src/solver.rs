//! Configuration, stop rules and run status shared by the Eulerian and
//! Lagrangian integrators, plus the classical RK4 stage driver.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::SymbolSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
}

/// Finite proxies for the blow-up limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRules {
    /// Wave breaking is declared once `min u_x` falls below this value.
    pub min_slope_floor: f64,
    /// Ceiling on `‖u‖_{H^q}` at the working regularity.
    pub norm_ceiling: f64,
    /// Degeneration is declared once `min φ_x` falls below this value.
    pub jacobian_floor: f64,
}

impl Default for StopRules {
    fn default() -> Self {
        Self {
            min_slope_floor: -50.0,
            norm_ceiling: 1e6,
            jacobian_floor: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub symbol: SymbolSpec,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dealias: Dealias,
    pub record_every: usize,
    pub stop_rules: StopRules,
    /// Working Sobolev exponent for the `h_q_norm` monitor and `d_q`.
    pub q_work: f64,
}

impl SolverConfig {
    pub fn new(symbol: SymbolSpec, dt: f64, t_end: f64) -> Self {
        let q_work = symbol.default_q_work();
        Self {
            symbol,
            dt,
            t_end,
            scheme: Scheme::Rk4,
            dealias: Dealias::TwoThirds,
            record_every: 1,
            stop_rules: StopRules::default(),
            q_work,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_stop_rules(mut self, rules: StopRules) -> Self {
        self.stop_rules = rules;
        self
    }

    /// Validates the configuration and returns the number of steps.
    pub fn validate(&self) -> Result<usize> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be non-negative");
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return bad("t_end must be an integer multiple of dt");
        }
        if self.record_every == 0 {
            return bad("record_every must be positive");
        }
        if !self.symbol.is_symmetric() {
            return bad("inertia symbol must be symmetric");
        }
        let r = &self.stop_rules;
        if !(r.norm_ceiling > 0.0) {
            return bad("norm_ceiling must be positive");
        }
        if !(r.jacobian_floor > 0.0) || r.jacobian_floor >= 1.0 {
            return bad("jacobian_floor must lie in (0, 1)");
        }
        if r.min_slope_floor.is_nan() {
            return bad("min_slope_floor must be a number");
        }
        if !(self.q_work >= 0.0) {
            return bad("q_work must be non-negative");
        }
        Ok(steps as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Completed,
    StoppedMinSlope,
    StoppedNormCeiling,
    StoppedJacobianFloor,
    StoppedOverflow,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::StoppedMinSlope => "stopped:min_slope",
            RunStatus::StoppedNormCeiling => "stopped:norm_ceiling",
            RunStatus::StoppedJacobianFloor => "stopped:jacobian_floor",
            RunStatus::StoppedOverflow => "stopped:overflow",
        }
    }

    pub fn is_completed(self) -> bool {
        self == RunStatus::Completed
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One classical RK4 step for `y' = rhs(y)`.
pub(crate) fn rk4<F>(y: &[f64], dt: f64, rhs: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let stage = |k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = rhs(y)?;
    let k2 = rhs(&stage(&k1, 0.5 * dt))?;
    let k3 = rhs(&stage(&k2, 0.5 * dt))?;
    let k4 = rhs(&stage(&k3, dt))?;
    let out: Vec<f64> = (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NumericalOverflow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order_on_exponential() {
        let exact = 1f64.exp();
        let run = |n: usize| {
            let mut y = vec![1.0];
            for _ in 0..n {
                y = rk4(&y, 1.0 / n as f64, |y| Ok(vec![y[0]])).unwrap();
            }
            (y[0] - exact).abs()
        };
        let ratio = run(10) / run(20);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn rk4_reports_overflow() {
        let r = rk4(&[1e300], 1.0, |y| Ok(vec![y[0] * 1e10]));
        assert_eq!(r, Err(Error::NumericalOverflow));
    }

    #[test]
    fn validation() {
        let a = SymbolSpec::bessel(1.0).unwrap();
        assert_eq!(SolverConfig::new(a.clone(), 1e-3, 1.0).validate().unwrap(), 1000);
        assert!(SolverConfig::new(a.clone(), 0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(a.clone(), 0.3, 1.0).validate().is_err());
        assert!(SolverConfig::new(a.clone(), 1e-3, 1.0)
            .with_record_every(0)
            .validate()
            .is_err());
        assert!(SolverConfig::new(SymbolSpec::derivative(), 1e-3, 1.0)
            .validate()
            .is_err());
        let cfg = SolverConfig::new(a, 1e-3, 1.0);
        assert_eq!(cfg.q_work, 3.0);
    }

    #[test]
    fn status_strings() {
        assert_eq!(RunStatus::StoppedMinSlope.to_string(), "stopped:min_slope");
        assert_eq!(RunStatus::Completed.as_str(), "completed");
    }
}
