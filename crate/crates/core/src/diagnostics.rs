//! Monitored scalars and property probes: blow-up indicators, the a-priori
//! momentum inequality, the Kato–Ponce commutator probe and the chain-rule
//! identity linking the two frames.

use crate::error::{Error, Result};
use crate::euler::EulerState;
use crate::lagrangian::{compose, DiffeoMap};
use crate::spectral::{apply_symbol, bessel_potential, l2_norm, PeriodicField};
use crate::symbol::SymbolSpec;

/// One time-stamped record of the monitored scalars. Lagrangian-only columns
/// are `None` for Eulerian runs; `apriori_residual` is `None` on the last row.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagRow {
    pub t: f64,
    /// `‖u‖_A`.
    pub energy_a: f64,
    /// `‖u‖_{H^q}` at the working regularity.
    pub h_q_norm: f64,
    pub min_ux: f64,
    pub min_phix: Option<f64>,
    /// `‖Au‖_{L²}`.
    pub m_l2: f64,
    pub dq_from_start: Option<f64>,
    pub apriori_residual: Option<f64>,
    pub chain_rule_residual: Option<f64>,
}

impl DiagRow {
    pub fn is_finite(&self) -> bool {
        [self.t, self.energy_a, self.h_q_norm, self.min_ux, self.m_l2]
            .iter()
            .chain(self.min_phix.iter())
            .chain(self.dq_from_start.iter())
            .chain(self.apriori_residual.iter())
            .chain(self.chain_rule_residual.iter())
            .all(|v| v.is_finite())
    }
}

/// Grid minimum of the spectral derivative.
pub fn min_slope(u: &PeriodicField) -> f64 {
    u.derivative().min()
}

/// Grid minimum of `φ_x = 1 + f_x`.
pub fn min_jacobian(phi: &DiffeoMap) -> f64 {
    phi.jacobian().min()
}

/// `Δ(‖m‖²)/Δt + 3 min(u_x) ‖m‖²` with the last two factors taken at the left
/// row. Rows further apart than `max_spacing` are not adjacent.
pub fn apriori_residual(left: &DiagRow, right: &DiagRow, max_spacing: f64) -> Result<f64> {
    let dt = right.t - left.t;
    if !(dt > 0.0) || dt > max_spacing * (1.0 + 1e-9) {
        return Err(Error::NonAdjacentRows(format!(
            "t = {} and t = {} with spacing limit {}",
            left.t, right.t, max_spacing
        )));
    }
    let m0 = left.m_l2 * left.m_l2;
    let m1 = right.m_l2 * right.m_l2;
    Ok((m1 - m0) / dt + 3.0 * left.min_ux * m0)
}

/// Instantaneous `d/dt ‖m‖²_{L²} = -3 ∫ m² u_x` along the Euler–Poincaré
/// flow, by grid quadrature.
pub fn momentum_rate(u: &PeriodicField, a: &SymbolSpec) -> Result<f64> {
    let m = apply_symbol(a, u)?;
    let ux = u.derivative();
    let h = u.grid().spacing();
    let sum: f64 = m
        .values()
        .iter()
        .zip(ux.values())
        .map(|(m, d)| m * m * d)
        .sum();
    Ok(-3.0 * h * sum)
}

pub(crate) fn fill_apriori_residuals(rows: &mut [DiagRow], max_spacing: f64) {
    for i in 0..rows.len().saturating_sub(1) {
        rows[i].apriori_residual = apriori_residual(&rows[i], &rows[i + 1], max_spacing).ok();
    }
}

/// `‖Λ^s(uv) - uΛ^s v‖_{L²} / (‖u_x‖_∞ ‖Λ^{s-1}v‖_{L²} + ‖Λ^s u‖_{L²} ‖v‖_∞)`.
pub fn kato_ponce_ratio(u: &PeriodicField, v: &PeriodicField, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidExponent(s));
    }
    u.grid().check_same(v.grid())?;
    let shift = u.values()[0];
    let tilde = u.map(|x| x - shift);
    let lhs_field = bessel_potential(&tilde.mul(v)?, s).sub(&tilde.mul(&bessel_potential(v, s))?)?;
    let lhs = l2_norm(&lhs_field);
    let rhs = u.derivative().max_abs() * l2_norm(&bessel_potential(v, s - 1.0))
        + l2_norm(&bessel_potential(u, s)) * v.max_abs();
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// `max_x |u_x∘φ - v_x/φ_x|`.
pub fn chain_rule_residual(u: &PeriodicField, v: &PeriodicField, phi: &DiffeoMap) -> Result<f64> {
    let ux_on_phi = compose(&u.derivative(), phi)?;
    let vx = v.derivative();
    let jac = phi.jacobian();
    u.grid().check_same(v.grid())?;
    Ok((0..u.grid().len())
        .map(|j| (ux_on_phi.values()[j] - vx.values()[j] / jac.values()[j]).abs())
        .fold(0.0, f64::max))
}

/// Flow-map growth relative to its Gronwall envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowBoundSample {
    pub t: f64,
    /// `max φ_x(t) / (max φ_x(0) e^{Kt})`.
    pub stretch_ratio: f64,
    /// `max 1/φ_x(t) / (max 1/φ_x(0) e^{Kt})`.
    pub compression_ratio: f64,
}

/// Compares `‖φ_x‖_∞` and `‖1/φ_x‖_∞` with `e^{Kt}` growth, where `K` is the
/// running maximum of `‖u_x‖_∞`. Both ratios stay at or below one for exact
/// flows.
pub fn flow_bound_ratios(maps: &[DiffeoMap], u_traj: &[EulerState]) -> Vec<FlowBoundSample> {
    let Some(first) = maps.first() else {
        return Vec::new();
    };
    let alpha0 = first.jacobian().max();
    let beta0 = 1.0 / first.jacobian().min();
    let mut k_running: f64 = 0.0;
    maps.iter()
        .zip(u_traj)
        .map(|(phi, state)| {
            k_running = k_running.max(state.u.derivative().max_abs());
            let envelope = (k_running * state.t).exp();
            FlowBoundSample {
                t: state.t,
                stretch_ratio: phi.jacobian().max() / (alpha0 * envelope),
                compression_ratio: (1.0 / phi.jacobian().min()) / (beta0 * envelope),
            }
        })
        .collect()
}
