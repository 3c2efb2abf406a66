//! Eulerian-frame integration of `u_t = -A^{-1}[u (Au)_x + 2 (Au) u_x]` and of
//! its momentum form `m_t = -m_x u - 2 m u_x`.

use rustfft::num_complex::Complex64;

use crate::diagnostics::{fill_apriori_residuals, min_slope, DiagRow};
use crate::error::{Error, Result};
use crate::solver::{rk4, Dealias, RunStatus, SolverConfig};
use crate::spectral::{
    analyze, apply_symbol, energy_norm, l2_norm, multiply_spectrum, solve_symbol,
    solve_symbol_spectrum, sobolev_norm, synthesize_unchecked, Grid, PeriodicField, Spectrum,
    MEAN_ZERO_TOL,
};
use crate::symbol::{InvertibleOn, SymbolSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct EulerState {
    pub t: f64,
    pub u: PeriodicField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub t: f64,
    pub m: PeriodicField,
}

#[derive(Clone, Debug)]
pub struct EulerTrajectory {
    /// Snapshots at every recorded time, aligned with `rows`.
    pub states: Vec<EulerState>,
    pub rows: Vec<DiagRow>,
    pub status: RunStatus,
}

impl EulerTrajectory {
    pub fn final_state(&self) -> &EulerState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Time of the last accepted state for runs that stopped early.
    pub fn stop_time(&self) -> Option<f64> {
        (!self.status.is_completed()).then(|| self.final_state().t)
    }
}

pub(crate) fn dealias_spectrum(spec: &mut Spectrum, mode: Dealias) {
    if mode == Dealias::None {
        return;
    }
    let cutoff = spec.grid().dealias_cutoff();
    let grid = spec.grid().clone();
    for (idx, c) in spec.coeffs_mut().iter_mut().enumerate() {
        if grid.wavenumber(idx).abs() > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Two-thirds rule: zero every mode with `|n| > floor(N/3)`.
pub fn dealias(w: &PeriodicField) -> PeriodicField {
    let mut spec = analyze(w);
    dealias_spectrum(&mut spec, Dealias::TwoThirds);
    synthesize_unchecked(&spec)
}

fn derivative_spectrum(spec: &Spectrum) -> Spectrum {
    multiply_spectrum(spec, |k| Ok(Complex64::new(0.0, k as f64))).expect("derivative is total")
}

fn check_mean_zero(a: &SymbolSpec, spec: &Spectrum) -> Result<()> {
    if a.invertible_on() == InvertibleOn::MeanZeroOnly {
        let l2: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mean = spec.coeff(0).norm();
        if mean > MEAN_ZERO_TOL * l2 {
            return Err(Error::ZeroModeNotInvertible(mean));
        }
    }
    Ok(())
}

pub fn euler_rhs(u: &PeriodicField, a: &SymbolSpec) -> Result<PeriodicField> {
    euler_rhs_with(u, a, Dealias::TwoThirds)
}

/// `-A^{-1} P[u (Au)_x + 2 (Au) u_x]` where `P` is the dealiasing projection.
pub fn euler_rhs_with(u: &PeriodicField, a: &SymbolSpec, mode: Dealias) -> Result<PeriodicField> {
    let spec = analyze(u);
    check_mean_zero(a, &spec)?;
    let au_spec = multiply_spectrum(&spec, |k| a.value(k))?;
    let au = synthesize_unchecked(&au_spec);
    let au_x = synthesize_unchecked(&derivative_spectrum(&au_spec));
    let u_x = synthesize_unchecked(&derivative_spectrum(&spec));
    let values: Vec<f64> = (0..u.grid().len())
        .map(|j| u.values()[j] * au_x.values()[j] + 2.0 * au.values()[j] * u_x.values()[j])
        .collect();
    let mut flux = analyze(&PeriodicField::from_raw(u.grid(), values));
    dealias_spectrum(&mut flux, mode);
    let mut out = solve_symbol_spectrum(a, &flux)?;
    for c in out.coeffs_mut() {
        *c = -*c;
    }
    Ok(synthesize_unchecked(&out))
}

pub fn ep_rhs(m: &PeriodicField, u: &PeriodicField) -> Result<PeriodicField> {
    ep_rhs_with(m, u, Dealias::TwoThirds)
}

/// `-P[m_x u + 2 m u_x]`.
pub fn ep_rhs_with(m: &PeriodicField, u: &PeriodicField, mode: Dealias) -> Result<PeriodicField> {
    m.grid().check_same(u.grid())?;
    let m_x = m.derivative();
    let u_x = u.derivative();
    let values: Vec<f64> = (0..m.grid().len())
        .map(|j| -(m_x.values()[j] * u.values()[j] + 2.0 * m.values()[j] * u_x.values()[j]))
        .collect();
    let mut spec = analyze(&PeriodicField::from_raw(m.grid(), values));
    dealias_spectrum(&mut spec, mode);
    Ok(synthesize_unchecked(&spec))
}

pub fn rk4_step(state: &EulerState, dt: f64, a: &SymbolSpec) -> Result<EulerState> {
    rk4_step_with(state, dt, a, Dealias::TwoThirds)
}

pub fn rk4_step_with(
    state: &EulerState,
    dt: f64,
    a: &SymbolSpec,
    mode: Dealias,
) -> Result<EulerState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    let grid = state.u.grid().clone();
    let next = rk4(state.u.values(), dt, |y| {
        let u = PeriodicField::from_raw(&grid, y.to_vec());
        Ok(euler_rhs_with(&u, a, mode)?.into_values())
    })?;
    Ok(EulerState {
        t: state.t + dt,
        u: PeriodicField::from_raw(&grid, next),
    })
}

/// Checks that `u0` lives on `|n| <= N/3`.
pub fn check_band_limited(u: &PeriodicField) -> Result<()> {
    let spec = analyze(u);
    let scale = spec.max_abs();
    let cutoff = u.grid().dealias_cutoff();
    for (k, c) in spec.modes() {
        if k.abs() > cutoff && c.norm() > 1e-12 * scale {
            return Err(Error::NotBandLimited(k.abs()));
        }
    }
    Ok(())
}

pub(crate) fn eulerian_row(t: f64, u: &PeriodicField, cfg: &SolverConfig) -> Result<DiagRow> {
    let m = apply_symbol(&cfg.symbol, u)?;
    Ok(DiagRow {
        t,
        energy_a: energy_norm(u, &cfg.symbol)?,
        h_q_norm: sobolev_norm(u, cfg.q_work)?,
        min_ux: min_slope(u),
        min_phix: None,
        m_l2: l2_norm(&m),
        dq_from_start: None,
        apriori_residual: None,
        chain_rule_residual: None,
    })
}

pub(crate) fn validate_initial(u0: &PeriodicField, cfg: &SolverConfig) -> Result<usize> {
    let steps = cfg.validate()?;
    if cfg.dealias == Dealias::TwoThirds {
        check_band_limited(u0)?;
    }
    check_mean_zero(&cfg.symbol, &analyze(u0))?;
    Ok(steps)
}

pub fn integrate_euler(u0: &PeriodicField, cfg: &SolverConfig) -> Result<EulerTrajectory> {
    let steps = validate_initial(u0, cfg)?;
    let rules = cfg.stop_rules;
    let mut state = EulerState {
        t: 0.0,
        u: u0.clone(),
    };
    let mut rows = vec![eulerian_row(0.0, u0, cfg)?];
    let mut states = vec![state.clone()];
    let mut status = RunStatus::Completed;

    for step in 1..=steps {
        let next = match rk4_step_with(&state, cfg.dt, &cfg.symbol, cfg.dealias) {
            Ok(s) => s,
            Err(Error::NumericalOverflow) => {
                status = RunStatus::StoppedOverflow;
                break;
            }
            Err(e) => return Err(e),
        };
        state = EulerState {
            t: step as f64 * cfg.dt,
            u: next.u,
        };
        let stop = if min_slope(&state.u) < rules.min_slope_floor {
            Some(RunStatus::StoppedMinSlope)
        } else if sobolev_norm(&state.u, cfg.q_work)? > rules.norm_ceiling {
            Some(RunStatus::StoppedNormCeiling)
        } else {
            None
        };
        if stop.is_some() || step % cfg.record_every == 0 || step == steps {
            rows.push(eulerian_row(state.t, &state.u, cfg)?);
            states.push(state.clone());
        }
        if let Some(s) = stop {
            status = s;
            break;
        }
    }
    fill_apriori_residuals(&mut rows, cfg.record_every as f64 * cfg.dt);
    Ok(EulerTrajectory {
        states,
        rows,
        status,
    })
}

/// Integrates the momentum form from `m0` with the same scheme, recording at
/// the same cadence as [`integrate_euler`]. Stop rules are not applied.
pub fn integrate_momentum(m0: &PeriodicField, cfg: &SolverConfig) -> Result<Vec<MomentumState>> {
    let steps = cfg.validate()?;
    let grid: Grid = m0.grid().clone();
    let a = &cfg.symbol;
    let mut m = m0.clone();
    let mut out = vec![MomentumState {
        t: 0.0,
        m: m.clone(),
    }];
    for step in 1..=steps {
        let next = rk4(m.values(), cfg.dt, |y| {
            let m = PeriodicField::from_raw(&grid, y.to_vec());
            let u = solve_symbol(a, &m)?;
            Ok(ep_rhs_with(&m, &u, cfg.dealias)?.into_values())
        })?;
        m = PeriodicField::from_raw(&grid, next);
        if step % cfg.record_every == 0 || step == steps {
            out.push(MomentumState {
                t: step as f64 * cfg.dt,
                m: m.clone(),
            });
        }
    }
    Ok(out)
}
