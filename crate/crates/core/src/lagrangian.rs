//! Geodesic flow in Lagrangian variables `(φ, v)`: composition and inversion
//! of circle diffeomorphisms, the quadratic operator `S`, the conjugated spray
//! `S_φ = R_φ ∘ S ∘ R_{φ^{-1}}`, flow maps of Eulerian velocities, and the
//! distance `d_q`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::diagnostics::{chain_rule_residual, fill_apriori_residuals, min_slope, DiagRow};
use crate::error::{Error, Result};
use crate::euler::{dealias_spectrum, EulerState};
use crate::solver::{rk4, Dealias, RunStatus, SolverConfig};
use crate::spectral::{
    analyze, apply_symbol, energy_norm, l2_norm, multiply_spectrum, sobolev_norm,
    solve_symbol_spectrum, synthesize_unchecked, Grid, PeriodicField,
};
use crate::symbol::SymbolSpec;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Trigonometric interpolant of a field, evaluable off the grid.
struct FourierSeries {
    mean: f64,
    // û_k for k = 1 ..= N/2 - 1
    positive: Vec<Complex64>,
    nyquist: f64,
    half: f64,
}

impl FourierSeries {
    fn new(w: &PeriodicField) -> Self {
        let spec = analyze(w);
        let n = w.grid().len();
        Self {
            mean: spec.coeffs()[0].re,
            positive: spec.coeffs()[1..n / 2].to_vec(),
            nyquist: spec.coeffs()[n / 2].re,
            half: (n / 2) as f64,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let z = Complex64::new(x.cos(), x.sin());
        let mut p = Complex64::new(0.0, 0.0);
        for c in self.positive.iter().rev() {
            p = p * z + c;
        }
        p *= z;
        self.mean + 2.0 * p.re + self.nyquist * (self.half * x).cos()
    }

    fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let z = Complex64::new(x.cos(), x.sin());
        let mut p = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for (i, c) in self.positive.iter().enumerate().rev() {
            let k = (i + 1) as f64;
            p = p * z + c;
            q = q * z + c * Complex64::new(0.0, k);
        }
        p *= z;
        q *= z;
        let hx = self.half * x;
        (
            self.mean + 2.0 * p.re + self.nyquist * hx.cos(),
            2.0 * q.re - self.nyquist * self.half * hx.sin(),
        )
    }

    /// Upper bound on `sup |w - mean|`.
    fn oscillation_bound(&self) -> f64 {
        2.0 * self.positive.iter().map(|c| c.norm()).sum::<f64>() + self.nyquist.abs()
    }
}

/// Orientation-preserving circle diffeomorphism `φ(x) = x + f(x)` stored via
/// its periodic displacement, with the lift anchored so `f(0) ∈ [0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoMap {
    displacement: PeriodicField,
    jacobian: PeriodicField,
}

impl DiffeoMap {
    pub fn new(displacement: PeriodicField) -> Result<Self> {
        if !displacement.is_finite() {
            return Err(Error::NonFinite);
        }
        let turns = (displacement.values()[0] / (2.0 * PI)).floor();
        let displacement = if turns != 0.0 {
            displacement.map(|f| f - 2.0 * PI * turns)
        } else {
            displacement
        };
        let jacobian = displacement.derivative().map(|d| 1.0 + d);
        let min = jacobian.min();
        if !(min > 0.0) {
            return Err(Error::NotDiffeomorphism(min));
        }
        Ok(Self {
            displacement,
            jacobian,
        })
    }

    pub fn identity(grid: &Grid) -> Self {
        Self {
            displacement: PeriodicField::zeros(grid),
            jacobian: PeriodicField::constant(grid, 1.0),
        }
    }

    /// Rigid rotation `x ↦ x + c`.
    pub fn rotation(grid: &Grid, c: f64) -> Self {
        Self::new(PeriodicField::constant(grid, c)).expect("rotations are diffeomorphisms")
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(PeriodicField::from_fn(grid, f))
    }

    pub fn grid(&self) -> &Grid {
        self.displacement.grid()
    }

    pub fn displacement(&self) -> &PeriodicField {
        &self.displacement
    }

    /// `φ_x` at the nodes.
    pub fn jacobian(&self) -> &PeriodicField {
        &self.jacobian
    }

    pub fn is_identity(&self) -> bool {
        self.displacement.values().iter().all(|&f| f == 0.0)
    }

    /// `φ(x)` for arbitrary `x`, through the interpolant of `f`.
    pub fn apply(&self, x: f64) -> f64 {
        x + FourierSeries::new(&self.displacement).eval(x)
    }

    /// `φ(x_j)` at the nodes.
    pub fn mapped_nodes(&self) -> Vec<f64> {
        let g = self.grid();
        (0..g.len())
            .map(|j| g.node(j) + self.displacement.values()[j])
            .collect()
    }
}

/// `w∘φ` at the nodes, evaluating the trigonometric interpolant of `w` at
/// `φ(x_j)`.
pub fn compose(w: &PeriodicField, phi: &DiffeoMap) -> Result<PeriodicField> {
    w.grid().check_same(phi.grid())?;
    if phi.is_identity() {
        return Ok(w.clone());
    }
    let series = FourierSeries::new(w);
    let values = phi.mapped_nodes().into_iter().map(|y| series.eval(y)).collect();
    Ok(PeriodicField::from_raw(w.grid(), values))
}

/// `φ^{-1}` by safeguarded Newton iteration at every node.
pub fn invert_diffeo(phi: &DiffeoMap) -> Result<DiffeoMap> {
    let grid = phi.grid();
    if phi.is_identity() {
        return Ok(DiffeoMap::identity(grid));
    }
    let series = FourierSeries::new(&phi.displacement);
    let spread = series.oscillation_bound() + 1e-9;
    let values = (0..grid.len())
        .map(|j| {
            let y = grid.node(j);
            solve_monotone(&series, y, spread).map(|x| x - y).ok_or(Error::InversionFailed(j))
        })
        .collect::<Result<Vec<f64>>>()?;
    DiffeoMap::new(PeriodicField::from_raw(grid, values))
}

/// Solves `x + f(x) = y` for strictly increasing `x + f(x)`.
fn solve_monotone(f: &FourierSeries, y: f64, spread: f64) -> Option<f64> {
    let mut lo = y - f.mean - spread;
    let mut hi = y - f.mean + spread;
    let mut x = y - f.eval(y);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..NEWTON_MAX_ITER {
        let (fx, dfx) = f.eval_with_derivative(x);
        let residual = x + fx - y;
        if residual.abs() <= NEWTON_TOL {
            return Some(x);
        }
        if residual > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = 1.0 + dfx;
        let newton = x - residual / slope;
        x = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= NEWTON_TOL {
            return Some(x);
        }
    }
    None
}

pub fn s_operator(u: &PeriodicField, a: &SymbolSpec) -> Result<PeriodicField> {
    s_operator_with(u, a, Dealias::TwoThirds)
}

/// `S(u) = A^{-1} P{[A, u] u_x - 2 (Au) u_x}`.
pub fn s_operator_with(u: &PeriodicField, a: &SymbolSpec, mode: Dealias) -> Result<PeriodicField> {
    let spec = analyze(u);
    let ux_spec = multiply_spectrum(&spec, |k| Ok(Complex64::new(0.0, k as f64)))?;
    let ux = synthesize_unchecked(&ux_spec);
    let au = synthesize_unchecked(&multiply_spectrum(&spec, |k| a.value(k))?);
    let a_ux = synthesize_unchecked(&multiply_spectrum(&ux_spec, |k| a.value(k))?);
    let n = u.grid().len();
    let (uv, ux_v, au_v, a_ux_v) = (u.values(), ux.values(), au.values(), a_ux.values());
    let transport: Vec<f64> = (0..n).map(|j| uv[j] * ux_v[j]).collect();
    let rest: Vec<f64> = (0..n)
        .map(|j| uv[j] * a_ux_v[j] + 2.0 * au_v[j] * ux_v[j])
        .collect();
    let a_transport = multiply_spectrum(
        &analyze(&PeriodicField::from_raw(u.grid(), transport)),
        |k| a.value(k),
    )?;
    let rest = analyze(&PeriodicField::from_raw(u.grid(), rest));
    let mut bracket = a_transport;
    for (c, r) in bracket.coeffs_mut().iter_mut().zip(rest.coeffs()) {
        *c -= *r;
    }
    dealias_spectrum(&mut bracket, mode);
    Ok(synthesize_unchecked(&solve_symbol_spectrum(a, &bracket)?))
}

pub fn spray(phi: &DiffeoMap, v: &PeriodicField, a: &SymbolSpec) -> Result<PeriodicField> {
    spray_with(phi, v, a, Dealias::TwoThirds)
}

/// `S_φ(v) = (S(v∘φ^{-1}))∘φ`.
pub fn spray_with(
    phi: &DiffeoMap,
    v: &PeriodicField,
    a: &SymbolSpec,
    mode: Dealias,
) -> Result<PeriodicField> {
    let u = compose(v, &invert_diffeo(phi)?)?;
    compose(&s_operator_with(&u, a, mode)?, phi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianState {
    pub t: f64,
    pub phi: DiffeoMap,
    pub v: PeriodicField,
}

impl LagrangianState {
    /// Eulerian velocity `u = v∘φ^{-1}`.
    pub fn eulerian_velocity(&self) -> Result<PeriodicField> {
        compose(&self.v, &invert_diffeo(&self.phi)?)
    }
}

#[derive(Clone, Debug)]
pub struct LagrangianTrajectory {
    pub states: Vec<LagrangianState>,
    pub rows: Vec<DiagRow>,
    pub status: RunStatus,
}

impl LagrangianTrajectory {
    pub fn final_state(&self) -> &LagrangianState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn stop_time(&self) -> Option<f64> {
        (!self.status.is_completed()).then(|| self.final_state().t)
    }
}

struct Snapshot {
    row: DiagRow,
    stop: Option<RunStatus>,
}

fn lagrangian_snapshot(
    state: &LagrangianState,
    phi0: &DiffeoMap,
    cfg: &SolverConfig,
) -> Result<Snapshot> {
    let u = state.eulerian_velocity()?;
    let m = apply_symbol(&cfg.symbol, &u)?;
    let min_ux = min_slope(&u);
    let min_phix = state.phi.jacobian().min();
    let h_q_norm = sobolev_norm(&u, cfg.q_work)?;
    let rules = cfg.stop_rules;
    let stop = if min_phix < rules.jacobian_floor {
        Some(RunStatus::StoppedJacobianFloor)
    } else if min_ux < rules.min_slope_floor {
        Some(RunStatus::StoppedMinSlope)
    } else if h_q_norm > rules.norm_ceiling {
        Some(RunStatus::StoppedNormCeiling)
    } else {
        None
    };
    let row = DiagRow {
        t: state.t,
        energy_a: energy_norm(&u, &cfg.symbol)?,
        h_q_norm,
        min_ux,
        min_phix: Some(min_phix),
        m_l2: l2_norm(&m),
        dq_from_start: Some(dq_distance(phi0, &state.phi, cfg.q_work.max(1.5 + 1e-9))?),
        apriori_residual: None,
        chain_rule_residual: Some(chain_rule_residual(&u, &state.v, &state.phi)?),
    };
    Ok(Snapshot { row, stop })
}

fn degeneration(e: &Error) -> Option<RunStatus> {
    match e {
        Error::NotDiffeomorphism(_) | Error::InversionFailed(_) => {
            Some(RunStatus::StoppedJacobianFloor)
        }
        Error::NumericalOverflow | Error::NonFinite => Some(RunStatus::StoppedOverflow),
        _ => None,
    }
}

/// RK4 on `φ_t = v, v_t = S_φ(v)`.
pub fn integrate_geodesic(
    phi0: &DiffeoMap,
    v0: &PeriodicField,
    cfg: &SolverConfig,
) -> Result<LagrangianTrajectory> {
    let steps = cfg.validate()?;
    phi0.grid().check_same(v0.grid())?;
    let grid = phi0.grid().clone();
    let n = grid.len();
    let a = &cfg.symbol;

    let mut state = LagrangianState {
        t: 0.0,
        phi: phi0.clone(),
        v: v0.clone(),
    };
    let first = lagrangian_snapshot(&state, phi0, cfg)?;
    let mut rows = vec![first.row];
    let mut states = vec![state.clone()];
    let mut status = RunStatus::Completed;

    let mut y: Vec<f64> = phi0
        .displacement()
        .values()
        .iter()
        .chain(v0.values())
        .copied()
        .collect();
    for step in 1..=steps {
        let advanced = rk4(&y, cfg.dt, |y| {
            let phi = DiffeoMap::new(PeriodicField::from_raw(&grid, y[..n].to_vec()))?;
            let v = PeriodicField::from_raw(&grid, y[n..].to_vec());
            let accel = spray_with(&phi, &v, a, cfg.dealias)?;
            Ok(y[n..].iter().chain(accel.values()).copied().collect())
        })
        .and_then(|next| {
            let phi = DiffeoMap::new(PeriodicField::from_raw(&grid, next[..n].to_vec()))?;
            let st = LagrangianState {
                t: step as f64 * cfg.dt,
                phi,
                v: PeriodicField::from_raw(&grid, next[n..].to_vec()),
            };
            let snap = lagrangian_snapshot(&st, phi0, cfg)?;
            Ok((next, st, snap))
        });
        let (next, st, snap) = match advanced {
            Ok(ok) => ok,
            Err(e) => match degeneration(&e) {
                Some(s) => {
                    status = s;
                    break;
                }
                None => return Err(e),
            },
        };
        y = next;
        state = st;
        if snap.stop.is_some() || step % cfg.record_every == 0 || step == steps {
            rows.push(snap.row);
            states.push(state.clone());
        }
        if let Some(s) = snap.stop {
            status = s;
            break;
        }
    }
    fill_apriori_residuals(&mut rows, cfg.record_every as f64 * cfg.dt);
    Ok(LagrangianTrajectory {
        states,
        rows,
        status,
    })
}

/// Flow maps reconstructed from an Eulerian trajectory.
#[derive(Clone, Debug)]
pub struct FlowReconstruction {
    /// `φ(t_k)` for each accepted snapshot time, starting from the identity.
    pub maps: Vec<DiffeoMap>,
    pub status: RunStatus,
}

fn lagrange_weights(nodes: &[f64], target: f64) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (target - xj) / (xi - xj))
                .product()
        })
        .collect()
}

/// Cubic-in-time interpolation of the velocity at the midpoint of
/// `[t_k, t_{k+1}]`.
fn midpoint_velocity(u_traj: &[EulerState], k: usize) -> PeriodicField {
    let len = u_traj.len();
    let width = len.min(4);
    let start = k.saturating_sub(1).min(len - width);
    let window = &u_traj[start..start + width];
    let nodes: Vec<f64> = (start..start + width).map(|i| i as f64).collect();
    let weights = lagrange_weights(&nodes, k as f64 + 0.5);
    let n = u_traj[0].u.grid().len();
    let values = (0..n)
        .map(|j| {
            window
                .iter()
                .zip(&weights)
                .map(|(s, w)| w * s.u.values()[j])
                .sum()
        })
        .collect();
    PeriodicField::from_raw(u_traj[0].u.grid(), values)
}

/// Integrates `φ_t = u(t)∘φ`, `φ(0) = id`, with RK4 over a time-uniform
/// Eulerian trajectory.
pub fn flow_from_velocity(u_traj: &[EulerState]) -> Result<FlowReconstruction> {
    let Some(first) = u_traj.first() else {
        return Err(Error::InvalidConfig("empty velocity trajectory".into()));
    };
    let grid = first.u.grid().clone();
    if u_traj.len() > 1 {
        let h0 = u_traj[1].t - u_traj[0].t;
        if !(h0 > 0.0) {
            return Err(Error::InvalidConfig("trajectory times must increase".into()));
        }
        for w in u_traj.windows(2) {
            if ((w[1].t - w[0].t) - h0).abs() > 1e-9 * h0 {
                return Err(Error::InvalidConfig("trajectory is not time-uniform".into()));
            }
        }
    }
    let mut maps = vec![DiffeoMap::identity(&grid)];
    let mut status = RunStatus::Completed;
    let mut f = vec![0.0; grid.len()];
    for k in 0..u_traj.len().saturating_sub(1) {
        let h = u_traj[k + 1].t - u_traj[k].t;
        let u_mid = midpoint_velocity(u_traj, k);
        let velocity_at = |which: usize| -> &PeriodicField {
            match which {
                0 => &u_traj[k].u,
                2 => &u_traj[k + 1].u,
                _ => &u_mid,
            }
        };
        let stage = |disp: &[f64], which: usize| -> Result<Vec<f64>> {
            let phi = DiffeoMap::new(PeriodicField::from_raw(&grid, disp.to_vec()))?;
            Ok(compose(velocity_at(which), &phi)?.into_values())
        };
        let step = (|| -> Result<Vec<f64>> {
            let shift = |base: &[f64], kk: &[f64], c: f64| -> Vec<f64> {
                base.iter().zip(kk).map(|(a, b)| a + c * b).collect()
            };
            let k1 = stage(&f, 0)?;
            let k2 = stage(&shift(&f, &k1, 0.5 * h), 1)?;
            let k3 = stage(&shift(&f, &k2, 0.5 * h), 1)?;
            let k4 = stage(&shift(&f, &k3, h), 2)?;
            Ok((0..f.len())
                .map(|i| f[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
                .collect())
        })()
        .and_then(|next| {
            let phi = DiffeoMap::new(PeriodicField::from_raw(&grid, next.clone()))?;
            Ok((next, phi))
        });
        match step {
            Ok((next, phi)) => {
                f = next;
                maps.push(phi);
            }
            Err(e) => match degeneration(&e) {
                Some(s) => {
                    status = s;
                    break;
                }
                None => return Err(e),
            },
        }
    }
    Ok(FlowReconstruction { maps, status })
}

/// The three terms of `d_q` and their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqDistance {
    /// `max |e^{iφ₁} - e^{iφ₂}|` over the nodes.
    pub chord: f64,
    /// `‖φ₁x - φ₂x‖_{H^{q-1}}`.
    pub jacobian: f64,
    /// `‖1/φ₁x - 1/φ₂x‖_∞`.
    pub inverse_jacobian: f64,
}

impl DqDistance {
    pub fn total(&self) -> f64 {
        self.chord + self.jacobian + self.inverse_jacobian
    }
}

pub fn dq_components(phi1: &DiffeoMap, phi2: &DiffeoMap, q: f64) -> Result<DqDistance> {
    if !(q > 1.5) {
        return Err(Error::InvalidExponent(q));
    }
    phi1.grid().check_same(phi2.grid())?;
    let (f1, f2) = (phi1.displacement().values(), phi2.displacement().values());
    let chord = f1
        .iter()
        .zip(f2)
        .map(|(a, b)| 2.0 * (0.5 * (a - b)).sin().abs())
        .fold(0.0, f64::max);
    let jac_diff = phi1.jacobian().sub(phi2.jacobian())?;
    let jacobian = sobolev_norm(&jac_diff, q - 1.0)?;
    let inverse_jacobian = phi1
        .jacobian()
        .values()
        .iter()
        .zip(phi2.jacobian().values())
        .map(|(a, b)| (1.0 / a - 1.0 / b).abs())
        .fold(0.0, f64::max);
    Ok(DqDistance {
        chord,
        jacobian,
        inverse_jacobian,
    })
}

pub fn dq_distance(phi1: &DiffeoMap, phi2: &DiffeoMap, q: f64) -> Result<f64> {
    Ok(dq_components(phi1, phi2, q)?.total())
}

/// Largest value over recorded pairs `s < t` of
/// `d_q(φ(t), φ(s)) / (|t - s| max ‖v‖_{H^q} (1 + max ‖1/φ_x‖_∞²))`, maxima
/// taken over the recorded states in `[s, t]`.
pub fn path_estimate_constant(states: &[LagrangianState], q: f64) -> Result<f64> {
    let v_norms = states
        .iter()
        .map(|s| sobolev_norm(&s.v, q))
        .collect::<Result<Vec<f64>>>()?;
    let inv_jac: Vec<f64> = states.iter().map(|s| 1.0 / s.phi.jacobian().min()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        let mut v_max: f64 = 0.0;
        let mut b_max: f64 = 0.0;
        for j in i..states.len() {
            v_max = v_max.max(v_norms[j]);
            b_max = b_max.max(inv_jac[j]);
            if j == i {
                continue;
            }
            let span = (states[j].t - states[i].t).abs();
            let denom = span * v_max * (1.0 + b_max * b_max);
            if denom > 0.0 {
                worst = worst.max(dq_distance(&states[i].phi, &states[j].phi, q)? / denom);
            }
        }
    }
    Ok(worst)
}

/// Largest `1/min φ_x - (‖1/φ₀x‖_∞ + d_q(φ₀, φ))` along a trajectory; never
/// positive beyond rounding because the last term of `d_q` dominates the
/// growth of `‖1/φ_x‖_∞`.
pub fn jacobian_bound_slack(states: &[LagrangianState], q: f64) -> Result<f64> {
    let Some(first) = states.first() else {
        return Ok(f64::NEG_INFINITY);
    };
    let base = 1.0 / first.phi.jacobian().min();
    states
        .iter()
        .map(|s| {
            let d = dq_distance(&first.phi, &s.phi, q)?;
            Ok(1.0 / s.phi.jacobian().min() - (base + d))
        })
        .try_fold(f64::NEG_INFINITY, |acc, r: Result<f64>| Ok(acc.max(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn identity_composition_is_exact() {
        let g = grid(32);
        let w = PeriodicField::from_modes(&g, &[(3, 1.0, 2.0)]);
        assert_eq!(compose(&w, &DiffeoMap::identity(&g)).unwrap(), w);
    }

    #[test]
    fn rotation_translates() {
        let g = grid(64);
        let c = 0.37;
        let w = PeriodicField::from_fn(&g, f64::cos);
        let out = compose(&w, &DiffeoMap::rotation(&g, c)).unwrap();
        for (x, v) in g.nodes().iter().zip(out.values()) {
            assert!((v - (x + c).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn rotation_inverse() {
        let g = grid(64);
        let inv = invert_diffeo(&DiffeoMap::rotation(&g, 0.5)).unwrap();
        for f in inv.displacement().values() {
            let wrapped = (f + 0.5).rem_euclid(2.0 * PI);
            assert!(wrapped.min(2.0 * PI - wrapped) < 1e-12);
        }
        assert!(invert_diffeo(&DiffeoMap::identity(&g)).unwrap().is_identity());
    }

    #[test]
    fn anchored_lift() {
        let g = grid(16);
        let phi = DiffeoMap::rotation(&g, -1.0);
        let f0 = phi.displacement().values()[0];
        assert!((0.0..2.0 * PI).contains(&f0));
        assert!((f0 - (2.0 * PI - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn folded_map_rejected() {
        let g = grid(64);
        assert!(matches!(
            DiffeoMap::from_fn(&g, |x| 1.5 * x.sin()),
            Err(Error::NotDiffeomorphism(_))
        ));
    }

    #[test]
    fn identity_operator_has_no_commutator() {
        let g = grid(64);
        let u = PeriodicField::from_modes(&g, &[(1, 1.0, 0.0), (2, 0.0, 0.5)]);
        let s = s_operator(&u, &SymbolSpec::identity()).unwrap();
        let expected = crate::euler::dealias(&u.mul(&u.derivative()).unwrap()).scale(-2.0);
        for (a, b) in s.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_spray_vanishes_at_rest() {
        let g = grid(32);
        let phi = DiffeoMap::from_fn(&g, |x| 0.2 * x.sin()).unwrap();
        let a = SymbolSpec::bessel(1.0).unwrap();
        assert!(spray(&phi, &PeriodicField::zeros(&g), &a).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn dq_rejects_low_regularity() {
        let g = grid(16);
        let id = DiffeoMap::identity(&g);
        assert!(dq_distance(&id, &id, 1.5).is_err());
        assert_eq!(dq_distance(&id, &id, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn lagrange_weights_sum_to_one() {
        let w = lagrange_weights(&[0.0, 1.0, 2.0, 3.0], 0.5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[0] - 0.3125).abs() < 1e-15);
        assert!((w[3] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn resting_flow_is_stationary() {
        let g = grid(32);
        let phi0 = DiffeoMap::from_fn(&g, |x| 0.1 * x.cos()).unwrap();
        let cfg = SolverConfig::new(SymbolSpec::bessel(1.0).unwrap(), 0.1, 0.5);
        let traj = integrate_geodesic(&phi0, &PeriodicField::zeros(&g), &cfg).unwrap();
        assert_eq!(traj.status, RunStatus::Completed);
        assert_eq!(traj.final_state().phi, phi0);
        assert!(traj.rows.iter().all(|r| r.dq_from_start == Some(0.0)));
    }
}
