mod common;

use circflow::diagnostics::momentum_rate;
use circflow::euler::{
    dealias, ep_rhs, euler_rhs, integrate_euler, integrate_momentum, rk4_step, EulerState,
};
use circflow::lagrangian::s_operator;
use circflow::solver::{Dealias, RunStatus, SolverConfig};
use circflow::spectral::{apply_symbol, l2_norm, solve_symbol};
use circflow::{Error, Grid, PeriodicField, SymbolSpec};
use common::{max_abs_diff, TrigPoly};
use proptest::prelude::*;

fn modes_strategy() -> impl Strategy<Value = Vec<(u32, f64, f64)>> {
    prop::collection::vec((1..=10u32, -1.0..1.0f64, -1.0..1.0f64), 1..5)
}

#[test]
fn euler_rhs_single_mode() {
    let g = Grid::new(64).unwrap();
    let u = PeriodicField::from_fn(&g, f64::cos);
    let rhs = euler_rhs(&u, &SymbolSpec::bessel(1.0).unwrap()).unwrap();
    for (x, v) in g.nodes().iter().zip(rhs.values()) {
        assert!((v - 0.6 * (2.0 * x).sin()).abs() < 1e-13);
    }
}

#[test]
fn ep_rhs_single_mode() {
    let g = Grid::new(64).unwrap();
    let u = PeriodicField::from_fn(&g, f64::cos);
    let m = u.scale(2.0);
    let rhs = ep_rhs(&m, &u).unwrap();
    for (x, v) in g.nodes().iter().zip(rhs.values()) {
        assert!((v - 3.0 * (2.0 * x).sin()).abs() < 1e-13);
    }
}

#[test]
fn s_operator_single_mode() {
    let g = Grid::new(64).unwrap();
    let u = PeriodicField::from_fn(&g, f64::cos);
    let s = s_operator(&u, &SymbolSpec::bessel(1.0).unwrap()).unwrap();
    for (x, v) in g.nodes().iter().zip(s.values()) {
        assert!((v - 0.1 * (2.0 * x).sin()).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_rhs_matches_oracle(modes in modes_strategy(), s in 0.5..2.5f64) {
        let n = 64;
        let g = Grid::new(n).unwrap();
        let u = PeriodicField::from_modes(&g, &modes);
        let expected = common::euler_rhs(&TrigPoly::from_modes(&modes), common::bessel(s), 21).sample(n);
        let a = SymbolSpec::bessel(s).unwrap();
        let got = euler_rhs(&u, &a).unwrap();
        let scale = expected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let products = apply_symbol(&a, &u).unwrap().max_abs() * u.derivative().max_abs();
        prop_assert!(max_abs_diff(got.values(), &expected) <= 1e-11 * scale + 1e-14 * products);
    }

    #[test]
    fn s_operator_matches_oracle(modes in modes_strategy(), s in 0.5..2.5f64) {
        let n = 64;
        let g = Grid::new(n).unwrap();
        let u = PeriodicField::from_modes(&g, &modes);
        let expected = common::s_operator(&TrigPoly::from_modes(&modes), common::bessel(s), 21).sample(n);
        let got = s_operator(&u, &SymbolSpec::bessel(s).unwrap()).unwrap();
        let scale = expected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(got.values(), &expected) <= 1e-11 * scale);
    }

    #[test]
    fn ep_rhs_matches_oracle(modes in modes_strategy(), s in 0.5..2.5f64) {
        let n = 64;
        let g = Grid::new(n).unwrap();
        let p = TrigPoly::from_modes(&modes);
        let mp = p.multiplier(common::bessel(s));
        let u = PeriodicField::from_modes(&g, &modes);
        let m = PeriodicField::new(&g, mp.sample(n)).unwrap();
        let expected = common::ep_rhs(&mp, &p, 21).sample(n);
        let got = ep_rhs(&m, &u).unwrap();
        let scale = expected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(got.values(), &expected) <= 1e-11 * scale);
    }

    #[test]
    fn frame_identity(modes in modes_strategy(), s in 0.5..2.5f64) {
        let g = Grid::new(64).unwrap();
        let a = SymbolSpec::bessel(s).unwrap();
        let u = PeriodicField::from_modes(&g, &modes);
        let transport = dealias(&u.mul(&u.derivative()).unwrap());
        let rhs = euler_rhs(&u, &a).unwrap();
        let other = s_operator(&u, &a).unwrap().sub(&transport).unwrap();
        prop_assert!(max_abs_diff(rhs.values(), other.values()) <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn momentum_form_is_consistent(modes in modes_strategy(), s in 0.5..2.5f64) {
        let g = Grid::new(64).unwrap();
        let a = SymbolSpec::bessel(s).unwrap();
        let u = PeriodicField::from_modes(&g, &modes);
        let ep = ep_rhs(&apply_symbol(&a, &u).unwrap(), &u).unwrap();
        let lifted = apply_symbol(&a, &euler_rhs(&u, &a).unwrap()).unwrap();
        prop_assert!(l2_norm(&lifted.sub(&ep).unwrap()) <= 1e-10 * l2_norm(&ep).max(1e-300));
    }

    #[test]
    fn momentum_rate_matches_oracle(modes in modes_strategy(), s in 0.5..2.0f64) {
        let g = Grid::new(64).unwrap();
        let a = SymbolSpec::bessel(s).unwrap();
        let u = PeriodicField::from_modes(&g, &modes);
        let p = TrigPoly::from_modes(&modes);
        let m = p.multiplier(common::bessel(s));
        let expected = -3.0 * 2.0 * std::f64::consts::PI * m.mul(&m).mul(&p.deriv()).coeff(0).re;
        let got = momentum_rate(&u, &a).unwrap();
        let mm = apply_symbol(&a, &u).unwrap().max_abs();
        let magnitude = 2.0 * std::f64::consts::PI * mm * mm * u.derivative().max_abs();
        prop_assert!((got - expected).abs() <= 1e-10 * expected.abs() + 1e-13 * magnitude);
    }
}

#[test]
fn clm_rejects_nonzero_mean() {
    let g = Grid::new(32).unwrap();
    let u = PeriodicField::from_modes(&g, &[(0, 0.5, 0.0), (1, 1.0, 0.0)]);
    assert!(matches!(
        euler_rhs(&u, &SymbolSpec::clm()),
        Err(Error::ZeroModeNotInvertible(_))
    ));
    let u = PeriodicField::from_fn(&g, f64::cos);
    assert!(euler_rhs(&u, &SymbolSpec::clm()).is_ok());
}

#[test]
fn energy_is_conserved_on_short_runs() {
    let g = Grid::new(64).unwrap();
    let u0 = PeriodicField::from_modes(&g, &[(1, 1.0, 0.0), (2, 0.0, 0.5), (3, 0.1, 0.1)]);
    for a in [
        SymbolSpec::bessel(1.0).unwrap(),
        SymbolSpec::bessel(2.0).unwrap(),
        SymbolSpec::helmholtz_power(1).unwrap(),
    ] {
        let cfg = SolverConfig::new(a, 1e-3, 0.5).with_record_every(100);
        let tr = integrate_euler(&u0, &cfg).unwrap();
        assert_eq!(tr.status, RunStatus::Completed);
        let e0 = tr.rows[0].energy_a;
        for r in &tr.rows {
            assert!((r.energy_a - e0).abs() <= 1e-9 * e0);
        }
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let g = Grid::new(64).unwrap();
    let a = SymbolSpec::bessel(2.0).unwrap();
    let u0 = PeriodicField::from_modes(&g, &[(1, 1.0, 0.0), (2, 0.0, 0.5)]);
    let run = |dt: f64, steps: usize| {
        let mut st = EulerState { t: 0.0, u: u0.clone() };
        for _ in 0..steps {
            st = rk4_step(&st, dt, &a).unwrap();
        }
        st.u
    };
    let reference = run(0.0025, 400);
    let e1 = l2_norm(&run(0.05, 20).sub(&reference).unwrap());
    let e2 = l2_norm(&run(0.025, 40).sub(&reference).unwrap());
    let ratio = e1 / e2;
    assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
}

#[test]
fn momentum_and_velocity_integrations_agree() {
    let g = Grid::new(64).unwrap();
    let a = SymbolSpec::bessel(1.5).unwrap();
    let u0 = PeriodicField::from_modes(&g, &[(1, 0.0, -1.0), (2, 0.3, 0.0)]);
    let cfg = SolverConfig::new(a.clone(), 1e-3, 0.5).with_record_every(100);
    let velocity = integrate_euler(&u0, &cfg).unwrap();
    let momentum = integrate_momentum(&apply_symbol(&a, &u0).unwrap(), &cfg).unwrap();
    assert_eq!(velocity.states.len(), momentum.len());
    for (v, m) in velocity.states.iter().zip(&momentum) {
        assert_eq!(v.t, m.t);
        let u_from_m = solve_symbol(&a, &m.m).unwrap();
        assert!(l2_norm(&u_from_m.sub(&v.u).unwrap()) < 1e-9);
    }
}

#[test]
fn dealiasing_off_still_runs() {
    let g = Grid::new(64).unwrap();
    let u0 = PeriodicField::from_fn(&g, f64::cos);
    let cfg = SolverConfig::new(SymbolSpec::bessel(2.0).unwrap(), 1e-2, 0.1)
        .with_dealias(Dealias::None);
    let tr = integrate_euler(&u0, &cfg).unwrap();
    assert_eq!(tr.status, RunStatus::Completed);
}

#[test]
fn aliased_initial_data_rejected() {
    let g = Grid::new(64).unwrap();
    let u0 = PeriodicField::from_modes(&g, &[(30, 1.0, 0.0)]);
    let cfg = SolverConfig::new(SymbolSpec::bessel(2.0).unwrap(), 1e-2, 0.1);
    assert!(matches!(integrate_euler(&u0, &cfg), Err(Error::NotBandLimited(_))));
}
