mod common;

use std::f64::consts::PI;

use circflow::mollifier::{
    bump_kernel, bump_profile, commutator_ratio, mollifier_commutator, mollify, young_ratio,
};
use circflow::spectral::{l2_norm, sobolev_norm};
use circflow::{Error, Grid, PeriodicField};
use common::max_abs_diff;

/// Kernel samples built directly from the bump formula, normalized by the
/// trapezoid rule.
fn oracle_kernel(eps: f64, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n as f64;
            let d = if x > PI { 2.0 * PI - x } else { x };
            let y = 2.0 * d / eps;
            if y.abs() < 1.0 {
                (-1.0 / (1.0 - y * y)).exp() / eps
            } else {
                0.0
            }
        })
        .collect();
    let w: f64 = raw.iter().sum::<f64>() * 2.0 * PI / n as f64;
    raw.into_iter().map(|v| v / w).collect()
}

/// `h Σ_j ρ(x_j) u(x_i - x_j)`.
fn direct_convolution(kernel: &[f64], u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| h * (0..n).map(|j| kernel[j] * u[(i + n - j) % n]).sum::<f64>())
        .collect()
}

#[test]
fn kernel_matches_formula() {
    let g = Grid::new(256).unwrap();
    for eps in [1.0, 0.5, 0.25, 0.125] {
        let k = bump_kernel(eps, &g).unwrap();
        assert!(max_abs_diff(k.samples().values(), &oracle_kernel(eps, 256)) < 1e-12);
        assert!((k.weight() - 1.0).abs() < 1e-14);
        let v = k.samples().values();
        for j in 1..256 {
            assert_eq!(v[j], v[256 - j]);
            let x = g.node(j).min(2.0 * PI - g.node(j));
            if x >= eps / 2.0 {
                assert_eq!(v[j], 0.0);
            }
        }
    }
    assert_eq!(bump_profile(0.5), 0.0);
    assert!((bump_profile(0.0) - (-1.0f64).exp()).abs() < 1e-16);
}

#[test]
fn mollify_matches_direct_quadrature() {
    let n = 128;
    let g = Grid::new(n).unwrap();
    let u = PeriodicField::from_fn(&g, |x| (5.0 * x).cos());
    let k = bump_kernel(0.5, &g).unwrap();
    let direct = direct_convolution(&oracle_kernel(0.5, n), u.values());
    let got = mollify(&u, &k).unwrap();
    assert!(max_abs_diff(got.values(), &direct) < 1e-13);
    let factor = got.values()[0];
    assert!(factor.abs() <= 1.0);
    for (x, v) in g.nodes().iter().zip(got.values()) {
        assert!((v - factor * (5.0 * x).cos()).abs() < 1e-13);
    }
}

#[test]
fn preconditions() {
    let g = Grid::new(64).unwrap();
    assert!(matches!(bump_kernel(0.1, &g), Err(Error::KernelUnresolved(_))));
    assert!(matches!(bump_kernel(0.0, &g), Err(Error::InvalidEpsilon(_))));
    assert!(matches!(bump_kernel(1.5, &g), Err(Error::InvalidEpsilon(_))));
    let k = bump_kernel(0.5, &g).unwrap();
    let other = PeriodicField::zeros(&Grid::new(32).unwrap());
    assert!(mollify(&other, &k).is_err());
}

#[test]
fn commutes_with_derivative_and_is_symmetric() {
    let g = Grid::new(256).unwrap();
    let u = PeriodicField::from_modes(&g, &[(1, 1.0, 0.3), (7, -0.2, 0.5), (20, 0.1, 0.0)]);
    let w = PeriodicField::from_modes(&g, &[(2, 0.4, 0.0), (7, 0.0, 1.0), (11, 0.3, -0.2)]);
    for eps in [1.0, 0.5, 0.25, 0.125] {
        let k = bump_kernel(eps, &g).unwrap();
        let a = mollify(&u, &k).unwrap().derivative();
        let b = mollify(&u.derivative(), &k).unwrap();
        assert!(max_abs_diff(a.values(), b.values()) < 1e-10);
        let h = g.spacing();
        let lhs: f64 = mollify(&u, &k).unwrap().mul(&w).unwrap().values().iter().sum::<f64>() * h;
        let rhs: f64 = u.mul(&mollify(&w, &k).unwrap()).unwrap().values().iter().sum::<f64>() * h;
        assert!((lhs - rhs).abs() < 1e-10);
    }
}

#[test]
fn smoothing_converges_and_never_grows() {
    let g = Grid::new(512).unwrap();
    let u = PeriodicField::from_fn(&g, |x| x.cos() + (3.0 * x).cos());
    let mut last = f64::INFINITY;
    for k in 0..=5 {
        let j = bump_kernel(0.5f64.powi(k), &g).unwrap();
        let smoothed = mollify(&u, &j).unwrap();
        let err = sobolev_norm(&smoothed.sub(&u).unwrap(), 2.0).unwrap();
        assert!(err < last);
        last = err;
        for q in [0.0, 1.0, 2.0, 3.0] {
            let before = sobolev_norm(&u, q).unwrap();
            assert!(sobolev_norm(&smoothed, q).unwrap() <= (1.0 + 1e-8) * before);
        }
    }
    assert!(last / sobolev_norm(&u, 2.0).unwrap() < 1e-3);
}

#[test]
fn commutator_cases() {
    let g = Grid::new(256).unwrap();
    let k = bump_kernel(0.25, &g).unwrap();
    let m = PeriodicField::from_fn(&g, |x| (3.0 * x).cos());
    let c = PeriodicField::constant(&g, 2.0);
    assert!(mollifier_commutator(&c, &m, &k).unwrap().max_abs() < 1e-13);
    let u = PeriodicField::from_fn(&g, f64::sin);
    assert!(mollifier_commutator(&u, &c, &k).unwrap().max_abs() < 1e-13);
    let base = commutator_ratio(&u, &m, &bump_kernel(1.0, &g).unwrap()).unwrap();
    let hi = [0.5, 0.25, 0.125]
        .iter()
        .map(|&e| commutator_ratio(&u, &m, &bump_kernel(e, &g).unwrap()).unwrap())
        .fold(0.0f64, f64::max);
    assert!(base > 0.0 && hi <= 2.0 * base);
    assert!(hi < 1.0);
}

#[test]
fn young_inequality_probe() {
    let g = Grid::new(128).unwrap();
    let f = PeriodicField::from_fn(&g, |x| (x.cos() + 0.3).max(0.0) - 0.1 * (2.0 * x).sin());
    for u in [
        PeriodicField::from_fn(&g, f64::cos),
        PeriodicField::from_modes(&g, &[(0, 1.0, 0.0), (5, 0.5, 0.2)]),
    ] {
        let r = young_ratio(&f, &u).unwrap();
        assert!(r > 0.0 && r <= 1.0 + 1e-12);
    }
    let k = bump_kernel(0.5, &g).unwrap();
    let u = PeriodicField::from_fn(&g, |x| (4.0 * x).sin());
    assert!(l2_norm(&mollify(&u, &k).unwrap()) <= l2_norm(&u) * (1.0 + 1e-12));
}
