//! The built-in property suite behind `circflow verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{apriori_residual, chain_rule_residual, kato_ponce_ratio};
use crate::error::Result;
use crate::euler::{ep_rhs, euler_rhs, integrate_euler};
use crate::lagrangian::{
    compose, dq_components, dq_distance, integrate_geodesic, invert_diffeo, s_operator, spray,
    DiffeoMap,
};
use crate::mollifier::{bump_kernel, commutator_ratio, mollify};
use crate::solver::{SolverConfig, StopRules};
use crate::spectral::{apply_symbol, l2_norm, sobolev_norm, Grid, PeriodicField};
use crate::symbol::{InvertibleOn, SymbolSpec};

/// Deliberate corruptions used to check that the suite detects faults.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    SymbolTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match body() {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn inertia_under_test(s: f64, grid: &Grid, fault: Option<Fault>) -> Result<SymbolSpec> {
    let exact = SymbolSpec::bessel(s)?;
    match fault {
        Some(Fault::SymbolTable) => {
            let mut table: Vec<f64> = (0..=grid.max_resolved())
                .map(|k| exact.value(k).map(|c| c.re))
                .collect::<Result<_>>()?;
            table[5] *= 1.0 + 1e-6;
            SymbolSpec::custom(table, exact.order(), InvertibleOn::AllModes)
        }
        None => Ok(exact),
    }
}

fn spectral_exactness(fault: Option<Fault>) -> Result<(bool, String)> {
    let g = Grid::new(256)?;
    let mut worst: f64 = 0.0;
    for s in [0.5, 1.0, 1.75, 2.0] {
        let a = inertia_under_test(s, &g, fault)?;
        for k in 0..=g.dealias_cutoff() as u32 {
            for (c, d) in [(1.0, 0.0), (0.0, 1.0)] {
                if k == 0 && d == 1.0 {
                    continue;
                }
                let e = PeriodicField::from_modes(&g, &[(k, c, d)]);
                let out = apply_symbol(&a, &e)?;
                let expected = e.scale((1.0 + f64::from(k * k)).powf(s));
                worst = worst.max(out.sub(&expected)?.max_abs() / expected.max_abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max relative error {}", sci(worst))))
}

fn energy_conservation() -> Result<(bool, String)> {
    let g = Grid::new(64)?;
    let u0 = PeriodicField::from_modes(&g, &[(1, 1.0, 0.0), (2, 0.0, 0.5)]);
    let cfg = SolverConfig::new(SymbolSpec::bessel(2.0)?, 1e-3, 0.5).with_record_every(50);
    let tr = integrate_euler(&u0, &cfg)?;
    let e0 = tr.rows[0].energy_a;
    let drift = tr
        .rows
        .iter()
        .map(|r| (r.energy_a - e0).abs() / e0)
        .fold(0.0, f64::max);
    Ok((
        tr.status.is_completed() && drift <= 1e-9,
        format!("relative drift {}", sci(drift)),
    ))
}

fn random_field(g: &Grid, rng: &mut ChaCha8Rng, kmax: u32) -> PeriodicField {
    let modes: Vec<(u32, f64, f64)> = (1..=kmax)
        .map(|k| {
            let scale = 1.0 / f64::from(k * k);
            (k, scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0))
        })
        .collect();
    PeriodicField::from_modes(g, &modes)
}

fn ep_consistency() -> Result<(bool, String)> {
    let g = Grid::new(128)?;
    let a = SymbolSpec::bessel(1.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&g, &mut rng, 12);
        let m = apply_symbol(&a, &u)?;
        let ep = ep_rhs(&m, &u)?;
        let lifted = apply_symbol(&a, &euler_rhs(&u, &a)?)?;
        worst = worst.max(l2_norm(&lifted.sub(&ep)?) / l2_norm(&ep));
    }
    Ok((worst <= 1e-10, format!("max relative gap {}", sci(worst))))
}

fn frame_identities() -> Result<(bool, String)> {
    let g = Grid::new(64)?;
    let a = SymbolSpec::bessel(2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_field(&g, &mut rng, 8);
    let transport = crate::euler::dealias(&u.mul(&u.derivative())?);
    let gap = euler_rhs(&u, &a)?
        .sub(&s_operator(&u, &a)?.sub(&transport)?)?
        .max_abs();
    let id = DiffeoMap::identity(&g);
    let exact = spray(&id, &u, &a)? == s_operator(&u, &a)?;
    Ok((
        gap <= 1e-10 && exact,
        format!("frame identity gap {}, spray at identity exact: {exact}", sci(gap)),
    ))
}

fn frame_equivalence() -> Result<(bool, String)> {
    let g = Grid::new(64)?;
    let u0 = PeriodicField::from_fn(&g, f64::cos);
    let cfg = SolverConfig::new(SymbolSpec::bessel(2.0)?, 0.02, 0.5).with_record_every(25);
    let ue = integrate_euler(&u0, &cfg)?.final_state().u.clone();
    let lag = integrate_geodesic(&DiffeoMap::identity(&g), &u0, &cfg)?;
    let ul = lag.final_state().eulerian_velocity()?;
    let gap = l2_norm(&ue.sub(&ul)?);
    Ok((gap <= 1e-6, format!("L2 gap at t = 0.5: {}", sci(gap))))
}

fn inversion_round_trip() -> Result<(bool, String)> {
    let g = Grid::new(128)?;
    let phi = DiffeoMap::from_fn(&g, |x| 1.0 + 0.5 * x.sin() + 0.15 * (2.0 * x).cos())?;
    let inv = invert_diffeo(&phi)?;
    let back = compose(phi.displacement(), &inv)?;
    let tau = 2.0 * std::f64::consts::PI;
    let worst = back
        .values()
        .iter()
        .zip(inv.displacement().values())
        .map(|(g, f)| {
            let r = (g + f).rem_euclid(tau);
            r.min(tau - r)
        })
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("max |φ∘φ^-1 - id| {}", sci(worst))))
}

fn mollifier_lemmas() -> Result<(bool, String)> {
    let g = Grid::new(512)?;
    let u = PeriodicField::from_fn(&g, |x| x.cos() + (3.0 * x).cos());
    let base = sobolev_norm(&u, 2.0)?;
    let mut errors = Vec::new();
    let mut weight_gap: f64 = 0.0;
    for k in 0..=5 {
        let j = bump_kernel(0.5f64.powi(k), &g)?;
        weight_gap = weight_gap.max((j.weight() - 1.0).abs());
        errors.push(sobolev_norm(&mollify(&u, &j)?.sub(&u)?, 2.0)? / base);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap_or(&f64::INFINITY);
    Ok((
        decreasing && last < 1e-3 && weight_gap <= 1e-12,
        format!(
            "weight gap {}, relative H^2 error at eps = 1/32: {}",
            sci(weight_gap),
            sci(last)
        ),
    ))
}

fn commutator_uniformity() -> Result<(bool, String)> {
    let g = Grid::new(512)?;
    let u = PeriodicField::from_fn(&g, f64::sin);
    let m = PeriodicField::from_fn(&g, |x| (3.0 * x).cos());
    let ratios = (0..=5)
        .map(|k| commutator_ratio(&u, &m, &bump_kernel(0.5f64.powi(k), &g)?))
        .collect::<Result<Vec<f64>>>()?;
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok((
        max <= 2.0 * ratios[0],
        format!("max ratio {} vs eps = 1 ratio {}", sci(max), sci(ratios[0])),
    ))
}

fn apriori_inequality() -> Result<(bool, String)> {
    let g = Grid::new(128)?;
    let u0 = PeriodicField::from_fn(&g, |x| -x.sin());
    let rules = StopRules {
        min_slope_floor: -5.0,
        ..StopRules::default()
    };
    let cfg = SolverConfig::new(SymbolSpec::bessel(1.0)?, 1e-3, 0.5).with_stop_rules(rules);
    let tr = integrate_euler(&u0, &cfg)?;
    let mut worst = f64::NEG_INFINITY;
    for w in tr.rows.windows(2) {
        worst = worst.max(apriori_residual(&w[0], &w[1], cfg.dt)?);
    }
    Ok((worst <= 1e-3, format!("max residual {}", sci(worst))))
}

fn kato_ponce_probe() -> Result<(bool, String)> {
    let family_max = |n: usize| -> Result<f64> {
        let g = Grid::new(n)?;
        let mut worst: f64 = 0.0;
        for j in 1..=8 {
            for k in 1..=8 {
                let u = PeriodicField::from_fn(&g, |x| (f64::from(j) * x).sin());
                let v = PeriodicField::from_fn(&g, |x| (f64::from(k) * x).cos());
                for s in [1.6, 2.0, 2.5] {
                    let r = kato_ponce_ratio(&u, &v, s)?;
                    if !r.is_finite() {
                        return Ok(f64::INFINITY);
                    }
                    worst = worst.max(r);
                }
            }
        }
        Ok(worst)
    };
    let coarse = family_max(128)?;
    let fine = family_max(256)?;
    let change = (fine - coarse).abs() / coarse;
    Ok((
        coarse.is_finite() && fine.is_finite() && change < 0.2,
        format!("max ratio {} (N = 128), change under doubling {}", sci(coarse), sci(change)),
    ))
}

fn dq_metric() -> Result<(bool, String)> {
    let g = Grid::new(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random_map = || -> Result<DiffeoMap> {
        let shift = rng.gen_range(0.0..6.0);
        let c: Vec<(f64, f64)> = (1..=3)
            .map(|_| (rng.gen_range(-0.12..0.12), rng.gen_range(-0.12..0.12)))
            .collect();
        DiffeoMap::from_fn(&g, |x| {
            shift
                + c.iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let k = (i + 1) as f64;
                        a * (k * x).cos() + b * (k * x).sin()
                    })
                    .sum::<f64>()
        })
    };
    let mut worst_sym: f64 = 0.0;
    let mut worst_tri = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (p, q, r) = (random_map()?, random_map()?, random_map()?);
        let pq = dq_distance(&p, &q, 2.0)?;
        worst_sym = worst_sym.max((pq - dq_distance(&q, &p, 2.0)?).abs());
        worst_tri = worst_tri.max(dq_distance(&p, &r, 2.0)? - pq - dq_distance(&q, &r, 2.0)?);
    }
    let a = 0.1;
    let phi = DiffeoMap::from_fn(&g, |x| a * x.sin())?;
    let d = dq_components(&phi, &DiffeoMap::identity(&g), 2.0)?;
    let closed = (d.jacobian - a).abs().max((d.inverse_jacobian - a / (1.0 - a)).abs());
    Ok((
        worst_sym <= 1e-10 && worst_tri <= 1e-10 && closed <= 1e-8,
        format!(
            "symmetry {}, triangle excess {}, closed form {}",
            sci(worst_sym),
            sci(worst_tri.max(0.0)),
            sci(closed)
        ),
    ))
}

fn chain_rule() -> Result<(bool, String)> {
    let g = Grid::new(64)?;
    let phi = DiffeoMap::rotation(&g, 0.7);
    let u = PeriodicField::from_modes(&g, &[(1, 1.0, 0.0), (3, 0.2, 0.1)]);
    let v = compose(&u, &phi)?;
    let r = chain_rule_residual(&u, &v, &phi)?;
    Ok((r <= 1e-10, format!("rotation residual {}", sci(r))))
}

/// Runs every check in a fixed order.
pub fn run_checks(fault: Option<Fault>) -> Vec<CheckResult> {
    vec![
        check("spectral_exactness", || spectral_exactness(fault)),
        check("energy_conservation", energy_conservation),
        check("euler_poincare_consistency", ep_consistency),
        check("frame_identities", frame_identities),
        check("frame_equivalence", frame_equivalence),
        check("inversion_round_trip", inversion_round_trip),
        check("mollifier_convergence", mollifier_lemmas),
        check("commutator_uniformity", commutator_uniformity),
        check("apriori_inequality", apriori_inequality),
        check("kato_ponce_probe", kato_ponce_probe),
        check("dq_metric", dq_metric),
        check("chain_rule", chain_rule),
    ]
}

pub fn report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "{} {}: {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        ));
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        out.push_str(&format!("all {} checks passed\n", results.len()));
    } else {
        out.push_str(&format!("failed: {}\n", failed.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_table_is_caught() {
        let (ok, _) = spectral_exactness(Some(Fault::SymbolTable)).unwrap();
        assert!(!ok);
        let (ok, _) = spectral_exactness(None).unwrap();
        assert!(ok);
    }
}
