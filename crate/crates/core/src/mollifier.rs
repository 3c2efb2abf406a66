//! Friedrichs mollifiers on the circle: the rescaled bump `ρ_ε`, the
//! smoothing operator `J_ε u = ρ_ε * u`, and the commutator `[J_ε, uD]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{analyze, l2_norm, synthesize_unchecked, Grid, PeriodicField};

/// Minimum number of grid cells (`ε·n`) spanned by a kernel.
pub const MIN_RESOLUTION: f64 = 16.0;

/// The standard exponential bump on `(-1/2, 1/2)` before normalization.
pub fn bump_profile(x: f64) -> f64 {
    let y = 2.0 * x;
    if y.abs() < 1.0 {
        (-1.0 / (1.0 - y * y)).exp()
    } else {
        0.0
    }
}

/// `ρ_ε` sampled on a grid, normalized so that its grid quadrature is one.
#[derive(Clone, Debug)]
pub struct BumpKernel {
    epsilon: f64,
    samples: PeriodicField,
    // quadrature of ∫ ρ_ε e^{-inx} dx, FFT order
    multiplier: Vec<f64>,
}

impl BumpKernel {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn samples(&self) -> &PeriodicField {
        &self.samples
    }

    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }

    /// `∫ ρ_ε e^{-ikx} dx` on the grid; real because the kernel is even.
    pub fn multiplier(&self, k: i64) -> f64 {
        self.grid()
            .index_of(k)
            .map(|i| self.multiplier[i])
            .unwrap_or(0.0)
    }

    /// Trapezoid quadrature of the kernel.
    pub fn weight(&self) -> f64 {
        self.samples.values().iter().sum::<f64>() * self.grid().spacing()
    }

    pub fn peak(&self) -> f64 {
        self.samples.max()
    }
}

pub fn bump_kernel(epsilon: f64, grid: &Grid) -> Result<BumpKernel> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let n = grid.len();
    let cells = epsilon * n as f64;
    if cells < MIN_RESOLUTION {
        return Err(Error::KernelUnresolved(cells));
    }
    let mut values: Vec<f64> = (0..n)
        .map(|j| {
            let d = 2.0 * PI * j.min(n - j) as f64 / n as f64;
            bump_profile(d / epsilon) / epsilon
        })
        .collect();
    let weight: f64 = values.iter().sum::<f64>() * grid.spacing();
    for v in &mut values {
        *v /= weight;
    }
    let samples = PeriodicField::from_raw(grid, values);
    let spec = analyze(&samples);
    let multiplier = spec.coeffs().iter().map(|c| 2.0 * PI * c.re).collect();
    Ok(BumpKernel {
        epsilon,
        samples,
        multiplier,
    })
}

/// `J_ε u`, computed mode-wise as `(∫ρ_ε e^{-inx}) û_n`.
pub fn mollify(u: &PeriodicField, kernel: &BumpKernel) -> Result<PeriodicField> {
    u.grid().check_same(kernel.grid())?;
    let mut spec = analyze(u);
    for (c, m) in spec.coeffs_mut().iter_mut().zip(&kernel.multiplier) {
        *c *= *m;
    }
    Ok(synthesize_unchecked(&spec))
}

/// `K_ε(m) = J_ε(u m_x) - u J_ε(m_x)`.
pub fn mollifier_commutator(
    u: &PeriodicField,
    m: &PeriodicField,
    kernel: &BumpKernel,
) -> Result<PeriodicField> {
    u.grid().check_same(m.grid())?;
    let mx = m.derivative();
    let smoothed_product = mollify(&u.mul(&mx)?, kernel)?;
    let product_of_smoothed = u.mul(&mollify(&mx, kernel)?)?;
    smoothed_product.sub(&product_of_smoothed)
}

/// `‖K_ε(m)‖_{L²} / (‖u_x‖_∞ ‖m‖_{L²})`; zero when the denominator vanishes.
pub fn commutator_ratio(u: &PeriodicField, m: &PeriodicField, kernel: &BumpKernel) -> Result<f64> {
    let k = mollifier_commutator(u, m, kernel)?;
    let denom = u.derivative().max_abs() * l2_norm(m);
    Ok(if denom == 0.0 { 0.0 } else { l2_norm(&k) / denom })
}

/// Periodic convolution `(f * u)(x) = ∫ f(x - y) u(y) dy` on the grid.
pub fn convolve(f: &PeriodicField, u: &PeriodicField) -> Result<PeriodicField> {
    f.grid().check_same(u.grid())?;
    let fs = analyze(f);
    let mut us = analyze(u);
    for (c, w) in us.coeffs_mut().iter_mut().zip(fs.coeffs()) {
        *c *= *w * (2.0 * PI);
    }
    Ok(synthesize_unchecked(&us))
}

/// `‖f * u‖_{L²} / (‖f‖_{L¹} ‖u‖_{L²})`, at most one by Young's inequality.
pub fn young_ratio(f: &PeriodicField, u: &PeriodicField) -> Result<f64> {
    let conv = convolve(f, u)?;
    let l1 = f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().spacing();
    let denom = l1 * l2_norm(u);
    Ok(if denom == 0.0 { 0.0 } else { l2_norm(&conv) / denom })
}
