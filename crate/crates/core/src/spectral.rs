//! Uniform grids on the circle, discrete Fourier analysis and synthesis, and
//! the Sobolev and inertia norms built on them.
//!
//! Coefficients follow the normalization `û_n = (1/2π) ∫ u e^{-inx} dx`, so
//! `Σ |û_n|² = (1/2π) ∫ |u|² dx` and the `H^q` norm is a plain mode sum.
//! Quantities defined by integrals over the circle (`energy_norm`,
//! `l2_norm`) carry the explicit factor `2π`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symbol::{InvertibleOn, SymbolSpec};

/// Relative magnitude below which a Fourier mode counts as unpopulated.
pub(crate) const POPULATED_REL: f64 = 1e-13;

/// Relative tolerance on the zero mode accepted by mean-zero-only symbols.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// `n` equispaced nodes `x_j = 2πj/n` on a circle of circumference `2π`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be even and at least 8"
            )));
        }
        let (forward, inverse) = plans(n);
        Ok(Self {
            n,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumber stored at FFT index `idx`, in `-n/2 ..= n/2 - 1`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// FFT index of wavenumber `k`, or `None` if `k` is not representable.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k >= -half && k < half {
            Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
        } else {
            None
        }
    }

    /// Largest wavenumber on which symbols act (`n/2 - 1`).
    pub fn max_resolved(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    /// Largest wavenumber kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

/// Real samples of a `2π`-periodic function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicField {
    grid: Grid,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Unchecked constructor for values produced by internal arithmetic.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Trigonometric polynomial `Σ (a_n cos nx + b_n sin nx)` from
    /// `(n, a_n, b_n)` triples.
    pub fn from_modes(grid: &Grid, modes: &[(u32, f64, f64)]) -> Self {
        Self::from_fn(grid, |x| {
            modes
                .iter()
                .map(|&(n, a, b)| {
                    let nx = n as f64 * x;
                    a * nx.cos() + b * nx.sin()
                })
                .sum()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + c * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spectral derivative `Du`.
    pub fn derivative(&self) -> Self {
        let mut spec = analyze(self);
        let grid = self.grid.clone();
        for (idx, c) in spec.coeffs.iter_mut().enumerate() {
            let k = grid.wavenumber(idx);
            *c = if k.abs() > grid.max_resolved() {
                Complex64::new(0.0, 0.0)
            } else {
                *c * Complex64::new(0.0, k as f64)
            };
        }
        synthesize_unchecked(&spec)
    }
}

/// Fourier coefficients `û_n`, `n = -N/2 ..= N/2 - 1`, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Spectrum with the listed `(k, û_k)` entries and zeros elsewhere.
    pub fn from_modes(grid: &Grid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(grid);
        for &(k, c) in modes {
            s.set(k, c)?;
        }
        Ok(s)
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, k: i64, c: Complex64) -> Result<()> {
        let idx = self
            .grid
            .index_of(k)
            .ok_or_else(|| Error::InvalidGrid(format!("mode {k} not representable")))?;
        self.coeffs[idx] = c;
        Ok(())
    }

    /// `(k, û_k)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.grid.wavenumber(i), c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest deviation from `û_{-n} = conj(û_n)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut defect = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            defect = defect.max((self.coeffs[i] - self.coeffs[n - i].conj()).norm());
        }
        defect
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

pub fn analyze(u: &PeriodicField) -> Spectrum {
    let n = u.grid.len();
    let mut buf: Vec<Complex64> = u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    u.grid.forward.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for c in &mut buf {
        *c *= inv_n;
    }
    Spectrum {
        grid: u.grid.clone(),
        coeffs: buf,
    }
}

pub fn synthesize(c: &Spectrum) -> Result<PeriodicField> {
    let defect = c.hermitian_defect();
    let scale = c.max_abs();
    if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(Error::ComplexOutput(defect));
    }
    Ok(synthesize_unchecked(c))
}

pub(crate) fn synthesize_unchecked(c: &Spectrum) -> PeriodicField {
    let mut buf = c.coeffs.clone();
    c.grid.inverse.process(&mut buf);
    PeriodicField::from_raw(&c.grid, buf.into_iter().map(|z| z.re).collect())
}

/// Mode-wise multiplication by `m(k)` on resolved modes; the Nyquist mode is
/// dropped.
pub(crate) fn multiply_spectrum(
    spec: &Spectrum,
    m: impl Fn(i64) -> Result<Complex64>,
) -> Result<Spectrum> {
    let grid = &spec.grid;
    let kmax = grid.max_resolved();
    let mut out = spec.clone();
    for (idx, c) in out.coeffs.iter_mut().enumerate() {
        let k = grid.wavenumber(idx);
        *c = if k.abs() > kmax {
            Complex64::new(0.0, 0.0)
        } else {
            *c * m(k)?
        };
    }
    Ok(out)
}

/// Coefficients this far below the largest one are rounding noise and are
/// dropped before a symbol amplifies them.
const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

pub fn apply_symbol(a: &SymbolSpec, u: &PeriodicField) -> Result<PeriodicField> {
    let mut spec = analyze(u);
    let floor = NOISE_FLOOR * spec.max_abs();
    for c in spec.coeffs.iter_mut() {
        if c.norm() <= floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let spec = multiply_spectrum(&spec, |k| a.value(k))?;
    Ok(synthesize_unchecked(&spec))
}

pub fn solve_symbol(a: &SymbolSpec, w: &PeriodicField) -> Result<PeriodicField> {
    Ok(synthesize_unchecked(&solve_symbol_spectrum(a, &analyze(w))?))
}

pub(crate) fn solve_symbol_spectrum(a: &SymbolSpec, spec: &Spectrum) -> Result<Spectrum> {
    let grid = &spec.grid;
    let scale = spec.max_abs();
    if a.invertible_on() == InvertibleOn::MeanZeroOnly {
        let l2: f64 = spec.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mean = spec.coeffs[0].norm();
        if mean > MEAN_ZERO_TOL * l2 {
            return Err(Error::ZeroModeNotInvertible(mean));
        }
    }
    let kmax = grid.max_resolved();
    let mut out = spec.clone();
    for (idx, c) in out.coeffs.iter_mut().enumerate() {
        let k = grid.wavenumber(idx);
        if k.abs() > kmax {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ak = a.value(k)?;
        if ak == Complex64::new(0.0, 0.0) {
            if k != 0 && c.norm() > POPULATED_REL * scale {
                return Err(Error::SingularSymbol(k));
            }
            if k == 0 && a.invertible_on() == InvertibleOn::AllModes && c.norm() > POPULATED_REL * scale
            {
                return Err(Error::SingularSymbol(0));
            }
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= ak;
        }
    }
    Ok(out)
}

/// `(Σ (1+n²)^q |û_n|²)^{1/2}` over every mode on the grid.
pub fn sobolev_norm(u: &PeriodicField, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::InvalidExponent(q));
    }
    Ok(spectrum_sobolev_norm(&analyze(u), q))
}

pub(crate) fn spectrum_sobolev_norm(spec: &Spectrum, q: f64) -> f64 {
    let n = spec.grid.len() as i64;
    spec.coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut k = spec.grid.wavenumber(i);
            if k == -n / 2 {
                k = n / 2;
            }
            let w = if q == 0.0 {
                1.0
            } else {
                (1.0 + (k * k) as f64).powf(q)
            };
            w * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// `(∫ (Au) u dx)^{1/2} = (2π Σ a(n) |û_n|²)^{1/2}`.
pub fn energy_norm(u: &PeriodicField, a: &SymbolSpec) -> Result<f64> {
    if !a.is_symmetric() {
        return Err(Error::NonSymmetricSymbol);
    }
    let spec = analyze(u);
    let scale = spec.max_abs();
    let kmax = spec.grid.max_resolved();
    let mut sum = 0.0;
    for (k, c) in spec.modes() {
        if k.abs() > kmax {
            continue;
        }
        let ak = a.value(k)?.re;
        if ak < 0.0 && c.norm() > POPULATED_REL * scale {
            return Err(Error::IndefiniteInertia(k));
        }
        sum += ak * c.norm_sqr();
    }
    Ok((2.0 * PI * sum.max(0.0)).sqrt())
}

/// `(∫ |u|² dx)^{1/2}`.
pub fn l2_norm(u: &PeriodicField) -> f64 {
    let sum: f64 = u.values.iter().map(|v| v * v).sum();
    (2.0 * PI * sum / u.grid.len() as f64).sqrt()
}

/// `Λ^σ = op((1+k²)^{σ/2})` on resolved modes.
pub fn bessel_potential(u: &PeriodicField, sigma: f64) -> PeriodicField {
    let spec = multiply_spectrum(&analyze(u), |k| {
        Ok(Complex64::new((1.0 + (k * k) as f64).powf(0.5 * sigma), 0.0))
    })
    .expect("bessel multiplier is total");
    synthesize_unchecked(&spec)
}
