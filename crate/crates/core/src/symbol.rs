//! Fourier-multiplier inertia operators `A = op(a(k))`.

use std::fmt;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvertibleOn {
    AllModes,
    MeanZeroOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolKind {
    /// `(1+k²)^s`, the Bessel potential `Λ^{2s}`.
    Bessel { s: f64 },
    /// `(1+k²)^κ` for integer `κ ≥ 1`, i.e. `(1 - D²)^κ`.
    HelmholtzPower { power: u32 },
    /// `|k|`, the operator `HD` of the Constantin–Lax–Majda equation.
    Clm,
    /// `ik`; not symmetric.
    Derivative,
    /// `-i sign(k)`; not symmetric.
    Hilbert,
    Identity,
    /// Real even symbol tabulated as `a(|k|)` for `|k| = 0, 1, ...`.
    Custom { table: Vec<f64> },
}

/// A Fourier multiplier together with its declared order and the subspace on
/// which it may be inverted.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpec {
    kind: SymbolKind,
    order: f64,
    invertible_on: InvertibleOn,
}

/// Measured growth constants of a symbol over the resolved modes of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolCertificate {
    /// `max |a(k)| / (1+k²)^{r/2}`.
    pub order_constant: f64,
    /// `max |1/a(k)| (1+k²)^{r/2}` for symbols invertible on all modes.
    pub inverse_constant: Option<f64>,
}

impl SymbolSpec {
    pub fn bessel(s: f64) -> Result<Self> {
        if !(s >= 0.5) || !s.is_finite() {
            return Err(Error::InvalidSymbol(format!("bessel order s = {s} must be >= 1/2")));
        }
        Ok(Self {
            kind: SymbolKind::Bessel { s },
            order: 2.0 * s,
            invertible_on: InvertibleOn::AllModes,
        })
    }

    pub fn helmholtz_power(power: u32) -> Result<Self> {
        if power < 1 {
            return Err(Error::InvalidSymbol("helmholtz power must be >= 1".into()));
        }
        Ok(Self {
            kind: SymbolKind::HelmholtzPower { power },
            order: 2.0 * power as f64,
            invertible_on: InvertibleOn::AllModes,
        })
    }

    pub fn clm() -> Self {
        Self {
            kind: SymbolKind::Clm,
            order: 1.0,
            invertible_on: InvertibleOn::MeanZeroOnly,
        }
    }

    pub fn derivative() -> Self {
        Self {
            kind: SymbolKind::Derivative,
            order: 1.0,
            invertible_on: InvertibleOn::MeanZeroOnly,
        }
    }

    pub fn hilbert() -> Self {
        Self {
            kind: SymbolKind::Hilbert,
            order: 0.0,
            invertible_on: InvertibleOn::MeanZeroOnly,
        }
    }

    pub fn identity() -> Self {
        Self {
            kind: SymbolKind::Identity,
            order: 0.0,
            invertible_on: InvertibleOn::AllModes,
        }
    }

    pub fn custom(table: Vec<f64>, order: f64, invertible_on: InvertibleOn) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidSymbol("empty symbol table".into()));
        }
        if let Some(k) = table.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSymbol(format!("non-finite table entry at k = {k}")));
        }
        if !order.is_finite() {
            return Err(Error::InvalidSymbol("order must be finite".into()));
        }
        if invertible_on == InvertibleOn::AllModes {
            if let Some(k) = table.iter().position(|&v| v == 0.0) {
                return Err(Error::InvalidSymbol(format!(
                    "a({k}) = 0 but symbol declared invertible on all modes"
                )));
            }
        }
        Ok(Self {
            kind: SymbolKind::Custom { table },
            order,
            invertible_on,
        })
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn invertible_on(&self) -> InvertibleOn {
        self.invertible_on
    }

    /// Real-valued symbols define symmetric operators.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, SymbolKind::Derivative | SymbolKind::Hilbert)
    }

    /// The Sobolev exponent `s` of the induced metric, `r/2`.
    pub fn metric_exponent(&self) -> f64 {
        self.order / 2.0
    }

    /// Default working regularity `q = 2s + 1 = r + 1`.
    pub fn default_q_work(&self) -> f64 {
        self.order + 1.0
    }

    pub fn value(&self, k: i64) -> Result<Complex64> {
        let kf = k as f64;
        let re = |v: f64| Complex64::new(v, 0.0);
        Ok(match &self.kind {
            SymbolKind::Bessel { s } => re((1.0 + kf * kf).powf(*s)),
            SymbolKind::HelmholtzPower { power } => re((1.0 + kf * kf).powi(*power as i32)),
            SymbolKind::Clm => re(kf.abs()),
            SymbolKind::Derivative => Complex64::new(0.0, kf),
            SymbolKind::Hilbert => Complex64::new(0.0, -(k.signum() as f64)),
            SymbolKind::Identity => re(1.0),
            SymbolKind::Custom { table } => {
                let idx = k.unsigned_abs() as usize;
                re(*table.get(idx).ok_or_else(|| {
                    Error::InvalidSymbol(format!(
                        "symbol table has {} entries, mode {k} requested",
                        table.len()
                    ))
                })?)
            }
        })
    }

    /// Measures the order constants over `|k| <= grid.max_resolved()` and
    /// checks the realness and invertibility contracts.
    pub fn certify(&self, grid: &Grid) -> Result<SymbolCertificate> {
        let kmax = grid.max_resolved();
        let half_order = self.order / 2.0;
        let mut order_constant: f64 = 0.0;
        let mut inverse_constant: f64 = 0.0;
        for k in -kmax..=kmax {
            let a = self.value(k)?;
            if self.is_symmetric() && a.im != 0.0 {
                return Err(Error::NonSymmetricSymbol);
            }
            let weight = (1.0 + (k * k) as f64).powf(half_order);
            order_constant = order_constant.max(a.norm() / weight);
            if self.invertible_on == InvertibleOn::AllModes {
                if a.norm() == 0.0 {
                    return Err(Error::SingularSymbol(k));
                }
                inverse_constant = inverse_constant.max(weight / a.norm());
            }
        }
        if !order_constant.is_finite() || !inverse_constant.is_finite() {
            return Err(Error::InvalidSymbol("unbounded order constant".into()));
        }
        Ok(SymbolCertificate {
            order_constant,
            inverse_constant: (self.invertible_on == InvertibleOn::AllModes)
                .then_some(inverse_constant),
        })
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SymbolKind::Bessel { s } => write!(f, "bessel({s})"),
            SymbolKind::HelmholtzPower { power } => write!(f, "helmholtz_power({power})"),
            SymbolKind::Clm => write!(f, "clm"),
            SymbolKind::Derivative => write!(f, "derivative"),
            SymbolKind::Hilbert => write!(f, "hilbert"),
            SymbolKind::Identity => write!(f, "identity"),
            SymbolKind::Custom { table } => write!(f, "custom[{} entries]", table.len()),
        }
    }
}
