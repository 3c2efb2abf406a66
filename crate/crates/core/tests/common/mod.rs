//! Independent oracles: exact trigonometric-polynomial arithmetic on
//! coefficient maps, evaluated pointwise. Nothing here touches the FFT.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

#[derive(Clone, Debug, Default)]
pub struct TrigPoly {
    pub c: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    /// `Σ a cos nx + b sin nx`.
    pub fn from_modes(modes: &[(u32, f64, f64)]) -> Self {
        let mut p = Self::default();
        for &(n, a, b) in modes {
            let n = i64::from(n);
            if n == 0 {
                p.add_coeff(0, Complex64::new(a, 0.0));
            } else {
                p.add_coeff(n, Complex64::new(a / 2.0, -b / 2.0));
                p.add_coeff(-n, Complex64::new(a / 2.0, b / 2.0));
            }
        }
        p
    }

    fn add_coeff(&mut self, k: i64, v: Complex64) {
        *self.c.entry(k).or_default() += v;
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.c.get(&k).copied().unwrap_or_default()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (&k, &v) in &o.c {
            p.add_coeff(k, v);
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|(&k, &v)| (k, v * s)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::default();
        for (&k1, &v1) in &self.c {
            for (&k2, &v2) in &o.c {
                p.add_coeff(k1 + k2, v1 * v2);
            }
        }
        p
    }

    pub fn deriv(&self) -> Self {
        self.multiplier(|k| Complex64::new(0.0, k as f64))
    }

    pub fn multiplier(&self, m: impl Fn(i64) -> Complex64) -> Self {
        Self {
            c: self.c.iter().map(|(&k, &v)| (k, v * m(k))).collect(),
        }
    }

    pub fn truncate(&self, kmax: i64) -> Self {
        Self {
            c: self
                .c
                .iter()
                .filter(|(k, _)| k.abs() <= kmax)
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c
            .iter()
            .map(|(&k, &v)| (v * Complex64::new(0.0, k as f64 * x).exp()).re)
            .sum()
    }

    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| self.eval(2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    /// `(Σ (1 + k²)^q |c_k|²)^{1/2}`.
    pub fn sobolev(&self, q: f64) -> f64 {
        self.c
            .iter()
            .map(|(&k, v)| (1.0 + (k * k) as f64).powf(q) * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `∫ p² dx` over one period.
    pub fn l2_sq(&self) -> f64 {
        2.0 * PI * self.c.values().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

pub fn bessel(s: f64) -> impl Fn(i64) -> Complex64 + Copy {
    move |k| Complex64::new((1.0 + (k * k) as f64).powf(s), 0.0)
}

pub fn inverse(a: impl Fn(i64) -> Complex64 + Copy) -> impl Fn(i64) -> Complex64 + Copy {
    move |k| Complex64::new(1.0, 0.0) / a(k)
}

/// `-A^{-1} P[u (Au)_x + 2 (Au) u_x]`.
pub fn euler_rhs(u: &TrigPoly, a: impl Fn(i64) -> Complex64 + Copy, kmax: i64) -> TrigPoly {
    let m = u.multiplier(a);
    let w = u.mul(&m.deriv()).add(&m.mul(&u.deriv()).scale(2.0));
    w.truncate(kmax).multiplier(inverse(a)).scale(-1.0)
}

/// `-P[m_x u + 2 m u_x]`.
pub fn ep_rhs(m: &TrigPoly, u: &TrigPoly, kmax: i64) -> TrigPoly {
    m.deriv()
        .mul(u)
        .add(&m.mul(&u.deriv()).scale(2.0))
        .truncate(kmax)
        .scale(-1.0)
}

/// `A^{-1} P{A(u u_x) - u A(u_x) - 2 (Au) u_x}`.
pub fn s_operator(u: &TrigPoly, a: impl Fn(i64) -> Complex64 + Copy, kmax: i64) -> TrigPoly {
    let ux = u.deriv();
    let w = u
        .mul(&ux)
        .multiplier(a)
        .sub(&u.mul(&ux.multiplier(a)))
        .sub(&u.multiplier(a).mul(&ux).scale(2.0));
    w.truncate(kmax).multiplier(inverse(a))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Minimum of `f` over `samples` equally spaced points.
pub fn dense_min(f: impl Fn(f64) -> f64, samples: usize) -> f64 {
    (0..samples)
        .map(|i| f(2.0 * PI * i as f64 / samples as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Refines a dense-sampling minimum by golden-section search around it.
pub fn refined_min(f: impl Fn(f64) -> f64, samples: usize) -> f64 {
    let h = 2.0 * PI / samples as f64;
    let start = (0..samples)
        .map(|i| i as f64 * h)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    let (mut lo, mut hi) = (start - h, start + h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    f(0.5 * (lo + hi))
}
