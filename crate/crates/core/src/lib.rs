//! Pseudospectral simulation of right-invariant geodesic flows on the
//! diffeomorphism group of the circle.
//!
//! The inertia operator is a Fourier multiplier `A = op(a(k))`. Flows can be
//! integrated in the Eulerian frame (the Euler–Arnold equation for `u`) or in
//! the Lagrangian frame (the pair `(phi, v)` driven by the geodesic spray), and
//! every run is instrumented with conservation and blow-up monitors.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod lagrangian;
pub mod mollifier;
pub mod solver;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use spectral::{Grid, PeriodicField, Spectrum};
pub use symbol::{InvertibleOn, SymbolKind, SymbolSpec};
