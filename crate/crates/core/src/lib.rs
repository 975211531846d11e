//! Growth dynamics of planar domains driven by the dispersionless Toda flows.
//!
//! The crate is `no_std` (it needs `alloc`) and purely numerical:
//!
//! * [`laurent`]: truncated exterior conformal maps and boundary spectral tools;
//! * [`growth`]: Laplacian growth and the higher moment flows, harmonic moments,
//!   the Orlov–Shulman function and the string-equation residual;
//! * [`loewner`]: radial Löwner evolution of slits and driving-function recovery;
//! * [`hydro`]: the rank-one hydrodynamic reduction solved along characteristics;
//! * [`dyson`]: the log-gas whose equilibrium support reproduces both growth modes.
//!
//! File formats, configuration and the command line live in the `todaflow` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dyson;
pub mod fourier;
pub mod growth;
pub mod hydro;
pub mod laurent;
pub mod loewner;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use growth::{FlowKind, FlowSpec, MomentVector, PotentialSpec};
pub use laurent::{BoundarySamples, Grid, LaurentMap, OuterSeries};
pub use loewner::{DrivingFunction, LoewnerFamily};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
