//! Fisher-information limits for resolving two thermal point sources with an
//! interferometer array.
//!
//! The crate is organized bottom-up:
//!
//! - [`scene`]: observation geometry and the source-position to phase map.
//! - [`gaussian`]: ladder-ordered Gaussian states and passive mode transforms.
//! - [`fisher`]: quantum Fisher information and symmetric logarithmic
//!   derivatives, both the generic covariance-matrix formulas and closed forms
//!   for the two-telescope state.
//! - [`povm`]: photon-count statistics of the beam-splitter + number-resolving
//!   measurement, including detector truncation and centroid misalignment.
//! - [`oracle`]: Monte-Carlo photon-count sampler used to cross-check every
//!   probability computed elsewhere.
//! - [`limits`]: weak-source formulas, the conventional fixed-delay
//!   measurement, and the dirty-beam toy model.
//! - [`multi`]: covariance and numerical QFI for many sources and detectors.
//!
//! Phases are proportional to source positions through the single scale
//! factor `u0 = k B cos(tilt) / s0`; with `u0 = 1` every Fisher information is
//! reported in units of `k^2 B^2 / s0^2`.

pub mod error;
pub mod fisher;
pub mod gaussian;
pub mod limits;
pub mod multi;
pub mod oracle;
pub mod povm;
pub mod quadrature;
pub mod scene;

pub use error::{Error, Result};
pub use num_complex::Complex64;
