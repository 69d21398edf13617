//! Numerical toolkit for slowly driven linear evolutions y' = T A(t) y:
//! dense complex kernels, time-dependent operator families, contour-integral
//! spectral projections, adiabatic comparison dynamics and their defect
//! metrics, higher-order superadiabatic projections, and a discrete-ordinates
//! slab transport model exercising all of it.

pub mod error;
pub mod linop;
pub mod par;
pub mod family;
pub mod evolution;
pub mod spectra;
pub mod riesz;
pub mod adiabatic;
pub mod superadiabatic;
pub mod transport;
pub mod gallery;

pub use error::{AdiaError, Result};
pub use linop::{C64, CMat, CVec};
