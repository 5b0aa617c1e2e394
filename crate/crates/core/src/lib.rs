//! Numerical laboratory for Schrödinger dynamics with a harmonic potential that
//! decays like `k t^-2`: classical flow, spectral propagators and wave-operator
//! experiments.

pub mod classical;
pub mod error;
pub mod io;
pub mod model;
pub mod propagators;
pub mod quadrature;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/classical.md")]
    mod classical {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/propagators.md")]
    mod propagators {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
