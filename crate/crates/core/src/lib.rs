//! Acoustic far-field operators: forward solvers, spectral diagnostics and
//! phase retrieval from phaseless far-field data.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: Bessel, Hankel and Legendre functions.
//! - [`geometry`]: direction quadratures on S² and S¹, boundary curves.
//! - [`forward`]: Mie series and a Nyström solver producing sampled far-field kernels.
//! - [`ffop`]: the discretised far-field operator, its spectrum and diagnostics.
//! - [`phaseless`]: phaseless datasets and kernel retrieval.
//! - [`cli`]: scenario configs, the bundled corpus and the runner behind the `ffspec` binary.

pub mod cli;
pub mod error;
pub mod ffop;
pub mod forward;
pub mod geometry;
pub mod phaseless;
pub mod specfun;

pub use error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = faer::Mat<num_complex::Complex64>;

/// Spatial dimension of a scattering problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Dimension {
    Two,
    Three,
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.as_usize() as u8
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(format!("dimension must be 2 or 3, got {other}")),
        }
    }
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}
