//! Spectra of the locally linear embedding (LLE) matrix on the unit interval and
//! unit disc, and the analytic spectrum of the degenerate operator that the
//! scaled matrix `eps^-2 (I - W)` approximates.
//!
//! The finite-sample side lives in [`sampling`] and [`lle`]. The analytic side
//! is built from [`coefficients`], [`frobenius`] and [`matching`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod coefficients;
pub mod error;
pub mod exec;
pub mod frobenius;
pub mod jet;
pub mod krylov;
pub mod lle;
pub mod matching;
pub mod quadrature;
pub mod roots;
pub mod sampling;
pub mod sparse;

pub use error::{Error, Result};
pub use exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Interval,
    Disc,
}

impl Domain {
    /// Ambient dimension.
    pub fn dim(self) -> usize {
        match self {
            Domain::Interval => 1,
            Domain::Disc => 2,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::Interval => "interval",
            Domain::Disc => "disc",
        })
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interval" => Ok(Domain::Interval),
            "disc" | "disk" => Ok(Domain::Disc),
            _ => Err(Error::InvalidArgument(format!("unknown domain `{s}`"))),
        }
    }
}
