//! Uniform tolerance policy.
//!
//! Every approximate comparison in the crate is routed through a [`Tolerance`]
//! value so that the slack used for matrix equality, hyperbolic distances and
//! hash quantization is configured in exactly one place.

use thiserror::Error;

/// Comparison slacks shared by the whole pipeline.
///
/// `eps_equal` is dimensionless (matrix entries, determinants, traces),
/// `eps_geom` is in units of hyperbolic length, and `quantum` is the cell
/// size used when quantizing canonical hash keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps_equal: f64,
    pub eps_geom: f64,
    pub quantum: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ToleranceError {
    #[error("eps_equal must lie in (0, 1e-3), got {0}")]
    BadEpsEqual(f64),
    #[error("eps_geom must lie in (0, 1e-3), got {0}")]
    BadEpsGeom(f64),
    #[error("quantum must be at least 4*eps_geom = {min}, got {got}")]
    BadQuantum { min: f64, got: f64 },
}

impl Tolerance {
    pub const DEFAULT_EPS_EQUAL: f64 = 1e-9;
    pub const DEFAULT_EPS_GEOM: f64 = 1e-9;
    pub const DEFAULT_QUANTUM: f64 = 1e-6;

    pub fn new(eps_equal: f64, eps_geom: f64, quantum: f64) -> Result<Self, ToleranceError> {
        if !(eps_equal > 0.0 && eps_equal < 1e-3) {
            return Err(ToleranceError::BadEpsEqual(eps_equal));
        }
        if !(eps_geom > 0.0 && eps_geom < 1e-3) {
            return Err(ToleranceError::BadEpsGeom(eps_geom));
        }
        if quantum < 4.0 * eps_geom {
            return Err(ToleranceError::BadQuantum {
                min: 4.0 * eps_geom,
                got: quantum,
            });
        }
        Ok(Self {
            eps_equal,
            eps_geom,
            quantum,
        })
    }

    /// Two dimensionless quantities considered equal.
    #[inline]
    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eps_equal
    }

    /// Two hyperbolic lengths considered equal.
    #[inline]
    pub fn geom_eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eps_geom
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_equal: Self::DEFAULT_EPS_EQUAL,
            eps_geom: Self::DEFAULT_EPS_GEOM,
            quantum: Self::DEFAULT_QUANTUM,
        }
    }
}
