//! Points in the time-frequency plane ℝ^{2d}.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TfError {
    #[error("time and frequency parts must have equal dimension (got {x} and {xi})")]
    DimensionMismatch { x: usize, xi: usize },
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// A point z = (x, ξ) in the time-frequency plane ℝ^{2d}: `x` is the time
/// shift, `xi` the frequency shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl TfPoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self, TfError> {
        if x.is_empty() {
            return Err(TfError::ZeroDimension);
        }
        if x.len() != xi.len() {
            return Err(TfError::DimensionMismatch {
                x: x.len(),
                xi: xi.len(),
            });
        }
        if !x.iter().chain(xi.iter()).all(|v| v.is_finite()) {
            return Err(TfError::NonFinite);
        }
        Ok(Self { x, xi })
    }

    /// The point (x, ξ) for d = 1.
    pub fn new_1d(x: f64, xi: f64) -> Result<Self, TfError> {
        Self::new(vec![x], vec![xi])
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            x: vec![0.0; dim],
            xi: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x
            .iter()
            .chain(self.xi.iter())
            .map(|v| v * v)
            .sum::<f64>()
    }

    /// Euclidean norm |z| = sqrt(|x|² + |ξ|²).
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// x · ξ, the symplectic-phase dot product.
    pub fn x_dot_xi(&self) -> f64 {
        self.x.iter().zip(&self.xi).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &TfPoint) -> TfPoint {
        debug_assert_eq!(self.dim(), other.dim());
        TfPoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &TfPoint) -> TfPoint {
        debug_assert_eq!(self.dim(), other.dim());
        TfPoint {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TfPoint {
        TfPoint {
            x: self.x.iter().map(|v| v * s).collect(),
            xi: self.xi.iter().map(|v| v * s).collect(),
        }
    }

    pub fn neg(&self) -> TfPoint {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            TfPoint::new(vec![f64::NAN], vec![0.0]).unwrap_err(),
            TfError::NonFinite
        );
        assert_eq!(
            TfPoint::new(vec![0.0], vec![f64::INFINITY]).unwrap_err(),
            TfError::NonFinite
        );
    }

    #[test]
    fn rejects_mismatched_dims() {
        assert!(matches!(
            TfPoint::new(vec![0.0, 1.0], vec![0.0]),
            Err(TfError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_is_euclidean() {
        let z = TfPoint::new_1d(3.0, 4.0).unwrap();
        assert_eq!(z.norm(), 5.0);
        assert_eq!(TfPoint::origin(2).norm(), 0.0);
    }

    #[test]
    fn arithmetic() {
        let a = TfPoint::new_1d(1.0, 2.0).unwrap();
        let b = TfPoint::new_1d(0.5, -1.0).unwrap();
        let d = a.sub(&b);
        assert_eq!(d.x[0], 0.5);
        assert_eq!(d.xi[0], 3.0);
        assert_eq!(a.x_dot_xi(), 2.0);
        assert_eq!(a.neg().x[0], -1.0);
    }
}
