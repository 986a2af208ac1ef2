//! Dense Euclidean vectors and the clipping operator.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense point or gradient in `R^d` with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealVector(Vec<f64>);

impl RealVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("vector dimension must be at least 1".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector construction"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Self(vec![0.0; dim])
    }

    /// `scale * e_axis`.
    pub fn basis(dim: usize, axis: usize, scale: f64) -> Self {
        let mut v = Self::zeros(dim);
        v.0[axis] = scale;
        v
    }

    /// Wraps entries produced by library arithmetic. Finiteness is the caller's
    /// responsibility; optimizers check iterates explicitly.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn distance_squared(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }

    pub(crate) fn add_assign_scaled(&mut self, c: f64, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

impl fmt::Debug for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &RealVector {
    type Output = RealVector;

    fn add(self, rhs: &RealVector) -> RealVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &RealVector {
    type Output = RealVector;

    fn sub(self, rhs: &RealVector) -> RealVector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&RealVector> for f64 {
    type Output = RealVector;

    fn mul(self, rhs: &RealVector) -> RealVector {
        rhs.scale(self)
    }
}

impl Neg for &RealVector {
    type Output = RealVector;

    fn neg(self) -> RealVector {
        self.scale(-1.0)
    }
}

/// Euclidean norm.
pub fn norm(v: &RealVector) -> f64 {
    v.0.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Multiplier `min{1, lambda / ‖v‖}` applied by [`clip`], with the conventions
/// `0` for `lambda = 0` and `1` for the zero vector.
pub fn clip_factor(v_norm: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else if v_norm <= lambda {
        1.0
    } else {
        lambda / v_norm
    }
}

/// The exact multiplier [`clip`] applies to `v`: `min{1, lambda/‖v‖}`, lowered
/// by a few ulps when needed so the scaled vector's computed norm is at most
/// `lambda`.
pub fn clip_scale(v: &RealVector, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!("clipping level must be nonnegative, got {lambda}")));
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("clip input"));
    }
    let n = norm(v);
    if n <= lambda {
        return Ok(1.0);
    }
    let mut c = clip_factor(n, lambda);
    while norm(&v.scale(c)) > lambda {
        c = f64::from_bits(c.to_bits() - 1);
    }
    Ok(c)
}

/// `clip(v, lambda) = min{1, lambda/‖v‖} v`.
///
/// The zero vector maps to itself and `lambda = 0` maps everything to zero.
/// `lambda = +inf` is the identity. The result is a fixed point of `clip`.
pub fn clip(v: &RealVector, lambda: f64) -> Result<RealVector> {
    let c = clip_scale(v, lambda)?;
    Ok(if c == 1.0 { v.clone() } else { v.scale(c) })
}
