//! Decision vectors, origin-centered Euclidean balls and projection onto them.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Absolute slack on the norm used by feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// A dense point in R^n.
#[derive(Clone, PartialEq, Default)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "decision vector must have n >= 1".into(),
            ));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "entry {i} is not finite ({})",
                entries[i]
            )));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    /// Unit basis vector e_i, with e_0 the zero vector and e_1..e_n the axes.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        if i > 0 {
            v.0[i - 1] = 1.0;
        }
        v
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

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
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
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    /// In-place `self += factor * other`.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    /// Sum of a non-empty collection of equally sized vectors.
    pub fn sum<'a>(n: usize, items: impl IntoIterator<Item = &'a DecisionVector>) -> Self {
        let mut acc = Self::zeros(n);
        for v in items {
            acc.axpy(1.0, v);
        }
        acc
    }
}

impl From<Vec<f64>> for DecisionVector {
    fn from(entries: Vec<f64>) -> Self {
        Self(entries)
    }
}

impl Index<usize> for DecisionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for DecisionVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl fmt::Debug for DecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// A closed convex decision set that supports Euclidean projection.
pub trait ConvexSet {
    fn project(&self, y: &DecisionVector) -> Result<DecisionVector>;

    fn contains(&self, x: &DecisionVector) -> bool;
}

/// Euclidean ball of the given radius centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallDomain {
    radius: f64,
}

impl BallDomain {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn unit() -> Self {
        Self { radius: 1.0 }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The shrunken set `(1 - delta/r) X` on which probe offsets of length
    /// `delta` stay feasible, given that `r B^n` is contained in `X`.
    pub fn shrink(&self, delta: f64, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Parameter(format!(
                "inner radius r must be positive, got {r}"
            )));
        }
        if r > self.radius {
            return Err(Error::Parameter(format!(
                "inner radius r = {r} exceeds the domain radius {}",
                self.radius
            )));
        }
        if !(delta > 0.0 && delta < r) {
            return Err(Error::Parameter(format!(
                "delta must satisfy 0 < delta < r = {r}, got {delta}"
            )));
        }
        Ok(Self {
            radius: (1.0 - delta / r) * self.radius,
        })
    }
}

impl ConvexSet for BallDomain {
    fn project(&self, y: &DecisionVector) -> Result<DecisionVector> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot project non-finite point {y:?}"
            )));
        }
        let norm = y.norm();
        if norm <= self.radius {
            return Ok(y.clone());
        }
        let mut scale = self.radius / norm;
        let mut p = y.scaled(scale);
        // Rounding can leave the scaled point a few ulps outside; pull it in
        // so that projecting again is the identity.
        while p.norm() > self.radius {
            scale *= 1.0 - f64::EPSILON;
            p = y.scaled(scale);
        }
        Ok(p)
    }

    fn contains(&self, x: &DecisionVector) -> bool {
        x.norm() <= self.radius + FEASIBILITY_TOL
    }
}
