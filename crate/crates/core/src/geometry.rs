//! Cartesian plane geometry, in km.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    pub fn origin() -> Self {
        Point { x: S::zero(), y: S::zero() }
    }

    pub fn distance(&self, other: &Point<S>) -> S {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Point<S>) -> S {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Maximum absolute per-dimension offset, the cluster-radius metric.
    pub fn chebyshev(&self, other: &Point<S>) -> S {
        let dx = (self.x - other.x).abs();
        let dy = (self.y - other.y).abs();
        dx.max(dy)
    }
}
