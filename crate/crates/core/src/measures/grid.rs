use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform lattice on `[lower, upper)` (per axis) with nodes `lower + i·h`, `h = (upper − lower)/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    lower: T,
    upper: T,
    n: usize,
    dim: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(lower: T, upper: T, n: usize) -> Result<Self> {
        Self::with_dim(lower, upper, n, 1)
    }

    pub fn new_2d(lower: T, upper: T, n: usize) -> Result<Self> {
        Self::with_dim(lower, upper, n, 2)
    }

    pub fn with_dim(lower: T, upper: T, n: usize, dim: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidGrid(format!(
                "need finite lower < upper, got [{lower}, {upper}]"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes, got {n}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self { lower, upper, n, dim })
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        (self.upper - self.lower) / T::from_usize_exact(self.n)
    }

    /// Coordinate of node `i` along one axis.
    pub fn node(&self, i: usize) -> T {
        self.lower + T::from_usize_exact(i) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Fractional node index of a coordinate.
    pub fn position(&self, x: T) -> T {
        (x - self.lower) / self.spacing()
    }

    /// Index of the node nearest to `x`, if `x` lies within half a cell of the lattice.
    pub fn nearest(&self, x: T) -> Option<usize> {
        let p = self.position(x).round();
        if p < T::zero() || p > T::from_usize_exact(self.n - 1) {
            None
        } else {
            p.to_usize()
        }
    }

    pub fn require_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "grid mismatch: [{}, {}]x{} (dim {}) vs [{}, {}]x{} (dim {})",
                self.lower, self.upper, self.n, self.dim, other.lower, other.upper, other.n, other.dim
            )))
        }
    }

    pub fn require_1d(&self, what: &str) -> Result<()> {
        if self.dim == 1 {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is implemented for 1-d grids only")))
        }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> Grid<U> {
        Grid {
            lower: U::lit(self.lower.to_f64_lossy()),
            upper: U::lit(self.upper.to_f64_lossy()),
            n: self.n,
            dim: self.dim,
        }
    }
}
