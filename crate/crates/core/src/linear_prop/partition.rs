use crate::error::{Error, Result};
use crate::measures::node_index;
use crate::scalar::Real;

/// Strictly increasing time nodes `t_0 < … < t_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<T> {
    nodes: Vec<T>,
}

impl<T: Real> Partition<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("a partition needs at least two nodes".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("partition nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// `steps` equal subintervals of `[start, end]`.
    pub fn uniform(start: T, end: T, steps: usize) -> Result<Self> {
        if steps == 0 || !(end > start) {
            return Err(Error::InvalidArgument(format!(
                "uniform partition of [{start}, {end}] with {steps} steps"
            )));
        }
        let dt = (end - start) / T::from_usize_exact(steps);
        let mut nodes: Vec<T> = (0..steps).map(|k| start + dt * T::from_usize_exact(k)).collect();
        nodes.push(end);
        Self::new(nodes)
    }

    /// Uniform partition whose mesh does not exceed `delta`.
    pub fn with_mesh(start: T, end: T, delta: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidArgument("mesh must be positive".into()));
        }
        let ratio = ((end - start) / delta).to_f64_lossy();
        let steps = (ratio - 1e-9).ceil().max(1.0) as usize;
        Self::uniform(start, end, steps)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> T {
        self.nodes[0]
    }

    pub fn end(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn dt(&self, j: usize) -> T {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// `δ(Δ) = max Δt_j`
    pub fn mesh(&self) -> T {
        (0..self.steps()).map(|j| self.dt(j)).fold(T::zero(), T::max)
    }

    pub fn index_of(&self, t: T) -> Result<usize> {
        node_index(&self.nodes, t)
    }

    /// Midpoints inserted into every subinterval.
    pub fn refined(&self) -> Self {
        let half = T::lit(0.5);
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(half * (w[0] + w[1]));
        }
        nodes.push(self.end());
        Self { nodes }
    }

    /// Nodes `a..=b`.
    pub fn slice(&self, a: usize, b: usize) -> Result<Self> {
        if b >= self.nodes.len() || a >= b {
            return Err(Error::InvalidArgument(format!("partition slice {a}..={b}")));
        }
        Ok(Self {
            nodes: self.nodes[a..=b].to_vec(),
        })
    }
}
