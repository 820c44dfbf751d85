use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::measures::Grid;
use crate::scalar::Real;

/// Negative-weight tolerance for the probability-measure role.
pub const NEGATIVE_WEIGHT_TOL: f64 = 1e-12;
/// Total-mass tolerance for the probability-measure role.
pub const MASS_TOL: f64 = 1e-9;

/// Node masses on a grid; a probability measure or a signed dual vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure<T> {
    grid: Grid<T>,
    weights: Vec<T>,
}

impl<T: Real> GridMeasure<T> {
    pub fn new(grid: Grid<T>, weights: Vec<T>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} weights for a grid of {} nodes",
                weights.len(),
                grid.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Invariant(format!("non-finite weight at node {i}")));
        }
        Ok(Self { grid, weights })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            weights: vec![T::zero(); grid.len()],
            grid,
        }
    }

    /// Unit mass at the node nearest to `x`.
    pub fn dirac(grid: Grid<T>, x: T) -> Result<Self> {
        let i = grid
            .nearest(x)
            .ok_or_else(|| Error::InvalidArgument(format!("point {x} lies outside the grid")))?;
        let mut m = Self::zeros(grid);
        m.weights[i] = T::one();
        Ok(m)
    }

    /// Discretizes a nonnegative density (`w_i = p(x_i)·h`) and normalizes to unit mass.
    pub fn from_density(grid: Grid<T>, density: impl Fn(T) -> T) -> Result<Self> {
        grid.require_1d("from_density")?;
        let h = grid.spacing();
        let weights: Vec<T> = grid.nodes().into_iter().map(|x| density(x) * h).collect();
        if weights.iter().any(|w| *w < T::zero() || !w.is_finite()) {
            return Err(Error::Invariant("density must be finite and nonnegative".into()));
        }
        let mass: T = weights.iter().copied().sum();
        if mass <= T::zero() {
            return Err(Error::Invariant("density has no mass on the grid".into()));
        }
        Self::new(grid, weights.into_iter().map(|w| w / mass).collect())
    }

    /// Discretized normal law, normalized to unit mass on the grid.
    pub fn gaussian(grid: Grid<T>, mean: T, std: T) -> Result<Self> {
        if std <= T::zero() {
            return Err(Error::InvalidArgument(format!("standard deviation {std} must be positive")));
        }
        let half = T::lit(0.5);
        Self::from_density(grid, |x| {
            let z = (x - mean) / std;
            (-half * z * z).exp()
        })
    }

    /// Zero-mass signed measure `−p'` of a normal density, scaled to unit first moment.
    pub fn gaussian_dipole(grid: Grid<T>, center: T, std: T) -> Result<Self> {
        grid.require_1d("gaussian_dipole")?;
        if std <= T::zero() {
            return Err(Error::InvalidArgument(format!("standard deviation {std} must be positive")));
        }
        let half = T::lit(0.5);
        let nodes = grid.nodes();
        let p: Vec<T> = nodes
            .iter()
            .map(|&x| {
                let z = (x - center) / std;
                (-half * z * z).exp()
            })
            .collect();
        let total: T = p.iter().copied().sum();
        let mut w: Vec<T> = p
            .iter()
            .zip(&nodes)
            .map(|(&pi, &x)| (x - center) * pi)
            .collect();
        let mass: T = w.iter().copied().sum();
        for (wi, &pi) in w.iter_mut().zip(&p) {
            *wi = *wi - mass * pi / total;
        }
        let first: T = w.iter().zip(&nodes).map(|(&a, &x)| a * x).sum();
        Self::new(grid, w.into_iter().map(|a| a / first).collect())
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    pub fn mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// First moment `Σ x_i w_i` (1-d grids).
    pub fn mean(&self) -> T {
        let g = &self.grid;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| g.node(i) * w)
            .sum()
    }

    /// Central second moment of the normalized measure (1-d grids).
    pub fn variance(&self) -> T {
        let mass = self.mass();
        let m = self.mean() / mass;
        let g = &self.grid;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let d = g.node(i) - m;
                d * d * w
            })
            .sum::<T>()
            / mass
    }

    pub fn min_weight(&self) -> T {
        self.weights.iter().copied().fold(T::infinity(), T::min)
    }

    /// Mass within `cells` nodes of either end of a 1-d grid.
    pub fn boundary_mass(&self, cells: usize) -> T {
        let n = self.weights.len();
        let c = cells.min(n / 2);
        self.weights[..c]
            .iter()
            .chain(&self.weights[n - c..])
            .map(|w| w.abs())
            .sum()
    }

    pub fn require_probability(&self) -> Result<()> {
        let min = self.min_weight();
        if min < -T::lit(NEGATIVE_WEIGHT_TOL) {
            return Err(Error::Invariant(format!(
                "probability measure has negative weight {min}"
            )));
        }
        let mass = self.mass();
        if (mass - T::one()).abs() > T::lit(MASS_TOL) {
            return Err(Error::Invariant(format!(
                "probability measure has total mass {mass}"
            )));
        }
        Ok(())
    }

    /// `self − other`
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.require_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.grid.require_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            grid: self.grid,
            weights: self.weights.iter().map(|&w| a * w).collect(),
        }
    }

    /// CSV with columns `node_coordinate,weight` (1-d) or `x,y,weight` (2-d).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        if g.dim() == 1 {
            s.push_str("node_coordinate,weight\n");
            for (i, w) in self.weights.iter().enumerate() {
                let _ = writeln!(s, "{:.16e},{:.16e}", g.node(i).to_f64_lossy(), w.to_f64_lossy());
            }
        } else {
            s.push_str("x,y,weight\n");
            let n = g.n();
            for (k, w) in self.weights.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e}",
                    g.node(k / n).to_f64_lossy(),
                    g.node(k % n).to_f64_lossy(),
                    w.to_f64_lossy()
                );
            }
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Reads a 1-d histogram in the format of [`GridMeasure::to_csv`]; node coordinates must match the grid.
    pub fn read_csv(grid: Grid<T>, path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse_csv(grid, std::io::BufReader::new(file))
    }

    pub fn parse_csv(grid: Grid<T>, reader: impl BufRead) -> Result<Self> {
        grid.require_1d("histogram input")?;
        let h = grid.spacing().to_f64_lossy();
        let mut weights = Vec::with_capacity(grid.len());
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> Result<f64> {
                p.ok_or_else(|| Error::Parse(format!("line {}: missing column", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = parse(parts.next())?;
            let w = parse(parts.next())?;
            let i = weights.len();
            if i >= grid.len() || (x - grid.node(i).to_f64_lossy()).abs() > 1e-6 * h {
                return Err(Error::Parse(format!(
                    "line {}: coordinate {x} does not match node {i} of the grid",
                    lineno + 1
                )));
            }
            weights.push(T::lit(w));
        }
        Self::new(grid, weights)
    }
}

/// Node values of a test function with a declared smoothness order `k ∈ {0,1,2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
    order: u8,
}

impl<T: Real> TestFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>, order: u8) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if order > 2 {
            return Err(Error::InvalidArgument(format!("declared order {order} exceeds 2")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("non-finite test-function value at node {i}")));
        }
        Ok(Self { grid, values, order })
    }

    /// Samples `f` at the nodes of a 1-d grid.
    pub fn from_fn(grid: Grid<T>, order: u8, f: impl Fn(T) -> T) -> Result<Self> {
        grid.require_1d("TestFunction::from_fn")?;
        Self::new(grid, grid.nodes().into_iter().map(f).collect(), order)
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self {
            values: vec![c; grid.len()],
            grid,
            order: 2,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Same grid and order, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.grid, values, self.order)
    }

    /// `a·self + b·other`, keeping the smaller declared order.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.grid.require_same(&other.grid)?;
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
            self.order.min(other.order),
        )
    }
}

/// `Σ f_i w_i`
pub fn pair<T: Real>(f: &TestFunction<T>, mu: &GridMeasure<T>) -> Result<T> {
    f.grid().require_same(mu.grid())?;
    Ok(crate::scalar::dot(f.values(), mu.weights()))
}

/// Measures on an increasing time mesh, all sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve<T> {
    times: Vec<T>,
    values: Vec<GridMeasure<T>>,
}

impl<T: Real> Curve<T> {
    pub fn new(times: Vec<T>, values: Vec<GridMeasure<T>>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::Dimension(format!(
                "{} times for {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("curve times must be strictly increasing".into()));
        }
        let g = *values[0].grid();
        for v in &values[1..] {
            g.require_same(v.grid())?;
        }
        Ok(Self { times, values })
    }

    /// The constant curve `μ` on the given times.
    pub fn constant(times: Vec<T>, mu: &GridMeasure<T>) -> Result<Self> {
        let values = vec![mu.clone(); times.len()];
        Self::new(times, values)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[GridMeasure<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<GridMeasure<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.values[0].grid()
    }

    pub fn first(&self) -> &GridMeasure<T> {
        &self.values[0]
    }

    pub fn last(&self) -> &GridMeasure<T> {
        self.values.last().expect("nonempty curve")
    }

    /// Index of the time node equal to `t` (relative tolerance 1e-9 of the span).
    pub fn index_of(&self, t: T) -> Result<usize> {
        node_index(&self.times, t)
    }

    pub fn at(&self, t: T) -> Result<&GridMeasure<T>> {
        Ok(&self.values[self.index_of(t)?])
    }

    /// CSV with columns `time,node,weight` (node coordinate in the second column).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,node,weight\n");
        let g = self.grid();
        for (t, mu) in self.times.iter().zip(&self.values) {
            for (i, w) in mu.weights().iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e}",
                    t.to_f64_lossy(),
                    g.node(i % g.n()).to_f64_lossy(),
                    w.to_f64_lossy()
                );
            }
        }
        s
    }
}

/// Strict lookup of `t` among increasing nodes.
pub fn node_index<T: Real>(nodes: &[T], t: T) -> Result<usize> {
    let span = (nodes[nodes.len() - 1] - nodes[0]).abs().max(T::one());
    let tol = T::lit(1e-9) * span;
    let i = nodes.partition_point(|&s| s < t - tol);
    if i < nodes.len() && (nodes[i] - t).abs() <= tol {
        Ok(i)
    } else {
        Err(Error::NonNodeTime(t.to_f64_lossy()))
    }
}
