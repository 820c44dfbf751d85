use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::linear_prop::Partition;
use crate::measures::{Curve, GridMeasure, TestFunction};
use crate::scalar::Real;

/// Tolerances of the Dormand–Prince integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) integration of `y' = rhs(t, y)` from `t0` to `t1`.
pub fn dopri5<T: Real>(
    mut rhs: impl FnMut(T, &[T]) -> Result<Vec<T>>,
    t0: T,
    t1: T,
    y0: &[T],
    opts: &OdeOptions,
) -> Result<Vec<T>> {
    let span = (t1 - t0).to_f64_lossy();
    if span == 0.0 {
        return Ok(y0.to_vec());
    }
    if span < 0.0 {
        return Err(Error::InvalidArgument("dopri5 integrates forward in time only".into()));
    }
    let mut t = t0.to_f64_lossy();
    let end = t1.to_f64_lossy();
    let mut y = y0.to_vec();
    let mut k1 = rhs(t0, &y)?;
    let scale0 = y.iter().map(|v| v.to_f64_lossy().abs()).fold(0.0, f64::max).max(1.0);
    let deriv0 = k1.iter().map(|v| v.to_f64_lossy().abs()).fold(0.0, f64::max);
    let mut h = if deriv0 > 0.0 {
        (0.01 * scale0 / deriv0).min(span)
    } else {
        span
    };
    let floor = 1e-14 * span.max(end.abs());
    let mut steps = 0usize;
    let n = y.len();
    while t < end {
        if steps >= opts.max_steps {
            return Err(Error::StepRejected(format!("dopri5 exceeded {} steps", opts.max_steps)));
        }
        steps += 1;
        let last = t + h >= end - floor;
        if last {
            h = end - t;
        }
        let mut ks: Vec<Vec<T>> = Vec::with_capacity(7);
        ks.push(k1.clone());
        let mut stage = vec![T::zero(); n];
        for s in 1..7 {
            for (i, st) in stage.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (r, k) in ks.iter().enumerate() {
                    acc += A[s][r] * k[i].to_f64_lossy();
                }
                *st = y[i] + T::lit(h * acc);
            }
            let ts = if s == 6 { T::lit(t + h) } else { T::lit(t + C[s] * h) };
            ks.push(rhs(ts, &stage)?);
        }
        // stage 6 is the fifth-order solution (FSAL)
        let ynew = stage;
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = 0.0;
            for (r, k) in ks.iter().enumerate() {
                e += E[r] * k[i].to_f64_lossy();
            }
            let sc = opts.atol + opts.rtol * y[i].to_f64_lossy().abs().max(ynew[i].to_f64_lossy().abs());
            err = err.max((h * e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical("dopri5 produced non-finite values".into()));
        }
        if err <= 1.0 {
            t = if last { end } else { t + h };
            y = ynew;
            k1 = ks.pop().expect("seven stages");
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < floor && t < end {
            return Err(Error::StepRejected(format!("dopri5 step {h:e} fell below the floor at t = {t}")));
        }
    }
    Ok(y)
}

/// Source of generator matrices for the dense integrator.
pub enum GeneratorSource<'a, T> {
    /// `A(t)` evaluated at arbitrary times.
    Continuous(&'a dyn Fn(T) -> Result<DenseMatrix<T>>),
    /// `A_j` constant on the `j`-th subinterval of the partition.
    Piecewise(&'a [DenseMatrix<T>]),
}

impl<T: Real> GeneratorSource<'_, T> {
    fn on_step(&self, j: usize, t: T) -> Result<DenseMatrix<T>> {
        match self {
            GeneratorSource::Continuous(f) => f(t),
            GeneratorSource::Piecewise(m) => m
                .get(j)
                .cloned()
                .ok_or_else(|| Error::Dimension("fewer generator matrices than steps".into())),
        }
    }

    fn is_piecewise(&self) -> bool {
        matches!(self, GeneratorSource::Piecewise(_))
    }
}

/// Measures `w' = A(t)ᵀ w` integrated to every partition node.
pub fn dense_evolve<T: Real>(
    source: &GeneratorSource<'_, T>,
    mu0: &GridMeasure<T>,
    partition: &Partition<T>,
    opts: &OdeOptions,
) -> Result<Curve<T>> {
    let grid = *mu0.grid();
    if grid.len() > 128 {
        return Err(Error::InvalidArgument(format!("dense oracle limited to 128 nodes, got {}", grid.len())));
    }
    let mut values = vec![mu0.clone()];
    let mut w = mu0.weights().to_vec();
    for j in 0..partition.steps() {
        let (a, b) = (partition.nodes()[j], partition.nodes()[j + 1]);
        if source.is_piecewise() {
            let m = source.on_step(j, a)?;
            w = dopri5(|_, y| Ok(m.matvec_transpose(y)), a, b, &w, opts)?;
        } else {
            w = dopri5(|t, y| Ok(source.on_step(j, t)?.matvec_transpose(y)), a, b, &w, opts)?;
        }
        values.push(GridMeasure::new(grid, w.clone())?);
    }
    Curve::new(partition.nodes().to_vec(), values)
}

/// `U^{t_0, t_N} f` from the backward equation `∂_t u = −A(t) u`, `u(t_N) = f`.
pub fn dense_apply<T: Real>(
    source: &GeneratorSource<'_, T>,
    f: &TestFunction<T>,
    partition: &Partition<T>,
    opts: &OdeOptions,
) -> Result<TestFunction<T>> {
    let mut u = f.values().to_vec();
    for j in (0..partition.steps()).rev() {
        let (a, b) = (partition.nodes()[j], partition.nodes()[j + 1]);
        let dt = b - a;
        if source.is_piecewise() {
            let m = source.on_step(j, a)?;
            u = dopri5(|_, y| Ok(m.matvec(y)), T::zero(), dt, &u, opts)?;
        } else {
            u = dopri5(|tau, y| Ok(source.on_step(j, b - tau)?.matvec(y)), T::zero(), dt, &u, opts)?;
        }
    }
    f.with_values(u)
}

/// Step propagators `U^{t_j, t_{j+1}}` from the matrix backward equation.
pub fn dense_step_matrices<T: Real>(
    source: &GeneratorSource<'_, T>,
    partition: &Partition<T>,
    opts: &OdeOptions,
) -> Result<Vec<DenseMatrix<T>>> {
    let mut out = Vec::with_capacity(partition.steps());
    for j in 0..partition.steps() {
        let (a, b) = (partition.nodes()[j], partition.nodes()[j + 1]);
        let first = source.on_step(j, a)?;
        let n = first.rows();
        let id = DenseMatrix::<T>::identity(n);
        let y = dopri5(
            |tau, y| {
                let m = if source.is_piecewise() { first.clone() } else { source.on_step(j, b - tau)? };
                let ym = DenseMatrix::from_row_major(n, n, y.to_vec())?;
                Ok(m.matmul(&ym).data().to_vec())
            },
            T::zero(),
            b - a,
            id.data(),
            opts,
        )?;
        out.push(DenseMatrix::from_row_major(n, n, y)?);
    }
    Ok(out)
}
