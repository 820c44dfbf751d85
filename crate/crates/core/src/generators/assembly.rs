use crate::generators::JumpMeasure;
use crate::linalg::DenseMatrix;
use crate::measures::Grid;
use crate::scalar::Real;

/// Upwind drift stencil `b·D¹` in row `i`; the direction follows the sign of `dir`.
pub(crate) fn add_upwind<T: Real>(m: &mut DenseMatrix<T>, i: usize, h: T, b: T, dir: T) {
    let n = m.rows();
    let c = b / h;
    if dir >= T::zero() {
        if i + 1 < n {
            m.add_at(i, i, -c);
            m.add_at(i, i + 1, c);
        }
    } else if i >= 1 {
        m.add_at(i, i, c);
        m.add_at(i, i - 1, -c);
    }
}

/// `(g/2)·D²` with reflecting ends.
pub(crate) fn add_diffusion<T: Real>(m: &mut DenseMatrix<T>, h: T, g: T) {
    let n = m.rows();
    let c = g / (T::lit(2.0) * h * h);
    for i in 0..n {
        if i >= 1 {
            m.add_at(i, i - 1, c);
            m.add_at(i, i, -c);
        }
        if i + 1 < n {
            m.add_at(i, i + 1, c);
            m.add_at(i, i, -c);
        }
    }
}

/// Jumps `x_i → nearest(x_i + y)` at rates `scale·w(y)`; returns the rate of jumps leaving the grid.
pub(crate) fn add_jumps<T: Real>(
    m: &mut DenseMatrix<T>,
    grid: &Grid<T>,
    i: usize,
    scale: T,
    jumps: &JumpMeasure<T>,
) -> T {
    if scale == T::zero() {
        return T::zero();
    }
    let x = grid.node(i);
    let mut lost = T::zero();
    for (y, w) in jumps.iter() {
        let rate = scale * w;
        match grid.nearest(x + y) {
            Some(j) if j != i => {
                m.add_at(i, j, rate);
                m.add_at(i, i, -rate);
            }
            Some(_) => {}
            None => lost = lost + rate.abs(),
        }
    }
    lost
}

/// Logs a domain-escape warning when the lost jump rate is noticeable.
pub(crate) fn report_lost_rate<T: Real>(lost: T, what: &str) {
    if lost.to_f64_lossy() > 1e-6 {
        log::warn!("domain escape: jumps leaving the grid at total rate {lost} were dropped ({what})");
    } else if lost > T::zero() {
        log::debug!("jumps leaving the grid dropped at rate {lost} ({what})");
    }
}
