use crate::error::{Error, Result};
use crate::measures::lp;
use crate::measures::{GridMeasure, TestFunction};
use crate::scalar::Real;

/// First derivative by central differences, one-sided at the ends.
pub(crate) fn derivative<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let two = T::lit(2.0);
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) / h
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / h
            } else {
                (v[i + 1] - v[i - 1]) / (two * h)
            }
        })
        .collect()
}

/// Second derivative by the three-point stencil, copied from the neighbour at the ends.
pub(crate) fn second_derivative<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let two = T::lit(2.0);
    let h2 = h * h;
    let mut out: Vec<T> = vec![T::zero(); n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - two * v[i] + v[i - 1]) / h2;
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    out
}

fn axis_lines<T: Real>(values: &[T], n: usize, dim: usize) -> Vec<Vec<T>> {
    if dim == 1 {
        return vec![values.to_vec()];
    }
    let mut lines = Vec::with_capacity(2 * n);
    for i in 0..n {
        lines.push(values[i * n..(i + 1) * n].to_vec());
        lines.push((0..n).map(|j| values[j * n + i]).collect());
    }
    lines
}

/// `Σ_{l≤k} max_i |D^l f|_i` with central finite differences.
///
/// On 2-d grids the order-`l` term is the largest pure partial derivative of order `l`
/// together with the mixed derivative for `l = 2`.
pub fn ck_norm<T: Real>(f: &TestFunction<T>, k: u8) -> Result<T> {
    if k > f.order() {
        return Err(Error::InvalidArgument(format!(
            "order {k} exceeds the declared order {} of the test function",
            f.order()
        )));
    }
    let g = f.grid();
    let h = g.spacing();
    let v = f.values();
    let sup = crate::scalar::sup_norm;
    let mut total = sup(v);
    if k == 0 {
        return Ok(total);
    }
    let lines = axis_lines(v, g.n(), g.dim());
    let d1 = lines
        .iter()
        .map(|l| sup(&derivative(l, h)))
        .fold(T::zero(), T::max);
    total = total + d1;
    if k == 2 {
        let mut d2 = lines
            .iter()
            .map(|l| sup(&second_derivative(l, h)))
            .fold(T::zero(), T::max);
        if g.dim() == 2 {
            let n = g.n();
            let dx: Vec<T> = (0..n)
                .flat_map(|i| derivative(&v[i * n..(i + 1) * n], h))
                .collect();
            for j in 0..n {
                let col: Vec<T> = (0..n).map(|i| dx[i * n + j]).collect();
                d2 = d2.max(sup(&derivative(&col, h)));
            }
        }
        total = total + d2;
    }
    Ok(total)
}

/// Discrete `(C^k)'` distance: the value of
/// `max Σ f_i (w^μ_i − w^η_i)` over `|f_i| ≤ a_0`, `|D^1 f| ≤ a_1`, `|D^2 f| ≤ a_2`, `Σ a_l ≤ 1`,
/// with forward first differences and three-point second differences.
///
/// `k = 0` gives `Σ|w^μ − w^η|`. Orders 1 and 2 need a 1-d grid.
pub fn dual_norm<T: Real>(mu: &GridMeasure<T>, eta: &GridMeasure<T>, k: u8) -> Result<T> {
    mu.grid().require_same(eta.grid())?;
    let d: Vec<f64> = mu
        .weights()
        .iter()
        .zip(eta.weights())
        .map(|(&a, &b)| (a - b).to_f64_lossy())
        .collect();
    let h = mu.grid().spacing().to_f64_lossy();
    match k {
        0 => Ok(T::lit(d.iter().map(|x| x.abs()).sum())),
        1 | 2 => {
            mu.grid().require_1d("dual_norm of order 1 or 2")?;
            Ok(T::lit(lp::dual_value(&d, h, k as usize)?))
        }
        _ => Err(Error::InvalidArgument(format!("dual_norm order {k} exceeds 2"))),
    }
}

/// Cheap upper bound on `dual_norm(μ, η, k)` from explicit flux decompositions; exact for `k = 0`.
pub fn dual_norm_upper_bound<T: Real>(mu: &GridMeasure<T>, eta: &GridMeasure<T>, k: u8) -> Result<T> {
    mu.grid().require_same(eta.grid())?;
    let d: Vec<f64> = mu
        .weights()
        .iter()
        .zip(eta.weights())
        .map(|(&a, &b)| (a - b).to_f64_lossy())
        .collect();
    if k > 0 {
        mu.grid().require_1d("dual_norm_upper_bound")?;
    }
    let h = mu.grid().spacing().to_f64_lossy();
    Ok(T::lit(lp::decomposition_bound(&d, h, k as usize)))
}

/// `max_j dual_norm(a_j, b_j, k)` and its index, skipping pairs whose cheap bound cannot beat the running maximum.
pub fn max_dual_norm<T: Real>(
    a: &[GridMeasure<T>],
    b: &[GridMeasure<T>],
    k: u8,
) -> Result<(T, usize)> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} measures", a.len(), b.len())));
    }
    if k == 0 || a.is_empty() {
        let mut best = (T::zero(), 0);
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            let v = dual_norm(x, y, k)?;
            if v > best.0 {
                best = (v, j);
            }
        }
        return Ok(best);
    }
    let mut bounds: Vec<(f64, usize)> = Vec::with_capacity(a.len());
    for (j, (x, y)) in a.iter().zip(b).enumerate() {
        bounds.push((dual_norm_upper_bound(x, y, k)?.to_f64_lossy(), j));
    }
    bounds.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut best = (T::zero(), 0usize);
    for (bound, j) in bounds {
        if bound <= best.0.to_f64_lossy() {
            break;
        }
        let v = dual_norm(&a[j], &b[j], k)?;
        if v > best.0 {
            best = (v, j);
        }
    }
    Ok(best)
}
