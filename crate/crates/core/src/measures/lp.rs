//! Primal-dual interior-point solver for the banded dual-norm linear program.
//!
//! Variables are `x = (f_0..f_{n−1}, a_0..a_k)`; constraints are
//! `±S_l f − h^l a_l ≤ 0` for every stencil row of order `l ≤ k`, `−a_l ≤ 0` and `Σ a_l ≤ 1`,
//! where `S_0 = [1]`, `S_1 = [−1, 1]`, `S_2 = [1, −2, 1]`. The normal equations are a
//! pentadiagonal block in `f` bordered by `k + 1` dense columns.

use crate::error::{Error, Result};

const MAX_ITER: usize = 120;
/// Absolute tolerances; the input is normalized to `‖d‖₁ = 1`.
const TOL: f64 = 1e-11;
const CERT_TOL: f64 = 1e-7;
const RES_TOL: f64 = 1e-9;
const REFINE: usize = 2;

struct Layout {
    n: usize,
    k: usize,
    hl: Vec<f64>,
    /// Start of the `+` rows of order `l`; the `−` rows follow immediately.
    offsets: Vec<usize>,
    neg: usize,
    sum: usize,
    m: usize,
}

impl Layout {
    fn new(n: usize, k: usize, h: f64) -> Self {
        let mut offsets = Vec::with_capacity(k + 1);
        let mut at = 0;
        for l in 0..=k {
            offsets.push(at);
            at += 2 * (n - l);
        }
        Self {
            n,
            k,
            hl: (0..=k).map(|l| h.powi(l as i32)).collect(),
            offsets,
            neg: at,
            sum: at + k + 1,
            m: at + k + 2,
        }
    }

    fn rows(&self, l: usize) -> usize {
        self.n - l
    }

    fn nv(&self) -> usize {
        self.n + self.k + 1
    }
}

#[inline]
fn stencil(f: &[f64], l: usize, r: usize) -> f64 {
    match l {
        0 => f[r],
        1 => f[r + 1] - f[r],
        _ => f[r] - 2.0 * f[r + 1] + f[r + 2],
    }
}

#[inline]
fn stencil_t(out: &mut [f64], l: usize, r: usize, w: f64) {
    match l {
        0 => out[r] += w,
        1 => {
            out[r] -= w;
            out[r + 1] += w;
        }
        _ => {
            out[r] += w;
            out[r + 1] -= 2.0 * w;
            out[r + 2] += w;
        }
    }
}

fn g_mul(lay: &Layout, x: &[f64]) -> Vec<f64> {
    let (f, a) = x.split_at(lay.n);
    let mut y = vec![0.0; lay.m];
    for l in 0..=lay.k {
        let rows = lay.rows(l);
        let off = lay.offsets[l];
        let ha = lay.hl[l] * a[l];
        for r in 0..rows {
            let v = stencil(f, l, r);
            y[off + r] = v - ha;
            y[off + rows + r] = -v - ha;
        }
    }
    for l in 0..=lay.k {
        y[lay.neg + l] = -a[l];
    }
    y[lay.sum] = a.iter().sum();
    y
}

fn gt_mul(lay: &Layout, y: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; lay.nv()];
    for l in 0..=lay.k {
        let rows = lay.rows(l);
        let off = lay.offsets[l];
        let mut acc = 0.0;
        for r in 0..rows {
            let (p, q) = (y[off + r], y[off + rows + r]);
            stencil_t(&mut x[..lay.n], l, r, p - q);
            acc += p + q;
        }
        x[lay.n + l] = -lay.hl[l] * acc - y[lay.neg + l] + y[lay.sum];
    }
    x
}

/// Normal matrix `Gᵀ diag(w) G` in bordered-banded form with a factorized band.
struct Normal {
    n: usize,
    kk: usize,
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
    w: Vec<Vec<f64>>,
    schur: Vec<f64>,
    border: Vec<Vec<f64>>,
}

impl Normal {
    fn build(lay: &Layout, w: &[f64]) -> Result<Self> {
        let n = lay.n;
        let kk = lay.k + 1;
        let mut diag = vec![0.0; n];
        let mut off1 = vec![0.0; n];
        let mut off2 = vec![0.0; n];
        let mut border = vec![vec![0.0; n]; kk];
        let mut corner = vec![0.0; kk * kk];
        for l in 0..=lay.k {
            let rows = lay.rows(l);
            let off = lay.offsets[l];
            let hl = lay.hl[l];
            let mut qsum = 0.0;
            for r in 0..rows {
                let (p, m) = (w[off + r], w[off + rows + r]);
                let q = p + m;
                qsum += q;
                match l {
                    0 => diag[r] += q,
                    1 => {
                        diag[r] += q;
                        diag[r + 1] += q;
                        off1[r] -= q;
                    }
                    _ => {
                        diag[r] += q;
                        diag[r + 1] += 4.0 * q;
                        diag[r + 2] += q;
                        off1[r] -= 2.0 * q;
                        off1[r + 1] -= 2.0 * q;
                        off2[r] += q;
                    }
                }
                stencil_t(&mut border[l], l, r, -hl * (p - m));
            }
            corner[l * kk + l] += hl * hl * qsum + w[lay.neg + l];
        }
        for i in 0..kk {
            for j in 0..kk {
                corner[i * kk + j] += w[lay.sum];
            }
        }
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let mut di = diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            if di <= 1e-14 * diag[i] && di.is_finite() {
                di = 1e-14 * diag[i];
            }
            if !(di > 0.0) || !di.is_finite() {
                return Err(Error::Numerical(format!(
                    "dual-norm LP: normal matrix lost definiteness at row {i} (pivot {di:e})"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                let mut v = off1[i];
                if i >= 1 {
                    v -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = v / di;
            }
            if i + 2 < n {
                l2[i] = off2[i] / di;
            }
        }
        let mut me = Self {
            n,
            kk,
            d,
            l1,
            l2,
            w: Vec::new(),
            schur: Vec::new(),
            border,
        };
        let wcols: Vec<Vec<f64>> = me.border.iter().map(|c| me.band_solve(c)).collect();
        let mut schur = corner;
        for i in 0..kk {
            for j in 0..kk {
                let s: f64 = me.border[i].iter().zip(&wcols[j]).map(|(a, b)| a * b).sum();
                schur[i * kk + j] -= s;
            }
        }
        me.w = wcols;
        me.schur = schur;
        Ok(me)
    }

    fn band_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            if i >= 1 {
                y[i] -= self.l1[i - 1] * y[i - 1];
            }
            if i >= 2 {
                y[i] -= self.l2[i - 2] * y[i - 2];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                y[i] -= self.l1[i] * y[i + 1];
            }
            if i + 2 < n {
                y[i] -= self.l2[i] * y[i + 2];
            }
        }
        y
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let kk = self.kk;
        let u = self.band_solve(&rhs[..n]);
        let mut ra: Vec<f64> = (0..kk)
            .map(|l| rhs[n + l] - self.border[l].iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let da = small_solve(&self.schur, &mut ra, kk)?;
        let mut out = u;
        for (l, &dl) in da.iter().enumerate() {
            for (o, &wv) in out.iter_mut().zip(&self.w[l]) {
                *o -= wv * dl;
            }
        }
        out.extend_from_slice(&da);
        Ok(out)
    }
}

fn small_solve(a: &[f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))
            .unwrap_or(c);
        if m[p * n + c] == 0.0 || !m[p * n + c].is_finite() {
            return Err(Error::Numerical("dual-norm LP: singular Schur complement".into()));
        }
        if p != c {
            for j in 0..n {
                m.swap(c * n + j, p * n + j);
            }
            b.swap(c, p);
        }
        for i in c + 1..n {
            let f = m[i * n + c] / m[c * n + c];
            for j in c..n {
                m[i * n + j] -= f * m[c * n + j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i * n + i];
    }
    Ok(x)
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut a: f64 = 1.0;
    for (&x, &dx) in v.iter().zip(dv) {
        if dx < 0.0 {
            a = a.min(-x / dx);
        }
    }
    a
}

/// Solves the LP for a difference vector `d` (any scale) and returns its optimal value.
pub(crate) fn dual_value(d: &[f64], h: f64, k: usize) -> Result<f64> {
    let norm: f64 = d.iter().map(|x| x.abs()).sum();
    if norm == 0.0 {
        return Ok(0.0);
    }
    if !norm.is_finite() {
        return Err(Error::Numerical("dual-norm LP: non-finite input".into()));
    }
    let mut dn: Vec<f64> = d.iter().map(|x| x / norm).collect();
    if let Some(first) = dn.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            for x in dn.iter_mut() {
                *x = -*x;
            }
        }
    }
    let n = dn.len();
    if n < 3 {
        return Err(Error::InvalidArgument("dual-norm LP needs at least 3 nodes".into()));
    }
    Ok(norm * solve(&dn, h, k)?)
}

fn solve(d: &[f64], h: f64, k: usize) -> Result<f64> {
    let lay = Layout::new(d.len(), k, h);
    let n = lay.n;
    let m = lay.m;
    let nv = lay.nv();
    let mut c = vec![0.0; nv];
    for i in 0..n {
        c[i] = -d[i];
    }
    let mut hvec = vec![0.0; m];
    hvec[lay.sum] = 1.0;
    let mut x = vec![0.0; nv];
    for l in 0..=k {
        x[n + l] = 1.0 / (k as f64 + 2.0);
    }
    let mut s = vec![1.0; m];
    let mut z = vec![1.0; m];
    let mut history = Vec::new();
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    for iter in 0..MAX_ITER {
        let gx = g_mul(&lay, &x);
        let rp: Vec<f64> = (0..m).map(|i| gx[i] + s[i] - hvec[i]).collect();
        let gtz = gt_mul(&lay, &z);
        let rd: Vec<f64> = (0..nv).map(|i| gtz[i] + c[i]).collect();
        let mu = s.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / m as f64;
        let (lo, up) = certificate(&lay, d, &x, &z);
        lower = lower.max(lo);
        upper = upper.min(up);
        let gap = upper - lower;
        history.push(gap);
        let rp_n = rp.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let rd_n = rd.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let agree = (z[lay.sum] - lower).abs() <= TOL;
        if gap <= TOL || (agree && rp_n < RES_TOL && rd_n < RES_TOL && gap <= CERT_TOL) {
            return Ok(lower);
        }
        let stalled = history.len() > 8 && gap > 0.5 * history[history.len() - 9];
        if (stalled || mu < 1e-40) && gap <= CERT_TOL {
            return Ok(lower);
        }
        let w: Vec<f64> = (0..m).map(|i| z[i] / s[i]).collect();
        let normal = match Normal::build(&lay, &w) {
            Ok(nm) => nm,
            Err(_) if upper - lower <= CERT_TOL => return Ok(lower),
            Err(e) => return Err(e),
        };
        let direction = |rc: &[f64], refine: usize| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let t: Vec<f64> = (0..m).map(|i| w[i] * rp[i] - rc[i] / s[i]).collect();
            let gtt = gt_mul(&lay, &t);
            let rhs: Vec<f64> = (0..nv).map(|i| -rd[i] - gtt[i]).collect();
            let mut dx = normal.solve(&rhs)?;
            for _ in 0..refine {
                let gv = g_mul(&lay, &dx);
                let wgv: Vec<f64> = (0..m).map(|i| w[i] * gv[i]).collect();
                let mv = gt_mul(&lay, &wgv);
                let res: Vec<f64> = (0..nv).map(|i| rhs[i] - mv[i]).collect();
                let corr = normal.solve(&res)?;
                for (a, b) in dx.iter_mut().zip(&corr) {
                    *a += b;
                }
            }
            let gdx = g_mul(&lay, &dx);
            let dz: Vec<f64> = (0..m)
                .map(|i| w[i] * (gdx[i] + rp[i]) - rc[i] / s[i])
                .collect();
            let ds: Vec<f64> = (0..m).map(|i| -(rc[i] + s[i] * dz[i]) / z[i]).collect();
            Ok((dx, ds, dz))
        };
        let rc_aff: Vec<f64> = (0..m).map(|i| s[i] * z[i]).collect();
        let (_, ds_a, dz_a) = match direction(&rc_aff, REFINE) {
            Ok(v) => v,
            Err(_) if upper - lower <= CERT_TOL => return Ok(lower),
            Err(e) => return Err(e),
        };
        let ap = max_step(&s, &ds_a);
        let ad = max_step(&z, &dz_a);
        let mu_aff = (0..m)
            .map(|i| (s[i] + ap * ds_a[i]) * (z[i] + ad * dz_a[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let rc: Vec<f64> = (0..m)
            .map(|i| s[i] * z[i] + ds_a[i] * dz_a[i] - sigma * mu)
            .collect();
        let (dx, ds, dz) = match direction(&rc, REFINE) {
            Ok(v) => v,
            Err(_) if upper - lower <= CERT_TOL => return Ok(lower),
            Err(e) => return Err(e),
        };
        let eta = if iter < 5 { 0.95 } else { 0.995 };
        let ap = (eta * max_step(&s, &ds)).min(1.0);
        let ad = (eta * max_step(&z, &dz)).min(1.0);
        for i in 0..nv {
            x[i] += ap * dx[i];
        }
        for i in 0..m {
            s[i] += ap * ds[i];
            z[i] += ad * dz[i];
        }
    }
    if upper - lower <= CERT_TOL {
        return Ok(lower);
    }
    Err(Error::Numerical(format!(
        "dual-norm LP did not converge in {MAX_ITER} iterations (gap history tail {:?})",
        &history[history.len().saturating_sub(5)..]
    )))
}

/// Certified bounds on the optimum from the current iterate.
///
/// The lower bound rescales `f` to unit norm. The upper bound reads the decomposition
/// `d = e_0 + Σ S_lᵀ e_l` off the multipliers, puts the residual into `e_0`, and takes
/// `max_l h^l ‖e_l‖₁`.
fn certificate(lay: &Layout, d: &[f64], x: &[f64], z: &[f64]) -> (f64, f64) {
    let n = lay.n;
    let f = &x[..n];
    let mut norm = 0.0;
    for l in 0..=lay.k {
        let mut mx = 0.0f64;
        for r in 0..lay.rows(l) {
            mx = mx.max(stencil(f, l, r).abs());
        }
        norm += mx / lay.hl[l];
    }
    let value: f64 = d.iter().zip(f).map(|(a, b)| a * b).sum();
    let lower = if norm > 0.0 { (value / norm).max(0.0) } else { 0.0 };
    let mut e0 = d.to_vec();
    let mut upper = 0.0f64;
    for l in 1..=lay.k {
        let rows = lay.rows(l);
        let off = lay.offsets[l];
        let mut el = 0.0;
        for r in 0..rows {
            let e = z[off + r] - z[off + rows + r];
            stencil_t(&mut e0, l, r, -e);
            el += e.abs();
        }
        upper = upper.max(el * lay.hl[l]);
    }
    upper = upper.max(e0.iter().map(|v| v.abs()).sum());
    (lower, upper)
}

/// Upper bound on the optimum of order `k` from three explicit decompositions of `d`.
///
/// With `S` the running sum of `d`, `F = −S` and `G = −cumsum F`:
/// `d = e_0` (raw), `d = m_0 δ_last + D¹ᵀF` (flux) and
/// `d = m_0 δ_last + D¹ᵀ(m_1 δ) + D²ᵀG` (second flux), where `m_0 = Σd` and `m_1 = ΣF`.
/// Any convex combination is again a decomposition; the best one is found by enumerating
/// the vertices of the piecewise-linear minimax over the simplex.
pub(crate) fn decomposition_bound(d: &[f64], h: f64, k: usize) -> f64 {
    let n = d.len();
    let a: f64 = d.iter().map(|x| x.abs()).sum();
    if a == 0.0 || k == 0 || n < 3 {
        return a;
    }
    let m0: f64 = d.iter().sum();
    let mut flux = vec![0.0; n - 1];
    let mut run = 0.0;
    for (fi, &x) in flux.iter_mut().zip(d) {
        run += x;
        *fi = -run;
    }
    let b: f64 = h * flux.iter().map(|x| x.abs()).sum::<f64>();
    let mut rows = vec![[a, 0.0, 0.0], [m0.abs(), b, 0.0]];
    if k >= 2 {
        let m1: f64 = flux.iter().sum();
        let mut run = 0.0;
        let mut g = 0.0;
        for &x in &flux[..n - 2] {
            run += x;
            g += run.abs();
        }
        rows.push([m0.abs(), h * m1.abs(), h * h * g]);
    }
    minimax(&rows)
}

/// `min_λ max_l Σ_c λ_c rows[c][l]` over the probability simplex (at most three rows).
fn minimax(rows: &[[f64; 3]]) -> f64 {
    let nc = rows.len();
    let eval = |lam: &[f64]| -> f64 {
        (0..3)
            .map(|l| (0..nc).map(|c| lam[c] * rows[c][l]).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut best = f64::INFINITY;
    let mut consider = |lam: &[f64]| {
        if lam.iter().all(|&x| x >= -1e-15) {
            best = best.min(eval(lam));
        }
    };
    for c in 0..nc {
        let mut lam = vec![0.0; nc];
        lam[c] = 1.0;
        consider(&lam);
    }
    // Edges: where two objective components cross.
    for c1 in 0..nc {
        for c2 in c1 + 1..nc {
            for l1 in 0..3 {
                for l2 in l1 + 1..3 {
                    let p = rows[c1][l1] - rows[c1][l2];
                    let q = rows[c2][l1] - rows[c2][l2];
                    if p != q {
                        let t = p / (p - q);
                        if (0.0..=1.0).contains(&t) {
                            let mut lam = vec![0.0; nc];
                            lam[c1] = 1.0 - t;
                            lam[c2] = t;
                            consider(&lam);
                        }
                    }
                }
            }
        }
    }
    // Interior: all three components equal.
    if nc == 3 {
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [0.0, 0.0, 1.0];
        for c in 0..3 {
            m[0][c] = rows[c][0] - rows[c][1];
            m[1][c] = rows[c][1] - rows[c][2];
            m[2][c] = 1.0;
        }
        if let Ok(lam) = small_solve(&m.concat(), &mut rhs, 3) {
            consider(&lam);
        }
    }
    best
}
