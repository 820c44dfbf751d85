use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linear_prop::Propagator;
use crate::measures::{GridMeasure, TestFunction};
use crate::perturbation::Perturbation;
use crate::scalar::{axpy, Real};

/// Quadrature of the Duhamel integral on one subinterval `[t_j, t_{j+1}]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// `(Δ/2)·(U_j F_{j+1} f_{j+1} + F_j f_j)`
    #[default]
    Trapezoid,
    /// `Δ·F_j f_j`
    LeftEndpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Split windows that fail to contract instead of failing.
    pub bisect: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 50,
            bisect: true,
        }
    }
}

/// Convergence record of one window.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardWindow {
    pub start: f64,
    pub end: f64,
    pub residuals: Vec<f64>,
}

impl PicardWindow {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// Mean geometric contraction ratio between the first and the last residual.
    pub fn ratio(&self) -> Option<f64> {
        let r = &self.residuals;
        let first = *r.first()?;
        let last = *r.last()?;
        if r.len() < 2 || first <= 0.0 {
            return None;
        }
        if last <= 0.0 {
            return Some(0.0);
        }
        Some((last / first).powf(1.0 / (r.len() - 1) as f64))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PicardReport {
    pub windows: Vec<PicardWindow>,
}

impl PicardReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.windows.iter().filter_map(|w| w.ratio()).reduce(f64::max)
    }

    /// CSV with columns `window,iteration,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("window,iteration,residual\n");
        for (w, win) in self.windows.iter().enumerate() {
            for (i, r) in win.residuals.iter().enumerate() {
                let _ = writeln!(s, "{w},{},{r:.16e}", i + 1);
            }
        }
        s
    }
}

/// `c_U (c_U c_F x)^{m+1} / (m+1)! · exp(c_U c_F x)`: majorant of the Dyson tail beyond order `m`.
pub fn series_tail_bound(norm_u: f64, norm_f: f64, span: f64, m: usize) -> Result<f64> {
    if norm_u < 0.0 || norm_f < 0.0 || span < 0.0 || !(norm_u + norm_f + span).is_finite() {
        return Err(Error::InvalidArgument("series_tail_bound needs finite nonnegative inputs".into()));
    }
    let x = norm_u * norm_f * span;
    if x == 0.0 {
        return Ok(0.0);
    }
    // log-space to survive large m
    let k = (m + 1) as f64;
    let log_fact: f64 = (1..=m + 1).map(|i| (i as f64).ln()).sum();
    Ok(norm_u * (k * x.ln() - log_fact + x).exp())
}

/// Perturbed propagator `Φ^{t,r}` of `A_t + F_t` over the base handle's partition, and its dual `Ψ^{r,t}`.
pub struct PerturbedHandle<'a, T> {
    base: &'a Propagator<T>,
    perturbation: Perturbation<T>,
    quadrature: Quadrature,
    options: PicardOptions,
}

enum Outcome<T> {
    Converged(Vec<T>, PicardWindow),
    Stalled(PicardWindow),
}

impl<'a, T: Real> PerturbedHandle<'a, T> {
    pub fn new(base: &'a Propagator<T>, perturbation: Perturbation<T>) -> Result<Self> {
        perturbation.check(base.partition().len(), base.grid().len())?;
        Ok(Self {
            base,
            perturbation,
            quadrature: Quadrature::default(),
            options: PicardOptions::default(),
        })
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_options(mut self, options: PicardOptions) -> Self {
        self.options = options;
        self
    }

    pub fn base(&self) -> &Propagator<T> {
        self.base
    }

    pub fn perturbation(&self) -> &Perturbation<T> {
        &self.perturbation
    }

    fn dt(&self, j: usize) -> T {
        self.base.partition().dt(j)
    }

    fn step(&self, v: &[T], j: usize) -> Vec<T> {
        self.base.apply_between(v, j, j + 1)
    }

    fn dual_step(&self, v: &[T], j: usize) -> Vec<T> {
        self.base.dual_between(v, j, j + 1)
    }

    /// `(K f)_j = Σ_k w_{jk} U^{j,k} F_k f_k` by the backward recurrence over nodes `a..=b`.
    fn duhamel(&self, f: &[Vec<T>], a: usize, b: usize) -> Vec<Vec<T>> {
        let n = f[0].len();
        let half = T::lit(0.5);
        let mut out = vec![vec![T::zero(); n]; b - a + 1];
        for j in (a..b).rev() {
            let dt = self.dt(j);
            let (lo, hi) = out.split_at_mut(j - a + 1);
            let next = &hi[0];
            let mut acc = next.clone();
            match self.quadrature {
                Quadrature::Trapezoid => {
                    axpy(half * dt, &self.perturbation.apply(j + 1, &f[j + 1 - a]), &mut acc);
                    let mut v = self.step(&acc, j);
                    axpy(half * dt, &self.perturbation.apply(j, &f[j - a]), &mut v);
                    lo[j - a] = v;
                }
                Quadrature::LeftEndpoint => {
                    let mut v = self.step(&acc, j);
                    axpy(dt, &self.perturbation.apply(j, &f[j - a]), &mut v);
                    lo[j - a] = v;
                }
            }
        }
        out
    }

    /// Dual Duhamel sum: `J_k = Σ_{j≤k} w_{jk} V^{k,j} η_j`, returned with `H_b = Σ_j V^{b,j} η_j`.
    fn dual_duhamel(&self, eta: &[Vec<T>], a: usize, b: usize) -> (Vec<Vec<T>>, Vec<T>) {
        let n = eta[0].len();
        let half = T::lit(0.5);
        let mut j_out = vec![vec![T::zero(); n]; b - a + 1];
        // propagated sum of η_j over j < k, i.e. Σ_{j<k} V^{k,j} η_j
        let mut h_prev: Option<Vec<T>> = None;
        for k in a..=b {
            let moved = h_prev.as_ref().map(|h| self.dual_step(h, k - 1));
            let mut jk = vec![T::zero(); n];
            match self.quadrature {
                Quadrature::Trapezoid => {
                    if let Some(m) = &moved {
                        axpy(half * self.dt(k - 1), m, &mut jk);
                        if k < b {
                            axpy(half * self.dt(k), m, &mut jk);
                        }
                    }
                    if k < b {
                        axpy(half * self.dt(k), &eta[k - a], &mut jk);
                    }
                }
                Quadrature::LeftEndpoint => {
                    if k < b {
                        if let Some(m) = &moved {
                            axpy(self.dt(k), m, &mut jk);
                        }
                        axpy(self.dt(k), &eta[k - a], &mut jk);
                    }
                }
            }
            j_out[k - a] = jk;
            let mut h = moved.unwrap_or_else(|| vec![T::zero(); n]);
            axpy(T::one(), &eta[k - a], &mut h);
            h_prev = Some(h);
        }
        (j_out, h_prev.expect("nonempty window"))
    }

    fn picard(
        &self,
        a: usize,
        b: usize,
        init: Vec<Vec<T>>,
        mut update: impl FnMut(&[Vec<T>]) -> Vec<Vec<T>>,
    ) -> Outcome<Vec<T>> {
        let p = self.base.partition();
        let mut window = PicardWindow {
            start: p.nodes()[a].to_f64_lossy(),
            end: p.nodes()[b].to_f64_lossy(),
            residuals: Vec::new(),
        };
        let mut cur = init;
        if self.perturbation.is_zero() {
            return Outcome::Converged(cur, window);
        }
        for _ in 0..self.options.max_iterations {
            let next = update(&cur);
            let mut res = 0.0f64;
            let mut scale = 0.0f64;
            for (x, y) in next.iter().zip(&cur) {
                for (u, v) in x.iter().zip(y) {
                    res = res.max((*u - *v).to_f64_lossy().abs());
                    scale = scale.max(u.to_f64_lossy().abs());
                }
            }
            window.residuals.push(res);
            cur = next;
            if !res.is_finite() {
                return Outcome::Stalled(window);
            }
            let r = &window.residuals;
            let floor = 64.0 * f64::EPSILON * scale;
            let stagnant = r.len() >= 2 && res >= r[r.len() - 2];
            if res < self.options.tol || (res <= floor && stagnant) {
                return Outcome::Converged(cur, window);
            }
            if r.len() >= 5 && r[r.len() - 1] > r[0] {
                return Outcome::Stalled(window);
            }
        }
        Outcome::Stalled(window)
    }

    fn divergence(window: PicardWindow) -> Error {
        Error::Divergence {
            iterations: window.residuals.len(),
            residuals: window.residuals,
        }
    }

    /// Node values `Φ^{t_j, t_b} f` for `j = a..=b`.
    fn forward_window(&self, f: &[T], a: usize, b: usize, report: &mut PicardReport) -> Result<Vec<Vec<T>>> {
        let mut c = vec![f.to_vec()];
        for j in (a..b).rev() {
            let next = self.step(&c[0], j);
            c.insert(0, next);
        }
        let base = c.clone();
        match self.picard(a, b, c, |cur| {
            let k = self.duhamel(cur, a, b);
            base.iter()
                .zip(k)
                .map(|(u, mut v)| {
                    axpy(T::one(), u, &mut v);
                    v
                })
                .collect()
        }) {
            Outcome::Converged(v, w) => {
                report.windows.push(w);
                Ok(v)
            }
            Outcome::Stalled(w) => {
                if !self.options.bisect || b - a < 2 {
                    return Err(Self::divergence(w));
                }
                let m = (a + b) / 2;
                log::debug!("Picard window [{}, {}] split at node {m}", w.start, w.end);
                let right = self.forward_window(f, m, b, report)?;
                let mut left = self.forward_window(&right[0], a, m, report)?;
                left.extend(right.into_iter().skip(1));
                Ok(left)
            }
        }
    }

    /// `Ψ^{t_b, t_a} ξ`
    fn dual_window(&self, xi: &[T], a: usize, b: usize, report: &mut PicardReport) -> Result<Vec<T>> {
        let n = xi.len();
        let mut init = vec![vec![T::zero(); n]; b - a + 1];
        init[0] = xi.to_vec();
        let outcome = self.picard(a, b, init, |eta| {
            let (jk, _) = self.dual_duhamel(eta, a, b);
            jk.iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut e = self.perturbation.apply_dual(a + i, v);
                    if i == 0 {
                        axpy(T::one(), xi, &mut e);
                    }
                    e
                })
                .collect()
        });
        match outcome {
            Outcome::Converged(eta, w) => {
                report.windows.push(w);
                Ok(self.dual_duhamel(&eta, a, b).1)
            }
            Outcome::Stalled(w) => {
                if !self.options.bisect || b - a < 2 {
                    return Err(Self::divergence(w));
                }
                let m = (a + b) / 2;
                let mid = self.dual_window(xi, a, m, report)?;
                self.dual_window(&mid, m, b, report)
            }
        }
    }

    fn interval(&self, t: T, r: T) -> Result<(usize, usize)> {
        let p = self.base.partition();
        let (a, b) = (p.index_of(t)?, p.index_of(r)?);
        if a > b {
            return Err(Error::InvalidArgument(format!("interval [{t}, {r}] is reversed")));
        }
        Ok((a, b))
    }

    /// `Φ^{t,r} f` with the Picard log.
    pub fn propagate(&self, f: &TestFunction<T>, t: T, r: T) -> Result<(TestFunction<T>, PicardReport)> {
        self.base.grid().require_same(f.grid())?;
        let (a, b) = self.interval(t, r)?;
        let mut report = PicardReport::default();
        let nodes = self.forward_window(f.values(), a, b, &mut report)?;
        Ok((f.with_values(nodes[0].clone())?, report))
    }

    /// `Ψ^{r,t} ξ` for `r ≥ t`.
    pub fn dual(&self, xi: &GridMeasure<T>, r: T, t: T) -> Result<(GridMeasure<T>, PicardReport)> {
        self.base.grid().require_same(xi.grid())?;
        let (a, b) = self.interval(t, r)?;
        let mut report = PicardReport::default();
        let out = if a == b {
            xi.weights().to_vec()
        } else {
            self.dual_window(xi.weights(), a, b, &mut report)?
        };
        Ok((GridMeasure::new(*self.base.grid(), out)?, report))
    }

    /// `Ψ^{t_k, t_a} ξ` for every node `k ≥ a`, chained step by step.
    pub fn dual_curve(&self, xi: &GridMeasure<T>, a: usize) -> Result<(Vec<GridMeasure<T>>, PicardReport)> {
        self.base.grid().require_same(xi.grid())?;
        let mut report = PicardReport::default();
        let mut out = vec![xi.clone()];
        let mut cur = xi.weights().to_vec();
        for k in a..self.base.partition().steps() {
            cur = self.dual_window(&cur, k, k + 1, &mut report)?;
            out.push(GridMeasure::new(*self.base.grid(), cur.clone())?);
        }
        Ok((out, report))
    }

    /// The `m`-th Picard iterate from `U^{t,r} f`, which is the Dyson partial sum of order `m`.
    pub fn dyson_partial_sum(&self, f: &TestFunction<T>, t: T, r: T, m: usize) -> Result<TestFunction<T>> {
        self.base.grid().require_same(f.grid())?;
        let (a, b) = self.interval(t, r)?;
        let mut c = vec![f.values().to_vec()];
        for j in (a..b).rev() {
            let next = self.step(&c[0], j);
            c.insert(0, next);
        }
        let mut cur = c.clone();
        for _ in 0..m {
            let k = self.duhamel(&cur, a, b);
            cur = c
                .iter()
                .zip(k)
                .map(|(u, mut v)| {
                    axpy(T::one(), u, &mut v);
                    v
                })
                .collect();
        }
        f.with_values(cur.swap_remove(0))
    }

    /// `sup_j ‖F_j‖_{∞→∞}`
    pub fn perturbation_norm(&self) -> T {
        self.perturbation.norm_bound(self.base.grid().len())
    }

    /// Largest sup-norm over nodes of the weak-equation residual of a dual curve
    /// `(ξ_{k+1} − ξ_k)/Δ_k` tested against `g`, minus `(A_k g + F_k g, ξ_k)`.
    pub fn weak_residual(&self, curve: &[GridMeasure<T>], g: &[T], a: usize) -> Result<T> {
        let mut worst = T::zero();
        for (i, w) in curve.windows(2).enumerate() {
            let k = a + i;
            let dt = self.dt(k);
            let lhs: T = g
                .iter()
                .zip(w[1].weights().iter().zip(w[0].weights()))
                .map(|(gi, (x, y))| *gi * (*x - *y))
                .sum::<T>()
                / dt;
            let ag = self.base.step_generator(k)?.matvec(g);
            let mut total = self.perturbation.apply(k, g);
            axpy(T::one(), &ag, &mut total);
            let rhs: T = total.iter().zip(w[0].weights()).map(|(x, y)| *x * *y).sum();
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }
}
