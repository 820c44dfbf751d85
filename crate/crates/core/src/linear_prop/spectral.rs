use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::generators::{LevyFamily, SymbolBasis};
use crate::linear_prop::{Partition, StepInput};
use crate::measures::Grid;
use crate::scalar::{FourierPlan, Real};

/// Fourier-multiplier propagator on a grid padded to twice its length.
///
/// Functions are extended by their edge values into the padding; measures are zero-padded and
/// the mass that ends up in the padding is folded back onto the edge nodes. The two operations
/// are transposes of each other, so the adjoint identity holds up to transform round-off.
pub(crate) struct SpectralEngine<T> {
    n: usize,
    offset: usize,
    forward: Arc<dyn FourierPlan<T>>,
    inverse: Arc<dyn FourierPlan<T>>,
    pub(crate) xi: Vec<T>,
    pub(crate) basis: SymbolBasis<T>,
    /// `Σ_{i<j} Δt_i·η_i(ξ)` for `j = 0..=N`.
    pub(crate) cumulative: Vec<Vec<Complex<T>>>,
}

impl<T> std::fmt::Debug for SpectralEngine<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralEngine")
            .field("n", &self.n)
            .field("padded", &self.xi.len())
            .field("steps", &(self.cumulative.len() - 1))
            .finish()
    }
}

/// Angular frequencies of a length-`len` transform with spacing `h`, negative above the middle.
pub(crate) fn frequencies<T: Real>(len: usize, h: T) -> Vec<T> {
    let scale = T::lit(2.0) * T::PI() / (T::from_usize_exact(len) * h);
    (0..len)
        .map(|k| {
            if k <= len / 2 {
                T::from_usize_exact(k) * scale
            } else {
                -T::from_usize_exact(len - k) * scale
            }
        })
        .collect()
}

impl<T: Real> SpectralEngine<T> {
    pub(crate) fn new(
        family: &LevyFamily<T>,
        grid: &Grid<T>,
        partition: &Partition<T>,
        inputs: &[StepInput<T>],
        alpha: T,
    ) -> Result<Self> {
        grid.require_1d("the spectral engine")?;
        family.validate()?;
        if inputs.len() != partition.steps() {
            return Err(Error::Dimension(format!(
                "{} step inputs for {} steps",
                inputs.len(),
                partition.steps()
            )));
        }
        let n = grid.n();
        let len = 2 * n;
        let xi = frequencies(len, grid.spacing());
        let basis = family.symbol_basis(&xi);
        let mut cumulative = Vec::with_capacity(inputs.len() + 1);
        let mut acc = vec![Complex::new(T::zero(), T::zero()); len];
        cumulative.push(acc.clone());
        for (j, input) in inputs.iter().enumerate() {
            let scalars = family.scalars(input.time, &input.moments, alpha);
            family.triplet(&scalars, true).validate()?;
            let eta = basis.combine(&scalars, true);
            let dt = partition.dt(j);
            for (a, e) in acc.iter_mut().zip(&eta) {
                *a = *a + *e * dt;
            }
            cumulative.push(acc.clone());
        }
        Ok(Self {
            n,
            offset: n / 2,
            forward: T::fourier_plan(len, false),
            inverse: T::fourier_plan(len, true),
            xi,
            basis,
            cumulative,
        })
    }

    fn padded_len(&self) -> usize {
        2 * self.n
    }

    /// `exp(E_b − E_a)` with the Nyquist entry made real.
    pub(crate) fn multiplier(&self, a: usize, b: usize) -> Vec<Complex<T>> {
        let len = self.padded_len();
        let mut m: Vec<Complex<T>> = self.cumulative[b]
            .iter()
            .zip(&self.cumulative[a])
            .map(|(x, y)| (*x - *y).exp())
            .collect();
        let ny = len / 2;
        m[ny] = Complex::new((self.cumulative[b][ny].re - self.cumulative[a][ny].re).exp(), T::zero());
        m
    }

    pub(crate) fn extend(&self, f: &[T]) -> Vec<Complex<T>> {
        let len = self.padded_len();
        (0..len)
            .map(|p| {
                let v = if p < self.offset {
                    f[0]
                } else if p >= self.offset + self.n {
                    f[self.n - 1]
                } else {
                    f[p - self.offset]
                };
                Complex::new(v, T::zero())
            })
            .collect()
    }

    pub(crate) fn pad(&self, w: &[T]) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.padded_len()];
        for (b, &v) in buf[self.offset..self.offset + self.n].iter_mut().zip(w) {
            *b = Complex::new(v, T::zero());
        }
        buf
    }

    pub(crate) fn restrict(&self, buf: &[Complex<T>]) -> Vec<T> {
        buf[self.offset..self.offset + self.n].iter().map(|c| c.re).collect()
    }

    pub(crate) fn fold(&self, buf: &[Complex<T>]) -> Vec<T> {
        let mut out = self.restrict(buf);
        let left: T = buf[..self.offset].iter().map(|c| c.re).sum();
        let right: T = buf[self.offset + self.n..].iter().map(|c| c.re).sum();
        out[0] = out[0] + left;
        out[self.n - 1] = out[self.n - 1] + right;
        out
    }

    /// Multiplies the transform of `buf` by `m` (or its conjugate for the measure side).
    pub(crate) fn filter(&self, buf: &mut [Complex<T>], m: &[Complex<T>], conjugate: bool) {
        self.forward.process(buf);
        let scale = T::one() / T::from_usize_exact(buf.len());
        for (b, x) in buf.iter_mut().zip(m) {
            let x = if conjugate { x.conj() } else { *x };
            *b = *b * x * scale;
        }
        self.inverse.process(buf);
    }

    /// `U^{t_a, t_b} f`
    pub(crate) fn apply(&self, f: &[T], a: usize, b: usize) -> Vec<T> {
        if a == b {
            return f.to_vec();
        }
        let mut buf = self.extend(f);
        self.filter(&mut buf, &self.multiplier(a, b), false);
        self.restrict(&buf)
    }

    /// `V^{t_b, t_a} w`
    pub(crate) fn dual_apply(&self, w: &[T], a: usize, b: usize) -> Vec<T> {
        if a == b {
            return w.to_vec();
        }
        let mut buf = self.pad(w);
        self.filter(&mut buf, &self.multiplier(a, b), true);
        self.fold(&buf)
    }

    /// Derivative of `w ↦ V^{t_{j+1}, t_j} w` when the step exponent moves by `dt·d_eta`.
    pub(crate) fn dual_step_derivative(&self, w: &[T], j: usize, d_eta: &[Complex<T>], dt: T) -> Vec<T> {
        let mult = self.multiplier(j, j + 1);
        let ny = self.padded_len() / 2;
        let mut m: Vec<Complex<T>> = mult.iter().zip(d_eta).map(|(a, d)| (*a * *d * dt).conj()).collect();
        m[ny] = Complex::new(mult[ny].re * d_eta[ny].re * dt, T::zero());
        let mut buf = self.pad(w);
        self.filter(&mut buf, &m, false);
        self.fold(&buf)
    }
}
