use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Coefficient, Profile};
use crate::scalar::Real;

/// Finite jump measure on displacements `y ≠ 0` (weights are rates or rate shapes).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasure<T> {
    displacements: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> JumpMeasure<T> {
    pub fn empty() -> Self {
        Self {
            displacements: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn points(points: Vec<(T, T)>) -> Result<Self> {
        for &(y, w) in &points {
            if !y.is_finite() || !w.is_finite() {
                return Err(Error::InvalidArgument("jump measure entries must be finite".into()));
            }
            if y == T::zero() {
                return Err(Error::Invariant("jump measure charges the displacement 0".into()));
            }
            if w < T::zero() {
                return Err(Error::Invariant(format!("negative jump weight {w} at y = {y}")));
            }
        }
        let (displacements, weights) = points.into_iter().unzip();
        Ok(Self {
            displacements,
            weights,
        })
    }

    pub fn dirac(y: T, rate: T) -> Result<Self> {
        Self::points(vec![(y, rate)])
    }

    /// `nodes` equispaced displacements on `[−max_jump, max_jump]` weighted by `shape`; `y = 0` is skipped.
    pub fn lattice(max_jump: T, nodes: usize, shape: &Profile<T>) -> Result<Self> {
        if nodes < 2 || !(max_jump > T::zero()) {
            return Err(Error::InvalidArgument(
                "displacement lattice needs max_jump > 0 and at least 2 nodes".into(),
            ));
        }
        if matches!(shape, Profile::Table { .. }) {
            return Err(Error::Unsupported("tabulated jump shapes".into()));
        }
        let dummy = crate::measures::Grid::new(-max_jump, max_jump, 8)?;
        let step = T::lit(2.0) * max_jump / T::from_usize_exact(nodes - 1);
        let tiny = step * T::lit(1e-9);
        let points = (0..nodes)
            .map(|k| -max_jump + T::from_usize_exact(k) * step)
            .filter(|y| y.abs() > tiny)
            .map(|y| (y, shape.at(&dummy, y)))
            .collect();
        Self::points(points)
    }

    pub fn displacements(&self) -> &[T] {
        &self.displacements
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.displacements.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// `Σ_y f(y)·w(y)`
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.iter().map(|(y, w)| f(y) * w).sum()
    }

    /// Weights multiplied by `a` (no sign check; used for increments).
    pub fn scaled(&self, a: T) -> Self {
        Self {
            displacements: self.displacements.clone(),
            weights: self.weights.iter().map(|&w| a * w).collect(),
        }
    }

    fn concat(parts: impl Iterator<Item = Self>) -> Self {
        let mut out = Self::empty();
        for p in parts {
            out.displacements.extend(p.displacements);
            out.weights.extend(p.weights);
        }
        out
    }
}

/// Constant-coefficient symmetric stable part `−scale·|ξ|^index` of a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableTerm<T> {
    pub index: T,
    pub scale: T,
}

/// Frozen Lévy triplet in one dimension, plus an optional stable part.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyCoefficients<T> {
    pub diffusion: T,
    pub drift: T,
    pub jumps: JumpMeasure<T>,
    pub stable: Option<StableTerm<T>>,
}

impl<T: Real> LevyCoefficients<T> {
    pub fn validate(&self) -> Result<()> {
        if self.diffusion < T::zero() || !self.diffusion.is_finite() {
            return Err(Error::Invariant(format!(
                "diffusion coefficient {} is not nonnegative",
                self.diffusion
            )));
        }
        if let Some(w) = self.jumps.weights().iter().find(|w| **w < T::zero()) {
            return Err(Error::Invariant(format!("negative jump rate {w}")));
        }
        if let Some(s) = self.stable {
            if !(s.index > T::zero() && s.index <= T::lit(2.0)) || s.scale < T::zero() {
                return Err(Error::Invariant("stable part needs index in (0, 2] and scale ≥ 0".into()));
            }
        }
        Ok(())
    }

    /// `b − Σ_{|y|≤1} y ν(y)`: the drift seen by a generator without the compensator.
    pub fn effective_drift(&self) -> T {
        self.drift - self.jumps.integrate(|y| if y.abs() <= T::one() { y } else { T::zero() })
    }
}

/// `η(ξ) = −½Gξ² + ibξ + Σ_y [e^{iξy} − 1 − iξy·1_{|y|≤1}]ν(y) − scale·|ξ|^index`.
pub fn levy_symbol<T: Real>(coeffs: &LevyCoefficients<T>, xi: &[T]) -> Result<Vec<Complex<T>>> {
    coeffs.validate()?;
    Ok(symbol_unchecked(coeffs, xi))
}

pub(crate) fn symbol_unchecked<T: Real>(coeffs: &LevyCoefficients<T>, xi: &[T]) -> Vec<Complex<T>> {
    let half = T::lit(0.5);
    xi.iter()
        .map(|&k| {
            let mut re = -half * coeffs.diffusion * k * k;
            let mut im = coeffs.drift * k;
            for (y, w) in coeffs.jumps.iter() {
                let (s, c) = (k * y).sin_cos();
                re = re + w * (c - T::one());
                im = im + w * (s - if y.abs() <= T::one() { k * y } else { T::zero() });
            }
            if let Some(st) = coeffs.stable {
                re = re - st.scale * k.abs().powf(st.index);
            }
            Complex::new(re, im)
        })
        .collect()
}

/// One jump component `λ(t, μ, α)·ρ(y)` of a Lévy family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct LevyJumpTerm<T> {
    pub intensity: Coefficient<T>,
    pub shape: JumpMeasure<T>,
}

/// Scalar coordinates of a frozen Lévy generator in the family's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyScalars<T> {
    pub diffusion: T,
    pub drift: T,
    pub intensities: Vec<T>,
}

/// Basis symbols evaluated on a frequency vector; a frozen symbol is their linear combination.
#[derive(Clone, Debug)]
pub struct SymbolBasis<T> {
    pub diffusion: Vec<Complex<T>>,
    pub drift: Vec<Complex<T>>,
    pub jumps: Vec<Vec<Complex<T>>>,
    pub stable: Vec<Complex<T>>,
}

impl<T: Real> SymbolBasis<T> {
    /// `Σ scalars · basis`, plus the stable part when `with_stable` is set.
    pub fn combine(&self, s: &LevyScalars<T>, with_stable: bool) -> Vec<Complex<T>> {
        (0..self.drift.len())
            .map(|k| {
                let mut v = self.diffusion[k] * s.diffusion + self.drift[k] * s.drift;
                for (b, &l) in self.jumps.iter().zip(&s.intensities) {
                    v = v + b[k] * l;
                }
                if with_stable {
                    v = v + self.stable[k];
                }
                v
            })
            .collect()
    }
}

/// Measure-dependent Lévy generator family `A[μ]` with triplet
/// `(G(μ), b(μ), Σ_m λ_m(μ) ρ_m)` built from moment functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct LevyFamily<T> {
    #[serde(default)]
    pub functionals: Vec<Profile<T>>,
    #[serde(default)]
    pub diffusion: Coefficient<T>,
    #[serde(default)]
    pub drift: Coefficient<T>,
    #[serde(default)]
    pub jumps: Vec<LevyJumpTerm<T>>,
    #[serde(default)]
    pub stable: Option<StableTerm<T>>,
}

impl<T: Real> LevyFamily<T> {
    pub fn new(functionals: Vec<Profile<T>>) -> Self {
        Self {
            functionals,
            diffusion: Coefficient::constant(T::zero()),
            drift: Coefficient::constant(T::zero()),
            jumps: Vec::new(),
            stable: None,
        }
    }

    pub fn with_diffusion(mut self, c: Coefficient<T>) -> Self {
        self.diffusion = c;
        self
    }

    pub fn with_drift(mut self, c: Coefficient<T>) -> Self {
        self.drift = c;
        self
    }

    pub fn with_jumps(mut self, intensity: Coefficient<T>, shape: JumpMeasure<T>) -> Self {
        self.jumps.push(LevyJumpTerm { intensity, shape });
        self
    }

    pub fn with_stable(mut self, index: T, scale: T) -> Self {
        self.stable = Some(StableTerm { index, scale });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.functionals.len();
        self.diffusion.check_functionals(nf, "diffusion")?;
        self.drift.check_functionals(nf, "drift")?;
        for j in &self.jumps {
            j.intensity.check_functionals(nf, "jump intensity")?;
        }
        Ok(())
    }

    fn coefficients(&self) -> impl Iterator<Item = &Coefficient<T>> {
        [&self.diffusion, &self.drift]
            .into_iter()
            .chain(self.jumps.iter().map(|j| &j.intensity))
    }

    pub fn scalars(&self, t: T, c: &[T], alpha: T) -> LevyScalars<T> {
        LevyScalars {
            diffusion: self.diffusion.value(t, c, alpha),
            drift: self.drift.value(t, c, alpha),
            intensities: self.jumps.iter().map(|j| j.intensity.value(t, c, alpha)).collect(),
        }
    }

    /// `∂/∂c_j` of the scalar coordinates.
    pub fn d_moment_scalars(&self, t: T, c: &[T], alpha: T, j: usize) -> LevyScalars<T> {
        LevyScalars {
            diffusion: self.diffusion.d_moment(t, c, alpha, j),
            drift: self.drift.d_moment(t, c, alpha, j),
            intensities: self
                .jumps
                .iter()
                .map(|m| m.intensity.d_moment(t, c, alpha, j))
                .collect(),
        }
    }

    /// `∂/∂α` of the scalar coordinates.
    pub fn d_alpha_scalars(&self, t: T, c: &[T]) -> LevyScalars<T> {
        LevyScalars {
            diffusion: self.diffusion.d_alpha(t, c),
            drift: self.drift.d_alpha(t, c),
            intensities: self.jumps.iter().map(|m| m.intensity.d_alpha(t, c)).collect(),
        }
    }

    /// Triplet for given scalar coordinates; `with_stable` adds the constant stable part.
    pub fn triplet(&self, s: &LevyScalars<T>, with_stable: bool) -> LevyCoefficients<T> {
        LevyCoefficients {
            diffusion: s.diffusion,
            drift: s.drift,
            jumps: JumpMeasure::concat(
                self.jumps
                    .iter()
                    .zip(&s.intensities)
                    .map(|(j, &l)| j.shape.scaled(l)),
            ),
            stable: if with_stable { self.stable } else { None },
        }
    }

    pub fn coefficients_at(&self, t: T, c: &[T], alpha: T) -> LevyCoefficients<T> {
        self.triplet(&self.scalars(t, c, alpha), true)
    }

    pub fn symbol_basis(&self, xi: &[T]) -> SymbolBasis<T> {
        let half = T::lit(0.5);
        let unit_jumps = |shape: &JumpMeasure<T>| {
            symbol_unchecked(
                &LevyCoefficients {
                    diffusion: T::zero(),
                    drift: T::zero(),
                    jumps: shape.clone(),
                    stable: None,
                },
                xi,
            )
        };
        SymbolBasis {
            diffusion: xi.iter().map(|&k| Complex::new(-half * k * k, T::zero())).collect(),
            drift: xi.iter().map(|&k| Complex::new(T::zero(), k)).collect(),
            jumps: self.jumps.iter().map(|j| unit_jumps(&j.shape)).collect(),
            stable: xi
                .iter()
                .map(|&k| match self.stable {
                    Some(s) => Complex::new(-s.scale * k.abs().powf(s.index), T::zero()),
                    None => Complex::new(T::zero(), T::zero()),
                })
                .collect(),
        }
    }

    pub fn is_measure_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_measure_independent())
    }

    pub fn is_alpha_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_alpha_independent())
    }

    pub fn is_time_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_time_independent())
    }
}
