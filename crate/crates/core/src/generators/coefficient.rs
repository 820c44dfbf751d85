use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{TimeProfile, Transform};
use crate::scalar::Real;

/// Dependence of a coefficient on one moment `c_j = (φ_j, μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interaction<T> {
    pub functional: usize,
    pub slope: T,
    #[serde(default)]
    pub transform: Transform,
}

/// Scalar coefficient `g(t)·[base + α·alpha_slope + s(α)·Σ_j slope_j ψ_j(c_j)]`,
/// where `s(α) = α` when `alpha_scales_interaction` is set and `1` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct Coefficient<T> {
    #[serde(default)]
    pub time: TimeProfile<T>,
    #[serde(default)]
    pub base: T,
    #[serde(default)]
    pub alpha_slope: T,
    #[serde(default)]
    pub interactions: Vec<Interaction<T>>,
    #[serde(default)]
    pub alpha_scales_interaction: bool,
}

impl<T: Real> Default for Coefficient<T> {
    fn default() -> Self {
        Self::constant(T::zero())
    }
}

impl<T: Real> Coefficient<T> {
    pub fn constant(value: T) -> Self {
        Self {
            time: TimeProfile::unit(),
            base: value,
            alpha_slope: T::zero(),
            interactions: Vec::new(),
            alpha_scales_interaction: false,
        }
    }

    /// `base + slope·(φ_functional, μ)`
    pub fn linear(base: T, functional: usize, slope: T) -> Self {
        Self::constant(base).with_interaction(functional, slope, Transform::Identity)
    }

    pub fn with_interaction(mut self, functional: usize, slope: T, transform: Transform) -> Self {
        self.interactions.push(Interaction {
            functional,
            slope,
            transform,
        });
        self
    }

    pub fn with_time(mut self, time: TimeProfile<T>) -> Self {
        self.time = time;
        self
    }

    pub fn with_alpha_slope(mut self, slope: T) -> Self {
        self.alpha_slope = slope;
        self
    }

    pub fn scaling_interaction_by_alpha(mut self) -> Self {
        self.alpha_scales_interaction = true;
        self
    }

    fn interaction_sum(&self, c: &[T]) -> T {
        self.interactions
            .iter()
            .map(|i| i.slope * i.transform.apply(c[i.functional]))
            .sum()
    }

    fn scale(&self, alpha: T) -> T {
        if self.alpha_scales_interaction {
            alpha
        } else {
            T::one()
        }
    }

    pub fn value(&self, t: T, c: &[T], alpha: T) -> T {
        self.time.at(t) * (self.base + alpha * self.alpha_slope + self.scale(alpha) * self.interaction_sum(c))
    }

    /// `∂/∂c_j`
    pub fn d_moment(&self, t: T, c: &[T], alpha: T, j: usize) -> T {
        let s: T = self
            .interactions
            .iter()
            .filter(|i| i.functional == j)
            .map(|i| i.slope * i.transform.derivative(c[j]))
            .sum();
        self.time.at(t) * self.scale(alpha) * s
    }

    /// `∂/∂α`
    pub fn d_alpha(&self, t: T, c: &[T]) -> T {
        let inter = if self.alpha_scales_interaction {
            self.interaction_sum(c)
        } else {
            T::zero()
        };
        self.time.at(t) * (self.alpha_slope + inter)
    }

    pub fn is_measure_independent(&self) -> bool {
        self.interactions.iter().all(|i| i.slope == T::zero())
    }

    pub fn is_alpha_independent(&self) -> bool {
        self.alpha_slope == T::zero() && (!self.alpha_scales_interaction || self.is_measure_independent())
    }

    pub fn is_time_independent(&self) -> bool {
        self.time.is_constant()
    }

    pub(crate) fn check_functionals(&self, count: usize, what: &str) -> Result<()> {
        match self.interactions.iter().find(|i| i.functional >= count) {
            Some(i) => Err(Error::InvalidArgument(format!(
                "{what} refers to moment functional {} but only {count} are declared",
                i.functional
            ))),
            None => Ok(()),
        }
    }
}
