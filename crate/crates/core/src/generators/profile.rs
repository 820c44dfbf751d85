use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Grid, TestFunction};
use crate::scalar::Real;

/// Scalar function of the state variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile<T> {
    Constant { value: T },
    /// `intercept + slope·x`
    Linear { intercept: T, slope: T },
    /// `Σ_k c_k x^k`
    Polynomial { coefficients: Vec<T> },
    /// `amplitude·sin(frequency·x + phase)`
    Sin { amplitude: T, frequency: T, phase: T },
    /// `amplitude·exp(−(x − center)² / (2 width²))`
    Gaussian { amplitude: T, center: T, width: T },
    /// `amplitude·exp(rate·x)`
    Exp { amplitude: T, rate: T },
    /// Node values; linear interpolation between nodes, constant beyond the ends.
    Table { values: Vec<T> },
}

impl<T: Real> Profile<T> {
    pub fn constant(value: T) -> Self {
        Profile::Constant { value }
    }

    /// `f(x) = x`
    pub fn identity() -> Self {
        Profile::Linear {
            intercept: T::zero(),
            slope: T::one(),
        }
    }

    /// Value at `x`; `grid` is consulted by tables only.
    pub fn at(&self, grid: &Grid<T>, x: T) -> T {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { intercept, slope } => *intercept + *slope * x,
            Profile::Polynomial { coefficients } => coefficients
                .iter()
                .rev()
                .fold(T::zero(), |acc, &c| acc * x + c),
            Profile::Sin {
                amplitude,
                frequency,
                phase,
            } => *amplitude * (*frequency * x + *phase).sin(),
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (x - *center) / *width;
                *amplitude * (-z * z / T::lit(2.0)).exp()
            }
            Profile::Exp { amplitude, rate } => *amplitude * (*rate * x).exp(),
            Profile::Table { values } => {
                let last = values.len().saturating_sub(1);
                let p = grid.position(x).max(T::zero()).min(T::from_usize_exact(last));
                let i = p.floor().to_usize().unwrap_or(0).min(last.saturating_sub(1));
                let frac = p - T::from_usize_exact(i);
                if last == 0 {
                    return values.first().copied().unwrap_or_else(T::zero);
                }
                values[i] * (T::one() - frac) + values[i + 1] * frac
            }
        }
    }

    /// Values on the grid nodes (1-d grids).
    pub fn values(&self, grid: &Grid<T>) -> Result<Vec<T>> {
        grid.require_1d("profile evaluation")?;
        if let Profile::Table { values } = self {
            if values.len() != grid.n() {
                return Err(Error::Dimension(format!(
                    "table of {} values on a grid of {} nodes",
                    values.len(),
                    grid.n()
                )));
            }
            return Ok(values.clone());
        }
        Ok(grid.nodes().into_iter().map(|x| self.at(grid, x)).collect())
    }

    /// The profile as a test function of order 2.
    pub fn test_function(&self, grid: &Grid<T>) -> Result<TestFunction<T>> {
        TestFunction::new(*grid, self.values(grid)?, 2)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Constant { value } => *value == T::zero(),
            Profile::Linear { intercept, slope } => *intercept == T::zero() && *slope == T::zero(),
            Profile::Polynomial { coefficients } => coefficients.iter().all(|c| *c == T::zero()),
            Profile::Sin { amplitude, .. }
            | Profile::Gaussian { amplitude, .. }
            | Profile::Exp { amplitude, .. } => *amplitude == T::zero(),
            Profile::Table { values } => values.iter().all(|c| *c == T::zero()),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Profile::Constant { .. } => true,
            Profile::Linear { slope, .. } => *slope == T::zero(),
            Profile::Polynomial { coefficients } => coefficients.iter().skip(1).all(|c| *c == T::zero()),
            Profile::Sin {
                amplitude,
                frequency,
                ..
            } => *amplitude == T::zero() || *frequency == T::zero(),
            Profile::Gaussian { amplitude, .. } => *amplitude == T::zero(),
            Profile::Exp { amplitude, rate } => *amplitude == T::zero() || *rate == T::zero(),
            Profile::Table { values } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

/// Scalar function of time multiplying a coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile<T> {
    Constant { value: T },
    /// `intercept + slope·t`
    Linear { intercept: T, slope: T },
    /// `offset + amplitude·sin(frequency·t + phase)`
    Sin {
        offset: T,
        amplitude: T,
        frequency: T,
        phase: T,
    },
}

impl<T: Real> TimeProfile<T> {
    pub fn unit() -> Self {
        TimeProfile::Constant { value: T::one() }
    }

    pub fn at(&self, t: T) -> T {
        match self {
            TimeProfile::Constant { value } => *value,
            TimeProfile::Linear { intercept, slope } => *intercept + *slope * t,
            TimeProfile::Sin {
                offset,
                amplitude,
                frequency,
                phase,
            } => *offset + *amplitude * (*frequency * t + *phase).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeProfile::Constant { .. } => true,
            TimeProfile::Linear { slope, .. } => *slope == T::zero(),
            TimeProfile::Sin {
                amplitude,
                frequency,
                ..
            } => *amplitude == T::zero() || *frequency == T::zero(),
        }
    }
}

impl<T: Real> Default for TimeProfile<T> {
    fn default() -> Self {
        Self::unit()
    }
}

/// Smooth scalar map applied to a moment before it enters a coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    Tanh,
    Square,
}

impl Transform {
    pub fn apply<T: Real>(self, c: T) -> T {
        match self {
            Transform::Identity => c,
            Transform::Tanh => c.tanh(),
            Transform::Square => c * c,
        }
    }

    pub fn derivative<T: Real>(self, c: T) -> T {
        match self {
            Transform::Identity => T::one(),
            Transform::Tanh => {
                let th = c.tanh();
                T::one() - th * th
            }
            Transform::Square => T::lit(2.0) * c,
        }
    }
}
