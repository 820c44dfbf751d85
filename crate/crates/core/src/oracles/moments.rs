use crate::error::{Error, Result};

/// Closed-form moment curves of the reducible shipped scenarios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentOracle {
    /// Drift `−rate·(x, μ)`: `m(t) = m₀ e^{−rate·t}`.
    MeanFieldDrift { m0: f64, rate: f64 },
    /// Diffusion `G`: `var(t) = var₀ + G t`.
    HeatFlow { var0: f64, g: f64 },
    /// Uncompensated compound Poisson with rate `λ` and mean jump `E[y]`: `m(t) = m₀ + λ t E[y]`.
    CompoundPoissonMean { m0: f64, lambda: f64, mean_jump: f64 },
    /// Activity `λ·(e^x, μ_t)` for intensity `λ·(e^x, μ)` and jumps `δ_y`, `|y| > 1`;
    /// `c' = λ(e^y − 1)c²`.
    InteractingActivity { c0: f64, lambda: f64, jump: f64 },
}

impl MomentOracle {
    /// Builds an oracle from a tag and named parameters.
    pub fn from_tag(tag: &str, params: &[(&str, f64)]) -> Result<Self> {
        let get = |name: &str| {
            params
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::InvalidArgument(format!("moment oracle `{tag}` needs parameter `{name}`")))
        };
        let opt = |name: &str, default: f64| get(name).unwrap_or(default);
        match tag {
            "mean_field_drift" => Ok(Self::MeanFieldDrift {
                m0: get("m0")?,
                rate: opt("rate", 1.0),
            }),
            "heat_flow" => Ok(Self::HeatFlow {
                var0: get("var0")?,
                g: get("g")?,
            }),
            "compound_poisson_mean" => Ok(Self::CompoundPoissonMean {
                m0: opt("m0", 0.0),
                lambda: get("lambda")?,
                mean_jump: get("mean_jump")?,
            }),
            "interacting_activity" => Ok(Self::InteractingActivity {
                c0: get("c0")?,
                lambda: get("lambda")?,
                jump: get("jump")?,
            }),
            _ => Err(Error::InvalidArgument(format!("unknown moment oracle `{tag}`"))),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::MeanFieldDrift { m0, rate } => m0 * (-rate * t).exp(),
            Self::HeatFlow { var0, g } => var0 + g * t,
            Self::CompoundPoissonMean { m0, lambda, mean_jump } => m0 + lambda * t * mean_jump,
            Self::InteractingActivity { c0, lambda, jump } => {
                let k = lambda * (jump.exp() - 1.0);
                lambda * c0 / (1.0 - k * c0 * t)
            }
        }
    }

    pub fn on(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.at(t)).collect()
    }
}

/// `MomentOracle::from_tag(tag, params)` evaluated on `times`.
pub fn moment_oracle(tag: &str, params: &[(&str, f64)], times: &[f64]) -> Result<Vec<f64>> {
    Ok(MomentOracle::from_tag(tag, params)?.on(times))
}
