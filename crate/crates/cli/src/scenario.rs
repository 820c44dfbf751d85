use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nlmarkov::generators::{Coefficient, Family, JumpMeasure, LevyFamily, OrderOneFamily, Profile};
use nlmarkov::linear_prop::{Freeze, Partition};
use nlmarkov::nonlinear::{EngineChoice, KineticOptions};
use nlmarkov::{Grid, GridMeasure};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: &str = "nlmarkov.scenario.v1";

/// One run configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub grid: GridSpec,
    pub family: FamilySpec,
    pub initial: InitialSpec,
    pub horizon: f64,
    pub mesh: f64,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<ParticleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    /// Directory that relative file references resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Solution, Output::Report]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

/// Named preset or a full coefficient table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Preset(Preset),
    Table(Family<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// Lévy family with diffusion `g` and drift `shift + slope·(x, μ)`, the slope scaled by `α` if asked.
    MeanFieldDrift {
        diffusion: f64,
        slope: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        alpha_scaled: bool,
    },
    /// Constant diffusion.
    Heat { diffusion: f64 },
    /// Order-one family with drift `(φ, μ)`, `φ = sin(x)/3`, and uniform lattice jumps of total rate `rate`.
    UnitMomentDrift {
        max_jump: f64,
        n_jump_nodes: usize,
        rate: f64,
    },
    /// Order-one family with jump rates `rate·|y|^{−1−exponent}` on a lattice.
    HeavyTail {
        max_jump: f64,
        n_jump_nodes: usize,
        rate: f64,
        exponent: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Gaussian { mean: f64, std: f64 },
    /// Signed zero-mass measure `−d/dx` of a Gaussian, normalized to unit first moment.
    Dipole { center: f64, std: f64 },
    /// Weights read from a `node,weight` CSV file.
    Histogram { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezeSpec {
    #[default]
    LeftEndpoint,
    Midpoint,
}

impl From<FreezeSpec> for Freeze {
    fn from(f: FreezeSpec) -> Self {
        match f {
            FreezeSpec::LeftEndpoint => Freeze::LeftEndpoint,
            FreezeSpec::Midpoint => Freeze::Midpoint,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub freeze: FreezeSpec,
    pub engine: EngineChoice,
    pub max_sweeps: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = KineticOptions::<f64>::default();
        Self {
            tol: d.tol,
            freeze: FreezeSpec::LeftEndpoint,
            engine: d.engine,
            max_sweeps: d.max_sweeps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub eps: f64,
    /// Number of Gaussian sample measures spread over the middle of the grid.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySpec {
    /// Strictly decreasing finite-difference steps.
    pub h: Vec<f64>,
    pub samples: usize,
    /// Rate at which a Gaussian initial mean moves with `α`.
    #[serde(default)]
    pub mean_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Solution,
    Report,
    Particles,
}

fn field(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {msg}"))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| field("config", format!("{}: {e}", path.display())))?;
        let mut s = Self::from_json(&text)?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(field("schema", format!("expected {SCHEMA:?}, got {:?}", self.schema)));
        }
        if !(self.grid.lower < self.grid.upper) {
            return Err(field("grid.upper", "must exceed grid.lower"));
        }
        if self.grid.n < 8 {
            return Err(field("grid.n", "needs at least 8 nodes"));
        }
        positive("horizon", self.horizon)?;
        positive("mesh", self.mesh)?;
        if self.mesh > self.horizon {
            return Err(field("mesh", "exceeds the horizon"));
        }
        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_sweeps == 0 {
            return Err(field("solver.max_sweeps", "must be at least 1"));
        }
        if let Some(a) = self.alpha {
            if !a.is_finite() {
                return Err(field("alpha", "must be finite"));
            }
        }
        if let Some(c) = &self.checks {
            positive("checks.eps", c.eps)?;
            if c.samples < 2 {
                return Err(field("checks.samples", "needs at least 2 sample measures"));
            }
        }
        if let Some(s) = &self.sensitivity {
            if s.h.is_empty() || s.h.iter().any(|&h| !(h > 0.0)) || s.h.windows(2).any(|w| w[1] >= w[0]) {
                return Err(field("sensitivity.h", "must be positive and strictly decreasing"));
            }
        }
        if let Some(p) = &self.particles {
            if p.count == 0 {
                return Err(field("particles.count", "must be positive"));
            }
        }
        self.family.validate("family")?;
        self.initial.validate("initial")?;
        if let Some(c) = &self.compare {
            c.family.validate("compare.family")?;
            if let Some(i) = &c.initial {
                i.validate("compare.initial")?;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        Grid::new(self.grid.lower, self.grid.upper, self.grid.n).map_err(|e| field("grid", e))
    }

    pub fn build_family(&self) -> Result<Family<f64>, CliError> {
        self.family.build("family")
    }

    pub fn initial_measure(&self) -> Result<GridMeasure<f64>, CliError> {
        self.initial.build(&self.grid()?, &self.base_dir, "initial")
    }

    pub fn partition(&self) -> Result<Partition<f64>, CliError> {
        Partition::with_mesh(0.0, self.horizon, self.mesh).map_err(|e| field("mesh", e))
    }

    pub fn options(&self, alpha: f64) -> KineticOptions<f64> {
        KineticOptions {
            tol: self.solver.tol,
            freeze: self.solver.freeze.into(),
            engine: self.solver.engine,
            alpha,
            max_sweeps: self.solver.max_sweeps,
            ..Default::default()
        }
    }

    /// Gaussian sample measures for the hypothesis checks.
    pub fn check_samples(&self, count: usize) -> Result<Vec<GridMeasure<f64>>, CliError> {
        let grid = self.grid()?;
        let (lo, hi) = (self.grid.lower, self.grid.upper);
        let mid = 0.5 * (lo + hi);
        let half = 0.25 * (hi - lo);
        (0..count)
            .map(|k| {
                let s = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
                let mean = mid - 0.5 * half + s * half;
                let std = half * (0.15 + 0.1 * ((k % 3) as f64));
                GridMeasure::gaussian(grid, mean, std).map_err(|e| field("checks", e))
            })
            .collect()
    }
}

impl FamilySpec {
    fn validate(&self, name: &str) -> Result<(), CliError> {
        match self {
            FamilySpec::Table(f) => f.validate().map_err(|e| field(name, e)),
            FamilySpec::Preset(p) => p.validate(name),
        }
    }

    pub fn build(&self, name: &str) -> Result<Family<f64>, CliError> {
        match self {
            FamilySpec::Table(f) => Ok(f.clone()),
            FamilySpec::Preset(p) => p.build().map_err(|e| field(name, e)),
        }
    }
}

fn lattice(max_jump: f64, nodes: usize, rate: impl Fn(f64) -> f64) -> nlmarkov::Result<JumpMeasure<f64>> {
    let step = 2.0 * max_jump / (nodes - 1) as f64;
    let points = (0..nodes)
        .map(|k| -max_jump + k as f64 * step)
        .filter(|y| y.abs() > 1e-9 * step)
        .map(|y| (y, rate(y)))
        .collect();
    JumpMeasure::points(points)
}

impl Preset {
    fn validate(&self, name: &str) -> Result<(), CliError> {
        match *self {
            Preset::MeanFieldDrift { diffusion, .. } | Preset::Heat { diffusion } => {
                if !(diffusion >= 0.0) {
                    return Err(field(&format!("{name}.diffusion"), "must be nonnegative"));
                }
            }
            Preset::UnitMomentDrift {
                max_jump,
                n_jump_nodes,
                rate,
            }
            | Preset::HeavyTail {
                max_jump,
                n_jump_nodes,
                rate,
                ..
            } => {
                positive(&format!("{name}.max_jump"), max_jump)?;
                if n_jump_nodes < 2 {
                    return Err(field(&format!("{name}.n_jump_nodes"), "needs at least 2 nodes"));
                }
                if !(rate >= 0.0) {
                    return Err(field(&format!("{name}.rate"), "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    fn build(&self) -> nlmarkov::Result<Family<f64>> {
        Ok(match *self {
            Preset::MeanFieldDrift {
                diffusion,
                slope,
                shift,
                alpha_scaled,
            } => {
                let mut drift = Coefficient::linear(shift, 0, slope);
                if alpha_scaled {
                    drift = drift.scaling_interaction_by_alpha();
                }
                LevyFamily::new(vec![Profile::identity()])
                    .with_diffusion(Coefficient::constant(diffusion))
                    .with_drift(drift)
                    .into()
            }
            Preset::Heat { diffusion } => LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(diffusion)).into(),
            Preset::UnitMomentDrift {
                max_jump,
                n_jump_nodes,
                rate,
            } => {
                let phi = Profile::Sin {
                    amplitude: 1.0 / 3.0,
                    frequency: 1.0,
                    phase: 0.0,
                };
                let jumps = lattice(max_jump, n_jump_nodes, |_| rate / (n_jump_nodes - 1) as f64)?;
                OrderOneFamily::new(vec![phi])
                    .with_drift(Coefficient::linear(0.0, 0, 1.0), Profile::constant(1.0))
                    .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), jumps)
                    .into()
            }
            Preset::HeavyTail {
                max_jump,
                n_jump_nodes,
                rate,
                exponent,
            } => {
                let jumps = lattice(max_jump, n_jump_nodes, |y| rate * y.abs().powf(-1.0 - exponent))?;
                OrderOneFamily::new(vec![])
                    .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), jumps)
                    .into()
            }
        })
    }
}

impl InitialSpec {
    fn validate(&self, name: &str) -> Result<(), CliError> {
        match *self {
            InitialSpec::Gaussian { std, .. } | InitialSpec::Dipole { std, .. } => positive(&format!("{name}.std"), std),
            InitialSpec::Histogram { .. } => Ok(()),
        }
    }

    pub fn build(&self, grid: &Grid<f64>, base: &Path, name: &str) -> Result<GridMeasure<f64>, CliError> {
        match self {
            InitialSpec::Gaussian { mean, std } => GridMeasure::gaussian(*grid, *mean, *std),
            InitialSpec::Dipole { center, std } => GridMeasure::gaussian_dipole(*grid, *center, *std),
            InitialSpec::Histogram { path } => GridMeasure::read_csv(*grid, base.join(path)),
        }
        .map_err(|e| field(name, e))
    }
}

/// Shipped scenarios, embedded at build time.
pub fn shipped() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("meanfield_drift", include_str!("../../../scenarios/meanfield_drift.json")),
        ("meanfield_sensitivity", include_str!("../../../scenarios/meanfield_sensitivity.json")),
        ("heat_sensitivity", include_str!("../../../scenarios/heat_sensitivity.json")),
        ("unit_moment_drift", include_str!("../../../scenarios/unit_moment_drift.json")),
        ("heavy_tail", include_str!("../../../scenarios/heavy_tail.json")),
        ("meanfield_compare", include_str!("../../../scenarios/meanfield_compare.json")),
    ])
}

pub fn shipped_scenario(name: &str) -> Result<Scenario, CliError> {
    let text = shipped()
        .get(name)
        .copied()
        .ok_or_else(|| CliError::Other(format!("no shipped scenario {name}")))?;
    Scenario::from_json(text)
}
