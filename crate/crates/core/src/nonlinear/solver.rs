use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Family;
use crate::linear_prop::{EngineKind, Freeze, Partition, Propagator, StepInput};
use crate::measures::{dual_norm_upper_bound, Curve, GridMeasure};
use crate::scalar::Real;

/// Propagator engine used for each sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    /// Spectral for Lévy families, matrix otherwise.
    #[default]
    Auto,
    Spectral,
    Matrix,
}

/// Starting curve of every window.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialGuess<T> {
    /// `ξ_s ≡ μ_{window start}`
    #[default]
    Constant,
    /// Linear interpolation from the window start towards the given measure.
    Interpolate(GridMeasure<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticOptions<T> {
    /// Stop once the sup over the window of the certified `(C²)'` distance between sweeps is below this.
    pub tol: f64,
    pub freeze: Freeze,
    pub engine: EngineChoice,
    pub alpha: T,
    pub max_sweeps: usize,
    pub guess: InitialGuess<T>,
}

impl<T: Real> Default for KineticOptions<T> {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            freeze: Freeze::LeftEndpoint,
            engine: EngineChoice::Auto,
            alpha: T::zero(),
            max_sweeps: 200,
            guess: InitialGuess::Constant,
        }
    }
}

/// Sweep distances of one accepted window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowLog {
    pub start: f64,
    pub end: f64,
    pub distances: Vec<f64>,
}

impl WindowLog {
    pub fn sweeps(&self) -> usize {
        self.distances.len()
    }

    /// `(last/first)^{1/(sweeps−1)}`; zero when the last sweep reproduced its input exactly.
    pub fn ratio(&self) -> Option<f64> {
        let d = &self.distances;
        if d.len() < 2 || d[0] <= 0.0 {
            return None;
        }
        let last = *d.last()?;
        if last <= 0.0 {
            return Some(0.0);
        }
        Some((last / d[0]).powf(1.0 / (d.len() - 1) as f64))
    }

    /// `last/first`
    pub fn total_ratio(&self) -> Option<f64> {
        let d = &self.distances;
        (d.len() >= 2 && d[0] > 0.0).then(|| d[d.len() - 1] / d[0])
    }
}

/// Solution curve of the kinetic equation with its iteration log.
#[derive(Clone, Debug)]
pub struct KineticSolution<T> {
    pub curve: Curve<T>,
    pub partition: Partition<T>,
    pub family: Family<T>,
    pub options: KineticOptions<T>,
    pub engine: EngineKind,
    pub windows: Vec<WindowLog>,
    /// Shortest accepted window length.
    pub window_length: f64,
    /// `max_j` certified `(C²)'` distance of consecutive nodes divided by the step.
    pub continuity: f64,
    pub mass_defect: f64,
    pub min_weight: f64,
    pub lost_rate: f64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    engine: String,
    nodes: usize,
    grid_points: usize,
    tol: f64,
    window_length: f64,
    continuity: f64,
    mass_defect: f64,
    min_weight: f64,
    lost_rate: f64,
    max_ratio: Option<f64>,
    windows: &'a [WindowLog],
}

impl<T: Real> KineticSolution<T> {
    pub fn final_measure(&self) -> &GridMeasure<T> {
        self.curve.last()
    }

    pub fn at(&self, t: T) -> Result<&GridMeasure<T>> {
        self.curve.at(t)
    }

    /// Largest per-window contraction ratio.
    pub fn max_ratio(&self) -> Option<f64> {
        self.windows.iter().filter_map(|w| w.ratio()).reduce(f64::max)
    }

    /// CSV with columns `time,node,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,node,weight\n");
        let grid = self.curve.grid();
        for (t, mu) in self.curve.times().iter().zip(self.curve.values()) {
            for (i, w) in mu.weights().iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e}",
                    t.to_f64_lossy(),
                    grid.node(i).to_f64_lossy(),
                    w.to_f64_lossy()
                );
            }
        }
        s
    }

    /// Serializable run summary: windows, ratios and invariant defects.
    pub fn report(&self) -> impl Serialize + '_ {
        RunReport {
            engine: format!("{:?}", self.engine),
            nodes: self.partition.len(),
            grid_points: self.curve.grid().len(),
            tol: self.options.tol,
            window_length: self.window_length,
            continuity: self.continuity,
            mass_defect: self.mass_defect,
            min_weight: self.min_weight,
            lost_rate: self.lost_rate,
            max_ratio: self.max_ratio(),
            windows: &self.windows,
        }
    }
}

pub(crate) fn build_engine<T: Real>(
    family: &Family<T>,
    grid: &crate::measures::Grid<T>,
    partition: &Partition<T>,
    inputs: Vec<StepInput<T>>,
    alpha: T,
    choice: EngineChoice,
) -> Result<Propagator<T>> {
    match (choice, family) {
        (EngineChoice::Auto | EngineChoice::Spectral, Family::Levy(f)) => {
            Propagator::spectral_from_inputs(f, grid, partition, inputs, alpha)
        }
        (EngineChoice::Spectral, _) => Err(Error::Unsupported("the spectral engine needs a Lévy family".into())),
        _ => Propagator::matrix_from_inputs(family, grid, partition, inputs, alpha),
    }
}

/// Clears round-off negatives and restores unit mass when it drifted slightly.
fn project<T: Real>(w: &mut [T]) {
    let clip = T::lit(-1e-12);
    for v in w.iter_mut() {
        if *v < T::zero() && *v >= clip {
            *v = T::zero();
        }
    }
    let mass: T = w.iter().copied().sum();
    let defect = (mass - T::one()).abs().to_f64_lossy();
    if defect > 1e-12 && defect < 1e-8 {
        let s = T::one() / mass;
        w.iter_mut().for_each(|v| *v = *v * s);
    }
}

fn sup_distance<T: Real>(a: &[GridMeasure<T>], b: &[GridMeasure<T>]) -> Result<f64> {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        d = d.max(dual_norm_upper_bound(x, y, 2)?.to_f64_lossy());
    }
    Ok(d)
}

struct Solver<'a, T> {
    family: &'a Family<T>,
    partition: &'a Partition<T>,
    options: &'a KineticOptions<T>,
    kind: Option<EngineKind>,
    lost: f64,
}

enum WindowOutcome<T> {
    Accepted(Vec<GridMeasure<T>>, WindowLog),
    /// First sweeps contract too slowly; carries the observed ratio.
    Slow(f64, Vec<f64>),
}

impl<T: Real> Solver<'_, T> {
    fn sweep(&mut self, window: &Partition<T>, guess: &[GridMeasure<T>]) -> Result<Vec<GridMeasure<T>>> {
        let grid = *guess[0].grid();
        let moments = guess.iter().map(|m| self.family.moments(m)).collect::<Result<Vec<_>>>()?;
        let inputs = StepInput::from_node_moments(window, &moments, self.options.freeze);
        let prop = build_engine(self.family, &grid, window, inputs, self.options.alpha, self.options.engine)?;
        self.kind = Some(prop.kind());
        self.lost = self.lost.max(prop.lost_rate().to_f64_lossy());
        let mut out = Vec::with_capacity(guess.len());
        out.push(guess[0].clone());
        let mut w = guess[0].weights().to_vec();
        for j in 0..window.steps() {
            w = prop.dual_between(&w, j, j + 1);
            project(&mut w);
            out.push(GridMeasure::new(grid, w.clone())?);
        }
        Ok(out)
    }

    fn initial_guess(&self, start: &GridMeasure<T>, window: &Partition<T>) -> Result<Vec<GridMeasure<T>>> {
        match &self.options.guess {
            InitialGuess::Constant => Ok(vec![start.clone(); window.len()]),
            InitialGuess::Interpolate(target) => {
                let (t0, t1) = (window.start(), window.end());
                window
                    .nodes()
                    .iter()
                    .map(|&t| {
                        let s = (t - t0) / (t1 - t0);
                        start.combine(T::one() - s, target, s)
                    })
                    .collect()
            }
        }
    }

    fn window(&mut self, start: &GridMeasure<T>, a: usize, b: usize, may_shrink: bool) -> Result<WindowOutcome<T>> {
        let window = self.partition.slice(a, b)?;
        let mut cur = self.initial_guess(start, &window)?;
        let mut distances = Vec::new();
        for _ in 0..self.options.max_sweeps {
            let next = self.sweep(&window, &cur)?;
            let d = sup_distance(&next, &cur)?;
            distances.push(d);
            cur = next;
            if !d.is_finite() {
                return Ok(WindowOutcome::Slow(f64::INFINITY, distances));
            }
            if d < self.options.tol {
                let log = WindowLog {
                    start: window.start().to_f64_lossy(),
                    end: window.end().to_f64_lossy(),
                    distances,
                };
                return Ok(WindowOutcome::Accepted(cur, log));
            }
            if distances.len() == 2 {
                let ratio = distances[1] / distances[0];
                if (may_shrink && ratio > 0.5) || ratio >= 1.0 {
                    return Ok(WindowOutcome::Slow(ratio, distances));
                }
            }
        }
        let d = &distances;
        Ok(WindowOutcome::Slow(d[d.len() - 1] / d[0], distances))
    }
}

/// Solves the kinetic equation from time 0 to `horizon` on a uniform mesh not exceeding `mesh`.
pub fn solve_kinetic<T: Real>(
    family: &Family<T>,
    mu0: &GridMeasure<T>,
    horizon: T,
    mesh: T,
    options: &KineticOptions<T>,
) -> Result<KineticSolution<T>> {
    let partition = Partition::with_mesh(T::zero(), horizon, mesh)?;
    solve_kinetic_on(family, mu0, &partition, options)
}

/// Solves the kinetic equation on the nodes of `partition`, starting from `mu0` at its first node.
pub fn solve_kinetic_on<T: Real>(
    family: &Family<T>,
    mu0: &GridMeasure<T>,
    partition: &Partition<T>,
    options: &KineticOptions<T>,
) -> Result<KineticSolution<T>> {
    family.validate()?;
    mu0.require_probability()?;
    if let InitialGuess::Interpolate(target) = &options.guess {
        mu0.grid().require_same(target.grid())?;
    }
    if !(options.tol > 0.0) || options.max_sweeps < 2 {
        return Err(Error::InvalidArgument("solver needs tol > 0 and at least two sweeps".into()));
    }
    let mut solver = Solver {
        family,
        partition,
        options,
        kind: None,
        lost: 0.0,
    };
    let steps = partition.steps();
    let mut nodes = vec![mu0.clone()];
    let mut windows = Vec::new();
    let mut len = steps;
    let mut shortest = f64::INFINITY;
    let mut a = 0;
    while a < steps {
        let mut l = len.min(steps - a);
        let start = nodes[a].clone();
        loop {
            let b = a + l;
            match solver.window(&start, a, b, l > 1)? {
                WindowOutcome::Accepted(curve, log) => {
                    shortest = shortest.min(log.end - log.start);
                    nodes.extend(curve.into_iter().skip(1));
                    windows.push(log);
                    a = b;
                    break;
                }
                WindowOutcome::Slow(ratio, distances) => {
                    if l == 1 {
                        return Err(Error::WellPosedness(format!(
                            "window [{}, {}] of one step still has contraction ratio {ratio:.3e} \
                             (sweep distances {distances:?})",
                            partition.nodes()[a],
                            partition.nodes()[b]
                        )));
                    }
                    log::debug!("window of {l} steps contracts with ratio {ratio:.3e}; halving");
                    l = l.div_ceil(2);
                }
            }
        }
        len = l;
    }
    let mut continuity = 0.0f64;
    for (j, w) in nodes.windows(2).enumerate() {
        let d = dual_norm_upper_bound(&w[1], &w[0], 2)?.to_f64_lossy();
        continuity = continuity.max(d / partition.dt(j).to_f64_lossy());
    }
    let mass_defect = nodes
        .iter()
        .map(|m| (m.mass() - T::one()).abs().to_f64_lossy())
        .fold(0.0, f64::max);
    let min_weight = nodes
        .iter()
        .map(|m| m.min_weight().to_f64_lossy())
        .fold(f64::INFINITY, f64::min);
    if mass_defect > 1e-8 {
        log::warn!("mass defect {mass_defect:.3e} exceeds 1e-8");
    }
    Ok(KineticSolution {
        curve: Curve::new(partition.nodes().to_vec(), nodes)?,
        partition: partition.clone(),
        family: family.clone(),
        options: options.clone(),
        engine: solver.kind.unwrap_or(EngineKind::Matrix),
        windows,
        window_length: shortest,
        continuity,
        mass_defect,
        min_weight,
        lost_rate: solver.lost,
    })
}
