use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::generators::{Family, LocalCoefficients};
use crate::linear_prop::Partition;
use crate::measures::{Curve, Grid, GridMeasure};
use crate::scalar::Real;

/// Largest admissible `rate·δ` of the thinning bound in one step.
pub const MAX_RATE_STEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleOptions {
    pub particles: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Keep `(time, particle, position)` at every partition node.
    pub snapshots: bool,
}

impl Default for ParticleOptions {
    fn default() -> Self {
        Self {
            particles: 1000,
            seed: 0,
            alpha: 0.0,
            snapshots: false,
        }
    }
}

/// Interacting particle system with its empirical histograms.
#[derive(Clone, Debug)]
pub struct ParticleRun<T> {
    /// Cloud-in-cell histograms on the nodes of the partition.
    pub curve: Curve<T>,
    pub positions: Vec<f64>,
    pub jump_counts: Vec<u64>,
    /// Particles outside the grid at the final time.
    pub escaped: usize,
    pub snapshots: Vec<(f64, usize, f64)>,
}

impl<T: Real> ParticleRun<T> {
    pub fn mean_jumps(&self) -> f64 {
        self.jump_counts.iter().sum::<u64>() as f64 / self.jump_counts.len() as f64
    }

    /// CSV with columns `time,particle_id,position`.
    pub fn snapshots_csv(&self) -> String {
        let mut s = String::from("time,particle_id,position\n");
        for (t, i, x) in &self.snapshots {
            let _ = writeln!(s, "{t:.16e},{i},{x:.16e}");
        }
        s
    }
}

/// Cloud-in-cell histogram of `positions` on `grid`; particles outside `[lower, upper]` are dropped.
pub fn histogram<T: Real>(grid: &Grid<T>, positions: &[f64]) -> Result<GridMeasure<T>> {
    grid.require_1d("particle histograms")?;
    let n = grid.n();
    let lower = grid.lower().to_f64_lossy();
    let upper = grid.upper().to_f64_lossy();
    let h = grid.spacing().to_f64_lossy();
    let unit = 1.0 / positions.len() as f64;
    let mut w = vec![0.0f64; n];
    for &x in positions {
        if !(lower..=upper).contains(&x) {
            continue;
        }
        let p = (x - lower) / h;
        let i = p.floor() as usize;
        if i + 1 >= n {
            w[n - 1] += unit;
            continue;
        }
        let frac = p - i as f64;
        w[i] += unit * (1.0 - frac);
        w[i + 1] += unit * frac;
    }
    GridMeasure::new(*grid, w.into_iter().map(T::lit).collect())
}

struct Particle {
    x: f64,
    rng: ChaCha8Rng,
    jumps: u64,
}

/// Euler–Maruyama plus thinned jumps for `N` particles driven by the empirical measure.
///
/// Each particle owns a ChaCha8 stream selected by its index, so runs are reproducible for a seed.
pub fn particle_simulate<T: Real>(
    family: &Family<T>,
    mu0: &GridMeasure<T>,
    partition: &Partition<T>,
    options: &ParticleOptions,
) -> Result<ParticleRun<T>> {
    family.validate()?;
    mu0.require_probability()?;
    let grid = *mu0.grid();
    grid.require_1d("particle simulation")?;
    if options.particles == 0 {
        return Err(Error::InvalidArgument("at least one particle is required".into()));
    }
    let weights: Vec<f64> = mu0.weights().iter().map(|w| w.to_f64_lossy().max(0.0)).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("initial measure: {e}")))?;
    let mut particles: Vec<Particle> = (0..options.particles)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(i as u64);
            let x = grid.node(pick.sample(&mut rng)).to_f64_lossy();
            Particle { x, rng, jumps: 0 }
        })
        .collect();
    let functionals = family.functionals().to_vec();
    let alpha = T::lit(options.alpha);
    let positions = |ps: &[Particle]| ps.iter().map(|p| p.x).collect::<Vec<_>>();
    let mut snapshots = Vec::new();
    let mut record = |t: f64, ps: &[Particle]| {
        if options.snapshots {
            snapshots.extend(ps.iter().enumerate().map(|(i, p)| (t, i, p.x)));
        }
    };
    let mut curve = vec![histogram(&grid, &positions(&particles))?];
    record(partition.start().to_f64_lossy(), &particles);
    let inv = 1.0 / options.particles as f64;
    for j in 0..partition.steps() {
        let t = partition.nodes()[j];
        let dt = partition.dt(j).to_f64_lossy();
        let m: Vec<T> = functionals
            .iter()
            .map(|phi| T::lit(particles.iter().map(|p| phi.at(&grid, T::lit(p.x)).to_f64_lossy()).sum::<f64>() * inv))
            .collect();
        let locals: Vec<LocalCoefficients<T>> = particles
            .iter()
            .map(|p| family.local(&grid, t, &m, alpha, T::lit(p.x)))
            .collect::<Result<_>>()?;
        let totals: Vec<f64> = locals
            .iter()
            .map(|l| l.jumps.iter().map(|(_, r)| r.to_f64_lossy()).sum())
            .collect();
        if totals.iter().any(|r| *r < 0.0) {
            return Err(Error::Invariant("negative jump rate in particle simulation".into()));
        }
        let bound = totals.iter().copied().fold(0.0, f64::max);
        if bound * dt > MAX_RATE_STEP {
            return Err(Error::StepRejected(format!(
                "jump rate bound {bound:.3e} times step {dt:.3e} exceeds {MAX_RATE_STEP}"
            )));
        }
        let candidates = (bound > 0.0).then(|| Poisson::new(bound * dt)).transpose().map_err(|e| Error::Numerical(e.to_string()))?;
        for ((p, l), total) in particles.iter_mut().zip(&locals).zip(&totals) {
            let x0 = p.x;
            let g = l.diffusion.to_f64_lossy();
            p.x += l.drift.to_f64_lossy() * dt;
            if g > 0.0 {
                let z: f64 = StandardNormal.sample(&mut p.rng);
                p.x += (g * dt).sqrt() * z;
            }
            if let Some(poisson) = &candidates {
                let k = poisson.sample(&mut p.rng) as u64;
                for _ in 0..k {
                    let u: f64 = p.rng.random::<f64>() * bound;
                    if u >= *total {
                        continue;
                    }
                    // the accepted event picks a displacement with probability proportional to its rate
                    let mut acc = 0.0;
                    for (y, r) in &l.jumps {
                        acc += r.to_f64_lossy();
                        if u < acc {
                            p.x += y.to_f64_lossy();
                            break;
                        }
                    }
                    p.jumps += 1;
                }
            }
            if !p.x.is_finite() {
                return Err(Error::Numerical(format!("particle left from {x0} to a non-finite position")));
            }
        }
        curve.push(histogram(&grid, &positions(&particles))?);
        record(partition.nodes()[j + 1].to_f64_lossy(), &particles);
    }
    let final_positions = positions(&particles);
    let lower = grid.lower().to_f64_lossy();
    let upper = grid.upper().to_f64_lossy();
    let escaped = final_positions.iter().filter(|x| !(lower..=upper).contains(*x)).count();
    if escaped > 0 {
        log::warn!("domain escape: {escaped} particles left the grid");
    }
    Ok(ParticleRun {
        curve: Curve::new(partition.nodes().to_vec(), curve)?,
        jump_counts: particles.iter().map(|p| p.jumps).collect(),
        positions: final_positions,
        escaped,
        snapshots,
    })
}
