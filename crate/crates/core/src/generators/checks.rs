use crate::error::{Error, Result};
use crate::generators::{Family, LevyFamily, OrderOneFamily};
use crate::measures::{dual_norm, Grid, GridMeasure};
use crate::scalar::{sup_diff, Real};

/// Sums rates of coincident displacements; output sorted by displacement.
fn merge<T: Real>(mut pairs: Vec<(T, T)>) -> Vec<(T, T)> {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(T, T)> = Vec::with_capacity(pairs.len());
    for (y, w) in pairs {
        match out.last_mut() {
            Some(last) if (last.0 - y).abs() <= T::lit(1e-12) * T::one().max(y.abs()) => last.1 = last.1 + w,
            _ => out.push((y, w)),
        }
    }
    out
}

/// `Σ_y weight(y)·|ν₁(y) − ν₂(y)|` over the union of both supports.
fn weighted_distance<T: Real>(a: &[(T, T)], b: &[(T, T)], weight: impl Fn(T) -> T) -> T {
    let mut all: Vec<(T, T)> = a.to_vec();
    all.extend(b.iter().map(|&(y, w)| (y, -w)));
    merge(all).into_iter().map(|(y, w)| weight(y) * w.abs()).sum()
}

/// Largest coefficient-to-distance ratio over sample pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzEstimate<T> {
    pub kappa: T,
    /// Index of the maximizing pair, if any pair was usable.
    pub argmax: Option<usize>,
    pub skipped: usize,
}

/// `κ̂ = max (‖ΔG‖ + |Δb| + Σ min(1,|y|²)|Δν|) / dual_norm(μ, η, 2)` over the samples.
pub fn estimate_levy_lipschitz<T: Real>(
    family: &LevyFamily<T>,
    samples: &[(GridMeasure<T>, GridMeasure<T>)],
    t: T,
    alpha: T,
) -> Result<LipschitzEstimate<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("Lipschitz estimate needs at least one sample pair".into()));
    }
    family.validate()?;
    let fam = Family::Levy(family.clone());
    let mut est = LipschitzEstimate {
        kappa: T::zero(),
        argmax: None,
        skipped: 0,
    };
    for (idx, (mu, eta)) in samples.iter().enumerate() {
        mu.grid().require_same(eta.grid())?;
        if mu.weights() == eta.weights() {
            log::warn!("sample pair {idx} is coincident; skipped");
            est.skipped += 1;
            continue;
        }
        let a = family.coefficients_at(t, &fam.moments(mu)?, alpha);
        let b = family.coefficients_at(t, &fam.moments(eta)?, alpha);
        let jumps = |c: &crate::generators::LevyCoefficients<T>| merge(c.jumps.iter().collect());
        let num = (a.diffusion - b.diffusion).abs()
            + (a.drift - b.drift).abs()
            + weighted_distance(&jumps(&a), &jumps(&b), |y| T::one().min(y * y));
        if num == T::zero() {
            if est.argmax.is_none() {
                est.argmax = Some(idx);
            }
            continue;
        }
        let den = dual_norm(mu, eta, 2)?;
        if den <= T::zero() {
            log::warn!("sample pair {idx} is not separated by dual_norm; skipped");
            est.skipped += 1;
            continue;
        }
        let r = num / den;
        if est.argmax.is_none() || r > est.kappa {
            est.kappa = r;
            est.argmax = Some(idx);
        }
    }
    Ok(est)
}

/// Numeric evidence for boundedness, tightness and Lipschitz continuity of an order-one family.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderOneReport<T> {
    /// `sup_{x,μ} Σ_y min(1,|y|)·ν(x,μ,y)`
    pub boundedness: T,
    /// `sup_{x,μ} |b(x,μ)|`
    pub drift_bound: T,
    /// `sup_{x,μ} Σ_y min(1,|y|)·|∂_x ν(x,μ,y)|` by forward differences.
    pub gradient_bound: T,
    /// Smallest cut `K ≤ max_cut` with `ν(|y| > K)` and its x-gradient below `eps`.
    pub cut: Option<T>,
    pub tail: T,
    pub gradient_tail: T,
    /// Smallest `K` with `sup_{x,μ} Σ_{|y|<1/K} |y|·ν(x,μ,y)` below `eps`.
    pub small_ball_cut: Option<T>,
    pub small_ball: T,
    pub lipschitz_nu: T,
    pub lipschitz_drift: T,
    pub bounded: bool,
    pub tight: bool,
    pub lipschitz: bool,
}

impl<T: Real> OrderOneReport<T> {
    pub fn passed(&self) -> bool {
        self.bounded && self.tight && self.lipschitz
    }
}

/// Per-node merged jump kernel `ν(x_i, μ, ·)`.
fn kernel<T: Real>(family: &OrderOneFamily<T>, grid: &Grid<T>, t: T, m: &[T], alpha: T) -> Result<Vec<Vec<(T, T)>>> {
    let n = grid.n();
    let mut raw: Vec<Vec<(T, T)>> = vec![Vec::new(); n];
    for term in &family.jumps {
        let a = term.coefficient.value(t, m, alpha);
        let p = term.profile.values(grid)?;
        for (i, row) in raw.iter_mut().enumerate() {
            row.extend(term.shape.iter().map(|(y, w)| (y, a * p[i] * w)));
        }
    }
    Ok(raw.into_iter().map(merge).collect())
}

/// Checks with cut radii limited to a quarter of the domain length.
pub fn validate_order_one_conditions<T: Real>(
    family: &OrderOneFamily<T>,
    grid: &Grid<T>,
    eps: T,
    samples: &[GridMeasure<T>],
    t: T,
    alpha: T,
) -> Result<OrderOneReport<T>> {
    let max_cut = (grid.upper() - grid.lower()) / T::lit(4.0);
    validate_order_one_conditions_with_cut(family, grid, eps, samples, t, alpha, max_cut)
}

/// Evaluates the conditions over the sample measures and all their pairs.
///
/// Tightness passes when some cut `K ≤ max_cut` makes the tail and its gradient smaller than
/// `eps` and some `K` makes the small-ball moment smaller than `eps`.
pub fn validate_order_one_conditions_with_cut<T: Real>(
    family: &OrderOneFamily<T>,
    grid: &Grid<T>,
    eps: T,
    samples: &[GridMeasure<T>],
    t: T,
    alpha: T,
    max_cut: T,
) -> Result<OrderOneReport<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    family.validate()?;
    family.check_grid(grid)?;
    let fam = Family::OrderOne(family.clone());
    let h = grid.spacing();
    let mut moments = Vec::with_capacity(samples.len().max(1));
    for mu in samples {
        grid.require_same(mu.grid())?;
        moments.push(fam.moments(mu)?);
    }
    if moments.is_empty() {
        if !family.is_measure_independent() {
            return Err(Error::InvalidArgument(
                "measure-dependent families need at least one sample measure".into(),
            ));
        }
        moments.push(vec![T::zero(); family.functionals.len()]);
    }

    let mut kernels = Vec::with_capacity(moments.len());
    let mut drifts = Vec::with_capacity(moments.len());
    for m in &moments {
        kernels.push(kernel(family, grid, t, m, alpha)?);
        drifts.push(family.drift_values(grid, t, m, alpha)?);
    }

    let small = |y: T| T::one().min(y.abs());
    let mut boundedness = T::zero();
    let mut gradient_bound = T::zero();
    let mut radii: Vec<T> = Vec::new();
    for k in &kernels {
        for (i, row) in k.iter().enumerate() {
            boundedness = boundedness.max(row.iter().map(|&(y, w)| small(y) * w.abs()).sum());
            if i + 1 < k.len() {
                gradient_bound = gradient_bound.max(weighted_distance(&k[i + 1], row, small) / h);
            }
            radii.extend(row.iter().map(|&(y, _)| y.abs()));
        }
    }
    let drift_bound = drifts.iter().map(|b| crate::scalar::sup_norm(b)).fold(T::zero(), T::max);

    let tails = |cut: T| {
        let mut tail = T::zero();
        let mut gtail = T::zero();
        for k in &kernels {
            for (i, row) in k.iter().enumerate() {
                tail = tail.max(row.iter().filter(|p| p.0.abs() > cut).map(|p| p.1.abs()).sum());
                if i + 1 < k.len() {
                    let out = |v: &[(T, T)]| v.iter().copied().filter(|p| p.0.abs() > cut).collect::<Vec<_>>();
                    gtail = gtail.max(weighted_distance(&out(&k[i + 1]), &out(row), |_| T::one()) / h);
                }
            }
        }
        (tail, gtail)
    };
    let ball = |cut: T| {
        let r = T::one() / cut;
        kernels
            .iter()
            .flatten()
            .map(|row| row.iter().filter(|p| p.0.abs() < r).map(|p| p.0.abs() * p.1.abs()).sum())
            .fold(T::zero(), T::max)
    };
    let sorted = |mut v: Vec<T>| {
        v.retain(|&c| c > T::zero() && c.is_finite());
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v.dedup();
        v
    };
    let mut tail_candidates = radii.clone();
    tail_candidates.push(max_cut);
    let tail_candidates = sorted(tail_candidates.into_iter().filter(|&c| c <= max_cut).collect());
    let mut cut = None;
    let mut best = (T::infinity(), T::infinity());
    for &c in &tail_candidates {
        let v = tails(c);
        if v.0.max(v.1) < best.0.max(best.1) {
            best = v;
        }
        if v.0 < eps && v.1 < eps {
            cut = Some(c);
            break;
        }
    }
    // the reciprocal radii beyond the largest one empty the ball on a finite lattice
    let ball_candidates = sorted(radii.iter().flat_map(|&r| [r, T::one() / r, T::lit(2.0) / r]).chain([T::one()]).collect());
    let mut small_ball_cut = None;
    let mut small_ball = T::infinity();
    for &c in &ball_candidates {
        let v = ball(c);
        small_ball = small_ball.min(v);
        if v < eps {
            small_ball_cut = Some(c);
            break;
        }
    }
    if ball_candidates.is_empty() {
        small_ball = T::zero();
        small_ball_cut = Some(T::one());
    }

    let mut lipschitz_nu = T::zero();
    let mut lipschitz_drift = T::zero();
    if !family.is_measure_independent() {
        for a in 0..samples.len() {
            for b in a + 1..samples.len() {
                let nu_diff = kernels[a]
                    .iter()
                    .zip(&kernels[b])
                    .map(|(p, q)| weighted_distance(p, q, small))
                    .fold(T::zero(), T::max);
                let b_diff = sup_diff(&drifts[a], &drifts[b]);
                if nu_diff == T::zero() && b_diff == T::zero() {
                    continue;
                }
                let den = dual_norm(&samples[a], &samples[b], 1)?;
                if den <= T::zero() {
                    log::warn!("sample measures {a} and {b} coincide; skipped");
                    continue;
                }
                lipschitz_nu = lipschitz_nu.max(nu_diff / den);
                lipschitz_drift = lipschitz_drift.max(b_diff / den);
            }
        }
    }

    Ok(OrderOneReport {
        boundedness,
        drift_bound,
        gradient_bound,
        cut,
        tail: best.0,
        gradient_tail: best.1,
        small_ball_cut,
        small_ball,
        lipschitz_nu,
        lipschitz_drift,
        bounded: boundedness.is_finite() && drift_bound.is_finite() && gradient_bound.is_finite(),
        tight: cut.is_some() && small_ball_cut.is_some(),
        lipschitz: lipschitz_nu.is_finite() && lipschitz_drift.is_finite(),
    })
}

/// Coefficient distance `sup_x (|ΔG| + |Δb| + Σ_y min(1,|y|^p)|Δν|)` between two frozen generators,
/// with `p = 2` for Lévy families and `p = 1` otherwise.
///
/// Lévy pairs compare raw triplets; any other pair compares pointwise coefficients on the grid nodes.
#[allow(clippy::too_many_arguments)]
pub fn generator_distance<T: Real>(
    a: &Family<T>,
    b: &Family<T>,
    grid: &Grid<T>,
    t: T,
    ma: &[T],
    mb: &[T],
    alpha: T,
) -> Result<T> {
    if let (Family::Levy(fa), Family::Levy(fb)) = (a, b) {
        let ca = fa.coefficients_at(t, ma, alpha);
        let cb = fb.coefficients_at(t, mb, alpha);
        let jumps = |c: &crate::generators::LevyCoefficients<T>| merge(c.jumps.iter().collect());
        return Ok((ca.diffusion - cb.diffusion).abs()
            + (ca.drift - cb.drift).abs()
            + weighted_distance(&jumps(&ca), &jumps(&cb), |y| T::one().min(y * y)));
    }
    let mut worst = T::zero();
    for x in grid.nodes() {
        let la = a.local(grid, t, ma, alpha, x)?;
        let lb = b.local(grid, t, mb, alpha, x)?;
        let d = (la.diffusion - lb.diffusion).abs()
            + (la.drift - lb.drift).abs()
            + weighted_distance(&merge(la.jumps), &merge(lb.jumps), |y| T::one().min(y.abs()));
        worst = worst.max(d);
    }
    Ok(worst)
}
