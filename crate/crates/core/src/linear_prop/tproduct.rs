use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linear_prop::{Partition, Propagator};
use crate::measures::TestFunction;
use crate::scalar::{sup_diff, Real};

pub const MAX_REFINEMENTS: usize = 12;

/// One row of a refinement study.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow<T> {
    pub level: usize,
    pub delta: T,
    /// Sup-norm change from the previous level (`None` at level 0).
    pub residual: Option<T>,
    /// `log2` of the residual ratio between consecutive levels.
    pub observed_order: Option<T>,
}

#[derive(Clone, Debug)]
pub struct TProduct<T> {
    pub value: TestFunction<T>,
    pub partition: Partition<T>,
    pub rows: Vec<RefinementRow<T>>,
}

impl<T: Real> TProduct<T> {
    /// Last observed order, if two residuals were available.
    pub fn observed_order(&self) -> Option<T> {
        self.rows.iter().rev().find_map(|r| r.observed_order)
    }

    pub fn to_csv(&self) -> String {
        report_csv(&self.rows)
    }
}

pub fn report_csv<T: Real>(rows: &[RefinementRow<T>]) -> String {
    let mut s = String::from("refinement_level,delta,residual,observed_order\n");
    let fmt = |v: Option<T>| v.map(|x| format!("{:.16e}", x.to_f64_lossy())).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{},{}",
            r.level,
            r.delta.to_f64_lossy(),
            fmt(r.residual),
            fmt(r.observed_order)
        );
    }
    s
}

/// `U^{t_0, t_N} f` along partitions halved until consecutive results differ by less than `tol`.
pub fn t_product<T: Real>(
    mut factory: impl FnMut(&Partition<T>) -> Result<Propagator<T>>,
    initial: &Partition<T>,
    f: &TestFunction<T>,
    tol: T,
) -> Result<TProduct<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("t_product tolerance must be positive".into()));
    }
    let run = |p: &Propagator<T>| p.apply(f, p.partition().start(), p.partition().end());
    let mut partition = initial.clone();
    let mut value = run(&factory(&partition)?)?;
    let mut rows = vec![RefinementRow {
        level: 0,
        delta: partition.mesh(),
        residual: None,
        observed_order: None,
    }];
    let mut residuals: Vec<f64> = Vec::new();
    for level in 1..=MAX_REFINEMENTS {
        partition = partition.refined();
        let next = run(&factory(&partition)?)?;
        let res = sup_diff(next.values(), value.values());
        let order = rows
            .last()
            .and_then(|r| r.residual)
            .filter(|p| *p > T::zero() && res > T::zero())
            .map(|p| (p / res).log2());
        rows.push(RefinementRow {
            level,
            delta: partition.mesh(),
            residual: Some(res),
            observed_order: order,
        });
        residuals.push(res.to_f64_lossy());
        value = next;
        if res < tol {
            return Ok(TProduct { value, partition, rows });
        }
    }
    Err(Error::NoConvergence {
        refinements: MAX_REFINEMENTS,
        residuals,
    })
}
