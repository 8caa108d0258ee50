//! Mapping-uncertainty metrics for evaluating a planned path.

use std::collections::HashSet;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{GpModel, Hyperparams, Location};
use crate::planners::PolicyKind;
use crate::transect::{ObservationPath, RobotConfig, TransectGrid};

/// Below this magnitude the field mean is treated as zero.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

fn check_complete(path: &ObservationPath, grid: &TransectGrid) -> Result<()> {
    if !path.is_complete_for(grid) {
        return Err(Error::InvalidConfig(format!(
            "path has {} stages, grid has {} columns",
            path.len(),
            grid.n_cols()
        )));
    }
    Ok(())
}

/// Visited locations without repeats, in path order.
fn sampled(path: &ObservationPath) -> Vec<Location> {
    let mut seen = HashSet::new();
    path.locations().into_iter().filter(|l| seen.insert(*l)).collect()
}

/// Grid locations the path never visits, column-major.
pub fn unobserved(path: &ObservationPath, grid: &TransectGrid) -> Vec<Location> {
    let seen: HashSet<Location> = path.locations().into_iter().collect();
    grid.locations().filter(|l| !seen.contains(l)).collect()
}

/// `ENT = H[Z_x̄ | Z_x]`, the posterior joint entropy of every unvisited cell.
pub fn ent_metric(path: &ObservationPath, grid: &TransectGrid, hyp: &Hyperparams) -> Result<f64> {
    check_complete(path, grid)?;
    let rest = unobserved(path, grid);
    if rest.is_empty() {
        return Err(Error::EmptyUnobservedSet);
    }
    GpModel::new(*hyp, grid.widths()).conditional_entropy(&rest, &sampled(path))
}

/// `ERR = |U|⁻¹ Σ_u ((z_u - μ_{u|x}) / z̄)²` over every cell `u`.
///
/// The posterior mean conditions on the path's values when it carries them,
/// and on the grid's ground truth at visited cells otherwise.
pub fn err_metric(path: &ObservationPath, grid: &TransectGrid, hyp: &Hyperparams, prior_mean: f64) -> Result<f64> {
    check_complete(path, grid)?;
    let z = grid.measurements().ok_or(Error::MissingMeasurements)?;
    let z_bar = z.mean();
    if z_bar.abs() < ZERO_MEAN_TOL {
        return Err(Error::ZeroMeanField);
    }

    let locs = path.locations();
    let vals = match path.flat_values() {
        Some(v) => v,
        None => locs.iter().map(|l| z[(l.row, l.col)]).collect(),
    };
    let mut seen = HashSet::new();
    let (obs_locs, obs_vals): (Vec<Location>, Vec<f64>) =
        locs.into_iter().zip(vals).filter(|(l, _)| seen.insert(*l)).unzip();

    let all: Vec<Location> = grid.locations().collect();
    let mu = GpModel::new(*hyp, grid.widths()).posterior_means(&all, &obs_locs, &obs_vals, prior_mean)?;
    let sum: f64 = all.iter().zip(mu.iter()).map(|(l, m)| ((z[(l.row, l.col)] - m) / z_bar).powi(2)).sum();
    Ok(sum / all.len() as f64)
}

/// Evaluation of one planned path on one field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub policy: PolicyKind,
    pub start: RobotConfig,
    /// Identifier of the field instance, e.g. its seed.
    pub field_id: u64,
    pub ent: f64,
    pub err: f64,
    pub plan_wall_time: Duration,
}

impl EvalRecord {
    pub fn evaluate(
        policy: PolicyKind,
        field_id: u64,
        path: &ObservationPath,
        grid: &TransectGrid,
        hyp: &Hyperparams,
        prior_mean: f64,
        plan_wall_time: Duration,
    ) -> Result<Self> {
        Ok(Self {
            policy,
            start: path.start().clone(),
            field_id,
            ent: ent_metric(path, grid, hyp)?,
            err: err_metric(path, grid, hyp, prior_mean)?,
            plan_wall_time,
        })
    }
}

/// `(ENT(a) - ENT(b), ERR(a) - ERR(b))`, with `a` the Markov policy's record.
pub fn diff_metrics(a: &EvalRecord, b: &EvalRecord) -> Result<(f64, f64)> {
    if a.start != b.start || a.field_id != b.field_id {
        return Err(Error::MismatchedInstances(format!(
            "({}, field {}) vs ({}, field {})",
            a.start, a.field_id, b.start, b.field_id
        )));
    }
    Ok((a.ent - b.ent, a.err - b.err))
}
