use std::collections::{HashMap, HashSet};
use std::time::Instant;

use nalgebra::DMatrix;

use super::{improves, path_entropy, PlanResult, PolicyKind};
use crate::error::{Error, Result};
use crate::gp::{Factor, GpModel, Hyperparams, Location, RunningEntropy, LN_2PI_E, MAX_DENSE_LOCATIONS};
use crate::transect::{enumerate_configs, ObservationPath, RobotConfig, TransectGrid};

fn check_start(configs: &[RobotConfig], x0: &RobotConfig, grid: &TransectGrid) -> Result<()> {
    if configs.binary_search(x0).is_err() {
        return Err(Error::InvalidConfig(format!("start {x0} does not fit {} rows", grid.n_rows())));
    }
    Ok(())
}

/// One-step lookahead on `H[Z_{τ(x_i, a)} | Z_{x_{0:i}}]`, conditioning on the full history.
pub fn plan_greedy_entropy(grid: &TransectGrid, hyp: &Hyperparams, x0: &RobotConfig) -> Result<PlanResult> {
    let started = Instant::now();
    let configs = enumerate_configs(grid.n_rows(), x0.k())?;
    check_start(&configs, x0, grid)?;
    let model = GpModel::new(*hyp, grid.widths());
    let mut history = RunningEntropy::new(&model);
    history.push(&x0.locations(0))?;

    let mut path = vec![x0.clone()];
    let mut gains = Vec::with_capacity(grid.horizon() + 1);
    for col in 1..grid.n_cols() {
        let mut best = (f64::NEG_INFINITY, 0);
        for (a, cfg) in configs.iter().enumerate() {
            let h = history.peek(&cfg.locations(col))?;
            if a == 0 || improves(h, best.0) {
                best = (h, a);
            }
        }
        let chosen = &configs[best.1];
        gains.push(history.push(&chosen.locations(col))?);
        path.push(chosen.clone());
    }
    let wall_time = started.elapsed();
    let path = ObservationPath::new(path)?;
    Ok(PlanResult {
        value: path_entropy(&path, grid, hyp)?,
        stage_entropies: gains,
        path,
        policy_kind: PolicyKind::GreedyEntropy,
        wall_time,
    })
}

/// `H[Z_a | Z_rest]` for every candidate block `a`, where `rest` is the
/// pool minus `a`. Uses one precision matrix per call:
/// `Cov(a | rest) = ((Σ_pool⁻¹)_aa)⁻¹`.
fn residual_entropies(model: &GpModel, pool: &[Location], candidates: &[Vec<Location>]) -> Result<Vec<f64>> {
    if pool.len() > MAX_DENSE_LOCATIONS {
        return Err(Error::GridTooLarge { locations: pool.len(), limit: MAX_DENSE_LOCATIONS });
    }
    let precision = Factor::new(model.cov_matrix(pool).matrix())?.inverse();
    let index: HashMap<Location, usize> = pool.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    candidates
        .iter()
        .map(|block| {
            let idx: Vec<usize> = block.iter().map(|l| index[l]).collect();
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| precision[(idx[i], idx[j])]);
            let log_det_precision = Factor::new(&sub)?.log_det();
            Ok(0.5 * (block.len() as f64 * LN_2PI_E - log_det_precision))
        })
        .collect()
}

/// One-step lookahead on the mutual-information gain
/// `H[Z_a | Z_{x_{0:i}}] - H[Z_a | Z_{x̄}]`, with `x̄` every grid location
/// outside the history and the candidate block.
///
/// When `x̄` is empty the second term is the prior entropy of the block. The
/// reported value is the path entropy, not the accumulated MI score.
pub fn plan_greedy_mi(grid: &TransectGrid, hyp: &Hyperparams, x0: &RobotConfig) -> Result<PlanResult> {
    let started = Instant::now();
    if grid.n_locations() > MAX_DENSE_LOCATIONS {
        return Err(Error::GridTooLarge { locations: grid.n_locations(), limit: MAX_DENSE_LOCATIONS });
    }
    let configs = enumerate_configs(grid.n_rows(), x0.k())?;
    check_start(&configs, x0, grid)?;
    let model = GpModel::new(*hyp, grid.widths());
    let mut history = RunningEntropy::new(&model);
    history.push(&x0.locations(0))?;
    let mut visited: HashSet<Location> = x0.locations(0).into_iter().collect();

    let mut path = vec![x0.clone()];
    let mut gains = Vec::with_capacity(grid.horizon() + 1);
    for col in 1..grid.n_cols() {
        let pool: Vec<Location> = grid.locations().filter(|l| !visited.contains(l)).collect();
        let blocks: Vec<Vec<Location>> = configs.iter().map(|c| c.locations(col)).collect();
        let residual = residual_entropies(&model, &pool, &blocks)?;
        let mut best = (f64::NEG_INFINITY, 0);
        for (a, block) in blocks.iter().enumerate() {
            let score = history.peek(block)? - residual[a];
            if a == 0 || improves(score, best.0) {
                best = (score, a);
            }
        }
        let chosen = &configs[best.1];
        gains.push(history.push(&blocks[best.1])?);
        visited.extend(blocks[best.1].iter().copied());
        path.push(chosen.clone());
    }
    let wall_time = started.elapsed();
    let path = ObservationPath::new(path)?;
    Ok(PlanResult {
        value: path_entropy(&path, grid, hyp)?,
        stage_entropies: gains,
        path,
        policy_kind: PolicyKind::GreedyMi,
        wall_time,
    })
}
