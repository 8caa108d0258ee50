use std::time::Instant;

use super::{improves, PlanResult, PolicyKind};
use crate::error::{Error, Result};
use crate::gp::{GpModel, Hyperparams, Location, RunningEntropy};
use crate::transect::{enumerate_configs, ObservationPath, RobotConfig, TransectGrid};

/// Default cap on the number of complete action sequences searched.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// `|A|^(t+1)`, saturating.
pub fn exact_leaf_count(grid: &TransectGrid, k: usize) -> Result<u128> {
    let actions = enumerate_configs(grid.n_rows(), k)?.len() as u128;
    let mut leaves: u128 = 1;
    for _ in 0..=grid.horizon() {
        leaves = leaves.saturating_mul(actions);
    }
    Ok(leaves)
}

struct Search<'a, 'm> {
    configs: &'a [RobotConfig],
    /// Pre-expanded locations: `cells[col][a]`.
    cells: Vec<Vec<Vec<Location>>>,
    stages: usize,
    history: RunningEntropy<'m>,
    seq: Vec<usize>,
    gains: Vec<f64>,
    best_value: f64,
    best_seq: Vec<usize>,
    best_gains: Vec<f64>,
}

impl Search<'_, '_> {
    fn descend(&mut self, stage: usize, acc: f64) -> Result<()> {
        let base = self.history.len();
        for a in 0..self.configs.len() {
            let h = self.history.push(&self.cells[stage + 1][a])?;
            self.seq.push(a);
            self.gains.push(h);
            if stage + 1 == self.stages {
                let total = acc + h;
                if self.best_seq.is_empty() || improves(total, self.best_value) {
                    self.best_value = total;
                    self.best_seq.clone_from(&self.seq);
                    self.best_gains.clone_from(&self.gains);
                }
            } else {
                self.descend(stage + 1, acc + h)?;
            }
            self.seq.pop();
            self.gains.pop();
            self.history.truncate(base);
        }
        Ok(())
    }
}

/// Exhaustive maximization of `Σ_i H[Z_{x_{i+1}} | Z_{x_{0:i}}]` from `x0`.
///
/// Depth-first over action sequences in lexicographic order, appending each
/// stage to a running Cholesky factor. Refuses when `|A|^(t+1) > budget`.
pub fn plan_exact(grid: &TransectGrid, hyp: &Hyperparams, x0: &RobotConfig, budget: u128) -> Result<PlanResult> {
    let started = Instant::now();
    let leaves = exact_leaf_count(grid, x0.k())?;
    if leaves > budget {
        return Err(Error::BudgetExceeded { leaves, budget });
    }
    let configs = enumerate_configs(grid.n_rows(), x0.k())?;
    if configs.binary_search(x0).is_err() {
        return Err(Error::InvalidConfig(format!("start {x0} does not fit {} rows", grid.n_rows())));
    }
    let model = GpModel::new(*hyp, grid.widths());
    let cells = (0..grid.n_cols()).map(|col| configs.iter().map(|c| c.locations(col)).collect()).collect();
    let mut history = RunningEntropy::new(&model);
    history.push(&x0.locations(0))?;
    let stages = grid.horizon() + 1;
    let mut search = Search {
        configs: &configs,
        cells,
        stages,
        history,
        seq: Vec::with_capacity(stages),
        gains: Vec::with_capacity(stages),
        best_value: f64::NEG_INFINITY,
        best_seq: Vec::new(),
        best_gains: Vec::new(),
    };
    search.descend(0, 0.0)?;

    let mut path = Vec::with_capacity(stages + 1);
    path.push(x0.clone());
    path.extend(search.best_seq.iter().map(|&a| configs[a].clone()));
    Ok(PlanResult {
        path: ObservationPath::new(path)?,
        value: search.best_value,
        stage_entropies: search.best_gains,
        policy_kind: PolicyKind::Exact,
        wall_time: started.elapsed(),
    })
}
