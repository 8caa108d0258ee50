use std::time::{Duration, Instant};

use super::{improves, path_entropy, stage_entropies, PlanResult, PolicyKind};
use crate::error::{Error, Result};
use crate::gp::{GpModel, Hyperparams, RunningEntropy};
use crate::transect::{enumerate_configs, ObservationPath, RobotConfig, TransectGrid};

/// `H[Z_a(col+1) | Z_x(col)]` for every (current, action) pair.
///
/// The covariance is stationary, so the table built for columns 0→1 serves
/// every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageEntropyTable {
    configs: Vec<RobotConfig>,
    entropies: Vec<f64>,
}

impl StageEntropyTable {
    pub fn build(model: &GpModel, configs: Vec<RobotConfig>) -> Result<Self> {
        let n = configs.len();
        let mut entropies = Vec::with_capacity(n * n);
        let mut re = RunningEntropy::new(model);
        for x in &configs {
            re.truncate(0);
            re.push(&x.locations(0))?;
            for a in &configs {
                entropies.push(re.peek(&a.locations(1))?);
            }
        }
        Ok(Self { configs, entropies })
    }

    pub fn configs(&self) -> &[RobotConfig] {
        &self.configs
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.entropies[x * self.configs.len() + a]
    }
}

/// Stage-indexed action and value tables of the Markov-based policy.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPolicy {
    n_rows: usize,
    table: StageEntropyTable,
    /// `actions[i][x]` is the index of the chosen next config at stage `i`.
    actions: Vec<Vec<usize>>,
    /// `values[i][x]` is `Ṽ_i(x)`; `Ṽ_{t+1} ≡ 0` is implicit.
    values: Vec<Vec<f64>>,
    build_time: Duration,
}

/// Backward induction over stages `t..=0` on the Markov dynamic program for `k` robots.
pub fn plan_markov(grid: &TransectGrid, hyp: &Hyperparams, k: usize) -> Result<MarkovPolicy> {
    let started = Instant::now();
    let model = GpModel::new(*hyp, grid.widths());
    let table = StageEntropyTable::build(&model, enumerate_configs(grid.n_rows(), k)?)?;
    let n = table.configs.len();
    let stages = grid.horizon() + 1;
    let mut actions = vec![vec![0usize; n]; stages];
    let mut values = vec![vec![0.0f64; n]; stages];
    for i in (0..stages).rev() {
        for x in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for a in 0..n {
                let future = if i + 1 < stages { values[i + 1][a] } else { 0.0 };
                let q = table.get(x, a) + future;
                if a == 0 || improves(q, best) {
                    best = q;
                    arg = a;
                }
            }
            actions[i][x] = arg;
            values[i][x] = best;
        }
    }
    Ok(MarkovPolicy { n_rows: grid.n_rows(), table, actions, values, build_time: started.elapsed() })
}

impl MarkovPolicy {
    pub fn k(&self) -> usize {
        self.table.configs[0].k()
    }

    /// Number of decision stages, `t + 1`.
    pub fn stages(&self) -> usize {
        self.actions.len()
    }

    pub fn configs(&self) -> &[RobotConfig] {
        &self.table.configs
    }

    pub fn entropy_table(&self) -> &StageEntropyTable {
        &self.table
    }

    /// Time spent building the entropy table and running the backward sweep.
    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn index_of(&self, x: &RobotConfig) -> Result<usize> {
        self.table.configs.binary_search(x).map_err(|_| {
            Error::InvalidConfig(format!("{x} is not a {}-robot config of {} rows", self.k(), self.n_rows))
        })
    }

    fn check_stage(&self, stage: usize) -> Result<()> {
        if stage >= self.stages() {
            return Err(Error::ColumnOverflow { col: stage + 1, last: self.stages() });
        }
        Ok(())
    }

    /// `π̃_stage(x)`.
    pub fn action(&self, stage: usize, x: &RobotConfig) -> Result<&RobotConfig> {
        self.check_stage(stage)?;
        Ok(&self.table.configs[self.actions[stage][self.index_of(x)?]])
    }

    /// `Ṽ_stage(x)`; stage `t + 1` is zero.
    pub fn value(&self, stage: usize, x: &RobotConfig) -> Result<f64> {
        let idx = self.index_of(x)?;
        if stage == self.stages() {
            return Ok(0.0);
        }
        self.check_stage(stage)?;
        Ok(self.values[stage][idx])
    }

    /// `H[Z_a | Z_x]` for adjacent columns.
    pub fn stage_entropy(&self, x: &RobotConfig, a: &RobotConfig) -> Result<f64> {
        Ok(self.table.get(self.index_of(x)?, self.index_of(a)?))
    }

    /// Follows the action table from `x0`.
    pub fn rollout(&self, x0: &RobotConfig) -> Result<ObservationPath> {
        let mut idx = self.index_of(x0)?;
        let mut configs = Vec::with_capacity(self.stages() + 1);
        configs.push(x0.clone());
        for stage in &self.actions {
            idx = stage[idx];
            configs.push(self.table.configs[idx].clone());
        }
        ObservationPath::new(configs)
    }

    /// Rolls out from `x0` and scores the path by its true entropy.
    ///
    /// The reported wall time is the full policy build time.
    pub fn plan_result(&self, grid: &TransectGrid, hyp: &Hyperparams, x0: &RobotConfig) -> Result<PlanResult> {
        let path = self.rollout(x0)?;
        Ok(PlanResult {
            value: path_entropy(&path, grid, hyp)?,
            stage_entropies: stage_entropies(&path, grid, hyp)?,
            path,
            policy_kind: PolicyKind::Markov,
            wall_time: self.build_time,
        })
    }
}

pub fn rollout(policy: &MarkovPolicy, x0: &RobotConfig) -> Result<ObservationPath> {
    policy.rollout(x0)
}
