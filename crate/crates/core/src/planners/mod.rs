//! Path planners for the transect task and path-entropy evaluation.
//!
//! * [`plan_markov`] solves the Markov-approximated dynamic program once for
//!   every start configuration.
//! * [`plan_exact`] maximizes the true path entropy by exhaustive search.
//! * [`plan_greedy_entropy`] and [`plan_greedy_mi`] are one-step lookahead
//!   baselines conditioning on the whole history.
//!
//! Every argmax breaks ties toward the lexicographically smallest action.

mod exact;
mod greedy;
mod markov;

pub use exact::{exact_leaf_count, plan_exact, DEFAULT_BUDGET};
pub use greedy::{plan_greedy_entropy, plan_greedy_mi};
pub use markov::{plan_markov, rollout, MarkovPolicy, StageEntropyTable};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{gaussian_entropy, GpModel, Hyperparams, RunningEntropy};
use crate::transect::{ObservationPath, RobotConfig, TransectGrid};

/// Relative slack under which two candidate scores count as tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Whether `candidate` beats `best` by more than the tie tolerance.
#[inline]
pub(crate) fn improves(candidate: f64, best: f64) -> bool {
    candidate > best + TIE_TOL * best.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "markov")]
    Markov,
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "greedy-ent")]
    GreedyEntropy,
    #[serde(rename = "greedy-mi")]
    GreedyMi,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Markov, PolicyKind::Exact, PolicyKind::GreedyEntropy, PolicyKind::GreedyMi];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Markov => "markov",
            PolicyKind::Exact => "exact",
            PolicyKind::GreedyEntropy => "greedy-ent",
            PolicyKind::GreedyMi => "greedy-mi",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "markov" => Ok(PolicyKind::Markov),
            "exact" => Ok(PolicyKind::Exact),
            "greedy-ent" | "greedy_entropy" => Ok(PolicyKind::GreedyEntropy),
            "greedy-mi" | "greedy_mi" => Ok(PolicyKind::GreedyMi),
            other => Err(Error::Parse(format!("unknown policy {other:?}"))),
        }
    }
}

/// A planned path with its entropy and the time spent planning it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub path: ObservationPath,
    /// Path entropy `H[Z_{x_1..x_{t+1}} | Z_{x_0}]`, nats.
    pub value: f64,
    /// `H[Z_{x_{i+1}} | Z_{x_{0:i}}]` for each stage `i = 0..=t`.
    pub stage_entropies: Vec<f64>,
    pub policy_kind: PolicyKind,
    pub wall_time: Duration,
}

/// Runs one planner from one start.
///
/// For [`PolicyKind::Markov`] this builds the full policy and rolls it out;
/// callers planning many starts should use [`plan_markov`] directly.
pub fn plan(
    kind: PolicyKind,
    grid: &TransectGrid,
    hyp: &Hyperparams,
    x0: &RobotConfig,
    budget: u128,
) -> Result<PlanResult> {
    match kind {
        PolicyKind::Markov => plan_markov(grid, hyp, x0.k())?.plan_result(grid, hyp, x0),
        PolicyKind::Exact => plan_exact(grid, hyp, x0, budget),
        PolicyKind::GreedyEntropy => plan_greedy_entropy(grid, hyp, x0),
        PolicyKind::GreedyMi => plan_greedy_mi(grid, hyp, x0),
    }
}

fn check_path(path: &ObservationPath, grid: &TransectGrid) -> Result<()> {
    if !path.is_complete_for(grid) {
        return Err(Error::InvalidConfig(format!(
            "path has {} stages, grid has {} columns",
            path.len(),
            grid.n_cols()
        )));
    }
    Ok(())
}

/// Path entropy as one joint entropy difference `H[Z_{x_{0:t+1}}] - H[Z_{x_0}]`.
pub fn path_entropy(path: &ObservationPath, grid: &TransectGrid, hyp: &Hyperparams) -> Result<f64> {
    check_path(path, grid)?;
    let model = GpModel::new(*hyp, grid.widths());
    let all = path.locations();
    let start = path.start().locations(0);
    Ok(gaussian_entropy(&model.cov_matrix(&all))? - gaussian_entropy(&model.cov_matrix(&start))?)
}

/// Stagewise entropies `H[Z_{x_{i+1}} | Z_{x_{0:i}}]` along a path.
pub fn stage_entropies(path: &ObservationPath, grid: &TransectGrid, hyp: &Hyperparams) -> Result<Vec<f64>> {
    check_path(path, grid)?;
    let model = GpModel::new(*hyp, grid.widths());
    let mut re = RunningEntropy::new(&model);
    re.push(&path.start().locations(0))?;
    path.configs()[1..].iter().enumerate().map(|(i, x)| re.push(&x.locations(i + 1))).collect()
}
