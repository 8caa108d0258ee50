//! Benchmark harness: plans every (seed, k, policy, start) cell on sampled
//! fields and scores the paths.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_io::fmt_f64;
use crate::gp::{sample_prior_field, Hyperparams, Widths};
use crate::metrics::{diff_metrics, EvalRecord};
use crate::planners::{plan, plan_markov, PolicyKind, DEFAULT_BUDGET};
use crate::transect::{enumerate_configs, ObservationPath, RobotConfig, TransectGrid};

/// Named grid and model settings matching the two field studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Temperature,
    Plankton,
}

impl Preset {
    pub fn grid(&self) -> (usize, usize) {
        match self {
            Preset::Temperature => (5, 30),
            Preset::Plankton => (8, 45),
        }
    }

    pub fn widths(&self) -> Widths {
        match self {
            Preset::Temperature => Widths { omega1: 5.0, omega2: 5.0 },
            Preset::Plankton => Widths { omega1: 1765.0 / 45.0, omega2: 314.0 / 8.0 },
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        match self {
            Preset::Temperature => Hyperparams::temperature(),
            Preset::Plankton => Hyperparams::plankton(),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" => Ok(Preset::Temperature),
            "plankton" => Ok(Preset::Plankton),
            other => Err(Error::Parse(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartMode {
    /// Every `C(r, k)` start, plus a mean row per policy.
    All,
    /// Per policy, the start whose path leaves the largest ENT.
    AdversarialWorst,
    /// The listed starts; those whose robot count differs from `k` are skipped.
    Explicit(Vec<RobotConfig>),
}

impl StartMode {
    /// `all`, `worst`, or `;`-separated configs such as `0,2;1,3`.
    pub fn parse(s: &str, n_rows: usize) -> Result<Self> {
        match s.trim() {
            "all" => Ok(StartMode::All),
            "worst" | "adversarial-worst" => Ok(StartMode::AdversarialWorst),
            list => list
                .split(';')
                .map(|c| RobotConfig::parse(c, n_rows))
                .collect::<Result<Vec<_>>>()
                .map(StartMode::Explicit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub widths: Widths,
    pub hyp: Hyperparams,
    pub robots: Vec<usize>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub starts: StartMode,
    /// Constant prior mean; sampled fields are centred on it.
    pub prior_mean: f64,
    pub budget: u128,
}

impl ExperimentSpec {
    pub fn from_preset(preset: Preset) -> Self {
        let (n_rows, n_cols) = preset.grid();
        Self {
            n_rows,
            n_cols,
            widths: preset.widths(),
            hyp: preset.hyperparams(),
            robots: vec![1],
            policies: vec![PolicyKind::Markov, PolicyKind::GreedyEntropy, PolicyKind::GreedyMi],
            seeds: vec![0],
            starts: StartMode::All,
            prior_mean: 10.0,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        TransectGrid::new(self.n_rows, self.n_cols, self.widths)?;
        self.hyp.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("no seeds".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies".into()));
        }
        if self.robots.is_empty() {
            return Err(Error::InvalidConfig("no robot counts".into()));
        }
        for &k in &self.robots {
            if k == 0 || k > self.n_rows {
                return Err(Error::InvalidArity { k, rows: self.n_rows });
            }
        }
        Ok(())
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub policy: PolicyKind,
    pub k: usize,
    pub r: usize,
    pub c: usize,
    pub seed: u64,
    /// A config such as `0;3`, or `mean`.
    pub start: String,
    pub ent: f64,
    pub err: f64,
    /// Markov minus this policy, same field and start.
    pub entd: f64,
    pub errd: f64,
    /// Seconds spent planning this start (amortized for Markov).
    pub time: f64,
    /// Seconds spent planning every start of this (policy, k, seed).
    pub time_total: f64,
}

pub const CSV_HEADER: [&str; 12] =
    ["policy", "k", "r", "C", "seed", "start", "ENT", "ERR", "ENTD", "ERRD", "time", "time_total"];

impl BenchRow {
    pub fn fields(&self) -> [String; 12] {
        [
            self.policy.to_string(),
            self.k.to_string(),
            self.r.to_string(),
            self.c.to_string(),
            self.seed.to_string(),
            self.start.clone(),
            fmt_f64(self.ent),
            fmt_f64(self.err),
            fmt_f64(self.entd),
            fmt_f64(self.errd),
            fmt_f64(self.time),
            fmt_f64(self.time_total),
        ]
    }
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fields().join(","))
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Records for one policy, one per start, plus the total planning time.
fn run_policy(
    kind: PolicyKind,
    grid: &TransectGrid,
    spec: &ExperimentSpec,
    seed: u64,
    k: usize,
    starts: &[RobotConfig],
) -> Result<(Vec<EvalRecord>, Duration)> {
    let eval =
        |path: &ObservationPath, time| EvalRecord::evaluate(kind, seed, path, grid, &spec.hyp, spec.prior_mean, time);
    if kind == PolicyKind::Markov {
        let policy = plan_markov(grid, &spec.hyp, k)?;
        let total = policy.build_time();
        let each = total / starts.len().max(1) as u32;
        let records = starts.iter().map(|x0| eval(&policy.rollout(x0)?, each)).collect::<Result<Vec<_>>>()?;
        return Ok((records, total));
    }
    let mut total = Duration::ZERO;
    let mut records = Vec::with_capacity(starts.len());
    for x0 in starts {
        let res = plan(kind, grid, &spec.hyp, x0, spec.budget)?;
        total += res.wall_time;
        records.push(eval(&res.path, res.wall_time)?);
    }
    Ok((records, total))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Runs the whole experiment. Rows are ordered by seed, robot count and
/// policy (in the order given), then start.
pub fn run_bench(spec: &ExperimentSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &seed in &spec.seeds {
        let base = TransectGrid::new(spec.n_rows, spec.n_cols, spec.widths)?;
        let z = sample_prior_field(&base, &spec.hyp, spec.prior_mean, seed)?;
        let grid = base.with_measurements(z)?;
        for &k in &spec.robots {
            let starts: Vec<RobotConfig> = match &spec.starts {
                StartMode::Explicit(list) => list.iter().filter(|c| c.k() == k).cloned().collect(),
                _ => enumerate_configs(spec.n_rows, k)?,
            };
            if starts.is_empty() {
                continue;
            }
            let mut results: BTreeMap<PolicyKind, (Vec<EvalRecord>, Duration)> = BTreeMap::new();
            let mut kinds = spec.policies.clone();
            if !kinds.contains(&PolicyKind::Markov) {
                kinds.push(PolicyKind::Markov);
            }
            for &kind in &kinds {
                if results.contains_key(&kind) {
                    continue;
                }
                results.insert(kind, run_policy(kind, &grid, spec, seed, k, &starts)?);
            }
            let markov = &results[&PolicyKind::Markov].0;
            let mut seen = Vec::new();
            for &kind in &spec.policies {
                if seen.contains(&kind) {
                    continue;
                }
                seen.push(kind);
                let (records, total) = &results[&kind];
                let mut per_start = Vec::with_capacity(records.len());
                for (rec, base) in records.iter().zip(markov) {
                    let (entd, errd) = diff_metrics(base, rec)?;
                    per_start.push(BenchRow {
                        policy: kind,
                        k,
                        r: spec.n_rows,
                        c: spec.n_cols,
                        seed,
                        start: rec.start.to_string(),
                        ent: rec.ent,
                        err: rec.err,
                        entd,
                        errd,
                        time: rec.plan_wall_time.as_secs_f64(),
                        time_total: total.as_secs_f64(),
                    });
                }
                match spec.starts {
                    StartMode::AdversarialWorst => {
                        let worst = per_start
                            .into_iter()
                            .reduce(|a, b| if b.ent > a.ent { b } else { a })
                            .expect("at least one start");
                        rows.push(worst);
                    }
                    StartMode::All if per_start.len() > 1 => {
                        let avg = BenchRow {
                            start: "mean".into(),
                            ent: mean(per_start.iter().map(|r| r.ent)),
                            err: mean(per_start.iter().map(|r| r.err)),
                            entd: mean(per_start.iter().map(|r| r.entd)),
                            errd: mean(per_start.iter().map(|r| r.errd)),
                            time: mean(per_start.iter().map(|r| r.time)),
                            ..per_start[0].clone()
                        };
                        rows.extend(per_start);
                        rows.push(avg);
                    }
                    _ => rows.extend(per_start),
                }
            }
        }
    }
    Ok(rows)
}
