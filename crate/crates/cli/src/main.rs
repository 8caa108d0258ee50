mod args;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use serde::Deserialize;

use args::{parse_list, parse_seeds, BenchArgs, BoundsArgs, Cli, Command, ModelArgs, PlanArgs, SynthArgs};
use transect_core::bench::{run_bench, write_csv, ExperimentSpec, Preset, StartMode};
use transect_core::bounds::{check_ordering, verify_theorems, BoundParams, BoundReport};
use transect_core::field_io::{fmt_f64, read_field, sidecar_path, write_field, FieldMeta};
use transect_core::gp::sample_prior_field;
use transect_core::planners::{exact_leaf_count, plan, plan_markov, PolicyKind, DEFAULT_BUDGET};
use transect_core::transect::{enumerate_configs, RobotConfig, TransectGrid};
use transect_core::Error;

/// Prior mean used when neither a flag nor a sidecar sets one.
const DEFAULT_MEAN: f64 = 10.0;

fn defaults(preset: Preset) -> FieldMeta {
    FieldMeta::complete(preset.grid(), &preset.widths(), &preset.hyperparams(), DEFAULT_MEAN, Some(0))
}

/// Built-in defaults, then the sidecar, then flags.
fn resolve(model: &ModelArgs, sidecar: &FieldMeta) -> FieldMeta {
    defaults(model.preset.unwrap_or(Preset::Temperature)).overlay(sidecar).overlay(&model.overrides())
}

fn parse_err(msg: String) -> anyhow::Error {
    Error::Parse(msg).into()
}

/// A grid shaped like the field file, carrying its readings.
fn load_grid(path: &Path, model: &ModelArgs) -> anyhow::Result<(TransectGrid, FieldMeta)> {
    let (z, side) = read_field(path).with_context(|| format!("reading {}", path.display()))?;
    let meta = resolve(model, &side);
    if model.rows.is_some_and(|r| r != z.nrows()) || model.cols.is_some_and(|c| c != z.ncols()) {
        return Err(parse_err(format!("--rows/--cols disagree with the {}×{} field", z.nrows(), z.ncols())));
    }
    let grid = TransectGrid::new(z.nrows(), z.ncols(), meta.widths()?)?.with_measurements(z)?;
    Ok((grid, meta))
}

fn synth(a: &SynthArgs) -> anyhow::Result<String> {
    let meta = resolve(&a.model, &FieldMeta::default());
    let (rows, cols) = (meta.rows.unwrap_or(0), meta.cols.unwrap_or(0));
    let grid = TransectGrid::new(rows, cols, meta.widths()?)?;
    let hyp = meta.hyperparams()?;
    let mean = meta.prior_mean.unwrap_or(DEFAULT_MEAN);
    let z = sample_prior_field(&grid, &hyp, mean, meta.seed.unwrap_or(0))?;
    let sum = write_field(&a.out, &z, &meta).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(format!(
        "field={}\nmeta={}\nrows={rows}\ncols={cols}\nchecksum={sum}\n",
        a.out.display(),
        sidecar_path(&a.out).display()
    ))
}

fn plan_cmd(a: &PlanArgs) -> anyhow::Result<String> {
    let (grid, meta) = load_grid(&a.field, &a.model)?;
    let hyp = meta.hyperparams()?;
    if a.robots == 0 || a.robots > grid.n_rows() {
        return Err(Error::InvalidArity { k: a.robots, rows: grid.n_rows() }.into());
    }
    let start = a.start.as_deref().map(|s| RobotConfig::parse(s, grid.n_rows())).transpose()?;
    if let Some(x0) = &start {
        if x0.k() != a.robots {
            return Err(Error::InvalidArity { k: x0.k(), rows: grid.n_rows() }.into());
        }
    }
    let mut out = String::new();
    report::header(&mut out, a.policy.as_str(), a.robots, &grid);
    if a.policy == PolicyKind::Markov {
        let policy = plan_markov(&grid, &hyp, a.robots)?;
        if let Some(x0) = &start {
            let res = policy.plan_result(&grid, &hyp, x0)?;
            report::plan(&mut out, &res, Some(policy.value(0, x0)?));
        } else {
            out.push_str(&format!("wall_time={}\n", fmt_f64(policy.build_time().as_secs_f64())));
        }
        report::markov_table(&mut out, &policy);
        return Ok(out);
    }
    let Some(x0) = start else {
        return Err(parse_err(format!("--start is required for policy {}", a.policy)));
    };
    let res = plan(a.policy, &grid, &hyp, &x0, a.budget.unwrap_or(DEFAULT_BUDGET))?;
    report::plan(&mut out, &res, None);
    Ok(out)
}

/// Experiment file; every key is optional and flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    preset: Option<Preset>,
    rows: Option<usize>,
    cols: Option<usize>,
    omega1: Option<f64>,
    omega2: Option<f64>,
    ell1: Option<f64>,
    ell2: Option<f64>,
    signal_var: Option<f64>,
    noise_var: Option<f64>,
    mean: Option<f64>,
    robots: Option<Vec<usize>>,
    policies: Option<Vec<PolicyKind>>,
    seeds: Option<Vec<u64>>,
    starts: Option<String>,
    budget: Option<u64>,
}

fn bench_spec(a: &BenchArgs) -> anyhow::Result<ExperimentSpec> {
    let cfg: BenchConfig = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).map_err(|e| parse_err(format!("{}: {e}", p.display())))?
        }
        None => BenchConfig::default(),
    };
    let preset = a.model.preset.or(cfg.preset).unwrap_or(Preset::Temperature);
    let file = FieldMeta {
        rows: cfg.rows,
        cols: cfg.cols,
        omega1: cfg.omega1,
        omega2: cfg.omega2,
        ell1: cfg.ell1,
        ell2: cfg.ell2,
        signal_var: cfg.signal_var,
        noise_var: cfg.noise_var,
        prior_mean: cfg.mean,
        seed: None,
    };
    let meta = defaults(preset).overlay(&file).overlay(&a.model.overrides());
    let n_rows = meta.rows.unwrap_or(0);
    let mut spec = ExperimentSpec::from_preset(preset);
    spec.n_rows = n_rows;
    spec.n_cols = meta.cols.unwrap_or(0);
    spec.widths = meta.widths()?;
    spec.hyp = meta.hyperparams()?;
    spec.prior_mean = meta.prior_mean.unwrap_or(DEFAULT_MEAN);
    if let Some(r) = cfg.robots {
        spec.robots = r;
    }
    if let Some(p) = cfg.policies {
        spec.policies = p;
    }
    if let Some(s) = cfg.seeds {
        spec.seeds = s;
    }
    if let Some(b) = cfg.budget {
        spec.budget = b.into();
    }
    if let Some(s) = &cfg.starts {
        spec.starts = StartMode::parse(s, n_rows)?;
    }
    if let Some(r) = &a.robots {
        spec.robots = parse_list(r).map_err(parse_err)?;
    }
    if let Some(p) = &a.policies {
        spec.policies = parse_list(p).map_err(parse_err)?;
    }
    if let Some(s) = &a.seeds {
        spec.seeds = parse_seeds(s).map_err(parse_err)?;
    } else if let Some(s) = a.model.seed {
        spec.seeds = vec![s];
    }
    if let Some(s) = &a.starts {
        spec.starts = StartMode::parse(s, n_rows)?;
    }
    if let Some(b) = a.budget {
        spec.budget = b;
    }
    spec.validate()?;
    Ok(spec)
}

fn bench(a: &BenchArgs) -> anyhow::Result<String> {
    let spec = bench_spec(a)?;
    let rows = run_bench(&spec)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    match &a.out {
        Some(p) => {
            fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?;
            Ok(format!("rows={}\nout={}\n", rows.len(), p.display()))
        }
        None => Ok(String::from_utf8(buf)?),
    }
}

fn bounds(a: &BoundsArgs) -> anyhow::Result<String> {
    let (shape, side) = match &a.field {
        Some(p) => {
            let (z, side) = read_field(p).with_context(|| format!("reading {}", p.display()))?;
            (Some((z.nrows(), z.ncols())), side)
        }
        None => (None, FieldMeta::default()),
    };
    let meta = resolve(&a.model, &side);
    let n_rows = a.model.rows.or(shape.map(|s| s.0)).or(meta.rows).unwrap_or(0);
    let n_cols = match a.horizon {
        Some(t) => t + 2,
        None => a.model.cols.or(shape.map(|s| s.1)).or(meta.cols).unwrap_or(0),
    };
    let grid = TransectGrid::new(n_rows, n_cols, meta.widths()?)?;
    let hyp = meta.hyperparams()?;
    let k = a.robots;
    let actions = enumerate_configs(n_rows, k)?.len() as u128;

    let mut rep = BoundReport::new(BoundParams::new(&hyp, &grid.widths()), k, grid.horizon());
    rep.ordering = Some(check_ordering(&grid, &hyp, k, a.ordering_trials, meta.seed.unwrap_or(0))?);
    let budget = a.budget.unwrap_or(DEFAULT_BUDGET);
    let oracle_sized = exact_leaf_count(&grid, k)?.saturating_mul(actions) <= budget;
    if oracle_sized {
        rep.theorems = Some(verify_theorems(&grid, &hyp, k, budget)?);
    }
    let mut out = String::new();
    out.push_str(&format!("rows={n_rows}\ncols={n_cols}\n"));
    report::bounds(&mut out, &rep);
    if !oracle_sized {
        out.push_str("[theorems]\napplicable=skipped\nreason=instance too large for exhaustive search\n");
    }
    Ok(out)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse(_)) => 10,
        Some(Error::ConditionViolated(_) | Error::AnisotropyViolated { .. }) => 11,
        Some(Error::BudgetExceeded { .. }) => 12,
        Some(
            Error::FactorizationFailure { .. } | Error::SingularCovariance { .. } | Error::DuplicateNoiseless { .. },
        ) => 13,
        Some(Error::InvalidArity { .. } | Error::InvalidConfig(_)) => 14,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Plan(a) => plan_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
