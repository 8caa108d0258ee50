//! Machine-readable text reports: `key=value` lines followed by `[section]`
//! headers, each introducing a CSV block with its own header row.

use std::fmt::Write as _;

use transect_core::bounds::{BoundReport, OrderingReport, TheoremReport};
use transect_core::field_io::fmt_f64;
use transect_core::planners::{MarkovPolicy, PlanResult};
use transect_core::transect::TransectGrid;

fn kv(s: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(s, "{key}={value}");
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "n/a".into())
}

pub fn header(s: &mut String, policy: &str, k: usize, grid: &TransectGrid) {
    kv(s, "policy", policy);
    kv(s, "k", k);
    kv(s, "rows", grid.n_rows());
    kv(s, "cols", grid.n_cols());
    kv(s, "horizon", grid.horizon());
}

pub fn plan(s: &mut String, res: &PlanResult, markov_value: Option<f64>) {
    kv(s, "start", res.path.start());
    kv(s, "value", fmt_f64(res.value));
    if let Some(v) = markov_value {
        kv(s, "markov_value", fmt_f64(v));
    }
    kv(s, "wall_time", fmt_f64(res.wall_time.as_secs_f64()));
    s.push_str("[path]\nstage,config,stage_entropy\n");
    let _ = writeln!(s, "0,{},", res.path.start());
    for (i, (cfg, h)) in res.path.configs()[1..].iter().zip(&res.stage_entropies).enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, cfg, fmt_f64(*h));
    }
}

pub fn markov_table(s: &mut String, policy: &MarkovPolicy) {
    s.push_str("[policy]\nstage,config,action,value\n");
    for i in 0..policy.stages() {
        for x in policy.configs() {
            let a = policy.action(i, x).expect("total table");
            let v = policy.value(i, x).expect("total table");
            let _ = writeln!(s, "{i},{x},{a},{}", fmt_f64(v));
        }
    }
}

pub fn bounds(s: &mut String, rep: &BoundReport) {
    let p = &rep.params;
    kv(s, "xi", fmt_f64(p.xi));
    kv(s, "rho", fmt_f64(p.rho));
    kv(s, "noise_to_signal", fmt_f64(p.noise_to_signal()));
    kv(s, "ell1_norm", fmt_f64(p.ell1_norm));
    kv(s, "ell2_norm", fmt_f64(p.ell2_norm));
    kv(s, "k", rep.k);
    kv(s, "horizon", rep.horizon);
    kv(s, "single_robot_condition", rep.single_robot_condition);
    if let Some(m) = rep.multi_robot_condition {
        kv(s, "multi_robot_condition", m);
        kv(s, "isotropic", p.is_isotropic());
    }
    if rep.condition_met() {
        kv(s, "condition", "met");
    } else {
        kv(s, "condition", "unmet");
        kv(s, "note", "sufficient condition unmet, bound not applicable");
    }
    s.push_str("[bounds]\ni,delta,epsilon,epsilon_loose\n");
    for i in 0..=rep.horizon {
        let e = rep.epsilons[i];
        let _ = writeln!(s, "{i},{},{},{}", opt(rep.deltas[i]), opt(e.map(|e| e.sum)), opt(e.map(|e| e.loose)));
    }
    if let Some(eq) = &rep.ordering {
        ordering(s, eq);
    }
    if let Some(th) = &rep.theorems {
        theorems(s, th);
    }
}

fn ordering(s: &mut String, rep: &OrderingReport) {
    s.push_str("[ordering]\n");
    kv(s, "trials", rep.trials);
    kv(s, "comparisons", rep.comparisons);
    kv(s, "violations", rep.violations.len());
    kv(s, "holds", rep.passed());
    if !rep.violations.is_empty() {
        s.push_str("u,v,m,history,lhs,rhs\n");
        for v in rep.violations.iter().take(20) {
            let hist: Vec<String> = v.history.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(
                s,
                "{}:{},{}:{},{},{},{},{}",
                v.u.col,
                v.u.row,
                v.v.col,
                v.v.row,
                v.m,
                hist.join("|"),
                fmt_f64(v.lhs),
                fmt_f64(v.rhs)
            );
        }
    }
}

fn theorems(s: &mut String, rep: &TheoremReport) {
    s.push_str("[theorems]\n");
    kv(s, "applicable", rep.applicable);
    if let Some(r) = &rep.reason {
        kv(s, "reason", r);
        return;
    }
    kv(s, "all_hold", rep.all_hold());
    s.push_str("start,markov_value,optimal_value,rollout_value,epsilon0,two_sided,epsilon_optimal,per_stage\n");
    for v in &rep.verdicts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            v.start,
            fmt_f64(v.markov_value),
            fmt_f64(v.optimal_value),
            fmt_f64(v.rollout_value),
            fmt_f64(v.epsilon0),
            v.two_sided,
            v.epsilon_optimal,
            v.per_stage
        );
    }
}
