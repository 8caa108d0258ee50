//! Performance bounds for the Markov-based policy and numerical checkers for them.
//!
//! With `ξ = exp{-1/(2ℓ'₁²)}` and `ρ = 1 + σ_n²/σ_s²`, the information lost by
//! conditioning only on the current column is at most `Δ(i)` nats per stage for
//! a single robot (`Δ_k(i)` for `k` robots on an isotropic grid), and the
//! Markov policy is within `ε₀ = Σ_s Δ(s)` of the optimal path entropy.
//!
//! A bound whose log argument is non-positive carries no information; it is
//! reported as `+∞` rather than as an error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{GpModel, Hyperparams, Location, Widths};
use crate::planners::{path_entropy, plan_exact, plan_markov};
use crate::transect::{enumerate_configs, RobotConfig, TransectGrid};

/// Absolute tolerance used by every inequality check in this module.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub xi: f64,
    pub rho: f64,
    /// `ℓ₁ / ω₁`
    pub ell1_norm: f64,
    /// `ℓ₂ / ω₂`
    pub ell2_norm: f64,
    pub signal_var: f64,
}

impl BoundParams {
    pub fn new(hyp: &Hyperparams, widths: &Widths) -> Self {
        let ell1_norm = hyp.ell1 / widths.omega1;
        Self {
            xi: (-1.0 / (2.0 * ell1_norm * ell1_norm)).exp(),
            rho: 1.0 + hyp.noise_var / hyp.signal_var,
            ell1_norm,
            ell2_norm: hyp.ell2 / widths.omega2,
            signal_var: hyp.signal_var,
        }
    }

    pub fn noise_to_signal(&self) -> f64 {
        self.rho - 1.0
    }

    /// `ξ < ρ/i`; always true for `i = 0`.
    pub fn single_robot_condition(&self, i: usize) -> bool {
        i == 0 || self.xi < self.rho / i as f64
    }

    /// `ξ < min(ρ/(ik), ρ/(4k))`.
    pub fn multi_robot_condition(&self, i: usize, k: usize) -> bool {
        let k = k as f64;
        let per_stage = if i == 0 { f64::INFINITY } else { self.rho / (i as f64 * k) };
        self.xi < per_stage.min(self.rho / (4.0 * k))
    }

    pub fn is_isotropic(&self) -> bool {
        (self.ell1_norm - self.ell2_norm).abs() <= 1e-9 * self.ell1_norm.max(self.ell2_norm).max(1.0)
    }
}

pub fn bound_params(hyp: &Hyperparams, widths: &Widths) -> BoundParams {
    BoundParams::new(hyp, widths)
}

/// `-(scale) · ½ log(1 - x)`, or `+∞` when `x ≥ 1`.
fn half_log_inv(x: f64, scale: f64) -> f64 {
    if x >= 1.0 {
        f64::INFINITY
    } else {
        -0.5 * scale * (-x).ln_1p()
    }
}

/// Single-robot bound `Δ(i) = ½ log(1 - ξ⁴/((ρ/i - ξ)(ρ - ξ²)))⁻¹`, with `Δ(0) = 0`.
pub fn delta(i: usize, p: &BoundParams) -> Result<f64> {
    if i == 0 {
        return Ok(0.0);
    }
    if !p.single_robot_condition(i) {
        return Err(Error::ConditionViolated(format!("xi = {} >= rho/i = {}", p.xi, p.rho / i as f64)));
    }
    let xi2 = p.xi * p.xi;
    let x = xi2 * xi2 / ((p.rho / i as f64 - p.xi) * (p.rho - xi2));
    Ok(half_log_inv(x, 1.0))
}

/// Multi-robot bound `Δ_k(i) = (k/2) log(1 - ξ⁴/((ρ/(ik) - ξ)(ρ - 4kξ²/ρ)))⁻¹`.
pub fn delta_k(i: usize, k: usize, p: &BoundParams) -> Result<f64> {
    if !p.is_isotropic() {
        return Err(Error::AnisotropyViolated { ell1_norm: p.ell1_norm, ell2_norm: p.ell2_norm });
    }
    if k == 0 {
        return Err(Error::InvalidArity { k, rows: 0 });
    }
    if i == 0 {
        return Ok(0.0);
    }
    if !p.multi_robot_condition(i, k) {
        return Err(Error::ConditionViolated(format!(
            "xi = {} >= min(rho/(ik), rho/(4k)) with i = {i}, k = {k}",
            p.xi
        )));
    }
    let kf = k as f64;
    let xi2 = p.xi * p.xi;
    let x = xi2 * xi2 / ((p.rho / (i as f64 * kf) - p.xi) * (p.rho - 4.0 * kf / p.rho * xi2));
    Ok(half_log_inv(x, kf))
}

/// Per-stage bound for `k` robots: `Δ` when `k = 1`, `Δ_k` otherwise.
pub fn stage_bound(i: usize, k: usize, p: &BoundParams) -> Result<f64> {
    if k == 1 {
        delta(i, p)
    } else {
        delta_k(i, k, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epsilon {
    /// `ε_i = Σ_{s=i}^{t} Δ(s)`
    pub sum: f64,
    /// `(t - i + 1) Δ(t)`
    pub loose: f64,
}

pub fn epsilon(i: usize, t: usize, p: &BoundParams, k: usize) -> Result<Epsilon> {
    if i > t {
        return Ok(Epsilon { sum: 0.0, loose: 0.0 });
    }
    let sum = (i..=t).map(|s| stage_bound(s, k, p)).sum::<Result<f64>>()?;
    let loose = (t - i + 1) as f64 * stage_bound(t, k, p)?;
    Ok(Epsilon { sum, loose })
}

/// Upper bound `σ_s² ξ⁴ / (ρ/i - ξ)` on `σ²_{x_{i+1}|x_i} - σ²_{x_{i+1}|x_{0:i}}`.
pub fn variance_reduction_bound(i: usize, p: &BoundParams) -> Result<f64> {
    if i == 0 {
        return Ok(0.0);
    }
    if !p.single_robot_condition(i) {
        return Err(Error::ConditionViolated(format!("xi = {} >= rho/i = {}", p.xi, p.rho / i as f64)));
    }
    Ok(p.signal_var * p.xi.powi(4) / (p.rho / i as f64 - p.xi))
}

/// Measured cost of the Markov assumption on one history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovGap {
    /// `σ²_{x_{i+1}|x_i} - σ²_{x_{i+1}|x_{0:i}}`, single robot only.
    pub variance_reduction: Option<f64>,
    /// `I[Z_{x_{i+1}}; Z_{x_{0:i-1}} | Z_{x_i}]`
    pub mutual_info: f64,
}

/// Evaluates the Markov gap for `history = [x_0, …, x_i]` (column `j` holds
/// `x_j`) and the next config in column `i + 1`.
pub fn markov_gap(model: &GpModel, history: &[RobotConfig], next: &RobotConfig) -> Result<MarkovGap> {
    let i = history.len().checked_sub(1).ok_or_else(|| Error::InvalidConfig("empty history".into()))?;
    let next_locs = next.locations(i + 1);
    let current = history[i].locations(i);
    let past: Vec<Location> = history[..i].iter().enumerate().flat_map(|(c, x)| x.locations(c)).collect();
    let mutual_info = model.cond_mutual_info(&next_locs, &past, &current)?;
    let variance_reduction = if next.k() == 1 {
        let all: Vec<Location> = past.iter().chain(&current).copied().collect();
        let markov = model.posterior_cov(&next_locs, &current)?.matrix()[(0, 0)];
        let full = model.posterior_cov(&next_locs, &all)?.matrix()[(0, 0)];
        Some(markov - full)
    } else {
        None
    };
    Ok(MarkovGap { variance_reduction, mutual_info })
}

/// A tuple for which further conditioning increased `|σ_uv|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub u: Location,
    pub v: Location,
    /// Conditioning history `x_0, …, x_i` (config `j` sits in column `j`).
    pub history: Vec<RobotConfig>,
    pub m: usize,
    /// `|σ_{uv | x_{0:i}}|`
    pub lhs: f64,
    /// `|σ_{uv | x_m}|`
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OrderingReport {
    pub trials: usize,
    pub comparisons: usize,
    pub violations: Vec<OrderingViolation>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tests `|σ_{uv|x_{0:i}}| ≤ |σ_{uv|x_m}| + tol` for every `m ≤ i` and every
/// pair of `targets` outside the conditioning set.
fn ordering_compare(
    model: &GpModel,
    history: &[RobotConfig],
    targets: &[Location],
    report: &mut OrderingReport,
) -> Result<()> {
    let cond: Vec<Location> = history.iter().enumerate().flat_map(|(c, x)| x.locations(c)).collect();
    let free: Vec<Location> = {
        let mut v: Vec<Location> = targets.iter().filter(|l| !cond.contains(l)).copied().collect();
        v.sort();
        v.dedup();
        v
    };
    if free.is_empty() || history.len() < 2 {
        return Ok(());
    }
    let full = model.posterior_cov(&free, &cond)?;
    for (m, x) in history.iter().enumerate() {
        let single = model.posterior_cov(&free, &x.locations(m))?;
        for a in 0..free.len() {
            for b in a..free.len() {
                report.comparisons += 1;
                let lhs = full.matrix()[(a, b)].abs();
                let rhs = single.matrix()[(a, b)].abs();
                if lhs > rhs + CHECK_TOL {
                    report.violations.push(OrderingViolation {
                        u: free[a],
                        v: free[b],
                        history: history.to_vec(),
                        m,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Checks the covariance condition on every prefix `x_{0:j}` of one sampled
/// instance, for all pairs drawn from `history ∪ extra`.
pub fn ordering_spot_check(model: &GpModel, history: &[RobotConfig], extra: &[Location]) -> Result<OrderingReport> {
    let mut report = OrderingReport { trials: 1, ..Default::default() };
    let mut targets: Vec<Location> = history.iter().enumerate().flat_map(|(c, x)| x.locations(c)).collect();
    targets.extend_from_slice(extra);
    for j in 1..history.len() {
        ordering_compare(model, &history[..=j], &targets, &mut report)?;
    }
    Ok(report)
}

/// Random search for violations of the "conditioning never increases `|σ_uv|`" condition.
///
/// Each trial draws a stage `i`, a history of `k`-robot configs for columns
/// `0..=i`, and two locations `u, v` (possibly equal) from later columns.
/// Counterexamples are returned, never suppressed.
pub fn check_ordering(
    grid: &TransectGrid,
    hyp: &Hyperparams,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<OrderingReport> {
    let model = GpModel::new(*hyp, grid.widths());
    let configs = enumerate_configs(grid.n_rows(), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OrderingReport::default();
    let last_stage = grid.n_cols() - 2;
    for _ in 0..trials {
        report.trials += 1;
        let i = rng.random_range(0..=last_stage);
        let history: Vec<RobotConfig> = (0..=i).map(|_| configs[rng.random_range(0..configs.len())].clone()).collect();
        let mut pick = || {
            let col = rng.random_range(i + 1..grid.n_cols());
            Location::new(col, rng.random_range(0..grid.n_rows()))
        };
        let (u, v) = (pick(), pick());
        ordering_compare(&model, &history, &[u, v], &mut report)?;
    }
    Ok(report)
}

/// Outcome of the bound checks for one start configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartVerdict {
    pub start: RobotConfig,
    /// `Ṽ₀(x₀)`
    pub markov_value: f64,
    /// `V*₀(x₀)`
    pub optimal_value: f64,
    /// Path entropy of the Markov rollout, `V^π̃₀(x₀)`.
    pub rollout_value: f64,
    pub epsilon0: f64,
    /// `Ṽ₀ - ε₀ ≤ V*₀ ≤ Ṽ₀`
    pub two_sided: bool,
    /// `V*₀ - V^π̃₀ ∈ [-tol, ε₀ + tol]`
    pub epsilon_optimal: bool,
    /// `Ṽ_i - ε_i ≤ V*_i ≤ Ṽ_i` along the optimal path, every stage.
    pub per_stage: bool,
}

impl StartVerdict {
    pub fn holds(&self) -> bool {
        self.two_sided && self.epsilon_optimal && self.per_stage
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    /// False when the sufficient condition is unmet; no verdicts are produced then.
    pub applicable: bool,
    pub reason: Option<String>,
    pub epsilons: Vec<f64>,
    pub verdicts: Vec<StartVerdict>,
}

impl TheoremReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(StartVerdict::holds)
    }

    pub fn violations(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.holds()).count()
    }
}

/// `ε_i` for `i = 0..=t`, or the reason the bounds do not apply.
fn epsilon_table(p: &BoundParams, t: usize, k: usize) -> std::result::Result<Vec<f64>, String> {
    if k > 1 && !p.is_isotropic() {
        return Err(format!("multi-robot bound needs l'1 = l'2 (got {} and {})", p.ell1_norm, p.ell2_norm));
    }
    let ok = if k == 1 { p.single_robot_condition(t) } else { p.multi_robot_condition(t, k) };
    if !ok {
        return Err("sufficient condition unmet, bound not applicable".to_string());
    }
    (0..=t).map(|i| epsilon(i, t, p, k).map(|e| e.sum).map_err(|e| e.to_string())).collect()
}

/// Checks the two-sided value bound and `ε₀`-optimality of the Markov policy
/// against exhaustive search, for every start.
pub fn verify_theorems(grid: &TransectGrid, hyp: &Hyperparams, k: usize, budget: u128) -> Result<TheoremReport> {
    let p = BoundParams::new(hyp, &grid.widths());
    let t = grid.horizon();
    let eps = match epsilon_table(&p, t, k) {
        Ok(e) => e,
        Err(reason) => {
            return Ok(TheoremReport {
                applicable: false,
                reason: Some(reason),
                epsilons: Vec::new(),
                verdicts: Vec::new(),
            })
        }
    };
    let policy = plan_markov(grid, hyp, k)?;
    let mut verdicts = Vec::new();
    for x0 in policy.configs() {
        let exact = plan_exact(grid, hyp, x0, budget)?;
        let markov_value = policy.value(0, x0)?;
        let rollout_value = path_entropy(&policy.rollout(x0)?, grid, hyp)?;
        let optimal_value = exact.value;
        let two_sided = markov_value - eps[0] - CHECK_TOL <= optimal_value && optimal_value <= markov_value + CHECK_TOL;
        let gap = optimal_value - rollout_value;
        let epsilon_optimal = gap >= -CHECK_TOL && gap <= eps[0] + CHECK_TOL;
        let mut per_stage = true;
        let mut tail = 0.0;
        for i in (0..=t).rev() {
            tail += exact.stage_entropies[i];
            let v_markov = policy.value(i, &exact.path.configs()[i])?;
            per_stage &= v_markov - eps[i] - CHECK_TOL <= tail && tail <= v_markov + CHECK_TOL;
        }
        verdicts.push(StartVerdict {
            start: x0.clone(),
            markov_value,
            optimal_value,
            rollout_value,
            epsilon0: eps[0],
            two_sided,
            epsilon_optimal,
            per_stage,
        });
    }
    Ok(TheoremReport { applicable: true, reason: None, epsilons: eps, verdicts })
}

/// Everything the bound calculators can say about one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub k: usize,
    pub horizon: usize,
    /// `Δ(i)` (or `Δ_k(i)`) for `i = 0..=t`; `None` where its condition fails.
    pub deltas: Vec<Option<f64>>,
    pub epsilons: Vec<Option<Epsilon>>,
    /// `ξ < ρ/t`
    pub single_robot_condition: bool,
    /// `ξ < min(ρ/(tk), ρ/(4k))` and `ℓ'₁ = ℓ'₂`, for `k > 1`.
    pub multi_robot_condition: Option<bool>,
    pub ordering: Option<OrderingReport>,
    pub theorems: Option<TheoremReport>,
}

impl BoundReport {
    pub fn new(p: BoundParams, k: usize, horizon: usize) -> Self {
        Self {
            params: p,
            k,
            horizon,
            deltas: (0..=horizon).map(|i| stage_bound(i, k, &p).ok()).collect(),
            epsilons: (0..=horizon).map(|i| epsilon(i, horizon, &p, k).ok()).collect(),
            single_robot_condition: p.single_robot_condition(horizon),
            multi_robot_condition: (k > 1).then(|| p.is_isotropic() && p.multi_robot_condition(horizon, k)),
            ordering: None,
            theorems: None,
        }
    }

    /// Whether the sufficient condition for this robot count holds.
    pub fn condition_met(&self) -> bool {
        self.multi_robot_condition.unwrap_or(self.single_robot_condition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(xi: f64, rho: f64) -> BoundParams {
        // ℓ'₁ chosen so that exp(-1/(2ℓ'²)) = ξ.
        let ell = (-1.0 / (2.0 * xi.ln())).sqrt();
        BoundParams { xi, rho, ell1_norm: ell, ell2_norm: ell, signal_var: 1.0 }
    }

    #[test]
    fn preset_noise_to_signal_ratios() {
        let w = Widths::new(5.0, 5.0).unwrap();
        let t = BoundParams::new(&Hyperparams::temperature(), &w);
        assert!((t.rho - 1.023346303501945).abs() < 1e-12);
        assert_eq!(format!("{:.3}", t.noise_to_signal()), "0.023");
        let p = BoundParams::new(&Hyperparams::plankton(), &w);
        assert_eq!(format!("{:.3}", p.noise_to_signal()), "0.019");
    }

    #[test]
    fn xi_from_normalized_length_scale() {
        let h = Hyperparams::new(5.0, 1.0, 1.0, 0.1).unwrap();
        let p = BoundParams::new(&h, &Widths::new(5.0, 1.0).unwrap());
        assert_eq!(p.ell1_norm, 1.0);
        assert!((p.xi - 0.606_530_659_712_633_4).abs() < 1e-15);
        let tiny = Hyperparams::new(0.05, 1.0, 1.0, 0.1).unwrap();
        let p = BoundParams::new(&tiny, &Widths::new(5.0, 1.0).unwrap());
        assert!(p.xi >= 0.0 && p.xi < 1e-300);
        assert!((p.xi - (-1.0 / (2.0 * p.ell1_norm * p.ell1_norm)).exp()).abs() < 1e-12);
    }

    #[test]
    fn delta_closed_form() {
        // ½·ln(1/(1 - 0.0625/(1.5·1.75))), evaluated independently at high precision.
        let d = delta(1, &params(0.5, 2.0)).unwrap();
        assert!((d - 0.012_048_775_789_530_251).abs() < 1e-15, "{d}");
        assert_eq!(delta(0, &params(0.5, 2.0)).unwrap(), 0.0);
        assert!(matches!(delta(5, &params(0.5, 2.0)), Err(Error::ConditionViolated(_))));
        assert!(delta(3, &params(1e-6, 1.0)).unwrap() < 1e-20);
    }

    #[test]
    fn delta_vacuous_when_log_argument_nonpositive() {
        // ξ < ρ/i holds but ξ⁴ exceeds (ρ/i - ξ)(ρ - ξ²).
        let p = params(0.5, 1.02);
        assert!(p.single_robot_condition(2));
        assert_eq!(delta(2, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn delta_monotone_in_stage() {
        for &(xi, rho) in &[(0.1, 1.0), (0.3, 1.2), (0.2, 3.0), (0.45, 2.0)] {
            let p = params(xi, rho);
            let vals: Vec<f64> = (0..6).filter_map(|i| delta(i, &p).ok()).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
        }
    }

    #[test]
    fn delta_k_cases() {
        let p = params(0.1, 2.0);
        // (2/2)·ln(1/(1 - 1e-4/((0.5 - 0.1)(2 - 0.04)))), high-precision script value.
        let d = delta_k(2, 2, &p).unwrap();
        assert!((d - 1.275_591_557_313_533_8e-4).abs() < 1e-17, "{d}");
        assert!(delta_k(2, 1, &p).unwrap() < delta_k(2, 2, &p).unwrap());
        assert!(delta_k(1, 1, &p).unwrap() >= delta(1, &p).unwrap());
        let mut aniso = p;
        aniso.ell2_norm *= 2.0;
        assert!(matches!(delta_k(2, 2, &aniso), Err(Error::AnisotropyViolated { .. })));
        assert!(matches!(delta_k(2, 2, &params(0.3, 2.0)), Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn epsilon_sums() {
        let p = params(0.3, 2.0);
        let e = epsilon(4, 4, &p, 1).unwrap();
        assert_eq!(e.sum, delta(4, &p).unwrap());
        // Σ_{s=0}^{4} Δ(s) from an independent high-precision evaluation.
        let e0 = epsilon(0, 4, &p, 1).unwrap();
        assert!((e0.sum - 2.082_002_300_931_704_7e-2).abs() < 1e-15, "{}", e0.sum);
        for i in 0..=4 {
            let e = epsilon(i, 4, &p, 1).unwrap();
            assert!(e.sum <= e.loose);
        }
    }

    #[test]
    fn variance_reduction_closed_form() {
        let b = variance_reduction_bound(1, &params(0.5, 2.0)).unwrap();
        assert!((b - 0.0625 / 1.5).abs() < 1e-15);
        assert!(variance_reduction_bound(2, &params(1e-4, 1.0)).unwrap() < 1e-15);
    }
}
