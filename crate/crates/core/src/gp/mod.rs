//! Gaussian process machinery over transect grids.
//!
//! The field is modelled as a second-order stationary GP with a constant prior
//! mean and an axis-aligned squared exponential covariance
//!
//! `σ_uv = σ_s² exp{-½ (u-v)ᵀ M⁻² (u-v)} + σ_n² δ_uv`, `M = diag(ℓ₁, ℓ₂)`,
//!
//! where `u - v` is measured in meters. Posterior covariances never depend on
//! measured values, which is what turns entropy-based path planning into a
//! deterministic problem.

mod linalg;
mod running;
mod sample;

pub use linalg::{Factor, PackedFactor, JITTER_LADDER, PIVOT_FLOOR};
pub use running::RunningEntropy;
pub use sample::{sample_prior_field, MAX_DENSE_LOCATIONS};

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(2πe)`, the per-dimension constant of the Gaussian entropy.
pub const LN_2PI_E: f64 = 2.837_877_066_409_345_3;

/// Squared exponential hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Horizontal length-scale (along the transect), meters.
    pub ell1: f64,
    /// Vertical length-scale (across the transect), meters.
    pub ell2: f64,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl Hyperparams {
    pub fn new(ell1: f64, ell2: f64, signal_var: f64, noise_var: f64) -> Result<Self> {
        let h = Self { ell1, ell2, signal_var, noise_var };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidHyperparams(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        positive("ell1", self.ell1)?;
        positive("ell2", self.ell2)?;
        positive("signal_var", self.signal_var)?;
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::InvalidHyperparams(format!(
                "noise_var must be finite and >= 0, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    /// Temperature-field hyperparameters (Panther Hollow Lake survey).
    pub fn temperature() -> Self {
        Self { ell1: 40.45, ell2: 16.00, signal_var: 0.1542, noise_var: 0.0036 }
    }

    /// Plankton-density hyperparameters (Chesapeake Bay survey).
    pub fn plankton() -> Self {
        Self { ell1: 27.53, ell2: 134.64, signal_var: 2.152, noise_var: 0.041 }
    }
}

/// Horizontal and vertical grid spacing in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Widths {
    pub omega1: f64,
    pub omega2: f64,
}

impl Widths {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega1 > 0.0 && omega2.is_finite() && omega2 > 0.0) {
            return Err(Error::InvalidGrid(format!("discretization widths must be > 0, got ({omega1}, {omega2})")));
        }
        Ok(Self { omega1, omega2 })
    }
}

/// A grid cell, addressed by column (along the transect) and row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub col: usize,
    pub row: usize,
}

impl Location {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }

    /// Physical coordinates in meters.
    pub fn physical(&self, widths: &Widths) -> (f64, f64) {
        (self.col as f64 * widths.omega1, self.row as f64 * widths.omega2)
    }
}

/// Symmetric positive semi-definite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(DMatrix<f64>);

impl CovMatrix {
    /// Wraps a matrix, checking squareness and symmetry to 1e-12 relative.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidHyperparams(format!(
                "covariance must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        for i in 0..m.nrows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidHyperparams(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn entropy(&self) -> Result<f64> {
        gaussian_entropy(self)
    }
}

/// Differential entropy `½ log((2πe)^k |Σ|)` in nats, via the Cholesky log-determinant.
pub fn gaussian_entropy(cov: &CovMatrix) -> Result<f64> {
    let k = cov.dim();
    if k == 0 {
        return Ok(0.0);
    }
    let f = Factor::new(cov.matrix())?;
    Ok(0.5 * (k as f64 * LN_2PI_E + f.log_det()))
}

/// Entropy of a scalar Gaussian with the given variance.
pub fn scalar_entropy(var: f64) -> f64 {
    0.5 * (LN_2PI_E + var.ln())
}

/// A squared exponential GP bound to a grid geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpModel {
    hyp: Hyperparams,
    widths: Widths,
}

impl GpModel {
    pub fn new(hyp: Hyperparams, widths: Widths) -> Self {
        Self { hyp, widths }
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyp
    }

    pub fn widths(&self) -> &Widths {
        &self.widths
    }

    /// Covariance without the noise term.
    #[inline]
    pub fn signal_cov(&self, u: Location, v: Location) -> f64 {
        let dx = (u.col as f64 - v.col as f64) * self.widths.omega1 / self.hyp.ell1;
        let dy = (u.row as f64 - v.row as f64) * self.widths.omega2 / self.hyp.ell2;
        self.hyp.signal_var * (-0.5 * (dx * dx + dy * dy)).exp()
    }

    /// `σ_uv`, with the noise variance added when `u == v`.
    #[inline]
    pub fn covariance(&self, u: Location, v: Location) -> f64 {
        let noise = if u == v { self.hyp.noise_var } else { 0.0 };
        self.signal_cov(u, v) + noise
    }

    /// Prior variance of any single location.
    pub fn prior_var(&self) -> f64 {
        self.hyp.signal_var + self.hyp.noise_var
    }

    /// Covariance matrix of a list of observations. Noise enters on the
    /// diagonal only, so a repeated location is two independent noisy readings.
    pub fn cov_matrix(&self, locs: &[Location]) -> CovMatrix {
        let n = locs.len();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = self.prior_var();
            for b in 0..a {
                let c = self.signal_cov(locs[a], locs[b]);
                m[(a, b)] = c;
                m[(b, a)] = c;
            }
        }
        CovMatrix(m)
    }

    /// Cross-covariance block `Σ_ab` between two location lists.
    pub fn cross_cov(&self, a: &[Location], b: &[Location]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.covariance(a[i], b[j]))
    }

    fn check_duplicates(&self, locs: &[Location]) -> Result<()> {
        if self.hyp.noise_var > 0.0 {
            return Ok(());
        }
        let mut seen = HashSet::with_capacity(locs.len());
        for l in locs {
            if !seen.insert(*l) {
                return Err(Error::DuplicateNoiseless { col: l.col, row: l.row });
            }
        }
        Ok(())
    }

    /// Posterior mean at every target given observed values and a constant prior mean.
    pub fn posterior_means(
        &self,
        targets: &[Location],
        obs_locs: &[Location],
        obs_vals: &[f64],
        prior_mean: f64,
    ) -> Result<DVector<f64>> {
        assert_eq!(obs_locs.len(), obs_vals.len(), "one value per observed location");
        if obs_locs.is_empty() {
            return Ok(DVector::from_element(targets.len(), prior_mean));
        }
        self.check_duplicates(obs_locs)?;
        let f = Factor::new(self.cov_matrix(obs_locs).matrix())?;
        let resid = DMatrix::from_iterator(obs_vals.len(), 1, obs_vals.iter().map(|z| z - prior_mean));
        let alpha = f.solve(&resid);
        let k = self.cross_cov(targets, obs_locs);
        Ok((k * alpha).column(0).add_scalar(prior_mean))
    }

    pub fn posterior_mean(&self, u: Location, obs_locs: &[Location], obs_vals: &[f64], prior_mean: f64) -> Result<f64> {
        Ok(self.posterior_means(&[u], obs_locs, obs_vals, prior_mean)?[0])
    }

    /// `Σ_tt - Σ_tx Σ_xx⁻¹ Σ_xt`. Takes no measurements by construction.
    pub fn posterior_cov(&self, targets: &[Location], obs_locs: &[Location]) -> Result<CovMatrix> {
        let prior = self.cov_matrix(targets).into_inner();
        if obs_locs.is_empty() {
            return Ok(CovMatrix(prior));
        }
        self.check_duplicates(obs_locs)?;
        let f = Factor::new(self.cov_matrix(obs_locs).matrix())?;
        let v = f.solve_lower(&self.cross_cov(obs_locs, targets));
        let mut post = prior - v.transpose() * v;
        let n = post.nrows();
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (post[(i, j)] + post[(j, i)]);
                post[(i, j)] = s;
                post[(j, i)] = s;
            }
        }
        Ok(CovMatrix(post))
    }

    /// `H[Z_targets | Z_given]` in nats.
    pub fn conditional_entropy(&self, targets: &[Location], given: &[Location]) -> Result<f64> {
        gaussian_entropy(&self.posterior_cov(targets, given)?)
    }

    /// `I[Z_next; Z_past | Z_current] = H[next | current] - H[next | current ∪ past]`.
    ///
    /// Conditioning sets are treated as sets of locations, so a past location
    /// already in `current` contributes nothing. Round-off negatives down to
    /// -1e-9 are clamped to zero.
    pub fn cond_mutual_info(&self, next: &[Location], past: &[Location], current: &[Location]) -> Result<f64> {
        let mut union: Vec<Location> = Vec::with_capacity(current.len() + past.len());
        let mut seen = HashSet::new();
        for l in current.iter().chain(past) {
            if seen.insert(*l) {
                union.push(*l);
            }
        }
        if union.len() == dedup_len(current) {
            return Ok(0.0);
        }
        let current: Vec<Location> = union[..dedup_len(current)].to_vec();
        let h_cur = self.conditional_entropy(next, &current)?;
        let h_all = self.conditional_entropy(next, &union)?;
        let mi = h_cur - h_all;
        Ok(if (-1e-9..0.0).contains(&mi) { 0.0 } else { mi })
    }
}

fn dedup_len(locs: &[Location]) -> usize {
    locs.iter().collect::<HashSet<_>>().len()
}
