use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Factor, GpModel, Hyperparams, Location};
use crate::error::{Error, Result};
use crate::transect::TransectGrid;

/// Largest grid (in locations) whose full prior covariance we factor densely.
pub const MAX_DENSE_LOCATIONS: usize = 5000;

/// Draws one exact realization `z ~ N(μ·1, Σ)` over the whole grid.
///
/// Locations are stacked column by column; the returned matrix is `rows × cols`.
/// The draw is a pure function of the inputs and `seed`.
pub fn sample_prior_field(grid: &TransectGrid, hyp: &Hyperparams, prior_mean: f64, seed: u64) -> Result<DMatrix<f64>> {
    let (r, c) = (grid.n_rows(), grid.n_cols());
    if r * c > MAX_DENSE_LOCATIONS {
        return Err(Error::GridTooLarge { locations: r * c, limit: MAX_DENSE_LOCATIONS });
    }
    let model = GpModel::new(*hyp, grid.widths());
    let locs: Vec<Location> = grid.locations().collect();
    let factor = Factor::new(model.cov_matrix(&locs).matrix())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = DMatrix::from_fn(locs.len(), 1, |_, _| StandardNormal.sample(&mut rng));
    let z = factor.lower() * eps;
    Ok(DMatrix::from_fn(r, c, |row, col| prior_mean + z[(col * r + row, 0)]))
}
