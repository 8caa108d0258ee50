//! Dense and incremental Cholesky routines shared by the GP and planning code.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Jitter levels tried in order, relative to the mean diagonal.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Triangular-factor entries below this are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-150;

/// Cholesky factor of a covariance matrix obtained with deterministic jitter escalation.
#[derive(Debug, Clone)]
pub struct Factor {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl Factor {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "covariance must be square");
        if n == 0 {
            return Ok(Self { chol: Cholesky::new(DMatrix::zeros(0, 0)).expect("empty factorization"), jitter: 0.0 });
        }
        let mean_diag = matrix.diagonal().mean().abs().max(f64::MIN_POSITIVE);
        for rel in JITTER_LADDER {
            let jitter = rel * mean_diag;
            let mut m = matrix.clone();
            if jitter > 0.0 {
                for i in 0..n {
                    m[(i, i)] += jitter;
                }
            }
            if let Some(chol) = Cholesky::new(m) {
                let l = chol.l_dirty();
                let min_pivot = (0..n).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
                if min_pivot.is_nan() || min_pivot < PIVOT_FLOOR {
                    return Err(Error::SingularCovariance { pivot: min_pivot });
                }
                return Ok(Self { chol, jitter });
            }
        }
        Err(Error::FactorizationFailure { dim: n })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Absolute jitter added to the diagonal (zero when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L y = b` for the lower factor `L`.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.chol.l();
        l.solve_lower_triangular(b).expect("factor has nonzero diagonal")
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

/// Lower-triangular factor of a growing covariance matrix, stored packed by rows.
///
/// Appending a variable costs one forward substitution; the squared new pivot
/// is the variable's variance conditioned on everything already in the factor.
#[derive(Debug, Clone, Default)]
pub struct PackedFactor {
    packed: Vec<f64>,
    n: usize,
}

impl PackedFactor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn row(&self, j: usize) -> &[f64] {
        let start = j * (j + 1) / 2;
        &self.packed[start..start + j + 1]
    }

    /// Appends a variable with covariances `cross` against the existing ones and
    /// prior variance `var`. Returns its conditional variance.
    pub fn push(&mut self, cross: &[f64], var: f64) -> Result<f64> {
        debug_assert_eq!(cross.len(), self.n);
        let mut w = Vec::with_capacity(self.n + 1);
        for j in 0..self.n {
            let row = self.row(j);
            let dot: f64 = row[..j].iter().zip(&w).map(|(a, b)| a * b).sum();
            w.push((cross[j] - dot) / row[j]);
        }
        let cond_var = var - w.iter().map(|x| x * x).sum::<f64>();
        let pivot = cond_var.max(0.0).sqrt();
        if pivot.is_nan() || pivot < PIVOT_FLOOR {
            return Err(Error::SingularCovariance { pivot });
        }
        w.push(pivot);
        self.packed.extend_from_slice(&w);
        self.n += 1;
        Ok(cond_var)
    }

    /// Drops every variable past the first `n`.
    pub fn truncate(&mut self, n: usize) {
        if n < self.n {
            self.packed.truncate(n * (n + 1) / 2);
            self.n = n;
        }
    }
}
