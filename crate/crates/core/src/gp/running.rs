use super::{scalar_entropy, GpModel, Location, PackedFactor};
use crate::error::Result;

/// Conditioning set that grows and shrinks in stack order.
///
/// Pushing a block returns `H[Z_block | Z_current]` through the chain rule on
/// the running Cholesky factor, so a depth-first search over paths only pays
/// for the rows it appends.
#[derive(Debug, Clone)]
pub struct RunningEntropy<'m> {
    model: &'m GpModel,
    locs: Vec<Location>,
    factor: PackedFactor,
}

impl<'m> RunningEntropy<'m> {
    pub fn new(model: &'m GpModel) -> Self {
        Self { model, locs: Vec::new(), factor: PackedFactor::new() }
    }

    pub fn len(&self) -> usize {
        self.locs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    pub fn locations(&self) -> &[Location] {
        &self.locs
    }

    /// Appends `block` and returns its entropy conditioned on what came before.
    /// On error the set is left unchanged.
    pub fn push(&mut self, block: &[Location]) -> Result<f64> {
        let base = self.locs.len();
        let mut h = 0.0;
        for &loc in block {
            let cross: Vec<f64> = self.locs.iter().map(|&o| self.model.covariance(loc, o)).collect();
            match self.factor.push(&cross, self.model.prior_var()) {
                Ok(var) => {
                    h += scalar_entropy(var);
                    self.locs.push(loc);
                }
                Err(e) => {
                    self.truncate(base);
                    return Err(e);
                }
            }
        }
        Ok(h)
    }

    /// Conditional entropy of `block` without keeping it.
    pub fn peek(&mut self, block: &[Location]) -> Result<f64> {
        let base = self.locs.len();
        let h = self.push(block)?;
        self.truncate(base);
        Ok(h)
    }

    pub fn truncate(&mut self, n: usize) {
        self.locs.truncate(n);
        self.factor.truncate(n);
    }
}
