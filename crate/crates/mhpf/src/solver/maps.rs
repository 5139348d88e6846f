//! Normalized-iteration views of a problem: the full map, the composed
//! two-block matrix map, and the uniformly shifted map used by the ladder.
//!
//! Every view exposes evaluation along with the bookkeeping that turns
//! coordinate ratios into eigenvalue-scale Collatz-Wielandt bounds, so the
//! iteration engine in the parent module is shared by all strategies.

use crate::map::{eval_r, normalize, psi, BlockVector, ProblemSpec};
use crate::solver::{gamma_exponent, SolveError};
use crate::tensor::FullVectorTuple;

pub(crate) trait IterableMap {
    /// Normalization exponents, one per iteration block.
    fn norm_exponents(&self) -> Vec<f64>;
    /// Collatz-Wielandt weights, one per iteration block.
    fn weights(&self) -> &[f64];
    /// Exponent converting the weighted ratio product to eigenvalue scale.
    fn lambda_exponent(&self) -> f64;
    fn eval(&self, x: &BlockVector) -> Result<BlockVector, SolveError>;
}

/// The problem map itself.
pub(crate) struct FullMap<'a> {
    spec: &'a ProblemSpec,
    b: Vec<f64>,
    lambda_exp: f64,
}

impl<'a> FullMap<'a> {
    pub fn new(spec: &'a ProblemSpec, b: Vec<f64>) -> Self {
        let lambda_exp = gamma_exponent(spec, &b) - 1.0;
        Self {
            spec,
            b,
            lambda_exp,
        }
    }
}

impl IterableMap for FullMap<'_> {
    fn norm_exponents(&self) -> Vec<f64> {
        self.spec.exponents().to_vec()
    }

    fn weights(&self) -> &[f64] {
        &self.b
    }

    fn lambda_exponent(&self) -> f64 {
        self.lambda_exp
    }

    fn eval(&self, x: &BlockVector) -> Result<BlockVector, SolveError> {
        Ok(eval_r(self.spec, x)?)
    }
}

/// The composed single-block map of the two-block matrix case:
/// `C(x) = psi_{p'}(M psi_{q'}(M^T x))`. Its eigenvalues relate to the full
/// problem by `lambda_C = lambda^{(p'-1) q'}`, so the eigenvalue-scale
/// exponent is the reciprocal of that power.
pub(crate) struct ComposedMap<'a> {
    spec: &'a ProblemSpec,
    lambda_exp: f64,
}

impl<'a> ComposedMap<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Self {
        assert!(
            spec.order() == 2 && spec.num_blocks() == 2,
            "composed map requires the two-block matrix case"
        );
        let pc = spec.conjugates()[0];
        let qc = spec.conjugates()[1];
        Self {
            spec,
            lambda_exp: 1.0 / ((pc - 1.0) * qc),
        }
    }

    /// `psi_{q'}(M^T x)`: the raw second block induced by a first block.
    pub fn second_block(&self, x_first: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n2 = self.spec.block_dims()[1];
        let tuple = FullVectorTuple::new(vec![x_first.to_vec(), vec![0.0; n2]]);
        let contracted = self
            .spec
            .tensor()
            .contract_mode(1, &tuple)
            .map_err(crate::map::MapError::from)?;
        Ok(psi(self.spec.conjugates()[1], &contracted)?)
    }
}

impl IterableMap for ComposedMap<'_> {
    fn norm_exponents(&self) -> Vec<f64> {
        vec![self.spec.exponents()[0]]
    }

    fn weights(&self) -> &[f64] {
        &[1.0]
    }

    fn lambda_exponent(&self) -> f64 {
        self.lambda_exp
    }

    fn eval(&self, x: &BlockVector) -> Result<BlockVector, SolveError> {
        let inner = self.second_block(x.block(0))?;
        let n1 = self.spec.block_dims()[0];
        let tuple = FullVectorTuple::new(vec![vec![0.0; n1], inner]);
        let outer = self
            .spec
            .tensor()
            .contract_mode(0, &tuple)
            .map_err(crate::map::MapError::from)?;
        let first = psi(self.spec.conjugates()[0], &outer)?;
        Ok(BlockVector::new(vec![first]))
    }
}

/// `inner + delta` coordinatewise. Iterates live on the product sphere,
/// where the norm powers of the general shift formula are exactly one.
pub(crate) struct ShiftedMap<'a> {
    pub inner: &'a dyn IterableMap,
    pub delta: f64,
}

impl IterableMap for ShiftedMap<'_> {
    fn norm_exponents(&self) -> Vec<f64> {
        self.inner.norm_exponents()
    }

    fn weights(&self) -> &[f64] {
        self.inner.weights()
    }

    fn lambda_exponent(&self) -> f64 {
        self.inner.lambda_exponent()
    }

    fn eval(&self, x: &BlockVector) -> Result<BlockVector, SolveError> {
        let mut r = self.inner.eval(x)?;
        for i in 0..r.num_blocks() {
            for v in r.block_mut(i).iter_mut() {
                *v += self.delta;
            }
        }
        Ok(r)
    }
}

/// Restrict a full-problem start vector to the composed map's single block.
pub(crate) fn composed_start(start: &BlockVector) -> BlockVector {
    if start.num_blocks() == 1 {
        start.clone()
    } else {
        BlockVector::new(vec![start.block(0).to_vec()])
    }
}

/// Expand a converged composed-map iterate to a full eigenvector by one
/// application of the second-block map.
pub(crate) fn expand_composed(
    composed: &ComposedMap<'_>,
    spec: &ProblemSpec,
    x_first: &BlockVector,
) -> Result<BlockVector, SolveError> {
    let second = composed.second_block(x_first.block(0))?;
    let full = BlockVector::new(vec![x_first.block(0).to_vec(), second]);
    Ok(normalize(&full, spec.exponents())?)
}
