//! The tensor-induced multi-homogeneous map `R`, block vectors and the
//! homogeneity matrix.
//!
//! A [`ProblemSpec`] pairs a nonnegative tensor with a block partition `nu`
//! of its modes and exponents `p_i > 1`. Writing `s_1 = 0`,
//! `s_{k+1} = s_k + nu_k` for the leading slot of each block, the map is
//!
//! ```text
//! R_i(x) = psi_{p_i'}( T_{s_i}(x_1, ..., x_1, x_2, ..., x_2, ..., x_d) )
//! ```
//!
//! with each block repeated `nu_k` times and `p' = p / (p - 1)` the Hoelder
//! conjugate. `R` is order-preserving on the nonnegative cone product and
//! multi-homogeneous: `R(alpha . x) = alpha^A . R(x)` with homogeneity matrix
//! `A[i][k] = (p_i' - 1)(nu_k - [i = k])`.
//!
//! All evaluation is pure; a spec is immutable after construction and safe to
//! evaluate concurrently from several threads.

use std::sync::Arc;

use thiserror::Error;

use crate::tensor::{FullVectorTuple, NonnegTensor, TensorError};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("exponent p[{block}] = {p} is out of range (must be finite and > 1)")]
    ExponentOutOfRange { block: usize, p: f64 },
    #[error("block sizes nu sum to {nu_sum} but the tensor has order {order}")]
    ArityMismatch { nu_sum: usize, order: usize },
    #[error("nu[{block}] must be positive")]
    EmptyBlock { block: usize },
    #[error("nu and p describe {nu_blocks} and {p_blocks} blocks respectively")]
    BlockCountMismatch { nu_blocks: usize, p_blocks: usize },
    #[error("modes {first}..{last} of block {block} have unequal dimensions {dims:?}")]
    BlockDimMismatch {
        block: usize,
        first: usize,
        last: usize,
        dims: Vec<usize>,
    },
    #[error("block vector has {got} blocks, expected {expected}")]
    BlockArityMismatch { got: usize, expected: usize },
    #[error("block {block} has length {got}, expected {expected}")]
    BlockLenMismatch {
        block: usize,
        got: usize,
        expected: usize,
    },
    #[error("block {block} contains a negative entry at position {index}")]
    NegativeEntry { block: usize, index: usize },
    #[error("block {block} contains a non-finite entry at position {index}")]
    NonFiniteEntry { block: usize, index: usize },
    #[error("block {block} is identically zero")]
    ZeroBlock { block: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// A vector on the cone product: `d` blocks, block `i` of length `n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Vec<f64>>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vec<f64>>) -> Self {
        Self { blocks }
    }

    /// The all-ones vector with the given block sizes.
    pub fn ones(block_dims: &[usize]) -> Self {
        Self {
            blocks: block_dims.iter().map(|&n| vec![1.0; n]).collect(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    pub fn is_nonneg(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&v| v >= 0.0 && v.is_finite()))
    }

    pub fn is_positive(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&v| v > 0.0 && v.is_finite()))
    }

    /// Blockwise scaling `alpha . x = (alpha_1 x_1, ..., alpha_d x_d)`.
    pub fn scale_blocks(&self, alpha: &[f64]) -> Self {
        assert_eq!(alpha.len(), self.num_blocks(), "scale arity mismatch");
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(alpha)
                .map(|(b, &a)| b.iter().map(|&v| a * v).collect())
                .collect(),
        }
    }

    /// Largest absolute difference over all coordinates.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// The `d x d` nonnegative matrix of blockwise homogeneity degrees. Also the
/// general nonnegative square matrix accepted by the [`crate::cone`]
/// analytics.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl HomogeneityMatrix {
    /// Build from row-major data; every entry must be finite and `>= 0`.
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length mismatch");
        assert!(
            data.iter().all(|v| v.is_finite() && *v >= 0.0),
            "homogeneity matrix entries must be finite and nonnegative"
        );
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.dim + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `A^T v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (i, &vi) in v.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.get(i, k) * vi;
            }
        }
        out
    }

    /// `A + t * ones * ones^T`.
    pub fn shifted_uniform(&self, t: f64) -> Self {
        Self::new(self.dim, self.data.iter().map(|v| v + t).collect())
    }
}

/// `alpha^A`: component `i` is `prod_k alpha_k^{A[i][k]}`. Requires
/// `alpha > 0`; computed in the log domain.
pub fn alpha_power(alpha: &[f64], a: &HomogeneityMatrix) -> Vec<f64> {
    assert_eq!(alpha.len(), a.dim());
    assert!(alpha.iter().all(|&v| v > 0.0), "alpha must be positive");
    let logs: Vec<f64> = alpha.iter().map(|v| v.ln()).collect();
    (0..a.dim())
        .map(|i| {
            let e: f64 = a.row(i).iter().zip(&logs).map(|(aik, l)| aik * l).sum();
            e.exp()
        })
        .collect()
}

/// A spectral problem: tensor, block partition and exponents, with derived
/// quantities (Hoelder conjugates, slot offsets, block dimensions).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    tensor: Arc<NonnegTensor>,
    nu: Vec<usize>,
    p: Vec<f64>,
    p_conj: Vec<f64>,
    block_starts: Vec<usize>,
    block_dims: Vec<usize>,
    slot_block: Vec<usize>,
}

impl ProblemSpec {
    /// Validates that `nu` partitions the tensor modes, that every `p_i`
    /// exceeds one, and that all modes inside a block share one dimension
    /// (evaluating the tensor at repeated arguments is only meaningful then).
    pub fn new(tensor: Arc<NonnegTensor>, nu: Vec<usize>, p: Vec<f64>) -> Result<Self, MapError> {
        if nu.len() != p.len() {
            return Err(MapError::BlockCountMismatch {
                nu_blocks: nu.len(),
                p_blocks: p.len(),
            });
        }
        if nu.is_empty() {
            return Err(MapError::ArityMismatch {
                nu_sum: 0,
                order: tensor.order(),
            });
        }
        for (block, &v) in nu.iter().enumerate() {
            if v == 0 {
                return Err(MapError::EmptyBlock { block });
            }
        }
        let nu_sum: usize = nu.iter().sum();
        if nu_sum != tensor.order() {
            return Err(MapError::ArityMismatch {
                nu_sum,
                order: tensor.order(),
            });
        }
        for (block, &pi) in p.iter().enumerate() {
            if !pi.is_finite() || pi <= 1.0 {
                return Err(MapError::ExponentOutOfRange { block, p: pi });
            }
        }

        let d = nu.len();
        let mut block_starts = Vec::with_capacity(d);
        let mut block_dims = Vec::with_capacity(d);
        let mut slot_block = Vec::with_capacity(tensor.order());
        let mut start = 0usize;
        for (i, &count) in nu.iter().enumerate() {
            block_starts.push(start);
            let dims = &tensor.dims()[start..start + count];
            if dims.iter().any(|&n| n != dims[0]) {
                return Err(MapError::BlockDimMismatch {
                    block: i,
                    first: start,
                    last: start + count - 1,
                    dims: dims.to_vec(),
                });
            }
            block_dims.push(dims[0]);
            for _ in 0..count {
                slot_block.push(i);
            }
            start += count;
        }
        let p_conj = p.iter().map(|&pi| pi / (pi - 1.0)).collect();
        Ok(Self {
            tensor,
            nu,
            p,
            p_conj,
            block_starts,
            block_dims,
            slot_block,
        })
    }

    pub fn tensor(&self) -> &NonnegTensor {
        &self.tensor
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    pub fn num_blocks(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }

    /// Hoelder conjugates `p_i' = p_i / (p_i - 1)`.
    pub fn conjugates(&self) -> &[f64] {
        &self.p_conj
    }

    /// Leading tensor slot `s_i` of each block (zero-based).
    pub fn block_starts(&self) -> &[usize] {
        &self.block_starts
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// Which block occupies tensor slot `w`.
    pub fn slot_block(&self, w: usize) -> usize {
        self.slot_block[w]
    }

    /// Assemble the full `m`-slot argument tuple from a block vector by
    /// repeating block `k` exactly `nu_k` times.
    pub fn full_tuple(&self, x: &BlockVector) -> FullVectorTuple {
        FullVectorTuple::new(
            self.slot_block
                .iter()
                .map(|&k| x.block(k).to_vec())
                .collect(),
        )
    }

    fn check_block_shape(&self, x: &BlockVector) -> Result<(), MapError> {
        if x.num_blocks() != self.num_blocks() {
            return Err(MapError::BlockArityMismatch {
                got: x.num_blocks(),
                expected: self.num_blocks(),
            });
        }
        for (i, &n) in self.block_dims.iter().enumerate() {
            if x.block(i).len() != n {
                return Err(MapError::BlockLenMismatch {
                    block: i,
                    got: x.block(i).len(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    fn check_nonneg(&self, x: &BlockVector) -> Result<(), MapError> {
        for (i, block) in x.blocks().iter().enumerate() {
            for (j, &v) in block.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MapError::NonFiniteEntry { block: i, index: j });
                }
                if v < 0.0 {
                    return Err(MapError::NegativeEntry { block: i, index: j });
                }
            }
        }
        Ok(())
    }
}

/// `psi_p(z) = |z_j|^{p-1} sign(z_j)` componentwise; the inverse of
/// `psi_{p'}`, so `psi_{p'}(psi_p(z)) = z`.
pub fn psi(p: f64, z: &[f64]) -> Result<Vec<f64>, MapError> {
    if !p.is_finite() || p <= 1.0 {
        return Err(MapError::ExponentOutOfRange { block: 0, p });
    }
    Ok(psi_slice(p, z))
}

// Exponentiation goes through ln/exp with an explicit guard at zero
// (0^a = 0 for a > 0), which keeps denormal inputs from producing NaN.
// p = 2 is the identity and stays exact.
fn psi_slice(p: f64, z: &[f64]) -> Vec<f64> {
    let e = p - 1.0;
    if e == 1.0 {
        return z.to_vec();
    }
    z.iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                v.signum() * (e * v.abs().ln()).exp()
            }
        })
        .collect()
}

/// The l^p norm of a slice, computed with max-scaling so that huge dynamic
/// ranges (large conjugate exponents) do not overflow.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    let m = v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = v
        .iter()
        .map(|&x| {
            let r = x.abs() / m;
            if r == 0.0 {
                0.0
            } else {
                (p * r.ln()).exp()
            }
        })
        .sum();
    m * (sum.ln() / p).exp()
}

/// Evaluate the map `R` at a nonnegative block vector.
pub fn eval_r(spec: &ProblemSpec, x: &BlockVector) -> Result<BlockVector, MapError> {
    spec.check_block_shape(x)?;
    spec.check_nonneg(x)?;
    eval_r_signed(spec, x)
}

/// Evaluation without the nonnegativity check. `psi` and the multilinear
/// contraction are defined for signed arguments, which finite-difference
/// Jacobians near the cone boundary rely on.
pub(crate) fn eval_r_signed(spec: &ProblemSpec, x: &BlockVector) -> Result<BlockVector, MapError> {
    spec.check_block_shape(x)?;
    let tuple = spec.full_tuple(x);
    let mut blocks = Vec::with_capacity(spec.num_blocks());
    for i in 0..spec.num_blocks() {
        let contracted = spec
            .tensor()
            .contract_mode(spec.block_starts()[i], &tuple)?;
        blocks.push(psi_slice(spec.conjugates()[i], &contracted));
    }
    Ok(BlockVector::new(blocks))
}

/// Divide each block by its l^{p_i} norm, landing on the product sphere.
/// A zero block signals a degenerate iterate and is reported by index.
pub fn normalize(x: &BlockVector, p: &[f64]) -> Result<BlockVector, MapError> {
    assert_eq!(x.num_blocks(), p.len(), "exponent arity mismatch");
    let mut blocks = Vec::with_capacity(x.num_blocks());
    for (i, block) in x.blocks().iter().enumerate() {
        let norm = lp_norm(block, p[i]);
        if norm == 0.0 {
            return Err(MapError::ZeroBlock { block: i });
        }
        blocks.push(block.iter().map(|&v| v / norm).collect());
    }
    Ok(BlockVector::new(blocks))
}

/// The homogeneity matrix `A[i][k] = (p_i' - 1)(nu_k - [i = k])`.
pub fn homogeneity_matrix(spec: &ProblemSpec) -> HomogeneityMatrix {
    let d = spec.num_blocks();
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let delta = if i == k { 1.0 } else { 0.0 };
            data[i * d + k] = (spec.conjugates()[i] - 1.0) * (spec.nu()[k] as f64 - delta);
        }
    }
    HomogeneityMatrix::new(d, data)
}

/// The eigenvalue associated with a vector on the product sphere:
/// `lambda = tau(x_1, ..., x_1, x_2, ...)` with blocks repeated `nu_k` times.
/// At an eigenvector, `R_i(x) = lambda^{p_i' - 1} x_i` for every block.
pub fn eigenvalue_from_vector(spec: &ProblemSpec, x: &BlockVector) -> Result<f64, MapError> {
    spec.check_block_shape(x)?;
    spec.check_nonneg(x)?;
    let tuple = spec.full_tuple(x);
    Ok(spec.tensor().multilinear_form(&tuple)?)
}
