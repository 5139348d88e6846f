//! Shared builders for randomized integration tests. Everything is seeded,
//! so runs are reproducible.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhpf::map::{BlockVector, ProblemSpec};
use mhpf::tensor::NonnegTensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A problem shape: tensor dims plus the block partition.
#[derive(Clone, Debug)]
pub struct Shape {
    pub dims: Vec<usize>,
    pub nu: Vec<usize>,
}

impl Shape {
    pub fn new(dims: &[usize], nu: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            nu: nu.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }
}

/// Dense tensor with entries uniform in `[lo, hi)`.
pub fn random_dense_tensor(rng: &mut ChaCha8Rng, dims: &[usize], lo: f64, hi: f64) -> NonnegTensor {
    let total: usize = dims.iter().product();
    let data: Vec<f64> = (0..total).map(|_| rng.gen_range(lo..hi)).collect();
    NonnegTensor::from_dense(dims.to_vec(), data).unwrap()
}

/// Sparse tensor: each entry present with probability `density`.
pub fn random_sparse_tensor(rng: &mut ChaCha8Rng, dims: &[usize], density: f64) -> NonnegTensor {
    let total: usize = dims.iter().product();
    let data: Vec<f64> = (0..total)
        .map(|_| {
            if rng.gen_bool(density) {
                rng.gen_range(0.1..1.0)
            } else {
                0.0
            }
        })
        .collect();
    NonnegTensor::from_dense(dims.to_vec(), data).unwrap()
}

pub fn spec_with(tensor: NonnegTensor, nu: &[usize], p: &[f64]) -> ProblemSpec {
    ProblemSpec::new(Arc::new(tensor), nu.to_vec(), p.to_vec()).unwrap()
}

/// Dense tensor whose entries are invariant under permutations of the slots
/// inside each block. With that partial symmetry the maximizer of the
/// generalized Rayleigh quotient is an eigenvector of the map, so the grid
/// oracle and the solver measure the same quantity.
pub fn random_block_symmetric_tensor(
    rng: &mut ChaCha8Rng,
    shape: &Shape,
    lo: f64,
    hi: f64,
) -> NonnegTensor {
    use std::collections::BTreeMap;
    let dims = &shape.dims;
    let total: usize = dims.iter().product();
    let mut starts = Vec::new();
    let mut acc = 0;
    for &count in &shape.nu {
        starts.push(acc);
        acc += count;
    }
    let mut orbit_values: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut data = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        let mut canonical = idx.clone();
        for (b, &start) in starts.iter().enumerate() {
            canonical[start..start + shape.nu[b]].sort_unstable();
        }
        let v = *orbit_values
            .entry(canonical)
            .or_insert_with(|| rng.gen_range(lo..hi));
        data.push(v);
        for axis in (0..idx.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    NonnegTensor::from_dense(dims.clone(), data).unwrap()
}

pub fn random_positive_block_vector(rng: &mut ChaCha8Rng, dims: &[usize]) -> BlockVector {
    BlockVector::new(
        dims.iter()
            .map(|&n| (0..n).map(|_| rng.gen_range(0.2..1.5)).collect())
            .collect(),
    )
}

/// A mixed bag of small shapes covering d = 1, 2, 3 and repeated blocks.
pub fn shape_pool() -> Vec<Shape> {
    vec![
        Shape::new(&[3, 3], &[2]),
        Shape::new(&[2, 2, 2], &[3]),
        Shape::new(&[2, 3], &[1, 1]),
        Shape::new(&[3, 3], &[1, 1]),
        Shape::new(&[2, 2, 3], &[2, 1]),
        Shape::new(&[2, 2, 2], &[1, 1, 1]),
        Shape::new(&[2, 2, 2, 2], &[2, 2]),
    ]
}
