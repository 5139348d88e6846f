//! Brute-force validators, deliberately naive and sharing no code with the
//! solver: a dense angular grid search for the maximal generalized Rayleigh
//! quotient, and a textbook matrix power iteration.
//!
//! These exist to cross-check the solver in tests: the grid value is a lower
//! bound on the maximal eigenvalue that converges to it as the resolution
//! grows, and the matrix oracle validates the `m = 2, d = 1, p = 2` path
//! against classical Perron-Frobenius.

use thiserror::Error;

use crate::map::ProblemSpec;
use crate::tensor::FullVectorTuple;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid oracle supports total block dimension <= 6, got {total}")]
    DimTooLarge { total: usize },
    #[error("grid would need {points} evaluations, over the budget {budget}")]
    BudgetExceeded { points: usize, budget: usize },
    #[error("grid resolution must be at least 4, got {resolution}")]
    ResolutionTooSmall { resolution: usize },
    #[error("matrix must be square and nonnegative")]
    BadMatrix,
    #[error("matrix is identically zero")]
    AllZeroMatrix,
}

/// Angular grid parameters. `resolution` is the denominator of the simplex
/// grid per block (points per angle), `budget` caps the total number of
/// grid evaluations.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub resolution: usize,
    pub budget: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: 24,
            budget: 50_000_000,
        }
    }
}

const ASCENT_STEPS: usize = 100;

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

fn naive_lp_norm(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Generalized Rayleigh quotient `tau(x_1 repeated, ...) / prod ||x_i||^{nu_i}`.
fn rayleigh(spec: &ProblemSpec, tuple: &FullVectorTuple, blocks: &[Vec<f64>]) -> f64 {
    let tau = spec
        .tensor()
        .multilinear_form(tuple)
        .expect("grid points match tensor dims");
    let mut denom = 1.0;
    for (i, block) in blocks.iter().enumerate() {
        denom *= naive_lp_norm(block, spec.exponents()[i]).powi(spec.nu()[i] as i32);
    }
    tau / denom
}

fn write_block_into_tuple(
    spec: &ProblemSpec,
    tuple: &mut FullVectorTuple,
    i: usize,
    block: &[f64],
) {
    let start = spec.block_starts()[i];
    for slot in start..start + spec.nu()[i] {
        tuple.set_factor(slot, block);
    }
}

/// Lexicographically smallest composition of `res` into `n` parts.
fn first_composition(n: usize, res: usize) -> Vec<usize> {
    let mut c = vec![0usize; n];
    c[n - 1] = res;
    c
}

/// Advance to the lexicographic successor among compositions with the same
/// sum; `false` once `(res, 0, ..., 0)` was the current value.
fn next_composition(c: &mut [usize]) -> bool {
    let n = c.len();
    if n == 1 {
        return false;
    }
    let k = match c.iter().rposition(|&v| v > 0) {
        Some(k) => k,
        None => return false,
    };
    if k == 0 {
        return false;
    }
    let carry = c[k] - 1;
    c[k] = 0;
    c[k - 1] += 1;
    c[n - 1] = carry;
    true
}

/// Map a simplex composition to the nonnegative l^p sphere via
/// `x_j = (k_j / res)^{1/p}`, so that `||x||_p = 1` exactly in exact
/// arithmetic.
fn composition_to_sphere(comp: &[usize], res: usize, p: f64) -> Vec<f64> {
    comp.iter()
        .map(|&k| (k as f64 / res as f64).powf(1.0 / p))
        .collect()
}

/// Maximize the generalized Rayleigh quotient over the nonnegative product
/// sphere: every block ranges over the l^p-sphere points `x_j = w_j^{1/p}`
/// with `w` on the simplex grid of the given resolution, followed by
/// coordinate ascent from the best grid point. Ties keep the
/// lexicographically smallest grid index. The result is a lower bound on
/// the maximal eigenvalue.
pub fn grid_rayleigh_max(spec: &ProblemSpec, grid: &GridSpec) -> Result<f64, OracleError> {
    if grid.resolution < 4 {
        return Err(OracleError::ResolutionTooSmall {
            resolution: grid.resolution,
        });
    }
    let dims = spec.block_dims().to_vec();
    let total: usize = dims.iter().sum();
    if total > 6 {
        return Err(OracleError::DimTooLarge { total });
    }
    let mut points = 1usize;
    for &n in &dims {
        let per_block =
            binomial(grid.resolution + n - 1, n - 1).ok_or(OracleError::BudgetExceeded {
                points: usize::MAX,
                budget: grid.budget,
            })?;
        points = points
            .checked_mul(per_block)
            .ok_or(OracleError::BudgetExceeded {
                points: usize::MAX,
                budget: grid.budget,
            })?;
    }
    if points > grid.budget {
        return Err(OracleError::BudgetExceeded {
            points,
            budget: grid.budget,
        });
    }

    let res = grid.resolution;
    let mut tuple = spec.full_tuple(&crate::map::BlockVector::ones(&dims));
    let mut best_value = f64::NEG_INFINITY;
    let mut best_blocks: Vec<Vec<f64>> = Vec::new();

    // Odometer over the per-block simplex compositions, lexicographic over
    // the concatenated tuples; ties keep the first (smallest) point.
    let mut comps: Vec<Vec<usize>> = dims.iter().map(|&n| first_composition(n, res)).collect();
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(dims.len());
    for (i, comp) in comps.iter().enumerate() {
        let block = composition_to_sphere(comp, res, spec.exponents()[i]);
        write_block_into_tuple(spec, &mut tuple, i, &block);
        blocks.push(block);
    }
    let mut exhausted = false;
    loop {
        let value = rayleigh(spec, &tuple, &blocks);
        if value > best_value {
            best_value = value;
            best_blocks.clone_from(&blocks);
        }
        // Advance the rightmost block; carry leftwards on wrap.
        let mut level = dims.len();
        loop {
            if level == 0 {
                exhausted = true;
                break;
            }
            level -= 1;
            let advanced = next_composition(&mut comps[level]);
            if !advanced {
                comps[level] = first_composition(dims[level], res);
            }
            let block = composition_to_sphere(&comps[level], res, spec.exponents()[level]);
            write_block_into_tuple(spec, &mut tuple, level, &block);
            blocks[level] = block;
            if advanced {
                break;
            }
        }
        if exhausted {
            break;
        }
    }

    // Local coordinate ascent from the best grid point sharpens the lower
    // bound; the step shrinks whenever a full sweep brings no improvement.
    let mut current = best_blocks;
    for (i, block) in current.iter().enumerate() {
        write_block_into_tuple(spec, &mut tuple, i, block);
    }
    let mut value = best_value;
    let mut step = 1.0 / res as f64;
    for _ in 0..ASCENT_STEPS {
        let mut improved = false;
        let block_lens: Vec<usize> = current.iter().map(Vec::len).collect();
        for (i, &len_i) in block_lens.iter().enumerate() {
            for j in 0..len_i {
                for dir in [step, -step] {
                    let mut candidate = current[i].clone();
                    candidate[j] = (candidate[j] + dir).max(0.0);
                    let norm = naive_lp_norm(&candidate, spec.exponents()[i]);
                    if norm == 0.0 {
                        continue;
                    }
                    for v in candidate.iter_mut() {
                        *v /= norm;
                    }
                    write_block_into_tuple(spec, &mut tuple, i, &candidate);
                    let cand_value = rayleigh(spec, &tuple, &{
                        let mut b = current.clone();
                        b[i] = candidate.clone();
                        b
                    });
                    if cand_value > value {
                        value = cand_value;
                        current[i] = candidate;
                        improved = true;
                    } else {
                        write_block_into_tuple(spec, &mut tuple, i, &current[i]);
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(value)
}

/// Textbook power iteration `x <- Mx / ||Mx||_2` for a nonnegative square
/// matrix; returns the spectral-radius estimate `||Mx||_2` at the final
/// iterate together with that iterate.
pub fn classical_power_oracle(
    m: &[Vec<f64>],
    iters: usize,
) -> Result<(f64, Vec<f64>), OracleError> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(OracleError::BadMatrix);
    }
    if m.iter()
        .any(|row| row.iter().any(|&v| !v.is_finite() || v < 0.0))
    {
        return Err(OracleError::BadMatrix);
    }
    if m.iter().all(|row| row.iter().all(|&v| v == 0.0)) {
        return Err(OracleError::AllZeroMatrix);
    }
    let matvec = |x: &[f64]| -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let norm2 = |x: &[f64]| -> f64 { x.iter().map(|v| v * v).sum::<f64>().sqrt() };

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut rho = 0.0;
    for _ in 0..iters {
        let y = matvec(&x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Err(OracleError::AllZeroMatrix);
        }
        rho = ny;
        x = y.iter().map(|v| v / ny).collect();
    }
    Ok((rho, x))
}
