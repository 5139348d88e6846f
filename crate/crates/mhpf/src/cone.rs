//! Homogeneity-matrix analytics.
//!
//! The solver's behaviour is decided entirely by small nonnegative matrices:
//! the spectral radius `rho(A)` classifies the regime, a weight vector `b`
//! with `A^T b <= r b` turns the weighted Hilbert metric into a contraction
//! witness with Lipschitz constant `r`, and pattern irreducibility /
//! primitivity decide which Perron-Frobenius conclusions apply.
//!
//! `rho(A)` is estimated by power iteration on `I + A^T` (the shift makes
//! imprimitive patterns converge) with the linear Collatz-Wielandt sandwich
//!
//! ```text
//! min_i (A^T b)_i / b_i  <=  rho(A)  <=  max_i (A^T b)_i / b_i
//! ```
//!
//! as the stopping rule, which avoids a general eigensolver dependency. For
//! reducible patterns a tiny uniform perturbation is added inside the
//! estimator only, and the reported tolerance is widened accordingly.

use thiserror::Error;

use crate::bitmat::{pattern_irreducible, pattern_primitive, BitMatrix};
use crate::map::HomogeneityMatrix;

/// Tolerance on `|rho(A) - 1|` under which a problem is classified as
/// nonexpansive. `rho(A) = 1` occurs exactly for rational exponent choices
/// (for instance `p_i = m`), so the boundary needs an explicit band.
pub const REGIME_CLASSIFICATION_TOL: f64 = 1e-9;

/// Uniform perturbation applied inside the radius estimator when the
/// pattern is reducible.
pub const REDUCIBLE_PERTURBATION: f64 = 1e-14;

const MAX_RADIUS_ITERS: usize = 200_000;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("no weight vector with contraction factor below one exists: rho(A) = {rho} and A is reducible")]
    NoWeightVector { rho: f64 },
    #[error("bisection on the uniform shift failed to reach rho < 1 within {steps} steps")]
    BisectionFailed { steps: usize },
    #[error(
        "cannot decouple block {index}: diagonal entry A[{index}][{index}] = {value} is nonzero"
    )]
    NonzeroDiagonal { index: usize, value: f64 },
}

/// Solver regime, decided by the spectral radius of the homogeneity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    /// `rho(A) < 1`: strict contraction, certified linear convergence.
    Contractive,
    /// `rho(A) = 1` within [`REGIME_CLASSIFICATION_TOL`]: nonexpansive.
    Nonexpansive,
    /// `rho(A) > 1`: no convergence guarantees; the solver refuses.
    Expansive,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::Contractive => "contractive",
            RegimeTag::Nonexpansive => "nonexpansive",
            RegimeTag::Expansive => "expansive",
        }
    }
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_regime(rho: f64) -> RegimeTag {
    if (rho - 1.0).abs() <= REGIME_CLASSIFICATION_TOL {
        RegimeTag::Nonexpansive
    } else if rho < 1.0 {
        RegimeTag::Contractive
    } else {
        RegimeTag::Expansive
    }
}

/// A positive weight vector `b` (normalized to sum one) together with the
/// smallest factor `r` for which `A^T b <= r b` holds componentwise. The
/// inequality is exact by construction: `r` is the largest ratio itself.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub b: Vec<f64>,
    pub r: f64,
}

/// Outcome of the spectral-radius estimator.
#[derive(Debug, Clone)]
pub struct SpectralRadius {
    /// Midpoint of the final Collatz-Wielandt bracket.
    pub rho: f64,
    /// Final bracket ends `min_i ratio_i` and `max_i ratio_i` at the
    /// returned iterate.
    pub lower: f64,
    pub upper: f64,
    /// The positive iterate at which the bracket was evaluated.
    pub iterate: Vec<f64>,
    /// Final bracket width `upper - lower`.
    pub cw_gap: f64,
    /// Claimed accuracy: half the bracket plus the perturbation allowance.
    pub tolerance: f64,
    /// Normalized left Perron vector, present when the pattern of `A` is
    /// irreducible (then `A^T v = rho v` holds up to the bracket width).
    pub left_vector: Option<Vec<f64>>,
}

pub(crate) fn pattern_of(a: &HomogeneityMatrix) -> BitMatrix {
    let n = a.dim();
    let mut m = BitMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j) > 0.0 {
                m.set(i, j);
            }
        }
    }
    m
}

/// Pattern irreducibility: `(I + pattern(M))^{n-1}` entrywise positive over
/// the boolean semiring.
pub fn is_irreducible_matrix(m: &HomogeneityMatrix) -> bool {
    pattern_irreducible(&pattern_of(m))
}

/// Pattern primitivity: some boolean power `M^k`, `k <= n^2 - 2n + 2`, is
/// entrywise positive.
pub fn is_primitive_matrix(m: &HomogeneityMatrix) -> bool {
    pattern_primitive(&pattern_of(m))
}

/// Estimate `rho(A)` for a nonnegative matrix by power iteration on
/// `I + A^T`, stopping when the Collatz-Wielandt bracket is narrower than
/// `tol`. The bracket at the returned iterate always contains `rho(A)`.
pub fn spectral_radius_nonneg(a: &HomogeneityMatrix, tol: f64) -> SpectralRadius {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = a.dim();
    let irreducible = is_irreducible_matrix(a);
    let eps = if irreducible {
        0.0
    } else {
        REDUCIBLE_PERTURBATION
    };

    let mut b = vec![1.0 / n as f64; n];
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    for _ in 0..MAX_RADIUS_ITERS {
        let mut w = a.apply_transpose(&b);
        if eps > 0.0 {
            let mass: f64 = b.iter().sum();
            for wi in w.iter_mut() {
                *wi += eps * mass;
            }
        }
        lo = f64::INFINITY;
        hi = f64::NEG_INFINITY;
        for (wi, bi) in w.iter().zip(&b) {
            let ratio = wi / bi;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if hi - lo <= tol {
            break;
        }
        let mut next: Vec<f64> = b.iter().zip(&w).map(|(bi, wi)| bi + wi).collect();
        let mass: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= mass;
        }
        b = next;
    }

    let gap = hi - lo;
    let rho = 0.5 * (lo + hi);
    let left_vector = if irreducible {
        let mass: f64 = b.iter().sum();
        Some(b.iter().map(|v| v / mass).collect())
    } else {
        None
    };
    SpectralRadius {
        rho,
        lower: lo,
        upper: hi,
        iterate: b,
        cw_gap: gap,
        tolerance: 0.5 * gap + n as f64 * eps,
        left_vector,
    }
}

/// The Lipschitz constant of the map in the `b`-weighted Hilbert and
/// Thompson metrics: `C = max_i (A^T b)_i / b_i`.
pub fn lipschitz_constant(a: &HomogeneityMatrix, b: &[f64]) -> f64 {
    assert_eq!(b.len(), a.dim(), "weight vector dimension mismatch");
    assert!(b.iter().all(|&v| v > 0.0), "weights must be positive");
    a.apply_transpose(b)
        .iter()
        .zip(b)
        .map(|(w, bi)| w / bi)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Find a positive weight vector with `A^T b <= r b`.
///
/// For irreducible `A` the normalized left Perron vector is used and
/// `r ~ rho(A)`. Otherwise, when `rho(A) < 1 - tol`, bisection on
/// `A(t) = A + t * ones * ones^T` finds `t0` with `rho(A(t0)) < 1` and takes
/// its (positive) left Perron vector; the componentwise inequality then
/// holds strictly. In both cases `r` is set to the exact largest ratio, so
/// the returned pair satisfies its contract in exact arithmetic.
pub fn find_weight_vector(a: &HomogeneityMatrix, tol: f64) -> Result<WeightVector, ConeError> {
    let inner_tol = tol.clamp(1e-15, 1e-12);
    if is_irreducible_matrix(a) {
        let sr = spectral_radius_nonneg(a, inner_tol);
        let b = sr
            .left_vector
            .expect("irreducible matrices have a left Perron vector");
        let r = lipschitz_constant(a, &b);
        return Ok(WeightVector { b, r });
    }
    let rho = spectral_radius_nonneg(a, inner_tol).rho;
    if rho >= 1.0 - tol {
        return Err(ConeError::NoWeightVector { rho });
    }
    let mut t = 1.0;
    for _ in 0..BISECTION_STEPS {
        let shifted = a.shifted_uniform(t);
        let sr = spectral_radius_nonneg(&shifted, inner_tol);
        if sr.rho < 1.0 {
            let b = sr
                .left_vector
                .expect("uniformly shifted matrices are positive, hence irreducible");
            let r = lipschitz_constant(a, &b);
            return Ok(WeightVector { b, r });
        }
        t *= 0.5;
    }
    Err(ConeError::BisectionFailed {
        steps: BISECTION_STEPS,
    })
}

/// Eliminate block `i` (requires `A[i][i] = 0`): the composed map obtained by
/// substituting block `i` has homogeneity `A~[k][l] = A[k][l] + A[k][i] A[i][l]`
/// over the remaining blocks. The elimination preserves whether `rho <= 1`
/// and whether `rho < 1`.
pub fn decouple_homogeneity(
    a: &HomogeneityMatrix,
    i: usize,
) -> Result<HomogeneityMatrix, ConeError> {
    assert!(i < a.dim(), "block index out of range");
    if a.get(i, i) != 0.0 {
        return Err(ConeError::NonzeroDiagonal {
            index: i,
            value: a.get(i, i),
        });
    }
    let d = a.dim();
    let keep: Vec<usize> = (0..d).filter(|&k| k != i).collect();
    let mut data = Vec::with_capacity(keep.len() * keep.len());
    for &k in &keep {
        for &l in &keep {
            data.push(a.get(k, l) + a.get(k, i) * a.get(i, l));
        }
    }
    Ok(HomogeneityMatrix::new(keep.len(), data))
}
