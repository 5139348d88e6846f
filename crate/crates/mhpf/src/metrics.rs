//! Weighted Hilbert and Thompson metrics on the open cone product.
//!
//! For positive weights `b` and strictly positive block vectors `x`, `y`:
//!
//! ```text
//! hilbert_b(x, y)  = sum_i b_i ln( max_j x_ij/y_ij * max_l y_il/x_il )
//! thompson_b(x, y) = sum_i b_i max_j |ln x_ij - ln y_ij|
//! ```
//!
//! The Hilbert value is blind to per-block positive scaling and is a metric
//! on the product sphere; the Thompson value is a metric on the open cone.
//! Both are computed in the log domain, since conjugate exponents can push
//! coordinate magnitudes near the limits of double precision. Any boundary
//! contact (a zero or negative coordinate) yields the `+inf` sentinel rather
//! than an error: the solver monitors distances where infinity is meaningful.

use crate::map::BlockVector;

fn check_shapes(b: &[f64], x: &BlockVector, y: &BlockVector) {
    assert_eq!(x.num_blocks(), y.num_blocks(), "block count mismatch");
    assert_eq!(b.len(), x.num_blocks(), "weight count mismatch");
    assert!(b.iter().all(|&w| w > 0.0), "weights must be positive");
    for (i, (xb, yb)) in x.blocks().iter().zip(y.blocks()).enumerate() {
        assert_eq!(xb.len(), yb.len(), "block {i} length mismatch");
    }
}

/// The `b`-weighted Hilbert projective metric. Zero exactly when every block
/// of `x` is a positive scalar multiple of the matching block of `y`.
pub fn hilbert_metric(b: &[f64], x: &BlockVector, y: &BlockVector) -> f64 {
    check_shapes(b, x, y);
    let mut total = 0.0;
    for ((xb, yb), &bi) in x.blocks().iter().zip(y.blocks()).zip(b) {
        let mut max_log_ratio = f64::NEG_INFINITY;
        let mut max_log_inverse = f64::NEG_INFINITY;
        for (&xj, &yj) in xb.iter().zip(yb) {
            if xj <= 0.0 || yj <= 0.0 {
                return f64::INFINITY;
            }
            let diff = xj.ln() - yj.ln();
            max_log_ratio = max_log_ratio.max(diff);
            max_log_inverse = max_log_inverse.max(-diff);
        }
        total += bi * (max_log_ratio + max_log_inverse);
    }
    total
}

/// The `b`-weighted Thompson metric: per-block sup-norm of log differences.
pub fn thompson_metric(b: &[f64], x: &BlockVector, y: &BlockVector) -> f64 {
    check_shapes(b, x, y);
    let mut total = 0.0;
    for ((xb, yb), &bi) in x.blocks().iter().zip(y.blocks()).zip(b) {
        let mut sup = 0.0f64;
        for (&xj, &yj) in xb.iter().zip(yb) {
            if xj <= 0.0 || yj <= 0.0 {
                return f64::INFINITY;
            }
            sup = sup.max((xj.ln() - yj.ln()).abs());
        }
        total += bi * sup;
    }
    total
}
