//! The generalized power method with regime-aware certificates.
//!
//! Starting from a positive vector on the product sphere, the iteration
//!
//! ```text
//! x^{k+1}_i = R_i(x^k) / || R_i(x^k) ||_{p_i}
//! ```
//!
//! is driven until the Collatz-Wielandt bracket
//!
//! ```text
//! lower(x) = prod_i ( min_j R_ij(x)/x_ij )^{(gamma-1) b_i}
//! upper(x) = prod_i ( max_j R_ij(x)/x_ij )^{(gamma-1) b_i}
//! ```
//!
//! is narrower than the requested tolerance. The bracket contains the
//! maximal eigenvalue at every iterate, the lower ends are nondecreasing and
//! the upper ends nonincreasing, so the midpoint of a bracket of width
//! `eps` is within `eps / 2` of the answer.
//!
//! Which iteration runs is decided by a [`strategy::StrategyRegistry`] of
//! interchangeable algorithms selected by the regime (or forced by name
//! through [`SolveOptions::method`]):
//!
//! * `"contractive"` - plain power steps, plus a Banach rate certificate
//!   `mu_b(x^k, u) <= r^k / (1 - r) * mu_b(x^1, x^0)`.
//! * `"primitive"` - power steps for nonexpansive problems whose structure
//!   graph is primitive; no rate is certified, only the bracket.
//! * `"decoupled"` - the two-block matrix case iterates the composed map
//!   `x -> psi_{p'}(M psi_{q'}(M^T x))` (the full pattern is bipartite and
//!   never primitive) and recovers the second block afterwards.
//! * `"delta-ladder"` - solves uniformly shifted problems `R + delta_l` for
//!   a decreasing schedule; the rung values decrease strictly to the
//!   spectral radius even when nothing above applies.
//!
//! Expansive problems (`rho(A) > 1`) are refused: no part of the theory
//! backs an answer there.

pub mod strategy;

mod contractive;
mod decoupled;
mod ladder;
mod maps;
mod primitive;

use thiserror::Error;

use crate::cone::{
    classify_regime, find_weight_vector, spectral_radius_nonneg, ConeError, RegimeTag, WeightVector,
};
use crate::irreducibility::{diagnostics, uniqueness_certificate, DiagnosticsReport};
use crate::map::{
    alpha_power, eval_r, homogeneity_matrix, lp_norm, normalize, BlockVector, HomogeneityMatrix,
    MapError, ProblemSpec,
};
use crate::metrics::hilbert_metric;

pub use strategy::{SolveStrategy, StrategyRegistry};

/// Floor applied to iterate coordinates that underflow to zero while the
/// theory guarantees positivity.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Internal tolerance for spectral-radius estimation.
const RADIUS_TOL: f64 = 1e-12;

/// Total coordinate count above which the post-solve uniqueness certificate
/// is skipped (its finite-difference Jacobian costs `2 |I|` map evaluations).
const CERTIFICATE_SIZE_CAP: usize = 128;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("R(1) has a zero coordinate (block {block}, index {index}); the positivity assumptions fail")]
    DegenerateAtOnes { block: usize, index: usize },
    #[error("expansive regime: rho(A) = {rho} exceeds one, no convergence guarantee applies")]
    ExpansiveRegime { rho: f64 },
    #[error("iterate developed an identically zero block {block} at iteration {iteration}")]
    ZeroBlockIterate { block: usize, iteration: usize },
    #[error("unknown solve method '{name}' (available: {available})")]
    UnknownMethod { name: String, available: String },
    #[error("method '{method}' is not applicable: {reason}")]
    MethodNotApplicable {
        method: &'static str,
        reason: String,
    },
    #[error("no applicable strategy for the {regime} regime")]
    NoApplicableStrategy { regime: RegimeTag },
    #[error("start vector must be strictly positive with matching block dimensions")]
    StartNotPositive,
    #[error("vector must be strictly positive")]
    VectorNotPositive,
    #[error("delta schedule must be a nonempty strictly decreasing sequence of positive values")]
    BadDeltaSchedule,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Starting vector for the iteration.
#[derive(Debug, Clone)]
pub enum StartVector {
    /// The normalized all-ones block vector: strictly positive and
    /// deterministic.
    Uniform,
    Given(BlockVector),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop when `upper - lower` falls below this.
    pub tol_cw_gap: f64,
    /// Power-step budget (per ladder rung when the ladder runs).
    pub max_iters: usize,
    pub start: StartVector,
    /// Strictly decreasing shifts for the delta ladder.
    pub delta_schedule: Vec<f64>,
    /// Force a regime classification instead of deriving it from `rho(A)`.
    pub regime_override: Option<RegimeTag>,
    /// Force a strategy by registry name instead of automatic selection.
    pub method: Option<String>,
    /// Cap on `prod_i n_i` for the support-enumeration diagnostics.
    pub enumeration_cap: usize,
    /// Keep every iterate in the report (tests and certificate audits).
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_cw_gap: 1e-10,
            max_iters: 10_000,
            start: StartVector::Uniform,
            delta_schedule: (1..=8).map(|l| 10f64.powi(-l)).collect(),
            regime_override: None,
            method: None,
            enumeration_cap: crate::irreducibility::DEFAULT_ENUMERATION_CAP,
            record_iterates: false,
        }
    }
}

/// Banach contraction certificate: along the trajectory,
/// `mu_b(x^k, u) <= rate^k / (1 - rate) * first_step_distance`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCertificate {
    pub rate: f64,
    pub first_step_distance: f64,
}

impl RateCertificate {
    pub fn bound_at(&self, k: usize) -> f64 {
        self.rate.powi(k as i32) / (1.0 - self.rate) * self.first_step_distance
    }
}

/// One rung of the delta ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub delta: f64,
    /// Eigenvalue-scale value of the shifted problem; strictly decreasing
    /// along the schedule and an upper estimate of the spectral radius.
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Midpoint of the final Collatz-Wielandt bracket (for the ladder: the
    /// final rung value).
    pub eigenvalue: f64,
    /// Final iterate on the product sphere.
    pub eigenvector: BlockVector,
    pub regime: RegimeTag,
    pub rho_a: f64,
    pub weights: WeightVector,
    pub gamma: f64,
    /// Power steps performed (summed over rungs for the ladder).
    pub iters: usize,
    /// `(lower, upper)` per evaluated iterate; lower nondecreasing, upper
    /// nonincreasing, and the bracket always contains the eigenvalue.
    pub cw_history: Vec<(f64, f64)>,
    pub converged: bool,
    /// Name of the strategy that produced the report.
    pub method: &'static str,
    pub rate_certificate: Option<RateCertificate>,
    pub ladder: Option<Vec<LadderRung>>,
    pub diagnostics: DiagnosticsReport,
    pub warnings: Vec<String>,
    /// `mu_b(x^{k+1}, x^k)` per step.
    pub step_distances: Vec<f64>,
    /// Present when [`SolveOptions::record_iterates`] was set.
    pub iterates: Option<Vec<BlockVector>>,
}

impl SolveReport {
    pub fn final_gap(&self) -> f64 {
        self.cw_history
            .last()
            .map(|&(lo, hi)| hi - lo)
            .unwrap_or(f64::INFINITY)
    }
}

/// Everything strategies need to know about a problem, computed once.
pub struct ProblemContext<'a> {
    pub spec: &'a ProblemSpec,
    pub homogeneity: HomogeneityMatrix,
    pub rho: f64,
    pub regime: RegimeTag,
    pub weights: WeightVector,
    pub gamma: f64,
    pub diagnostics: DiagnosticsReport,
}

impl<'a> ProblemContext<'a> {
    pub fn prepare(spec: &'a ProblemSpec, opts: &SolveOptions) -> Result<Self, SolveError> {
        let ones = BlockVector::ones(spec.block_dims());
        let r_ones = eval_r(spec, &ones)?;
        for (block, blk) in r_ones.blocks().iter().enumerate() {
            if let Some(index) = blk.iter().position(|&v| v == 0.0) {
                return Err(SolveError::DegenerateAtOnes { block, index });
            }
        }
        let homogeneity = homogeneity_matrix(spec);
        let sr = spectral_radius_nonneg(&homogeneity, RADIUS_TOL);
        let regime = opts
            .regime_override
            .unwrap_or_else(|| classify_regime(sr.rho));
        if regime == RegimeTag::Expansive {
            return Err(SolveError::ExpansiveRegime { rho: sr.rho });
        }
        // Contractive: b with A^T b <= r b, r < 1. Nonexpansive: the equality
        // left Perron vector (the homogeneity matrix of a tensor problem is
        // always irreducible, so it exists).
        let weights = find_weight_vector(&homogeneity, RADIUS_TOL)?;
        let gamma = gamma_exponent(spec, &weights.b);
        let diagnostics = diagnostics(spec, opts.enumeration_cap);
        Ok(Self {
            spec,
            homogeneity,
            rho: sr.rho,
            regime,
            weights,
            gamma,
            diagnostics,
        })
    }

    /// The two-block matrix case (`m = d = 2`), whose structure graph is
    /// bipartite and therefore never primitive.
    pub fn is_two_block_matrix(&self) -> bool {
        self.spec.order() == 2 && self.spec.num_blocks() == 2
    }
}

/// The exponent `gamma = g' / (g' - 1)` with `g' = sum_i b_i p_i'`;
/// `gamma - 1` converts weighted Collatz-Wielandt products to eigenvalue
/// scale.
pub fn gamma_exponent(spec: &ProblemSpec, b: &[f64]) -> f64 {
    assert_eq!(b.len(), spec.num_blocks(), "weight arity mismatch");
    assert!(b.iter().all(|&v| v > 0.0), "weights must be positive");
    let gp: f64 = b
        .iter()
        .zip(spec.conjugates())
        .map(|(bi, pc)| bi * pc)
        .sum();
    gp / (gp - 1.0)
}

/// One normalized power step: `normalize(R(x))`.
pub fn power_step(spec: &ProblemSpec, x: &BlockVector) -> Result<BlockVector, SolveError> {
    if !x.is_positive() {
        return Err(SolveError::VectorNotPositive);
    }
    let rx = eval_r(spec, x)?;
    normalize(&rx, spec.exponents()).map_err(|e| match e {
        MapError::ZeroBlock { block } => SolveError::ZeroBlockIterate {
            block,
            iteration: 1,
        },
        other => SolveError::Map(other),
    })
}

/// Eigenvalue-scale Collatz-Wielandt bounds at a positive sphere vector:
/// `lower <= r(R) <= upper` whenever `rho(A) <= 1` and `A^T b <= b`.
pub fn cw_bounds(spec: &ProblemSpec, b: &[f64], x: &BlockVector) -> Result<(f64, f64), SolveError> {
    if !x.is_positive() {
        return Err(SolveError::VectorNotPositive);
    }
    let rx = eval_r(spec, x)?;
    let lam_exp = gamma_exponent(spec, b) - 1.0;
    Ok(cw_pair(&rx, x, b, lam_exp))
}

/// Weighted ratio products converted to eigenvalue scale, in the log domain.
pub(crate) fn cw_pair(rx: &BlockVector, x: &BlockVector, b: &[f64], lambda_exp: f64) -> (f64, f64) {
    let mut lo_log = 0.0f64;
    let mut hi_log = 0.0f64;
    for ((rb, xb), &bi) in rx.blocks().iter().zip(x.blocks()).zip(b) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&r, &xv) in rb.iter().zip(xb) {
            let ratio = r / xv;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        lo_log += bi * if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
        hi_log += bi * hi.ln();
    }
    ((lambda_exp * lo_log).exp(), (lambda_exp * hi_log).exp())
}

/// The uniformly shifted map `R(x) + delta * (||x_1||_{p_1}, ..., ||x_d||_{p_d})^A . 1`,
/// which keeps the homogeneity matrix of `R` and sends the cone minus zero
/// into its interior. On the product sphere the norm factors are one and the
/// shift reduces to adding `delta` to every coordinate.
pub fn delta_shifted_eval(
    spec: &ProblemSpec,
    delta: f64,
    x: &BlockVector,
) -> Result<BlockVector, SolveError> {
    assert!(delta > 0.0, "shift must be positive");
    let mut r = eval_r(spec, x)?;
    let norms: Vec<f64> = x
        .blocks()
        .iter()
        .zip(spec.exponents())
        .map(|(blk, &p)| lp_norm(blk, p))
        .collect();
    if let Some(block) = norms.iter().position(|&n| n == 0.0) {
        return Err(SolveError::ZeroBlockIterate {
            block,
            iteration: 0,
        });
    }
    let scale = alpha_power(&norms, &homogeneity_matrix(spec));
    for (i, s) in scale.iter().enumerate() {
        for v in r.block_mut(i).iter_mut() {
            *v += delta * s;
        }
    }
    Ok(r)
}

/// Gelfand-style spectral radius estimates for equality weights
/// (`A^T b = b`): the sequence
/// `a_k = ( prod_i ||R_i^k(y)||_{p_i}^{b_i} )^{(gamma-1)/k}` converges to the
/// spectral radius. Iterates are renormalized every step and the norms of
/// the unnormalized powers accumulate in log space, which keeps the huge
/// dynamic range of repeated `psi_{p'}` applications from overflowing.
pub fn gelfand_estimate(
    spec: &ProblemSpec,
    b: &[f64],
    y: &BlockVector,
    k_max: usize,
) -> Result<Vec<f64>, SolveError> {
    if !y.is_positive() {
        return Err(SolveError::VectorNotPositive);
    }
    let a = homogeneity_matrix(spec);
    let lam_exp = gamma_exponent(spec, b) - 1.0;
    let p = spec.exponents();
    let mut log_norms: Vec<f64> = y
        .blocks()
        .iter()
        .zip(p)
        .map(|(blk, &pi)| lp_norm(blk, pi).ln())
        .collect();
    let mut z = normalize(y, p)?;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let rz = eval_r(spec, &z)?;
        let step_norms: Vec<f64> = rz
            .blocks()
            .iter()
            .zip(p)
            .map(|(blk, &pi)| lp_norm(blk, pi))
            .collect();
        if let Some(block) = step_norms.iter().position(|&n| n == 0.0) {
            return Err(SolveError::ZeroBlockIterate {
                block,
                iteration: k,
            });
        }
        let propagated = a.apply(&log_norms);
        log_norms = propagated
            .iter()
            .zip(&step_norms)
            .map(|(c, n)| c + n.ln())
            .collect();
        z = normalize(&rz, p)?;
        let weighted: f64 = b.iter().zip(&log_norms).map(|(bi, l)| bi * l).sum();
        out.push((lam_exp * weighted / k as f64).exp());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Iteration engine shared by all strategies.
// ---------------------------------------------------------------------------

pub(crate) struct IterationSettings {
    pub tol: f64,
    pub max_iters: usize,
    pub record_iterates: bool,
}

pub(crate) struct IterationRun {
    pub x: BlockVector,
    pub cw_history: Vec<(f64, f64)>,
    pub iters: usize,
    pub converged: bool,
    pub step_distances: Vec<f64>,
    pub iterates: Option<Vec<BlockVector>>,
    pub warnings: Vec<String>,
}

impl IterationRun {
    pub fn final_bracket(&self) -> (f64, f64) {
        *self.cw_history.last().expect("at least one bracket")
    }
}

pub(crate) fn run_power_iteration(
    map: &dyn maps::IterableMap,
    start: &BlockVector,
    settings: &IterationSettings,
) -> Result<IterationRun, SolveError> {
    let p = map.norm_exponents();
    let b = map.weights().to_vec();
    let lam_exp = map.lambda_exponent();
    if !start.is_positive() {
        return Err(SolveError::StartNotPositive);
    }
    let mut x = normalize(start, &p)?;
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut distances = Vec::new();
    let mut iterates = settings.record_iterates.then(|| vec![x.clone()]);
    let mut warnings = Vec::new();
    let mut floored = false;
    let mut iters = 0usize;
    let mut converged = false;
    loop {
        let rx = map.eval(&x)?;
        let bracket = cw_pair(&rx, &x, &b, lam_exp);
        if let Some(&(plo, phi)) = history.last() {
            debug_assert!(
                bracket.0 >= plo - 1e-12 * plo.abs().max(1.0)
                    && bracket.1 <= phi + 1e-12 * phi.abs().max(1.0),
                "Collatz-Wielandt bracket must be monotone"
            );
        }
        history.push(bracket);
        if bracket.1 - bracket.0 < settings.tol {
            converged = true;
            break;
        }
        if iters >= settings.max_iters {
            break;
        }
        let mut next = normalize(&rx, &p).map_err(|e| match e {
            MapError::ZeroBlock { block } => SolveError::ZeroBlockIterate {
                block,
                iteration: iters + 1,
            },
            other => SolveError::Map(other),
        })?;
        // Positivity is mathematically guaranteed while R(1) > 0; a zero can
        // only appear through underflow, so floor it and record the event.
        for i in 0..next.num_blocks() {
            for v in next.block_mut(i).iter_mut() {
                if *v == 0.0 {
                    *v = UNDERFLOW_FLOOR;
                    if !floored {
                        warnings.push(format!(
                            "underflow floor {UNDERFLOW_FLOOR:e} applied at iteration {}",
                            iters + 1
                        ));
                        floored = true;
                    }
                }
            }
        }
        distances.push(hilbert_metric(&b, &next, &x));
        if let Some(tr) = iterates.as_mut() {
            tr.push(next.clone());
        }
        x = next;
        iters += 1;
    }
    Ok(IterationRun {
        x,
        cw_history: history,
        iters,
        converged,
        step_distances: distances,
        iterates,
        warnings,
    })
}

pub(crate) fn resolve_start(
    opts: &SolveOptions,
    spec: &ProblemSpec,
) -> Result<BlockVector, SolveError> {
    let raw = match &opts.start {
        StartVector::Uniform => BlockVector::ones(spec.block_dims()),
        StartVector::Given(v) => v.clone(),
    };
    if raw.block_dims() != spec.block_dims() || !raw.is_positive() {
        return Err(SolveError::StartNotPositive);
    }
    Ok(raw)
}

// ---------------------------------------------------------------------------
// Entry points.
// ---------------------------------------------------------------------------

/// Solve with the built-in strategy registry.
pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    solve_with_registry(&StrategyRegistry::builtin(), spec, opts)
}

/// Solve through the delta-shift ladder regardless of what automatic
/// selection would pick; the report carries the per-rung history.
pub fn delta_ladder(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let opts = SolveOptions {
        method: Some("delta-ladder".to_string()),
        ..opts.clone()
    };
    solve(spec, &opts)
}

/// Solve with a caller-supplied registry. The strategy is picked by
/// [`SolveOptions::method`] when set, otherwise by regime-driven selection.
pub fn solve_with_registry(
    registry: &StrategyRegistry,
    spec: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let ctx = ProblemContext::prepare(spec, opts)?;
    let strat = match &opts.method {
        Some(name) => {
            let strat = registry
                .get(name)
                .ok_or_else(|| SolveError::UnknownMethod {
                    name: name.clone(),
                    available: registry.names().join(", "),
                })?;
            strat.check(&ctx)?;
            strat
        }
        None => registry.select(&ctx)?,
    };
    let mut report = strat.run(&ctx, opts)?;
    attach_uniqueness_certificate(&ctx, &mut report);
    Ok(report)
}

/// In the nonexpansive regime a kernel dimension of one for `I - L` at the
/// computed eigenpair certifies uniqueness of the positive eigenvector;
/// attach it when the eigenpair is accurate enough to qualify.
fn attach_uniqueness_certificate(ctx: &ProblemContext<'_>, report: &mut SolveReport) {
    if ctx.regime != RegimeTag::Nonexpansive || !report.converged {
        return;
    }
    let total: usize = ctx.spec.block_dims().iter().sum();
    if total > CERTIFICATE_SIZE_CAP || !report.eigenvector.is_positive() {
        return;
    }
    if let Ok(dim) = uniqueness_certificate(ctx.spec, &report.eigenvector, report.eigenvalue) {
        report.diagnostics.uniqueness_kernel_dim = Some(dim);
    }
}

#[allow(clippy::too_many_arguments)] // internal assembly helper
pub(crate) fn assemble_report(
    ctx: &ProblemContext<'_>,
    method: &'static str,
    run: IterationRun,
    eigenvector: BlockVector,
    eigenvalue: f64,
    rate_certificate: Option<RateCertificate>,
    ladder: Option<Vec<LadderRung>>,
    extra_warnings: Vec<String>,
    total_iters: usize,
    converged: bool,
) -> SolveReport {
    let mut warnings = run.warnings;
    warnings.extend(extra_warnings);
    if ctx.diagnostics.strongly_irreducible.is_none() || ctx.diagnostics.path_condition.is_none() {
        warnings.push(
            "support enumeration exceeded the cap; strong irreducibility and the path \
             condition are indeterminate, weak diagnostics only"
                .to_string(),
        );
    }
    SolveReport {
        eigenvalue,
        eigenvector,
        regime: ctx.regime,
        rho_a: ctx.rho,
        weights: ctx.weights.clone(),
        gamma: ctx.gamma,
        iters: total_iters,
        cw_history: run.cw_history,
        converged,
        method,
        rate_certificate,
        ladder,
        diagnostics: ctx.diagnostics.clone(),
        warnings,
        step_distances: run.step_distances,
        iterates: run.iterates,
    }
}
