//! The delta-shift ladder for nonexpansive problems with no primitive
//! structure to iterate on.
//!
//! For a strictly decreasing schedule `delta_1 > delta_2 > ... > 0`, each
//! rung solves the uniformly shifted problem `R(x) + delta_l * 1` (on the
//! product sphere, where the general shift formula collapses to a constant
//! shift) to its positive fixed point `x^(l)`, warm-starting from the
//! previous rung, and records
//!
//! ```text
//! r_l = prod_i ( (R_i(x^(l)) + delta_l)_1 / x^(l)_{i,1} )^{b_i (gamma - 1)}
//! ```
//!
//! The rung values decrease strictly and converge to the spectral radius
//! from above. The shifted maps send every nonzero nonnegative vector into
//! the open cone, so each rung's iteration converges regardless of the
//! original pattern. In the two-block matrix case the ladder runs on the
//! composed map (the argument needs a primitive shifted Jacobian, which the
//! bipartite full pattern cannot provide) and rung values are mapped back to
//! eigenvalue scale through the composed-map exponent.

use crate::cone::RegimeTag;
use crate::map::BlockVector;
use crate::solver::maps::{
    composed_start, expand_composed, ComposedMap, FullMap, IterableMap, ShiftedMap,
};
use crate::solver::{
    assemble_report, resolve_start, run_power_iteration, IterationRun, IterationSettings,
    LadderRung, ProblemContext, SolveError, SolveOptions, SolveReport, SolveStrategy,
};

pub(crate) struct DeltaLadderStrategy;

fn validate_schedule(schedule: &[f64]) -> Result<(), SolveError> {
    if schedule.is_empty()
        || schedule.iter().any(|&d| !d.is_finite() || d <= 0.0)
        || schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(SolveError::BadDeltaSchedule);
    }
    Ok(())
}

/// The rung value at a shifted-map fixed point, read off coordinate ratios.
fn rung_value(map: &ShiftedMap<'_>, x: &BlockVector) -> Result<f64, SolveError> {
    let rx = map.eval(x)?;
    let b = map.weights();
    let mut log_value = 0.0;
    for ((rb, xb), &bi) in rx.blocks().iter().zip(x.blocks()).zip(b) {
        log_value += bi * (rb[0] / xb[0]).ln();
    }
    Ok((map.lambda_exponent() * log_value).exp())
}

impl SolveStrategy for DeltaLadderStrategy {
    fn name(&self) -> &'static str {
        "delta-ladder"
    }

    fn check(&self, ctx: &ProblemContext<'_>) -> Result<(), SolveError> {
        if ctx.regime != RegimeTag::Nonexpansive {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: format!(
                    "the ladder approximates from the nonexpansive regime; problem is {} (rho = {})",
                    ctx.regime, ctx.rho
                ),
            });
        }
        Ok(())
    }

    fn run(
        &self,
        ctx: &ProblemContext<'_>,
        opts: &SolveOptions,
    ) -> Result<SolveReport, SolveError> {
        validate_schedule(&opts.delta_schedule)?;
        let full;
        let composed;
        let inner: &dyn IterableMap = if ctx.is_two_block_matrix() {
            composed = Some(ComposedMap::new(ctx.spec));
            composed.as_ref().unwrap()
        } else {
            composed = None;
            full = FullMap::new(ctx.spec, ctx.weights.b.clone());
            &full
        };

        let settings = IterationSettings {
            tol: opts.tol_cw_gap,
            max_iters: opts.max_iters,
            record_iterates: opts.record_iterates,
        };
        let start = resolve_start(opts, ctx.spec)?;
        let mut x = match &composed {
            Some(_) => composed_start(&start),
            None => start,
        };

        let mut rungs: Vec<LadderRung> = Vec::with_capacity(opts.delta_schedule.len());
        let mut warnings = Vec::new();
        let mut total_iters = 0usize;
        let mut last_run: Option<IterationRun> = None;
        let mut aborted = false;
        for &delta in &opts.delta_schedule {
            let shifted = ShiftedMap { inner, delta };
            let run = run_power_iteration(&shifted, &x, &settings)?;
            total_iters += run.iters;
            let value = rung_value(&shifted, &run.x)?;
            rungs.push(LadderRung {
                delta,
                value,
                iters: run.iters,
                converged: run.converged,
            });
            warnings.extend(run.warnings.clone());
            x = run.x.clone();
            let rung_converged = run.converged;
            last_run = Some(run);
            if !rung_converged {
                warnings.push(format!(
                    "ladder rung at delta = {delta:e} exhausted {} iterations; ladder aborted",
                    opts.max_iters
                ));
                aborted = true;
                break;
            }
        }

        for pair in rungs.windows(2) {
            if pair[1].value >= pair[0].value + 1e-12 * pair[0].value.abs().max(1.0) {
                warnings.push(format!(
                    "ladder monotonicity violated between delta = {:e} and {:e}",
                    pair[0].delta, pair[1].delta
                ));
            }
        }

        let run = last_run.expect("schedule validated nonempty");
        let eigenvalue = rungs.last().expect("at least one rung").value;
        let eigenvector = match &composed {
            Some(c) => expand_composed(c, ctx.spec, &run.x)?,
            None => run.x.clone(),
        };
        let converged = !aborted;
        Ok(assemble_report(
            ctx,
            self.name(),
            run,
            eigenvector,
            eigenvalue,
            None,
            Some(rungs),
            warnings,
            total_iters,
            converged,
        ))
    }
}
