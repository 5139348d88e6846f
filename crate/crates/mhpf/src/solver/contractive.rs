//! Power iteration in the contractive regime (`rho(A) < 1`), where the
//! normalized map is a strict contraction in the `b`-weighted Hilbert metric
//! and a Banach rate certificate comes for free.

use crate::cone::RegimeTag;
use crate::solver::maps::FullMap;
use crate::solver::{
    assemble_report, resolve_start, run_power_iteration, IterationSettings, ProblemContext,
    RateCertificate, SolveError, SolveOptions, SolveReport, SolveStrategy,
};

pub(crate) struct ContractiveStrategy;

impl SolveStrategy for ContractiveStrategy {
    fn name(&self) -> &'static str {
        "contractive"
    }

    fn check(&self, ctx: &ProblemContext<'_>) -> Result<(), SolveError> {
        if ctx.regime != RegimeTag::Contractive {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: format!(
                    "requires the contractive regime, problem is {} (rho = {})",
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
        let map = FullMap::new(ctx.spec, ctx.weights.b.clone());
        let start = resolve_start(opts, ctx.spec)?;
        let settings = IterationSettings {
            tol: opts.tol_cw_gap,
            max_iters: opts.max_iters,
            record_iterates: opts.record_iterates,
        };
        let run = run_power_iteration(&map, &start, &settings)?;
        let (lo, hi) = run.final_bracket();
        let eigenvalue = 0.5 * (lo + hi);
        let certificate = (ctx.weights.r < 1.0).then(|| RateCertificate {
            rate: ctx.weights.r,
            first_step_distance: run.step_distances.first().copied().unwrap_or(0.0),
        });
        let iters = run.iters;
        let converged = run.converged;
        let eigenvector = run.x.clone();
        Ok(assemble_report(
            ctx,
            self.name(),
            run,
            eigenvector,
            eigenvalue,
            certificate,
            None,
            Vec::new(),
            iters,
            converged,
        ))
    }
}
