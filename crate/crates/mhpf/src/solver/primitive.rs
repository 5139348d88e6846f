//! Power iteration in the nonexpansive regime for problems whose structure
//! graph is primitive: the iteration converges to the unique positive
//! eigenvector, but no convergence rate is certified, only the monotone
//! Collatz-Wielandt bracket.

use crate::cone::RegimeTag;
use crate::solver::maps::FullMap;
use crate::solver::{
    assemble_report, resolve_start, run_power_iteration, IterationSettings, ProblemContext,
    SolveError, SolveOptions, SolveReport, SolveStrategy,
};

pub(crate) struct PrimitiveStrategy;

impl SolveStrategy for PrimitiveStrategy {
    fn name(&self) -> &'static str {
        "primitive"
    }

    fn check(&self, ctx: &ProblemContext<'_>) -> Result<(), SolveError> {
        if ctx.regime == RegimeTag::Expansive {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: format!("rho(A) = {} exceeds one", ctx.rho),
            });
        }
        if !ctx.diagnostics.weakly_primitive {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: "structure graph at the all-ones vector is not primitive".to_string(),
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
        let iters = run.iters;
        let converged = run.converged;
        let eigenvector = run.x.clone();
        Ok(assemble_report(
            ctx,
            self.name(),
            run,
            eigenvector,
            eigenvalue,
            None,
            None,
            Vec::new(),
            iters,
            converged,
        ))
    }
}
