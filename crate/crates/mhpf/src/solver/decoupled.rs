//! The two-block matrix case (`m = d = 2`). The structure graph has the
//! pattern of `[[0, M], [M^T, 0]]`, which is bipartite and never primitive,
//! so the plain iteration cannot converge. Instead the composed map
//! `C(x) = psi_{p'}(M psi_{q'}(M^T x))` is iterated on the first block
//! (its Jacobian is primitive exactly when the pattern of `M M^T` is) and
//! the second block is recovered by one application of the second-block map.

use crate::bitmat::{pattern_primitive, BitMatrix};
use crate::cone::RegimeTag;
use crate::solver::maps::{composed_start, expand_composed, ComposedMap};
use crate::solver::{
    assemble_report, resolve_start, run_power_iteration, IterationSettings, ProblemContext,
    SolveError, SolveOptions, SolveReport, SolveStrategy,
};

pub(crate) struct DecoupledStrategy;

/// Boolean pattern of `M M^T` for the tensor seen as a matrix.
fn composed_pattern(ctx: &ProblemContext<'_>) -> BitMatrix {
    let dims = ctx.spec.block_dims();
    let (n1, n2) = (dims[0], dims[1]);
    let mut rows = vec![vec![false; n2]; n1];
    ctx.spec.tensor().for_each_entry(|index, _| {
        rows[index[0]][index[1]] = true;
    });
    let mut pattern = BitMatrix::zeros(n1);
    for l in 0..n1 {
        for c in 0..n1 {
            if (0..n2).any(|k| rows[l][k] && rows[c][k]) {
                pattern.set(l, c);
            }
        }
    }
    pattern
}

impl SolveStrategy for DecoupledStrategy {
    fn name(&self) -> &'static str {
        "decoupled"
    }

    fn check(&self, ctx: &ProblemContext<'_>) -> Result<(), SolveError> {
        if !ctx.is_two_block_matrix() {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: "requires a two-block matrix problem (m = d = 2)".to_string(),
            });
        }
        if ctx.regime == RegimeTag::Expansive {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: format!("rho(A) = {} exceeds one", ctx.rho),
            });
        }
        if !pattern_primitive(&composed_pattern(ctx)) {
            return Err(SolveError::MethodNotApplicable {
                method: self.name(),
                reason: "pattern of M M^T is not primitive; use the delta ladder".to_string(),
            });
        }
        Ok(())
    }

    fn run(
        &self,
        ctx: &ProblemContext<'_>,
        opts: &SolveOptions,
    ) -> Result<SolveReport, SolveError> {
        let composed = ComposedMap::new(ctx.spec);
        let start = composed_start(&resolve_start(opts, ctx.spec)?);
        let settings = IterationSettings {
            tol: opts.tol_cw_gap,
            max_iters: opts.max_iters,
            record_iterates: opts.record_iterates,
        };
        let run = run_power_iteration(&composed, &start, &settings)?;
        let (lo, hi) = run.final_bracket();
        let eigenvalue = 0.5 * (lo + hi);
        let eigenvector = expand_composed(&composed, ctx.spec, &run.x)?;
        let iters = run.iters;
        let converged = run.converged;
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
