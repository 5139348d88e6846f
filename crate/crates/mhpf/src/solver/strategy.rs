//! The strategy registry: each iteration algorithm lives behind a common
//! trait, is registered under a stable name, and is picked at runtime either
//! by regime-driven selection or explicitly via [`SolveOptions::method`]
//! (the CLI exposes the same names through `--method`).

use crate::cone::RegimeTag;
use crate::solver::{
    contractive::ContractiveStrategy, decoupled::DecoupledStrategy, ladder::DeltaLadderStrategy,
    primitive::PrimitiveStrategy, ProblemContext, SolveError, SolveOptions, SolveReport,
};

/// One interchangeable solve algorithm.
pub trait SolveStrategy: Send + Sync {
    /// Stable registry name.
    fn name(&self) -> &'static str;
    /// `Ok` when the strategy's convergence guarantee applies to the
    /// problem, otherwise the refusal reason.
    fn check(&self, ctx: &ProblemContext<'_>) -> Result<(), SolveError>;
    fn run(&self, ctx: &ProblemContext<'_>, opts: &SolveOptions)
        -> Result<SolveReport, SolveError>;
}

pub struct StrategyRegistry {
    entries: Vec<Box<dyn SolveStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// The built-in algorithms, in automatic-selection order.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(ContractiveStrategy));
        registry.register(Box::new(PrimitiveStrategy));
        registry.register(Box::new(DecoupledStrategy));
        registry.register(Box::new(DeltaLadderStrategy));
        registry
    }

    /// Register a strategy; an existing entry with the same name is
    /// replaced.
    pub fn register(&mut self, strategy: Box<dyn SolveStrategy>) {
        if let Some(slot) = self
            .entries
            .iter_mut()
            .find(|s| s.name() == strategy.name())
        {
            *slot = strategy;
        } else {
            self.entries.push(strategy);
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn SolveStrategy> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    /// Regime-driven selection: contractive problems take the certified
    /// contraction iteration; nonexpansive ones take the first applicable of
    /// plain primitive iteration, the decoupled matrix map, and the delta
    /// ladder.
    pub fn select(&self, ctx: &ProblemContext<'_>) -> Result<&dyn SolveStrategy, SolveError> {
        let order: &[&str] = match ctx.regime {
            RegimeTag::Contractive => &["contractive"],
            RegimeTag::Nonexpansive => &["primitive", "decoupled", "delta-ladder"],
            RegimeTag::Expansive => {
                return Err(SolveError::ExpansiveRegime { rho: ctx.rho });
            }
        };
        for name in order {
            if let Some(strategy) = self.get(name) {
                if strategy.check(ctx).is_ok() {
                    return Ok(strategy);
                }
            }
        }
        Err(SolveError::NoApplicableStrategy { regime: ctx.regime })
    }
}
