//! Command-line front-end: tensor file ingestion, problem specification,
//! solve orchestration and report emission.
//!
//! Exit codes: `0` converged solve, `1` input error, `2` valid but
//! unconverged (the report is still emitted), `3` expansive-regime refusal.

pub mod formats;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use mhpf::cone::{
    classify_regime, find_weight_vector, spectral_radius_nonneg, REGIME_CLASSIFICATION_TOL,
};
use mhpf::irreducibility::{diagnostics, DEFAULT_ENUMERATION_CAP};
use mhpf::map::{homogeneity_matrix, ProblemSpec};
use mhpf::solver::{solve, SolveError, SolveOptions};

use formats::{AnalyzeFile, DiagnosticsInfo, ProblemInfo, ReportFile, WeightsInfo};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_UNCONVERGED: i32 = 2;
pub const EXIT_EXPANSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "mhpf",
    version,
    about = "Maximal nonnegative eigenpairs of tensor spectral problems \
             (l^p eigenvectors and l^{p_1,...,p_d} singular vectors)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for the maximal nonnegative eigenpair; emits a JSON report.
    Solve(SolveArgs),
    /// Structural diagnostics only: regime, weights, irreducibility.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Tensor file: 'tensor <m> <n_1> ... <n_m>' header, then one line per
    /// nonzero with m one-based indices and a value.
    #[arg(long)]
    pub tensor: PathBuf,
    /// Block sizes nu_1,...,nu_d (comma separated, summing to m).
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<usize>,
    /// Exponents p_1,...,p_d (comma separated, each > 1).
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// Stop when the Collatz-Wielandt bracket is narrower than this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    pub max_iters: usize,
    /// Solve through the delta-shift ladder (nonexpansive problems).
    #[arg(long = "delta-ladder", conflicts_with = "method")]
    pub delta_ladder: bool,
    /// Emit structural diagnostics only; no solve.
    #[arg(long = "diagnostics-only")]
    pub diagnostics_only: bool,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Force a strategy: contractive | primitive | decoupled | delta-ladder.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub tensor: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
}

fn load_spec(tensor_path: &Path, nu: &[usize], p: &[f64]) -> Result<ProblemSpec, String> {
    // Validate the flags before touching the file so messages stay crisp.
    if let Some(bad) = p.iter().find(|&&pi| !pi.is_finite() || pi <= 1.0) {
        return Err(format!("exponent must exceed 1 (got {bad})"));
    }
    let text = std::fs::read_to_string(tensor_path)
        .map_err(|e| format!("cannot read tensor file '{}': {e}", tensor_path.display()))?;
    let tensor = formats::parse_tensor(&text).map_err(|e| e.to_string())?;
    let nu_sum: usize = nu.iter().sum();
    if nu.len() != p.len() {
        return Err(format!(
            "arity mismatch: --nu describes {} blocks but --p describes {}",
            nu.len(),
            p.len()
        ));
    }
    if nu_sum != tensor.order() {
        return Err(format!(
            "arity mismatch: --nu sums to {nu_sum} but the tensor has order {}",
            tensor.order()
        ));
    }
    ProblemSpec::new(Arc::new(tensor), nu.to_vec(), p.to_vec()).map_err(|e| e.to_string())
}

fn analysis_for(spec: &ProblemSpec) -> AnalyzeFile {
    let a = homogeneity_matrix(spec);
    let sr = spectral_radius_nonneg(&a, 1e-12);
    let regime = classify_regime(sr.rho);
    let mut warnings = Vec::new();
    let weights = match find_weight_vector(&a, 1e-12) {
        Ok(w) => Some(WeightsInfo { b: w.b, r: w.r }),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let diag = diagnostics(spec, DEFAULT_ENUMERATION_CAP);
    AnalyzeFile {
        problem: ProblemInfo::from_spec(spec),
        rho_a: sr.rho,
        regime: regime.as_str().to_string(),
        regime_tolerance: REGIME_CLASSIFICATION_TOL,
        weights,
        diagnostics: DiagnosticsInfo::from_report(&diag),
        warnings,
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write '{}': {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Analyze(args) => run_analyze(args),
    }
}

fn run_solve(args: SolveArgs) -> i32 {
    let spec = match load_spec(&args.tensor, &args.nu, &args.p) {
        Ok(spec) => spec,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT_ERROR;
        }
    };
    if args.diagnostics_only {
        let analysis = analysis_for(&spec);
        return match write_output(&formats::emit_json(&analysis), args.out.as_deref()) {
            Ok(()) => EXIT_OK,
            Err(msg) => {
                eprintln!("error: {msg}");
                EXIT_INPUT_ERROR
            }
        };
    }

    let opts = SolveOptions {
        tol_cw_gap: args.tol,
        max_iters: args.max_iters,
        method: if args.delta_ladder {
            Some("delta-ladder".to_string())
        } else {
            args.method.clone()
        },
        ..SolveOptions::default()
    };

    match solve(&spec, &opts) {
        Ok(report) => {
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            let file = ReportFile::from_solve(&spec, &report);
            if let Err(msg) = write_output(&formats::emit_json(&file), args.out.as_deref()) {
                eprintln!("error: {msg}");
                return EXIT_INPUT_ERROR;
            }
            if report.converged {
                EXIT_OK
            } else {
                eprintln!(
                    "warning: not converged after {} iterations (final bracket width {:.3e})",
                    report.iters,
                    report.final_gap()
                );
                EXIT_UNCONVERGED
            }
        }
        Err(SolveError::ExpansiveRegime { rho }) => {
            eprintln!(
                "error: expansive regime: rho(A) = {rho} exceeds one and no convergence \
                 guarantee applies; choose larger exponents"
            );
            EXIT_EXPANSIVE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

fn run_analyze(args: AnalyzeArgs) -> i32 {
    let spec = match load_spec(&args.tensor, &args.nu, &args.p) {
        Ok(spec) => spec,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT_ERROR;
        }
    };
    let analysis = analysis_for(&spec);
    print!("{}", formats::emit_json(&analysis));
    EXIT_OK
}
