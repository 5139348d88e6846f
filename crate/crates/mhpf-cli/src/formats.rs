//! File formats: the tensor text format and the JSON reports.
//!
//! Tensor files are line-oriented: a header `tensor <m> <n_1> ... <n_m>`,
//! then one line per nonzero with `m` one-based indices followed by a
//! nonnegative decimal value. `#` starts a comment, blank lines are skipped.
//!
//! Reports serialize as JSON with every float printed to 17 significant
//! digits (full double precision), so emitted reports round-trip losslessly
//! and two runs on the same inputs produce byte-identical bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mhpf::irreducibility::DiagnosticsReport;
use mhpf::map::ProblemSpec;
use mhpf::solver::SolveReport;
use mhpf::tensor::{NonnegTensor, TensorError};

#[derive(Debug, Error)]
pub enum TensorFileError {
    #[error("tensor file is empty (expected a 'tensor <m> <n_1> ... <n_m>' header)")]
    MissingHeader,
    #[error("line {line}: malformed header: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("line {line}: malformed entry: {reason}")]
    BadEntry { line: usize, reason: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Parse the tensor text format. Indices are one-based in the file and
/// converted to zero-based storage.
pub fn parse_tensor(text: &str) -> Result<NonnegTensor, TensorFileError> {
    let mut dims: Option<Vec<usize>> = None;
    let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match &dims {
            None => {
                if tokens[0] != "tensor" {
                    return Err(TensorFileError::BadHeader {
                        line,
                        reason: format!("expected 'tensor', found '{}'", tokens[0]),
                    });
                }
                if tokens.len() < 2 {
                    return Err(TensorFileError::BadHeader {
                        line,
                        reason: "missing order".into(),
                    });
                }
                let m: usize = tokens[1].parse().map_err(|_| TensorFileError::BadHeader {
                    line,
                    reason: format!("order '{}' is not an integer", tokens[1]),
                })?;
                if tokens.len() != 2 + m {
                    return Err(TensorFileError::BadHeader {
                        line,
                        reason: format!("expected {m} dimensions, found {}", tokens.len() - 2),
                    });
                }
                let mut parsed = Vec::with_capacity(m);
                for tok in &tokens[2..] {
                    let n: usize = tok.parse().map_err(|_| TensorFileError::BadHeader {
                        line,
                        reason: format!("dimension '{tok}' is not an integer"),
                    })?;
                    if n == 0 {
                        return Err(TensorFileError::BadHeader {
                            line,
                            reason: "dimensions must be positive".into(),
                        });
                    }
                    parsed.push(n);
                }
                dims = Some(parsed);
            }
            Some(dims) => {
                let m = dims.len();
                if tokens.len() != m + 1 {
                    return Err(TensorFileError::BadEntry {
                        line,
                        reason: format!(
                            "expected {m} indices and a value, found {} tokens",
                            tokens.len()
                        ),
                    });
                }
                let mut index = Vec::with_capacity(m);
                for (axis, tok) in tokens[..m].iter().enumerate() {
                    let one_based: usize = tok.parse().map_err(|_| TensorFileError::BadEntry {
                        line,
                        reason: format!("index '{tok}' is not an integer"),
                    })?;
                    if one_based == 0 || one_based > dims[axis] {
                        return Err(TensorFileError::BadEntry {
                            line,
                            reason: format!(
                                "index {one_based} out of range 1..={} in mode {}",
                                dims[axis],
                                axis + 1
                            ),
                        });
                    }
                    index.push(one_based - 1);
                }
                let value: f64 = tokens[m].parse().map_err(|_| TensorFileError::BadEntry {
                    line,
                    reason: format!("value '{}' is not a number", tokens[m]),
                })?;
                if !value.is_finite() || value < 0.0 {
                    return Err(TensorFileError::BadEntry {
                        line,
                        reason: format!("value {value} must be finite and nonnegative"),
                    });
                }
                entries.push((index, value));
            }
        }
    }
    let dims = dims.ok_or(TensorFileError::MissingHeader)?;
    Ok(NonnegTensor::from_entries(dims, entries)?)
}

// ---------------------------------------------------------------------------
// JSON data transfer objects.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub m: u64,
    pub dims: Vec<u64>,
    pub nu: Vec<u64>,
    pub p: Vec<f64>,
}

impl ProblemInfo {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        Self {
            m: spec.order() as u64,
            dims: spec.tensor().dims().iter().map(|&n| n as u64).collect(),
            nu: spec.nu().iter().map(|&n| n as u64).collect(),
            p: spec.exponents().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsInfo {
    pub b: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsInfo {
    pub r_at_ones_positive: bool,
    pub weakly_irreducible: bool,
    pub weakly_primitive: bool,
    pub strongly_irreducible: Option<bool>,
    pub strong_witness_iters: Option<u64>,
    pub path_condition: Option<bool>,
    pub uniqueness_kernel_dim: Option<u64>,
    pub notes: Vec<String>,
}

impl DiagnosticsInfo {
    pub fn from_report(d: &DiagnosticsReport) -> Self {
        Self {
            r_at_ones_positive: d.r_at_ones_positive,
            weakly_irreducible: d.weakly_irreducible,
            weakly_primitive: d.weakly_primitive,
            strongly_irreducible: d.strongly_irreducible.map(|s| s.holds),
            strong_witness_iters: d.strongly_irreducible.map(|s| s.witness_iters as u64),
            path_condition: d.path_condition,
            uniqueness_kernel_dim: d.uniqueness_kernel_dim.map(|k| k as u64),
            notes: d.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderInfo {
    pub delta: f64,
    pub value: f64,
    pub iters: u64,
    pub converged: bool,
}

/// The solve report, with keys in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub problem: ProblemInfo,
    pub regime: String,
    #[serde(rename = "rho_A")]
    pub rho_a: f64,
    pub weights: WeightsInfo,
    pub eigenvalue: f64,
    pub eigenvector: Vec<Vec<f64>>,
    pub cw_history: Vec<(f64, f64)>,
    pub iters: u64,
    pub converged: bool,
    pub diagnostics: DiagnosticsInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<LadderInfo>>,
    pub warnings: Vec<String>,
}

impl ReportFile {
    pub fn from_solve(spec: &ProblemSpec, report: &SolveReport) -> Self {
        Self {
            problem: ProblemInfo::from_spec(spec),
            regime: report.regime.as_str().to_string(),
            rho_a: report.rho_a,
            weights: WeightsInfo {
                b: report.weights.b.clone(),
                r: report.weights.r,
            },
            eigenvalue: report.eigenvalue,
            eigenvector: report.eigenvector.blocks().to_vec(),
            cw_history: report.cw_history.clone(),
            iters: report.iters as u64,
            converged: report.converged,
            diagnostics: DiagnosticsInfo::from_report(&report.diagnostics),
            ladder: report.ladder.as_ref().map(|rungs| {
                rungs
                    .iter()
                    .map(|r| LadderInfo {
                        delta: r.delta,
                        value: r.value,
                        iters: r.iters as u64,
                        converged: r.converged,
                    })
                    .collect()
            }),
            warnings: report.warnings.clone(),
        }
    }
}

/// Structural analysis output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeFile {
    pub problem: ProblemInfo,
    #[serde(rename = "rho_A")]
    pub rho_a: f64,
    pub regime: String,
    pub regime_tolerance: f64,
    pub weights: Option<WeightsInfo>,
    pub diagnostics: DiagnosticsInfo,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// JSON emission with full-precision floats.
// ---------------------------------------------------------------------------

/// Compact JSON formatter that prints every float with 17 significant
/// digits, which round-trips any finite f64 exactly.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn emit_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value
        .serialize(&mut serializer)
        .expect("report serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serializer emits UTF-8")
}

pub fn parse_report(text: &str) -> Result<ReportFile, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn parse_analysis(text: &str) -> Result<AnalyzeFile, serde_json::Error> {
    serde_json::from_str(text)
}
