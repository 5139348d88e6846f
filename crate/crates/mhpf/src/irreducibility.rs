//! Irreducibility diagnostics: which Perron-Frobenius conclusions apply to a
//! given problem.
//!
//! Three nested structural conditions are computed, all independent of the
//! exponents `p_i`:
//!
//! * `R(1) > 0` - the map sends the all-ones vector into the open cone.
//! * weak irreducibility / primitivity - irreducibility (primitivity) of the
//!   Jacobian zero pattern at the all-ones vector, encoded as a
//!   [`StructureGraph`] on the coordinate set `I = U_i {i} x [n_i]`.
//! * strong irreducibility - iterating `H(x) = x + R(x)` from every canonical
//!   support `e^(j)`, `j in [n_1] x ... x [n_d]`, eventually fills the whole
//!   support. Decided by boolean support propagation, which is exact and
//!   scale-free.
//!
//! Strong implies weak implies `R(1) > 0`. The module also checks the graph
//! path condition that guarantees a positive eigenvector for nonexpansive
//! problems, and a uniqueness certificate: the kernel dimension of `I - L`
//! for the eigenvalue-scaled Jacobian `L` at a computed eigenvector, where
//! dimension one certifies uniqueness of the positive eigenvector.
//!
//! The graph of vanishing limits at zero is not built separately: for
//! polynomial tensor maps a coordinate function tends to zero in a variable
//! exactly when it grows in it, so that graph coincides with the structure
//! graph; diagnostics carry a note recording the identification.

use thiserror::Error;

use crate::bitmat::{pattern_irreducible, pattern_primitive, BitMatrix};
use crate::map::{eval_r, eval_r_signed, BlockVector, MapError, ProblemSpec};

/// Default cap on `|J| = prod_i n_i` for the support-enumeration checks;
/// above it they report indeterminate instead of running forever.
pub const DEFAULT_ENUMERATION_CAP: usize = 4096;

/// Finite-difference step for the uniqueness-certificate Jacobian.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;

/// Largest residual `max_i |R_i(u) - lambda^{p_i'-1} u_i|` accepted by the
/// uniqueness certificate.
pub const CERTIFICATE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum IrreducibilityError {
    #[error("support enumeration over {size} canonical supports exceeds the cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("eigenvector must be strictly positive")]
    NotPositive,
    #[error("eigenpair residual {residual} exceeds tolerance {tol}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// An edge of the structure graph: `(block, coordinate)` endpoints.
pub type StructureEdge = ((usize, usize), (usize, usize));

/// Directed graph on the coordinate set `I`, with an edge from `(k, l)` to
/// `(i, c)` exactly when `R_{k,l}` depends on (grows unboundedly in) the
/// coordinate `x_{i,c}`. Equivalently: the zero pattern of the Jacobian of
/// `R` anywhere in the interior of the cone.
#[derive(Debug, Clone)]
pub struct StructureGraph {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    adj: BitMatrix,
}

impl StructureGraph {
    pub fn empty(block_dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut total = 0;
        for &n in &block_dims {
            offsets.push(total);
            total += n;
        }
        Self {
            block_dims,
            offsets,
            adj: BitMatrix::zeros(total.max(1)),
        }
    }

    /// Build from explicit edges `((k, l), (i, c))`; used by test fixtures
    /// with hand-specified adjacency.
    pub fn from_edges(block_dims: Vec<usize>, edges: &[StructureEdge]) -> Self {
        let mut g = Self::empty(block_dims);
        for &((k, l), (i, c)) in edges {
            g.add_edge((k, l), (i, c));
        }
        g
    }

    pub fn add_edge(&mut self, from: (usize, usize), to: (usize, usize)) {
        let u = self.vertex(from.0, from.1);
        let v = self.vertex(to.0, to.1);
        self.adj.set(u, v);
    }

    pub fn vertex(&self, block: usize, coord: usize) -> usize {
        assert!(coord < self.block_dims[block], "coordinate out of range");
        self.offsets[block] + coord
    }

    pub fn num_vertices(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn has_edge(&self, from: (usize, usize), to: (usize, usize)) -> bool {
        self.adj
            .get(self.vertex(from.0, from.1), self.vertex(to.0, to.1))
    }

    pub fn is_irreducible(&self) -> bool {
        pattern_irreducible(&self.adj)
    }

    pub fn is_primitive(&self) -> bool {
        pattern_primitive(&self.adj)
    }

    fn closure(&self) -> BitMatrix {
        self.adj.reachability_closure()
    }
}

/// The structure graph of the map, computed from the tensor's nonzero
/// pattern alone (never by numeric differentiation): an entry contributes an
/// edge `(k, e[s_k]) -> (i, e[w])` for every slot `w != s_k` carrying block
/// `i`.
pub fn jacobian_pattern_at_ones(spec: &ProblemSpec) -> StructureGraph {
    let mut g = StructureGraph::empty(spec.block_dims().to_vec());
    let d = spec.num_blocks();
    let starts = spec.block_starts().to_vec();
    spec.tensor().for_each_entry(|index, _| {
        for k in 0..d {
            let from = (k, index[starts[k]]);
            for (w, &coord) in index.iter().enumerate() {
                if w == starts[k] {
                    continue;
                }
                g.add_edge(from, (spec.slot_block(w), coord));
            }
        }
    });
    g
}

/// Irreducibility of the structure-graph adjacency.
pub fn weak_irreducibility(spec: &ProblemSpec) -> bool {
    jacobian_pattern_at_ones(spec).is_irreducible()
}

/// Primitivity of the structure-graph adjacency.
pub fn weak_primitivity(spec: &ProblemSpec) -> bool {
    jacobian_pattern_at_ones(spec).is_primitive()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrongIrreducibility {
    pub holds: bool,
    /// On success: the largest number of `H` applications any canonical
    /// support needed to fill. On failure: the iteration at which the first
    /// stalled support stopped growing.
    pub witness_iters: usize,
}

/// Per-block boolean masks marking the nonzero coordinates of a block
/// vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    blocks: Vec<Vec<bool>>,
}

impl SupportPattern {
    /// The canonical support `e^(j)`: coordinate `j_k` marked in block `k`,
    /// nothing else.
    pub fn canonical(block_dims: &[usize], choice: &[usize]) -> Self {
        assert_eq!(block_dims.len(), choice.len(), "choice arity mismatch");
        Self {
            blocks: block_dims
                .iter()
                .zip(choice)
                .map(|(&n, &j)| {
                    assert!(j < n, "choice out of range");
                    (0..n).map(|c| c == j).collect()
                })
                .collect(),
        }
    }

    /// The support of a nonnegative block vector.
    pub fn of(x: &BlockVector) -> Self {
        Self {
            blocks: x
                .blocks()
                .iter()
                .map(|blk| blk.iter().map(|&v| v != 0.0).collect())
                .collect(),
        }
    }

    pub fn contains(&self, block: usize, coord: usize) -> bool {
        self.blocks[block][coord]
    }

    /// Mark a coordinate; `true` when it was newly set.
    pub fn mark(&mut self, block: usize, coord: usize) -> bool {
        let slot = &mut self.blocks[block][coord];
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    pub fn is_full(&self) -> bool {
        self.blocks.iter().all(|blk| blk.iter().all(|&s| s))
    }
}

/// One application of `H(x) = x + R(x)` at the support level: a coordinate
/// `(i, l)` of the image is supported when it already was, or when some
/// tensor entry has `e[s_i] = l` with every other slot supported.
fn propagate_support(spec: &ProblemSpec, support: &SupportPattern) -> SupportPattern {
    let d = spec.num_blocks();
    let starts = spec.block_starts();
    let mut next = support.clone();
    spec.tensor().for_each_entry(|index, _| {
        for i in 0..d {
            if next.contains(i, index[starts[i]]) {
                continue;
            }
            let feasible = index
                .iter()
                .enumerate()
                .all(|(w, &coord)| w == starts[i] || support.contains(spec.slot_block(w), coord));
            if feasible {
                next.mark(i, index[starts[i]]);
            }
        }
    });
    next
}

/// Decide strong irreducibility by boolean support propagation through
/// `H(x) = x + R(x)`: every canonical support `e^(j)`, `j` ranging over
/// `[n_1] x ... x [n_d]`, must reach full support within `|I|` iterations.
/// Exact and scale-free; supports never consult the exponents, so the
/// outcome is invariant under changing `p`.
pub fn strong_irreducibility(
    spec: &ProblemSpec,
    cap: usize,
) -> Result<StrongIrreducibility, IrreducibilityError> {
    let dims = spec.block_dims();
    let size = dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    let size = match size {
        Some(s) if s <= cap => s,
        other => {
            return Err(IrreducibilityError::CapExceeded {
                size: other.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    let num_vertices: usize = dims.iter().sum();

    let mut kappa = 0usize;
    let mut j = vec![0usize; spec.num_blocks()];
    for _ in 0..size {
        let mut support = SupportPattern::canonical(dims, &j);
        if !support.is_full() {
            let mut filled_at = None;
            for iter in 1..=num_vertices {
                let next = propagate_support(spec, &support);
                let grew = next != support;
                support = next;
                if support.is_full() {
                    filled_at = Some(iter);
                    break;
                }
                if !grew {
                    return Ok(StrongIrreducibility {
                        holds: false,
                        witness_iters: iter,
                    });
                }
            }
            match filled_at {
                Some(iter) => kappa = kappa.max(iter),
                None => {
                    return Ok(StrongIrreducibility {
                        holds: false,
                        witness_iters: num_vertices,
                    })
                }
            }
        }
        advance_multi_index(&mut j, dims);
    }
    Ok(StrongIrreducibility {
        holds: true,
        witness_iters: kappa,
    })
}

/// The existence condition for a positive eigenvector in the nonexpansive
/// regime: for every target coordinate `(v, l_v)` and every choice tuple
/// `(j_1, ..., j_d)` there is some block `i` with a directed path (possibly
/// empty) from `(i, j_i)` to `(v, l_v)`. Strong connectivity is sufficient
/// but not necessary when `d > 1`.
pub fn path_condition(graph: &StructureGraph, cap: usize) -> Result<bool, IrreducibilityError> {
    let dims = graph.block_dims().to_vec();
    let size = dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    let size = match size {
        Some(s) if s <= cap => s,
        other => {
            return Err(IrreducibilityError::CapExceeded {
                size: other.unwrap_or(usize::MAX),
                cap,
            })
        }
    };
    let closure = graph.closure();
    let d = dims.len();
    for target in 0..graph.num_vertices() {
        let mut j = vec![0usize; d];
        for _ in 0..size {
            let reachable = (0..d).any(|i| closure.get(graph.vertex(i, j[i]), target));
            if !reachable {
                return Ok(false);
            }
            advance_multi_index(&mut j, &dims);
        }
    }
    Ok(true)
}

fn advance_multi_index(idx: &mut [usize], dims: &[usize]) {
    for axis in (0..idx.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < dims[axis] {
            return;
        }
        idx[axis] = 0;
    }
}

/// Uniqueness certificate at a computed positive eigenpair `(lambda, u)`:
/// builds `L[(i,j),(k,l)] = (1/lambda_i) dR_{i,j}/dx_{k,l}(u)` with
/// `lambda_i = lambda^{p_i'-1}` by central finite differences and returns the
/// numeric kernel dimension of `I - L` (singular values below
/// `1e-6 * ||L||_inf`). Kernel dimension one certifies that `u` is the unique
/// positive eigenvector.
pub fn uniqueness_certificate(
    spec: &ProblemSpec,
    u: &BlockVector,
    lambda: f64,
) -> Result<usize, IrreducibilityError> {
    if !u.is_positive() {
        return Err(IrreducibilityError::NotPositive);
    }
    let lambda_blocks: Vec<f64> = spec
        .conjugates()
        .iter()
        .map(|&pc| lambda.powf(pc - 1.0))
        .collect();
    let r = eval_r(spec, u)?;
    let mut residual = 0.0f64;
    for (i, &lambda_i) in lambda_blocks.iter().enumerate() {
        for (rj, uj) in r.block(i).iter().zip(u.block(i)) {
            residual = residual.max((rj - lambda_i * uj).abs());
        }
    }
    if residual > CERTIFICATE_RESIDUAL_TOL {
        return Err(IrreducibilityError::ResidualTooLarge {
            residual,
            tol: CERTIFICATE_RESIDUAL_TOL,
        });
    }

    let dims = spec.block_dims().to_vec();
    let n: usize = dims.iter().sum();
    let h = JACOBIAN_FD_STEP;
    // Column (k, c): central difference of R along that coordinate, each row
    // scaled by the block eigenvalue.
    let mut l = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut col = 0usize;
    for k in 0..dims.len() {
        for c in 0..dims[k] {
            let mut plus = u.clone();
            plus.block_mut(k)[c] += h;
            let mut minus = u.clone();
            minus.block_mut(k)[c] -= h;
            let rp = eval_r_signed(spec, &plus)?;
            let rm = eval_r_signed(spec, &minus)?;
            let mut row = 0usize;
            for i in 0..dims.len() {
                for jj in 0..dims[i] {
                    let deriv = (rp.block(i)[jj] - rm.block(i)[jj]) / (2.0 * h);
                    l[(row, col)] = deriv / lambda_blocks[i];
                    row += 1;
                }
            }
            col += 1;
        }
    }

    let linf = (0..n)
        .map(|i| (0..n).map(|j| l[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let threshold = 1e-6 * linf.max(f64::MIN_POSITIVE);
    let shifted = nalgebra::DMatrix::<f64>::identity(n, n) - l;
    let singular_values = shifted.svd(false, false).singular_values;
    Ok(singular_values.iter().filter(|&&s| s <= threshold).count())
}

/// Aggregated structural diagnostics. `strongly_irreducible` and
/// `path_condition` are `None` when the support enumeration exceeded the
/// cap (indeterminate).
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub r_at_ones_positive: bool,
    pub weakly_irreducible: bool,
    pub weakly_primitive: bool,
    pub strongly_irreducible: Option<StrongIrreducibility>,
    pub path_condition: Option<bool>,
    pub uniqueness_kernel_dim: Option<usize>,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    /// The implication chain strong => weak => `R(1) > 0`.
    pub fn implications_hold(&self) -> bool {
        let strong = self.strongly_irreducible.map(|s| s.holds).unwrap_or(false);
        (!strong || self.weakly_irreducible)
            && (!self.weakly_irreducible || self.r_at_ones_positive)
    }
}

/// Run every structural diagnostic on a problem.
pub fn diagnostics(spec: &ProblemSpec, cap: usize) -> DiagnosticsReport {
    let ones = BlockVector::ones(spec.block_dims());
    let r_at_ones_positive = eval_r(spec, &ones)
        .map(|r| r.is_positive())
        .unwrap_or(false);
    let graph = jacobian_pattern_at_ones(spec);
    let weakly_irreducible = graph.is_irreducible();
    let weakly_primitive = graph.is_primitive();
    let strongly_irreducible = strong_irreducibility(spec, cap).ok();
    let path = path_condition(&graph, cap).ok();
    let report = DiagnosticsReport {
        r_at_ones_positive,
        weakly_irreducible,
        weakly_primitive,
        strongly_irreducible,
        path_condition: path,
        uniqueness_kernel_dim: None,
        notes: vec![
            "limit-at-zero graph coincides with the structure graph for polynomial tensor maps"
                .to_string(),
        ],
    };
    debug_assert!(report.implications_hold(), "irreducibility chain violated");
    report
}
