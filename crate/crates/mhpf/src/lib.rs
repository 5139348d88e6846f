//! Spectral problems for nonnegative tensors, solved through the theory of
//! order-preserving multi-homogeneous maps on cone products.
//!
//! Given a nonnegative order-`m` tensor, a block partition `nu` of its modes
//! and exponents `p_1, ..., p_d > 1`, the crate computes the maximal
//! nonnegative eigenpair of the map
//!
//! ```text
//! R_i(x) = psi_{p_i'}( T_{s_i}(x_1, ..., x_1, x_2, ..., x_2, ..., x_d) )
//! ```
//!
//! where `T_j` is the mode-`j` contraction of the tensor, each block `x_k` is
//! repeated `nu_k` times, and `psi_q(z) = |z|^{q-1} sign(z)` componentwise.
//! This covers the l^p eigenvector problem (`d = 1`), rectangular l^{p,q}
//! singular vectors (`d = 2`) and general l^{p_1,...,p_d} singular vectors
//! (`d = m`) in one formulation.
//!
//! The behaviour of `R` is governed by its homogeneity matrix
//! `A[i][k] = (p_i' - 1)(nu_k - [i = k])`:
//!
//! * `rho(A) < 1`: the normalized power iteration is a strict contraction in
//!   a weighted Hilbert metric; convergence is linear with a certified rate.
//! * `rho(A) = 1`: the iteration is nonexpansive; it converges when the
//!   structure graph at the all-ones vector is primitive, while the decoupled
//!   composed map (`m = d = 2`) and a decreasing delta-shift ladder cover the
//!   degenerate patterns.
//! * `rho(A) > 1`: no convergence theory applies and the solver refuses.
//!
//! Collatz-Wielandt ratio products bracket the eigenvalue from both sides at
//! every iterate; the bracket is monotone along the iteration and its width
//! is the stopping criterion, so every reported eigenvalue comes with a
//! two-sided certificate.
//!
//! Module map:
//! * [`tensor`] - dense/COO storage, mode contractions, the multilinear form.
//! * [`map`] - problem specification, block vectors, the map `R` itself.
//! * [`cone`] - homogeneity-matrix analytics: spectral radius, weight
//!   vectors, Lipschitz constants, matrix irreducibility and primitivity.
//! * [`metrics`] - weighted Hilbert and Thompson metrics on the open cone.
//! * [`irreducibility`] - structure graphs, weak/strong irreducibility,
//!   the path condition and the uniqueness certificate.
//! * [`solver`] - the power method with regime-aware strategies behind a
//!   runtime registry, Collatz-Wielandt stopping, Gelfand estimates and the
//!   delta-shift ladder.
//! * [`oracle`] - deliberately naive brute-force validators used by tests.

pub(crate) mod bitmat;
pub mod cone;
pub mod irreducibility;
pub mod map;
pub mod metrics;
pub mod oracle;
pub mod solver;
pub mod tensor;

pub use cone::{RegimeTag, WeightVector};
pub use map::{BlockVector, HomogeneityMatrix, ProblemSpec};
pub use solver::{SolveOptions, SolveReport};
pub use tensor::NonnegTensor;
