//! Privacy amplification against quantum adversaries by two-universal
//! hashing, with security bounds computed exactly on small instances.
//!
//! The crate follows the post-processing pipeline of a key agreement
//! protocol: a partially secret string `Z`, an adversary holding a quantum
//! system correlated with `Z`, and a publicly chosen two-universal hash
//! compressing `Z` into a shorter key whose quality is measured by its trace
//! distance to an ideal uniform-and-independent key.
//!
//! - [`linalg`]: dense complex Hermitian linear algebra (Jacobi
//!   eigendecomposition, Kronecker products, trace norms).
//! - [`states`]: density operators, classical distributions, and
//!   classical-quantum ensembles over finite sample spaces.
//! - [`metrics`]: variational and trace distance, Hilbert-Schmidt distance,
//!   and the non-uniformity of a key given an adversary state.
//! - [`entropy`]: Renyi and smooth Renyi entropies, compressed product-state
//!   spectra, and asymptotic-equipartition gaps.
//! - [`hashing`]: two-universal families (Toeplitz, GF(2^n) multiplication,
//!   complete function family) with exact collision counting.
//! - [`pa`]: security bounds, exact hashed-key distance, extractable key
//!   length, and the asymptotic key rate.
//! - [`random`]: seedable generators for randomized instances.
//! - [`verify`]: randomized numerical checks of the identities and
//!   inequalities the security argument rests on, with brute-force oracles.

pub mod entropy;
pub mod error;
pub mod hashing;
pub mod linalg;
pub mod metrics;
pub mod pa;
pub mod random;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigDecomposition, HermitianOperator};
pub use num_complex::Complex64;
pub use states::{ClassicalDistribution, CqEnsemble, DensityOperator};
