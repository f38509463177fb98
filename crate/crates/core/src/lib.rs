//! Communication tests of partial ignorance.
//!
//! The library builds the optimal communication matrices `C_opt(n, t)` for the
//! n-box test with t revealed boxes, decides the ultraweak matrix majorization
//! preorder `M ⊑ N` (M = L·N·R for row-stochastic L, R) with explicit
//! certificates, constructs quantum (qubit/qudit) and rebit implementations of
//! communication matrices, and assembles per-system communication tables.
//!
//! Matrix arithmetic on communication matrices and certificates is exact over
//! arbitrary-precision rationals; quantum-side computations are floating point
//! with explicit physicality tolerances. Classical matrix majorization and weak
//! matrix majorization (same-size relations with L = id or R = id) both imply
//! the ultraweak relation; only the ultraweak relation is implemented here.

pub mod commat;
mod error;
pub mod implsearch;
pub mod linalg;
pub mod par;
pub mod quantum;
pub mod rational;
pub mod tables;
pub mod ultraweak;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
