//! Quasi-separability and purification-protocol toolkit for bipartite mixed
//! states.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Jacobi eigensolver, Takagi
//!   factorization, Haar sampling and unitary coordinates.
//! - [`states`]: density matrices, pure-state ensembles and reweighted
//!   ("new-state") realizations of them.
//! - [`entanglement`]: spin flip, concurrence, the λ′ decomposition, PPT and
//!   Schmidt tools.
//! - [`qss`]: classification of states as quasi-separable, with certificates
//!   that can be re-verified independently.
//! - [`protocol`]: local filters and one-round local-unitary + ancilla
//!   measurement protocols, chained into branch trees.
//! - [`search`]: derivative-free search over protocol rounds for a pure
//!   entangled output.

pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod protocol;
pub mod qss;
pub mod search;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::{c64, CMatrix, CVector};
pub use num_complex::Complex64;
