//! Delone point patterns, many-body order covers, the N-fermion groupoid with its
//! symmetric-group 2-action, exact CAR/GICAR sign algebra, and Fock-sector
//! representations of Galilean-invariant finite-range Hamiltonians.

pub mod canonical_order;
pub mod car_symbolic;
pub mod cover;
pub mod error;
pub mod fock;
pub mod galgebra;
pub mod groupoid;
pub mod hamiltonian;
pub mod pattern;
pub mod perm;
pub mod rng;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
