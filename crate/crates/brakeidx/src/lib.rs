//! Maslov-type indices of symplectic paths and brake orbits.
//!
//! The crate computes the Lagrangian-boundary indices `i_{L0}`, `i_{L1}`, the
//! ω-rotated index `i_ω^{L0}` and the periodic index `i_ω` of paths in Sp(2n),
//! iterates paths in the brake and periodic senses, evaluates the ε-signature
//! `sgn M_ε(P)`, counts Fourier–Galerkin eigenvalues as an independent index
//! oracle, and finds brake orbits of reversible Hamiltonian systems by shooting.

pub mod angle;
pub mod galerkin;
pub mod io;
pub mod iteration;
pub mod error;
pub mod lagrangian;
pub mod omega;
pub mod orbits;
pub mod par;
pub mod path;
pub mod signature;
pub mod suite;
pub mod symplectic;
pub mod verify;

pub use angle::Omega;
pub use error::{Error, Result};
