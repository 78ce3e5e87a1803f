//! Verification laboratory for the classical and quantum Ablowitz–Ladik chain.
//!
//! The crate builds the classical Lax/monodromy structure and its Bäcklund
//! transformations, a truncated q-boson Fock representation of the quantum
//! chain, the algebraic Bethe ansatz spectrum, and a Jackson-calculus function
//! space in which the q-difference Baxter equation can be evaluated pointwise.
//! Every identity is exposed as a residual so it can be checked numerically.

pub mod algebra;
pub mod backlund;
pub mod bethe;
pub mod chain;
pub mod fock;
pub mod funspace;
pub mod qcalc;
pub mod quadrature;
pub mod suite;
