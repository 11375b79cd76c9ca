//! Twisted spectral triples on finite-dimensional ℤ₂-graded Hilbert spaces.
//!
//! The crate realizes a triple `(𝒜, ℋ, D)_σ` as dense complex matrices and
//! computes the objects attached to it: the twisted compressions
//! `D_{e,σ} = σ(e)(D⊗1)` and their indices, the cyclic cochain calculus,
//! the Connes–Chern cocycles `τ_{2k}` with their pairings, the invertible
//! double, homotopy transgressions and σ-connections on `e𝒜^q`.
//!
//! Everything is `no_std` with `alloc`. Identities are verified pointwise on
//! sampled algebra elements; no exact subalgebra arithmetic is attempted.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod chern;
pub mod connections;
pub mod cyclic;
pub mod error;
pub mod generate;
pub mod index;
pub mod ktheory;
pub mod linalg;
pub mod quadrature;
pub mod triple;

pub use algebra::{Automorphism, ElementSampler, MatrixAlgebra};
pub use error::{Error, Result};
pub use ktheory::{BlockMatrix, Idempotent};
pub use linalg::{GradedOperator, GradedSpace, Mat, Parity, C64};
pub use triple::{DoubledTriple, TwistedTriple};
