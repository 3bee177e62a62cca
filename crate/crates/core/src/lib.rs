//! Ergodic statistics of random compositions of hyperbolic toral automorphisms.
//!
//! Two nonnegative matrices `A_0, A_1` in `SL(2, Z)` act on the torus
//! `T^2 = R^2 / Z^2`; at each step one of them is drawn i.i.d. with
//! `P(symbol 0) = wp`. This crate computes:
//!
//! * exact lattice data: word compositions, cone/hyperbolicity constants,
//!   periodic points via Smith normal form ([`lattice`], [`rigidity`]);
//! * transfer-operator actions on sparse trigonometric polynomials and the
//!   correlation series `m(f L^n f)` with exact pruning ([`observable`],
//!   [`transfer`]);
//! * the annealed CLT variance and its dependence on `wp` ([`variance`]);
//! * exact fixed-point trajectories for annealed/quenched Monte Carlo
//!   ([`dynamics`]) and the statistics used to judge them ([`stats`]).
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod dynamics;
pub mod lattice;
pub mod observable;
pub mod rigidity;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod transfer;
pub mod variance;

pub use crate::error::{Error, Result};
pub use crate::lattice::{
    apply_map, classify_conjugate_product, compose_word, hyperbolicity_constants,
    validate_generator, ConeConstants, ConjugacyClass, Generators, IntMatrix, MapWord, TorusPoint,
};
pub use crate::observable::{Dim, Freq, TrigPoly};
pub use crate::scalar::{Rational, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
