//! Sampling probabilities for the two-locus infinite-alleles coalescent with
//! recombination.
//!
//! Three routes to the same quantity:
//!
//! * [`two_locus`] solves the stationary two-locus recursion exactly, degree
//!   system by degree system, under an arbitrary-precision rational or a
//!   double-precision backend.
//! * [`asymptotic`] evaluates the closed forms of the large-`rho` expansion
//!   `q = q0 + q1/rho + q2/rho^2 + O(rho^-3)`.
//! * [`harness`] extracts series coefficients from the exact solver by
//!   rational extrapolation and certifies the closed forms against them; it
//!   also generates LDhat-style lookup tables.
//!
//! [`one_locus`] supplies the Ewens-sampling-formula layer and
//! [`allele_counts`] the joint distribution of the number of alleles observed
//! at the two loci.

pub mod allele_counts;
pub mod asymptotic;
pub mod cli;
mod error;
pub mod harness;
pub mod numerics;
pub mod one_locus;
pub mod two_locus;

pub use error::{Error, Result};
pub use two_locus::{Params, TwoLocusConfig};
