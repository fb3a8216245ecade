//! Exact combinatorics of weighted set partitions.
//!
//! The crate computes with partition weight sequences `w = (w_1, w_2, ...)`:
//! partial Bell polynomials `B_{n,k}(w)`, the Gibbs probability laws they
//! normalize, the binary fragmentation chain those laws induce, the
//! conditioned Galton-Watson forests with the same block structure, and the
//! Kingman coalescent with Poissonian cutting whose allelic partitions follow
//! the Ewens formula.
//!
//! All probability mass functions and combinatorial identities are computed
//! in exact rational arithmetic (`num_rational::BigRational`); floating point
//! enters only for quadrature, goodness-of-fit statistics, and display.
//! Samplers consume seeded, stream-addressable generators from
//! [`stats::rng_stream`] and draw against exact rational thresholds, refining
//! the uniform variate bit by bit until the comparison is unambiguous.
//!
//! Module map:
//! - [`partition`]: set partitions, integer partitions, permutations.
//! - [`weights`]: weight sequences, Bell tables, the two-parameter product
//!   family and its convolution polynomials.
//! - [`gibbs`]: exact Gibbs laws (microcanonical and canonical) and samplers.
//! - [`frag`]: the recursive split chain, its exact path law, and the affine
//!   merge kernel that reverses it.
//! - [`gw`]: plane trees, offspring laws, conditioned sampling, forest cuts.
//! - [`existence`]: one-step feasibility of Gibbs fragmentations via exact
//!   max-flow on the refinement graph.
//! - [`kingman`]: coalescent trees, Poissonian cutting, Ewens laws, and the
//!   law of the first cut.
//! - [`stats`]: empirical distributions, chi-square and total variation.
//! - [`bigdec`]: rational approximations of logs and exponentials with error
//!   bounds, for comparisons at 50 significant digits.
//! - [`quad`]: adaptive Gauss-Kronrod quadrature on finite and half-infinite
//!   intervals.

pub mod bigdec;
pub mod existence;
pub mod frag;
pub mod gibbs;
pub mod gw;
pub mod kingman;
pub mod numeric;
pub mod partition;
pub mod quad;
pub mod stats;
pub mod weights;

pub mod acceptance;

pub use numeric::{Int, Nat, Rat};
