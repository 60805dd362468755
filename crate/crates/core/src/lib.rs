//! Period and restricted-norm statistics of random Laplace eigenfunction
//! clusters on flat tori and the round sphere.
//!
//! A spectral cluster is the span of the eigenfunctions whose frequencies
//! fall in a window (a, a + D·h]; a random element is a uniform draw from its
//! L² unit sphere. The crate computes the exact laws of the period
//! |∫_S u dσ| and of restricted L^q norms (survival functions, moments,
//! medians, concentration bounds), the deterministic counting inputs behind
//! them (Weyl counts, period vectors, Kuznecov cumulative sums), and the
//! Monte Carlo machinery to verify everything at desk scale with
//! reproducible counter-based sampling.

pub mod curves;
pub mod ensemble;
pub mod exactstats;
pub mod experiments;
pub mod legendre;
pub mod periods;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stats;
