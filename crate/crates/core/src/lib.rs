//! Tolerant isomorphism testing of Boolean functions over finite Abelian
//! groups.
//!
//! The crate is layered bottom-up:
//!
//! - [`group`]: groups `Z_{p1^m1} x ... x Z_{pn^mn}`, the pairing and exact
//!   characters.
//! - [`fourier`]: Boolean functions and the exact, brute-force Fourier layer
//!   used as ground truth.
//! - [`cosets`]: subgroups, annihilators, random coset structures and
//!   pseudo-independence.
//! - [`automorphisms`]: `Aut(G)`, double duals and the exact automorphism
//!   distance.
//! - [`estimators`]: the counting query oracle and sampling estimators.
//! - [`sieve`]: the implicit sieve, its sparse variant and prefix search.
//! - [`tester`]: the isomorphism testers built on the sieve.
//! - [`cli`]: function files, generators and the command-line front end.

pub mod automorphisms;
pub mod cli;
pub mod cosets;
pub mod error;
pub mod estimators;
pub mod fourier;
pub mod group;
pub mod sieve;
pub mod tester;

pub use automorphisms::{enumerate_automorphisms, exact_automorphism_distance, AutCaps, Automorphism};
pub use cosets::{Coset, CosetStructure, Subgroup};
pub use error::{Error, Result};
pub use estimators::{EstimatorConfig, QueryOracle};
pub use fourier::{BooleanFunction, FourierTable};
pub use group::{GroupElement, GroupSpec, RootOfUnity, ZModL};
pub use sieve::{implicit_sieve, sparse_implicit_sieve, SieveConfig, SieveOutput};
pub use tester::{test_isomorphism, test_isomorphism_sparse, TesterConfig, Verdict};
