//! Weighted K-stability computations on toric manifolds given by Delzant
//! polytopes: weighted invariants by quadrature and by vertex localisation,
//! toric test configurations with their Donaldson–Futaki and Chow data, and
//! corner-blowup expansions.

// `!(a > b)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod blowup;
pub mod config;
pub mod error;
pub mod invariants;
pub mod lattice;
pub mod localize;
pub mod polytope;
pub mod profiles;
pub mod quadrature;
pub mod rational;
pub mod region;
pub mod report;
pub mod testconfig;

pub use blowup::{ExpansionOptions, ExpansionReport, Quantity};
pub use error::{Error, Result};
pub use invariants::{Backend, EvalOptions, InvariantReport, Moments};
pub use localize::LocOptions;
pub use polytope::DelzantPolytope;
pub use profiles::{Family, Profile, WeightPair};
pub use quadrature::QuadOptions;
pub use rational::Rational;
pub use report::StabilityDossier;
pub use testconfig::{AffinePiece, PLConvex, ToricContext, ToricTC};
