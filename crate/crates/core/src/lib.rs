//! Deterministic approximation of the probability that none of a family of
//! partially dependent events occurs on a finite product probability space.
//!
//! The pipeline builds the polynomial `p(z) = E[prod_i (1 - z [A_i])]` from the
//! sums `sigma_k` of k-wise intersection probabilities, composes it with a map
//! `phi` that sends a disk of radius `rho > 1` into a zero-free region of `p`,
//! and truncates the Taylor series of `ln p(phi(z))` at `z = 1`.
//!
//! Everything up to the coefficients of `p` is exact rational arithmetic.
//! Floating point only enters in [`interpolate`] and in root localisation in
//! [`oracle`].
//!
//! The crate is `no_std` (it needs `alloc`); the `std` feature only adds
//! `std::error::Error` plumbing for downstream crates.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
pub mod interpolate;
pub mod joint;
pub mod model;
pub mod oracle;
pub mod predicate;
pub mod rational;
pub mod real;

pub use error::{Error, Result};
pub use interpolate::{
    build_plan, build_segment_plan, compose_series, estimate_log_intersection, log_taylor,
    CompositionMap, Estimate, EstimateOptions, Guarantee, InterpolationPlan, PlanSummary,
    Precision,
};
pub use joint::{event_probability, sigma_series, Budget, IntersectionSeries, JointProbability};
pub use model::{
    check_lll, check_smallness, normalize_support, Atom, CoordinateSpace, DependencyGraph, Event,
    LllReport, ProductSpace, SmallnessReport,
};
pub use oracle::{
    direct_joint_probability, exact_intersection_probability, find_roots, full_p_polynomial,
    root_localize, root_localize_exact, RootReport,
};
pub use predicate::{compile_predicate, parse_predicate, Predicate};
pub use rational::Rational;
