//! The Heisenberg group `H_{2p+1}` with its left-invariant pseudo-Riemannian
//! metric `g = -sum dx_i^2 + sum dy_i^2 + (dz + sum x_i dy_i)^2`: group law,
//! metric tensors, closed-form geodesics with an independent RK4 oracle, and
//! the codimension-1 totally geodesic distribution `ker theta`,
//! `theta = sum (dx_i - dy_i)`.
//!
//! A Riemannian sibling metric (`+sum dx_i^2`) is carried along for contrast:
//! there, geodesics tangent to `ker theta` leave it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod geodesic;
pub mod group;
pub mod metric;
pub mod sampling;
pub mod suite;

pub use distribution::{
    counterexample_search, exterior_derivative_fd, frobenius_involutivity_check, leaf_value,
    riemannian_counterexample_search, theta_eval, theta_transport_factor, totally_geodesic_verify,
    Counterexample, Covector, OneForm, SearchConfig, SearchOutcome, TangencyConfig, TimeGrid,
    VerificationReport,
};
pub use error::{GeometryError, Result};
pub use geodesic::{
    alpha, christoffel_fd, closed_form_state, euler_lagrange_residual, geodesic_ode_rhs,
    integrate_geodesic, integrate_geodesic_with, lagrangian, sample_times, GeodesicState,
    InitialConditions, RhsPath, Trajectory,
};
pub use group::{
    group_inverse, group_multiply, left_translation_differential, GroupPoint, TangentVector,
};
pub use metric::{metric_components, metric_eval, signature, MetricKind, MetricSpec, Signature};
