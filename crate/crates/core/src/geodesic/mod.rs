//! Geodesics of `H_{2p+1}`.
//!
//! For the pseudo-Riemannian metric the Euler-Lagrange equations of
//!
//! ```text
//! L = 1/2 { -sum x_i'^2 + sum y_i'^2 + (z' + sum x_i y_i')^2 }
//! ```
//!
//! are
//!
//! ```text
//! x'' + w y' = 0,   y'' + w x' = 0,   z'' + sum (x_i' y_i' + x_i y_i'') = 0,
//! w = z' + sum x_i y_i'
//! ```
//!
//! and `w` is a first integral, `alpha`. [`closed_form`] evaluates the exact
//! solutions, [`ode`] integrates the system with RK4 either from the equations
//! above or from finite-difference Christoffel symbols ([`christoffel`]).

pub mod christoffel;
pub mod closed_form;
pub mod ode;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::{check_same_p, GroupPoint, TangentVector};
use crate::metric::{metric_eval, MetricSpec};

pub use christoffel::{christoffel_fd, Christoffel};
pub use closed_form::{closed_form_state, euler_lagrange_residual};
pub use ode::{
    geodesic_ode_rhs, integrate_geodesic, integrate_geodesic_with, sample_times, RhsPath,
    StateDerivative,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    point: GroupPoint,
    velocity: TangentVector,
}

impl InitialConditions {
    pub fn new(point: GroupPoint, velocity: TangentVector) -> Result<Self> {
        check_same_p(point.p(), velocity.p())?;
        Ok(Self { point, velocity })
    }

    pub(crate) fn from_parts(point: GroupPoint, velocity: TangentVector) -> Self {
        Self { point, velocity }
    }

    pub fn p(&self) -> usize {
        self.point.p()
    }

    pub fn point(&self) -> &GroupPoint {
        &self.point
    }

    pub fn velocity(&self) -> &TangentVector {
        &self.velocity
    }

    /// The state at `t = 0`.
    pub fn state(&self) -> GeodesicState {
        GeodesicState {
            t: 0.0,
            point: self.point.clone(),
            velocity: self.velocity.clone(),
        }
    }
}

/// A point and velocity at curve parameter `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub point: GroupPoint,
    pub velocity: TangentVector,
}

impl GeodesicState {
    /// `z' + sum x_i y_i'`, constant along geodesics of either metric kind.
    pub fn first_integral(&self) -> f64 {
        first_integral(&self.point, &self.velocity)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.point.is_finite() && self.velocity.is_finite()
    }

    /// Flattened `(coords, velocity components)`, length `2(2p+1)`.
    pub fn phase_vector(&self) -> Vec<f64> {
        let mut v = self.point.coords();
        v.extend(self.velocity.components());
        v
    }

    pub(crate) fn from_phase(t: f64, phase: &[f64]) -> Self {
        let n = phase.len() / 2;
        let p = (n - 1) / 2;
        let point =
            GroupPoint::from_parts(phase[..p].to_vec(), phase[p..2 * p].to_vec(), phase[2 * p]);
        let v = &phase[n..];
        let velocity = TangentVector::from_parts(v[..p].to_vec(), v[p..2 * p].to_vec(), v[2 * p]);
        Self { t, point, velocity }
    }

    /// Largest componentwise difference of positions and velocities.
    pub fn max_abs_diff(&self, other: &GeodesicState) -> f64 {
        self.point
            .max_abs_diff(&other.point)
            .max(self.velocity.max_abs_diff(&other.velocity))
    }
}

pub(crate) fn first_integral(point: &GroupPoint, velocity: &TangentVector) -> f64 {
    velocity.uz()
        + point
            .x()
            .iter()
            .zip(velocity.uy())
            .map(|(x, v)| x * v)
            .sum::<f64>()
}

/// An RK4 trajectory sampled at `t = 0, ±step, ..., t_end`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<GeodesicState>,
    pub spec: MetricSpec,
    pub ic: InitialConditions,
    pub step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.samples
            .last()
            .expect("trajectory always holds the initial state")
    }
}

/// The first integral `alpha = z'_0 + sum x_i(0) y_i'(0)`.
pub fn alpha(ic: &InitialConditions) -> f64 {
    first_integral(&ic.point, &ic.velocity)
}

/// Energy Lagrangian `1/2 g(v, v)` at a state.
pub fn lagrangian(spec: &MetricSpec, s: &GeodesicState) -> Result<f64> {
    Ok(0.5 * metric_eval(spec, &s.point, &s.velocity, &s.velocity)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_eval_matrix;

    fn ic(x: &[f64], y: &[f64], z: f64, v: &[f64]) -> InitialConditions {
        InitialConditions::new(
            GroupPoint::new(x.to_vec(), y.to_vec(), z).unwrap(),
            TangentVector::from_components(v).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&ic(&[5.0], &[1.0], 2.0, &[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(alpha(&ic(&[2.0], &[0.0], 0.0, &[0.0, 3.0, 1.0])), 7.0);
        assert_eq!(
            alpha(&ic(
                &[1.0, -1.0],
                &[0.0, 0.0],
                0.0,
                &[0.0, 0.0, 1.0, 1.0, 0.0]
            )),
            0.0
        );
    }

    #[test]
    fn lagrangian_examples() {
        let spec = MetricSpec::pseudo(1).unwrap();
        let zero = ic(&[0.3], &[0.1], 0.0, &[0.0, 0.0, 0.0]).state();
        assert_eq!(lagrangian(&spec, &zero).unwrap(), 0.0);
        let along_x = ic(&[0.3], &[0.1], 0.0, &[1.0, 0.0, 0.0]).state();
        assert_eq!(lagrangian(&spec, &along_x).unwrap(), -0.5);
        let null = ic(&[0.0], &[0.0], 0.0, &[1.0, 1.0, 0.0]).state();
        assert_eq!(lagrangian(&spec, &null).unwrap(), 0.0);
    }

    #[test]
    fn lagrangian_matches_the_displayed_expression() {
        let spec = MetricSpec::pseudo(2).unwrap();
        let s = ic(
            &[0.7, -1.1],
            &[0.2, 0.4],
            3.0,
            &[0.5, -0.25, 1.5, 0.75, -2.0],
        )
        .state();
        let (x, vx, vy, vz) = (
            s.point.x(),
            s.velocity.ux(),
            s.velocity.uy(),
            s.velocity.uz(),
        );
        let bracket = vz + x[0] * vy[0] + x[1] * vy[1];
        let displayed = 0.5
            * (-(vx[0] * vx[0] + vx[1] * vx[1])
                + (vy[0] * vy[0] + vy[1] * vy[1])
                + bracket * bracket);
        let l = lagrangian(&spec, &s).unwrap();
        assert!((l - displayed).abs() < 1e-14);
        let via_matrix =
            0.5 * metric_eval_matrix(&spec, &s.point, &s.velocity, &s.velocity).unwrap();
        assert!((l - via_matrix).abs() < 1e-13);
    }

    #[test]
    fn phase_vector_round_trip() {
        let s = ic(
            &[0.7, -1.1],
            &[0.2, 0.4],
            3.0,
            &[0.5, -0.25, 1.5, 0.75, -2.0],
        )
        .state();
        assert_eq!(GeodesicState::from_phase(0.0, &s.phase_vector()), s);
    }
}
