//! Geodesic ODE right-hand sides and a fixed-step classical RK4 integrator.

use crate::error::{GeometryError, Result};
use crate::geodesic::christoffel::{christoffel_fd, DEFAULT_METRIC_FD_STEP};
use crate::geodesic::{GeodesicState, InitialConditions, Trajectory};
use crate::group::{check_same_p, GroupPoint, TangentVector};
use crate::metric::{MetricKind, MetricSpec};

/// How the acceleration of a geodesic is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsPath {
    /// The Euler-Lagrange system of the pseudo-Riemannian metric, in closed form.
    Analytic,
    /// `-Gamma^k_ij v^i v^j` with finite-difference Christoffel symbols of step `h`.
    Christoffel { h: f64 },
}

impl RhsPath {
    /// Analytic for the pseudo-Riemannian metric; Christoffel otherwise.
    pub fn default_for(kind: MetricKind) -> Self {
        match kind {
            MetricKind::PseudoRiemannian => RhsPath::Analytic,
            MetricKind::Riemannian => RhsPath::Christoffel {
                h: DEFAULT_METRIC_FD_STEP,
            },
        }
    }
}

/// Time derivative of `(point, velocity)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub velocity: TangentVector,
    pub acceleration: TangentVector,
}

pub fn geodesic_ode_rhs(
    spec: &MetricSpec,
    s: &GeodesicState,
    path: RhsPath,
) -> Result<StateDerivative> {
    check_same_p(spec.p(), s.point.p())?;
    check_same_p(spec.p(), s.velocity.p())?;
    let n = spec.dim();
    let mut out = vec![0.0; 2 * n];
    phase_rhs(spec, &s.phase_vector(), path, &mut out)?;
    Ok(StateDerivative {
        velocity: s.velocity.clone(),
        acceleration: TangentVector::from_components(&out[n..])?,
    })
}

/// `d/dt (q, v) = (v, a(q, v))` on the flattened phase vector.
fn phase_rhs(spec: &MetricSpec, phase: &[f64], path: RhsPath, out: &mut [f64]) -> Result<()> {
    let n = spec.dim();
    let (q, v) = phase.split_at(n);
    out[..n].copy_from_slice(v);
    match path {
        RhsPath::Analytic => {
            if spec.kind() != MetricKind::PseudoRiemannian {
                return Err(GeometryError::Precondition(
                    "the analytic right-hand side exists only for the pseudo-Riemannian metric"
                        .into(),
                ));
            }
            analytic_acceleration(spec.p(), q, v, &mut out[n..]);
        }
        RhsPath::Christoffel { h } => {
            let gamma = christoffel_fd(spec, &GroupPoint::from_coords(q)?, h)?;
            out[n..].copy_from_slice(&gamma.acceleration(v));
        }
    }
    Ok(())
}

/// `x'' = -w y'`, `y'' = -w x'`, `z'' = -sum (x_i' y_i' + x_i y_i'')`.
fn analytic_acceleration(p: usize, q: &[f64], v: &[f64], acc: &mut [f64]) {
    let (x, vx, vy, vz) = (&q[..p], &v[..p], &v[p..2 * p], v[2 * p]);
    let w = vz + x.iter().zip(vy).map(|(a, b)| a * b).sum::<f64>();
    let mut coupling = 0.0;
    for i in 0..p {
        let ay = -w * vx[i];
        acc[i] = -w * vy[i];
        acc[p + i] = ay;
        coupling += vx[i] * vy[i] + x[i] * ay;
    }
    acc[2 * p] = -coupling;
}

/// Sample times `0, h, 2h, ..., t_end` of a trajectory, with the step shrunk to
/// `h = |t_end| / n`, `n = ceil(|t_end| / step)`, so the grid lands on `t_end`.
pub fn sample_times(t_end: f64, step: f64) -> Result<Vec<f64>> {
    let (steps, signed_h) = grid(t_end, step)?;
    Ok((0..=steps)
        .map(|n| {
            if n == steps {
                t_end
            } else {
                n as f64 * signed_h
            }
        })
        .collect())
}

fn grid(t_end: f64, step: f64) -> Result<(usize, f64)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(GeometryError::Precondition(format!(
            "step must be positive, got {step}"
        )));
    }
    if t_end == 0.0 || !t_end.is_finite() {
        return Err(GeometryError::Precondition(format!(
            "t_end must be finite and nonzero, got {t_end}"
        )));
    }
    let steps = ((t_end.abs() / step) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, (t_end.abs() / steps as f64).copysign(t_end)))
}

/// RK4 with the default right-hand side for `spec`'s metric kind.
pub fn integrate_geodesic(
    spec: &MetricSpec,
    ic: &InitialConditions,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_geodesic_with(spec, ic, t_end, step, RhsPath::default_for(spec.kind()))
}

/// Classical RK4 from `t = 0` to `t_end` (negative integrates backward), sampled
/// on [`sample_times`]; `Trajectory::step` records the step actually used.
pub fn integrate_geodesic_with(
    spec: &MetricSpec,
    ic: &InitialConditions,
    t_end: f64,
    step: f64,
    path: RhsPath,
) -> Result<Trajectory> {
    check_same_p(spec.p(), ic.p())?;
    let (steps, signed_h) = grid(t_end, step)?;
    let h = signed_h.abs();

    let dim = 2 * spec.dim();
    let mut y = ic.state().phase_vector();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(ic.state());

    for n in 1..=steps {
        phase_rhs(spec, &y, path, &mut k1)?;
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * signed_h * k1[i];
        }
        phase_rhs(spec, &tmp, path, &mut k2)?;
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * signed_h * k2[i];
        }
        phase_rhs(spec, &tmp, path, &mut k3)?;
        for i in 0..dim {
            tmp[i] = y[i] + signed_h * k3[i];
        }
        phase_rhs(spec, &tmp, path, &mut k4)?;
        for i in 0..dim {
            y[i] += signed_h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = if n == steps {
            t_end
        } else {
            n as f64 * signed_h
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteState { t });
        }
        samples.push(GeodesicState::from_phase(t, &y));
    }

    Ok(Trajectory {
        samples,
        spec: *spec,
        ic: ic.clone(),
        step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: &[f64], y: &[f64], z: f64, v: &[f64]) -> GeodesicState {
        GeodesicState {
            t: 0.0,
            point: GroupPoint::new(x.to_vec(), y.to_vec(), z).unwrap(),
            velocity: TangentVector::from_components(v).unwrap(),
        }
    }

    #[test]
    fn zero_velocity_means_zero_acceleration() {
        let s = state(&[0.4, -1.0], &[0.3, 0.2], 1.0, &[0.0; 5]);
        let spec = MetricSpec::pseudo(2).unwrap();
        for path in [RhsPath::Analytic, RhsPath::Christoffel { h: 1e-5 }] {
            let d = geodesic_ode_rhs(&spec, &s, path).unwrap();
            assert!(d.acceleration.components().iter().all(|a| *a == 0.0));
        }
    }

    #[test]
    fn riemannian_vertical_line_is_unaccelerated() {
        let s = state(&[0.7], &[-0.3], 0.5, &[0.0, 0.0, 1.0]);
        let spec = MetricSpec::riemannian(1).unwrap();
        let d = geodesic_ode_rhs(&spec, &s, RhsPath::default_for(spec.kind())).unwrap();
        assert!(d.acceleration.components().iter().all(|a| a.abs() < 1e-9));
    }

    #[test]
    fn analytic_path_is_pseudo_only() {
        let s = state(&[0.7], &[-0.3], 0.5, &[0.0, 0.0, 1.0]);
        let spec = MetricSpec::riemannian(1).unwrap();
        assert!(geodesic_ode_rhs(&spec, &s, RhsPath::Analytic).is_err());
    }

    #[test]
    fn trajectory_times_are_uniform_and_hit_the_endpoint() {
        let spec = MetricSpec::pseudo(1).unwrap();
        let ic = InitialConditions::new(GroupPoint::identity(1), TangentVector::d_y(1, 0)).unwrap();
        let traj = integrate_geodesic(&spec, &ic, -0.35, 0.1).unwrap();
        assert_eq!(traj.samples.len(), 5);
        assert_eq!(traj.last().t, -0.35);
        for (n, s) in traj.samples.iter().enumerate() {
            assert!((s.t + n as f64 * traj.step).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let spec = MetricSpec::pseudo(1).unwrap();
        let ic = InitialConditions::new(GroupPoint::identity(1), TangentVector::d_y(1, 0)).unwrap();
        assert!(integrate_geodesic(&spec, &ic, 0.0, 0.1).is_err());
        assert!(integrate_geodesic(&spec, &ic, 1.0, 0.0).is_err());
        assert!(integrate_geodesic(&spec, &ic, 1.0, -0.1).is_err());
        assert!(integrate_geodesic(&MetricSpec::pseudo(2).unwrap(), &ic, 1.0, 0.1).is_err());
    }
}
