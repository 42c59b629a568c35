//! Exact geodesics of the pseudo-Riemannian metric.
//!
//! With `a = x'(0)`, `b = y'(0)` (per index `i`) and `u = alpha t`, the
//! velocities are the boosts
//!
//! ```text
//! x_i'(t) =  cosh(u) a_i - sinh(u) b_i
//! y_i'(t) = -sinh(u) a_i + cosh(u) b_i
//! ```
//!
//! and the positions are evaluated through the kernels
//! `S(u) = sinh(u)/u`, `C(u) = (cosh(u) - 1)/u^2`, `Q(u) = (sinh(u) - u)/u^3`:
//!
//! ```text
//! dx_i = a_i t S(u) - b_i alpha t^2 C(u)
//! dy_i = b_i t S(u) - a_i alpha t^2 C(u)
//! z    = z_0 + alpha t - sum_i [ x_i(0) dy_i + dx_i dy_i / 2 - (a_i^2 - b_i^2) alpha t^3 Q(u) / 2 ]
//! ```
//!
//! which is the displayed `1/alpha`, `1/alpha^2` formula rearranged so that
//! the singular factors cancel inside the kernels. At `alpha = 0` the
//! expressions reduce exactly to the straight-line branch.

use crate::error::{GeometryError, Result};
use crate::geodesic::{alpha, GeodesicState, InitialConditions};
use crate::group::{GroupPoint, TangentVector};

/// Largest `|alpha t|` the evaluator attempts; beyond it `cosh` overflows.
pub const MAX_ALPHA_T: f64 = 700.0;

/// Below this `|u|` the kernels `S` and `C` use their Taylor series.
const KERNEL_SERIES_CUTOFF: f64 = 1e-4;

/// `Q` loses digits to cancellation well above `KERNEL_SERIES_CUTOFF`, so its
/// series (summed to machine precision) is used on `|u| < 1`.
const Q_SERIES_CUTOFF: f64 = 1.0;

/// `sinh(u) / u`.
pub fn kernel_s(u: f64) -> f64 {
    if u.abs() < KERNEL_SERIES_CUTOFF {
        let u2 = u * u;
        1.0 + u2 / 6.0 * (1.0 + u2 / 20.0 * (1.0 + u2 / 42.0 * (1.0 + u2 / 72.0)))
    } else {
        u.sinh() / u
    }
}

/// `(cosh(u) - 1) / u^2`.
pub fn kernel_c(u: f64) -> f64 {
    if u.abs() < KERNEL_SERIES_CUTOFF {
        let u2 = u * u;
        0.5 * (1.0 + u2 / 12.0 * (1.0 + u2 / 30.0 * (1.0 + u2 / 56.0 * (1.0 + u2 / 90.0))))
    } else {
        // 2 sinh^2(u/2) / u^2 avoids the cancellation in cosh(u) - 1
        let h = (0.5 * u).sinh() / u;
        2.0 * h * h
    }
}

/// `(sinh(u) - u) / u^3`.
pub fn kernel_q(u: f64) -> f64 {
    if u.abs() < Q_SERIES_CUTOFF {
        let u2 = u * u;
        // sum_k u^{2k} / (2k+3)!
        let mut term = 1.0 / 6.0;
        let mut sum = term;
        for k in 1..20 {
            let m = (2 * k + 2) as f64 * (2 * k + 3) as f64;
            term *= u2 / m;
            sum += term;
            if term < f64::EPSILON * sum {
                break;
            }
        }
        sum
    } else {
        (u.sinh() - u) / (u * u * u)
    }
}

/// State of the geodesic with initial conditions `ic` at parameter `t`.
///
/// Geodesics are complete, so every real `t` is admissible mathematically;
/// in double precision the evaluation reports
/// [`GeometryError::RangeExceeded`] once `|alpha t| > MAX_ALPHA_T` or the
/// result (whose `z` grows like `exp(2|alpha t|)`) overflows.
pub fn closed_form_state(ic: &InitialConditions, t: f64) -> Result<GeodesicState> {
    let al = alpha(ic);
    let state = if al == 0.0 {
        straight_line_state(ic, t)
    } else {
        let u = al * t;
        if !(u.abs() <= MAX_ALPHA_T) {
            return Err(GeometryError::RangeExceeded {
                alpha_t: u.abs(),
                t,
            });
        }
        boosted_state(ic, al, t)
    };
    if state.is_finite() {
        Ok(state)
    } else {
        Err(GeometryError::RangeExceeded {
            alpha_t: (al * t).abs(),
            t,
        })
    }
}

/// Displacement `(x(t) - x_0, y(t) - y_0, z(t) - z_0)`, evaluated without
/// forming the absolute positions. For `alpha = 0` this is the straight line
/// `x = x'_0 t + x_0`, `y = y'_0 t + y_0`, `z = z_0 - sum (x_i'(0) t/2 + x_i(0)) y_i'(0) t`.
fn displacement(ic: &InitialConditions, al: f64, t: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let (p0, v0) = (ic.point(), ic.velocity());
    let p = ic.p();
    let mut dx = Vec::with_capacity(p);
    let mut dy = Vec::with_capacity(p);
    if al == 0.0 {
        let mut dz = 0.0;
        for i in 0..p {
            let (a, b, x0) = (v0.ux()[i], v0.uy()[i], p0.x()[i]);
            dx.push(a * t);
            dy.push(b * t);
            dz -= (a * t / 2.0 + x0) * b * t;
        }
        return (dx, dy, dz);
    }
    let u = al * t;
    let linear = t * kernel_s(u);
    let quadratic = al * t * t * kernel_c(u);
    let cubic = al * t * t * t * kernel_q(u);
    let mut twist = 0.0;
    for i in 0..p {
        let (a, b, x0) = (v0.ux()[i], v0.uy()[i], p0.x()[i]);
        let (ex, ey) = (a * linear - b * quadratic, b * linear - a * quadratic);
        twist += x0 * ey + 0.5 * ex * ey - 0.5 * (a * a - b * b) * cubic;
        dx.push(ex);
        dy.push(ey);
    }
    (dx, dy, al * t - twist)
}

fn translate(ic: &InitialConditions, dx: &[f64], dy: &[f64], dz: f64) -> GroupPoint {
    let p0 = ic.point();
    let x = p0.x().iter().zip(dx).map(|(x0, d)| x0 + d).collect();
    let y = p0.y().iter().zip(dy).map(|(y0, d)| y0 + d).collect();
    GroupPoint::from_parts(x, y, p0.z() + dz)
}

fn straight_line_state(ic: &InitialConditions, t: f64) -> GeodesicState {
    let v0 = ic.velocity();
    let (dx, dy, dz) = displacement(ic, 0.0, t);
    let point = translate(ic, &dx, &dy, dz);
    let uz = vertical_velocity(ic, point.x(), v0.uy());
    GeodesicState {
        t,
        point,
        velocity: TangentVector::from_parts(v0.ux().to_vec(), v0.uy().to_vec(), uz),
    }
}

fn boosted_state(ic: &InitialConditions, al: f64, t: f64) -> GeodesicState {
    let v0 = ic.velocity();
    let (ch, sh) = ((al * t).cosh(), (al * t).sinh());
    let (dx, dy, dz) = displacement(ic, al, t);
    let point = translate(ic, &dx, &dy, dz);
    let vx = v0
        .ux()
        .iter()
        .zip(v0.uy())
        .map(|(a, b)| ch * a - sh * b)
        .collect();
    let vy: Vec<f64> = v0
        .ux()
        .iter()
        .zip(v0.uy())
        .map(|(a, b)| -sh * a + ch * b)
        .collect();
    let uz = vertical_velocity(ic, point.x(), &vy);
    GeodesicState {
        t,
        point,
        velocity: TangentVector::from_parts(vx, vy, uz),
    }
}

/// `z' = alpha - sum x_i y_i'`, written as `z'_0 - sum (x_i y_i' - x_i(0) y_i'(0))`
/// so that `t = 0` reproduces `z'_0` bit for bit.
fn vertical_velocity(ic: &InitialConditions, x: &[f64], vy: &[f64]) -> f64 {
    let (p0, v0) = (ic.point(), ic.velocity());
    let drift: f64 = x
        .iter()
        .zip(vy)
        .zip(p0.x().iter().zip(v0.uy()))
        .map(|((x, vy), (x0, b))| x * vy - x0 * b)
        .sum();
    v0.uz() - drift
}

/// Position from the displayed `alpha != 0` formula, transcribed term by term
/// with its `1/alpha` and `1/alpha^2` factors. Kept as an independent
/// cross-check of [`closed_form_state`]; returns `None` for `alpha = 0`.
pub fn display_formula_position(ic: &InitialConditions, t: f64) -> Option<GroupPoint> {
    let al = alpha(ic);
    if al == 0.0 {
        return None;
    }
    let (p0, v0) = (ic.point(), ic.velocity());
    let (ch, sh) = ((al * t).cosh(), (al * t).sinh());
    let (ch2, sh2) = ((2.0 * al * t).cosh(), (2.0 * al * t).sinh());
    let a2 = al * al;
    let mut x = Vec::with_capacity(ic.p());
    let mut y = Vec::with_capacity(ic.p());
    let (mut s1, mut s2, mut s3, mut s4, mut s5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..ic.p() {
        let (a, b) = (v0.ux()[i], v0.uy()[i]);
        let (x0, y0) = (p0.x()[i], p0.y()[i]);
        x.push((sh * a - ch * b + al * x0 + b) / al);
        y.push((-ch * a + sh * b + al * y0 + a) / al);
        s1 += (al * x0 + b) * (a * ch - b * sh);
        s2 += a * b;
        s3 += a * a + b * b;
        s4 += a * a - b * b;
        s5 += a * (2.0 * al * x0 + b);
    }
    let z = s1 / a2 - s2 * ch2 / (2.0 * a2)
        + s3 * sh2 / (4.0 * a2)
        + (al - s4 / (2.0 * al)) * t
        + p0.z()
        - s5 / (2.0 * a2);
    Some(GroupPoint::from_parts(x, y, z))
}

/// Residuals of the Euler-Lagrange system along the closed-form curve:
///
/// ```text
/// x'' + w y',   y'' + w x',   z'' + sum (x_i' y_i' + x_i y_i''),   w = z' + sum x_i y_i'
/// ```
///
/// Second derivatives use the five-point central stencil (fourth order) with
/// step `fd_step` on the closed-form positions. The curve is re-anchored at
/// its state at `t` and differenced through its displacement from there, so
/// large coordinates do not feed roundoff into the stencil. First derivatives
/// come from the closed-form velocities.
/// Output order is `(x_1..x_p, y_1..y_p, z)`.
pub fn euler_lagrange_residual(ic: &InitialConditions, t: f64, fd_step: f64) -> Result<Vec<f64>> {
    if !(fd_step > 0.0) {
        return Err(GeometryError::Precondition(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let p = ic.p();
    let mid = closed_form_state(ic, t)?;
    let anchored = InitialConditions::from_parts(mid.point.clone(), mid.velocity.clone());
    let al = alpha(&anchored);
    if !((al * 2.0 * fd_step).abs() <= MAX_ALPHA_T) {
        return Err(GeometryError::RangeExceeded {
            alpha_t: (al * 2.0 * fd_step).abs(),
            t,
        });
    }
    let at = |k: f64| {
        let (mut d, dy, dz) = displacement(&anchored, al, k * fd_step);
        d.extend(dy);
        d.push(dz);
        d
    };
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    let accel: Vec<f64> = (0..2 * p + 1)
        .map(|k| (-p2[k] + 16.0 * p1[k] + 16.0 * m1[k] - m2[k]) / (12.0 * fd_step * fd_step))
        .collect();

    let (x, vx, vy) = (mid.point.x(), mid.velocity.ux(), mid.velocity.uy());
    let w = mid.first_integral();
    let mut residual = Vec::with_capacity(2 * p + 1);
    residual.extend((0..p).map(|i| accel[i] + w * vy[i]));
    residual.extend((0..p).map(|i| accel[p + i] + w * vx[i]));
    let coupling: f64 = (0..p).map(|i| vx[i] * vy[i] + x[i] * accel[p + i]).sum();
    residual.push(accel[2 * p] + coupling);
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ic(x: &[f64], y: &[f64], z: f64, v: &[f64]) -> InitialConditions {
        InitialConditions::new(
            GroupPoint::new(x.to_vec(), y.to_vec(), z).unwrap(),
            TangentVector::from_components(v).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn kernels_are_continuous_across_the_series_cutoff() {
        for &u in &[KERNEL_SERIES_CUTOFF, Q_SERIES_CUTOFF] {
            let below = u.next_down();
            let above = u;
            assert!((kernel_s(below) - kernel_s(above)).abs() < 1e-14);
            assert!((kernel_c(below) - kernel_c(above)).abs() < 1e-14);
            assert!((kernel_q(below) - kernel_q(above)).abs() < 1e-14);
        }
        assert_eq!(kernel_s(0.0), 1.0);
        assert_eq!(kernel_c(0.0), 0.5);
        assert_eq!(kernel_q(0.0), 1.0 / 6.0);
    }

    #[test]
    fn kernels_match_direct_formulas_away_from_zero() {
        for &u in &[-3.0, -0.7, 0.2, 1.5, 20.0] {
            let f: f64 = u;
            assert!((kernel_s(f) - f.sinh() / f).abs() < 1e-13 * kernel_s(f));
            assert!((kernel_c(f) - (f.cosh() - 1.0) / (f * f)).abs() < 1e-12 * kernel_c(f));
            assert!((kernel_q(f) - (f.sinh() - f) / (f * f * f)).abs() < 1e-11 * kernel_q(f));
        }
    }

    #[test]
    fn straight_line_along_x() {
        let ic = ic(&[0.0, 0.0], &[0.0, 0.0], 0.0, &[1.0, 0.0, 0.0, 0.0, 0.0]);
        for &t in &[-2.0, 0.5, 3.0] {
            let s = closed_form_state(&ic, t).unwrap();
            assert_eq!(s.point.coords(), vec![t, 0.0, 0.0, 0.0, 0.0]);
            assert_eq!(s.velocity, ic.velocity().clone());
        }
    }

    #[test]
    fn time_zero_reproduces_initial_conditions_exactly() {
        let cases = [
            ic(&[0.3], &[-0.2], 1.0, &[0.1, 0.7, -0.4]),
            ic(
                &[1.3, 0.4],
                &[-0.2, 2.0],
                -1.0,
                &[0.1, 0.7, 0.9, -0.3, 0.25],
            ),
            ic(&[1.0], &[0.0], 0.0, &[0.5, 2.0, -2.0]),
        ];
        for ic in &cases {
            let s = closed_form_state(ic, 0.0).unwrap();
            assert_eq!(&s.point, ic.point());
            assert_eq!(&s.velocity, ic.velocity());
        }
    }

    #[test]
    fn stable_form_agrees_with_display_formula() {
        let ic = ic(&[0.3, -0.8], &[0.5, 0.1], 1.2, &[0.4, -0.6, 0.9, 0.2, 0.7]);
        for &t in &[-3.0, -0.5, 0.25, 1.0, 4.0] {
            let stable = closed_form_state(&ic, t).unwrap().point;
            let display = display_formula_position(&ic, t).unwrap();
            let scale = 1.0 + display.coords().iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            assert!(stable.max_abs_diff(&display) < 1e-12 * scale, "t = {t}");
        }
    }

    #[test]
    fn velocities_are_the_boost_formulas() {
        let ic = ic(&[0.3], &[0.5], 1.2, &[0.4, 0.9, 0.7]);
        let al = alpha(&ic);
        let t = 1.7;
        let s = closed_form_state(&ic, t).unwrap();
        let (c, sh) = ((al * t).cosh(), (al * t).sinh());
        assert!((s.velocity.ux()[0] - (c * 0.4 - sh * 0.9)).abs() < 1e-15);
        assert!((s.velocity.uy()[0] - (-sh * 0.4 + c * 0.9)).abs() < 1e-15);
    }

    #[test]
    fn range_guard() {
        let ic = ic(&[0.0], &[0.0], 0.0, &[0.0, 1.0, 1.0]);
        assert!(matches!(
            closed_form_state(&ic, 1e6),
            Err(GeometryError::RangeExceeded { .. })
        ));
        // z grows like exp(2u): finite at u = 300, overflows before u = 700
        assert!(closed_form_state(&ic, 300.0).unwrap().is_finite());
        assert!(matches!(
            closed_form_state(&ic, 600.0),
            Err(GeometryError::RangeExceeded { .. })
        ));
    }

    #[test]
    fn residual_of_constant_curve_is_exactly_zero() {
        let ic = ic(&[0.3, 1.0], &[0.5, -2.0], 1.2, &[0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = euler_lagrange_residual(&ic, 0.7, 1e-4).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
        assert!(euler_lagrange_residual(&ic, 0.7, 0.0).is_err());
    }
}
