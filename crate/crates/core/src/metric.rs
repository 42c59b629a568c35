//! The two left-invariant metrics on `H_{2p+1}`:
//!
//! ```text
//! pseudo-Riemannian:  g = -sum (dx_i)^2 + sum (dy_i)^2 + (dz + sum x_i dy_i)^2
//! Riemannian:         g = +sum (dx_i)^2 + sum (dy_i)^2 + (dz + sum x_i dy_i)^2
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::group::{check_same_p, GroupPoint, TangentVector};

/// Relative eigenvalue threshold below which the metric is reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Index `p`: the `dx_i` directions are timelike.
    PseudoRiemannian,
    /// Positive definite sibling, used for the contrast with the Riemannian case.
    Riemannian,
}

impl MetricKind {
    /// Sign in front of `sum (dx_i)^2`.
    pub fn x_sign(self) -> f64 {
        match self {
            MetricKind::PseudoRiemannian => -1.0,
            MetricKind::Riemannian => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    p: usize,
    kind: MetricKind,
}

impl MetricSpec {
    pub fn new(p: usize, kind: MetricKind) -> Result<Self> {
        if p == 0 {
            return Err(GeometryError::InvalidDimension(p));
        }
        Ok(Self { p, kind })
    }

    pub fn pseudo(p: usize) -> Result<Self> {
        Self::new(p, MetricKind::PseudoRiemannian)
    }

    pub fn riemannian(p: usize) -> Result<Self> {
        Self::new(p, MetricKind::Riemannian)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    /// Manifold dimension `2p + 1`.
    pub fn dim(&self) -> usize {
        2 * self.p + 1
    }
}

/// Metric components `g_ij` at `at`, basis order `(x_1..x_p, y_1..y_p, z)`.
pub fn metric_components(spec: &MetricSpec, at: &GroupPoint) -> Result<DMatrix<f64>> {
    check_same_p(spec.p, at.p())?;
    let p = spec.p;
    let n = spec.dim();
    let zi = 2 * p;
    let x = at.x();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..p {
        g[(i, i)] = spec.kind.x_sign();
        for j in 0..p {
            g[(p + i, p + j)] = x[i] * x[j];
        }
        g[(p + i, p + i)] += 1.0;
        g[(p + i, zi)] = x[i];
        g[(zi, p + i)] = x[i];
    }
    g[(zi, zi)] = 1.0;
    Ok(g)
}

/// `g_at(u, v)` from the quadratic-form expression of the metric.
pub fn metric_eval(
    spec: &MetricSpec,
    at: &GroupPoint,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    check_same_p(spec.p, at.p())?;
    check_same_p(spec.p, u.p())?;
    check_same_p(spec.p, v.p())?;
    let x = at.x();
    let dx: f64 = u.ux().iter().zip(v.ux()).map(|(a, b)| a * b).sum();
    let dy: f64 = u.uy().iter().zip(v.uy()).map(|(a, b)| a * b).sum();
    let vertical = |w: &TangentVector| -> f64 {
        w.uz() + x.iter().zip(w.uy()).map(|(xi, wy)| xi * wy).sum::<f64>()
    };
    Ok(spec.kind.x_sign() * dx + dy + vertical(u) * vertical(v))
}

/// `g_at(u, v)` as `u^T G v` with `G = metric_components(spec, at)`.
pub fn metric_eval_matrix(
    spec: &MetricSpec,
    at: &GroupPoint,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    check_same_p(spec.p, u.p())?;
    check_same_p(spec.p, v.p())?;
    let g = metric_components(spec, at)?;
    let u = nalgebra::DVector::from_vec(u.components());
    let v = nalgebra::DVector::from_vec(v.components());
    Ok(u.dot(&(g * v)))
}

/// Counts of negative and positive eigenvalues of the metric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub negatives: usize,
    pub positives: usize,
}

pub fn signature(spec: &MetricSpec, at: &GroupPoint) -> Result<Signature> {
    let g = metric_components(spec, at)?;
    let eig = SymmetricEigen::new(g);
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let threshold = DEGENERACY_TOLERANCE * scale;
    let mut sig = Signature {
        negatives: 0,
        positives: 0,
    };
    for &lambda in eig.eigenvalues.iter() {
        if lambda.abs() < threshold || !lambda.is_finite() {
            return Err(GeometryError::DegenerateMetric {
                eigenvalue: lambda,
                threshold,
            });
        }
        if lambda < 0.0 {
            sig.negatives += 1;
        } else {
            sig.positives += 1;
        }
    }
    Ok(sig)
}
