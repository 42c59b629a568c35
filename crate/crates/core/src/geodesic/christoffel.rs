//! Levi-Civita connection coefficients from finite differences of the metric:
//!
//! ```text
//! Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
//! ```
//!
//! Metric derivatives use central differences of [`metric_components`], with
//! the step scaled by the coordinate magnitude once it exceeds 1.
//! Nothing here relies on the structure of the Heisenberg metrics, so the
//! result is an independent route to the geodesic equations.

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::group::GroupPoint;
use crate::metric::{metric_components, MetricSpec};

/// Default metric-derivative step.
pub const DEFAULT_METRIC_FD_STEP: f64 = 1e-5;

/// `Gamma^k_ij` for a manifold of dimension `n`, stored `k`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// Geodesic acceleration `-Gamma^k_ij v^i v^j`.
    pub fn acceleration(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let block = &self.data[k * n * n..(k + 1) * n * n];
                let mut acc = 0.0;
                for i in 0..n {
                    let row = &block[i * n..(i + 1) * n];
                    acc += v[i] * row.iter().zip(v).map(|(g, vj)| g * vj).sum::<f64>();
                }
                -acc
            })
            .collect()
    }

    /// `max |Gamma^k_ij - Gamma^k_ji|`.
    pub fn max_lower_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Step along a coordinate of magnitude `q`: `h` for `|q| <= 1`, `h |q|` beyond.
fn scaled_step(h: f64, q: f64) -> f64 {
    h * q.abs().max(1.0)
}

pub fn christoffel_fd(spec: &MetricSpec, at: &GroupPoint, h: f64) -> Result<Christoffel> {
    if !(h > 0.0) {
        return Err(GeometryError::Precondition(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = spec.dim();
    let g = metric_components(spec, at)?;
    let g_inv = g.try_inverse().ok_or(GeometryError::SingularMetric)?;

    let base = at.coords();
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for l in 0..n {
        let hl = scaled_step(h, base[l]);
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[l] += hl;
        minus[l] -= hl;
        let gp = metric_components(spec, &GroupPoint::from_coords(&plus)?)?;
        let gm = metric_components(spec, &GroupPoint::from_coords(&minus)?)?;
        dg.push((gp - gm) / (plus[l] - minus[l]));
    }

    // first-kind symbols [ij, l], lower indices symmetric
    let mut data = vec![0.0; n * n * n];
    let mut first_kind = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            for (l, slot) in first_kind.iter_mut().enumerate() {
                *slot = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
            for k in 0..n {
                let value: f64 = (0..n).map(|l| g_inv[(k, l)] * first_kind[l]).sum();
                data[(k * n + i) * n + j] = value;
                data[(k * n + j) * n + i] = value;
            }
        }
    }
    Ok(Christoffel { dim: n, data })
}
