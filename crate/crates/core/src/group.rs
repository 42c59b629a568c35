//! Points and tangent vectors of the Heisenberg group `H_{2p+1}` in global
//! coordinates `(x_1..x_p, y_1..y_p, z)`, with the group product
//!
//! ```text
//! (x, y, z) . (x~, y~, z~) = (x + x~, y + y~, z + z~ - sum_i x_i y~_i)
//! ```
//!
//! Every matrix and vector in the crate uses the basis order
//! `(x_1..x_p, y_1..y_p, z)`.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

fn check_finite(values: impl IntoIterator<Item = f64>, what: &'static str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite(what))
    }
}

pub(crate) fn check_same_p(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

/// A point `(x, y, z)` of `H_{2p+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    x: Vec<f64>,
    y: Vec<f64>,
    z: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(GeometryError::InvalidDimension(0));
        }
        check_same_p(x.len(), y.len())?;
        check_finite(x.iter().chain(y.iter()).copied().chain([z]), "group point")?;
        Ok(Self { x, y, z })
    }

    /// The identity element, the origin of `R^{2p+1}`.
    pub fn identity(p: usize) -> Self {
        assert!(p >= 1, "p must be at least 1");
        Self {
            x: vec![0.0; p],
            y: vec![0.0; p],
            z: 0.0,
        }
    }

    /// Builds a point from its `2p+1` coordinates in basis order.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len().is_multiple_of(2) {
            return Err(GeometryError::Precondition(format!(
                "expected 2p+1 coordinates with p >= 1, got {}",
                coords.len()
            )));
        }
        let p = (coords.len() - 1) / 2;
        Self::new(
            coords[..p].to_vec(),
            coords[p..2 * p].to_vec(),
            coords[2 * p],
        )
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.p() + 1);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.y);
        out.push(self.z);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &GroupPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Unchecked constructor for values produced internally from finite data.
    pub(crate) fn from_parts(x: Vec<f64>, y: Vec<f64>, z: f64) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self { x, y, z }
    }
}

/// A tangent vector `(ux, uy, uz)` in the coordinate basis `{d/dx_i, d/dy_i, d/dz}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    ux: Vec<f64>,
    uy: Vec<f64>,
    uz: f64,
}

impl TangentVector {
    pub fn new(ux: Vec<f64>, uy: Vec<f64>, uz: f64) -> Result<Self> {
        if ux.is_empty() {
            return Err(GeometryError::InvalidDimension(0));
        }
        check_same_p(ux.len(), uy.len())?;
        check_finite(
            ux.iter().chain(uy.iter()).copied().chain([uz]),
            "tangent vector",
        )?;
        Ok(Self { ux, uy, uz })
    }

    pub fn zero(p: usize) -> Self {
        assert!(p >= 1, "p must be at least 1");
        Self {
            ux: vec![0.0; p],
            uy: vec![0.0; p],
            uz: 0.0,
        }
    }

    /// The coordinate vector field `d/dx_i` (zero-based `i`).
    pub fn d_x(p: usize, i: usize) -> Self {
        let mut v = Self::zero(p);
        v.ux[i] = 1.0;
        v
    }

    /// The coordinate vector field `d/dy_i` (zero-based `i`).
    pub fn d_y(p: usize, i: usize) -> Self {
        let mut v = Self::zero(p);
        v.uy[i] = 1.0;
        v
    }

    pub fn d_z(p: usize) -> Self {
        let mut v = Self::zero(p);
        v.uz = 1.0;
        v
    }

    pub fn from_components(components: &[f64]) -> Result<Self> {
        let point = GroupPoint::from_coords(components)?;
        Ok(Self {
            ux: point.x,
            uy: point.y,
            uz: point.z,
        })
    }

    pub fn p(&self) -> usize {
        self.ux.len()
    }

    pub fn ux(&self) -> &[f64] {
        &self.ux
    }

    pub fn uy(&self) -> &[f64] {
        &self.uy
    }

    pub fn uz(&self) -> f64 {
        self.uz
    }

    pub fn components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.p() + 1);
        out.extend_from_slice(&self.ux);
        out.extend_from_slice(&self.uy);
        out.push(self.uz);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.components().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &TangentVector) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_parts(ux: Vec<f64>, uy: Vec<f64>, uz: f64) -> Self {
        debug_assert_eq!(ux.len(), uy.len());
        Self { ux, uy, uz }
    }
}

/// The group product `a . b`.
pub fn group_multiply(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    check_same_p(a.p(), b.p())?;
    let x = a.x.iter().zip(&b.x).map(|(u, v)| u + v).collect();
    let y = a.y.iter().zip(&b.y).map(|(u, v)| u + v).collect();
    let twist: f64 = a.x.iter().zip(&b.y).map(|(ax, by)| ax * by).sum();
    Ok(GroupPoint::from_parts(x, y, a.z + b.z - twist))
}

/// The unique `b` with `a . b = identity`.
pub fn group_inverse(a: &GroupPoint) -> GroupPoint {
    let twist: f64 = a.x.iter().zip(&a.y).map(|(x, y)| x * y).sum();
    GroupPoint::from_parts(
        a.x.iter().map(|v| -v).collect(),
        a.y.iter().map(|v| -v).collect(),
        -a.z - twist,
    )
}

/// Pushforward of `u` (based at `at`) under the left translation `P -> a . P`.
///
/// The product is affine in its right factor, so the differential does not
/// depend on the base point: only `uz` picks up `-sum_i a.x_i uy_i`.
pub fn left_translation_differential(
    a: &GroupPoint,
    at: &GroupPoint,
    u: &TangentVector,
) -> Result<TangentVector> {
    check_same_p(a.p(), at.p())?;
    check_same_p(a.p(), u.p())?;
    let shear: f64 = a.x.iter().zip(&u.uy).map(|(ax, uy)| ax * uy).sum();
    Ok(TangentVector::from_parts(
        u.ux.clone(),
        u.uy.clone(),
        u.uz - shear,
    ))
}
