//! The 1-form `theta = sum (dx_i - dy_i)`, its kernel distribution `D`, and
//! the checks around it: total geodesy of `D`, closedness and the Frobenius
//! condition, the leaf function `f = sum (x_i - y_i)`, and the search for
//! geodesics of the Riemannian metric that leave `D`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::geodesic::{closed_form_state, integrate_geodesic, GeodesicState, InitialConditions};
use crate::group::{check_same_p, GroupPoint, TangentVector};
use crate::metric::{MetricKind, MetricSpec};
use crate::sampling::{random_point, uz_for_alpha, SeededRng};

/// Default finite-difference step for exterior derivatives.
pub const DEFAULT_FORM_FD_STEP: f64 = 1e-5;

/// Velocities with Euclidean norm below this are redrawn by the samplers.
pub const MIN_SAMPLE_SPEED: f64 = 1e-6;

/// Coefficients `(c_x, c_y, c_z)` of a covector in the cobasis `(dx_i, dy_i, dz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
}

impl Covector {
    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn components(&self) -> Vec<f64> {
        let mut out = self.x.clone();
        out.extend_from_slice(&self.y);
        out.push(self.z);
        out
    }

    fn from_components(c: &[f64]) -> Self {
        let p = (c.len() - 1) / 2;
        Self {
            x: c[..p].to_vec(),
            y: c[p..2 * p].to_vec(),
            z: c[2 * p],
        }
    }

    pub fn apply(&self, u: &TangentVector) -> f64 {
        let dx: f64 = self.x.iter().zip(u.ux()).map(|(c, v)| c * v).sum();
        let dy: f64 = self.y.iter().zip(u.uy()).map(|(c, v)| c * v).sum();
        dx + dy + self.z * u.uz()
    }

    fn is_zero(&self) -> bool {
        self.components().iter().all(|c| *c == 0.0)
    }
}

type CoefficientField = dyn Fn(&GroupPoint) -> Covector + Send + Sync;

#[derive(Clone)]
enum Coefficients {
    Constant(Covector),
    Field(Arc<CoefficientField>),
}

/// A 1-form on `H_{2p+1}`, with either constant coefficients or coefficients
/// that vary with the point.
#[derive(Clone)]
pub struct OneForm {
    p: usize,
    label: String,
    coefficients: Coefficients,
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("OneForm");
        d.field("p", &self.p).field("label", &self.label);
        match &self.coefficients {
            Coefficients::Constant(c) => d.field("coefficients", c),
            Coefficients::Field(_) => d.field("coefficients", &"<field>"),
        };
        d.finish()
    }
}

impl OneForm {
    /// Constant-coefficient form; rejected if identically zero.
    pub fn constant(label: impl Into<String>, coefficients: Covector) -> Result<Self> {
        if coefficients.p() == 0 {
            return Err(GeometryError::InvalidDimension(0));
        }
        check_same_p(coefficients.p(), coefficients.y.len())?;
        if coefficients.is_zero() {
            return Err(GeometryError::Precondition(
                "one-form is identically zero".into(),
            ));
        }
        if !coefficients.components().iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite("one-form coefficients"));
        }
        Ok(Self {
            p: coefficients.p(),
            label: label.into(),
            coefficients: Coefficients::Constant(coefficients),
        })
    }

    /// Form whose coefficients are a function of the point.
    pub fn from_fn<F>(p: usize, label: impl Into<String>, field: F) -> Result<Self>
    where
        F: Fn(&GroupPoint) -> Covector + Send + Sync + 'static,
    {
        if p == 0 {
            return Err(GeometryError::InvalidDimension(0));
        }
        let probe = field(&GroupPoint::identity(p));
        check_same_p(p, probe.p())?;
        check_same_p(p, probe.y.len())?;
        Ok(Self {
            p,
            label: label.into(),
            coefficients: Coefficients::Field(Arc::new(field)),
        })
    }

    /// `theta = sum (dx_i - dy_i)`.
    pub fn theta(p: usize) -> Self {
        assert!(p >= 1, "p must be at least 1");
        Self {
            p,
            label: "theta".into(),
            coefficients: Coefficients::Constant(Covector {
                x: vec![1.0; p],
                y: vec![-1.0; p],
                z: 0.0,
            }),
        }
    }

    /// `dx_{i+1}` (zero-based `i`).
    pub fn dx(p: usize, i: usize) -> Self {
        assert!(i < p, "index out of range");
        let mut x = vec![0.0; p];
        x[i] = 1.0;
        Self {
            p,
            label: format!("dx{}", i + 1),
            coefficients: Coefficients::Constant(Covector {
                x,
                y: vec![0.0; p],
                z: 0.0,
            }),
        }
    }

    /// The contact form `dz + sum x_i dy_i`.
    pub fn contact(p: usize) -> Self {
        assert!(p >= 1, "p must be at least 1");
        Self {
            p,
            label: "contact".into(),
            coefficients: Coefficients::Field(Arc::new(move |at: &GroupPoint| Covector {
                x: vec![0.0; at.p()],
                y: at.x().to_vec(),
                z: 1.0,
            })),
        }
    }

    /// Pointwise sum of two forms.
    pub fn sum(a: &OneForm, b: &OneForm) -> Result<Self> {
        check_same_p(a.p, b.p)?;
        let (a, b) = (a.clone(), b.clone());
        let label = format!("{}+{}", a.label, b.label);
        Self::from_fn(a.p, label, move |at| {
            let (ca, cb) = (a.at(at), b.at(at));
            let sum: Vec<f64> = ca
                .components()
                .iter()
                .zip(cb.components())
                .map(|(u, v)| u + v)
                .collect();
            Covector::from_components(&sum)
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coefficients, Coefficients::Constant(_))
    }

    /// Coefficients at `at`.
    pub fn at(&self, at: &GroupPoint) -> Covector {
        match &self.coefficients {
            Coefficients::Constant(c) => c.clone(),
            Coefficients::Field(f) => f(at),
        }
    }
}

/// `theta_at(u)`.
pub fn theta_eval(form: &OneForm, at: &GroupPoint, u: &TangentVector) -> Result<f64> {
    check_same_p(form.p, at.p())?;
    check_same_p(form.p, u.p())?;
    Ok(form.at(at).apply(u))
}

/// Factor `cosh(alpha t) + sinh(alpha t) = exp(alpha t)` by which
/// `theta(gamma')` is carried along pseudo-Riemannian geodesics.
pub fn theta_transport_factor(alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        (alpha * t).exp()
    }
}

/// Components `(d theta)_ij = d_i theta_j - d_j theta_i`, antisymmetric by
/// construction. Constant-coefficient forms give the zero matrix exactly.
pub fn exterior_derivative_fd(form: &OneForm, at: &GroupPoint, h: f64) -> Result<DMatrix<f64>> {
    check_same_p(form.p, at.p())?;
    if !(h > 0.0) {
        return Err(GeometryError::Precondition(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = 2 * form.p + 1;
    let mut d = DMatrix::zeros(n, n);
    if form.is_constant() {
        return Ok(d);
    }
    let base = at.coords();
    // jac[i][j] = d_i theta_j
    let mut jac = Vec::with_capacity(n);
    for i in 0..n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[i] += h;
        minus[i] -= h;
        let cp = form.at(&GroupPoint::from_coords(&plus)?).components();
        let cm = form.at(&GroupPoint::from_coords(&minus)?).components();
        jac.push(
            cp.iter()
                .zip(&cm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    for i in 0..n {
        for j in i + 1..n {
            let v = jac[i][j] - jac[j][i];
            d[(i, j)] = v;
            d[(j, i)] = -v;
        }
    }
    Ok(d)
}

/// Largest component of `theta ^ d theta` at `at`:
/// `(theta ^ d theta)_ijk = theta_i dtheta_jk + theta_j dtheta_ki + theta_k dtheta_ij`.
pub fn wedge_with_derivative_max(form: &OneForm, at: &GroupPoint, h: f64) -> Result<f64> {
    let d = exterior_derivative_fd(form, at, h)?;
    let c = form.at(at).components();
    let n = c.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = c[i] * d[(j, k)] + c[j] * d[(k, i)] + c[k] * d[(i, j)];
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// True iff `theta ^ d theta` vanishes within `tol` at every sample point,
/// i.e. `ker theta` is involutive there.
pub fn frobenius_involutivity_check(
    form: &OneForm,
    points: &[GroupPoint],
    h: f64,
    tol: f64,
) -> Result<bool> {
    for at in points {
        if wedge_with_derivative_max(form, at, h)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `f = sum (x_i - y_i)`; `df = theta` and the level sets of `f` are the leaves of `D`.
pub fn leaf_value(at: &GroupPoint) -> f64 {
    at.x().iter().zip(at.y()).map(|(x, y)| x - y).sum()
}

/// Adjusts one velocity component so that `form_at(u) = 0`.
///
/// Solves for `uy_1` when its coefficient is nonzero (for `theta` this is
/// `uy_1 <- ux_1 + sum_{i>=2} (ux_i - uy_i)`), otherwise for the component with
/// the largest coefficient magnitude.
pub fn project_to_kernel(
    form: &OneForm,
    at: &GroupPoint,
    u: &TangentVector,
) -> Result<TangentVector> {
    check_same_p(form.p, at.p())?;
    check_same_p(form.p, u.p())?;
    let c = form.at(at).components();
    let mut comps = u.components();
    let p = form.p;
    let pivot = if c[p] != 0.0 {
        p
    } else {
        (0..c.len())
            .max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()))
            .filter(|&k| c[k] != 0.0)
            .ok_or_else(|| GeometryError::Precondition("one-form vanishes at this point".into()))?
    };
    let rest: f64 = (0..c.len())
        .filter(|&k| k != pivot)
        .map(|k| c[k] * comps[k])
        .sum();
    comps[pivot] = -rest / c[pivot];
    TangentVector::from_components(&comps)
}

/// Random initial conditions tangent to `ker form`: point and `(ux, uy)`
/// uniform in `[-1, 1)`, projected onto the kernel, with the first integral
/// uniform in `[-alpha_bound, alpha_bound)` whenever the form does not involve
/// `dz` at the sampled point. Near-zero velocities are redrawn.
pub fn random_tangent_ic(
    form: &OneForm,
    rng: &mut SeededRng,
    alpha_bound: f64,
) -> Result<InitialConditions> {
    let p = form.p;
    loop {
        let point = random_point(rng, p, 1.0);
        let ux = rng.uniform_vec(p, -1.0, 1.0);
        let uy = rng.uniform_vec(p, -1.0, 1.0);
        let target = rng.uniform(-alpha_bound, alpha_bound);
        let uz = uz_for_alpha(&point, &uy, target);
        let raw = TangentVector::from_parts(ux, uy, uz);
        let mut velocity = project_to_kernel(form, &point, &raw)?;
        if form.at(&point).z == 0.0 {
            let uz = uz_for_alpha(&point, velocity.uy(), target);
            velocity =
                TangentVector::from_parts(velocity.ux().to_vec(), velocity.uy().to_vec(), uz);
        }
        if velocity.euclidean_norm() >= MIN_SAMPLE_SPEED {
            return InitialConditions::new(point, velocity);
        }
    }
}

/// Times `k * dt` (integer `k`) inside `[t_min, t_max]`; anchored at `t = 0`
/// so that RK4 samples line up with grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, dt: f64) -> Result<Self> {
        let grid = Self { t_min, t_max, dt };
        if grid.index_range().is_none() {
            return Err(GeometryError::Precondition(format!(
                "empty time grid [{t_min}, {t_max}] with spacing {dt}"
            )));
        }
        Ok(grid)
    }

    fn index_range(&self) -> Option<(i64, i64)> {
        let finite = self.t_min.is_finite() && self.t_max.is_finite() && self.dt.is_finite();
        if !finite || !(self.dt > 0.0) || self.t_min > self.t_max {
            return None;
        }
        let lo = (self.t_min / self.dt - 1e-9).ceil() as i64;
        let hi = (self.t_max / self.dt + 1e-9).floor() as i64;
        (lo <= hi).then_some((lo, hi))
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = self.index_range().unwrap_or((1, 0));
        lo..=hi
    }

    pub fn points(&self) -> Vec<f64> {
        self.indices().map(|k| k as f64 * self.dt).collect()
    }
}

/// Settings of [`totally_geodesic_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyConfig {
    pub n_samples: usize,
    pub grid: TimeGrid,
    pub tol: f64,
    pub seed: u64,
    /// Bound on the first integral of the sampled initial conditions.
    pub alpha_bound: f64,
    /// Upper bound on the RK4 step (Riemannian metric only); the step used
    /// divides `grid.dt`.
    pub max_rk4_step: f64,
}

impl Default for TangencyConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            grid: TimeGrid {
                t_min: -10.0,
                t_max: 10.0,
                dt: 0.1,
            },
            tol: 1e-9,
            seed: 0,
            alpha_bound: 0.5,
            max_rk4_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: MetricKind,
    pub p: usize,
    pub form: String,
    pub n_samples: usize,
    pub grid: TimeGrid,
    pub tol: f64,
    pub max_deviation: f64,
    pub worst_ic: InitialConditions,
    pub worst_t: f64,
    pub pass: bool,
}

/// Samples `n_samples` initial conditions tangent to `ker form`, follows each
/// geodesic over the grid and records the largest `|form(gamma'(t))|`.
///
/// Pseudo-Riemannian geodesics use the closed form; Riemannian ones are
/// integrated with RK4 from `t = 0` in both directions.
pub fn totally_geodesic_verify(
    spec: &MetricSpec,
    form: &OneForm,
    config: &TangencyConfig,
) -> Result<VerificationReport> {
    check_same_p(spec.p(), form.p)?;
    if config.n_samples == 0 {
        return Err(GeometryError::Precondition(
            "n_samples must be positive".into(),
        ));
    }
    let grid = TimeGrid::new(config.grid.t_min, config.grid.t_max, config.grid.dt)?;

    let per_ic: Vec<(InitialConditions, f64, f64)> = (0..config.n_samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = SeededRng::for_index(config.seed, index as u64);
            let ic = random_tangent_ic(form, &mut rng, config.alpha_bound)?;
            let (dev, t) = max_form_deviation(spec, form, &ic, &grid, config.max_rk4_step)?;
            Ok((ic, dev, t))
        })
        .collect::<Result<_>>()?;

    let (worst_ic, max_deviation, worst_t) = per_ic
        .into_iter()
        .reduce(|best, next| if next.1 > best.1 { next } else { best })
        .expect("n_samples > 0");
    Ok(VerificationReport {
        kind: spec.kind(),
        p: spec.p(),
        form: form.label.clone(),
        n_samples: config.n_samples,
        grid,
        tol: config.tol,
        max_deviation,
        worst_ic,
        worst_t,
        pass: max_deviation < config.tol,
    })
}

/// Geodesic states at every grid point.
pub fn states_on_grid(
    spec: &MetricSpec,
    ic: &InitialConditions,
    grid: &TimeGrid,
    max_rk4_step: f64,
) -> Result<Vec<GeodesicState>> {
    match spec.kind() {
        MetricKind::PseudoRiemannian => grid
            .points()
            .into_iter()
            .map(|t| closed_form_state(ic, t))
            .collect(),
        MetricKind::Riemannian => {
            let substeps = (grid.dt / max_rk4_step - 1e-9).ceil().max(1.0) as i64;
            let step = grid.dt / substeps as f64;
            let (lo, hi) = grid.indices().into_inner();
            let mut states = Vec::new();
            if lo < 0 {
                let back = integrate_geodesic(spec, ic, lo as f64 * grid.dt, step)?;
                for k in lo..=hi.min(-1) {
                    states.push(back.samples[(-k * substeps) as usize].clone());
                }
            }
            if hi >= 0 {
                let first = lo.max(0);
                if hi == 0 {
                    states.push(ic.state());
                } else {
                    let fwd = integrate_geodesic(spec, ic, hi as f64 * grid.dt, step)?;
                    for k in first..=hi {
                        states.push(fwd.samples[(k * substeps) as usize].clone());
                    }
                }
            }
            Ok(states)
        }
    }
}

fn max_form_deviation(
    spec: &MetricSpec,
    form: &OneForm,
    ic: &InitialConditions,
    grid: &TimeGrid,
    max_rk4_step: f64,
) -> Result<(f64, f64)> {
    let mut worst = (0.0_f64, 0.0_f64);
    for s in states_on_grid(spec, ic, grid, max_rk4_step)? {
        let v = theta_eval(form, &s.point, &s.velocity)?.abs();
        if v > worst.0 {
            worst = (v, s.t);
        }
    }
    Ok(worst)
}

/// A geodesic that starts tangent to `ker form` and later leaves it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub kind: MetricKind,
    pub form: String,
    pub ic: InitialConditions,
    pub t_star: f64,
    pub theta_initial: f64,
    pub theta_at_t_star: f64,
}

impl Counterexample {
    /// Recomputes both form values and checks `|theta(gamma'(0))| < tangency_tol`
    /// and `|theta(gamma'(t*))| > threshold`.
    pub fn new(
        spec: &MetricSpec,
        form: &OneForm,
        ic: InitialConditions,
        at_t_star: &GeodesicState,
        tangency_tol: f64,
        threshold: f64,
    ) -> Result<Self> {
        let theta_initial = theta_eval(form, ic.point(), ic.velocity())?;
        let theta_at_t_star = theta_eval(form, &at_t_star.point, &at_t_star.velocity)?;
        if !(theta_initial.abs() < tangency_tol) {
            return Err(GeometryError::Precondition(format!(
                "initial velocity is not tangent: |theta| = {theta_initial:e}"
            )));
        }
        if !(theta_at_t_star.abs() > threshold) {
            return Err(GeometryError::Precondition(format!(
                "|theta(gamma'(t*))| = {:e} does not exceed {threshold:e}",
                theta_at_t_star.abs()
            )));
        }
        Ok(Self {
            kind: spec.kind(),
            form: form.label.clone(),
            ic,
            t_star: at_t_star.t,
            theta_initial,
            theta_at_t_star,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_tries: usize,
    pub t_max: f64,
    pub step: f64,
    pub threshold: f64,
    pub seed: u64,
    /// Bound on the first integral of the sampled initial conditions.
    pub alpha_bound: f64,
    pub tangency_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_tries: 1000,
            t_max: 5.0,
            step: 1e-2,
            threshold: 0.1,
            seed: 0,
            alpha_bound: 1.0,
            tangency_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        tries: usize,
        witness: Counterexample,
    },
    NotFound {
        tries: usize,
    },
}

/// Integrates random `ker form`-tangent geodesics with RK4 (tries in index
/// order, each with its own seeded stream) and returns the first sample where
/// `|form(gamma'(t))|` exceeds the threshold.
pub fn counterexample_search(
    spec: &MetricSpec,
    form: &OneForm,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    check_same_p(spec.p(), form.p)?;
    if !(config.threshold > 0.0) {
        return Err(GeometryError::Precondition(format!(
            "threshold must be positive, got {}",
            config.threshold
        )));
    }
    if !(config.t_max > 0.0) {
        return Err(GeometryError::Precondition(format!(
            "t_max must be positive, got {}",
            config.t_max
        )));
    }
    for index in 0..config.n_tries {
        let mut rng = SeededRng::for_index(config.seed, index as u64);
        let ic = random_tangent_ic(form, &mut rng, config.alpha_bound)?;
        let traj = integrate_geodesic(spec, &ic, config.t_max, config.step)?;
        for s in &traj.samples {
            if theta_eval(form, &s.point, &s.velocity)?.abs() > config.threshold {
                let witness =
                    Counterexample::new(spec, form, ic, s, config.tangency_tol, config.threshold)?;
                return Ok(SearchOutcome::Found {
                    tries: index + 1,
                    witness,
                });
            }
        }
    }
    Ok(SearchOutcome::NotFound {
        tries: config.n_tries,
    })
}

/// [`counterexample_search`] for `theta` under the Riemannian metric.
pub fn riemannian_counterexample_search(
    p: usize,
    n_tries: usize,
    t_max: f64,
    step: f64,
    threshold: f64,
    seed: u64,
) -> Result<SearchOutcome> {
    let spec = MetricSpec::riemannian(p)?;
    let config = SearchConfig {
        n_tries,
        t_max,
        step,
        threshold,
        seed,
        ..SearchConfig::default()
    };
    counterexample_search(&spec, &OneForm::theta(p), &config)
}
