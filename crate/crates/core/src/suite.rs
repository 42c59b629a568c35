//! The property suite behind `heisenberg verify`: group laws, metric
//! structure, conservation laws, closed form against the RK4 oracle, the
//! transport of `theta`, Frobenius integrability and total geodesy of
//! `ker form`. Every check samples its inputs from the run seed, so a report
//! is reproducible bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{
    counterexample_search, frobenius_involutivity_check, leaf_value, random_tangent_ic, theta_eval,
    theta_transport_factor, totally_geodesic_verify, wedge_with_derivative_max, Covector, OneForm,
    SearchConfig, SearchOutcome, TangencyConfig, TimeGrid, VerificationReport,
    DEFAULT_FORM_FD_STEP,
};
use crate::error::{GeometryError, Result};
use crate::geodesic::christoffel::DEFAULT_METRIC_FD_STEP;
use crate::geodesic::{
    alpha, closed_form_state, euler_lagrange_residual, integrate_geodesic_with, lagrangian,
    InitialConditions, RhsPath,
};
use crate::group::{
    group_inverse, group_multiply, left_translation_differential, GroupPoint, TangentVector,
};
use crate::metric::{
    metric_eval, metric_eval_matrix, signature, MetricKind, MetricSpec, Signature,
};
use crate::sampling::{random_ic, random_point, random_vector, SeededRng};

/// Tolerances of the individual checks.
pub mod tol {
    pub const GROUP_LAWS: f64 = 1e-12;
    pub const LEFT_INVARIANCE: f64 = 1e-12;
    pub const METRIC_FORMS: f64 = 1e-13;
    /// Relative: `|L(t) - L(0)| < CONSERVATION (1 + |L(0)|)`, same for alpha.
    pub const CONSERVATION: f64 = 1e-9;
    pub const ORACLE: f64 = 1e-6;
    pub const RK4_RATIO_MIN: f64 = 12.0;
    pub const RK4_RATIO_MAX: f64 = 20.0;
    pub const ALPHA_LIMIT: f64 = 1e-6;
    pub const EULER_LAGRANGE: f64 = 1e-6;
    /// Relative: `|theta(t) - e^{alpha t} theta(0)| < TRANSPORT (1 + e^{|alpha t|})`.
    pub const TRANSPORT: f64 = 1e-9;
    pub const LEAF: f64 = 1e-8;
    pub const LEAF_GRADIENT: f64 = 1e-9;
    pub const FROBENIUS: f64 = 1e-6;
    pub const TANGENCY: f64 = 1e-9;
}

/// Step of the five-point stencil used for Euler-Lagrange residuals.
pub const EL_FD_STEP: f64 = 1e-4;

/// Bound on the first integral of sampled initial conditions.
pub const SAMPLE_ALPHA_BOUND: f64 = 0.5;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub p: usize,
    pub pass: bool,
    /// Worst observed error (or the statistic named in `detail`).
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn below(name: &str, p: usize, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            p,
            pass: value < tolerance,
            value,
            tolerance,
            detail: None,
        }
    }
}

/// Which 1-form a run examines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    Theta,
    Dx1,
    Contact,
    Custom(Covector),
}

impl FormChoice {
    pub fn build(&self, p: usize) -> Result<OneForm> {
        if p == 0 {
            return Err(GeometryError::InvalidDimension(0));
        }
        match self {
            FormChoice::Theta => Ok(OneForm::theta(p)),
            FormChoice::Dx1 => Ok(OneForm::dx(p, 0)),
            FormChoice::Contact => Ok(OneForm::contact(p)),
            FormChoice::Custom(c) => {
                if c.p() != p {
                    return Err(GeometryError::DimensionMismatch {
                        expected: p,
                        found: c.p(),
                    });
                }
                OneForm::constant("custom", c.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub kind: MetricKind,
    pub form: FormChoice,
    pub seed: u64,
    /// Random samples per sampled check.
    pub samples: usize,
    /// Tolerance of the total-geodesy check.
    pub tangency_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            kind: MetricKind::PseudoRiemannian,
            form: FormChoice::Theta,
            seed: 0,
            samples: 100,
            tangency_tol: tol::TANGENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub p: usize,
    pub kind: MetricKind,
    pub form: String,
    pub checks: Vec<CheckResult>,
    pub tangency: VerificationReport,
    /// Present when tangency fails: a search for an explicit witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSearch>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSearch {
    pub config: SearchConfig,
    #[serde(flatten)]
    pub outcome: SearchOutcome,
}

// Distinct sub-seeds so checks do not reuse each other's samples.
fn sub_seed(seed: u64, check: u64) -> u64 {
    crate::sampling::derive_seed(seed, 0x5EED_0000 + check)
}

/// Runs every check for one `p`. Checks that need the closed form are only
/// run for the pseudo-Riemannian metric.
pub fn run_suite(p: usize, config: &SuiteConfig) -> Result<SuiteReport> {
    let spec = MetricSpec::new(p, config.kind)?;
    let form = config.form.build(p)?;
    let n = config.samples.max(1);
    let seed = config.seed;

    let mut checks = vec![
        check_group_laws(p, n, sub_seed(seed, 1)),
        check_left_invariance(p, n, sub_seed(seed, 2))?,
        check_metric_forms(p, n, sub_seed(seed, 3))?,
        check_signature(&spec, 50, sub_seed(seed, 4))?,
        check_leaf_gradient(p, n, sub_seed(seed, 5)),
        check_frobenius(p, 50, sub_seed(seed, 6))?,
    ];
    if config.kind == MetricKind::PseudoRiemannian {
        checks.push(check_conservation(p, n, sub_seed(seed, 7))?);
        checks.push(check_oracle_equivalence(
            p,
            n,
            sub_seed(seed, 8),
            RhsPath::Christoffel {
                h: DEFAULT_METRIC_FD_STEP,
            },
        )?);
        if p == 1 {
            checks.push(check_rk4_convergence()?);
        }
        checks.push(check_alpha_continuity(p, sub_seed(seed, 9))?);
        checks.push(check_euler_lagrange(p, n, sub_seed(seed, 10))?);
        checks.push(check_transport(p, n, sub_seed(seed, 11))?);
        checks.push(check_leaf_constancy(p, n, sub_seed(seed, 12))?);
    }

    let tangency = totally_geodesic_verify(
        &spec,
        &form,
        &TangencyConfig {
            n_samples: n,
            tol: config.tangency_tol,
            seed: sub_seed(seed, 13),
            ..TangencyConfig::default()
        },
    )?;
    let counterexample = if tangency.pass {
        None
    } else {
        let config = SearchConfig {
            seed: sub_seed(seed, 14),
            ..SearchConfig::default()
        };
        let outcome = counterexample_search(&spec, &form, &config)?;
        Some(CounterexampleSearch { config, outcome })
    };
    let pass = tangency.pass && checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        p,
        kind: config.kind,
        form: form.label().to_string(),
        checks,
        tangency,
        counterexample,
        pass,
    })
}

/// Associativity, identity and inverse laws on random triples.
pub fn check_group_laws(p: usize, n: usize, seed: u64) -> CheckResult {
    let worst = (0..n)
        .map(|i| {
            let mut rng = SeededRng::for_index(seed, i as u64);
            let a = random_point(&mut rng, p, 2.0);
            let b = random_point(&mut rng, p, 2.0);
            let c = random_point(&mut rng, p, 2.0);
            let e = GroupPoint::identity(p);
            let mul = |u: &GroupPoint, v: &GroupPoint| group_multiply(u, v).expect("same p");
            let assoc = mul(&mul(&a, &b), &c).max_abs_diff(&mul(&a, &mul(&b, &c)));
            let ident = mul(&a, &e)
                .max_abs_diff(&a)
                .max(mul(&e, &a).max_abs_diff(&a));
            let inv = group_inverse(&a);
            let inverse = mul(&a, &inv)
                .max_abs_diff(&e)
                .max(mul(&inv, &a).max_abs_diff(&e));
            assoc.max(ident).max(inverse)
        })
        .fold(0.0, f64::max);
    CheckResult::below("group_laws", p, worst, tol::GROUP_LAWS)
}

/// `g_{a.P}(dL_a u, dL_a v) = g_P(u, v)` for both metric kinds.
pub fn check_left_invariance(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0_f64;
    for kind in [MetricKind::PseudoRiemannian, MetricKind::Riemannian] {
        let spec = MetricSpec::new(p, kind)?;
        for i in 0..n {
            let mut rng = SeededRng::for_index(seed, i as u64);
            let a = random_point(&mut rng, p, 2.0);
            let at = random_point(&mut rng, p, 2.0);
            let u = random_vector(&mut rng, p, 1.0);
            let v = random_vector(&mut rng, p, 1.0);
            let moved = group_multiply(&a, &at)?;
            let lu = left_translation_differential(&a, &at, &u)?;
            let lv = left_translation_differential(&a, &at, &v)?;
            let diff = metric_eval(&spec, &moved, &lu, &lv)? - metric_eval(&spec, &at, &u, &v)?;
            worst = worst.max(diff.abs());
        }
    }
    Ok(CheckResult::below(
        "left_invariance",
        p,
        worst,
        tol::LEFT_INVARIANCE,
    ))
}

/// Quadratic-form evaluation against `u^T G v`, both kinds.
pub fn check_metric_forms(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0_f64;
    for kind in [MetricKind::PseudoRiemannian, MetricKind::Riemannian] {
        let spec = MetricSpec::new(p, kind)?;
        for i in 0..n {
            let mut rng = SeededRng::for_index(seed, i as u64);
            let at = random_point(&mut rng, p, 2.0);
            let u = random_vector(&mut rng, p, 1.0);
            let v = random_vector(&mut rng, p, 1.0);
            let diff = metric_eval(&spec, &at, &u, &v)? - metric_eval_matrix(&spec, &at, &u, &v)?;
            worst = worst.max(diff.abs());
        }
    }
    Ok(CheckResult::below(
        "metric_forms_agree",
        p,
        worst,
        tol::METRIC_FORMS,
    ))
}

/// Signature `(p, p+1)` (pseudo) or `(0, 2p+1)` (Riemannian) at every sample.
pub fn check_signature(spec: &MetricSpec, n: usize, seed: u64) -> Result<CheckResult> {
    let p = spec.p();
    let expected = match spec.kind() {
        MetricKind::PseudoRiemannian => Signature {
            negatives: p,
            positives: p + 1,
        },
        MetricKind::Riemannian => Signature {
            negatives: 0,
            positives: 2 * p + 1,
        },
    };
    let mut mismatches = 0usize;
    for i in 0..n {
        let mut rng = SeededRng::for_index(seed, i as u64);
        let at = random_point(&mut rng, p, 5.0);
        if signature(spec, &at)? != expected {
            mismatches += 1;
        }
    }
    Ok(CheckResult {
        name: "signature".into(),
        p,
        pass: mismatches == 0,
        value: mismatches as f64,
        tolerance: 0.0,
        detail: Some(format!(
            "expected ({}, {}) at {n} points; value counts mismatches",
            expected.negatives, expected.positives
        )),
    })
}

/// Largest relative drift of the energy and of the first integral along
/// closed-form geodesics on `t in [-10, 10]`.
pub fn check_conservation(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let spec = MetricSpec::pseudo(p)?;
    let grid = TimeGrid::new(-10.0, 10.0, 0.1)?;
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_index(seed, i as u64);
            let ic = random_ic(&mut rng, p, SAMPLE_ALPHA_BOUND);
            let (l0, a0) = (lagrangian(&spec, &ic.state())?, alpha(&ic));
            let mut worst = 0.0_f64;
            for t in grid.points() {
                let s = closed_form_state(&ic, t)?;
                let dl = (lagrangian(&spec, &s)? - l0).abs() / (1.0 + l0.abs());
                let da = (s.first_integral() - a0).abs() / (1.0 + a0.abs());
                worst = worst.max(dl).max(da);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CheckResult::below(
        "conservation",
        p,
        worst,
        tol::CONSERVATION,
    ))
}

/// Sup over `t in [0, 5]` of `|closed form - RK4|` (positions and
/// velocities), RK4 step `1e-3`.
pub fn check_oracle_equivalence(
    p: usize,
    n: usize,
    seed: u64,
    path: RhsPath,
) -> Result<CheckResult> {
    let worst = oracle_sup_error(p, n, seed, path)?;
    let name = match path {
        RhsPath::Analytic => "oracle_equivalence_analytic",
        RhsPath::Christoffel { .. } => "oracle_equivalence_christoffel",
    };
    Ok(CheckResult::below(name, p, worst, tol::ORACLE))
}

pub fn oracle_sup_error(p: usize, n: usize, seed: u64, path: RhsPath) -> Result<f64> {
    let spec = MetricSpec::pseudo(p)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_index(seed, i as u64);
            let ic = random_ic(&mut rng, p, SAMPLE_ALPHA_BOUND);
            let traj = integrate_geodesic_with(&spec, &ic, 5.0, 1e-3, path)?;
            let mut worst = 0.0_f64;
            for s in &traj.samples {
                worst = worst.max(closed_form_state(&ic, s.t)?.max_abs_diff(s));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Initial conditions at the origin with velocity `(0, 1, 1)`, `alpha = 1`.
pub fn unit_alpha_ic() -> InitialConditions {
    InitialConditions::from_parts(
        GroupPoint::identity(1),
        TangentVector::from_parts(vec![0.0], vec![1.0], 1.0),
    )
}

/// Endpoint errors of RK4 against the closed form at `step` and `step / 2`.
pub fn rk4_halving_errors(ic: &InitialConditions, t_end: f64, step: f64) -> Result<(f64, f64)> {
    let spec = MetricSpec::pseudo(ic.p())?;
    let exact = closed_form_state(ic, t_end)?;
    let coarse = integrate_geodesic_with(&spec, ic, t_end, step, RhsPath::Analytic)?;
    let fine = integrate_geodesic_with(&spec, ic, t_end, step / 2.0, RhsPath::Analytic)?;
    Ok((
        coarse.last().max_abs_diff(&exact),
        fine.last().max_abs_diff(&exact),
    ))
}

/// Fourth-order convergence: endpoint error ratio under step halving.
pub fn check_rk4_convergence() -> Result<CheckResult> {
    let (coarse, fine) = rk4_halving_errors(&unit_alpha_ic(), 1.0, 0.05)?;
    let ratio = coarse / fine;
    Ok(CheckResult {
        name: "rk4_convergence_ratio".into(),
        p: 1,
        pass: (tol::RK4_RATIO_MIN..=tol::RK4_RATIO_MAX).contains(&ratio),
        value: ratio,
        tolerance: tol::RK4_RATIO_MAX,
        detail: Some(format!(
            "ratio must lie in [{}, {}]; alpha = 1, t_end = 1, step 0.05 vs 0.025",
            tol::RK4_RATIO_MIN,
            tol::RK4_RATIO_MAX
        )),
    })
}

/// Deviations of `closed_form_state(t = 1)` from the straight-line value as
/// `z'_0` is scaled by `10^-k`, `k = 1..=12`. The base point has `x(0) = 0`, so
/// `alpha = z'_0`.
pub fn alpha_limit_deviations(p: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = SeededRng::new(seed);
    let base = random_point(&mut rng, p, 1.0);
    let point = GroupPoint::new(vec![0.0; p], base.y().to_vec(), base.z())?;
    let ux = rng.uniform_vec(p, -1.0, 1.0);
    let uy = rng.uniform_vec(p, -1.0, 1.0);
    let uz = rng.uniform(0.5, 1.0);
    let limit_ic = InitialConditions::new(
        point.clone(),
        TangentVector::new(ux.clone(), uy.clone(), 0.0)?,
    )?;
    let limit = closed_form_state(&limit_ic, 1.0)?;
    (1..=12)
        .map(|k| {
            let scaled = uz * 10f64.powi(-k);
            let ic = InitialConditions::new(
                point.clone(),
                TangentVector::new(ux.clone(), uy.clone(), scaled)?,
            )?;
            Ok(closed_form_state(&ic, 1.0)?.max_abs_diff(&limit))
        })
        .collect()
}

pub fn check_alpha_continuity(p: usize, seed: u64) -> Result<CheckResult> {
    let devs = alpha_limit_deviations(p, seed)?;
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    let last = *devs.last().expect("twelve scales");
    Ok(CheckResult {
        name: "alpha_limit_continuity".into(),
        p,
        pass: monotone && last < tol::ALPHA_LIMIT,
        value: last,
        tolerance: tol::ALPHA_LIMIT,
        detail: Some(format!(
            "deviation at k = 12; monotone decrease: {monotone}"
        )),
    })
}

/// Euler-Lagrange residuals of the closed form at `t in {-2, 0.5, 3}`.
pub fn check_euler_lagrange(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut rng = SeededRng::for_index(seed, i as u64);
        let ic = random_ic(&mut rng, p, SAMPLE_ALPHA_BOUND);
        for t in [-2.0, 0.5, 3.0] {
            let r = euler_lagrange_residual(&ic, t, EL_FD_STEP)?;
            worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(CheckResult::below(
        "euler_lagrange_residual",
        p,
        worst,
        tol::EULER_LAGRANGE,
    ))
}

/// `theta(gamma'(t)) = e^{alpha t} theta(gamma'(0))` for generic initial conditions.
pub fn check_transport(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let theta = OneForm::theta(p);
    let grid = TimeGrid::new(-5.0, 5.0, 0.1)?;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut rng = SeededRng::for_index(seed, i as u64);
        let ic = random_ic(&mut rng, p, SAMPLE_ALPHA_BOUND);
        let a = alpha(&ic);
        let theta0 = theta_eval(&theta, ic.point(), ic.velocity())?;
        for t in grid.points() {
            let s = closed_form_state(&ic, t)?;
            let observed = theta_eval(&theta, &s.point, &s.velocity)?;
            let predicted = theta_transport_factor(a, t) * theta0;
            let scale = 1.0 + (a * t).abs().exp();
            worst = worst.max((observed - predicted).abs() / scale);
        }
    }
    Ok(CheckResult::below(
        "theta_transport",
        p,
        worst,
        tol::TRANSPORT,
    ))
}

/// `f = sum (x_i - y_i)` stays constant along geodesics tangent to `ker theta`.
pub fn check_leaf_constancy(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let theta = OneForm::theta(p);
    let grid = TimeGrid::new(-10.0, 10.0, 0.1)?;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut rng = SeededRng::for_index(seed, i as u64);
        let ic = random_tangent_ic(&theta, &mut rng, SAMPLE_ALPHA_BOUND)?;
        let f0 = leaf_value(ic.point());
        for t in grid.points() {
            worst = worst.max((leaf_value(&closed_form_state(&ic, t)?.point) - f0).abs());
        }
    }
    Ok(CheckResult::below("leaf_constancy", p, worst, tol::LEAF))
}

/// Finite-difference gradient of the leaf function against `theta`'s coefficients.
pub fn check_leaf_gradient(p: usize, n: usize, seed: u64) -> CheckResult {
    let expected = OneForm::theta(p).at(&GroupPoint::identity(p)).components();
    let h = DEFAULT_FORM_FD_STEP;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut rng = SeededRng::for_index(seed, i as u64);
        let base = random_point(&mut rng, p, 2.0).coords();
        for (l, want) in expected.iter().enumerate() {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[l] += h;
            minus[l] -= h;
            let fp = leaf_value(&GroupPoint::from_coords(&plus).expect("finite"));
            let fm = leaf_value(&GroupPoint::from_coords(&minus).expect("finite"));
            worst = worst.max(((fp - fm) / (2.0 * h) - want).abs());
        }
    }
    CheckResult::below("leaf_gradient_is_theta", p, worst, tol::LEAF_GRADIENT)
}

/// `theta` is closed and passes the Frobenius test; the contact form fails it.
pub fn check_frobenius(p: usize, n: usize, seed: u64) -> Result<CheckResult> {
    let points: Vec<GroupPoint> = (0..n)
        .map(|i| random_point(&mut SeededRng::for_index(seed, i as u64), p, 2.0))
        .collect();
    let h = DEFAULT_FORM_FD_STEP;
    let theta_ok = frobenius_involutivity_check(&OneForm::theta(p), &points, h, tol::FROBENIUS)?;
    let contact_ok =
        frobenius_involutivity_check(&OneForm::contact(p), &points, h, tol::FROBENIUS)?;
    let theta_wedge = points
        .iter()
        .map(|at| wedge_with_derivative_max(&OneForm::theta(p), at, h))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CheckResult {
        name: "frobenius".into(),
        p,
        pass: theta_ok && !contact_ok,
        value: theta_wedge,
        tolerance: tol::FROBENIUS,
        detail: Some(format!(
            "theta involutive: {theta_ok}; contact form involutive: {contact_ok}"
        )),
    })
}
