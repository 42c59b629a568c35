use heisenberg_core::geodesic::christoffel::DEFAULT_METRIC_FD_STEP;
use heisenberg_core::suite::{run_suite, SuiteConfig, SuiteReport};
use heisenberg_core::{
    alpha, christoffel_fd, closed_form_state, counterexample_search, integrate_geodesic,
    lagrangian, metric_components, sample_times, signature, theta_eval, GroupPoint, MetricKind,
    MetricSpec, SearchConfig, SearchOutcome, Signature,
};
use serde::Serialize;

use crate::config::{default_ic, parse_ic, parse_point, Format, Options, Oracle};
use crate::error::{CliError, Context};
use crate::output::{emit, json, trace_csv, TraceRow};

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
    NotFound,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 3,
            Outcome::NotFound => 4,
        }
    }
}

fn json_only(opts: &Options) -> Result<(), CliError> {
    match opts.format {
        Some(Format::Csv) => Err(CliError::config(
            "--format",
            "this command writes JSON only",
        )),
        _ => Ok(()),
    }
}

pub fn trace(opts: &Options) -> Result<Outcome, CliError> {
    let p = opts.p()?;
    let kind = opts.kind_or(MetricKind::PseudoRiemannian);
    let spec = MetricSpec::new(p, kind).field("--p")?;
    let ic = match &opts.ic {
        Some(raw) => parse_ic(raw, p)?,
        None => default_ic(p),
    };
    let t_end = opts.t_end.unwrap_or(1.0);
    if t_end == 0.0 || !t_end.is_finite() {
        return Err(CliError::config(
            "--t-end",
            format!("must be finite and nonzero, got {t_end}"),
        ));
    }
    let step = Options::positive(opts.step, 1e-3, "--step")?;
    let oracle = opts.oracle.unwrap_or(match kind {
        MetricKind::PseudoRiemannian => Oracle::Closed,
        MetricKind::Riemannian => Oracle::Rk4,
    });
    let form = opts.form(p)?.build(p).field("--form")?;

    let states = match oracle {
        Oracle::Closed => {
            if kind == MetricKind::Riemannian {
                return Err(CliError::config(
                    "--oracle",
                    "the closed form exists only for the pseudo-Riemannian metric; use rk4",
                ));
            }
            sample_times(t_end, step)
                .field("--step")?
                .into_iter()
                .map(|t| closed_form_state(&ic, t))
                .collect::<Result<Vec<_>, _>>()
                .field("--t-end")?
        }
        Oracle::Rk4 => {
            integrate_geodesic(&spec, &ic, t_end, step)
                .field("--t-end")?
                .samples
        }
    };

    let a0 = alpha(&ic);
    let rows = states
        .iter()
        .map(|s| {
            let theta = theta_eval(&form, &s.point, &s.velocity)?;
            let energy = lagrangian(&spec, s)?;
            Ok(TraceRow::new(s, theta, energy, s.first_integral() - a0))
        })
        .collect::<Result<Vec<_>, _>>()
        .field("--ic")?;
    let content = match opts.format.unwrap_or(Format::Csv) {
        Format::Csv => trace_csv(p, &rows),
        Format::Json => json(&rows),
    };
    emit(opts.out.as_deref(), &content)?;
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    pass: bool,
    kind: MetricKind,
    seed: u64,
    samples: usize,
    reports: Vec<SuiteReport>,
}

pub fn verify(opts: &Options) -> Result<Outcome, CliError> {
    json_only(opts)?;
    let dims: Vec<usize> = match opts.p {
        Some(_) => vec![opts.p()?],
        None => vec![1, 2, 3],
    };
    let defaults = SuiteConfig::default();
    let samples = opts.samples.unwrap_or(defaults.samples);
    if samples == 0 {
        return Err(CliError::config("--samples", "must be at least 1"));
    }
    let kind = opts.kind_or(MetricKind::PseudoRiemannian);
    let mut reports = Vec::with_capacity(dims.len());
    for &p in &dims {
        let config = SuiteConfig {
            kind,
            form: opts.form(p)?,
            seed: opts.seed.unwrap_or(defaults.seed),
            samples,
            tangency_tol: Options::positive(opts.tol, defaults.tangency_tol, "--tol")?,
        };
        reports.push(run_suite(p, &config).field("--form")?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let out = VerifyOutput {
        pass,
        kind,
        seed: opts.seed.unwrap_or(defaults.seed),
        samples,
        reports,
    };
    emit(opts.out.as_deref(), &json(&out))?;
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

#[derive(Debug, Serialize)]
struct SearchOutput {
    p: usize,
    kind: MetricKind,
    form: String,
    seed: u64,
    max_tries: usize,
    t_max: f64,
    step: f64,
    threshold: f64,
    tangency_tol: f64,
    outcome: SearchOutcome,
}

pub fn search(opts: &Options) -> Result<Outcome, CliError> {
    json_only(opts)?;
    if opts.kind_or(MetricKind::Riemannian) != MetricKind::Riemannian {
        return Err(CliError::config(
            "--kind",
            "search looks for Riemannian counterexamples; use verify for the pseudo-Riemannian claim",
        ));
    }
    let p = opts.p()?;
    let spec = MetricSpec::riemannian(p).field("--p")?;
    let form = opts.form(p)?.build(p).field("--form")?;
    let d = SearchConfig::default();
    let config = SearchConfig {
        n_tries: opts.tries.unwrap_or(d.n_tries),
        t_max: Options::positive(opts.t_max, d.t_max, "--t-max")?,
        step: Options::positive(opts.step, d.step, "--step")?,
        threshold: Options::positive(opts.threshold, d.threshold, "--threshold")?,
        seed: opts.seed.unwrap_or(d.seed),
        tangency_tol: Options::positive(opts.tol, d.tangency_tol, "--tol")?,
        ..d
    };
    let outcome = counterexample_search(&spec, &form, &config).field("--step")?;
    let found = matches!(outcome, SearchOutcome::Found { .. });
    let out = SearchOutput {
        p,
        kind: MetricKind::Riemannian,
        form: form.label().to_string(),
        seed: config.seed,
        max_tries: config.n_tries,
        t_max: config.t_max,
        step: config.step,
        threshold: config.threshold,
        tangency_tol: config.tangency_tol,
        outcome,
    };
    emit(opts.out.as_deref(), &json(&out))?;
    Ok(if found {
        Outcome::Success
    } else {
        Outcome::NotFound
    })
}

#[derive(Debug, Serialize)]
struct MetricOutput {
    p: usize,
    kind: MetricKind,
    point: GroupPoint,
    fd_step: f64,
    signature: Signature,
    components: Vec<Vec<f64>>,
    /// `christoffel[k][i][j] = Gamma^k_{ij}`.
    christoffel: Vec<Vec<Vec<f64>>>,
}

pub fn metric(opts: &Options) -> Result<Outcome, CliError> {
    json_only(opts)?;
    let p = opts.p()?;
    let spec = MetricSpec::new(p, opts.kind_or(MetricKind::PseudoRiemannian)).field("--p")?;
    let point = match &opts.point {
        Some(raw) => parse_point(raw, p)?,
        None => GroupPoint::identity(p),
    };
    let h = Options::positive(opts.step, DEFAULT_METRIC_FD_STEP, "--step")?;
    let g = metric_components(&spec, &point).field("--point")?;
    let gamma = christoffel_fd(&spec, &point, h).field("--step")?;
    let n = spec.dim();
    let out = MetricOutput {
        p,
        kind: spec.kind(),
        signature: signature(&spec, &point).field("--point")?,
        components: (0..n)
            .map(|i| (0..n).map(|j| g[(i, j)]).collect())
            .collect(),
        christoffel: (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| gamma.get(k, i, j)).collect())
                    .collect()
            })
            .collect(),
        point,
        fd_step: h,
    };
    emit(opts.out.as_deref(), &json(&out))?;
    Ok(Outcome::Success)
}
