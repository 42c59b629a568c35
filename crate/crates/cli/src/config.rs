//! Options shared by every subcommand. Each may also come from a TOML file
//! given with `--config`; flags override the file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use heisenberg_core::suite::FormChoice;
use heisenberg_core::{Covector, GroupPoint, InitialConditions, MetricKind, TangentVector};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Pseudo,
    Riemannian,
}

impl From<KindArg> for MetricKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pseudo => MetricKind::PseudoRiemannian,
            KindArg::Riemannian => MetricKind::Riemannian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    Closed,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Theta,
    Dx1,
    Contact,
    CustomCoeffs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// TOML file with any of the options below (keys use underscores).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Half-dimension p of H_{2p+1}.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Initial conditions "x_1,..,x_p;y_1,..,y_p;z;vx_1,..;vy_1,..;vz".
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    /// Integration step (trace, search) or finite-difference step (metric).
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tangency tolerance: max |form(gamma')| accepted by verify and search.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub oracle: Option<Oracle>,
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    /// Coefficients "cx_1,..;cy_1,..;cz" for --form custom-coeffs.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Sampled initial conditions per check (verify).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Maximum number of tries (search).
    #[arg(long)]
    pub tries: Option<usize>,
    /// Violation threshold |form(gamma'(t))| (search).
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Search horizon (search).
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Point "x_1,..;y_1,..;z" (metric).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        Options { config: $flags.config, $($f: $flags.$f.or($file.$f),)* }
    };
}

impl Options {
    /// Folds in the `--config` file, if any; flags win.
    pub fn resolve(self) -> Result<Options, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_config(&path)?;
        Ok(overlay!(
            self, file, p, kind, ic, t_end, step, format, out, seed, tol, oracle, form, coeffs,
            samples, tries, threshold, t_max, point
        ))
    }

    pub fn kind_or(&self, default: MetricKind) -> MetricKind {
        self.kind.map(MetricKind::from).unwrap_or(default)
    }

    /// `--p`, falling back to the dimension implied by `--ic`/`--point`, then 1.
    pub fn p(&self) -> Result<usize, CliError> {
        let implied = self
            .ic
            .as_deref()
            .or(self.point.as_deref())
            .and_then(|s| s.split(';').next())
            .map(|x| x.split(',').count());
        let p = self.p.or(implied).unwrap_or(1);
        if p == 0 {
            return Err(CliError::config("--p", "must be at least 1"));
        }
        Ok(p)
    }

    pub fn form(&self, p: usize) -> Result<FormChoice, CliError> {
        match self.form.unwrap_or(FormArg::Theta) {
            FormArg::Theta => Ok(FormChoice::Theta),
            FormArg::Dx1 => Ok(FormChoice::Dx1),
            FormArg::Contact => Ok(FormChoice::Contact),
            FormArg::CustomCoeffs => {
                let raw = self.coeffs.as_deref().ok_or_else(|| {
                    CliError::config("--coeffs", "required with --form custom-coeffs")
                })?;
                let (x, y, z) = parse_point_like(raw, p, "--coeffs")?;
                Ok(FormChoice::Custom(Covector { x, y, z }))
            }
        }
    }

    pub fn positive(
        value: Option<f64>,
        default: f64,
        field: &'static str,
    ) -> Result<f64, CliError> {
        let v = value.unwrap_or(default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::config(
                field,
                format!("must be positive and finite, got {v}"),
            ))
        }
    }
}

fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::config("--config", e.to_string()))
}

fn parse_group(group: &str, field: &'static str) -> Result<Vec<f64>, CliError> {
    group
        .split(',')
        .map(|v| {
            let v = v.trim();
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(CliError::config(
                    field,
                    format!("'{v}' is not a finite number"),
                )),
            }
        })
        .collect()
}

fn parse_groups(
    raw: &str,
    counts: &[usize],
    field: &'static str,
) -> Result<Vec<Vec<f64>>, CliError> {
    let groups: Vec<&str> = raw.split(';').collect();
    if groups.len() != counts.len() {
        return Err(CliError::config(
            field,
            format!(
                "expected {} ';'-separated groups, found {}",
                counts.len(),
                groups.len()
            ),
        ));
    }
    groups
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (g, &n))| {
            let values = parse_group(g, field)?;
            if values.len() != n {
                return Err(CliError::config(
                    field,
                    format!("group {} has {} values, expected {n}", i + 1, values.len()),
                ));
            }
            Ok(values)
        })
        .collect()
}

fn parse_point_like(
    raw: &str,
    p: usize,
    field: &'static str,
) -> Result<(Vec<f64>, Vec<f64>, f64), CliError> {
    let mut g = parse_groups(raw, &[p, p, 1], field)?.into_iter();
    let (x, y, z) = (g.next().unwrap(), g.next().unwrap(), g.next().unwrap()[0]);
    Ok((x, y, z))
}

pub fn parse_point(raw: &str, p: usize) -> Result<GroupPoint, CliError> {
    let (x, y, z) = parse_point_like(raw, p, "--point")?;
    GroupPoint::new(x, y, z).map_err(|e| CliError::config("--point", e.to_string()))
}

pub fn parse_ic(raw: &str, p: usize) -> Result<InitialConditions, CliError> {
    let mut g = parse_groups(raw, &[p, p, 1, p, p, 1], "--ic")?.into_iter();
    let mut next = || g.next().unwrap();
    let (x, y, z) = (next(), next(), next()[0]);
    let (vx, vy, vz) = (next(), next(), next()[0]);
    let bad = |e: heisenberg_core::GeometryError| CliError::config("--ic", e.to_string());
    InitialConditions::new(
        GroupPoint::new(x, y, z).map_err(bad)?,
        TangentVector::new(vx, vy, vz).map_err(bad)?,
    )
    .map_err(bad)
}

/// Origin with velocity `(0, 1, 1)` in each block: `alpha = 1`.
pub fn default_ic(p: usize) -> InitialConditions {
    InitialConditions::new(
        GroupPoint::identity(p),
        TangentVector::new(vec![0.0; p], vec![1.0; p], 1.0).expect("finite"),
    )
    .expect("same p")
}
