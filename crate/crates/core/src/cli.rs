//! Command-line surface: argument model and one function per subcommand.
//! Each command turns input text into an [`Outcome`] holding the rendered
//! output and whether every requested check passed.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cube::{dyadic_radii, equivalence_ratio, poincare, rho, rho_omega, Cube};
use crate::geodesic::{d_lower, d_upper, default_candidates};
use crate::jet::{Jet, JetSpace};
use crate::modulus::Modulus;
use crate::poly::Poly;
use crate::props::{run_all, run_suite, PropertiesReport, DEFAULT_SEED, SUITES};
use crate::selection::{best_selection, counterexample_family, finiteness_experiment, SelectionInstance};
use crate::whitney::{
    build_field, check_conditions, limit_jet, lo_seminorm, star_norm, CheckReport, FitOptions, LoSeminorm,
    SampleSet, StarNorm,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "zygjet", version, about = "Cube metrics, jet distances, trace checks and selection LPs")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Input JSON file; stdin when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Trial count for every property suite (each suite has its own default).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// ρ, ρ_ω, ρ_H, δ_ω and the chain-metric bracket for two cubes or jets.
    Metric,
    /// Fit a field to trace data and report the Whitney-type conditions.
    Check {
        /// Dyadic levels of the radius grid when the input has no "radii".
        #[arg(long, default_value_t = 4)]
        levels: u32,
        /// Do not force the fit to match the data at the cube center.
        #[arg(long)]
        no_interpolate: bool,
        /// Fit on Q ∩ S only, even when it has fewer than dim P_L points.
        #[arg(long)]
        no_enlarge: bool,
    },
    /// Optimal Lipschitz selection, optionally with the subset experiment.
    Select {
        #[arg(long)]
        experiment: bool,
        /// Affine dimension bound for the experiment (default: largest set).
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Seeded randomized property suites.
    Properties {
        /// Run only these suites (repeatable).
        #[arg(long)]
        suite: Vec<String>,
    },
    /// The nested-cube table `Q_i = Q(0, 2^{−i²})`.
    Counterexample {
        #[arg(long, default_value_t = 8)]
        imax: u32,
    },
}

/// Rendered output plus the overall verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

fn render_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn render_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn read_input(config: &RunConfig) -> anyhow::Result<String> {
    match &config.input {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

/// Dispatches `config.command`; inputs are read only by commands that need them.
pub fn execute(config: &RunConfig) -> anyhow::Result<Outcome> {
    match &config.command {
        Command::Metric => cmd_metric(&read_input(config)?, config.format),
        Command::Check { levels, no_interpolate, no_enlarge } => {
            let opts = FitOptions { interpolate_center: !no_interpolate, enlarge_support: !no_enlarge };
            cmd_check(&read_input(config)?, *levels, opts, config.tol, config.format)
        }
        Command::Select { experiment, ell } => {
            cmd_select(&read_input(config)?, *experiment, *ell, config.seed, config.format)
        }
        Command::Properties { suite } => cmd_properties(config.seed, config.trials, config.tol, suite, config.format),
        Command::Counterexample { imax } => cmd_counterexample(*imax, config.format),
    }
}

#[derive(Deserialize)]
struct MetricInput {
    omega: Modulus,
    #[serde(default)]
    k: Option<u32>,
    #[serde(default)]
    cubes: Option<Vec<Cube>>,
    #[serde(default)]
    jets: Option<Vec<JetInput>>,
}

#[derive(Deserialize)]
struct JetInput {
    poly: Poly,
    cube: Cube,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rho: f64,
    pub rho_omega: f64,
    pub rho_h: f64,
    /// `ρ / (1 + ρ_H)`, absent for equal cubes.
    pub ratio: Option<f64>,
    pub delta: Option<f64>,
    pub d_lower: Option<f64>,
    pub d_upper: Option<f64>,
}

pub fn cmd_metric(input: &str, format: Format) -> anyhow::Result<Outcome> {
    let parsed: MetricInput = serde_json::from_str(input).context("parsing metric input")?;
    let w = parsed.omega;
    let (q1, q2, jets) = match (parsed.cubes, parsed.jets) {
        (Some(c), None) if c.len() == 2 => (c[0].clone(), c[1].clone(), None),
        (None, Some(j)) if j.len() == 2 => (j[0].cube.clone(), j[1].cube.clone(), Some(j)),
        _ => bail!("metric input needs exactly one of \"cubes\" or \"jets\", with two entries"),
    };
    let z1 = q1.to_half_space();
    let z2 = q2.to_half_space();
    let mut report = MetricReport {
        rho: rho(&q1, &q2)?,
        rho_omega: rho_omega(&w, &q1, &q2)?,
        rho_h: poincare(&z1, &z2)?,
        ratio: if q1 == q2 { None } else { Some(equivalence_ratio(&z1, &z2)?) },
        delta: None,
        d_lower: None,
        d_upper: None,
    };
    if let Some(j) = jets {
        let degree = j[0].poly.degree().max(j[1].poly.degree());
        let k = parsed.k.unwrap_or_else(|| degree.saturating_sub(w.order() - 1));
        let space = JetSpace::new(w, q1.dim(), k)?;
        let a: Jet = space.jet(j[0].poly.clone(), q1)?;
        let b: Jet = space.jet(j[1].poly.clone(), q2)?;
        report.delta = Some(space.delta(&a, &b, None)?);
        report.d_lower = Some(d_lower(&space, &a, &b)?);
        report.d_upper = Some(d_upper(&space, &a, &b, &default_candidates(&a, &b, 8)?)?);
    }
    let body = match format {
        Format::Json => render_json(&report)?,
        Format::Csv => render_csv(&[report])?,
    };
    Ok(Outcome { body, passed: true })
}

/// How the field in a check report was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitMode {
    pub surrogate: String,
    pub interpolate_center: bool,
    pub enlarge_support: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub x: Vec<f64>,
    pub limit: Poly,
    pub envelope_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub mode: FitMode,
    pub cubes: usize,
    pub max_fit_residual: f64,
    pub lambda_hat: f64,
    pub report: CheckReport,
    pub lo_seminorm: Option<LoSeminorm>,
    pub star_norm: StarNorm,
    pub limit_jets: Vec<LimitSummary>,
}

#[derive(Serialize)]
struct PairRow {
    first: usize,
    second: usize,
    alpha: String,
    ratio: f64,
}

pub fn cmd_check(input: &str, levels: u32, opts: FitOptions, tol: Option<f64>, format: Format) -> anyhow::Result<Outcome> {
    let value: Value = serde_json::from_str(input).context("parsing sample set")?;
    let radii: Option<Vec<f64>> = match value.get("radii") {
        Some(r) => Some(serde_json::from_value(r.clone()).context("parsing \"radii\"")?),
        None => None,
    };
    let samples: SampleSet = serde_json::from_value(value).context("parsing sample set")?;
    let radii = radii.unwrap_or_else(|| dyadic_radii(&samples.points(), levels));
    let (field, residuals) = build_field(&samples, &radii, opts)?;
    let report = check_conditions(Some(&samples), &field, samples.omega())?;
    let lo = if field.len() >= 2 { Some(lo_seminorm(&field, samples.omega())?) } else { None };
    let mut limit_jets = Vec::new();
    for x in samples.points() {
        if let Ok(lim) = limit_jet(&field, &x, samples.omega()) {
            limit_jets.push(LimitSummary { x: x.0.clone(), limit: lim.poly, envelope_constant: lim.envelope_constant });
        }
    }
    let lambda_hat = report.lambda_hat;
    let passed = match tol {
        Some(t) => lambda_hat <= t,
        None => lambda_hat.is_finite(),
    };
    let body = match format {
        Format::Csv => {
            let rows: Vec<PairRow> = report
                .pairs
                .iter()
                .map(|p| PairRow { first: p.first, second: p.second, alpha: format!("{:?}", p.alpha), ratio: p.ratio })
                .collect();
            render_csv(&rows)?
        }
        Format::Json => render_json(&CheckOutput {
            mode: FitMode {
                surrogate: "sup_norm_fit".into(),
                interpolate_center: opts.interpolate_center,
                enlarge_support: opts.enlarge_support,
                note: "ratios are maxima over a finite cube family and are lower bounds for the continuous suprema".into(),
            },
            cubes: field.len(),
            max_fit_residual: residuals.iter().copied().fold(0.0, f64::max),
            lambda_hat,
            report,
            lo_seminorm: lo,
            star_norm: star_norm(&field),
            limit_jets,
        })?,
    };
    Ok(Outcome { body, passed })
}

#[derive(Serialize)]
struct SelectionRow {
    node: usize,
    center: String,
    radius: f64,
    coefficients: String,
    lambda_star: f64,
}

pub fn cmd_select(input: &str, experiment: bool, ell: Option<usize>, seed: u64, format: Format) -> anyhow::Result<Outcome> {
    let inst: SelectionInstance = serde_json::from_str(input).context("parsing selection instance")?;
    let selection = best_selection(&inst)?;
    let finiteness = if experiment { Some(finiteness_experiment(&inst, ell.unwrap_or_else(|| inst.ell()), seed)?) } else { None };
    let passed = !selection.box_active && finiteness.as_ref().is_none_or(|f| f.gamma_hat >= 1.0 - 1e-9);
    let body = match format {
        Format::Json => render_json(&serde_json::json!({ "selection": selection, "finiteness": finiteness }))?,
        Format::Csv => {
            let rows: Vec<SelectionRow> = inst
                .nodes()
                .iter()
                .zip(&selection.polys)
                .enumerate()
                .map(|(i, (node, p))| SelectionRow {
                    node: i,
                    center: format!("{:?}", node.cube.center().coords()),
                    radius: node.cube.radius(),
                    coefficients: format!("{:?}", p.coefficients()),
                    lambda_star: selection.lambda_star,
                })
                .collect();
            render_csv(&rows)?
        }
    };
    Ok(Outcome { body, passed })
}

#[derive(Serialize)]
struct SuiteRow<'a> {
    name: &'a str,
    trials: usize,
    passed: usize,
    failed: usize,
    metric: &'a str,
    worst: Option<f64>,
    tolerance: f64,
}

pub fn cmd_properties(
    seed: u64,
    trials: Option<usize>,
    tol: Option<f64>,
    only: &[String],
    format: Format,
) -> anyhow::Result<Outcome> {
    let report = if only.is_empty() {
        run_all(seed, trials, tol)
    } else {
        let mut suites = Vec::with_capacity(only.len());
        for name in only {
            match run_suite(name, seed, trials, tol) {
                Some(s) => suites.push(s),
                None => {
                    let known: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
                    bail!("unknown suite {name:?}; known suites: {}", known.join(", "))
                }
            }
        }
        let passed = suites.iter().all(|s| s.ok());
        PropertiesReport { seed, suites, passed }
    };
    let body = match format {
        Format::Json => render_json(&report)?,
        Format::Csv => render_csv(
            &report
                .suites
                .iter()
                .map(|s| SuiteRow {
                    name: &s.name,
                    trials: s.trials,
                    passed: s.passed,
                    failed: s.failed,
                    metric: &s.metric,
                    worst: s.worst,
                    tolerance: s.tolerance,
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Outcome { body, passed: report.passed })
}

pub fn cmd_counterexample(imax: u32, format: Format) -> anyhow::Result<Outcome> {
    let rows = counterexample_family(imax)?;
    let body = match format {
        Format::Json => render_json(&rows)?,
        Format::Csv => render_csv(&rows)?,
    };
    Ok(Outcome { body, passed: true })
}
