//! Command-line front end.

pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cnot::{build_cnot, verify_coherence, verify_truth_table};
use crate::error::Error;
use crate::fock::{nlpsg_closed_form, simulate_nlpsg, NlpsgInput};
use crate::manifold::{
    curve_eta_of_tau, intersect_delta2, linspace, slot_target, surface_samples, ManifoldSample,
    CURVE_GRID_POINTS, CURVE_TAU_MAX, SURFACE_GRID_POINTS,
};
use crate::network::{
    closed_form_resonant, compose_scattering, scattering_matrix, NetworkParams, ScatteringMatrix,
};
use crate::nlpsg::{optimize_t1, verdict, BetaFormula, OptimalPoint};
use crate::ring::{reduce_phase, RingSlot};

use config::{Format, RunConfig};
use format::{num, pair, Csv};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CONSTRAINT: i32 = 4;

const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(String),
    #[error("constraint violation: {0}")]
    Constraint(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Constraint(_) => EXIT_CONSTRAINT,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Pole(_)
            | Error::SingularPivot { .. }
            | Error::NonUnitary(_)
            | Error::UndefinedPhase(_) => CliError::Numeric(e.to_string()),
            Error::InvalidNlpsg { ref verdict, .. } => {
                let detail = serde_json::to_string(verdict).unwrap_or_default();
                CliError::Constraint(format!("{e}\n{detail}"))
            }
            Error::Domain { .. }
            | Error::Dimension { .. }
            | Error::ModeMap(_)
            | Error::Pattern(_)
            | Error::Normalization(_) => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ringsim",
    version,
    about = "Microring sign-gate and CNOT simulator"
)]
pub struct Cli {
    /// JSON run configuration; flags take precedence over its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance for the gate-constraint checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scattering matrix of the configured network.
    Smatrix {
        /// Use the resonant closed form (resonant, unshifted rings only).
        #[arg(long)]
        closed_form: bool,
    },
    /// Gate constraints plus a heralded photon-number simulation.
    Verify {
        /// Input amplitudes: three reals or three re,im pairs, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// Optimal-operation manifolds as CSV.
    Manifold {
        #[command(subcommand)]
        kind: ManifoldKind,
    },
    /// Optimal effective transmissions and the success-probability peak.
    Optimize,
    /// CNOT truth table and Bell-state coherence.
    Cnot,
}

#[derive(Debug, Subcommand)]
pub enum ManifoldKind {
    /// Resonant curves η(τ) for each ring.
    Curve {
        /// Ring 1, 2 or 3; all rings when omitted.
        #[arg(long)]
        ring: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        tau_max: Option<f64>,
    },
    /// Off-resonance surfaces θ(η, τ) of the outer rings.
    Surface {
        /// Ring 1 or 3; both when omitted.
        #[arg(long)]
        ring: Option<usize>,
        /// Grid points per axis.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Middle-ring curve with |A2| = T2 and arg A2 = -δ2.
    Intersect {
        /// In-line phase δ2 in radians; accepts forms like `pi/30`.
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi/30")]
        delta2: f64,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        tau_max: Option<f64>,
    },
}

/// Parse an angle given as a number or as a multiple/fraction of `pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || format!("cannot read `{s}` as an angle");
    let (num_part, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let coeff_text = num_part.strip_suffix("pi").ok_or_else(bad)?;
    let coeff_text = coeff_text.strip_suffix('*').unwrap_or(coeff_text);
    let coeff = match coeff_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * std::f64::consts::PI / den)
}

struct Settings {
    config: RunConfig,
    output: Option<PathBuf>,
    format: Format,
    tolerance: f64,
}

struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("RINGSIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool built earlier in the process wins; nothing to do then
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let default_format = match cli.command {
        Command::Manifold { .. } | Command::Cnot => Format::Csv,
        _ => Format::Json,
    };
    let settings = Settings {
        output: cli.output.clone().or_else(|| config.output.clone()),
        format: cli.format.or(config.format).unwrap_or(default_format),
        tolerance: cli
            .tolerance
            .or(config.tolerance)
            .unwrap_or(DEFAULT_TOLERANCE),
        config,
    };
    let outcome = match &cli.command {
        Command::Smatrix { closed_form } => cmd_smatrix(&settings, *closed_form)?,
        Command::Verify { alpha } => cmd_verify(&settings, alpha.as_deref())?,
        Command::Manifold { kind } => cmd_manifold(&settings, kind)?,
        Command::Optimize => cmd_optimize()?,
        Command::Cnot => cmd_cnot(&settings)?,
    };
    emit(&settings, &outcome.text)?;
    Ok(outcome.code)
}

fn emit(settings: &Settings, text: &str) -> Result<(), CliError> {
    match &settings.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn matrix_json(s: &ScatteringMatrix) -> Value {
    let n = s.dim();
    Value::Array(
        (0..n)
            .map(|i| json!((0..n).map(|j| pair(s.get(i, j))).collect::<Vec<_>>()))
            .collect(),
    )
}

/// Effective transmissions when every ring is resonant with the symmetric
/// partition and no in-line phase is applied.
fn resonant_transmissions(p: &NetworkParams) -> Option<[f64; 3]> {
    let symmetric = |phi: f64| (reduce_phase(phi) - std::f64::consts::PI).abs() < 1e-12;
    let ok = p
        .rings
        .iter()
        .all(|r| r.is_resonant(1e-12) && symmetric(r.phi()))
        && p.deltas.iter().all(|d| d.abs() < 1e-12);
    ok.then(|| p.rings.map(|r| r.effective().t))
}

fn cmd_smatrix(settings: &Settings, closed_form: bool) -> Result<Outcome, CliError> {
    let params = settings.config.network()?;
    let transmissions = resonant_transmissions(&params);
    let (s, method) = if closed_form {
        let t = transmissions.ok_or_else(|| {
            CliError::Config(
                "--closed-form needs resonant rings with symmetric partitions and zero in-line phases".into(),
            )
        })?;
        (closed_form_resonant(t[0], t[1], t[2])?, "closed-form")
    } else {
        match compose_scattering(&params) {
            Ok(s) => (s, "composition"),
            Err(Error::SingularPivot { .. }) => (scattering_matrix(&params)?, "direct-solve"),
            Err(e) => return Err(e.into()),
        }
    };
    let comparison = match transmissions {
        Some(t) => {
            let other = if closed_form {
                scattering_matrix(&params)?
            } else {
                closed_form_resonant(t[0], t[1], t[2])?
            };
            json!(s.max_abs_diff(&other))
        }
        None => Value::Null,
    };
    let text = match settings.format {
        Format::Json => to_json(&json!({
            "method": method,
            "matrix": matrix_json(&s),
            "unitarity_residual": s.unitarity_residual(),
            "determinant": pair(s.determinant()),
            "closed_form_diff": comparison,
        })),
        Format::Csv => {
            let mut csv = Csv::new(&["row", "col", "re", "im"]);
            for i in 0..3 {
                for j in 0..3 {
                    let z = s.get(i, j);
                    csv.row([
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        num(z.re),
                        num(z.im),
                    ]);
                }
            }
            csv.finish()
        }
    };
    Ok(Outcome::ok(text))
}

/// Three reals or three `re,im` pairs.
fn parse_alpha(s: &str) -> Result<[Complex64; 3], CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("--alpha: {e}")))?;
    match v.len() {
        3 => Ok([0, 1, 2].map(|i| Complex64::new(v[i], 0.0))),
        6 => Ok([0, 1, 2].map(|i| Complex64::new(v[2 * i], v[2 * i + 1]))),
        n => Err(CliError::Config(format!(
            "--alpha: expected 3 or 6 numbers, found {n}"
        ))),
    }
}

fn cmd_verify(settings: &Settings, alpha_flag: Option<&str>) -> Result<Outcome, CliError> {
    let params = settings.config.network()?;
    let raw = match alpha_flag {
        Some(a) => parse_alpha(a)?,
        None => match settings.config.alpha() {
            Some(a) => a?,
            None => [Complex64::new(1.0, 0.0); 3],
        },
    };
    let (input, normalized) = NlpsgInput::normalized(raw)?;
    if normalized && (alpha_flag.is_some() || settings.config.alpha.is_some()) {
        eprintln!("warning: alpha was not normalized; rescaled to unit norm");
    }
    let s = scattering_matrix(&params)?;
    let v = verdict(&s)?;
    let sim = simulate_nlpsg(&s, &input)?;
    let oracle = nlpsg_closed_form(&s, &input)?;

    let alpha = input.alpha();
    let simulated: Vec<Complex64> = (0..3u8).map(|n| sim.unnormalized.amplitude(&[n])).collect();
    let conditional: Vec<Complex64> = (0..3u8).map(|n| sim.conditional.amplitude(&[n])).collect();
    let expected = [alpha[0], alpha[1], -alpha[2]];
    let fidelity = expected
        .iter()
        .zip(&conditional)
        .map(|(e, c)| e.conj() * c)
        .sum::<Complex64>()
        .norm_sqr();
    let oracle_diff = simulated
        .iter()
        .zip(oracle.success)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let tol = settings.tolerance;
    let (status, code) = if v.satisfied(tol) {
        ("constraints satisfied", 0)
    } else if v.satisfied_up_to_phase(tol) {
        ("constraints satisfied up to phase", 0)
    } else {
        ("constraints not satisfied", EXIT_CONSTRAINT)
    };
    let text = to_json(&json!({
        "status": status,
        "tolerance": tol,
        "beta": v.betas().map(pair),
        "residual": v.residual,
        "magnitude_residual": v.magnitude_residual,
        "s11": pair(v.s11),
        "s11_residual": v.s11_residual,
        "s11_magnitude_residual": v.s11_magnitude_residual,
        "success_probability": v.success_probability,
        "cross_check": v.cross_check,
        "alpha": alpha.map(pair),
        "simulation": {
            "probability": sim.probability,
            "conditional": conditional.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
            "sign_flipped_input": expected.map(pair),
            "fidelity": fidelity,
        },
        "closed_form": {
            "success": oracle.success.map(pair),
            "failure_weight": oracle.failure_weight,
            "max_diff_to_simulation": oracle_diff,
        },
    }));
    if code != 0 {
        eprintln!(
            "constraints not satisfied: residual {:e}, S11 residual {:e}",
            v.residual, v.s11_residual
        );
    }
    Ok(Outcome { text, code })
}

fn uniform_input() -> NlpsgInput {
    NlpsgInput::normalized([Complex64::new(1.0, 0.0); 3])
        .expect("nonzero amplitudes")
        .0
}

/// Heralded success probability from a photon-number simulation.
fn simulated_beta_sq(params: &NetworkParams) -> Result<f64, Error> {
    let s = scattering_matrix(params)?;
    Ok(simulate_nlpsg(&s, &uniform_input())?.probability)
}

fn ring_slots(ring: Option<usize>, allowed: &[usize]) -> Result<Vec<RingSlot>, CliError> {
    match ring {
        None => Ok(allowed
            .iter()
            .map(|&n| RingSlot::from_number(n).expect("static ring numbers"))
            .collect()),
        Some(n) if allowed.contains(&n) => Ok(vec![RingSlot::from_number(n).expect("checked")]),
        Some(n) => Err(CliError::Config(format!(
            "--ring {n} is not available here (choose from {allowed:?})"
        ))),
    }
}

fn grid_points(
    flag: Option<usize>,
    config: Option<usize>,
    default: usize,
) -> Result<usize, CliError> {
    let n = flag.or(config).unwrap_or(default);
    if n < 2 {
        return Err(CliError::Config(format!(
            "grid needs at least 2 points, got {n}"
        )));
    }
    Ok(n)
}

fn sample_rows(samples: &[ManifoldSample]) -> Result<Vec<f64>, CliError> {
    use rayon::prelude::*;
    samples
        .par_iter()
        .map(|s| simulated_beta_sq(&s.network()?))
        .collect::<Result<Vec<_>, Error>>()
        .map_err(CliError::from)
}

fn cmd_manifold(settings: &Settings, kind: &ManifoldKind) -> Result<Outcome, CliError> {
    let grid = &settings.config.grid;
    match kind {
        ManifoldKind::Curve {
            ring,
            points,
            tau_max,
        } => {
            let n = grid_points(*points, grid.curve_points, CURVE_GRID_POINTS)?;
            let taus = linspace(0.0, tau_max.or(grid.tau_max).unwrap_or(CURVE_TAU_MAX), n);
            let mut samples = Vec::new();
            let mut skipped = 0;
            for slot in ring_slots(*ring, &[1, 2, 3])? {
                for r in curve_eta_of_tau(slot, slot_target(slot), &taus) {
                    match r {
                        Ok(s) => samples.push(s),
                        Err(_) => skipped += 1,
                    }
                }
            }
            let beta_sq = sample_rows(&samples)?;
            if skipped > 0 {
                eprintln!("{skipped} grid points skipped (pole or undefined phase)");
            }
            let text = match settings.format {
                Format::Csv => {
                    let mut csv = Csv::new(&["ring", "tau", "eta", "tau_sq", "eta_sq", "beta_sq"]);
                    for (s, b) in samples.iter().zip(&beta_sq) {
                        csv.row([
                            s.slot.number().to_string(),
                            num(s.tau),
                            num(s.eta),
                            num(s.tau * s.tau),
                            num(s.eta * s.eta),
                            num(*b),
                        ]);
                    }
                    csv.finish()
                }
                Format::Json => to_json(&json!(samples
                    .iter()
                    .zip(&beta_sq)
                    .map(|(s, b)| json!({"sample": s, "beta_sq": b}))
                    .collect::<Vec<_>>())),
            };
            Ok(Outcome::ok(text))
        }
        ManifoldKind::Surface { ring, points } => {
            let n = grid_points(*points, grid.surface_points, SURFACE_GRID_POINTS)?;
            let axis = linspace(0.0, grid.tau_max.unwrap_or(CURVE_TAU_MAX), n);
            let mut samples = Vec::new();
            let mut degenerate = 0;
            for slot in ring_slots(*ring, &[1, 3])? {
                let (s, d) = surface_samples(slot, slot_target(slot), &axis, &axis)?;
                samples.extend(s);
                degenerate += d;
            }
            let beta_sq = sample_rows(&samples)?;
            if degenerate > 0 {
                eprintln!("{degenerate} grid points on the eta·tau = 0 lines skipped (theta undetermined)");
            }
            let text = match settings.format {
                Format::Csv => {
                    let mut csv = Csv::new(&["ring", "tau", "eta", "theta", "beta_sq"]);
                    for (s, b) in samples.iter().zip(&beta_sq) {
                        csv.row([
                            s.slot.number().to_string(),
                            num(s.tau),
                            num(s.eta),
                            num(s.theta),
                            num(*b),
                        ]);
                    }
                    csv.finish()
                }
                Format::Json => to_json(&json!(samples
                    .iter()
                    .zip(&beta_sq)
                    .map(|(s, b)| json!({"sample": s, "beta_sq": b}))
                    .collect::<Vec<_>>())),
            };
            Ok(Outcome::ok(text))
        }
        ManifoldKind::Intersect {
            delta2,
            points,
            tau_max,
        } => {
            let n = grid_points(*points, grid.curve_points, CURVE_GRID_POINTS)?;
            let taus = linspace(0.0, tau_max.or(grid.tau_max).unwrap_or(CURVE_TAU_MAX), n);
            let trace = intersect_delta2(*delta2, &taus);
            let beta_sq = sample_rows(&trace.samples)?;
            let off = beta_sq
                .iter()
                .filter(|b| (*b - 0.25).abs() > settings.tolerance)
                .count();
            eprintln!(
                "{} converged, {} not converged; {} converged samples miss |beta|^2 = 1/4",
                trace.samples.len(),
                trace.failures.len(),
                off
            );
            let text = match settings.format {
                Format::Csv => {
                    let mut csv =
                        Csv::new(&["tau2", "eta2", "theta2", "residual_mag", "residual_arg"]);
                    for s in &trace.samples {
                        csv.row([
                            num(s.tau),
                            num(s.eta),
                            num(s.theta),
                            num(s.residuals.magnitude),
                            num(s.residuals.phase.unwrap_or(f64::NAN)),
                        ]);
                    }
                    csv.finish()
                }
                Format::Json => to_json(&json!({
                    "delta2": delta2,
                    "samples": trace.samples.iter().zip(&beta_sq)
                        .map(|(s, b)| json!({"sample": s, "beta_sq": b}))
                        .collect::<Vec<_>>(),
                    "failures": trace.failures,
                })),
            };
            Ok(Outcome::ok(text))
        }
    }
}

fn cmd_optimize() -> Result<Outcome, CliError> {
    let closed = OptimalPoint::closed_form();
    let numerical = OptimalPoint::numerical()?;
    let (tc, pc) = optimize_t1(BetaFormula::Full);
    let (tp, pp) = optimize_t1(BetaFormula::Reduced);
    Ok(Outcome::ok(to_json(&json!({
        "closed_form": closed,
        "numerical": numerical,
        "full": {"t1_star": tc, "peak": pc},
        "reduced": {"t1_star": tp, "peak": pp},
        "peak_ratio": pc / pp,
        "note": "the reduced expression lacks a factor (1+sqrt2) and peaks at (sqrt2-1)/4; \
                 the full one equals |S22|^2 on the optimal line and peaks at 1/4",
    }))))
}

fn logical(bits: (u8, u8)) -> String {
    format!("{}{}", bits.0, bits.1)
}

fn cmd_cnot(settings: &Settings) -> Result<Outcome, CliError> {
    let [p1, p2] = settings.config.cnot_pair()?;
    let net = build_cnot(&p1, &p2)?;
    let rows = verify_truth_table(&net)?;
    let coherence = verify_coherence(&net)?;
    let text = match settings.format {
        Format::Csv => {
            let mut csv = Csv::new(&["input", "probability", "output", "fidelity", "leakage"]);
            for r in &rows {
                csv.row([
                    logical((r.control, r.target)),
                    num(r.probability),
                    logical(r.output),
                    num(r.fidelity),
                    num(r.leakage),
                ]);
            }
            csv.row([
                "+0".to_string(),
                num(coherence.probability),
                "bell".to_string(),
                num(coherence.bell_overlap),
                num(coherence.leakage),
            ]);
            csv.finish()
        }
        Format::Json => to_json(&json!({"truth_table": rows, "coherence": coherence})),
    };
    Ok(Outcome::ok(text))
}
