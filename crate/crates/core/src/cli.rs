//! Command-line front end: single-point capacity queries, parameter sweeps,
//! extreme-limit residual tables and pulse-to-parameter computation, all
//! emitted as deterministic CSV.
//!
//! Exit codes: 0 success, 2 usage, 3 domain/constraint, 4 numerical failure,
//! 5 i/o. Every flag is also accepted as a `key=value` line in a plain-text
//! config file (`--config`); explicit flags win on conflict.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::capacity::{
    chi_for_basis, limit_relation_residual, optimize_capacity, sweep_capacity, LimitCase,
    SweepAxis, SweepParam, SweepPoint,
};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::pulse::{
    effective_params, rate_trajectory, CorrelationFn, CorrelationKind, PulseSpec,
};
use crate::state::BasisParams;

pub const CAPACITY_CSV_HEADER: &str =
    "mu,zeta,alpha,nu_t,basis,m_phi,m_psi,p1,p2,p3,p4,capacity_bits,status";
pub const LIMITS_CSV_HEADER: &str = "case,p,nu_t,chi_lhs,chi_rhs,f,epsilon";
pub const PULSE_CSV_HEADER: &str =
    "t,r1_11,r1_22,r1_12,r0_11,r0_22,r0_12,nu1_eff,alpha_eff,zeta_eff,mu_eff,status";

#[derive(Debug, Parser)]
#[command(
    name = "qchan",
    version,
    about = "Holevo capacity of two-qubit noisy channels with memory, asymmetry and state-bias"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Maximize the capacity of a single channel point.
    Capacity(CapacityArgs),
    /// Sweep capacity over one or two of {mu, zeta, alpha}.
    Sweep(SweepArgs),
    /// Residual table of the extreme-limit capacity relations.
    Limits(LimitsArgs),
    /// Rates and effective channel parameters from shaped pulses.
    Pulse(PulseArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Decoherence-rate magnitude nu1 (1/time).
    #[arg(long)]
    pub nu1: Option<f64>,
    /// State-bias alpha in [0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rate asymmetry zeta in [0, 1].
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Memory (cross-decoherence) mu in [0, 1].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Dimensionless evolution time nu1 * t.
    #[arg(long = "nu-t")]
    pub nu_t: Option<f64>,
    /// Plain-text key=value config file; flags win on conflict.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Recorded in the run configuration; the optimizer itself is
    /// deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fix m_phi instead of optimizing over the basis.
    #[arg(long = "m-phi")]
    pub m_phi: Option<f64>,
    /// Fix m_psi instead of optimizing over the basis.
    #[arg(long = "m-psi")]
    pub m_psi: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Swept axis as name:start:stop:step (repeatable, at most twice).
    #[arg(long = "axis")]
    pub axes: Vec<String>,
    /// Basis family per sweep: bell, fac, com or opt (repeatable).
    #[arg(long = "basis")]
    pub bases: Vec<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid over the varied parameter as start:stop:step.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PulseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Envelope kind: flat or gaussian.
    #[arg(long)]
    pub envelope: Option<String>,
    /// Flat duration or Gaussian sigma.
    #[arg(long)]
    pub width: Option<f64>,
    /// Amplitude of the qubit-1 pulse.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Amplitude of the qubit-2 pulse (defaults to --amplitude).
    #[arg(long)]
    pub amplitude2: Option<f64>,
    /// Delay of the qubit-1 pulse.
    #[arg(long)]
    pub delay: Option<f64>,
    /// Delay of the qubit-2 pulse (defaults to --delay).
    #[arg(long)]
    pub delay2: Option<f64>,
    /// Linear chirp rate of both pulses.
    #[arg(long)]
    pub chirp: Option<f64>,
    /// Carrier detuning omega_a of qubit 1.
    #[arg(long)]
    pub carrier: Option<f64>,
    /// Carrier detuning omega_a of qubit 2 (defaults to --carrier).
    #[arg(long)]
    pub carrier2: Option<f64>,
    /// Correlation kind: exponential, gaussian or delta.
    #[arg(long)]
    pub corr: Option<String>,
    /// Correlation time t_c.
    #[arg(long = "t-c")]
    pub t_c: Option<f64>,
    /// Correlation scale (rate^2 units).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Excitation-sector bias factor b in [0, 1]; alpha = 1 - b.
    #[arg(long)]
    pub bias: Option<f64>,
    /// End of the trajectory time grid.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub points: Option<usize>,
}

/// Resolved run configuration: exactly one command with all parameters
/// merged from flags and the optional config file.
#[derive(Debug, Clone)]
pub enum RunConfig {
    Capacity {
        channel: ChannelParams,
        nu_t: f64,
        basis: Option<BasisParams>,
        output: Option<PathBuf>,
        seed: u64,
    },
    Sweep {
        axes: Vec<SweepAxis>,
        base: ChannelParams,
        nu_t: f64,
        bases: Vec<BasisChoice>,
        output: Option<PathBuf>,
        seed: u64,
    },
    Limits {
        grid: (f64, f64, f64),
        nu_t: f64,
        output: Option<PathBuf>,
        seed: u64,
    },
    Pulse {
        pulses: [PulseSpec; 2],
        corr: CorrelationFn,
        t_max: f64,
        points: usize,
        output: Option<PathBuf>,
        seed: u64,
    },
}

/// A basis family selection for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Bell,
    Factorized,
    Combined,
    Optimized,
}

impl BasisChoice {
    pub fn label(&self) -> &'static str {
        match self {
            BasisChoice::Bell => "bell",
            BasisChoice::Factorized => "fac",
            BasisChoice::Combined => "com",
            BasisChoice::Optimized => "opt",
        }
    }

    fn fixed(&self) -> Option<BasisParams> {
        match self {
            BasisChoice::Bell => Some(BasisParams::bell()),
            BasisChoice::Factorized => Some(BasisParams::factorized()),
            BasisChoice::Combined => Some(BasisParams::combined()),
            BasisChoice::Optimized => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Config-file merging

/// key=value lines; '#' starts a comment; keys use the flag names with '-'
/// or '_' freely interchanged. Values with commas are lists (axis, basis).
fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Usage(format!(
                "config file {} line {}: expected key=value, got `{raw}`",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(
            key.trim().replace('-', "_").to_ascii_lowercase(),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

struct Merger {
    file: HashMap<String, String>,
}

impl Merger {
    fn new(config: Option<&PathBuf>) -> Result<Self> {
        let file = match config {
            Some(path) => load_config_file(path)?,
            None => HashMap::new(),
        };
        Ok(Self { file })
    }

    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|_| {
                Error::Usage(format!("config key {key}: cannot parse `{raw}`"))
            }),
            None => Ok(default),
        }
    }

    fn get_opt<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config key {key}: cannot parse `{raw}`"))),
            None => Ok(None),
        }
    }

    fn get_list(&self, flag: &[String], key: &str) -> Vec<String> {
        if !flag.is_empty() {
            return flag.to_vec();
        }
        match self.file.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            None => Vec::new(),
        }
    }
}

fn parse_axis(spec: &str) -> Result<SweepAxis> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::Usage(format!(
            "axis `{spec}`: expected name:start:stop:step"
        )));
    }
    let param = match parts[0] {
        "mu" => SweepParam::Mu,
        "zeta" => SweepParam::Zeta,
        "alpha" => SweepParam::Alpha,
        other => {
            return Err(Error::Usage(format!(
                "axis `{spec}`: unknown parameter `{other}` (want mu, zeta or alpha)"
            )))
        }
    };
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Usage(format!("axis `{spec}`: bad {what} `{s}`")))
    };
    Ok(SweepAxis {
        param,
        start: num(parts[1], "start")?,
        stop: num(parts[2], "stop")?,
        step: num(parts[3], "step")?,
    })
}

fn parse_grid(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Usage(format!(
            "grid `{spec}`: expected start:stop:step"
        )));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Usage(format!("grid `{spec}`: bad number `{s}`")))
    };
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

fn parse_basis(name: &str) -> Result<BasisChoice> {
    match name {
        "bell" | "ent" => Ok(BasisChoice::Bell),
        "fac" | "factorized" => Ok(BasisChoice::Factorized),
        "com" | "combined" => Ok(BasisChoice::Combined),
        "opt" | "optimized" => Ok(BasisChoice::Optimized),
        other => Err(Error::Usage(format!(
            "basis `{other}`: want bell, fac, com or opt"
        ))),
    }
}

fn evolution_time(nu1: f64, nu_t: f64) -> Result<f64> {
    if !nu_t.is_finite() || nu_t < 0.0 {
        return Err(Error::Domain {
            name: "nu_t",
            value: nu_t,
            range: "[0, inf)",
        });
    }
    if nu1 == 0.0 {
        if nu_t > 0.0 {
            return Err(Error::Usage(
                "nu_t > 0 requires nu1 > 0 (nu_t = nu1 * t)".into(),
            ));
        }
        return Ok(0.0);
    }
    Ok(nu_t / nu1)
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        match cli.command {
            CliCommand::Capacity(a) => Self::capacity_config(a),
            CliCommand::Sweep(a) => Self::sweep_config(a),
            CliCommand::Limits(a) => Self::limits_config(a),
            CliCommand::Pulse(a) => Self::pulse_config(a),
        }
    }

    fn channel_of(m: &Merger, c: &CommonArgs) -> Result<(ChannelParams, f64, Option<PathBuf>, u64)> {
        let nu1 = m.get(c.nu1, "nu1", 1.0)?;
        let alpha = m.get(c.alpha, "alpha", 0.0)?;
        let zeta = m.get(c.zeta, "zeta", 0.0)?;
        let mu = m.get(c.mu, "mu", 0.0)?;
        let nu_t = m.get(c.nu_t, "nu_t", 0.1)?;
        let output = m.get_opt(c.output.clone(), "output")?;
        let seed = m.get(c.seed, "seed", 0)?;
        let params = ChannelParams::new(nu1, alpha, zeta, mu)?;
        Ok((params, nu_t, output, seed))
    }

    fn capacity_config(a: CapacityArgs) -> Result<Self> {
        let m = Merger::new(a.common.config.as_ref())?;
        let (channel, nu_t, output, seed) = Self::channel_of(&m, &a.common)?;
        let m_phi = m.get_opt(a.m_phi, "m_phi")?;
        let m_psi = m.get_opt(a.m_psi, "m_psi")?;
        let basis = match (m_phi, m_psi) {
            (None, None) => None,
            (Some(f), Some(p)) => Some(BasisParams::new(f, p)?),
            _ => {
                return Err(Error::Usage(
                    "m_phi and m_psi must be fixed together or not at all".into(),
                ))
            }
        };
        Ok(RunConfig::Capacity {
            channel,
            nu_t,
            basis,
            output,
            seed,
        })
    }

    fn sweep_config(a: SweepArgs) -> Result<Self> {
        let m = Merger::new(a.common.config.as_ref())?;
        let (base, nu_t, output, seed) = Self::channel_of(&m, &a.common)?;
        let axis_specs = m.get_list(&a.axes, "axis");
        if axis_specs.is_empty() {
            return Err(Error::Usage("sweep needs at least one --axis".into()));
        }
        if axis_specs.len() > 2 {
            return Err(Error::Usage(format!(
                "sweep supports at most 2 axes, got {}",
                axis_specs.len()
            )));
        }
        let axes: Vec<SweepAxis> = axis_specs
            .iter()
            .map(|s| parse_axis(s))
            .collect::<Result<_>>()?;
        let basis_names = m.get_list(&a.bases, "basis");
        let mut bases: Vec<BasisChoice> = basis_names
            .iter()
            .map(|s| parse_basis(s))
            .collect::<Result<_>>()?;
        if bases.is_empty() {
            bases.push(BasisChoice::Optimized);
        }
        Ok(RunConfig::Sweep {
            axes,
            base,
            nu_t,
            bases,
            output,
            seed,
        })
    }

    fn limits_config(a: LimitsArgs) -> Result<Self> {
        let m = Merger::new(a.common.config.as_ref())?;
        let nu_t = m.get(a.common.nu_t, "nu_t", 0.1)?;
        let output = m.get_opt(a.common.output.clone(), "output")?;
        let seed = m.get(a.common.seed, "seed", 0)?;
        let grid_spec = m
            .get_opt(a.grid, "grid")?
            .unwrap_or_else(|| "0:1:0.25".to_string());
        let grid = parse_grid(&grid_spec)?;
        Ok(RunConfig::Limits {
            grid,
            nu_t,
            output,
            seed,
        })
    }

    fn pulse_config(a: PulseArgs) -> Result<Self> {
        let m = Merger::new(a.common.config.as_ref())?;
        let output = m.get_opt(a.common.output.clone(), "output")?;
        let seed = m.get(a.common.seed, "seed", 0)?;
        let envelope = m.get(a.envelope, "envelope", "gaussian".to_string())?;
        let width = m.get(a.width, "width", 1.0)?;
        let amplitude = m.get(a.amplitude, "amplitude", 1.0)?;
        let amplitude2 = m.get(a.amplitude2, "amplitude2", amplitude)?;
        let delay = m.get(a.delay, "delay", 0.0)?;
        let delay2 = m.get(a.delay2, "delay2", delay)?;
        let chirp = m.get(a.chirp, "chirp", 0.0)?;
        let carrier = m.get(a.carrier, "carrier", 0.0)?;
        let carrier2 = m.get(a.carrier2, "carrier2", carrier)?;
        let corr_name = m.get(a.corr, "corr", "exponential".to_string())?;
        let t_c = m.get(a.t_c, "t_c", 1.0)?;
        let scale = m.get(a.scale, "scale", 1.0)?;
        let bias = m.get(a.bias, "bias", 1.0)?;
        let t_max = m.get(a.t_max, "t_max", 10.0)?;
        let points = m.get(a.points, "points", 200)?;

        let build = |amp: f64, del: f64, car: f64| -> Result<PulseSpec> {
            let p = match envelope.as_str() {
                "flat" => PulseSpec::flat(amp, width, del)?,
                "gaussian" => PulseSpec::gaussian(amp, width, del)?,
                other => {
                    return Err(Error::Usage(format!(
                        "envelope `{other}`: want flat or gaussian"
                    )))
                }
            };
            Ok(p.with_chirp(chirp).with_carrier(car))
        };
        let pulses = [
            build(amplitude, delay, carrier)?,
            build(amplitude2, delay2, carrier2)?,
        ];
        let kind = match corr_name.as_str() {
            "exponential" | "exp" => CorrelationKind::Exponential,
            "gaussian" => CorrelationKind::Gaussian,
            "delta" | "delta-approx" => CorrelationKind::DeltaApprox,
            other => {
                return Err(Error::Usage(format!(
                    "corr `{other}`: want exponential, gaussian or delta"
                )))
            }
        };
        let corr = CorrelationFn::new(kind, t_c, scale, bias, "cli")?;
        if !(t_max > 0.0) || points < 2 {
            return Err(Error::Usage(format!(
                "trajectory grid needs t_max > 0 and points >= 2 (got {t_max}, {points})"
            )));
        }
        Ok(RunConfig::Pulse {
            pulses,
            corr,
            t_max,
            points,
            output,
            seed,
        })
    }
}

// ---------------------------------------------------------------------------
// CSV emission

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// One row of the capacity CSV schema.
#[derive(Debug, Clone)]
pub struct CapacityRow {
    pub mu: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub nu_t: f64,
    pub basis: &'static str,
    pub m_phi: Option<f64>,
    pub m_psi: Option<f64>,
    pub p: Option<[f64; 4]>,
    pub capacity_bits: Option<f64>,
    pub skipped: bool,
}

impl CapacityRow {
    fn from_point(point: &SweepPoint, basis: BasisChoice) -> Self {
        match &point.result {
            Some(r) => CapacityRow {
                mu: point.mu,
                zeta: point.zeta,
                alpha: point.alpha,
                nu_t: point.nu_t,
                basis: basis.label(),
                m_phi: Some(r.m_phi),
                m_psi: Some(r.m_psi),
                p: Some(r.p),
                capacity_bits: Some(r.capacity_bits),
                skipped: false,
            },
            None => CapacityRow {
                mu: point.mu,
                zeta: point.zeta,
                alpha: point.alpha,
                nu_t: point.nu_t,
                basis: basis.label(),
                m_phi: None,
                m_psi: None,
                p: None,
                capacity_bits: None,
                skipped: true,
            },
        }
    }
}

/// Writes the pinned capacity schema: full-precision scientific notation,
/// empty numeric fields and status=skipped for infeasible points.
pub fn emit_csv<W: Write>(rows: &[CapacityRow], out: &mut W) -> Result<()> {
    writeln!(out, "{CAPACITY_CSV_HEADER}")?;
    for r in rows {
        let p = r.p.unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(r.mu),
            fmt(r.zeta),
            fmt(r.alpha),
            fmt(r.nu_t),
            r.basis,
            fmt_opt(r.m_phi),
            fmt_opt(r.m_psi),
            fmt_opt(r.p.map(|_| p[0])),
            fmt_opt(r.p.map(|_| p[1])),
            fmt_opt(r.p.map(|_| p[2])),
            fmt_opt(r.p.map(|_| p[3])),
            fmt_opt(r.capacity_bits),
            if r.skipped { "skipped" } else { "ok" },
        )?;
    }
    Ok(())
}

fn write_output(path: Option<&PathBuf>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body)
            .map_err(|e| Error::Io(format!("writing {}: {e}", p.display()))),
        None => {
            std::io::stdout()
                .write_all(body)
                .map_err(|e| Error::Io(e.to_string()))?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Command execution

/// Runs the resolved configuration and writes its CSV.
pub fn run(config: &RunConfig) -> Result<()> {
    let mut body: Vec<u8> = Vec::new();
    match config {
        RunConfig::Capacity {
            channel,
            nu_t,
            basis,
            output,
            ..
        } => {
            let t = evolution_time(channel.nu1(), *nu_t)?;
            let (row_basis, result) = match basis {
                Some(b) => {
                    let cm = chi_for_basis(channel, t, *b)?;
                    (
                        "fixed",
                        crate::capacity::CapacityResult {
                            capacity_bits: cm.chi,
                            p: cm.p,
                            m_phi: b.m_phi(),
                            m_psi: b.m_psi(),
                            evaluations: cm.evaluations,
                            converged: cm.converged,
                        },
                    )
                }
                None => ("opt", optimize_capacity(channel, t)?),
            };
            let rows = [CapacityRow {
                mu: channel.mu(),
                zeta: channel.zeta(),
                alpha: channel.alpha(),
                nu_t: *nu_t,
                basis: row_basis,
                m_phi: Some(result.m_phi),
                m_psi: Some(result.m_psi),
                p: Some(result.p),
                capacity_bits: Some(result.capacity_bits),
                skipped: false,
            }];
            emit_csv(&rows, &mut body)?;
            write_output(output.as_ref(), &body)
        }
        RunConfig::Sweep {
            axes,
            base,
            nu_t,
            bases,
            output,
            ..
        } => {
            let t = evolution_time(base.nu1(), *nu_t)?;
            let mut rows: Vec<CapacityRow> = Vec::new();
            for choice in bases {
                let points = sweep_capacity(axes, base, t, choice.fixed())?;
                rows.extend(points.iter().map(|p| CapacityRow::from_point(p, *choice)));
            }
            // lexicographic in the swept axes (in the order given), basis last
            let key = |r: &CapacityRow| -> (Vec<f64>, &'static str) {
                let vals = axes
                    .iter()
                    .map(|a| match a.param {
                        SweepParam::Mu => r.mu,
                        SweepParam::Zeta => r.zeta,
                        SweepParam::Alpha => r.alpha,
                    })
                    .collect();
                (vals, r.basis)
            };
            rows.sort_by(|a, b| {
                let (va, ba) = key(a);
                let (vb, bb) = key(b);
                va.iter()
                    .zip(vb.iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != std::cmp::Ordering::Equal)
                    .unwrap_or_else(|| ba.cmp(bb))
            });
            emit_csv(&rows, &mut body)?;
            write_output(output.as_ref(), &body)
        }
        RunConfig::Limits {
            grid,
            nu_t,
            output,
            ..
        } => {
            let (start, stop, step) = *grid;
            if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || stop < start {
                return Err(Error::Usage(format!(
                    "grid {start}:{stop}:{step} must lie in [0, 1] with start <= stop"
                )));
            }
            let values: Vec<f64> = if start == stop {
                vec![start]
            } else {
                if !(step > 0.0) {
                    return Err(Error::Usage(format!("grid step {step} must be positive")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| (start + i as f64 * step).min(stop)).collect()
            };
            writeln!(body, "{LIMITS_CSV_HEADER}")?;
            for case in LimitCase::ALL {
                for p in &values {
                    let r = limit_relation_residual(case, *p, *nu_t)?;
                    writeln!(
                        body,
                        "{},{},{},{},{},{},{}",
                        case.tag(),
                        fmt(*p),
                        fmt(*nu_t),
                        fmt(r.chi_lhs),
                        fmt(r.chi_rhs),
                        fmt(r.f_term),
                        fmt(r.epsilon),
                    )?;
                }
            }
            write_output(output.as_ref(), &body)
        }
        RunConfig::Pulse {
            pulses,
            corr,
            t_max,
            points,
            output,
            ..
        } => {
            let grid: Vec<f64> = (0..*points)
                .map(|i| t_max * i as f64 / (*points - 1) as f64)
                .collect();
            let traj = rate_trajectory(pulses, corr, &grid)?;
            writeln!(body, "{PULSE_CSV_HEADER}")?;
            for (t, r) in traj.times().iter().zip(traj.rates().iter()) {
                let eff = if *t > 0.0 {
                    effective_params(&traj, *t).ok()
                } else {
                    None
                };
                let (eff_fields, status) = match &eff {
                    Some(p) => (
                        [
                            fmt(p.nu1()),
                            fmt(p.alpha()),
                            fmt(p.zeta()),
                            fmt(p.mu()),
                        ],
                        "ok",
                    ),
                    None => (Default::default(), "undefined"),
                };
                writeln!(
                    body,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt(*t),
                    fmt(r.r1()[(0, 0)]),
                    fmt(r.r1()[(1, 1)]),
                    fmt(r.r1()[(0, 1)]),
                    fmt(r.r0()[(0, 0)]),
                    fmt(r.r0()[(1, 1)]),
                    fmt(r.r0()[(0, 1)]),
                    eff_fields[0],
                    eff_fields[1],
                    eff_fields[2],
                    eff_fields[3],
                    status,
                )?;
            }
            write_output(output.as_ref(), &body)
        }
    }
}
