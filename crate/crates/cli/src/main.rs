//! Command-line front end: build the chain state, scan fringes, fit them,
//! model backgrounds, and reproduce the canned figure datasets.
//!
//! Angles on the command line and in config files are degrees; the
//! library works in radians. Exit codes: 0 success, 2 configuration or
//! input problems, 3 numerical refusals (aliasing, stationary phase,
//! singular fits).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use noonlab::background::{
    accidental_triples, calibrate_to_constant, fourier_decompose, paper_channels, Channel,
    SourceRates,
};
use noonlab::construction::{run_paper_chain, ChainParams};
use noonlab::detection::{coincidence_rate, AnalyzerConfig, DetectionPattern};
use noonlab::elements::{circuit_transform, CircuitElement};
use noonlab::error::Error;
use noonlab::experiment::fit::fit_fringe;
use noonlab::experiment::presets::{reproduce, Preset};
use noonlab::experiment::{
    poisson, scan, BackgroundModel, FringeData, PhaseScan, ScanConfig,
};
use noonlab::transform::apply_mode_transform;
use noonlab::StateVector;

#[derive(Parser)]
#[command(name = "noonlab", version, about = "Three-photon NOON fringe simulator")]
struct Cli {
    /// Seed for sampled count records.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON run configuration (used by `scan`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction chain and emit the state with its bookkeeping.
    Build(BuildArgs),
    /// Simulate a wedge scan; writes fringe CSV.
    Scan,
    /// Fit A + B cos(k phi + delta) to fringe CSV.
    Fit(FitArgs),
    /// Evaluate, decompose, or calibrate the accidental background.
    Background(BackgroundArgs),
    /// Rebuild one of the bundled figure datasets.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Wedge phase in degrees.
    #[arg(long, default_value_t = 0.0)]
    phi_deg: f64,
    /// Half-wave-plate angle in degrees.
    #[arg(long)]
    hwp_deg: Option<f64>,
    /// Quarter-wave-plate angle in degrees.
    #[arg(long)]
    qwp_deg: Option<f64>,
    /// LO polarization from vertical, degrees.
    #[arg(long)]
    lo_angle_deg: Option<f64>,
    /// Partial-polarizer H amplitude transmission (pre-injection stack).
    #[arg(long)]
    pp_th: Option<f64>,
    /// Partial-polarizer V amplitude transmission (pre-injection stack).
    #[arg(long)]
    pp_tv: Option<f64>,
    /// Injection interface H amplitude transmission.
    #[arg(long)]
    inject_th: Option<f64>,
    /// Injection interface V amplitude transmission.
    #[arg(long)]
    inject_tv: Option<f64>,
    /// Fix the wedge phase origin (degrees) instead of solving it.
    #[arg(long)]
    phase_origin_deg: Option<f64>,
    /// Photon cap for intermediate states.
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Args)]
struct FitArgs {
    /// Fringe CSV produced by `scan`, `background`, or `reproduce`.
    #[arg(long)]
    data: PathBuf,
    /// Harmonic to fit.
    #[arg(long)]
    k: u32,
    /// Which CSV column to fit.
    #[arg(long, value_enum, default_value_t = FitColumn::Sampled)]
    column: FitColumn,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitColumn {
    Sampled,
    Mean,
}

#[derive(Args)]
struct BackgroundArgs {
    /// Source rates: `paper` or a path to a rates JSON file.
    #[arg(long, default_value = "paper")]
    rates: String,
    /// Detection pattern as `plus,minus`.
    #[arg(long, default_value = "2,1")]
    pattern: String,
    /// Analyzer basis angle, degrees from vertical.
    #[arg(long, default_value_t = 45.0)]
    basis_deg: f64,
    /// Detector fanout as `plus,minus`.
    #[arg(long, default_value = "3,3")]
    detectors: String,
    /// Phase points over one full period.
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Emit the harmonic decomposition JSON instead of CSV.
    #[arg(long)]
    decompose: bool,
    /// Rescale all rates so the fringe constant hits this value, then
    /// emit the scaled rates JSON.
    #[arg(long)]
    calibrate_constant: Option<f64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of fig2a, fig2b, fig2c, fig2d, fig3a, fig3b.
    #[arg(long)]
    preset: String,
}

/// Scan run configuration. Angles in degrees.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    points: usize,
    #[serde(default)]
    start_deg: f64,
    #[serde(default = "default_span_deg")]
    span_deg: f64,
    analyzer: AnalyzerSection,
    pattern: [u32; 2],
    scale: f64,
    #[serde(default)]
    seed: Option<u64>,
    signal: SignalSection,
    #[serde(default)]
    background: Option<BackgroundSection>,
}

fn default_span_deg() -> f64 {
    360.0
}

#[derive(Deserialize)]
struct AnalyzerSection {
    basis_deg: f64,
    detectors: [u32; 2],
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SignalSection {
    /// The paper chain, with optional overrides.
    Chain {
        #[serde(default)]
        hwp_deg: Option<f64>,
        #[serde(default)]
        qwp_deg: Option<f64>,
        #[serde(default)]
        lo_angle_deg: Option<f64>,
        #[serde(default)]
        pp_th: Option<f64>,
        #[serde(default)]
        pp_tv: Option<f64>,
        #[serde(default)]
        inject_th: Option<f64>,
        #[serde(default)]
        inject_tv: Option<f64>,
        #[serde(default)]
        phase_origin_deg: Option<f64>,
        #[serde(default)]
        n_max: Option<u32>,
    },
    /// An arbitrary element list applied to a state loaded from JSON.
    /// Exactly the element with `"phi": "scan"` receives the scan phase.
    Circuit {
        input: PathBuf,
        elements: serde_json::Value,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BackgroundSection {
    /// Either the string "paper_like" or an inline rates object.
    rates: RatesSection,
    #[serde(default)]
    channels: Option<Vec<Channel>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatesSection {
    Named(String),
    Inline(serde_json::Value),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let ok = match &cli.out {
                Some(path) => fs::write(path, output).map_err(Error::from),
                None => {
                    print!("{output}");
                    Ok(())
                }
            };
            match ok {
                Ok(()) => ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(exit_code(&err))
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Configuration and input mistakes exit 2; numerical refusals exit 3.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_)
        | Error::Serialization(_)
        | Error::InvalidParameter(_)
        | Error::InvalidModeSet
        | Error::ModeSetMismatch(_, _)
        | Error::UnknownMode(_)
        | Error::OccupationLength { .. }
        | Error::AmplitudeRange { .. } => 2,
        _ => 3,
    }
}

fn run(cli: &Cli) -> Result<String, Error> {
    match &cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Scan => cmd_scan(cli),
        Command::Fit(args) => cmd_fit(args),
        Command::Background(args) => cmd_background(args, cli.seed),
        Command::Reproduce(args) => cmd_reproduce(args, cli.seed),
    }
}

fn cmd_build(args: &BuildArgs) -> Result<String, Error> {
    let mut params = ChainParams::default();
    if let Some(v) = args.hwp_deg {
        params.hwp_theta = v.to_radians();
    }
    if let Some(v) = args.qwp_deg {
        params.qwp_theta = v.to_radians();
    }
    if let Some(v) = args.lo_angle_deg {
        params.lo_angle = v.to_radians();
    }
    if let Some(v) = args.pp_th {
        params.pp_t_h = v;
    }
    if let Some(v) = args.pp_tv {
        params.pp_t_v = v;
    }
    if let Some(v) = args.inject_th {
        params.inject_t_h = v;
    }
    if let Some(v) = args.inject_tv {
        params.inject_t_v = v;
    }
    if let Some(v) = args.phase_origin_deg {
        params.phase_origin = Some(v.to_radians());
    }
    if let Some(v) = args.n_max {
        params.n_max = v;
    }
    let result = run_paper_chain(args.phi_deg.to_radians(), &params)?;
    Ok(result.to_json())
}

fn cmd_scan(cli: &Cli) -> Result<String, Error> {
    let path = cli.config.as_ref().ok_or_else(|| {
        Error::InvalidParameter("scan needs --config pointing at a run JSON".into())
    })?;
    let text = fs::read_to_string(path)?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))?;

    let analyzer = AnalyzerConfig::new(
        config.analyzer.basis_deg.to_radians(),
        config.analyzer.detectors[0],
        config.analyzer.detectors[1],
    )?;
    let pattern = DetectionPattern::new(config.pattern[0], config.pattern[1]);
    let phases = PhaseScan::new(
        config.start_deg.to_radians(),
        config.span_deg.to_radians(),
        config.points,
    )?;
    // The flag wins over the config file only when the file is silent.
    let seed = config.seed.unwrap_or(cli.seed);
    let background = config
        .background
        .as_ref()
        .map(load_background)
        .transpose()?;

    let data = match &config.signal {
        SignalSection::Chain {
            hwp_deg,
            qwp_deg,
            lo_angle_deg,
            pp_th,
            pp_tv,
            inject_th,
            inject_tv,
            phase_origin_deg,
            n_max,
        } => {
            let mut chain = ChainParams::default();
            if let Some(v) = hwp_deg {
                chain.hwp_theta = v.to_radians();
            }
            if let Some(v) = qwp_deg {
                chain.qwp_theta = v.to_radians();
            }
            if let Some(v) = lo_angle_deg {
                chain.lo_angle = v.to_radians();
            }
            if let Some(v) = pp_th {
                chain.pp_t_h = *v;
            }
            if let Some(v) = pp_tv {
                chain.pp_t_v = *v;
            }
            if let Some(v) = inject_th {
                chain.inject_t_h = *v;
            }
            if let Some(v) = inject_tv {
                chain.inject_t_v = *v;
            }
            if let Some(v) = phase_origin_deg {
                chain.phase_origin = Some(v.to_radians());
            }
            if let Some(v) = n_max {
                chain.n_max = *v;
            }
            scan(&ScanConfig {
                phases,
                chain,
                analyzer,
                pattern,
                scale: config.scale,
                background,
                seed,
            })?
        }
        SignalSection::Circuit { input, elements } => circuit_scan(
            input,
            elements,
            phases,
            analyzer,
            pattern,
            config.scale,
            background,
            seed,
        )?,
    };
    Ok(data.to_csv())
}

/// Scan an arbitrary circuit: apply the element list (with the scan slot
/// set per point) to the input state; non-unitary elements post-select.
#[allow(clippy::too_many_arguments)]
fn circuit_scan(
    input: &PathBuf,
    elements: &serde_json::Value,
    phases: PhaseScan,
    analyzer: AnalyzerConfig,
    pattern: DetectionPattern,
    scale: f64,
    background: Option<BackgroundModel>,
    seed: u64,
) -> Result<FringeData, Error> {
    let element_text =
        serde_json::to_string(elements).map_err(|e| Error::Serialization(e.to_string()))?;
    let circuit: Vec<CircuitElement> = noonlab::elements::parse_circuit(&element_text)?;
    let state = StateVector::from_json(&fs::read_to_string(input)?)?;
    state.check_normalized()?;

    let phis = phases.phis();
    let mut mean = Vec::with_capacity(phis.len());
    for &phi in &phis {
        let transform = circuit_transform(&circuit, phi)?;
        let out = apply_mode_transform(&state, &transform)?;
        let survival = out.squared_norm();
        let mut expected = if survival > 0.0 {
            scale * survival * coincidence_rate(&out.normalized()?, &analyzer, pattern)?
        } else {
            0.0
        };
        if let Some(bg) = &background {
            expected +=
                accidental_triples(&bg.rates, &bg.channels, &analyzer, pattern, phi)?;
        }
        mean.push(expected);
    }

    let mut sampled = Vec::with_capacity(phis.len());
    let mut sigma = Vec::with_capacity(phis.len());
    for (i, &m) in mean.iter().enumerate() {
        sampled.push(poisson::sample_streamed(seed, i as u64, m)? as f64);
        sigma.push(m.sqrt());
    }
    Ok(FringeData {
        phis,
        mean,
        sampled,
        sigma,
    })
}

fn load_background(section: &BackgroundSection) -> Result<BackgroundModel, Error> {
    let rates = match &section.rates {
        RatesSection::Named(name) if name == "paper_like" => SourceRates::paper_like(),
        RatesSection::Named(other) => {
            return Err(Error::InvalidParameter(format!(
                "unknown rates name '{other}'; use \"paper_like\" or an inline object"
            )))
        }
        RatesSection::Inline(value) => {
            let text =
                serde_json::to_string(value).map_err(|e| Error::Serialization(e.to_string()))?;
            SourceRates::from_json(&text)?
        }
    };
    Ok(BackgroundModel {
        rates,
        channels: section.channels.clone().unwrap_or_else(paper_channels),
    })
}

fn cmd_fit(args: &FitArgs) -> Result<String, Error> {
    let data = FringeData::from_csv(&fs::read_to_string(&args.data)?)?;
    let values = match args.column {
        FitColumn::Sampled => &data.sampled,
        FitColumn::Mean => &data.mean,
    };
    let fit = fit_fringe(&data.phis, values, args.k)?;
    Ok(fit.to_json())
}

fn parse_pair(text: &str, what: &str) -> Result<(u32, u32), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be 'a,b', got '{text}'"
        )));
    }
    let a = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{what}: bad number '{}'", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{what}: bad number '{}'", parts[1])))?;
    Ok((a, b))
}

fn cmd_background(args: &BackgroundArgs, seed: u64) -> Result<String, Error> {
    let rates = if args.rates == "paper" {
        SourceRates::paper_like()
    } else {
        SourceRates::from_json(&fs::read_to_string(&args.rates)?)?
    };
    let (p, m) = parse_pair(&args.pattern, "--pattern")?;
    let pattern = DetectionPattern::new(p, m);
    let (kp, km) = parse_pair(&args.detectors, "--detectors")?;
    let analyzer = AnalyzerConfig::new(args.basis_deg.to_radians(), kp, km)?;
    let channels = paper_channels();

    if let Some(target) = args.calibrate_constant {
        let (scaled, factor) = calibrate_to_constant(&rates, &channels, &analyzer, pattern, target)?;
        let mut value: serde_json::Value = serde_json::from_str(&scaled.to_json())
            .map_err(|e| Error::Serialization(e.to_string()))?;
        value["calibration_factor"] = serde_json::json!(factor);
        return serde_json::to_string_pretty(&value)
            .map_err(|e| Error::Serialization(e.to_string()));
    }

    let phis = PhaseScan::full_period(args.points)?.phis();
    let mean: Result<Vec<f64>, Error> = phis
        .iter()
        .map(|&phi| accidental_triples(&rates, &channels, &analyzer, pattern, phi))
        .collect();
    let mean = mean?;

    if args.decompose {
        let d = fourier_decompose(&phis, &mean, 3)?;
        return serde_json::to_string_pretty(&d).map_err(|e| Error::Serialization(e.to_string()));
    }

    let mut sampled = Vec::with_capacity(mean.len());
    let mut sigma = Vec::with_capacity(mean.len());
    for (i, &m) in mean.iter().enumerate() {
        sampled.push(poisson::sample_streamed(seed, i as u64, m)? as f64);
        sigma.push(m.sqrt());
    }
    let data = FringeData {
        phis,
        mean,
        sampled,
        sigma,
    };
    Ok(data.to_csv())
}

fn cmd_reproduce(args: &ReproduceArgs, seed: u64) -> Result<String, Error> {
    let preset: Preset = args.preset.parse()?;
    let bundle = reproduce(preset, seed)?;
    Ok(bundle.to_json())
}
