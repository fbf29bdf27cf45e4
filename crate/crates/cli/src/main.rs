use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vortex_isac::comm::{ChannelModel, LinkOptions};
use vortex_isac::cube::Stage;
use vortex_isac::decode::decode;
use vortex_isac::harness::{self, McSpec, PointingSource, SweepSpec};
use vortex_isac::waveform::PilotKind;
use vortex_isac::{validate_scenario, Error, Estimator, EstimatorKind, Result, Scenario, SystemConfig};

/// Vortex-wavefront OAM sensing and communication experiments.
#[derive(Parser, Debug)]
#[command(name = "vortex-isac", version)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate one scenario; writes estimates.csv, trace.csv, spectra.csv.
    Sense(SenseArgs),
    /// Monte Carlo error statistics over random targets; writes mc.csv.
    Mc(McArgs),
    /// Pilot-length versus spectral-efficiency sweep; writes sweep.csv.
    SweepPilots(SweepArgs),
    /// Per-mode SINR of the communication phase; writes link.csv.
    Link(LinkArgs),
    /// Check the analytic identities; nonzero exit on failure.
    Selftest(SelftestArgs),
    /// Inter-mode coupling of one decoding window; writes hmatrix.csv.
    DumpHmatrix(HmatrixArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON system configuration (default: the built-in 77 GHz setup).
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON scenario (default: the three-target scene).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Master seed (default: the scenario's rng_seed).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sensing symbols, overriding the configuration.
    #[arg(long)]
    psen: Option<usize>,
    /// Sensing SNR in dB, overriding the configuration.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, value_enum, default_value_t = Pilots::Unit)]
    pilots: Pilots,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pilots {
    Unit,
    RandomQpsk,
}

impl From<Pilots> for PilotKind {
    fn from(p: Pilots) -> Self {
        match p {
            Pilots::Unit => PilotKind::Unit,
            Pilots::RandomQpsk => PilotKind::RandomQpsk,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Channel {
    FarField,
    Exact,
}

impl From<Channel> for ChannelModel {
    fn from(c: Channel) -> Self {
        match c {
            Channel::FarField => ChannelModel::FarField,
            Channel::Exact => ChannelModel::Exact,
        }
    }
}

#[derive(Args, Debug)]
struct SenseArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "cdmm-vcmem")]
    estimator: EstimatorKind,
    /// Also write the raw and decoded cubes.
    #[arg(long)]
    dump_cubes: bool,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Estimators to compare.
    #[arg(
        long = "estimator",
        value_delimiter = ',',
        default_value = "cdmm-vcmem,tdmm-baseline"
    )]
    estimators: Vec<EstimatorKind>,
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20")]
    snrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,3,5,8,10")]
    velocities: Vec<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value = "cdmm-vcmem")]
    estimator: EstimatorKind,
    /// Pilot lengths (default: 8..256 and P).
    #[arg(long, value_delimiter = ',')]
    psens: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "15")]
    snrs: Vec<f64>,
    /// UE radial velocity in m/s.
    #[arg(long, default_value_t = 3.0)]
    velocity: f64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    subcarriers: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Channel::FarField)]
    channel: Channel,
}

#[derive(Args, Debug)]
struct LinkArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "cdmm-vcmem")]
    estimator: EstimatorKind,
    /// sensed, truth or boresight.
    #[arg(long, default_value = "sensed")]
    pointing: PointingSource,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    subcarriers: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Channel::FarField)]
    channel: Channel,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Decode with a sign-flipped Doppler phasor to confirm the checks bite.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct HmatrixArgs {
    #[command(flatten)]
    common: Common,
    /// Number of Hadamard-coded modes (default: the configuration's U).
    #[arg(long)]
    modes: Option<usize>,
    /// Target radial velocity in m/s.
    #[arg(long, default_value_t = 5.0)]
    velocity: f64,
    /// Opening symbol of the window, 1-based.
    #[arg(long, default_value_t = 1)]
    window: usize,
}

fn load_config(path: Option<&Path>) -> Result<SystemConfig> {
    let cfg = match path {
        Some(p) => SystemConfig::load(p)?,
        None => SystemConfig::table1(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_scenario(path: Option<&Path>) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p),
        None => Ok(Scenario::three_targets(1)),
    }
}

/// Configuration after the command-line overrides, the scenario and the
/// effective seed.
fn setup(c: &Common, default_psen: Option<usize>) -> Result<(SystemConfig, Scenario, u64)> {
    let mut cfg = load_config(c.config.as_deref())?;
    if let Some(p) = c.psen.or(default_psen) {
        cfg = cfg.with_sensing_symbols(p);
    }
    if let Some(s) = c.snr {
        cfg = cfg.with_snr_db(s);
    }
    cfg.validate()?;
    let sc = load_scenario(c.scenario.as_deref())?;
    for w in validate_scenario(&cfg, &sc)? {
        log::warn!("{w}");
    }
    let seed = c.seed.unwrap_or(sc.rng_seed);
    Ok((cfg, sc, seed))
}

fn sense(a: &SenseArgs) -> Result<()> {
    let (cfg, sc, seed) = setup(&a.common, None)?;
    let est = Estimator::new(&cfg, a.estimator, a.common.pilots.into(), seed)?;
    let run = harness::run_sense(&est, &cfg, &sc.targets, seed)?;
    let hash = harness::run_fingerprint(&cfg, Some(&sc), &format!("sense {} {:?}", a.estimator, a.common.pilots))?;
    let out = &a.common.out;
    harness::write_csv(
        out.join("estimates.csv"),
        &hash,
        seed,
        &harness::estimate_rows(&run),
        &harness::ESTIMATE_HEADER,
    )?;
    harness::write_csv(
        out.join("trace.csv"),
        &hash,
        seed,
        &harness::trace_rows(&run),
        &harness::ESTIMATE_HEADER,
    )?;
    let profiles = harness::sense_profiles(&est, &run)?;
    harness::write_csv(
        out.join("spectra.csv"),
        &hash,
        seed,
        &harness::spectrum_rows(&profiles),
        &harness::SPECTRUM_HEADER,
    )?;
    if a.dump_cubes {
        run.echo.noisy.write(out.join("raw.cube"), Stage::Raw)?;
        let v = run.outcome.compensation.first().copied().unwrap_or(0.0);
        let stride = a.estimator.stride(cfg.num_modes);
        let dec = decode(&cfg, est.waveform(), &run.echo.noisy, v, stride)?;
        dec.cube.write(out.join("decoded.cube"), Stage::Decoded)?;
    }
    println!(
        "{}: {} iterations, final NMSE {:.2} dB",
        a.estimator,
        run.outcome.iterations(),
        run.outcome.final_nmse_db()
    );
    for (q, e) in run.errors.iter().enumerate() {
        println!(
            "  target {q}: 3-D error {:.3} m, velocity error {:.4} m/s, azimuth error {:.3} deg, elevation error {:.3} deg",
            e.position,
            e.velocity,
            e.azimuth.to_degrees(),
            e.elevation.to_degrees()
        );
    }
    Ok(())
}

fn mc(a: &McArgs) -> Result<()> {
    let (cfg, _, seed) = setup(&a.common, Some(128))?;
    let spec = McSpec {
        estimators: a.estimators.clone(),
        snrs_db: a.snrs.clone(),
        velocities: a.velocities.clone(),
        trials: a.trials,
        seed,
        pilots: a.common.pilots.into(),
    };
    let rows = harness::run_mc(&cfg, &spec)?;
    let hash = harness::run_fingerprint(&cfg, None, &format!("mc {spec:?}"))?;
    harness::write_csv(a.common.out.join("mc.csv"), &hash, seed, &rows, &harness::MC_HEADER)?;
    println!("{} cells written", rows.len());
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let (cfg, _, seed) = setup(&a.common, None)?;
    let mut spec = SweepSpec::new(cfg.num_symbols_per_cpi);
    if let Some(p) = &a.psens {
        spec.psens = p.clone();
    }
    spec.snrs_db = a.snrs.clone();
    spec.trials = a.trials;
    spec.seed = seed;
    spec.estimator = a.estimator;
    spec.velocity = a.velocity;
    spec.pilots = a.common.pilots.into();
    spec.link = LinkOptions {
        subcarriers: a.subcarriers.clone(),
        snr_db: 0.0,
        model: a.channel.into(),
    };
    let rows = harness::run_sweep(&cfg, &spec)?;
    let hash = harness::run_fingerprint(&cfg, None, &format!("sweep {spec:?}"))?;
    harness::write_csv(
        a.common.out.join("sweep.csv"),
        &hash,
        seed,
        &rows,
        &harness::SWEEP_HEADER,
    )?;
    println!("{} pilot lengths written", rows.len());
    Ok(())
}

fn link(a: &LinkArgs) -> Result<()> {
    let (cfg, sc, seed) = setup(&a.common, None)?;
    let est = Estimator::new(&cfg, a.estimator, a.common.pilots.into(), seed)?;
    let opts = LinkOptions {
        subcarriers: a.subcarriers.clone(),
        snr_db: cfg.snr_db,
        model: a.channel.into(),
    };
    let run = harness::run_link(&est, &cfg, &sc, seed, a.pointing, &opts)?;
    let hash = harness::run_fingerprint(
        &cfg,
        Some(&sc),
        &format!("link {} {} {opts:?}", a.estimator, a.pointing),
    )?;
    harness::write_csv(
        a.common.out.join("link.csv"),
        &hash,
        seed,
        &harness::link_rows(&run.report),
        &harness::LINK_HEADER,
    )?;
    println!(
        "angle error {:.4} deg, mean SINR {:.2} dB, C = {:.3}, SE_avg = {:.4}",
        run.angle_error.to_degrees(),
        run.report.mean_sinr_db,
        run.report.c_paper,
        run.report.se_avg
    );
    Ok(())
}

fn selftest(a: &SelftestArgs) -> Result<bool> {
    let cfg = load_config(a.config.as_deref())?;
    let fault = a.inject_fault.then_some(harness::Fault::FlippedCompensation);
    let checks = harness::selftest(&cfg, fault);
    for c in &checks {
        println!(
            "{:<32} {}  {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn dump_hmatrix(a: &HmatrixArgs) -> Result<()> {
    let (cfg, _, seed) = setup(&a.common, None)?;
    let modes = a.modes.unwrap_or(cfg.num_modes);
    let rows = harness::hmatrix_rows(&cfg, modes, a.velocity, a.window)?;
    let hash = harness::run_fingerprint(&cfg, None, &format!("hmatrix {modes} {} {}", a.velocity, a.window))?;
    harness::write_csv(
        a.common.out.join("hmatrix.csv"),
        &hash,
        seed,
        &rows,
        &harness::HMATRIX_HEADER,
    )?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Sense(a) => sense(a).map(|_| true),
        Command::Mc(a) => mc(a).map(|_| true),
        Command::SweepPilots(a) => sweep(a).map(|_| true),
        Command::Link(a) => link(a).map(|_| true),
        Command::Selftest(a) => selftest(a),
        Command::DumpHmatrix(a) => dump_hmatrix(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Parse { .. } = e {
                return ExitCode::from(3);
            }
            ExitCode::FAILURE
        }
    }
}
