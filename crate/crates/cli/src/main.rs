//! rfsim: render, capture, beamform, range-profile and sweep experiments
//! driven by TOML scene files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric divergence,
//! 4 I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rfsim_cli::config::{ConfigError, SceneConfig};
use rfsim_cli::output::{
    freq_tag, write_field_csv, write_field_pgm, write_image_csv, write_report, write_xy_csv,
    write_xyz_csv, ReportWarnings, RunReport,
};
use rfsim_core::imaging::{
    self, angular_resolution, delay_and_sum, range_profile, tof_resolution,
};
use rfsim_core::receiver::{capture, CaptureOptions, ReceiverError};
use rfsim_core::wavefield::{exact_patch_integral, render_field, FieldError, RenderOptions};
use rfsim_core::wavelength;

#[derive(Parser)]
#[command(name = "rfsim", version, about = "Frequency-domain RF wave-field simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render complex field maps on the scene grid (CSV + PGM per frequency).
    Render(CommonArgs),
    /// Capture the complex image I(antenna, frequency) with the scene array.
    Capture(CommonArgs),
    /// Capture, then beamform each frequency into an angular power spectrum.
    Beamform(CommonArgs),
    /// Capture, then resolve one antenna's spectrum into power vs delay.
    RangeProfile {
        #[command(flatten)]
        common: CommonArgs,
        /// Antenna index to transform.
        #[arg(long, default_value_t = 0)]
        antenna: usize,
    },
    /// Closed-form and simulated parameter sweeps.
    Sweep {
        kind: SweepKind,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Scene file (TOML).
    #[arg(long)]
    scene: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override run.max_bounces.
    #[arg(long)]
    bounces: Option<usize>,
    /// Override run.tol.
    #[arg(long)]
    tol: Option<f64>,
    /// Override run.mode (radar | wifi).
    #[arg(long)]
    mode: Option<ModeArg>,
    /// Override run.rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Radar,
    Wifi,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Aperture needed for 10° resolution, and resolution of a 10 cm array,
    /// across the RF band.
    Aperture,
    /// Delay resolution versus measurement bandwidth.
    Bandwidth,
    /// Reflected amplitude versus object size and angle (monostatic).
    Objectsize,
    /// Finite-patch aperture factor versus width and angle.
    Patchwidth,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Divergence(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Divergence(m) => write!(f, "numeric divergence: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Diverged { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ReceiverError> for CliError {
    fn from(e: ReceiverError) -> Self {
        match e {
            ReceiverError::Field(f) => f.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<imaging::ImagingError> for CliError {
    fn from(e: imaging::ImagingError) -> Self {
        match e {
            imaging::ImagingError::Field(f) => f.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Render(c)
        | Command::Capture(c)
        | Command::Beamform(c)
        | Command::RangeProfile { common: c, .. }
        | Command::Sweep { common: c, .. } => c,
    };
    let text = std::fs::read_to_string(&common.scene)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.scene.display())))?;
    let mut cfg = SceneConfig::parse(&text)?;
    if let Some(b) = common.bounces {
        cfg.run.max_bounces = b;
    }
    if let Some(t) = common.tol {
        cfg.run.tol = t;
    }
    if let Some(m) = common.mode {
        cfg.run.mode = match m {
            ModeArg::Radar => rfsim_cli::config::ModeConfig::Radar,
            ModeArg::Wifi => rfsim_cli::config::ModeConfig::Wifi,
        };
    }
    if let Some(s) = common.seed {
        cfg.run.rng_seed = s;
    }
    std::fs::create_dir_all(&common.out)?;
    let threads = common.threads.unwrap_or(0);
    if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
        pool.install(|| dispatch(&cli, &cfg, &common.out, threads))
    } else {
        dispatch(&cli, &cfg, &common.out, threads)
    }
}

fn dispatch(cli: &Cli, cfg: &SceneConfig, out: &Path, threads: usize) -> Result<(), CliError> {
    let start = Instant::now();
    let mut warnings = ReportWarnings::default();
    let (command, outputs, frequency_count, patch_count) = match &cli.command {
        Command::Render(_) => run_render(cfg, out, &mut warnings)?,
        Command::Capture(_) => run_capture(cfg, out, &mut warnings)?,
        Command::Beamform(_) => run_beamform(cfg, out, &mut warnings)?,
        Command::RangeProfile { antenna, .. } => {
            run_range_profile(cfg, out, *antenna, &mut warnings)?
        }
        Command::Sweep { kind, .. } => run_sweep(*kind, cfg, out, &mut warnings)?,
    };
    let report = RunReport {
        command,
        wall_time_s: start.elapsed().as_secs_f64(),
        patch_count,
        frequency_count,
        mode: match cfg.run.mode {
            rfsim_cli::config::ModeConfig::Radar => "radar".into(),
            rfsim_cli::config::ModeConfig::Wifi => "wifi".into(),
        },
        rng_seed: cfg.run.rng_seed,
        threads,
        warnings,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
    };
    write_report(out, &report)?;
    Ok(())
}

type CommandOutput = (String, Vec<PathBuf>, usize, usize);

fn run_render(
    cfg: &SceneConfig,
    out: &Path,
    warnings: &mut ReportWarnings,
) -> Result<CommandOutput, CliError> {
    let built = cfg.build()?;
    warnings.wide_patch_overrides = built.wide_patch_overrides;
    let grid = built
        .grid
        .ok_or_else(|| CliError::Config("grid: section required for render".into()))?;
    let components = built
        .emitter
        .frequency_components()
        .map_err(|e| CliError::Config(format!("emitter.modulation: {e}")))?;
    let sources: Vec<_> = components
        .iter()
        .map(|c| (built.emitter.position, *c))
        .collect();
    let opts = RenderOptions {
        max_bounces: cfg.run.max_bounces,
        tol: cfg.run.tol,
        include_direct: cfg.run.include_direct,
    };
    let rendered = render_field(&built.scene, &sources, &grid, &opts)?;
    warnings.singular_grid_points = rendered.warnings.singular_grid_points;
    let mut outputs = Vec::new();
    for map in &rendered.maps {
        outputs.push(write_field_csv(out, map)?);
        outputs.push(write_field_pgm(out, map)?);
    }
    Ok((
        "render".into(),
        outputs,
        rendered.maps.len(),
        built.scene.patches.len(),
    ))
}

fn capture_image(
    cfg: &SceneConfig,
    built: &rfsim_cli::config::BuiltScene,
) -> Result<(rfsim_core::RfImage, Vec<rfsim_core::Vec2>), CliError> {
    let array = built
        .array
        .as_ref()
        .ok_or_else(|| CliError::Config("array: section required for capture".into()))?;
    let opts = CaptureOptions {
        max_bounces: cfg.run.max_bounces,
        tol: cfg.run.tol,
        include_direct: cfg.run.include_direct,
        mode: cfg.phase_mode(),
        rng_seed: cfg.run.rng_seed,
    };
    let image = capture(&built.scene, &built.emitter, array, &opts)?;
    Ok((image, array.positions.clone()))
}

fn run_capture(
    cfg: &SceneConfig,
    out: &Path,
    warnings: &mut ReportWarnings,
) -> Result<CommandOutput, CliError> {
    let built = cfg.build()?;
    warnings.wide_patch_overrides = built.wide_patch_overrides;
    let (image, positions) = capture_image(cfg, &built)?;
    let outputs = vec![write_image_csv(out, &image, &positions)?];
    Ok((
        "capture".into(),
        outputs,
        image.freqs_hz.len(),
        built.scene.patches.len(),
    ))
}

fn run_beamform(
    cfg: &SceneConfig,
    out: &Path,
    warnings: &mut ReportWarnings,
) -> Result<CommandOutput, CliError> {
    let built = cfg.build()?;
    warnings.wide_patch_overrides = built.wide_patch_overrides;
    let (image, _) = capture_image(cfg, &built)?;
    let array = built.array.as_ref().expect("checked by capture_image");
    let b = cfg.beamform.clone().unwrap_or_default();
    let n = ((b.angle_stop_deg - b.angle_start_deg) / b.angle_step_deg).round() as usize;
    let angles: Vec<f64> = (0..=n)
        .map(|i| (b.angle_start_deg + i as f64 * b.angle_step_deg).to_radians())
        .collect();
    let mut outputs = Vec::new();
    for &freq in &image.freqs_hz {
        if imaging::spacing_aliases(array, freq) {
            warnings.aliasing = true;
        }
        let spectrum = delay_and_sum(&image, array, &angles, freq)?;
        outputs.push(write_xy_csv(
            out,
            &format!("beamform_{}.csv", freq_tag(freq)),
            "angle_rad,power",
            spectrum
                .angles_rad
                .iter()
                .copied()
                .zip(spectrum.power.iter().copied()),
        )?);
    }
    Ok((
        "beamform".into(),
        outputs,
        image.freqs_hz.len(),
        built.scene.patches.len(),
    ))
}

fn run_range_profile(
    cfg: &SceneConfig,
    out: &Path,
    antenna: usize,
    warnings: &mut ReportWarnings,
) -> Result<CommandOutput, CliError> {
    let built = cfg.build()?;
    warnings.wide_patch_overrides = built.wide_patch_overrides;
    let (image, positions) = capture_image(cfg, &built)?;
    if antenna >= positions.len() {
        return Err(CliError::Config(format!(
            "--antenna {antenna}: array has {} elements",
            positions.len()
        )));
    }
    let profile = range_profile(&image, antenna)?;
    let outputs = vec![write_xy_csv(
        out,
        "range_profile.csv",
        "delay_s,power",
        profile
            .delays_s
            .iter()
            .copied()
            .zip(profile.power.iter().copied()),
    )?];
    Ok((
        "range-profile".into(),
        outputs,
        image.freqs_hz.len(),
        built.scene.patches.len(),
    ))
}

/// RF-band frequencies used by the aperture sweep, Hz.
const SWEEP_FREQS: [f64; 10] = [1e8, 3e8, 1e9, 2.4e9, 5e9, 1e10, 2.4e10, 6e10, 1e11, 3e11];

/// Bandwidths used by the bandwidth sweep, Hz.
const SWEEP_BANDWIDTHS: [f64; 9] = [1e6, 3e6, 1e7, 3e7, 1e8, 3e8, 1e9, 3e9, 1e10];

fn run_sweep(
    kind: SweepKind,
    cfg: &SceneConfig,
    out: &Path,
    warnings: &mut ReportWarnings,
) -> Result<CommandOutput, CliError> {
    let built = cfg.build()?;
    warnings.wide_patch_overrides = built.wide_patch_overrides;
    let carrier = cfg.emitter.carrier_hz;
    let mut outputs = Vec::new();
    let name = match kind {
        SweepKind::Aperture => {
            let target = 10f64.to_radians();
            outputs.push(write_xy_csv(
                out,
                "sweep_aperture_required.csv",
                "freq_hz,required_aperture_m",
                SWEEP_FREQS.iter().map(|&f| (f, wavelength(f) / target)),
            )?);
            outputs.push(write_xy_csv(
                out,
                "sweep_aperture_fixed_array.csv",
                "freq_hz,resolution_rad",
                SWEEP_FREQS
                    .iter()
                    .map(|&f| (f, angular_resolution(wavelength(f), 0.1))),
            )?);
            "sweep-aperture"
        }
        SweepKind::Bandwidth => {
            outputs.push(write_xy_csv(
                out,
                "sweep_bandwidth.csv",
                "bandwidth_hz,delta_t_s",
                SWEEP_BANDWIDTHS.iter().map(|&b| (b, tof_resolution(b))),
            )?);
            "sweep-bandwidth"
        }
        SweepKind::Objectsize => {
            let sizes = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
            let angles: Vec<f64> = (0..=4).map(|k| (k as f64 * 10.0).to_radians()).collect();
            let rows = imaging::object_size_sweep(&sizes, &angles, carrier, 4.0)?;
            outputs.push(write_xyz_csv(
                out,
                "sweep_objectsize.csv",
                "size_m,angle_rad,amplitude",
                rows.iter().map(|r| (r.size_m, r.angle_rad, r.amplitude)),
            )?);
            "sweep-objectsize"
        }
        SweepKind::Patchwidth => {
            // Normalized aperture factor |∫e^{i2πs·sinθ/λ}ds| / W; depends
            // only on W/λ and θ.
            let widths_over_lambda = [0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
            let lambda = wavelength(carrier);
            let mut rows = Vec::new();
            for &wl in &widths_over_lambda {
                let w = wl * lambda;
                for deg in 0..=90 {
                    let theta = (deg as f64).to_radians();
                    let mag = exact_patch_integral(w, theta, carrier, 256).norm() / w;
                    rows.push((wl, theta, mag));
                }
            }
            outputs.push(write_xyz_csv(
                out,
                "sweep_patchwidth.csv",
                "width_over_lambda,theta_rad,normalized_magnitude",
                rows,
            )?);
            "sweep-patchwidth"
        }
    };
    Ok((name.into(), outputs, 1, built.scene.patches.len()))
}
