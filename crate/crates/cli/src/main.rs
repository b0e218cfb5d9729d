//! `swan`: batch-generate MuMax3 sweep scripts and run Fourier analyses
//! over the OVF snapshots a simulation writes.
//!
//! Exit codes: 0 on success, 1 on data errors (unreadable files, malformed
//! OVF, degenerate inputs), 2 on usage errors.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use swan_core::analysis::{self, DispersionMap, SpatialSpectrum};
use swan_core::ingest::{self, Roi, SpaceTimeMatrix};
use swan_core::output::{self, GrayRaster, Scale};
use swan_core::ovf::{self, Component};
use swan_core::scriptgen;
use swan_core::synth::{self, PlaneWaveSpec, Wave};
use swan_core::window;

#[derive(Parser)]
#[command(
    name = "swan",
    version,
    about = "MuMax3 sweep-script generation and OVF 2.0 spectral analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a sweep spec into MuMax3 input scripts
    Generate(GenerateArgs),
    /// Average frequency spectrum of one component over the ROI
    Fft(FftArgs),
    /// Spatially resolved spectral power along x
    Spectrum(SpectrumArgs),
    /// Wave-vector/frequency dispersion map
    Dispersion(DispersionArgs),
    /// Write a synthetic OVF dataset with known plane-wave content
    Synth(SynthArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Sweep specification file
    #[arg(long)]
    spec: PathBuf,
    /// Directory for the generated scripts
    #[arg(long, required_unless_present = "dry_run")]
    out: Option<PathBuf>,
    /// Overwrite scripts that already exist
    #[arg(long)]
    force: bool,
    /// Print the filenames that would be written, write nothing
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct IngestOpts {
    /// Directory holding the OVF snapshots
    #[arg(long)]
    dir: PathBuf,
    /// Filename glob within --dir
    #[arg(long, default_value = "*.ovf")]
    pattern: String,
    /// Vector component to read
    #[arg(long, value_parser = Component::from_str)]
    component: Component,
    /// Reader threads (default: SWAN_WORKERS, else the CPU count)
    #[arg(long)]
    workers: Option<usize>,
    /// Sampling interval in seconds (default: from the files' Desc lines)
    #[arg(long)]
    dt: Option<f64>,
    /// Index ROI "tmin:tmax,xmin:xmax,ymin:ymax,zmin:zmax"; empty fields
    /// and omitted trailing groups mean unbounded
    #[arg(long)]
    roi: Option<String>,
    /// Spatial ROI in nanometers "xmin:xmax,ymin:ymax,zmin:zmax",
    /// converted against the first file's mesh
    #[arg(long)]
    roi_nm: Option<String>,
}

#[derive(Args)]
struct TransformOpts {
    /// Subtract each cell's time mean before transforming
    #[arg(long, value_parser = PossibleValuesParser::new(["none", "mean"]), default_value = "none")]
    detrend: String,
    /// Zero-pad the time axis to this many snapshots
    #[arg(long)]
    pad_to: Option<usize>,
}

#[derive(Args)]
struct OutputOpts {
    /// Output path prefix; writes <prefix>.csv and <prefix>.meta.json
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    /// Also write a grayscale raster to <prefix>.pgm
    #[arg(long)]
    image: bool,
    /// Gray mapping for --image
    #[arg(long, value_parser = PossibleValuesParser::new(["linear", "log"]), default_value = "linear")]
    scale: String,
}

#[derive(Args)]
struct FftArgs {
    #[command(flatten)]
    ingest: IngestOpts,
    #[command(flatten)]
    transform: TransformOpts,
    /// Output path prefix; writes <prefix>.csv and <prefix>.meta.json
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    ingest: IngestOpts,
    #[command(flatten)]
    transform: TransformOpts,
    /// What the power column holds: |DFT|, |DFT|^2, or decibels
    /// relative to the global peak
    #[arg(long, value_parser = PossibleValuesParser::new(["amplitude", "power", "db"]), default_value = "amplitude")]
    power_scale: String,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    ingest: IngestOpts,
    #[command(flatten)]
    transform: TransformOpts,
    /// Window applied over (x, t) before the 2D transform
    #[arg(long, value_parser = PossibleValuesParser::new(["none", "chebyshev"]), default_value = "none")]
    window: String,
    /// Sidelobe attenuation in dB for --window chebyshev
    #[arg(long, default_value_t = 100.0)]
    attenuation: f64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct SynthArgs {
    /// Mesh node counts "NX,NY,NZ"
    #[arg(long, value_parser = parse_grid)]
    grid: [usize; 3],
    /// Cell size in meters "CX,CY,CZ"
    #[arg(long, value_parser = parse_cell, default_value = "1e-9,1e-9,1e-9")]
    cell: [f64; 3],
    /// Number of snapshots
    #[arg(long)]
    frames: usize,
    /// Sampling interval in seconds
    #[arg(long)]
    dt: f64,
    /// Plane wave "AMPLITUDE,F0_HZ,K0_RAD_PER_M,PHASE_RAD,COMPONENT";
    /// repeatable
    #[arg(long = "wave", value_parser = Wave::from_str)]
    waves: Vec<Wave>,
    /// Gaussian noise sigma added to every component
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Noise RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected NX,NY,NZ, got {s:?}"));
    }
    let mut grid = [0usize; 3];
    for (slot, part) in grid.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("{part:?} is not a node count"))?;
    }
    Ok(grid)
}

fn parse_cell(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected CX,CY,CZ, got {s:?}"));
    }
    let mut cell = [0f64; 3];
    for (slot, part) in cell.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("{part:?} is not a size in meters"))?;
    }
    Ok(cell)
}

/// A diagnostic plus the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn data(msg: impl Into<String>) -> Failure {
        Failure { code: 1, msg: msg.into() }
    }

    fn usage(msg: impl Into<String>) -> Failure {
        Failure { code: 2, msg: msg.into() }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(err: E) -> Failure {
        Failure::data(err.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("swan: {}", failure.msg);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Fft(args) => run_fft(args),
        Command::Spectrum(args) => run_spectrum(args),
        Command::Dispersion(args) => run_dispersion(args),
        Command::Synth(args) => run_synth(args),
    }
}

fn run_generate(args: GenerateArgs) -> Result<(), Failure> {
    if args.dry_run {
        let spec = scriptgen::load_spec(&args.spec)?;
        for script in scriptgen::render_all(&spec)? {
            println!("{}", script.filename);
        }
        return Ok(());
    }
    let out = args.out.expect("clap requires --out without --dry-run");
    let count = scriptgen::generate(&args.spec, &out, args.force)?;
    log::info!("wrote {count} scripts into {}", out.display());
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Failure> {
    let spec = PlaneWaveSpec {
        grid: args.grid,
        cell: args.cell,
        frames: args.frames,
        dt: args.dt,
        waves: args.waves,
        noise_sigma: args.noise,
        seed: args.seed,
    };
    let files = synth::synth_dataset(&spec, &args.out)?;
    log::info!("wrote {} snapshots into {}", files.len(), args.out.display());
    Ok(())
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(Failure::usage("--workers must be at least 1".to_string()));
        }
        return Ok(n);
    }
    if let Ok(raw) = std::env::var("SWAN_WORKERS") {
        return match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::usage(format!(
                "SWAN_WORKERS={raw:?} is not a worker count of at least 1"
            ))),
        };
    }
    Ok(std::thread::available_parallelism().map(usize::from).unwrap_or(1))
}

/// Reads just the header of the first file, for nanometer-ROI conversion.
fn first_header(path: &Path) -> Result<ovf::OvfHeader, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    ovf::parse_header(&mut BufReader::new(file))
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

struct LoadedMatrix {
    matrix: SpaceTimeMatrix,
    files: usize,
    workers: usize,
}

fn load_matrix(opts: &IngestOpts) -> Result<LoadedMatrix, Failure> {
    let workers = resolve_workers(opts.workers)?;
    let files = ingest::discover_files(&opts.dir, &opts.pattern)?;
    let mut roi = match &opts.roi {
        Some(text) => Roi::parse(text).map_err(|e| Failure::usage(format!("--roi: {e}")))?,
        None => Roi::full(),
    };
    if let Some(text) = &opts.roi_nm {
        let bounds = ingest::parse_nm_bounds(text)
            .map_err(|e| Failure::usage(format!("--roi-nm: {e}")))?;
        let index_axes = [&roi.x, &roi.y, &roi.z];
        for ((axis, nm), index) in ["x", "y", "z"].iter().zip(&bounds).zip(index_axes) {
            let nm_bounded = nm.min.is_some() || nm.max.is_some();
            let index_bounded = index.min.is_some() || index.max.is_some();
            if nm_bounded && index_bounded {
                return Err(Failure::usage(format!(
                    "--roi and --roi-nm both constrain the {axis} axis"
                )));
            }
        }
        let header = first_header(&files[0])?;
        let bases = [header.xbase, header.ybase, header.zbase];
        let steps = [header.xstep, header.ystep, header.zstep];
        let targets = [&mut roi.x, &mut roi.y, &mut roi.z];
        for ((target, nm), (base, step)) in
            targets.into_iter().zip(&bounds).zip(bases.into_iter().zip(steps))
        {
            if nm.min.is_some() || nm.max.is_some() {
                *target = ingest::AxisRange::from_nm(nm, base, step);
            }
        }
    }
    let matrix = ingest::ingest(&files, opts.component, &roi, workers, opts.dt)?;
    log::info!(
        "ingested {} files into a {}x{} matrix ({} ROI cells)",
        files.len(),
        matrix.rows,
        matrix.cols,
        matrix.rows
    );
    Ok(LoadedMatrix { matrix, files: files.len(), workers })
}

fn apply_transforms(
    matrix: SpaceTimeMatrix,
    transform: &TransformOpts,
) -> Result<SpaceTimeMatrix, Failure> {
    let mut matrix = matrix;
    if transform.detrend == "mean" {
        analysis::detrend_mean(&mut matrix);
    }
    if let Some(padded) = transform.pad_to {
        matrix = analysis::pad_time(&matrix, padded)
            .map_err(|e| Failure::data(format!("--pad-to: {e}")))?;
    }
    Ok(matrix)
}

/// Everything needed to regenerate an output exactly, given the input
/// directory. Written next to the CSV as <prefix>.meta.json.
#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    dir: &'a Path,
    pattern: &'a str,
    component: String,
    workers: usize,
    dt_flag: Option<f64>,
    dt_seconds: f64,
    roi: Option<&'a str>,
    roi_nm: Option<&'a str>,
    detrend: &'a str,
    pad_to: Option<usize>,
    power_scale: Option<&'a str>,
    window: Option<&'a str>,
    attenuation_db: Option<f64>,
    scale: Option<&'a str>,
    image: bool,
    files: usize,
    rows: usize,
    cols: usize,
}

impl<'a> Manifest<'a> {
    fn new(
        command: &'static str,
        opts: &'a IngestOpts,
        transform: &'a TransformOpts,
        files: usize,
        workers: usize,
        final_matrix: &SpaceTimeMatrix,
    ) -> Manifest<'a> {
        Manifest {
            tool: "swan",
            version: swan_core::VERSION,
            command,
            dir: &opts.dir,
            pattern: &opts.pattern,
            component: opts.component.to_string(),
            workers,
            dt_flag: opts.dt,
            dt_seconds: final_matrix.dt,
            roi: opts.roi.as_deref(),
            roi_nm: opts.roi_nm.as_deref(),
            detrend: &transform.detrend,
            pad_to: transform.pad_to,
            power_scale: None,
            window: None,
            attenuation_db: None,
            scale: None,
            image: false,
            files,
            rows: final_matrix.rows,
            cols: final_matrix.cols,
        }
    }
}

fn write_manifest(prefix: &Path, manifest: &Manifest) -> Result<(), Failure> {
    let path = meta_path(prefix);
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Failure::data(format!("manifest: {e}")))?;
    fs::write(&path, json + "\n").map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(ext);
    PathBuf::from(name)
}

fn csv_path(prefix: &Path) -> PathBuf {
    with_extension(prefix, ".csv")
}

fn meta_path(prefix: &Path) -> PathBuf {
    with_extension(prefix, ".meta.json")
}

fn pgm_path(prefix: &Path) -> PathBuf {
    with_extension(prefix, ".pgm")
}

fn ensure_parent(prefix: &Path) -> Result<(), Failure> {
    if let Some(parent) = prefix.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::data(format!("{}: {e}", parent.display())))?;
        }
    }
    Ok(())
}

fn run_fft(args: FftArgs) -> Result<(), Failure> {
    let LoadedMatrix { matrix, files, workers } = load_matrix(&args.ingest)?;
    let matrix = apply_transforms(matrix, &args.transform)?;
    let result = analysis::fft_spectrum(&matrix)?;
    let prefix = args.out_prefix.unwrap_or_else(|| PathBuf::from("fft"));
    ensure_parent(&prefix)?;
    let csv = csv_path(&prefix);
    output::write_spectrum_csv(&csv, &result)
        .map_err(|e| Failure::data(format!("{}: {e}", csv.display())))?;
    log::info!("wrote {}", csv.display());
    let manifest = Manifest::new("fft", &args.ingest, &args.transform, files, workers, &matrix);
    write_manifest(&prefix, &manifest)
}

/// Rescales spatial power values in place according to --power-scale.
fn apply_power_scale(spectrum: &mut SpatialSpectrum, power_scale: &str) {
    match power_scale {
        "amplitude" => {}
        "power" => {
            for v in &mut spectrum.power {
                *v *= *v;
            }
        }
        "db" => {
            let peak = spectrum.power.iter().cloned().fold(0.0f64, f64::max);
            if peak > 0.0 {
                let floor = peak * 1e-15;
                for v in &mut spectrum.power {
                    *v = 20.0 * (v.max(floor) / peak).log10();
                }
            }
        }
        other => unreachable!("clap filtered power scale {other:?}"),
    }
}

fn parse_scale(text: &str) -> Scale {
    text.parse().expect("clap filtered the scale value")
}

fn render_image(
    prefix: &Path,
    matrix: &[f64],
    rows: usize,
    cols: usize,
    scale: Scale,
) -> Result<(), Failure> {
    let raster: GrayRaster = output::render_colormap(matrix, rows, cols, scale);
    let path = pgm_path(prefix);
    output::write_pgm(&path, &raster)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn run_spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    if args.power_scale == "db" && args.output.scale == "log" {
        return Err(Failure::usage(
            "--power-scale db is already logarithmic and may be negative; use --scale linear"
                .to_string(),
        ));
    }
    let LoadedMatrix { matrix, files, workers } = load_matrix(&args.ingest)?;
    let matrix = apply_transforms(matrix, &args.transform)?;
    let mut result = analysis::spatial_spectrum(&matrix)?;
    apply_power_scale(&mut result, &args.power_scale);
    let prefix = args.output.out_prefix.clone().unwrap_or_else(|| PathBuf::from("spectrum"));
    ensure_parent(&prefix)?;
    let csv = csv_path(&prefix);
    output::write_spatial_csv(&csv, &result)
        .map_err(|e| Failure::data(format!("{}: {e}", csv.display())))?;
    log::info!("wrote {}", csv.display());
    if args.output.image {
        // Transpose so frequency runs along image rows: row 0 (f = 0) at
        // the bottom, x to the right.
        let nx = result.x_positions.len();
        let nf = result.freqs.len();
        let mut transposed = vec![0.0f64; nx * nf];
        for xi in 0..nx {
            for fi in 0..nf {
                transposed[fi * nx + xi] = result.at(xi, fi);
            }
        }
        // In dB mode values are negative; shift up so the raster scaler
        // sees non-negative data (min-max scaling is shift-invariant).
        if args.power_scale == "db" {
            let min = transposed.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < 0.0 {
                for v in &mut transposed {
                    *v -= min;
                }
            }
        }
        render_image(&prefix, &transposed, nf, nx, parse_scale(&args.output.scale))?;
    }
    let mut manifest =
        Manifest::new("spectrum", &args.ingest, &args.transform, files, workers, &matrix);
    manifest.power_scale = Some(&args.power_scale);
    manifest.scale = Some(&args.output.scale);
    manifest.image = args.output.image;
    write_manifest(&prefix, &manifest)
}

fn run_dispersion(args: DispersionArgs) -> Result<(), Failure> {
    let LoadedMatrix { matrix, files, workers } = load_matrix(&args.ingest)?;
    let matrix = apply_transforms(matrix, &args.transform)?;
    let window_2d = match args.window.as_str() {
        "none" => None,
        "chebyshev" => {
            let sx = matrix.sel_shape.0;
            let wt = window::chebyshev_window(matrix.cols, args.attenuation)
                .map_err(|e| Failure::data(format!("--window chebyshev: {e}")))?;
            let wx = window::chebyshev_window(sx, args.attenuation)
                .map_err(|e| Failure::data(format!("--window chebyshev: {e}")))?;
            Some(window::window_2d(&wt, &wx))
        }
        other => unreachable!("clap filtered window {other:?}"),
    };
    let result: DispersionMap = analysis::dispersion(&matrix, window_2d.as_ref())?;
    let prefix = args.output.out_prefix.clone().unwrap_or_else(|| PathBuf::from("dispersion"));
    ensure_parent(&prefix)?;
    let csv = csv_path(&prefix);
    output::write_dispersion_csv(&csv, &result)
        .map_err(|e| Failure::data(format!("{}: {e}", csv.display())))?;
    log::info!("wrote {}", csv.display());
    if args.output.image {
        let rows = result.f_axis.len();
        let cols = result.k_axis.len();
        render_image(&prefix, &result.magnitude, rows, cols, parse_scale(&args.output.scale))?;
    }
    let mut manifest =
        Manifest::new("dispersion", &args.ingest, &args.transform, files, workers, &matrix);
    manifest.window = Some(&args.window);
    manifest.attenuation_db = (args.window == "chebyshev").then_some(args.attenuation);
    manifest.scale = Some(&args.output.scale);
    manifest.image = args.output.image;
    write_manifest(&prefix, &manifest)
}
