//! Directory ingestion: discover snapshot files, read one vector component
//! from each in parallel, and reorganize the values into a cell x time
//! matrix restricted to a region of interest.
//!
//! Each worker reads a contiguous chunk of the file list and fills a disjoint
//! set of matrix columns, so the result is bit-identical for any worker
//! count.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;

use crate::ovf::{self, Component, OvfError, OvfHeader};

/// Half-open index bounds along one axis; `None` means unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AxisRange {
    pub min: Option<usize>,
    pub max: Option<usize>,
}

impl AxisRange {
    pub const FULL: AxisRange = AxisRange { min: None, max: None };

    pub fn new(min: Option<usize>, max: Option<usize>) -> Self {
        AxisRange { min, max }
    }

    /// Concrete index range after clamping to the dataset extent. May be
    /// empty, which the caller must reject.
    pub fn resolve(&self, extent: usize) -> Range<usize> {
        let lo = self.min.unwrap_or(0).min(extent);
        let hi = self.max.unwrap_or(extent).min(extent);
        lo..hi.max(lo)
    }

    /// Converts physical bounds in nanometers to cell indices by flooring
    /// against the axis base (first cell center) and step.
    pub fn from_nm(nm: &NmRange, base_m: f64, step_m: f64) -> AxisRange {
        let to_index = |pos_nm: f64| ((pos_nm * 1e-9 - base_m) / step_m).floor().max(0.0) as usize;
        AxisRange { min: nm.min.map(to_index), max: nm.max.map(to_index) }
    }
}

/// Physical bounds in nanometers for one axis, used by the `--roi-nm` flag.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmRange {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Region of interest: a snapshot-index range and a cell-index subvolume.
/// All bounds are half-open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Roi {
    pub t: AxisRange,
    pub x: AxisRange,
    pub y: AxisRange,
    pub z: AxisRange,
}

impl Roi {
    pub fn full() -> Roi {
        Roi::default()
    }

    /// Parses the CLI syntax "tmin:tmax,xmin:xmax,ymin:ymax,zmin:zmax".
    /// Empty fields mean unbounded; trailing axis groups may be omitted.
    pub fn parse(s: &str) -> Result<Roi, IngestError> {
        let mut axes = [AxisRange::FULL; 4];
        let names = ["t", "x", "y", "z"];
        let groups: Vec<&str> = s.split(',').collect();
        if groups.len() > 4 {
            return Err(IngestError::BadRoi(format!(
                "expected at most 4 comma-separated axis groups, got {}",
                groups.len()
            )));
        }
        for (i, group) in groups.iter().enumerate() {
            axes[i] = parse_axis_group(group, names[i])?;
        }
        Ok(Roi { t: axes[0], x: axes[1], y: axes[2], z: axes[3] })
    }
}

fn parse_axis_group(group: &str, axis: &str) -> Result<AxisRange, IngestError> {
    let group = group.trim();
    if group.is_empty() {
        return Ok(AxisRange::FULL);
    }
    let (lo, hi) = group.split_once(':').ok_or_else(|| {
        IngestError::BadRoi(format!("{axis} bounds {group:?} are not of the form min:max"))
    })?;
    let parse = |field: &str| -> Result<Option<usize>, IngestError> {
        let field = field.trim();
        if field.is_empty() {
            return Ok(None);
        }
        field.parse::<usize>().map(Some).map_err(|_| {
            IngestError::BadRoi(format!("{axis} bound {field:?} is not a non-negative integer"))
        })
    };
    Ok(AxisRange::new(parse(lo)?, parse(hi)?))
}

/// Parses the CLI syntax "xmin:xmax,ymin:ymax,zmin:zmax" with values in
/// nanometers; empty fields mean unbounded.
pub fn parse_nm_bounds(s: &str) -> Result<[NmRange; 3], IngestError> {
    let mut axes = [NmRange::default(); 3];
    let names = ["x", "y", "z"];
    let groups: Vec<&str> = s.split(',').collect();
    if groups.len() > 3 {
        return Err(IngestError::BadRoi(format!(
            "expected at most 3 comma-separated axis groups in nm bounds, got {}",
            groups.len()
        )));
    }
    for (i, group) in groups.iter().enumerate() {
        let group = group.trim();
        if group.is_empty() {
            continue;
        }
        let (lo, hi) = group.split_once(':').ok_or_else(|| {
            IngestError::BadRoi(format!(
                "{} nm bounds {group:?} are not of the form min:max",
                names[i]
            ))
        })?;
        let parse = |field: &str| -> Result<Option<f64>, IngestError> {
            let field = field.trim();
            if field.is_empty() {
                return Ok(None);
            }
            field.parse::<f64>().map(Some).map_err(|_| {
                IngestError::BadRoi(format!("{} nm bound {field:?} is not a number", names[i]))
            })
        };
        axes[i] = NmRange { min: parse(lo)?, max: parse(hi)? };
    }
    Ok(axes)
}

/// The reorganized dataset: one row per selected cell (x fastest, then y,
/// then z), one column per selected snapshot, row-major storage.
#[derive(Debug, Clone)]
pub struct SpaceTimeMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Sampling interval in seconds.
    pub dt: f64,
    /// Cell size along x in meters.
    pub dx: f64,
    /// Center coordinate of the first selected cell along x, in meters.
    pub x_origin: f64,
    /// Selected cell counts per axis.
    pub sel_shape: (usize, usize, usize),
    pub component: Component,
}

impl SpaceTimeMatrix {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug)]
pub enum IngestError {
    Io { path: PathBuf, source: io::Error },
    BadPattern { pattern: String, source: glob::PatternError },
    EmptyDataset { dir: PathBuf, pattern: String },
    Parse { path: PathBuf, source: OvfError },
    GridMismatch { path: PathBuf, expected: [usize; 3], got: [usize; 3] },
    EmptySelection { axis: &'static str },
    BadRoi(String),
    NoTimeBase(String),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            IngestError::BadPattern { pattern, source } => {
                write!(f, "bad file pattern {pattern:?}: {source}")
            }
            IngestError::EmptyDataset { dir, pattern } => {
                write!(f, "no file in {} matches {pattern:?}", dir.display())
            }
            IngestError::Parse { path, source } => write!(f, "{}: {source}", path.display()),
            IngestError::GridMismatch { path, expected, got } => write!(
                f,
                "GridMismatch: {} has grid {}x{}x{}, expected {}x{}x{} from the first file",
                path.display(),
                got[0],
                got[1],
                got[2],
                expected[0],
                expected[1],
                expected[2]
            ),
            IngestError::EmptySelection { axis } => {
                write!(f, "region of interest selects nothing along {axis}")
            }
            IngestError::BadRoi(msg) => write!(f, "bad --roi value: {msg}"),
            IngestError::NoTimeBase(msg) => {
                write!(f, "NoTimeBase: {msg} (pass --dt to set the sampling interval)")
            }
        }
    }
}

impl std::error::Error for IngestError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IngestError::Io { source, .. } => Some(source),
            IngestError::Parse { source, .. } => Some(source),
            IngestError::BadPattern { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Natural-order sort key: the trailing integer of the file stem, then the
/// full name for ties. Files without a trailing integer sort first.
fn natural_key(path: &Path) -> (Option<u128>, String) {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let digits: String =
        stem.chars().rev().take_while(|c| c.is_ascii_digit()).collect::<Vec<_>>().iter().rev().collect();
    let number = if digits.is_empty() {
        None
    } else {
        Some(digits.chars().fold(0u128, |acc, c| {
            acc.saturating_mul(10).saturating_add((c as u8 - b'0') as u128)
        }))
    };
    (number, name)
}

/// Lists files in `dir` matching the glob `pattern`, ordered by the natural
/// (numeric-aware) order of the trailing integer in their stem. The returned
/// order defines snapshot indices 0..N-1.
pub fn discover_files(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>, IngestError> {
    let matcher = glob::Pattern::new(pattern)
        .map_err(|source| IngestError::BadPattern { pattern: pattern.to_string(), source })?;
    let entries = std::fs::read_dir(dir)
        .map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name();
        if matcher.matches(&name.to_string_lossy()) {
            files.push(path);
        }
    }
    if files.is_empty() {
        return Err(IngestError::EmptyDataset {
            dir: dir.to_path_buf(),
            pattern: pattern.to_string(),
        });
    }
    files.sort_by(|a, b| natural_key(a).cmp(&natural_key(b)));
    Ok(files)
}

/// Contiguous near-equal chunks covering 0..n; at most `workers` of them,
/// never empty. Exposed for the partition-completeness tests.
pub fn partition_ranges(n: usize, workers: usize) -> Vec<Range<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let workers = workers.max(1).min(n);
    let base = n / workers;
    let extra = n % workers;
    let mut ranges = Vec::with_capacity(workers);
    let mut start = 0;
    for i in 0..workers {
        let len = base + usize::from(i < extra);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

fn read_first_header(path: &Path) -> Result<OvfHeader, IngestError> {
    let file = File::open(path)
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let mut reader = BufReader::new(file);
    ovf::parse_header(&mut reader)
        .map_err(|source| IngestError::Parse { path: path.to_path_buf(), source })
}

/// Reads the selected component of every selected file and reorganizes the
/// values into a [`SpaceTimeMatrix`].
///
/// `files` must already be in snapshot order (see [`discover_files`]). The
/// sampling interval is `dt_override` when given, otherwise the difference
/// of the first two selected snapshots' recorded times. The result is
/// bit-identical for any `workers` value.
pub fn ingest(
    files: &[PathBuf],
    component: Component,
    roi: &Roi,
    workers: usize,
    dt_override: Option<f64>,
) -> Result<SpaceTimeMatrix, IngestError> {
    let t_range = roi.t.resolve(files.len());
    if t_range.is_empty() {
        return Err(IngestError::EmptySelection { axis: "t" });
    }
    let selected = &files[t_range];
    let cols = selected.len();

    let first = read_first_header(&selected[0])?;
    let grid = first.grid();
    let xr = roi.x.resolve(first.nx);
    let yr = roi.y.resolve(first.ny);
    let zr = roi.z.resolve(first.nz);
    for (axis, range) in [("x", &xr), ("y", &yr), ("z", &zr)] {
        if range.is_empty() {
            return Err(IngestError::EmptySelection { axis });
        }
    }
    let (sx, sy, sz) = (xr.len(), yr.len(), zr.len());
    let rows = sx * sy * sz;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cols];
    let mut times: Vec<Option<f64>> = vec![None; cols];
    let chunks = partition_ranges(cols, workers);
    let step_warned = AtomicBool::new(false);

    {
        // Split the column and time stores into per-chunk slices so each
        // worker owns a disjoint region.
        let mut col_tail: &mut [Vec<f64>] = &mut columns;
        let mut time_tail: &mut [Option<f64>] = &mut times;
        let mut jobs = Vec::with_capacity(chunks.len());
        let mut consumed = 0;
        for chunk in &chunks {
            let (col_head, rest) = col_tail.split_at_mut(chunk.len());
            let (time_head, trest) = time_tail.split_at_mut(chunk.len());
            col_tail = rest;
            time_tail = trest;
            jobs.push((&selected[chunk.start..chunk.end], col_head, time_head));
            consumed += chunk.len();
        }
        debug_assert_eq!(consumed, cols);

        let results = thread::scope(|scope| {
            let mut handles = Vec::with_capacity(jobs.len());
            for (paths, col_out, time_out) in jobs {
                let first = &first;
                let step_warned = &step_warned;
                let (xr, yr, zr) = (xr.clone(), yr.clone(), zr.clone());
                handles.push(scope.spawn(move || -> Result<(), IngestError> {
                    for ((path, col), time) in paths.iter().zip(col_out).zip(time_out) {
                        let slab = ovf::read_component(path, component).map_err(|source| {
                            IngestError::Parse { path: path.clone(), source }
                        })?;
                        if slab.header.grid() != grid {
                            return Err(IngestError::GridMismatch {
                                path: path.clone(),
                                expected: grid,
                                got: slab.header.grid(),
                            });
                        }
                        if (slab.header.xstep != first.xstep
                            || slab.header.ystep != first.ystep
                            || slab.header.zstep != first.zstep)
                            && !step_warned.swap(true, Ordering::Relaxed)
                        {
                            log::warn!(
                                "{}: cell size differs from the first file; using the first file's",
                                path.display()
                            );
                        }
                        let mut out = Vec::with_capacity(rows);
                        for z in zr.clone() {
                            for y in yr.clone() {
                                let base = first.nx * (y + first.ny * z);
                                out.extend_from_slice(&slab.values[base + xr.start..base + xr.end]);
                            }
                        }
                        *col = out;
                        *time = slab.header.total_sim_time;
                    }
                    Ok(())
                }));
            }
            handles.into_iter().map(|h| h.join().expect("ingest worker panicked")).collect::<Vec<_>>()
        });
        for result in results {
            result?;
        }
    }

    let dt = resolve_dt(dt_override, &times)?;

    // Transpose the per-file columns into the row-major matrix, in parallel
    // row bands when more than one worker is requested.
    let mut data = vec![0.0f64; rows * cols];
    let bands = partition_ranges(rows, workers);
    thread::scope(|scope| {
        let mut tail: &mut [f64] = &mut data;
        for band in &bands {
            let (head, rest) = tail.split_at_mut(band.len() * cols);
            tail = rest;
            let columns = &columns;
            let band = band.clone();
            scope.spawn(move || {
                for (local_r, r) in band.enumerate() {
                    let out = &mut head[local_r * cols..(local_r + 1) * cols];
                    for (c, col) in columns.iter().enumerate() {
                        out[c] = col[r];
                    }
                }
            });
        }
    });

    Ok(SpaceTimeMatrix {
        rows,
        cols,
        data,
        dt,
        dx: first.xstep,
        x_origin: first.xbase + xr.start as f64 * first.xstep,
        sel_shape: (sx, sy, sz),
        component,
    })
}

fn resolve_dt(dt_override: Option<f64>, times: &[Option<f64>]) -> Result<f64, IngestError> {
    if let Some(dt) = dt_override {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(IngestError::NoTimeBase(format!("--dt value {dt} is not positive")));
        }
        return Ok(dt);
    }
    if times.len() < 2 {
        return Err(IngestError::NoTimeBase(
            "a single snapshot carries no sampling interval".to_string(),
        ));
    }
    let (t0, t1) = match (times[0], times[1]) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(IngestError::NoTimeBase(
                "files carry no \"Total simulation time\" Desc lines".to_string(),
            ))
        }
    };
    let dt = t1 - t0;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(IngestError::NoTimeBase(format!(
            "recorded times of the first two snapshots give a non-positive interval {dt}"
        )));
    }
    // Uneven sampling silently breaks the FFT's frequency axis, so flag it.
    if times.iter().all(|t| t.is_some()) {
        let mut worst: f64 = 0.0;
        for pair in times.windows(2) {
            let gap = pair[1].unwrap() - pair[0].unwrap();
            worst = worst.max((gap - dt).abs());
        }
        if worst > 0.01 * dt {
            log::warn!(
                "snapshot times are uneven: worst gap deviates {:.1}% from dt = {dt:.6e} s",
                100.0 * worst / dt
            );
        }
    }
    Ok(dt)
}
