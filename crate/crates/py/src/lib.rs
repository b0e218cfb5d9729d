//! Python extension module exposing the swan toolchain: OVF ingestion,
//! Fourier analyses, window generation, script generation and synthetic
//! dataset creation.
//!
//! Build with `cargo build -p swan-py --release`, then copy or symlink
//! `libswan_py.so` to `swan_py.so` somewhere on `sys.path` and
//! `import swan_py`.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use swan_core::analysis;
use swan_core::ingest as core_ingest;
use swan_core::ingest::{IngestError, Roi, SpaceTimeMatrix};
use swan_core::ovf::{self, Component, OvfError};
use swan_core::scriptgen::{self, ScriptGenError};
use swan_core::synth::{self, PlaneWaveSpec, SynthError, Wave};
use swan_core::window;

fn ovf_err(e: OvfError) -> PyErr {
    match e {
        OvfError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ingest_err(e: IngestError) -> PyErr {
    match e {
        IngestError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn scriptgen_err(e: ScriptGenError) -> PyErr {
    match e {
        ScriptGenError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn synth_err(e: SynthError) -> PyErr {
    match e {
        SynthError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_component(text: &str) -> PyResult<Component> {
    Component::from_str(text).map_err(PyValueError::new_err)
}

fn paths_to_strings(paths: Vec<PathBuf>) -> Vec<String> {
    paths.into_iter().map(|p| p.to_string_lossy().into_owned()).collect()
}

/// One vector component over the ROI as a (rows x cols) row-major matrix:
/// one row per ROI cell (x fastest), one column per snapshot.
#[pyclass(name = "Matrix")]
struct PyMatrix {
    inner: SpaceTimeMatrix,
}

#[pymethods]
impl PyMatrix {
    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx
    }

    #[getter]
    fn x_origin(&self) -> f64 {
        self.inner.x_origin
    }

    #[getter]
    fn sel_shape(&self) -> (usize, usize, usize) {
        self.inner.sel_shape
    }

    #[getter]
    fn component(&self) -> String {
        self.inner.component.to_string()
    }

    /// The full matrix as a flat row-major list.
    fn data(&self) -> Vec<f64> {
        self.inner.data.clone()
    }

    /// One cell's time series.
    fn row(&self, r: usize) -> PyResult<Vec<f64>> {
        if r >= self.inner.rows {
            return Err(PyIndexError::new_err(format!(
                "row {r} out of range for {} rows",
                self.inner.rows
            )));
        }
        Ok(self.inner.row(r).to_vec())
    }

    /// Subtracts each row's time mean in place.
    fn detrend_mean(&mut self) {
        analysis::detrend_mean(&mut self.inner);
    }

    /// Returns a copy zero-padded along the time axis to `cols` columns.
    fn pad_time(&self, cols: usize) -> PyResult<PyMatrix> {
        let inner = analysis::pad_time(&self.inner, cols).map_err(value_err)?;
        Ok(PyMatrix { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Matrix(rows={}, cols={}, component={}, dt={:e}, dx={:e})",
            self.inner.rows, self.inner.cols, self.inner.component, self.inner.dt, self.inner.dx
        )
    }
}

/// Reads an OVF 2.0 text header into a dict.
#[pyfunction]
fn parse_header<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let file = File::open(&path)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
    let header = ovf::parse_header(&mut BufReader::new(file)).map_err(ovf_err)?;
    let dict = PyDict::new(py);
    dict.set_item("title", header.title)?;
    dict.set_item("valuedim", header.value_dim)?;
    dict.set_item("nx", header.nx)?;
    dict.set_item("ny", header.ny)?;
    dict.set_item("nz", header.nz)?;
    dict.set_item("xstep", header.xstep)?;
    dict.set_item("ystep", header.ystep)?;
    dict.set_item("zstep", header.zstep)?;
    dict.set_item("xbase", header.xbase)?;
    dict.set_item("ybase", header.ybase)?;
    dict.set_item("zbase", header.zbase)?;
    dict.set_item("total_sim_time", header.total_sim_time)?;
    Ok(dict)
}

/// Reads one component of every cell in one file. Returns (header dict,
/// flat values in x-fastest order).
#[pyfunction]
fn read_component<'py>(
    py: Python<'py>,
    path: PathBuf,
    component: &str,
) -> PyResult<(Bound<'py, PyDict>, Vec<f64>)> {
    let component = parse_component(component)?;
    let slab = ovf::read_component(&path, component).map_err(ovf_err)?;
    let dict = PyDict::new(py);
    dict.set_item("title", slab.header.title.clone())?;
    dict.set_item("valuedim", slab.header.value_dim)?;
    dict.set_item("nx", slab.header.nx)?;
    dict.set_item("ny", slab.header.ny)?;
    dict.set_item("nz", slab.header.nz)?;
    dict.set_item("xstep", slab.header.xstep)?;
    dict.set_item("ystep", slab.header.ystep)?;
    dict.set_item("zstep", slab.header.zstep)?;
    dict.set_item("xbase", slab.header.xbase)?;
    dict.set_item("ybase", slab.header.ybase)?;
    dict.set_item("zbase", slab.header.zbase)?;
    dict.set_item("total_sim_time", slab.header.total_sim_time)?;
    Ok((dict, slab.values))
}

/// Lists files in `dir` matching `pattern`, naturally sorted by trailing
/// number.
#[pyfunction]
#[pyo3(signature = (dir, pattern = "*.ovf"))]
fn discover_files(dir: PathBuf, pattern: &str) -> PyResult<Vec<String>> {
    let files = core_ingest::discover_files(&dir, pattern).map_err(ingest_err)?;
    Ok(paths_to_strings(files))
}

/// Ingests a snapshot directory into a Matrix. `workers=0` uses the CPU
/// count; `roi` takes the "tmin:tmax,xmin:xmax,ymin:ymax,zmin:zmax" index
/// syntax with empty fields unbounded.
#[pyfunction]
#[pyo3(signature = (dir, component, pattern = "*.ovf", workers = 0, dt = None, roi = None))]
fn ingest(
    py: Python<'_>,
    dir: PathBuf,
    component: &str,
    pattern: &str,
    workers: usize,
    dt: Option<f64>,
    roi: Option<&str>,
) -> PyResult<PyMatrix> {
    let component = parse_component(component)?;
    let roi = match roi {
        Some(text) => Roi::parse(text).map_err(ingest_err)?,
        None => Roi::full(),
    };
    let workers = if workers == 0 {
        std::thread::available_parallelism().map(usize::from).unwrap_or(1)
    } else {
        workers
    };
    let files = core_ingest::discover_files(&dir, pattern).map_err(ingest_err)?;
    let inner = py
        .detach(|| core_ingest::ingest(&files, component, &roi, workers, dt))
        .map_err(ingest_err)?;
    Ok(PyMatrix { inner })
}

/// Average one-sided frequency spectrum over all ROI cells. Returns
/// (freqs_hz, amplitude), peak-normalized to 1.
#[pyfunction]
fn fft_spectrum(matrix: &PyMatrix) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let result = analysis::fft_spectrum(&matrix.inner).map_err(value_err)?;
    Ok((result.freqs, result.amplitude))
}

/// Per-x spectral power after (y, z) averaging. Returns (x_positions_m,
/// freqs_hz, power) with power[xi][fi].
#[pyfunction]
fn spatial_spectrum(matrix: &PyMatrix) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let result = analysis::spatial_spectrum(&matrix.inner).map_err(value_err)?;
    let nf = result.freqs.len();
    let rows = result
        .power
        .chunks(nf)
        .map(|chunk| chunk.to_vec())
        .collect();
    Ok((result.x_positions, result.freqs, rows))
}

/// Wave-vector/frequency dispersion map. Returns (k_axis_rad_per_m,
/// f_axis_hz, magnitude) with magnitude[fi][ki]; pass `attenuation` in dB
/// to apply a Dolph-Chebyshev window over (x, t) first.
#[pyfunction]
#[pyo3(signature = (matrix, attenuation = None))]
fn dispersion(
    matrix: &PyMatrix,
    attenuation: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let window_2d = match attenuation {
        None => None,
        Some(db) => {
            let wt = window::chebyshev_window(matrix.inner.cols, db).map_err(value_err)?;
            let wx =
                window::chebyshev_window(matrix.inner.sel_shape.0, db).map_err(value_err)?;
            Some(window::window_2d(&wt, &wx))
        }
    };
    let result = analysis::dispersion(&matrix.inner, window_2d.as_ref()).map_err(value_err)?;
    let nk = result.k_axis.len();
    let rows = result
        .magnitude
        .chunks(nk)
        .map(|chunk| chunk.to_vec())
        .collect();
    Ok((result.k_axis, result.f_axis, rows))
}

/// Dolph-Chebyshev window weights, peak-normalized to 1.
#[pyfunction]
fn chebyshev_window(length: usize, attenuation_db: f64) -> PyResult<Vec<f64>> {
    let w = window::chebyshev_window(length, attenuation_db).map_err(value_err)?;
    Ok(w.weights)
}

/// Writes a synthetic OVF dataset of plane waves plus optional gaussian
/// noise. Waves are "AMPLITUDE,F0_HZ,K0_RAD_PER_M,PHASE_RAD,COMPONENT"
/// strings. Returns the written paths.
#[pyfunction]
#[pyo3(signature = (out_dir, grid, cell, frames, dt, waves, noise = 0.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn synth_dataset(
    out_dir: PathBuf,
    grid: (usize, usize, usize),
    cell: (f64, f64, f64),
    frames: usize,
    dt: f64,
    waves: Vec<String>,
    noise: f64,
    seed: u64,
) -> PyResult<Vec<String>> {
    let waves = waves
        .iter()
        .map(|text| Wave::from_str(text).map_err(PyValueError::new_err))
        .collect::<PyResult<Vec<Wave>>>()?;
    let spec = PlaneWaveSpec {
        grid: [grid.0, grid.1, grid.2],
        cell: [cell.0, cell.1, cell.2],
        frames,
        dt,
        waves,
        noise_sigma: noise,
        seed,
    };
    let files = synth::synth_dataset(&spec, &out_dir).map_err(synth_err)?;
    Ok(paths_to_strings(files))
}

/// Expands a sweep spec file and writes one MuMax3 script per point.
/// Returns the number of scripts written.
#[pyfunction]
#[pyo3(signature = (spec_path, out_dir, force = false))]
fn generate_scripts(spec_path: PathBuf, out_dir: PathBuf, force: bool) -> PyResult<usize> {
    scriptgen::generate(&spec_path, &out_dir, force).map_err(scriptgen_err)
}

/// The filenames a sweep spec would generate, without writing anything.
#[pyfunction]
fn render_filenames(spec_path: PathBuf) -> PyResult<Vec<String>> {
    let spec = scriptgen::load_spec(&spec_path).map_err(scriptgen_err)?;
    let scripts = scriptgen::render_all(&spec).map_err(scriptgen_err)?;
    Ok(scripts.into_iter().map(|s| s.filename).collect())
}

#[pymodule]
fn swan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(parse_header, m)?)?;
    m.add_function(wrap_pyfunction!(read_component, m)?)?;
    m.add_function(wrap_pyfunction!(discover_files, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(fft_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(spatial_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_window, m)?)?;
    m.add_function(wrap_pyfunction!(synth_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(generate_scripts, m)?)?;
    m.add_function(wrap_pyfunction!(render_filenames, m)?)?;
    m.add("__version__", swan_core::VERSION)?;
    Ok(())
}
