//! Post-processing toolchain for MuMax3 micromagnetic simulations.
//!
//! The crate covers the two halves of a typical spin-wave study:
//!
//! * **Script generation** ([`scriptgen`]): expand a declarative sweep
//!   specification into one MuMax3 input script per parameter point, with
//!   systematic filenames that encode the mesh and excitation values.
//! * **Analysis** ([`ovf`], [`ingest`], [`analysis`], [`window`],
//!   [`output`]): read the OVF 2.0 text files a run produces, assemble one
//!   vector component over a region of interest into a space-time matrix
//!   (in parallel), and compute frequency spectra, spatially resolved
//!   power maps, and wave-vector/frequency dispersion maps via FFTs.
//!
//! [`synth`] generates small analytic OVF datasets with known plane-wave
//! content, used throughout the test suite and handy for validating a
//! processing pipeline end to end.

pub mod analysis;
pub mod ingest;
pub mod output;
pub mod ovf;
pub mod scriptgen;
pub mod synth;
pub mod window;

pub use analysis::{
    detrend_mean, dispersion, fft_spectrum, pad_time, spatial_spectrum, AnalysisError,
    DispersionMap, SpatialSpectrum, SpectrumResult,
};
pub use ingest::{
    discover_files, ingest, partition_ranges, AxisRange, IngestError, NmRange, Roi,
    SpaceTimeMatrix,
};
pub use output::{
    render_colormap, write_dispersion_csv, write_pgm, write_spatial_csv, write_spectrum_csv,
    GrayRaster, Scale,
};
pub use ovf::{parse_header, read_component, Component, OvfError, OvfHeader, ScalarSlab};
pub use scriptgen::{
    expand_sweep, generate, load_spec, make_filename, render_all, substitute, GeneratedScript,
    ScriptGenError, SweepPoint, SweepSpec,
};
pub use synth::{synth_dataset, write_ovf, PlaneWaveSpec, SynthError, Wave};
pub use window::{chebyshev_window, window_2d, Window1D, Window2D, WindowError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
