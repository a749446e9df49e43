//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Variants are
//! grouped roughly by pipeline stage: geometry/mode synthesis, state
//! construction, acquisition, tomography, criterion evaluation, and file I/O.

use std::path::PathBuf;

/// Errors produced by the simulation and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Grid below the minimum supported size.
    #[error("grid too small: {width}x{height} px (minimum 16x16)")]
    GridTooSmall {
        /// Requested width in pixels.
        width: usize,
        /// Requested height in pixels.
        height: usize,
    },

    /// Pixel pitch must be a positive length.
    #[error("pixel pitch must be positive, got {0}")]
    NonPositivePitch(f64),

    /// Beam waist must be a positive length.
    #[error("beam waist must be positive, got {0}")]
    NonPositiveWaist(f64),

    /// The grid cannot contain the requested beam at this waist.
    #[error("grid too small for waist {waist}: 4*waist = {required} exceeds min grid extent {extent}")]
    WaistDoesNotFit {
        /// Requested waist.
        waist: f64,
        /// 4 * waist, the diameter the grid must cover.
        required: f64,
        /// Smaller of the two physical grid extents.
        extent: f64,
    },

    /// Two fields/images that must share a grid do not.
    #[error("grid mismatch: {0}x{1} px vs {2}x{3} px")]
    GridMismatch(usize, usize, usize, usize),

    /// Input that is identically zero or otherwise carries no information.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Scalar amplitudes fail the normalization contract.
    #[error("amplitudes not normalized: a^2 + b^2 = {0}")]
    NotNormalized(f64),

    /// The two arm polarizations must be orthogonal.
    #[error("arm polarizations not orthogonal: |<pol1|pol2>| = {0:.3e}")]
    NonOrthogonalArms(f64),

    /// Isotropic noise fraction outside [0, 1).
    #[error("noise fraction must lie in [0, 1), got {0}")]
    NoiseOutOfRange(f64),

    /// Pixel coordinates outside the grid.
    #[error("pixel ({0}, {1}) lies outside the grid")]
    PixelOutsideGrid(usize, usize),

    /// Local two-photon amplitude too small to define a state.
    #[error("dark pixel ({x}, {y}): local intensity {norm:.3e} below 1e-30")]
    DarkPixel {
        /// Pixel x (column).
        x: usize,
        /// Pixel y (row).
        y: usize,
        /// Local squared amplitude.
        norm: f64,
    },

    /// Region intensity too small to define correlations.
    #[error("dark region: total intensity {0:.3e} below 1e-30")]
    DarkRegion(f64),

    /// The trigger projection annihilates the state.
    #[error("trigger '{0}' can never herald (probability 0)")]
    HeraldImpossible(String),

    /// An acquisition plan lists the same setting twice.
    #[error("duplicate acquisition setting '{0}'")]
    DuplicateSetting(String),

    /// Tomography requires all six analyzer images for one trigger.
    #[error("incomplete tomography inputs: missing analyzers {0:?}")]
    IncompleteTomography(Vec<String>),

    /// Tomography inputs mix images from different triggers.
    #[error("tomography inputs mix triggers: '{0}' and '{1}'")]
    MixedTriggers(String, String),

    /// Singularity search needs at least a 3x3 region map.
    #[error("region map too small for singularity search: {cols}x{rows} regions (minimum 3x3)")]
    InsufficientResolution {
        /// Region columns available.
        cols: usize,
        /// Region rows available.
        rows: usize,
    },

    /// A criterion evaluation is missing acquired settings.
    #[error("measurement plan missing acquired settings: {0:?}")]
    MissingSettings(Vec<String>),

    /// A measurement plan violates its structural contract.
    #[error("invalid measurement plan: {0}")]
    InvalidPlan(String),

    /// Configuration is structurally valid but semantically wrong.
    #[error("configuration error: {0}")]
    Config(String),

    /// Sampled counts exceed the 16-bit archive range.
    #[error("image counts exceed the 16-bit PGM range (peak {max:.1}); lower exposure_photons")]
    CountsOverflow {
        /// Peak count encountered.
        max: f64,
    },

    /// A pipeline stage failed; wraps the underlying error.
    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        /// Name of the failing stage.
        stage: &'static str,
        /// Underlying failure.
        #[source]
        source: Box<Error>,
    },

    /// Filesystem error with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        /// Path involved.
        path: PathBuf,
        /// Underlying I/O error.
        #[source]
        source: std::io::Error,
    },

    /// A file exists but cannot be interpreted.
    #[error("malformed file {path}: {reason}")]
    Malformed {
        /// Path involved.
        path: PathBuf,
        /// Human-readable reason.
        reason: String,
    },

    /// Recorded checksum does not match file contents.
    #[error("checksum mismatch for {0}")]
    ChecksumMismatch(PathBuf),

    /// Oracle comparison exceeded its thresholds.
    #[error("comparison failed: {0}")]
    ComparisonFailed(String),
}

impl Error {
    /// Wrap an error as a named pipeline-stage failure.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Build an [`Error::Io`] from a path and an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
