use thiserror::Error;

/// Failure modes of the imaging kernels.
///
/// The variant name doubles as the machine-readable error name surfaced by the
/// tool server (see [`Error::name`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed NIfTI header: {0}")]
    MalformedHeader(String),
    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("unsupported dimensionality: {0}")]
    UnsupportedDimensions(String),
    #[error("voxel payload truncated: need {needed} bytes after offset {offset}, have {available}")]
    TruncatedPayload {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("gzip stream could not be decoded: {0}")]
    Decompression(String),
    #[error("non-finite voxel value at linear index {0}")]
    NonFiniteVoxel(usize),
    #[error("window width must be positive, got {0}")]
    InvalidWindow(f64),
    #[error("slice index {index} out of range for axis of length {len}")]
    SliceOutOfRange { index: usize, len: usize },
    #[error("point {point:?} outside volume of dims {dims:?}")]
    PointOutOfRange { point: [i64; 3], dims: [usize; 3] },
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
    #[error("montage layout needs at least one tile")]
    InvalidLayout,
    #[error("no voxel above the body threshold")]
    EmptyBody,
    #[error("image has a zero dimension ({width}x{height})")]
    InvalidImage { width: usize, height: usize },
    #[error("mask geometry does not match volume: {0}")]
    GeometryMismatch(String),
    #[error("mask contains invalid label value {0}")]
    InvalidLabelValue(f64),
    #[error("label {0} not present in mask")]
    LabelNotFound(u32),
    #[error("label {0} is not 26-connected")]
    DisconnectedLabel(u32),
    #[error("radius must be a positive finite number of millimetres, got {0}")]
    InvalidRadius(f64),
    #[error("query must not be empty")]
    EmptyQuery,
    #[error("a mask must be loaded first")]
    MaskRequired,
    #[error("region of interest selects no voxels")]
    EmptyRoi,
    #[error("bin count must be at least 2, got {0}")]
    InvalidBins(usize),
    #[error("signature has no features")]
    EmptySignature,
    #[error("vocabulary line {line}: {message}")]
    Vocabulary { line: usize, message: String },
}

impl Error {
    /// Stable identifier of the failure, independent of the message text.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::UnsupportedDatatype(_) => "UnsupportedDatatype",
            Error::UnsupportedDimensions(_) => "UnsupportedDimensions",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::Decompression(_) => "Decompression",
            Error::NonFiniteVoxel(_) => "NonFiniteVoxel",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::SliceOutOfRange { .. } => "SliceOutOfRange",
            Error::PointOutOfRange { .. } => "PointOutOfRange",
            Error::InvalidBox(_) => "InvalidBox",
            Error::InvalidLayout => "InvalidLayout",
            Error::EmptyBody => "EmptyBody",
            Error::InvalidImage { .. } => "InvalidImage",
            Error::GeometryMismatch(_) => "GeometryMismatch",
            Error::InvalidLabelValue(_) => "InvalidLabelValue",
            Error::LabelNotFound(_) => "LabelNotFound",
            Error::DisconnectedLabel(_) => "DisconnectedLabel",
            Error::InvalidRadius(_) => "InvalidRadius",
            Error::EmptyQuery => "EmptyQuery",
            Error::MaskRequired => "MaskRequired",
            Error::EmptyRoi => "EmptyRoi",
            Error::InvalidBins(_) => "InvalidBins",
            Error::EmptySignature => "EmptySignature",
            Error::Vocabulary { .. } => "VocabularyError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
