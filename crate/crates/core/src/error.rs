use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown rule id {0} (expected 1..=32)")]
    UnknownRule(u8),
    #[error("texture registry is empty")]
    EmptyTextureRegistry,
    #[error("generator could not satisfy rule {rule} after {attempts} attempts")]
    GenerationFailed { rule: u8, attempts: u32 },
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("invalid label {label} for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty manifest")]
    EmptyManifest,
    #[error("insufficient data in cell {cell}: needed {needed}, available {available}")]
    InsufficientData {
        cell: String,
        needed: usize,
        available: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
