use thiserror::Error;

use crate::scene::GeometryType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty primitive set")]
    EmptyPrimitiveSet,
    #[error("no leaves")]
    NoLeaves,
    #[error("invalid ray")]
    InvalidRay,
    #[error("traversal stack overflow (depth > {0})")]
    StackOverflow(usize),
    #[error("scene already committed")]
    SceneAlreadyCommitted,
    #[error("non-invertible transform")]
    NonInvertibleTransform,
    #[error("invalid geometry id {0}")]
    InvalidGeometryId(u32),
    #[error("empty scene: commit needs at least one geometry and one instance")]
    EmptyScene,
    #[error("level-zero requires single type (found {0:?} and {1:?})")]
    LevelZeroMixedTypes(GeometryType, GeometryType),
    #[error("dispatch level three (callable shaders) requires a hardware ray-tracing pipeline and is not supported")]
    UnsupportedDispatchLevel,
    #[error("unregistered geometry type")]
    UnregisteredGeometryType,
    #[error("empty SDF surface")]
    EmptySdfSurface,
    #[error("empty field")]
    EmptyField,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("image dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("OBJ parse error at line {line}: {msg}")]
    Obj { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
