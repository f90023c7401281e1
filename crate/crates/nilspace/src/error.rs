use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: u32, got: u32 },

    #[error("dimension {k} exceeds the supported bound {max}")]
    DimensionTooLarge { k: u32, max: u32 },

    #[error("lower face {face} of the corner is not a cube: {detail}")]
    BadLowerFace { face: String, detail: String },

    #[error("unsupported parent type for this operation: {0}")]
    UnsupportedParent(String),

    #[error("unknown group id `{0}`")]
    UnknownGroup(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("element does not belong to the group carrier: {0}")]
    NotInCarrier(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("relation is not an equivalence: witnesses {0}, {1}, {2}")]
    NotEquivalence(String, String, String),

    #[error("map is not a morphism of cubespaces: {0}")]
    NotMorphism(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("tri-cube compatibility violated at pieces nu={nu}, nu'={nu2}, vertex omega={omega}")]
    TriCubeIncompatible { nu: u32, nu2: u32, omega: u32 },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(usize, usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
