use thiserror::Error;

/// Errors shared across the crate. Axiom failures are not errors — they are
/// collected into [`crate::report::Report`]s; an `Error` means the request
/// itself was malformed or a hard precondition failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{0} is not prime or out of range (need 2 <= p < 2^31)")]
    BadPrime(u64),

    #[error("unknown field spec {0:?} (expected \"rational\" or \"fp:<p>\")")]
    BadField(String),

    #[error("cannot parse scalar {0:?}")]
    BadScalar(String),

    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("map is not convolution invertible ({side} identity fails)")]
    NotInvertible { side: &'static str },

    #[error("matrix is not invertible")]
    Singular,

    #[error("normalized coquasi-bialgebras only: drop the \"l\"/\"r\" constraint fields; \
             every coquasi-bialgebra is equivalent to one with l = \\u03b5 = r")]
    NotNormalized,

    #[error("unknown object {0:?} in diagram")]
    UnknownObject(String),

    #[error("tensor table has no entry for ({0}, {1})")]
    MissingTensorEntry(String, String),

    #[error("no associator witness for triple ({0}, {1}, {2})")]
    MissingAssociator(String, String, String),

    #[error("no dual table entry for object {0:?}")]
    MissingDual(String),

    #[error("{map} is not well-defined on the coend: relation from morphism {morphism:?} does not map to zero")]
    NotWellDefined {
        map: &'static str,
        morphism: String,
    },

    #[error("cocycle violation at group indices ({0}, {1}, {2}, {3})")]
    CocycleViolation(usize, usize, usize, usize),

    #[error("cocycle is not normalized at group indices ({0}, {1}, {2})")]
    CocycleNotNormalized(usize, usize, usize),

    #[error("not a group table: {0}")]
    BadGroup(String),

    #[error("validation failed: {0}")]
    Invalid(String),

    #[error("schema error: {0}")]
    Schema(String),
}
