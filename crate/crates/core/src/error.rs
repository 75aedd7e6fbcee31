use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least {min} points, got {n}")]
    GridTooSmall { n: usize, min: usize },

    #[error("grid interval [{lo}, {hi}] must satisfy lo < hi with finite endpoints")]
    GridInterval { lo: f64, hi: f64 },

    #[error("anchor index {index} outside grid of {n} points")]
    AnchorOutOfRange { index: usize, n: usize },

    #[error("sampled function has {got} values but the grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sampled functions live on different grids")]
    GridMismatch,

    #[error("missing parameter `{name}`")]
    MissingParameter { name: String },

    #[error("duplicate parameter `{name}`")]
    DuplicateParameter { name: String },

    #[error("parameter `{name}` is not finite")]
    NonFiniteParameter { name: String },

    #[error("cannot parse parameters: {0}")]
    ParseParams(String),

    #[error("parameter constraint violated for `{potential}`: {predicate}")]
    Constraint { potential: String, predicate: String },

    #[error("potential `{potential}` is not invariant under `{map}` (max deviation {max_dev:e})")]
    NotInvariant {
        potential: String,
        map: String,
        max_dev: f64,
    },

    #[error("grid [{lo}, {hi}] leaves the domain ({domain_lo}, {domain_hi})")]
    OutsideDomain {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },

    #[error("singular point x = {point} lies inside the grid")]
    SingularPointInGrid { point: f64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("insufficient data: needed {needed} usable points, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("family constants must differ")]
    SameFamilyConstant,

    #[error("eigenvalue request k = {k} outside 1..={max}")]
    EigenRequest { k: usize, max: usize },

    #[error("bisection for eigenvalue {index} stalled in [{lo:e}, {hi:e}]")]
    BisectionStalled { index: usize, lo: f64, hi: f64 },

    #[error("partner potential has {count} masked interior points")]
    PartnerIrregular { count: usize },

    #[error("ground state of `{pair}` is not normalizable at {params}")]
    NonNormalizableGround { pair: String, params: String },

    #[error("factorization `{0}` not found")]
    UnknownFactorization(String),

    #[error("unknown catalog entry `{id}` (known: {known})")]
    UnknownEntry { id: String, known: String },

    #[error("`{0}` needs a closed-form derivative")]
    MissingDerivative(String),
}

pub type Result<T> = std::result::Result<T, Error>;
