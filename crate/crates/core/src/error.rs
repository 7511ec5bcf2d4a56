use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::sparse::SparseMatrix;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u32),
    #[error("prime {prime} must exceed twice the largest bundle degree {max_degree}")]
    PrimeTooSmall { prime: u32, max_degree: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero entry at index {index}")]
    ZeroEntry { index: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("defining polynomial is not squarefree; gcd(f, f') has coefficients {gcd:?}")]
    NotSquarefree { gcd: Vec<u32> },
    #[error("singular point ({}:{}:{})", point[0], point[1], point[2])]
    SingularPoint { point: [u32; 3] },
    #[error("point ({}:{}:{}) does not lie on the curve", point[0], point[1], point[2])]
    NotOnCurve { point: [u32; 3] },
    #[error("need {required} usable rational points, only {available} available")]
    PointShortfall { required: usize, available: usize },
    #[error("expansion order {order} exceeds the configured truncation {max}")]
    TruncationTooLarge { order: usize, max: usize },
    #[error("pencil fiber has degree {found}, expected {expected}")]
    FiberDegreeMismatch { expected: usize, found: usize },

    #[error("{what}: expected {expected}, computed {found}")]
    DimensionMismatch { what: &'static str, expected: i64, found: i64 },
    #[error("divisor not representable: {0}")]
    NotRepresentable(String),
    #[error("sample set guards degree {guard}, but degree {needed} is required")]
    GuardViolation { needed: i64, guard: i64 },
    #[error("product of sections is not contained in the target space")]
    ProductNotContained,
    #[error("section spaces live on different sample sets")]
    SampleSetMismatch,
    #[error("sample point collides with a divisor support point")]
    SampleCollision,
    #[error("multiplicity {multiplicity} exceeds the allowed maximum {max}")]
    MultiplicityTooLarge { multiplicity: u32, max: u32 },
    #[error("point ({}:{}:{}) appears twice", point[0], point[1], point[2])]
    PointCollision { point: [u32; 3] },
    #[error("gonality metadata missing; pass it explicitly")]
    MissingGonality,

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("stored zero at ({row}, {col})")]
    StoredZero { row: usize, col: usize },
    #[error("entry ({row}, {col}) out of range")]
    IndexOutOfRange { row: usize, col: usize },
    #[error("entry value {value} not reduced modulo {prime}")]
    UnreducedEntry { value: u32, prime: u32 },
    #[error("dimension mismatch in matrix product")]
    ShapeMismatch,
    #[error("elimination budget exhausted after {rank_so_far} pivots")]
    BudgetExhausted { rank_so_far: usize, checkpoint: Box<SparseMatrix> },
    #[error("matrix with {nnz} nonzeros exceeds the cap {cap}")]
    MatrixTooLarge { nnz: usize, cap: usize },
    #[error("dense oracle cap exceeded: {size} > {cap}")]
    OracleCapExceeded { size: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
