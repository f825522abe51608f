use alloc::boxed::Box;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point is outside the region")]
    OutsideRegion,

    #[error("memory budget exceeded: {required} bytes required, {budget} allowed")]
    BudgetExceeded { required: u64, budget: u64 },

    #[error("walk count overflowed 128 bits at length {length}")]
    Overflow { length: usize },

    #[error("lambda = a ln(lambda) has no root above the tangency for a = {a}")]
    NoRoot { a: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is singular at pivot {column} (|pivot| = {pivot:e})")]
    Singular { column: usize, pivot: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),

    #[error("SAW ceiling not computable: gamma * c_N^(1/N) = {ratio} >= 1")]
    CeilingNotComputable { ratio: f64 },

    #[error("sample {index} (seed {seed:#018x}) failed: {source}")]
    SampleFailed {
        index: usize,
        seed: u64,
        source: Box<Error>,
    },
}
