use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfkError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e} exceeds {tol:.1e})")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("lattice of {amplitudes} amplitudes exceeds the budget of {budget}")]
    MemoryBudget { amplitudes: u128, budget: usize },

    #[error("slice index {index} out of range (lattice has {slices} slices)")]
    SliceRange { index: usize, slices: usize },

    #[error("vector has non-vacuum content in slices at or beyond {from}")]
    NonVacuumFuture { from: usize },

    #[error("structure generator violates the cocycle condition (residual {0:.3e})")]
    CocycleCondition(f64),

    #[error("complete positivity is only asserted for identical left and right multipliers")]
    UnequalMultipliers,

    #[error("integrand has annihilation or gauge components (G * Delta != 0)")]
    IntegrandNotCreationOnly,

    #[error("time {time} is not an integer number of steps of size {step}")]
    Misaligned { time: f64, step: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, QfkError>;
