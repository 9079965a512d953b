use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A trait vector has a non-positive coordinate (this includes the
    /// absent-prey sentinel `(0, 0)`).
    #[error("invalid trait ({0}, {1}): coordinates must be strictly positive")]
    InvalidTrait(f64, f64),
    /// The prey cannot support the predator (or cannot persist on its own).
    #[error("trait is outside the viable region")]
    NotViable,
    /// A denominator or a linear system is singular.
    #[error("singular system: {0}")]
    Singular(&'static str),
    /// Two prey share the same birth rate; the equilibrium is not unique.
    #[error("degenerate tie between prey birth rates")]
    DegenerateTie,
    /// The requested interior equilibrium does not exist.
    #[error("types do not coexist")]
    NotCoexisting,
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// `lambda` is only defined for displacement speeds in `[0, 1)`.
    #[error("rate function argument {0} outside [0, 1)")]
    OutOfDomain(f64),
    /// The adaptive integrator could not make progress.
    #[error("integrator step underflow at t = {0}")]
    Stiffness(f64),
    /// An estimator was handed too little data.
    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    /// A particle simulation reached its population cap; the simulator
    /// keeps the partial state.
    #[error("particle budget of {budget} exceeded at t = {time}")]
    BudgetExceeded { budget: usize, time: f64 },
    /// Every replicate of a killed branching random walk died out.
    #[error("all {replicates} replicates went extinct")]
    Extinct { replicates: usize },
    /// A process met a state that its definition rules out.
    #[error("invariant violated: {0}")]
    Invariant(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
