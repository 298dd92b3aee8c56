use alloc::string::String;

/// Errors raised by the library.
///
/// Variants name the violated precondition; callers that map errors to exit
/// codes can rely on [`Error::is_invalid_input`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),
    #[error("offspring law has mean {0}; the mean must be finite and positive")]
    DegenerateMean(f64),
    #[error("super-critical offspring law (mean {0}): {1}")]
    SuperCritical(f64, &'static str),
    #[error("critical offspring law: {0}")]
    Critical(&'static str),
    #[error("sub-critical offspring law: {0}")]
    SubCritical(&'static str),
    #[error("bounded offspring law: conditioning on large maximal out-degree is a null event (largest degree {0})")]
    BoundedLaw(u64),
    #[error("p_{0} = 0, so {{M = {0}}} is a null event (q_n > 0 iff p_n > 0)")]
    NullEvent(u64),
    #[error("no tree has maximal out-degree above {0}: the offspring law has no mass beyond it")]
    EmptyTail(u64),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("vertex {0} is not in the tree")]
    NoSuchVertex(String),
    #[error("vertex {0} is not a leaf")]
    NotALeaf(String),
    #[error("identity requires n > M(t): got n = {n}, M(t) = {max_degree}")]
    IdentityNotApplicable { n: u64, max_degree: u64 },
    #[error("vertex budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("expected {expected:.3e} rejection trials exceeds the limit of {limit}")]
    InfeasibleConditioning { expected: f64, limit: u64 },
    #[error("trial limit of {0} reached before acceptance")]
    TrialLimit(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// `true` for errors caused by bad input (as opposed to resource limits
    /// hit while sampling).
    pub fn is_invalid_input(&self) -> bool {
        !matches!(
            self,
            Error::BudgetExceeded(_) | Error::TrialLimit(_) | Error::InfeasibleConditioning { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
