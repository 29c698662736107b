use thiserror::Error;

/// Errors raised by index-set construction, model checks, solvers and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight rule is not coordinate-monotone: sigma({child}) = {child_value} < sigma({parent}) = {parent_value}")]
    NonMonotoneWeight {
        parent: String,
        child: String,
        parent_value: f64,
        child_value: f64,
    },

    #[error("enumeration budget exceeded: more than {cap} candidates")]
    EnumerationBudgetExceeded { cap: usize },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("uniform ellipticity violated: r = {r} <= 0")]
    EllipticityViolation { r: f64 },

    #[error("no split index j0 <= {dims} satisfies the tail condition")]
    SplitInfeasible { dims: usize },

    #[error("singular or indefinite system: {0}")]
    SingularSystem(String),

    #[error("level {requested} not available (limit {limit})")]
    LevelOverflow { requested: u32, limit: u32 },

    #[error("index set is not downward closed: {0} is missing a predecessor")]
    NotLowerSet(String),

    #[error("ordering is not a linear extension: {0}")]
    OrderingInvalid(String),

    #[error("requested {requested} Leja points, at most {limit} supported")]
    CountOverflow { requested: usize, limit: usize },

    #[error("parameter point outside [-1,1]^J: {0}")]
    DomainViolation(String),

    #[error("tensor quadrature over {dims} active dimensions exceeds the cap of {cap}")]
    QuadBudgetExceeded { dims: usize, cap: usize },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("gate failed: {0}")]
    Gate(String),

    #[error("audit failed: {0}")]
    Audit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
