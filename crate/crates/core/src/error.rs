use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("environment spec invalid: {0}")]
    InvalidSpec(String),
    #[error("spec is not calibrated: {0}")]
    NotCalibrated(String),
    #[error("lattice increment law rejected: {0} requires a non-lattice law")]
    LatticeRefused(String),
    #[error("ellipticity required: {0}")]
    EllipticityRequired(String),
    #[error("argument {arg} outside the Cramer series guard radius {guard}")]
    RadiusExceeded { arg: f64, guard: f64 },
    #[error("bisection for gamma_tilde did not converge in ({lo}, {hi})")]
    BisectionFailed { lo: f64, hi: f64 },
    #[error("node budget exceeded: arena holds {held} nodes, cap {cap}")]
    NodeBudget { held: usize, cap: usize },
    #[error("subtree under node {0} not grown; grow it first")]
    NotGrown(u32),
    #[error("node {0} is not a strict ancestor of node {1}")]
    NotAncestor(u32, u32),
    #[error("walk completed only {completed} of {requested} returns to the root")]
    ReturnsIncomplete { completed: u64, requested: u64 },
    #[error("enumeration refused: {paths} paths exceeds the 1e7 cap")]
    EnumerationTooLarge { paths: u64 },
    #[error("parameter regime violated: {0}")]
    RegimeViolated(String),
    #[error("cut plan infeasible: {0}")]
    InfeasiblePlan(String),
    #[error("cluster extents overlap in Neveu order")]
    OverlappingExtents,
    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
