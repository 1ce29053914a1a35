use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    UnknownVariable(String),
    DuplicateVariable(String),
    TooManyVariables(usize),
    /// Arguments that must be disjoint share a variable, or are otherwise malformed.
    Argument(String),
    NegativeMass { row: usize },
    NonFiniteMass { row: usize },
    OutcomeOutOfRange { variable: String, value: usize, arity: usize },
    WrongRowWidth { row: usize, expected: usize, found: usize },
    DuplicateOutcome { row: usize },
    NotNormalized { total: f64 },
    EmptySupport,
    /// `D(q || p)` with `q(x) > 0 = p(x)`.
    InfiniteDivergence { outcome: usize },
    /// A log-ratio term `log(0 / p)` weighted by positive mass.
    NegativeInfinity { tuple: String },
    Capacity { sources: usize },
    GroundMismatch,
    Evaluation { node: String, measure: String },
    Infeasible { detail: String },
    UnknownAgent(usize),
    UnknownMeasure(String),
    UnknownAxiom(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownVariable(name) => write!(f, "unknown variable `{name}`"),
            Error::DuplicateVariable(name) => write!(f, "variable `{name}` declared twice"),
            Error::TooManyVariables(n) => write!(f, "{n} variables exceed the limit of 64"),
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NegativeMass { row } => write!(f, "row {row}: negative probability"),
            Error::NonFiniteMass { row } => write!(f, "row {row}: probability is not finite"),
            Error::OutcomeOutOfRange { variable, value, arity } => {
                write!(f, "outcome {value} of `{variable}` is outside arity {arity}")
            }
            Error::WrongRowWidth { row, expected, found } => {
                write!(f, "row {row}: expected {expected} outcomes, found {found}")
            }
            Error::DuplicateOutcome { row } => write!(f, "row {row}: outcome listed twice"),
            Error::NotNormalized { total } => {
                write!(f, "probabilities sum to {total}, not 1")
            }
            Error::EmptySupport => write!(f, "distribution has empty support"),
            Error::InfiniteDivergence { outcome } => {
                write!(f, "divergence is infinite: outcome {outcome} has zero reference mass")
            }
            Error::NegativeInfinity { tuple } => {
                write!(f, "log-ratio is -inf at source tuple {tuple}")
            }
            Error::Capacity { sources } => write!(
                f,
                "{sources} sources requested; at most 4 are supported because the antichain \
                 count grows with the Dedekind numbers (7580 nodes at 5 sources)"
            ),
            Error::GroundMismatch => write!(f, "antichains are over different ground sets"),
            Error::Evaluation { node, measure } => {
                write!(f, "measure {measure} returned NaN at node {node}")
            }
            Error::Infeasible { detail } => write!(f, "no admissible shared posterior: {detail}"),
            Error::UnknownAgent(i) => write!(f, "unknown agent index {i}"),
            Error::UnknownMeasure(name) => write!(f, "unknown measure `{name}`"),
            Error::UnknownAxiom(name) => write!(f, "unknown axiom `{name}`"),
        }
    }
}

impl core::error::Error for Error {}
