use alloc::string::String;
use core::fmt;

/// Errors raised by the library. Infeasible and unbounded LPs are reported
/// through [`crate::LpStatus`], not here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Requested level is above the configured cap.
    LevelTooLarge { requested: usize, cap: usize },
    /// Expression text does not match the grammar.
    Syntax { offset: usize, message: String },
    /// A residue class was written with modulus zero.
    ZeroModulus { offset: usize },
    /// A finite-set literal has more members than allowed.
    FiniteSetTooLarge { offset: usize, len: usize, limit: usize },
    /// Expression tree exceeds depth or node limits.
    ExpressionTooLarge { message: String },
    /// Normalisation produced more atoms than the budget allows.
    AtomBudget { atoms: usize, budget: usize },
    /// An intermediate modulus no longer fits the integer budget.
    ModulusOverflow,
    /// A constraint-family modulus does not divide the level's primorial.
    ModulusNotDividing { modulus: u64, primorial: u64 },
    /// LP larger than the solver budget.
    LpBudget { what: &'static str, size: usize, limit: usize },
    /// A path tuple was not present in the multiset.
    PathNotPresent,
    /// A redirect was requested without enough donor paths.
    DonorShortage { source: u64, target: u64 },
    /// Input violated a documented precondition.
    InvalidInput(String),
    /// A report invariant failed; always a bug.
    Internal(String),
}

impl Error {
    /// True for errors caused by caps and budgets rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::LevelTooLarge { .. }
                | Error::AtomBudget { .. }
                | Error::ModulusOverflow
                | Error::LpBudget { .. }
                | Error::ExpressionTooLarge { .. }
                | Error::FiniteSetTooLarge { .. }
        )
    }

    /// True for errors in the expression text.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::ZeroModulus { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LevelTooLarge { requested, cap } => {
                write!(f, "level {requested} exceeds the level cap of {cap}")
            }
            Error::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            Error::ZeroModulus { offset } => {
                write!(f, "modulus must be positive (class at byte {offset})")
            }
            Error::FiniteSetTooLarge { offset, len, limit } => write!(
                f,
                "finite set at byte {offset} has {len} members, limit is {limit}"
            ),
            Error::ExpressionTooLarge { message } => write!(f, "expression too large: {message}"),
            Error::AtomBudget { atoms, budget } => write!(
                f,
                "normalisation needs {atoms} atoms, budget is {budget}"
            ),
            Error::ModulusOverflow => write!(f, "modulus exceeds the 64-bit integer budget"),
            Error::ModulusNotDividing { modulus, primorial } => write!(
                f,
                "modulus {modulus} does not divide the primorial {primorial}"
            ),
            Error::LpBudget { what, size, limit } => {
                write!(f, "LP has {size} {what}, limit is {limit}")
            }
            Error::PathNotPresent => write!(f, "path not present in multiset"),
            Error::DonorShortage { source, target } => write!(
                f,
                "donor shortage: {source} paths pass through the source set but only {target} through the target set"
            ),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
