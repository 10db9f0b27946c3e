use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("m must be a positive integer (got {0})")]
    InvalidModulus(u64),

    #[error("zero denominator in rational input")]
    ZeroDenominator,

    #[error("operands live in different fields: m = {0} vs m = {1}")]
    MismatchedModulus(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{what} out of range: {detail}")]
    OutOfDomain { what: &'static str, detail: String },

    #[error("inadmissible digit {digit} at position {position}: digits must be >= {min}")]
    InadmissibleDigit {
        digit: u64,
        position: usize,
        min: u64,
    },

    #[error("finite expansion ends in digit {last} < m+1 = {min}; no rewriting rule is applied")]
    InadmissibleTermination { last: u64, min: u64 },

    #[error("empty digit sequence")]
    EmptySequence,

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("enumeration budget exceeded: {words} words > budget {budget}")]
    BudgetExceeded { words: u128, budget: u128 },

    #[error("precision exhausted after {digits_emitted} digits; retry with more than {precision_bits} bits")]
    PrecisionExhausted {
        digits_emitted: usize,
        precision_bits: usize,
    },

    #[error("no sign change on [{lo}, {hi}]: h({lo}) = {h_lo}, h({hi}) = {h_hi}")]
    NonBracketing {
        lo: f64,
        hi: f64,
        h_lo: f64,
        h_hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
