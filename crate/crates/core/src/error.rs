use thiserror::Error;

/// Errors raised by model construction, estimation and the exact oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpeError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid reward model: {0}")]
    InvalidReward(String),

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("unidentifiable instance: target puts mass on action {action} which the behavior policy never takes")]
    Unidentifiable { action: usize },

    #[error("sample {index} has action {action} with zero behavior propensity")]
    ZeroPropensitySample { index: usize, action: usize },

    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },

    #[error("enumeration needs {needed:.3e} outcomes, budget is {budget:.3e}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error("continuous reward distribution on action {action}; exact enumeration needs discrete rewards")]
    ContinuousReward { action: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, OpeError>;
