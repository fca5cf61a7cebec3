use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Exponential search refused up front (or aborted) because it would
    /// exceed the configured number of rule evaluations.
    #[error("work cap exceeded: {what} needs about {estimate:.3e} evaluations, cap is {cap:.3e}")]
    WorkCap {
        what: &'static str,
        estimate: f64,
        cap: f64,
    },

    #[error("no data: all {refusals} trials were refused")]
    NoData { refusals: u64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
