use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(String),

    #[error("layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },

    #[error("topology needs at least {min} layers, got {got}")]
    TooFewLayers { min: usize, got: usize },

    #[error("invalid demand: {0}")]
    InvalidDemand(String),

    #[error("layer {0} is infinite; this operation needs finite endpoint layers")]
    InfiniteEndpoint(usize),

    #[error("layer {0} is infinite; schedules exist only for finite networks")]
    InfiniteLayer(usize),

    #[error("scheduling needs at least one relay layer")]
    NoRelay,

    #[error("gap undefined: alpha and beta are both infinite")]
    UnboundedGap,

    #[error("demand pattern is zero")]
    ZeroDemand,

    #[error("demand is outside the achievable region: {0}")]
    Infeasible(String),

    #[error("schedule block lengths exceed 64-bit range")]
    ScheduleTooLarge,

    #[error("degenerate family instance at n={n}: {reason}")]
    DegenerateFamily { n: u64, reason: String },
}
