use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code distance {0}: must be odd and at least 3")]
    InvalidDistance(usize),
    #[error("invalid bridge width {0}: must be odd and at least 1")]
    InvalidBridgeWidth(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frame `{frame}` is not defined for a {experiment} circuit")]
    FrameUnavailable { frame: String, experiment: String },
    #[error("decoder `{decoder}` cannot decode a `{experiment}` experiment")]
    IncompatibleDecoder { decoder: String, experiment: String },
    #[error("fault site {0} does not exist in the circuit")]
    UnknownFaultSite(usize),
    #[error("defect {0} has no path to another defect or to the boundary")]
    UnmatchableDefect(usize),
    #[error("brute-force matching refuses {0} defects (limit {1})")]
    TooManyDefects(usize, usize),
    #[error("hyperedge in a detector set that must be graph-like: {0}")]
    UnexpectedHyperedge(String),
    #[error("jackknife needs at least two blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("threshold fit failed: {0}")]
    FitFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
