use thiserror::Error;

/// A configuration value violates its invariant.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            field,
            reason: reason.into(),
        }
    }
}

/// Misuse of the graph containers. Seeing one of these from the planner means
/// a bookkeeping bug, not bad input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph is empty")]
    Empty,
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("edge {tail} -> {head} would be a self loop")]
    SelfLoop { tail: usize, head: usize },
    #[error("trajectory does not start at the terminal state of trajectory node {0}")]
    Discontinuous(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("initial output ({x1}, {x2}) is not in free space")]
    StartInCollision { x1: f64, x2: f64 },
    #[error("rejection sampling found no free point after {0} draws")]
    SamplingExhausted(usize),
}
