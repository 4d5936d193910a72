use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius {r} outside profile domain [{lo}, {hi}]")]
    Domain { r: f64, lo: f64, hi: f64 },

    #[error("warping function vanishes at r = {r}")]
    SingularPoint { r: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("expected {expected} nodal values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("star-shape violated at node {node}: u = {u}")]
    StarShape { node: usize, u: f64 },

    #[error("numerical blow-up at step {step}, node {node}")]
    BlowUp { step: usize, node: usize },

    #[error("target volume {target} outside attainable range [{lo}, {hi}]")]
    Range { target: f64, lo: f64, hi: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("config error: {0}")]
    Config(String),
}
