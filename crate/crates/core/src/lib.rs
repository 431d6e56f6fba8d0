//! Location (Hotelling) games on metric networks, in exact rational arithmetic.
//!
//! Retailers pick points of a network whose edges carry a uniform mass of
//! consumers; each consumer shops at the nearest occupied point. The crate
//! computes payoffs and consumer cost, builds pure Nash equilibria for large
//! player counts, verifies equilibria exactly, and estimates efficiency.

pub mod construct;
pub mod efficiency;
pub mod examples;
pub mod network;
pub mod payoff;
pub mod rational;
pub mod verify;

mod cells;
mod deviation;

pub use network::{EdgeClass, EdgeClasses, EdgeId, Interval, Location, Network, Point, VertexId};
pub use payoff::Profile;
pub use rational::Q;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("vertex {0:?} has degree 2; normalize the network first")]
    NormalizationRequired(String),
    #[error("vertex property violated: vertex {0:?} has degree >= 3 and is unoccupied")]
    VertexProperty(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("n = {n} is below the construction threshold {n_bar}")]
    BelowThreshold { n: usize, n_bar: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
