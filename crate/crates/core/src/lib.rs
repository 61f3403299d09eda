//! Interference alignment for the K-user frequency-selective interference channel aided by an
//! instantaneous (memoryless) relay.
//!
//! The crate builds the alignment schemes over a `T`-slot symbol extension, verifies their
//! subspace structure in floating point and exact arithmetic, evaluates the closed-form DoF
//! expressions and estimates the achieved DoF by Monte-Carlo simulation.

pub mod beamform;
pub mod construct;
pub mod dof;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod model;
pub mod monomial;
pub mod partition;
pub mod relay;
pub mod sim;
pub mod subspace;

pub use construct::Construction;
pub use error::{Error, Result};
pub use model::{ChannelRealization, SchemeKind, SchemeParams};
pub use sim::Scheme;
