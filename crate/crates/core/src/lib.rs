//! Distributed evolution strategies whose search distribution is shaped by
//! surrogate gradients from behaviour cloning against a learned
//! inverse-dynamics model.
//!
//! The crate is organised along the data flow of one generation:
//!
//! - [`params`]: flat parameter vectors and the small MLP used for both the
//!   policy and the inverse-dynamics model, with exact backprop.
//! - [`es`]: sampling from the guided low-rank Gaussian, rank-based fitness
//!   shaping, the antithetic mean update, orthogonalization of surrogate
//!   gradients, and the covariance-adapting baseline.
//! - [`envs`]: waypoint environments with the sparse reward scheme and
//!   closed-form inverse-dynamics oracles (a 2D point-mass navigator and a
//!   3-link arm following Bezier tracks).
//! - [`idm`]: the inverse-dynamics model — prediction, training on pooled
//!   rollouts, trajectory filtering.
//! - [`bc`]: worker-side member evaluation and behaviour-cloning refinement.
//! - [`runtime`]: the master/worker loops over interchangeable transports
//!   (in-process channels, TCP sockets) plus the filesystem trajectory store.

pub mod bc;
pub mod envs;
pub mod error;
pub mod es;
pub mod idm;
pub mod params;
pub mod rng;
pub mod runtime;

pub use error::{Error, Result};
pub use params::{Activation, LayerSpec, MlpNet, NetShape, ParamVec};
