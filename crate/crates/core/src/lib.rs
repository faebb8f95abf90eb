//! Hybrid beamforming for mmWave multi-user MIMO.
//!
//! The pipeline has three stages:
//!
//! 1. [`fp_fd`]: fractional-programming fully-digital beamforming that
//!    maximizes the system sum-rate through a block-concave surrogate with
//!    closed-form updates.
//! 2. [`mm_hbf`]: majorization-minimization factorization of the digital
//!    solution into a constant-modulus analog stage and a low-dimensional
//!    digital stage, applied to the BS precoder jointly over users and to
//!    each UE combiner separately.
//! 3. [`elm`]: an extreme-learning-machine surrogate trained on
//!    solver-generated labels that predicts feasible hybrid beamformers
//!    straight from (noisy) channel matrices.
//!
//! [`channel`] provides seeded Saleh-Valenzuela channel generation,
//! [`metrics`] the sum-rate evaluation, [`numerics`] the shared dense
//! complex linear algebra, and [`exec`] deterministic trial parallelism.

pub mod channel;
pub mod elm;
pub mod error;
pub mod exec;
pub mod fp_fd;
pub mod metrics;
pub mod mm_hbf;
pub mod numerics;

pub use channel::{ChannelModelParams, ChannelSet, SystemConfig};
pub use error::{HbfError, Result};
pub use metrics::{FdBeamformers, HybridBeamformers};
