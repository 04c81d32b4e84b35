//! Farey fraction levels and the statistical models built on them.
//!
//! The crate covers four models that share one free energy: the Farey
//! fraction spin chain, the Knauf chain, the Farey-tree multifractal and the
//! transfer operator of the Farey map. It provides
//!
//! * exact mediant enumeration of the Farey levels ([`farey`]),
//! * compensated, order-deterministic partition sums ([`partition`]),
//! * the truncated Taylor-coefficient transfer matrix and its leading
//!   eigenvalue ([`transfer`]),
//! * ball diameters of the Farey tree and their derivative approximation
//!   ([`balls`]),
//! * free energy, specific heat and the logarithmic transition fit
//!   ([`thermo`]).
//!
//! Everything here is `no_std` with `alloc`. Parallel execution, file
//! formats and the CLI live in the `fareyphase` crate, which plugs into the
//! [`exec::ChunkRunner`] hook.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod balls;
pub mod error;
pub mod exec;
pub mod farey;
pub mod partition;
pub mod sum;
pub mod thermo;
pub mod transfer;

pub use error::{Error, Result};
pub use exec::{ChunkRunner, Serial};
pub use farey::{Branch, FareyFraction, Fraction, MediantFrame, NewPair};
pub use partition::{Model, PartitionValue};
pub use sum::CompensatedSum;
pub use transfer::{SpectralResult, TransferMatrix};
