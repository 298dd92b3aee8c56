//! Maximal out-degree of Galton-Watson trees.
//!
//! This crate computes the law of the maximal out-degree `M(τ)` of a
//! Galton-Watson tree `τ`, samples GW trees conditioned on events of the form
//! `{M ≤ n}`, `{M = n}` and `{M > n}`, samples truncated views of the
//! size-biased limit tree (Kesten's tree for critical laws, the condensation
//! tree for sub-critical ones), and evaluates exact graft-event probabilities
//! used to check local convergence of the conditioned trees.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and
//! parallel execution live in the companion `gwmax` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod convergence;
mod error;
pub mod maxdeg;
pub mod offspring;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod sum;
pub mod tree;

pub use error::{Error, Result};
pub use maxdeg::{MaxDegTable, TailReport, TailRow};
pub use offspring::{BiasedLaw, Criticality, Family, OffspringLaw};
pub use sampler::SampleConfig;
pub use tree::{FiniteTree, GraftEvent, GraftKind, Label, Mark, OutDegree, PartialTree};
