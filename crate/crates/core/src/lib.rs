//! Semidefinite upper bounds on one-shot, one-way distillable key of bipartite
//! states and on one-shot forward-assisted private capacity of channels, built
//! on unextendible entanglement.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] dense Hermitian linear algebra and the quantum objects.
//! * [`sdp`] a block-structured SDP model and a homogeneous-embedding
//!   interior-point solver.
//! * [`closed_form`] scalar formulas shared by the bound calculators.
//! * [`state`] and [`channel`] the measures and bounds.
//! * [`experiment`] declarative parameter sweeps writing CSV and JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod closed_form;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod quantum;
pub mod report;
pub mod sdp;
pub mod state;

pub use error::{Error, Result};
pub use exec::Execution;
pub use quantum::{BipartiteState, ChannelChoi, HermitianOperator, PrivacyTest};
pub use report::{BoundReport, ChannelBoundReport, Regime};
