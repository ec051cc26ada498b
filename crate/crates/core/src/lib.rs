//! Simulation of two firms learning prices by online mirror descent in a
//! market with a shared, memory-driven reference price.
//!
//! The model lives in [`market`], the stationary equilibrium in
//! [`equilibrium`], the learning dynamics in [`omd`], step-size analysis in
//! [`stepsize`] and trajectory post-processing in [`diagnostics`]. The
//! [`cli`] module drives experiments from JSON configs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod market;
pub mod omd;
pub mod stepsize;

pub use equilibrium::{best_response, sne_closed_form, Sne};
pub use error::{Error, Result};
pub use market::{Firm, MarketParams, MarketSpec, PriceState};
pub use omd::{simulate, simulate_induced, Init, Learner, Regularizer, StepSchedule, Trajectory};
