//! Power-splitting control and outage analysis for an energy-harvesting
//! full-duplex amplify-and-forward relay.

// `!(x >= t)` is used on purpose so that NaN lands on the failing side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fading;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod quartic;
pub mod validate;

pub use error::{Error, Result};
