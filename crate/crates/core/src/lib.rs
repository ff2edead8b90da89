//! Reduced energy model for stacks of magnetic skyrmions in ultrathin
//! ferromagnetic multilayers coupled by stray fields.

pub mod boxqp;
pub mod bp_oracle;
pub mod cli;
pub mod energy;
pub mod error;
pub mod kernels;
pub mod optimize;
pub mod output;
pub mod quad;
pub mod shapefun;
pub mod specfun;
pub mod units;

pub use error::{Error, Result};
