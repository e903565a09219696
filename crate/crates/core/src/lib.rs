// NaN inputs must fall into the error branch of range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggtail;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod producttail;
pub mod quad;
pub mod radial;
pub mod solve;
pub mod specfun;
