//! Fitness, complexity and relatedness analysis of job-skill networks.

// NaN must fail every bound check, so `!(x <= y)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod efc;
pub mod ingest;
pub mod model;
pub mod nullmodel;
pub mod projection;
pub mod report;
pub mod pipeline;
