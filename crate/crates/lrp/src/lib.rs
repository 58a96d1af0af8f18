//! Simulation laboratory for long-range percolation on finite cycles, paths
//! and boxes.
//!
//! The crate samples the polynomial-decay percolation law reproducibly,
//! measures distance and expansion observables (diameter, cut points,
//! Cheeger ratios, effective resistance, mixing time), checks the
//! renormalization-style attachment event on path samples, and drives
//! deterministic parameter sweeps with scaling-law fits over the results.

pub mod expansion;
pub mod harness;
pub mod hierarchy;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;

mod csr;

pub use harness::{run_sweep, SweepConfig, SweepRow};
pub use model::{ModelParams, PercGraph, Topology};
