//! Batch front-end for the hybrid-duplex link analysis library: scenario
//! loading, one-dimensional parameter sweeps, and CSV emission.

pub mod sweep;
