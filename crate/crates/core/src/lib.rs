//! Kronecker sets, spectral measures and Gaussian flow simulation.

pub mod numkit;
pub mod qindep;
pub mod specmeasure;
pub mod kronecker;
pub mod gaussflow;

pub mod cli;

mod serde_util;
