//! Benchmarks, optimality oracles and plot export for the dualplan stack.

pub mod cli;
pub mod export;
pub mod flight3d;
pub mod map2d;
pub mod optimizer;
pub mod oracle;
