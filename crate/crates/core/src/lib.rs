//! Two-port feedback analysis of Miller-compensated amplifiers.

pub mod cli;
pub mod feedback;
pub mod netlist;
mod parallel;
pub mod polesplit;
pub mod polyalg;
pub mod rootlocus;
pub mod stability;
