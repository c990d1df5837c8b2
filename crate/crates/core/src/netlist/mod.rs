//! Small-signal models of the three amplifier topologies and an exact
//! nodal-analysis solver.
//!
//! The admittance matrix holds polynomial entries `G + sC` over exact
//! rationals, so determinants and Cramer quotients come out as exact
//! transfer functions. This is the reference the feedback decompositions are
//! checked against.

mod mna;
mod params;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mna::{build_mna, mna_input_impedance, mna_transfer, MnaSystem};
pub use params::{CurrentBufferParams, NmcParams, TwoStageParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("unknown topology '{0}' (expected two-stage, current-buffer or nmc)")]
    UnknownTopology(String),
    #[error("invalid parameter '{key}': {reason}")]
    InvalidParam { key: &'static str, reason: &'static str },
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("degenerate network")]
    DegenerateNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    TwoStage,
    CurrentBuffer,
    Nmc,
}

impl Topology {
    pub fn tag(self) -> &'static str {
        match self {
            Topology::TwoStage => "two-stage",
            Topology::CurrentBuffer => "current-buffer",
            Topology::Nmc => "nmc",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Topology {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "two-stage" | "two_stage" | "miller" => Ok(Topology::TwoStage),
            "current-buffer" | "current_buffer" | "cb" => Ok(Topology::CurrentBuffer),
            "nmc" => Ok(Topology::Nmc),
            _ => Err(NetlistError::UnknownTopology(s.to_string())),
        }
    }
}

/// A topology together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case")]
pub enum Circuit {
    TwoStage(TwoStageParams),
    CurrentBuffer(CurrentBufferParams),
    Nmc(NmcParams),
}

impl Circuit {
    pub fn topology(&self) -> Topology {
        match self {
            Circuit::TwoStage(_) => Topology::TwoStage,
            Circuit::CurrentBuffer(_) => Topology::CurrentBuffer,
            Circuit::Nmc(_) => Topology::Nmc,
        }
    }

    pub fn validate(&self) -> Result<(), NetlistError> {
        match self {
            Circuit::TwoStage(p) => p.validate(),
            Circuit::CurrentBuffer(p) => p.validate(),
            Circuit::Nmc(p) => p.validate(),
        }
    }

    /// Node receiving the input current.
    pub fn input_node(&self) -> usize {
        0
    }

    /// Amplifier output node.
    pub fn output_node(&self) -> usize {
        match self {
            Circuit::TwoStage(_) | Circuit::CurrentBuffer(_) => 1,
            Circuit::Nmc(_) => 2,
        }
    }

    pub fn gm0(&self) -> Option<f64> {
        match self {
            Circuit::TwoStage(p) => p.gm0,
            Circuit::CurrentBuffer(p) => p.gm0,
            Circuit::Nmc(p) => Some(p.gm0),
        }
    }
}
