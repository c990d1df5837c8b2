use serde::{Deserialize, Serialize};

use super::NetlistError;

/// Two-stage Miller amplifier small-signal model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStageParams {
    pub gm: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc: f64,
    /// Input-stage transconductance, only needed for GBW.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gm0: Option<f64>,
}

/// Two-stage amplifier with a unilateral current buffer in series with `cc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentBufferParams {
    pub gm: f64,
    pub gmc: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gm0: Option<f64>,
}

/// Three-stage nested Miller amplifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmcParams {
    pub gm0: f64,
    pub gm1: f64,
    pub gm2: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub cc0: f64,
    pub cc1: f64,
}

fn positive(key: &'static str, v: f64) -> Result<(), NetlistError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(NetlistError::InvalidParam { key, reason: "must be finite and > 0" })
    }
}

fn nonnegative(key: &'static str, v: f64) -> Result<(), NetlistError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(NetlistError::InvalidParam { key, reason: "must be finite and >= 0" })
    }
}

impl TwoStageParams {
    pub fn validate(&self) -> Result<(), NetlistError> {
        nonnegative("gm", self.gm)?;
        positive("r1", self.r1)?;
        positive("r2", self.r2)?;
        positive("c1", self.c1)?;
        positive("c2", self.c2)?;
        nonnegative("cc", self.cc)?;
        if let Some(g) = self.gm0 {
            nonnegative("gm0", g)?;
        }
        Ok(())
    }
}

impl CurrentBufferParams {
    pub fn validate(&self) -> Result<(), NetlistError> {
        self.two_stage().validate()?;
        positive("gmc", self.gmc)
    }

    /// The same amplifier with the buffer removed.
    pub fn two_stage(&self) -> TwoStageParams {
        TwoStageParams {
            gm: self.gm,
            r1: self.r1,
            r2: self.r2,
            c1: self.c1,
            c2: self.c2,
            cc: self.cc,
            gm0: self.gm0,
        }
    }
}

impl NmcParams {
    pub fn validate(&self) -> Result<(), NetlistError> {
        nonnegative("gm0", self.gm0)?;
        nonnegative("gm1", self.gm1)?;
        nonnegative("gm2", self.gm2)?;
        positive("r0", self.r0)?;
        positive("r1", self.r1)?;
        positive("r2", self.r2)?;
        positive("c0", self.c0)?;
        positive("c1", self.c1)?;
        positive("c2", self.c2)?;
        nonnegative("cc0", self.cc0)?;
        nonnegative("cc1", self.cc1)
    }
}
