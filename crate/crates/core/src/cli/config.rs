use std::path::Path;

use serde::de::DeserializeOwned;

use super::CliError;
use crate::netlist::{Circuit, CurrentBufferParams, NmcParams, Topology, TwoStageParams};

/// Parameter deck used when no `--config` is given.
pub fn default_circuit(topology: Topology) -> Circuit {
    match topology {
        Topology::TwoStage => Circuit::TwoStage(TwoStageParams {
            gm: 1e-3,
            r1: 1e6,
            r2: 1e5,
            c1: 1e-13,
            c2: 1e-11,
            cc: 1e-12,
            gm0: Some(1e-4),
        }),
        Topology::CurrentBuffer => Circuit::CurrentBuffer(CurrentBufferParams {
            gm: 1e-3,
            gmc: 1e-3,
            r1: 1e6,
            r2: 1e5,
            c1: 1e-13,
            c2: 1e-11,
            cc: 1e-12,
            gm0: Some(1e-4),
        }),
        Topology::Nmc => Circuit::Nmc(NmcParams {
            gm0: 1e-4,
            gm1: 1e-4,
            gm2: 8e-2,
            r0: 1e6,
            r1: 1e6,
            r2: 1e6,
            c0: 1e-14,
            c1: 1e-14,
            c2: 1e-10,
            cc0: 1e-12,
            cc1: 5e-13,
        }),
    }
}

enum Doc {
    Toml(toml::Table),
    Json(serde_json::Map<String, serde_json::Value>),
}

impl Doc {
    fn keys(&self) -> Vec<String> {
        match self {
            Doc::Toml(t) => t.keys().cloned().collect(),
            Doc::Json(m) => m.keys().cloned().collect(),
        }
    }

    fn section<T: DeserializeOwned>(&self, key: &str) -> Result<T, CliError> {
        let err = |e: String| CliError::Config(format!("[{key}]: {e}"));
        match self {
            Doc::Toml(t) => t
                .get(key)
                .cloned()
                .ok_or_else(|| err("section missing".into()))?
                .try_into()
                .map_err(|e: toml::de::Error| err(e.message().to_string())),
            Doc::Json(m) => serde_json::from_value(m.get(key).cloned().ok_or_else(|| err("section missing".into()))?)
                .map_err(|e| err(e.to_string())),
        }
    }
}

fn parse_doc(path: &Path, text: &str) -> Result<Doc, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    if is_json {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        match v {
            serde_json::Value::Object(m) => Ok(Doc::Json(m)),
            _ => Err(CliError::Config(format!("{}: top level must be an object", path.display()))),
        }
    } else {
        let t: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            CliError::Config(format!("{}: {}", path.display(), e.message()))
        })?;
        Ok(Doc::Toml(t))
    }
}

/// Reads the parameter section for `topology` (or the only section present
/// when no topology is given) from a TOML or JSON deck.
pub fn load_circuit(path: &Path, topology: Option<Topology>) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("--config '{}': {e}", path.display())))?;
    let doc = parse_doc(path, &text)?;
    let topology = match topology {
        Some(t) => t,
        None => {
            let keys = doc.keys();
            match keys.as_slice() {
                [only] => only.parse::<Topology>().map_err(|e| CliError::Config(e.to_string()))?,
                _ => {
                    return Err(CliError::Config(
                        "--topology: required when the config has other than exactly one section".into(),
                    ))
                }
            }
        }
    };
    for key in doc.keys() {
        if key.parse::<Topology>().is_err() {
            return Err(CliError::Config(format!("[{key}]: unknown section")));
        }
    }
    let circuit = match topology {
        Topology::TwoStage => Circuit::TwoStage(doc.section(topology.tag())?),
        Topology::CurrentBuffer => Circuit::CurrentBuffer(doc.section(topology.tag())?),
        Topology::Nmc => Circuit::Nmc(doc.section(topology.tag())?),
    };
    circuit.validate().map_err(|e| CliError::Config(format!("[{}]: {e}", topology.tag())))?;
    Ok(circuit)
}

/// `key=lo:hi:n`; `n` is the total number of base grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub fn parse_sweep(spec: &str) -> Result<SweepSpec, CliError> {
    let bad = |why: &str| CliError::Config(format!("--sweep '{spec}': {why} (expected key=lo:hi:n)"));
    let (key, range) = spec.split_once('=').ok_or_else(|| bad("missing '='"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad("need three ':'-separated fields"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad("lo is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad("hi is not a number"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("n is not a positive integer"))?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(bad("need 0 < lo <= hi"));
    }
    if n < 2 {
        return Err(bad("need n >= 2"));
    }
    Ok(SweepSpec { key: key.trim().to_string(), lo, hi, n })
}
