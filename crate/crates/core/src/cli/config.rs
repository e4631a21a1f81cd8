//! JSON run configuration.
//!
//! Every field is optional. Command-line flags override the file, and the
//! file overrides the built-in defaults (the optimal resonant gate with all
//! lower couplers at `τ = 0`).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::network::NetworkParams;
use crate::nlpsg::{T_MIDDLE, T_OUTER};
use crate::ring::RingCoupler;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub tau: f64,
    pub eta: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub curve_points: Option<usize>,
    pub surface_points: Option<usize>,
    pub tau_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnotConfig {
    pub nlpsg1: Option<Vec<RingConfig>>,
    pub nlpsg2: Option<Vec<RingConfig>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rings: Option<Vec<RingConfig>>,
    /// `[[re, im]; 3]`.
    pub alpha: Option<Vec<[f64; 2]>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub grid: GridConfig,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub cnot: CnotConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn network(&self) -> Result<NetworkParams, CliError> {
        match &self.rings {
            Some(rings) => network_from("rings", rings),
            None => Ok(default_network()),
        }
    }

    pub fn alpha(&self) -> Option<Result<[Complex64; 3], CliError>> {
        self.alpha.as_ref().map(|a| {
            if a.len() != 3 {
                return Err(CliError::Config(format!(
                    "field `alpha`: expected 3 [re, im] pairs, found {}",
                    a.len()
                )));
            }
            Ok([0, 1, 2].map(|i| Complex64::new(a[i][0], a[i][1])))
        })
    }

    /// Parameters of the two sign gates; either falls back to `rings`.
    pub fn cnot_pair(&self) -> Result<[NetworkParams; 2], CliError> {
        let pick = |field: &str, rings: &Option<Vec<RingConfig>>| match rings {
            Some(r) => network_from(field, r),
            None => self.network(),
        };
        Ok([
            pick("cnot.nlpsg1", &self.cnot.nlpsg1)?,
            pick("cnot.nlpsg2", &self.cnot.nlpsg2)?,
        ])
    }
}

pub fn default_network() -> NetworkParams {
    NetworkParams::resonant([T_OUTER, T_MIDDLE, T_OUTER], [0.0; 3])
        .expect("optimal transmissions are physical")
}

fn network_from(field: &str, rings: &[RingConfig]) -> Result<NetworkParams, CliError> {
    if rings.len() != 3 {
        return Err(CliError::Config(format!(
            "field `{field}`: expected 3 rings, found {}",
            rings.len()
        )));
    }
    let mut built = [RingCoupler::resonant(0.0, 0.0).expect("trivial ring"); 3];
    let mut deltas = [0.0; 3];
    for (i, r) in rings.iter().enumerate() {
        built[i] = RingCoupler::new(r.tau, r.eta, r.theta, r.phi).map_err(|e| {
            let context = format!("field `{field}[{i}]`");
            match CliError::from(e) {
                CliError::Config(m) => CliError::Config(format!("{context}: {m}")),
                CliError::Numeric(m) => CliError::Numeric(format!("{context}: {m}")),
                CliError::Constraint(m) => CliError::Constraint(format!("{context}: {m}")),
            }
        })?;
        deltas[i] = r.delta;
    }
    Ok(NetworkParams::new(built, deltas))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_uses_defaults() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.network().unwrap(), default_network());
        assert!(c.alpha().is_none());
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::parse(r#"{"rings": [{"tau": 0.1, "eta": "x"}]}"#).unwrap_err();
        assert!(e.to_string().contains("rings[0].eta"), "{e}");

        let c = RunConfig::parse(r#"{"rings": [{"tau": 0.1, "eta": 0.2}]}"#).unwrap();
        let e = c.network().unwrap_err();
        assert!(e.to_string().contains("expected 3 rings"), "{e}");

        let e = RunConfig::parse(r#"{"ring": []}"#).unwrap_err();
        assert!(e.to_string().contains("ring"), "{e}");

        let c = RunConfig::parse(
            r#"{"rings": [{"tau": 0.1, "eta": 0.2}, {"tau": 2.0, "eta": 0.2}, {"tau": 0.1, "eta": 0.2}]}"#,
        )
        .unwrap();
        let e = c.network().unwrap_err();
        assert!(e.to_string().contains("rings[1]"), "{e}");
    }

    #[test]
    fn cnot_pair_falls_back_to_rings() {
        let c = RunConfig::parse(
            r#"{"cnot": {"nlpsg2": [{"tau": 0.0, "eta": 0.5}, {"tau": 0.0, "eta": 0.5}, {"tau": 0.0, "eta": 0.5}]}}"#,
        )
        .unwrap();
        let [a, b] = c.cnot_pair().unwrap();
        assert_eq!(a, default_network());
        assert_eq!(b.rings[0].eta(), 0.5);
    }
}
