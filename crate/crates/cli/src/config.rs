use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sobmuck_core::sobolev::MAX_DEGREE;

use crate::error::CliError;
use crate::output::{sha256_hex, to_json};

/// Everything that determines a command's artifacts. Measure specs are
/// stored inline so a manifest replays without the original files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub p: f64,
    pub grid: usize,
    pub tol: f64,
    pub seed: u64,
    pub degree: usize,
    pub nmax: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let pre = |s: String| Err(CliError::Precondition(s));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return pre(format!("p = {} must lie in (1, inf)", self.p));
        }
        if !self.grid.is_power_of_two() || self.grid < 64 {
            return pre(format!("grid = {} must be a power of two >= 64", self.grid));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return pre(format!("tol = {} must lie in (0, 1)", self.tol));
        }
        if self.degree > MAX_DEGREE {
            return pre(format!("degree = {} exceeds {MAX_DEGREE}", self.degree));
        }
        if self.nmax == 0 {
            return pre("nmax must be positive".into());
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(to_json(self).as_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub artifacts: Vec<ArtifactEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn new(config: &RunConfig, artifacts: &[(String, String)]) -> Manifest {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            config: config.clone(),
            artifacts: artifacts
                .iter()
                .map(|(name, text)| ArtifactEntry { name: name.clone(), sha256: sha256_hex(text.as_bytes()) })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Manifest, CliError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("manifest: {e}")))?;
        if m.config.hash() != m.config_hash {
            return Err(CliError::Parse("manifest: config hash does not match its config".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig {
            command: "mnorm".into(),
            inputs: BTreeMap::from([("mu0".into(), serde_json::json!({"support": [0, 1]}))]),
            p: 2.0,
            grid: 4096,
            tol: 1e-10,
            seed: 7,
            degree: 6,
            nmax: 25,
            endpoint: None,
            variant: None,
        }
    }

    #[test]
    fn manifest_round_trip() {
        let c = cfg();
        let m = Manifest::new(&c, &[("a.csv".into(), "n,value\n".into())]);
        let back = Manifest::parse(&to_json(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.config.hash(), c.hash());
    }

    #[test]
    fn tampered_manifest_is_rejected() {
        let mut m = Manifest::new(&cfg(), &[]);
        m.config.seed = 8;
        assert!(matches!(Manifest::parse(&to_json(&m)), Err(CliError::Parse(_))));
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        for f in [
            |c: &mut RunConfig| c.p = 1.0,
            |c: &mut RunConfig| c.grid = 100,
            |c: &mut RunConfig| c.grid = 32,
            |c: &mut RunConfig| c.degree = 31,
            |c: &mut RunConfig| c.tol = 0.0,
        ] {
            let mut c = cfg();
            f(&mut c);
            assert!(matches!(c.validate(), Err(CliError::Precondition(_))));
        }
    }
}
