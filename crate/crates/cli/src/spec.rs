//! Measure specification files.
//!
//! ```json
//! { "support": [0, 1],
//!   "pieces": [ { "interval": [0, 1], "factors": [ {"kind": "power", "center": 0, "exp": 0.5} ] } ],
//!   "atoms": [ {"x": 1, "mass": 2} ] }
//! ```
//!
//! A piece is either `"factors": [...]` (an empty list means density 1) or
//! `"zero": true`. The optional top-level `"scale"` multiplies the density.

use serde::Deserialize;
use sobmuck_core::{Atom, Factor, Measure};
use sobmuck_core::measure::Piece;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureSpec {
    support: [f64; 2],
    pieces: Vec<PieceSpec>,
    #[serde(default)]
    atoms: Vec<AtomSpec>,
    #[serde(default)]
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceSpec {
    interval: [f64; 2],
    #[serde(default)]
    factors: Option<Vec<FactorSpec>>,
    #[serde(default)]
    zero: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    x: f64,
    mass: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FactorSpec {
    Power { center: f64, exp: f64 },
    Expneg { center: f64, beta: f64, gamma: f64 },
    Log { center: f64, exp: f64 },
    Loglog { center: f64, exp: f64 },
    Envelope {
        #[serde(rename = "C")]
        c: f64,
    },
}

impl FactorSpec {
    fn to_factor(&self) -> Factor {
        match *self {
            FactorSpec::Power { center, exp } => Factor::power(center, exp),
            FactorSpec::Expneg { center, beta, gamma } => Factor::exp_neg(center, beta, gamma),
            FactorSpec::Log { center, exp } => Factor::log(center, exp),
            FactorSpec::Loglog { center, exp } => Factor::loglog(center, exp),
            FactorSpec::Envelope { c } => Factor::envelope(c),
        }
    }
}

/// Parses a measure from JSON text, keeping the raw value. `what` names the
/// input in messages.
pub fn parse_spec(text: &str, what: &str) -> Result<(serde_json::Value, Measure), CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))?;
    let m = measure_from_value(&value, what)?;
    Ok((value, m))
}

pub fn measure_from_value(value: &serde_json::Value, what: &str) -> Result<Measure, CliError> {
    let spec = MeasureSpec::deserialize(value).map_err(|e| CliError::Parse(format!("{what}: {e}")))?;
    build(&spec).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

fn build(spec: &MeasureSpec) -> Result<Measure, String> {
    let [a, b] = spec.support;
    let mut pieces = Vec::with_capacity(spec.pieces.len());
    for p in &spec.pieces {
        let [lo, hi] = p.interval;
        let factors = match (&p.factors, p.zero) {
            (Some(_), true) => return Err(format!("piece [{lo}, {hi}] has both factors and zero")),
            (None, true) => None,
            (Some(fs), false) => Some(fs.iter().map(FactorSpec::to_factor).collect()),
            (None, false) => return Err(format!("piece [{lo}, {hi}] needs factors or zero")),
        };
        pieces.push(Piece { lo, hi, factors });
    }
    let density = sobmuck_core::WeightExpr::new(a, b, pieces).map_err(|e| e.to_string())?;
    let density = match spec.scale {
        None => density,
        Some(c) if c > 0.0 && c.is_finite() => density.scaled(c),
        Some(c) => return Err(format!("scale {c} must be positive and finite")),
    };
    let atoms = spec.atoms.iter().map(|a| Atom { x: a.x, mass: a.mass }).collect();
    Measure::new(density, atoms).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sobmuck_core::MeasureView;

    fn parse_measure(text: &str, what: &str) -> Result<Measure, CliError> {
        parse_spec(text, what).map(|v| v.1)
    }

    #[test]
    fn parses_all_factor_kinds() {
        let text = r#"{"support":[0,1],"pieces":[{"interval":[0,0.5],"factors":[
            {"kind":"power","center":0,"exp":0.5},{"kind":"log","center":0,"exp":1},
            {"kind":"loglog","center":0,"exp":-1},{"kind":"expneg","center":0,"beta":1,"gamma":0.5},
            {"kind":"envelope","C":2}]},{"interval":[0.5,1],"zero":true}],
            "atoms":[{"x":1,"mass":2}]}"#;
        let m = parse_measure(text, "m").unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.density().pieces().len(), 2);
        assert!(m.density().pieces()[1].is_zero());
    }

    #[test]
    fn power_density_value() {
        let m = parse_measure(r#"{"support":[0,1],"pieces":[{"interval":[0,1],"factors":[{"kind":"power","center":0,"exp":0.5}]}]}"#, "m").unwrap();
        assert!((m.density().density_at(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        for t in [
            "{",
            r#"{"support":[0,1]}"#,
            r#"{"support":[0,1],"pieces":[{"interval":[0,1]}]}"#,
            r#"{"support":[0,1],"pieces":[{"interval":[0,1],"factors":[{"kind":"cosh","center":0}]}]}"#,
            r#"{"support":[0,1],"pieces":[{"interval":[0,1],"factors":[{"kind":"envelope","C":0.5}]}]}"#,
            r#"{"support":[0,1],"pieces":[{"interval":[0,0.5],"factors":[]}]}"#,
            r#"{"support":[0,1],"pieces":[{"interval":[0,1],"factors":[]}],"atoms":[{"x":2,"mass":1}]}"#,
        ] {
            assert!(matches!(parse_measure(t, "m"), Err(CliError::Parse(_))), "{t}");
        }
    }
}
