//! JSON bank configuration documents.

use serde::{Deserialize, Serialize};
use twfpd::construct::{validate_coset_reps, BankConfig, DirectionSpec};
use twfpd::{MultiIndex, Orientation};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BankDocument {
    pub n: usize,
    pub lambda: i64,
    pub directions: Vec<DirectionDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset_reps: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DirectionDocument {
    pub xi: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<i64>>,
    pub m: usize,
}

fn invalid(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

pub fn parse_orientation(s: &str) -> Result<Orientation, CliError> {
    match s {
        "max" | "max_phase" => Ok(Orientation::MaxPhase),
        "min" | "min_phase" => Ok(Orientation::MinPhase),
        other => Err(invalid(
            "orientation",
            format!("expected \"max_phase\" or \"min_phase\", got {other:?}"),
        )),
    }
}

pub fn orientation_name(o: Orientation) -> &'static str {
    match o {
        Orientation::MaxPhase => "max_phase",
        Orientation::MinPhase => "min_phase",
    }
}

/// Parses and validates a configuration document.
pub fn parse_bank_config(text: &str) -> Result<BankConfig, CliError> {
    let doc: BankDocument = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("bank config: {e}")))?;
    doc.to_config()
}

impl BankDocument {
    pub fn to_config(&self) -> Result<BankConfig, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        if self.lambda < 2 {
            return Err(invalid("lambda", format!("must be >= 2, got {}", self.lambda)));
        }
        if self.directions.is_empty() {
            return Err(invalid("directions", "at least one direction is required"));
        }
        let cosets = (self.lambda as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if self.directions.len() as u128 > cosets {
            return Err(invalid(
                "directions",
                format!("{} directions exceed the {cosets} cosets", self.directions.len()),
            ));
        }

        let mut directions = Vec::with_capacity(self.directions.len());
        for (i, d) in self.directions.iter().enumerate() {
            if d.xi.len() != n {
                return Err(invalid(
                    format!("directions[{i}].xi"),
                    format!("expected {n} entries, found {}", d.xi.len()),
                ));
            }
            if d.xi.iter().all(|&v| v == 0) {
                return Err(invalid(format!("directions[{i}].xi"), "must be nonzero"));
            }
            if d.m == 0 {
                return Err(invalid(format!("directions[{i}].m"), "must be >= 1"));
            }
            let mut spec = DirectionSpec::new(d.xi.clone(), d.m);
            if let Some(zeta) = &d.zeta {
                if zeta.len() != n {
                    return Err(invalid(
                        format!("directions[{i}].zeta"),
                        format!("expected {n} entries, found {}", zeta.len()),
                    ));
                }
                spec = spec.with_zeta(zeta.clone());
            }
            directions.push(spec);
        }

        let mut config = BankConfig::new(n, self.lambda, directions)
            .map_err(|e| CliError::Validation(format!("bank config: {e}")))?;
        if let Some(reps) = &self.coset_reps {
            let reps: Vec<MultiIndex> = reps.iter().map(|r| MultiIndex::new(r)).collect();
            validate_coset_reps(n, self.lambda, &reps).map_err(|e| invalid("coset_reps", e))?;
            config = config
                .with_coset_reps(reps)
                .map_err(|e| invalid("coset_reps", e))?;
        }
        if let Some(o) = &self.orientation {
            config = config.with_orientation(parse_orientation(o)?);
        }
        Ok(config)
    }

    /// Document describing `config` with every default made explicit.
    pub fn from_config(config: &BankConfig) -> Self {
        BankDocument {
            n: config.n,
            lambda: config.lambda,
            directions: config
                .directions
                .iter()
                .map(|d| DirectionDocument {
                    xi: d.xi.as_slice().to_vec(),
                    zeta: Some(d.zeta.as_slice().to_vec()),
                    m: d.m,
                })
                .collect(),
            coset_reps: Some(
                config
                    .coset_reps
                    .iter()
                    .map(|r| r.as_slice().to_vec())
                    .collect(),
            ),
            orientation: Some(orientation_name(config.orientation).to_string()),
        }
    }
}
