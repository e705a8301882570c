//! Problem files: masses, positions, form tag and optional tolerances in TOML.

use std::path::Path;

use ccdegen::{Configuration, Form, Masses};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Central-configuration test tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc: Option<f64>,
    /// Relative determinant threshold for the verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<f64>,
}

/// On-disk schema. Unknown keys (such as the `[report]` table written by
/// `check`) are ignored, so a report file is itself a valid problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub form: Form,
    pub masses: Masses,
    pub configuration: Configuration,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem file serializes")
    }

    /// Validates the file; `form_override` wins over the file's own tag.
    pub fn validate(self, form_override: Option<Form>) -> Result<Problem, String> {
        let form = match (form_override, &self.form) {
            (Some(f), _) => f,
            (None, Some(tag)) => tag
                .parse::<Form>()
                .map_err(|e| format!("field `form`: {e}"))?,
            (None, None) => return Err("field `form`: missing (or pass --form)".into()),
        };
        if self.masses.len() != self.positions.len() {
            return Err(format!(
                "field `positions`: {} entries but `masses` has {}",
                self.positions.len(),
                self.masses.len()
            ));
        }
        for (i, m) in self.masses.iter().enumerate() {
            if !(m.is_finite() && *m > 0.0) {
                return Err(format!("field `masses[{i}]`: {m} is not a positive number"));
            }
        }
        if let Some(t) = &self.tolerances {
            for (name, v) in [("cc", t.cc), ("det", t.det)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(format!("field `tolerances.{name}`: {v} must be positive"));
                    }
                }
            }
        }
        let masses =
            Masses::new(self.masses.clone()).map_err(|e| format!("field `masses`: {e}"))?;
        let configuration = Configuration::from_points(&self.positions)
            .map_err(|e| format!("field `positions`: {e}"))?;
        Ok(Problem {
            file: self,
            form,
            masses,
            configuration,
        })
    }
}
