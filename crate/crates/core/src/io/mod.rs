//! Model files, DOT export and run reports.

mod dot;
mod model_file;

use serde::{Deserialize, Serialize};

pub use dot::{export_dot, export_supervisor_dot};
pub use model_file::{parse_model, serialize_model, ModelFile, ParseError};

use crate::synthesis::SynthesisReport;

/// A synthesis report with tool metadata, as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: String,
    pub mode: String,
    pub report: SynthesisReport,
}

impl RunReport {
    pub fn new(command: &str, model: &str, mode: &str, report: SynthesisReport) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model: model.to_string(),
            mode: mode.to_string(),
            report,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
