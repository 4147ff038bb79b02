use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::code_graph::Language;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationInstance {
    pub instance_id: String,
    #[serde(rename = "issue")]
    pub issue_text: String,
    /// Path to (or identifier of) the pre-patch checkout.
    #[serde(rename = "repo")]
    pub repo_ref: String,
    #[serde(rename = "patch")]
    pub gold_patch: String,
    pub language: Language,
}

/// Reads newline-delimited instances; blank lines are skipped. Errors name
/// the 1-based line number.
pub fn load_instances(reader: impl BufRead) -> Result<Vec<LocalizationInstance>> {
    let mut out: Vec<LocalizationInstance> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: LocalizationInstance = serde_json::from_str(&line)
            .map_err(|e| Error::format(i + 1, format!("bad instance: {e}")))?;
        if inst.instance_id.is_empty() {
            return Err(Error::format(i + 1, "empty instance_id"));
        }
        if inst.issue_text.trim().is_empty() {
            return Err(Error::format(
                i + 1,
                format!("instance {} has an empty issue", inst.instance_id),
            ));
        }
        if out.iter().any(|o| o.instance_id == inst.instance_id) {
            return Err(Error::format(
                i + 1,
                format!("duplicate instance {}", inst.instance_id),
            ));
        }
        out.push(inst);
    }
    Ok(out)
}
