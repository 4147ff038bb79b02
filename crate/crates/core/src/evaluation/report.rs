use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci, DEFAULT_RESAMPLES, DEFAULT_SEED};
use super::ground_truth::GroundTruth;
use super::metrics::{acc_at_k, mrr_at_k, recall_at_k};
use crate::code_graph::NodeId;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub k: usize,
    pub recall_at_k: f64,
    pub acc_at_k: f64,
    pub mrr_at_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple<T> {
    pub recall: T,
    pub acc: T,
    pub mrr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings {
            resamples: DEFAULT_RESAMPLES,
            confidence: 0.95,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub bootstrap: BootstrapSettings,
    pub per_instance: Vec<InstanceResult>,
    /// `None` when no instance could be scored.
    pub means: Option<MetricTriple<f64>>,
    pub ci95: Option<MetricTriple<(f64, f64)>>,
    pub excluded: Vec<String>,
    pub missing: Vec<String>,
}

impl EvalReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "instance_id,recall,acc,mrr")?;
        for r in &self.per_instance {
            writeln!(
                out,
                "{},{},{},{}",
                csv_field(&r.instance_id),
                r.recall_at_k,
                r.acc_at_k,
                r.mrr_at_k
            )?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scores every non-excluded instance in `truths` against its entry in
/// `results` (ranked ids). Instances without a result are listed as missing
/// and left out of the means.
pub fn evaluate_dataset(
    truths: &BTreeMap<String, GroundTruth>,
    results: &BTreeMap<String, Vec<NodeId>>,
    k: usize,
    settings: &BootstrapSettings,
) -> Result<EvalReport> {
    let mut per_instance = Vec::new();
    let mut excluded = Vec::new();
    let mut missing = Vec::new();
    for (id, gt) in truths {
        if gt.excluded || gt.node_ids.is_empty() {
            excluded.push(id.clone());
            continue;
        }
        let Some(retrieved) = results.get(id) else {
            missing.push(id.clone());
            continue;
        };
        per_instance.push(InstanceResult {
            instance_id: id.clone(),
            k,
            recall_at_k: recall_at_k(&gt.node_ids, retrieved, k)?,
            acc_at_k: acc_at_k(&gt.node_ids, retrieved, k)?,
            mrr_at_k: mrr_at_k(&gt.node_ids, retrieved, k)?,
        });
    }

    let (means, ci95) = if per_instance.is_empty() {
        (None, None)
    } else {
        let column =
            |f: fn(&InstanceResult) -> f64| per_instance.iter().map(f).collect::<Vec<f64>>();
        let cols = [
            column(|r| r.recall_at_k),
            column(|r| r.acc_at_k),
            column(|r| r.mrr_at_k),
        ];
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let ci =
            |v: &[f64]| bootstrap_ci(v, settings.resamples, settings.confidence, settings.seed);
        (
            Some(MetricTriple {
                recall: mean(&cols[0]),
                acc: mean(&cols[1]),
                mrr: mean(&cols[2]),
            }),
            Some(MetricTriple {
                recall: ci(&cols[0])?,
                acc: ci(&cols[1])?,
                mrr: ci(&cols[2])?,
            }),
        )
    };
    Ok(EvalReport {
        k,
        bootstrap: *settings,
        per_instance,
        means,
        ci95,
        excluded,
        missing,
    })
}
