use std::collections::BTreeMap;

use anyhow::Context;
use log::warn;
use spider_core::evaluation::{
    evaluate_dataset, extract_ground_truth, BootstrapSettings, EvalReport,
};
use spider_core::spider::SpiderResult;
use spider_core::{Error, NodeId};

use crate::args::{EvalArgs, Granularity};
use crate::config::FileConfig;
use crate::retrieve::{instance_file, instance_graph, read_instances};
use crate::Incomplete;

pub fn run(args: &EvalArgs, cfg: &FileConfig, jobs: Option<usize>) -> anyhow::Result<()> {
    let results_dir = args
        .results
        .clone()
        .or_else(|| cfg.paths.results.clone())
        .ok_or_else(|| {
            Error::Input("no results directory: pass --results or set [paths].results".into())
        })?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.paths.out.clone())
        .unwrap_or_else(|| results_dir.clone());
    let graphs = args.graphs.clone().or_else(|| cfg.paths.graphs.clone());
    let kind = args
        .granularity
        .or(cfg.spider.granularity)
        .unwrap_or(Granularity::Function)
        .kind();
    let ks: Vec<usize> = if args.k.is_empty() {
        vec![cfg.spider.k.unwrap_or(20)]
    } else {
        args.k.clone()
    };
    if ks.contains(&0) {
        return Err(Error::Input("--k values must be positive".into()).into());
    }
    let settings = BootstrapSettings {
        resamples: args.resamples,
        seed: args
            .seed
            .or(cfg.seed)
            .unwrap_or(BootstrapSettings::default().seed),
        ..Default::default()
    };

    let instances = read_instances(&args.instances)?;
    let mut truths = BTreeMap::new();
    let mut results: BTreeMap<String, Vec<NodeId>> = BTreeMap::new();
    for inst in &instances {
        let graph = instance_graph(inst, graphs.as_deref(), &args.instances, jobs)?;
        let gt = extract_ground_truth(&inst.gold_patch, &graph, kind)
            .with_context(|| format!("gold patch of {}", inst.instance_id))?;
        for d in &gt.diagnostics {
            warn!("{}: {d}", inst.instance_id);
        }
        let path = results_dir.join(instance_file(&inst.instance_id, "json"));
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let result: SpiderResult = serde_json::from_str(&text)
                .map_err(|e| Error::Input(format!("malformed result {}: {e}", path.display())))?;
            results.insert(inst.instance_id.clone(), result.ids());
        }
        truths.insert(inst.instance_id.clone(), gt);
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    println!(
        "{:>4} {:>5}  {:<24} {:<24} {:<24}",
        "k", "n", "recall", "acc", "mrr"
    );
    let mut last: Option<EvalReport> = None;
    for &k in &ks {
        let report = evaluate_dataset(&truths, &results, k, &settings)?;
        std::fs::write(
            out_dir.join(format!("report_k{k}.json")),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
        report.write_csv(std::fs::File::create(
            out_dir.join(format!("report_k{k}.csv")),
        )?)?;
        print_row(&report);
        last = Some(report);
    }
    if let Some(report) = last {
        if !report.excluded.is_empty() {
            println!(
                "excluded (no {kind} changed): {}",
                report.excluded.join(", ")
            );
        }
        if !report.is_complete() {
            return Err(Incomplete(report.missing).into());
        }
    }
    Ok(())
}

fn print_row(r: &EvalReport) {
    let cell = |mean: f64, ci: (f64, f64)| format!("{mean:.4} [{:.4}, {:.4}]", ci.0, ci.1);
    match (r.means, r.ci95) {
        (Some(m), Some(ci)) => println!(
            "{:>4} {:>5}  {:<24} {:<24} {:<24}",
            r.k,
            r.per_instance.len(),
            cell(m.recall, ci.recall),
            cell(m.acc, ci.acc),
            cell(m.mrr, ci.mrr)
        ),
        _ => println!("{:>4} {:>5}  (nothing scored)", r.k, 0),
    }
}
