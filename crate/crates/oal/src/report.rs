//! Side-by-side comparison of finished runs.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use oal_core::harness::{compare, WelchResult};
use serde::Serialize;

use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::outputs::{Summary, SUMMARY_FILE};

pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: Summary,
}

pub fn load_run(dir: &Path) -> anyhow::Result<LoadedRun> {
    let manifest = RunManifest::read(&dir.join(MANIFEST_FILE))?;
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let summary: Summary = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if manifest.corpus_fingerprint != summary.corpus_fingerprint {
        bail!("{}: manifest and summary disagree on the corpus", dir.display());
    }
    Ok(LoadedRun { dir: dir.to_path_buf(), manifest, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub condition: String,
    pub seed: u64,
    pub success_rate: f64,
    pub mean_length: f64,
    pub success_vs_baseline: Option<WelchResult>,
    pub length_vs_baseline: Option<WelchResult>,
}

fn label(run: &LoadedRun) -> String {
    let mut name = run.summary.arm.clone();
    for a in &run.summary.ablate {
        name.push_str(&format!(" -{a}"));
    }
    format!("{name} ({})", run.dir.file_name().map_or_else(|| run.dir.display().to_string(), |n| n.to_string_lossy().into()))
}

/// Compares every run's final test batch with the baseline run. Runs must
/// share a corpus; seeds are reported, never pooled.
pub fn build_report(runs: &[LoadedRun], baseline: usize) -> anyhow::Result<Vec<ReportRow>> {
    let Some(base) = runs.get(baseline) else {
        bail!("baseline index {baseline} out of range");
    };
    for r in runs {
        if r.summary.corpus_fingerprint != base.summary.corpus_fingerprint {
            bail!(
                "corpus fingerprint mismatch: {} ({}) vs {} ({})",
                r.dir.display(),
                &r.summary.corpus_fingerprint[..12.min(r.summary.corpus_fingerprint.len())],
                base.dir.display(),
                &base.summary.corpus_fingerprint[..12.min(base.summary.corpus_fingerprint.len())],
            );
        }
    }
    let bs = base.summary.final_test.success_values();
    let bl = base.summary.final_test.length_values();
    Ok(runs
        .iter()
        .map(|r| {
            let t = &r.summary.final_test;
            ReportRow {
                condition: label(r),
                seed: r.summary.master_seed,
                success_rate: t.success_rate,
                mean_length: t.mean_length,
                success_vs_baseline: compare(&t.success_values(), &bs),
                length_vs_baseline: compare(&t.length_values(), &bl),
            }
        })
        .collect())
}

fn marker(r: Option<&WelchResult>) -> &'static str {
    match r {
        Some(r) if r.p_two_sided < 0.05 => "*",
        _ => "",
    }
}

fn p(r: Option<&WelchResult>) -> String {
    r.map_or_else(|| "n/a".into(), |r| format!("{:.4}", r.p_two_sided))
}

pub fn write_text(mut w: impl Write, rows: &[ReportRow], baseline: &str) -> anyhow::Result<()> {
    let width = rows.iter().map(|r| r.condition.len()).max().unwrap_or(9).max(9);
    writeln!(w, "{:<width$}  {:>6}  {:>12}  {:>10}  {:>14}  {:>10}", "condition", "seed", "success rate", "p", "dialog length", "p")?;
    for r in rows {
        let (ps, pl) = (r.success_vs_baseline.as_ref(), r.length_vs_baseline.as_ref());
        writeln!(
            w,
            "{:<width$}  {:>6}  {:>11.3}{:1}  {:>10}  {:>13.2}{:1}  {:>10}",
            r.condition,
            r.seed,
            r.success_rate,
            marker(ps),
            p(ps),
            r.mean_length,
            marker(pl),
            p(pl),
        )?;
    }
    writeln!(w, "* Welch p < 0.05 against {baseline} (final test batch, per-dialog values)")?;
    Ok(())
}

pub fn write_csv(w: impl Write, rows: &[ReportRow]) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["condition", "seed", "success_rate", "success_p", "mean_length", "length_p"])?;
    for r in rows {
        wtr.write_record([
            r.condition.clone(),
            r.seed.to_string(),
            r.success_rate.to_string(),
            r.success_vs_baseline.map_or(String::new(), |x| x.p_two_sided.to_string()),
            r.mean_length.to_string(),
            r.length_vs_baseline.map_or(String::new(), |x| x.p_two_sided.to_string()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
