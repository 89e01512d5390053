//! Benchmark campaigns: many trials of several repair variants over a set of
//! bug bundles, summarized into a metrics table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RepairError, Result};
use crate::ingredients::Screening;
use crate::pipeline::Prepared;
use crate::search::{run_deletion_baseline, run_search, Algorithm, RepairResult, SearchConfig};
use crate::seeder::SeededBug;

/// A named repair configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// NSGA-II, direct screening.
    Arja,
    /// NSGA-II, variables renamed by type matching.
    ArjaV,
    /// NSGA-II, function calls renamed by type matching.
    ArjaM,
    /// NSGA-II, both kinds of renaming.
    ArjaB,
    /// Single-objective GA.
    ArjaS,
    /// Random search.
    ArjaR,
    /// Deletion and skipping only.
    Kali,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Arja,
        Variant::ArjaV,
        Variant::ArjaM,
        Variant::ArjaB,
        Variant::ArjaS,
        Variant::ArjaR,
        Variant::Kali,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Arja => "arja",
            Variant::ArjaV => "arja_v",
            Variant::ArjaM => "arja_m",
            Variant::ArjaB => "arja_b",
            Variant::ArjaS => "arja_s",
            Variant::ArjaR => "arja_r",
            Variant::Kali => "kali",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    /// `None` for the deletion baseline.
    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            Variant::Arja | Variant::ArjaV | Variant::ArjaM | Variant::ArjaB => Some(Algorithm::Nsga2),
            Variant::ArjaS => Some(Algorithm::SingleObjective),
            Variant::ArjaR => Some(Algorithm::Random),
            Variant::Kali => None,
        }
    }

    /// The base configuration with this variant's screening applied.
    pub fn configure(self, base: &SearchConfig) -> SearchConfig {
        let screening = match self {
            Variant::ArjaV => Screening::TypeMatch { vars: true, funcs: false },
            Variant::ArjaM => Screening::TypeMatch { vars: false, funcs: true },
            Variant::ArjaB => Screening::TypeMatch { vars: true, funcs: true },
            _ => base.screening,
        };
        SearchConfig {
            screening,
            ..base.clone()
        }
    }

    pub fn run(self, prepared: &Prepared, config: &SearchConfig) -> RepairResult {
        match self.algorithm() {
            Some(a) => run_search(a, prepared.problem(), config),
            None => run_deletion_baseline(prepared.problem(), config),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Trial seed from the first eight bytes of
/// `SHA-256(campaign_seed || bug || variant || trial)`.
pub fn derive_seed(campaign_seed: u64, bug: &str, variant: Variant, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(campaign_seed.to_le_bytes());
    h.update((bug.len() as u64).to_le_bytes());
    h.update(bug.as_bytes());
    h.update(variant.name().as_bytes());
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    /// Bug bundle directories.
    pub bugs: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub search: SearchConfig,
}

/// One trial's outcome, as written to the per-trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub bug: String,
    pub variant: Variant,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub evaluations: usize,
    pub evaluations_to_first: Option<usize>,
    pub cpu_seconds: f64,
    pub archive_size: usize,
    pub smallest_size: Option<usize>,
    pub smallest_count: usize,
    /// Archived patches that failed revalidation.
    pub anomalies: usize,
    /// Set when the trial could not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn from_result(bug: &str, variant: Variant, trial: usize, seed: u64, r: &RepairResult) -> Self {
        TrialRecord {
            bug: bug.to_string(),
            variant,
            trial,
            seed,
            success: r.success(),
            evaluations: r.evaluations,
            evaluations_to_first: r.evaluations_to_first,
            cpu_seconds: r.wall_seconds,
            archive_size: r.archive.len(),
            smallest_size: r.smallest_size(),
            smallest_count: r.smallest_patches().len(),
            anomalies: r.anomalies.len(),
            error: None,
        }
    }

    fn failed(bug: &str, variant: Variant, trial: usize, seed: u64, error: String) -> Self {
        TrialRecord {
            bug: bug.to_string(),
            variant,
            trial,
            seed,
            success: false,
            evaluations: 0,
            evaluations_to_first: None,
            cpu_seconds: 0.0,
            archive_size: 0,
            smallest_size: None,
            smallest_count: 0,
            anomalies: 0,
            error: Some(error),
        }
    }
}

/// Name of a bundle: its `bug.json` name, or the directory name.
pub fn bug_name(dir: &Path, bug: &SeededBug) -> String {
    if bug.record.name.is_empty() {
        dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
    } else {
        bug.record.name.clone()
    }
}

/// Runs every (bug, variant, trial) combination. Localization and point
/// construction happen once per (bug, variant); trials run in parallel and
/// come back in (bug, variant, trial) order.
pub fn run_campaign(spec: &CampaignSpec) -> Result<Vec<TrialRecord>> {
    let mut bugs = Vec::new();
    for dir in &spec.bugs {
        let bug = SeededBug::load(dir)?;
        bugs.push((bug_name(dir, &bug), bug));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| RepairError::Config(e.to_string()))?;
    let mut records = Vec::new();
    for (name, bug) in &bugs {
        for &variant in &spec.variants {
            let config = variant.configure(&spec.search);
            let prepared = Prepared::new(bug.program.clone(), bug.suite.clone(), &config);
            let batch: Vec<TrialRecord> = pool.install(|| {
                (0..spec.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let seed = derive_seed(spec.seed, name, variant, trial);
                        match &prepared {
                            Ok(p) => {
                                let c = SearchConfig {
                                    seed,
                                    ..config.clone()
                                };
                                TrialRecord::from_result(name, variant, trial, seed, &variant.run(p, &c))
                            }
                            Err(e) => TrialRecord::failed(name, variant, trial, seed, e.to_string()),
                        }
                    })
                    .collect()
            });
            records.extend(batch);
        }
    }
    Ok(records)
}

/// Summary of all trials of one variant on one bug. Means are over
/// successful trials and absent when nothing succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub bug: String,
    pub variant: Variant,
    pub trials: usize,
    pub success: usize,
    pub mean_evaluations_to_first: Option<f64>,
    pub mean_cpu_seconds: Option<f64>,
    pub mean_smallest_patch_size: Option<f64>,
    pub mean_distinct_smallest_patches: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One row per (bug, variant), in first-appearance order.
pub fn summarize(records: &[TrialRecord]) -> Vec<MetricsRow> {
    let mut order: Vec<(String, Variant)> = Vec::new();
    let mut groups: BTreeMap<(String, Variant), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.bug.clone(), r.variant);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let ok: Vec<&&TrialRecord> = rs.iter().filter(|r| r.success).collect();
            MetricsRow {
                bug: key.0,
                variant: key.1,
                trials: rs.len(),
                success: ok.len(),
                mean_evaluations_to_first: mean(ok.iter().filter_map(|r| r.evaluations_to_first).map(|v| v as f64)),
                mean_cpu_seconds: mean(ok.iter().map(|r| r.cpu_seconds)),
                mean_smallest_patch_size: mean(ok.iter().filter_map(|r| r.smallest_size).map(|v| v as f64)),
                mean_distinct_smallest_patches: mean(ok.iter().map(|r| r.smallest_count as f64)),
            }
        })
        .collect()
}

/// Tab-separated table; absent means print as `-`.
pub fn metrics_table(rows: &[MetricsRow]) -> String {
    let cell = |v: Option<f64>, digits: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"));
    let mut out = String::from("bug\tvariant\ttrials\tsuccess\tevaluations\tcpu_seconds\tpatch_size\tpatches\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.bug,
            r.variant,
            r.trials,
            r.success,
            cell(r.mean_evaluations_to_first, 1),
            cell(r.mean_cpu_seconds, 3),
            cell(r.mean_smallest_patch_size, 2),
            cell(r.mean_distinct_smallest_patches, 2),
        );
    }
    out
}

/// One JSON object per line.
pub fn write_records(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_records(text: &str) -> Result<Vec<TrialRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| RepairError::Config(format!("trial log line {}: {e}", n + 1))))
        .collect()
}
