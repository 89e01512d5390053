//! Command-line front end. `main.rs` only forwards to [`run`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::campaign::{metrics_table, read_records, run_campaign, summarize, write_records, CampaignSpec, Variant};
use crate::error::{RepairError, Result};
use crate::genome::{apply_edits, edit_script, unified_diff};
use crate::ingredients::{points_report, IngredientMode, Screening};
use crate::localization::ranking_report;
use crate::minilang::{parse_program, parse_suite};
use crate::pipeline::Prepared;
use crate::search::{GenerationStats, SearchConfig};
use crate::seeder::{seed_bug, BugClass, MutationOp, SeedSpec, SeededBug};

/// Exit status when a repair was found.
pub const EXIT_REPAIRED: u8 = 0;
/// Exit status when the search finished without a repair.
pub const EXIT_NOT_REPAIRED: u8 = 1;
/// Exit status for configuration, input and I/O errors.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "minirepair", version, about = "Search-based repair of MiniLang programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repair one buggy program.
    Repair(RepairArgs),
    /// Seed bugs into a correct program and write bug bundles.
    Seed(SeedArgs),
    /// Run trials of several variants over bug bundles.
    Campaign(CampaignArgs),
    /// Rebuild the metrics table from a per-trial log.
    Report(ReportArgs),
}

/// Settings that override the configuration file.
#[derive(Debug, Args, Default)]
pub struct SearchFlags {
    /// TOML file with search settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// file, package or application
    #[arg(long)]
    pub mode: Option<String>,
    /// direct, vars, funcs or both
    #[arg(long)]
    pub screening: Option<String>,
    #[arg(long)]
    pub max_edits: Option<usize>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub step_limit: Option<u64>,
}

impl SearchFlags {
    pub fn resolve(&self) -> Result<SearchConfig> {
        let mut c = match &self.config {
            Some(path) => load_config(path)?,
            None => SearchConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.population {
            c.population = v;
        }
        if let Some(v) = self.generations {
            c.generations = v;
        }
        if let Some(v) = &self.mode {
            c.mode = IngredientMode::parse(v).ok_or_else(|| RepairError::Config(format!("unknown mode `{v}`")))?;
        }
        if let Some(v) = &self.screening {
            c.screening = Screening::parse(v).ok_or_else(|| RepairError::Config(format!("unknown screening `{v}`")))?;
        }
        if self.max_edits.is_some() {
            c.max_edits = self.max_edits;
        }
        if self.sample_size.is_some() {
            c.sample_size = self.sample_size;
        }
        if let Some(v) = self.step_limit {
            c.step_limit = v;
        }
        if c.population < 2 || c.generations == 0 {
            return Err(RepairError::Config("population must be at least 2 and generations at least 1".into()));
        }
        Ok(c)
    }
}

pub fn load_config(path: &Path) -> Result<SearchConfig> {
    let text = read(path)?;
    toml::from_str(&text).map_err(|e| RepairError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// A bug bundle directory, or a program file (then `--tests` is required).
    pub input: PathBuf,
    #[arg(long)]
    pub tests: Option<PathBuf>,
    #[arg(long, default_value = "arja")]
    pub variant: String,
    /// Directory for the report, patches and logs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchFlags,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    pub program: PathBuf,
    pub tests: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// F (all mutated statements redundant) or H.
    #[arg(long, default_value = "F")]
    pub class: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of bugs; bug `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Only mutate statements of this module (repeatable).
    #[arg(long = "module")]
    pub modules: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub max_attempts: usize,
    /// H-class: the non-redundant original must need variable renaming.
    #[arg(long)]
    pub require_rename: bool,
    /// Prefix of the bundle names.
    #[arg(long, default_value = "bug")]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Campaign TOML; bug paths are relative to its directory.
    pub spec: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory for `trials.jsonl` and `metrics.tsv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A `trials.jsonl` file written by `campaign`.
    pub log: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| RepairError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| RepairError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| RepairError::io(path, e))
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Repair(a) => cmd_repair(&a),
        Command::Seed(a) => cmd_seed(&a).map(|_| EXIT_REPAIRED),
        Command::Campaign(a) => cmd_campaign(&a).map(|_| EXIT_REPAIRED),
        Command::Report(a) => cmd_report(&a).map(|_| EXIT_REPAIRED),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[derive(Serialize)]
struct PatchReport {
    size: usize,
    found_at: usize,
    edits: String,
}

#[derive(Serialize)]
struct RepairReport<'a> {
    variant: Variant,
    config: &'a SearchConfig,
    modification_points: usize,
    negative_tests: usize,
    positive_tests: usize,
    dropped_tests: usize,
    success: bool,
    evaluations: usize,
    evaluations_to_first: Option<usize>,
    smallest_size: Option<usize>,
    patches: Vec<PatchReport>,
    anomalies: Vec<String>,
}

/// Runs one repair; returns [`EXIT_REPAIRED`] or [`EXIT_NOT_REPAIRED`].
pub fn cmd_repair(args: &RepairArgs) -> Result<u8> {
    let variant =
        Variant::parse(&args.variant).ok_or_else(|| RepairError::Config(format!("unknown variant `{}`", args.variant)))?;
    let (program, suite) = if args.input.is_dir() {
        let bug = SeededBug::load(&args.input)?;
        (bug.program, bug.suite)
    } else {
        let tests = args
            .tests
            .as_ref()
            .ok_or_else(|| RepairError::Config("--tests is required with a program file".into()))?;
        (parse_program(&read(&args.input)?)?, parse_suite(&read(tests)?)?)
    };
    let config = variant.configure(&args.search.resolve()?);
    let prepared = Prepared::new(program, suite, &config)?;
    let result = variant.run(&prepared, &config);

    let report = RepairReport {
        variant,
        config: &config,
        modification_points: prepared.points.len(),
        negative_tests: prepared.partition.negative.len(),
        positive_tests: prepared.partition.positive.len(),
        dropped_tests: prepared.partition.dropped.len(),
        success: result.success(),
        evaluations: result.evaluations,
        evaluations_to_first: result.evaluations_to_first,
        smallest_size: result.smallest_size(),
        patches: result
            .archive
            .iter()
            .map(|p| PatchReport {
                size: p.size(),
                found_at: p.found_at,
                edits: edit_script(&prepared.program, &p.edits),
            })
            .collect(),
        anomalies: result.anomalies.iter().map(|e| edit_script(&prepared.program, e)).collect(),
    };

    println!(
        "{}: {} after {} evaluations ({:.2}s), {} patches, {} points",
        variant,
        if result.success() { "repaired" } else { "not repaired" },
        result.evaluations,
        result.wall_seconds,
        result.archive.len(),
        prepared.points.len()
    );
    for p in result.smallest_patches() {
        print!("{}", edit_script(&prepared.program, &p.edits));
    }

    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| RepairError::Config(e.to_string()))?;
        write(&out.join("report.json"), &(json + "\n"))?;
        write(&out.join("generations.jsonl"), &generation_log(&result.generations))?;
        write(
            &out.join("ranking.tsv"),
            &ranking_report(&prepared.program, &prepared.matrix, &prepared.ranking),
        )?;
        write(&out.join("points.tsv"), &points_report(&prepared.program, &prepared.points))?;
        for (i, p) in result.archive.iter().enumerate() {
            let patched = apply_edits(&prepared.program, &p.edits);
            write(&out.join(format!("patches/{:03}.diff", i + 1)), &unified_diff(&prepared.program, &patched))?;
            write(&out.join(format!("patches/{:03}.edits", i + 1)), &edit_script(&prepared.program, &p.edits))?;
        }
    }
    Ok(if result.success() {
        EXIT_REPAIRED
    } else {
        EXIT_NOT_REPAIRED
    })
}

fn generation_log(stats: &[GenerationStats]) -> String {
    stats
        .iter()
        .map(|g| serde_json::to_string(g).expect("stats serialize") + "\n")
        .collect()
}

pub fn cmd_seed(args: &SeedArgs) -> Result<Vec<SeededBug>> {
    let program = parse_program(&read(&args.program)?)?;
    let suite = parse_suite(&read(&args.tests)?)?;
    let class = match args.class.as_str() {
        "F" | "f" => BugClass::F,
        "H" | "h" => BugClass::H,
        other => return Err(RepairError::Config(format!("unknown bug class `{other}`"))),
    };
    let mut bugs = Vec::new();
    for i in 0..args.count {
        let spec = SeedSpec {
            k: args.k,
            class,
            seed: args.seed + i as u64,
            operators: MutationOp::ALL.to_vec(),
            modules: args.modules.clone(),
            max_attempts: args.max_attempts,
            require_rename: args.require_rename,
            ..SeedSpec::default()
        };
        let (bug, stats) = seed_bug(&program, &suite, &spec);
        let mut bug = bug?;
        bug.record.name = format!("{}-{}", args.name, i + 1);
        let dir = args.out.join(&bug.record.name);
        bug.save(&dir)?;
        let rejected: Vec<String> = stats.rejections.iter().map(|(r, n)| format!("{r:?}={n}")).collect();
        println!(
            "{}: {} failing tests, attempt {} [{}]",
            dir.display(),
            bug.record.failing_tests.len(),
            stats.attempts,
            rejected.join(" ")
        );
        for m in &bug.record.mutations {
            println!("  {} {}  ->  {}", m.target, m.original, m.mutated);
        }
        bugs.push(bug);
    }
    Ok(bugs)
}

/// Loads a campaign file, resolving bug paths against its directory.
pub fn load_campaign(path: &Path) -> Result<CampaignSpec> {
    let mut spec: CampaignSpec =
        toml::from_str(&read(path)?).map_err(|e| RepairError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for b in &mut spec.bugs {
        if b.is_relative() {
            *b = base.join(&*b);
        }
    }
    Ok(spec)
}

pub fn cmd_campaign(args: &CampaignArgs) -> Result<String> {
    let mut spec = load_campaign(&args.spec)?;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    let records = run_campaign(&spec)?;
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} {} trial {}: {}", r.bug, r.variant, r.trial, r.error.as_deref().unwrap_or_default());
    }
    let table = metrics_table(&summarize(&records));
    if let Some(out) = &args.out {
        write(&out.join("trials.jsonl"), &write_records(&records))?;
        write(&out.join("metrics.tsv"), &table)?;
    }
    print!("{table}");
    Ok(table)
}

pub fn cmd_report(args: &ReportArgs) -> Result<String> {
    let records = read_records(&read(&args.log)?)?;
    let table = metrics_table(&summarize(&records));
    print!("{table}");
    Ok(table)
}
