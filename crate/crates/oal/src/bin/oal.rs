use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use oal_core::corpus::{generate_synthetic, SyntheticConfig};
use oal_core::harness::Arm;

use oal::config::RunConfig;
use oal::error::{CliError, CliResult};
use oal::formats::{write_regions, Format};
use oal::manifest::{fingerprint, RunManifest};
use oal::outputs::{format_welch, write_registry};
use oal::pipeline::run_to_dir;
use oal::report::{build_report, load_run, write_csv, write_text};

/// Relative output paths resolve under this directory when it is set.
const OUTPUT_ROOT_VAR: &str = "OAL_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "oal", version, about = "Opportunistic active learning dialog experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic half-space corpus.
    GenData(GenDataArgs),
    /// Run the three-phase experiment.
    Run(RunArgs),
    /// Compare finished runs.
    Report(ReportArgs),
    /// Run the full policy, the static baseline and feature ablations.
    Ablate(AblateArgs),
    /// Print the feature registry.
    Registry(RegistryArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 600)]
    n_regions: usize,
    #[arg(long = "d", default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 24)]
    n_predicates: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    description_min: usize,
    #[arg(long, default_value_t = 3)]
    description_max: usize,
    /// Output file (.jsonl or .csv).
    #[arg(long)]
    out: PathBuf,
    /// Overwrite existing output.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Learned,
    Static,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set experiment.policy.alpha=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Region file; replaces the synthetic generator.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<u32>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Feature or group names to zero.
    #[arg(long, value_delimiter = ',')]
    ablate: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Write a checkpoint after every batch.
    #[arg(long)]
    checkpoints: bool,
    /// Write every dialog turn to transcripts.jsonl.
    #[arg(long)]
    transcripts: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories; the first is the baseline unless --baseline is given.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Feature or group names, one condition each.
    #[arg(long, value_delimiter = ',', default_values_t = ["guess".to_string(), "query".to_string()])]
    ablate: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RegistryArgs {
    #[arg(long)]
    csv: bool,
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) if path.is_relative() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}

fn build_config(args: &ExperimentArgs) -> CliResult<RunConfig> {
    let base = match &args.config {
        Some(path) => RunConfig::load(path).map_err(CliError::config)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.with_overrides(&args.overrides).map_err(CliError::config)?;
    if let Some(c) = &args.corpus {
        cfg.corpus = Some(c.clone());
    }
    if let Some(s) = args.seed {
        cfg.experiment.seed = s;
    }
    if let Some(b) = args.batch_size {
        cfg.experiment.batch_size = b;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn gen_data(args: GenDataArgs) -> CliResult<()> {
    let out = resolve_out(&args.out);
    if out.exists() && !args.force {
        return Err(CliError::config(anyhow!("{} exists; pass --force to overwrite", out.display())));
    }
    let format = Format::from_path(&out).map_err(CliError::config)?;
    let cfg = SyntheticConfig {
        n_regions: args.n_regions,
        dim: args.dim,
        n_predicates: args.n_predicates,
        description_len: (args.description_min, args.description_max),
        seed: args.seed,
        ..SyntheticConfig::default()
    };
    let records = generate_synthetic(&cfg).map_err(CliError::from_core)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::runtime)?;
    }
    write_regions(&out, &records, format).map_err(CliError::runtime)?;
    let bytes = std::fs::read(&out).map_err(CliError::runtime)?;
    let config = serde_json::to_value(&cfg).map_err(CliError::runtime)?;
    let mut manifest = RunManifest::new("gen-data", config, fingerprint(&bytes), "synthetic".into(), cfg.seed);
    manifest.outputs = vec![out.display().to_string()];
    let mut manifest_path = out.clone().into_os_string();
    manifest_path.push(".manifest.json");
    manifest.write(Path::new(&manifest_path)).map_err(CliError::runtime)?;
    println!("wrote {} regions to {}", records.len(), out.display());
    Ok(())
}

fn run(args: RunArgs) -> CliResult<()> {
    let mut cfg = build_config(&args.experiment)?;
    if let Some(p) = args.policy {
        cfg.experiment.arm = match p {
            PolicyArg::Learned => Arm::Learned,
            PolicyArg::Static => Arm::Static,
        };
    }
    cfg.experiment.ablate.extend(args.ablate.iter().cloned());
    cfg.checkpoints |= args.checkpoints;
    cfg.transcripts |= args.transcripts;
    cfg.validate().map_err(CliError::config)?;
    if args.print_config {
        print!("{}", cfg.to_toml().map_err(CliError::runtime)?);
        return Ok(());
    }
    let out = resolve_out(&args.out);
    let summary = run_to_dir(&cfg, &out, args.resume.as_deref(), "run")?;
    let t = &summary.final_test;
    println!(
        "{}: final test batch success {:.3}, mean length {:.2}; no-query floor {:.3} ({})",
        out.display(),
        t.success_rate,
        t.mean_length,
        summary.no_query_floor.success_rate,
        format_welch(summary.success_vs_floor.as_ref()),
    );
    Ok(())
}

fn report(args: ReportArgs) -> CliResult<()> {
    let mut dirs = args.runs.clone();
    let baseline = match &args.baseline {
        Some(b) => match dirs.iter().position(|d| d == b) {
            Some(i) => i,
            None => {
                dirs.insert(0, b.clone());
                0
            }
        },
        None => 0,
    };
    let runs = dirs.iter().map(|d| load_run(d)).collect::<anyhow::Result<Vec<_>>>().map_err(CliError::data)?;
    let rows = build_report(&runs, baseline).map_err(CliError::data)?;
    write_text(std::io::stdout().lock(), &rows, &rows[baseline].condition).map_err(CliError::runtime)?;
    if let Some(path) = args.csv {
        let file = std::fs::File::create(resolve_out(&path)).map_err(CliError::runtime)?;
        write_csv(file, &rows).map_err(CliError::runtime)?;
    }
    Ok(())
}

fn ablate(args: AblateArgs) -> CliResult<()> {
    let base = build_config(&args.experiment)?;
    for name in &args.ablate {
        oal_core::policy::FeatureMask::from_names(&[name]).map_err(CliError::from_core)?;
    }
    base.validate().map_err(CliError::config)?;
    let out = resolve_out(&args.out);
    let mut conditions = vec![("full".to_string(), Arm::Learned, Vec::new()), ("static".into(), Arm::Static, Vec::new())];
    for name in &args.ablate {
        conditions.push((format!("minus-{name}"), Arm::Learned, vec![name.clone()]));
    }
    let mut dirs = Vec::new();
    for (dir, arm, extra) in conditions {
        let mut cfg = base.clone();
        cfg.experiment.arm = arm;
        cfg.experiment.ablate.extend(extra);
        let path = out.join(&dir);
        run_to_dir(&cfg, &path, None, "ablate")?;
        dirs.push(path);
    }
    let runs = dirs.iter().map(|d| load_run(d)).collect::<anyhow::Result<Vec<_>>>().map_err(CliError::data)?;
    for (baseline, name) in [(1, "static"), (0, "full")] {
        let rows = build_report(&runs, baseline).map_err(CliError::data)?;
        write_text(std::io::stdout().lock(), &rows, name).map_err(CliError::runtime)?;
        let file = std::fs::File::create(out.join(format!("report-vs-{name}.csv"))).map_err(CliError::runtime)?;
        write_csv(file, &rows).map_err(CliError::runtime)?;
        println!();
    }
    Ok(())
}

fn registry(args: RegistryArgs) -> CliResult<()> {
    if args.csv {
        return write_registry(std::io::stdout().lock()).map_err(CliError::runtime);
    }
    println!("{:>5}  {:<28} {:<14} normalization", "index", "name", "actions");
    for s in oal_core::policy::REGISTRY.iter() {
        println!("{:>5}  {:<28} {:<14} {}", s.index, s.name, s.applies.as_str(), s.normalization);
    }
    for (name, range) in oal_core::policy::GROUPS.iter() {
        println!("group {name}: indices {}..{}", range.start, range.end - 1);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
        Command::Ablate(a) => ablate(a),
        Command::Registry(a) => registry(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            eprintln!("{}", e.to_json());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
