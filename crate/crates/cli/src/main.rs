use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pardiff::detect::detect_and_capture;
use pardiff::pipeline::{three_stage_decision, Pipeline, PipelineConfig, Stage};
use pardiff::sim::record::StoredWaveform;
use pardiff::Error;

#[derive(Parser)]
#[command(name = "pardiff", version, about = "Transient simulation, event detection and classification pipeline")]
struct Cli {
    /// Pipeline config (TOML); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root of the stage directories [default: config `stage_dir`, else ./stages].
    #[arg(long, global = true)]
    stage_dir: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured event grids into waveform records.
    Simulate,
    /// Run the event detector and capture one post-event cycle per record.
    Detect,
    /// Compute feature tables for each application.
    Extract,
    /// Select energy features for each application.
    Select,
    /// Grid-search, cross-validate and fit the final models.
    Train,
    /// Build classifier reports and timing measurements.
    Evaluate,
    /// Write text and TSV reports.
    Report,
    /// Run every stage from `from` on.
    Run {
        #[arg(long, default_value = "simulate")]
        from: String,
    },
    /// Cascaded decision on waveform records, or on every captured window
    /// when no file is given.
    Decide { files: Vec<PathBuf> },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::MissingArtifact { .. } | Error::EmptyStage { .. } => 3,
        _ => 4,
    }
}

fn stage_of(name: &str) -> Result<Stage, Error> {
    Stage::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::Config(format!("unknown stage '{name}'")))
}

fn decide(p: &Pipeline, files: &[PathBuf]) -> Result<(), Error> {
    let models = p.decision_models()?;
    if !files.is_empty() {
        for f in files {
            let w = StoredWaveform::read(f)?;
            match detect_and_capture(&w.id, &p.cfg.detection)? {
                None => println!("{}\tno event detected", f.display()),
                Some(win) => {
                    let d = three_stage_decision(&win, &models)?;
                    println!("{}\t{}\t{:.3} ms", f.display(), d.verdict.describe(), 1e3 * d.latency);
                }
            }
        }
        return Ok(());
    }
    let captures = p.captures()?;
    let mut tsv = String::from("record\tlabel\tunit\tdecision\tagrees\n");
    let (mut agree, mut latency) = (0usize, 0.0);
    for c in &captures {
        let d = three_stage_decision(&c.window, &models)?;
        let ok = d.verdict.matches(c.label, c.unit_label);
        agree += usize::from(ok);
        latency += d.latency;
        let unit = c.unit_label.map_or("-".to_string(), |u| format!("{u:?}").to_lowercase());
        let _ = writeln!(tsv, "{}\t{}\t{unit}\t{}\t{ok}", c.id, c.label.name(), d.verdict.describe());
    }
    let train = p.require(Stage::Train)?;
    let name = train.file_name().expect("stage dir").to_string_lossy().replacen("train-", "decide-", 1);
    let dir = p.root.join(name);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("decisions.tsv"), tsv)?;
    let n = captures.len().max(1);
    println!(
        "{} windows, {agree} decisions agree with the simulated event (windows were part of the training data)",
        captures.len()
    );
    println!("mean decision latency {:.3} ms; decisions in {}", 1e3 * latency / n as f64, dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pardiff::par::set_jobs(j);
    }
    let root = cli
        .stage_dir
        .clone()
        .or_else(|| cfg.stage_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("stages"));
    let p = Pipeline::new(cfg, root)?;
    let stage = match &cli.command {
        Command::Simulate => Stage::Simulate,
        Command::Detect => Stage::Detect,
        Command::Extract => Stage::Extract,
        Command::Select => Stage::Select,
        Command::Train => Stage::Train,
        Command::Evaluate => Stage::Evaluate,
        Command::Report => Stage::Report,
        Command::Run { from } => {
            p.run_from(stage_of(from)?)?;
            let dir = p.require(Stage::Report)?;
            print!("{}", std::fs::read_to_string(dir.join("summary.txt"))?);
            return Ok(());
        }
        Command::Decide { files } => return decide(&p, files),
    };
    let dir = p.run(stage)?;
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
