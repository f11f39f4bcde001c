use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use baserate::ingest::{write_facts, RawFacts};
use baserate::metrics::GrowthlessYearPolicy;
use baserate::pipeline::{analyze, write_outputs, AnalyzeConfig};
use baserate::sloc::{count_tree, snapshot_to_size_facts, write_tree_csv, Registry};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_EMPTY: u8 = 3;

/// Size and growth base rates for open-source projects.
///
/// Exit status: 0 success, 1 usage error, 2 I/O error, 3 no project
/// survived validation (the report is still written).
#[derive(Debug, Parser)]
#[command(name = "baserate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count code, comment and blank lines under a directory.
    Count {
        #[arg(long)]
        root: PathBuf,
        /// JSON language registry; the built-in registry is used when absent.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn dated source snapshots of one project into size facts.
    Snapshot {
        #[arg(long)]
        project: String,
        /// `YYYY-MM=DIR`, repeated in chronological order.
        #[arg(long = "snapshot", value_parser = parse_snapshot, required = true)]
        snapshots: Vec<(i32, u8, PathBuf)>,
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Facts CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate facts, derive yearly metrics and write the report.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// JSON config using the flag names as keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Project metadata (JSON lines); may be repeated.
    #[arg(long)]
    metadata: Vec<PathBuf>,
    /// Monthly facts CSV; may be repeated.
    #[arg(long)]
    facts: Vec<PathBuf>,
    /// Last year kept in the data set.
    #[arg(long)]
    cutoff_year: Option<i32>,
    #[arg(long)]
    growthless_year_policy: Option<GrowthlessYearPolicy>,
    /// Year summarized for code size; defaults to the cut-off year.
    #[arg(long)]
    cs_year: Option<i32>,
    /// Also render SVG boxplots.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

fn parse_snapshot(s: &str) -> Result<(i32, u8, PathBuf), String> {
    let (date, dir) = s.split_once('=').ok_or("expected YYYY-MM=DIR")?;
    let (y, m) = date.split_once('-').ok_or("expected YYYY-MM before `=`")?;
    let year = y.parse().map_err(|_| format!("bad year `{y}`"))?;
    let month = m.parse().map_err(|_| format!("bad month `{m}`"))?;
    Ok((year, month, PathBuf::from(dir)))
}

fn registry(path: Option<&Path>) -> Result<Registry, Failure> {
    match path {
        Some(p) => Registry::from_json_file(p).map_err(|e| Failure::Io(e.to_string())),
        None => Ok(Registry::builtin()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(f) as Box<dyn Write>)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn count(root: &Path, registry_path: Option<&Path>, out: Option<&Path>) -> Result<u8, Failure> {
    let reg = registry(registry_path)?;
    let tree = count_tree(root, &reg).map_err(|e| Failure::Io(e.to_string()))?;
    for d in &tree.diagnostics {
        eprintln!("warning: {d}");
    }
    if tree.files.is_empty() {
        eprintln!(
            "warning: no file under {} has a registered extension ({} skipped)",
            root.display(),
            tree.skipped
        );
    }
    write_tree_csv(output(out)?, &tree).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(0)
}

fn snapshot(project: &str, snapshots: &[(i32, u8, PathBuf)], registry_path: Option<&Path>, out: Option<&Path>) -> Result<u8, Failure> {
    let reg = registry(registry_path)?;
    let size = snapshot_to_size_facts(project, snapshots, &reg).map_err(|e| match e {
        baserate::sloc::SlocError::SnapshotOrder { .. } | baserate::sloc::SlocError::SnapshotMonth(_) => {
            Failure::Usage(e.to_string())
        }
        _ => Failure::Io(e.to_string()),
    })?;
    let facts = RawFacts {
        size,
        activity: Vec::new(),
    };
    write_facts(output(out)?, &facts).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(0)
}

/// Config file values, with relative paths taken from the file's directory,
/// overridden by whatever flags were given.
fn merged_config(args: &AnalyzeArgs) -> Result<AnalyzeConfig, Failure> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            let mut map: Map<String, Value> = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(""));
            for key in ["metadata", "facts"] {
                if let Some(Value::Array(items)) = map.get_mut(key) {
                    for item in items {
                        if let Value::String(s) = item {
                            *s = base.join(&*s).to_string_lossy().into_owned();
                        }
                    }
                }
            }
            map
        }
        None => Map::new(),
    };
    let paths = |ps: &[PathBuf]| Value::from(ps.iter().map(|p| p.to_string_lossy().into_owned()).collect::<Vec<_>>());
    if !args.metadata.is_empty() {
        map.insert("metadata".into(), paths(&args.metadata));
    }
    if !args.facts.is_empty() {
        map.insert("facts".into(), paths(&args.facts));
    }
    if let Some(y) = args.cutoff_year {
        map.insert("cutoff-year".into(), y.into());
    }
    if let Some(p) = args.growthless_year_policy {
        map.insert("growthless-year-policy".into(), serde_json::to_value(p).expect("policy serializes"));
    }
    if let Some(y) = args.cs_year {
        map.insert("cs-year".into(), y.into());
    }
    if args.svg {
        map.insert("svg".into(), true.into());
    }
    let config: AnalyzeConfig = serde_json::from_value(Value::Object(map))
        .map_err(|e| Failure::Usage(format!("incomplete configuration: {e}")))?;
    if config.metadata.is_empty() || config.facts.is_empty() {
        return Err(Failure::Usage("at least one --metadata and one --facts file is required".into()));
    }
    Ok(config)
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8, Failure> {
    let config = merged_config(args)?;
    let analysis = analyze(&config).map_err(|e| Failure::Io(e.to_string()))?;
    let report = &analysis.report;
    for m in &report.ingest.malformed {
        eprintln!("malformed: {}:{}: {}", m.file, m.line, m.reason);
    }
    for d in &report.validation.diagnostics {
        eprintln!("validation: {d}");
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    write_outputs(&args.out, &analysis, config.svg).map_err(|e| Failure::Io(e.to_string()))?;
    if analysis.is_complete() {
        Ok(0)
    } else {
        eprintln!("error: no project survived validation; report written to {}", args.out.display());
        Ok(EXIT_EMPTY)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Count { root, registry, out } => count(root, registry.as_deref(), out.as_deref()),
        Command::Snapshot {
            project,
            snapshots,
            registry,
            out,
        } => snapshot(project, snapshots, registry.as_deref(), out.as_deref()),
        Command::Analyze(args) => run_analyze(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
