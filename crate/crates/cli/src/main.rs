use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use canopy_core::harness::{rows_to_csv, write_run_artifacts};
use canopy_core::{
    compare_algorithms, run_scenario, run_sweep, Algorithm, Error, RunRow, ScenarioConfig,
    SweepFile, SweepSpec, SweepValues,
};
use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_NOT_COVERED: u8 = 3;

/// Multi-UAV hotspot coverage experiments.
#[derive(Parser, Debug)]
#[command(name = "canopy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and print its metrics row.
    Run(RunArgs),
    /// Sweep one parameter over a set of seeds.
    Sweep(SweepArgs),
    /// Run several algorithms on identical scenarios and seeds.
    Compare(CompareArgs),
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Source {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_parser = ["uniform20", "twocluster20"])]
    preset: Option<String>,
    #[arg(long)]
    max_steps: Option<u64>,
}

impl Source {
    fn load(&self, default_preset: &str) -> Result<ScenarioConfig, Error> {
        let mut config = match (&self.scenario, &self.preset) {
            (Some(path), _) => ScenarioConfig::load(path)?,
            (None, Some(name)) => ScenarioConfig::preset(name, 0)?,
            (None, None) => ScenarioConfig::preset(default_preset, 0)?,
        };
        if let Some(n) = self.max_steps {
            config.max_steps = n;
        }
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long, allow_negative_numbers = true)]
    levy_weight: Option<f64>,
    /// Overrides the scenario seed; generated layouts are redrawn.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for metrics, coverage, heatmap and trajectory files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log every UAV position (written to trajectories.csv with --out).
    #[arg(long)]
    trajectories: bool,
    /// Exit with status 3 unless every hotspot gets covered.
    #[arg(long)]
    require_coverage: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Parameter {
    LevyWeight,
    Algorithm,
    NUavs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep description file; replaces the inline flags.
    #[arg(long, conflicts_with_all = ["values", "seeds", "scenario", "preset"])]
    spec: Option<PathBuf>,
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "levy-weight")]
    parameter: Parameter,
    /// Comma-separated values of the swept parameter.
    #[arg(long, required_unless_present = "spec")]
    values: Option<String>,
    /// Seeds as a list and/or ranges, e.g. `1-20` or `1,2,7-9`.
    #[arg(long, required_unless_present = "spec")]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run sequentially instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated algorithms, at least two.
    #[arg(long, default_value = "hybrid,abc,pso")]
    algorithms: String,
    #[arg(long, default_value = "1-20")]
    seeds: String,
    /// Directory for comparison.csv and runs.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Error> {
    let bad = |part: &str| Error::Validation(format!("bad seed list entry `{part}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(seeds)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::Validation(format!("bad {what} `{p}`")))
        })
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run(args: RunArgs) -> Result<u8, Error> {
    let mut config = args.source.load("uniform20")?;
    if let Some(seed) = args.seed {
        config = config.reseeded(seed)?;
    }
    if let Some(alg) = args.algorithm {
        config.algorithm = alg;
    }
    if let Some(w) = args.levy_weight {
        config.params.levy_weight = w;
    }
    config.record_trajectories |= args.trajectories;
    let metrics = run_scenario(&config)?;
    if let Some(dir) = &args.out {
        write_run_artifacts(dir, &config, &metrics)?;
    }
    print!("{}", rows_to_csv(&[RunRow::new(&config, &metrics)])?);
    if args.require_coverage && !metrics.covered() {
        eprintln!(
            "coverage incomplete: {}/{} hotspots after {} steps",
            metrics.hotspot_covered.iter().filter(|c| **c).count(),
            metrics.n_hotspots,
            config.max_steps
        );
        return Ok(EXIT_NOT_COVERED);
    }
    Ok(0)
}

fn sweep(args: SweepArgs) -> Result<u8, Error> {
    let mut spec = match &args.spec {
        Some(path) => SweepFile::load(path)?.into_spec()?,
        None => {
            let text = args.values.as_deref().unwrap_or_default();
            let values = match args.parameter {
                Parameter::LevyWeight => SweepValues::LevyWeight(parse_list(text, "levy weight")?),
                Parameter::Algorithm => SweepValues::Algorithm(parse_list(text, "algorithm")?),
                Parameter::NUavs => SweepValues::NUavs(parse_list(text, "swarm size")?),
            };
            SweepSpec {
                base: args.source.load("uniform20")?,
                values,
                seeds: parse_seeds(args.seeds.as_deref().unwrap_or_default())?,
                output_dir: None,
                parallel: true,
            }
        }
    };
    if let Some(n) = args.source.max_steps {
        spec.base.max_steps = n;
    }
    if args.out.is_some() {
        spec.output_dir = args.out.clone();
    }
    if args.sequential {
        spec.parallel = false;
    }
    let summary = run_sweep(&spec)?;
    print!("{}", rows_to_csv(&summary.aggregates)?);
    Ok(0)
}

fn compare(args: CompareArgs) -> Result<u8, Error> {
    let base = args.source.load("twocluster20")?;
    let algorithms: Vec<Algorithm> = parse_list(&args.algorithms, "algorithm")?;
    let seeds = parse_seeds(&args.seeds)?;
    let cmp = compare_algorithms(&base, &algorithms, &seeds, !args.sequential)?;
    let table = rows_to_csv(&cmp.rows)?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write(&dir.join("comparison.csv"), &table)?;
        let rows: Vec<RunRow> = cmp
            .runs
            .iter()
            .map(|r| RunRow::new(&r.config, &r.metrics))
            .collect();
        write(&dir.join("runs.csv"), &rows_to_csv(&rows)?)?;
    }
    print!("{table}");
    Ok(0)
}

fn validate(path: &Path) -> Result<u8, Error> {
    let config = ScenarioConfig::load(path)?;
    println!(
        "ok: {} ({}x{} grid, {} hotspots, {} UAVs, {})",
        config.name,
        config.grid.width,
        config.grid.height,
        config.hotspots.len(),
        config.n_uavs,
        config.algorithm
    );
    Ok(0)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Csv(_) => EXIT_IO,
        Error::Validation(_) | Error::Json(_) => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Compare(args) => compare(args),
        Command::Validate { scenario } => validate(&scenario),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
