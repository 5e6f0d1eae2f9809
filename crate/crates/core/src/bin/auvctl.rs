use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use deepc_auv::deepc::{DataMatrixKind, Dataset, DeePCConfig};
use deepc_auv::error::Error;
use deepc_auv::excitation::{check_persistency, collect_inner, collect_outer, InnerChannel};
use deepc_auv::experiments::scenario::CollectionSection;
use deepc_auv::experiments::{compare, controller_from_data, format_comparison, run_scenario, write_outputs, MetricsReport, Scenario};
use deepc_auv::vehicle::Vehicle;

#[derive(Parser)]
#[command(name = "auvctl", about = "DeePC and PID autopilot experiments on a REMUS 100 model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record the heading, pitch and depth datasets.
    Collect {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a scenario and write the trajectory CSV and metrics JSON.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare two metrics reports channel by channel.
    Compare { a: PathBuf, b: PathBuf },
    /// Persistency report of a dataset.
    CheckData {
        dataset: PathBuf,
        /// Horizons and column count; taken from the sidecar when omitted.
        #[arg(long)]
        t_ini: Option<usize>,
        #[arg(long)]
        t_fut: Option<usize>,
        #[arg(long)]
        columns: Option<usize>,
    },
}

/// Input of `collect`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollectConfig {
    schema_version: u32,
    /// Output directory, relative to the config file.
    out_dir: PathBuf,
    #[serde(default)]
    excitation: CollectionSection,
    #[serde(default = "DeePCConfig::heading")]
    heading: DeePCConfig,
    #[serde(default = "DeePCConfig::pitch")]
    pitch: DeePCConfig,
    #[serde(default = "DeePCConfig::depth")]
    depth: DeePCConfig,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } => 4,
        Error::Infeasible | Error::InsufficientData { .. } | Error::Dimension(_) => 3,
        Error::Collection(msg) if msg.contains("diverged") => 4,
        _ => 2,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: field `{}`: {}", path.display(), e.path(), e.inner())))
}

fn collect(config: &Path) -> Result<(), Error> {
    let cfg: CollectConfig = read_json(config)?;
    if cfg.schema_version != 1 {
        return Err(Error::Config(format!("unsupported schema_version {}", cfg.schema_version)));
    }
    let dir = config.parent().unwrap_or(Path::new(".")).join(&cfg.out_dir);
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    let v = Vehicle::remus100();
    let x = &cfg.excitation;
    let heading = collect_inner(&v, InnerChannel::Heading, &x.heading, &x.setup, &cfg.heading)?;
    heading.save(dir.join("heading.csv"))?;
    let pitch = collect_inner(&v, InnerChannel::Pitch, &x.pitch, &x.setup, &cfg.pitch)?;
    pitch.save(dir.join("pitch.csv"))?;
    let inner = controller_from_data(&pitch, &cfg.pitch, "delta_s", "theta", false)?;
    let depth = collect_outer(&v, inner, &x.depth, &x.setup, &cfg.depth)?;
    depth.save(dir.join("depth.csv"))?;
    for (name, d, c) in [("heading", &heading, &cfg.heading), ("pitch", &pitch, &cfg.pitch), ("depth", &depth, &cfg.depth)] {
        let p = check_persistency(d, c)?;
        println!(
            "{name}: {} samples, input rank {}/{}, stacked rank {}/{}",
            d.len(),
            p.input.rank,
            p.input.rows,
            p.stacked.rank,
            p.stacked.rows
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn run(scenario: &Path, seed: Option<u64>, out: &Path) -> Result<(), Error> {
    let mut s = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let started = std::time::Instant::now();
    let result = run_scenario(&s)?;
    let files = write_outputs(&result, out)?;
    let m = &result.metrics;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: psi {} deg, z {} m, theta {} deg ({:.1} s)",
        m.scenario,
        fmt(m.psi_rmse),
        fmt(m.z_rmse),
        fmt(m.theta_rmse),
        started.elapsed().as_secs_f64()
    );
    println!("wrote {} and {}", files.csv.display(), files.metrics.display());
    match result.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn check_data(path: &Path, t_ini: Option<usize>, t_fut: Option<usize>, columns: Option<usize>) -> Result<(), Error> {
    let data = Dataset::load(path)?;
    let from_meta: Option<DeePCConfig> = data
        .meta
        .source
        .get("deepc")
        .and_then(|v| serde_json::from_value(v.clone()).ok());
    let mut cfg = match (from_meta, t_ini, t_fut) {
        (Some(c), _, _) => c,
        (None, Some(_), Some(_)) => DeePCConfig {
            kind: DataMatrixKind::Page,
            ..DeePCConfig::heading()
        },
        _ => {
            return Err(Error::Config(
                "the sidecar has no DeePC settings; pass --t-ini and --t-fut".into(),
            ))
        }
    };
    if let Some(v) = t_ini {
        cfg.T_ini = v;
    }
    if let Some(v) = t_fut {
        cfg.T_fut = v;
    }
    if let Some(v) = columns {
        cfg.T_d = v;
    }
    let p = check_persistency(&data, &cfg)?;
    println!(
        "{}: {} samples, T_ini {}, T_fut {}, {} columns ({:?})",
        path.display(),
        data.len(),
        cfg.T_ini,
        cfg.T_fut,
        p.input.cols,
        cfg.kind
    );
    println!(
        "input  [U_p; U_f]: rank {}/{}, sigma_min {:.3e}, sigma_max {:.3e}",
        p.input.rank, p.input.rows, p.input.sigma_min, p.input.sigma_max
    );
    println!(
        "stacked [U; Y]:    rank {}/{}, sigma_min {:.3e}",
        p.stacked.rank, p.stacked.rows, p.stacked.sigma_min
    );
    if p.passed() {
        println!("persistently exciting");
        Ok(())
    } else {
        Err(Error::Config("input data are not persistently exciting".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Collect { config } => collect(config),
        Command::Run { scenario, seed, out } => run(scenario, *seed, out),
        Command::Compare { a, b } => MetricsReport::load(a).and_then(|ra| {
            let rb = MetricsReport::load(b)?;
            print!("{}", format_comparison(&ra.scenario, &rb.scenario, &compare(&ra, &rb)));
            Ok(())
        }),
        Command::CheckData {
            dataset,
            t_ini,
            t_fut,
            columns,
        } => check_data(dataset, *t_ini, *t_fut, *columns),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
