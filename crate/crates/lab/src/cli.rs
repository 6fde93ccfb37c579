use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hoelder_core::counterexample::{
    build_schedule, parse_schedule, validate_schedule, write_schedule, Exactness, Mode,
};
use hoelder_core::holder::{
    holder_modulus, increment_seq_bound, schauder_coefficients, sequential_norm, tightness_statistic, vertex_norm,
    HolderParams,
};
use hoelder_core::paths::{parse_path_file, write_path_file, PolygonalPath};
use hoelder_core::process::{Generator, GeneratorSpec, ScheduleRef};
use hoelder_core::stats::replica_rng;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, Result};
use crate::experiments;
use crate::report::ExperimentReport;

/// Exit code when `--strict` is set and some bound check failed.
pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hoelder",
    version,
    about = "Hölder norms of partial-sum paths and seeded Monte Carlo experiments"
)]
pub struct Cli {
    /// Overrides the configured base seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured replica count.
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or directory for experiment reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit with status 3 when any bound check fails.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Desk,
    Faithful,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Desk => Mode::Desk,
            ModeArg::Faithful => Mode::Faithful,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norms of a path file.
    Norm {
        file: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
    },
    /// Writes a path file drawn from a generator spec (TOML).
    Simulate {
        #[arg(long)]
        generator: PathBuf,
        #[arg(short, long)]
        n: usize,
    },
    /// Tower schedules: build, validate, run.
    #[command(subcommand)]
    Counterexample(CounterexampleCmd),
    /// Runs an experiment config (TOML) and writes its CSV report.
    Experiment { config: PathBuf },
    /// Runs the inequality suite.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![256usize, 1024])]
        n: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CounterexampleCmd {
    Build {
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "desk")]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    Validate {
        file: PathBuf,
    },
    Run {
        /// Schedule file; built on the fly when absent.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "desk")]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Declared floors for the modulus event, one per level.
        #[arg(long, value_delimiter = ',')]
        floors: Vec<f64>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Writes a report: into `<dir>/<experiment>.csv` when the target is a
/// directory, to the file otherwise, or to stdout.
fn emit_report(out: Option<&Path>, dir: Option<&Path>, name: &str, report: &ExperimentReport) -> Result<()> {
    let csv = report.to_csv()?;
    match (out, dir) {
        (Some(p), _) if p.is_dir() => emit(Some(&p.join(format!("{name}.csv"))), &csv),
        (Some(p), _) => emit(Some(p), &csv),
        (None, Some(d)) => {
            std::fs::create_dir_all(d)?;
            emit(Some(&d.join(format!("{name}.csv"))), &csv)
        }
        (None, None) => emit(None, &csv),
    }
}

fn norm_report(path: &PolygonalPath, p: f64) -> Result<String> {
    let alpha = HolderParams::from_p(p)?.alpha();
    let coeffs = schauder_coefficients(path, alpha)?;
    let mut s = String::new();
    s.push_str(&format!("n {}\n", path.n()));
    s.push_str(&format!("alpha {alpha}\n"));
    s.push_str(&format!("sequential_norm {}\n", sequential_norm(&coeffs)));
    s.push_str(&format!("vertex_norm {}\n", vertex_norm(path, alpha)?));
    s.push_str(&format!("holder_modulus_1 {}\n", holder_modulus(path, alpha, 1.0)?));
    s.push_str(&format!("increment_bound {}\n", increment_seq_bound(path, alpha)?));
    for j in [1u32, 2, 4, 8] {
        s.push_str(&format!("tightness_J{j} {}\n", tightness_statistic(path, alpha, j)?));
    }
    Ok(s)
}

fn finish(cli: &Cli, report: &ExperimentReport) -> i32 {
    if cli.strict && !report.all_pass() {
        for r in report.failures() {
            eprintln!(
                "failed: {} n={} {} estimate={} threshold={}",
                r.statistic, r.n, r.index, r.estimate, r.threshold
            );
        }
        EXIT_STRICT
    } else {
        0
    }
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) {
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.replicas {
        cfg.replicas = r;
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Norm { file, p } => {
            let path = parse_path_file(&read(file)?)?;
            emit(out, &norm_report(&path, *p)?)?;
            Ok(0)
        }
        Command::Simulate { generator, n } => {
            let mut spec: GeneratorSpec =
                toml::from_str(&read(generator)?).map_err(|e| LabError::Config(e.to_string()))?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let gen = Generator::new(&spec)?;
            let values = gen.sample(*n, &mut replica_rng(spec.seed, 0))?;
            emit(out, &write_path_file(&PolygonalPath::donsker(values)?))?;
            Ok(0)
        }
        Command::Counterexample(CounterexampleCmd::Build { p, mode, levels }) => {
            let s = build_schedule(*p, (*mode).into(), *levels)?;
            emit(out, &write_schedule(&s))?;
            Ok(0)
        }
        Command::Counterexample(CounterexampleCmd::Validate { file }) => {
            let s = parse_schedule(&read(file)?)?;
            let report = validate_schedule(&s);
            let mut text = String::from("condition,level,kind,value,threshold,pass\n");
            let mut hard_fail = false;
            for r in &report.rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.condition,
                    r.level,
                    r.kind.as_str(),
                    r.value,
                    r.threshold,
                    r.pass
                ));
                hard_fail |= !r.pass && matches!(r.kind, Exactness::Exact | Exactness::Numeric);
            }
            text.push_str(if report.all_pass() {
                "all-pass\n"
            } else {
                "not all-pass\n"
            });
            emit(out, &text)?;
            Ok(if hard_fail { 2 } else { 0 })
        }
        Command::Counterexample(CounterexampleCmd::Run {
            file,
            p,
            mode,
            levels,
            floors,
        }) => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Counterexample, *p, vec![2], 1000);
            cfg.schedule = Some(match file {
                Some(f) => ScheduleRef::File {
                    file: f.display().to_string(),
                },
                None => ScheduleRef::Built {
                    p: *p,
                    mode: (*mode).into(),
                    levels: *levels,
                },
            });
            cfg.floors = floors.clone();
            apply_overrides(cli, &mut cfg);
            let report = experiments::run(&cfg)?;
            emit_report(out, None, "counterexample", &report)?;
            Ok(finish(cli, &report))
        }
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            apply_overrides(cli, &mut cfg);
            let report = experiments::run(&cfg)?;
            emit_report(out, cfg.output_dir.as_deref(), cfg.experiment.as_str(), &report)?;
            Ok(finish(cli, &report))
        }
        Command::Check { config, p, n } => {
            let mut cfg = match config {
                Some(c) => ExperimentConfig::load(c)?,
                None => ExperimentConfig::new(ExperimentKind::Inequalities, *p, n.clone(), 2000),
            };
            cfg.experiment = ExperimentKind::Inequalities;
            apply_overrides(cli, &mut cfg);
            let report = experiments::run(&cfg)?;
            emit_report(out, cfg.output_dir.as_deref(), "inequalities", &report)?;
            Ok(finish(cli, &report))
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let run = || match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                1
            }
        },
        None => run(),
    }
}
