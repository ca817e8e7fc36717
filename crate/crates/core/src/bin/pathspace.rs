use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pathspace::approximators::{halfline_step_interpolant, linear_interpolant, step_interpolant, taper};
use pathspace::harness::{emit_report, run_experiment, ExperimentConfig, ReportFormat};
use pathspace::io::{path_to_json, read_measure, read_path, write_path};
use pathspace::metrics::{
    modulus, skorokhod_circ_distance, skorokhod_distance, sparse_modulus_w_prime, two_sided_modulus,
    uniform_distance, MetricReport,
};
use pathspace::processes::{sample_fdd, JumpLaw, ProcessKind, ProcessSampler};
use pathspace::prokhorov::{prokhorov_distance, prokhorov_oracle};
use pathspace::{Error, Norm, Path, Result};

#[derive(Parser)]
#[command(name = "pathspace", version, about = "Path-space metrics, Prokhorov distances and process approximants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Uniform,
    D,
    Dcirc,
    Wprime,
    Modulus,
    TwoSided,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxKind {
    Pl,
    Step,
    Halfline,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessName {
    Brownian,
    Poisson,
    CompoundPoisson,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormName {
    Sup,
    Euclidean,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two paths, or a modulus of one path.
    Metric {
        #[arg(long, value_enum)]
        kind: MetricKind,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Lattice pitch for w' of piecewise-linear paths.
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
    },
    /// Prokhorov distance between two measures given as CSV (w,x1..xk).
    Prokhorov {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        /// Use exhaustive subset enumeration instead of maximum flow.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "sup")]
        norm: NormName,
    },
    /// Build an approximant from grid values.
    Approx {
        #[arg(long, value_enum)]
        kind: ApproxKind,
        #[arg(long)]
        level: u32,
        /// File of numbers separated by commas, spaces or newlines.
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        restrict: Option<f64>,
        #[arg(long)]
        taper: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw finite-dimensional samples of a reference process.
    Sample {
        #[arg(long, value_enum)]
        process: ProcessName,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Mean and standard deviation of normal jumps (compound Poisson).
        #[arg(long, default_value_t = 0.0)]
        jump_mean: f64,
        #[arg(long, default_value_t = 1.0)]
        jump_std: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a convergence experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Report file; `.json` writes JSON, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Domain(format!("--{what} is required for this metric")))
}

fn step(p: &Path) -> Result<&pathspace::StepPath> {
    match p {
        Path::Step(s) => Ok(s),
        _ => Err(Error::Domain("Skorokhod distances take step paths".into())),
    }
}

fn metric(
    kind: MetricKind,
    x: PathBuf,
    y: Option<PathBuf>,
    delta: Option<f64>,
    tol: f64,
    resolution: f64,
) -> Result<MetricReport> {
    let x = read_path(&x)?;
    let y = y.map(|f| read_path(&f)).transpose()?;
    Ok(match kind {
        MetricKind::Uniform => MetricReport::exact(uniform_distance(&x, &need(y, "y")?)?),
        MetricKind::D => skorokhod_distance(step(&x)?, step(&need(y, "y")?)?, tol)?,
        MetricKind::Dcirc => skorokhod_circ_distance(step(&x)?, step(&need(y, "y")?)?, tol)?,
        MetricKind::Wprime => MetricReport::exact(sparse_modulus_w_prime(&x, need(delta, "delta")?, resolution)?),
        MetricKind::Modulus => MetricReport::exact(modulus(&x, need(delta, "delta")?)?),
        MetricKind::TwoSided => {
            MetricReport::exact(two_sided_modulus(&x, need(delta, "delta")?, x.horizon())?)
        }
    })
}

fn read_numbers(file: &PathBuf) -> Result<Vec<f64>> {
    let text = fs::read_to_string(file).map_err(|e| Error::Io {
        path: file.clone(),
        source: e,
    })?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("{}: bad number {s:?}", file.display()))))
        .collect()
}

fn approx(
    kind: ApproxKind,
    level: u32,
    values: PathBuf,
    restrict: Option<f64>,
    taper_m: Option<u32>,
) -> Result<Path> {
    let z = read_numbers(&values)?;
    let mut path: Path = match kind {
        ApproxKind::Pl | ApproxKind::Step => {
            let want = (1usize << level.min(30)) + 1;
            if z.len() != want {
                return Err(Error::Domain(format!("level {level} needs {want} values, got {}", z.len())));
            }
            match kind {
                ApproxKind::Pl => linear_interpolant(&z)?.into(),
                _ => step_interpolant(&z)?.into(),
            }
        }
        ApproxKind::Halfline => halfline_step_interpolant(&z, level)?.into(),
    };
    if let Some(t) = restrict {
        path = path.restrict(t)?;
    }
    if let Some(m) = taper_m {
        path = taper(&path, m)?;
    }
    Ok(path)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Metric {
            kind,
            x,
            y,
            delta,
            tol,
            resolution,
        } => {
            let r = metric(kind, x, y, delta, tol, resolution)?;
            println!("{}", serde_json::to_string(&r).expect("report serializes"));
        }
        Command::Prokhorov { mu, nu, oracle, norm } => {
            let norm = match norm {
                NormName::Sup => Norm::Sup,
                NormName::Euclidean => Norm::Euclidean,
            };
            let (mu, nu) = (read_measure(&mu)?, read_measure(&nu)?);
            let out = if oracle {
                json!({ "rho": prokhorov_oracle(&mu, &nu, norm)?, "epsilon_certificate": null })
            } else {
                let (rho, cert) = prokhorov_distance(&mu, &nu, norm)?;
                json!({ "rho": rho, "epsilon_certificate": cert.epsilon, "coupling": cert.flow })
            };
            println!("{out}");
        }
        Command::Approx {
            kind,
            level,
            values,
            restrict,
            taper,
            out,
        } => {
            let p = approx(kind, level, values, restrict, taper)?;
            match out {
                Some(f) => write_path(&f, &p)?,
                None => println!("{}", path_to_json(&p)),
            }
        }
        Command::Sample {
            process,
            times,
            n,
            seed,
            rate,
            jump_mean,
            jump_std,
            out,
        } => {
            let kind = match process {
                ProcessName::Brownian => ProcessKind::Brownian,
                ProcessName::Poisson => ProcessKind::Poisson { rate },
                ProcessName::CompoundPoisson => ProcessKind::CompoundPoisson {
                    rate,
                    jump: JumpLaw::Normal {
                        mean: jump_mean,
                        std: jump_std,
                    },
                },
            };
            let mut sampler = ProcessSampler::new(kind, seed)?;
            sample_fdd(&mut sampler, &times, n)?.write_csv(&out)?;
        }
        Command::Experiment { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", config.display())))?;
            let report = run_experiment(&cfg)?;
            let fmt = match out.extension().and_then(|e| e.to_str()) {
                Some("json") => ReportFormat::Json,
                _ => ReportFormat::Csv,
            };
            emit_report(&report, fmt, &out)?;
            if report.flagged() {
                eprintln!("warning: the fitter did not certify its tolerance at some levels");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
