use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use umbilic::centering::{solve_center_from, MAX_ITERATIONS, PHI_TOLERANCE};
use umbilic::harness::{
    generate, run_experiment, run_suite, ExperimentConfig, HarmonicTerm, Suite, SurfaceKind,
    SurfaceSpec,
};
use umbilic::io::{self, Encoding};
use umbilic::rigidity::DEFAULT_DELTA;
use umbilic::Error;

/// Radial-graph hypersurfaces near the round sphere: generation, analysis,
/// recentering and verification suites.
#[derive(Parser)]
#[command(author, version, about)]
struct Args {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sphere,
    TranslatedSphere,
    Ellipsoid,
    Harmonic,
    RandomConvex,
}

#[derive(Clone, Copy, ValueEnum)]
enum PayloadEncoding {
    Text,
    Binary,
}

#[derive(Subcommand)]
enum Commands {
    /// Sample a surface family member and write a surface file
    Generate {
        kind: Kind,
        /// Intrinsic dimension
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Grid shape such as 32x64; defaults depend on n
        #[arg(long)]
        shape: Option<String>,
        /// Log-scale of a sphere
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Center of a translated sphere, comma separated
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        /// Ellipsoid semi-axes, comma separated
        #[arg(long)]
        axes: Option<String>,
        /// Harmonic term `l:m:amplitude`; repeatable
        #[arg(long = "term", allow_hyphen_values = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Highest degree of a random surface
        #[arg(long, default_value_t = 6)]
        band: usize,
        /// Amplitude cap of a random surface
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
        #[arg(long, value_enum, default_value_t = PayloadEncoding::Text)]
        encoding: PayloadEncoding,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the full pipeline on a surface file and write a report
    Analyze {
        surface: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Defaults to max(sup|f|, (sup|grad f|/2)^2) of the normalized surface
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Report path; stdout when absent
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve for the center and write the recentred surface
    Center {
        surface: PathBuf,
        #[arg(long, default_value_t = PHI_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = MAX_ITERATIONS)]
        max_iter: usize,
        /// Starting center, comma separated; the origin when absent
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
        /// Report path; stdout when absent
        #[arg(long)]
        report: Option<PathBuf>,
        /// Recentred surface path
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run a verification suite and emit one CSV row per check
    Verify {
        /// identities, codazzi, corollary, convergence or ratios
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// CSV path; stdout when absent
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Exit statuses: 0 pass, 1 verification failure, 2 usage, 3 I/O or parse, 4 numeric.
enum Failure {
    Verification,
    Usage(String),
    Io(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) | Error::Parse(_) => Failure::Io(msg),
            Error::InvalidSpec(_)
            | Error::InvalidDimension(_)
            | Error::InvalidShape { .. }
            | Error::InvalidExponent(_)
            | Error::InvalidEpsilon(_)
            | Error::InvalidDelta(_)
            | Error::DirectionLength { .. } => Failure::Usage(msg),
            _ => Failure::Numeric(msg),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad number `{t}` in `{s}`")))
        })
        .collect()
}

fn parse_term(s: &str) -> Result<HarmonicTerm, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Usage(format!("harmonic term `{s}` is not l:m:amplitude"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(HarmonicTerm {
        l: parts[0].parse().map_err(|_| bad())?,
        m: parts[1].parse().map_err(|_| bad())?,
        amplitude: parts[2].parse().map_err(|_| bad())?,
    })
}

fn write_or_print(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => io::write_atomic(p, bytes).map_err(Failure::from),
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

fn run(command: Commands) -> Result<(), Failure> {
    match command {
        Commands::Generate {
            kind,
            n,
            shape,
            t,
            center,
            axes,
            terms,
            seed,
            band,
            amplitude,
            encoding,
            out,
        } => {
            let require = |v: Option<String>, flag: &str| {
                v.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
            };
            let kind = match kind {
                Kind::Sphere => SurfaceKind::Sphere { t },
                Kind::TranslatedSphere => SurfaceKind::TranslatedSphere {
                    a: parse_list(&require(center, "center")?)?,
                },
                Kind::Ellipsoid => SurfaceKind::Ellipsoid {
                    axes: parse_list(&require(axes, "axes")?)?,
                },
                Kind::Harmonic => SurfaceKind::HarmonicPerturbation {
                    terms: terms
                        .iter()
                        .map(|s| parse_term(s))
                        .collect::<Result<_, _>>()?,
                },
                Kind::RandomConvex => SurfaceKind::RandomConvex {
                    seed,
                    band,
                    amplitude,
                },
            };
            let mut spec = SurfaceSpec::with_default_shape(kind, n);
            if let Some(s) = shape {
                spec = spec
                    .with_shape(io::parse_shape(&s).map_err(|e| Failure::Usage(e.to_string()))?);
            }
            let surface = generate(&spec)?;
            let encoding = match encoding {
                PayloadEncoding::Text => Encoding::Text,
                PayloadEncoding::Binary => Encoding::Binary,
            };
            io::write_surface(&out, &surface, encoding)?;
            Ok(())
        }
        Commands::Analyze {
            surface,
            p,
            epsilon,
            delta,
            out,
        } => {
            let surface = io::read_surface(&surface)?;
            let config = ExperimentConfig {
                p,
                delta,
                epsilon,
                ..ExperimentConfig::default()
            };
            let result = run_experiment(&surface, &config);
            write_or_print(
                out.as_ref(),
                io::experiment_report(&result).to_text().as_bytes(),
            )?;
            match result.failures.first() {
                None => Ok(()),
                Some((stage, msg)) => Err(Failure::Numeric(format!("{}: {msg}", stage.name()))),
            }
        }
        Commands::Center {
            surface,
            tol,
            max_iter,
            start,
            report,
            out,
        } => {
            let surface = io::read_surface(&surface)?;
            let start = match start {
                Some(s) => parse_list(&s)?,
                None => vec![0.0; surface.grid().ambient_dim()],
            };
            let clock = Instant::now();
            let result = solve_center_from(&surface, &start, tol, max_iter)?;
            let seconds = clock.elapsed().as_secs_f64();
            io::write_surface(&out, &result.recentred, Encoding::Text)?;
            let text = io::centering_report(surface.provenance(), &result, seconds).to_text();
            write_or_print(report.as_ref(), text.as_bytes())?;
            if result.converged {
                Ok(())
            } else {
                Err(Failure::Numeric(format!(
                    "no convergence: |Phi| = {:e} after {} iterations",
                    result.residual, result.iterations
                )))
            }
        }
        Commands::Verify { suite, seed, csv } => {
            let suite: Suite = suite
                .parse()
                .map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let rows = run_suite(suite, seed)?;
            write_or_print(csv.as_ref(), &io::checks_csv(&rows)?)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            eprintln!("{suite}: {} checks, {failed} failed", rows.len());
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
