use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bscrit::derivation::{derive_necessity, Conclusion};
use bscrit::exponents::{exponent_map, exponent_map_csv, parse_exponent, ExponentTriple, Rational, RegionFamily};
use bscrit::harness::{
    emit_report, run_blowup_experiment, run_lemma_suite, selftest, ExperimentConfig, ReportFormat, ScalingReport,
};
use bscrit::Error;

const EXIT_PASS: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONTRADICTION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "bscrit", version, about = "Critical orders and blow-up experiments for bilinear pseudo-differential operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Region and critical order on a D x D grid of (1/p1, 1/p2), as CSV.
    ExponentMap {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "J")]
        family: RegionFamily,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        /// Grid extent along each axis.
        #[arg(long, default_value = "1")]
        max: Rational,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Necessity derivation for one triple.
    Derive {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        rho: Rational,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        format: TraceFormat,
    },
    /// All scaling checks from a key = value config file.
    LemmaSuite {
        #[arg(long)]
        config: PathBuf,
    },
    /// Blow-up experiment for one triple.
    Blowup {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        rho: Rational,
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long)]
        a2: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        jmin: Option<u32>,
        #[arg(long)]
        jmax: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Damping `t = 2^-T`; longer j ranges need larger T.
        #[arg(long)]
        t_halvings: Option<u32>,
        /// Report path without extension.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated list of csv, json, plotdata.
        #[arg(long, value_delimiter = ',')]
        format: Vec<ReportFormat>,
    },
    /// Bump certificates and oracle cross-checks.
    Selftest,
}

fn triple(p1: &str, p2: &str, p: &str) -> Result<ExponentTriple, Error> {
    ExponentTriple::new(parse_exponent(p1)?, parse_exponent(p2)?, parse_exponent(p)?)
}

fn finish(report: &ScalingReport) -> Result<u8, Error> {
    print!("{}", report.summary());
    if let Some(stem) = &report.config.output {
        for f in &report.config.formats {
            let path = emit_report(report, *f, stem)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(if report.passed() { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::ExponentMap {
            n,
            family,
            grid,
            max,
            output,
        } => {
            let csv = exponent_map_csv(&exponent_map(n, family, grid, max)?);
            match output {
                Some(path) => std::fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?,
                None => print!("{csv}"),
            }
            Ok(EXIT_PASS)
        }
        Command::Derive {
            p1,
            p2,
            p,
            rho,
            n,
            format,
        } => {
            let trace = derive_necessity(triple(&p1, &p2, &p)?, rho, n)?;
            match format {
                TraceFormat::Text => print!("{}", trace.to_text()),
                TraceFormat::Json => println!("{}", trace.to_json()?),
            }
            Ok(match trace.conclusion {
                Conclusion::ForcesEquality => EXIT_PASS,
                Conclusion::Contradiction => EXIT_CONTRADICTION,
                Conclusion::Inconclusive => EXIT_CHECK_FAILED,
            })
        }
        Command::LemmaSuite { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            finish(&run_lemma_suite(&cfg)?)
        }
        Command::Blowup {
            p1,
            p2,
            p,
            rho,
            a1,
            a2,
            eps,
            jmin,
            jmax,
            seed,
            t_halvings,
            output,
            format,
        } => {
            let mut cfg = ExperimentConfig::for_triple(triple(&p1, &p2, &p)?, rho);
            cfg.a1 = a1.unwrap_or(cfg.a1);
            cfg.a2 = a2.unwrap_or(cfg.a2);
            cfg.epsilon = eps.unwrap_or(cfg.epsilon);
            cfg.j_min = jmin.unwrap_or(cfg.j_min);
            cfg.j_max = jmax.unwrap_or(cfg.j_max);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.t_halvings = t_halvings.unwrap_or(cfg.t_halvings);
            cfg.output = output;
            if !format.is_empty() {
                cfg.formats = format;
            }
            cfg.validate()?;
            finish(&run_blowup_experiment(&cfg)?)
        }
        Command::Selftest => {
            let checks = selftest()?;
            for c in &checks {
                println!("{}", c.line());
            }
            Ok(if checks.iter().all(|c| c.pass) {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
