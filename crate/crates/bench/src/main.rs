use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperinv::generators::{shifted_laplacian, LAPLACIAN_GRID, LAPLACIAN_SHIFT};
use hyperinv::gmres::DEFAULT_RESTART;
use hyperinv::init::StrategySpec;
use hyperinv::matrix::NormKind;
use hyperinv::mtx::{read_csr, read_vector};
use hyperinv::precond::DEFAULT_DROP;
use hyperinv::scalar::Precision;
use hyperinv::scheme::SchemeId;
use hyperinv_bench::config::{parse_size, ExperimentConfig, Perturbation, RuleKind};
use hyperinv_bench::drazin::{drazin_table, DEFAULT_DIGITS, DEFAULT_EPS, TABLE_SCHEMES};
use hyperinv_bench::hilbert::{
    hilbert_bench, hilbert_csv, render_hilbert, BENCH_SCHEMES, DEFAULT_EPSILONS, DEFAULT_SIZES,
};
use hyperinv_bench::invert::{error_json, invert, InvertRequest, DEFAULT_CHECK_TOL};
use hyperinv_bench::precond::{precond_bench, DEFAULT_TOLS};
use hyperinv_bench::verify::verify_coeffs;
use hyperinv_bench::{acceptance, configure_threads, BenchError, Result};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "hyperinv",
    version,
    about = "Hyperpower iterations for generalized inverses"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated schemes, e.g. `PM,SM,HYPERPOWER(5)`.
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Vec<SchemeId>,
    /// Start: adjoint, pan-schreiber, drazin, diagonal or explicit:<file>[:alpha].
    #[arg(long, global = true)]
    init: Option<StrategySpec>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Decimal digits of working precision; 0 selects double.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// one, inf, fro or spectral.
    #[arg(long, global = true)]
    norm: Option<NormKind>,
    /// Output directory for tables, output file for `invert`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the PM coefficients against their defining equations.
    VerifyCoeffs {
        /// Shift one coefficient before checking, e.g. `mu=1e-3`.
        #[arg(long)]
        perturb: Option<Perturbation>,
    },
    /// Iteration counts and convergence orders on the Drazin example.
    DrazinTable,
    /// Pseudoinverses of Hilbert matrices.
    HilbertBench {
        /// Comma-separated shapes, e.g. `8x6,12x9`.
        #[arg(long, value_delimiter = ',', value_parser = size_arg)]
        sizes: Vec<(usize, usize)>,
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
        /// Random full-rank instances per size, drawn from `--seed`.
        #[arg(long)]
        random: Option<usize>,
    },
    /// GMRES with hyperpower preconditioners.
    PrecondBench {
        /// Complex MatrixMarket system; defaults to the built-in shifted Laplacian.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Right-hand side; defaults to all ones.
        #[arg(long)]
        rhs: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        tols: Vec<f64>,
        #[arg(long)]
        restart: Option<usize>,
        /// Sparsification threshold for the preconditioners.
        #[arg(long = "drop")]
        drop_tol: Option<f64>,
    },
    /// Iterate on a MatrixMarket matrix and check the result.
    Invert {
        matrix: Option<PathBuf>,
        /// Residual tolerance relative to max(1, ‖X‖_F).
        #[arg(long)]
        check_tol: Option<f64>,
        /// reliable, step, relative-step or residual.
        #[arg(long)]
        rule: Option<RuleKind>,
        #[arg(long)]
        max_loops: Option<usize>,
    },
    /// Run the nine acceptance checks.
    Acceptance,
}

fn size_arg(s: &str) -> std::result::Result<(usize, usize), String> {
    parse_size(s).map_err(|e| e.to_string())
}

impl Cli {
    /// Config file first, then flags.
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let c = &self.common;
        let mut flags = ExperimentConfig {
            schemes: c.scheme.clone(),
            init: c.init.clone(),
            eps: c.eps,
            digits: c.digits,
            norm: c.norm,
            out: c.out.clone(),
            seed: c.seed,
            ..Default::default()
        };
        match &self.command {
            Command::VerifyCoeffs { perturb } => flags.perturb = perturb.clone(),
            Command::HilbertBench {
                sizes,
                epsilons,
                random,
            } => {
                flags.sizes = sizes.clone();
                flags.epsilons = epsilons.clone();
                flags.random = *random;
            }
            Command::PrecondBench {
                matrix,
                rhs,
                tols,
                restart,
                drop_tol,
            } => {
                flags.matrix = matrix.clone();
                flags.rhs = rhs.clone();
                flags.tols = tols.clone();
                flags.restart = *restart;
                flags.drop_tol = *drop_tol;
            }
            Command::Invert {
                matrix,
                check_tol,
                rule,
                max_loops,
            } => {
                flags.matrix = matrix.clone();
                flags.check_tol = *check_tol;
                flags.rule = *rule;
                flags.max_loops = *max_loops;
            }
            Command::DrazinTable | Command::Acceptance => {}
        }
        cfg.override_with(flags);
        Ok(cfg)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| BenchError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `name` under the `--out` directory when one is given.
fn emit(cfg: &ExperimentConfig, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|source| BenchError::File {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join(name);
        write_file(&path, text)?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn run_table(command: &Command, cfg: &ExperimentConfig) -> Result<bool> {
    match command {
        Command::VerifyCoeffs { .. } => {
            let report = verify_coeffs(cfg.perturb.as_ref())?;
            print!("{}", report.render());
            Ok(report.passed)
        }
        Command::DrazinTable => {
            let table = drazin_table(
                cfg.digits.unwrap_or(DEFAULT_DIGITS),
                cfg.eps.unwrap_or(DEFAULT_EPS),
                cfg.norm.unwrap_or(NormKind::Infinity),
                &cfg.schemes_or(&TABLE_SCHEMES),
            )?;
            print!("{}", table.render());
            emit(cfg, "drazin_table.csv", &table.to_csv()?)?;
            Ok(table.rows.iter().all(|r| r.error.is_none()))
        }
        Command::HilbertBench { .. } => {
            let sizes = if cfg.sizes.is_empty() {
                DEFAULT_SIZES.to_vec()
            } else {
                cfg.sizes.clone()
            };
            let epsilons = if cfg.epsilons.is_empty() {
                DEFAULT_EPSILONS.to_vec()
            } else {
                cfg.epsilons.clone()
            };
            let rows = hilbert_bench(
                &sizes,
                &epsilons,
                &cfg.schemes_or(&BENCH_SCHEMES),
                cfg.digits.unwrap_or(0),
                cfg.random.unwrap_or(0),
                cfg.seed(),
            )?;
            print!("{}", render_hilbert(&rows));
            emit(cfg, "hilbert_bench.csv", &hilbert_csv(&rows)?)?;
            Ok(rows.iter().all(|r| r.run.error.is_none()))
        }
        Command::PrecondBench { .. } => {
            let d = Precision::Double;
            let a = match &cfg.matrix {
                Some(path) => read_csr::<Complex64>(path, d)?,
                None => shifted_laplacian(LAPLACIAN_GRID, LAPLACIAN_SHIFT),
            };
            let b = match &cfg.rhs {
                Some(path) => read_vector::<Complex64>(path, d)?,
                None => vec![Complex64::new(1.0, 0.0); a.rows()],
            };
            let tols = if cfg.tols.is_empty() {
                DEFAULT_TOLS.to_vec()
            } else {
                cfg.tols.clone()
            };
            let bench = precond_bench(
                &a,
                &b,
                &tols,
                cfg.restart.unwrap_or(DEFAULT_RESTART),
                cfg.drop_tol.unwrap_or(DEFAULT_DROP),
            )?;
            print!("{}", bench.render());
            emit(cfg, "precond_bench.csv", &bench.rows_csv()?)?;
            emit(cfg, "precond_curves.csv", &bench.curves_csv()?)?;
            Ok(bench.rows.iter().all(|r| r.converged))
        }
        Command::Acceptance => {
            let verdicts = acceptance::run_all();
            for v in &verdicts {
                println!("{v}");
            }
            Ok(verdicts.iter().all(|v| v.passed))
        }
        Command::Invert { .. } => unreachable!("handled separately"),
    }
}

fn run_invert(cfg: &ExperimentConfig) -> Result<bool> {
    let matrix = cfg
        .matrix
        .clone()
        .ok_or_else(|| BenchError::Config("invert needs a matrix file".into()))?;
    let schemes = cfg.schemes_or(&[SchemeId::Pm]);
    let [scheme] = schemes[..] else {
        return Err(BenchError::Config("invert takes exactly one scheme".into()));
    };
    let req = InvertRequest {
        matrix,
        scheme,
        init: cfg.init.clone().unwrap_or(StrategySpec::PanSchreiber),
        eps: cfg.eps.unwrap_or(1e-12),
        digits: cfg.digits.unwrap_or(0),
        norm: cfg.norm.unwrap_or(NormKind::Frobenius),
        rule: cfg.rule,
        max_loops: cfg.max_loops,
        check_tol: cfg.check_tol.unwrap_or(DEFAULT_CHECK_TOL),
        out: cfg.out.clone(),
    };
    let outcome = invert(&req)?;
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let is_invert = matches!(cli.command, Command::Invert { .. });
    let result = configure_threads()
        .and_then(|_| cli.config())
        .and_then(|cfg| {
            if is_invert {
                run_invert(&cfg)
            } else {
                run_table(&cli.command, &cfg)
            }
        });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if is_invert {
                println!("{}", error_json(&e));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
    }
}
