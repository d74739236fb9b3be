//! Entry point for the `prolate` executable. Flags win over config file
//! values; every task writes its artifacts into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prolate_cli::config::ExperimentConfig;
use prolate_cli::error::{CliError, Result};
use prolate_cli::io;
use prolate_cli::tasks::{
    self, ApproxParams, DofParams, EigsParams, EstimateParams, MultitaperParams, OperatorSpec,
    SolveParams, StudyParams, SzegoParams,
};

#[derive(Parser)]
#[command(name = "prolate", version, about = "Time-limited Toeplitz operators and their spectra")]
struct Cli {
    #[command(subcommand)]
    task: Task,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON experiment description; flags override its fields
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Directory artifacts are written into (default ".")
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct OperatorArgs {
    /// Load a stored operator instead of building one
    #[arg(long)]
    operator: Option<PathBuf>,
    /// Operator family: prolate, periodic, prolate2d, or trig
    #[arg(long)]
    kind: Option<String>,
    /// Operator size (first axis for prolate2d)
    #[arg(long)]
    n: Option<usize>,
    /// Second axis size for prolate2d
    #[arg(long)]
    n2: Option<usize>,
    /// Window length for the periodic family
    #[arg(long)]
    m: Option<usize>,
    /// Number of retained frequencies for the periodic family
    #[arg(long)]
    k: Option<usize>,
    /// Half bandwidth in (0, 1/2)
    #[arg(long)]
    w: Option<f64>,
    /// Second-axis half bandwidth for prolate2d
    #[arg(long)]
    w2: Option<f64>,
    /// Trig symbol coefficients "c0,c1,..." with optional re:im parts
    #[arg(long)]
    trig: Option<String>,
}

#[derive(Subcommand)]
enum Task {
    /// Construct an operator and store it as operator.json
    Build {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
    },
    /// Full Hermitian eigendecomposition, written as eigs.csv
    Eigs {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Keep only the leading eigenvalues in the listing
        #[arg(long)]
        count: Option<usize>,
        /// Also persist the full decomposition for later solves
        #[arg(long)]
        save_decomposition: bool,
    },
    /// Compare spectral averages against symbol integrals (szego.json)
    Szego {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Test functions: any of x, x^2, log
        #[arg(long, value_delimiter = ',')]
        theta: Vec<String>,
        /// Fail (exit 3) when the spectral distribution distance exceeds this
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Effective dimension at one or more thresholds (dof.json)
    Dof {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Eigenvalue thresholds to report
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
    },
    /// Check a subspace approximation identity or bound (approx.json)
    Approx {
        #[command(flatten)]
        common: CommonArgs,
        /// Which statement to check: 2, 3, or 4
        #[arg(long)]
        theorem: Option<String>,
        /// Operator size
        #[arg(long)]
        n: Option<usize>,
        /// Half bandwidth in (0, 1/2)
        #[arg(long)]
        w: Option<f64>,
        /// Subspace rank (default: the time-bandwidth area, rounded up)
        #[arg(long)]
        rank: Option<usize>,
        /// Approximation level for t4
        #[arg(long)]
        eps: Option<f64>,
        /// Quadrature or frequency grid size
        #[arg(long)]
        grid: Option<usize>,
        /// Monte Carlo draws for t3
        #[arg(long)]
        draws: Option<usize>,
        /// Monte Carlo seed for t3
        #[arg(long)]
        seed: Option<u64>,
        /// Fail (exit 3) when the gap exceeds this
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Truncated pseudoinverse solve against a stored right-hand side
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Reuse a stored decomposition instead of factoring the operator
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Right-hand side samples (CSV: re or re,im per line)
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Number of spectral components to invert
        #[arg(long)]
        rank: Option<usize>,
        /// Fail (exit 3) when the relative residual exceeds this
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Multitaper spectrum estimate of a stored signal (psd.csv)
    Multitaper {
        #[command(flatten)]
        common: CommonArgs,
        /// Signal samples (CSV: re or re,im per line)
        #[arg(long)]
        signal: Option<PathBuf>,
        /// Taper half bandwidth
        #[arg(long)]
        w: Option<f64>,
        /// Time-bandwidth product; alternative to --w
        #[arg(long)]
        nw: Option<f64>,
        /// Number of tapers (default: the concentration plateau size)
        #[arg(long)]
        tapers: Option<usize>,
        /// Frequency grid size
        #[arg(long)]
        grid: Option<usize>,
        /// Taper averaging: uniform or eigenvalue
        #[arg(long)]
        weighting: Option<String>,
    },
    /// Fast eigenvalue surrogates without a dense solve (estimate.csv)
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Also run the dense eigensolve and add its column
        #[arg(long)]
        compare: bool,
    },
    /// Sweep a metric across operator sizes (study.json)
    Study {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// What to measure: trace, szego-cdf, dof, or estimator
        #[arg(long)]
        metric: Option<String>,
        /// Strictly increasing operator sizes
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Threshold for the dof metric
        #[arg(long)]
        eps: Option<f64>,
        /// Fail (exit 3) when any row's gap exceeds this
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn load_config(path: Option<&PathBuf>, task: &str) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let text = io::read_text(p)?;
            let cfg = io::parse_config(&text, p)?;
            cfg.validate(task)?;
            Ok(cfg)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(common: &CommonArgs, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn operator_spec(args: &OperatorArgs, cfg: &ExperimentConfig) -> OperatorSpec {
    OperatorSpec {
        operator: args
            .operator
            .clone()
            .or_else(|| cfg.operator.as_ref().map(PathBuf::from)),
        kind: args.kind.clone().or_else(|| cfg.kind.clone()),
        n: args.n.or(cfg.n),
        n2: args.n2.or(cfg.n2),
        m: args.m.or(cfg.m),
        k: args.k.or(cfg.k),
        w: args.w.or(cfg.w),
        w2: args.w2.or(cfg.w2),
        trig: args.trig.clone().or_else(|| cfg.trig.clone()),
        // the structural description has no flag form; it comes from configs
        group: cfg.group.clone(),
        modulus: cfg.modulus,
        window: cfg.window,
        band: cfg.band,
    }
}

fn checked_tolerance(flag: Option<f64>, cfg: &ExperimentConfig) -> Result<Option<f64>> {
    let tol = flag.or(cfg.tolerance);
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    Ok(tol)
}

fn run(cli: Cli) -> Result<()> {
    match cli.task {
        Task::Build { common, op } => {
            let cfg = load_config(common.config.as_ref(), "build")?;
            tasks::run_build(&operator_spec(&op, &cfg), &out_dir(&common, &cfg))
        }
        Task::Eigs {
            common,
            op,
            count,
            save_decomposition,
        } => {
            let cfg = load_config(common.config.as_ref(), "eigs")?;
            let params = EigsParams {
                count: count.or(cfg.count),
                save_decomposition: save_decomposition
                    || cfg.save_decomposition.unwrap_or(false),
            };
            tasks::run_eigs(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
        Task::Szego {
            common,
            op,
            theta,
            tolerance,
        } => {
            let cfg = load_config(common.config.as_ref(), "szego")?;
            let theta = if theta.is_empty() {
                cfg.theta
                    .clone()
                    .unwrap_or_else(|| vec!["x".into(), "x^2".into()])
            } else {
                theta
            };
            let params = SzegoParams {
                theta,
                tolerance: checked_tolerance(tolerance, &cfg)?,
            };
            tasks::run_szego(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
        Task::Dof { common, op, levels } => {
            let cfg = load_config(common.config.as_ref(), "dof")?;
            let levels = if levels.is_empty() {
                cfg.levels.clone().unwrap_or_else(|| vec![0.5, 0.1, 0.01])
            } else {
                levels
            };
            let params = DofParams { levels };
            tasks::run_dof(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
        Task::Approx {
            common,
            theorem,
            n,
            w,
            rank,
            eps,
            grid,
            draws,
            seed,
            tolerance,
        } => {
            let cfg = load_config(common.config.as_ref(), "approx")?;
            let params = ApproxParams {
                theorem: theorem
                    .or_else(|| cfg.theorem.clone())
                    .ok_or_else(|| {
                        CliError::Usage("missing --theorem (or config field 'theorem')".into())
                    })?,
                n: n.or(cfg.n).ok_or_else(|| {
                    CliError::Usage("missing --n (or config field 'n')".into())
                })?,
                w: w.or(cfg.w).ok_or_else(|| {
                    CliError::Usage("missing --w (or config field 'w')".into())
                })?,
                rank: rank.or(cfg.rank),
                eps: eps.or(cfg.eps),
                grid: grid.or(cfg.grid),
                draws: draws.or(cfg.draws).unwrap_or(100_000),
                seed: seed.or(cfg.seed).unwrap_or(0),
                tolerance: checked_tolerance(tolerance, &cfg)?,
            };
            tasks::run_approx(&params, &out_dir(&common, &cfg))
        }
        Task::Solve {
            common,
            op,
            decomposition,
            rhs,
            rank,
            tolerance,
        } => {
            let cfg = load_config(common.config.as_ref(), "solve")?;
            let params = SolveParams {
                decomposition: decomposition
                    .or_else(|| cfg.decomposition.as_ref().map(PathBuf::from)),
                rhs: rhs
                    .or_else(|| cfg.rhs.as_ref().map(PathBuf::from))
                    .ok_or_else(|| {
                        CliError::Usage("missing --rhs (or config field 'rhs')".into())
                    })?,
                rank: rank.or(cfg.rank),
                tolerance: checked_tolerance(tolerance, &cfg)?,
            };
            tasks::run_solve(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
        Task::Multitaper {
            common,
            signal,
            w,
            nw,
            tapers,
            grid,
            weighting,
        } => {
            let cfg = load_config(common.config.as_ref(), "multitaper")?;
            let params = MultitaperParams {
                signal: signal
                    .or_else(|| cfg.signal.as_ref().map(PathBuf::from))
                    .ok_or_else(|| {
                        CliError::Usage("missing --signal (or config field 'signal')".into())
                    })?,
                w: w.or(cfg.w),
                nw: nw.or(cfg.nw),
                tapers: tapers.or(cfg.tapers),
                grid: grid.or(cfg.grid),
                weighting: weighting.or_else(|| cfg.weighting.clone()),
            };
            tasks::run_multitaper(&params, &out_dir(&common, &cfg))
        }
        Task::Estimate {
            common,
            op,
            compare,
        } => {
            let cfg = load_config(common.config.as_ref(), "estimate")?;
            let params = EstimateParams {
                compare: compare || cfg.compare.unwrap_or(false),
            };
            tasks::run_estimate(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
        Task::Study {
            common,
            op,
            metric,
            sizes,
            eps,
            tolerance,
        } => {
            let cfg = load_config(common.config.as_ref(), "study")?;
            let params = StudyParams {
                metric: metric.or_else(|| cfg.metric.clone()).ok_or_else(|| {
                    CliError::Usage("missing --metric (or config field 'metric')".into())
                })?,
                sizes: if sizes.is_empty() {
                    cfg.sizes.clone().unwrap_or_default()
                } else {
                    sizes
                },
                eps: eps.or(cfg.eps),
                tolerance: checked_tolerance(tolerance, &cfg)?,
            };
            tasks::run_study(&operator_spec(&op, &cfg), &params, &out_dir(&common, &cfg))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
