use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ilspbs::experiments::{
    self, alpha_sweep, format_csv, format_table, gen_identity_shifted, gen_pde_problem, problem_label, run_benchmark,
    solve_gmres, AlphaChoice, Method, PdeSpec, ProblemSpec,
};
use ilspbs::problem::rel_error;
use ilspbs::{pbs_iterate, spectral, BsKind, GmresConfig};

const EXIT_CONVERGED: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

/// Iterative solvers for indefinite least squares problems.
#[derive(Debug, Parser)]
#[command(name = "ilspbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print mu_max, the convergence interval, alpha_opt and rho_opt.
    Analyze {
        /// example1 | mtx:<path>:<c> | pde:<n0>
        #[arg(long)]
        problem: String,
    },
    /// Solve with the stationary PBS iteration or preconditioned GMRES.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum, default_value_t = SolveMethod::Gmres)]
        method: SolveMethod,
        #[arg(long, value_enum, default_value_t = PrecArg::Pbs)]
        prec: PrecArg,
        /// Number or "opt".
        #[arg(long, default_value = "1")]
        alpha: String,
        /// Restart length or "full".
        #[arg(long, default_value = "full")]
        restart: String,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        maxit: usize,
    },
    /// PBS stationary iteration counts over a list of alpha values.
    Sweep {
        #[arg(long)]
        problem: String,
        /// Comma-separated values; "opt" is accepted as an entry.
        #[arg(long)]
        alphas: String,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        maxit: usize,
    },
    /// Reproduce one of the three benchmark experiments.
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        /// Matrix Market file used as A1 (experiment 2).
        #[arg(long)]
        a1: Option<PathBuf>,
        /// Grid size for experiment 3.
        #[arg(long, default_value_t = 85)]
        n0: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolveMethod {
    Pbs,
    Gmres,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecArg {
    Pbs,
    Bs1,
    Bs2,
    Bs3,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(command: Command) -> ilspbs::Result<u8> {
    match command {
        Command::Analyze { problem } => {
            let pr = problem.parse::<ProblemSpec>()?.build()?;
            let mu = spectral::mu_max(&pr, spectral::MU_MAX_TOL, spectral::MU_MAX_MAXIT);
            let s = spectral::SpectralSummary::from_mu_max(mu.value)?;
            println!("problem      {}", problem_label(&pr));
            println!("hessian SPD  {}", pr.hessian_is_spd());
            println!(
                "mu_max       {:.6}{}",
                s.mu_max,
                if mu.converged { "" } else { " (power iteration not converged)" }
            );
            println!("interval     (0, {:.6})", s.alpha_upper);
            println!("alpha_opt    {:.6}", s.alpha_opt);
            println!("rho_opt      {:.6}", s.rho_opt);
            Ok(EXIT_CONVERGED)
        }
        Command::Solve {
            problem,
            method,
            prec,
            alpha,
            restart,
            tol,
            maxit,
        } => {
            let pr = problem.parse::<ProblemSpec>()?.build()?;
            let alpha = alpha.parse::<AlphaChoice>()?.resolve(&pr)?;
            let reference = pr.reference_solution().ok();
            let (report, x) = match method {
                SolveMethod::Pbs => {
                    let out = pbs_iterate(&pr, alpha, tol, maxit)?;
                    let x = out.solution[..pr.n_cols()].to_vec();
                    (out.report, x)
                }
                SolveMethod::Gmres => {
                    let restart = parse_restart(&restart)?;
                    let m = match prec {
                        PrecArg::Pbs => Method::Pbs(alpha),
                        PrecArg::Bs1 => Method::Bs(BsKind::Bs1),
                        PrecArg::Bs2 => Method::Bs(BsKind::Bs2),
                        PrecArg::Bs3 => Method::Bs(BsKind::Bs3),
                        PrecArg::None => Method::NoPrec,
                    };
                    let config = GmresConfig {
                        restart,
                        tol,
                        maxit,
                        ..GmresConfig::default()
                    };
                    let out = solve_gmres(&pr, m, &config)?;
                    let x = pr.operator(m.formulation()).x_block(&out.solution).to_vec();
                    (out.report, x)
                }
            };
            println!("problem      {}", problem_label(&pr));
            println!("alpha        {alpha}");
            println!("status       {}", report.termination);
            println!("iterations   {}", report.iterations);
            println!("rel          {:.3e}", report.final_rel_residual);
            if let Some(err) = reference.as_ref().and_then(|r| rel_error(&x, r).ok()) {
                println!("err          {err:.3e}");
            }
            println!("seconds      {:.4}", report.wall_seconds);
            Ok(if report.converged { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED })
        }
        Command::Sweep {
            problem,
            alphas,
            tol,
            maxit,
        } => {
            let pr = problem.parse::<ProblemSpec>()?.build()?;
            let values = alphas
                .split(',')
                .map(|s| s.trim().parse::<AlphaChoice>().and_then(|a| a.resolve(&pr)))
                .collect::<ilspbs::Result<Vec<f64>>>()?;
            let res = alpha_sweep(&pr, &values, tol, maxit)?;
            println!("{:>10} {:>6}  status", "alpha", "iter");
            for p in &res.points {
                println!("{:>10.4} {:>6}  {}", p.alpha, p.iterations, p.termination);
            }
            match res.best_alpha {
                Some(a) => {
                    println!("best alpha {a:.4}");
                    Ok(EXIT_CONVERGED)
                }
                None => Ok(EXIT_NOT_CONVERGED),
            }
        }
        Command::Bench { example, a1, n0, format } => bench(example, a1, n0, format),
    }
}

fn parse_restart(s: &str) -> ilspbs::Result<Option<usize>> {
    if s.eq_ignore_ascii_case("full") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(Some(k)),
        _ => Err(ilspbs::Error::InvalidArgument(format!("restart must be a positive integer or 'full', got {s:?}"))),
    }
}

fn bench(example: u8, a1: Option<PathBuf>, n0: usize, format: Format) -> ilspbs::Result<u8> {
    match example {
        1 => {
            let pr = experiments::gen_example1();
            let s = spectral::analyze(&pr)?;
            let alphas = [0.7, 0.8, 1.0, s.alpha_opt, 1.4, 1.6, 1.8];
            let res = alpha_sweep(&pr, &alphas, 1e-11, 5000)?;
            match format {
                Format::Csv => {
                    println!("alpha,iter,status");
                    for p in &res.points {
                        println!("{:.4},{},{}", p.alpha, p.iterations, p.termination);
                    }
                }
                Format::Table => {
                    println!(
                        "mu_max {:.4}  interval (0, {:.3})  alpha_opt {:.4}  rho_opt {:.4}",
                        s.mu_max, s.alpha_upper, s.alpha_opt, s.rho_opt
                    );
                    println!("{:>8} {:>6}", "alpha", "iter");
                    for p in &res.points {
                        println!("{:>8.4} {:>6}", p.alpha, p.iterations);
                    }
                }
            }
            Ok(EXIT_CONVERGED)
        }
        2 => {
            let path = a1.ok_or_else(|| ilspbs::Error::InvalidArgument("experiment 2 needs --a1 <path.mtx>".into()))?;
            let pr = gen_identity_shifted(&path, 6.0)?;
            let rows = run_benchmark(&pr, &Method::table_set(1.0), &GmresConfig::restarted(10))?;
            print_rows(&rows, format);
            Ok(EXIT_CONVERGED)
        }
        _ => {
            let pr = gen_pde_problem(PdeSpec::new(n0))?;
            let rows = run_benchmark(&pr, &Method::table_set(1.0), &GmresConfig::default())?;
            print_rows(&rows, format);
            Ok(EXIT_CONVERGED)
        }
    }
}

fn print_rows(rows: &[experiments::BenchRow], format: Format) {
    match format {
        Format::Csv => print!("{}", format_csv(rows)),
        Format::Table => print!("{}", format_table(rows)),
    }
}
