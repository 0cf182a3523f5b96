use clap::{Args, Parser, Subcommand, ValueEnum};
use splitcone::check::check_solution;
use splitcone::io::{self, SolutionFile};
use splitcone::probgen::{self, GeneratorParams, LpKind};
use splitcone::{LinsysMode, Settings, Solver, Status};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Parser)]
#[command(name = "splitcone", version, about = "First-order solver for convex cone programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write a solution file.
    Solve(SolveArgs),
    /// Write a generated problem file.
    Gen(GenArgs),
    /// Verify a solution file against a problem file.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Linsys {
    Direct,
    Indirect,
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    /// Sets all five tolerances.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_pri: Option<f64>,
    #[arg(long)]
    eps_dual: Option<f64>,
    #[arg(long)]
    eps_gap: Option<f64>,
    #[arg(long)]
    eps_infeas: Option<f64>,
    #[arg(long)]
    eps_unbdd: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum, default_value = "direct")]
    linsys: Linsys,
    /// CG step cap per iteration for `--linsys indirect`.
    #[arg(long)]
    cg_max: Option<usize>,
    /// Fixed CG residual target instead of the decreasing schedule.
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    check_interval: Option<usize>,
    /// Solution file whose x, y, s seed the iteration.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Where to write the solution; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Family {
    Lasso,
    Portfolio,
    Rpca,
    LpFeasible,
    LpInfeasible,
    LpUnbounded,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    problem: PathBuf,
    solution: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Gen(a) => run_gen(a),
        Command::Check(a) => run_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Solved => 0,
        Status::Infeasible | Status::InfeasibleAndUnbounded => 2,
        Status::Unbounded => 3,
        Status::Indeterminate | Status::MaxItersReached => 4,
    }
}

fn run_solve(a: SolveArgs) -> Result<u8, String> {
    let data = io::read_problem(&a.problem).map_err(|e| e.to_string())?;
    let mut settings = Settings::default();
    if let Some(eps) = a.eps {
        settings = settings.with_eps(eps);
    }
    let overrides = [
        (a.eps_pri, &mut settings.eps_pri),
        (a.eps_dual, &mut settings.eps_dual),
        (a.eps_gap, &mut settings.eps_gap),
        (a.eps_infeas, &mut settings.eps_infeas),
        (a.eps_unbdd, &mut settings.eps_unbdd),
    ];
    for (value, slot) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(v) = a.alpha {
        settings.alpha = v;
    }
    if let Some(v) = a.max_iters {
        settings.max_iters = v;
    }
    if let Some(v) = a.cg_max {
        settings.cg_max = v;
    }
    if let Some(v) = a.check_interval {
        settings.check_interval = v;
    }
    settings.cg_tol = a.cg_tol;
    settings.normalize = !a.no_normalize;
    settings.linsys_mode = match a.linsys {
        Linsys::Direct => LinsysMode::Direct,
        Linsys::Indirect => LinsysMode::Indirect,
    };
    if let Some(path) = &a.warm_start {
        let file = io::read_solution(path).map_err(|e| e.to_string())?;
        let warm = file
            .warm_start()
            .ok_or_else(|| format!("{}: warm start needs members `x`, `y` and `s`", path.display()))?;
        settings.warm_start = Some(warm);
    }

    let sol = Solver::new(&data, &settings).and_then(|mut s| s.solve()).map_err(|e| e.to_string())?;
    let file = SolutionFile::from(&sol);
    let objective = sol.objective().map_or("n/a".to_string(), |v| format!("{v:.6e}"));
    let total_ms = (sol.info.setup_time + sol.info.solve_time).as_secs_f64() * 1e3;
    let summary = format!(
        "status {}  objective {}  iterations {}  time {:.1} ms",
        sol.status, objective, sol.info.iterations, total_ms
    );
    match &a.out {
        Some(path) => {
            io::write_solution(path, &file).map_err(|e| e.to_string())?;
            println!("{summary}");
        }
        None => {
            print!("{}", io::solution_to_string(&file));
            eprintln!("{summary}");
        }
    }
    Ok(exit_code(sol.status))
}

fn run_gen(a: GenArgs) -> Result<u8, String> {
    let params = match a.family {
        Family::Lasso => GeneratorParams::Lasso { p: a.p.unwrap_or(300), q: a.q.unwrap_or(60) },
        Family::Portfolio => GeneratorParams::Portfolio { p: a.p.unwrap_or(100), q: a.q.unwrap_or(10) },
        Family::Rpca => GeneratorParams::Rpca { p: a.p.unwrap_or(30), r: a.r.unwrap_or(2) },
        Family::LpFeasible | Family::LpInfeasible | Family::LpUnbounded => {
            let kind = match a.family {
                Family::LpFeasible => LpKind::Feasible,
                Family::LpInfeasible => LpKind::Infeasible,
                _ => LpKind::Unbounded,
            };
            GeneratorParams::Lp { kind, n: a.n.unwrap_or(10), m: a.m.unwrap_or(20) }
        }
    };
    let data = probgen::generate(params, a.seed).map_err(|e| e.to_string())?;
    match &a.out {
        Some(path) => io::write_problem(path, &data).map_err(|e| e.to_string())?,
        None => print!("{}", io::problem_to_string(&data)),
    }
    Ok(0)
}

fn run_check(a: CheckArgs) -> Result<u8, String> {
    let data = io::read_problem(&a.problem).map_err(|e| e.to_string())?;
    let sol = io::read_solution(&a.solution).map_err(|e| e.to_string())?;
    let report = check_solution(&data, &sol, a.eps).map_err(|e| e.to_string())?;
    println!("status {}", report.status);
    for (label, v) in [("pri_res", report.pri_res), ("dual_res", report.dual_res), ("gap", report.gap)] {
        if let Some(v) = v {
            println!("{label} {v:.3e}");
        }
    }
    for m in &report.measurements {
        let op = if m.upper { "<=" } else { ">=" };
        let verdict = if m.passed() { "ok" } else { "FAIL" };
        println!("{:<32} {:>12.3e} {op} {:>10.3e}  {verdict}", m.name, m.value, m.bound);
    }
    if report.passed() {
        println!("check passed");
        Ok(0)
    } else {
        println!("check failed");
        Ok(EXIT_CHECK_FAILED)
    }
}
