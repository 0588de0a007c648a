use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparse_pd::bench::dataset::{fetch_dataset, DatasetName, DATA_ENV};
use sparse_pd::bench::generator::{generate_file, generate_suite, ProblemFile};
use sparse_pd::bench::harness::run_suite;
use sparse_pd::bench::report::{emit_report, ReportOptions};
use sparse_pd::config::SolverConfig;
use sparse_pd::error::{Error, Result};
use sparse_pd::hessian::HessianKind;
use sparse_pd::problem::Family;
use sparse_pd::solver::{parse_list, Solver};
use sparse_pd::stationarity::report;

#[derive(Parser)]
#[command(name = "sparse-pd", version, about = "Cardinality-constrained optimization solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solver on one problem.
    Solve(SolveArgs),
    /// Stationarity diagnostics for a point.
    Check(CheckArgs),
    /// Run a solver suite over generated instances and write reports.
    Bench(BenchArgs),
    /// Write generated instances as JSON files.
    Generate(GenerateArgs),
    /// Download dataset fixtures from the UCI repository.
    Fetch(FetchArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    hessian: Option<HessianKind>,
    /// on | off
    #[arg(long)]
    linesearch: Option<String>,
    /// Evaluation budget in nf + 2 ng.
    #[arg(long)]
    budget: Option<u64>,
    /// Dataset fixture directory.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl ConfigArgs {
    fn build(&self) -> Result<SolverConfig> {
        if let Some(d) = &self.data {
            std::env::set_var(DATA_ENV, d);
        }
        let mut cfg = match &self.config {
            Some(p) => SolverConfig::from_kv_file(p)?,
            None => SolverConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("expected KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(h) = self.hessian {
            cfg.hessian = h;
        }
        if let Some(ls) = &self.linesearch {
            cfg.set("linesearch", ls)?;
        }
        if let Some(b) = self.budget {
            cfg.nf2g_max = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem JSON file, or `SEED:FAMILY`.
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "pdqn")]
    solver: Solver,
    /// Stopping tolerance on the strong stationarity residual.
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Record JSON output; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep the improvement trace in the record.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// JSON array, record JSON with `x_best`, or whitespace/comma separated numbers.
    #[arg(long)]
    point: PathBuf,
    #[arg(long)]
    problem: String,
    /// Curvature for the fixed-point tests; estimated locally when absent.
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    problems: usize,
    #[arg(long, default_value = "pdqn,iht,pss,gss,bfs,zcws")]
    solvers: String,
    /// Profile accuracies (comma separated); the solver tolerance is the smallest.
    #[arg(long = "eps", value_delimiter = ',', default_value = "1e-6,1e-3")]
    eps_list: Vec<f64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Fill the sec column and emit time-based profiles.
    #[arg(long)]
    wall_clock: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Suite size; ignored with --family.
    #[arg(long, default_value_t = 30)]
    problems: usize,
    /// Generate a single instance of this family from --seed.
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value = "problems")]
    out: PathBuf,
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct FetchArgs {
    /// iris, wine, boston or all.
    #[arg(long, default_value = "all")]
    dataset: String,
    #[arg(long, default_value = "data")]
    dir: PathBuf,
}

fn load_problem(arg: &str) -> Result<ProblemFile> {
    if let Some((seed, fam)) = arg.split_once(':') {
        if let Ok(seed) = seed.parse::<u64>() {
            let family: Family = fam.parse().map_err(Error::Problem)?;
            return generate_file(seed, family, format!("{family}-{seed}"));
        }
    }
    ProblemFile::load(Path::new(arg))
}

fn read_point(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(&text) {
        return Ok(v);
    }
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(x) = v.get("x_best").or_else(|| v.get("x")) {
            return serde_json::from_value(x.clone()).map_err(|e| Error::Usage(format!("bad point: {e}")));
        }
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Usage(format!("bad number `{t}` in point file"))))
        .collect()
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let mut cfg = args.config.build()?;
    if let Some(e) = args.eps {
        cfg.eps = e;
        cfg.validate()?;
    }
    let problem = load_problem(&args.problem)?.instance()?;
    let mut rec = args.solver.solve(&problem, &cfg);
    rec.finalize(rec.f_best, cfg.nf2g_max, cfg.sec_max);
    eprintln!(
        "{} on {}: f = {:.10e}, rgS = {:.3e}, nf2g = {}, {}",
        rec.solver,
        rec.problem,
        rec.f_best,
        rec.rgs_best,
        rec.nf2g,
        rec.termination.as_str()
    );
    if !args.trace {
        rec.trace.clear();
    }
    write_json(&rec, args.out.as_deref())
}

fn check(args: CheckArgs) -> Result<()> {
    if let Some(d) = &args.data {
        std::env::set_var(DATA_ENV, d);
    }
    let problem = load_problem(&args.problem)?.instance()?;
    let x = read_point(&args.point)?;
    if x.len() != problem.n {
        return Err(Error::Problem(format!("point has {} entries, problem has n = {}", x.len(), problem.n)));
    }
    let l = args.lipschitz.unwrap_or_else(|| problem.local_lipschitz(&x));
    let g = problem.gradient(&x);
    let r = report(&x, problem.value(&x), &g, &problem.set, problem.s, l)?;
    println!("f = {:.17e}", r.f);
    println!("rgS = {:.6e}", r.rg_s);
    println!("bf = {}", r.bf);
    println!("lu_zhang = {}", r.lu_zhang);
    println!("l_stationary = {}", r.l_stationary);
    println!("nnz = {} (s = {})", r.nnz, problem.s);
    println!("feasible = {}", problem.is_feasible(&x));
    println!("lipschitz = {:.6e}", r.lipschitz);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg = args.config.build()?;
    if let Some(e) = args.eps_list.iter().copied().reduce(f64::min) {
        cfg.eps = e;
        cfg.validate()?;
    }
    let solvers = parse_list(&args.solvers).map_err(Error::Usage)?;
    if solvers.is_empty() {
        return Err(Error::Usage("no solvers given".into()));
    }
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    let files = generate_suite(args.seed, args.problems)?;
    let problems = files.iter().map(ProblemFile::instance).collect::<Result<Vec<_>>>()?;
    let start = std::time::Instant::now();
    let records = run_suite(&problems, &solvers, &cfg);
    let opts = ReportOptions {
        wall_clock: args.wall_clock,
        eps: args.eps_list.clone(),
        nf2g_max: cfg.nf2g_max,
        sec_max: cfg.sec_max,
    };
    let written = emit_report(&records, &args.out, &opts)?;
    eprintln!("{} runs in {:.1}s", records.len(), start.elapsed().as_secs_f64());
    for s in &solvers {
        let name = s.record_name(&cfg);
        let mine: Vec<_> = records.iter().filter(|r| r.solver == name).collect();
        let count = |f: fn(&sparse_pd::record::RunRecord) -> bool| mine.iter().filter(|r| f(r)).count();
        eprintln!(
            "{name:>8}: q<=1e-6 {:>3}  q<=1e-3 {:>3}  rgS<=1e-6 {:>3}  rgS<=1e-3 {:>3}  of {}",
            count(|r| r.solved_q6),
            count(|r| r.solved_q3),
            count(|r| r.solved_s6),
            count(|r| r.solved_s3),
            mine.len()
        );
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    if let Some(d) = &args.data {
        std::env::set_var(DATA_ENV, d);
    }
    let files = match args.family {
        Some(f) => vec![generate_file(args.seed, f, format!("{f}-{}", args.seed))?],
        None => generate_suite(args.seed, args.problems)?,
    };
    fs::create_dir_all(&args.out)?;
    for f in files {
        let p = args.out.join(format!("{}.json", f.id));
        f.save(&p)?;
        println!("{}", p.display());
    }
    Ok(())
}

fn fetch(args: FetchArgs) -> Result<()> {
    let names: Vec<DatasetName> = if args.dataset == "all" {
        DatasetName::ALL.to_vec()
    } else {
        vec![args.dataset.parse().map_err(Error::Usage)?]
    };
    for name in names {
        let (path, sha) = fetch_dataset(name, &args.dir)?;
        println!("{}  {}", sha, path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Check(a) => check(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Generate(a) => generate(a),
        Cmd::Fetch(a) => fetch(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
