use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use geosat::analysis::{self, Metric};
use geosat::formula::Model;
use geosat::generate::{clauses_for_density, derive_instance_seed, generate, GenParams};
use geosat::harness::{self, ClauseCounts, ExperimentGrid, ExternalSolver, RecordVerdict, SolverKind};
use geosat::io::dimacs::{read_dimacs, write_dimacs};
use geosat::io::drat::{read_drat, write_drat};
use geosat::proof::{check_rup_proof_with, compute_proof_metrics};
use geosat::solver::{solve_2sat, solve_cdcl, SolverConfig, Verdict};
use geosat::Formula;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_REJECTED: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// Random uniform and geometric k-SAT: generate, solve, check proofs, run
/// threshold experiments and summarize them.
///
/// Exit codes: 10 satisfiable, 20 unsatisfiable, 0 success or timeout,
/// 1 proof rejected, 2 error.
#[derive(Debug, Parser)]
#[command(name = "geosat", version)]
struct Cli {
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write random instances as DIMACS files, one per instance.
    Generate(GenerateArgs),
    /// Solve a DIMACS file; prints an `s` line and, when satisfiable, `v` lines.
    Solve(SolveArgs),
    /// Check a DRAT proof against a DIMACS formula by forward unit propagation.
    Check(CheckArgs),
    /// Run a parameter grid and write one CSV record per instance.
    Bench(BenchArgs),
    /// Summarize a record CSV into ratio, threshold and matrix CSVs.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed; instance i uses a seed derived from it.
    #[arg(long, env = "GEOSAT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_model)]
    model: Model,
    /// Literals per clause.
    #[arg(long)]
    k: usize,
    /// Number of variables.
    #[arg(long)]
    n: u32,
    /// Number of clauses.
    #[arg(long, conflicts_with = "density", required_unless_present = "density")]
    m: Option<usize>,
    /// Clauses per variable; m = round_half_up(density * n).
    #[arg(long)]
    density: Option<f64>,
    /// Torus dimension; required for the geometric model.
    #[arg(long)]
    dim: Option<u32>,
    #[command(flatten)]
    seed: SeedArg,
    /// Number of instances.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// DIMACS CNF file.
    instance: PathBuf,
    /// `cdcl`, `twosat` or `external:<path>`.
    #[arg(long, default_value = "cdcl", value_parser = parse_solver)]
    solver: SolverKind,
    /// Write a DRAT proof here when the formula is unsatisfiable.
    #[arg(long)]
    proof: Option<PathBuf>,
    /// Give up after this many seconds (cdcl and external solvers).
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// DIMACS CNF file.
    instance: PathBuf,
    /// Text DRAT proof.
    proof: PathBuf,
    /// Skip deletions of clauses that are not present instead of rejecting.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Clause lengths, comma separated.
    #[arg(long, default_value = "3")]
    k: String,
    /// Variable counts, comma separated.
    #[arg(long)]
    n: String,
    /// Clause counts: a comma-separated list or start:end:step.
    #[arg(long, conflicts_with = "density", required_unless_present = "density")]
    m: Option<String>,
    /// Densities: a comma-separated list or start:end:step.
    #[arg(long)]
    density: Option<String>,
    /// Dimensions: list or range of integers, `uniform` for the uniform model.
    #[arg(long, default_value = "uniform")]
    dim: String,
    #[command(flatten)]
    seed: SeedArg,
    /// Instances per grid cell.
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// Per-instance timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    /// Emit, measure and check proofs of unsatisfiable instances.
    #[arg(long)]
    proof: bool,
    /// `cdcl`, `twosat` or `external:<path>`.
    #[arg(long, default_value = "cdcl", value_parser = parse_solver)]
    solver: SolverKind,
    /// Record CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Record CSV written by `bench`.
    records: PathBuf,
    /// Output directory for ratios.csv, thresholds.csv and matrix CSVs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Matrix metrics, comma separated.
    #[arg(long, default_value = "sat_ratio,mean_wall_time,mean_proof_clauses,mean_max_proof_len")]
    metric: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a, cli.verbose),
        Command::Check(a) => cmd_check(a),
        Command::Bench(a) => cmd_bench(a, cli.verbose),
        Command::Analyze(a) => cmd_analyze(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse::<Model>().map_err(|_| format!("expected `uniform` or `geometric`, got {s:?}"))
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    match s {
        "cdcl" => Ok(SolverKind::InternalCdcl),
        "twosat" => Ok(SolverKind::Internal2Sat),
        _ => match s.strip_prefix("external:") {
            Some(path) if !path.is_empty() => Ok(SolverKind::External(ExternalSolver::new(path))),
            _ => Err(format!("expected `cdcl`, `twosat` or `external:<path>`, got {s:?}")),
        },
    }
}

fn timeout(seconds: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(seconds).map_err(|_| anyhow!("invalid timeout {seconds}"))
}

/// Parses `a,b,c` or the inclusive range `start:end:step`.
fn parse_reals(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((start, rest)) = text.split_once(':') {
        let (end, step) = rest.split_once(':').ok_or_else(|| anyhow!("range {text:?} needs start:end:step"))?;
        let (start, end, step): (f64, f64, f64) = (start.trim().parse()?, end.trim().parse()?, step.trim().parse()?);
        if step.is_nan() || step <= 0.0 || end < start {
            bail!("range {text:?} needs a positive step and end >= start");
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect());
    }
    let values = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty list");
    }
    Ok(values)
}

fn parse_integers<T: TryFrom<u64>>(text: &str) -> Result<Vec<T>> {
    parse_reals(text)?
        .into_iter()
        .map(|v| {
            if v.fract() != 0.0 || v < 0.0 {
                bail!("{v} is not a non-negative integer");
            }
            T::try_from(v as u64).map_err(|_| anyhow!("{v} is out of range"))
        })
        .collect()
}

fn parse_dimensions(text: &str) -> Result<Vec<Option<u32>>> {
    let mut dims = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if part == "uniform" {
            dims.push(None);
        } else {
            dims.extend(parse_integers::<u32>(part)?.into_iter().map(Some));
        }
    }
    if dims.is_empty() {
        bail!("empty dimension list");
    }
    Ok(dims)
}

fn read_formula(path: &Path) -> Result<Formula> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_dimacs(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

fn instance_file_name(params: &GenParams, master_seed: u64, index: u64) -> String {
    let dim = params.dimension.map_or(String::new(), |d| format!("_d{d}"));
    format!(
        "inst_{}_k{}_n{}_m{}{}_s{}_i{}.cnf",
        params.model, params.k, params.n, params.m, dim, master_seed, index
    )
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let m = match (args.m, args.density) {
        (Some(m), _) => m,
        (None, Some(d)) if d.is_finite() && d >= 0.0 => clauses_for_density(d, args.n),
        (None, Some(d)) => bail!("invalid density {d}"),
        (None, None) => bail!("one of --m or --density is required"),
    };
    let master = args.seed.seed;
    println!("c master seed {master}");
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    for i in 0..args.count {
        let seed = derive_instance_seed(master, i);
        let params = match (args.model, args.dim) {
            (Model::Geometric, Some(d)) => GenParams::geometric(args.k, args.n, m, d, seed),
            (Model::Geometric, None) => bail!("the geometric model needs --dim"),
            (Model::Uniform, None) => GenParams::uniform(args.k, args.n, m, seed),
            (Model::Uniform, Some(_)) => bail!("--dim only applies to the geometric model"),
        };
        let (formula, _) = generate(&params)?;
        let path = args.out.join(instance_file_name(&params, master, i));
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
        write_dimacs(&formula, &mut w)?;
        w.flush()?;
        println!("{}\tseed={seed}", path.display());
    }
    Ok(0)
}

fn print_model(values: &[bool]) {
    let lits: Vec<String> =
        values.iter().enumerate().map(|(i, &v)| if v { format!("{}", i + 1) } else { format!("-{}", i + 1) }).collect();
    for chunk in lits.chunks(20) {
        println!("v {}", chunk.join(" "));
    }
    println!("v 0");
}

fn cmd_solve(args: SolveArgs, verbose: u8) -> Result<u8> {
    let formula = read_formula(&args.instance)?;
    let limit = timeout(args.timeout_s)?;
    println!("c seed {}", args.seed.seed);
    let verdict = match &args.solver {
        SolverKind::InternalCdcl => {
            let config = SolverConfig { seed: args.seed.seed, emit_proof: args.proof.is_some(), ..SolverConfig::default() }
                .with_time_limit(limit);
            let outcome = solve_cdcl(&formula, &config);
            if verbose > 0 {
                let s = outcome.stats;
                eprintln!(
                    "c decisions {} conflicts {} propagations {} time {:.3}s",
                    s.decisions,
                    s.conflicts,
                    s.propagations,
                    outcome.wall_time.as_secs_f64()
                );
            }
            outcome.verdict
        }
        SolverKind::Internal2Sat => solve_2sat(&formula)?.verdict,
        SolverKind::External(solver) => {
            let run = harness::run_external_solver(solver, &args.instance, args.proof.as_deref(), limit);
            if let Some(note) = &run.note {
                eprintln!("c {note}");
            }
            return Ok(match run.verdict {
                RecordVerdict::Sat => {
                    println!("s SATISFIABLE");
                    EXIT_SAT
                }
                RecordVerdict::Unsat => {
                    println!("s UNSATISFIABLE");
                    EXIT_UNSAT
                }
                RecordVerdict::Timeout => {
                    println!("s UNKNOWN");
                    0
                }
                RecordVerdict::Error => bail!("external solver failed"),
            });
        }
    };
    Ok(match verdict {
        Verdict::Satisfiable(model) => {
            println!("s SATISFIABLE");
            print_model(model.values());
            EXIT_SAT
        }
        Verdict::Unsatisfiable(proof) => {
            if let (Some(path), Some(proof)) = (&args.proof, proof) {
                let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
                write_drat(&proof, &mut w)?;
                w.flush()?;
            }
            println!("s UNSATISFIABLE");
            EXIT_UNSAT
        }
        Verdict::Timeout => {
            println!("s UNKNOWN");
            0
        }
    })
}

fn cmd_check(args: CheckArgs) -> Result<u8> {
    let formula = read_formula(&args.instance)?;
    let file = File::open(&args.proof).with_context(|| format!("cannot open {}", args.proof.display()))?;
    let proof = read_drat(BufReader::new(file)).with_context(|| format!("cannot parse {}", args.proof.display()))?;
    let m = compute_proof_metrics(&proof);
    println!(
        "c steps {} additions {} deletions {} literals {} max_clause_length {}",
        m.total_clauses, m.additions, m.deletions, m.total_literals, m.max_clause_length
    );
    let report = check_rup_proof_with(&formula, &proof, args.lenient);
    if report.ignored_deletions > 0 {
        println!("c ignored {} deletions of absent clauses", report.ignored_deletions);
    }
    if report.valid {
        println!("s VERIFIED");
        return Ok(0);
    }
    let reason = report.reason.map_or(String::new(), |r| r.to_string());
    match report.failing_step {
        Some(step) => println!("s REJECTED step {step} {reason}"),
        None => println!("s REJECTED {reason}"),
    }
    Ok(EXIT_REJECTED)
}

fn cmd_bench(args: BenchArgs, verbose: u8) -> Result<u8> {
    let clause_counts = match (&args.m, &args.density) {
        (Some(m), _) => ClauseCounts::Absolute(parse_integers(m).context("--m")?),
        (None, Some(d)) => ClauseCounts::Densities(parse_reals(d).context("--density")?),
        (None, None) => bail!("one of --m or --density is required"),
    };
    let grid = ExperimentGrid {
        ks: parse_integers(&args.k).context("--k")?,
        ns: parse_integers(&args.n).context("--n")?,
        clause_counts,
        dimensions: parse_dimensions(&args.dim).context("--dim")?,
        instances_per_cell: args.count,
        master_seed: args.seed.seed,
        solver: args.solver,
        timeout: timeout(args.timeout_s)?,
        emit_proof: args.proof,
        check_proofs: true,
    };
    grid.validate()?;
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let info = format!("c master seed {} cells {} threads {threads}", grid.master_seed, grid.cells().len());
    if args.out.is_some() {
        println!("{info}");
    } else {
        eprintln!("{info}");
    }
    let records = harness::run_experiment(&grid, threads)?;
    if verbose > 0 {
        let count = |v| records.iter().filter(|r| r.verdict == v).count();
        eprintln!(
            "c SAT {} UNSAT {} TIMEOUT {} ERROR {}",
            count(RecordVerdict::Sat),
            count(RecordVerdict::Unsat),
            count(RecordVerdict::Timeout),
            count(RecordVerdict::Error)
        );
    }
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            harness::persist_records(&records, BufWriter::new(file))?;
        }
        None => harness::persist_records(&records, io::stdout().lock())?,
    }
    Ok(0)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8> {
    let metrics = args
        .metric
        .split(',')
        .map(|s| s.trim().parse::<Metric>())
        .collect::<Result<Vec<_>, _>>()?;
    let file = File::open(&args.records).with_context(|| format!("cannot open {}", args.records.display()))?;
    let records = harness::load_records(BufReader::new(file))?;
    if records.is_empty() {
        bail!("{} holds no records", args.records.display());
    }
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let create = |name: &str| -> Result<BufWriter<File>> {
        let path = args.out.join(name);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        println!("{}", path.display());
        Ok(BufWriter::new(file))
    };
    analysis::write_ratio_table(&records, create("ratios.csv")?)?;
    let estimates = analysis::threshold_estimates(&records);
    analysis::write_threshold_table(&estimates, create("thresholds.csv")?)?;

    let mut kn: Vec<(usize, u32)> = records.iter().map(|r| (r.k, r.n)).collect();
    kn.sort_unstable();
    kn.dedup();
    for (k, n) in kn {
        let subset: Vec<_> = records.iter().filter(|r| r.k == k && r.n == n).cloned().collect();
        for &metric in &metrics {
            analysis::matrix_export(&subset, metric).write_csv(create(&format!("matrix_{metric}_k{k}_n{n}.csv"))?)?;
        }
    }
    for e in &estimates {
        eprintln!("c {} critical density {} (ratio {:.3})", e.group, e.critical_density, e.ratio_at_estimate);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_reals("1:2:0.25").unwrap(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(parse_reals("0.9:1.2:0.02").unwrap().len(), 16);
        assert_eq!(parse_reals("3, 4.5").unwrap(), vec![3.0, 4.5]);
        assert!(parse_reals("").is_err());
        assert!(parse_reals("2:1:0.5").is_err());
        assert_eq!(parse_integers::<u32>("1:7:1").unwrap(), (1..=7).collect::<Vec<_>>());
        assert!(parse_integers::<u32>("1.5").is_err());
        assert_eq!(parse_dimensions("1,3,uniform").unwrap(), vec![Some(1), Some(3), None]);
    }

    #[test]
    fn solver_names() {
        assert_eq!(parse_solver("cdcl").unwrap(), SolverKind::InternalCdcl);
        assert!(matches!(parse_solver("external:/bin/kissat").unwrap(), SolverKind::External(_)));
        assert!(parse_solver("external:").is_err());
        assert!(parse_solver("minisat").is_err());
    }

    #[test]
    fn file_names() {
        assert_eq!(instance_file_name(&GenParams::uniform(3, 20, 60, 9), 4, 1), "inst_uniform_k3_n20_m60_s4_i1.cnf");
        assert_eq!(
            instance_file_name(&GenParams::geometric(3, 20, 60, 2, 9), 4, 0),
            "inst_geometric_k3_n20_m60_d2_s4_i0.cnf"
        );
    }
}
