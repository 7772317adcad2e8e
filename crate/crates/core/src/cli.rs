//! Command-line front end.
//!
//! Exit codes: 0 success, 2 infeasible or no solution, 1 usage or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{self, SuiteSpec};
use crate::construct::ConstructConfig;
use crate::exact::{self, mps, BnbOptions, SearchBudget, SolveOutcome};
use crate::fixtures;
use crate::ils::{self, IlsConfig};
use crate::instgen::{self, ConsumptionKind, GenParams, InstanceMeta, PvShape};
use crate::model::{Instance, Schedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;

/// Environment variable equivalent to `--deterministic`.
pub const DETERMINISTIC_ENV: &str = "VOLT_SCHED_DETERMINISTIC";

#[derive(Debug, Parser)]
#[command(name = "volt-sched", version, about = "Energy-aware parallel machine scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a fixed/variable instance pair, or write a built-in fixture.
    Generate(GenerateArgs),
    /// Solve an instance.
    Solve(SolveArgs),
    /// Cost and feasibility of a solution.
    Evaluate(EvaluateArgs),
    /// Replay a fixed-consumption solution on the variable twin.
    CrossEval(CrossEvalArgs),
    /// Write the time-indexed model as MPS.
    ExportMps(ExportMpsArgs),
    /// Run a suite file and write CSV results.
    Bench(BenchArgs),
    /// Energy profile and Gantt chart as SVG plus CSV.
    Plot(PlotArgs),
}

#[derive(Debug, clap::Args)]
struct GenerateArgs {
    #[arg(long, required_unless_present = "fixture")]
    num_jobs: Option<usize>,
    #[arg(long, required_unless_present = "fixture")]
    num_machines: Option<usize>,
    #[arg(long, default_value_t = 96)]
    num_slots: usize,
    #[arg(long, required_unless_present = "fixture")]
    saturation: Option<f64>,
    #[arg(long, required_unless_present = "fixture")]
    seed: Option<u64>,
    /// PV production at the peak hour (kWh/h).
    #[arg(long, default_value_t = 250.0)]
    pv_peak: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File name prefix; files are `<prefix>-fixed.json` and `<prefix>-variable.json`.
    #[arg(long, default_value = "instance")]
    prefix: String,
    /// Write a built-in fixture (fig1-variable, fig3-fixed, ...) instead.
    #[arg(long, conflicts_with_all = ["num_jobs", "num_machines", "saturation"])]
    fixture: Option<String>,
    /// Output file for `--fixture`.
    #[arg(long, requires = "fixture")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ils,
    Exact,
    Oracle,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    /// Instance file, or `fixture:<name>`.
    instance: String,
    #[arg(long, value_enum, default_value_t = Method::Ils)]
    method: Method,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budgets instead of wall clock.
    #[arg(long)]
    deterministic: bool,
    /// Node limit for `--method exact`.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Consecutive non-improving ILS iterations before stopping.
    #[arg(long)]
    max_noimprove: Option<usize>,
    /// Solution file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run report (JSON) to write.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolutionFormat {
    Json,
    /// Lines of `X_j_i_t value` from an external solver.
    X,
}

#[derive(Debug, clap::Args)]
struct EvaluateArgs {
    instance: String,
    solution: PathBuf,
    #[arg(long, value_enum, default_value_t = SolutionFormat::Json)]
    format: SolutionFormat,
}

#[derive(Debug, clap::Args)]
struct CrossEvalArgs {
    /// Fixed-consumption instance the solution was built for.
    #[arg(long)]
    fixed: String,
    #[arg(long)]
    solution: PathBuf,
    /// Variable-consumption twin.
    #[arg(long)]
    variable: String,
}

#[derive(Debug, clap::Args)]
struct ExportMpsArgs {
    instance: String,
    #[arg(long)]
    out: PathBuf,
    /// Pin the assignments of this solution file.
    #[arg(long)]
    fix: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    suite: PathBuf,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-group means as CSV.
    #[arg(long)]
    aggregate: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, clap::Args)]
struct PlotArgs {
    instance: String,
    solution: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

struct Failure {
    code: i32,
    message: String,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn dispatch_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::CrossEval(a) => cross_eval(a, out),
        Command::ExportMps(a) => export_mps(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Plot(a) => plot(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Money with at most six decimals and no trailing zeros.
pub fn format_eur(value: f64) -> String {
    let s = format!("{value:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn load_instance(spec: &str) -> Result<Instance, Failure> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixtures::by_name(name).ok_or_else(|| Failure {
            code: EXIT_ERROR,
            message: format!("unknown fixture `{name}`; known: {}", fixtures::NAMES.join(", ")),
        });
    }
    Ok(instgen::read_instance(Path::new(spec))?)
}

fn env_deterministic() -> bool {
    std::env::var(DETERMINISTIC_ENV).is_ok_and(|v| v == "1" || v.eq_ignore_ascii_case("true"))
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CmdResult {
    if let Some(name) = a.fixture {
        let inst = load_instance(&format!("fixture:{name}"))?;
        let path = a.out.unwrap_or_else(|| a.out_dir.join(format!("{name}.json")));
        let meta = InstanceMeta {
            consumption: Some(if name.ends_with("fixed") {
                ConsumptionKind::Fixed
            } else {
                ConsumptionKind::Variable
            }),
            ..InstanceMeta::default()
        };
        instgen::write_instance(&inst, &meta, &path)?;
        writeln!(out, "{}", path.display())?;
        return Ok(EXIT_OK);
    }
    let seed = a.seed.expect("required by clap");
    let params = GenParams {
        pv: PvShape {
            peak: a.pv_peak,
            ..PvShape::default()
        },
        ..GenParams::new(
            a.num_jobs.expect("required by clap"),
            a.num_machines.expect("required by clap"),
            a.num_slots,
            a.saturation.expect("required by clap"),
            seed,
        )
    };
    let base = instgen::generate_base(&params)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| format!("{}: {e}", a.out_dir.display()))?;
    let fixed_path = a.out_dir.join(format!("{}-fixed.json", a.prefix));
    let variable_path = a.out_dir.join(format!("{}-variable.json", a.prefix));
    instgen::write_instance(
        &instgen::derive_fixed(&base),
        &InstanceMeta::generated(&base, ConsumptionKind::Fixed),
        &fixed_path,
    )?;
    instgen::write_instance(
        &instgen::derive_variable(&base, instgen::variable_seed(seed)),
        &InstanceMeta::generated(&base, ConsumptionKind::Variable),
        &variable_path,
    )?;
    writeln!(out, "{}\n{}", fixed_path.display(), variable_path.display())?;
    Ok(EXIT_OK)
}

fn exact_report(outcome: &SolveOutcome) -> serde_json::Value {
    json!({
        "status": outcome.status,
        "z_ub": outcome.z_ub,
        "z_lb": outcome.z_lb,
        "runtime_s": outcome.runtime_s,
        "nodes": outcome.nodes,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn finish_solution(inst: &Instance, schedule: &Schedule, out_path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    writeln!(out, "tec_eur: {}", format_eur(inst.evaluate_tec(schedule)?))?;
    if let Some(path) = out_path {
        instgen::write_solution(inst, schedule, path)?;
    }
    Ok(())
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let deterministic = a.deterministic || env_deterministic();
    match a.method {
        Method::Oracle | Method::Exact => {
            let outcome = if a.method == Method::Oracle {
                exact::oracle_enumerate(&inst)?
            } else {
                let jobs: Vec<usize> = (0..inst.num_jobs()).collect();
                let budget = SearchBudget {
                    time_limit: if deterministic {
                        None
                    } else {
                        a.time_limit.map(Duration::from_secs_f64)
                    },
                    node_limit: a.node_limit,
                };
                exact::branch_and_bound(
                    &inst,
                    &jobs,
                    &Schedule::new(),
                    &BnbOptions {
                        budget,
                        ..BnbOptions::unlimited()
                    },
                )
            };
            writeln!(out, "status: {}", outcome.status)?;
            if let Some(report) = &a.report {
                write_json(report, &exact_report(&outcome))?;
            }
            match &outcome.incumbent {
                Some(schedule) => {
                    finish_solution(&inst, schedule, a.out.as_deref(), out)?;
                    if let Some(lb) = outcome.z_lb {
                        writeln!(out, "z_lb: {}", format_eur(lb))?;
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(out, "no solution found")?;
                    Ok(EXIT_NO_SOLUTION)
                }
            }
        }
        Method::Ils => {
            let mut cfg = if deterministic {
                IlsConfig::deterministic(a.seed)
            } else {
                IlsConfig {
                    seed: a.seed,
                    construct: ConstructConfig {
                        seed: a.seed,
                        ..ConstructConfig::default()
                    },
                    ..IlsConfig::default()
                }
            };
            if let Some(t) = a.time_limit {
                cfg.time_limit = Duration::from_secs_f64(t);
            }
            if let Some(k) = a.max_noimprove {
                cfg.max_noimprove_iters = k;
            }
            match ils::run_ils(&inst, &cfg) {
                Ok(report) => {
                    writeln!(out, "status: feasible")?;
                    finish_solution(&inst, &report.best, a.out.as_deref(), out)?;
                    if let Some(path) = &a.report {
                        let mut value = serde_json::to_value(&report)?;
                        value["assignments"] = serde_json::to_value(
                            report
                                .best
                                .iter()
                                .map(|(job, asg)| json!({"job": job, "machine": asg.machine, "start": asg.start}))
                                .collect::<Vec<_>>(),
                        )?;
                        write_json(path, &value)?;
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(out, "{e}")?;
                    if let Some(path) = &a.report {
                        write_json(path, &json!({"status": "no_solution", "constructive_log": e.log}))?;
                    }
                    Ok(EXIT_NO_SOLUTION)
                }
            }
        }
    }
}

fn read_any_solution(path: &Path, format: SolutionFormat, inst: &Instance) -> Result<Schedule, Failure> {
    match format {
        SolutionFormat::Json => Ok(instgen::read_solution(path, inst)?),
        SolutionFormat::X => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            mps::parse_x_solution(&text, inst).map_err(|e| Failure::from(format!("{}: {e}", path.display())))
        }
    }
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let schedule = read_any_solution(&a.solution, a.format, &inst)?;
    let verdict = inst.check_feasibility(&schedule, true);
    match inst.evaluate_tec(&schedule) {
        Ok(z) => writeln!(out, "tec_eur: {}", format_eur(z))?,
        Err(e) => writeln!(out, "tec_eur: n/a ({e})")?,
    }
    writeln!(out, "feasible: {}", verdict.feasible)?;
    for (t, excess) in &verdict.violations {
        writeln!(out, "violation: slot {t} exceeds budget by {excess} kWh")?;
    }
    for (m, t) in &verdict.overlaps {
        writeln!(out, "overlap: machine {m} slot {t}")?;
    }
    if !verdict.unscheduled.is_empty() {
        let ids: Vec<String> = verdict.unscheduled.iter().map(|j| j.to_string()).collect();
        writeln!(out, "unscheduled: {}", ids.join(" "))?;
    }
    Ok(if verdict.feasible { EXIT_OK } else { EXIT_NO_SOLUTION })
}

fn cross_eval(a: CrossEvalArgs, out: &mut dyn Write) -> CmdResult {
    let fixed = load_instance(&a.fixed)?;
    let variable = load_instance(&a.variable)?;
    let schedule = instgen::read_solution(&a.solution, &fixed)?;
    let report = bench::cross_evaluate(&fixed, &schedule, &variable)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_OK)
}

fn export_mps(a: ExportMpsArgs, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let fixings = match &a.fix {
        Some(path) => instgen::read_solution(path, &inst)?,
        None => Schedule::new(),
    };
    let model = exact::build_tif(&inst, &fixings)?;
    mps::export_mps(&model, &a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    writeln!(
        out,
        "{}: {} variables ({} binary), {} rows",
        a.out.display(),
        model.variables.len(),
        model.num_x(),
        model.rows.len()
    )?;
    Ok(EXIT_OK)
}

fn bench_cmd(a: BenchArgs, out: &mut dyn Write) -> CmdResult {
    let spec = SuiteSpec::read(&a.suite)?;
    let rows = bench::run_suite(&spec, a.jobs);
    let csv = bench::rows_to_csv(&rows);
    match &a.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => write!(out, "{csv}")?,
    }
    if let Some(path) = &a.aggregate {
        std::fs::write(path, bench::aggregate_to_csv(&bench::aggregate(&rows)))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn plot(a: PlotArgs, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let schedule = instgen::read_solution(&a.solution, &inst)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| format!("{}: {e}", a.out_dir.display()))?;
    let energy = a.out_dir.join("energy_profile.svg");
    let gantt = a.out_dir.join("gantt.svg");
    bench::emit_energy_profile(&inst, &schedule, &energy)?;
    bench::emit_gantt(&inst, &schedule, &gantt)?;
    writeln!(out, "{}\n{}", energy.display(), gantt.display())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = dispatch_with(std::iter::once("volt-sched").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn money_formatting() {
        assert_eq!(format_eur(0.24000000000000002), "0.24");
        assert_eq!(format_eur(18.0), "18");
        assert_eq!(format_eur(-0.0000001), "0");
        assert_eq!(format_eur(-12.5), "-12.5");
    }

    #[test]
    fn oracle_on_fixture() {
        let (code, out, _) = run(&["solve", "fixture:fig3-variable", "--method", "oracle"]);
        assert_eq!(code, 0);
        assert!(out.contains("tec_eur: 0.24\n"), "{out}");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run(&["solve", "fixture:fig3-variable", "--bogus"]);
        assert_eq!(code, 1);
        assert!(err.contains("Usage"), "{err}");
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("generate"));
    }
}
