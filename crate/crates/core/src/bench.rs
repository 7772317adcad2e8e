//! Experiment harness: gap metrics, replay of fixed-consumption schedules on
//! their variable twins, suite runs with CSV output, and SVG/CSV plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, BnbOptions, SearchBudget};
use crate::fixtures;
use crate::ils::{self, IlsConfig};
use crate::instgen::{self, ConsumptionKind, GenParams};
use crate::model::{Instance, ModelError, Schedule};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unpaired instances: {0}")]
    Unpaired(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("suite: {0}")]
    Suite(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GapMetrics {
    pub z_ub: Option<f64>,
    pub z_lb: Option<f64>,
    pub z_heur: Option<f64>,
    /// `100·(z − z_lb)/z_lb` with `z = z_heur` when present, else `z_ub`.
    pub pct_gap: Option<f64>,
    /// `100·(z_heur − z_ub)/z_ub`.
    pub pct_imp: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den.abs() > 1e-12).then(|| 100.0 * num / den)
}

pub fn gap_metrics(z_ub: Option<f64>, z_lb: Option<f64>, z_heur: Option<f64>) -> GapMetrics {
    let primal = z_heur.or(z_ub);
    let pct_gap = match (primal, z_lb) {
        (Some(z), Some(lb)) => ratio(z - lb, lb),
        _ => None,
    };
    let pct_imp = match (z_heur, z_ub) {
        (Some(h), Some(ub)) => ratio(h - ub, ub),
        _ => None,
    };
    GapMetrics {
        z_ub,
        z_lb,
        z_heur,
        pct_gap,
        pct_imp,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfeasReport {
    /// `max(0, load − E)` per slot (kWh).
    pub excess: Vec<f64>,
    pub min_inf: f64,
    pub avg_inf: f64,
    pub max_inf: f64,
    pub total_inf: f64,
    pub pct_inf_e: f64,
    pub pct_inf_t: f64,
}

impl InfeasReport {
    pub fn from_load(load: &[f64], budget: f64) -> Self {
        let excess: Vec<f64> = load.iter().map(|l| (l - budget).max(0.0)).collect();
        let positive: Vec<f64> = excess.iter().copied().filter(|e| *e > 0.0).collect();
        let total_inf: f64 = excess.iter().sum();
        let total_load: f64 = load.iter().sum();
        let (min_inf, avg_inf, max_inf) = if positive.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            (
                positive.iter().copied().fold(f64::INFINITY, f64::min),
                positive.iter().sum::<f64>() / positive.len() as f64,
                positive.iter().copied().fold(0.0, f64::max),
            )
        };
        Self {
            min_inf,
            avg_inf,
            max_inf,
            total_inf,
            pct_inf_e: if total_load > 0.0 { total_inf / total_load } else { 0.0 },
            pct_inf_t: if load.is_empty() {
                0.0
            } else {
                positive.len() as f64 / load.len() as f64
            },
            excess,
        }
    }
}

/// Checks that two instances differ only in their consumption weights, with
/// equal processing times and per-job total weight.
pub fn check_paired(fixed: &Instance, variable: &Instance) -> Result<(), BenchError> {
    let unpaired = |what: &str| Err(BenchError::Unpaired(what.to_string()));
    if fixed.num_jobs() != variable.num_jobs() {
        return unpaired("job counts differ");
    }
    if fixed.machines() != variable.machines() {
        return unpaired("machines differ");
    }
    if fixed.grid() != variable.grid()
        || fixed.buy_cost() != variable.buy_cost()
        || fixed.sell_price() != variable.sell_price()
        || fixed.pv_supply() != variable.pv_supply()
        || fixed.budget() != variable.budget()
    {
        return unpaired("time grid, prices, PV or budget differ");
    }
    for (a, b) in fixed.jobs().iter().zip(variable.jobs()) {
        if a.processing_time != b.processing_time {
            return Err(BenchError::Unpaired(format!("job {} has different processing times", a.id)));
        }
        if (a.total_weight() - b.total_weight()).abs() > 1e-9 * a.total_weight().max(1.0) {
            return Err(BenchError::Unpaired(format!("job {} has different total energy", a.id)));
        }
    }
    Ok(())
}

/// Replays a schedule built for `fixed` on its variable twin.
pub fn cross_evaluate(fixed: &Instance, schedule: &Schedule, variable: &Instance) -> Result<InfeasReport, BenchError> {
    check_paired(fixed, variable)?;
    if !schedule.is_complete(variable) {
        return Err(BenchError::Model(ModelError::PartialSchedule {
            missing: variable.num_jobs() - schedule.len().min(variable.num_jobs()),
            total: variable.num_jobs(),
        }));
    }
    let profile = variable.energy_profile(schedule)?;
    Ok(InfeasReport::from_load(&profile.load, variable.budget()))
}

/// Where a suite instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    Generated {
        generate: GenParams,
        consumption: ConsumptionKind,
    },
    File {
        path: PathBuf,
    },
    Fixture {
        fixture: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteInstance {
    pub id: String,
    #[serde(flatten)]
    pub source: InstanceSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ils,
    Exact,
    Oracle,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ils => "ils",
            Self::Exact => "exact",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub solver: SolverKind,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub node_limit: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub max_noimprove_iters: Option<usize>,
}

impl SolverSpec {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            solver,
            time_limit_s: None,
            node_limit: None,
            seed: 0,
            deterministic: false,
            max_noimprove_iters: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteSpec {
    #[serde(default)]
    pub instances: Vec<SuiteInstance>,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
}

impl SuiteSpec {
    pub fn read(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut spec: Self = serde_json::from_str(&text)
            .map_err(|e| BenchError::Suite(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for inst in &mut spec.instances {
            if let InstanceSource::File { path } = &mut inst.source {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub instance_id: String,
    pub seed: Option<u64>,
    pub consumption: String,
    pub solver: String,
    pub status: String,
    pub z_ub: Option<f64>,
    pub z_lb: Option<f64>,
    pub z_heur: Option<f64>,
    pub pct_gap: Option<f64>,
    pub pct_imp: Option<f64>,
    pub time_s: f64,
    pub inc_time_s: Option<f64>,
    /// `(|T|, |J|, |I|)`, absent when the instance failed to load.
    #[serde(skip)]
    pub group: Option<(usize, usize, usize)>,
}

pub const CSV_HEADER: &str =
    "instance_id,seed,consumption,solver,status,z_ub,z_lb,z_heur,pct_gap,pct_imp,time_s,inc_time_s";

fn load_source(source: &InstanceSource) -> Result<(Instance, Option<u64>, String), String> {
    match source {
        InstanceSource::Generated { generate, consumption } => {
            let base = instgen::generate_base(generate).map_err(|e| e.to_string())?;
            let inst = match consumption {
                ConsumptionKind::Fixed => instgen::derive_fixed(&base),
                ConsumptionKind::Variable => instgen::derive_variable(&base, instgen::variable_seed(generate.seed)),
            };
            Ok((inst, Some(generate.seed), consumption.to_string()))
        }
        InstanceSource::File { path } => {
            let (inst, meta) = instgen::read_instance_with_meta(path).map_err(|e| e.to_string())?;
            let kind = meta.consumption.map_or_else(|| "unknown".to_string(), |k| k.to_string());
            Ok((inst, meta.seed, kind))
        }
        InstanceSource::Fixture { fixture } => {
            let inst = fixtures::by_name(fixture).ok_or_else(|| format!("unknown fixture {fixture}"))?;
            let kind = if fixture.ends_with("fixed") { "fixed" } else { "variable" };
            Ok((inst, None, kind.to_string()))
        }
    }
}

fn exact_budget(spec: &SolverSpec) -> SearchBudget {
    SearchBudget {
        time_limit: spec.time_limit_s.map(Duration::from_secs_f64),
        node_limit: spec.node_limit,
    }
}

fn solve_row(inst: &Instance, spec: &SolverSpec) -> (String, Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    match spec.solver {
        SolverKind::Oracle => match exact::oracle_enumerate(inst) {
            Ok(out) => (out.status.to_string(), out.z_ub, out.z_lb, None, Some(out.runtime_s)),
            Err(e) => (format!("error: {e}"), None, None, None, None),
        },
        SolverKind::Exact => {
            let jobs: Vec<usize> = (0..inst.num_jobs()).collect();
            let opts = BnbOptions {
                budget: exact_budget(spec),
                ..BnbOptions::unlimited()
            };
            let out = exact::branch_and_bound(inst, &jobs, &Schedule::new(), &opts);
            (out.status.to_string(), out.z_ub, out.z_lb, None, Some(out.runtime_s))
        }
        SolverKind::Ils => {
            let mut cfg = if spec.deterministic {
                IlsConfig::deterministic(spec.seed)
            } else {
                IlsConfig {
                    seed: spec.seed,
                    construct: crate::construct::ConstructConfig {
                        seed: spec.seed,
                        ..Default::default()
                    },
                    ..IlsConfig::default()
                }
            };
            if let Some(t) = spec.time_limit_s {
                cfg.time_limit = Duration::from_secs_f64(t);
            }
            if let Some(k) = spec.max_noimprove_iters {
                cfg.max_noimprove_iters = k;
            }
            match ils::run_ils(inst, &cfg) {
                Ok(report) => ("feasible".to_string(), None, None, Some(report.z_heur), Some(report.incumbent_time_s)),
                Err(e) => (e.to_string().replace(' ', "_"), None, None, None, None),
            }
        }
    }
}

/// Runs every solver on every instance. Failures become rows; nothing aborts.
///
/// Heuristic rows take `z_ub` and `z_lb` from an exact or oracle row of the
/// same instance when the suite has one.
pub fn run_suite(spec: &SuiteSpec, threads: usize) -> Vec<SuiteRow> {
    let work = || {
        spec.instances
            .par_iter()
            .map(|si| run_instance(si, &spec.solvers))
            .collect::<Vec<_>>()
    };
    let per_instance = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    per_instance.into_iter().flatten().collect()
}

fn run_instance(si: &SuiteInstance, solvers: &[SolverSpec]) -> Vec<SuiteRow> {
    let loaded = load_source(&si.source);
    let mut rows: Vec<SuiteRow> = solvers
        .iter()
        .map(|spec| {
            let started = Instant::now();
            let (status, seed, consumption, group, z_ub, z_lb, z_heur, inc) = match &loaded {
                Ok((inst, seed, kind)) => {
                    let (status, ub, lb, heur, inc) = solve_row(inst, spec);
                    let group = (inst.num_slots(), inst.num_jobs(), inst.num_machines());
                    (status, *seed, kind.clone(), Some(group), ub, lb, heur, inc)
                }
                Err(e) => (format!("error: {e}"), None, String::new(), None, None, None, None, None),
            };
            SuiteRow {
                instance_id: si.id.clone(),
                seed,
                consumption,
                solver: spec.solver.as_str().to_string(),
                status,
                z_ub,
                z_lb,
                z_heur,
                pct_gap: None,
                pct_imp: None,
                time_s: started.elapsed().as_secs_f64(),
                inc_time_s: inc,
                group,
            }
        })
        .collect();

    let reference = rows
        .iter()
        .filter(|r| r.solver == "exact" || r.solver == "oracle")
        .find(|r| r.z_ub.is_some())
        .map(|r| (r.z_ub, r.z_lb));
    for row in &mut rows {
        if row.z_heur.is_some() {
            if let Some((ub, lb)) = reference {
                row.z_ub = ub;
                row.z_lb = lb;
            }
        }
        let g = gap_metrics(row.z_ub, row.z_lb, row.z_heur);
        row.pct_gap = g.pct_gap;
        row.pct_imp = g.pct_imp;
    }
    rows
}

fn csv_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[SuiteRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_text(&r.instance_id),
            r.seed.map_or_else(String::new, |s| s.to_string()),
            csv_text(&r.consumption),
            r.solver,
            csv_text(&r.status),
            csv_num(r.z_ub),
            csv_num(r.z_lb),
            csv_num(r.z_heur),
            csv_num(r.pct_gap),
            csv_num(r.pct_imp),
            r.time_s,
            csv_num(r.inc_time_s),
        );
    }
    out
}

/// Means over the rows of one `(|T|, |J|, |I|)` group and solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub num_slots: usize,
    pub num_jobs: usize,
    pub num_machines: usize,
    pub solver: String,
    pub rows: usize,
    pub feasible: usize,
    pub optimal: usize,
    pub pct_gap: Option<f64>,
    pub pct_imp: Option<f64>,
    pub time_s: f64,
    pub inc_time_s: Option<f64>,
}

pub const AGGREGATE_HEADER: &str = "num_slots,num_jobs,num_machines,solver,rows,feasible,optimal,pct_gap,pct_imp,time_s,inc_time_s";

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

pub fn aggregate(rows: &[SuiteRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<((usize, usize, usize), String), Vec<&SuiteRow>> = BTreeMap::new();
    for r in rows {
        if let Some(g) = r.group {
            groups.entry((g, r.solver.clone())).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|(((t, j, i), solver), members)| AggregateRow {
            num_slots: t,
            num_jobs: j,
            num_machines: i,
            solver,
            rows: members.len(),
            feasible: members.iter().filter(|r| r.z_heur.is_some() || r.status == "optimal" || r.status == "feasible").count(),
            optimal: members.iter().filter(|r| r.status == "optimal").count(),
            pct_gap: mean(members.iter().filter_map(|r| r.pct_gap)),
            pct_imp: mean(members.iter().filter_map(|r| r.pct_imp)),
            time_s: mean(members.iter().map(|r| r.time_s)).unwrap_or(0.0),
            inc_time_s: mean(members.iter().filter_map(|r| r.inc_time_s)),
        })
        .collect()
}

pub fn aggregate_to_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.num_slots,
            r.num_jobs,
            r.num_machines,
            r.solver,
            r.rows,
            r.feasible,
            r.optimal,
            csv_num(r.pct_gap),
            csv_num(r.pct_imp),
            r.time_s,
            csv_num(r.inc_time_s),
        );
    }
    out
}

fn companion_csv(svg: &Path) -> PathBuf {
    svg.with_extension("csv")
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn polyline(values: &[f64], y_max: f64, color: &str, dashed: bool) -> String {
    let n = values.len().max(1) as f64;
    let step = (WIDTH - 2.0 * MARGIN) / n;
    let mut points = String::new();
    for (t, v) in values.iter().enumerate() {
        let y = HEIGHT - MARGIN - v / y_max * (HEIGHT - 2.0 * MARGIN);
        let x0 = MARGIN + t as f64 * step;
        let _ = write!(points, "{x0:.2},{y:.2} {:.2},{y:.2} ", x0 + step);
    }
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    format!("  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>\n", points.trim_end())
}

/// Load, PV and budget per slot as SVG plus a CSV with the same numbers.
pub fn emit_energy_profile(instance: &Instance, schedule: &Schedule, path: &Path) -> Result<(), BenchError> {
    let profile = instance.energy_profile(schedule)?;
    let slots = instance.num_slots();
    let budget = vec![instance.budget(); slots];
    let y_max = profile
        .load
        .iter()
        .chain(instance.pv_supply())
        .copied()
        .fold(instance.budget(), f64::max)
        .max(1e-9)
        * 1.05;

    let mut svg = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    let _ = writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    let _ = writeln!(svg, "  <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>", HEIGHT - MARGIN);
    let _ = writeln!(svg, "  <text x=\"{MARGIN}\" y=\"30\" font-size=\"14\">Energy per slot (kWh), max {:.2}</text>", y_max / 1.05);
    svg.push_str(&polyline(&budget, y_max, "#d62728", true));
    svg.push_str(&polyline(instance.pv_supply(), y_max, "#ff7f0e", false));
    svg.push_str(&polyline(&profile.load, y_max, "#1f77b4", false));
    let legend = [("Energy budget", "#d62728"), ("Consumption", "#1f77b4"), ("Photovoltaic energy", "#ff7f0e")];
    for (k, (label, color)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{y}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            WIDTH - MARGIN - 140.0
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(io_err(path))?;

    let mut csv = String::from("slot,load_kwh,pv_kwh,budget_kwh,bought_kwh,sold_kwh\n");
    for t in 0..slots {
        let _ = writeln!(
            csv,
            "{t},{},{},{},{},{}",
            profile.load[t],
            instance.pv_supply()[t],
            instance.budget(),
            profile.bought[t],
            profile.sold[t]
        );
    }
    let csv_path = companion_csv(path);
    fs::write(&csv_path, csv).map_err(io_err(&csv_path))
}

/// One bar per job on its machine row, as SVG plus a CSV of the bars.
pub fn emit_gantt(instance: &Instance, schedule: &Schedule, path: &Path) -> Result<(), BenchError> {
    instance.validate_schedule(schedule)?;
    let slots = instance.num_slots().max(1) as f64;
    let rows = instance.num_machines().max(1) as f64;
    let step = (WIDTH - 2.0 * MARGIN) / slots;
    let row_h = (HEIGHT - 2.0 * MARGIN) / rows;
    let palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

    let mut svg = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    let _ = writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    for machine in 0..instance.num_machines() {
        let y = MARGIN + machine as f64 * row_h;
        let _ = writeln!(
            svg,
            "  <text x=\"5\" y=\"{:.2}\" font-size=\"12\">M{machine}</text>",
            y + row_h / 2.0
        );
    }
    let mut csv = String::from("job,machine,start,end\n");
    for (job, a) in schedule.iter() {
        let p = instance.processing_time(job);
        let x = MARGIN + a.start as f64 * step;
        let y = MARGIN + a.machine as f64 * row_h + 2.0;
        let _ = writeln!(
            svg,
            "  <rect class=\"job\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"black\"><title>job {job}</title></rect>",
            p as f64 * step,
            row_h - 4.0,
            palette[job % palette.len()]
        );
        let _ = writeln!(csv, "{job},{},{},{}", a.machine, a.start, a.start + p);
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(io_err(path))?;
    let csv_path = companion_csv(path);
    fs::write(&csv_path, csv).map_err(io_err(&csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_identities() {
        let g = gap_metrics(Some(110.0), Some(100.0), None);
        assert!((g.pct_gap.unwrap() - 10.0).abs() < 1e-12);
        assert!(g.pct_imp.is_none());
        let g = gap_metrics(Some(100.0), Some(80.0), Some(90.0));
        assert!((g.pct_gap.unwrap() - 12.5).abs() < 1e-12);
        assert!((g.pct_imp.unwrap() + 10.0).abs() < 1e-12);
        assert!(gap_metrics(Some(1.0), Some(0.0), None).pct_gap.is_none());
    }

    #[test]
    fn fig1_cross_evaluation() {
        let fixed = fixtures::fig1_fixed();
        let variable = fixtures::fig1_variable();
        let s = exact::oracle_enumerate(&fixed).unwrap().incumbent.unwrap();
        let r = cross_evaluate(&fixed, &s, &variable).unwrap();
        assert!(r.pct_inf_t > 0.0);
        assert!(r.pct_inf_e > 0.0);
        assert!((r.total_inf - r.excess.iter().sum::<f64>()).abs() < 1e-12);
        let own = cross_evaluate(&fixed, &s, &fixed).unwrap();
        assert_eq!(own.total_inf, 0.0);
        assert_eq!(own.pct_inf_t, 0.0);
    }

    #[test]
    fn unpaired_is_rejected() {
        let s = exact::oracle_enumerate(&fixtures::fig3_fixed()).unwrap().incumbent.unwrap();
        let err = cross_evaluate(&fixtures::fig3_fixed(), &s, &fixtures::fig2_variable()).unwrap_err();
        assert!(err.to_string().contains("unpaired instances"));
    }

    #[test]
    fn statistics_use_positive_excess_only() {
        let r = InfeasReport::from_load(&[1.0, 6.0, 4.0, 9.0], 4.0);
        assert_eq!(r.excess, vec![0.0, 2.0, 0.0, 5.0]);
        assert_eq!((r.min_inf, r.avg_inf, r.max_inf, r.total_inf), (2.0, 3.5, 5.0, 7.0));
        assert_eq!(r.pct_inf_t, 0.5);
        assert!((r.pct_inf_e - 7.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn empty_suite_is_header_only() {
        let rows = run_suite(&SuiteSpec::default(), 1);
        assert_eq!(rows_to_csv(&rows), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn fixture_suite_statuses() {
        let spec = SuiteSpec {
            instances: ["fig1-variable", "fig2-variable", "fig3-variable"]
                .iter()
                .map(|f| SuiteInstance {
                    id: f.to_string(),
                    source: InstanceSource::Fixture { fixture: f.to_string() },
                })
                .collect(),
            solvers: vec![SolverSpec::new(SolverKind::Oracle)],
        };
        let rows = run_suite(&spec, 2);
        let statuses: Vec<&str> = rows.iter().map(|r| r.status.as_str()).collect();
        assert_eq!(statuses, vec!["infeasible", "optimal", "optimal"]);
        assert!((rows[2].z_ub.unwrap() - 0.24).abs() < 1e-9);
        assert!((rows[1].z_ub.unwrap() - 18.0).abs() < 1e-9);
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg.iter().map(|a| a.rows).sum::<usize>(), 3);
        assert_eq!(agg.iter().map(|a| a.optimal).sum::<usize>(), 2);
    }
}
