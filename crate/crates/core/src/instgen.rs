//! Instance generation and the JSON instance/solution file formats.
//!
//! A [`BaseConfig`] fixes everything except the per-slot consumption weights.
//! [`derive_fixed`] and [`derive_variable`] turn one base into a pair of
//! instances whose jobs have the same processing times and the same total
//! energy on every machine.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Job, Machine, ModelError, Schedule, TimeGrid};

/// Attempts at redrawing processing times before giving up on a saturation.
const MAX_GENERATION_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameter {field}: {message}")]
    InvalidParams { field: &'static str, message: String },
    #[error("unsatisfiable saturation: total processing time exceeded machine capacity in {0} attempts")]
    UnsatisfiableSaturation(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FileError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn parse(path: &Path, err: serde_json::Error) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Step profile of photovoltaic production over the day.
///
/// The hourly rate climbs in equal steps from `peak / steps` at `start_hour`
/// to `peak` at `peak_hour`, then descends symmetrically and is zero from
/// `end_hour` on, where `steps = peak_hour - start_hour + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvShape {
    pub start_hour: usize,
    pub peak_hour: usize,
    pub end_hour: usize,
    /// kWh per hour at the peak.
    pub peak: f64,
}

impl Default for PvShape {
    fn default() -> Self {
        Self {
            start_hour: 8,
            peak_hour: 13,
            end_hour: 19,
            peak: 250.0,
        }
    }
}

impl PvShape {
    /// Production rate (kWh/h) during hour `hour`.
    pub fn hourly_rate(&self, hour: usize) -> f64 {
        let steps = (self.peak_hour - self.start_hour + 1) as f64;
        if hour < self.start_hour || hour >= self.end_hour {
            0.0
        } else if hour <= self.peak_hour {
            self.peak * (hour - self.start_hour + 1) as f64 / steps
        } else {
            self.peak * (self.end_hour - hour) as f64 / steps
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub num_jobs: usize,
    pub num_machines: usize,
    pub num_slots: usize,
    /// Share of machine-slot capacity taken by processing time, in `(0, 1]`.
    pub saturation: f64,
    pub seed: u64,
    #[serde(default)]
    pub pv: PvShape,
    #[serde(default = "default_levels")]
    pub level_choices: Vec<f64>,
}

fn default_levels() -> Vec<f64> {
    vec![30.0, 50.0, 70.0]
}

impl GenParams {
    pub fn new(num_jobs: usize, num_machines: usize, num_slots: usize, saturation: f64, seed: u64) -> Self {
        Self {
            num_jobs,
            num_machines,
            num_slots,
            saturation,
            seed,
            pv: PvShape::default(),
            level_choices: default_levels(),
        }
    }

    /// Mean processing time `|T|·|I|·ν / |J|`.
    pub fn mean_processing_time(&self) -> f64 {
        self.num_slots as f64 * self.num_machines as f64 * self.saturation / self.num_jobs as f64
    }

    fn validate(&self) -> Result<(), GenError> {
        let bad = |field, message: &str| {
            Err(GenError::InvalidParams {
                field,
                message: message.to_string(),
            })
        };
        if self.num_jobs == 0 {
            return bad("num_jobs", "must be at least 1");
        }
        if self.num_machines == 0 {
            return bad("num_machines", "must be at least 1");
        }
        if self.num_slots == 0 {
            return bad("num_slots", "must be at least 1");
        }
        if !(self.saturation > 0.0 && self.saturation <= 1.0) {
            return bad("saturation", "must lie in (0, 1]");
        }
        if self.level_choices.is_empty() || self.level_choices.iter().any(|l| !(*l > 0.0)) {
            return bad("level_choices", "must be a non-empty list of positive levels");
        }
        if !(self.pv.peak >= 0.0) || self.pv.start_hour > self.pv.peak_hour || self.pv.peak_hour >= self.pv.end_hour {
            return bad("pv", "needs peak >= 0 and start <= peak hour < end");
        }
        Ok(())
    }
}

/// Everything an instance needs except the consumption weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseConfig {
    pub processing_times: Vec<usize>,
    pub machines: Vec<Machine>,
    pub grid: TimeGrid,
    pub buy_cost: Vec<f64>,
    pub sell_price: Vec<f64>,
    pub pv_supply: Vec<f64>,
    pub budget: f64,
    pub seed: u64,
    pub saturation: f64,
}

/// Hour of the day (0..24) in which slot `slot` starts.
fn slot_start_hour(slot: usize, num_slots: usize) -> usize {
    slot * 24 / num_slots
}

/// Buy cost per slot (EUR/kWh), by the hour in which the slot starts.
pub fn tou_costs(num_slots: usize) -> Vec<f64> {
    (0..num_slots)
        .map(|t| match slot_start_hour(t, num_slots) {
            0..=6 => 0.12,
            7 => 0.15,
            8..=18 => 0.18,
            19..=22 => 0.15,
            _ => 0.12,
        })
        .collect()
}

/// PV production per slot (kWh).
pub fn pv_profile(num_slots: usize, shape: &PvShape) -> Vec<f64> {
    let slot_hours = 24.0 / num_slots as f64;
    (0..num_slots)
        .map(|t| shape.hourly_rate(slot_start_hour(t, num_slots)) * slot_hours)
        .collect()
}

pub fn generate_base(params: &GenParams) -> Result<BaseConfig, GenError> {
    params.validate()?;
    let grid = TimeGrid::new(params.num_slots)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mu = params.mean_processing_time();
    let normal = Normal::new(mu, mu / 3.0).map_err(|e| GenError::InvalidParams {
        field: "saturation",
        message: e.to_string(),
    })?;
    let capacity = params.num_machines * params.num_slots;
    let mut processing_times = None;
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let draw: Vec<usize> = (0..params.num_jobs)
            .map(|_| {
                let x: f64 = normal.sample(&mut rng).round();
                x.clamp(1.0, params.num_slots as f64) as usize
            })
            .collect();
        if draw.iter().sum::<usize>() <= capacity {
            processing_times = Some(draw);
            break;
        }
    }
    let processing_times =
        processing_times.ok_or(GenError::UnsatisfiableSaturation(MAX_GENERATION_ATTEMPTS))?;

    let machines: Vec<Machine> = (0..params.num_machines)
        .map(|id| Machine {
            id,
            level: *params.level_choices.choose(&mut rng).expect("non-empty levels"),
        })
        .collect();
    let budget = machines.iter().map(|m| m.level).sum::<f64>() * grid.slot_hours();
    let buy_cost = tou_costs(params.num_slots);
    let sell_price = buy_cost.iter().map(|c| c / 3.0).collect();

    Ok(BaseConfig {
        processing_times,
        machines,
        grid,
        buy_cost,
        sell_price,
        pv_supply: pv_profile(params.num_slots, &params.pv),
        budget,
        seed: params.seed,
        saturation: params.saturation,
    })
}

fn assemble(base: &BaseConfig, jobs: Vec<Job>) -> Instance {
    Instance::new(
        jobs,
        base.machines.clone(),
        base.grid,
        base.buy_cost.clone(),
        base.sell_price.clone(),
        base.pv_supply.clone(),
        base.budget,
    )
    .expect("generated base configurations are valid")
}

/// Constant consumption: every weight is 1.
pub fn derive_fixed(base: &BaseConfig) -> Instance {
    let jobs = base
        .processing_times
        .iter()
        .enumerate()
        .map(|(id, &p)| Job::constant(id, p))
        .collect();
    assemble(base, jobs)
}

/// Random weights summing to the processing time.
///
/// Each weight except the last is drawn uniformly from `[½v̄, 1½v̄]` where `v̄`
/// is the mean weight still to be distributed; the last weight closes the sum.
pub fn variable_weights<R: Rng>(processing_time: usize, rng: &mut R) -> Vec<f64> {
    let total = processing_time as f64;
    let mut weights = Vec::with_capacity(processing_time);
    let mut used = 0.0;
    for tau in 1..processing_time {
        let mean = (total - used) / (processing_time - tau + 1) as f64;
        let w = rng.random_range(0.5 * mean..=1.5 * mean);
        used += w;
        weights.push(w);
    }
    let partial: f64 = weights.iter().sum();
    let mut last = total - partial;
    // Nudge the closing weight until the left-to-right sum hits the target exactly.
    for _ in 0..64 {
        let sum = partial + last;
        if sum == total {
            break;
        }
        last = if sum < total { last.next_up() } else { last.next_down() };
    }
    weights.push(last.max(0.0));
    weights
}

pub fn derive_variable(base: &BaseConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = base
        .processing_times
        .iter()
        .enumerate()
        .map(|(id, &p)| Job::new(id, variable_weights(p, &mut rng)))
        .collect();
    assemble(base, jobs)
}

/// Seed for the variable twin of a base generated with `seed`.
pub fn variable_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsumptionKind {
    Fixed,
    Variable,
}

impl std::fmt::Display for ConsumptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::Variable => "variable",
        })
    }
}

/// Descriptive fields carried in the file header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceMeta {
    pub seed: Option<u64>,
    pub saturation: Option<f64>,
    pub consumption: Option<ConsumptionKind>,
}

impl InstanceMeta {
    pub fn generated(base: &BaseConfig, kind: ConsumptionKind) -> Self {
        Self {
            seed: Some(base.seed),
            saturation: Some(base.saturation),
            consumption: Some(kind),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Units {
    machine_level: String,
    consumption_weight: String,
    prices: String,
    pv: String,
    budget: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            machine_level: "kWh/h".into(),
            consumption_weight: "dimensionless (x level x slot_hours = kWh/slot)".into(),
            prices: "EUR/kWh".into(),
            pv: "kWh/slot".into(),
            budget: "kWh/slot".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaRecord {
    num_slots: usize,
    slot_hours: f64,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    saturation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    consumption: Option<ConsumptionKind>,
    #[serde(default)]
    units: Units,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineRecord {
    id: usize,
    level_kwh_per_h: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    id: usize,
    p: usize,
    v: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriceRecord {
    buy: Vec<f64>,
    sell: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    meta: MetaRecord,
    machines: Vec<MachineRecord>,
    jobs: Vec<JobRecord>,
    prices: PriceRecord,
    pv: Vec<f64>,
    budget_kwh_per_slot: f64,
}

pub fn instance_to_json(instance: &Instance, meta: &InstanceMeta) -> String {
    let record = InstanceRecord {
        meta: MetaRecord {
            num_slots: instance.num_slots(),
            slot_hours: instance.grid().slot_hours(),
            seed: meta.seed,
            saturation: meta.saturation,
            consumption: meta.consumption,
            units: Units::default(),
        },
        machines: instance
            .machines()
            .iter()
            .map(|m| MachineRecord {
                id: m.id,
                level_kwh_per_h: m.level,
            })
            .collect(),
        jobs: instance
            .jobs()
            .iter()
            .map(|j| JobRecord {
                id: j.id,
                p: j.processing_time,
                v: j.base_consumption.clone(),
            })
            .collect(),
        prices: PriceRecord {
            buy: instance.buy_cost().to_vec(),
            sell: instance.sell_price().to_vec(),
        },
        pv: instance.pv_supply().to_vec(),
        budget_kwh_per_slot: instance.budget(),
    };
    serde_json::to_string_pretty(&record).expect("instance serializes")
}

pub fn instance_from_json(text: &str, path: &Path) -> Result<(Instance, InstanceMeta), FileError> {
    let record: InstanceRecord = serde_json::from_str(text).map_err(|e| FileError::parse(path, e))?;
    let grid = TimeGrid::with_slot_hours(record.meta.num_slots, record.meta.slot_hours)
        .map_err(|e| FileError::invalid(path, format!("meta: {e}")))?;
    let machines = record
        .machines
        .into_iter()
        .map(|m| Machine {
            id: m.id,
            level: m.level_kwh_per_h,
        })
        .collect();
    let jobs = record
        .jobs
        .into_iter()
        .map(|j| Job {
            id: j.id,
            processing_time: j.p,
            base_consumption: j.v,
        })
        .collect();
    let instance = Instance::new(
        jobs,
        machines,
        grid,
        record.prices.buy,
        record.prices.sell,
        record.pv,
        record.budget_kwh_per_slot,
    )
    .map_err(|e| FileError::invalid(path, e.to_string()))?;
    let meta = InstanceMeta {
        seed: record.meta.seed,
        saturation: record.meta.saturation,
        consumption: record.meta.consumption,
    };
    Ok((instance, meta))
}

pub fn write_instance(instance: &Instance, meta: &InstanceMeta, path: &Path) -> Result<(), FileError> {
    fs::write(path, instance_to_json(instance, meta) + "\n").map_err(|e| FileError::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<Instance, FileError> {
    read_instance_with_meta(path).map(|(instance, _)| instance)
}

pub fn read_instance_with_meta(path: &Path) -> Result<(Instance, InstanceMeta), FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    instance_from_json(&text, path)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentRecord {
    job: usize,
    machine: usize,
    start: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionRecord {
    assignments: Vec<AssignmentRecord>,
    #[serde(default)]
    tec_eur: Option<f64>,
}

/// Solution document; `tec_eur` is null for partial schedules.
pub fn solution_to_json(instance: &Instance, schedule: &Schedule) -> String {
    let record = SolutionRecord {
        assignments: schedule
            .iter()
            .map(|(job, a)| AssignmentRecord {
                job,
                machine: a.machine,
                start: a.start,
            })
            .collect(),
        tec_eur: instance.evaluate_tec(schedule).ok(),
    };
    serde_json::to_string_pretty(&record).expect("solution serializes")
}

pub fn write_solution(instance: &Instance, schedule: &Schedule, path: &Path) -> Result<(), FileError> {
    fs::write(path, solution_to_json(instance, schedule) + "\n").map_err(|e| FileError::io(path, e))
}

/// Parses a solution document and checks it against `instance`.
pub fn solution_from_json(text: &str, instance: &Instance, path: &Path) -> Result<Schedule, FileError> {
    let record: SolutionRecord = serde_json::from_str(text).map_err(|e| FileError::parse(path, e))?;
    let mut schedule = Schedule::new();
    for (k, a) in record.assignments.iter().enumerate() {
        if a.job >= instance.num_jobs() {
            return Err(FileError::invalid(
                path,
                format!("assignments[{k}].job: job {} does not exist in the instance", a.job),
            ));
        }
        if a.machine >= instance.num_machines() {
            return Err(FileError::invalid(
                path,
                format!("assignments[{k}].machine: machine {} does not exist in the instance", a.machine),
            ));
        }
        if a.start + instance.processing_time(a.job) > instance.num_slots() {
            return Err(FileError::invalid(
                path,
                format!("assignments[{k}].start: job {} starting at {} leaves the horizon", a.job, a.start),
            ));
        }
        if schedule.assign(a.job, a.machine, a.start).is_some() {
            return Err(FileError::invalid(
                path,
                format!("assignments[{k}].job: job {} is assigned twice", a.job),
            ));
        }
    }
    Ok(schedule)
}

pub fn read_solution(path: &Path, instance: &Instance) -> Result<Schedule, FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    solution_from_json(&text, instance, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tariff_table() {
        let c48 = tou_costs(48);
        assert_eq!(c48[0], 0.12);
        assert_eq!(c48[20], 0.18);
        assert_eq!(c48[14], 0.15);
        assert_eq!(c48[13], 0.12);
        assert_eq!(tou_costs(24)[23], 0.12);
        assert_eq!(tou_costs(24)[19], 0.15);
        assert_eq!(tou_costs(24)[18], 0.18);
    }

    #[test]
    fn pv_staircase() {
        let shape = PvShape::default();
        assert_eq!(shape.hourly_rate(13), 250.0);
        assert_eq!(shape.hourly_rate(3), 0.0);
        assert_eq!(shape.hourly_rate(19), 0.0);
        assert!((shape.hourly_rate(8) - 250.0 / 6.0).abs() < 1e-12);
        assert!((shape.hourly_rate(14) - 250.0 * 5.0 / 6.0).abs() < 1e-12);
        for slots in [24, 48, 72, 96, 120] {
            let total: f64 = pv_profile(slots, &shape).iter().sum();
            assert!((total - 1500.0).abs() < 1e-9, "{slots}: {total}");
        }
    }

    #[test]
    fn mean_processing_time_matches_grid_example() {
        let p = GenParams::new(20, 7, 96, 0.8, 1);
        assert!((p.mean_processing_time() - 26.88).abs() < 1e-12);
        let base = generate_base(&p).unwrap();
        let mean = base.processing_times.iter().sum::<usize>() as f64 / 20.0;
        assert!((mean - 26.88).abs() < 9.0, "{mean}");
    }

    #[test]
    fn low_saturation_clamps_to_one_slot() {
        let p = GenParams::new(10, 1, 24, 0.01, 7);
        assert!(p.mean_processing_time() < 1.0);
        let base = generate_base(&p).unwrap();
        assert!(base.processing_times.iter().all(|&pt| pt == 1));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::new(15, 5, 48, 0.9, 42);
        assert_eq!(generate_base(&p).unwrap(), generate_base(&p).unwrap());
        let base = generate_base(&p).unwrap();
        assert_eq!(derive_variable(&base, 3), derive_variable(&base, 3));
    }

    #[test]
    fn budget_is_sum_of_levels_per_slot() {
        let base = generate_base(&GenParams::new(5, 3, 48, 0.7, 9)).unwrap();
        let expected = base.machines.iter().map(|m| m.level).sum::<f64>() * 0.5;
        assert_eq!(base.budget, expected);
        assert!(base
            .buy_cost
            .iter()
            .zip(&base.sell_price)
            .all(|(c, d)| (d - c / 3.0).abs() < 1e-15));
    }

    #[test]
    fn two_slot_weights_stay_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let w = variable_weights(2, &mut rng);
            assert!((0.5..=1.5).contains(&w[0]), "{w:?}");
            assert_eq!(w[0] + w[1], 2.0);
        }
        assert_eq!(variable_weights(1, &mut rng), vec![1.0]);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(generate_base(&GenParams::new(0, 1, 24, 0.5, 0)).is_err());
        assert!(generate_base(&GenParams::new(3, 1, 24, 0.0, 0)).is_err());
        assert!(generate_base(&GenParams::new(3, 1, 24, 1.5, 0)).is_err());
    }

    #[test]
    fn file_rejects_arbitrage_and_bad_lengths() {
        let base = generate_base(&GenParams::new(3, 2, 24, 0.5, 5)).unwrap();
        let inst = derive_fixed(&base);
        let json = instance_to_json(&inst, &InstanceMeta::default());
        let path = Path::new("mem.json");

        let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        doc["prices"]["sell"][4] = serde_json::json!(1.0);
        let err = instance_from_json(&doc.to_string(), path).unwrap_err();
        assert!(err.to_string().contains("no-arbitrage violated"), "{err}");

        let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        doc["jobs"][1]["v"] = serde_json::json!([1.0]);
        let err = instance_from_json(&doc.to_string(), path).unwrap_err();
        assert!(err.to_string().contains("jobs[1].v"), "{err}");

        let err = instance_from_json("{\"meta\": 3}", path).unwrap_err();
        assert!(matches!(err, FileError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn solution_file_validates_job_ids() {
        let inst = crate::fixtures::fig3_variable();
        let path = Path::new("sol.json");
        let text = r#"{"assignments": [{"job": 4, "machine": 0, "start": 0}]}"#;
        let err = solution_from_json(text, &inst, path).unwrap_err();
        assert!(err.to_string().contains("assignments[0].job"), "{err}");
        let text = r#"{"assignments": [{"job": 0, "machine": 0, "start": 1}], "tec_eur": 0.24}"#;
        let s = solution_from_json(text, &inst, path).unwrap();
        assert_eq!(s.get(0).unwrap().start, 1);
    }
}
