//! Problem data, schedules and schedule evaluation.
//!
//! An [`Instance`] is immutable once built. Per-slot consumption of a job on a
//! machine is never materialized: it is `level × slot_hours × v[offset]`,
//! computed on demand by [`Instance::consumption_of`].
//!
//! The total energy cost of a schedule uses the closed form of the buy/sell
//! split. Because the sell price is strictly below the buy price in every slot,
//! it is optimal to buy exactly the deficit `max(0, load - pv)` and sell exactly
//! the surplus `max(0, pv - load)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance (kWh) used by every budget check.
pub const ENERGY_TOL: f64 = 1e-9;

/// A move or solution counts as improving only if it lowers the cost by more than this (EUR).
pub const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("job {0} does not exist")]
    UnknownJob(usize),
    #[error("machine {0} does not exist")]
    UnknownMachine(usize),
    #[error("offset {offset} is outside job {job} (processing time {processing_time})")]
    OffsetOutOfRange {
        job: usize,
        offset: usize,
        processing_time: usize,
    },
    #[error("job exceeds horizon: job {job} needs {processing_time} slots, horizon has {num_slots}")]
    JobExceedsHorizon {
        job: usize,
        processing_time: usize,
        num_slots: usize,
    },
    #[error("job {job} starting at slot {start} ends after the horizon ({num_slots} slots)")]
    StartOutOfHorizon {
        job: usize,
        start: usize,
        num_slots: usize,
    },
    #[error("partial schedule: {missing} of {total} jobs are not scheduled")]
    PartialSchedule { missing: usize, total: usize },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// Discretization of one day into equal slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    num_slots: usize,
    slot_hours: f64,
}

impl TimeGrid {
    /// A grid of `num_slots` slots covering 24 hours.
    pub fn new(num_slots: usize) -> Result<Self, ModelError> {
        if num_slots == 0 {
            return Err(ModelError::InvalidGrid("num_slots must be at least 1".into()));
        }
        Ok(Self {
            num_slots,
            slot_hours: 24.0 / num_slots as f64,
        })
    }

    /// A grid with an explicit slot duration; `num_slots × slot_hours` must equal 24.
    pub fn with_slot_hours(num_slots: usize, slot_hours: f64) -> Result<Self, ModelError> {
        if num_slots == 0 {
            return Err(ModelError::InvalidGrid("num_slots must be at least 1".into()));
        }
        if !(slot_hours.is_finite() && slot_hours > 0.0) {
            return Err(ModelError::InvalidGrid(format!(
                "slot_hours must be positive, got {slot_hours}"
            )));
        }
        if (num_slots as f64 * slot_hours - 24.0).abs() > 1e-9 {
            return Err(ModelError::InvalidGrid(format!(
                "{num_slots} slots of {slot_hours} h do not cover 24 h"
            )));
        }
        Ok(Self {
            num_slots,
            slot_hours,
        })
    }

    #[inline]
    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    #[inline]
    pub fn slot_hours(&self) -> f64 {
        self.slot_hours
    }
}

/// A job with a machine-independent consumption profile.
///
/// `base_consumption[τ]` is a dimensionless weight; the energy drawn on machine
/// `i` during the `τ`-th slot of execution is `level_i × slot_hours × weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub processing_time: usize,
    pub base_consumption: Vec<f64>,
}

impl Job {
    pub fn new(id: usize, base_consumption: Vec<f64>) -> Self {
        Self {
            id,
            processing_time: base_consumption.len(),
            base_consumption,
        }
    }

    /// A job drawing weight 1 in every slot.
    pub fn constant(id: usize, processing_time: usize) -> Self {
        Self::new(id, vec![1.0; processing_time])
    }

    /// Sum of the consumption weights.
    pub fn total_weight(&self) -> f64 {
        self.base_consumption.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub id: usize,
    /// Energy rate in kWh per hour.
    pub level: f64,
}

/// Immutable problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    jobs: Vec<Job>,
    machines: Vec<Machine>,
    grid: TimeGrid,
    buy_cost: Vec<f64>,
    sell_price: Vec<f64>,
    pv_supply: Vec<f64>,
    budget: f64,
}

fn check_series(name: &str, values: &[f64], len: usize) -> Result<(), ModelError> {
    if values.len() != len {
        return Err(invalid(
            name,
            format!("expected {len} entries, found {}", values.len()),
        ));
    }
    if let Some((t, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(invalid(format!("{name}[{t}]"), format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl Instance {
    /// Validates and assembles an instance.
    ///
    /// Jobs and machines must be listed in id order (`jobs[k].id == k`).
    pub fn new(
        jobs: Vec<Job>,
        machines: Vec<Machine>,
        grid: TimeGrid,
        buy_cost: Vec<f64>,
        sell_price: Vec<f64>,
        pv_supply: Vec<f64>,
        budget: f64,
    ) -> Result<Self, ModelError> {
        let num_slots = grid.num_slots();
        for (k, job) in jobs.iter().enumerate() {
            let field = format!("jobs[{k}]");
            if job.id != k {
                return Err(invalid(field, format!("id {} does not match position", job.id)));
            }
            if job.processing_time == 0 {
                return Err(invalid(field, "processing time must be at least 1"));
            }
            if job.base_consumption.len() != job.processing_time {
                return Err(invalid(
                    format!("{field}.v"),
                    format!(
                        "length {} does not match processing time {}",
                        job.base_consumption.len(),
                        job.processing_time
                    ),
                ));
            }
            if let Some(v) = job
                .base_consumption
                .iter()
                .find(|v| !(v.is_finite() && **v >= 0.0))
            {
                return Err(invalid(format!("{field}.v"), format!("weights must be >= 0, got {v}")));
            }
        }
        for (k, machine) in machines.iter().enumerate() {
            let field = format!("machines[{k}]");
            if machine.id != k {
                return Err(invalid(field, format!("id {} does not match position", machine.id)));
            }
            if !(machine.level.is_finite() && machine.level > 0.0) {
                return Err(invalid(field, format!("level must be positive, got {}", machine.level)));
            }
        }
        check_series("buy_cost", &buy_cost, num_slots)?;
        check_series("sell_price", &sell_price, num_slots)?;
        check_series("pv_supply", &pv_supply, num_slots)?;
        if let Some(t) = (0..num_slots).find(|&t| sell_price[t] >= buy_cost[t]) {
            return Err(invalid(
                format!("sell_price[{t}]"),
                format!(
                    "no-arbitrage violated: sell {} >= buy {}",
                    sell_price[t], buy_cost[t]
                ),
            ));
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(invalid("budget", format!("must be finite and >= 0, got {budget}")));
        }
        Ok(Self {
            jobs,
            machines,
            grid,
            buy_cost,
            sell_price,
            pv_supply,
            budget,
        })
    }

    #[inline]
    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    #[inline]
    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    #[inline]
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    #[inline]
    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    #[inline]
    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    #[inline]
    pub fn num_slots(&self) -> usize {
        self.grid.num_slots()
    }

    #[inline]
    pub fn buy_cost(&self) -> &[f64] {
        &self.buy_cost
    }

    #[inline]
    pub fn sell_price(&self) -> &[f64] {
        &self.sell_price
    }

    #[inline]
    pub fn pv_supply(&self) -> &[f64] {
        &self.pv_supply
    }

    /// Energy budget per slot (kWh).
    #[inline]
    pub fn budget(&self) -> f64 {
        self.budget
    }

    #[inline]
    pub fn processing_time(&self, job: usize) -> usize {
        self.jobs[job].processing_time
    }

    /// kWh drawn per unit of consumption weight on `machine`.
    #[inline]
    pub fn machine_rate(&self, machine: usize) -> f64 {
        self.machines[machine].level * self.grid.slot_hours()
    }

    /// Energy drawn by `job` on `machine` in the `offset`-th slot of its execution (kWh).
    pub fn consumption_of(&self, job: usize, machine: usize, offset: usize) -> Result<f64, ModelError> {
        let j = self.jobs.get(job).ok_or(ModelError::UnknownJob(job))?;
        if machine >= self.machines.len() {
            return Err(ModelError::UnknownMachine(machine));
        }
        let weight = j
            .base_consumption
            .get(offset)
            .ok_or(ModelError::OffsetOutOfRange {
                job,
                offset,
                processing_time: j.processing_time,
            })?;
        Ok(self.machine_rate(machine) * weight)
    }

    /// Unchecked variant of [`Instance::consumption_of`] for hot loops.
    #[inline]
    pub(crate) fn consumption(&self, job: usize, machine: usize, offset: usize) -> f64 {
        self.machine_rate(machine) * self.jobs[job].base_consumption[offset]
    }

    /// Total energy of `job` on `machine`: `level × slot_hours × Σ v`.
    pub fn job_energy(&self, job: usize, machine: usize) -> f64 {
        self.machine_rate(machine) * self.jobs[job].total_weight()
    }

    /// Inclusive range of legal start slots for `job`.
    pub fn feasible_start_window(&self, job: usize) -> Result<std::ops::RangeInclusive<usize>, ModelError> {
        let j = self.jobs.get(job).ok_or(ModelError::UnknownJob(job))?;
        let num_slots = self.num_slots();
        if j.processing_time > num_slots {
            return Err(ModelError::JobExceedsHorizon {
                job,
                processing_time: j.processing_time,
                num_slots,
            });
        }
        Ok(0..=num_slots - j.processing_time)
    }

    /// Cost of one slot carrying `load` kWh, with the optimal buy/sell split.
    #[inline]
    pub fn slot_cost(&self, slot: usize, load: f64) -> f64 {
        let net = load - self.pv_supply[slot];
        if net > 0.0 {
            self.buy_cost[slot] * net
        } else {
            -self.sell_price[slot] * (-net)
        }
    }

    /// Checks every assignment references a known job and machine and fits the horizon.
    pub fn validate_schedule(&self, schedule: &Schedule) -> Result<(), ModelError> {
        for (job, a) in schedule.iter() {
            let j = self.jobs.get(job).ok_or(ModelError::UnknownJob(job))?;
            if a.machine >= self.machines.len() {
                return Err(ModelError::UnknownMachine(a.machine));
            }
            if a.start + j.processing_time > self.num_slots() {
                return Err(ModelError::StartOutOfHorizon {
                    job,
                    start: a.start,
                    num_slots: self.num_slots(),
                });
            }
        }
        Ok(())
    }

    /// Per-slot load and grid flows of a (possibly partial) schedule.
    pub fn energy_profile(&self, schedule: &Schedule) -> Result<EnergyProfile, ModelError> {
        self.validate_schedule(schedule)?;
        let mut load = vec![0.0; self.num_slots()];
        for (job, a) in schedule.iter() {
            for offset in 0..self.jobs[job].processing_time {
                load[a.start + offset] += self.consumption(job, a.machine, offset);
            }
        }
        Ok(EnergyProfile::from_load(self, load))
    }

    /// Total energy cost of a complete schedule (EUR, negative when selling dominates).
    ///
    /// Budget feasibility is not required.
    pub fn evaluate_tec(&self, schedule: &Schedule) -> Result<f64, ModelError> {
        let missing = (0..self.num_jobs()).filter(|j| schedule.get(*j).is_none()).count();
        if missing > 0 {
            return Err(ModelError::PartialSchedule {
                missing,
                total: self.num_jobs(),
            });
        }
        let profile = self.energy_profile(schedule)?;
        Ok(profile.cost(self))
    }

    /// Machine overlaps, budget violations and (if `require_complete`) missing jobs.
    ///
    /// Assignments that reference unknown jobs or machines or leave the horizon
    /// make the schedule infeasible; the job ids involved are reported in
    /// `unscheduled`.
    pub fn check_feasibility(&self, schedule: &Schedule, require_complete: bool) -> FeasibilityVerdict {
        let num_slots = self.num_slots();
        let mut unscheduled = Vec::new();
        let mut load = vec![0.0; num_slots];
        let mut cover = vec![0u32; self.num_machines() * num_slots];
        for (job, a) in schedule.iter() {
            let valid = job < self.num_jobs()
                && a.machine < self.num_machines()
                && a.start + self.jobs[job].processing_time <= num_slots;
            if !valid {
                unscheduled.push(job);
                continue;
            }
            for offset in 0..self.jobs[job].processing_time {
                let t = a.start + offset;
                load[t] += self.consumption(job, a.machine, offset);
                cover[a.machine * num_slots + t] += 1;
            }
        }
        if require_complete {
            unscheduled.extend((0..self.num_jobs()).filter(|j| schedule.get(*j).is_none()));
            unscheduled.sort_unstable();
        }
        let violations: Vec<(usize, f64)> = load
            .iter()
            .enumerate()
            .filter(|(_, l)| **l > self.budget + ENERGY_TOL)
            .map(|(t, l)| (t, l - self.budget))
            .collect();
        let overlaps: Vec<(usize, usize)> = cover
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 1)
            .map(|(k, _)| (k / num_slots, k % num_slots))
            .collect();
        FeasibilityVerdict {
            feasible: violations.is_empty() && unscheduled.is_empty() && overlaps.is_empty(),
            violations,
            unscheduled,
            overlaps,
        }
    }
}

/// Where a job runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub machine: usize,
    pub start: usize,
}

/// Job → (machine, start slot). Jobs may be missing (a restricted solution).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Schedule {
    assignments: BTreeMap<usize, Assignment>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Places `job`, returning its previous assignment if any.
    pub fn assign(&mut self, job: usize, machine: usize, start: usize) -> Option<Assignment> {
        self.assignments.insert(job, Assignment { machine, start })
    }

    pub fn unassign(&mut self, job: usize) -> Option<Assignment> {
        self.assignments.remove(&job)
    }

    #[inline]
    pub fn get(&self, job: usize) -> Option<Assignment> {
        self.assignments.get(&job).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Assignments in increasing job order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Assignment)> + '_ {
        self.assignments.iter().map(|(j, a)| (*j, *a))
    }

    /// Jobs currently assigned to `machine`.
    pub fn jobs_on(&self, machine: usize) -> impl Iterator<Item = usize> + '_ {
        self.iter().filter(move |(_, a)| a.machine == machine).map(|(j, _)| j)
    }

    pub fn is_complete(&self, instance: &Instance) -> bool {
        (0..instance.num_jobs()).all(|j| self.assignments.contains_key(&j))
    }
}

impl FromIterator<(usize, Assignment)> for Schedule {
    fn from_iter<I: IntoIterator<Item = (usize, Assignment)>>(iter: I) -> Self {
        Self {
            assignments: iter.into_iter().collect(),
        }
    }
}

/// Per-slot load and the implied purchase and sale volumes (kWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub load: Vec<f64>,
    pub bought: Vec<f64>,
    pub sold: Vec<f64>,
}

impl EnergyProfile {
    pub(crate) fn from_load(instance: &Instance, load: Vec<f64>) -> Self {
        let pv = instance.pv_supply();
        let bought = load
            .iter()
            .zip(pv)
            .map(|(l, e)| if l - e > 0.0 { l - e } else { 0.0 })
            .collect();
        let sold = load
            .iter()
            .zip(pv)
            .map(|(l, e)| if l - e > 0.0 { 0.0 } else { e - l })
            .collect();
        Self { load, bought, sold }
    }

    /// `Σ_t c_t·bought_t − d_t·sold_t`.
    pub fn cost(&self, instance: &Instance) -> f64 {
        let c = instance.buy_cost();
        let d = instance.sell_price();
        (0..self.load.len())
            .map(|t| c[t] * self.bought[t] - d[t] * self.sold[t])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// `(slot, kWh above budget)`.
    pub violations: Vec<(usize, f64)>,
    pub unscheduled: Vec<usize>,
    /// `(machine, slot)` covered by more than one job.
    pub overlaps: Vec<(usize, usize)>,
}
