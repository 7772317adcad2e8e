//! Iterated local search: perturb the best schedule by emptying machines,
//! repair by first-fit, descend with VND and fall back to the machine
//! destroy-and-resolve search when VND does not beat the best.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construct::{self, ConstructConfig, ConstructStage, NoSolutionFound, OrderingCriterion, StageAttempt};
use crate::exact::{self, MilpSearchConfig};
use crate::model::{Instance, Schedule, IMPROVEMENT_EPS};
use crate::neighborhood;
use crate::state::PlacementState;

#[derive(Debug, Clone)]
pub struct IlsConfig {
    pub time_limit: Duration,
    pub max_noimprove_iters: usize,
    /// Increasing, non-overlapping ranges the perturbation share is drawn from.
    pub perturbation_intervals: Vec<(f64, f64)>,
    pub repair_attempts: usize,
    pub seed: u64,
    /// Ignore the wall clock and use node budgets everywhere.
    pub deterministic: bool,
    pub milp: MilpSearchConfig,
    pub construct: ConstructConfig,
}

impl Default for IlsConfig {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(600),
            max_noimprove_iters: 50,
            perturbation_intervals: vec![(0.1, 0.3), (0.3, 0.6), (0.6, 0.9)],
            repair_attempts: 20,
            seed: 0,
            deterministic: false,
            milp: MilpSearchConfig::default(),
            construct: ConstructConfig::default(),
        }
    }
}

impl IlsConfig {
    pub fn deterministic(seed: u64) -> Self {
        Self {
            seed,
            deterministic: true,
            milp: MilpSearchConfig::deterministic(),
            construct: ConstructConfig::deterministic(seed),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.perturbation_intervals.is_empty() {
            return Err("at least one perturbation interval is required".into());
        }
        let mut previous_hi = 0.0;
        for &(lo, hi) in &self.perturbation_intervals {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi || lo < previous_hi {
                return Err(format!("perturbation interval ({lo}, {hi}) is not increasing and disjoint within [0, 1]"));
            }
            previous_hi = hi;
        }
        Ok(())
    }
}

/// Index into the perturbation intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaState {
    pub k: usize,
}

impl Default for AlphaState {
    fn default() -> Self {
        Self { k: 1 }
    }
}

/// Resets to the first interval on improvement, otherwise moves one interval up
/// (staying at the last), then draws the share from the current interval.
pub fn update_alpha<R: Rng>(state: &mut AlphaState, intervals: &[(f64, f64)], improved: bool, rng: &mut R) -> f64 {
    state.k = if improved { 1 } else { (state.k + 1).min(intervals.len()) };
    let (lo, hi) = intervals[state.k - 1];
    rng.random_range(lo..hi)
}

/// Empties `⌈α·m⌉` random machines and reinserts their jobs in random order.
///
/// Up to `attempts` machine draws are tried; if none can be repaired within
/// the budget, `s_best` is returned unchanged.
pub fn perturb<R: Rng>(instance: &Instance, s_best: &Schedule, alpha: f64, attempts: usize, rng: &mut R) -> Schedule {
    let m = instance.num_machines();
    if m == 0 {
        return s_best.clone();
    }
    let count = ((alpha * m as f64).ceil() as usize).clamp(1, m);
    for _ in 0..attempts {
        let machines = index::sample(rng, m, count).into_vec();
        let removed: Vec<usize> = s_best
            .iter()
            .filter(|(_, a)| machines.contains(&a.machine))
            .map(|(j, _)| j)
            .collect();
        let mut restricted = s_best.clone();
        for &j in &removed {
            restricted.unassign(j);
        }
        let mut state = PlacementState::from_schedule(instance, &restricted);
        let order = OrderingCriterion::Random(rng.random()).order(instance, &removed);
        if construct::first_fit(&mut state, &order, false).is_ok() {
            return state.into_schedule();
        }
    }
    s_best.clone()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub alpha: f64,
    pub tec: f64,
    pub accepted: bool,
    pub used_milp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    NoImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(skip)]
    pub best: Schedule,
    pub z_heur: f64,
    pub z_construct: f64,
    pub incumbent_time_s: f64,
    pub runtime_s: f64,
    pub constructive_stage: ConstructStage,
    pub constructive_log: Vec<StageAttempt>,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
}

impl RunReport {
    /// Equality ignoring wall-clock fields.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.best == other.best
            && self.z_heur == other.z_heur
            && self.z_construct == other.z_construct
            && self.constructive_stage == other.constructive_stage
            && self.constructive_log == other.constructive_log
            && self.iterations == other.iterations
            && self.termination == other.termination
    }
}

pub fn run_ils(instance: &Instance, cfg: &IlsConfig) -> Result<RunReport, NoSolutionFound> {
    let started = Instant::now();
    let deadline = (!cfg.deterministic).then(|| started + cfg.time_limit);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let constructed = construct::constructive_step(instance, &cfg.construct)?;
    let mut best = constructed.schedule;
    let mut z_best = instance.evaluate_tec(&best).expect("constructed schedule is complete");
    let z_construct = z_best;
    let mut incumbent_time_s = started.elapsed().as_secs_f64();

    let intervals = if cfg.perturbation_intervals.is_empty() {
        IlsConfig::default().perturbation_intervals
    } else {
        cfg.perturbation_intervals.clone()
    };
    let mut alpha_state = AlphaState::default();
    let (lo, hi) = intervals[0];
    let mut alpha = rng.random_range(lo..hi);
    let mut iterations = Vec::new();
    let mut since_improvement = 0;

    let termination = loop {
        if since_improvement >= cfg.max_noimprove_iters {
            break Termination::NoImprovement;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break Termination::TimeLimit;
        }
        let iter = iterations.len() + 1;

        let perturbed = perturb(instance, &best, alpha, cfg.repair_attempts, &mut rng);
        let mut candidate = neighborhood::vnd(instance, &perturbed);
        let mut z_candidate = instance.evaluate_tec(&candidate).expect("complete");
        let mut used_milp = false;
        if z_candidate >= z_best - IMPROVEMENT_EPS {
            used_milp = true;
            let result = exact::milp_search(instance, &candidate, &cfg.milp, false, deadline, &mut rng);
            candidate = result.schedule;
            z_candidate = instance.evaluate_tec(&candidate).expect("complete");
        }

        let accepted = z_candidate < z_best - IMPROVEMENT_EPS;
        if accepted {
            debug_assert!(instance.check_feasibility(&candidate, true).feasible);
            best = candidate;
            z_best = z_candidate;
            incumbent_time_s = started.elapsed().as_secs_f64();
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        iterations.push(IterationRecord {
            iter,
            alpha,
            tec: z_candidate,
            accepted,
            used_milp,
        });
        alpha = update_alpha(&mut alpha_state, &intervals, accepted, &mut rng);
    };

    Ok(RunReport {
        best,
        z_heur: z_best,
        z_construct,
        incumbent_time_s,
        runtime_s: started.elapsed().as_secs_f64(),
        constructive_stage: constructed.stage,
        constructive_log: constructed.log,
        iterations,
        termination,
    })
}
