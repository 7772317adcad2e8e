use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{branch_and_bound, BnbOptions, SearchBudget};
use crate::model::{Instance, Schedule, IMPROVEMENT_EPS};

/// Tunables of the machine destroy-and-resolve search.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSearchConfig {
    /// Share of machines freed per attempt; the search climbs the ladder.
    pub alpha_ladder: Vec<f64>,
    /// Consecutive failures at one ladder rung before moving up.
    pub failures_per_alpha: usize,
    pub max_iterations: usize,
    /// Per-subproblem wall-clock limit, doubled after every attempt up to `gamma_max`.
    pub gamma0: Duration,
    pub gamma_max: Duration,
    /// Use node limits instead of wall clock.
    pub deterministic: bool,
    pub nodes0: u64,
    pub nodes_max: u64,
    /// Node limit over all subproblems of one call.
    pub total_node_limit: Option<u64>,
    /// Machines stop being added once this many jobs are freed (at least one machine is always freed).
    pub max_free_jobs: usize,
}

impl Default for MilpSearchConfig {
    fn default() -> Self {
        Self {
            alpha_ladder: vec![0.2, 0.4, 0.6],
            failures_per_alpha: 5,
            max_iterations: 15,
            gamma0: Duration::from_secs(2),
            gamma_max: Duration::from_secs(30),
            deterministic: false,
            nodes0: 20_000,
            nodes_max: 320_000,
            total_node_limit: None,
            max_free_jobs: 16,
        }
    }
}

impl MilpSearchConfig {
    pub fn deterministic() -> Self {
        Self {
            deterministic: true,
            ..Self::default()
        }
    }

    fn budget(&self, iteration: usize, deadline: Option<Instant>, nodes_left: Option<u64>) -> SearchBudget {
        let factor = 1u64 << iteration.min(20);
        if self.deterministic {
            let nodes = self.nodes0.saturating_mul(factor).min(self.nodes_max);
            return SearchBudget::nodes(nodes_left.map_or(nodes, |left| nodes.min(left)));
        }
        let mut gamma = self.gamma0.saturating_mul(factor as u32).min(self.gamma_max);
        if let Some(deadline) = deadline {
            gamma = gamma.min(deadline.saturating_duration_since(Instant::now()));
        }
        SearchBudget {
            time_limit: Some(gamma),
            node_limit: nodes_left,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSearchResult {
    pub schedule: Schedule,
    /// Strictly cheaper than the input, or feasible in first-feasible mode.
    pub improved: bool,
    pub iterations: usize,
    pub nodes: u64,
    pub final_alpha: f64,
}

/// Machines whose jobs run in a slot above the budget.
fn violating_machines(instance: &Instance, s: &Schedule) -> Vec<usize> {
    let verdict = instance.check_feasibility(s, false);
    let mut machines: Vec<usize> = s
        .iter()
        .filter(|(job, a)| {
            let end = a.start + instance.processing_time(*job);
            verdict.violations.iter().any(|(t, _)| (a.start..end).contains(t))
        })
        .map(|(_, a)| a.machine)
        .chain(verdict.overlaps.iter().map(|(m, _)| *m))
        .collect();
    machines.sort_unstable();
    machines.dedup();
    machines
}

/// Frees every job on a random subset of machines and re-solves them exactly.
///
/// In improvement mode the subproblem only accepts schedules strictly cheaper
/// than `s` and the first success is returned. In first-feasible mode `s` may
/// break the budget; machines hosting violations are freed first and the
/// first feasible completion is returned. Returns `s` when nothing is found.
pub fn milp_search<R: Rng>(
    instance: &Instance,
    s: &Schedule,
    cfg: &MilpSearchConfig,
    first_feasible: bool,
    deadline: Option<Instant>,
    rng: &mut R,
) -> MilpSearchResult {
    let m = instance.num_machines();
    let mut result = MilpSearchResult {
        schedule: s.clone(),
        improved: false,
        iterations: 0,
        nodes: 0,
        final_alpha: cfg.alpha_ladder.first().copied().unwrap_or(0.2),
    };
    if m == 0 || cfg.alpha_ladder.is_empty() {
        return result;
    }
    if first_feasible && instance.check_feasibility(s, true).feasible {
        result.improved = true;
        return result;
    }
    let current = if first_feasible {
        f64::INFINITY
    } else {
        match instance.evaluate_tec(s) {
            Ok(z) => z,
            Err(_) => return result,
        }
    };

    let mut rung = 0;
    let mut failures = 0;
    for iteration in 0..cfg.max_iterations {
        if !cfg.deterministic && deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let nodes_left = cfg.total_node_limit.map(|limit| limit.saturating_sub(result.nodes));
        if nodes_left == Some(0) {
            break;
        }
        let alpha = cfg.alpha_ladder[rung];
        result.final_alpha = alpha;
        result.iterations = iteration + 1;

        let count = ((alpha * m as f64).ceil() as usize).clamp(1, m);
        let mut pool: Vec<usize> = (0..m).collect();
        pool.shuffle(rng);
        if first_feasible {
            let hot = violating_machines(instance, s);
            pool.sort_by_key(|machine| !hot.contains(machine));
        }
        let mut freed_machines = Vec::with_capacity(count);
        let mut free_jobs = Vec::new();
        for &machine in &pool {
            if freed_machines.len() == count {
                break;
            }
            let on: Vec<usize> = s.jobs_on(machine).collect();
            if !freed_machines.is_empty() && free_jobs.len() + on.len() > cfg.max_free_jobs {
                continue;
            }
            freed_machines.push(machine);
            free_jobs.extend(on);
        }

        let opts = BnbOptions {
            budget: cfg.budget(iteration, deadline, nodes_left),
            stop_at_first_feasible: first_feasible,
            cutoff: (!first_feasible).then_some(current - IMPROVEMENT_EPS),
        };
        let outcome = branch_and_bound(instance, &free_jobs, s, &opts);
        result.nodes += outcome.nodes;
        if let Some(schedule) = outcome.incumbent {
            result.schedule = schedule;
            result.improved = true;
            return result;
        }

        failures += 1;
        if failures >= cfg.failures_per_alpha && rung + 1 < cfg.alpha_ladder.len() {
            rung += 1;
            failures = 0;
        }
    }
    result
}
