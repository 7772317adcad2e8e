//! First-fit insertion and the staged constructive procedure.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{self, BnbOptions, MilpSearchConfig, SearchBudget, SolveStatus};
use crate::model::{Instance, Schedule};
use crate::state::PlacementState;

/// Order in which pending jobs are inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderingCriterion {
    JobIndexAsc,
    ProcessingTimeDesc,
    ProcessingTimeAsc,
    Random(u64),
}

impl OrderingCriterion {
    pub fn order(&self, instance: &Instance, jobs: &[usize]) -> Vec<usize> {
        let mut order = jobs.to_vec();
        match *self {
            Self::JobIndexAsc => order.sort_unstable(),
            Self::ProcessingTimeDesc => {
                order.sort_unstable();
                order.sort_by_key(|&j| std::cmp::Reverse(instance.processing_time(j)));
            }
            Self::ProcessingTimeAsc => {
                order.sort_unstable();
                order.sort_by_key(|&j| instance.processing_time(j));
            }
            Self::Random(seed) => {
                order.sort_unstable();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no feasible insertion for job {job}")]
pub struct NoFeasibleInsertion {
    pub job: usize,
}

/// Inserts `order` one job at a time at the first free placement.
///
/// Machines are scanned by ascending id, then starts by ascending slot.
pub(crate) fn first_fit(state: &mut PlacementState<'_>, order: &[usize], relax_budget: bool) -> Result<(), NoFeasibleInsertion> {
    let inst = state.instance();
    for &job in order {
        let p = inst.processing_time(job);
        if p > inst.num_slots() {
            return Err(NoFeasibleInsertion { job });
        }
        let spot = (0..inst.num_machines()).find_map(|machine| {
            (0..=inst.num_slots() - p)
                .find(|&start| {
                    state.is_free(machine, start, p) && (relax_budget || state.fits_budget(job, machine, start))
                })
                .map(|start| (machine, start))
        });
        match spot {
            Some((machine, start)) => state.place(job, machine, start),
            None => return Err(NoFeasibleInsertion { job }),
        }
    }
    Ok(())
}

/// Completes `partial` with `pending` jobs using first-fit insertion.
///
/// Assignments already in `partial` are kept; pending jobs that are already
/// assigned are rescheduled.
pub fn insert_all(
    instance: &Instance,
    partial: &Schedule,
    pending: &[usize],
    criterion: OrderingCriterion,
    relax_budget: bool,
) -> Result<Schedule, NoFeasibleInsertion> {
    let mut base = partial.clone();
    for &j in pending {
        base.unassign(j);
    }
    let mut state = PlacementState::from_schedule(instance, &base);
    first_fit(&mut state, &criterion.order(instance, pending), relax_budget)?;
    Ok(state.into_schedule())
}

/// Which part of the constructive procedure produced the start solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructStage {
    Insertion,
    Repair,
    FullSolve,
}

/// One entry of the constructive log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageAttempt {
    pub stage: ConstructStage,
    pub success: bool,
    /// Orderings tried (stage 1) or search iterations (stage 2).
    pub attempts: usize,
}

#[derive(Debug, Clone)]
pub struct ConstructConfig {
    pub seed: u64,
    pub random_orders: usize,
    pub repair_budget: SearchBudget,
    pub full_solve_budget: SearchBudget,
    pub milp: MilpSearchConfig,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            random_orders: 1000,
            repair_budget: SearchBudget::time(Duration::from_secs(30)),
            full_solve_budget: SearchBudget::time(Duration::from_secs(60)),
            milp: MilpSearchConfig::default(),
        }
    }
}

impl ConstructConfig {
    /// Node budgets instead of wall-clock limits, for reproducible runs.
    pub fn deterministic(seed: u64) -> Self {
        Self {
            seed,
            repair_budget: SearchBudget::nodes(200_000),
            full_solve_budget: SearchBudget::nodes(2_000_000),
            milp: MilpSearchConfig::deterministic(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constructed {
    pub schedule: Schedule,
    pub stage: ConstructStage,
    pub log: Vec<StageAttempt>,
}

#[derive(Debug, Clone, Error)]
#[error("no solution found")]
pub struct NoSolutionFound {
    pub log: Vec<StageAttempt>,
}

fn random_order_seed(seed: u64, iteration: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (iteration as u64).wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Finds a feasible start solution in up to three stages.
///
/// 1. First-fit with the index, decreasing-p and increasing-p orders, then
///    `random_orders` random orders.
/// 2. The last random order with the budget relaxed, repaired by machine
///    destroy-and-resolve in first-feasible mode.
/// 3. A full search stopped at the first feasible schedule.
pub fn constructive_step(instance: &Instance, cfg: &ConstructConfig) -> Result<Constructed, NoSolutionFound> {
    let jobs: Vec<usize> = (0..instance.num_jobs()).collect();
    let mut log = Vec::new();

    let mut criteria = vec![
        OrderingCriterion::JobIndexAsc,
        OrderingCriterion::ProcessingTimeDesc,
        OrderingCriterion::ProcessingTimeAsc,
    ];
    criteria.extend((0..cfg.random_orders).map(|k| OrderingCriterion::Random(random_order_seed(cfg.seed, k))));
    let mut last_random = OrderingCriterion::Random(random_order_seed(cfg.seed, 0));
    for (k, criterion) in criteria.iter().enumerate() {
        if let OrderingCriterion::Random(_) = criterion {
            last_random = *criterion;
        }
        if let Ok(schedule) = insert_all(instance, &Schedule::new(), &jobs, *criterion, false) {
            log.push(StageAttempt {
                stage: ConstructStage::Insertion,
                success: true,
                attempts: k + 1,
            });
            return Ok(Constructed {
                schedule,
                stage: ConstructStage::Insertion,
                log,
            });
        }
    }
    log.push(StageAttempt {
        stage: ConstructStage::Insertion,
        success: false,
        attempts: criteria.len(),
    });

    if let Ok(relaxed) = insert_all(instance, &Schedule::new(), &jobs, last_random, true) {
        let deadline = cfg.repair_budget.time_limit.map(|d| Instant::now() + d);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_0002);
        let mut milp = cfg.milp.clone();
        if let Some(nodes) = cfg.repair_budget.node_limit {
            milp.total_node_limit = Some(nodes);
        }
        let result = exact::milp_search(instance, &relaxed, &milp, true, deadline, &mut rng);
        let success = result.improved && instance.check_feasibility(&result.schedule, true).feasible;
        log.push(StageAttempt {
            stage: ConstructStage::Repair,
            success,
            attempts: result.iterations,
        });
        if success {
            return Ok(Constructed {
                schedule: result.schedule,
                stage: ConstructStage::Repair,
                log,
            });
        }
    } else {
        log.push(StageAttempt {
            stage: ConstructStage::Repair,
            success: false,
            attempts: 0,
        });
    }

    let outcome = exact::branch_and_bound(
        instance,
        &jobs,
        &Schedule::new(),
        &BnbOptions {
            budget: cfg.full_solve_budget,
            stop_at_first_feasible: true,
            cutoff: None,
        },
    );
    let success = matches!(outcome.status, SolveStatus::Optimal | SolveStatus::FeasibleIncumbent);
    log.push(StageAttempt {
        stage: ConstructStage::FullSolve,
        success,
        attempts: outcome.nodes as usize,
    });
    match outcome.incumbent {
        Some(schedule) if success => Ok(Constructed {
            schedule,
            stage: ConstructStage::FullSolve,
            log,
        }),
        _ => Err(NoSolutionFound { log }),
    }
}
