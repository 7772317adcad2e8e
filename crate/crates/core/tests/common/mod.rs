#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volt_sched::{Instance, Job, Machine, Schedule, TimeGrid};

/// Small random instance with arbitrary weights, prices, PV and budget.
///
/// The budget is drawn between the largest single-slot draw and the sum of
/// all machine peaks, so both tight and loose instances show up.
pub fn random_tiny(seed: u64, max_jobs: usize, max_machines: usize, max_slots: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_slots = rng.random_range(2..=max_slots);
    let grid = TimeGrid::new(num_slots).unwrap();
    let num_machines = rng.random_range(1..=max_machines);
    let num_jobs = rng.random_range(1..=max_jobs);
    let machines: Vec<Machine> = (0..num_machines)
        .map(|id| Machine {
            id,
            level: rng.random_range(0.5..3.0),
        })
        .collect();
    let jobs: Vec<Job> = (0..num_jobs)
        .map(|id| {
            let p = rng.random_range(1..=num_slots.min(4));
            Job::new(id, (0..p).map(|_| rng.random_range(0.2..2.0)).collect())
        })
        .collect();
    let buy: Vec<f64> = (0..num_slots).map(|_| rng.random_range(0.05..0.30)).collect();
    let sell: Vec<f64> = buy.iter().map(|c| c * rng.random_range(0.0..0.9)).collect();
    let pv: Vec<f64> = (0..num_slots)
        .map(|_| if rng.random_bool(0.4) { rng.random_range(0.0..6.0) } else { 0.0 })
        .collect();
    let h = grid.slot_hours();
    let peak_machine = machines.iter().map(|m| m.level).fold(0.0, f64::max);
    let peak_weight = jobs
        .iter()
        .flat_map(|j| j.base_consumption.iter().copied())
        .fold(0.0, f64::max);
    let lo = peak_machine * h * peak_weight;
    let hi = machines.iter().map(|m| m.level).sum::<f64>() * h * 2.0;
    let budget = rng.random_range(lo..=hi.max(lo + 1e-6));
    Instance::new(jobs, machines, grid, buy, sell, pv, budget).unwrap()
}

/// A uniformly drawn complete schedule without overlaps, ignoring the budget.
/// Returns `None` if no overlap-free draw was found.
pub fn random_schedule<R: Rng>(inst: &Instance, rng: &mut R) -> Option<Schedule> {
    'draw: for _ in 0..200 {
        let mut s = Schedule::new();
        let mut busy = vec![vec![false; inst.num_slots()]; inst.num_machines()];
        for j in 0..inst.num_jobs() {
            let p = inst.processing_time(j);
            let options: Vec<(usize, usize)> = (0..inst.num_machines())
                .flat_map(|i| (0..=inst.num_slots() - p).map(move |t| (i, t)))
                .filter(|&(i, t)| busy[i][t..t + p].iter().all(|b| !b))
                .collect();
            if options.is_empty() {
                continue 'draw;
            }
            let (i, t) = options[rng.random_range(0..options.len())];
            busy[i][t..t + p].iter_mut().for_each(|b| *b = true);
            s.assign(j, i, t);
        }
        return Some(s);
    }
    None
}

/// A random schedule that also respects the budget.
pub fn random_feasible_schedule<R: Rng>(inst: &Instance, rng: &mut R) -> Option<Schedule> {
    (0..200).find_map(|_| {
        random_schedule(inst, rng).filter(|s| inst.check_feasibility(s, true).feasible)
    })
}

/// Per-slot load computed from scratch.
pub fn naive_load(inst: &Instance, s: &Schedule) -> Vec<f64> {
    let mut load = vec![0.0; inst.num_slots()];
    let h = inst.grid().slot_hours();
    for (j, a) in s.iter() {
        let level = inst.machines()[a.machine].level;
        for (tau, v) in inst.jobs()[j].base_consumption.iter().enumerate() {
            load[a.start + tau] += level * h * v;
        }
    }
    load
}

/// Cost of a schedule written out slot by slot.
pub fn naive_tec(inst: &Instance, s: &Schedule) -> f64 {
    naive_load(inst, s)
        .iter()
        .enumerate()
        .map(|(t, l)| {
            let net = l - inst.pv_supply()[t];
            if net > 0.0 {
                inst.buy_cost()[t] * net
            } else {
                inst.sell_price()[t] * net
            }
        })
        .sum()
}
