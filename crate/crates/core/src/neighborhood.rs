//! Swap and relocate neighborhoods and their variable neighborhood descent.
//!
//! Moves are evaluated incrementally on the slot load. Only moves that keep
//! machines free of overlaps and every touched slot within budget are
//! considered. Best improvement is used; ties go to the lexicographically
//! smallest move.

use serde::Serialize;

use crate::model::{Instance, Schedule, IMPROVEMENT_EPS};
use crate::state::PlacementState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Move {
    /// `first` takes the slot of `second` and vice versa; `first < second`.
    Swap { first: usize, second: usize },
    Relocate { job: usize, machine: usize, start: usize },
}

impl Move {
    /// Applies the move to `s` without any check.
    pub fn apply(&self, s: &mut Schedule) {
        match *self {
            Move::Swap { first, second } => {
                let a = s.get(first).expect("scheduled");
                let b = s.get(second).expect("scheduled");
                s.assign(first, b.machine, b.start);
                s.assign(second, a.machine, a.start);
            }
            Move::Relocate { job, machine, start } => {
                s.assign(job, machine, start);
            }
        }
    }
}

fn swap_parts(state: &PlacementState<'_>, first: usize, second: usize) -> ([usize; 2], [(usize, usize, usize); 2]) {
    let a = state.schedule().get(first).expect("scheduled");
    let b = state.schedule().get(second).expect("scheduled");
    ([first, second], [(second, a.machine, a.start), (first, b.machine, b.start)])
}

fn scan_swaps(state: &mut PlacementState<'_>, mut visit: impl FnMut(Move, Option<f64>)) {
    let jobs: Vec<usize> = state.schedule().iter().map(|(j, _)| j).collect();
    for (x, &first) in jobs.iter().enumerate() {
        for &second in &jobs[x + 1..] {
            let (removed, added) = swap_parts(state, first, second);
            let delta = state.evaluate_move(&removed, &added);
            visit(Move::Swap { first, second }, delta);
        }
    }
}

fn scan_relocations(state: &mut PlacementState<'_>, mut visit: impl FnMut(Move, Option<f64>)) {
    let inst = state.instance();
    let placed: Vec<(usize, crate::Assignment)> = state.schedule().iter().collect();
    for (job, current) in placed {
        let p = inst.processing_time(job);
        for machine in 0..inst.num_machines() {
            for start in 0..=inst.num_slots() - p {
                if machine == current.machine && start == current.start {
                    continue;
                }
                let delta = state.evaluate_move(&[job], &[(job, machine, start)]);
                visit(Move::Relocate { job, machine, start }, delta);
            }
        }
    }
}

/// Every swap of two scheduled jobs with its cost change, or `None` if infeasible.
pub fn swap_moves(instance: &Instance, s: &Schedule) -> Vec<(Move, Option<f64>)> {
    let mut state = PlacementState::from_schedule(instance, s);
    let mut out = Vec::new();
    scan_swaps(&mut state, |mv, d| out.push((mv, d)));
    out
}

/// Every relocation of a scheduled job with its cost change, or `None` if infeasible.
pub fn relocate_moves(instance: &Instance, s: &Schedule) -> Vec<(Move, Option<f64>)> {
    let mut state = PlacementState::from_schedule(instance, s);
    let mut out = Vec::new();
    scan_relocations(&mut state, |mv, d| out.push((mv, d)));
    out
}

fn best_of(state: &mut PlacementState<'_>, scan: fn(&mut PlacementState<'_>, &mut dyn FnMut(Move, Option<f64>))) -> Option<(Move, f64)> {
    let mut best: Option<(Move, f64)> = None;
    scan(state, &mut |mv, delta| {
        if let Some(d) = delta {
            if d < -IMPROVEMENT_EPS && best.is_none_or(|(_, b)| d < b) {
                best = Some((mv, d));
            }
        }
    });
    best
}

fn swap_scan(state: &mut PlacementState<'_>, visit: &mut dyn FnMut(Move, Option<f64>)) {
    scan_swaps(state, visit)
}

fn relocate_scan(state: &mut PlacementState<'_>, visit: &mut dyn FnMut(Move, Option<f64>)) {
    scan_relocations(state, visit)
}

/// Best improving swap as `(schedule after, delta)`.
pub fn swap_best(instance: &Instance, s: &Schedule) -> Option<(Schedule, f64)> {
    let mut state = PlacementState::from_schedule(instance, s);
    best_of(&mut state, swap_scan).map(|(mv, d)| {
        let mut next = s.clone();
        mv.apply(&mut next);
        (next, d)
    })
}

/// Best improving relocation as `(schedule after, delta)`.
pub fn relocate_best(instance: &Instance, s: &Schedule) -> Option<(Schedule, f64)> {
    let mut state = PlacementState::from_schedule(instance, s);
    best_of(&mut state, relocate_scan).map(|(mv, d)| {
        let mut next = s.clone();
        mv.apply(&mut next);
        (next, d)
    })
}

fn apply_to_state(state: &mut PlacementState<'_>, mv: Move) {
    match mv {
        Move::Swap { first, second } => {
            let a = state.remove(first).expect("scheduled");
            let b = state.remove(second).expect("scheduled");
            state.place(second, a.machine, a.start);
            state.place(first, b.machine, b.start);
        }
        Move::Relocate { job, machine, start } => {
            state.remove(job);
            state.place(job, machine, start);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VndStats {
    pub swaps: usize,
    pub relocations: usize,
    /// Cost after each accepted move.
    pub trajectory: Vec<f64>,
}

/// Swap then relocate, restarting from swap after every accepted move.
pub fn vnd(instance: &Instance, s: &Schedule) -> Schedule {
    vnd_with_stats(instance, s).0
}

pub fn vnd_with_stats(instance: &Instance, s: &Schedule) -> (Schedule, VndStats) {
    let mut state = PlacementState::from_schedule(instance, s);
    let mut stats = VndStats::default();
    let neighborhoods: [fn(&mut PlacementState<'_>, &mut dyn FnMut(Move, Option<f64>)); 2] = [swap_scan, relocate_scan];
    let mut k = 0;
    while k < neighborhoods.len() {
        match best_of(&mut state, neighborhoods[k]) {
            Some((mv, _)) => {
                apply_to_state(&mut state, mv);
                state.refresh_load();
                match mv {
                    Move::Swap { .. } => stats.swaps += 1,
                    Move::Relocate { .. } => stats.relocations += 1,
                }
                stats.trajectory.push(state.cost());
                k = 0;
            }
            None => k += 1,
        }
    }
    (state.into_schedule(), stats)
}
