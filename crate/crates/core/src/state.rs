//! Incremental bookkeeping shared by the search procedures: per-slot load,
//! machine occupancy and the closed-form cost of placing or moving jobs.

use crate::model::{Assignment, Instance, Schedule, ENERGY_TOL};

#[derive(Debug, Clone)]
pub(crate) struct PlacementState<'a> {
    inst: &'a Instance,
    load: Vec<f64>,
    /// Owner job of `(machine, slot)`, stored row-major by machine.
    owner: Vec<Option<usize>>,
    schedule: Schedule,
    scratch: Vec<f64>,
    marked: Vec<bool>,
    touched: Vec<usize>,
}

impl<'a> PlacementState<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let slots = inst.num_slots();
        Self {
            inst,
            load: vec![0.0; slots],
            owner: vec![None; inst.num_machines() * slots],
            schedule: Schedule::new(),
            scratch: vec![0.0; slots],
            marked: vec![false; slots],
            touched: Vec::with_capacity(4 * slots),
        }
    }

    /// Loads a horizon-valid schedule. Overlapping assignments are not allowed.
    pub fn from_schedule(inst: &'a Instance, schedule: &Schedule) -> Self {
        let mut state = Self::new(inst);
        for (job, a) in schedule.iter() {
            state.place(job, a.machine, a.start);
        }
        state
    }

    #[inline]
    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    #[cfg(test)]
    pub fn load(&self) -> &[f64] {
        &self.load
    }

    #[inline]
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn into_schedule(self) -> Schedule {
        self.schedule
    }

    #[inline]
    fn cell(&self, machine: usize, slot: usize) -> usize {
        machine * self.inst.num_slots() + slot
    }

    #[inline]
    pub fn owner(&self, machine: usize, slot: usize) -> Option<usize> {
        self.owner[self.cell(machine, slot)]
    }

    /// Whether `[start, start + len)` on `machine` is inside the horizon and free.
    pub fn is_free(&self, machine: usize, start: usize, len: usize) -> bool {
        start + len <= self.inst.num_slots()
            && (start..start + len).all(|t| self.owner(machine, t).is_none())
    }

    /// Budget check for adding `job` at `(machine, start)` on top of the current load.
    pub fn fits_budget(&self, job: usize, machine: usize, start: usize) -> bool {
        let budget = self.inst.budget() + ENERGY_TOL;
        (0..self.inst.processing_time(job))
            .all(|k| self.load[start + k] + self.inst.consumption(job, machine, k) <= budget)
    }

    /// Cost increase of adding `job` at `(machine, start)` to the current load.
    pub fn insertion_delta(&self, job: usize, machine: usize, start: usize) -> f64 {
        let inst = self.inst;
        (0..inst.processing_time(job))
            .map(|k| {
                let t = start + k;
                let before = self.load[t];
                inst.slot_cost(t, before + inst.consumption(job, machine, k)) - inst.slot_cost(t, before)
            })
            .sum()
    }

    /// Cost increase of a feasible placement, or `None` if the machine is busy or the budget is exceeded.
    pub fn try_insertion(&self, job: usize, machine: usize, start: usize) -> Option<f64> {
        let p = self.inst.processing_time(job);
        if !self.is_free(machine, start, p) || !self.fits_budget(job, machine, start) {
            return None;
        }
        Some(self.insertion_delta(job, machine, start))
    }

    pub fn place(&mut self, job: usize, machine: usize, start: usize) {
        let p = self.inst.processing_time(job);
        for k in 0..p {
            let cell = self.cell(machine, start + k);
            debug_assert!(self.owner[cell].is_none(), "slot already taken");
            self.owner[cell] = Some(job);
            self.load[start + k] += self.inst.consumption(job, machine, k);
        }
        let previous = self.schedule.assign(job, machine, start);
        debug_assert!(previous.is_none(), "job placed twice");
    }

    pub fn remove(&mut self, job: usize) -> Option<Assignment> {
        let a = self.schedule.unassign(job)?;
        for k in 0..self.inst.processing_time(job) {
            let cell = self.cell(a.machine, a.start + k);
            self.owner[cell] = None;
            self.load[a.start + k] -= self.inst.consumption(job, a.machine, k);
        }
        Some(a)
    }

    /// Recomputes the load from the schedule, discarding accumulated rounding.
    pub fn refresh_load(&mut self) {
        self.load.iter_mut().for_each(|l| *l = 0.0);
        for (job, a) in self.schedule.iter() {
            for k in 0..self.inst.processing_time(job) {
                self.load[a.start + k] += self.inst.consumption(job, a.machine, k);
            }
        }
    }

    pub fn cost(&self) -> f64 {
        self.load
            .iter()
            .enumerate()
            .map(|(t, l)| self.inst.slot_cost(t, *l))
            .sum()
    }

    /// Evaluates replacing the `removed` jobs' assignments with `added` placements.
    ///
    /// Returns the cost delta if the result keeps machines free of overlaps and
    /// every touched slot within budget. Jobs in `removed` must be scheduled.
    pub fn evaluate_move(&mut self, removed: &[usize], added: &[(usize, usize, usize)]) -> Option<f64> {
        let inst = self.inst;
        // machine availability
        for (idx, &(job, machine, start)) in added.iter().enumerate() {
            let p = inst.processing_time(job);
            if start + p > inst.num_slots() {
                return None;
            }
            for t in start..start + p {
                if let Some(o) = self.owner(machine, t) {
                    if !removed.contains(&o) {
                        return None;
                    }
                }
            }
            for &(other, m2, s2) in &added[..idx] {
                if m2 == machine && start < s2 + inst.processing_time(other) && s2 < start + p {
                    return None;
                }
            }
        }

        self.touched.clear();
        for &job in removed {
            let a = self.schedule.get(job).expect("removed job is scheduled");
            for k in 0..inst.processing_time(job) {
                let t = a.start + k;
                if !self.marked[t] {
                    self.marked[t] = true;
                    self.touched.push(t);
                }
                self.scratch[t] -= inst.consumption(job, a.machine, k);
            }
        }
        for &(job, machine, start) in added {
            for k in 0..inst.processing_time(job) {
                let t = start + k;
                if !self.marked[t] {
                    self.marked[t] = true;
                    self.touched.push(t);
                }
                self.scratch[t] += inst.consumption(job, machine, k);
            }
        }

        let budget = inst.budget() + ENERGY_TOL;
        let mut feasible = true;
        let mut delta = 0.0;
        for &t in &self.touched {
            let before = self.load[t];
            let after = before + self.scratch[t];
            if after > budget && self.scratch[t] > 0.0 {
                feasible = false;
            }
            delta += inst.slot_cost(t, after) - inst.slot_cost(t, before);
            self.scratch[t] = 0.0;
            self.marked[t] = false;
        }
        feasible.then_some(delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn move_evaluation_matches_recomputation() {
        let inst = fixtures::fig3_variable();
        let mut s = Schedule::new();
        s.assign(0, 0, 0);
        let mut state = PlacementState::from_schedule(&inst, &s);
        let delta = state.evaluate_move(&[0], &[(0, 0, 1)]).unwrap();
        assert!((delta - (0.24 - 0.51)).abs() < 1e-12);
        assert!(state.evaluate_move(&[0], &[(0, 0, 3)]).is_none());
    }

    #[test]
    fn busy_machine_blocks_insertion() {
        let inst = fixtures::fig2_variable();
        let mut state = PlacementState::new(&inst);
        state.place(0, 0, 0);
        assert!(state.try_insertion(1, 0, 2).is_none());
        assert!(state.try_insertion(1, 1, 0).is_none());
        assert!(state.try_insertion(1, 1, 1).is_none());
        assert!(state.try_insertion(1, 1, 2).is_some());
        state.remove(0);
        assert_eq!(state.load(), &[0.0; 5]);
    }
}
