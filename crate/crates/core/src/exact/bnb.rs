use std::time::Instant;

use super::{BnbOptions, SolveOutcome, SolveStatus};
use crate::model::{Instance, Schedule, IMPROVEMENT_EPS};
use crate::state::PlacementState;

const CLOCK_CHECK_INTERVAL: u64 = 1024;

struct Search<'a> {
    state: PlacementState<'a>,
    order: Vec<usize>,
    opts: BnbOptions,
    started: Instant,
    nodes: u64,
    /// Set when a limit is hit or the first feasible leaf is reached.
    halted: bool,
    best: Option<(f64, Schedule)>,
    /// Smallest bound among subtrees left unexplored by a halt.
    open_bound: f64,
}

impl Search<'_> {
    fn threshold(&self) -> f64 {
        let from_best = self.best.as_ref().map_or(f64::INFINITY, |(z, _)| z - IMPROVEMENT_EPS);
        from_best.min(self.opts.cutoff.unwrap_or(f64::INFINITY))
    }

    fn limit_reached(&self) -> bool {
        if let Some(limit) = self.opts.budget.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        match self.opts.budget.time_limit {
            Some(limit) if self.nodes.is_multiple_of(CLOCK_CHECK_INTERVAL) => self.started.elapsed() >= limit,
            _ => false,
        }
    }

    /// Feasible placements of `job` on the current load, cheapest first.
    fn candidates(&self, job: usize) -> Vec<(f64, usize, usize)> {
        let inst = self.state.instance();
        let p = inst.processing_time(job);
        let mut out = Vec::new();
        if p > inst.num_slots() {
            return out;
        }
        for machine in 0..inst.num_machines() {
            for start in 0..=inst.num_slots() - p {
                if let Some(delta) = self.state.try_insertion(job, machine, start) {
                    out.push((delta, machine, start));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        out
    }

    fn cheapest_insertion(&self, job: usize) -> Option<f64> {
        let inst = self.state.instance();
        let p = inst.processing_time(job);
        if p > inst.num_slots() {
            return None;
        }
        let mut best: Option<f64> = None;
        for machine in 0..inst.num_machines() {
            for start in 0..=inst.num_slots() - p {
                if let Some(delta) = self.state.try_insertion(job, machine, start) {
                    best = Some(best.map_or(delta, |b| b.min(delta)));
                }
            }
        }
        best
    }

    fn visit(&mut self, depth: usize, cost: f64) {
        self.nodes += 1;
        if depth == self.order.len() {
            let exact_cost = self.state.cost();
            if exact_cost < self.threshold() {
                self.best = Some((exact_cost, self.state.schedule().clone()));
                if self.opts.stop_at_first_feasible {
                    self.halted = true;
                }
            }
            return;
        }

        let job = self.order[depth];
        let cands = self.candidates(job);
        let Some(&(min_delta, _, _)) = cands.first() else {
            return;
        };
        let mut bound = cost + min_delta;
        for &other in &self.order[depth + 1..] {
            match self.cheapest_insertion(other) {
                Some(d) => bound += d,
                None => return,
            }
        }
        if bound >= self.threshold() {
            return;
        }
        if self.limit_reached() {
            self.halted = true;
            self.open_bound = self.open_bound.min(bound);
            return;
        }

        for (k, &(delta, machine, start)) in cands.iter().enumerate() {
            let estimate = bound + delta - min_delta;
            if estimate >= self.threshold() {
                break;
            }
            self.state.place(job, machine, start);
            self.visit(depth + 1, cost + delta);
            self.state.remove(job);
            if self.halted {
                if let Some(&(next, _, _)) = cands.get(k + 1) {
                    let estimate = bound + next - min_delta;
                    if estimate < self.threshold() {
                        self.open_bound = self.open_bound.min(estimate);
                    }
                }
                return;
            }
        }
    }
}

/// Depth-first search over placements of `free_jobs` around the `frozen` part.
///
/// Free jobs may go to any machine. Jobs are branched in decreasing processing
/// time and placements in increasing cost increase. A node is pruned when its
/// cost plus, for every unplaced job, the cheapest feasible insertion on the
/// current load cannot beat the incumbent; because slot cost is convex in the
/// load, later insertions never get cheaper, so the bound is admissible. A
/// frozen part that is itself infeasible yields `Infeasible`.
pub fn branch_and_bound(instance: &Instance, free_jobs: &[usize], frozen: &Schedule, opts: &BnbOptions) -> SolveOutcome {
    let started = Instant::now();
    let mut base = frozen.clone();
    for &j in free_jobs {
        base.unassign(j);
    }
    let infeasible = |nodes| SolveOutcome {
        status: SolveStatus::Infeasible,
        incumbent: None,
        z_ub: None,
        z_lb: None,
        runtime_s: started.elapsed().as_secs_f64(),
        nodes,
    };
    if !instance.check_feasibility(&base, false).feasible {
        return infeasible(0);
    }

    let mut order = free_jobs.to_vec();
    order.sort_unstable();
    order.dedup();
    order.sort_by_key(|&j| std::cmp::Reverse(instance.processing_time(j)));

    let state = PlacementState::from_schedule(instance, &base);
    let root_cost = state.cost();
    let mut search = Search {
        state,
        order,
        opts: *opts,
        started,
        nodes: 0,
        halted: false,
        best: None,
        open_bound: f64::INFINITY,
    };
    search.visit(0, root_cost);

    let runtime_s = started.elapsed().as_secs_f64();
    let nodes = search.nodes;
    match (search.best, search.halted) {
        (Some((z, schedule)), false) => SolveOutcome {
            status: SolveStatus::Optimal,
            incumbent: Some(schedule),
            z_ub: Some(z),
            z_lb: Some(z),
            runtime_s,
            nodes,
        },
        (Some((z, schedule)), true) => SolveOutcome {
            status: SolveStatus::FeasibleIncumbent,
            incumbent: Some(schedule),
            z_ub: Some(z),
            z_lb: Some(z.min(search.open_bound)),
            runtime_s,
            nodes,
        },
        (None, true) => SolveOutcome {
            status: SolveStatus::TimeLimitNoSolution,
            incumbent: None,
            z_ub: None,
            z_lb: search.open_bound.is_finite().then_some(search.open_bound),
            runtime_s,
            nodes,
        },
        (None, false) => infeasible(nodes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SearchBudget;
    use crate::fixtures;

    #[test]
    fn fig3_optimum() {
        let inst = fixtures::fig3_variable();
        let out = branch_and_bound(&inst, &[0], &Schedule::new(), &BnbOptions::unlimited());
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.z_ub.unwrap() - 0.24).abs() < 1e-9);
        assert_eq!(out.incumbent.unwrap().get(0).unwrap().start, 1);
    }

    #[test]
    fn fig1_is_infeasible() {
        let out = branch_and_bound(&fixtures::fig1_variable(), &[0, 1], &Schedule::new(), &BnbOptions::unlimited());
        assert_eq!(out.status, SolveStatus::Infeasible);
        let out = branch_and_bound(&fixtures::fig1_fixed(), &[0, 1], &Schedule::new(), &BnbOptions::unlimited());
        assert_eq!(out.status, SolveStatus::Optimal);
    }

    #[test]
    fn no_free_jobs_evaluates_frozen() {
        let inst = fixtures::fig3_variable();
        let mut frozen = Schedule::new();
        frozen.assign(0, 0, 0);
        let out = branch_and_bound(&inst, &[], &frozen, &BnbOptions::unlimited());
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.z_ub.unwrap() - 0.51).abs() < 1e-9);
    }

    #[test]
    fn cutoff_excludes_non_improving() {
        let inst = fixtures::fig3_variable();
        let opts = BnbOptions {
            cutoff: Some(0.24 - 1e-9),
            ..BnbOptions::unlimited()
        };
        assert_eq!(branch_and_bound(&inst, &[0], &Schedule::new(), &opts).status, SolveStatus::Infeasible);
    }

    #[test]
    fn infeasible_frozen_part() {
        let inst = fixtures::fig2_fixed();
        let mut frozen = Schedule::new();
        frozen.assign(0, 0, 0);
        frozen.assign(1, 1, 0);
        let out = branch_and_bound(&inst, &[], &frozen, &BnbOptions::unlimited());
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_bounds() {
        let base = crate::instgen::generate_base(&crate::instgen::GenParams::new(8, 2, 24, 0.7, 5)).unwrap();
        let inst = crate::instgen::derive_variable(&base, 5);
        let jobs: Vec<usize> = (0..8).collect();
        let opts = BnbOptions {
            budget: SearchBudget::nodes(50),
            ..BnbOptions::unlimited()
        };
        let out = branch_and_bound(&inst, &jobs, &Schedule::new(), &opts);
        assert!(out.nodes <= 50);
        if let (Some(ub), Some(lb)) = (out.z_ub, out.z_lb) {
            assert!(lb <= ub + 1e-6);
        }
    }
}
