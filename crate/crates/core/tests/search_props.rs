mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volt_sched::construct::{insert_all, OrderingCriterion};
use volt_sched::exact::{branch_and_bound, milp_search, oracle_enumerate, BnbOptions, MilpSearchConfig, SearchBudget};
use volt_sched::ils::{run_ils, IlsConfig};
use volt_sched::neighborhood::{relocate_moves, swap_moves, vnd, vnd_with_stats};
use volt_sched::{Instance, Schedule};

fn feasible_pair(seed: u64) -> Option<(Instance, Schedule)> {
    let inst = common::random_tiny(seed, 5, 3, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17));
    common::random_feasible_schedule(&inst, &mut rng).map(|s| (inst, s))
}

fn small_milp() -> MilpSearchConfig {
    MilpSearchConfig {
        nodes0: 500,
        nodes_max: 4_000,
        ..MilpSearchConfig::deterministic()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn move_deltas_match_recomputation(seed in any::<u64>()) {
        let Some((inst, s)) = feasible_pair(seed) else { return Ok(()) };
        let base = inst.evaluate_tec(&s).unwrap();
        for (mv, delta) in swap_moves(&inst, &s).into_iter().chain(relocate_moves(&inst, &s)) {
            let mut next = s.clone();
            mv.apply(&mut next);
            let verdict = inst.check_feasibility(&next, true);
            match delta {
                Some(d) => {
                    prop_assert!(verdict.feasible, "{:?} reported feasible", mv);
                    let after = inst.evaluate_tec(&next).unwrap();
                    prop_assert!((after - base - d).abs() < 1e-9, "{:?}: {} vs {}", mv, after - base, d);
                }
                None => prop_assert!(!verdict.feasible, "{:?} reported infeasible", mv),
            }
        }
    }

    #[test]
    fn vnd_is_feasible_monotone_and_idempotent(seed in any::<u64>()) {
        let Some((inst, s)) = feasible_pair(seed) else { return Ok(()) };
        let (out, stats) = vnd_with_stats(&inst, &s);
        prop_assert!(inst.check_feasibility(&out, true).feasible);
        let z0 = inst.evaluate_tec(&s).unwrap();
        let z1 = inst.evaluate_tec(&out).unwrap();
        prop_assert!(z1 <= z0 + 1e-12);
        let mut previous = z0;
        for z in &stats.trajectory {
            prop_assert!(*z < previous);
            previous = *z;
        }
        prop_assert_eq!(vnd(&inst, &out), out);
    }

    #[test]
    fn insertion_keeps_the_partial_schedule(seed in any::<u64>(), keep in 0usize..5) {
        let Some((inst, s)) = feasible_pair(seed) else { return Ok(()) };
        let mut partial = Schedule::new();
        let mut pending = Vec::new();
        for (j, a) in s.iter() {
            if j < keep {
                partial.assign(j, a.machine, a.start);
            } else {
                pending.push(j);
            }
        }
        for criterion in [OrderingCriterion::JobIndexAsc, OrderingCriterion::ProcessingTimeDesc, OrderingCriterion::Random(seed)] {
            if let Ok(out) = insert_all(&inst, &partial, &pending, criterion, false) {
                prop_assert!(inst.check_feasibility(&out, true).feasible);
                for (j, a) in partial.iter() {
                    prop_assert_eq!(out.get(j), Some(a));
                }
            }
        }
    }

    #[test]
    fn milp_search_never_worsens(seed in any::<u64>()) {
        let Some((inst, s)) = feasible_pair(seed) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = milp_search(&inst, &s, &small_milp(), false, None, &mut rng);
        prop_assert!(inst.check_feasibility(&result.schedule, true).feasible);
        let z0 = inst.evaluate_tec(&s).unwrap();
        let z1 = inst.evaluate_tec(&result.schedule).unwrap();
        prop_assert!(z1 <= z0);
        prop_assert_eq!(result.improved, z1 < z0 - 1e-9);
        if !result.improved {
            prop_assert_eq!(result.schedule, s);
        }
    }

    #[test]
    fn truncated_search_brackets_the_optimum(seed in any::<u64>(), nodes in 1u64..200) {
        let inst = common::random_tiny(seed, 4, 2, 8);
        let opt = oracle_enumerate(&inst).unwrap();
        let jobs: Vec<usize> = (0..inst.num_jobs()).collect();
        let opts = BnbOptions { budget: SearchBudget::nodes(nodes), ..BnbOptions::unlimited() };
        let out = branch_and_bound(&inst, &jobs, &Schedule::new(), &opts);
        if let Some(z) = opt.z_ub {
            if let Some(lb) = out.z_lb {
                prop_assert!(lb <= z + 1e-9, "bound {} above optimum {}", lb, z);
            }
            if let Some(ub) = out.z_ub {
                prop_assert!(ub >= z - 1e-9);
                prop_assert!((inst.evaluate_tec(out.incumbent.as_ref().unwrap()).unwrap() - ub).abs() < 1e-9);
            }
        } else {
            prop_assert!(out.z_ub.is_none());
        }
    }

    #[test]
    fn frozen_jobs_stay_put(seed in any::<u64>()) {
        let Some((inst, s)) = feasible_pair(seed) else { return Ok(()) };
        let frozen: Schedule = {
            let mut f = Schedule::new();
            for (j, a) in s.iter().filter(|(j, _)| j % 2 == 0) {
                f.assign(j, a.machine, a.start);
            }
            f
        };
        let free: Vec<usize> = (0..inst.num_jobs()).filter(|j| j % 2 == 1).collect();
        let out = branch_and_bound(&inst, &free, &frozen, &BnbOptions::unlimited());
        let best = out.incumbent.expect("the input schedule completes the frozen part");
        prop_assert!(inst.check_feasibility(&best, true).feasible);
        for (j, a) in frozen.iter() {
            prop_assert_eq!(best.get(j), Some(a));
        }
        prop_assert!(out.z_ub.unwrap() <= inst.evaluate_tec(&s).unwrap() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ils_incumbent_only_improves(seed in any::<u64>()) {
        let inst = common::random_tiny(seed, 5, 3, 10);
        let cfg = IlsConfig {
            max_noimprove_iters: 5,
            milp: small_milp(),
            ..IlsConfig::deterministic(seed)
        };
        let Ok(report) = run_ils(&inst, &cfg) else { return Ok(()) };
        prop_assert!(inst.check_feasibility(&report.best, true).feasible);
        let mut best = report.z_construct;
        for it in &report.iterations {
            if it.accepted {
                prop_assert!(it.tec < best - 1e-9);
                best = it.tec;
            } else {
                prop_assert!(it.tec >= best - 1e-9);
            }
            // The exact step only runs when descent alone did not beat the best.
            if !it.used_milp {
                prop_assert!(it.accepted);
            }
        }
        prop_assert_eq!(best, report.z_heur);
        let again = run_ils(&inst, &cfg).unwrap();
        prop_assert!(report.same_outcome(&again));
    }
}
