mod common;

use proptest::prelude::*;
use volt_sched::bench::{
    aggregate, cross_evaluate, gap_metrics, rows_to_csv, run_suite, InfeasReport, InstanceSource, SolverKind,
    SolverSpec, SuiteInstance, SuiteSpec, CSV_HEADER,
};
use volt_sched::exact::oracle_enumerate;
use volt_sched::instgen::{derive_fixed, derive_variable, generate_base, ConsumptionKind, GenParams};
use volt_sched::Schedule;

proptest! {
    #[test]
    fn gap_metrics_follow_their_formulas(ub in -100.0f64..100.0, lb in -100.0f64..100.0, heur in -100.0f64..100.0) {
        let g = gap_metrics(Some(ub), Some(lb), None);
        prop_assume!(lb.abs() > 1e-6 && ub.abs() > 1e-6);
        prop_assert!((g.pct_gap.unwrap() - 100.0 * (ub - lb) / lb).abs() < 1e-9 * (1.0 + g.pct_gap.unwrap().abs()));
        prop_assert!(g.pct_imp.is_none());
        let h = gap_metrics(Some(ub), Some(lb), Some(heur));
        prop_assert!((h.pct_imp.unwrap() - 100.0 * (heur - ub) / ub).abs() < 1e-9 * (1.0 + h.pct_imp.unwrap().abs()));
        prop_assert_eq!(gap_metrics(None, Some(lb), None).pct_gap, None);
        prop_assert_eq!(gap_metrics(Some(ub), Some(0.0), None).pct_gap, None);
    }

    #[test]
    fn infeasibility_report_is_consistent(load in prop::collection::vec(0.0f64..20.0, 1..40), budget in 0.0f64..15.0) {
        let r = InfeasReport::from_load(&load, budget);
        let sum: f64 = r.excess.iter().sum();
        prop_assert!((r.total_inf - sum).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.pct_inf_e));
        prop_assert!((0.0..=1.0).contains(&r.pct_inf_t));
        prop_assert_eq!(r.total_inf == 0.0, r.pct_inf_t == 0.0);
        if r.pct_inf_t > 0.0 {
            prop_assert!(r.min_inf > 0.0 && r.min_inf <= r.avg_inf + 1e-12 && r.avg_inf <= r.max_inf + 1e-12);
        }
        let mut reversed = load.clone();
        reversed.reverse();
        let s = InfeasReport::from_load(&reversed, budget);
        prop_assert_eq!(s.min_inf, r.min_inf);
        prop_assert_eq!(s.max_inf, r.max_inf);
        prop_assert!((s.total_inf - r.total_inf).abs() < 1e-9);
        prop_assert_eq!(s.pct_inf_t, r.pct_inf_t);
    }

    #[test]
    fn cross_evaluation_ignores_machine_labels_of_equal_machines(seed in 0u64..500) {
        let mut params = GenParams::new(6, 2, 24, 0.6, seed);
        params.level_choices = vec![40.0];
        let base = generate_base(&params).unwrap();
        let (fixed, variable) = (derive_fixed(&base), derive_variable(&base, seed));
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let Some(s) = common::random_schedule(&fixed, &mut rng) else { return Ok(()) };
        let mut swapped = Schedule::new();
        for (j, a) in s.iter() {
            swapped.assign(j, 1 - a.machine, a.start);
        }
        let a = cross_evaluate(&fixed, &s, &variable).unwrap();
        let b = cross_evaluate(&fixed, &swapped, &variable).unwrap();
        prop_assert_eq!(a, b);
        let own = cross_evaluate(&fixed, &s, &fixed).unwrap();
        if fixed.check_feasibility(&s, true).feasible {
            prop_assert_eq!(own.total_inf, 0.0);
        }
    }
}

#[test]
fn empty_suite_is_header_only() {
    assert_eq!(rows_to_csv(&run_suite(&SuiteSpec::default(), 1)).trim_end(), CSV_HEADER);
}

#[test]
fn ils_rows_only_lose_against_missed_optima() {
    let instances: Vec<SuiteInstance> = (0..20u64)
        .map(|seed| SuiteInstance {
            id: format!("tiny-{seed}"),
            source: InstanceSource::Generated {
                generate: GenParams::new(3, 2, 8, 0.6, seed),
                consumption: ConsumptionKind::Variable,
            },
        })
        .collect();
    let spec = SuiteSpec {
        instances,
        solvers: vec![
            SolverSpec::new(SolverKind::Oracle),
            SolverSpec {
                deterministic: true,
                max_noimprove_iters: Some(3),
                ..SolverSpec::new(SolverKind::Ils)
            },
        ],
    };
    let rows = run_suite(&spec, 4);
    assert_eq!(rows.len(), 40);
    for seed in 0..20u64 {
        let base = generate_base(&GenParams::new(3, 2, 8, 0.6, seed)).unwrap();
        let inst = derive_variable(&base, volt_sched::instgen::variable_seed(seed));
        let opt = oracle_enumerate(&inst).unwrap().z_ub;
        let id = format!("tiny-{seed}");
        let ils = rows.iter().find(|r| r.instance_id == id && r.solver == "ils").unwrap();
        let oracle = rows.iter().find(|r| r.instance_id == id && r.solver == "oracle").unwrap();
        assert_eq!(oracle.z_ub, opt);
        if let (Some(imp), Some(h), Some(z)) = (ils.pct_imp, ils.z_heur, opt) {
            assert!(imp >= -1e-9 || z < 0.0, "{id}: {imp}");
            if h <= z + 1e-9 {
                assert!(imp.abs() < 1e-6, "{id}: optimum hit but pct_imp = {imp}");
            }
        }
    }

    let agg = aggregate(&rows);
    for a in &agg {
        let members: Vec<_> = rows
            .iter()
            .filter(|r| r.group == Some((a.num_slots, a.num_jobs, a.num_machines)) && r.solver == a.solver)
            .collect();
        assert_eq!(a.rows, members.len());
        let times: f64 = members.iter().map(|r| r.time_s).sum::<f64>() / members.len() as f64;
        assert!((a.time_s - times).abs() < 1e-12);
        let imps: Vec<f64> = members.iter().filter_map(|r| r.pct_imp).collect();
        if !imps.is_empty() {
            let m = imps.iter().sum::<f64>() / imps.len() as f64;
            assert!((a.pct_imp.unwrap() - m).abs() < 1e-12);
        }
        assert_eq!(a.optimal, members.iter().filter(|r| r.status == "optimal").count());
    }
}

#[test]
fn failing_rows_do_not_abort_the_suite() {
    let spec = SuiteSpec {
        instances: vec![
            SuiteInstance { id: "missing".into(), source: InstanceSource::File { path: "/nonexistent/x.json".into() } },
            SuiteInstance { id: "ok".into(), source: InstanceSource::Fixture { fixture: "fig3-fixed".into() } },
        ],
        solvers: vec![SolverSpec::new(SolverKind::Oracle)],
    };
    let rows = run_suite(&spec, 1);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].status.starts_with("error: "), "{}", rows[0].status);
    assert!((rows[1].z_ub.unwrap() - 0.42).abs() < 1e-9);
}
