//! The three five-slot illustration instances (budget 4, identical machines).
//!
//! Machine levels are chosen so that `level × slot_hours = 1`, which makes the
//! consumption weights equal to kWh per slot. The first two examples use flat
//! prices (buy 1, sell 0, no PV); the third uses a cheap middle slot.

use crate::model::{Instance, Job, Machine, TimeGrid};

const SLOTS: usize = 5;
const BUDGET: f64 = 4.0;

fn unit_machines(count: usize) -> Vec<Machine> {
    let grid = TimeGrid::new(SLOTS).expect("five slots");
    (0..count)
        .map(|id| Machine {
            id,
            level: 1.0 / grid.slot_hours(),
        })
        .collect()
}

fn build(profiles: &[&[f64]], machines: usize, buy: Vec<f64>) -> Instance {
    let jobs = profiles
        .iter()
        .enumerate()
        .map(|(id, v)| Job::new(id, v.to_vec()))
        .collect();
    Instance::new(
        jobs,
        unit_machines(machines),
        TimeGrid::new(SLOTS).expect("five slots"),
        buy,
        vec![0.0; SLOTS],
        vec![0.0; SLOTS],
        BUDGET,
    )
    .expect("fixture is valid")
}

fn flat() -> Vec<f64> {
    vec![1.0; SLOTS]
}

fn fig3_prices() -> Vec<f64> {
    vec![0.10, 0.10, 0.01, 0.10, 0.10]
}

/// Two 4-slot jobs `[2,4,1,1]` and `[1,2,4,1]` on two machines: no feasible schedule.
pub fn fig1_variable() -> Instance {
    build(&[&[2.0, 4.0, 1.0, 1.0], &[1.0, 2.0, 4.0, 1.0]], 2, flat())
}

/// Constant-consumption twin of [`fig1_variable`]: `[2,2,2,2]` twice, feasible side by side.
pub fn fig1_fixed() -> Instance {
    build(&[&[2.0; 4], &[2.0; 4]], 2, flat())
}

/// Two 3-slot jobs `[4,4,1]` and `[1,4,4]`: feasible when staggered by two slots.
pub fn fig2_variable() -> Instance {
    build(&[&[4.0, 4.0, 1.0], &[1.0, 4.0, 4.0]], 2, flat())
}

/// Constant-consumption twin of [`fig2_variable`]: `[3,3,3]` twice, always overlapping.
pub fn fig2_fixed() -> Instance {
    build(&[&[3.0; 3], &[3.0; 3]], 2, flat())
}

/// One job `[1,4,1]` on one machine; optimum 0.24 EUR at start 1.
pub fn fig3_variable() -> Instance {
    build(&[&[1.0, 4.0, 1.0]], 1, fig3_prices())
}

/// One job `[2,2,2]`; every start costs 0.42 EUR.
pub fn fig3_fixed() -> Instance {
    build(&[&[2.0; 3]], 1, fig3_prices())
}

/// Looks a fixture up by name (`fig1-variable`, `fig3-fixed`, ...).
pub fn by_name(name: &str) -> Option<Instance> {
    Some(match name {
        "fig1-variable" => fig1_variable(),
        "fig1-fixed" => fig1_fixed(),
        "fig2-variable" => fig2_variable(),
        "fig2-fixed" => fig2_fixed(),
        "fig3-variable" => fig3_variable(),
        "fig3-fixed" => fig3_fixed(),
        _ => return None,
    })
}

pub const NAMES: [&str; 6] = [
    "fig1-variable",
    "fig1-fixed",
    "fig2-variable",
    "fig2-fixed",
    "fig3-variable",
    "fig3-fixed",
];
