use std::time::Instant;

use thiserror::Error;

use super::{SolveOutcome, SolveStatus};
use crate::model::{Instance, Schedule, ENERGY_TOL};

/// Largest `n·(m·|T|)^n` the oracle accepts.
pub const ORACLE_NODE_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for oracle: n*(m*T)^n = {0:e} exceeds {ORACLE_NODE_LIMIT:e}")]
    TooLarge(f64),
}

/// Exhaustive enumeration of every complete assignment.
///
/// Shares no search code with [`super::branch_and_bound`]: it walks all
/// (machine, start) combinations with an odometer and checks overlaps and the
/// budget only at complete assignments, evaluating cost from scratch.
pub fn oracle_enumerate(instance: &Instance) -> Result<SolveOutcome, OracleError> {
    let started = Instant::now();
    let n = instance.num_jobs();
    let m = instance.num_machines();
    let slots = instance.num_slots();
    let size = n as f64 * ((m * slots) as f64).powi(n as i32);
    if size > ORACLE_NODE_LIMIT {
        return Err(OracleError::TooLarge(size));
    }

    let p: Vec<usize> = instance.jobs().iter().map(|j| j.processing_time).collect();
    let done = |status, best: Option<(f64, Vec<(usize, usize)>)>, nodes| {
        let incumbent = best.as_ref().map(|(_, placement)| {
            let mut s = Schedule::new();
            for (job, &(machine, start)) in placement.iter().enumerate() {
                s.assign(job, machine, start);
            }
            s
        });
        let z = best.map(|(z, _)| z);
        SolveOutcome {
            status,
            incumbent,
            z_ub: z,
            z_lb: z,
            runtime_s: started.elapsed().as_secs_f64(),
            nodes,
        }
    };
    if p.iter().any(|&pj| pj > slots) {
        return Ok(done(SolveStatus::Infeasible, None, 0));
    }

    let rates: Vec<f64> = instance
        .machines()
        .iter()
        .map(|mc| mc.level * instance.grid().slot_hours())
        .collect();
    let options: Vec<usize> = p.iter().map(|&pj| m * (slots - pj + 1)).collect();
    let decode = |job: usize, digit: usize| (digit / (slots - p[job] + 1), digit % (slots - p[job] + 1));

    let mut digits = vec![0usize; n];
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut nodes = 0u64;
    let mut load = vec![0.0; slots];
    let mut busy = vec![false; m * slots];
    loop {
        nodes += 1;
        load.iter_mut().for_each(|l| *l = 0.0);
        busy.iter_mut().for_each(|b| *b = false);
        let mut overlap = false;
        for job in 0..n {
            let (machine, start) = decode(job, digits[job]);
            for (k, v) in instance.jobs()[job].base_consumption.iter().enumerate() {
                let cell = machine * slots + start + k;
                overlap |= busy[cell];
                busy[cell] = true;
                load[start + k] += rates[machine] * v;
            }
        }
        if !overlap && load.iter().all(|l| *l <= instance.budget() + ENERGY_TOL) {
            let cost: f64 = (0..slots)
                .map(|t| {
                    let net = load[t] - instance.pv_supply()[t];
                    instance.buy_cost()[t] * net.max(0.0) - instance.sell_price()[t] * (-net).max(0.0)
                })
                .sum();
            if best.as_ref().is_none_or(|(z, _)| cost < *z) {
                best = Some((cost, (0..n).map(|j| decode(j, digits[j])).collect()));
            }
        }

        let mut pos = 0;
        loop {
            if pos == n {
                let status = if best.is_some() {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Infeasible
                };
                return Ok(done(status, best, nodes));
            }
            digits[pos] += 1;
            if digits[pos] < options[pos] {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
