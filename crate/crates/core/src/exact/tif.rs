//! Time-indexed formulation.
//!
//! Variables: binary `X_j_i_t` (job `j` starts on machine `i` at slot `t`,
//! only for `t + p_j ≤ |T|`), continuous `W_j_t` (energy of job `j` in slot
//! `t`), `U_t` (bought) and `V_t` (sold). Objective `Σ c_t U_t − d_t V_t`.
//!
//! Rows:
//! - `ASSIGN_j`: `Σ_i Σ_t X_j_i_t = 1`
//! - `MACH_i_t`: `Σ_j Σ_{s ∈ [t−p_j+1, t]} X_j_i_s ≤ 1`
//! - `LINK_j_t`: `W_j_t − Σ_i Σ_s u_{j,i,t−s} X_j_i_s = 0`
//! - `BAL_t`: `Σ_j W_j_t − U_t + V_t = e_t`
//! - `CAP_t`: `U_t − V_t ≤ E − e_t`

use std::collections::HashMap;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use thiserror::Error;

use crate::model::{Instance, Schedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TifError {
    #[error("fixing references job {0}, which does not exist")]
    UnknownJob(usize),
    #[error("fixing of job {job} references no model variable (machine {machine}, start {start})")]
    NoSuchVariable { job: usize, machine: usize, start: usize },
    #[error("inconsistent fixings: jobs {0} and {1} overlap on machine {2} at slot {3}")]
    Overlap(usize, usize, usize, usize),
    #[error("model is infeasible")]
    Infeasible,
    #[error("model is unbounded")]
    Unbounded,
    #[error("LP backend failed: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub sense: RowSense,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TifModel {
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// `(job, machine, start)` of each X variable, in variable order.
    pub x_vars: Vec<(usize, usize, usize)>,
    x_index: HashMap<(usize, usize, usize), usize>,
    w_index: Vec<Vec<usize>>,
    u_index: Vec<usize>,
    v_index: Vec<usize>,
    /// Assignments pinned to 1.
    pub fixings: Schedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TifSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

impl TifModel {
    pub fn num_x(&self) -> usize {
        self.x_vars.len()
    }

    pub fn num_w(&self) -> usize {
        self.w_index.iter().map(Vec::len).sum()
    }

    pub fn num_u(&self) -> usize {
        self.u_index.len()
    }

    pub fn num_v(&self) -> usize {
        self.v_index.len()
    }

    pub fn x(&self, job: usize, machine: usize, start: usize) -> Option<usize> {
        self.x_index.get(&(job, machine, start)).copied()
    }

    pub fn w(&self, job: usize, slot: usize) -> usize {
        self.w_index[job][slot]
    }

    pub fn u(&self, slot: usize) -> usize {
        self.u_index[slot]
    }

    pub fn v(&self, slot: usize) -> usize {
        self.v_index[slot]
    }

    pub fn rows_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.name.starts_with(prefix))
    }

    /// Objective value at `values`.
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Solves with microlp. With `integral == false` the X variables are
    /// relaxed to `[0, 1]`; with all jobs fixed the relaxation is exact.
    pub fn solve(&self, integral: bool) -> Result<TifSolution, TifError> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self
            .variables
            .iter()
            .map(|v| match v.kind {
                VarKind::Binary if integral => {
                    problem.add_integer_var(v.objective, (v.lower.round() as i32, v.upper.round() as i32))
                }
                _ => problem.add_var(v.objective, (v.lower, v.upper)),
            })
            .collect();
        for row in &self.rows {
            let mut expr = LinearExpr::empty();
            for &(var, coeff) in &row.coeffs {
                expr.add(vars[var], coeff);
            }
            let op = match row.sense {
                RowSense::Eq => ComparisonOp::Eq,
                RowSense::Le => ComparisonOp::Le,
            };
            problem.add_constraint(expr, op, row.rhs);
        }
        let outcome = problem.solve().map_err(|e| match e {
            microlp::Error::Infeasible => TifError::Infeasible,
            microlp::Error::Unbounded => TifError::Unbounded,
            other => TifError::Backend(other.to_string()),
        })?;
        let solution = outcome
            .into_solution()
            .map_err(|_| TifError::Backend("solve interrupted".into()))?;
        let values = vars.iter().map(|v| solution.var_value(*v)).collect();
        Ok(TifSolution {
            objective: solution.objective(),
            values,
        })
    }

    /// Reads the schedule off an integral solution.
    pub fn schedule_from(&self, values: &[f64]) -> Schedule {
        self.x_vars
            .iter()
            .enumerate()
            .filter(|(k, _)| values[*k] > 0.5)
            .map(|(_, &(j, i, t))| (j, crate::model::Assignment { machine: i, start: t }))
            .collect()
    }
}

/// Builds the model, pinning the assignments in `fixings` to 1 and every other
/// start of a fixed job to 0.
pub fn build_tif(instance: &Instance, fixings: &Schedule) -> Result<TifModel, TifError> {
    let n = instance.num_jobs();
    let m = instance.num_machines();
    let slots = instance.num_slots();

    let mut cover: Vec<Option<usize>> = vec![None; m * slots];
    for (job, a) in fixings.iter() {
        if job >= n {
            return Err(TifError::UnknownJob(job));
        }
        let p = instance.processing_time(job);
        if a.machine >= m || a.start + p > slots {
            return Err(TifError::NoSuchVariable {
                job,
                machine: a.machine,
                start: a.start,
            });
        }
        for t in a.start..a.start + p {
            let cell = &mut cover[a.machine * slots + t];
            if let Some(other) = *cell {
                return Err(TifError::Overlap(other, job, a.machine, t));
            }
            *cell = Some(job);
        }
    }

    let mut variables = Vec::new();
    let mut x_vars = Vec::new();
    let mut x_index = HashMap::new();
    for job in 0..n {
        let p = instance.processing_time(job);
        if p > slots {
            continue;
        }
        let pinned = fixings.get(job);
        for machine in 0..m {
            for start in 0..=slots - p {
                let (lower, upper) = match pinned {
                    Some(a) if a.machine == machine && a.start == start => (1.0, 1.0),
                    Some(_) => (0.0, 0.0),
                    None => (0.0, 1.0),
                };
                x_index.insert((job, machine, start), variables.len());
                x_vars.push((job, machine, start));
                variables.push(Variable {
                    name: format!("X_{job}_{machine}_{start}"),
                    kind: VarKind::Binary,
                    lower,
                    upper,
                    objective: 0.0,
                });
            }
        }
    }
    let mut w_index = vec![Vec::with_capacity(slots); n];
    for (job, w) in w_index.iter_mut().enumerate() {
        for t in 0..slots {
            w.push(variables.len());
            variables.push(Variable {
                name: format!("W_{job}_{t}"),
                kind: VarKind::Continuous,
                lower: 0.0,
                upper: f64::INFINITY,
                objective: 0.0,
            });
        }
    }
    let mut u_index = Vec::with_capacity(slots);
    let mut v_index = Vec::with_capacity(slots);
    for t in 0..slots {
        u_index.push(variables.len());
        variables.push(Variable {
            name: format!("U_{t}"),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: f64::INFINITY,
            objective: instance.buy_cost()[t],
        });
    }
    for t in 0..slots {
        v_index.push(variables.len());
        variables.push(Variable {
            name: format!("V_{t}"),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: f64::INFINITY,
            objective: -instance.sell_price()[t],
        });
    }

    let mut rows = Vec::new();
    for job in 0..n {
        let coeffs = x_vars
            .iter()
            .enumerate()
            .filter(|(_, x)| x.0 == job)
            .map(|(k, _)| (k, 1.0))
            .collect();
        rows.push(Row {
            name: format!("ASSIGN_{job}"),
            sense: RowSense::Eq,
            coeffs,
            rhs: 1.0,
        });
    }
    for machine in 0..m {
        for t in 0..slots {
            let mut coeffs = Vec::new();
            for job in 0..n {
                let p = instance.processing_time(job);
                for s in t.saturating_sub(p - 1)..=t {
                    if let Some(&k) = x_index.get(&(job, machine, s)) {
                        coeffs.push((k, 1.0));
                    }
                }
            }
            rows.push(Row {
                name: format!("MACH_{machine}_{t}"),
                sense: RowSense::Le,
                coeffs,
                rhs: 1.0,
            });
        }
    }
    for job in 0..n {
        let p = instance.processing_time(job);
        for t in 0..slots {
            let mut coeffs = vec![(w_index[job][t], 1.0)];
            for machine in 0..m {
                for s in t.saturating_sub(p - 1)..=t {
                    if let Some(&k) = x_index.get(&(job, machine, s)) {
                        coeffs.push((k, -instance.consumption(job, machine, t - s)));
                    }
                }
            }
            rows.push(Row {
                name: format!("LINK_{job}_{t}"),
                sense: RowSense::Eq,
                coeffs,
                rhs: 0.0,
            });
        }
    }
    for t in 0..slots {
        let mut coeffs: Vec<(usize, f64)> = (0..n).map(|job| (w_index[job][t], 1.0)).collect();
        coeffs.push((u_index[t], -1.0));
        coeffs.push((v_index[t], 1.0));
        rows.push(Row {
            name: format!("BAL_{t}"),
            sense: RowSense::Eq,
            coeffs,
            rhs: instance.pv_supply()[t],
        });
    }
    for t in 0..slots {
        rows.push(Row {
            name: format!("CAP_{t}"),
            sense: RowSense::Le,
            coeffs: vec![(u_index[t], 1.0), (v_index[t], -1.0)],
            rhs: instance.budget() - instance.pv_supply()[t],
        });
    }

    Ok(TifModel {
        variables,
        rows,
        x_vars,
        x_index,
        w_index,
        u_index,
        v_index,
        fixings: fixings.clone(),
    })
}
