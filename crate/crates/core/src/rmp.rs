//! Restricted master problem: the set-cover LP over the current columns.
//!
//! ```text
//! min  Σ_l c_l θ_l
//! s.t. Σ_l a_ul θ_l ≥ 1   for every customer u   [π_u]
//!      Σ_l θ_l      ≤ K                           [-π_0]
//!      θ ≥ 0
//! ```

use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance};
use crate::lp::{self, LpProblem, LpStatus, RowKind};
use crate::route::{DualSolution, Route};

/// Duals this close below zero are rounding noise and are clamped.
const DUAL_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub route: Route,
    pub cost: f64,
    /// `(u, a_ul)` for every customer the route visits, ascending by `u`.
    pub cover: Vec<(usize, u32)>,
}

impl Column {
    pub fn new(route: Route, c: &CostMatrix) -> Self {
        let cost = route.cost(c);
        let mut cover: Vec<(usize, u32)> = Vec::new();
        for u in route.customers().iter() {
            cover.push((u, route.visits(u) as u32));
        }
        Column { route, cost, cover }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub status: RmpStatus,
    pub objective: f64,
    pub theta: Vec<f64>,
    pub duals: DualSolution,
}

impl RmpSolution {
    /// `Σ_u π_u − K π_0`.
    pub fn dual_objective(&self, fleet: u32) -> f64 {
        self.duals.pi.iter().skip(1).sum::<f64>() - fleet as f64 * self.duals.pi0
    }
}

/// The LP over `columns` for `n` customers and fleet bound `fleet`.
pub fn master_lp(columns: &[Column], n: usize, fleet: u32) -> LpProblem<f64> {
    let mut rows: Vec<(RowKind, f64)> = (0..n).map(|_| (RowKind::Ge, 1.0)).collect();
    rows.push((RowKind::Le, fleet as f64));
    let mut p = LpProblem::new(rows);
    for col in columns {
        let mut entries: Vec<(usize, f64)> = col.cover.iter().map(|&(u, a)| (u - 1, a as f64)).collect();
        entries.push((n, 1.0));
        p.add_column(col.cost, entries);
    }
    p
}

pub fn solve_rmp(columns: &[Column], n: usize, fleet: u32) -> Result<RmpSolution> {
    if columns.is_empty() {
        return Err(Error::Contract("the master problem needs at least one column".into()));
    }
    let sol = lp::solve(&master_lp(columns, n, fleet))?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(RmpSolution {
                status: RmpStatus::Infeasible,
                objective: f64::INFINITY,
                theta: vec![0.0; columns.len()],
                duals: DualSolution::zeros(n),
            })
        }
        LpStatus::Unbounded => return Err(Error::Internal("master LP reported unbounded".into())),
    }
    let clamp = |v: f64| {
        if v < 0.0 && v > -DUAL_CLAMP {
            0.0
        } else {
            v
        }
    };
    let pi: Vec<f64> = sol.duals[..n].iter().map(|&v| clamp(v)).collect();
    let pi0 = clamp(-sol.duals[n]);
    let duals = DualSolution::new(&pi, pi0).map_err(|e| Error::Internal(format!("master duals out of sign: {e}")))?;
    Ok(RmpSolution {
        status: RmpStatus::Optimal,
        objective: sol.objective,
        theta: sol.x,
        duals,
    })
}

/// One out-and-back route per customer.
pub fn initial_columns(inst: &Instance, c: &CostMatrix) -> Vec<Column> {
    inst.customers()
        .map(|u| Column::new(Route::new(vec![u], inst).expect("customer id in range"), c))
        .collect()
}

/// `rmp_obj + n · min(0, min_rc)`; valid only when `min_rc` is exact.
pub fn lagrangian_bound(rmp_obj: f64, min_rc: f64, n: usize) -> f64 {
    rmp_obj + n as f64 * min_rc.min(0.0)
}
