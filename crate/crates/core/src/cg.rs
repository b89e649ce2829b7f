//! The column generation loop: solve the master LP, price with DSSR over LA
//! routes, add the negative columns, repeat until pricing proves optimality.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::dssr::{price_elementary, CycleChoice, CycleRule, DssrConfig, EarlyExit, RC_EPS};
use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance};
use crate::la_arcs::ComponentPathTable;
use crate::neighbors::NeighborSets;
use crate::pricing::PricingConfig;
use crate::rmp::{initial_columns, lagrangian_bound, solve_rmp, Column, RmpStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct CgConfig {
    /// LA neighbors per customer; 0 is plain DSSR.
    pub la_k: usize,
    pub cycle_rule: CycleRule,
    pub early_exit: EarlyExit,
    /// Add only the single best column per iteration.
    pub single_column: bool,
    pub time_limit: Option<Duration>,
    pub max_iterations: usize,
    pub pricing: PricingConfig,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            la_k: 10,
            cycle_rule: CycleRule::default(),
            early_exit: EarlyExit::default(),
            single_column: false,
            time_limit: None,
            max_iterations: 100_000,
            pricing: PricingConfig::default(),
        }
    }
}

impl CgConfig {
    /// Short label such as `la10`, `la5_shortest` or `la0_single`.
    pub fn arm(&self) -> String {
        let mut s = format!("la{}", self.la_k);
        if self.cycle_rule == CycleRule::ShortestCycle {
            s.push_str("_shortest");
        }
        if self.early_exit == EarlyExit::FirstNegative {
            s.push_str("_early");
        }
        if self.single_column {
            s.push_str("_single");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Converged,
    TimeLimit,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgRow {
    pub iteration: usize,
    pub rmp_objective: f64,
    pub min_reduced_cost: f64,
    /// Whether `min_reduced_cost` came from a full DSSR run.
    pub exact: bool,
    pub lagrangian_bound: Option<f64>,
    pub pricing_secs: f64,
    pub rmp_secs: f64,
    pub dssr_iterations: usize,
    pub nodes_expanded: u64,
    pub columns_added: usize,
}

/// One DSSR round inside one pricing call.
#[derive(Debug, Clone, PartialEq)]
pub struct DssrRecord {
    pub cg_iteration: usize,
    pub round: usize,
    pub la_objective: f64,
    pub ng_total: usize,
    pub nodes_expanded: u64,
    pub cycle: Option<CycleChoice>,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub status: CgStatus,
    pub objective: f64,
    pub columns: Vec<Column>,
    pub theta: Vec<f64>,
    pub trace: Vec<CgRow>,
    pub dssr_log: Vec<DssrRecord>,
    pub table_secs: f64,
    pub pricing_secs: f64,
    pub rmp_secs: f64,
    pub total_secs: f64,
}

impl CgOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

pub fn solve(inst: &Instance, cfg: &CgConfig) -> Result<CgOutcome> {
    let start = Instant::now();
    let c = CostMatrix::new(inst);
    let n = inst.n();
    let mut sets = NeighborSets::build(inst, cfg.la_k);
    let table_start = Instant::now();
    let table = ComponentPathTable::build(inst, &sets)?;
    let table_secs = table_start.elapsed().as_secs_f64();

    let mut columns = initial_columns(inst, &c);
    let mut known: HashSet<Vec<usize>> = columns.iter().map(|col| col.route.seq().to_vec()).collect();
    let mut trace = Vec::new();
    let mut dssr_log = Vec::new();
    let mut pricing_secs = 0.0;
    let mut rmp_secs = 0.0;
    let mut status = CgStatus::IterationLimit;
    let mut last = None;

    for iteration in 1..=cfg.max_iterations {
        let t = Instant::now();
        let sol = solve_rmp(&columns, n, inst.fleet())?;
        let rmp_t = t.elapsed().as_secs_f64();
        rmp_secs += rmp_t;
        if sol.status == RmpStatus::Infeasible {
            return Err(Error::Internal("master LP infeasible; the fleet bound is too small".into()));
        }
        if cfg.time_limit.is_some_and(|lim| start.elapsed() >= lim) {
            status = CgStatus::TimeLimit;
            last = Some(sol);
            break;
        }

        let t = Instant::now();
        let mut dcfg = DssrConfig {
            cycle_rule: cfg.cycle_rule,
            early_exit: cfg.early_exit,
            pricing: cfg.pricing,
        };
        let mut res = price_elementary(inst, &mut sets, &table, &c, &sol.duals, &dcfg)?;
        let mut dssr_rounds = res.iterations.len();
        let mut nodes = res.nodes_expanded();
        log_rounds(&mut dssr_log, iteration, &res.iterations);

        let mut fresh = pick_columns(&res, cfg.single_column, &known);
        if fresh.is_empty() && !res.exact {
            // every early column is already known: fall back to a full run
            dcfg.early_exit = EarlyExit::Off;
            res = price_elementary(inst, &mut sets, &table, &c, &sol.duals, &dcfg)?;
            dssr_rounds += res.iterations.len();
            nodes += res.nodes_expanded();
            log_rounds(&mut dssr_log, iteration, &res.iterations);
            fresh = pick_columns(&res, cfg.single_column, &known);
        }
        let price_t = t.elapsed().as_secs_f64();
        pricing_secs += price_t;

        let converged = res.exact && res.reduced_cost >= -RC_EPS;
        if !converged && fresh.is_empty() {
            log::warn!(
                "pricing returned a known column with reduced cost {:.3e}; stopping",
                res.reduced_cost
            );
        }
        for r in &fresh {
            known.insert(r.seq().to_vec());
            columns.push(Column::new(r.clone(), &c));
        }
        trace.push(CgRow {
            iteration,
            rmp_objective: sol.objective,
            min_reduced_cost: res.reduced_cost,
            exact: res.exact,
            lagrangian_bound: res.exact.then(|| lagrangian_bound(sol.objective, res.reduced_cost, n)),
            pricing_secs: price_t,
            rmp_secs: rmp_t,
            dssr_iterations: dssr_rounds,
            nodes_expanded: nodes,
            columns_added: fresh.len(),
        });
        if converged || fresh.is_empty() {
            status = CgStatus::Converged;
            last = Some(sol);
            break;
        }
    }

    let sol = match last {
        Some(s) => s,
        None => solve_rmp(&columns, n, inst.fleet())?,
    };
    Ok(CgOutcome {
        status,
        objective: sol.objective,
        columns,
        theta: sol.theta,
        trace,
        dssr_log,
        table_secs,
        pricing_secs,
        rmp_secs,
        total_secs: start.elapsed().as_secs_f64(),
    })
}

fn log_rounds(log: &mut Vec<DssrRecord>, cg_iteration: usize, rounds: &[crate::dssr::DssrIteration]) {
    for (i, it) in rounds.iter().enumerate() {
        log.push(DssrRecord {
            cg_iteration,
            round: i + 1,
            la_objective: it.reduced_cost,
            ng_total: it.ng_total,
            nodes_expanded: it.nodes_expanded,
            cycle: it.cycle.clone(),
        });
    }
}

fn pick_columns(res: &crate::dssr::DssrResult, single: bool, known: &HashSet<Vec<usize>>) -> Vec<crate::route::Route> {
    let mut out: Vec<crate::route::Route> = Vec::new();
    let mut push = |r: &crate::route::Route, rc: f64| {
        if rc < -RC_EPS && !known.contains(r.seq()) && !out.contains(r) {
            out.push(r.clone());
        }
    };
    push(&res.route, res.reduced_cost);
    if !single {
        for (r, rc) in &res.early_columns {
            push(r, *rc);
        }
    }
    out
}

/// Per-iteration trace. Holds no timings, so identical runs give identical
/// files; timings go to [`write_timing`].
pub fn write_trace<W: Write>(out: W, outcome: &CgOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "rmp_objective",
        "min_reduced_cost",
        "exact",
        "lagrangian_bound",
        "convergence_gap",
        "dssr_iterations",
        "nodes_expanded",
        "columns_added",
    ])?;
    for row in &outcome.trace {
        w.write_record([
            row.iteration.to_string(),
            row.rmp_objective.to_string(),
            row.min_reduced_cost.to_string(),
            row.exact.to_string(),
            row.lagrangian_bound.map(|b| b.to_string()).unwrap_or_default(),
            (row.rmp_objective - outcome.objective + 1.0).to_string(),
            row.dssr_iterations.to_string(),
            row.nodes_expanded.to_string(),
            row.columns_added.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing<W: Write>(out: W, outcome: &CgOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "rmp_objective", "pricing_secs", "rmp_secs"])?;
    for row in &outcome.trace {
        w.write_record([
            row.iteration.to_string(),
            row.rmp_objective.to_string(),
            row.pricing_secs.to_string(),
            row.rmp_secs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dssr_log<W: Write>(out: W, outcome: &CgOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "cg_iteration",
        "round",
        "la_objective",
        "ng_total",
        "nodes_expanded",
        "cycle_customer",
        "cycle_start",
        "cycle_end",
        "augmented",
        "growth_estimate",
    ])?;
    for r in &outcome.dssr_log {
        let (cu, cs, ce, aug, g) = match &r.cycle {
            Some(ch) => (
                ch.customer.to_string(),
                ch.start.to_string(),
                ch.end.to_string(),
                ch.augment.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" "),
                ch.growth.to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            r.cg_iteration.to_string(),
            r.round.to_string(),
            r.la_objective.to_string(),
            r.ng_total.to_string(),
            r.nodes_expanded.to_string(),
            cu,
            cs,
            ce,
            aug,
            g,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Column pool at the end of the run: route, cost and weight.
pub fn write_columns<W: Write>(out: W, outcome: &CgOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["route", "cost", "theta"])?;
    for (col, th) in outcome.columns.iter().zip(&outcome.theta) {
        w.write_record([col.route.to_string(), col.cost.to_string(), th.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes trace, timing, DSSR log and column pool for one run into `dir`.
pub fn write_run(dir: &Path, instance: &str, arm: &str, outcome: &CgOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = |kind: &str| std::fs::File::create(dir.join(format!("{kind}_{instance}_{arm}.csv")));
    write_trace(file("trace")?, outcome)?;
    write_timing(file("timing")?, outcome)?;
    write_dssr_log(file("dssr")?, outcome)?;
    write_columns(file("columns")?, outcome)?;
    Ok(())
}
