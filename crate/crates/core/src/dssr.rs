//! Exact elementary pricing by decremental state space relaxation.
//!
//! Each round prices over LA routes under the current ng memories. If the
//! best route revisits a customer, one cycle is picked and the memories of
//! its special customers are grown so that cycle becomes infeasible, and the
//! round repeats. Non-elementary routes are trimmed on the way; trimmed routes
//! with negative reduced cost are kept as extra columns.

use std::fmt;
use std::str::FromStr;

use crate::custset::CustomerSet;
use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance};
use crate::la_arcs::{ComponentPathTable, OmegaIndex};
use crate::neighbors::NeighborSets;
use crate::pricing::{solve_la_pricing, HeuristicTable, PricingConfig, PricingMode};
use crate::route::{DualSolution, Route};

/// Reduced costs below this are treated as negative.
pub const RC_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleRule {
    /// Fewest new pricing nodes, by the `(d0 - d_w + 1) · 2^|M_w|` count.
    #[default]
    MinNodesAdded,
    /// Fewest special positions strictly inside the cycle.
    ShortestCycle,
}

impl fmt::Display for CycleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleRule::MinNodesAdded => "min-nodes",
            CycleRule::ShortestCycle => "shortest",
        })
    }
}

impl FromStr for CycleRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-nodes" | "min_nodes_added" => Ok(CycleRule::MinNodesAdded),
            "shortest" | "shortest_cycle" => Ok(CycleRule::ShortestCycle),
            _ => Err(Error::Config(format!("unknown cycle rule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EarlyExit {
    /// Always run to an elementary route.
    #[default]
    Off,
    /// Stop at the first trimmed route with negative reduced cost.
    FirstNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DssrConfig {
    pub cycle_rule: CycleRule,
    pub early_exit: EarlyExit,
    pub pricing: PricingConfig,
}

/// A cycle to forbid: positions `start < end` hold the same customer.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleChoice {
    pub start: usize,
    pub end: usize,
    pub customer: usize,
    /// Customers `w` at special positions inside whose `M_w` gains `customer`.
    pub augment: Vec<usize>,
    /// Special positions strictly inside.
    pub length: usize,
    /// Estimated growth in pricing nodes.
    pub growth: u128,
}

fn node_count(inst: &Instance, sets: &NeighborSets, w: usize) -> u128 {
    let span = (inst.capacity() - inst.demand(w) + 1) as u128;
    span << sets.ng(w).len().min(100)
}

/// Picks the cycle of `route` to forbid next.
pub fn select_cycle(route: &Route, inst: &Instance, sets: &NeighborSets, rule: CycleRule) -> Result<CycleChoice> {
    if route.is_elementary() {
        return Err(Error::Contract("select_cycle needs a route that revisits a customer".into()));
    }
    let special = route.special_indices(sets);
    let seq = route.seq();
    let mut best: Option<CycleChoice> = None;
    for (k1, k2) in route.cycles() {
        let u = seq[k1];
        let inside: Vec<usize> = special.iter().copied().filter(|&k| k > k1 && k < k2).collect();
        let mut augment: Vec<usize> = inside
            .iter()
            .map(|&k| seq[k])
            .filter(|&w| w != u && !sets.ng(w).contains(u))
            .collect();
        augment.sort_unstable();
        augment.dedup();
        if augment.is_empty() {
            // already forbidden under the current memories
            continue;
        }
        let growth = augment.iter().map(|&w| node_count(inst, sets, w)).sum();
        let cand = CycleChoice {
            start: k1,
            end: k2,
            customer: u,
            augment,
            length: inside.len(),
            growth,
        };
        let better = match &best {
            None => true,
            Some(b) => match rule {
                CycleRule::MinNodesAdded => cand.growth < b.growth,
                CycleRule::ShortestCycle => cand.length < b.length,
            },
        };
        if better {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::Contract("route has no cycle that the memories still allow".into()))
}

/// One DSSR round.
#[derive(Debug, Clone)]
pub struct DssrIteration {
    pub route: Route,
    pub reduced_cost: f64,
    pub cycle: Option<CycleChoice>,
    /// `Σ_u |M_u|` this round priced under.
    pub ng_total: usize,
    pub nodes_expanded: u64,
    pub edges_relaxed: u64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct DssrResult {
    pub route: Route,
    pub reduced_cost: f64,
    /// False when an early exit returned before reaching an elementary route.
    pub exact: bool,
    /// Trimmed routes with negative reduced cost, in discovery order.
    pub early_columns: Vec<(Route, f64)>,
    pub iterations: Vec<DssrIteration>,
}

impl DssrResult {
    pub fn nodes_expanded(&self) -> u64 {
        self.iterations.iter().map(|i| i.nodes_expanded).sum()
    }
}

/// Lowest-reduced-cost elementary route. Resets every ng memory on entry and
/// leaves the grown memories in `sets` on return.
pub fn price_elementary(
    inst: &Instance,
    sets: &mut NeighborSets,
    table: &ComponentPathTable,
    c: &CostMatrix,
    duals: &DualSolution,
    cfg: &DssrConfig,
) -> Result<DssrResult> {
    sets.reset_ng();
    let mut index = OmegaIndex::new(inst, table, duals);
    let heuristic = (cfg.pricing.mode == PricingMode::Dijkstra && cfg.pricing.heuristic)
        .then(|| HeuristicTable::compute(inst, &index));
    let n = inst.n();
    let max_rounds = n * n.saturating_sub(1) + 1;
    let mut iterations = Vec::new();
    let mut early: Vec<(Route, f64)> = Vec::new();

    loop {
        if iterations.len() >= max_rounds {
            return Err(Error::Internal("DSSR did not converge within the memory bound".into()));
        }
        let res = solve_la_pricing(inst, sets, &mut index, heuristic.as_ref(), &cfg.pricing)?;
        let mut it = DssrIteration {
            route: res.route.clone(),
            reduced_cost: res.reduced_cost,
            cycle: None,
            ng_total: sets.ng_total(),
            nodes_expanded: res.stats.nodes_expanded,
            edges_relaxed: res.stats.edges_relaxed,
            eta: res.stats.eta,
        };
        if res.route.is_elementary() {
            iterations.push(it);
            return Ok(DssrResult {
                route: res.route,
                reduced_cost: res.reduced_cost,
                exact: true,
                early_columns: early,
                iterations,
            });
        }

        let trimmed = res.route.trim_to_elementary(inst);
        let trimmed_rc = trimmed.reduced_cost(duals, c);
        if trimmed_rc < -RC_EPS && !early.iter().any(|(r, _)| *r == trimmed) {
            early.push((trimmed.clone(), trimmed_rc));
            if cfg.early_exit == EarlyExit::FirstNegative {
                iterations.push(it);
                return Ok(DssrResult {
                    route: trimmed,
                    reduced_cost: trimmed_rc,
                    exact: false,
                    early_columns: early,
                    iterations,
                });
            }
        }

        let choice = select_cycle(&res.route, inst, sets, cfg.cycle_rule)?;
        let mut touched = CustomerSet::EMPTY;
        for &w in &choice.augment {
            if sets.augment_ng(w, choice.customer)? {
                touched.insert(w);
            }
        }
        if touched.is_empty() {
            return Err(Error::Internal("cycle selection did not grow any memory".into()));
        }
        index.invalidate(touched);
        it.cycle = Some(choice);
        iterations.push(it);
    }
}
