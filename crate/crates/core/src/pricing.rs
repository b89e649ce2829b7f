//! Lowest-reduced-cost LA route under the current ng memories.
//!
//! The search runs over nodes `(u, M1, d)`: the route is at `u`, `M1 ⊆ M_u` is
//! the set of customers it may not return to yet, and `d` is the capacity left
//! before servicing `u`. Each edge is one LA arc. Two solvers are provided:
//! Dijkstra/A* on the η-shifted weights, and a label-correcting sweep over
//! decreasing `d` that needs no shift.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;
use std::fmt;

use crate::custset::CustomerSet;
use crate::error::{Error, Result};
use crate::instance::{Instance, DEPOT};
use crate::la_arcs::{ComponentPathTable, OmegaIndex};
use crate::neighbors::NeighborSets;
use crate::route::{DualSolution, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PricingMode {
    #[default]
    Dijkstra,
    BellmanFord,
}

impl fmt::Display for PricingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PricingMode::Dijkstra => "dijkstra",
            PricingMode::BellmanFord => "bellman_ford",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PricingConfig {
    pub mode: PricingMode,
    /// Use the A* heuristic (Dijkstra mode only).
    pub heuristic: bool,
    pub dominance: bool,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            mode: PricingMode::Dijkstra,
            heuristic: true,
            dominance: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PricingStats {
    pub mode: PricingMode,
    pub nodes_expanded: u64,
    pub edges_relaxed: u64,
    pub eta: f64,
}

/// One edge of the returned source-to-sink path.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingLeg {
    /// Depot for the source edge, then arc start, intermediates and end.
    pub path: Vec<usize>,
    pub reduced_cost: f64,
    pub demand_delta: u32,
}

#[derive(Debug, Clone)]
pub struct LaPricing {
    pub route: Route,
    pub reduced_cost: f64,
    pub legs: Vec<PricingLeg>,
    pub stats: PricingStats,
}

impl LaPricing {
    /// Path cost under the η-shifted weights.
    pub fn adjusted_cost(&self) -> f64 {
        self.legs
            .iter()
            .map(|l| l.reduced_cost + self.stats.eta * l.demand_delta as f64)
            .sum()
    }
}

/// Exact lowest reduced cost to the sink from `(u, ∅, d)` with every ng
/// memory empty. Since memories only remove paths, it never overestimates
/// the cost to go from any `(u, M1, d)`.
#[derive(Debug, Clone)]
pub struct HeuristicTable {
    h: Vec<Vec<f64>>,
    /// Per start `u`: slot `t * (cap + 1) + d` bounds the cost to go from
    /// `(u, M1, d)` through any arc towards `targets[t]`.
    via: Vec<Vec<f64>>,
}

impl HeuristicTable {
    pub fn compute(inst: &Instance, index: &OmegaIndex) -> Self {
        let n = inst.n();
        let cap = inst.capacity() as usize;
        let width = cap + 1;
        let table = index.table();
        let mut h = vec![vec![f64::INFINITY; width]; n + 1];

        let profiles: Vec<Vec<f64>> = (0..=n)
            .map(|u| if u == DEPOT { Vec::new() } else { index.flat_profiles(u) })
            .collect();
        let mut via: Vec<Vec<f64>> = (0..=n)
            .map(|u| if u == DEPOT { Vec::new() } else { vec![f64::INFINITY; table.hoods[u].targets.len() * width] })
            .collect();
        for d in 1..=cap {
            for u in inst.customers() {
                if (d as u32) < inst.demand(u) {
                    continue;
                }
                let targets = &table.hoods[u].targets;
                let nt = targets.len();
                let prof = &profiles[u];
                let mut best = f64::INFINITY;
                for (t, &v) in targets.iter().enumerate() {
                    let mut b = f64::INFINITY;
                    for zd in 1..=d {
                        let rc = prof[zd * nt + t];
                        let cand = if v == DEPOT {
                            rc
                        } else if zd + inst.demand(v) as usize <= d {
                            rc + h[v][d - zd]
                        } else {
                            break;
                        };
                        if cand < b {
                            b = cand;
                        }
                    }
                    via[u][t * width + d] = b;
                    if b < best {
                        best = b;
                    }
                }
                h[u][d] = best;
            }
        }
        HeuristicTable { h, via }
    }

    pub fn get(&self, u: usize, d: u32) -> f64 {
        self.h[u][d as usize]
    }

    /// Lower bound on the cost to go from `(u, M1, d)` when the next arc
    /// ends at target slot `t`, whatever the memories.
    pub fn via(&self, u: usize, t: usize, d: u32) -> f64 {
        let width = self.h[u].len();
        self.via[u][t * width + d as usize]
    }
}

#[derive(Debug, Clone, Copy)]
struct Parent {
    label: Option<usize>,
    mask: u32,
    target: usize,
}

#[derive(Debug, Clone)]
struct Label {
    u: usize,
    m1: CustomerSet,
    d: u32,
    g: f64,
    parent: Parent,
    closed: bool,
}

#[derive(Debug, Clone, Copy)]
struct QItem {
    f: f64,
    d: u32,
    u: usize,
    m1: CustomerSet,
    g: f64,
    kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Sink,
    Node(usize),
    /// Arcs from a closed label towards its next unexplored target slot.
    Group(usize),
}

impl PartialEq for QItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QItem {}

impl Ord for QItem {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.d.cmp(&self.d))
            .then(other.u.cmp(&self.u))
            .then(other.m1.cmp(&self.m1))
            .then(other.kind.cmp(&self.kind))
    }
}
impl PartialOrd for QItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a, 'i, 't> {
    inst: &'a Instance,
    sets: &'a NeighborSets,
    index: &'i mut OmegaIndex<'t>,
    labels: Vec<Label>,
    at: FxHashMap<(usize, CustomerSet, u32), usize>,
    sink: Option<(f64, Parent)>,
    stats: PricingStats,
}

impl Search<'_, '_, '_> {
    /// Lowers the label of `(u, m1, d)` to `g` if that improves it; returns the
    /// label index when it changed.
    fn relax(&mut self, u: usize, m1: CustomerSet, d: u32, g: f64, parent: Parent) -> Option<usize> {
        self.stats.edges_relaxed += 1;
        match self.at.get(&(u, m1, d)) {
            Some(&i) => {
                let l = &mut self.labels[i];
                if g < l.g && !l.closed {
                    l.g = g;
                    l.parent = parent;
                    Some(i)
                } else {
                    None
                }
            }
            None => {
                let i = self.labels.len();
                self.labels.push(Label {
                    u,
                    m1,
                    d,
                    g,
                    parent,
                    closed: false,
                });
                self.at.insert((u, m1, d), i);
                Some(i)
            }
        }
    }

    fn seed(&mut self) -> Vec<usize> {
        let cap = self.inst.capacity();
        let pi0 = self.index.duals().pi0;
        let c0: Vec<f64> = self.inst.customers().map(|u| self.inst.distance(DEPOT, u)).collect();
        let mut out = Vec::new();
        for u in self.inst.customers() {
            let g = c0[u - 1] + pi0;
            let p = Parent {
                label: None,
                mask: 0,
                target: 0,
            };
            if let Some(i) = self.relax(u, CustomerSet::EMPTY, cap, g, p) {
                out.push(i);
            }
        }
        out
    }

    /// Relaxes every edge out of label `i`; returns the labels that improved.
    fn expand(&mut self, i: usize) -> Vec<usize> {
        self.expand_sink(i);
        let mut targets = Vec::new();
        self.open_targets(i, |t| targets.push(t));
        let mut improved = Vec::new();
        for t in targets {
            self.expand_target(i, t, &mut improved);
        }
        improved
    }

    fn expand_sink(&mut self, i: usize) {
        self.stats.nodes_expanded += 1;
        let Label { u, m1, d, g, .. } = self.labels[i];
        let Some(bucket) = self.index.bucket(self.sets, u, m1, DEPOT) else {
            return;
        };
        if let Some(e) = bucket.best_within(d) {
            self.stats.edges_relaxed += 1;
            let cand = g + e.reduced_cost;
            if self.sink.is_none_or(|(best, _)| cand < best) {
                let p = Parent {
                    label: Some(i),
                    mask: e.mask,
                    target: bucket.target,
                };
                self.sink = Some((cand, p));
            }
        }
    }

    /// Calls `f` on every customer target slot that label `i` can reach with
    /// room to spare.
    fn open_targets(&self, i: usize, mut f: impl FnMut(usize)) {
        let Label { u, m1, d, .. } = self.labels[i];
        let du = self.inst.demand(u);
        for (t, &v) in self.index.table().hoods[u].targets.iter().enumerate() {
            if v != DEPOT && !m1.contains(v) && du + self.inst.demand(v) <= d {
                f(t);
            }
        }
    }

    fn expand_target(&mut self, i: usize, t: usize, improved: &mut Vec<usize>) {
        let Label { u, m1, d, g, .. } = self.labels[i];
        let v = self.index.table().hoods[u].targets[t];
        let dv = self.inst.demand(v);
        let Some(bucket) = self.index.bucket(self.sets, u, m1, v) else {
            return;
        };
        for e in &bucket.entries {
            if e.zd + dv > d {
                break;
            }
            let p = Parent {
                label: Some(i),
                mask: e.mask,
                target: bucket.target,
            };
            if let Some(j) = self.relax(v, e.m2, d - e.zd, g + e.reduced_cost, p) {
                improved.push(j);
            }
        }
    }

    fn finish(self) -> Result<LaPricing> {
        let Some((rc, last)) = self.sink else {
            return Err(Error::Internal("pricing found no route to the sink".into()));
        };
        let table = self.index.table();
        let mut legs = Vec::new();
        let mut step = last;
        let mut head_d = 0u32;
        loop {
            let li = step.label.expect("sink parent is a node");
            let l = &self.labels[li];
            let arc = table.arc_at(l.u, step.mask as usize, step.target);
            legs.push(PricingLeg {
                path: arc.path.clone(),
                reduced_cost: self.index.arc_reduced_cost(l.u, step.mask as usize, step.target),
                demand_delta: l.d - head_d,
            });
            head_d = l.d;
            match l.parent.label {
                Some(_) => step = l.parent,
                None => {
                    legs.push(PricingLeg {
                        path: vec![DEPOT, l.u],
                        reduced_cost: self.inst.distance(DEPOT, l.u) + self.index.duals().pi0,
                        demand_delta: 0,
                    });
                    break;
                }
            }
        }
        legs.reverse();
        let mut seq = Vec::new();
        for leg in &legs[1..] {
            seq.extend_from_slice(&leg.path[..leg.path.len() - 1]);
        }
        let route = Route::new(seq, self.inst)?;
        Ok(LaPricing {
            route,
            reduced_cost: rc,
            legs,
            stats: self.stats,
        })
    }
}

/// Lowest-reduced-cost LA route under the memories in `sets`.
///
/// `heuristic` is only consulted in Dijkstra mode with `cfg.heuristic` set.
pub fn solve_la_pricing(
    inst: &Instance,
    sets: &NeighborSets,
    index: &mut OmegaIndex,
    heuristic: Option<&HeuristicTable>,
    cfg: &PricingConfig,
) -> Result<LaPricing> {
    let eta = index.eta();
    let mut s = Search {
        inst,
        sets,
        index,
        labels: Vec::new(),
        at: FxHashMap::default(),
        sink: None,
        stats: PricingStats {
            mode: cfg.mode,
            nodes_expanded: 0,
            edges_relaxed: 0,
            eta,
        },
    };
    match cfg.mode {
        PricingMode::Dijkstra => {
            let h = if cfg.heuristic { heuristic } else { None };
            dijkstra(&mut s, h, cfg.dominance, eta);
        }
        PricingMode::BellmanFord => sweep(&mut s),
    }
    s.finish()
}

/// With a heuristic, the arcs towards each target are only looked up once a
/// lower bound on their successors reaches the top of the queue, so buckets
/// behind the final sink are never built.
fn dijkstra(s: &mut Search, h: Option<&HeuristicTable>, dominance: bool, eta: f64) {
    let cap = s.inst.capacity();
    let shift = eta * cap as f64;
    let priority = |l: &Label| {
        let base = l.g + eta * (cap - l.d) as f64;
        match h {
            Some(h) => base + h.get(l.u, l.d) + eta * l.d as f64,
            None => base,
        }
    };
    let item = |l: &Label, i: usize| QItem {
        f: priority(l),
        d: l.d,
        u: l.u,
        m1: l.m1,
        g: l.g,
        kind: Kind::Node(i),
    };

    let mut heap = BinaryHeap::new();
    for i in s.seed() {
        heap.push(item(&s.labels[i], i));
    }
    let mut expanded: FxHashMap<(usize, CustomerSet), Vec<(u32, f64)>> = FxHashMap::default();
    let mut sink_pushed: Option<f64> = None;
    // per closed label: its index and the live range of its targets in `bounds`
    let mut pending: Vec<(usize, usize, usize)> = Vec::new();
    let mut bounds: Vec<(f64, u32)> = Vec::new();
    let mut improved = Vec::new();

    while let Some(top) = heap.pop() {
        let i = match top.kind {
            Kind::Sink => {
                // its label can only have improved since the push
                if s.sink.is_some_and(|(g, _)| g == top.g) {
                    return;
                }
                continue;
            }
            Kind::Group(p) => {
                let (i, start, end) = &mut pending[p];
                let i = *i;
                let targets = &mut bounds[*start..*end];
                let t = take_min(targets);
                *end -= 1;
                let targets = &targets[..targets.len() - 1];
                if let Some(lb) = targets.iter().map(|&(lb, _)| lb).min_by(f64::total_cmp) {
                    heap.push(QItem {
                        f: top.g + lb + shift,
                        ..top
                    });
                }
                improved.clear();
                s.expand_target(i, t as usize, &mut improved);
                for &j in &improved {
                    heap.push(item(&s.labels[j], j));
                }
                continue;
            }
            Kind::Node(i) => i,
        };
        let l = &s.labels[i];
        if l.closed || l.g != top.g {
            continue;
        }
        if dominance {
            let seen = expanded.entry((l.u, l.m1)).or_default();
            if seen.iter().any(|&(d, g)| d >= l.d && g <= l.g) {
                s.labels[i].closed = true;
                continue;
            }
            seen.push((l.d, l.g));
        }
        s.labels[i].closed = true;
        match h {
            Some(h) => {
                s.expand_sink(i);
                let Label { u, m1, d, g, .. } = s.labels[i];
                let start = bounds.len();
                s.open_targets(i, |t| {
                    let lb = h.via(u, t, d);
                    if lb.is_finite() {
                        bounds.push((lb, t as u32));
                    }
                });
                if let Some(lb) = bounds[start..].iter().map(|&(lb, _)| lb).min_by(f64::total_cmp) {
                    heap.push(QItem {
                        f: g + lb + shift,
                        d,
                        u,
                        m1,
                        g,
                        kind: Kind::Group(pending.len()),
                    });
                    pending.push((i, start, bounds.len()));
                }
            }
            None => {
                for j in s.expand(i) {
                    heap.push(item(&s.labels[j], j));
                }
            }
        }
        if let Some((g, _)) = s.sink {
            if sink_pushed.is_none_or(|p| g < p) {
                sink_pushed = Some(g);
                heap.push(QItem {
                    f: g + shift,
                    d: 0,
                    u: DEPOT,
                    m1: CustomerSet::EMPTY,
                    g,
                    kind: Kind::Sink,
                });
            }
        }
    }
}

/// Moves the entry with the lowest bound (smallest slot on ties) to the end
/// of a non-empty slice and returns its slot.
fn take_min(targets: &mut [(f64, u32)]) -> u32 {
    let pos = (0..targets.len())
        .min_by(|&a, &b| {
            let (x, y) = (targets[a], targets[b]);
            x.0.total_cmp(&y.0).then(x.1.cmp(&y.1))
        })
        .expect("group items have targets left");
    let last = targets.len() - 1;
    targets.swap(pos, last);
    targets[last].1
}

/// Every edge strictly lowers `d`, so processing nodes by decreasing `d`
/// settles each one before it is expanded.
fn sweep(s: &mut Search) {
    let cap = s.inst.capacity() as usize;
    let mut by_d: Vec<Vec<usize>> = vec![Vec::new(); cap + 1];
    for i in s.seed() {
        by_d[cap].push(i);
    }
    for d in (1..=cap).rev() {
        let mut level = std::mem::take(&mut by_d[d]);
        level.sort_unstable_by(|&a, &b| {
            let (la, lb) = (&s.labels[a], &s.labels[b]);
            la.u.cmp(&lb.u).then(la.m1.cmp(&lb.m1))
        });
        level.dedup();
        for i in level {
            s.labels[i].closed = true;
            for j in s.expand(i) {
                let jd = s.labels[j].d as usize;
                by_d[jd].push(j);
            }
        }
    }
}

/// Builds a fresh index and heuristic for `duals` and prices once.
pub fn price_la(
    inst: &Instance,
    sets: &NeighborSets,
    table: &ComponentPathTable,
    duals: &DualSolution,
    cfg: &PricingConfig,
) -> Result<LaPricing> {
    let mut index = OmegaIndex::new(inst, table, duals);
    let heuristic = (cfg.mode == PricingMode::Dijkstra && cfg.heuristic).then(|| HeuristicTable::compute(inst, &index));
    solve_la_pricing(inst, sets, &mut index, heuristic.as_ref(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CostMatrix, DemandMode};
    use crate::oracle::{brute_pricing, enumerate_routes, random_duals, RouteClass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn configs() -> Vec<PricingConfig> {
        let mut out = Vec::new();
        for heuristic in [false, true] {
            for dominance in [false, true] {
                out.push(PricingConfig {
                    mode: PricingMode::Dijkstra,
                    heuristic,
                    dominance,
                });
            }
        }
        out.push(PricingConfig {
            mode: PricingMode::BellmanFord,
            heuristic: false,
            dominance: false,
        });
        out
    }

    #[test]
    fn zero_duals_pick_cheapest_out_and_back() {
        let inst = generate_instance(17, 7, 4, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 3);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let c = CostMatrix::new(&inst);
        let res = price_la(&inst, &sets, &table, &DualSolution::zeros(7), &PricingConfig::default()).unwrap();
        let best = inst
            .customers()
            .map(|u| 2.0 * c.get(DEPOT, u))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(res.route.len(), 1);
        assert!((res.reduced_cost - best).abs() < 1e-9);
        let routes = enumerate_routes(&inst, RouteClass::La, &sets).unwrap();
        let (_, brute) = brute_pricing(&routes, &DualSolution::zeros(7), &c).unwrap();
        assert!((brute - best).abs() < 1e-9);
    }

    #[test]
    fn matches_la_enumeration_with_empty_memories() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for seed in 0..6 {
            let mode = if seed % 2 == 0 { DemandMode::Unit } else { DemandMode::Uniform1To10 };
            let cap = if mode == DemandMode::Unit { 4 } else { 14 };
            let inst = generate_instance(seed, 6, cap, mode).unwrap();
            let sets = NeighborSets::build(&inst, 3);
            let table = ComponentPathTable::build(&inst, &sets).unwrap();
            let c = CostMatrix::new(&inst);
            let routes = enumerate_routes(&inst, RouteClass::La, &sets).unwrap();
            for _ in 0..8 {
                let duals = random_duals(&inst, &mut rng);
                let (_, want) = brute_pricing(&routes, &duals, &c).unwrap();
                for cfg in configs() {
                    let res = price_la(&inst, &sets, &table, &duals, &cfg).unwrap();
                    assert!((res.reduced_cost - want).abs() < 1e-6, "{cfg:?}: {} vs {want}", res.reduced_cost);
                    assert!((res.route.reduced_cost(&duals, &c) - res.reduced_cost).abs() < 1e-6);
                    assert!(res.route.is_la_route(&sets));
                    assert!(res.route.demand_used() <= inst.capacity());
                }
            }
        }
    }

    #[test]
    fn matches_la_enumeration_with_memories() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for seed in 0..6 {
            let inst = generate_instance(100 + seed, 6, 5, DemandMode::Unit).unwrap();
            let mut sets = NeighborSets::build(&inst, 2);
            for w in inst.customers() {
                let m: CustomerSet = inst.customers().filter(|&u| u != w && rng.random_bool(0.4)).collect();
                sets.set_ng(w, m).unwrap();
            }
            let table = ComponentPathTable::build(&inst, &sets).unwrap();
            let c = CostMatrix::new(&inst);
            let routes = enumerate_routes(&inst, RouteClass::La, &sets).unwrap();
            for _ in 0..8 {
                let duals = random_duals(&inst, &mut rng);
                let (_, want) = brute_pricing(&routes, &duals, &c).unwrap();
                for cfg in configs() {
                    let res = price_la(&inst, &sets, &table, &duals, &cfg).unwrap();
                    assert!((res.reduced_cost - want).abs() < 1e-6, "{cfg:?}: {} vs {want}", res.reduced_cost);
                    assert!(res.route.is_la_route(&sets), "{:?}", res.route);
                }
            }
        }
    }

    #[test]
    fn eta_shift_and_telescoping() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = generate_instance(31, 9, 6, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 4);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        for _ in 0..10 {
            let duals = random_duals(&inst, &mut rng);
            let index = OmegaIndex::new(&inst, &table, &duals);
            let eta = index.eta();
            assert!(eta >= 0.0);
            for arc in table.arcs() {
                let rc = arc.cost - arc.serviced().iter().map(|&w| duals.pi[w]).sum::<f64>();
                if arc.end == DEPOT {
                    for d in arc.demand..=inst.capacity() {
                        assert!(rc + eta * d as f64 >= -1e-9);
                    }
                } else if arc.demand + inst.demand(arc.end) <= inst.capacity() {
                    assert!(rc + eta * arc.demand as f64 >= -1e-9);
                }
            }
            let res = price_la(&inst, &sets, &table, &duals, &PricingConfig::default()).unwrap();
            let total: u32 = res.legs.iter().map(|l| l.demand_delta).sum();
            assert_eq!(total, inst.capacity());
            let shift = res.adjusted_cost() - res.reduced_cost;
            assert!((shift - eta * inst.capacity() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn heuristic_is_monotone_and_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inst = generate_instance(2, 8, 20, DemandMode::Uniform1To10).unwrap();
        let sets = NeighborSets::build(&inst, 3);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let c = CostMatrix::new(&inst);
        let routes = enumerate_routes(&inst, RouteClass::La, &sets).unwrap();
        let duals = random_duals(&inst, &mut rng);
        let index = OmegaIndex::new(&inst, &table, &duals);
        let h = HeuristicTable::compute(&inst, &index);
        for u in inst.customers() {
            for d in inst.demand(u)..inst.capacity() {
                assert!(h.get(u, d + 1) <= h.get(u, d));
            }
            // the per-target bounds used by lazy expansion agree with h
            for d in inst.demand(u)..=inst.capacity() {
                let nt = index.table().hoods[u].targets.len();
                let best = (0..nt).map(|t| h.via(u, t, d)).fold(f64::INFINITY, f64::min);
                assert!((best - h.get(u, d)).abs() < 1e-9 || best == h.get(u, d));
            }
            // at full capacity, h plus the source edge is the best LA route starting at u
            let from_u = routes
                .iter()
                .filter(|r| r.seq()[0] == u)
                .map(|r| r.reduced_cost(&duals, &c))
                .fold(f64::INFINITY, f64::min);
            let via_h = c.get(DEPOT, u) + duals.pi0 + h.get(u, inst.capacity());
            assert!((from_u - via_h).abs() < 1e-6);
        }
        // a single edge when there is no room for anything else
        for u in inst.customers() {
            let d = inst.demand(u);
            let direct = c.get(u, DEPOT) - duals.pi[u];
            assert!(h.get(u, d) <= direct + 1e-12);
            if inst.customers().all(|v| v == u || inst.demand(v) + d > d) {
                assert!((h.get(u, d) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn astar_expands_no_more_than_dijkstra() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut astar = 0;
        let mut plain = 0;
        for seed in 0..4 {
            let inst = generate_instance(seed, 14, 5, DemandMode::Unit).unwrap();
            let sets = NeighborSets::build(&inst, 4);
            let table = ComponentPathTable::build(&inst, &sets).unwrap();
            for _ in 0..5 {
                let duals = random_duals(&inst, &mut rng);
                let mut cfg = PricingConfig::default();
                let a = price_la(&inst, &sets, &table, &duals, &cfg).unwrap();
                cfg.heuristic = false;
                let b = price_la(&inst, &sets, &table, &duals, &cfg).unwrap();
                assert!((a.reduced_cost - b.reduced_cost).abs() < 1e-9);
                astar += a.stats.nodes_expanded;
                plain += b.stats.nodes_expanded;
            }
        }
        assert!(astar <= plain, "{astar} > {plain}");
    }

    /// With no LA neighbors and no memories the search is a plain
    /// capacity-indexed shortest path over single-customer hops.
    #[test]
    fn degenerates_to_plain_rcsp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..5 {
            let inst = generate_instance(seed, 9, 25, DemandMode::Uniform1To10).unwrap();
            let sets = NeighborSets::build(&inst, 0);
            let table = ComponentPathTable::build(&inst, &sets).unwrap();
            let c = CostMatrix::new(&inst);
            for _ in 0..5 {
                let duals = random_duals(&inst, &mut rng);
                // best[u][q]: cheapest reduced cost of a walk ending at u having used q
                let cap = inst.capacity() as usize;
                let mut best = vec![vec![f64::INFINITY; cap + 1]; inst.n() + 1];
                for u in inst.customers() {
                    let q = inst.demand(u) as usize;
                    best[u][q] = c.get(0, u) + duals.pi0 - duals.pi[u];
                }
                for q in 1..=cap {
                    for u in inst.customers() {
                        let here = best[u][q];
                        if !here.is_finite() {
                            continue;
                        }
                        for v in inst.customers().filter(|&v| v != u) {
                            let nq = q + inst.demand(v) as usize;
                            if nq <= cap {
                                let cand = here + c.get(u, v) - duals.pi[v];
                                if cand < best[v][nq] {
                                    best[v][nq] = cand;
                                }
                            }
                        }
                    }
                }
                let mut want = f64::INFINITY;
                for u in inst.customers() {
                    for q in 1..=cap {
                        want = want.min(best[u][q] + c.get(u, 0));
                    }
                }
                for cfg in configs() {
                    let got = price_la(&inst, &sets, &table, &duals, &cfg).unwrap();
                    assert!((got.reduced_cost - want).abs() < 1e-6);
                }
            }
        }
    }
}
