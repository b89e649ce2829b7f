//! Brute-force references for small instances: route enumeration by class,
//! pricing by scan, and exact LPs over explicit route sets.
//!
//! The class checks here are written separately from the ones in
//! [`crate::route`] (1-based positions, all position pairs) so the two can
//! be compared against each other.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance, DEPOT};
use crate::lp::{self, LpProblem, LpStatus, RowKind};
use crate::neighbors::NeighborSets;
use crate::route::{DualSolution, Route};

/// Most resource-feasible routes the enumerator will walk.
pub const MAX_ENUMERATED: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteClass {
    Elementary,
    Ng,
    La,
    Kq(usize),
    /// Capacity respected and no customer repeated back to back.
    AllFeasible,
}

/// 1-based flags: `special[k]` for position `k` in `1..=len`.
fn special_flags(seq: &[usize], sets: &NeighborSets) -> Vec<bool> {
    let len = seq.len();
    let mut flags = vec![false; len + 1];
    let mut q = 1;
    flags[q] = true;
    loop {
        let v = seq[q - 1];
        let mut next = None;
        let mut k = q + 1;
        while k <= len {
            if !sets.la(v).contains(&seq[k - 1]) {
                next = Some(k);
                break;
            }
            k += 1;
        }
        match next {
            Some(k) => {
                flags[k] = true;
                q = k;
            }
            None => break,
        }
    }
    flags
}

fn def_elementary(seq: &[usize]) -> bool {
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] == seq[b] {
                return false;
            }
        }
    }
    true
}

fn def_kq(seq: &[usize], k: usize) -> bool {
    let len = seq.len();
    for k1 in 1..=len {
        for k2 in k1 + 1..=len.min(k1 + k) {
            if seq[k1 - 1] == seq[k2 - 1] {
                return false;
            }
        }
    }
    true
}

/// Every pair of equal positions needs a breaker strictly between them; with
/// `only_special` the breaker must also be at a special position.
fn def_breakable(seq: &[usize], sets: &NeighborSets, only_special: bool) -> bool {
    let len = seq.len();
    let special = special_flags(seq, sets);
    for k1 in 1..=len {
        for k2 in k1 + 1..=len {
            let u = seq[k1 - 1];
            if u != seq[k2 - 1] {
                continue;
            }
            let mut broken = false;
            for (k3, &is_special) in special.iter().enumerate().take(k2).skip(k1 + 1) {
                let v = seq[k3 - 1];
                if (!only_special || is_special) && !sets.ng(v).contains(u) {
                    broken = true;
                    break;
                }
            }
            if !broken {
                return false;
            }
        }
    }
    true
}

/// Definitional membership test, independent of [`Route`]'s predicates.
pub fn in_class(seq: &[usize], inst: &Instance, class: RouteClass, sets: &NeighborSets) -> bool {
    let load: u32 = seq.iter().map(|&u| inst.demand(u)).sum();
    let mut feasible = !seq.is_empty() && load <= inst.capacity();
    for k in 1..seq.len() {
        if seq[k] == seq[k - 1] {
            feasible = false;
        }
    }
    if !feasible {
        return false;
    }
    match class {
        RouteClass::AllFeasible => true,
        RouteClass::Elementary => def_elementary(seq),
        RouteClass::Kq(k) => def_kq(seq, k),
        RouteClass::Ng => def_breakable(seq, sets, false),
        RouteClass::La => def_breakable(seq, sets, true),
    }
}

fn model_says(route: &Route, inst: &Instance, class: RouteClass, sets: &NeighborSets) -> bool {
    route.is_resource_feasible(inst)
        && match class {
            RouteClass::AllFeasible => true,
            RouteClass::Elementary => route.is_elementary(),
            RouteClass::Kq(k) => route.is_kq_route(k),
            RouteClass::Ng => route.is_ng_route(sets),
            RouteClass::La => route.is_la_route(sets),
        }
}

/// Every route of `class`, in depth-first lexicographic order.
///
/// Fails with a size error once more than [`MAX_ENUMERATED`] resource-feasible
/// routes have been walked, and with an internal error if the two class
/// checks ever disagree.
pub fn enumerate_routes(inst: &Instance, class: RouteClass, sets: &NeighborSets) -> Result<Vec<Route>> {
    let mut out = Vec::new();
    let mut walked = 0usize;
    let mut seq = Vec::new();
    extend(inst, class, sets, &mut seq, 0, &mut walked, &mut out)?;
    Ok(out)
}

fn extend(
    inst: &Instance,
    class: RouteClass,
    sets: &NeighborSets,
    seq: &mut Vec<usize>,
    load: u32,
    walked: &mut usize,
    out: &mut Vec<Route>,
) -> Result<()> {
    for u in inst.customers() {
        if seq.last() == Some(&u) || load + inst.demand(u) > inst.capacity() {
            continue;
        }
        if class == RouteClass::Elementary && seq.contains(&u) {
            continue;
        }
        seq.push(u);
        *walked += 1;
        if *walked > MAX_ENUMERATED {
            return Err(Error::Size(format!(
                "more than {MAX_ENUMERATED} routes to enumerate"
            )));
        }
        let route = Route::new(seq.clone(), inst)?;
        let def = in_class(seq, inst, class, sets);
        if def != model_says(&route, inst, class, sets) {
            return Err(Error::Internal(format!("class checks disagree on {route:?} for {class:?}")));
        }
        if def {
            out.push(route);
        }
        extend(inst, class, sets, seq, load + inst.demand(u), walked, out)?;
        seq.pop();
    }
    Ok(())
}

/// Route with the lowest reduced cost; the first one wins ties.
pub fn brute_pricing(routes: &[Route], duals: &DualSolution, c: &CostMatrix) -> Result<(Route, f64)> {
    let mut best: Option<(&Route, f64)> = None;
    for r in routes {
        let rc = r.reduced_cost(duals, c);
        if best.is_none_or(|(_, b)| rc < b) {
            best = Some((r, rc));
        }
    }
    best.map(|(r, rc)| (r.clone(), rc))
        .ok_or_else(|| Error::Contract("no routes to price".into()))
}

/// Exact optimum of the set-cover LP over `routes`.
pub fn lp_over_routes_exact(routes: &[Route], inst: &Instance) -> Result<BigRational> {
    let c = CostMatrix::new(inst);
    let n = inst.n();
    // only (coverage, cost) matters; keep the cheapest route per coverage vector
    let mut cheapest: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut order: Vec<Vec<u32>> = Vec::new();
    for r in routes {
        let cover: Vec<u32> = inst.customers().map(|u| r.visits(u) as u32).collect();
        let cost = r.cost(&c);
        match cheapest.get_mut(&cover) {
            Some(v) => {
                if cost < *v {
                    *v = cost;
                }
            }
            None => {
                cheapest.insert(cover.clone(), cost);
                order.push(cover);
            }
        }
    }
    let mut rows: Vec<(RowKind, f64)> = (0..n).map(|_| (RowKind::Ge, 1.0)).collect();
    rows.push((RowKind::Le, inst.fleet() as f64));
    let mut p = LpProblem::new(rows);
    for cover in &order {
        let mut entries: Vec<(usize, f64)> = cover
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| (i, a as f64))
            .collect();
        entries.push((n, 1.0));
        p.add_column(cheapest[cover], entries);
    }
    let sol = lp::solve(&p.convert::<BigRational>())?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        s => Err(Error::Validation(format!("route LP is {s:?}"))),
    }
}

pub fn lp_over_routes(routes: &[Route], inst: &Instance) -> Result<f64> {
    Ok(lp_over_routes_exact(routes, inst)?.to_f64().unwrap_or(f64::NAN))
}

/// Duals that make a good share of routes price out negative.
pub fn random_duals<R: Rng>(inst: &Instance, rng: &mut R) -> DualSolution {
    let c0: Vec<f64> = inst.customers().map(|u| inst.distance(DEPOT, u)).collect();
    let mean = c0.iter().sum::<f64>() / c0.len() as f64;
    let pi: Vec<f64> = c0.iter().map(|&d| rng.random_range(0.0..=2.4 * d.max(1.0))).collect();
    let pi0 = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.5 * mean) };
    DualSolution::new(&pi, pi0).expect("non-negative by construction")
}

/// Twelve unit-demand customers on a circle like a clock face; customer
/// `k` sits at hour `k`.
pub fn clock_instance() -> Instance {
    let pts: Vec<(f64, f64, u32)> = (1..=12)
        .map(|k| {
            let a = PI / 2.0 - k as f64 * PI / 6.0;
            (100.0 * a.cos(), 100.0 * a.sin(), 1)
        })
        .collect();
    Instance::new("clock", (0.0, 0.0), &pts, 12, 12).expect("valid clock instance")
}

/// Clock neighbor sets: `N_u = M_u` = the customers within two hours of `u`.
pub fn clock_sets(inst: &Instance) -> NeighborSets {
    let mut sets = NeighborSets::build(inst, 4);
    for u in inst.customers() {
        sets.set_ng(u, sets.la_set(u)).expect("neighbors exclude self");
    }
    sets
}

/// Spatial memories: `M_u = N_u`.
pub fn spatial_sets(inst: &Instance, k: usize) -> NeighborSets {
    let mut sets = NeighborSets::build(inst, k);
    for u in inst.customers() {
        sets.set_ng(u, sets.la_set(u)).expect("neighbors exclude self");
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DemandMode};

    #[test]
    fn two_customer_counts() {
        let inst = generate_instance(1, 2, 2, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 0);
        let el = enumerate_routes(&inst, RouteClass::Elementary, &sets).unwrap();
        let seqs: Vec<&[usize]> = el.iter().map(|r| r.seq()).collect();
        assert_eq!(seqs, vec![&[1][..], &[1, 2], &[2], &[2, 1]]);
        // an immediate repeat is not a path of the capacity graph
        let all = enumerate_routes(&inst, RouteClass::AllFeasible, &sets).unwrap();
        assert_eq!(all.len(), 4);
        let inst3 = generate_instance(1, 2, 3, DemandMode::Unit).unwrap();
        let all3 = enumerate_routes(&inst3, RouteClass::AllFeasible, &sets).unwrap();
        assert!(all3.iter().any(|r| r.seq() == [1, 2, 1]));
        assert!(!enumerate_routes(&inst3, RouteClass::Elementary, &sets)
            .unwrap()
            .iter()
            .any(|r| r.seq() == [1, 2, 1]));
    }

    #[test]
    fn clock_route_is_ng_but_not_la() {
        let inst = clock_instance();
        let sets = clock_sets(&inst);
        let seq = [3, 1, 5, 1];
        assert!(in_class(&seq, &inst, RouteClass::Ng, &sets));
        assert!(!in_class(&seq, &inst, RouteClass::La, &sets));
        let flags = special_flags(&seq, &sets);
        assert_eq!(flags, vec![false, true, false, false, false]);
    }

    #[test]
    fn containment_on_small_instances() {
        for seed in 0..6 {
            let inst = generate_instance(seed, 6, 5, DemandMode::Unit).unwrap();
            let sets = spatial_sets(&inst, 2);
            let all = enumerate_routes(&inst, RouteClass::AllFeasible, &sets).unwrap();
            for r in &all {
                let s = r.seq();
                let el = in_class(s, &inst, RouteClass::Elementary, &sets);
                let la = in_class(s, &inst, RouteClass::La, &sets);
                let ng = in_class(s, &inst, RouteClass::Ng, &sets);
                assert!(!el || la);
                assert!(!la || ng);
                assert!(!el || in_class(s, &inst, RouteClass::Kq(3), &sets));
            }
            // with empty memories every feasible route is ng, but a cycle with
            // no special position inside stays forbidden for LA
            let bare = NeighborSets::build(&inst, 2);
            let ng = enumerate_routes(&inst, RouteClass::Ng, &bare).unwrap();
            assert_eq!(ng.len(), all.len());
            let la = enumerate_routes(&inst, RouteClass::La, &bare).unwrap();
            assert!(la.len() < all.len());
        }
    }

    #[test]
    fn brute_pricing_examples() {
        let inst = generate_instance(2, 5, 3, DemandMode::Unit).unwrap();
        let c = CostMatrix::new(&inst);
        let sets = NeighborSets::build(&inst, 0);
        let routes = enumerate_routes(&inst, RouteClass::Elementary, &sets).unwrap();
        let (_, z) = brute_pricing(&routes, &DualSolution::zeros(5), &c).unwrap();
        let cheapest = routes.iter().map(|r| r.cost(&c)).fold(f64::INFINITY, f64::min);
        assert_eq!(z, cheapest);
        let mut pi = vec![0.0; 5];
        pi[2] = 1e6; // customer 3
        let (r, _) = brute_pricing(&routes, &DualSolution::new(&pi, 0.0).unwrap(), &c).unwrap();
        assert!(r.customers().contains(3));
        assert!(brute_pricing(&[], &DualSolution::zeros(5), &c).is_err());
    }

    #[test]
    fn lp_over_singletons() {
        let inst = generate_instance(3, 5, 3, DemandMode::Unit).unwrap();
        let c = CostMatrix::new(&inst);
        let singles: Vec<Route> = inst.customers().map(|u| Route::new(vec![u], &inst).unwrap()).collect();
        let want: f64 = inst.customers().map(|u| 2.0 * c.get(DEPOT, u)).sum();
        assert!((lp_over_routes(&singles, &inst).unwrap() - want).abs() < 1e-9);
    }
}
