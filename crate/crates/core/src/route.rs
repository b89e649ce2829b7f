//! Routes, their costs and reduced costs, and the route-class predicates.
//!
//! Positions inside a route are 0-based throughout this crate: the first
//! customer after the depot sits at position 0 and is always special.

use std::fmt;

use crate::custset::CustomerSet;
use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance, DEPOT};
use crate::neighbors::NeighborSets;

/// A depot-to-depot route given by its customer sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Route {
    seq: Vec<usize>,
    demand_used: u32,
}

impl Route {
    pub fn new(seq: Vec<usize>, inst: &Instance) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::Validation("route must visit at least one customer".into()));
        }
        if let Some(&bad) = seq.iter().find(|&&u| u == DEPOT || u > inst.n()) {
            return Err(Error::Validation(format!("route references unknown customer {bad}")));
        }
        let demand_used = seq.iter().map(|&u| inst.demand(u)).sum();
        Ok(Route { seq, demand_used })
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Total demand serviced, counting every visit.
    pub fn demand_used(&self) -> u32 {
        self.demand_used
    }

    /// Capacity respected and no customer immediately repeated.
    pub fn is_resource_feasible(&self, inst: &Instance) -> bool {
        self.demand_used <= inst.capacity() && self.seq.windows(2).all(|w| w[0] != w[1])
    }

    pub fn customers(&self) -> CustomerSet {
        self.seq.iter().copied().collect()
    }

    /// Number of visits to `u` (the coefficient `a_ul`).
    pub fn visits(&self, u: usize) -> usize {
        self.seq.iter().filter(|&&w| w == u).count()
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        route_cost(&self.seq, c)
    }

    pub fn reduced_cost(&self, duals: &DualSolution, c: &CostMatrix) -> f64 {
        self.cost(c) + duals.pi0 - self.seq.iter().map(|&u| duals.pi[u]).sum::<f64>()
    }

    pub fn is_elementary(&self) -> bool {
        self.customers().len() == self.seq.len()
    }

    /// No customer is revisited within `k` positions.
    pub fn is_kq_route(&self, k: usize) -> bool {
        (0..self.seq.len()).all(|k1| {
            let end = (k1 + k).min(self.seq.len() - 1);
            ((k1 + 1)..=end).all(|k2| self.seq[k1] != self.seq[k2])
        })
    }

    /// Every cycle has an intermediate customer whose `M` set omits the
    /// cycle's customer.
    pub fn is_ng_route(&self, sets: &NeighborSets) -> bool {
        self.cycles().all(|(k1, k2)| {
            let u = self.seq[k1];
            self.seq[k1 + 1..k2].iter().any(|&w| !sets.ng(w).contains(u))
        })
    }

    /// Like [`Route::is_ng_route`], but the breaking customer must sit at
    /// a special position.
    pub fn is_la_route(&self, sets: &NeighborSets) -> bool {
        let special = self.special_indices(sets);
        self.cycles().all(|(k1, k2)| {
            let u = self.seq[k1];
            special
                .iter()
                .filter(|&&k| k > k1 && k < k2)
                .any(|&k| !sets.ng(self.seq[k]).contains(u))
        })
    }

    /// Special positions: position 0, then repeatedly the first later
    /// position whose customer is not an LA neighbor of the customer at
    /// the previous special position.
    pub fn special_indices(&self, sets: &NeighborSets) -> Vec<usize> {
        let mut out = vec![0];
        let mut anchor = self.seq[0];
        for (k, &u) in self.seq.iter().enumerate().skip(1) {
            if !sets.is_la_neighbor(anchor, u) {
                out.push(k);
                anchor = u;
            }
        }
        out
    }

    /// Pairs of consecutive occurrences `(k1, k2)` of the same customer.
    /// Longer cycles through an intermediate occurrence never need checking:
    /// their interior contains the interior of a consecutive pair.
    pub fn cycles(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.seq.iter().enumerate().filter_map(move |(k1, &u)| {
            self.seq[k1 + 1..]
                .iter()
                .position(|&w| w == u)
                .map(|off| (k1, k1 + 1 + off))
        })
    }

    /// Keeps the first visit to each customer, in order.
    pub fn trim_to_elementary(&self, inst: &Instance) -> Route {
        let mut seen = CustomerSet::EMPTY;
        let seq: Vec<usize> = self.seq.iter().copied().filter(|&u| seen.insert(u)).collect();
        let demand_used = seq.iter().map(|&u| inst.demand(u)).sum();
        Route { seq, demand_used }
    }
}

impl fmt::Debug for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Route{:?}", self.seq)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.seq.iter().map(|u| u.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Depot, then `seq`, then depot.
pub fn route_cost(seq: &[usize], c: &CostMatrix) -> f64 {
    let Some((&first, _)) = seq.split_first() else {
        return 0.0;
    };
    let inner: f64 = seq.windows(2).map(|w| c.get(w[0], w[1])).sum();
    c.get(DEPOT, first) + inner + c.get(*seq.last().unwrap(), DEPOT)
}

/// Duals of the master LP: `pi[u]` for each cover row (index 0 unused)
/// and `pi0 >= 0` for the fleet row.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub pi: Vec<f64>,
    pub pi0: f64,
}

impl DualSolution {
    pub fn zeros(n: usize) -> Self {
        DualSolution {
            pi: vec![0.0; n + 1],
            pi0: 0.0,
        }
    }

    pub fn new(pi_customers: &[f64], pi0: f64) -> Result<Self> {
        if pi0 < 0.0 || !pi0.is_finite() {
            return Err(Error::Validation(format!("pi0 must be finite and non-negative, got {pi0}")));
        }
        if let Some(p) = pi_customers.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::Validation(format!("customer duals must be non-negative, got {p}")));
        }
        let mut pi = Vec::with_capacity(pi_customers.len() + 1);
        pi.push(0.0);
        pi.extend_from_slice(pi_customers);
        Ok(DualSolution { pi, pi0 })
    }

    pub fn n(&self) -> usize {
        self.pi.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DemandMode};
    use crate::oracle::clock_instance;
    use proptest::prelude::*;

    fn r(inst: &Instance, seq: &[usize]) -> Route {
        Route::new(seq.to_vec(), inst).unwrap()
    }

    #[test]
    fn out_and_back() {
        let inst = Instance::new("t", (0.0, 0.0), &[(3.0, 4.0, 1), (6.0, 8.0, 1)], 2, 2).unwrap();
        let c = CostMatrix::new(&inst);
        assert_eq!(r(&inst, &[1]).cost(&c), 10.0);
        let two = r(&inst, &[1, 2]);
        assert_eq!(two.cost(&c), c.get(0, 1) + c.get(1, 2) + c.get(2, 0));
        assert_eq!(two.cost(&c), 20.0);
        assert!(Route::new(vec![], &inst).is_err());
        assert!(Route::new(vec![3], &inst).is_err());
        assert!(Route::new(vec![0], &inst).is_err());
    }

    #[test]
    fn reduced_cost_cases() {
        let inst = Instance::new("t", (0.0, 0.0), &[(3.0, 4.0, 1), (6.0, 8.0, 1)], 3, 2).unwrap();
        let c = CostMatrix::new(&inst);
        let single = r(&inst, &[1]);
        let zero = DualSolution::zeros(2);
        assert_eq!(single.reduced_cost(&zero, &c), single.cost(&c));
        let cancel = DualSolution::new(&[10.0, 0.0], 0.0).unwrap();
        assert_eq!(single.reduced_cost(&cancel, &c), 0.0);
        let cyc = r(&inst, &[1, 2, 1]);
        let d = DualSolution::new(&[3.0, 1.0], 0.5).unwrap();
        assert_eq!(cyc.reduced_cost(&d, &c), cyc.cost(&c) + 0.5 - 3.0 - 1.0 - 3.0);
        assert_eq!(cyc.visits(1), 2);
    }

    #[test]
    fn duals_reject_negative() {
        assert!(DualSolution::new(&[1.0, -0.1], 0.0).is_err());
        assert!(DualSolution::new(&[1.0], -1.0).is_err());
    }

    #[test]
    fn clock_route_is_ng_not_la() {
        let inst = clock_instance();
        let mut sets = NeighborSets::build(&inst, 4);
        for u in inst.customers() {
            sets.set_ng(u, sets.la_set(u)).unwrap();
        }
        let route = r(&inst, &[3, 1, 5, 1]);
        assert_eq!(route.special_indices(&sets), vec![0]);
        assert!(route.is_ng_route(&sets));
        assert!(!route.is_la_route(&sets));
        assert!(!route.is_elementary());
    }

    #[test]
    fn empty_la_sets_make_every_position_special() {
        let inst = generate_instance(4, 6, 6, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 0);
        let route = r(&inst, &[2, 5, 2, 1, 6]);
        assert_eq!(route.special_indices(&sets), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn elementary_routes_pass_everything() {
        let inst = clock_instance();
        let mut sets = NeighborSets::build(&inst, 4);
        for u in inst.customers() {
            sets.set_ng(u, sets.la_set(u)).unwrap();
        }
        let route = r(&inst, &[1, 2, 7, 3]);
        assert!(route.is_elementary());
        for k in 0..6 {
            assert!(route.is_kq_route(k));
        }
        assert!(route.is_ng_route(&sets));
        assert!(route.is_la_route(&sets));
    }

    #[test]
    fn kq_windows() {
        let inst = generate_instance(4, 6, 6, DemandMode::Unit).unwrap();
        let route = r(&inst, &[1, 2, 3, 1]);
        assert!(route.is_kq_route(1));
        assert!(route.is_kq_route(2));
        assert!(!route.is_kq_route(3));
        assert!(!r(&inst, &[1, 2, 1]).is_kq_route(2));
    }

    #[test]
    fn trim_example() {
        let inst = generate_instance(4, 6, 10, DemandMode::Unit).unwrap();
        let route = r(&inst, &[1, 2, 3, 1, 5, 2, 1]);
        let t = route.trim_to_elementary(&inst);
        assert_eq!(t.seq(), &[1, 2, 3, 5]);
        assert_eq!(t.demand_used(), 4);
        let e = r(&inst, &[4, 2, 6]);
        assert_eq!(e.trim_to_elementary(&inst), e);
    }

    #[test]
    fn cycles_are_consecutive_pairs() {
        let inst = generate_instance(4, 6, 10, DemandMode::Unit).unwrap();
        let route = r(&inst, &[1, 2, 3, 1, 5, 2, 1]);
        let cyc: Vec<_> = route.cycles().collect();
        assert_eq!(cyc, vec![(0, 3), (1, 5), (3, 6)]);
    }

    fn arb_route() -> impl Strategy<Value = (u64, Vec<usize>)> {
        (0u64..200, prop::collection::vec(1usize..=8, 1..12))
    }

    proptest! {
        #[test]
        fn trim_is_idempotent_and_no_costlier((seed, seq) in arb_route()) {
            let inst = generate_instance(seed, 8, 20, DemandMode::Unit).unwrap();
            let c = CostMatrix::new(&inst);
            let route = Route::new(seq, &inst).unwrap();
            let t = route.trim_to_elementary(&inst);
            prop_assert!(t.is_elementary());
            prop_assert_eq!(t.trim_to_elementary(&inst), t.clone());
            prop_assert!(t.cost(&c) <= route.cost(&c) + 1e-9);
        }

        #[test]
        fn special_indices_match_direct_loop((seed, seq) in arb_route(), k in 0usize..6) {
            let inst = generate_instance(seed, 8, 20, DemandMode::Unit).unwrap();
            let sets = NeighborSets::build(&inst, k);
            let route = Route::new(seq.clone(), &inst).unwrap();
            // direct re-derivation: scan forward from each special position
            let mut expected = vec![0usize];
            loop {
                let last = *expected.last().unwrap();
                let v = seq[last];
                match (last + 1..seq.len()).find(|&k| !sets.la(v).contains(&seq[k])) {
                    Some(next) => expected.push(next),
                    None => break,
                }
            }
            prop_assert_eq!(route.special_indices(&sets), expected);
        }
    }
}
