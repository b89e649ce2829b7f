//! Dual-bound view of the component-path table: the arc sets `Ω_z` for
//! `z = (u, v, M1, M2, d)` and their lowest-reduced-cost members.
//!
//! Arcs are grouped lazily into buckets per `(u, M1, v)`. A bucket holds,
//! for every reachable `(M2, d)`, the arc with the lowest reduced cost. Buckets
//! depend on `M_v` (through `M2`) and on the duals, so an index is built per
//! pricing call and buckets touching augmented customers are dropped by
//! [`OmegaIndex::invalidate`].

use std::rc::Rc;

use rustc_hash::FxHashMap;

use super::table::{ComponentPathTable, LaArc};
use crate::custset::CustomerSet;
use crate::instance::{Instance, DEPOT};
use crate::neighbors::NeighborSets;
use crate::route::DualSolution;

/// Best arc of one `Ω_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaEntry {
    pub m2: CustomerSet,
    /// `z_d`: demand of the start plus the intermediates.
    pub zd: u32,
    /// Intermediates as a local mask over the start's LA neighbors.
    pub mask: u32,
    pub reduced_cost: f64,
}

#[derive(Debug)]
pub struct Bucket {
    /// Target slot of `v` in the start's table.
    pub(crate) target: usize,
    /// Sorted by `(zd, m2)`.
    pub entries: Vec<OmegaEntry>,
    /// Sink buckets only: `prefix[d]` is the entry with the lowest reduced cost
    /// among those with `zd ≤ d`.
    pub(crate) prefix: Vec<Option<usize>>,
}

impl Bucket {
    /// Lowest-reduced-cost sink arc that fits into `d` units of capacity.
    pub fn best_within(&self, d: u32) -> Option<&OmegaEntry> {
        let d = (d as usize).min(self.prefix.len().checked_sub(1)?);
        self.prefix[d].map(|i| &self.entries[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BucketKey {
    u: usize,
    v: usize,
    target: usize,
    /// `m1 ∩ N_u` as a local mask.
    blocked: u32,
    /// `M_v ∩ (m1 ∪ {u})`.
    carried: CustomerSet,
}

const NONE: u32 = u32::MAX;

pub struct OmegaIndex<'t> {
    table: &'t ComponentPathTable,
    capacity: u32,
    demand: Vec<u32>,
    duals: DualSolution,
    /// `π_u + Σ_{w ∈ N̂} π_w` per start and local mask.
    dual_sum: Vec<Vec<f64>>,
    buckets: FxHashMap<BucketKey, Rc<Bucket>>,
    /// Winning masks per `(u, target, blocked, M_v ∩ N_u)`; these never go
    /// stale as memories grow, since the memory part is in the key.
    cores: FxHashMap<(usize, usize, u32, u32), Rc<Vec<u32>>>,
    /// Reused by mask grouping; every slot is `NONE` between uses.
    scratch: Vec<u32>,
    /// Reduced cost of the mask held in the matching `scratch` slot.
    scratch_rc: Vec<f64>,
    eta: f64,
    builds: usize,
}

impl<'t> OmegaIndex<'t> {
    pub fn new(inst: &Instance, table: &'t ComponentPathTable, duals: &DualSolution) -> Self {
        let capacity = inst.capacity();
        let demand: Vec<u32> = (0..=inst.n()).map(|u| inst.demand(u)).collect();
        let mut dual_sum = vec![Vec::new()];
        for hood in table.hoods.iter().skip(1) {
            let k = hood.members.len();
            let mut sums = vec![0.0; 1 << k];
            sums[0] = duals.pi[hood.u];
            // subsets of a fitting mask fit too, so ascending order is enough
            for &mask in hood.fitting.iter().skip(1) {
                let mask = mask as usize;
                let low = mask.trailing_zeros() as usize;
                sums[mask] = sums[mask & (mask - 1)] + duals.pi[hood.members[low]];
            }
            dual_sum.push(sums);
        }

        // η from every arc that fits somewhere, whatever the memories are
        let mut worst = 0.0f64;
        for hood in table.hoods.iter().skip(1) {
            let sums = &dual_sum[hood.u];
            for &mask in &hood.fitting {
                let mask = mask as usize;
                let best = hood.min_feasible_arc[mask];
                if best.is_finite() {
                    let ratio = (best - sums[mask]) / hood.demand[mask] as f64;
                    worst = worst.min(ratio);
                }
            }
        }

        OmegaIndex {
            table,
            capacity,
            demand,
            duals: duals.clone(),
            dual_sum,
            buckets: FxHashMap::default(),
            cores: FxHashMap::default(),
            scratch: Vec::new(),
            scratch_rc: Vec::new(),
            eta: -worst,
            builds: 0,
        }
    }

    pub fn table(&self) -> &'t ComponentPathTable {
        self.table
    }

    pub fn duals(&self) -> &DualSolution {
        &self.duals
    }

    /// `max(0, -min c̄_p / z_d)` over all arcs that fit in a vehicle.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Number of buckets built since construction, rebuilds included.
    pub fn builds(&self) -> usize {
        self.builds
    }

    pub fn cached(&self) -> usize {
        self.buckets.len()
    }

    /// Reduced cost of the arc from `u` through the local `mask` to `v`.
    pub fn arc_reduced_cost(&self, u: usize, mask: usize, target: usize) -> f64 {
        self.table.hoods[u].arc_cost_at(mask, target) - self.dual_sum[u][mask]
    }

    /// Bucket of arcs leaving `u` with memory `m1` towards `v` (0 = sink).
    /// `None` when `v` is not a valid arc end for `u` or `v ∈ m1`.
    pub fn bucket(&mut self, sets: &NeighborSets, u: usize, m1: CustomerSet, v: usize) -> Option<Rc<Bucket>> {
        if m1.contains(v) {
            return None;
        }
        let key = self.key(sets, u, m1, v)?;
        if let Some(b) = self.buckets.get(&key) {
            return Some(b.clone());
        }
        let b = Rc::new(self.build_bucket(sets, key));
        self.builds += 1;
        self.buckets.insert(key, b.clone());
        Some(b)
    }

    /// The cached bucket for `(u, m1, v)` if one exists; never builds.
    pub fn peek(&self, sets: &NeighborSets, u: usize, m1: CustomerSet, v: usize) -> Option<Rc<Bucket>> {
        if m1.contains(v) {
            return None;
        }
        self.buckets.get(&self.key(sets, u, m1, v)?).cloned()
    }

    /// A bucket only sees `m1` through the intermediates it blocks and the
    /// part of it that `M_v` carries forward, so distinct memories often share
    /// one.
    fn key(&self, sets: &NeighborSets, u: usize, m1: CustomerSet, v: usize) -> Option<BucketKey> {
        let hood = &self.table.hoods[u];
        let target = hood.target_of(v)?;
        let blocked = hood.local_mask(m1.intersection(sets.la_set(u))).unwrap_or(0) as u32;
        let carried = if v == DEPOT {
            CustomerSet::EMPTY
        } else {
            sets.ng(v).intersection(m1.union(CustomerSet::singleton(u)))
        };
        Some(BucketKey {
            u,
            v,
            target,
            blocked,
            carried,
        })
    }

    fn build_bucket(&mut self, sets: &NeighborSets, key: BucketKey) -> Bucket {
        let BucketKey {
            u,
            v,
            target,
            blocked,
            carried,
        } = key;
        let hood = &self.table.hoods[u];
        let blocked = blocked as usize;
        let room = self.room(v);
        let mv = if v == DEPOT { CustomerSet::EMPTY } else { sets.ng(v) };
        let mv_local = hood.local_mask(mv.intersection(sets.la_set(u))).unwrap_or(0);

        let core_key = (u, target, blocked as u32, mv_local as u32);
        let winners = match self.cores.get(&core_key) {
            Some(w) => w.clone(),
            None => {
                let w = Rc::new(self.group_masks(u, target, blocked, mv_local, room));
                self.cores.insert(core_key, w.clone());
                w
            }
        };
        let sums = &self.dual_sum[u];
        let mut entries: Vec<OmegaEntry> = winners
            .iter()
            .map(|&mask| {
                let mask = mask as usize;
                OmegaEntry {
                    m2: carried.union(mv.intersection(hood.set[mask])),
                    zd: hood.demand[mask],
                    mask: mask as u32,
                    reduced_cost: hood.arc_cost_at(mask, target) - sums[mask],
                }
            })
            .collect();
        entries.sort_by(|a, b| a.zd.cmp(&b.zd).then(a.m2.cmp(&b.m2)));

        let mut prefix = Vec::new();
        if v == DEPOT {
            prefix = vec![None; self.capacity as usize + 1];
            let mut cur: Option<usize> = None;
            let mut i = 0;
            for d in 0..=self.capacity {
                while i < entries.len() && entries[i].zd <= d {
                    if cur.is_none_or(|c| entries[i].reduced_cost < entries[c].reduced_cost) {
                        cur = Some(i);
                    }
                    i += 1;
                }
                prefix[d as usize] = cur;
            }
        }
        Bucket { target, entries, prefix }
    }

    fn room(&self, v: usize) -> u32 {
        if v == DEPOT {
            self.capacity
        } else {
            self.capacity.saturating_sub(self.demand[v])
        }
    }

    /// Cheapest fitting mask per `(zd, mask ∩ mv_local)` among masks that
    /// avoid `blocked`. Masks go in ascending order so the first of equal
    /// costs wins. Independent of everything else in the memories, so it is
    /// shared by every bucket that differs only in what `M_v` carries.
    fn group_masks(&mut self, u: usize, target: usize, blocked: usize, mv_local: usize, room: u32) -> Vec<u32> {
        let hood = &self.table.hoods[u];
        let sums = &self.dual_sum[u];
        let nt = hood.targets.len();
        let width = 1usize << hood.members.len();
        let need = (self.capacity as usize + 1) * width;
        if self.scratch.len() < need {
            self.scratch.resize(need, NONE);
        }
        if self.scratch_rc.len() < need {
            self.scratch_rc.resize(need, f64::INFINITY);
        }
        let mut touched = Vec::new();
        for (&mask, &zd) in hood.fitting.iter().zip(&hood.fitting_demand) {
            let mask = mask as usize;
            if zd > room || mask & blocked != 0 {
                continue;
            }
            let rc = hood.arc_cost[mask * nt + target] - sums[mask];
            let slot = zd as usize * width + (mask & mv_local);
            if self.scratch[slot] == NONE {
                self.scratch[slot] = mask as u32;
                self.scratch_rc[slot] = rc;
                touched.push(slot);
            } else if rc < self.scratch_rc[slot] {
                self.scratch[slot] = mask as u32;
                self.scratch_rc[slot] = rc;
            }
        }
        touched
            .into_iter()
            .map(|slot| std::mem::replace(&mut self.scratch[slot], NONE))
            .collect()
    }

    /// Members of `Ω_z`: every arc from `u` to `v` whose intermediates avoid
    /// `m1`, whose end is not in `m1`, that carries exactly `m2` into `v` and
    /// has demand `d` (at most `d` for the sink).
    pub fn members(&self, sets: &NeighborSets, u: usize, v: usize, m1: CustomerSet, m2: CustomerSet, d: u32) -> Vec<LaArc> {
        let hood = &self.table.hoods[u];
        let Some(t) = hood.target_of(v) else {
            return Vec::new();
        };
        if m1.contains(v) {
            return Vec::new();
        }
        let mv = if v == DEPOT { CustomerSet::EMPTY } else { sets.ng(v) };
        let mut out = Vec::new();
        for mask in 0..hood.demand.len() {
            let set = hood.set[mask];
            let zd = hood.demand[mask];
            let fits = if v == DEPOT { zd <= d } else { zd == d };
            if !fits || zd > self.capacity || !set.is_disjoint(m1) {
                continue;
            }
            let carried = mv.intersection(m1.union(set).union(CustomerSet::singleton(u)));
            if carried == m2 {
                out.push(self.table.arc_at(u, mask, t));
            }
        }
        out
    }

    /// Lowest-reduced-cost member of `Ω_z`, with its reduced cost.
    pub fn lowest_rc_arc(
        &mut self,
        sets: &NeighborSets,
        u: usize,
        v: usize,
        m1: CustomerSet,
        m2: CustomerSet,
        d: u32,
    ) -> Option<(LaArc, f64)> {
        let bucket = self.bucket(sets, u, m1, v)?;
        let entry = if v == DEPOT {
            // sink arcs may also differ in M2 only if M_sink were nonempty
            if !m2.is_empty() {
                return None;
            }
            bucket.best_within(d)?
        } else {
            bucket.entries.iter().find(|e| e.zd == d && e.m2 == m2)?
        };
        Some((self.table.arc_at(u, entry.mask as usize, bucket.target), entry.reduced_cost))
    }

    /// Drops every cached bucket whose start or end lies in `augmented`.
    pub fn invalidate(&mut self, augmented: CustomerSet) {
        if augmented.is_empty() {
            return;
        }
        self.buckets
            .retain(|k, _| !augmented.contains(k.u) && !augmented.contains(k.v));
    }

    /// Drops the whole cache.
    pub fn clear(&mut self) {
        self.buckets.clear();
        self.cores.clear();
    }

    /// Best reduced cost per demand for arcs from `u` with no memories,
    /// dense over `zd * targets + t` (infinite when nothing fits). Used by
    /// the A* heuristic.
    pub(crate) fn flat_profiles(&self, u: usize) -> Vec<f64> {
        let hood = &self.table.hoods[u];
        let nt = hood.targets.len();
        let width = self.capacity as usize + 1;
        let sums = &self.dual_sum[u];
        let rooms: Vec<u32> = hood.targets.iter().map(|&v| self.room(v)).collect();
        let tight = rooms.iter().copied().min().unwrap_or(0);
        // masks outer so arc costs are read in order
        let mut best = vec![f64::INFINITY; width * nt];
        for (&mask, &zd) in hood.fitting.iter().zip(&hood.fitting_demand) {
            let m = mask as usize;
            let s = sums[m];
            let costs = &hood.arc_cost[m * nt..(m + 1) * nt];
            let slots = &mut best[zd as usize * nt..(zd as usize + 1) * nt];
            if zd <= tight {
                for (slot, &c) in slots.iter_mut().zip(costs) {
                    let rc = c - s;
                    *slot = if rc < *slot { rc } else { *slot };
                }
            } else {
                for ((slot, &c), &room) in slots.iter_mut().zip(costs).zip(&rooms) {
                    let rc = c - s;
                    if zd <= room && rc < *slot {
                        *slot = rc;
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CostMatrix, DemandMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_duals(n: usize, rng: &mut ChaCha8Rng) -> DualSolution {
        let pi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..800.0)).collect();
        DualSolution::new(&pi, rng.random_range(0.0..50.0)).unwrap()
    }

    fn hand_set_memories(sets: &mut NeighborSets) {
        sets.set_ng(1, [2, 3].into_iter().collect()).unwrap();
        sets.set_ng(2, [1].into_iter().collect()).unwrap();
        sets.set_ng(4, [1, 5].into_iter().collect()).unwrap();
        sets.set_ng(5, [3].into_iter().collect()).unwrap();
    }

    fn all_subsets(set: CustomerSet) -> Vec<CustomerSet> {
        let items: Vec<usize> = set.iter().collect();
        (0..1usize << items.len())
            .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &x)| x).collect())
            .collect()
    }

    #[test]
    fn empty_memories_key_by_demand_only() {
        let inst = generate_instance(4, 6, 4, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 2);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let mut idx = OmegaIndex::new(&inst, &table, &DualSolution::zeros(6));
        for u in inst.customers() {
            for &v in table.hoods[u].targets.clone().iter() {
                let b = idx.bucket(&sets, u, CustomerSet::EMPTY, v).unwrap();
                assert!(b.entries.iter().all(|e| e.m2.is_empty()));
                let mut zds: Vec<u32> = b.entries.iter().map(|e| e.zd).collect();
                zds.dedup();
                assert_eq!(zds.len(), b.entries.len());
            }
        }
    }

    #[test]
    fn membership_matches_definitional_filter() {
        let inst = generate_instance(11, 5, 5, DemandMode::Unit).unwrap();
        let mut sets = NeighborSets::build(&inst, 2);
        hand_set_memories(&mut sets);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let idx = OmegaIndex::new(&inst, &table, &DualSolution::zeros(5));
        let arcs: Vec<LaArc> = table.arcs().collect();
        for u in inst.customers() {
            for m1 in all_subsets(sets.ng(u)) {
                for v in 0..=5 {
                    let mv = if v == 0 { CustomerSet::EMPTY } else { sets.ng(v) };
                    for m2 in all_subsets(mv) {
                        for d in 1..=5 {
                            let got = idx.members(&sets, u, v, m1, m2, d);
                            let want: Vec<&LaArc> = arcs
                                .iter()
                                .filter(|a| a.start == u && a.end == v)
                                .filter(|a| a.intermediates.is_disjoint(m1) && !m1.contains(v))
                                .filter(|a| m2.difference(m1).is_subset(a.intermediates.union(CustomerSet::singleton(u))))
                                .filter(|a| {
                                    let outside = mv.difference(m2);
                                    outside.is_disjoint(a.intermediates) && !outside.contains(u) && outside.is_disjoint(m1)
                                })
                                .filter(|a| m2.is_subset(m1.union(a.intermediates).union(CustomerSet::singleton(u))))
                                .filter(|a| if v == 0 { a.demand <= d } else { a.demand == d })
                                .collect();
                            assert_eq!(got.len(), want.len(), "u={u} v={v} m1={m1:?} m2={m2:?} d={d}");
                            for a in want {
                                assert!(got.contains(a));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lowest_rc_matches_scan() {
        let inst = generate_instance(12, 6, 5, DemandMode::Unit).unwrap();
        let mut sets = NeighborSets::build(&inst, 3);
        hand_set_memories(&mut sets);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let duals = random_duals(6, &mut rng);
            let mut idx = OmegaIndex::new(&inst, &table, &duals);
            for u in inst.customers() {
                for m1 in all_subsets(sets.ng(u)) {
                    for v in 0..=6 {
                        let mv = if v == 0 { CustomerSet::EMPTY } else { sets.ng(v) };
                        for m2 in all_subsets(mv) {
                            for d in 1..=5 {
                                let members = idx.members(&sets, u, v, m1, m2, d);
                                let rc = |a: &LaArc| a.cost - a.serviced().iter().map(|&w| duals.pi[w]).sum::<f64>();
                                let scan = members.iter().map(rc).fold(f64::INFINITY, f64::min);
                                match idx.lowest_rc_arc(&sets, u, v, m1, m2, d) {
                                    None => assert!(members.is_empty()),
                                    Some((arc, r)) => {
                                        assert!((r - scan).abs() < 1e-9);
                                        assert!((rc(&arc) - r).abs() < 1e-9);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_duals_give_cheapest_and_single_member_ignores_duals() {
        let inst = generate_instance(2, 6, 6, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 2);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let c = CostMatrix::new(&inst);
        let mut idx = OmegaIndex::new(&inst, &table, &DualSolution::zeros(6));
        let (arc, rc) = idx.lowest_rc_arc(&sets, 1, 0, CustomerSet::EMPTY, CustomerSet::EMPTY, 6).unwrap();
        let cheapest = table
            .arcs()
            .filter(|a| a.start == 1 && a.end == 0)
            .map(|a| a.cost)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(rc, cheapest);
        assert_eq!(arc.cost, cheapest);
        // d = d_u admits only the direct leg
        let (arc, _) = idx.lowest_rc_arc(&sets, 1, 0, CustomerSet::EMPTY, CustomerSet::EMPTY, 1).unwrap();
        assert_eq!(arc.path, vec![1, 0]);
        assert_eq!(arc.cost, c.get(1, 0));
    }

    #[test]
    fn eta_examples() {
        let inst = generate_instance(2, 5, 5, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 2);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        assert_eq!(OmegaIndex::new(&inst, &table, &DualSolution::zeros(5)).eta(), 0.0);

        // a lone customer with a huge dual: η = -(c̄ / z_d) for its direct sink arc
        let inst = Instance::new("one", (0.0, 0.0), &[(3.0, 4.0, 3)], 3, 1).unwrap();
        let sets = NeighborSets::build(&inst, 0);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let duals = DualSolution::new(&[11.0], 0.0).unwrap();
        let idx = OmegaIndex::new(&inst, &table, &duals);
        assert!((idx.eta() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn targeted_invalidation_keeps_other_buckets() {
        let inst = generate_instance(6, 6, 4, DemandMode::Unit).unwrap();
        let sets = NeighborSets::build(&inst, 2);
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let mut idx = OmegaIndex::new(&inst, &table, &DualSolution::zeros(6));
        let mut kept = Vec::new();
        for u in inst.customers() {
            for v in 0..=6 {
                if let Some(b) = idx.bucket(&sets, u, CustomerSet::EMPTY, v) {
                    kept.push(((u, v), b));
                }
            }
        }
        let before = idx.cached();
        idx.invalidate(CustomerSet::EMPTY);
        assert_eq!(idx.cached(), before);
        let star = CustomerSet::singleton(3);
        idx.invalidate(star);
        for ((u, v), b) in kept {
            let now = idx.peek(&sets, u, CustomerSet::EMPTY, v);
            if u == 3 || v == 3 {
                assert!(now.is_none());
            } else {
                assert!(Rc::ptr_eq(&now.unwrap(), &b));
            }
        }
    }
}
