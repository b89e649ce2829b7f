//! One-time precomputation of lowest-cost component paths.
//!
//! Three layers are filled, bottom up:
//!
//! * inner paths: for a customer set `S ⊆ N_u` and `v, w ∈ S`, the cheapest
//!   elementary path from `v` to `w` visiting exactly `S`. These only depend
//!   on `S`, so they are memoized by the set itself and shared between every
//!   `u` whose neighborhood contains `S`;
//! * start paths: from `u` through all of `S`, ending at `w ∈ S`;
//! * arcs: from `u` through all of `S ⊆ N_u`, ending at a customer or the
//!   sink outside `N_u ∪ {u}`.
//!
//! Inner paths are built by choosing the successor `y` of `v`, start paths
//! by choosing the customer right after `u`, and arcs by choosing the
//! customer right before the end.

use std::collections::HashMap;
use std::sync::Arc;

use crate::custset::CustomerSet;
use crate::error::{Error, Result};
use crate::instance::{CostMatrix, Instance, DEPOT};
use crate::neighbors::NeighborSets;

/// Largest LA neighborhood the tables accept.
pub const MAX_LA_NEIGHBORS: usize = 20;

pub(crate) const NONE: u8 = u8::MAX;
const NO_TARGET: u16 = u16::MAX;

/// Cheapest orderings between every ordered pair of a fixed customer set.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetPaths {
    members: Vec<usize>,
    cost: Vec<f64>,
    next: Vec<u8>,
}

impl SubsetPaths {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn set(&self) -> CustomerSet {
        self.members.iter().copied().collect()
    }

    /// Cost between the members at indices `vi` and `wi`.
    pub fn cost(&self, vi: usize, wi: usize) -> f64 {
        self.cost[vi * self.members.len() + wi]
    }

    fn build(set: CustomerSet, memo: &HashMap<CustomerSet, Arc<SubsetPaths>>, c: &CostMatrix) -> Self {
        let members: Vec<usize> = set.iter().collect();
        let s = members.len();
        let mut cost = vec![f64::INFINITY; s * s];
        let mut next = vec![NONE; s * s];
        match s {
            0 => {}
            1 => cost[0] = 0.0,
            2 => {
                cost[1] = c.get(members[0], members[1]);
                cost[2] = c.get(members[1], members[0]);
            }
            _ => {
                for (vi, &v) in members.iter().enumerate() {
                    let mut rest = set;
                    rest.remove(v);
                    let sub = &memo[&rest];
                    for wi in (0..s).filter(|&wi| wi != vi) {
                        let wsub = if wi > vi { wi - 1 } else { wi };
                        let mut best = f64::INFINITY;
                        let mut arg = NONE;
                        // ascending y keeps the lexicographically smallest optimum
                        for yi in (0..s).filter(|&yi| yi != vi && yi != wi) {
                            let ysub = if yi > vi { yi - 1 } else { yi };
                            let cand = c.get(v, members[yi]) + sub.cost(ysub, wsub);
                            if cand < best {
                                best = cand;
                                arg = yi as u8;
                            }
                        }
                        cost[vi * s + wi] = best;
                        next[vi * s + wi] = arg;
                    }
                }
            }
        }
        SubsetPaths { members, cost, next }
    }
}

/// Per-customer slice of the table.
#[derive(Debug, Clone)]
pub(crate) struct Neighborhood {
    pub(crate) u: usize,
    /// `N_u` in ascending id order; local bit `i` is `members[i]`.
    pub(crate) members: Vec<usize>,
    /// Indexed by local mask.
    pub(crate) blocks: Vec<Arc<SubsetPaths>>,
    /// `d_u + Σ d_w` over the mask.
    pub(crate) demand: Vec<u32>,
    pub(crate) set: Vec<CustomerSet>,
    start_cost: Vec<f64>,
    start_next: Vec<u8>,
    /// Arc ends: every customer outside `N_u ∪ {u}` ascending, then the sink (0).
    pub(crate) targets: Vec<usize>,
    target_index: Vec<u16>,
    pub(crate) arc_cost: Vec<f64>,
    arc_last: Vec<u8>,
    /// Cheapest arc over ends that still fit in the vehicle; infinite when the
    /// mask itself does not fit.
    pub(crate) min_feasible_arc: Vec<f64>,
    /// Local masks whose demand fits in a vehicle, ascending.
    pub(crate) fitting: Vec<u32>,
    /// `demand[m]` for each `m` in `fitting`.
    pub(crate) fitting_demand: Vec<u32>,
}

impl Neighborhood {
    fn k(&self) -> usize {
        self.members.len()
    }

    pub(crate) fn target_of(&self, v: usize) -> Option<usize> {
        match self.target_index.get(v) {
            Some(&t) if t != NO_TARGET => Some(t as usize),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn arc_cost_at(&self, mask: usize, t: usize) -> f64 {
        self.arc_cost[mask * self.targets.len() + t]
    }

    pub(crate) fn local_mask(&self, subset: CustomerSet) -> Option<usize> {
        let mut mask = 0usize;
        for w in subset.iter() {
            let i = self.members.iter().position(|&m| m == w)?;
            mask |= 1 << i;
        }
        Some(mask)
    }

    fn rank(mask: usize, i: usize) -> usize {
        (mask & ((1 << i) - 1)).count_ones() as usize
    }

    fn start_path(&self, mask: usize, wi: usize) -> Vec<usize> {
        let mut path = vec![self.u];
        if mask.count_ones() == 1 {
            path.push(self.members[wi]);
            return path;
        }
        let vi = self.start_next[mask * self.k() + wi] as usize;
        let block = &self.blocks[mask];
        inner_walk(block, Self::rank(mask, vi), Self::rank(mask, wi), &self.blocks, mask, &self.members, &mut path);
        path
    }

    fn arc_path(&self, mask: usize, t: usize) -> Vec<usize> {
        let v = self.targets[t];
        if mask == 0 {
            return vec![self.u, v];
        }
        let wi = self.arc_last[mask * self.targets.len() + t] as usize;
        let mut p = self.start_path(mask, wi);
        p.push(v);
        p
    }
}

/// Appends the inner path from block-local `vi` to `wi` through the whole
/// block. Sub-blocks are found through the owner's mask-indexed blocks.
fn inner_walk(
    block: &SubsetPaths,
    vi: usize,
    wi: usize,
    blocks: &[Arc<SubsetPaths>],
    mask: usize,
    members: &[usize],
    out: &mut Vec<usize>,
) {
    let mut block = block;
    let mut mask = mask;
    let mut vi = vi;
    let mut wi = wi;
    loop {
        let s = block.members.len();
        let v = block.members[vi];
        if s == 1 {
            out.push(v);
            return;
        }
        if s == 2 {
            out.push(v);
            out.push(block.members[wi]);
            return;
        }
        out.push(v);
        let yi = block.next[vi * s + wi] as usize;
        let local_v = members.iter().position(|&m| m == v).unwrap();
        mask &= !(1 << local_v);
        let ny = if yi > vi { yi - 1 } else { yi };
        let nw = if wi > vi { wi - 1 } else { wi };
        block = &blocks[mask];
        vi = ny;
        wi = nw;
    }
}

/// Lowest-cost component paths for every `u`, `N̂ ⊆ N_u` and valid endpoint.
#[derive(Debug, Clone)]
pub struct ComponentPathTable {
    pub(crate) hoods: Vec<Neighborhood>,
    capacity: u32,
    la_size: usize,
    shared: bool,
    distinct_blocks: usize,
}

impl ComponentPathTable {
    /// Builds the table with inner paths shared across neighborhoods.
    pub fn build(inst: &Instance, sets: &NeighborSets) -> Result<Self> {
        Self::build_with(inst, sets, true)
    }

    /// `shared = false` recomputes inner paths separately for every `u`;
    /// only useful for checking that sharing changes nothing.
    pub fn build_with(inst: &Instance, sets: &NeighborSets, shared: bool) -> Result<Self> {
        let n = inst.n();
        if sets.n() != n {
            return Err(Error::Config("neighbor sets do not match the instance".into()));
        }
        for u in inst.customers() {
            if sets.la(u).len() > MAX_LA_NEIGHBORS {
                return Err(Error::Config(format!(
                    "|N_{u}| = {} exceeds the supported maximum of {MAX_LA_NEIGHBORS}",
                    sets.la(u).len()
                )));
            }
        }
        let c = CostMatrix::new(inst);
        let members: Vec<Vec<usize>> = (0..=n)
            .map(|u| {
                let mut m = sets.la(u).to_vec();
                m.sort_unstable();
                m
            })
            .collect();
        let kmax = members.iter().map(|m| m.len()).max().unwrap_or(0);

        let mut memos: Vec<HashMap<CustomerSet, Arc<SubsetPaths>>> =
            if shared { vec![HashMap::new()] } else { vec![HashMap::new(); n + 1] };
        let memo_slot = |u: usize| if shared { 0 } else { u };

        // subsets by increasing size, customers inner
        for f in 0..=kmax {
            for u in inst.customers() {
                let k = members[u].len();
                if f > k {
                    continue;
                }
                let memo = &mut memos[memo_slot(u)];
                for mask in 0usize..(1 << k) {
                    if mask.count_ones() as usize != f {
                        continue;
                    }
                    let set: CustomerSet = bits(mask).map(|i| members[u][i]).collect();
                    if !memo.contains_key(&set) {
                        let block = SubsetPaths::build(set, memo, &c);
                        memo.insert(set, Arc::new(block));
                    }
                }
            }
        }

        let mut hoods = Vec::with_capacity(n + 1);
        hoods.push(Self::empty_hood(inst));
        for u in inst.customers() {
            hoods.push(Self::build_hood(inst, &c, u, &members[u], &memos[memo_slot(u)]));
        }
        let distinct_blocks = memos.iter().map(|m| m.len()).sum();
        Ok(ComponentPathTable {
            hoods,
            capacity: inst.capacity(),
            la_size: sets.la_size(),
            shared,
            distinct_blocks,
        })
    }

    fn empty_hood(_inst: &Instance) -> Neighborhood {
        Neighborhood {
            u: DEPOT,
            members: Vec::new(),
            blocks: Vec::new(),
            demand: Vec::new(),
            set: Vec::new(),
            start_cost: Vec::new(),
            start_next: Vec::new(),
            targets: Vec::new(),
            target_index: Vec::new(),
            arc_cost: Vec::new(),
            arc_last: Vec::new(),
            min_feasible_arc: Vec::new(),
            fitting: Vec::new(),
            fitting_demand: Vec::new(),
        }
    }

    fn build_hood(
        inst: &Instance,
        c: &CostMatrix,
        u: usize,
        members: &[usize],
        memo: &HashMap<CustomerSet, Arc<SubsetPaths>>,
    ) -> Neighborhood {
        let k = members.len();
        let nmask = 1usize << k;
        let mut blocks = Vec::with_capacity(nmask);
        let mut demand = Vec::with_capacity(nmask);
        let mut set = Vec::with_capacity(nmask);
        for mask in 0..nmask {
            let s: CustomerSet = bits(mask).map(|i| members[i]).collect();
            blocks.push(memo[&s].clone());
            demand.push(inst.demand(u) + s.iter().map(|w| inst.demand(w)).sum::<u32>());
            set.push(s);
        }

        let mut start_cost = vec![f64::INFINITY; nmask * k];
        let mut start_next = vec![NONE; nmask * k];
        for mask in 1..nmask {
            let block = &blocks[mask];
            let single = mask.count_ones() == 1;
            for wi in bits(mask) {
                if single {
                    start_cost[mask * k + wi] = c.get(u, members[wi]);
                    continue;
                }
                let wr = Neighborhood::rank(mask, wi);
                let mut best = f64::INFINITY;
                let mut arg = NONE;
                for vi in bits(mask).filter(|&vi| vi != wi) {
                    let cand = c.get(u, members[vi]) + block.cost(Neighborhood::rank(mask, vi), wr);
                    if cand < best {
                        best = cand;
                        arg = vi as u8;
                    }
                }
                start_cost[mask * k + wi] = best;
                start_next[mask * k + wi] = arg;
            }
        }

        let in_hood: CustomerSet = members.iter().copied().collect();
        let mut targets: Vec<usize> = inst
            .customers()
            .filter(|&v| v != u && !in_hood.contains(v))
            .collect();
        targets.push(DEPOT);
        let mut target_index = vec![NO_TARGET; inst.n() + 1];
        for (t, &v) in targets.iter().enumerate() {
            target_index[v] = t as u16;
        }

        let nt = targets.len();
        let mut hood = Neighborhood {
            u,
            members: members.to_vec(),
            blocks,
            demand,
            set,
            start_cost,
            start_next,
            targets,
            target_index,
            arc_cost: vec![f64::INFINITY; nmask * nt],
            arc_last: vec![NONE; nmask * nt],
            min_feasible_arc: vec![f64::INFINITY; nmask],
            fitting: Vec::new(),
            fitting_demand: Vec::new(),
        };
        (hood.fitting, hood.fitting_demand) = fitting_masks(&hood.demand, inst.capacity());

        for mask in 0..nmask {
            for t in 0..nt {
                let v = hood.targets[t];
                if mask == 0 {
                    hood.arc_cost[t] = c.get(u, v);
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut arg = NONE;
                for wi in bits(mask) {
                    let cand = hood.start_cost[mask * k + wi] + c.get(members[wi], v);
                    let better = cand < best
                        || (cand == best && arg != NONE && hood.start_path(mask, wi) < hood.start_path(mask, arg as usize));
                    if better {
                        best = cand;
                        arg = wi as u8;
                    }
                }
                hood.arc_cost[mask * nt + t] = best;
                hood.arc_last[mask * nt + t] = arg;
            }
        }

        let cap = inst.capacity();
        for mask in 0..nmask {
            let zd = hood.demand[mask];
            if zd > cap {
                continue;
            }
            let mut best = f64::INFINITY;
            for t in 0..nt {
                let v = hood.targets[t];
                if v == DEPOT || zd + inst.demand(v) <= cap {
                    best = best.min(hood.arc_cost[mask * nt + t]);
                }
            }
            hood.min_feasible_arc[mask] = best;
        }
        hood
    }

    pub fn n(&self) -> usize {
        self.hoods.len() - 1
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn la_size(&self) -> usize {
        self.la_size
    }

    pub fn is_shared(&self) -> bool {
        self.shared
    }

    /// Number of distinct inner-path blocks computed.
    pub fn distinct_blocks(&self) -> usize {
        self.distinct_blocks
    }

    /// `N_u` in ascending id order.
    pub fn la_members(&self, u: usize) -> &[usize] {
        &self.hoods[u].members
    }

    /// Inner-path block of `subset ⊆ N_u` as seen from `u`.
    pub fn subset_paths(&self, u: usize, subset: CustomerSet) -> Option<&SubsetPaths> {
        let hood = &self.hoods[u];
        let mask = hood.local_mask(subset)?;
        Some(&hood.blocks[mask])
    }

    /// Cheapest elementary path from `v` to `w` through exactly `subset ⊆ N_u`.
    pub fn inner_cost(&self, u: usize, subset: CustomerSet, v: usize, w: usize) -> Option<f64> {
        let block = self.subset_paths(u, subset)?;
        let vi = block.members.iter().position(|&m| m == v)?;
        let wi = block.members.iter().position(|&m| m == w)?;
        let cost = block.cost(vi, wi);
        cost.is_finite().then_some(cost)
    }

    pub fn inner_path(&self, u: usize, subset: CustomerSet, v: usize, w: usize) -> Option<Vec<usize>> {
        self.inner_cost(u, subset, v, w)?;
        let hood = &self.hoods[u];
        let mask = hood.local_mask(subset)?;
        let block = &hood.blocks[mask];
        let vi = block.members.iter().position(|&m| m == v)?;
        let wi = block.members.iter().position(|&m| m == w)?;
        let mut out = Vec::new();
        inner_walk(block, vi, wi, &hood.blocks, mask, &hood.members, &mut out);
        Some(out)
    }

    /// Cheapest path from `u` through `subset ∪ {u}` ending at `w ∈ subset`.
    /// The empty subset with `w = u` costs 0.
    pub fn start_cost(&self, u: usize, subset: CustomerSet, w: usize) -> Option<f64> {
        let hood = &self.hoods[u];
        let mask = hood.local_mask(subset)?;
        if mask == 0 {
            return (w == u).then_some(0.0);
        }
        let wi = hood.members.iter().position(|&m| m == w)?;
        if mask & (1 << wi) == 0 {
            return None;
        }
        Some(hood.start_cost[mask * hood.k() + wi])
    }

    pub fn start_path(&self, u: usize, subset: CustomerSet, w: usize) -> Option<Vec<usize>> {
        self.start_cost(u, subset, w)?;
        let hood = &self.hoods[u];
        let mask = hood.local_mask(subset)?;
        if mask == 0 {
            return Some(vec![u]);
        }
        let wi = hood.members.iter().position(|&m| m == w)?;
        Some(hood.start_path(mask, wi))
    }

    /// Cost of the LA arc from `u` to `v` (0 = sink) through `subset ⊆ N_u`.
    pub fn arc_cost(&self, u: usize, v: usize, subset: CustomerSet) -> Option<f64> {
        let hood = &self.hoods[u];
        let t = hood.target_of(v)?;
        let mask = hood.local_mask(subset)?;
        Some(hood.arc_cost_at(mask, t))
    }

    pub fn arc(&self, u: usize, v: usize, subset: CustomerSet) -> Option<LaArc> {
        let hood = self.hoods.get(u)?;
        let t = hood.target_of(v)?;
        let mask = hood.local_mask(subset)?;
        Some(self.arc_at(u, mask, t))
    }

    pub(crate) fn arc_at(&self, u: usize, mask: usize, t: usize) -> LaArc {
        let hood = &self.hoods[u];
        LaArc {
            start: u,
            end: hood.targets[t],
            intermediates: hood.set[mask],
            cost: hood.arc_cost_at(mask, t),
            demand: hood.demand[mask],
            path: hood.arc_path(mask, t),
        }
    }

    /// Every arc `(u, v, N̂)` whose start-plus-intermediates fit in a vehicle.
    pub fn arcs(&self) -> impl Iterator<Item = LaArc> + '_ {
        let cap = self.capacity;
        (1..self.hoods.len()).flat_map(move |u| {
            let hood = &self.hoods[u];
            (0..hood.demand.len())
                .filter(move |&mask| hood.demand[mask] <= cap)
                .flat_map(move |mask| (0..hood.targets.len()).map(move |t| self.arc_at(u, mask, t)))
        })
    }
}

/// A component path: from `start`, through every customer of
/// `intermediates` (all in `N_start`), to `end` outside `N_start ∪ {start}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaArc {
    pub start: usize,
    /// Customer id, or 0 for the sink.
    pub end: usize,
    pub intermediates: CustomerSet,
    pub cost: f64,
    /// Demand of `start` plus the intermediates.
    pub demand: u32,
    /// `start`, intermediates in travel order, then `end`.
    pub path: Vec<usize>,
}

impl LaArc {
    /// Customers serviced by the arc, excluding its end.
    pub fn serviced(&self) -> &[usize] {
        &self.path[..self.path.len() - 1]
    }
}

fn fitting_masks(demand: &[u32], capacity: u32) -> (Vec<u32>, Vec<u32>) {
    (0..demand.len() as u32)
        .filter(|&m| demand[m as usize] <= capacity)
        .map(|m| (m, demand[m as usize]))
        .unzip()
}

pub(crate) fn bits(mask: usize) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

// Binary cache ---------------------------------------------------------------

mod cache {
    use super::*;
    use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
    use std::io::{Read, Write};

    const MAGIC: &[u8; 8] = b"LACGTBL\0";
    const VERSION: u32 = 1;

    impl ComponentPathTable {
        /// Writes the table; `key` identifies the instance it was built for.
        pub fn write_cache<W: Write>(&self, key: &[u8; 32], mut w: W) -> Result<()> {
            w.write_all(MAGIC)?;
            w.write_u32::<LittleEndian>(VERSION)?;
            w.write_all(key)?;
            w.write_u32::<LittleEndian>(self.la_size as u32)?;
            w.write_u32::<LittleEndian>(self.n() as u32)?;
            w.write_u32::<LittleEndian>(self.capacity)?;
            w.write_u8(self.shared as u8)?;

            // every distinct block once, in a fixed order
            let mut seen: HashMap<*const SubsetPaths, ()> = HashMap::new();
            let mut blocks: Vec<(usize, &Arc<SubsetPaths>)> = Vec::new();
            for (u, hood) in self.hoods.iter().enumerate().skip(1) {
                for b in &hood.blocks {
                    if seen.insert(Arc::as_ptr(b), ()).is_none() {
                        blocks.push((u, b));
                    }
                }
            }
            w.write_u64::<LittleEndian>(blocks.len() as u64)?;
            for (owner, b) in &blocks {
                w.write_u32::<LittleEndian>(*owner as u32)?;
                w.write_u128::<LittleEndian>(b.set().bits())?;
                for &x in &b.cost {
                    w.write_f64::<LittleEndian>(x)?;
                }
                w.write_all(&b.next)?;
            }

            for hood in self.hoods.iter().skip(1) {
                w.write_u32::<LittleEndian>(hood.members.len() as u32)?;
                for &m in &hood.members {
                    w.write_u32::<LittleEndian>(m as u32)?;
                }
                for &x in &hood.start_cost {
                    w.write_f64::<LittleEndian>(x)?;
                }
                w.write_all(&hood.start_next)?;
                for &x in &hood.arc_cost {
                    w.write_f64::<LittleEndian>(x)?;
                }
                w.write_all(&hood.arc_last)?;
                for &x in &hood.min_feasible_arc {
                    w.write_f64::<LittleEndian>(x)?;
                }
            }
            Ok(())
        }

        /// Reads a table written by [`ComponentPathTable::write_cache`].
        /// Fails if the key, instance size or neighborhoods do not match.
        pub fn read_cache<R: Read>(inst: &Instance, sets: &NeighborSets, key: &[u8; 32], mut r: R) -> Result<Self> {
            let bad = |m: &str| Error::Validation(format!("table cache: {m}"));
            let mut magic = [0u8; 8];
            r.read_exact(&mut magic)?;
            if &magic != MAGIC {
                return Err(bad("bad magic"));
            }
            if r.read_u32::<LittleEndian>()? != VERSION {
                return Err(bad("unsupported version"));
            }
            let mut stored = [0u8; 32];
            r.read_exact(&mut stored)?;
            if &stored != key {
                return Err(bad("instance key mismatch"));
            }
            let la_size = r.read_u32::<LittleEndian>()? as usize;
            if la_size != sets.la_size() {
                return Err(bad("neighborhood size mismatch"));
            }
            let n = r.read_u32::<LittleEndian>()? as usize;
            if n != inst.n() {
                return Err(bad("customer count mismatch"));
            }
            let capacity = r.read_u32::<LittleEndian>()?;
            if capacity != inst.capacity() {
                return Err(bad("capacity mismatch"));
            }
            let shared = r.read_u8()? != 0;

            let nblocks = r.read_u64::<LittleEndian>()? as usize;
            let mut memos: Vec<HashMap<CustomerSet, Arc<SubsetPaths>>> =
                if shared { vec![HashMap::new()] } else { vec![HashMap::new(); n + 1] };
            for _ in 0..nblocks {
                let owner = r.read_u32::<LittleEndian>()? as usize;
                let set = CustomerSet::from_bits(r.read_u128::<LittleEndian>()?);
                let members: Vec<usize> = set.iter().collect();
                let s = members.len();
                let mut cost = vec![0.0; s * s];
                for x in cost.iter_mut() {
                    *x = r.read_f64::<LittleEndian>()?;
                }
                let mut next = vec![0u8; s * s];
                r.read_exact(&mut next)?;
                let slot = if shared { 0 } else { owner.min(n) };
                memos[slot].insert(set, Arc::new(SubsetPaths { members, cost, next }));
            }

            let mut hoods = Vec::with_capacity(n + 1);
            hoods.push(Self::empty_hood(inst));
            for u in 1..=n {
                let k = r.read_u32::<LittleEndian>()? as usize;
                let mut members = Vec::with_capacity(k);
                for _ in 0..k {
                    members.push(r.read_u32::<LittleEndian>()? as usize);
                }
                let mut expect = sets.la(u).to_vec();
                expect.sort_unstable();
                if expect != members {
                    return Err(bad("neighborhood mismatch"));
                }
                let memo = &memos[if shared { 0 } else { u }];
                let nmask = 1usize << k;
                let mut blocks = Vec::with_capacity(nmask);
                let mut demand = Vec::with_capacity(nmask);
                let mut set = Vec::with_capacity(nmask);
                for mask in 0..nmask {
                    let s: CustomerSet = bits(mask).map(|i| members[i]).collect();
                    blocks.push(memo.get(&s).ok_or_else(|| bad("missing block"))?.clone());
                    demand.push(inst.demand(u) + s.iter().map(|w| inst.demand(w)).sum::<u32>());
                    set.push(s);
                }
                let in_hood: CustomerSet = members.iter().copied().collect();
                let mut targets: Vec<usize> = inst
                    .customers()
                    .filter(|&v| v != u && !in_hood.contains(v))
                    .collect();
                targets.push(DEPOT);
                let mut target_index = vec![NO_TARGET; n + 1];
                for (t, &v) in targets.iter().enumerate() {
                    target_index[v] = t as u16;
                }
                let read_f64s = |r: &mut R, len: usize| -> Result<Vec<f64>> {
                    let mut v = vec![0.0; len];
                    for x in v.iter_mut() {
                        *x = r.read_f64::<LittleEndian>()?;
                    }
                    Ok(v)
                };
                let start_cost = read_f64s(&mut r, nmask * k)?;
                let mut start_next = vec![0u8; nmask * k];
                r.read_exact(&mut start_next)?;
                let nt = targets.len();
                let arc_cost = read_f64s(&mut r, nmask * nt)?;
                let mut arc_last = vec![0u8; nmask * nt];
                r.read_exact(&mut arc_last)?;
                let min_feasible_arc = read_f64s(&mut r, nmask)?;
                let (fitting, fitting_demand) = fitting_masks(&demand, capacity);
                hoods.push(Neighborhood {
                    u,
                    members,
                    blocks,
                    demand,
                    set,
                    start_cost,
                    start_next,
                    targets,
                    target_index,
                    arc_cost,
                    arc_last,
                    min_feasible_arc,
                    fitting,
                    fitting_demand,
                });
            }
            let distinct_blocks = memos.iter().map(|m| m.len()).sum();
            Ok(ComponentPathTable {
                hoods,
                capacity,
                la_size,
                shared,
                distinct_blocks,
            })
        }
    }
}
