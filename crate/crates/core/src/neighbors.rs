//! LA neighbor sets `N_u` (fixed, spatial) and ng neighbor sets `M_u`
//! (grown by DSSR inside a single pricing call).

use crate::custset::CustomerSet;
use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSets {
    /// `la[u]` ordered by distance to `u`, ties by ascending id. `la[0]` is empty.
    la: Vec<Vec<usize>>,
    la_mask: Vec<CustomerSet>,
    ng: Vec<CustomerSet>,
    la_size: usize,
}

impl NeighborSets {
    /// The `k` nearest customers of each customer form `N_u`; all `M_u` start empty.
    pub fn build(inst: &Instance, k: usize) -> Self {
        let n = inst.n();
        let mut la = vec![Vec::new(); n + 1];
        for u in inst.customers() {
            let mut others: Vec<usize> = inst.customers().filter(|&v| v != u).collect();
            others.sort_by(|&a, &b| {
                inst.distance(u, a)
                    .total_cmp(&inst.distance(u, b))
                    .then(a.cmp(&b))
            });
            others.truncate(k);
            la[u] = others;
        }
        Self::from_lists(la, k)
    }

    /// Builds from explicit `N_u` lists (index 0 ignored), with empty `M_u`.
    pub fn from_lists(la: Vec<Vec<usize>>, la_size: usize) -> Self {
        let la_mask = la.iter().map(|l| l.iter().copied().collect()).collect();
        let ng = vec![CustomerSet::EMPTY; la.len()];
        NeighborSets {
            la,
            la_mask,
            ng,
            la_size,
        }
    }

    /// Number of customers covered.
    pub fn n(&self) -> usize {
        self.la.len() - 1
    }

    pub fn la_size(&self) -> usize {
        self.la_size
    }

    pub fn la(&self, u: usize) -> &[usize] {
        &self.la[u]
    }

    pub fn la_set(&self, u: usize) -> CustomerSet {
        self.la_mask[u]
    }

    pub fn is_la_neighbor(&self, u: usize, v: usize) -> bool {
        self.la_mask[u].contains(v)
    }

    pub fn ng(&self, u: usize) -> CustomerSet {
        self.ng[u]
    }

    pub fn ng_total(&self) -> usize {
        self.ng.iter().map(|m| m.len()).sum()
    }

    pub fn reset_ng(&mut self) {
        self.ng.iter_mut().for_each(|m| *m = CustomerSet::EMPTY);
    }

    /// Replaces `M_w`; used for hand-set memories in tests and the oracle.
    pub fn set_ng(&mut self, w: usize, set: CustomerSet) -> Result<()> {
        self.check_customer(w)?;
        if set.contains(w) {
            return Err(Error::Contract(format!("M_{w} may not contain {w}")));
        }
        if set.iter().any(|u| u > self.n()) {
            return Err(Error::Contract(format!("M_{w} references unknown customers")));
        }
        self.ng[w] = set;
        Ok(())
    }

    /// Adds `u` to `M_w`. Returns whether `M_w` grew.
    pub fn augment_ng(&mut self, w: usize, u: usize) -> Result<bool> {
        self.check_customer(w)?;
        self.check_customer(u)?;
        if u == w {
            return Err(Error::Contract(format!("cannot add {u} to its own ng set")));
        }
        Ok(self.ng[w].insert(u))
    }

    fn check_customer(&self, u: usize) -> Result<()> {
        if u == 0 || u > self.n() {
            return Err(Error::Contract(format!("{u} is not a customer")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, DemandMode};
    use crate::oracle::clock_instance;

    #[test]
    fn k_zero_gives_empty_sets() {
        let inst = generate_instance(1, 8, 4, DemandMode::Unit).unwrap();
        let s = NeighborSets::build(&inst, 0);
        assert!(inst.customers().all(|u| s.la(u).is_empty()));
        assert_eq!(s.ng_total(), 0);
    }

    #[test]
    fn collinear_tie_goes_to_lower_id() {
        let inst = Instance::new("line", (0.0, 5.0), &[(0.0, 0.0, 1), (1.0, 0.0, 1), (2.0, 0.0, 1)], 3, 3).unwrap();
        let s = NeighborSets::build(&inst, 1);
        assert_eq!(s.la(2), &[1]);
        assert_eq!(s.la(1), &[2]);
        assert_eq!(s.la(3), &[2]);
    }

    #[test]
    fn clock_neighbors() {
        let inst = clock_instance();
        let s = NeighborSets::build(&inst, 4);
        let mut n4 = s.la(4).to_vec();
        n4.sort();
        assert_eq!(n4, vec![2, 3, 5, 6]);
        let mut n1 = s.la(1).to_vec();
        n1.sort();
        assert_eq!(n1, vec![2, 3, 11, 12]);
    }

    #[test]
    fn sizes_and_self_exclusion() {
        let inst = generate_instance(5, 6, 4, DemandMode::Unit).unwrap();
        let s = NeighborSets::build(&inst, 10);
        for u in inst.customers() {
            assert_eq!(s.la(u).len(), 5);
            assert!(!s.is_la_neighbor(u, u));
        }
        assert!(s.la(0).is_empty());
    }

    #[test]
    fn nested_in_k() {
        let inst = generate_instance(9, 15, 4, DemandMode::Unit).unwrap();
        let small = NeighborSets::build(&inst, 3);
        let big = NeighborSets::build(&inst, 7);
        for u in inst.customers() {
            assert!(small.la_set(u).is_subset(big.la_set(u)));
        }
    }

    #[test]
    fn augment_ng_rules() {
        let inst = generate_instance(2, 5, 4, DemandMode::Unit).unwrap();
        let mut s = NeighborSets::build(&inst, 2);
        assert!(s.augment_ng(3, 1).unwrap());
        assert_eq!(s.ng(3).iter().collect::<Vec<_>>(), vec![1]);
        assert!(!s.augment_ng(3, 1).unwrap());
        assert!(s.augment_ng(3, 3).is_err());
        assert!(s.augment_ng(0, 1).is_err());
        assert!(s.augment_ng(1, 0).is_err());
        s.reset_ng();
        assert_eq!(s.ng_total(), 0);
    }
}
