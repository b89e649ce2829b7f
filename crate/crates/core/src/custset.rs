use std::fmt;

/// Largest customer id representable in a [`CustomerSet`].
pub const MAX_CUSTOMERS: usize = 127;

/// A set of customer ids (1..=127) stored as a bitset.
///
/// Bit `i` is customer `i`; bit 0 is never set because id 0 is the depot.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CustomerSet(u128);

impl CustomerSet {
    pub const EMPTY: CustomerSet = CustomerSet(0);

    pub fn from_bits(bits: u128) -> Self {
        CustomerSet(bits & !1)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(u: usize) -> Self {
        debug_assert!((1..=MAX_CUSTOMERS).contains(&u));
        CustomerSet(1u128 << u)
    }

    pub fn contains(self, u: usize) -> bool {
        u >= 1 && u <= MAX_CUSTOMERS && (self.0 >> u) & 1 == 1
    }

    /// Inserts `u`, returning whether the set grew.
    pub fn insert(&mut self, u: usize) -> bool {
        let before = self.0;
        self.0 |= 1u128 << u;
        before != self.0
    }

    pub fn remove(&mut self, u: usize) {
        self.0 &= !(1u128 << u);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CustomerSet) -> CustomerSet {
        CustomerSet(self.0 | other.0)
    }

    pub fn intersection(self, other: CustomerSet) -> CustomerSet {
        CustomerSet(self.0 & other.0)
    }

    pub fn difference(self, other: CustomerSet) -> CustomerSet {
        CustomerSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: CustomerSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: CustomerSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending id order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for CustomerSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = CustomerSet::EMPTY;
        for u in iter {
            s.insert(u);
        }
        s
    }
}

impl fmt::Debug for CustomerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
