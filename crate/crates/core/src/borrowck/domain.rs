//! The borrow checker's abstract domain: a loans map keyed by union-find
//! representatives, the union-find itself, and the set of dead regions.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::dataflow::JoinSemiLattice;
use crate::ir::Region;

pub type LoanId = usize;

/// Union-find over regions with every entry pointing straight at its
/// representative, the smallest id in the class. Equal partitions therefore
/// have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionUf {
    rep: Vec<u32>,
}

impl RegionUf {
    pub fn new(n: usize) -> Self {
        RegionUf {
            rep: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn find(&self, r: Region) -> Region {
        Region(self.rep[r.0 as usize])
    }

    /// Merge the classes of `a` and `b`; returns the absorbed
    /// representative if they were distinct.
    pub fn union(&mut self, a: Region, b: Region) -> Option<(Region, Region)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        for x in self.rep.iter_mut() {
            if *x == gone.0 {
                *x = keep.0;
            }
        }
        Some((keep, gone))
    }

    pub fn members(&self, rep: Region) -> impl Iterator<Item = Region> + '_ {
        self.rep
            .iter()
            .enumerate()
            .filter(move |(_, &x)| x == rep.0)
            .map(|(i, _)| Region(i as u32))
    }

    pub fn is_rep(&self, r: Region) -> bool {
        self.find(r) == r
    }

    /// Classes with more than one member, smallest representative first.
    pub fn nontrivial_classes(&self) -> Vec<Vec<Region>> {
        let mut classes: BTreeMap<u32, Vec<Region>> = BTreeMap::new();
        for (i, &x) in self.rep.iter().enumerate() {
            classes.entry(x).or_default().push(Region(i as u32));
        }
        classes.into_values().filter(|c| c.len() > 1).collect()
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &RegionUf) -> bool {
        (0..self.rep.len()).all(|i| {
            let r = Region(i as u32);
            other.find(r) == other.find(self.find(r))
        })
    }
}

/// `(M × U)` plus the dead set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractState {
    /// Keys are representatives; sets are never empty.
    loans: BTreeMap<Region, FixedBitSet>,
    uf: RegionUf,
    dead: FixedBitSet,
    num_loans: usize,
}

impl AbstractState {
    /// The bottom element: no loans, the identity partition, and every
    /// region other than the first `universals` dead.
    pub fn bottom(num_regions: usize, universals: usize, num_loans: usize) -> Self {
        let mut dead = FixedBitSet::with_capacity(num_regions);
        dead.insert_range(universals.min(num_regions)..);
        AbstractState {
            loans: BTreeMap::new(),
            uf: RegionUf::new(num_regions),
            dead,
            num_loans,
        }
    }

    pub fn num_regions(&self) -> usize {
        self.uf.len()
    }

    pub fn num_loans(&self) -> usize {
        self.num_loans
    }

    pub fn uf(&self) -> &RegionUf {
        &self.uf
    }

    pub fn dead(&self) -> &FixedBitSet {
        &self.dead
    }

    pub fn find(&self, r: Region) -> Region {
        self.uf.find(r)
    }

    /// Loans of a representative.
    pub fn loans_at(&self, rep: Region) -> Option<&FixedBitSet> {
        debug_assert!(self.uf.is_rep(rep), "loans map indexed by non-representative {:?}", rep);
        self.loans.get(&rep)
    }

    /// Loans of any region, looked up through its representative.
    pub fn loans_of(&self, r: Region) -> Option<&FixedBitSet> {
        self.loans.get(&self.find(r))
    }

    pub fn contains(&self, r: Region, l: LoanId) -> bool {
        self.loans_of(r).is_some_and(|s| s.contains(l))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Region, &FixedBitSet)> {
        self.loans.iter().map(|(r, s)| (*r, s))
    }

    fn add_set(&mut self, rep: Region, set: &FixedBitSet) {
        if set.count_ones(..) == 0 {
            return;
        }
        let n = self.num_loans;
        self.loans
            .entry(rep)
            .or_insert_with(|| FixedBitSet::with_capacity(n))
            .union_with(set);
    }

    pub fn add_loan(&mut self, r: Region, l: LoanId) {
        assert!(l < self.num_loans, "loan {} out of range", l);
        let rep = self.find(r);
        let n = self.num_loans;
        self.loans
            .entry(rep)
            .or_insert_with(|| FixedBitSet::with_capacity(n))
            .insert(l);
    }

    /// Covariant flow: loans of `from` become loans of `to` as well.
    pub fn flow(&mut self, from: Region, to: Region) {
        let (a, b) = (self.find(from), self.find(to));
        if a == b {
            return;
        }
        if let Some(s) = self.loans.get(&a).cloned() {
            self.add_set(b, &s);
        }
    }

    /// Invariant flow: the two classes merge and share their loans.
    pub fn union(&mut self, a: Region, b: Region) {
        if let Some((keep, gone)) = self.uf.union(a, b) {
            if let Some(s) = self.loans.remove(&gone) {
                self.add_set(keep, &s);
            }
        }
    }

    /// Replace the dead set and clear the loans of every class whose
    /// members are all dead. Classes with a live member keep their loans,
    /// since a merge cannot be undone.
    pub fn kill(&mut self, dead: &FixedBitSet) {
        self.dead = dead.clone();
        let uf = &self.uf;
        self.loans
            .retain(|rep, _| uf.members(*rep).any(|m| !dead.contains(m.0 as usize)));
    }

    /// Drop `mask` from every loan set.
    pub fn remove_loans(&mut self, mask: &FixedBitSet) {
        for s in self.loans.values_mut() {
            s.difference_with(mask);
        }
        self.loans.retain(|_, s| s.count_ones(..) > 0);
    }

    /// Keys are representatives, sets are non-empty and in range, and
    /// all-dead classes hold nothing.
    pub fn is_well_formed(&self) -> bool {
        self.loans.iter().all(|(r, s)| {
            self.uf.is_rep(*r)
                && s.count_ones(..) > 0
                && s.len() == self.num_loans
                && self.uf.members(*r).any(|m| !self.dead.contains(m.0 as usize))
        })
    }
}

impl JoinSemiLattice for AbstractState {
    fn join(&self, other: &Self) -> Self {
        let mut uf = self.uf.clone();
        for i in 0..other.uf.len() {
            let r = Region(i as u32);
            uf.union(r, other.uf.find(r));
        }
        let mut out = AbstractState {
            loans: BTreeMap::new(),
            uf,
            dead: self.dead.clone(),
            num_loans: self.num_loans.max(other.num_loans),
        };
        out.dead.intersect_with(&other.dead);
        for side in [self, other] {
            for (rep, s) in &side.loans {
                // every member of a side's class lands in one joined class
                let target = out.uf.find(*rep);
                let mut s = s.clone();
                s.grow(out.num_loans);
                out.add_set(target, &s);
            }
        }
        out
    }
}

pub struct RegionSet<'a>(pub &'a FixedBitSet);

impl fmt::Display for RegionSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.ones().map(|r| format!("'r{}", r)).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// `{rep -> {loans}} | partition | dead set`
impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self
            .loans
            .iter()
            .map(|(r, s)| {
                let ls: Vec<String> = s.ones().map(|l| format!("L{}", l)).collect();
                format!("'r{} -> {{{}}}", r.0, ls.join(", "))
            })
            .collect();
        let classes: Vec<String> = self
            .uf
            .nontrivial_classes()
            .iter()
            .map(|c| {
                let ms: Vec<String> = c.iter().map(|r| format!("'r{}", r.0)).collect();
                format!("{{{}}}", ms.join(" "))
            })
            .collect();
        write!(
            f,
            "{{{}}} | [{}] | dead {}",
            entries.join(", "),
            classes.join(" "),
            RegionSet(&self.dead)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(i: u32) -> Region {
        Region(i)
    }

    #[test]
    fn representative_is_smallest_member() {
        let mut uf = RegionUf::new(5);
        uf.union(r(4), r(2));
        uf.union(r(3), r(4));
        assert_eq!(uf.find(r(3)), r(2));
        assert_eq!(uf.find(uf.find(r(4))), uf.find(r(4)));
        assert_eq!(uf.nontrivial_classes(), vec![vec![r(2), r(3), r(4)]]);
    }

    #[test]
    fn union_moves_loans_to_new_rep() {
        let mut s = AbstractState::bottom(4, 0, 3);
        s.kill(&FixedBitSet::with_capacity(4));
        s.add_loan(r(3), 1);
        s.add_loan(r(1), 0);
        s.union(r(3), r(1));
        assert!(s.loans_at(r(1)).unwrap().contains(1));
        assert!(s.contains(r(3), 0));
        assert!(s.is_well_formed());
    }

    #[test]
    fn kill_keeps_classes_with_a_live_member() {
        let mut s = AbstractState::bottom(3, 0, 1);
        s.kill(&FixedBitSet::with_capacity(3));
        s.add_loan(r(1), 0);
        s.union(r(1), r(2));
        let mut dead = FixedBitSet::with_capacity(3);
        dead.insert(1);
        s.kill(&dead);
        assert!(s.contains(r(2), 0));
        dead.insert(2);
        s.kill(&dead);
        assert!(!s.contains(r(2), 0));
    }

    #[test]
    fn bottom_is_neutral() {
        let b = AbstractState::bottom(3, 1, 2);
        let mut s = b.clone();
        let none = FixedBitSet::with_capacity(3);
        s.kill(&none);
        s.add_loan(r(2), 1);
        s.union(r(0), r(1));
        assert_eq!(b.join(&s), s);
        assert_eq!(s.join(&s), s);
    }

    #[test]
    fn display_format() {
        let mut s = AbstractState::bottom(3, 1, 2);
        s.add_loan(r(0), 1);
        s.union(r(0), r(2));
        assert_eq!(s.to_string(), "{'r0 -> {L1}} | [{'r0 'r2}] | dead {'r1, 'r2}");
    }
}
