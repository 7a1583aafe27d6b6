//! Subsets of a finite abelian group with exact normalized counting measure.
//!
//! Random subsets are drawn with xoshiro256** seeded through SplitMix64
//! (`seed_from_u64`). Elements are visited in index order; for density
//! `p/q` the element is kept iff `floor(r · q / 2^64) < p` where `r` is the
//! next 64-bit output. This makes instances reproducible from `(group,
//! density, seed)` alone.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::groups::{FiniteAbelianGroup, GroupElement};
use crate::rational::{self, Rational};

#[derive(Clone)]
pub struct GroupSubset {
    group: Arc<FiniteAbelianGroup>,
    bits: BitSet,
    card: usize,
}

impl PartialEq for GroupSubset {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.bits == other.bits
    }
}

impl Eq for GroupSubset {}

impl fmt::Debug for GroupSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupSubset")
            .field("group", &self.group.to_string())
            .field("members", &self.bits.ones().collect::<Vec<_>>())
            .finish()
    }
}

/// Seeded generator used for every random instance in the crate.
pub fn rng(seed: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// Exact Bernoulli threshold for a density `p/q`.
#[derive(Debug, Clone, Copy)]
pub struct Density {
    num: u64,
    den: u64,
}

impl Density {
    pub fn new(d: &Rational) -> Result<Self> {
        if d.is_negative() || *d > rational::int(1) {
            return Err(Error::DensityOutOfRange(rational::to_string(d)));
        }
        let num = d.numer().to_u64();
        let den = d.denom().to_u64();
        match (num, den) {
            (Some(num), Some(den)) => Ok(Density { num, den }),
            _ => Err(Error::DensityOutOfRange(rational::to_string(d))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    #[inline]
    pub fn sample(&self, rng: &mut impl RngCore) -> bool {
        let r = rng.next_u64();
        (((r as u128) * (self.den as u128)) >> 64) < self.num as u128
    }
}

impl GroupSubset {
    pub fn empty(group: Arc<FiniteAbelianGroup>) -> Self {
        let bits = BitSet::new(group.order());
        GroupSubset { group, bits, card: 0 }
    }

    pub fn full(group: Arc<FiniteAbelianGroup>) -> Self {
        let bits = BitSet::full(group.order());
        let card = group.order();
        GroupSubset { group, bits, card }
    }

    /// `{0}`, the value of the empty sum `0B − 0B`.
    pub fn identity(group: Arc<FiniteAbelianGroup>) -> Self {
        let mut s = Self::empty(group);
        s.bits.insert(0);
        s.card = 1;
        s
    }

    pub fn from_bits(group: Arc<FiniteAbelianGroup>, bits: BitSet) -> Self {
        assert_eq!(bits.len(), group.order(), "bitset length must equal group order");
        let card = bits.count_ones();
        GroupSubset { group, bits, card }
    }

    pub fn from_elements(group: Arc<FiniteAbelianGroup>, elements: &[GroupElement]) -> Result<Self> {
        let mut bits = BitSet::new(group.order());
        for e in elements {
            bits.insert(group.index_of(e)?);
        }
        Ok(Self::from_bits(group, bits))
    }

    pub fn from_indices(
        group: Arc<FiniteAbelianGroup>,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut bits = BitSet::new(group.order());
        for i in indices {
            if i >= group.order() {
                return Err(Error::CoordinateOutOfRange {
                    coord: i as u64,
                    modulus: group.order() as u64,
                });
            }
            bits.insert(i);
        }
        Ok(Self::from_bits(group, bits))
    }

    /// Each element independently with probability `density`, reproducible
    /// from `seed` (see module docs for the exact procedure).
    pub fn random(group: Arc<FiniteAbelianGroup>, density: &Rational, seed: u64) -> Result<Self> {
        let d = Density::new(density)?;
        let mut r = rng(seed);
        Ok(Self::random_with(group, d, &mut r))
    }

    pub fn random_with(group: Arc<FiniteAbelianGroup>, density: Density, rng: &mut impl RngCore) -> Self {
        let mut bits = BitSet::new(group.order());
        for i in 0..group.order() {
            if density.sample(rng) {
                bits.insert(i);
            }
        }
        Self::from_bits(group, bits)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn contains_index(&self, i: usize) -> bool {
        i < self.group.order() && self.bits.get(i)
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.group
            .index_of(e)
            .map(|i| self.bits.get(i))
            .unwrap_or(false)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.bits.ones().map(|i| self.group.element(i)).collect()
    }

    /// `|S| / |G|`, exact and reduced.
    pub fn measure(&self) -> Rational {
        rational::ratio(self.card, self.group.order())
    }

    pub fn same_group(&self, other: &GroupSubset) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            })
        }
    }

    pub fn union(&self, other: &GroupSubset) -> Result<GroupSubset> {
        self.same_group(other)?;
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Ok(Self::from_bits(self.group.clone(), bits))
    }

    pub fn intersection(&self, other: &GroupSubset) -> Result<GroupSubset> {
        self.same_group(other)?;
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Ok(Self::from_bits(self.group.clone(), bits))
    }

    pub fn difference(&self, other: &GroupSubset) -> Result<GroupSubset> {
        self.same_group(other)?;
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Ok(Self::from_bits(self.group.clone(), bits))
    }

    pub fn complement(&self) -> GroupSubset {
        Self::from_bits(self.group.clone(), self.bits.complement())
    }

    pub fn is_subset(&self, other: &GroupSubset) -> Result<bool> {
        self.same_group(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    /// `−S`, via the group's negation permutation.
    pub fn negate(&self) -> GroupSubset {
        let mut bits = BitSet::new(self.group.order());
        if self.group.is_cyclic() {
            for i in self.bits.ones() {
                bits.insert(self.group.neg_index(i));
            }
        } else {
            let table = self.group.negation_table();
            for i in self.bits.ones() {
                bits.insert(table[i] as usize);
            }
        }
        GroupSubset {
            group: self.group.clone(),
            bits,
            card: self.card,
        }
    }

    /// `S + g` for the element with index `g`.
    pub fn translate_index(&self, g: usize) -> GroupSubset {
        let mut bits = BitSet::new(self.group.order());
        if self.group.is_cyclic() {
            bits.or_rotated(&self.bits, g);
        } else {
            for i in self.bits.ones() {
                bits.insert(self.group.add_index(i, g));
            }
        }
        GroupSubset {
            group: self.group.clone(),
            bits,
            card: self.card,
        }
    }
}

/// JSON description of a subset:
/// `{"type":"literal","elements":[[0],[1],[4]]}` or
/// `{"type":"random","density":"1/2","seed":7}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetSpec {
    Literal {
        elements: Vec<Vec<u64>>,
    },
    Random {
        #[serde(with = "rational::serde_str")]
        density: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl SetSpec {
    /// Builds the subset; `default_seed` fills in a missing random seed.
    pub fn build(&self, group: Arc<FiniteAbelianGroup>, default_seed: u64) -> Result<GroupSubset> {
        match self {
            SetSpec::Literal { elements } => {
                let els: Vec<GroupElement> = elements.iter().cloned().map(GroupElement).collect();
                GroupSubset::from_elements(group, &els)
            }
            SetSpec::Random { density, seed } => {
                if density.is_zero() {
                    return Ok(GroupSubset::empty(group));
                }
                GroupSubset::random(group, density, seed.unwrap_or(default_seed))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn cyc(n: u64) -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::cyclic(n).unwrap())
    }

    #[test]
    fn from_elements_examples() {
        let s = GroupSubset::from_indices(cyc(5), [0, 1]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.measure(), ratio(2, 5));
        let e = GroupSubset::from_elements(cyc(4), &[]).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.measure(), int(0));
        let g = Arc::new(FiniteAbelianGroup::new(&[3, 3]).unwrap());
        let all: Vec<GroupElement> = (0..9).map(|i| g.element(i)).collect();
        assert_eq!(GroupSubset::from_elements(g, &all).unwrap().measure(), int(1));
    }

    #[test]
    fn from_elements_rejects_invalid() {
        let err = GroupSubset::from_elements(cyc(5), &[GroupElement(vec![5])]).unwrap_err();
        assert!(matches!(err, Error::CoordinateOutOfRange { .. }));
        let err = GroupSubset::from_elements(cyc(5), &[GroupElement(vec![1, 1])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn measure_examples() {
        assert_eq!(GroupSubset::from_indices(cyc(4), [0, 2]).unwrap().measure(), ratio(1, 2));
        assert_eq!(GroupSubset::empty(cyc(7)).measure(), int(0));
        let g = Arc::new(FiniteAbelianGroup::new(&[3, 81]).unwrap());
        let s = GroupSubset::from_indices(g, 0..32).unwrap();
        assert_eq!(s.measure(), ratio(32, 243));
    }

    #[test]
    fn random_extremes_and_determinism() {
        let g = cyc(100);
        assert!(GroupSubset::random(g.clone(), &int(0), 3).unwrap().is_empty());
        assert_eq!(GroupSubset::random(g.clone(), &int(1), 3).unwrap().len(), 100);
        let a = GroupSubset::random(g.clone(), &ratio(1, 2), 7).unwrap();
        let b = GroupSubset::random(g.clone(), &ratio(1, 2), 7).unwrap();
        assert_eq!(a, b);
        assert!(a.len() > 20 && a.len() < 80);
        let c = GroupSubset::random(g.clone(), &ratio(1, 2), 8).unwrap();
        assert_ne!(a, c);
        assert!(matches!(
            GroupSubset::random(g.clone(), &ratio(3, 2), 1),
            Err(Error::DensityOutOfRange(_))
        ));
        assert!(matches!(
            GroupSubset::random(g, &ratio(-1, 2), 1),
            Err(Error::DensityOutOfRange(_))
        ));
    }

    #[test]
    fn set_spec_json() {
        let spec: SetSpec =
            serde_json::from_str(r#"{"type":"literal","elements":[[0],[1],[4]]}"#).unwrap();
        let s = spec.build(cyc(5), 0).unwrap();
        assert_eq!(s.indices().collect::<Vec<_>>(), vec![0, 1, 4]);
        let spec: SetSpec =
            serde_json::from_str(r#"{"type":"random","density":"1/2","seed":7}"#).unwrap();
        assert_eq!(
            spec.build(cyc(100), 0).unwrap(),
            GroupSubset::random(cyc(100), &ratio(1, 2), 7).unwrap()
        );
    }

    #[test]
    fn negate_and_translate() {
        let g = Arc::new(FiniteAbelianGroup::new(&[4, 2]).unwrap());
        let s = GroupSubset::from_elements(g.clone(), &[GroupElement(vec![1, 1])]).unwrap();
        assert_eq!(s.negate().elements(), vec![GroupElement(vec![3, 1])]);
        let t = s.translate_index(g.index_of(&GroupElement(vec![3, 1])).unwrap());
        assert_eq!(t.elements(), vec![g.identity()]);
        let c = GroupSubset::from_indices(cyc(5), [4]).unwrap();
        assert_eq!(c.translate_index(2).indices().collect::<Vec<_>>(), vec![1]);
    }

    proptest! {
        #[test]
        fn inclusion_exclusion(seed_a in any::<u64>(), seed_b in any::<u64>(), n in 1u64..200) {
            let g = cyc(n);
            let s = GroupSubset::random(g.clone(), &ratio(1, 3), seed_a).unwrap();
            let t = GroupSubset::random(g, &ratio(2, 3), seed_b).unwrap();
            prop_assert_eq!(
                s.union(&t).unwrap().measure() + s.intersection(&t).unwrap().measure(),
                s.measure() + t.measure()
            );
            prop_assert_eq!(s.complement().complement(), s.clone());
            prop_assert_eq!(s.len(), s.bits().count_ones());
        }
    }
}
