//! Finite abelian groups `Z_{N1} × … × Z_{Nk}` with dense mixed-radix indexing.
//!
//! The first factor is the most significant digit of an element's index, so
//! `(1, 0, 0)` in `Z4×Z2×Z5` has index `1·(2·5) = 10`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FiniteAbelianGroup {
    factors: Vec<usize>,
    // strides[i] = product of factors[i+1..]
    strides: Vec<usize>,
    order: usize,
    negation: OnceLock<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for GroupElement {
    fn from(v: Vec<u64>) -> Self {
        GroupElement(v)
    }
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for FiniteAbelianGroup {}

impl FiniteAbelianGroup {
    pub fn new(factors: &[u64]) -> Result<Self> {
        Self::with_config(factors, &Config::default())
    }

    pub fn with_config(factors: &[u64], cfg: &Config) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyFactorList);
        }
        if let Some(index) = factors.iter().position(|&f| f == 0) {
            return Err(Error::ZeroFactor { index });
        }
        let mut order: u64 = 1;
        for &f in factors {
            order = order
                .checked_mul(f)
                .filter(|&o| o <= cfg.max_order)
                .ok_or(Error::OrderOverflow { cap: cfg.max_order })?;
        }
        let factors: Vec<usize> = factors.iter().map(|&f| f as usize).collect();
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1];
        }
        Ok(FiniteAbelianGroup {
            factors,
            strides,
            order: order as usize,
            negation: OnceLock::new(),
        })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn trivial() -> Self {
        Self::new(&[1]).expect("Z1 is valid")
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.factors.len()])
    }

    pub fn check(&self, a: &GroupElement) -> Result<()> {
        if a.0.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                got: a.0.len(),
            });
        }
        for (&c, &n) in a.0.iter().zip(&self.factors) {
            if c >= n as u64 {
                return Err(Error::CoordinateOutOfRange {
                    coord: c,
                    modulus: n as u64,
                });
            }
        }
        Ok(())
    }

    pub fn index_of(&self, a: &GroupElement) -> Result<usize> {
        self.check(a)?;
        Ok(a.0
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum())
    }

    pub fn element(&self, index: usize) -> GroupElement {
        debug_assert!(index < self.order);
        GroupElement(
            self.factors
                .iter()
                .zip(&self.strides)
                .map(|(&n, &s)| ((index / s) % n) as u64)
                .collect(),
        )
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.factors)
                .map(|((&x, &y), &n)| (x + y) % n as u64)
                .collect(),
        ))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| (n as u64 - x) % n as u64)
                .collect(),
        ))
    }

    /// `m·a`; negative `m` gives multiples of `-a`.
    pub fn scalar_mul(&self, m: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| {
                    let n = n as i128;
                    ((m as i128 * x as i128).rem_euclid(n)) as u64
                })
                .collect(),
        ))
    }

    /// Group law on indices.
    #[inline]
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        if self.factors.len() == 1 {
            let s = a + b;
            return if s >= self.order { s - self.order } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut weight = 1;
        for &n in self.factors.iter().rev() {
            let mut s = a % n + b % n;
            if s >= n {
                s -= n;
            }
            out += s * weight;
            weight *= n;
            a /= n;
            b /= n;
        }
        out
    }

    #[inline]
    pub fn neg_index(&self, a: usize) -> usize {
        if self.factors.len() == 1 {
            return if a == 0 { 0 } else { self.order - a };
        }
        let mut a = a;
        let mut out = 0;
        let mut weight = 1;
        for &n in self.factors.iter().rev() {
            let d = a % n;
            out += ((n - d) % n) * weight;
            weight *= n;
            a /= n;
        }
        out
    }

    /// Negation as an index permutation, built on first use.
    pub fn negation_table(&self) -> &[u32] {
        self.negation
            .get_or_init(|| (0..self.order).map(|i| self.neg_index(i) as u32).collect())
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z{n}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Parses `"Z8"`, `"Z3xZ3"`, `"z4XZ2xz5"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::GroupLiteral {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let lower = s.trim().to_ascii_lowercase();
        if lower.is_empty() {
            return Err(Error::EmptyFactorList);
        }
        let mut factors = Vec::new();
        for part in lower.split('x') {
            let digits = part
                .strip_prefix('z')
                .ok_or_else(|| bad("each factor must look like Z<n>"))?;
            let n: u64 = digits
                .parse()
                .map_err(|_| bad("factor modulus is not a non-negative integer"))?;
            factors.push(n);
        }
        FiniteAbelianGroup::new(&factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(v: &[u64]) -> GroupElement {
        GroupElement(v.to_vec())
    }

    #[test]
    fn make_group_examples() {
        assert_eq!(FiniteAbelianGroup::new(&[8]).unwrap().order(), 8);
        assert_eq!(FiniteAbelianGroup::new(&[3, 3]).unwrap().order(), 9);
        let g = FiniteAbelianGroup::new(&[4, 2, 5]).unwrap();
        assert_eq!(g.order(), 40);
        assert_eq!(g.index_of(&el(&[1, 0, 0])).unwrap(), 10);
    }

    #[test]
    fn make_group_errors_are_distinct() {
        assert_eq!(FiniteAbelianGroup::new(&[]), Err(Error::EmptyFactorList));
        assert_eq!(
            FiniteAbelianGroup::new(&[3, 0]),
            Err(Error::ZeroFactor { index: 1 })
        );
        assert!(matches!(
            FiniteAbelianGroup::new(&[1 << 20, 1 << 20]),
            Err(Error::OrderOverflow { .. })
        ));
        assert!(matches!(
            FiniteAbelianGroup::new(&[u64::MAX, 3]),
            Err(Error::OrderOverflow { .. })
        ));
    }

    #[test]
    fn arithmetic_examples() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        assert_eq!(z5.add(&el(&[3]), &el(&[4])).unwrap(), el(&[2]));
        let g = FiniteAbelianGroup::new(&[4, 2]).unwrap();
        assert_eq!(g.add(&el(&[3, 1]), &el(&[1, 1])).unwrap(), el(&[0, 0]));
        assert_eq!(g.add(&el(&[3, 1]), &g.identity()).unwrap(), el(&[3, 1]));
        let z7 = FiniteAbelianGroup::cyclic(7).unwrap();
        assert_eq!(z7.neg(&el(&[3])).unwrap(), el(&[4]));
        let z6 = FiniteAbelianGroup::cyclic(6).unwrap();
        assert_eq!(z6.scalar_mul(4, &el(&[5])).unwrap(), el(&[2]));
        assert_eq!(z6.scalar_mul(1, &el(&[5])).unwrap(), el(&[5]));
        assert_eq!(z6.scalar_mul(0, &el(&[5])).unwrap(), z6.identity());
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        let g = FiniteAbelianGroup::new(&[4, 2]).unwrap();
        assert_eq!(
            g.add(&el(&[1]), &el(&[1, 1])),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(matches!(
            g.add(&el(&[4, 0]), &el(&[1, 1])),
            Err(Error::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn literals() {
        let g: FiniteAbelianGroup = "z4XZ2xz5".parse().unwrap();
        assert_eq!(g.factors(), &[4, 2, 5]);
        assert_eq!(g.to_string(), "Z4xZ2xZ5");
        assert!("Q8".parse::<FiniteAbelianGroup>().is_err());
        assert!("Z8x".parse::<FiniteAbelianGroup>().is_err());
        assert_eq!("".parse::<FiniteAbelianGroup>(), Err(Error::EmptyFactorList));
        assert_eq!(
            "Z0".parse::<FiniteAbelianGroup>(),
            Err(Error::ZeroFactor { index: 0 })
        );
    }

    fn arb_group() -> impl Strategy<Value = FiniteAbelianGroup> {
        proptest::collection::vec(1u64..7, 1..4)
            .prop_map(|f| FiniteAbelianGroup::new(&f).unwrap())
    }

    proptest! {
        #[test]
        fn index_bijection(g in arb_group()) {
            for i in 0..g.order() {
                prop_assert_eq!(g.index_of(&g.element(i)).unwrap(), i);
            }
        }

        #[test]
        fn group_axioms(g in arb_group(), x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
            let n = g.order() as u64;
            let (a, b, c) = (g.element((x % n) as usize), g.element((y % n) as usize), g.element((z % n) as usize));
            let ab = g.add(&a, &b).unwrap();
            prop_assert_eq!(g.add(&ab, &c).unwrap(), g.add(&a, &g.add(&b, &c).unwrap()).unwrap());
            prop_assert_eq!(&ab, &g.add(&b, &a).unwrap());
            prop_assert_eq!(g.add(&a, &g.neg(&a).unwrap()).unwrap(), g.identity());
            // index arithmetic agrees with coordinate arithmetic
            let (ia, ib) = (g.index_of(&a).unwrap(), g.index_of(&b).unwrap());
            prop_assert_eq!(g.add_index(ia, ib), g.index_of(&ab).unwrap());
            prop_assert_eq!(g.neg_index(ia), g.index_of(&g.neg(&a).unwrap()).unwrap());
            prop_assert_eq!(g.negation_table()[ia] as usize, g.neg_index(ia));
        }
    }
}
