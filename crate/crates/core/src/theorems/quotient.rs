use std::sync::Arc;

use serde::Serialize;

use super::report::{describe, InequalityId, VerificationReport};
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::groups::{FiniteAbelianGroup, GroupElement};
use crate::rational::{self, Rational};
use crate::sets::{self, Density, GroupSubset};
use crate::sumsets::sumset;

/// Coordinatewise reduction `Z_{N_1} × … × Z_{N_k} → Z_{M_1} × … × Z_{M_k}`
/// with `M_i | N_i`.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    domain: Arc<FiniteAbelianGroup>,
    codomain: Arc<FiniteAbelianGroup>,
    table: Vec<usize>,
}

pub fn quotient_map(g: &Arc<FiniteAbelianGroup>, moduli: &[u64]) -> Result<QuotientMap> {
    if moduli.len() != g.rank() {
        return Err(Error::InvalidQuotient(format!(
            "{} has {} factors but {} moduli were given",
            g,
            g.rank(),
            moduli.len()
        )));
    }
    for (&n, &m) in g.factors().iter().zip(moduli) {
        if m == 0 || n as u64 % m != 0 {
            return Err(Error::InvalidQuotient(format!("{m} does not divide {n}")));
        }
    }
    let codomain = Arc::new(FiniteAbelianGroup::new(moduli)?);
    let table = (0..g.order())
        .map(|i| {
            let e = g.element(i);
            let r: Vec<u64> = e.0.iter().zip(moduli).map(|(c, m)| c % m).collect();
            codomain.index_of(&GroupElement(r)).expect("reduced coordinates")
        })
        .collect();
    Ok(QuotientMap {
        domain: g.clone(),
        codomain,
        table,
    })
}

impl QuotientMap {
    /// The reduction onto `target`, which must have one factor per factor of `g`.
    pub fn onto(g: &Arc<FiniteAbelianGroup>, target: &FiniteAbelianGroup) -> Result<Self> {
        let moduli: Vec<u64> = target.factors().iter().map(|&f| f as u64).collect();
        quotient_map(g, &moduli)
    }

    pub fn domain(&self) -> &Arc<FiniteAbelianGroup> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteAbelianGroup> {
        &self.codomain
    }

    pub fn kernel_order(&self) -> usize {
        self.domain.order() / self.codomain.order()
    }

    pub fn apply_index(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply(&self, e: &GroupElement) -> Result<GroupElement> {
        let i = self.domain.index_of(e)?;
        Ok(self.codomain.element(self.table[i]))
    }

    pub fn image(&self, s: &GroupSubset) -> Result<GroupSubset> {
        self.check_domain(s)?;
        let mut bits = BitSet::new(self.codomain.order());
        for i in s.indices() {
            bits.insert(self.table[i]);
        }
        Ok(GroupSubset::from_bits(self.codomain.clone(), bits))
    }

    pub fn preimage(&self, s: &GroupSubset) -> Result<GroupSubset> {
        if **s.group_arc() != *self.codomain {
            return Err(Error::GroupMismatch {
                left: s.group().to_string(),
                right: self.codomain.to_string(),
            });
        }
        let mut bits = BitSet::new(self.domain.order());
        for (i, &j) in self.table.iter().enumerate() {
            if s.contains_index(j) {
                bits.insert(i);
            }
        }
        Ok(GroupSubset::from_bits(self.domain.clone(), bits))
    }

    fn check_domain(&self, s: &GroupSubset) -> Result<()> {
        if **s.group_arc() != *self.domain {
            return Err(Error::GroupMismatch {
                left: s.group().to_string(),
                right: self.domain.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureCheck {
    pub label: String,
    #[serde(with = "rational::serde_str")]
    pub preimage_measure: Rational,
    #[serde(with = "rational::serde_str")]
    pub codomain_measure: Rational,
    pub equal: bool,
}

impl MeasureCheck {
    fn new(q: &QuotientMap, label: &str, s: &GroupSubset) -> Result<Self> {
        let preimage_measure = q.preimage(s)?.measure();
        let codomain_measure = s.measure();
        Ok(MeasureCheck {
            label: label.to_string(),
            equal: preimage_measure == codomain_measure,
            preimage_measure,
            codomain_measure,
        })
    }
}

/// The three parts of the quotient lemma for one pair `(A, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientCheck {
    pub inclusion_a: bool,
    pub inclusion_b: bool,
    pub sum_commutes: bool,
    pub measures: Vec<MeasureCheck>,
}

impl QuotientCheck {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.inclusion_a {
            out.push("inclusion_a".to_string());
        }
        if !self.inclusion_b {
            out.push("inclusion_b".to_string());
        }
        if !self.sum_commutes {
            out.push("sum_commutes".to_string());
        }
        out.extend(
            self.measures
                .iter()
                .filter(|m| !m.equal)
                .map(|m| format!("measure {}", m.label)),
        );
        out
    }

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }
}

pub fn quotient_subchecks(a: &GroupSubset, b: &GroupSubset, q: &QuotientMap) -> Result<QuotientCheck> {
    let qa = q.image(a)?;
    let qb = q.image(b)?;
    let qsum = sumset(&qa, &qb)?;
    Ok(QuotientCheck {
        inclusion_a: a.is_subset(&q.preimage(&qa)?)?,
        inclusion_b: b.is_subset(&q.preimage(&qb)?)?,
        sum_commutes: q.image(&sumset(a, b)?)? == qsum,
        measures: vec![
            MeasureCheck::new(q, "q(A)", &qa)?,
            MeasureCheck::new(q, "q(B)", &qb)?,
            MeasureCheck::new(q, "q(A)+q(B)", &qsum)?,
        ],
    })
}

/// Report form of [`quotient_subchecks`]: `lhs` counts failed parts, `rhs = 0`.
pub fn check_quotient_lemma(a: &GroupSubset, b: &GroupSubset, q: &QuotientMap) -> Result<VerificationReport> {
    let c = quotient_subchecks(a, b, q)?;
    let failed = c.failures();
    Ok(VerificationReport::new(
        InequalityId::QuotientLemma,
        q.domain().to_string(),
        None,
        None,
        rational::int(failed.len()),
        rational::int(0),
    )
    .input("A", describe(a))
    .input("B", describe(b))
    .input("codomain", q.codomain().to_string())
    .input("failed", failed.join(",")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientDemoReport {
    pub domain: String,
    pub codomain: String,
    pub kernel_order: usize,
    pub subsets_checked: usize,
    pub measure_failures: usize,
    pub trials: usize,
    pub lemma_failures: usize,
    pub pass: bool,
}

/// Measure preservation over every subset of the codomain, then the full
/// lemma on `trials` seeded random pairs.
pub fn quotient_demo(q: &QuotientMap, trials: usize, density: &Rational, seed: u64) -> Result<QuotientDemoReport> {
    let order = q.codomain().order();
    if order > 20 {
        return Err(Error::InvalidArgument(format!(
            "codomain of order {order} is too large to enumerate"
        )));
    }
    let density = Density::new(density)?;
    let mut measure_failures = 0;
    let total = 1usize << order;
    for mask in 0..total {
        let s = GroupSubset::from_indices(q.codomain().clone(), (0..order).filter(|i| mask >> i & 1 == 1))?;
        if !MeasureCheck::new(q, "S", &s)?.equal {
            measure_failures += 1;
        }
    }
    let mut rng = sets::rng(seed);
    let mut lemma_failures = 0;
    for _ in 0..trials {
        let a = GroupSubset::random_with(q.domain().clone(), density, &mut rng);
        let b = GroupSubset::random_with(q.domain().clone(), density, &mut rng);
        if !quotient_subchecks(&a, &b, q)?.pass() {
            lemma_failures += 1;
        }
    }
    Ok(QuotientDemoReport {
        domain: q.domain().to_string(),
        codomain: q.codomain().to_string(),
        kernel_order: q.kernel_order(),
        subsets_checked: total,
        measure_failures,
        trials,
        lemma_failures,
        pass: measure_failures == 0 && lemma_failures == 0,
    })
}
