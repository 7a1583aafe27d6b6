//! Scans for near-tight instances of the inequalities in small groups.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::rational::{self, Rational};
use crate::sets::{self, Density, GroupSubset};
use crate::theorems::{
    check_cauchy_davenport, check_nb_bound, check_plunnecke, check_plunnecke_normalized, is_prime,
    InequalityId, Status, VerificationReport,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub a: GroupSubset,
    pub b: GroupSubset,
    pub report: VerificationReport,
}

impl SearchHit {
    pub fn slack(&self) -> &Rational {
        &self.report.slack
    }

    fn cmp_rank(&self, other: &SearchHit) -> Ordering {
        self.report
            .ranking_slack()
            .cmp(other.report.ranking_slack())
            .then_with(|| self.a.bits().cmp_numeric(other.a.bits()))
            .then_with(|| self.b.bits().cmp_numeric(other.b.bits()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Best `top_k` instances, ascending by normalized slack, then `(A, B)`
    /// as bitmasks.
    pub hits: Vec<SearchHit>,
    pub evaluated: u64,
    /// Instances where the inequality's precondition did not hold.
    pub skipped: u64,
    pub violations: u64,
}

/// Keeps the `k` smallest hits.
#[derive(Debug, Clone, Default)]
struct TopK {
    k: usize,
    hits: Vec<SearchHit>,
    evaluated: u64,
    skipped: u64,
    violations: u64,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            ..Default::default()
        }
    }

    fn push(&mut self, hit: SearchHit) {
        if self.k == 0 {
            return;
        }
        if self.hits.len() == self.k && hit.cmp_rank(self.hits.last().unwrap()) != Ordering::Less {
            return;
        }
        let pos = self
            .hits
            .binary_search_by(|h| h.cmp_rank(&hit))
            .unwrap_or_else(|p| p);
        self.hits.insert(pos, hit);
        self.hits.truncate(self.k);
    }

    fn record(&mut self, a: GroupSubset, b: GroupSubset, report: Option<VerificationReport>) {
        self.evaluated += 1;
        match report {
            None => self.skipped += 1,
            Some(report) => {
                if report.is_violation() {
                    self.violations += 1;
                }
                self.push(SearchHit { a, b, report });
            }
        }
    }

    fn merge(mut self, other: TopK) -> TopK {
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.violations += other.violations;
        for h in other.hits {
            self.push(h);
        }
        self
    }

    fn finish(self) -> SearchOutcome {
        SearchOutcome {
            hits: self.hits,
            evaluated: self.evaluated,
            skipped: self.skipped,
            violations: self.violations,
        }
    }
}

fn validate(g: &FiniteAbelianGroup, ineq: InequalityId) -> Result<()> {
    match ineq {
        InequalityId::Plunnecke | InequalityId::PlunneckeNormalized => Ok(()),
        InequalityId::CauchyDavenport | InequalityId::NbBound => {
            if !g.is_cyclic() {
                Err(Error::InvalidArgument(format!("{ineq} needs a cyclic group Z_p, got {g}")))
            } else if !is_prime(g.order() as u64) {
                Err(Error::NotPrime(g.order() as u64))
            } else {
                Ok(())
            }
        }
        InequalityId::RuzsaTriangle | InequalityId::QuotientLemma => {
            Err(Error::Unsupported(format!("searching over {ineq}")))
        }
    }
}

/// Report for one pair, or `None` when the precondition fails.
fn evaluate(ineq: InequalityId, a: &GroupSubset, b: &GroupSubset, m: u32, n: u32) -> Result<Option<VerificationReport>> {
    let p = a.group().order() as u64;
    let r = match ineq {
        InequalityId::Plunnecke => check_plunnecke(a, b, m, n)?,
        InequalityId::PlunneckeNormalized => check_plunnecke_normalized(a, b, m, n)?,
        InequalityId::CauchyDavenport => check_cauchy_davenport(a, b, p)?,
        InequalityId::NbBound => check_nb_bound(a, b, p, m)?,
        _ => return Err(Error::Unsupported(format!("searching over {ineq}"))),
    };
    Ok((r.status != Status::PreconditionNotMet).then_some(r))
}

fn from_mask(g: &Arc<FiniteAbelianGroup>, mask: u64) -> GroupSubset {
    GroupSubset::from_bits(g.clone(), BitSet::from_words(g.order(), vec![mask]))
}

/// Every pair of nonempty subsets. Needs `(2^|G| − 1)^2` within the budget.
pub fn exhaustive_search(
    g: &Arc<FiniteAbelianGroup>,
    ineq: InequalityId,
    m: u32,
    n: u32,
    top_k: usize,
    cfg: &Config,
) -> Result<SearchOutcome> {
    validate(g, ineq)?;
    let order = g.order();
    let subsets = if order < 64 { (1u128 << order) - 1 } else { u128::MAX };
    let pairs = subsets.saturating_mul(subsets);
    if pairs > cfg.search_budget {
        return Err(Error::BudgetExceeded {
            pairs,
            budget: cfg.search_budget,
        });
    }
    let count = subsets as u64;
    let top = (1..=count)
        .into_par_iter()
        .map(|am| -> Result<TopK> {
            let a = from_mask(g, am);
            let mut top = TopK::new(top_k);
            for bm in 1..=count {
                let b = from_mask(g, bm);
                let r = evaluate(ineq, &a, &b, m, n)?;
                top.record(a.clone(), b, r);
            }
            Ok(top)
        })
        .try_reduce(|| TopK::new(top_k), |x, y| Ok(x.merge(y)))?;
    Ok(top.finish())
}

/// `trials` seeded random pairs; pairs with an empty side are skipped.
#[allow(clippy::too_many_arguments)]
pub fn random_search(
    g: &Arc<FiniteAbelianGroup>,
    ineq: InequalityId,
    m: u32,
    n: u32,
    trials: usize,
    density: &Rational,
    seed: u64,
    top_k: usize,
) -> Result<SearchOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    validate(g, ineq)?;
    let density = Density::new(density)?;
    let mut rng = sets::rng(seed);
    let pairs: Vec<(GroupSubset, GroupSubset)> = (0..trials)
        .map(|_| {
            let a = GroupSubset::random_with(g.clone(), density, &mut rng);
            let b = GroupSubset::random_with(g.clone(), density, &mut rng);
            (a, b)
        })
        .collect();
    let top = pairs
        .into_par_iter()
        .map(|(a, b)| -> Result<TopK> {
            let mut top = TopK::new(top_k);
            if a.is_empty() || b.is_empty() {
                top.evaluated += 1;
                top.skipped += 1;
            } else {
                let r = evaluate(ineq, &a, &b, m, n)?;
                top.record(a, b, r);
            }
            Ok(top)
        })
        .try_reduce(|| TopK::new(top_k), |x, y| Ok(x.merge(y)))?;
    Ok(top.finish())
}

pub const CSV_HEADER: &str = "group,a,b,m,n,lhs,rhs,slack,normalized_slack";

pub fn hits_to_csv(hits: &[SearchHit]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for h in hits {
        let r = &h.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.group,
            h.a.bits().to_hex(),
            h.b.bits().to_hex(),
            r.m.map_or(String::new(), |v| v.to_string()),
            r.n.map_or(String::new(), |v| v.to_string()),
            rational::to_string(&r.lhs),
            rational::to_string(&r.rhs),
            rational::to_string(&r.slack),
            r.normalized_slack.as_ref().map_or(String::new(), rational::to_string),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn z(n: u64) -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::cyclic(n).unwrap())
    }

    #[test]
    fn cauchy_davenport_extremal_are_progressions() {
        let out = exhaustive_search(&z(5), InequalityId::CauchyDavenport, 0, 0, 10, &Config::default()).unwrap();
        assert_eq!(out.violations, 0);
        assert_eq!(out.evaluated, 31 * 31);
        assert_eq!(out.hits[0].report.slack, int(0));
        // {0} + {0}: the first tight pair in mask order
        assert_eq!(out.hits[0].a.bits().to_hex(), "1");
        // {0,1} + {0,1} is tight
        let g = z(5);
        let ap = GroupSubset::from_indices(g.clone(), [0, 1]).unwrap();
        let r = evaluate(InequalityId::CauchyDavenport, &ap, &ap, 0, 0).unwrap().unwrap();
        assert_eq!(r.slack, int(0));
    }

    #[test]
    fn identity_b_is_tight() {
        let g = z(6);
        let out = exhaustive_search(&g, InequalityId::Plunnecke, 1, 0, 3, &Config::default()).unwrap();
        assert_eq!(out.violations, 0);
        assert_eq!(*out.hits[0].report.ranking_slack(), int(0));
    }

    #[test]
    fn budget_and_unsupported() {
        let cfg = Config::default();
        assert!(matches!(
            exhaustive_search(&z(16), InequalityId::Plunnecke, 1, 1, 5, &cfg),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            exhaustive_search(&z(5), InequalityId::RuzsaTriangle, 1, 1, 5, &cfg),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            exhaustive_search(&z(8), InequalityId::CauchyDavenport, 0, 0, 5, &cfg),
            Err(Error::NotPrime(8))
        ));
        assert!(random_search(&z(8), InequalityId::Plunnecke, 1, 1, 0, &ratio(1, 2), 1, 5).is_err());
    }

    #[test]
    fn random_is_deterministic_and_dominated() {
        let g = z(8);
        let run = || random_search(&g, InequalityId::Plunnecke, 1, 1, 300, &ratio(1, 2), 9, 5).unwrap();
        let (x, y) = (run(), run());
        assert_eq!(x, y);
        assert_eq!(hits_to_csv(&x.hits), hits_to_csv(&y.hits));
        let ex = exhaustive_search(&g, InequalityId::Plunnecke, 1, 1, 1, &Config::default()).unwrap();
        assert!(x.hits[0].report.ranking_slack() >= ex.hits[0].report.ranking_slack());
        assert_eq!(x.violations, 0);
    }

    #[test]
    fn csv_shape() {
        let g = z(8);
        let out = exhaustive_search(&g, InequalityId::Plunnecke, 1, 1, 2, &Config::default()).unwrap();
        let csv = hits_to_csv(&out.hits);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 9);
    }
}
