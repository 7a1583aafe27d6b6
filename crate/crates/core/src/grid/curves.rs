use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use super::{inner_cells_of, outer_cells_of, ConstructibleSet, GridSpec, GridTorusSet};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::rational::{self, Rational};
use crate::sets::GroupSubset;
use crate::sumsets::{forward_box, iterated, sumset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveRow {
    pub resolution: usize,
    #[serde(with = "rational::serde_str")]
    pub outer_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub inner_a: Rational,
    /// `μ(D_A + D_B + {0,1}^d)` for outer cell sets.
    #[serde(with = "rational::serde_str")]
    pub outer_sum: Rational,
    /// The same with inner cell sets.
    #[serde(with = "rational::serde_str")]
    pub inner_sum: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceCurve {
    #[serde(with = "rational::serde_str")]
    pub mu_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_a_plus_b: Rational,
    pub rows: Vec<CurveRow>,
    /// Outer columns never increase between resolutions `N | N'`.
    pub outer_monotone: bool,
    /// Inner columns never decrease between resolutions `N | N'`.
    pub inner_monotone: bool,
    /// `inner <= exact <= outer` in every row, for `A` and for the sum.
    pub bounded: bool,
}

fn sum_measure(a: &GridTorusSet, b: &GridTorusSet) -> Result<Rational> {
    let corner = forward_box(a.spec.group(), a.spec.dim, 1);
    Ok(sumset(&sumset(&a.cells, &b.cells)?, &corner)?.measure())
}

pub fn convergence_curve(
    a: &ConstructibleSet,
    b: &ConstructibleSet,
    resolutions: &[usize],
    finite: &Arc<FiniteAbelianGroup>,
    cfg: &Config,
) -> Result<ConvergenceCurve> {
    if resolutions.is_empty() || resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "resolutions must be a non-empty strictly increasing list".into(),
        ));
    }
    let (ba, bb) = (a.to_boxes()?, b.to_boxes()?);
    if ba.dim != bb.dim {
        return Err(Error::DimensionMismatch {
            expected: ba.dim,
            got: bb.dim,
        });
    }
    let mu_a = ba.measure(finite, cfg)?;
    let mu_a_plus_b = ba.sum(&bb)?.measure(finite, cfg)?;
    let mut rows = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let spec = GridSpec::new(ba.dim, n, finite.clone(), cfg)?;
        let (oa, ob) = (outer_cells_of(&ba, &spec)?, outer_cells_of(&bb, &spec)?);
        let (ia, ib) = (inner_cells_of(&ba, &spec, cfg)?, inner_cells_of(&bb, &spec, cfg)?);
        rows.push(CurveRow {
            resolution: n,
            outer_a: oa.measure(),
            inner_a: ia.measure(),
            outer_sum: sum_measure(&oa, &ob)?,
            inner_sum: if ia.is_empty() || ib.is_empty() {
                Rational::from_integer(0.into())
            } else {
                sum_measure(&ia, &ib)?
            },
        });
    }
    let chained = |x: &CurveRow, y: &CurveRow| y.resolution % x.resolution == 0;
    let outer_monotone = rows
        .windows(2)
        .filter(|w| chained(&w[0], &w[1]))
        .all(|w| w[1].outer_a <= w[0].outer_a && w[1].outer_sum <= w[0].outer_sum);
    let inner_monotone = rows
        .windows(2)
        .filter(|w| chained(&w[0], &w[1]))
        .all(|w| w[1].inner_a >= w[0].inner_a && w[1].inner_sum >= w[0].inner_sum);
    let bounded = rows.iter().all(|r| {
        r.inner_a <= mu_a && mu_a <= r.outer_a && r.inner_sum <= mu_a_plus_b && mu_a_plus_b <= r.outer_sum
    });
    Ok(ConvergenceCurve {
        mu_a,
        mu_a_plus_b,
        rows,
        outer_monotone,
        inner_monotone,
        bounded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CantorRow {
    pub m: u32,
    pub n: u32,
    #[serde(with = "rational::serde_str")]
    pub measure: Rational,
    /// `m + n >= 2`, where the measure must be 1.
    pub claim_applies: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CantorDemoReport {
    pub depth: u32,
    pub resolution: usize,
    pub cells: usize,
    #[serde(with = "rational::serde_str")]
    pub mu_b: Rational,
    #[serde(with = "rational::serde_str")]
    pub expected_mu_b: Rational,
    pub rows: Vec<CantorRow>,
    /// `|A + B| / |A|` for `A = {0}`; equals `2^k`.
    #[serde(with = "rational::serde_str")]
    pub singleton_alpha: Rational,
    pub pass: bool,
}

/// Depth-`k` pre-Cantor set on the grid `N = 3^k` and the measures of `mB − nB`.
pub fn cantor_demo(depth: u32, pairs: &[(u32, u32)], cfg: &Config) -> Result<CantorDemoReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let n = 3usize
        .checked_pow(depth)
        .filter(|&n| n as u64 <= cfg.max_grid_cells)
        .ok_or(Error::ResolutionOverflow {
            cells: 3u128.saturating_pow(depth),
            cap: cfg.max_grid_cells,
        })?;
    let spec = GridSpec::torus(1, n, cfg)?;
    let b = inner_cells_of(&ConstructibleSet::cantor(depth).to_boxes()?, &spec, cfg)?;
    let expected_mu_b = rational::pow(&rational::ratio(2, 3), depth as i32);
    let rows = pairs
        .iter()
        .map(|&(m, k)| {
            let measure = iterated(m, &b.cells, k)?.measure();
            let claim_applies = m + k >= 2;
            Ok(CantorRow {
                m,
                n: k,
                ok: !claim_applies || measure.is_one(),
                measure,
                claim_applies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let singleton = GroupSubset::identity(spec.group().clone());
    let singleton_alpha = rational::int(sumset(&singleton, &b.cells)?.len());
    let mu_b = b.measure();
    let pass = mu_b == expected_mu_b
        && rows.iter().all(|r| r.ok)
        && singleton_alpha == rational::int(1u64 << depth);
    Ok(CantorDemoReport {
        depth,
        resolution: n,
        cells: b.len(),
        mu_b,
        expected_mu_b,
        rows,
        singleton_alpha,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn trivial() -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::trivial())
    }

    #[test]
    fn interval_curve() {
        let a = ConstructibleSet::interval(int(0), ratio(1, 4));
        let c = convergence_curve(&a, &a, &[8, 16, 32, 64], &trivial(), &Config::default()).unwrap();
        assert_eq!(c.mu_a, ratio(1, 4));
        assert_eq!(c.mu_a_plus_b, ratio(1, 2));
        assert!(c.outer_monotone && c.inner_monotone && c.bounded);
        let last = c.rows.last().unwrap();
        assert_eq!(last.outer_a, ratio(17, 64));
        assert_eq!(last.inner_a, ratio(1, 4));
        assert_eq!(last.inner_sum, ratio(1, 2));
        assert!(c.rows.windows(2).all(|w| w[1].outer_a < w[0].outer_a));
    }

    #[test]
    fn point_curve() {
        let p = ConstructibleSet::point(vec![int(0)]);
        let c = convergence_curve(&p, &p, &[4, 8, 16], &trivial(), &Config::default()).unwrap();
        for r in &c.rows {
            assert_eq!(r.outer_a, ratio(1, r.resolution as i64));
        }
    }

    #[test]
    fn cantor_curve() {
        let k = 3;
        let c3 = ConstructibleSet::cantor(k);
        let c = convergence_curve(&c3, &c3, &[27, 54, 108], &trivial(), &Config::default()).unwrap();
        assert_eq!(c.rows[0].inner_a, ratio(8, 27));
        assert_eq!(c.rows[0].inner_sum, int(1));
        assert_eq!(c.mu_a, ratio(8, 27));
        assert!(c.outer_monotone && c.bounded);
    }

    #[test]
    fn bad_resolutions() {
        let a = ConstructibleSet::interval(int(0), ratio(1, 4));
        let cfg = Config::default();
        assert!(convergence_curve(&a, &a, &[], &trivial(), &cfg).is_err());
        assert!(convergence_curve(&a, &a, &[8, 8], &trivial(), &cfg).is_err());
    }

    #[test]
    fn cantor_examples() {
        let cfg = Config::default();
        let r = cantor_demo(1, &[(1, 0), (2, 0), (1, 1)], &cfg).unwrap();
        assert_eq!(r.mu_b, ratio(2, 3));
        assert_eq!(r.rows[0].measure, ratio(2, 3));
        assert!(!r.rows[0].claim_applies);
        assert_eq!(r.rows[1].measure, int(1));
        assert!(r.pass);
        let r = cantor_demo(5, &[(2, 0)], &cfg).unwrap();
        assert_eq!(r.mu_b, ratio(32, 243));
        assert_eq!(r.rows[0].measure, int(1));
        assert_eq!(r.singleton_alpha, int(32));
        assert!(r.pass);
        assert!(cantor_demo(0, &[], &cfg).is_err());
    }
}
