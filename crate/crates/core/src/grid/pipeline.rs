use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{inner_cells_of, outer_cells_of, BoxUnion, ConstructibleSet, GridSpec};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::rational::{self, Rational};
use crate::sumsets::{forward_box, sumset};
use crate::theorems::{petridis_select_with, PetridisCertificate, PetridisMode, PetridisOptions};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub epsilon: Rational,
    pub m_max: u32,
    /// The schedule tries `n_0 · 2^i` for `i = 0..=max_doublings`.
    pub max_doublings: u32,
    pub finite: Arc<FiniteAbelianGroup>,
    /// Exhaustive selection is used when `|D_A|` is at most this.
    pub exhaustive_cap: usize,
    pub local_restarts: Option<usize>,
    pub config: Config,
}

impl PipelineOptions {
    pub fn new(epsilon: Rational, m_max: u32) -> Self {
        PipelineOptions {
            epsilon,
            m_max,
            max_doublings: 16,
            finite: Arc::new(FiniteAbelianGroup::trivial()),
            exhaustive_cap: 12,
            local_restarts: Some(2),
            config: Config::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleStep {
    pub n: u64,
    #[serde(with = "rational::serde_str")]
    pub mu_a_n: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_an_plus_bn: Rational,
    pub accepted: bool,
}

/// `A_{2n} ⊆ D + Q ⊆ A_n` for one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionChain {
    pub set: String,
    pub cells: usize,
    pub lower: bool,
    pub upper: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MBound {
    pub m: u32,
    /// `|X + m D_B'|`
    pub discrete_size: usize,
    #[serde(with = "rational::serde_str")]
    pub discrete_bound: Rational,
    /// `μ(A'_n + mB)` with `A'_n = X + Q`.
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    /// `(1+ε)^m α^m μ(A'_n)`
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    pub m_max: u32,
    #[serde(with = "rational::serde_str")]
    pub mu_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_b: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_a_plus_b: Rational,
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    pub schedule: Vec<ScheduleStep>,
    pub n: u64,
    pub resolution: usize,
    pub chains: Vec<InclusionChain>,
    /// `|D_A + D_B + {0,1}^d|`
    pub discrete_lhs: usize,
    /// `(1+ε) α |D_A|`
    #[serde(with = "rational::serde_str")]
    pub discrete_rhs: Rational,
    pub discrete_pass: bool,
    pub selection: &'static str,
    pub certificate: PetridisCertificate,
    /// `ratio <= (1+ε) α`
    pub ratio_within: bool,
    #[serde(with = "rational::serde_str")]
    pub mu_a_prime: Rational,
    pub bounds: Vec<MBound>,
    pub pass: bool,
}

/// Runs the discretization argument for closed sets `A`, `B` of `T^d × Z`
/// end to end and checks every intermediate claim.
pub fn petridis_pipeline(
    a: &ConstructibleSet,
    b: &ConstructibleSet,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let cfg = &opts.config;
    let eps = &opts.epsilon;
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let (ba, bb) = (a.to_boxes()?, b.to_boxes()?);
    if ba.dim != bb.dim {
        return Err(Error::DimensionMismatch {
            expected: ba.dim,
            got: bb.dim,
        });
    }
    let d = ba.dim;
    let finite = &opts.finite;
    let sum = ba.sum(&bb)?;
    let mu_a = ba.measure(finite, cfg)?;
    if mu_a.is_zero() {
        return Err(Error::ZeroMeasure("A"));
    }
    let mu_a_plus_b = sum.measure(finite, cfg)?;
    if mu_a_plus_b.is_zero() {
        return Err(Error::ZeroMeasure("A+B"));
    }
    let mu_b = bb.measure(finite, cfg)?;
    let alpha = &mu_a_plus_b / &mu_a;
    let one_eps = Rational::one() + eps;

    let n0 = ba.alignment().max(1).lcm(&bb.alignment().max(1));
    let mut schedule = Vec::new();
    let mut chosen = None;
    for i in 0..=opts.max_doublings {
        let n = match n0.checked_mul(1u64 << i) {
            Some(n) => n,
            None => break,
        };
        let spec_ok = GridSpec::new(d, (2 * n) as usize, finite.clone(), cfg).is_ok();
        if !spec_ok {
            break;
        }
        let inv = rational::ratio(1, n);
        let mu_a_n = ba.thicken(&inv).measure(finite, cfg)?;
        let mu_an_plus_bn = sum.thicken(&(&inv * rational::int(2))).measure(finite, cfg)?;
        let accepted = mu_a_n <= &one_eps * &mu_a && mu_an_plus_bn <= &one_eps * &mu_a_plus_b;
        schedule.push(ScheduleStep {
            n,
            mu_a_n,
            mu_an_plus_bn,
            accepted,
        });
        if accepted {
            chosen = Some(n);
            break;
        }
    }
    let n = chosen.ok_or(Error::ScheduleExhausted {
        best_n: schedule.last().map_or(n0, |s| s.n),
    })?;
    let big_n = (2 * n) as usize;
    let spec = GridSpec::new(d, big_n, finite.clone(), cfg)?;
    let fine = spec.with_resolution(2 * big_n, cfg).ok();

    let inv_n = rational::ratio(1, n);
    let inv_2n = rational::ratio(1, 2 * n);
    let chain = |name: &str, set: &BoxUnion| -> Result<(InclusionChain, crate::sets::GroupSubset)> {
        let a2n = set.thicken(&inv_2n);
        let an = set.thicken(&inv_n);
        let cells = outer_cells_of(&a2n, &spec)?;
        let lower = match &fine {
            Some(f) => outer_cells_of(&a2n, f)?.coarsen(2, cfg)?.is_subset(&cells)?,
            None => true,
        };
        let upper = cells.is_subset(&inner_cells_of(&an, &spec, cfg)?)?;
        Ok((
            InclusionChain {
                set: name.to_string(),
                cells: cells.len(),
                lower,
                upper,
            },
            cells.cells,
        ))
    };
    let (chain_a, da) = chain("A", &ba)?;
    let (chain_b, db) = chain("B", &bb)?;

    let corner = forward_box(spec.group(), d, 1);
    let db_prime = sumset(&db, &corner)?;
    let discrete_lhs = sumset(&da, &db_prime)?.len();
    let discrete_rhs = &one_eps * &alpha * rational::int(da.len());
    let discrete_pass = rational::int(discrete_lhs) <= discrete_rhs;

    let mode = if da.len() <= opts.exhaustive_cap {
        PetridisMode::Exhaustive
    } else {
        PetridisMode::LocalSearch
    };
    let popts = PetridisOptions {
        mode,
        m_max: opts.m_max,
        cap: opts.exhaustive_cap,
        max_restarts: opts.local_restarts,
    };
    let certificate = petridis_select_with(&da, &db_prime, &popts)?;
    let ratio_within = certificate.ratio <= &one_eps * &alpha;

    let x = &certificate.x;
    let mu_a_prime = x.measure();
    let closed_cell = BoxUnion::cube(d, rational::ratio(1, big_n as u64));
    let mut bounds = Vec::with_capacity(opts.m_max as usize);
    let mut mb = bb.clone();
    for m in 1..=opts.m_max {
        if m > 1 {
            mb = mb.sum(&bb)?;
        }
        // X + Q̄ + mB is aligned at N, so its inner cells give its exact measure
        let region = inner_cells_of(&closed_cell.sum(&mb)?, &spec, cfg)?;
        let lhs = sumset(x, &region.cells)?.measure();
        let growth = rational::pow(&(&one_eps * &alpha), m as i32);
        let rhs = &growth * &mu_a_prime;
        let power = &certificate.verified_powers[m as usize - 1];
        bounds.push(MBound {
            m,
            discrete_size: power.size,
            discrete_bound: power.bound.clone(),
            pass: lhs <= rhs,
            lhs,
            rhs,
        });
    }
    let chains = vec![chain_a, chain_b];
    let pass = chains.iter().all(|c| c.lower && c.upper)
        && discrete_pass
        && certificate.holds()
        && ratio_within
        && bounds.iter().all(|b| b.pass);
    Ok(PipelineReport {
        epsilon: eps.clone(),
        m_max: opts.m_max,
        mu_a,
        mu_b,
        mu_a_plus_b,
        alpha,
        schedule,
        n,
        resolution: big_n,
        chains,
        discrete_lhs,
        discrete_rhs,
        discrete_pass,
        selection: match mode {
            PetridisMode::Exhaustive => "exhaustive",
            PetridisMode::LocalSearch => "local_search",
        },
        certificate,
        ratio_within,
        mu_a_prime,
        bounds,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn quarter_interval() {
        let a = ConstructibleSet::interval(int(0), ratio(1, 4));
        let r = petridis_pipeline(&a, &a, &PipelineOptions::new(ratio(1, 10), 3)).unwrap();
        assert_eq!(r.alpha, int(2));
        assert!(r.chains.iter().all(|c| c.lower && c.upper));
        assert!(r.discrete_pass);
        assert!(r.certificate.ratio <= ratio(11, 10) * int(2));
        assert!(r.pass, "{}", serde_json::to_string_pretty(&r).unwrap());
        assert!(r.schedule.last().unwrap().accepted);
        assert!(r.schedule[..r.schedule.len() - 1].iter().all(|s| !s.accepted));
    }

    #[test]
    fn full_torus() {
        let a = ConstructibleSet::full(1);
        let b = ConstructibleSet::interval(int(0), ratio(1, 3));
        let r = petridis_pipeline(&a, &b, &PipelineOptions::new(ratio(1, 10), 3)).unwrap();
        assert_eq!(r.alpha, int(1));
        assert_eq!(r.certificate.ratio, int(1));
        assert_eq!(r.certificate.x.len(), r.chains[0].cells);
        for p in &r.certificate.verified_powers {
            assert_eq!(p.bound, int(p.size));
        }
        assert!(r.pass);
    }

    #[test]
    fn cantor_chain() {
        let c = ConstructibleSet::cantor(2);
        let r = petridis_pipeline(&c, &c, &PipelineOptions::new(ratio(1, 4), 2)).unwrap();
        assert!(r.chains.iter().all(|c| c.lower && c.upper));
        assert!(r.pass);
    }

    #[test]
    fn zero_measure_and_bad_epsilon() {
        let p = ConstructibleSet::point(vec![int(0)]);
        let opts = PipelineOptions::new(ratio(1, 10), 1);
        assert_eq!(petridis_pipeline(&p, &p, &opts).unwrap_err(), Error::ZeroMeasure("A"));
        let a = ConstructibleSet::interval(int(0), ratio(1, 2));
        let bad = PipelineOptions::new(int(0), 1);
        assert!(petridis_pipeline(&a, &a, &bad).is_err());
        let mut short = PipelineOptions::new(ratio(1, 1000), 1);
        short.max_doublings = 1;
        assert!(matches!(
            petridis_pipeline(&a, &a, &short),
            Err(Error::ScheduleExhausted { best_n: 4 })
        ));
    }
}
