use num_bigint::BigInt;
use num_traits::One;

use super::report::{describe, InequalityId, VerificationReport};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sets::GroupSubset;
use crate::sumsets::{difference_set, iterated, multiple, sumset};

fn nonempty(s: &GroupSubset, name: &'static str) -> Result<()> {
    if s.is_empty() {
        Err(Error::EmptySet(name))
    } else {
        Ok(())
    }
}

fn doubling(a: &GroupSubset, b: &GroupSubset) -> Result<Rational> {
    Ok(rational::ratio(sumset(a, b)?.len(), a.len()))
}

/// `μ(mB − nB) <= α^{m+n} μ(A)` with `α = |A+B|/|A|`.
pub fn check_plunnecke(a: &GroupSubset, b: &GroupSubset, m: u32, n: u32) -> Result<VerificationReport> {
    nonempty(a, "A")?;
    nonempty(b, "B")?;
    a.same_group(b)?;
    let alpha = doubling(a, b)?;
    let lhs = iterated(m, b, n)?.measure();
    let rhs = rational::pow(&alpha, (m + n) as i32) * a.measure();
    Ok(
        VerificationReport::new(InequalityId::Plunnecke, a.group().to_string(), Some(m), Some(n), lhs, rhs)
            .input("A", describe(a))
            .input("B", describe(b))
            .input("alpha", rational::to_string(&alpha)),
    )
}

/// `μ(mB − nB) μ(A)^{m+n−1} <= μ(A+B)^{m+n}`.
pub fn check_plunnecke_normalized(
    a: &GroupSubset,
    b: &GroupSubset,
    m: u32,
    n: u32,
) -> Result<VerificationReport> {
    nonempty(a, "A")?;
    nonempty(b, "B")?;
    a.same_group(b)?;
    let k = (m + n) as i32;
    let lhs = iterated(m, b, n)?.measure() * rational::pow(&a.measure(), k - 1);
    let rhs = rational::pow(&sumset(a, b)?.measure(), k);
    Ok(VerificationReport::new(
        InequalityId::PlunneckeNormalized,
        a.group().to_string(),
        Some(m),
        Some(n),
        lhs,
        rhs,
    )
    .input("A", describe(a))
    .input("B", describe(b)))
}

/// `μ(A1 − A3) μ(A2) <= μ(A1 − A2) μ(A2 − A3)`.
pub fn check_ruzsa_triangle(
    a1: &GroupSubset,
    a2: &GroupSubset,
    a3: &GroupSubset,
) -> Result<VerificationReport> {
    nonempty(a1, "A1")?;
    nonempty(a2, "A2")?;
    nonempty(a3, "A3")?;
    a1.same_group(a2)?;
    a2.same_group(a3)?;
    let lhs = difference_set(a1, a3)?.measure() * a2.measure();
    let rhs = difference_set(a1, a2)?.measure() * difference_set(a2, a3)?.measure();
    Ok(
        VerificationReport::new(InequalityId::RuzsaTriangle, a1.group().to_string(), None, None, lhs, rhs)
            .input("A1", describe(a1))
            .input("A2", describe(a2))
            .input("A3", describe(a3)),
    )
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn check_zp(a: &GroupSubset, p: u64) -> Result<()> {
    let g = a.group();
    if !g.is_cyclic() || g.order() as u64 != p {
        return Err(Error::InvalidArgument(format!(
            "expected the group Z{p}, got {g}"
        )));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// `min(p, |A| + |B| − 1) <= |A + B|` in `Z_p`.
pub fn check_cauchy_davenport(a: &GroupSubset, b: &GroupSubset, p: u64) -> Result<VerificationReport> {
    nonempty(a, "A")?;
    nonempty(b, "B")?;
    a.same_group(b)?;
    check_zp(a, p)?;
    let lhs = (p as usize).min(a.len() + b.len() - 1);
    let rhs = sumset(a, b)?.len();
    Ok(VerificationReport::new(
        InequalityId::CauchyDavenport,
        a.group().to_string(),
        None,
        None,
        rational::int(lhs),
        rational::int(rhs),
    )
    .input("A", describe(a))
    .input("B", describe(b)))
}

/// `|mB| <= (α^m − 1)|A| + 1` in `Z_p`, applicable when `α^m |A| < p`.
pub fn check_nb_bound(a: &GroupSubset, b: &GroupSubset, p: u64, m: u32) -> Result<VerificationReport> {
    nonempty(a, "A")?;
    nonempty(b, "B")?;
    a.same_group(b)?;
    check_zp(a, p)?;
    // with s = |A+B|, k = |A|: α^m k < p  ⟺  s^m < p k^{m−1}, and
    // (α^m − 1) k + 1 = (s^m − k^m + k^{m−1}) / k^{m−1}
    let s = BigInt::from(sumset(a, b)?.len());
    let k = BigInt::from(a.len());
    let sm = num_traits::pow(s.clone(), m as usize);
    let k_m1 = if m == 0 {
        BigInt::one()
    } else {
        num_traits::pow(k.clone(), m as usize - 1)
    };
    let (lhs_num, rhs) = if m == 0 {
        // α^0 = 1: the bound reads |{0}| <= 1
        (BigInt::one(), Rational::one())
    } else {
        let km = &k_m1 * &k;
        (
            BigInt::from(multiple(m, b)?.len()),
            Rational::new(&sm - &km + &k_m1, k_m1.clone()),
        )
    };
    let applies = if m == 0 { k < BigInt::from(p) } else { sm < BigInt::from(p) * &k_m1 };
    let report = VerificationReport::new(
        InequalityId::NbBound,
        a.group().to_string(),
        Some(m),
        None,
        Rational::from_integer(lhs_num),
        rhs,
    )
    .input("A", describe(a))
    .input("B", describe(b))
    .input("alpha", format!("{}", Rational::new(s, k)));
    Ok(if applies {
        report
    } else {
        report.precondition_not_met()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FiniteAbelianGroup;
    use crate::rational::ratio;
    use std::sync::Arc;

    fn z(n: u64) -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::cyclic(n).unwrap())
    }

    fn set(g: &Arc<FiniteAbelianGroup>, idx: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g.clone(), idx.iter().copied()).unwrap()
    }

    #[test]
    fn plunnecke_examples() {
        let g = z(8);
        let a = set(&g, &[0, 1]);
        let r = check_plunnecke(&a, &a, 2, 0).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone(), r.pass), (ratio(3, 8), ratio(9, 16), true));
        let r = check_plunnecke(&a, &a, 0, 0).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (ratio(1, 8), ratio(1, 4)));
        let h = set(&g, &[0, 2, 4, 6]);
        for (m, n) in [(1, 0), (2, 1), (3, 3)] {
            let r = check_plunnecke(&h, &h, m, n).unwrap();
            assert_eq!(r.lhs, ratio(1, 2));
            assert_eq!(r.rhs, ratio(1, 2));
        }
        assert!(matches!(
            check_plunnecke(&GroupSubset::empty(g.clone()), &a, 1, 1),
            Err(Error::EmptySet("A"))
        ));
    }

    #[test]
    fn normalized_examples() {
        let g = z(5);
        let a = set(&g, &[0, 1]);
        let r = check_plunnecke_normalized(&a, &a, 1, 1).unwrap();
        assert_eq!(r.lhs, ratio(3, 5) * ratio(2, 5));
        assert_eq!(r.rhs, ratio(9, 25));
        assert!(r.pass);
        let full = GroupSubset::full(g.clone());
        let r = check_plunnecke_normalized(&full, &a, 2, 1).unwrap();
        assert_eq!(r.rhs, ratio(1, 1));
        assert!(r.pass);
        // m = n = 0 uses μ(A)^{-1}
        let r = check_plunnecke_normalized(&a, &a, 0, 0).unwrap();
        assert_eq!(r.lhs, ratio(1, 5) * ratio(5, 2));
    }

    #[test]
    fn ruzsa_examples() {
        let g = z(5);
        let a = set(&g, &[0, 1]);
        let r = check_ruzsa_triangle(&a, &a, &a).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (ratio(6, 25), ratio(9, 25)));
        let g6 = z(6);
        let h = set(&g6, &[0, 2, 4]);
        let r = check_ruzsa_triangle(&h, &h, &h).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let a1 = set(&g6, &[1, 3]);
        let a3 = set(&g6, &[0, 5]);
        let r = check_ruzsa_triangle(&a1, &set(&g6, &[0]), &a3).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn cauchy_davenport_examples() {
        let g = z(7);
        let a = set(&g, &[0, 1]);
        let r = check_cauchy_davenport(&a, &a, 7).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.pass);
        let full = GroupSubset::full(g.clone());
        assert!(check_cauchy_davenport(&full, &full, 7).unwrap().pass);
        let g8 = z(8);
        assert_eq!(
            check_cauchy_davenport(&set(&g8, &[0]), &set(&g8, &[0]), 8),
            Err(Error::NotPrime(8))
        );
        assert!(check_cauchy_davenport(&a, &a, 11).is_err());
    }

    #[test]
    fn nb_examples() {
        let g = z(7);
        let a = set(&g, &[0, 1]);
        let r = check_nb_bound(&a, &a, 7, 1).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (ratio(2, 1), ratio(2, 1)));
        assert!(r.pass);
        let g11 = z(11);
        let a = set(&g11, &[0, 1, 2]);
        let r = check_nb_bound(&a, &a, 11, 2).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (ratio(5, 1), ratio(19, 3)));
        let r = check_nb_bound(&set(&g11, &[3, 5, 9]), &set(&g11, &[0]), 11, 4).unwrap();
        assert_eq!(r.rhs, ratio(1, 1));
        assert!(r.pass);
        // α^m |A| >= p
        let r = check_nb_bound(&a, &a, 11, 3).unwrap();
        assert_eq!(r.status, super::super::Status::PreconditionNotMet);
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(4_294_967_291));
    }
}
