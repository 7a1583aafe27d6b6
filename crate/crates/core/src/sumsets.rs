//! Sumset and difference-set engines.
//!
//! Two engines compute `S + T`: direct enumeration (rotated-word ORs on cyclic
//! groups, digit-wise addition otherwise) and the support of the cyclic
//! convolution of the indicator vectors. They are bit-identical; `Auto`
//! picks direct enumeration when `|S|·|T| < c · |G| · log2|G|`.

use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::ntt;
use crate::rational::{self, Rational};
use crate::sets::GroupSubset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Auto,
    Direct,
    Convolution,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "direct" => Ok(Engine::Direct),
            "convolution" => Ok(Engine::Convolution),
            other => Err(Error::InvalidArgument(format!(
                "unknown engine {other:?} (expected auto, direct or convolution)"
            ))),
        }
    }
}

static DEFAULT_ENGINE: AtomicU8 = AtomicU8::new(0);

/// Engine used by [`sumset`] and everything built on it. Results do not
/// depend on this choice, only running time does.
pub fn set_default_engine(engine: Engine) {
    let v = match engine {
        Engine::Auto => 0,
        Engine::Direct => 1,
        Engine::Convolution => 2,
    };
    DEFAULT_ENGINE.store(v, Ordering::Relaxed);
}

pub fn default_engine() -> Engine {
    match DEFAULT_ENGINE.load(Ordering::Relaxed) {
        1 => Engine::Direct,
        2 => Engine::Convolution,
        _ => Engine::Auto,
    }
}

/// `S + T` with the default engine.
pub fn sumset(s: &GroupSubset, t: &GroupSubset) -> Result<GroupSubset> {
    sumset_with(s, t, default_engine(), &Config::default())
}

/// `S − T` with the default engine.
pub fn difference_set(s: &GroupSubset, t: &GroupSubset) -> Result<GroupSubset> {
    sumset(s, &t.negate())
}

pub fn sumset_with(
    s: &GroupSubset,
    t: &GroupSubset,
    engine: Engine,
    cfg: &Config,
) -> Result<GroupSubset> {
    s.same_group(t)?;
    match engine {
        Engine::Direct => sumset_direct(s, t),
        Engine::Convolution => sumset_convolution(s, t),
        Engine::Auto => {
            // the direct engine ORs one rotated copy per element of the
            // smaller set, a word at a time
            let order = s.group().order() as f64;
            let words = (order / 64.0).ceil();
            let work = s.len().min(t.len()) as f64 * words;
            if work < cfg.dispatch_c * order * order.log2().max(1.0) {
                sumset_direct(s, t)
            } else {
                sumset_convolution(s, t)
            }
        }
    }
}

pub fn sumset_direct(s: &GroupSubset, t: &GroupSubset) -> Result<GroupSubset> {
    s.same_group(t)?;
    let group = s.group_arc().clone();
    if s.is_empty() || t.is_empty() {
        return Ok(GroupSubset::empty(group));
    }
    let (small, big) = if s.len() <= t.len() { (s, t) } else { (t, s) };
    let order = group.order();
    let small_idx: Vec<usize> = small.indices().collect();

    let bits = if group.is_cyclic() {
        let accumulate = |chunk: &[usize]| {
            let mut acc = BitSet::new(order);
            for &g in chunk {
                acc.or_rotated(big.bits(), g);
            }
            acc
        };
        if small_idx.len() >= 64 && order >= 1 << 12 {
            union_parallel(&small_idx, order, accumulate)
        } else {
            accumulate(&small_idx)
        }
    } else {
        let digits = Digits::new(&group, big.indices());
        let accumulate = |chunk: &[usize]| {
            let mut acc = BitSet::new(order);
            for &g in chunk {
                digits.translate_into(&group, g, &mut acc);
            }
            acc
        };
        if small_idx.len() * big.len() >= 1 << 16 {
            union_parallel(&small_idx, order, accumulate)
        } else {
            accumulate(&small_idx)
        }
    };
    Ok(GroupSubset::from_bits(group, bits))
}

fn union_parallel<F>(items: &[usize], order: usize, f: F) -> BitSet
where
    F: Fn(&[usize]) -> BitSet + Sync,
{
    let chunk = items.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(16);
    items
        .par_chunks(chunk)
        .map(&f)
        .reduce(
            || BitSet::new(order),
            |mut a, b| {
                a.union_with(&b);
                a
            },
        )
}

/// Members of a set stored as mixed-radix digit rows, so that translation
/// needs no divisions.
struct Digits {
    rank: usize,
    flat: Vec<usize>,
}

impl Digits {
    fn new(group: &FiniteAbelianGroup, members: impl Iterator<Item = usize>) -> Self {
        let rank = group.rank();
        let mut flat = Vec::new();
        for i in members {
            flat.extend(group.element(i).0.iter().map(|&c| c as usize));
        }
        Digits { rank, flat }
    }

    fn translate_into(&self, group: &FiniteAbelianGroup, g: usize, out: &mut BitSet) {
        let shift: Vec<usize> = group.element(g).0.iter().map(|&c| c as usize).collect();
        let factors = group.factors();
        for row in self.flat.chunks_exact(self.rank) {
            let mut idx = 0;
            for k in 0..self.rank {
                let n = factors[k];
                let mut d = row[k] + shift[k];
                if d >= n {
                    d -= n;
                }
                idx = idx * n + d;
            }
            out.insert(idx);
        }
    }
}

/// Support of the indicator convolution, computed with an exact
/// number-theoretic transform.
pub fn sumset_convolution(s: &GroupSubset, t: &GroupSubset) -> Result<GroupSubset> {
    s.same_group(t)?;
    let group = s.group_arc().clone();
    if s.is_empty() || t.is_empty() {
        return Ok(GroupSubset::empty(group));
    }
    let bits = if group.is_cyclic() && group.order().is_power_of_two() {
        cyclic_power_of_two(&group, s, t)?
    } else {
        padded(&group, s, t)?
    };
    Ok(GroupSubset::from_bits(group, bits))
}

fn transform_len(len: u128) -> Result<usize> {
    let p = len.next_power_of_two();
    if p > 1u128 << ntt::MAX_LOG_LEN {
        return Err(Error::TransformOverflow { len: p });
    }
    Ok(p as usize)
}

fn cyclic_power_of_two(
    group: &FiniteAbelianGroup,
    s: &GroupSubset,
    t: &GroupSubset,
) -> Result<BitSet> {
    let n = transform_len(group.order() as u128)?;
    let indicator = |x: &GroupSubset| {
        let mut v = vec![0u64; n];
        x.indices().for_each(|i| v[i] = 1);
        v
    };
    let conv = ntt::cyclic_convolution_scaled(indicator(s), indicator(t));
    let mut bits = BitSet::new(group.order());
    for (i, c) in conv.iter().enumerate() {
        if *c != 0 {
            bits.insert(i);
        }
    }
    Ok(bits)
}

/// Embeds each factor `Z_N` into `Z_{2N−1}` so the multidimensional cyclic
/// convolution becomes a linear one without wraparound, flattens, convolves,
/// then folds every coordinate back mod `N`.
fn padded(group: &FiniteAbelianGroup, s: &GroupSubset, t: &GroupSubset) -> Result<BitSet> {
    let factors = group.factors();
    let padded: Vec<usize> = factors.iter().map(|&n| 2 * n - 1).collect();
    let total: u128 = padded.iter().map(|&p| p as u128).product();
    let n = transform_len(total)?;
    let total = total as usize;
    let rank = factors.len();
    let mut pstride = vec![1usize; rank];
    for k in (0..rank.saturating_sub(1)).rev() {
        pstride[k] = pstride[k + 1] * padded[k + 1];
    }
    let embed = |x: &GroupSubset| {
        let mut v = vec![0u64; n];
        for i in x.indices() {
            let e = group.element(i);
            let j: usize = e.0.iter().zip(&pstride).map(|(&c, &st)| c as usize * st).sum();
            v[j] = 1;
        }
        v
    };
    let conv = ntt::cyclic_convolution_scaled(embed(s), embed(t));
    let mut bits = BitSet::new(group.order());
    let mut coords = vec![0usize; rank];
    for c in conv.iter().take(total) {
        if *c != 0 {
            let mut idx = 0;
            for k in 0..rank {
                let v = coords[k];
                idx = idx * factors[k] + if v >= factors[k] { v - factors[k] } else { v };
            }
            bits.insert(idx);
        }
        // odometer over the padded box
        for k in (0..rank).rev() {
            coords[k] += 1;
            if coords[k] < padded[k] {
                break;
            }
            coords[k] = 0;
        }
    }
    Ok(bits)
}

/// `mB − nB`. Multiples are built by doubling; `0B − 0B = {0}`.
pub fn iterated(m: u32, b: &GroupSubset, n: u32) -> Result<GroupSubset> {
    if m + n > 0 && b.is_empty() {
        return Err(Error::EmptySet("B"));
    }
    let mb = multiple(m, b)?;
    if n == 0 {
        return Ok(mb);
    }
    let nb = multiple(n, b)?;
    sumset(&mb, &nb.negate())
}

/// `kB` by binary doubling (`kB + lB = (k+l)B`).
pub fn multiple(k: u32, b: &GroupSubset) -> Result<GroupSubset> {
    let group = b.group_arc().clone();
    let mut result: Option<GroupSubset> = None;
    let mut power = b.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => sumset(&r, &power)?,
            });
        }
        k >>= 1;
        if k > 0 {
            power = sumset(&power, &power)?;
        }
    }
    Ok(result.unwrap_or_else(|| GroupSubset::identity(group)))
}

/// `|S − T|² / (|S|·|T|)`, the exact form of the Ruzsa distance
/// `log(|S−T| / sqrt(|S||T|))`.
pub fn ruzsa_distance(s: &GroupSubset, t: &GroupSubset) -> Result<Rational> {
    if s.is_empty() {
        return Err(Error::EmptySet("S"));
    }
    if t.is_empty() {
        return Err(Error::EmptySet("T"));
    }
    let d = difference_set(s, t)?.len();
    Ok(rational::ratio(d * d, s.len() * t.len()))
}

/// `{−r, …, r}^d × {0}` inside `Z_N^d × Z` (torus axes first).
pub fn centered_box(group: &Arc<FiniteAbelianGroup>, torus_dims: usize, r: usize) -> GroupSubset {
    corner_box(group, torus_dims, r, true)
}

/// `{0, …, r}^d × {0}` inside `Z_N^d × Z`.
pub fn forward_box(group: &Arc<FiniteAbelianGroup>, torus_dims: usize, r: usize) -> GroupSubset {
    corner_box(group, torus_dims, r, false)
}

fn corner_box(group: &Arc<FiniteAbelianGroup>, torus_dims: usize, r: usize, centered: bool) -> GroupSubset {
    let factors = group.factors();
    let mut axes: Vec<Vec<usize>> = Vec::new();
    for (k, &n) in factors.iter().enumerate() {
        if k < torus_dims {
            let mut vals: Vec<usize> = if centered {
                (0..=2 * r).map(|o| (o + n * (r / n + 1) - r) % n).collect()
            } else {
                (0..=r).map(|o| o % n).collect()
            };
            vals.sort_unstable();
            vals.dedup();
            axes.push(vals);
        } else {
            axes.push(vec![0]);
        }
    }
    let mut idx = vec![0usize];
    for (k, vals) in axes.iter().enumerate() {
        let n = factors[k];
        idx = idx
            .iter()
            .flat_map(|&base| vals.iter().map(move |&v| base * n + v))
            .collect();
    }
    GroupSubset::from_indices(group.clone(), idx).expect("box indices are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn cyc(n: u64) -> Arc<FiniteAbelianGroup> {
        Arc::new(FiniteAbelianGroup::cyclic(n).unwrap())
    }

    fn set(g: &Arc<FiniteAbelianGroup>, xs: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g.clone(), xs.iter().copied()).unwrap()
    }

    fn members(s: &GroupSubset) -> Vec<usize> {
        s.indices().collect()
    }

    /// Pair enumeration straight from the definition.
    fn brute(s: &GroupSubset, t: &GroupSubset) -> GroupSubset {
        let g = s.group_arc().clone();
        let mut out = Vec::new();
        for a in s.elements() {
            for b in t.elements() {
                out.push(g.add(&a, &b).unwrap());
            }
        }
        GroupSubset::from_elements(g, &out).unwrap()
    }

    #[test]
    fn sumset_examples() {
        let z5 = cyc(5);
        let s = set(&z5, &[0, 1]);
        for engine in [Engine::Direct, Engine::Convolution, Engine::Auto] {
            let r = sumset_with(&s, &set(&z5, &[0, 2]), engine, &Config::default()).unwrap();
            assert_eq!(members(&r), vec![0, 1, 2, 3]);
            let r = sumset_with(&s, &set(&z5, &[0]), engine, &Config::default()).unwrap();
            assert_eq!(r, s);
        }
        let z3 = cyc(3);
        let pre_cantor = set(&z3, &[0, 2]);
        assert_eq!(members(&sumset(&pre_cantor, &pre_cantor).unwrap()), vec![0, 1, 2]);
    }

    #[test]
    fn convolution_absorbing_and_empty_cases() {
        let g = Arc::new(FiniteAbelianGroup::new(&[6, 4]).unwrap());
        let full = GroupSubset::full(g.clone());
        let t = set(&g, &[5, 17]);
        assert_eq!(sumset_convolution(&full, &t).unwrap(), full);
        let empty = GroupSubset::empty(g.clone());
        assert!(sumset_convolution(&empty, &t).unwrap().is_empty());
        assert!(sumset_direct(&t, &empty).unwrap().is_empty());
    }

    #[test]
    fn group_mismatch_is_rejected() {
        let a = set(&cyc(5), &[0]);
        let b = set(&cyc(6), &[0]);
        assert!(matches!(sumset_direct(&a, &b), Err(Error::GroupMismatch { .. })));
        assert!(matches!(sumset_convolution(&a, &b), Err(Error::GroupMismatch { .. })));
    }

    #[test]
    fn iterated_examples() {
        let z5 = cyc(5);
        let b = set(&z5, &[0, 1]);
        assert_eq!(iterated(1, &b, 0).unwrap(), b);
        assert_eq!(members(&iterated(0, &b, 0).unwrap()), vec![0]);
        assert_eq!(members(&iterated(1, &b, 1).unwrap()), vec![0, 1, 4]);
        assert!(matches!(
            iterated(1, &GroupSubset::empty(z5), 0),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn ruzsa_distance_examples() {
        let z6 = cyc(6);
        let h = set(&z6, &[0, 2, 4]);
        assert_eq!(ruzsa_distance(&h, &h).unwrap(), ratio(1, 1));
        let z5 = cyc(5);
        let s = set(&z5, &[0, 1]);
        assert_eq!(ruzsa_distance(&s, &s).unwrap(), ratio(9, 4));
        assert_eq!(ruzsa_distance(&set(&z5, &[3]), &set(&z5, &[1])).unwrap(), ratio(1, 1));
        assert!(ruzsa_distance(&GroupSubset::empty(z5.clone()), &s).is_err());
    }

    #[test]
    fn boxes() {
        let g = Arc::new(FiniteAbelianGroup::new(&[4, 4, 2]).unwrap());
        let b = centered_box(&g, 2, 1);
        assert_eq!(b.len(), 9);
        assert!(b.contains(&crate::groups::GroupElement(vec![3, 3, 0])));
        assert_eq!(forward_box(&g, 2, 1).len(), 4);
        let z3 = cyc(3);
        assert_eq!(centered_box(&z3, 1, 5).len(), 3);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<u64>, u64, u64, u32, u32)> {
        (
            proptest::collection::vec(1u64..9, 1..4),
            any::<u64>(),
            any::<u64>(),
            1u32..4,
            1u32..4,
        )
    }

    proptest! {
        #[test]
        fn engines_agree_with_brute_force((factors, sa, sb, da, db) in arb_pair()) {
            let g = Arc::new(FiniteAbelianGroup::new(&factors).unwrap());
            let s = GroupSubset::random(g.clone(), &ratio(da, 5), sa).unwrap();
            let t = GroupSubset::random(g, &ratio(db, 5), sb).unwrap();
            let want = brute(&s, &t);
            prop_assert_eq!(sumset_direct(&s, &t).unwrap(), want.clone());
            prop_assert_eq!(sumset_convolution(&s, &t).unwrap(), want.clone());
            prop_assert_eq!(sumset(&t, &s).unwrap(), want.clone());
            if !s.is_empty() && !t.is_empty() {
                prop_assert!(want.len() >= s.len().max(t.len()));
            }
        }

        #[test]
        fn associativity((factors, sa, sb, _da, _db) in arb_pair(), sc in any::<u64>()) {
            let g = Arc::new(FiniteAbelianGroup::new(&factors).unwrap());
            let d = ratio(1, 3);
            let s = GroupSubset::random(g.clone(), &d, sa).unwrap();
            let t = GroupSubset::random(g.clone(), &d, sb).unwrap();
            let u = GroupSubset::random(g, &d, sc).unwrap();
            prop_assert_eq!(
                sumset(&sumset(&s, &t).unwrap(), &u).unwrap(),
                sumset(&s, &sumset(&t, &u).unwrap()).unwrap()
            );
        }

        #[test]
        fn doubling_matches_naive_folds(n in 2u64..40, seed in any::<u64>(), m in 1u32..=5) {
            let g = cyc(n);
            let b = GroupSubset::random(g.clone(), &ratio(1, 4), seed).unwrap();
            prop_assume!(!b.is_empty());
            let mut naive = b.clone();
            for _ in 1..m {
                naive = sumset_direct(&naive, &b).unwrap();
            }
            prop_assert_eq!(iterated(m, &b, 0).unwrap(), naive);
        }
    }
}
