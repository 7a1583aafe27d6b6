use std::cmp::Ordering;

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::report::describe;
use crate::bitset::BitSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sets::GroupSubset;
use crate::sumsets::sumset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PetridisMode {
    Exhaustive,
    LocalSearch,
}

impl std::str::FromStr for PetridisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exhaustive" => Ok(PetridisMode::Exhaustive),
            "local_search" | "local" => Ok(PetridisMode::LocalSearch),
            _ => Err(Error::InvalidArgument(format!(
                "unknown mode {s:?}; expected exhaustive or local_search"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PetridisOptions {
    pub mode: PetridisMode,
    pub m_max: u32,
    /// Largest `|A|` accepted in exhaustive mode.
    pub cap: usize,
    /// Local search restarts from `A` and from the first singletons of `A`;
    /// `None` uses every singleton.
    pub max_restarts: Option<usize>,
}

impl PetridisOptions {
    pub fn new(mode: PetridisMode, m_max: u32) -> Self {
        PetridisOptions {
            mode,
            m_max,
            cap: Config::default().petridis_cap,
            max_restarts: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerCheck {
    pub m: u32,
    /// `|X + mB|`
    pub size: usize,
    /// `ratio^m |X|`
    pub bound: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetridisCertificate {
    pub x: GroupSubset,
    /// `|X + B| / |X|`
    pub ratio: Rational,
    /// `|A + B| / |A|`
    pub baseline: Rational,
    pub verified_powers: Vec<PowerCheck>,
    /// `X` minimizes the ratio over all nonempty subsets of `A`.
    pub exhaustive: bool,
}

impl PetridisCertificate {
    pub fn holds(&self) -> bool {
        self.ratio <= self.baseline && self.verified_powers.iter().all(|p| p.holds)
    }
}

impl Serialize for PetridisCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Power {
            m: u32,
            size: usize,
            bound: String,
            holds: bool,
        }
        let powers: Vec<Power> = self
            .verified_powers
            .iter()
            .map(|p| Power {
                m: p.m,
                size: p.size,
                bound: rational::to_string(&p.bound),
                holds: p.holds,
            })
            .collect();
        let mut st = s.serialize_struct("PetridisCertificate", 9)?;
        st.serialize_field("group", &self.x.group().to_string())?;
        st.serialize_field("x", &describe(&self.x))?;
        st.serialize_field("x_size", &self.x.len())?;
        st.serialize_field("ratio", &rational::to_string(&self.ratio))?;
        st.serialize_field("ratio_approx", &rational::approx(&self.ratio))?;
        st.serialize_field("baseline", &rational::to_string(&self.baseline))?;
        st.serialize_field("exhaustive", &self.exhaustive)?;
        st.serialize_field("verified_powers", &powers)?;
        st.serialize_field("holds", &self.holds())?;
        st.end()
    }
}

pub fn petridis_select(
    a: &GroupSubset,
    b: &GroupSubset,
    m_max: u32,
    mode: PetridisMode,
) -> Result<PetridisCertificate> {
    petridis_select_with(a, b, &PetridisOptions::new(mode, m_max))
}

pub fn petridis_select_with(
    a: &GroupSubset,
    b: &GroupSubset,
    opts: &PetridisOptions,
) -> Result<PetridisCertificate> {
    if a.is_empty() {
        return Err(Error::EmptySet("A"));
    }
    if b.is_empty() {
        return Err(Error::EmptySet("B"));
    }
    a.same_group(b)?;
    let elems: Vec<usize> = a.indices().collect();
    match opts.mode {
        PetridisMode::Exhaustive => {
            if elems.len() > opts.cap {
                return Err(Error::PetridisCapExceeded {
                    size: elems.len(),
                    cap: opts.cap,
                });
            }
            let best = exhaustive_minimizer(a, b, &elems);
            let x = subset_of(a, &elems, |i| best.mask >> i & 1 == 1);
            let cert = certify(a, b, x, opts.m_max, true)?;
            if !cert.holds() {
                return Err(Error::Invariant(format!(
                    "exhaustive minimizer {} fails its certificate",
                    describe(&cert.x)
                )));
            }
            Ok(cert)
        }
        PetridisMode::LocalSearch => {
            let candidates = local_minima(a, b, &elems, opts.max_restarts);
            let count = candidates.len();
            for members in candidates {
                let x = subset_of(a, &elems, |i| members[i]);
                let cert = certify(a, b, x, opts.m_max, false)?;
                if cert.holds() {
                    return Ok(cert);
                }
            }
            Err(Error::CertificateUnverified { candidates: count })
        }
    }
}

fn subset_of(a: &GroupSubset, elems: &[usize], keep: impl Fn(usize) -> bool) -> GroupSubset {
    let mut bits = BitSet::new(a.group().order());
    for (i, &e) in elems.iter().enumerate() {
        if keep(i) {
            bits.insert(e);
        }
    }
    GroupSubset::from_bits(a.group_arc().clone(), bits)
}

fn certify(
    a: &GroupSubset,
    b: &GroupSubset,
    x: GroupSubset,
    m_max: u32,
    exhaustive: bool,
) -> Result<PetridisCertificate> {
    let ratio = rational::ratio(sumset(&x, b)?.len(), x.len());
    let baseline = rational::ratio(sumset(a, b)?.len(), a.len());
    let size_x = rational::int(x.len());
    let mut powers = Vec::with_capacity(m_max as usize);
    let mut acc = x.clone();
    for m in 1..=m_max {
        acc = sumset(&acc, b)?;
        let bound = rational::pow(&ratio, m as i32) * &size_x;
        powers.push(PowerCheck {
            m,
            size: acc.len(),
            holds: rational::int(acc.len()) <= bound,
            bound,
        });
    }
    Ok(PetridisCertificate {
        x,
        ratio,
        baseline,
        verified_powers: powers,
        exhaustive,
    })
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    size: u64,
    card: u64,
    mask: u64,
}

/// Smaller ratio, then smaller `|X|`, then the set whose lowest differing
/// element is a member.
fn cmp_candidates(x: &Candidate, y: &Candidate) -> Ordering {
    (x.size as u128 * y.card as u128)
        .cmp(&(y.size as u128 * x.card as u128))
        .then(x.card.cmp(&y.card))
        .then_with(|| {
            let d = x.mask ^ y.mask;
            if d == 0 {
                Ordering::Equal
            } else if x.mask & d & d.wrapping_neg() != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
}

fn better(x: Candidate, y: Candidate) -> Candidate {
    if cmp_candidates(&y, &x) == Ordering::Less {
        y
    } else {
        x
    }
}

fn translates(a: &GroupSubset, b: &GroupSubset, elems: &[usize]) -> Vec<BitSet> {
    let g = a.group();
    elems
        .par_iter()
        .map(|&e| {
            let mut t = BitSet::new(g.order());
            for j in b.indices() {
                t.insert(g.add_index(e, j));
            }
            t
        })
        .collect()
}

/// Enumerates every nonempty mask. Low bits come from a precomputed table of
/// partial unions; high bits are split across workers.
fn exhaustive_minimizer(a: &GroupSubset, b: &GroupSubset, elems: &[usize]) -> Candidate {
    let k = elems.len();
    let t = translates(a, b, elems);
    let words = t[0].words().len();
    let low_bits = k.min(10);
    let low_count = 1usize << low_bits;
    let mut table = vec![0u64; low_count * words];
    for mask in 1..low_count {
        let i = mask.trailing_zeros() as usize;
        let prev = mask & (mask - 1);
        for w in 0..words {
            table[mask * words + w] = table[prev * words + w] | t[i].words()[w];
        }
    }
    let high_count = 1usize << (k - low_bits);
    (0..high_count)
        .into_par_iter()
        .map(|high| {
            let mut base = vec![0u64; words];
            for (i, ti) in t.iter().enumerate().skip(low_bits) {
                if high >> (i - low_bits) & 1 == 1 {
                    for (bw, tw) in base.iter_mut().zip(ti.words()) {
                        *bw |= tw;
                    }
                }
            }
            let mut best: Option<Candidate> = None;
            for low in 0..low_count {
                let mask = ((high as u64) << low_bits) | low as u64;
                if mask == 0 {
                    continue;
                }
                let row = &table[low * words..(low + 1) * words];
                let size: u64 = base
                    .iter()
                    .zip(row)
                    .map(|(x, y)| (x | y).count_ones() as u64)
                    .sum();
                let c = Candidate {
                    size,
                    card: mask.count_ones() as u64,
                    mask,
                };
                best = Some(match best {
                    None => c,
                    Some(b) => better(b, c),
                });
            }
            best
        })
        .reduce(|| None, |x, y| match (x, y) {
            (Some(x), Some(y)) => Some(better(x, y)),
            (x, None) => x,
            (None, y) => y,
        })
        .expect("A is nonempty")
}

struct LocalState<'a> {
    shifts: &'a [Vec<usize>],
    counts: Vec<u32>,
    members: Vec<bool>,
    size: u64,
    card: u64,
}

impl<'a> LocalState<'a> {
    fn new(shifts: &'a [Vec<usize>], order: usize, start: &[bool]) -> Self {
        let mut s = LocalState {
            shifts,
            counts: vec![0; order],
            members: vec![false; shifts.len()],
            size: 0,
            card: 0,
        };
        for (i, &on) in start.iter().enumerate() {
            if on {
                s.add(i);
            }
        }
        s
    }

    fn add(&mut self, i: usize) {
        for &g in &self.shifts[i] {
            if self.counts[g] == 0 {
                self.size += 1;
            }
            self.counts[g] += 1;
        }
        self.members[i] = true;
        self.card += 1;
    }

    fn remove(&mut self, i: usize) {
        for &g in &self.shifts[i] {
            self.counts[g] -= 1;
            if self.counts[g] == 0 {
                self.size -= 1;
            }
        }
        self.members[i] = false;
        self.card -= 1;
    }

    fn gain(&self, i: usize) -> u64 {
        self.shifts[i].iter().filter(|&&g| self.counts[g] == 0).count() as u64
    }

    fn loss(&self, i: usize) -> u64 {
        self.shifts[i].iter().filter(|&&g| self.counts[g] == 1).count() as u64
    }

    /// `new_size / new_card < size / card`
    fn improves(&self, new_size: u64, new_card: u64) -> bool {
        (new_size as u128) * (self.card as u128) < (self.size as u128) * (new_card as u128)
    }

    fn descend(&mut self) {
        loop {
            let mut moved = false;
            for i in 0..self.members.len() {
                if self.members[i] {
                    if self.card > 1 && self.improves(self.size - self.loss(i), self.card - 1) {
                        self.remove(i);
                        moved = true;
                    }
                } else if self.improves(self.size + self.gain(i), self.card + 1) {
                    self.add(i);
                    moved = true;
                }
            }
            if !moved {
                return;
            }
        }
    }
}

/// Local minima under single add/remove moves, sorted by the tie-break order.
fn local_minima(
    a: &GroupSubset,
    b: &GroupSubset,
    elems: &[usize],
    max_restarts: Option<usize>,
) -> Vec<Vec<bool>> {
    let g = a.group();
    let k = elems.len();
    let shifts: Vec<Vec<usize>> = elems
        .iter()
        .map(|&e| b.indices().map(|j| g.add_index(e, j)).collect())
        .collect();
    let singles = max_restarts.map_or(k, |r| r.min(k));
    let mut starts: Vec<Vec<bool>> = vec![vec![true; k]];
    starts.extend((0..singles).map(|i| {
        let mut v = vec![false; k];
        v[i] = true;
        v
    }));
    let mut found: Vec<(u64, u64, Vec<bool>)> = starts
        .par_iter()
        .map(|start| {
            let mut s = LocalState::new(&shifts, g.order(), start);
            s.descend();
            (s.size, s.card, s.members)
        })
        .collect();
    found.sort_by(|x, y| {
        (x.0 as u128 * y.1 as u128)
            .cmp(&(y.0 as u128 * x.1 as u128))
            .then(x.1.cmp(&y.1))
            .then_with(|| {
                // first differing position: the owner is smaller
                match x.2.iter().zip(&y.2).find(|(p, q)| p != q) {
                    Some((true, _)) => Ordering::Less,
                    Some(_) => Ordering::Greater,
                    None => Ordering::Equal,
                }
            })
    });
    found.dedup_by(|x, y| x.2 == y.2);
    found.into_iter().map(|f| f.2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FiniteAbelianGroup;
    use crate::rational::ratio;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn set(g: &Arc<FiniteAbelianGroup>, idx: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g.clone(), idx.iter().copied()).unwrap()
    }

    #[test]
    fn z5_interval() {
        let g = Arc::new(FiniteAbelianGroup::cyclic(5).unwrap());
        let a = set(&g, &[0, 1]);
        for mode in [PetridisMode::Exhaustive, PetridisMode::LocalSearch] {
            let c = petridis_select(&a, &a, 2, mode).unwrap();
            assert_eq!(c.x, a);
            assert_eq!(c.ratio, ratio(3, 2));
            assert_eq!(c.verified_powers[1].size, 4);
            assert_eq!(c.verified_powers[1].bound, ratio(9, 2));
            assert!(c.holds());
        }
    }

    #[test]
    fn identity_b_and_cosets() {
        let g = Arc::new(FiniteAbelianGroup::cyclic(12).unwrap());
        let a = set(&g, &[1, 4, 7, 10]);
        let c = petridis_select(&a, &set(&g, &[0]), 3, PetridisMode::Exhaustive).unwrap();
        // every X has ratio 1; the tie-break keeps the smallest one
        assert_eq!(c.ratio, ratio(1, 1));
        assert_eq!(c.x, set(&g, &[1]));
        assert!(c.verified_powers.iter().all(|p| p.bound == rational::int(p.size)));
        let h = set(&g, &[0, 6]);
        let c = petridis_select(&a, &h, 3, PetridisMode::Exhaustive).unwrap();
        assert_eq!(c.ratio, ratio(1, 1));
    }

    #[test]
    fn errors() {
        let g = Arc::new(FiniteAbelianGroup::cyclic(30).unwrap());
        let big = GroupSubset::from_indices(g.clone(), 0..21).unwrap();
        let b = set(&g, &[0, 1]);
        assert!(matches!(
            petridis_select(&big, &b, 1, PetridisMode::Exhaustive),
            Err(Error::PetridisCapExceeded { size: 21, cap: 20 })
        ));
        assert!(petridis_select(&big, &b, 2, PetridisMode::LocalSearch).unwrap().holds());
        assert_eq!(
            petridis_select(&GroupSubset::empty(g.clone()), &b, 1, PetridisMode::Exhaustive),
            Err(Error::EmptySet("A"))
        );
    }

    fn brute_min(a: &GroupSubset, b: &GroupSubset) -> Rational {
        let elems: Vec<usize> = a.indices().collect();
        (1u64..1 << elems.len())
            .map(|mask| {
                let x: Vec<usize> = (0..elems.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| elems[i])
                    .collect();
                let mut s = std::collections::BTreeSet::new();
                for &p in &x {
                    for q in b.indices() {
                        s.insert((p + q) % a.group().order());
                    }
                }
                ratio(s.len(), x.len())
            })
            .min()
            .unwrap()
    }

    proptest! {
        #[test]
        fn certificates_hold(a in proptest::collection::btree_set(0usize..20, 1..9),
                             b in proptest::collection::btree_set(0usize..20, 1..6)) {
            let g = Arc::new(FiniteAbelianGroup::cyclic(20).unwrap());
            let a = GroupSubset::from_indices(g.clone(), a).unwrap();
            let b = GroupSubset::from_indices(g.clone(), b).unwrap();
            let e = petridis_select(&a, &b, 4, PetridisMode::Exhaustive).unwrap();
            prop_assert!(e.holds());
            prop_assert!(e.x.is_subset(&a).unwrap());
            prop_assert_eq!(&e.ratio, &brute_min(&a, &b));
            let l = petridis_select(&a, &b, 4, PetridisMode::LocalSearch).unwrap();
            prop_assert!(l.holds());
            prop_assert!(l.x.is_subset(&a).unwrap());
            prop_assert!(e.ratio <= l.ratio);
        }
    }
}
