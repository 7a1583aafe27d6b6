//! Closed subsets of `T^d × Z` built from rational intervals, boxes, points
//! and pre-Cantor sets by union, product and translation.
//!
//! Every description normalizes to a finite union of closed boxes whose sides
//! are closed arcs of the circle with rational endpoints, which makes both the
//! measure of a set and of its sumsets exactly computable.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::rational::{self, Rational};

const MAX_CANTOR_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Side {
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
}

/// JSON grammar, rationals as `"p/q"` strings:
/// `{"type":"interval","a":"0","b":"1/4"}`, `{"type":"cantor","depth":3}`,
/// `{"type":"box","sides":[{"a":"0","b":"1/2"},…]}`,
/// `{"type":"point","coords":["1/3"]}`, `{"type":"empty","dim":1}`,
/// `{"type":"union","parts":[…]}`, `{"type":"product","parts":[…]}`,
/// `{"type":"translate","by":["1/8"],"of":…}` (optional `"z"` shift in the
/// finite factor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstructibleSet {
    Interval {
        #[serde(with = "rational::serde_str")]
        a: Rational,
        #[serde(with = "rational::serde_str")]
        b: Rational,
    },
    Box {
        sides: Vec<Side>,
    },
    Cantor {
        depth: u32,
    },
    Point {
        #[serde(with = "rational::serde_str_vec")]
        coords: Vec<Rational>,
    },
    Empty {
        dim: usize,
    },
    Union {
        parts: Vec<ConstructibleSet>,
    },
    Product {
        parts: Vec<ConstructibleSet>,
    },
    Translate {
        #[serde(with = "rational::serde_str_vec")]
        by: Vec<Rational>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<Vec<u64>>,
        of: std::boxed::Box<ConstructibleSet>,
    },
}

impl ConstructibleSet {
    pub fn interval(a: Rational, b: Rational) -> Self {
        ConstructibleSet::Interval { a, b }
    }

    pub fn cantor(depth: u32) -> Self {
        ConstructibleSet::Cantor { depth }
    }

    pub fn point(coords: Vec<Rational>) -> Self {
        ConstructibleSet::Point { coords }
    }

    pub fn full(dim: usize) -> Self {
        ConstructibleSet::Box {
            sides: (0..dim)
                .map(|_| Side {
                    a: Rational::zero(),
                    b: Rational::one(),
                })
                .collect(),
        }
    }

    pub fn union(parts: Vec<ConstructibleSet>) -> Self {
        ConstructibleSet::Union { parts }
    }

    pub fn product(parts: Vec<ConstructibleSet>) -> Self {
        ConstructibleSet::Product { parts }
    }

    pub fn translate(self, by: Vec<Rational>) -> Self {
        ConstructibleSet::Translate {
            by,
            z: None,
            of: std::boxed::Box::new(self),
        }
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.to_boxes()?.dim)
    }

    /// Normal form as a union of closed boxes.
    pub fn to_boxes(&self) -> Result<BoxUnion> {
        let invalid = |m: String| Error::InvalidConstructible(m);
        match self {
            ConstructibleSet::Interval { a, b } => {
                Ok(BoxUnion::single(vec![CircleArc::from_interval(a, b)?]))
            }
            ConstructibleSet::Box { sides } => {
                if sides.is_empty() {
                    return Err(invalid("box needs at least one side".into()));
                }
                let arcs = sides
                    .iter()
                    .map(|s| CircleArc::from_interval(&s.a, &s.b))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BoxUnion::single(arcs))
            }
            ConstructibleSet::Cantor { depth } => {
                if *depth > MAX_CANTOR_DEPTH {
                    return Err(invalid(format!(
                        "cantor depth {depth} exceeds {MAX_CANTOR_DEPTH}"
                    )));
                }
                let len = rational::ratio(1, 3u64.pow(*depth));
                let boxes = cantor_starts(*depth)
                    .into_iter()
                    .map(|s| TorusBox {
                        arcs: vec![CircleArc {
                            start: rational::ratio(s, 3u64.pow(*depth)),
                            len: len.clone(),
                        }],
                        z: Vec::new(),
                    })
                    .collect();
                Ok(BoxUnion::new(1, boxes))
            }
            ConstructibleSet::Point { coords } => {
                if coords.is_empty() {
                    return Err(invalid("point needs at least one coordinate".into()));
                }
                Ok(BoxUnion::single(
                    coords
                        .iter()
                        .map(|c| CircleArc {
                            start: rational::frac(c),
                            len: Rational::zero(),
                        })
                        .collect(),
                ))
            }
            ConstructibleSet::Empty { dim } => {
                if *dim == 0 {
                    return Err(invalid("empty set needs a positive dimension".into()));
                }
                Ok(BoxUnion::new(*dim, Vec::new()))
            }
            ConstructibleSet::Union { parts } => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| invalid("union needs at least one part".into()))?
                    .to_boxes()?;
                let mut out = first;
                for p in it {
                    let b = p.to_boxes()?;
                    if b.dim != out.dim {
                        return Err(invalid(format!(
                            "union mixes dimensions {} and {}",
                            out.dim, b.dim
                        )));
                    }
                    out.boxes.extend(b.boxes);
                }
                out.normalize();
                Ok(out)
            }
            ConstructibleSet::Product { parts } => {
                let mut it = parts.iter();
                let mut out = it
                    .next()
                    .ok_or_else(|| invalid("product needs at least one part".into()))?
                    .to_boxes()?;
                for p in it {
                    let b = p.to_boxes()?;
                    let mut boxes = Vec::with_capacity(out.boxes.len() * b.boxes.len());
                    for x in &out.boxes {
                        for y in &b.boxes {
                            let mut arcs = x.arcs.clone();
                            arcs.extend(y.arcs.iter().cloned());
                            boxes.push(TorusBox {
                                arcs,
                                z: add_z(&x.z, &y.z),
                            });
                        }
                    }
                    out = BoxUnion::new(out.dim + b.dim, boxes);
                }
                Ok(out)
            }
            ConstructibleSet::Translate { by, z, of } => {
                let inner = of.to_boxes()?;
                if by.len() != inner.dim {
                    return Err(invalid(format!(
                        "translation has {} coordinates, set has dimension {}",
                        by.len(),
                        inner.dim
                    )));
                }
                Ok(inner.translate(by, z.as_deref().unwrap_or(&[])))
            }
        }
    }
}

/// Left endpoints (numerators over `3^depth`) of the depth-`k` pre-Cantor
/// intervals: all numbers with ternary digits in `{0, 2}`.
pub fn cantor_starts(depth: u32) -> Vec<u64> {
    let mut starts = vec![0u64];
    for _ in 0..depth {
        starts = starts
            .iter()
            .flat_map(|&s| [3 * s, 3 * s + 2])
            .collect();
    }
    starts.sort_unstable();
    starts
}

fn add_z(a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0))
        .collect()
}

/// Closed arc `[start, start + len]` of `T = R/Z`; `len = 1` is the circle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircleArc {
    pub start: Rational,
    pub len: Rational,
}

impl CircleArc {
    fn from_interval(a: &Rational, b: &Rational) -> Result<Self> {
        if !rational::is_in_unit_interval(a) || !rational::is_in_unit_interval(b) || a > b {
            return Err(Error::InvalidConstructible(format!(
                "interval [{a}, {b}] must satisfy 0 <= a <= b <= 1"
            )));
        }
        Ok(CircleArc {
            start: rational::frac(a),
            len: b - a,
        })
    }

    pub fn is_full(&self) -> bool {
        self.len >= Rational::one()
    }

    pub fn end(&self) -> Rational {
        &self.start + &self.len
    }

    fn widen(&self, r: &Rational) -> CircleArc {
        let len = &self.len + r * rational::int(2);
        if len >= Rational::one() {
            CircleArc {
                start: Rational::zero(),
                len: Rational::one(),
            }
        } else {
            CircleArc {
                start: rational::frac(&(&self.start - r)),
                len,
            }
        }
    }

    fn plus(&self, other: &CircleArc) -> CircleArc {
        let len = &self.len + &other.len;
        if len >= Rational::one() {
            CircleArc {
                start: Rational::zero(),
                len: Rational::one(),
            }
        } else {
            CircleArc {
                start: rational::frac(&(&self.start + &other.start)),
                len,
            }
        }
    }

    /// Residues `j mod n` whose half-open cell `[j/n, (j+1)/n)` meets the arc.
    pub fn outer_cells(&self, n: usize) -> Vec<usize> {
        if self.is_full() {
            return (0..n).collect();
        }
        let nn = rational::int(n as u64);
        let lo = rational::floor_i(&(&self.start * &nn));
        let hi = rational::floor_i(&(self.end() * &nn));
        wrap_range(lo, hi, n)
    }

    /// Residues `j mod n` whose closed cell `[j/n, (j+1)/n]` lies in the arc.
    pub fn inner_cells(&self, n: usize) -> Vec<usize> {
        if self.is_full() {
            return (0..n).collect();
        }
        let nn = rational::int(n as u64);
        let lo = rational::ceil_i(&(&self.start * &nn));
        let hi = rational::floor_i(&(self.end() * &nn)) - BigInt::one();
        wrap_range(lo, hi, n)
    }
}

fn wrap_range(lo: BigInt, hi: BigInt, n: usize) -> Vec<usize> {
    if hi < lo {
        return Vec::new();
    }
    let count = (&hi - &lo + BigInt::one()).to_usize().unwrap_or(usize::MAX);
    if count >= n {
        return (0..n).collect();
    }
    let lo = lo.mod_floor(&BigInt::from(n)).to_usize().expect("residue fits");
    let mut v: Vec<usize> = (0..count).map(|k| (lo + k) % n).collect();
    v.sort_unstable();
    v
}

/// One closed box: a product of arcs at a single point `z` of the finite factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusBox {
    pub arcs: Vec<CircleArc>,
    pub z: Vec<u64>,
}

impl TorusBox {
    pub fn is_degenerate(&self) -> bool {
        self.arcs.iter().any(|a| a.len.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxUnion {
    pub dim: usize,
    pub boxes: Vec<TorusBox>,
}

impl BoxUnion {
    pub fn new(dim: usize, boxes: Vec<TorusBox>) -> Self {
        let mut u = BoxUnion { dim, boxes };
        u.normalize();
        u
    }

    fn single(arcs: Vec<CircleArc>) -> Self {
        BoxUnion {
            dim: arcs.len(),
            boxes: vec![TorusBox { arcs, z: Vec::new() }],
        }
    }

    fn normalize(&mut self) {
        self.boxes.sort();
        self.boxes.dedup();
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn translate(&self, by: &[Rational], z: &[u64]) -> BoxUnion {
        BoxUnion::new(
            self.dim,
            self.boxes
                .iter()
                .map(|b| TorusBox {
                    arcs: b
                        .arcs
                        .iter()
                        .zip(by)
                        .map(|(a, t)| {
                            if a.is_full() {
                                a.clone()
                            } else {
                                CircleArc {
                                    start: rational::frac(&(&a.start + t)),
                                    len: a.len.clone(),
                                }
                            }
                        })
                        .collect(),
                    z: add_z(&b.z, z),
                })
                .collect(),
        )
    }

    /// `self + ([−r, r]^d × {0})`.
    pub fn thicken(&self, r: &Rational) -> BoxUnion {
        BoxUnion::new(
            self.dim,
            self.boxes
                .iter()
                .map(|b| TorusBox {
                    arcs: b.arcs.iter().map(|a| a.widen(r)).collect(),
                    z: b.z.clone(),
                })
                .collect(),
        )
    }

    pub fn sum(&self, other: &BoxUnion) -> Result<BoxUnion> {
        if self.dim != other.dim {
            return Err(Error::InvalidConstructible(format!(
                "cannot add sets of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let mut boxes = Vec::with_capacity(self.boxes.len() * other.boxes.len());
        for x in &self.boxes {
            for y in &other.boxes {
                boxes.push(TorusBox {
                    arcs: x.arcs.iter().zip(&y.arcs).map(|(a, b)| a.plus(b)).collect(),
                    z: add_z(&x.z, &y.z),
                });
            }
        }
        Ok(BoxUnion::new(self.dim, boxes))
    }

    /// `m·self` (`m ≥ 1`).
    pub fn multiple(&self, m: u32) -> Result<BoxUnion> {
        let mut out = self.clone();
        for _ in 1..m {
            out = out.sum(self)?;
        }
        Ok(out)
    }

    /// `[0, s]^d × {0}`.
    pub fn cube(dim: usize, side: Rational) -> BoxUnion {
        BoxUnion::single(
            (0..dim)
                .map(|_| CircleArc {
                    start: Rational::zero(),
                    len: side.clone(),
                })
                .collect(),
        )
    }

    /// Smallest `M` such that every endpoint lies on the `1/M` lattice.
    pub fn alignment(&self) -> u64 {
        let mut l = BigInt::one();
        for b in &self.boxes {
            for a in &b.arcs {
                l = l.lcm(a.start.denom()).lcm(a.end().denom());
            }
        }
        l.to_u64().unwrap_or(u64::MAX)
    }

    /// Exact Haar measure in `T^d × Z`.
    pub fn measure(&self, finite: &Arc<FiniteAbelianGroup>, cfg: &Config) -> Result<Rational> {
        if self.is_empty() {
            return Ok(Rational::zero());
        }
        let m = self.alignment();
        let spec = super::GridSpec::new(self.dim, m as usize, finite.clone(), cfg)?;
        Ok(super::inner_cells_aligned(self, &spec)?.measure())
    }
}
