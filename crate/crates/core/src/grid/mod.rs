//! Grid discretization of `T^d × Z`.
//!
//! A grid set at resolution `N` is a set of cells `j/N + Q` with
//! `Q = [0, 1/N)^d × {0}`, stored as a subset of `Z_N^d × Z` (torus axes
//! first, then the finite factor). Outer approximations use the half-open
//! cube: a cell is kept when `j/N + Q` meets the set. Inner approximations
//! use the closed cube: a cell is kept when `j/N + [0, 1/N]^d` lies inside.

mod constructible;
mod curves;
mod pipeline;

use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

pub use constructible::{cantor_starts, BoxUnion, CircleArc, ConstructibleSet, Side, TorusBox};
pub use curves::{cantor_demo, convergence_curve, CantorDemoReport, CantorRow, ConvergenceCurve, CurveRow};
pub use pipeline::{
    petridis_pipeline, InclusionChain, MBound, PipelineOptions, PipelineReport, ScheduleStep,
};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::rational::Rational;
use crate::sets::GroupSubset;
use crate::sumsets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    Exact,
    Outer,
    Inner,
}

/// Shape of a grid: torus dimension, cells per axis, finite factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub dim: usize,
    pub resolution: usize,
    pub finite: Arc<FiniteAbelianGroup>,
    group: Arc<FiniteAbelianGroup>,
}

impl GridSpec {
    pub fn new(
        dim: usize,
        resolution: usize,
        finite: Arc<FiniteAbelianGroup>,
        cfg: &Config,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("grid dimension must be positive".into()));
        }
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let cells = (resolution as u128)
            .checked_pow(dim as u32)
            .and_then(|c| c.checked_mul(finite.order() as u128))
            .unwrap_or(u128::MAX);
        if cells > cfg.max_grid_cells as u128 {
            return Err(Error::ResolutionOverflow {
                cells,
                cap: cfg.max_grid_cells,
            });
        }
        let mut factors = vec![resolution as u64; dim];
        if !finite.is_trivial() {
            factors.extend(finite.factors().iter().map(|&f| f as u64));
        }
        let group = Arc::new(FiniteAbelianGroup::new(&factors)?);
        Ok(GridSpec {
            dim,
            resolution,
            finite,
            group,
        })
    }

    /// Torus-only grid (`Z` trivial).
    pub fn torus(dim: usize, resolution: usize, cfg: &Config) -> Result<Self> {
        Self::new(dim, resolution, Arc::new(FiniteAbelianGroup::trivial()), cfg)
    }

    pub fn with_resolution(&self, resolution: usize, cfg: &Config) -> Result<Self> {
        Self::new(self.dim, resolution, self.finite.clone(), cfg)
    }

    /// `Z_N^d × Z`.
    pub fn group(&self) -> &Arc<FiniteAbelianGroup> {
        &self.group
    }

    pub fn cell_count(&self) -> usize {
        self.group.order()
    }

    fn z_order(&self) -> usize {
        self.finite.order()
    }

    /// Index of cell `(j, z)`.
    pub fn cell_index(&self, torus: &[usize], z: usize) -> usize {
        let mut t = 0;
        for &j in torus {
            t = t * self.resolution + j;
        }
        t * self.z_order() + z
    }

    /// Inverse of [`GridSpec::cell_index`].
    pub fn cell_coords(&self, index: usize) -> (Vec<usize>, usize) {
        let z = index % self.z_order();
        let mut t = index / self.z_order();
        let mut torus = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            torus[k] = t % self.resolution;
            t /= self.resolution;
        }
        (torus, z)
    }

    fn z_index(&self, z: &[u64]) -> Result<usize> {
        let f = self.finite.factors();
        if z.len() > f.len() && z[f.len()..].iter().any(|&c| c != 0) && !self.finite.is_trivial() {
            return Err(Error::InvalidConstructible(format!(
                "finite shift has {} coordinates, finite factor {} has {}",
                z.len(),
                self.finite,
                f.len()
            )));
        }
        let coords: Vec<u64> = (0..f.len())
            .map(|i| z.get(i).copied().unwrap_or(0) % f[i] as u64)
            .collect();
        self.finite.index_of(&coords.into())
    }

    fn insert_product(&self, axes: &[Vec<usize>], z: usize, out: &mut GroupSubsetBuilder) {
        if axes.iter().any(|a| a.is_empty()) {
            return;
        }
        let mut cursor = vec![0usize; axes.len()];
        let mut torus = vec![0usize; axes.len()];
        loop {
            for (k, &c) in cursor.iter().enumerate() {
                torus[k] = axes[k][c];
            }
            out.insert(self.cell_index(&torus, z));
            let mut k = axes.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                cursor[k] += 1;
                if cursor[k] < axes[k].len() {
                    break;
                }
                cursor[k] = 0;
            }
        }
    }
}

struct GroupSubsetBuilder {
    bits: crate::bitset::BitSet,
}

impl GroupSubsetBuilder {
    fn new(len: usize) -> Self {
        GroupSubsetBuilder {
            bits: crate::bitset::BitSet::new(len),
        }
    }

    fn insert(&mut self, i: usize) {
        self.bits.insert(i);
    }

    fn finish(self, group: Arc<FiniteAbelianGroup>) -> GroupSubset {
        GroupSubset::from_bits(group, self.bits)
    }
}

/// Union of cells `j/N + Q` over a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTorusSet {
    pub spec: GridSpec,
    pub cells: GroupSubset,
    pub semantics: Semantics,
    /// Set by [`GridTorusSet::thicken`] when the dilation covers whole axes.
    pub saturated: bool,
}

impl GridTorusSet {
    pub fn from_cells(spec: GridSpec, cells: GroupSubset, semantics: Semantics) -> Result<Self> {
        cells.same_group(&GroupSubset::empty(spec.group().clone()))?;
        Ok(GridTorusSet {
            spec,
            cells,
            semantics,
            saturated: false,
        })
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// `|cells| / (N^d · |Z|)`.
    pub fn measure(&self) -> Rational {
        self.cells.measure()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Dilation by `{−r, …, r}^d × {0}` in cell units, with wraparound.
    pub fn thicken(&self, r: usize) -> Result<GridTorusSet> {
        if r == 0 {
            return Err(Error::InvalidArgument("thickening radius must be positive".into()));
        }
        let k = sumsets::centered_box(self.spec.group(), self.spec.dim, r);
        let cells = sumsets::sumset(&self.cells, &k)?;
        Ok(GridTorusSet {
            spec: self.spec.clone(),
            cells,
            semantics: self.semantics,
            saturated: 2 * r + 1 >= self.spec.resolution,
        })
    }

    /// Splits each cell into `f^d` subcells at resolution `f·N`.
    pub fn refine(&self, f: usize, cfg: &Config) -> Result<GridTorusSet> {
        if f == 0 {
            return Err(Error::InvalidArgument("refinement factor must be positive".into()));
        }
        let n = self
            .spec
            .resolution
            .checked_mul(f)
            .ok_or(Error::ResolutionOverflow {
                cells: u128::MAX,
                cap: cfg.max_grid_cells,
            })?;
        let fine = self.spec.with_resolution(n, cfg)?;
        let offsets: Vec<usize> = (0..f).collect();
        let mut out = GroupSubsetBuilder::new(fine.cell_count());
        for idx in self.cells.indices() {
            let (torus, z) = self.spec.cell_coords(idx);
            let axes: Vec<Vec<usize>> = torus
                .iter()
                .map(|&j| offsets.iter().map(|&o| j * f + o).collect())
                .collect();
            fine.insert_product(&axes, z, &mut out);
        }
        Ok(GridTorusSet {
            cells: out.finish(fine.group().clone()),
            spec: fine,
            semantics: self.semantics,
            saturated: self.saturated,
        })
    }

    /// Cells at resolution `N / f` containing at least one cell of `self`.
    pub fn coarsen(&self, f: usize, cfg: &Config) -> Result<GridTorusSet> {
        if f == 0 || self.spec.resolution % f != 0 {
            return Err(Error::InvalidArgument(format!(
                "{f} does not divide resolution {}",
                self.spec.resolution
            )));
        }
        let coarse = self.spec.with_resolution(self.spec.resolution / f, cfg)?;
        let mut out = GroupSubsetBuilder::new(coarse.cell_count());
        for idx in self.cells.indices() {
            let (torus, z) = self.spec.cell_coords(idx);
            let parent: Vec<usize> = torus.iter().map(|&j| j / f).collect();
            out.insert(coarse.cell_index(&parent, z));
        }
        Ok(GridTorusSet {
            cells: out.finish(coarse.group().clone()),
            spec: coarse,
            semantics: Semantics::Outer,
            saturated: false,
        })
    }

    pub fn is_subset(&self, other: &GridTorusSet) -> Result<bool> {
        self.cells.is_subset(&other.cells)
    }
}

fn check_dim(boxes: &BoxUnion, spec: &GridSpec) -> Result<()> {
    if boxes.dim != spec.dim {
        return Err(Error::DimensionMismatch {
            expected: spec.dim,
            got: boxes.dim,
        });
    }
    Ok(())
}

/// Cells whose half-open cube `j/N + Q` meets `set`.
pub fn outer_cells(set: &ConstructibleSet, spec: &GridSpec) -> Result<GridTorusSet> {
    outer_cells_of(&set.to_boxes()?, spec)
}

pub fn outer_cells_of(boxes: &BoxUnion, spec: &GridSpec) -> Result<GridTorusSet> {
    check_dim(boxes, spec)?;
    let n = spec.resolution;
    let mut out = GroupSubsetBuilder::new(spec.cell_count());
    for b in &boxes.boxes {
        let axes: Vec<Vec<usize>> = b.arcs.iter().map(|a| a.outer_cells(n)).collect();
        spec.insert_product(&axes, spec.z_index(&b.z)?, &mut out);
    }
    Ok(GridTorusSet {
        cells: out.finish(spec.group().clone()),
        spec: spec.clone(),
        semantics: Semantics::Outer,
        saturated: false,
    })
}

/// Cells whose closed cube `j/N + [0, 1/N]^d` lies inside `set`.
pub fn inner_cells(set: &ConstructibleSet, spec: &GridSpec, cfg: &Config) -> Result<GridTorusSet> {
    inner_cells_of(&set.to_boxes()?, spec, cfg)
}

/// Containment in a union of boxes is decided on the common refinement `M`
/// of `N` and the boxes' endpoint lattice: there every closed `1/M` cell is
/// either inside some box or meets the union's complement in an open set.
pub fn inner_cells_of(boxes: &BoxUnion, spec: &GridSpec, cfg: &Config) -> Result<GridTorusSet> {
    check_dim(boxes, spec)?;
    let n = spec.resolution as u64;
    let m = n.lcm(&boxes.alignment().max(1));
    if m == n {
        return inner_cells_aligned(boxes, spec);
    }
    let f = (m / n) as usize;
    let fine = spec.with_resolution(m as usize, cfg)?;
    let fine_cells = inner_cells_aligned(boxes, &fine)?;
    let per_cell = f.pow(spec.dim as u32);
    let mut counts = vec![0u32; spec.cell_count()];
    for idx in fine_cells.cells.indices() {
        let (torus, z) = fine.cell_coords(idx);
        let parent: Vec<usize> = torus.iter().map(|&j| j / f).collect();
        counts[spec.cell_index(&parent, z)] += 1;
    }
    let cells = GroupSubset::from_indices(
        spec.group().clone(),
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c as usize == per_cell)
            .map(|(i, _)| i),
    )?;
    Ok(GridTorusSet {
        spec: spec.clone(),
        cells,
        semantics: Semantics::Inner,
        saturated: false,
    })
}

/// Inner cells when every endpoint of `boxes` lies on the `1/N` lattice:
/// the union of the per-box inner cells.
pub(crate) fn inner_cells_aligned(boxes: &BoxUnion, spec: &GridSpec) -> Result<GridTorusSet> {
    check_dim(boxes, spec)?;
    let n = spec.resolution;
    let mut out = GroupSubsetBuilder::new(spec.cell_count());
    for b in boxes.boxes.iter().filter(|b| !b.is_degenerate()) {
        let axes: Vec<Vec<usize>> = b.arcs.iter().map(|a| a.inner_cells(n)).collect();
        spec.insert_product(&axes, spec.z_index(&b.z)?, &mut out);
    }
    Ok(GridTorusSet {
        cells: out.finish(spec.group().clone()),
        spec: spec.clone(),
        semantics: Semantics::Inner,
        saturated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn members(s: &GridTorusSet) -> Vec<usize> {
        s.cells.indices().collect()
    }

    fn quarter() -> ConstructibleSet {
        ConstructibleSet::interval(int(0), ratio(1, 4))
    }

    #[test]
    fn outer_examples() {
        let s8 = GridSpec::torus(1, 8, &cfg()).unwrap();
        assert_eq!(members(&outer_cells(&quarter(), &s8).unwrap()), vec![0, 1, 2]);
        let s5 = GridSpec::torus(1, 5, &cfg()).unwrap();
        assert_eq!(outer_cells(&ConstructibleSet::full(1), &s5).unwrap().len(), 5);
        let s3 = GridSpec::torus(1, 3, &cfg()).unwrap();
        let c = outer_cells(&ConstructibleSet::cantor(1), &s3).unwrap();
        assert_eq!(members(&c), vec![0, 1, 2]);
        assert_eq!(c.semantics, Semantics::Outer);
    }

    #[test]
    fn inner_examples() {
        let s8 = GridSpec::torus(1, 8, &cfg()).unwrap();
        assert_eq!(members(&inner_cells(&quarter(), &s8, &cfg()).unwrap()), vec![0, 1]);
        let empty = ConstructibleSet::Empty { dim: 1 };
        assert!(inner_cells(&empty, &s8, &cfg()).unwrap().is_empty());
        let s3 = GridSpec::torus(1, 3, &cfg()).unwrap();
        assert_eq!(
            members(&inner_cells(&ConstructibleSet::cantor(1), &s3, &cfg()).unwrap()),
            vec![0, 2]
        );
    }

    #[test]
    fn inner_cells_see_unions_of_boxes() {
        // [1/8, 3/8] is covered only jointly by [0, 1/4] and [1/4, 1/2]
        let u = ConstructibleSet::union(vec![
            quarter(),
            ConstructibleSet::interval(ratio(1, 4), ratio(1, 2)),
        ]);
        let s = GridSpec::torus(1, 8, &cfg()).unwrap();
        assert_eq!(members(&inner_cells(&u, &s, &cfg()).unwrap()), vec![0, 1, 2, 3]);
        // unaligned: [0, 1/3] at N = 4 contains only [0, 1/4]
        let t = ConstructibleSet::interval(int(0), ratio(1, 3));
        let s4 = GridSpec::torus(1, 4, &cfg()).unwrap();
        assert_eq!(members(&inner_cells(&t, &s4, &cfg()).unwrap()), vec![0]);
    }

    #[test]
    fn dimension_mismatch() {
        let s = GridSpec::torus(2, 4, &cfg()).unwrap();
        assert!(matches!(outer_cells(&quarter(), &s), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(inner_cells(&quarter(), &s, &cfg()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn thicken_examples() {
        let s8 = GridSpec::torus(1, 8, &cfg()).unwrap();
        let cells = GroupSubset::from_indices(s8.group().clone(), [0]).unwrap();
        let g = GridTorusSet::from_cells(s8.clone(), cells, Semantics::Exact).unwrap();
        let t = g.thicken(1).unwrap();
        assert_eq!(members(&t), vec![0, 1, 7]);
        assert!(!t.saturated);
        let t = g.thicken(4).unwrap();
        assert_eq!(t.len(), 8);
        assert!(t.saturated);
        assert!(g.thicken(0).is_err());

        let s2 = GridSpec::torus(2, 4, &cfg()).unwrap();
        let cells = GroupSubset::from_indices(s2.group().clone(), [0]).unwrap();
        let g = GridTorusSet::from_cells(s2.clone(), cells, Semantics::Exact).unwrap();
        let t = g.thicken(1).unwrap();
        assert_eq!(t.len(), 9);
        let want: Vec<usize> = [(3, 3), (3, 0), (3, 1), (0, 3), (0, 0), (0, 1), (1, 3), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| s2.cell_index(&[a, b], 0))
            .collect();
        for w in want {
            assert!(t.cells.contains_index(w));
        }
    }

    #[test]
    fn refine_examples() {
        let s3 = GridSpec::torus(1, 3, &cfg()).unwrap();
        let cells = GroupSubset::from_indices(s3.group().clone(), [0]).unwrap();
        let g = GridTorusSet::from_cells(s3, cells, Semantics::Exact).unwrap();
        assert_eq!(g.refine(1, &cfg()).unwrap(), g);
        let r = g.refine(2, &cfg()).unwrap();
        assert_eq!(r.resolution(), 6);
        assert_eq!(members(&r), vec![0, 1]);
        let small = Config {
            max_grid_cells: 100,
            ..Config::default()
        };
        assert!(matches!(g.refine(50, &small), Err(Error::ResolutionOverflow { .. })));
    }

    #[test]
    fn finite_factor_is_carried() {
        let z2 = Arc::new(FiniteAbelianGroup::cyclic(2).unwrap());
        let spec = GridSpec::new(1, 4, z2, &cfg()).unwrap();
        let shifted = ConstructibleSet::Translate {
            by: vec![int(0)],
            z: Some(vec![1]),
            of: Box::new(quarter()),
        };
        let o = outer_cells(&shifted, &spec).unwrap();
        // cells (0,1), (1,1)
        assert_eq!(members(&o), vec![1, 3]);
        assert_eq!(o.measure(), ratio(1, 4));
        let i = inner_cells(&shifted, &spec, &cfg()).unwrap();
        assert_eq!(members(&i), vec![1]);
    }

    fn arb_set() -> impl Strategy<Value = ConstructibleSet> {
        let interval = (0i64..16, 0i64..16, 1i64..=16).prop_map(|(x, y, q)| {
            let (a, b) = if x <= y { (x, y) } else { (y, x) };
            ConstructibleSet::interval(ratio(a % (q + 1), q), ratio(b % (q + 1), q).max(ratio(a % (q + 1), q)))
        });
        prop_oneof![
            proptest::collection::vec(interval, 1..4).prop_map(ConstructibleSet::union),
            (1u32..4).prop_map(ConstructibleSet::cantor),
        ]
    }

    proptest! {
        #[test]
        fn inner_outer_sandwich(set in arb_set(), n in 1usize..40) {
            let spec = GridSpec::torus(1, n, &cfg()).unwrap();
            let inner = inner_cells(&set, &spec, &cfg()).unwrap();
            let outer = outer_cells(&set, &spec).unwrap();
            prop_assert!(inner.is_subset(&outer).unwrap());
            let z1 = Arc::new(FiniteAbelianGroup::trivial());
            let exact = set.to_boxes().unwrap().measure(&z1, &cfg()).unwrap();
            prop_assert!(inner.measure() <= exact);
            prop_assert!(exact <= outer.measure());
        }

        #[test]
        fn refinement_chain_is_monotone(set in arb_set(), n in 1usize..12, f in 2usize..4) {
            let spec = GridSpec::torus(1, n, &cfg()).unwrap();
            let fine = spec.with_resolution(n * f, &cfg()).unwrap();
            let (o1, o2) = (outer_cells(&set, &spec).unwrap(), outer_cells(&set, &fine).unwrap());
            let (i1, i2) = (inner_cells(&set, &spec, &cfg()).unwrap(), inner_cells(&set, &fine, &cfg()).unwrap());
            prop_assert!(o2.measure() <= o1.measure());
            prop_assert!(i1.measure() <= i2.measure());
            prop_assert!(o2.coarsen(f, &cfg()).unwrap().is_subset(&o1).unwrap());
            let r = o1.refine(f, &cfg()).unwrap();
            prop_assert_eq!(r.measure(), o1.measure());
        }

        #[test]
        fn thicken_is_monotone(set in arb_set(), n in 3usize..30, r in 1usize..4, extra in 0usize..3) {
            let spec = GridSpec::torus(1, n, &cfg()).unwrap();
            let s = outer_cells(&set, &spec).unwrap();
            let t1 = s.thicken(r).unwrap();
            let t2 = s.thicken(r + extra).unwrap();
            prop_assert!(s.is_subset(&t1).unwrap());
            prop_assert!(t1.is_subset(&t2).unwrap());
        }
    }
}
