use serde::{Deserialize, Serialize};

use super::generators as gen;
use super::FiniteGraph;
use crate::error::{out_of_range, Result};

/// Recipe for one of the supported graph families.
///
/// Specs double as templates for the size-scanning estimators:
/// [`FamilySpec::with_size`] overwrites the scale parameter(s) so that the
/// root sits at distance roughly `n` from the truncation boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    /// Ball of radius `radius` in the `d`-regular tree.
    TreeBall { d: usize, radius: usize },
    /// Box in `Z^dims.len()`, rooted at the center cell.
    GridBox {
        dims: Vec<usize>,
        #[serde(default)]
        periodic: bool,
    },
    /// Path `0..=len` rooted at `0`, boundary `{len}` (a truncation of `N`).
    HalfLine { len: usize },
    /// Truncated canopy of `T_d`: complete `(d-1)`-ary tree of height `height`
    /// rooted at a leaf.
    Canopy { d: usize, height: usize },
    /// Cartesian product; the right factor's edges are tagged as fibers.
    Product { left: Box<FamilySpec>, right: Box<FamilySpec> },
    /// Every fiber edge of `inner` replaced by a path of `stretch` edges.
    StretchedProduct { inner: Box<FamilySpec>, stretch: usize },
    /// Height-band truncation of the Diestel-Leader graph `DL(m, n)`.
    DlBall { m: usize, n: usize, height: usize },
    /// Horocyclic product of an `m`-branching and an `n`-branching canopy.
    HorocyclicCanopy { m: usize, n: usize, height: usize },
    /// Ball in the Cayley graph of `Z^2 * Z/2`.
    FreeProductZ2Edge { radius: usize },
    /// Combinatorial ball in the `{3, q}` triangulation.
    HyperbolicBall { q: usize, radius: usize },
    /// Ball of radius `radius` around a seeded uniform vertex of `inner`:
    /// an empirical sample of the local limit of `inner`.
    LocalView { inner: Box<FamilySpec>, radius: usize, seed: u64 },
    /// Graph assembled by hand or read from an export file.
    Custom { name: String },
}

impl FamilySpec {
    /// Short family name used in exports and reports.
    pub fn name(&self) -> &str {
        match self {
            FamilySpec::TreeBall { .. } => "tree_ball",
            FamilySpec::GridBox { .. } => "grid_box",
            FamilySpec::HalfLine { .. } => "half_line",
            FamilySpec::Canopy { .. } => "canopy",
            FamilySpec::Product { .. } => "product",
            FamilySpec::StretchedProduct { .. } => "stretched_product",
            FamilySpec::DlBall { .. } => "dl_ball",
            FamilySpec::HorocyclicCanopy { .. } => "horocyclic_canopy",
            FamilySpec::FreeProductZ2Edge { .. } => "free_product_z2_edge",
            FamilySpec::HyperbolicBall { .. } => "hyperbolic_ball",
            FamilySpec::LocalView { .. } => "local_view",
            FamilySpec::Custom { name } => name,
        }
    }

    /// `Z` truncation of radius `n`.
    pub fn line(n: usize) -> Self {
        FamilySpec::GridBox { dims: vec![2 * n + 1], periodic: false }
    }

    pub fn product(left: FamilySpec, right: FamilySpec) -> Self {
        FamilySpec::Product { left: Box::new(left), right: Box::new(right) }
    }

    pub fn stretched(inner: FamilySpec, stretch: usize) -> Self {
        FamilySpec::StretchedProduct { inner: Box::new(inner), stretch }
    }

    /// Check documented parameter ranges without building anything.
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::TreeBall { d, .. } | FamilySpec::Canopy { d, .. } if *d < 3 => {
                Err(out_of_range(format!("{}: d = {d} < 3", self.name())))
            }
            FamilySpec::Canopy { height: 0, .. } => Err(out_of_range("canopy: height must be >= 1")),
            FamilySpec::GridBox { dims, .. } if dims.is_empty() || dims.contains(&0) => {
                Err(out_of_range("grid_box: every side must be >= 1"))
            }
            FamilySpec::HalfLine { len: 0 } => Err(out_of_range("half_line: len must be >= 1")),
            FamilySpec::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            FamilySpec::StretchedProduct { inner, stretch } => {
                if *stretch == 0 {
                    return Err(out_of_range("stretch must be >= 1"));
                }
                inner.validate()
            }
            FamilySpec::DlBall { m, n, height } | FamilySpec::HorocyclicCanopy { m, n, height }
                if *m == 0 || *n == 0 || *height == 0 =>
            {
                Err(out_of_range(format!("{}: m, n, height must be >= 1", self.name())))
            }
            FamilySpec::FreeProductZ2Edge { radius: 0 } => {
                Err(out_of_range("free_product_z2_edge: radius must be >= 1"))
            }
            FamilySpec::HyperbolicBall { q, .. } if *q < 7 => {
                Err(out_of_range(format!("hyperbolic_ball: q = {q} < 7")))
            }
            FamilySpec::LocalView { inner, .. } => inner.validate(),
            _ => Ok(()),
        }
    }

    /// Build the finite graph this spec describes.
    pub fn build(&self) -> Result<FiniteGraph> {
        self.validate()?;
        let mut g = match self {
            FamilySpec::TreeBall { d, radius } => gen::tree_ball(*d, *radius)?,
            FamilySpec::GridBox { dims, periodic } => gen::grid_box(dims, *periodic)?,
            FamilySpec::HalfLine { len } => gen::half_line(*len)?,
            FamilySpec::Canopy { d, height } => gen::canopy(*d, *height)?,
            FamilySpec::Product { left, right } => {
                gen::cartesian_product(&left.build()?, &right.build()?)?
            }
            FamilySpec::StretchedProduct { inner, stretch } => {
                gen::stretch_fiber(&inner.build()?, *stretch)?
            }
            FamilySpec::DlBall { m, n, height } => gen::dl_ball(*m, *n, *height)?,
            FamilySpec::HorocyclicCanopy { m, n, height } => {
                gen::horocyclic_canopy_product(*m, *n, *height)?
            }
            FamilySpec::FreeProductZ2Edge { radius } => gen::free_product_z2_edge_ball(*radius)?,
            FamilySpec::HyperbolicBall { q, radius } => gen::hyperbolic_ball(*q, *radius)?,
            FamilySpec::LocalView { inner, radius, seed } => {
                gen::local_view(&inner.build()?, *radius, *seed)?
            }
            FamilySpec::Custom { name } => {
                return Err(out_of_range(format!("custom family '{name}' has no generator")))
            }
        };
        g.family = self.clone();
        Ok(g)
    }

    /// Copy of this spec with its scale parameter set to `n`.
    pub fn with_size(&self, n: usize) -> FamilySpec {
        match self {
            FamilySpec::TreeBall { d, .. } => FamilySpec::TreeBall { d: *d, radius: n },
            FamilySpec::GridBox { dims, periodic } => FamilySpec::GridBox {
                dims: vec![2 * n + 1; dims.len().max(1)],
                periodic: *periodic,
            },
            FamilySpec::HalfLine { .. } => FamilySpec::HalfLine { len: n },
            FamilySpec::Canopy { d, .. } => FamilySpec::Canopy { d: *d, height: n },
            FamilySpec::Product { left, right } => {
                FamilySpec::product(left.with_size(n), right.with_size(n))
            }
            FamilySpec::StretchedProduct { inner, stretch } => {
                FamilySpec::stretched(inner.with_size(n), *stretch)
            }
            FamilySpec::DlBall { m, n: nn, .. } => FamilySpec::DlBall { m: *m, n: *nn, height: n },
            FamilySpec::HorocyclicCanopy { m, n: nn, .. } => {
                FamilySpec::HorocyclicCanopy { m: *m, n: *nn, height: n }
            }
            FamilySpec::FreeProductZ2Edge { .. } => FamilySpec::FreeProductZ2Edge { radius: n },
            FamilySpec::HyperbolicBall { q, .. } => FamilySpec::HyperbolicBall { q: *q, radius: n },
            FamilySpec::LocalView { inner, seed, .. } => {
                FamilySpec::LocalView { inner: inner.clone(), radius: n, seed: *seed }
            }
            FamilySpec::Custom { .. } => self.clone(),
        }
    }
}
