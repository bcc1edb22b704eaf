//! Finite-difference extrinsic geometry of sampled parametric patches
//! `F: U ⊂ ℝⁿ → ℝ^{n+1}`.
//!
//! Conventions: `h_ij = ⟨∂_i∂_j F, ν⟩`, `H = g^{ij} h_ij`,
//! `|A|² = tr((g⁻¹h)²)`. With the inward normal a round sphere of radius `ρ`
//! has `H = n/ρ`, and `∂H/∂s = (Δ + |A|²)φ` holds for `∂F/∂s = φν`.

mod diff;
mod fields;
mod grid;
mod ops;
pub mod shapes;

pub use diff::{d1, d2};
pub use fields::{fundamental_forms, fundamental_forms_with_floor, GeometryFields, DEFAULT_DET_FLOOR};
pub use grid::{Axis, Grid};
pub use ops::{
    gradient, laplace_beltrami, stability_operator, support_function, AmbientField,
    ConstantField, RotationField, TangentField,
};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Nodes within this many cells of the boundary are left out of reports by
/// default. Nested stencils (`ΔH` differentiates `F` four times) reach three
/// cells in from the one-sided boundary rows.
pub const DEFAULT_TRIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundaryPolicy {
    /// Boundary values come from one-sided stencils and are reported.
    OneSided,
    /// Boundary values are computed but nodes within `trim` cells of the
    /// boundary are excluded from every report.
    Trim,
}

/// Embedding samples on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfacePatch {
    pub grid: Grid,
    /// Ambient dimension, always `grid.dim() + 1`.
    pub ambient: usize,
    /// Row-major, `ambient` values per node.
    pub points: Vec<f64>,
    pub boundary: BoundaryPolicy,
    pub trim: usize,
    /// The normal is flipped so that it has positive inner product with
    /// this vector at the centre node. `None` keeps the grid-order sign.
    pub orientation: Option<Vec<f64>>,
}

impl SurfacePatch {
    pub fn new(grid: Grid, points: Vec<f64>) -> Result<Self> {
        let ambient = grid.dim() + 1;
        let expected = grid.node_count() * ambient;
        if points.len() != expected {
            return Err(Error::ShapeMismatch { expected, found: points.len() });
        }
        if let Some(bad) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(alloc::format!(
                "non-finite embedding value at node {}",
                bad / ambient
            )));
        }
        Ok(SurfacePatch {
            grid,
            ambient,
            points,
            boundary: BoundaryPolicy::Trim,
            trim: DEFAULT_TRIM,
            orientation: None,
        })
    }

    /// Samples `embed(coords, out)` at every node.
    pub fn from_fn<E>(grid: Grid, mut embed: E) -> Result<Self>
    where
        E: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let ambient = grid.dim() + 1;
        let mut points = alloc::vec![0.0; grid.node_count() * ambient];
        for node in 0..grid.node_count() {
            let coords = grid.coords(node);
            embed(&coords, &mut points[node * ambient..(node + 1) * ambient])?;
        }
        Self::new(grid, points)
    }

    pub fn with_orientation(mut self, reference: Vec<f64>) -> Self {
        self.orientation = Some(reference);
        self
    }

    pub fn with_boundary(mut self, policy: BoundaryPolicy, trim: usize) -> Self {
        self.boundary = policy;
        self.trim = trim;
        self
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn point(&self, node: usize) -> &[f64] {
        &self.points[node * self.ambient..(node + 1) * self.ambient]
    }

    pub fn is_reported(&self, node: usize) -> bool {
        match self.boundary {
            BoundaryPolicy::OneSided => true,
            BoundaryPolicy::Trim => self.grid.is_interior(node, self.trim),
        }
    }

    /// Nodes that enter sup/`L²` reports.
    pub fn reported_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&n| self.is_reported(n)).collect()
    }

    /// `|F|` at every node.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.node_count()).map(|n| crate::math::norm(self.point(n))).collect()
    }

    /// The homothetic image `c·F` on the same parameter grid.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.points.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// The image under a linear map of the ambient space (`m × m`,
    /// row-major); the orientation reference is carried along.
    pub fn transformed(&self, map: &[f64]) -> Self {
        let m = self.ambient;
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..m).map(|i| (0..m).map(|j| map[i * m + j] * v[j]).sum()).collect()
        };
        let mut out = self.clone();
        for node in 0..self.node_count() {
            let image = apply(self.point(node));
            out.points[node * m..(node + 1) * m].copy_from_slice(&image);
        }
        out.orientation = self.orientation.as_deref().map(apply);
        out
    }
}

/// One scalar per node of a patch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn constant(nodes: usize, value: f64) -> Self {
        ScalarField { values: alloc::vec![value; nodes] }
    }

    /// Evaluates `f(coords, point)` at every node of the patch.
    pub fn from_fn(patch: &SurfacePatch, mut f: impl FnMut(&[f64], &[f64]) -> f64) -> Self {
        let values = (0..patch.node_count())
            .map(|n| f(&patch.grid.coords(n), patch.point(n)))
            .collect();
        ScalarField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_len(&self, nodes: usize) -> Result<()> {
        if self.values.len() != nodes {
            return Err(Error::ShapeMismatch { expected: nodes, found: self.values.len() });
        }
        Ok(())
    }
}
