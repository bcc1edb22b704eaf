use alloc::vec::Vec;

use crate::{Error, Result};

/// One uniformly spaced parameter axis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    pub start: f64,
    pub spacing: f64,
    pub len: usize,
}

impl Axis {
    /// `len` nodes from `start` to `end` inclusive.
    pub fn span(start: f64, end: f64, len: usize) -> Self {
        let spacing = if len > 1 { (end - start) / (len - 1) as f64 } else { 0.0 };
        Axis { start, spacing, len }
    }

    /// `len` nodes centred on `center` with the given spacing.
    pub fn centered(center: f64, spacing: f64, len: usize) -> Self {
        Axis { start: center - spacing * ((len - 1) as f64 / 2.0), spacing, len }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + self.spacing * i as f64
    }

    pub fn end(&self) -> f64 {
        self.coord(self.len - 1)
    }
}

/// A rectangular lattice in parameter space; nodes are numbered row-major
/// with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Domain("grid needs at least one axis".into()));
        }
        for (k, a) in axes.iter().enumerate() {
            if !(a.spacing > 0.0 && a.spacing.is_finite() && a.start.is_finite()) {
                return Err(Error::Domain(alloc::format!(
                    "axis {k} has non-positive or non-finite spacing {}",
                    a.spacing
                )));
            }
            if a.len < 5 {
                return Err(Error::Domain(alloc::format!(
                    "axis {k} has {} nodes; second-order stencils need at least 5",
                    a.len
                )));
            }
        }
        Ok(Grid { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.len).product()
    }

    /// Index of `node` along `axis`.
    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.stride(axis)) % self.axes[axis].len
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        (0..self.dim()).map(|k| self.index_along(node, k)).collect()
    }

    pub fn node_of(&self, index: &[usize]) -> usize {
        index.iter().enumerate().map(|(k, &i)| i * self.stride(k)).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.axes[k].coord(self.index_along(node, k)))
            .collect()
    }

    pub fn center_node(&self) -> usize {
        let mid: Vec<usize> = self.axes.iter().map(|a| a.len / 2).collect();
        self.node_of(&mid)
    }

    /// Largest spacing over the axes; the nominal resolution of the grid.
    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).fold(0.0, f64::max)
    }

    /// Parameter-space volume of one cell, the weight of grid `L²` norms.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    /// True when `node` is at least `margin` cells away from every face.
    pub fn is_interior(&self, node: usize, margin: usize) -> bool {
        (0..self.dim()).all(|k| {
            let i = self.index_along(node, k);
            i >= margin && i + margin < self.axes[k].len
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let g = Grid::new(alloc::vec![Axis::span(0.0, 1.0, 5), Axis::span(0.0, 2.0, 7)]).unwrap();
        assert_eq!(g.node_count(), 35);
        for node in 0..35 {
            assert_eq!(g.node_of(&g.multi_index(node)), node);
        }
        assert_eq!(g.coords(g.center_node()), alloc::vec![0.5, 1.0]);
        assert!(g.is_interior(g.center_node(), 2));
        assert!(!g.is_interior(0, 1));
    }

    #[test]
    fn rejects_short_or_degenerate_axes() {
        assert!(Grid::new(alloc::vec![Axis::span(0.0, 1.0, 4)]).is_err());
        assert!(Grid::new(alloc::vec![Axis { start: 0.0, spacing: 0.0, len: 9 }]).is_err());
    }
}
