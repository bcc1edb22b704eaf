//! Reference patches with known geometry: hyperplanes, round spheres and
//! graphs.

use alloc::vec;
use alloc::vec::Vec;

use super::{Axis, Grid, SurfacePatch};
use crate::cone::{hyperspherical_chart, SphereChart};
use crate::Result;

/// The coordinate hyperplane `x^{n+1} = 0` over `[-half, half]ⁿ`, oriented
/// by `e_{n+1}`.
pub fn hyperplane(n: usize, half: f64, nodes: usize) -> Result<SurfacePatch> {
    graph(n, &vec![0.0; n], half, nodes, |_| 0.0)
}

/// The graph `x^{n+1} = f(x)` over the cube `center + [-half, half]ⁿ`,
/// oriented upward.
pub fn graph(
    n: usize,
    center: &[f64],
    half: f64,
    nodes: usize,
    f: impl Fn(&[f64]) -> f64,
) -> Result<SurfacePatch> {
    let axes = (0..n).map(|i| Axis::span(center[i] - half, center[i] + half, nodes)).collect();
    let grid = Grid::new(axes)?;
    let mut up = vec![0.0; n + 1];
    up[n] = 1.0;
    Ok(SurfacePatch::from_fn(grid, |c, out| {
        out[..n].copy_from_slice(c);
        out[n] = f(c);
        Ok(())
    })?
    .with_orientation(up))
}

/// A patch of the round sphere of radius `radius` centred at the origin of
/// `ℝ^{n+1}`, in hyperspherical coordinates around `center` (`n` angles),
/// with the normal pointing to the centre.
pub fn sphere(n: usize, radius: f64, center: &[f64], half: f64, nodes: usize) -> Result<SurfacePatch> {
    let axes: Vec<Axis> =
        (0..n).map(|i| Axis::span(center[i] - half, center[i] + half, nodes)).collect();
    let grid = Grid::new(axes)?;
    let inward: Vec<f64> = hyperspherical_chart(&SphereChart::new(center.to_vec()))?
        .phi
        .iter()
        .map(|v| -v)
        .collect();
    Ok(SurfacePatch::from_fn(grid, |c, out| {
        let frame = hyperspherical_chart(&SphereChart::with_margin(c.to_vec(), 0.0))?;
        for (o, p) in out.iter_mut().zip(&frame.phi) {
            *o = radius * p;
        }
        Ok(())
    })?
    .with_orientation(inward))
}
