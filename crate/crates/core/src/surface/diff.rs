//! Second-order finite differences on a [`Grid`], applied to node arrays
//! holding `comps` interleaved components.
//!
//! Interior nodes use central stencils; the first and last node along an
//! axis use one-sided second-order stencils.

use alloc::vec;
use alloc::vec::Vec;

use super::Grid;

/// `∂/∂u_axis` of every component.
pub fn d1(grid: &Grid, values: &[f64], comps: usize, axis: usize) -> Vec<f64> {
    let stride = grid.stride(axis) * comps;
    let len = grid.axes[axis].len;
    let inv = 1.0 / (2.0 * grid.axes[axis].spacing);
    let mut out = vec![0.0; values.len()];
    for node in 0..grid.node_count() {
        let i = grid.index_along(node, axis);
        let at = node * comps;
        for c in 0..comps {
            let p = at + c;
            out[p] = if i == 0 {
                (-3.0 * values[p] + 4.0 * values[p + stride] - values[p + 2 * stride]) * inv
            } else if i + 1 == len {
                (3.0 * values[p] - 4.0 * values[p - stride] + values[p - 2 * stride]) * inv
            } else {
                (values[p + stride] - values[p - stride]) * inv
            };
        }
    }
    out
}

/// `∂²/∂u_axis²` of every component, compact three-point stencil inside.
pub fn d2(grid: &Grid, values: &[f64], comps: usize, axis: usize) -> Vec<f64> {
    let stride = grid.stride(axis) * comps;
    let len = grid.axes[axis].len;
    let h = grid.axes[axis].spacing;
    let inv = 1.0 / (h * h);
    let mut out = vec![0.0; values.len()];
    for node in 0..grid.node_count() {
        let i = grid.index_along(node, axis);
        let at = node * comps;
        for c in 0..comps {
            let p = at + c;
            out[p] = if i == 0 {
                (2.0 * values[p] - 5.0 * values[p + stride] + 4.0 * values[p + 2 * stride]
                    - values[p + 3 * stride])
                    * inv
            } else if i + 1 == len {
                (2.0 * values[p] - 5.0 * values[p - stride] + 4.0 * values[p - 2 * stride]
                    - values[p - 3 * stride])
                    * inv
            } else {
                (values[p + stride] - 2.0 * values[p] + values[p - stride]) * inv
            };
        }
    }
    out
}
