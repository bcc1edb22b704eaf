use alloc::vec;
use alloc::vec::Vec;

use super::{d1, d2, SurfacePatch};
use crate::linalg::{det_in_place, invert_into};
use crate::math::{dot, sqrt};
use crate::{Error, Result};

/// Nodes with `det g` below this are treated as immersion failures.
pub const DEFAULT_DET_FLOOR: f64 = 1e-12;

/// Per-node extrinsic state of a patch. Matrices are `n × n` row-major,
/// vectors have `n + 1` components, and `tangents` holds `∂_i F` for
/// `i = 0..n` consecutively.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometryFields {
    pub dim: usize,
    pub ambient: usize,
    pub tangents: Vec<f64>,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub sqrt_det: Vec<f64>,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub norm_a_squared: Vec<f64>,
}

impl GeometryFields {
    pub fn node_count(&self) -> usize {
        self.sqrt_det.len()
    }

    pub fn nu(&self, node: usize) -> &[f64] {
        &self.nu[node * self.ambient..(node + 1) * self.ambient]
    }

    pub fn tangent(&self, node: usize, i: usize) -> &[f64] {
        let m = self.ambient;
        let at = (node * self.dim + i) * m;
        &self.tangents[at..at + m]
    }

    pub fn g(&self, node: usize) -> &[f64] {
        let nn = self.dim * self.dim;
        &self.g[node * nn..(node + 1) * nn]
    }

    pub fn g_inv(&self, node: usize) -> &[f64] {
        let nn = self.dim * self.dim;
        &self.g_inv[node * nn..(node + 1) * nn]
    }

    pub fn h(&self, node: usize) -> &[f64] {
        let nn = self.dim * self.dim;
        &self.h[node * nn..(node + 1) * nn]
    }

    /// The same geometry with the opposite unit normal.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.nu.iter_mut().for_each(|v| *v = -*v);
        out.h.iter_mut().for_each(|v| *v = -*v);
        out.mean_curvature.iter_mut().for_each(|v| *v = -*v);
        out
    }
}

/// Generalized cross product of `n` vectors in `ℝ^{n+1}`: the vector `N`
/// with `⟨N, x⟩ = det[T_1, …, T_n, x]`.
fn cofactor_normal(tangents: &[f64], n: usize, out: &mut [f64], minor: &mut [f64]) {
    let m = n + 1;
    for k in 0..m {
        for i in 0..n {
            let mut col = 0;
            for c in 0..m {
                if c != k {
                    minor[i * n + col] = tangents[i * m + c];
                    col += 1;
                }
            }
        }
        let sign = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
        out[k] = sign * det_in_place(&mut minor[..n * n], n);
    }
}

pub fn fundamental_forms(patch: &SurfacePatch) -> Result<GeometryFields> {
    fundamental_forms_with_floor(patch, DEFAULT_DET_FLOOR)
}

pub fn fundamental_forms_with_floor(patch: &SurfacePatch, det_floor: f64) -> Result<GeometryFields> {
    let grid = &patch.grid;
    let n = grid.dim();
    let m = patch.ambient;
    let nodes = grid.node_count();

    let first: Vec<Vec<f64>> = (0..n).map(|i| d1(grid, &patch.points, m, i)).collect();
    // second[i][j] for i <= j
    let mut second: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n];
    for i in 0..n {
        second[i] = vec![Vec::new(); n];
        for j in i..n {
            second[i][j] = if i == j {
                d2(grid, &patch.points, m, i)
            } else {
                d1(grid, &first[j], m, i)
            };
        }
    }

    let nn = n * n;
    let mut out = GeometryFields {
        dim: n,
        ambient: m,
        tangents: vec![0.0; nodes * n * m],
        g: vec![0.0; nodes * nn],
        g_inv: vec![0.0; nodes * nn],
        sqrt_det: vec![0.0; nodes],
        h: vec![0.0; nodes * nn],
        nu: vec![0.0; nodes * m],
        mean_curvature: vec![0.0; nodes],
        norm_a_squared: vec![0.0; nodes],
    };

    let mut work = Vec::with_capacity(nn);
    let mut minor = vec![0.0; nn];
    let mut normal = vec![0.0; m];
    let mut shape = vec![0.0; nn];

    for node in 0..nodes {
        let t = &mut out.tangents[node * n * m..(node + 1) * n * m];
        for i in 0..n {
            t[i * m..(i + 1) * m].copy_from_slice(&first[i][node * m..(node + 1) * m]);
        }
        let g = &mut out.g[node * nn..(node + 1) * nn];
        for i in 0..n {
            for j in i..n {
                let v = dot(&t[i * m..(i + 1) * m], &t[j * m..(j + 1) * m]);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        work.clear();
        work.extend_from_slice(g);
        let det = det_in_place(&mut work, n);
        if !(det >= det_floor) {
            return Err(Error::DegenerateMetric { node, det });
        }
        out.sqrt_det[node] = sqrt(det);
        invert_into(g, n, &mut out.g_inv[node * nn..(node + 1) * nn], &mut work)?;

        cofactor_normal(t, n, &mut normal, &mut minor);
        let len = sqrt(dot(&normal, &normal));
        for (dst, v) in out.nu[node * m..(node + 1) * m].iter_mut().zip(&normal) {
            *dst = v / len;
        }
    }

    if let Some(reference) = &patch.orientation {
        let c = grid.center_node();
        if dot(out.nu(c), reference) < 0.0 {
            out.nu.iter_mut().for_each(|v| *v = -*v);
        }
    }

    for node in 0..nodes {
        let nu = &out.nu[node * m..(node + 1) * m];
        let h = &mut out.h[node * nn..(node + 1) * nn];
        for i in 0..n {
            for j in i..n {
                let v = dot(&second[i][j][node * m..(node + 1) * m], nu);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        let g_inv = &out.g_inv[node * nn..(node + 1) * nn];
        for i in 0..n {
            for j in 0..n {
                shape[i * n + j] = (0..n).map(|k| g_inv[i * n + k] * h[k * n + j]).sum();
            }
        }
        out.mean_curvature[node] = (0..n).map(|i| shape[i * n + i]).sum();
        out.norm_a_squared[node] = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| shape[i * n + j] * shape[j * n + i])
            .sum();
    }
    Ok(out)
}
