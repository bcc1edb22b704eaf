use alloc::vec;
use alloc::vec::Vec;

use super::{d1, GeometryFields, ScalarField, SurfacePatch};
use crate::math::dot;
use crate::{Error, Result};

/// An ambient vector per node (`ambient` interleaved components).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub ambient: usize,
    pub values: Vec<f64>,
}

impl TangentField {
    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.ambient..(node + 1) * self.ambient]
    }
}

fn check(fields: &GeometryFields, f: &ScalarField) -> Result<()> {
    f.check_len(fields.node_count())
}

/// Parameter derivatives `∂_j f` for every axis.
fn partials(patch_grid: &super::Grid, f: &ScalarField) -> Vec<Vec<f64>> {
    (0..patch_grid.dim()).map(|j| d1(patch_grid, &f.values, 1, j)).collect()
}

/// `∇f = g^{ij} ∂_j f ∂_i F` as an ambient vector at every node.
pub fn gradient(patch: &SurfacePatch, fields: &GeometryFields, f: &ScalarField) -> Result<TangentField> {
    check(fields, f)?;
    let n = fields.dim;
    let m = fields.ambient;
    let df = partials(&patch.grid, f);
    let mut values = vec![0.0; fields.node_count() * m];
    for node in 0..fields.node_count() {
        let g_inv = fields.g_inv(node);
        let out = &mut values[node * m..(node + 1) * m];
        for i in 0..n {
            let coef: f64 = (0..n).map(|j| g_inv[i * n + j] * df[j][node]).sum();
            for (o, t) in out.iter_mut().zip(fields.tangent(node, i)) {
                *o += coef * t;
            }
        }
    }
    Ok(TangentField { ambient: m, values })
}

/// Divergence-form Laplace–Beltrami operator
/// `(1/√det g) ∂_i(√det g g^{ij} ∂_j f)` with nested central differences.
pub fn laplace_beltrami(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    f: &ScalarField,
) -> Result<ScalarField> {
    check(fields, f)?;
    let n = fields.dim;
    let nodes = fields.node_count();
    let df = partials(&patch.grid, f);
    let mut result = vec![0.0; nodes];
    let mut flux = vec![0.0; nodes];
    for i in 0..n {
        for node in 0..nodes {
            let g_inv = fields.g_inv(node);
            flux[node] =
                fields.sqrt_det[node] * (0..n).map(|j| g_inv[i * n + j] * df[j][node]).sum::<f64>();
        }
        let div = d1(&patch.grid, &flux, 1, i);
        for node in 0..nodes {
            result[node] += div[node];
        }
    }
    for (r, s) in result.iter_mut().zip(&fields.sqrt_det) {
        *r /= s;
    }
    Ok(ScalarField::new(result))
}

/// `Lf = Δf + ½⟨F, ∇f⟩ + (|A|² − ½) f`.
pub fn stability_operator(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    f: &ScalarField,
) -> Result<ScalarField> {
    let lap = laplace_beltrami(patch, fields, f)?;
    let grad = gradient(patch, fields, f)?;
    let values = (0..fields.node_count())
        .map(|node| {
            lap.values[node]
                + 0.5 * dot(patch.point(node), grad.at(node))
                + (fields.norm_a_squared[node] - 0.5) * f.values[node]
        })
        .collect();
    Ok(ScalarField::new(values))
}

/// A vector field on the ambient space.
pub trait AmbientField {
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// A constant field `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField(pub Vec<f64>);

impl AmbientField for ConstantField {
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

/// The rotational Killing field `R(x) = ⟨x, a⟩ b − ⟨x, b⟩ a` turning the
/// plane spanned by orthonormal `a, b`; it fixes the orthogonal complement
/// pointwise. For `a = e_1, b = e_2` this is `−x²∂_1 + x¹∂_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationField {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl RotationField {
    /// Rotation in the coordinate plane `(e_p, e_q)` of `ℝ^ambient`
    /// (zero-based indices).
    pub fn plane(ambient: usize, p: usize, q: usize) -> Result<Self> {
        if p == q || p >= ambient || q >= ambient {
            return Err(Error::Domain(alloc::format!(
                "invalid rotation plane ({p}, {q}) in dimension {ambient}"
            )));
        }
        let mut a = vec![0.0; ambient];
        let mut b = vec![0.0; ambient];
        a[p] = 1.0;
        b[q] = 1.0;
        Ok(RotationField { a, b })
    }

    /// A rotation fixing the coordinate axis `e_k` (zero-based): the plane of
    /// the two highest-indexed coordinates other than `k`. In `ℝ³` this is
    /// the usual rotation about `e_k`; for `k = n` it fixes `e_{n+1}`, and
    /// for `k < n` it moves `e_{n+1}`.
    pub fn about_axis(ambient: usize, k: usize) -> Result<Self> {
        if ambient < 3 || k >= ambient {
            return Err(Error::Domain(alloc::format!(
                "axis e_{} undefined in dimension {ambient}",
                k + 1
            )));
        }
        let mut others = (0..ambient).rev().filter(|&c| c != k);
        let q = others.next().unwrap();
        let p = others.next().unwrap();
        Self::plane(ambient, p, q)
    }
}

impl AmbientField for RotationField {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let xa = dot(x, &self.a);
        let xb = dot(x, &self.b);
        for ((o, a), b) in out.iter_mut().zip(&self.a).zip(&self.b) {
            *o = xa * b - xb * a;
        }
    }
}

/// `⟨W(F), ν⟩` at every node.
pub fn support_function(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    field: &dyn AmbientField,
) -> ScalarField {
    let mut w = vec![0.0; patch.ambient];
    let values = (0..patch.node_count())
        .map(|node| {
            field.eval(patch.point(node), &mut w);
            dot(&w, fields.nu(node))
        })
        .collect();
    ScalarField::new(values)
}
