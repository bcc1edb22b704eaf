//! Normal graphs `F = F̌ + u ν̌` over the cone `C_α` in closed form, and
//! annulus-by-annulus asymptotics of sampled ends.
//!
//! With `Z = sin α − (u/r) cos α` the metric is `g = M + ηηᵀ`,
//! `M = diag(1, r²Z²λ_i)`, `η = (∂_r u, ∂_θ u)`, inverted by Sherman–Morrison.
//! The normal is
//!
//! ```text
//! N = Z ν̌ − (1/r) Σ_i (∂_{θ_i}u / λ_i) ∂_{θ_i}Φ − Z ∂_r u ∂_r F̌
//! ```
//!
//! The `1/λ_i` weight makes `N` orthogonal to `∂_{θ_i}F` when the chart is
//! not orthonormal (`n ≥ 3`). The second fundamental form follows from
//! `h = ⟨∂²F, N⟩/|N|` with that normal:
//!
//! ```text
//! |N| h_rr = Z ∂²_rr u
//! |N| h_rj = Z ∂²_{rθ_j} u + (cos α ∂_r u − sin α) ∂_{θ_j}u / r
//! |N| h_ij = Z ∂²_{θ_iθ_j} u + (2 cos α / r) ∂_{θ_i}u ∂_{θ_j}u + rZ ⟨∂²_{ij}Φ, N⟩
//! ```
//!
//! For `λ ≡ 1` these coincide with the unweighted textbook expressions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{cone_frame, ConeSpec, SphereChart};
use crate::linalg::{fit_slope, sherman_morrison_diag};
use crate::math::{abs, cos, dot, ln, norm, powf, sqrt};
use crate::surface::{
    support_function, Axis, GeometryFields, Grid, RotationField, SurfacePatch,
};
use crate::{Error, Result};

/// Inner radius `ρ` of the graph domain unless a function says otherwise.
pub const DEFAULT_INNER_RADIUS: f64 = 1.0;

/// Value and first two derivatives of `u` in `(r, θ_1, …, θ_{n−1})`.
/// `u_tt` is `(n−1) × (n−1)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphJet {
    pub u: f64,
    pub u_r: f64,
    pub u_t: Vec<f64>,
    pub u_rr: f64,
    pub u_rt: Vec<f64>,
    pub u_tt: Vec<f64>,
}

impl GraphJet {
    pub fn zero(angles: usize) -> Self {
        GraphJet {
            u: 0.0,
            u_r: 0.0,
            u_t: vec![0.0; angles],
            u_rr: 0.0,
            u_rt: vec![0.0; angles],
            u_tt: vec![0.0; angles * angles],
        }
    }
}

/// A function on `C_α \ B_ρ` together with its derivatives.
pub trait GraphFunction {
    fn value(&self, r: f64, theta: &[f64]) -> f64;

    fn jet(&self, r: f64, theta: &[f64]) -> GraphJet;

    fn inner_radius(&self) -> f64 {
        DEFAULT_INNER_RADIUS
    }
}

/// `u ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGraph(pub f64);

impl GraphFunction for ConstantGraph {
    fn value(&self, _r: f64, _theta: &[f64]) -> f64 {
        self.0
    }

    fn jet(&self, _r: f64, theta: &[f64]) -> GraphJet {
        GraphJet { u: self.0, ..GraphJet::zero(theta.len()) }
    }
}

/// One angular factor `b cos(k·θ + c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMode {
    pub weight: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

/// `u = a r^{−p} (1 + Σ_m b_m cos(k_m·θ + c_m))`, a decaying graph with
/// analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGraph {
    pub amplitude: f64,
    pub power: f64,
    pub modes: Vec<AngularMode>,
    pub inner_radius: f64,
}

impl PowerGraph {
    pub fn radial(amplitude: f64, power: f64) -> Self {
        PowerGraph { amplitude, power, modes: Vec::new(), inner_radius: DEFAULT_INNER_RADIUS }
    }

    pub fn with_mode(mut self, weight: f64, wave: Vec<f64>, phase: f64) -> Self {
        self.modes.push(AngularMode { weight, wave, phase });
        self
    }

    /// Angular factor, its gradient and Hessian.
    fn angular(&self, theta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let d = theta.len();
        let mut a = 1.0;
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for mode in &self.modes {
            let arg = dot(&mode.wave, theta) + mode.phase;
            let (c, s) = (cos(arg), crate::math::sin(arg));
            a += mode.weight * c;
            for i in 0..d {
                grad[i] -= mode.weight * s * mode.wave[i];
                for j in 0..d {
                    hess[i * d + j] -= mode.weight * c * mode.wave[i] * mode.wave[j];
                }
            }
        }
        (a, grad, hess)
    }
}

impl GraphFunction for PowerGraph {
    fn value(&self, r: f64, theta: &[f64]) -> f64 {
        self.amplitude * powf(r, -self.power) * self.angular(theta).0
    }

    fn jet(&self, r: f64, theta: &[f64]) -> GraphJet {
        let p = self.power;
        let radial = self.amplitude * powf(r, -p);
        let radial_r = -p * radial / r;
        let radial_rr = p * (p + 1.0) * radial / (r * r);
        let (a, grad, hess) = self.angular(theta);
        GraphJet {
            u: radial * a,
            u_r: radial_r * a,
            u_t: grad.iter().map(|g| radial * g).collect(),
            u_rr: radial_rr * a,
            u_rt: grad.iter().map(|g| radial_r * g).collect(),
            u_tt: hess.iter().map(|h| radial * h).collect(),
        }
    }

    fn inner_radius(&self) -> f64 {
        self.inner_radius
    }
}

/// A graph function given only by values; derivatives come from central
/// differences with the given step.
pub struct SampledGraph<F> {
    pub f: F,
    pub step: f64,
    pub inner_radius: f64,
}

impl<F: Fn(f64, &[f64]) -> f64> SampledGraph<F> {
    pub fn new(f: F) -> Self {
        SampledGraph { f, step: 1e-4, inner_radius: DEFAULT_INNER_RADIUS }
    }
}

impl<F: Fn(f64, &[f64]) -> f64> GraphFunction for SampledGraph<F> {
    fn value(&self, r: f64, theta: &[f64]) -> f64 {
        (self.f)(r, theta)
    }

    fn jet(&self, r: f64, theta: &[f64]) -> GraphJet {
        finite_difference_jet(self, r, theta, self.step)
    }

    fn inner_radius(&self) -> f64 {
        self.inner_radius
    }
}

/// Second-order central-difference jet of any graph function's values.
pub fn finite_difference_jet(gf: &dyn GraphFunction, r: f64, theta: &[f64], step: f64) -> GraphJet {
    let d = theta.len();
    // coordinate 0 is r, 1..=d are angles
    let eval = |shift: &[(usize, f64)]| -> f64 {
        let mut rr = r;
        let mut t = theta.to_vec();
        for &(k, delta) in shift {
            if k == 0 {
                rr += delta;
            } else {
                t[k - 1] += delta;
            }
        }
        gf.value(rr, &t)
    };
    let h = step;
    let center = eval(&[]);
    let first = |k: usize| (eval(&[(k, h)]) - eval(&[(k, -h)])) / (2.0 * h);
    let second = |a: usize, b: usize| -> f64 {
        if a == b {
            (eval(&[(a, h)]) - 2.0 * center + eval(&[(a, -h)])) / (h * h)
        } else {
            (eval(&[(a, h), (b, h)]) - eval(&[(a, h), (b, -h)]) - eval(&[(a, -h), (b, h)])
                + eval(&[(a, -h), (b, -h)]))
                / (4.0 * h * h)
        }
    };
    GraphJet {
        u: center,
        u_r: first(0),
        u_t: (1..=d).map(first).collect(),
        u_rr: second(0, 0),
        u_rt: (1..=d).map(|k| second(0, k)).collect(),
        u_tt: (0..d * d).map(|ij| second(ij / d + 1, ij % d + 1)).collect(),
    }
}

/// Largest discrepancy between a function's own jet and its
/// finite-difference jet over the given sample points.
pub fn jet_consistency(gf: &dyn GraphFunction, points: &[(f64, Vec<f64>)], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (r, theta) in points {
        let a = gf.jet(*r, theta);
        let b = finite_difference_jet(gf, *r, theta, step);
        let scalars = [(a.u, b.u), (a.u_r, b.u_r), (a.u_rr, b.u_rr)];
        for (x, y) in scalars {
            worst = worst.max(abs(x - y));
        }
        for (x, y) in a.u_t.iter().chain(&a.u_rt).chain(&a.u_tt).zip(b.u_t.iter().chain(&b.u_rt).chain(&b.u_tt)) {
            worst = worst.max(abs(x - y));
        }
    }
    worst
}

/// `Z = sin α − (u/r) cos α`.
pub fn z_factor(spec: &ConeSpec, r: f64, u: f64) -> f64 {
    spec.sin_alpha() - u / r * spec.cos_alpha()
}

fn checked_z(spec: &ConeSpec, r: f64, u: f64) -> Result<f64> {
    let z = z_factor(spec, r, u);
    if !(z > 0.0) {
        return Err(Error::ImmersionFailure(alloc::format!(
            "Z = {z} ≤ 0 at r = {r} (u = {u})"
        )));
    }
    Ok(z)
}

/// `M = diag(1, r²Z²λ_i)` (stored as its diagonal) and `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetricParts {
    pub m_diag: Vec<f64>,
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetric {
    pub parts: GraphMetricParts,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
}

pub fn graph_metric(
    spec: &ConeSpec,
    gf: &dyn GraphFunction,
    r: f64,
    chart: &SphereChart,
) -> Result<GraphMetric> {
    let frame = cone_frame(spec, r, chart)?;
    let jet = gf.jet(r, &chart.theta);
    let z = checked_z(spec, r, jet.u)?;
    let n = spec.n;
    let mut m_diag = vec![1.0; n];
    for i in 1..n {
        m_diag[i] = r * r * z * z * frame.chart.lambda[i - 1];
    }
    let mut eta = vec![jet.u_r];
    eta.extend_from_slice(&jet.u_t);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = eta[i] * eta[j] + if i == j { m_diag[i] } else { 0.0 };
        }
    }
    let g_inv = sherman_morrison_diag(&m_diag, &eta)?;
    Ok(GraphMetric { parts: GraphMetricParts { m_diag, eta }, g, g_inv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNormal {
    /// The non-unit normal `N`.
    pub n_vec: Vec<f64>,
    pub nu: Vec<f64>,
}

fn normal_from(spec: &ConeSpec, r: f64, frame: &crate::cone::ConeFrame, jet: &GraphJet, z: f64) -> Vec<f64> {
    let m = spec.n + 1;
    let mut out = vec![0.0; m];
    for k in 0..m {
        out[k] = z * frame.normal[k] - z * jet.u_r * frame.d_r[k];
    }
    for (i, ut) in jet.u_t.iter().enumerate() {
        let w = ut / (r * frame.chart.lambda[i]);
        for (o, d) in out.iter_mut().zip(frame.chart.dphi(i)) {
            *o -= w * d;
        }
    }
    out
}

pub fn graph_normal(
    spec: &ConeSpec,
    gf: &dyn GraphFunction,
    r: f64,
    chart: &SphereChart,
) -> Result<GraphNormal> {
    let frame = cone_frame(spec, r, chart)?;
    let jet = gf.jet(r, &chart.theta);
    let z = checked_z(spec, r, jet.u)?;
    let n_vec = normal_from(spec, r, &frame, &jet, z);
    let len = norm(&n_vec);
    let nu = n_vec.iter().map(|v| v / len).collect();
    Ok(GraphNormal { n_vec, nu })
}

/// Second fundamental form in `(r, θ)` coordinates, `n × n` row-major.
pub fn graph_second_form(
    spec: &ConeSpec,
    gf: &dyn GraphFunction,
    r: f64,
    chart: &SphereChart,
) -> Result<Vec<f64>> {
    let frame = cone_frame(spec, r, chart)?;
    let jet = gf.jet(r, &chart.theta);
    let z = checked_z(spec, r, jet.u)?;
    let n_vec = normal_from(spec, r, &frame, &jet, z);
    let len = norm(&n_vec);
    let (sa, ca) = (spec.sin_alpha(), spec.cos_alpha());
    let n = spec.n;
    let d = n - 1;
    let mut h = vec![0.0; n * n];
    h[0] = z * jet.u_rr / len;
    for j in 0..d {
        let v = (z * jet.u_rt[j] + (ca * jet.u_r - sa) * jet.u_t[j] / r) / len;
        h[j + 1] = v;
        h[(j + 1) * n] = v;
    }
    for i in 0..d {
        for j in 0..d {
            let curvature = r * z * dot(&embed(frame.chart.d2phi(i, j), n), &n_vec);
            h[(i + 1) * n + j + 1] = (z * jet.u_tt[i * d + j]
                + 2.0 * ca / r * jet.u_t[i] * jet.u_t[j]
                + curvature)
                / len;
        }
    }
    Ok(h)
}

/// `ℝⁿ → ℝ^{n+1}`, padding with a zero axis component.
fn embed(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[..n].copy_from_slice(v);
    out
}

/// Closed-form geometry at one point, bundled.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphGeometry {
    pub point: Vec<f64>,
    pub metric: GraphMetric,
    pub normal: GraphNormal,
    pub h: Vec<f64>,
    pub mean_curvature: f64,
    pub norm_a_squared: f64,
}

pub fn graph_geometry(
    spec: &ConeSpec,
    gf: &dyn GraphFunction,
    r: f64,
    chart: &SphereChart,
) -> Result<GraphGeometry> {
    let metric = graph_metric(spec, gf, r, chart)?;
    let normal = graph_normal(spec, gf, r, chart)?;
    let h = graph_second_form(spec, gf, r, chart)?;
    let n = spec.n;
    let shape = crate::linalg::matmul(&metric.g_inv, &h, n);
    let mean_curvature = (0..n).map(|i| shape[i * n + i]).sum();
    let norm_a_squared = (0..n * n).map(|k| shape[k] * shape[(k % n) * n + k / n]).sum();
    let frame = cone_frame(spec, r, chart)?;
    let u = gf.value(r, &chart.theta);
    let point = frame.point.iter().zip(&frame.normal).map(|(p, v)| p + u * v).collect();
    Ok(GraphGeometry { point, metric, normal, h, mean_curvature, norm_a_squared })
}

/// Samples `F = F̌ + u ν̌` on a grid over `(r, θ_1, …, θ_{n−1})`.
pub fn graph_embedding(spec: &ConeSpec, gf: &dyn GraphFunction, grid: Grid) -> Result<SurfacePatch> {
    if grid.dim() != spec.n {
        return Err(Error::Domain(alloc::format!(
            "grid has {} axes, cone dimension is {}",
            grid.dim(),
            spec.n
        )));
    }
    let rho = gf.inner_radius();
    if grid.axes[0].start < rho {
        return Err(Error::Domain(alloc::format!(
            "grid starts at r = {} inside the inner radius {rho}",
            grid.axes[0].start
        )));
    }
    let center = grid.coords(grid.center_node());
    let reference = cone_frame(spec, center[0], &SphereChart::new(center[1..].to_vec()))?.normal;
    let patch = SurfacePatch::from_fn(grid, |c, out| {
        let r = c[0];
        let theta = &c[1..];
        let frame = cone_frame(spec, r, &SphereChart::new(theta.to_vec()))?;
        let u = gf.value(r, theta);
        checked_z(spec, r, u)?;
        for ((o, p), v) in out.iter_mut().zip(&frame.point).zip(&frame.normal) {
            *o = p + u * v;
        }
        Ok(())
    })?;
    Ok(patch.with_orientation(reference))
}

/// A grid of `nodes` points per axis with spacing `step`, centred on
/// `(r, θ)`.
pub fn local_grid(r: f64, theta: &[f64], step: f64, nodes: usize) -> Result<Grid> {
    let mut axes = vec![Axis::centered(r, step, nodes)];
    axes.extend(theta.iter().map(|&t| Axis::centered(t, step, nodes)));
    Grid::new(axes)
}

/// `[r₀, 2r₀], [2r₀, 4r₀], …` with `count` entries.
pub fn dyadic_annuli(r0: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let lo = r0 * (1u64 << k) as f64;
            (lo, 2.0 * lo)
        })
        .collect()
}

/// One quantity on one annulus `r_min ≤ |F| < r_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnulusRow {
    pub annulus: [f64; 2],
    pub quantity: String,
    pub sup: f64,
    pub l2: f64,
    /// Least-squares slope of `log sup` against `log r` over all annuli of
    /// this quantity; absent when some sup vanishes.
    pub fitted_slope: Option<f64>,
}

/// Collects per-annulus sup and grid `L²` norms of node values over the
/// reported nodes of a patch.
pub struct AnnulusTable<'a> {
    patch: &'a SurfacePatch,
    radii: Vec<f64>,
    annuli: &'a [(f64, f64)],
    members: Vec<Vec<usize>>,
    pub rows: Vec<AnnulusRow>,
}

impl<'a> AnnulusTable<'a> {
    pub fn new(patch: &'a SurfacePatch, annuli: &'a [(f64, f64)], min_annuli: usize) -> Result<Self> {
        if annuli.len() < min_annuli {
            return Err(Error::InsufficientAnnuli { found: annuli.len(), required: min_annuli });
        }
        let radii = patch.radii();
        let reported = patch.reported_nodes();
        let members: Vec<Vec<usize>> = annuli
            .iter()
            .map(|&(lo, hi)| reported.iter().copied().filter(|&n| radii[n] >= lo && radii[n] < hi).collect())
            .collect();
        if let Some(k) = members.iter().position(Vec::is_empty) {
            return Err(Error::Domain(alloc::format!(
                "patch has no reported nodes in annulus [{}, {})",
                annuli[k].0,
                annuli[k].1
            )));
        }
        Ok(AnnulusTable { patch, radii, annuli, members, rows: Vec::new() })
    }

    pub fn radius(&self, node: usize) -> f64 {
        self.radii[node]
    }

    /// Adds one row per annulus for `|value(node)|` and returns the sups.
    pub fn push(&mut self, quantity: &str, value: impl Fn(usize) -> f64) -> Vec<f64> {
        let weight = self.patch.grid.cell_volume();
        let mut sups = Vec::new();
        let mut l2s = Vec::new();
        for nodes in &self.members {
            let mut sup: f64 = 0.0;
            let mut sum = 0.0;
            for &n in nodes {
                let v = abs(value(n));
                sup = sup.max(v);
                sum += v * v * weight;
            }
            sups.push(sup);
            l2s.push(sqrt(sum));
        }
        let slope = if sups.iter().all(|&s| s > 0.0) {
            let log_r: Vec<f64> = self.annuli.iter().map(|&(lo, hi)| ln(sqrt(lo * hi))).collect();
            let log_s: Vec<f64> = sups.iter().map(|&s| ln(s)).collect();
            fit_slope(&log_r, &log_s)
        } else {
            None
        };
        for (k, &(lo, hi)) in self.annuli.iter().enumerate() {
            self.rows.push(AnnulusRow {
                annulus: [lo, hi],
                quantity: quantity.into(),
                sup: sups[k],
                l2: l2s[k],
                fitted_slope: slope,
            });
        }
        sups
    }
}

/// A label for a rotation field: `rot(p,q)` with one-based indices of the
/// rotated coordinate plane, or a generic label for other planes.
pub fn rotation_label(field: &RotationField) -> String {
    let p = field.a.iter().position(|&v| v == 1.0);
    let q = field.b.iter().position(|&v| v == 1.0);
    match (p, q) {
        (Some(p), Some(q)) if field.a.iter().filter(|&&v| v != 0.0).count() == 1
            && field.b.iter().filter(|&&v| v != 0.0).count() == 1 =>
        {
            alloc::format!("f_R[e{}^e{}]", p + 1, q + 1)
        }
        _ => String::from("f_R[plane]"),
    }
}

/// Per-annulus sups of `|r²|A|² − (n−1)cot²α|`, `|f_R|` for each rotation,
/// `|H|` and `|A|`, with fitted log-log slopes. `r` is `|F|`.
pub fn asymptotics_report(
    spec: &ConeSpec,
    patch: &SurfacePatch,
    fields: &GeometryFields,
    axes: &[RotationField],
    annuli: &[(f64, f64)],
) -> Result<Vec<AnnulusRow>> {
    let mut table = AnnulusTable::new(patch, annuli, 3)?;
    let target = (spec.n - 1) as f64 * spec.cot_alpha() * spec.cot_alpha();
    let radii = patch.radii();
    table.push("r2_A2_minus_cone", |n| radii[n] * radii[n] * fields.norm_a_squared[n] - target);
    for axis in axes {
        let f = support_function(patch, fields, axis);
        table.push(&rotation_label(axis), |n| f.values[n]);
    }
    table.push("H", |n| fields.mean_curvature[n]);
    table.push("A", |n| sqrt(fields.norm_a_squared[n]));
    Ok(table.rows)
}

/// Sups of the six scaled derivative quantities of `u` that must tend to
/// zero for a `C²`-asymptotically conical end: `|u|`, `r|∂_r u|`,
/// `r²|∂²_rr u|`, `|∂_θ u|`, `r|∂²_{rθ} u|`, `|∂²_θθ u|` (maxima over angle
/// indices), per annulus. Derivatives are taken by finite differences of
/// the values of `u` at `samples_per_annulus` radii and the given angles.
pub fn decay_table(
    gf: &dyn GraphFunction,
    annuli: &[(f64, f64)],
    angles: &[Vec<f64>],
    samples_per_annulus: usize,
) -> Vec<[f64; 6]> {
    annuli
        .iter()
        .map(|&(lo, hi)| {
            let mut row = [0.0f64; 6];
            for k in 0..samples_per_annulus {
                let r = lo + (hi - lo) * (k as f64 + 0.5) / samples_per_annulus as f64;
                for theta in angles {
                    let jet = finite_difference_jet(gf, r, theta, 1e-3 * r.min(1.0));
                    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(abs(*x)));
                    let entries = [
                        abs(jet.u),
                        r * abs(jet.u_r),
                        r * r * abs(jet.u_rr),
                        max_abs(&jet.u_t),
                        r * max_abs(&jet.u_rt),
                        max_abs(&jet.u_tt),
                    ];
                    for (acc, e) in row.iter_mut().zip(entries) {
                        *acc = acc.max(e);
                    }
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests;
