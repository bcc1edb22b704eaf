//! Residual checks of the self-expander equation, the elliptic identities
//! satisfied on self-expanders, the first-variation formulas, and the
//! quantitative ingredients of the Liouville argument.
//!
//! Single-patch checks return a [`ResidualSample`]; a refinement ladder of
//! samples becomes a [`ResidualReport`] with a fitted convergence order.
//! Sup and `L²` norms range over the reported nodes of the patch, the `L²`
//! norm weighted by the parameter cell volume.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::conegraph::{AnnulusRow, AnnulusTable};
use crate::linalg::fit_slope;
use crate::math::{abs, dot, ln, sqrt};
use crate::surface::{
    fundamental_forms, gradient, laplace_beltrami, stability_operator, support_function,
    ConstantField, GeometryFields, RotationField, ScalarField, SurfacePatch,
};
use crate::{Error, Result};

/// Target size of identity residuals on the finest grids.
pub const IDENTITY_TOLERANCE: f64 = 1e-3;

/// Identities are only evaluated on patches whose expander residual is
/// below this.
pub const EXPANDER_GATE: f64 = 100.0 * IDENTITY_TOLERANCE;

/// Residual sups below this are treated as exact; no order is fitted.
/// Second differences of a field that vanishes to machine precision land
/// near `1e-11` on the finest grids in use.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// Norms of one residual field on one patch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualSample {
    pub spacing: f64,
    pub sup: f64,
    pub l2: f64,
    /// The residual at every node, reported or not.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub values: Vec<f64>,
}

impl ResidualSample {
    pub fn from_values(patch: &SurfacePatch, values: Vec<f64>) -> Self {
        let weight = patch.grid.cell_volume();
        let mut sup: f64 = 0.0;
        let mut sum = 0.0;
        for node in patch.reported_nodes() {
            let v = abs(values[node]);
            sup = sup.max(v);
            sum += v * v * weight;
        }
        ResidualSample { spacing: patch.grid.max_spacing(), sup, l2: sqrt(sum), values }
    }
}

/// One identity across a refinement ladder.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub identity_name: String,
    pub resolutions: Vec<f64>,
    pub sup_residuals: Vec<f64>,
    pub l2_residuals: Vec<f64>,
    /// Slope of `log sup` against `log spacing`; absent when every residual
    /// is at roundoff.
    pub fitted_order: Option<f64>,
    pub fitted_order_l2: Option<f64>,
}

fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if y.iter().all(|&v| v <= ROUNDOFF_FLOOR) || y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|&v| ln(v)).collect();
    let ly: Vec<f64> = y.iter().map(|&v| ln(v)).collect();
    fit_slope(&lx, &ly)
}

impl ResidualReport {
    pub fn from_samples(name: &str, samples: &[ResidualSample]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain(format!(
                "a residual report needs at least two resolutions, got {}",
                samples.len()
            )));
        }
        let resolutions: Vec<f64> = samples.iter().map(|s| s.spacing).collect();
        let sup_residuals: Vec<f64> = samples.iter().map(|s| s.sup).collect();
        let l2_residuals: Vec<f64> = samples.iter().map(|s| s.l2).collect();
        Ok(ResidualReport {
            identity_name: name.into(),
            fitted_order: log_slope(&resolutions, &sup_residuals),
            fitted_order_l2: log_slope(&resolutions, &l2_residuals),
            resolutions,
            sup_residuals,
            l2_residuals,
        })
    }

    pub fn finest_sup(&self) -> f64 {
        self.sup_residuals.last().copied().unwrap_or(f64::NAN)
    }

    /// Fitted order at least `order` in both norms, or every residual at
    /// roundoff.
    pub fn converges_at(&self, order: f64) -> bool {
        let exact = self.sup_residuals.iter().all(|&v| v <= ROUNDOFF_FLOOR);
        exact
            || (self.fitted_order.is_some_and(|q| q >= order)
                && self.fitted_order_l2.is_some_and(|q| q >= order))
    }
}

/// `|H − ½⟨F, ν⟩|` at every node.
pub fn expander_residual(patch: &SurfacePatch, fields: &GeometryFields) -> ResidualSample {
    let values = (0..patch.node_count())
        .map(|k| fields.mean_curvature[k] - 0.5 * dot(patch.point(k), fields.nu(k)))
        .collect();
    ResidualSample::from_values(patch, values)
}

/// Fails with `NotAnExpander` unless the expander residual is below `gate`.
pub fn expander_gate(patch: &SurfacePatch, fields: &GeometryFields, gate: f64) -> Result<f64> {
    let residual = expander_residual(patch, fields).sup;
    if residual <= gate {
        Ok(residual)
    } else {
        Err(Error::NotAnExpander { residual, gate })
    }
}

fn combine(fields: &GeometryFields, lf: &ScalarField, f: &ScalarField, shift: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..fields.node_count()).map(|k| lf.values[k] + shift(k) * f.values[k]).collect()
}

/// A named residual on one patch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NamedSample {
    pub name: String,
    pub sample: ResidualSample,
}

/// Residuals of the identities satisfied on self-expanders:
///
/// * `LH + H = ΔH + ½⟨F, ∇H⟩ + (|A|² + ½)H`,
/// * `Lf_R = Δf_R + ½⟨F, ∇f_R⟩ + (|A|² − ½)f_R` for each rotation,
/// * `L⟨V,ν⟩ + ½⟨V,ν⟩ = Δ⟨V,ν⟩ + ½⟨F, ∇⟨V,ν⟩⟩ + |A|²⟨V,ν⟩` for each
///   constant `V`.
pub fn identity_residuals(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    axes: &[RotationField],
    vectors: &[Vec<f64>],
    gate: f64,
) -> Result<Vec<NamedSample>> {
    expander_gate(patch, fields, gate)?;
    let mut out = Vec::new();
    let h = ScalarField::new(fields.mean_curvature.clone());
    let lh = stability_operator(patch, fields, &h)?;
    out.push(NamedSample {
        name: "laplace_H".into(),
        sample: ResidualSample::from_values(patch, combine(fields, &lh, &h, |_| 1.0)),
    });
    for axis in axes {
        let f = support_function(patch, fields, axis);
        let lf = stability_operator(patch, fields, &f)?;
        out.push(NamedSample {
            name: format!("laplace_f[{}]", crate::conegraph::rotation_label(axis)),
            sample: ResidualSample::from_values(patch, lf.values),
        });
    }
    for v in vectors {
        let f = support_function(patch, fields, &ConstantField(v.clone()));
        let lf = stability_operator(patch, fields, &f)?;
        out.push(NamedSample {
            name: format!("laplace_V[{v:?}]"),
            sample: ResidualSample::from_values(patch, combine(fields, &lf, &f, |_| 0.5)),
        });
    }
    Ok(out)
}

/// `(L + ½)f − λf` at every node.
pub fn eigen_residual(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    f: &ScalarField,
    lambda: f64,
) -> Result<ResidualSample> {
    let lf = stability_operator(patch, fields, f)?;
    Ok(ResidualSample::from_values(patch, combine(fields, &lf, f, |_| 0.5 - lambda)))
}

/// Residual of the equation for `u = f/(H + ε)` when `(L + ½)f = λf`:
///
/// ```text
/// Δu = ⟨−½F − 2∇(H+ε)/(H+ε), ∇u⟩ + f/(H+ε)² ((λ+½)H − ε(|A|² − λ))
/// ```
///
/// Gated on the expander equation and on the eigenfunction equation, both
/// at `gate`.
pub fn quotient_residual(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    f: &ScalarField,
    lambda: f64,
    epsilon: f64,
    gate: f64,
) -> Result<ResidualSample> {
    f.check_len(patch.node_count())?;
    let w: Vec<f64> = fields.mean_curvature.iter().map(|h| h + epsilon).collect();
    if let Some(node) = (0..w.len()).find(|&k| !(w[k] > 0.0)) {
        return Err(Error::NonPositiveDenominator { node, value: w[node] });
    }
    expander_gate(patch, fields, gate)?;
    let eigen = eigen_residual(patch, fields, f, lambda)?.sup;
    if !(eigen <= gate) {
        return Err(Error::EigenGate { residual: eigen, gate });
    }
    let u = ScalarField::new(f.values.iter().zip(&w).map(|(f, w)| f / w).collect());
    let w_field = ScalarField::new(w.clone());
    let lap_u = laplace_beltrami(patch, fields, &u)?;
    let grad_u = gradient(patch, fields, &u)?;
    let grad_w = gradient(patch, fields, &w_field)?;
    let values = (0..patch.node_count())
        .map(|k| {
            let drift: f64 = patch
                .point(k)
                .iter()
                .zip(grad_w.at(k))
                .zip(grad_u.at(k))
                .map(|((x, gw), gu)| (-0.5 * x - 2.0 * gw / w[k]) * gu)
                .sum();
            let h = fields.mean_curvature[k];
            let zeroth = f.values[k] / (w[k] * w[k])
                * ((lambda + 0.5) * h - epsilon * (fields.norm_a_squared[k] - lambda));
            lap_u.values[k] - drift - zeroth
        })
        .collect();
    Ok(ResidualSample::from_values(patch, values))
}

/// First-variation residuals for `∂F/∂s = φν`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariationSample {
    pub ds: f64,
    /// `|∂ν/∂s + ∇φ|`.
    pub normal: ResidualSample,
    /// `|∂H/∂s − (Δ + |A|²)φ|`.
    pub mean_curvature: ResidualSample,
}

/// Central differences in `s` of the normal and the mean curvature of
/// `F ± ds·φν`, compared with `−∇φ` and `(Δ + |A|²)φ` on the unperturbed
/// patch.
pub fn variation_check(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    phi: &ScalarField,
    ds: f64,
) -> Result<VariationSample> {
    phi.check_len(patch.node_count())?;
    let m = patch.ambient;
    let perturbed = |sign: f64| -> Result<GeometryFields> {
        let mut p = patch.clone();
        for k in 0..p.node_count() {
            for c in 0..m {
                p.points[k * m + c] += sign * ds * phi.values[k] * fields.nu(k)[c];
            }
        }
        fundamental_forms(&p).map_err(|e| match e {
            Error::DegenerateMetric { node, det } => Error::ImmersionFailure(format!(
                "perturbed patch degenerates at node {node} (det g = {det:e})"
            )),
            other => other,
        })
    };
    let plus = perturbed(1.0)?;
    let minus = perturbed(-1.0)?;
    let grad = gradient(patch, fields, phi)?;
    let lap = laplace_beltrami(patch, fields, phi)?;
    let mut normal = Vec::with_capacity(patch.node_count());
    let mut mean = Vec::with_capacity(patch.node_count());
    for k in 0..patch.node_count() {
        let mut sq = 0.0;
        for c in 0..m {
            let d = (plus.nu(k)[c] - minus.nu(k)[c]) / (2.0 * ds) + grad.at(k)[c];
            sq += d * d;
        }
        normal.push(sqrt(sq));
        let dh = (plus.mean_curvature[k] - minus.mean_curvature[k]) / (2.0 * ds);
        mean.push(dh - lap.values[k] - fields.norm_a_squared[k] * phi.values[k]);
    }
    Ok(VariationSample {
        ds,
        normal: ResidualSample::from_values(patch, normal),
        mean_curvature: ResidualSample::from_values(patch, mean),
    })
}

/// `ε = δ(λ + ½)/(C − λ)`.
pub fn liouville_epsilon(delta: f64, c: f64, lambda: f64) -> f64 {
    delta * (lambda + 0.5) / (c - lambda)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiouvilleCertificate {
    pub lambda: f64,
    /// `|A|² < λ` at every reported node with `|F| > r_split`.
    pub r_split: f64,
    /// `sup |A|²`.
    pub c: f64,
    /// Half the infimum of `H` over `|F| ≤ r_split`, so that `H > δ` there.
    pub delta: f64,
    pub epsilon: f64,
    /// `min ((λ + ½)H − ε(|A|² − λ))` over the reported nodes.
    pub econst_min: f64,
    pub econst_argmin: usize,
    pub valid: bool,
}

/// Builds `ε` from the patch and checks `(λ + ½)H − ε(|A|² − λ) > 0` node
/// by node. When `sup |A|² ≤ λ` every `ε > 0` works and `ε = 1` is used.
pub fn liouville_certificate(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    lambda: f64,
    gate: f64,
) -> Result<LiouvilleCertificate> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("no certificate for λ = {lambda} ≤ 0")));
    }
    let nodes = patch.reported_nodes();
    if nodes.is_empty() {
        return Err(Error::Domain("patch has no reported nodes".into()));
    }
    let h = &fields.mean_curvature;
    let a2 = &fields.norm_a_squared;
    if let Some(&node) = nodes.iter().find(|&&k| !(h[k] > 0.0)) {
        return Err(Error::NotMeanConvex { node, mean_curvature: h[node] });
    }
    expander_gate(patch, fields, gate)?;
    let radii = patch.radii();
    let outermost = nodes.iter().copied().max_by(|&a, &b| radii[a].total_cmp(&radii[b])).unwrap();
    if a2[outermost] >= lambda {
        return Err(Error::NoSplitRadius);
    }
    let r_split = nodes.iter().filter(|&&k| a2[k] >= lambda).map(|&k| radii[k]).fold(0.0, f64::max);
    let c = nodes.iter().map(|&k| a2[k]).fold(f64::NEG_INFINITY, f64::max);
    let inside: Vec<usize> = nodes.iter().copied().filter(|&k| radii[k] <= r_split).collect();
    let inf_h = if inside.is_empty() { &nodes } else { &inside }
        .iter()
        .map(|&k| h[k])
        .fold(f64::INFINITY, f64::min);
    let delta = 0.5 * inf_h;
    let epsilon = if c > lambda { liouville_epsilon(delta, c, lambda) } else { 1.0 };
    let (econst_argmin, econst_min) = nodes
        .iter()
        .map(|&k| (k, (lambda + 0.5) * h[k] - epsilon * (a2[k] - lambda)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    Ok(LiouvilleCertificate {
        lambda,
        r_split,
        c,
        delta,
        epsilon,
        econst_min,
        econst_argmin,
        valid: econst_min > 0.0,
    })
}

/// Per-annulus sups of one quantity and whether they decay.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecaySequence {
    pub quantity: String,
    pub sups: Vec<f64>,
    pub monotone: bool,
    pub below_floor: bool,
}

impl DecaySequence {
    pub fn pass(&self) -> bool {
        self.monotone && self.below_floor
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayReport {
    pub rows: Vec<AnnulusRow>,
    pub sequences: Vec<DecaySequence>,
}

impl DecayReport {
    pub fn pass(&self) -> bool {
        self.sequences.iter().all(DecaySequence::pass)
    }
}

/// Sups of `|A|`, `|H|` and `|f|` for each extra field over an annulus
/// ladder. A sequence passes when it is nonincreasing and its last entry is
/// below `floor`.
pub fn decay_check(
    patch: &SurfacePatch,
    fields: &GeometryFields,
    f_fields: &[(String, ScalarField)],
    annuli: &[(f64, f64)],
    floor: f64,
) -> Result<DecayReport> {
    let mut table = AnnulusTable::new(patch, annuli, 3)?;
    let mut sequences = Vec::new();
    let mut record = |quantity: &str, sups: Vec<f64>| {
        sequences.push(DecaySequence {
            quantity: quantity.into(),
            monotone: sups.windows(2).all(|w| w[1] <= w[0]),
            below_floor: sups.last().is_some_and(|&s| s < floor),
            sups,
        });
    };
    record("A", table.push("A", |k| sqrt(fields.norm_a_squared[k])));
    record("H", table.push("H", |k| fields.mean_curvature[k]));
    for (name, f) in f_fields {
        f.check_len(patch.node_count())?;
        record(name, table.push(name, |k| f.values[k]));
    }
    Ok(DecayReport { rows: table.rows, sequences })
}

/// `|H(cF) − H(F)/c|` at every node.
pub fn homothety_check(patch: &SurfacePatch, fields: &GeometryFields, c: f64) -> Result<ResidualSample> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("scale c = {c} must be positive")));
    }
    let scaled = fundamental_forms(&patch.scaled(c))?;
    let values = (0..patch.node_count())
        .map(|k| scaled.mean_curvature[k] - fields.mean_curvature[k] / c)
        .collect();
    Ok(ResidualSample::from_values(patch, values))
}

/// Checks that `F_t = √t F` moves by mean curvature: the normal speed
/// `⟨∂_t F_t, ν_t⟩`, by central differences of step `dt`, against
/// `H(F_t)`.
pub fn flow_check(patch: &SurfacePatch, t: f64, dt: f64) -> Result<ResidualSample> {
    if !(t > dt && dt > 0.0) {
        return Err(Error::Domain(format!("need t > dt > 0, got t = {t}, dt = {dt}")));
    }
    let at = fundamental_forms(&patch.scaled(sqrt(t)))?;
    let m = patch.ambient;
    let (hi, lo) = (sqrt(t + dt), sqrt(t - dt));
    let values = (0..patch.node_count())
        .map(|k| {
            let velocity: Vec<f64> = patch.point(k).iter().map(|x| x * (hi - lo) / (2.0 * dt)).collect();
            dot(&velocity[..m], at.nu(k)) - at.mean_curvature[k]
        })
        .collect();
    Ok(ResidualSample::from_values(patch, values))
}
