//! Exact geometry of the round cone `C_α ⊂ ℝ^{n+1}` about `e_{n+1}` and of
//! hyperspherical charts of the unit sphere.
//!
//! Coordinates on the cone are `(r, θ_1, …, θ_{n-1})` with
//! `F̌(r, ω) = (r cos α) e_{n+1} + (r sin α) Φ(ω)`. Everything here is closed
//! form and serves as ground truth for the finite-difference engine.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::math::{abs, cos, round, sin};
use crate::{Error, Result};

/// Default distance (radians) kept between chart angles and coordinate poles.
pub const DEFAULT_POLE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeSpec {
    /// Hypersurface dimension; the cone lives in `ℝ^{n+1}`.
    pub n: usize,
    /// Angle between the rays and the axis, in `(0, π/2]`.
    pub alpha: f64,
}

impl ConeSpec {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(alloc::format!("cone dimension n = {n} < 2")));
        }
        if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
            return Err(Error::Domain(alloc::format!(
                "cone angle {alpha} outside (0, π/2]"
            )));
        }
        Ok(ConeSpec { n, alpha })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn sin_alpha(&self) -> f64 {
        sin(self.alpha)
    }

    /// `cos α`, exactly zero for the hyperplane `α = π/2`.
    pub fn cos_alpha(&self) -> f64 {
        if self.alpha == FRAC_PI_2 {
            0.0
        } else {
            cos(self.alpha)
        }
    }

    pub fn cot_alpha(&self) -> f64 {
        self.cos_alpha() / self.sin_alpha()
    }

    /// `Ȟ(r) = (n−1) cot α / r`.
    pub fn mean_curvature(&self, r: f64) -> f64 {
        (self.n - 1) as f64 * self.cot_alpha() / r
    }

    /// `|Ǎ|²(r) = (n−1) cot²α / r²`.
    pub fn norm_a_squared(&self, r: f64) -> f64 {
        let c = self.cot_alpha();
        (self.n - 1) as f64 * c * c / (r * r)
    }

    /// Principal curvatures at radius `r`: one zero (radial) and `n − 1`
    /// copies of `cot α / r`.
    pub fn principal_curvatures(&self, r: f64) -> Vec<f64> {
        let mut k = vec![self.cot_alpha() / r; self.n];
        k[0] = 0.0;
        k
    }

    /// The unit vector `e_{n+1}` along the cone axis.
    pub fn axis(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.n + 1];
        e[self.n] = 1.0;
        e
    }
}

/// A point in a hyperspherical chart of `S^{dim} ⊂ ℝ^{dim+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereChart {
    pub theta: Vec<f64>,
    pub avoid_poles_margin: f64,
}

impl SphereChart {
    pub fn new(theta: Vec<f64>) -> Self {
        SphereChart { theta, avoid_poles_margin: DEFAULT_POLE_MARGIN }
    }

    pub fn with_margin(theta: Vec<f64>, margin: f64) -> Self {
        SphereChart { theta, avoid_poles_margin: margin }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Every angle but the last (periodic) one must stay `margin` away from
    /// the multiples of π where `λ` degenerates.
    pub fn check_poles(&self) -> Result<()> {
        let margin = self.avoid_poles_margin;
        for (index, &theta) in self.theta.iter().enumerate().take(self.dim().saturating_sub(1)) {
            let dist = abs(theta - PI * round(theta / PI));
            if !(dist >= margin) {
                return Err(Error::PoleProximity { index, theta, margin });
            }
        }
        Ok(())
    }
}

/// `Φ`, its first and second partials and the metric factors `λ_i` at a
/// chart point. With `d = dim` and `m = d + 1`: `dphi` is `d × m`
/// row-major and `d2phi` is `d × d × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartFrame {
    pub dim: usize,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl ChartFrame {
    pub fn dphi(&self, i: usize) -> &[f64] {
        let m = self.dim + 1;
        &self.dphi[i * m..(i + 1) * m]
    }

    pub fn d2phi(&self, i: usize, j: usize) -> &[f64] {
        let m = self.dim + 1;
        let at = (i * self.dim + j) * m;
        &self.d2phi[at..at + m]
    }
}

#[derive(Clone, Copy)]
enum Factor {
    Sin,
    Cos,
    One,
}

impl Factor {
    fn eval(self, t: f64, order: u8) -> f64 {
        match (self, order) {
            (Factor::One, 0) => 1.0,
            (Factor::One, _) => 0.0,
            (Factor::Sin, 0) => sin(t),
            (Factor::Sin, 1) => cos(t),
            (Factor::Sin, _) => -sin(t),
            (Factor::Cos, 0) => cos(t),
            (Factor::Cos, 1) => -sin(t),
            (Factor::Cos, _) => -cos(t),
        }
    }
}

/// Hyperspherical coordinates
/// `Φ_k = sin θ_1 ⋯ sin θ_{k-1} cos θ_k` (last component all sines), so that
/// `⟨∂_iΦ, ∂_jΦ⟩ = λ_i δ_ij` with `λ_i = ∏_{k<i} sin² θ_k`.
pub fn hyperspherical_chart(chart: &SphereChart) -> Result<ChartFrame> {
    chart.check_poles()?;
    let d = chart.dim();
    let m = d + 1;
    let theta = &chart.theta;
    let factor = |k: usize, a: usize| -> Factor {
        if a < k {
            Factor::Sin
        } else if a == k {
            Factor::Cos
        } else {
            Factor::One
        }
    };
    // orders[a] is the derivative order applied to angle a
    let component = |k: usize, orders: &[u8]| -> f64 {
        (0..d).map(|a| factor(k, a).eval(theta[a], orders[a])).product()
    };

    let mut orders = vec![0u8; d];
    let phi: Vec<f64> = (0..m).map(|k| component(k, &orders)).collect();

    let mut dphi = vec![0.0; d * m];
    for i in 0..d {
        orders[i] = 1;
        for k in 0..m {
            dphi[i * m + k] = component(k, &orders);
        }
        orders[i] = 0;
    }

    let mut d2phi = vec![0.0; d * d * m];
    for i in 0..d {
        for j in 0..d {
            orders[i] += 1;
            orders[j] += 1;
            for k in 0..m {
                d2phi[(i * d + j) * m + k] = component(k, &orders);
            }
            orders[i] = 0;
            orders[j] = 0;
        }
    }

    let mut lambda = vec![1.0; d];
    for i in 1..d {
        let s = sin(theta[i - 1]);
        lambda[i] = lambda[i - 1] * s * s;
    }

    Ok(ChartFrame { dim: d, phi, dphi, d2phi, lambda })
}

/// Position, radial tangent, angular tangents and upward unit normal of the
/// cone at `(r, ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFrame {
    pub point: Vec<f64>,
    pub d_r: Vec<f64>,
    /// `n − 1` vectors `∂F̌/∂θ_i = (r sin α) ∂Φ/∂θ_i`, each of length `n + 1`.
    pub d_theta: Vec<Vec<f64>>,
    pub normal: Vec<f64>,
    pub chart: ChartFrame,
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!("cone radius r = {r} must be positive")))
    }
}

fn check_chart_dim(spec: &ConeSpec, chart: &SphereChart) -> Result<()> {
    if chart.dim() + 1 != spec.n {
        return Err(Error::Domain(alloc::format!(
            "chart has {} angles, cone of dimension {} needs {}",
            chart.dim(),
            spec.n,
            spec.n - 1
        )));
    }
    Ok(())
}

pub fn cone_frame(spec: &ConeSpec, r: f64, chart: &SphereChart) -> Result<ConeFrame> {
    check_radius(r)?;
    check_chart_dim(spec, chart)?;
    let frame = hyperspherical_chart(chart)?;
    let (sa, ca) = (spec.sin_alpha(), spec.cos_alpha());
    let n = spec.n;

    let mut point = vec![0.0; n + 1];
    let mut d_r = vec![0.0; n + 1];
    let mut normal = vec![0.0; n + 1];
    for k in 0..n {
        point[k] = r * sa * frame.phi[k];
        d_r[k] = sa * frame.phi[k];
        normal[k] = -ca * frame.phi[k];
    }
    point[n] = r * ca;
    d_r[n] = ca;
    normal[n] = sa;

    let d_theta = (0..n - 1)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            for (k, dk) in frame.dphi(i).iter().enumerate() {
                v[k] = r * sa * dk;
            }
            v
        })
        .collect();

    Ok(ConeFrame { point, d_r, d_theta, normal, chart: frame })
}

/// First and second fundamental forms (`n × n`, coordinates `(r, θ)`),
/// mean curvature and `|A|²` of the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGeometry {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub mean_curvature: f64,
    pub norm_a_squared: f64,
}

pub fn cone_geometry(spec: &ConeSpec, r: f64, chart: &SphereChart) -> Result<ConeGeometry> {
    check_radius(r)?;
    check_chart_dim(spec, chart)?;
    let frame = hyperspherical_chart(chart)?;
    let n = spec.n;
    let (sa, ca) = (spec.sin_alpha(), spec.cos_alpha());
    let mut g = vec![0.0; n * n];
    let mut h = vec![0.0; n * n];
    g[0] = 1.0;
    for i in 1..n {
        let lam = frame.lambda[i - 1];
        g[i * n + i] = r * r * sa * sa * lam;
        h[i * n + i] = r * sa * ca * lam;
    }
    Ok(ConeGeometry {
        g,
        h,
        mean_curvature: spec.mean_curvature(r),
        norm_a_squared: spec.norm_a_squared(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::dot;
    use core::f64::consts::FRAC_PI_4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chart(rng: &mut ChaCha8Rng, dim: usize) -> SphereChart {
        let theta = (0..dim)
            .map(|i| {
                if i + 1 == dim {
                    rng.gen_range(-PI..PI)
                } else {
                    rng.gen_range(0.15..PI - 0.15)
                }
            })
            .collect();
        SphereChart::new(theta)
    }

    #[test]
    fn circle_chart() {
        let f = hyperspherical_chart(&SphereChart::new(vec![0.7])).unwrap();
        assert!((f.phi[0] - 0.7f64.cos()).abs() < 1e-15);
        assert!((f.phi[1] - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(f.lambda, vec![1.0]);
    }

    #[test]
    fn chart_identities_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=4 {
            for _ in 0..100 {
                let chart = random_chart(&mut rng, dim);
                let f = hyperspherical_chart(&chart).unwrap();
                assert!((dot(&f.phi, &f.phi) - 1.0).abs() < 1e-14);
                for i in 0..dim {
                    assert!(f.lambda[i] > 0.0 && f.lambda[i] <= 1.0);
                    for j in 0..dim {
                        let delta = if i == j { f.lambda[i] } else { 0.0 };
                        assert!((dot(f.dphi(i), f.dphi(j)) - delta).abs() < 1e-13);
                        assert!((dot(f.d2phi(i, j), &f.phi) + delta).abs() < 1e-13);
                    }
                }
                if dim == 2 {
                    let s = chart.theta[0].sin();
                    assert!((f.lambda[1] - s * s).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn chart_derivatives_match_finite_differences() {
        let chart = SphereChart::new(vec![0.9, 1.3, -0.4]);
        let f = hyperspherical_chart(&chart).unwrap();
        let step = 1e-5;
        for i in 0..3 {
            let mut plus = chart.clone();
            let mut minus = chart.clone();
            plus.theta[i] += step;
            minus.theta[i] -= step;
            let fp = hyperspherical_chart(&plus).unwrap();
            let fm = hyperspherical_chart(&minus).unwrap();
            for k in 0..4 {
                let fd = (fp.phi[k] - fm.phi[k]) / (2.0 * step);
                assert!((fd - f.dphi(i)[k]).abs() < 1e-9);
                for j in 0..3 {
                    let fd2 = (fp.dphi(j)[k] - fm.dphi(j)[k]) / (2.0 * step);
                    assert!((fd2 - f.d2phi(i, j)[k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn pole_is_rejected() {
        let err = hyperspherical_chart(&SphereChart::new(vec![0.01, 0.3])).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { index: 0, .. }));
        assert!(hyperspherical_chart(&SphereChart::new(vec![PI - 0.05, 0.3])).is_err());
        // the last angle is periodic and never a pole
        assert!(hyperspherical_chart(&SphereChart::new(vec![1.0, 0.0])).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(ConeSpec::new(1, 0.5).is_err());
        assert!(ConeSpec::new(2, 0.0).is_err());
        assert!(ConeSpec::new(2, 1.6).is_err());
        assert!(ConeSpec::new(2, FRAC_PI_2).is_ok());
    }

    #[test]
    fn hyperplane_normal_is_axis() {
        let spec = ConeSpec::new(3, FRAC_PI_2).unwrap();
        let f = cone_frame(&spec, 2.5, &SphereChart::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(f.normal, vec![0.0, 0.0, 0.0, 1.0]);
        let geo = cone_geometry(&spec, 2.5, &SphereChart::new(vec![1.0, 2.0])).unwrap();
        assert!(geo.h.iter().all(|&v| v == 0.0));
        assert_eq!(geo.mean_curvature, 0.0);
        assert_eq!(geo.norm_a_squared, 0.0);
    }

    #[test]
    fn quarter_cone_frame() {
        let spec = ConeSpec::new(2, FRAC_PI_4).unwrap();
        let f = cone_frame(&spec, 1.0, &SphereChart::new(vec![0.0])).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let expect_p = [h, 0.0, h];
        let expect_n = [-h, 0.0, h];
        for k in 0..3 {
            assert!((f.point[k] - expect_p[k]).abs() < 1e-15);
            assert!((f.normal[k] - expect_n[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_is_orthonormal_where_claimed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5);
            let spec = ConeSpec::new(n, rng.gen_range(0.05..FRAC_PI_2)).unwrap();
            let r = rng.gen_range(0.1..10.0);
            let f = cone_frame(&spec, r, &random_chart(&mut rng, n - 1)).unwrap();
            assert!((dot(&f.normal, &f.normal) - 1.0).abs() < 1e-12);
            assert!((dot(&f.d_r, &f.d_r) - 1.0).abs() < 1e-12);
            assert!(dot(&f.normal, &f.d_r).abs() < 1e-12);
            assert!(f.normal[n] > 0.0);
            for t in &f.d_theta {
                assert!(dot(&f.normal, t).abs() < 1e-12 * r);
                assert!(dot(&f.d_r, t).abs() < 1e-12 * r);
            }
            assert!((crate::math::norm(&f.point) - r).abs() < 1e-12 * r);
        }
    }

    #[test]
    fn closed_form_values() {
        let spec = ConeSpec::new(3, FRAC_PI_4).unwrap();
        assert!((spec.norm_a_squared(2.0) - 0.5).abs() < 1e-15);
        let spec = ConeSpec::new(2, PI / 6.0).unwrap();
        let geo = cone_geometry(&spec, 1.0, &SphereChart::new(vec![0.3])).unwrap();
        assert!((geo.mean_curvature - 3f64.sqrt()).abs() < 1e-14);
        // trace of g⁻¹h
        let trace: f64 = (0..2).map(|i| geo.h[i * 2 + i] / geo.g[i * 2 + i]).sum();
        assert!((trace - geo.mean_curvature).abs() < 1e-14);
    }

    #[test]
    fn principal_curvatures_are_eigenvalues_of_shape_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(2..=4);
            let spec = ConeSpec::new(n, rng.gen_range(0.1..FRAC_PI_2)).unwrap();
            let r = rng.gen_range(0.2..5.0);
            let geo = cone_geometry(&spec, r, &random_chart(&mut rng, n - 1)).unwrap();
            let g = nalgebra::DMatrix::from_row_slice(n, n, &geo.g);
            let h = nalgebra::DMatrix::from_row_slice(n, n, &geo.h);
            let shape = g.try_inverse().unwrap() * h;
            let mut eig: Vec<f64> = shape.eigenvalues().unwrap().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let mut expected = spec.principal_curvatures(r);
            expected.sort_by(f64::total_cmp);
            for (a, b) in eig.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn curvature_scales_inversely_with_radius() {
        let spec = ConeSpec::new(4, 0.6).unwrap();
        for c in [0.3, 1.7, 12.0] {
            let r = 1.3;
            assert!((spec.mean_curvature(c * r) - spec.mean_curvature(r) / c).abs() < 1e-14);
            assert!(
                (spec.norm_a_squared(c * r) - spec.norm_a_squared(r) / (c * c)).abs() < 1e-14
            );
        }
    }

    #[test]
    fn nonpositive_radius_is_domain_error() {
        let spec = ConeSpec::new(2, 0.5).unwrap();
        let chart = SphereChart::new(vec![0.1]);
        assert!(matches!(cone_frame(&spec, 0.0, &chart), Err(Error::Domain(_))));
        assert!(matches!(cone_geometry(&spec, -1.0, &chart), Err(Error::Domain(_))));
    }
}
