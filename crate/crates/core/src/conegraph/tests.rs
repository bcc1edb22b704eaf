use super::*;
use crate::cone::cone_geometry;
use crate::linalg::{identity, matmul, max_abs_diff};
use crate::surface::{fundamental_forms, BoundaryPolicy};
use approx::assert_relative_eq;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wavy(n: usize, amplitude: f64) -> PowerGraph {
    let d = n - 1;
    let mut wave = vec![1.0; d];
    wave[0] = 2.0;
    PowerGraph::radial(amplitude, 0.5)
        .with_mode(0.3, wave, 0.4)
        .with_mode(0.2, (0..d).map(|i| i as f64 + 1.0).collect(), -1.1)
}

fn interior_angles(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d)
        .map(|i| if i + 1 == d { rng.gen_range(0.0..2.0 * PI) } else { rng.gen_range(0.4..PI - 0.4) })
        .collect()
}

#[test]
fn zero_graph_is_the_cone() {
    for n in 2..=4 {
        let spec = ConeSpec::new(n, 0.6).unwrap();
        let theta: Vec<f64> = (0..n - 1).map(|i| 0.9 + 0.3 * i as f64).collect();
        let chart = SphereChart::new(theta);
        let cone = cone_geometry(&spec, 2.5, &chart).unwrap();
        let graph = graph_geometry(&spec, &ConstantGraph(0.0), 2.5, &chart).unwrap();
        assert!(max_abs_diff(&cone.g, &graph.metric.g) < 1e-13);
        assert!(max_abs_diff(&cone.h, &graph.h) < 1e-13);
        assert_relative_eq!(graph.mean_curvature, spec.mean_curvature(2.5), epsilon = 1e-13);
        assert_relative_eq!(graph.norm_a_squared, spec.norm_a_squared(2.5), epsilon = 1e-13);
    }
}

#[test]
fn normal_is_orthogonal_to_graph_tangents() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4 {
        let spec = ConeSpec::new(n, 0.7).unwrap();
        let gf = wavy(n, 0.4);
        for _ in 0..50 {
            let r = rng.gen_range(1.5..6.0);
            let theta = interior_angles(n - 1, &mut rng);
            let chart = SphereChart::new(theta.clone());
            let normal = graph_normal(&spec, &gf, r, &chart).unwrap();
            // tangents from finite differences of the embedding
            let patch = graph_embedding(&spec, &gf, local_grid(r, &theta, 1e-4, 5).unwrap()).unwrap();
            let fields = fundamental_forms(&patch).unwrap();
            let c = patch.grid.center_node();
            for i in 0..n {
                let t = fields.tangent(c, i);
                assert!(dot(t, &normal.nu).abs() < 1e-7, "n={n} i={i}");
            }
            assert_relative_eq!(norm(&normal.nu), 1.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn closed_forms_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=3 {
        let spec = ConeSpec::new(n, 0.8).unwrap();
        let gf = wavy(n, 0.5);
        for _ in 0..20 {
            let r = rng.gen_range(1.5..5.0);
            let theta = interior_angles(n - 1, &mut rng);
            let exact = graph_geometry(&spec, &gf, r, &SphereChart::new(theta.clone())).unwrap();
            let errors: Vec<f64> = [1e-3, 5e-4]
                .iter()
                .map(|&h| {
                    let patch = graph_embedding(&spec, &gf, local_grid(r, &theta, h, 5).unwrap()).unwrap();
                    let fields = fundamental_forms(&patch).unwrap();
                    let c = patch.grid.center_node();
                    max_abs_diff(fields.g(c), &exact.metric.g)
                        .max(max_abs_diff(fields.g_inv(c), &exact.metric.g_inv))
                        .max(max_abs_diff(fields.h(c), &exact.h))
                        .max(max_abs_diff(fields.nu(c), &exact.normal.nu))
                })
                .collect();
            assert!(errors[1] < 1e-5, "n={n} error {}", errors[1]);
            assert!(errors[0] / errors[1] > 3.0, "ratio {}", errors[0] / errors[1]);
        }
    }
}

#[test]
fn sherman_morrison_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = 2 + case % 4;
        let m_diag: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..20.0)).collect();
        let eta: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let ours = sherman_morrison_diag(&m_diag, &eta).unwrap();
        let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            eta[i] * eta[j] + if i == j { m_diag[i] } else { 0.0 }
        });
        let inv = dense.try_inverse().unwrap();
        let scale = inv.amax();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((ours[i * n + j] - inv[(i, j)]).abs() / scale);
            }
        }
    }
    assert!(worst < 1e-10, "worst relative error {worst}");
}

#[test]
fn immersion_failure_when_z_vanishes() {
    let spec = ConeSpec::new(2, 0.5).unwrap();
    let chart = SphereChart::new(vec![1.0]);
    // Z = sin α − (u/r) cos α ≤ 0 once u ≥ r tan α
    let u = 2.0 * 0.5f64.tan() + 1e-9;
    assert!(matches!(
        graph_metric(&spec, &ConstantGraph(u), 2.0, &chart),
        Err(Error::ImmersionFailure(_))
    ));
    let grid = local_grid(2.0, &[1.0], 0.01, 5).unwrap();
    assert!(matches!(
        graph_embedding(&spec, &ConstantGraph(u), grid),
        Err(Error::ImmersionFailure(_))
    ));
}

#[test]
fn embedding_checks_domain() {
    let spec = ConeSpec::new(2, 0.5).unwrap();
    let inside = local_grid(1.0, &[1.0], 0.1, 5).unwrap();
    assert!(matches!(graph_embedding(&spec, &ConstantGraph(0.0), inside), Err(Error::Domain(_))));
    let wrong_dim = local_grid(2.0, &[1.0, 1.0], 0.1, 5).unwrap();
    assert!(matches!(graph_embedding(&spec, &ConstantGraph(0.0), wrong_dim), Err(Error::Domain(_))));
}

#[test]
fn power_graph_jet_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=4 {
        let gf = wavy(n, 0.7);
        let points: Vec<(f64, Vec<f64>)> =
            (0..30).map(|_| (rng.gen_range(1.0..8.0), interior_angles(n - 1, &mut rng))).collect();
        assert!(jet_consistency(&gf, &points, 1e-4) < 1e-6);
    }
}

#[test]
fn sampled_graph_agrees_with_analytic() {
    let gf = wavy(3, 0.7);
    let sampled = SampledGraph::new(|r: f64, t: &[f64]| wavy(3, 0.7).value(r, t));
    let spec = ConeSpec::new(3, 0.9).unwrap();
    let chart = SphereChart::new(vec![1.2, 2.0]);
    let a = graph_geometry(&spec, &gf, 2.0, &chart).unwrap();
    let b = graph_geometry(&spec, &sampled, 2.0, &chart).unwrap();
    assert!(max_abs_diff(&a.h, &b.h) < 1e-6);
    assert_relative_eq!(a.mean_curvature, b.mean_curvature, epsilon = 1e-6);
}

/// `u = 0.3 r^{-1/2}(1 + ½ cos θ)` on a 2-dimensional cone.
fn decaying_end() -> PowerGraph {
    PowerGraph::radial(0.3, 0.5).with_mode(0.5, vec![1.0], 0.0)
}

fn end_patch(spec: &ConeSpec, gf: &dyn GraphFunction) -> SurfacePatch {
    let grid = Grid::new(vec![Axis::span(1.0, 40.0, 400), Axis::span(0.0, 2.0 * PI, 129)]).unwrap();
    graph_embedding(spec, gf, grid).unwrap().with_boundary(BoundaryPolicy::Trim, 3)
}

#[test]
fn rotational_support_function_has_closed_form() {
    // R(F) = rotation in the (e1, e2) plane; ⟨R(F), ν⟩ = −Z ∂_θ u / |N|
    let spec = ConeSpec::new(2, FRAC_PI_4).unwrap();
    let gf = decaying_end();
    let patch = end_patch(&spec, &gf);
    let fields = fundamental_forms(&patch).unwrap();
    let rot = RotationField::about_axis(3, 2).unwrap();
    let f = support_function(&patch, &fields, &rot);
    let mut worst: f64 = 0.0;
    for node in patch.reported_nodes() {
        let c = patch.grid.coords(node);
        let chart = SphereChart::new(vec![c[1]]);
        let jet = gf.jet(c[0], &c[1..]);
        let normal = graph_normal(&spec, &gf, c[0], &chart).unwrap();
        let expected = -z_factor(&spec, c[0], jet.u) * jet.u_t[0] / norm(&normal.n_vec);
        worst = worst.max((f.values[node] - expected).abs());
    }
    assert!(worst < 1e-3, "worst {worst}");
}

#[test]
fn asymptotics_of_a_decaying_end() {
    let spec = ConeSpec::new(2, FRAC_PI_4).unwrap();
    let gf = decaying_end();
    let patch = end_patch(&spec, &gf);
    let fields = fundamental_forms(&patch).unwrap();
    let rot = RotationField::about_axis(3, 2).unwrap();
    let annuli = dyadic_annuli(2.0, 4);
    let rows = asymptotics_report(&spec, &patch, &fields, &[rot], &annuli).unwrap();
    let of = |q: &str| -> Vec<&AnnulusRow> { rows.iter().filter(|r| r.quantity == q).collect() };
    let f_r = of("f_R[e1^e2]");
    assert_eq!(f_r.len(), 4);
    for w in f_r.windows(2) {
        assert!(w[1].sup < w[0].sup);
    }
    // f_R ~ −sin α ∂_θ u ∝ r^{-1/2}
    let slope = f_r[0].fitted_slope.unwrap();
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
    let dev = of("r2_A2_minus_cone");
    for w in dev.windows(2) {
        assert!(w[1].sup < w[0].sup);
    }
    assert!(dev[0].fitted_slope.unwrap() < 0.0);
    let a = of("A");
    assert!(a[0].fitted_slope.unwrap() < -0.8);
}

#[test]
fn report_needs_three_annuli() {
    let spec = ConeSpec::new(2, FRAC_PI_4).unwrap();
    let patch = end_patch(&spec, &decaying_end());
    let fields = fundamental_forms(&patch).unwrap();
    let annuli = dyadic_annuli(2.0, 2);
    assert!(matches!(
        asymptotics_report(&spec, &patch, &fields, &[], &annuli),
        Err(Error::InsufficientAnnuli { found: 2, required: 3 })
    ));
}

#[test]
fn decay_table_for_inverse_square_root() {
    let gf = PowerGraph::radial(1.0, 0.5);
    let angles = vec![vec![0.3], vec![2.0], vec![4.5]];
    let rows = decay_table(&gf, &dyadic_annuli(1.0, 6), &angles, 8);
    for w in rows.windows(2) {
        for k in [0, 1, 2] {
            assert!(w[1][k] < w[0][k]);
        }
    }
    // radial: angular entries vanish
    for row in &rows {
        for k in [3, 4, 5] {
            assert!(row[k] < 1e-8);
        }
    }
    // exact ratios between dyadic annuli are bounded by 2^{-1/2}
    assert!(rows[5][0] / rows[4][0] < 0.75);
}

#[test]
fn dyadic_annuli_double() {
    assert_eq!(dyadic_annuli(1.5, 3), vec![(1.5, 3.0), (3.0, 6.0), (6.0, 12.0)]);
}

#[test]
fn quarter_turn_graph_over_the_hyperplane() {
    // α = π/2: the cone is the hyperplane, ν̌ = e_{n+1}, Z = 1, F = (rΦ, u)
    let spec = ConeSpec::new(2, FRAC_PI_2).unwrap();
    let gf = PowerGraph::radial(0.3, 1.0);
    let geo = graph_geometry(&spec, &gf, 2.0, &SphereChart::new(vec![0.5])).unwrap();
    assert_relative_eq!(geo.point[2], 0.15, epsilon = 1e-15);
    let u_r: f64 = -0.3 / 4.0;
    assert_relative_eq!(geo.metric.g[0], 1.0 + u_r * u_r, epsilon = 1e-15);
    assert_relative_eq!(geo.metric.g[3], 4.0, epsilon = 1e-15);
}

proptest! {
    #[test]
    fn metric_and_inverse_are_consistent(
        n in 2usize..5,
        r in 1.2f64..10.0,
        amp in -0.5f64..0.5,
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = ConeSpec::new(n, 0.9).unwrap();
        let theta = interior_angles(n - 1, &mut rng);
        let gf = wavy(n, amp);
        let m = graph_metric(&spec, &gf, r, &SphereChart::new(theta)).unwrap();
        let prod = matmul(&m.g, &m.g_inv, n);
        prop_assert!(max_abs_diff(&prod, &identity(n)) < 1e-10);
        for i in 0..n {
            prop_assert!(m.g[i * n + i] > 0.0);
            for j in 0..n {
                prop_assert_eq!(m.g[i * n + j], m.g[j * n + i]);
            }
        }
    }

    #[test]
    fn second_form_is_symmetric(n in 2usize..5, r in 1.2f64..10.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = ConeSpec::new(n, 1.1).unwrap();
        let theta = interior_angles(n - 1, &mut rng);
        let h = graph_second_form(&spec, &wavy(n, 0.3), r, &SphereChart::new(theta)).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((h[i * n + j] - h[j * n + i]).abs() < 1e-13);
            }
        }
    }
}
