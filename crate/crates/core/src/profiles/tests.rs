use super::*;
use crate::cone::{cone_geometry, ConeSpec};
use crate::linalg::fit_slope;
use crate::surface::{fundamental_forms, support_function, Axis, BoundaryPolicy, RotationField};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn opts() -> ProfileOptions {
    ProfileOptions::default()
}

#[test]
fn plane_through_origin_is_stationary() {
    let d = expander_ode_step(3, [2.0, 0.0, 0.0]).unwrap();
    assert_eq!(d, [1.0, 0.0, 0.0]);
}

#[test]
fn ode_step_example() {
    let d = expander_ode_step(2, [1.0, 1.0, 0.0]).unwrap();
    assert_relative_eq!(d[2], 0.5, epsilon = 1e-15);
}

#[test]
fn ode_has_no_scale_invariance() {
    let a = expander_ode_step(2, [1.0, 1.0, 0.3]).unwrap();
    let b = expander_ode_step(2, [2.0, 2.0, 0.3]).unwrap();
    assert!((a[2] - b[2]).abs() > 0.1);
    assert_eq!(a[..2], b[..2]);
}

#[test]
fn ode_rejects_the_axis() {
    assert!(matches!(expander_ode_step(2, [0.0, 1.0, 0.0]), Err(Error::AxisSingularity { .. })));
    assert!(matches!(expander_ode_step(2, [-1.0, 1.0, 0.0]), Err(Error::AxisSingularity { .. })));
}

#[test]
fn ode_encodes_the_expander_equation() {
    // H from the principal curvatures equals ½⟨γ, ν⟩ for any off-axis state
    for &(x, z, t) in &[(0.7, -0.3, 0.4), (3.0, 2.0, -1.2), (0.1, 5.0, 1.4)] {
        for n in 2..5 {
            let d = expander_ode_step(n, [x, z, t]).unwrap();
            let h = d[2] + (n as f64 - 1.0) * t.sin() / x;
            assert_relative_eq!(h, 0.5 * (z * t.cos() - x * t.sin()), epsilon = 1e-13);
        }
    }
}

#[test]
fn flat_disk_is_the_plane() {
    let p = integrate_profile(2, Family::Disk, 0.0, &opts()).unwrap();
    for s in &p.samples {
        assert_eq!(s[2], 0.0);
        assert_eq!(s[3], 0.0);
        assert_relative_eq!(s[1], s[0], max_relative = 1e-12);
    }
    assert!(p.residual_sup < 1e-10);
    let a = asymptotic_angle(&p).unwrap();
    assert_eq!(a.alpha_hat, FRAC_PI_2);
}

#[test]
fn disk_profile_is_a_graphical_expander() {
    let p = integrate_profile(2, Family::Disk, 1.0, &opts()).unwrap();
    assert!(p.residual_sup < 1e-8, "residual {}", p.residual_sup);
    assert!(p.speed_defect < 1e-9);
    assert_eq!(p.samples[0], [0.0, 0.0, 1.0, 0.0]);
    for w in p.samples.windows(2) {
        assert!(w[1][3] > w[0][3], "θ not increasing at s = {}", w[1][0]);
    }
    let a = asymptotic_angle(&p).unwrap();
    let last = p.samples.last().unwrap()[3];
    assert!((last - a.theta_limit).abs() < 1e-3);
    assert!(a.alpha_hat > 0.0 && a.alpha_hat < FRAC_PI_2);
}

#[test]
fn disk_profiles_are_mean_convex_and_convex() {
    for n in [2, 3] {
        for z0 in [0.5, 1.0, 2.0] {
            let p = integrate_profile(n, Family::Disk, z0, &opts()).unwrap();
            assert!(p.residual_sup < 1e-8);
            assert!(p.mean_curvature().iter().all(|&h| h > 0.0));
            let diag = root_diagnostics(&p, 0.0);
            assert!(diag.mean_convex && diag.convex);
        }
    }
}

#[test]
fn series_start_matches_integration() {
    // the series start and a direct integration from s = 10⁻³ agree to O(s³)
    let n = 3;
    let z0 = 1.5;
    let s1 = 1e-3;
    let o = opts();
    let from_series = integrate_states(n, disk_series_start(n, z0, s1), s1, &[0.2], &o).unwrap()[0];
    let p = integrate_profile(n, Family::Disk, z0, &o).unwrap();
    let k = p.samples.iter().position(|s| (s[0] - 0.2).abs() < 1e-12).unwrap();
    for c in 0..3 {
        assert!((from_series[c] - p.state(k)[c]).abs() < 1e-8);
    }
}

#[test]
fn neck_is_odd_under_reflection() {
    let n = 3;
    let o = opts();
    let start = initial_state(Family::Neck, 1.0);
    let s: Vec<f64> = (1..=200).map(|k| k as f64 * 0.05).collect();
    let neg: Vec<f64> = s.iter().map(|v| -v).collect();
    let up = integrate_states(n, start, 0.0, &s, &o).unwrap();
    let down = integrate_states(n, start, 0.0, &neg, &o).unwrap();
    for (u, d) in up.iter().zip(&down) {
        assert!((u[0] - d[0]).abs() < 1e-8);
        assert!((u[1] + d[1]).abs() < 1e-8);
        assert!((u[2] - (PI - d[2])).abs() < 1e-8);
    }
}

#[test]
fn neck_rejects_nonpositive_radius() {
    assert!(matches!(integrate_profile(3, Family::Neck, 0.0, &opts()), Err(Error::Domain(_))));
}

#[test]
fn leaving_the_angle_window_blows_up() {
    let mut o = opts();
    o.angle_margin = -1.0;
    let r = integrate_profile(2, Family::Disk, 10.0, &o);
    assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
}

#[test]
fn cone_ray_angle_is_exact() {
    for alpha in [0.3, 0.8, 1.2] {
        let ray = ConeRay { n: 2, alpha };
        let a = asymptotic_angle_of(&ray.samples(40.0, 0.05), 0.5, 1e-8).unwrap();
        assert_relative_eq!(a.alpha_hat, alpha, epsilon = 1e-12);
    }
}

#[test]
fn wavy_curve_is_not_conical() {
    let samples: Vec<[f64; 4]> = (0..4000)
        .map(|k| {
            let x = 1.0 + k as f64 * 0.01;
            let z = 0.5 * x + 0.3 * x.sin();
            [x, x, z, (0.5 + 0.3 * x.cos()).atan()]
        })
        .collect();
    assert!(matches!(asymptotic_angle_of(&samples, 0.5, 1e-5), Err(Error::NotConical { .. })));
}

#[test]
fn angle_is_stable_under_tolerance_halving() {
    let o = opts();
    let mut half = o;
    half.tol *= 0.5;
    for n in [2, 3] {
        let a = asymptotic_angle(&integrate_profile(n, Family::Disk, 1.0, &o).unwrap()).unwrap();
        let b = asymptotic_angle(&integrate_profile(n, Family::Disk, 1.0, &half).unwrap()).unwrap();
        assert!((a.alpha_hat - b.alpha_hat).abs() < 10.0 * o.tol);
    }
}

#[test]
fn shooting_flat_target_finds_the_plane() {
    let r = shoot_to_angle(2, Family::Disk, FRAC_PI_2, &ShootOptions::default()).unwrap();
    assert_eq!(r.roots, vec![0.0]);
}

#[test]
fn shooting_recovers_a_disk_parameter() {
    let o = ShootOptions::default();
    let target = shot_angle(2, Family::Disk, 0.7, &o.profile).unwrap();
    let r = shoot_to_angle(2, Family::Disk, target, &o).unwrap();
    assert_eq!(r.roots.len(), 2, "{:?}", r.roots);
    assert!((r.roots[0] + 0.7).abs() < 1e-4, "root {}", r.roots[0]);
    assert!((r.roots[1] - 0.7).abs() < 1e-4, "root {}", r.roots[1]);
    for &root in &r.roots {
        let alpha = shot_angle(2, Family::Disk, root, &o.profile).unwrap();
        assert!((alpha - target).abs() <= o.angle_tol);
    }
    assert!(!r.bracket_log.is_empty());
    // the upper sheet is mean-convex for the upward normal, the lower one
    // for the downward normal
    assert!(r.diagnostics[1].mean_convex);
    assert!(r.diagnostics[0].max_mean_curvature < 0.0);
}

#[test]
fn necks_have_several_solutions_near_the_plane() {
    let o = ShootOptions::default();
    let r = shoot_to_angle(3, Family::Neck, 1.45, &o).unwrap();
    assert!(r.roots.len() >= 2, "{:?}", r.roots);
    for (root, d) in r.roots.iter().zip(&r.diagnostics) {
        assert!((d.alpha_hat - 1.45).abs() <= o.angle_tol);
        assert_eq!(d.shoot_param, *root);
        // the neck bends away from the axis
        assert!(!d.convex);
    }
}

#[test]
fn no_necks_below_the_critical_angle() {
    let r = shoot_to_angle(3, Family::Neck, 1.0, &ShootOptions::default()).unwrap();
    assert!(r.roots.is_empty());
}

#[test]
fn critical_angle_for_three_dimensions() {
    let o = ShootOptions::default();
    let c = critical_angle(3, &o).unwrap();
    assert!(c.alpha_crit > 0.0 && c.alpha_crit < FRAC_PI_2);
    assert!(c.bracket.0 <= c.x0 && c.x0 <= c.bracket.1);
    // regression value from the first self-converged computation
    assert!((c.alpha_crit - 1.322_057_463_6).abs() < 1e-8, "{}", c.alpha_crit);
    // every scanned neck opens at least as wide
    assert!(c.scan.iter().all(|&(_, a)| a >= c.alpha_crit - 1e-9));
    // huge necks flatten out
    let far = c.scan.last().unwrap();
    assert!(far.1 > FRAC_PI_2 - 1e-3);
    // a coarser scan lands on the same minimum
    let coarse = critical_angle(3, &ShootOptions { per_decade: 48, ..o.clone() }).unwrap();
    assert!((coarse.alpha_crit - c.alpha_crit).abs() < 10.0 * o.angle_tol);
}

#[test]
fn critical_angle_needs_three_dimensions() {
    assert!(matches!(critical_angle(2, &ShootOptions::default()), Err(Error::Domain(_))));
}

#[test]
fn scan_points_are_log_spaced() {
    let o = ShootOptions::default();
    let p = o.scan_points(Family::Neck);
    assert_eq!(p.len(), 4 * 64 + 1);
    assert_relative_eq!(p[0], 1e-2, epsilon = 1e-15);
    assert_relative_eq!(*p.last().unwrap(), 1e2, epsilon = 1e-10);
    assert_relative_eq!(p[64], 1e-1, epsilon = 1e-12);
    let d = o.scan_points(Family::Disk);
    assert_eq!(d.len(), 2 * p.len() + 1);
    assert_eq!(d[p.len()], 0.0);
    assert!(d.windows(2).all(|w| w[0] < w[1]));
}

fn revolve_grid(n: usize, s: (f64, f64), nodes: usize) -> Grid {
    let mut axes = vec![Axis::span(s.0, s.1, nodes)];
    if n == 2 {
        axes.push(Axis::span(0.0, 1.5, nodes));
    } else {
        axes.push(Axis::span(0.7, 2.2, nodes));
        axes.push(Axis::span(0.0, 1.5, nodes));
    }
    Grid::new(axes).unwrap()
}

/// sup |H_discrete − H_closed| over reported nodes, per resolution.
fn mean_curvature_errors(curve: &dyn ProfileCurve, n: usize, s: (f64, f64), ladder: &[usize]) -> Vec<(f64, f64)> {
    ladder
        .iter()
        .map(|&nodes| {
            let grid = revolve_grid(n, s, nodes);
            let exact = revolved_mean_curvature(curve, &grid).unwrap();
            let patch = revolve(curve, grid).unwrap().with_boundary(BoundaryPolicy::Trim, (nodes - 1) / 8);
            let fields = fundamental_forms(&patch).unwrap();
            let err = patch
                .reported_nodes()
                .into_iter()
                .map(|k| (fields.mean_curvature[k] - exact.values[k]).abs())
                .fold(0.0, f64::max);
            (patch.grid.max_spacing(), err)
        })
        .collect()
}

fn order(samples: &[(f64, f64)]) -> f64 {
    let x: Vec<f64> = samples.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|p| p.1.ln()).collect();
    fit_slope(&x, &y).unwrap()
}

#[test]
fn revolved_disk_matches_discrete_mean_curvature() {
    for (n, ladder) in [(2usize, vec![17usize, 33, 65]), (3, vec![17, 33])] {
        let p = integrate_profile(n, Family::Disk, 1.0, &opts()).unwrap();
        let errors = mean_curvature_errors(&p, n, (0.5, 2.5), &ladder);
        let q = order(&errors);
        assert!(q > 1.8, "n={n} order {q} {errors:?}");
    }
}

#[test]
fn revolved_neck_matches_discrete_mean_curvature() {
    let p = integrate_profile(3, Family::Neck, 1.0, &opts()).unwrap();
    let errors = mean_curvature_errors(&p, 3, (-1.0, 1.0), &[17, 33]);
    assert!(order(&errors) > 1.8, "{errors:?}");
}

#[test]
fn revolved_disk_is_an_expander() {
    let p = integrate_profile(2, Family::Disk, 1.0, &opts()).unwrap();
    let grid = revolve_grid(2, (0.5, 2.5), 129);
    let patch = revolve(&p, grid).unwrap().with_boundary(BoundaryPolicy::Trim, 16);
    let fields = fundamental_forms(&patch).unwrap();
    let worst = patch
        .reported_nodes()
        .into_iter()
        .map(|k| {
            let support = crate::math::dot(patch.point(k), fields.nu(k));
            (fields.mean_curvature[k] - 0.5 * support).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "residual {worst}");
}

#[test]
fn revolved_flat_profile_is_planar() {
    let p = integrate_profile(3, Family::Disk, 0.0, &opts()).unwrap();
    let patch = revolve(&p, revolve_grid(3, (1.0, 2.0), 9)).unwrap();
    let fields = fundamental_forms(&patch).unwrap();
    for k in 0..patch.node_count() {
        assert_eq!(patch.point(k)[3], 0.0);
        assert!(fields.mean_curvature[k].abs() < 1e-9);
    }
}

#[test]
fn revolved_cone_ray_matches_cone_geometry() {
    let alpha = 0.9;
    let ray = ConeRay { n: 3, alpha };
    let spec = ConeSpec::new(3, alpha).unwrap();
    let errors: Vec<(f64, f64)> = [17usize, 33]
        .iter()
        .map(|&nodes| {
            let patch = revolve(&ray, revolve_grid(3, (1.0, 3.0), nodes))
                .unwrap()
                .with_boundary(BoundaryPolicy::Trim, (nodes - 1) / 8);
            let fields = fundamental_forms(&patch).unwrap();
            let err = patch
                .reported_nodes()
                .into_iter()
                .map(|k| {
                    let s = patch.grid.coords(k)[0];
                    let chart = crate::cone::SphereChart::new(patch.grid.coords(k)[1..].to_vec());
                    let g = cone_geometry(&spec, s, &chart).unwrap();
                    (fields.mean_curvature[k] - g.mean_curvature)
                        .abs()
                        .max((fields.norm_a_squared[k] - g.norm_a_squared).abs())
                })
                .fold(0.0, f64::max);
            (patch.grid.max_spacing(), err)
        })
        .collect();
    assert!(order(&errors) > 1.8, "{errors:?}");
}

#[test]
fn revolved_expander_has_no_rotational_defect() {
    let p = integrate_profile(3, Family::Disk, 1.0, &opts()).unwrap();
    let patch = revolve(&p, revolve_grid(3, (0.5, 2.5), 17)).unwrap().with_boundary(BoundaryPolicy::Trim, 2);
    let fields = fundamental_forms(&patch).unwrap();
    // rotations fixing the e4 axis
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let rot = RotationField::plane(4, a, b).unwrap();
        let f = support_function(&patch, &fields, &rot);
        for k in patch.reported_nodes() {
            assert!(f.values[k].abs() < 1e-12, "plane ({a},{b}) node {k}: {}", f.values[k]);
        }
    }
}

#[test]
fn neck_states_extend_by_symmetry() {
    let p = integrate_profile(3, Family::Neck, 0.8, &opts()).unwrap();
    let s = [-2.0, -0.5, 0.5, 2.0];
    let states = p.states(&s).unwrap();
    assert_relative_eq!(states[0][0], states[3][0], epsilon = 1e-14);
    assert_relative_eq!(states[0][1], -states[3][1], epsilon = 1e-14);
    assert_relative_eq!(states[1][2], PI - states[2][2], epsilon = 1e-14);
    assert!(matches!(
        integrate_profile(3, Family::Disk, 1.0, &opts()).unwrap().states(&[-0.5, 1.0]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn revolve_rejects_wrong_dimension() {
    let ray = ConeRay { n: 3, alpha: 0.5 };
    assert!(matches!(revolve(&ray, revolve_grid(2, (1.0, 2.0), 9)), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn disk_sheets_mirror(z0 in 0.1f64..2.5, n in 2usize..4) {
        let mut o = opts();
        o.s_max = 10.0;
        let up = integrate_profile(n, Family::Disk, z0, &o).unwrap();
        let down = integrate_profile(n, Family::Disk, -z0, &o).unwrap();
        for (a, b) in up.samples.iter().zip(&down.samples) {
            prop_assert!((a[1] - b[1]).abs() < 1e-9);
            prop_assert!((a[2] + b[2]).abs() < 1e-9);
            prop_assert!((a[3] + b[3]).abs() < 1e-9);
        }
    }

    #[test]
    fn profiles_have_unit_speed(z0 in -2.0f64..2.0, x0 in 0.3f64..6.0, n in 2usize..5) {
        let mut o = opts();
        o.s_max = 15.0;
        let disk = integrate_profile(n, Family::Disk, z0, &o).unwrap();
        prop_assert!(disk.speed_defect < 1e-8);
        prop_assert!(disk.residual_sup <= o.residual_gate);
        let neck = integrate_profile(n, Family::Neck, x0, &o).unwrap();
        prop_assert!(neck.speed_defect < 1e-8);
        prop_assert!(neck.samples.iter().all(|s| s[1] > 0.0));
    }
}

