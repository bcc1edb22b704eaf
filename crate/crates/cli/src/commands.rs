use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use expander_core::cone::{cone_geometry, ConeSpec, SphereChart};
use expander_core::conegraph::{dyadic_annuli, graph_embedding, local_grid, PowerGraph};
use expander_core::linalg::fit_slope;
use expander_core::profiles::{
    asymptotic_angle, critical_angle, integrate_profile, revolve, shoot_to_angle, Family, Profile,
    ProfileOptions, ShootOptions,
};
use expander_core::surface::{
    fundamental_forms, support_function, Axis, BoundaryPolicy, Grid, RotationField, ScalarField, SurfacePatch,
};
use expander_core::verify::{
    decay_check, expander_residual, identity_residuals, quotient_residual, DecayReport, ResidualReport,
    ResidualSample, EXPANDER_GATE, IDENTITY_TOLERANCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{AsymptoticsArgs, ConeArgs, CriticalArgs, OdeArgs, ProfileArgs, ScanArgs, ShootArgs, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::export::{
    create, read_json, write_annulus_csv, write_json, write_residual_csv, write_samples_csv, ProfileDocument,
};

fn emit(out: &mut dyn Write, line: impl std::fmt::Display) -> CliResult<()> {
    writeln!(out, "{line}").map_err(|e| CliError::Computation(format!("stdout: {e}")))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Serialize)]
struct RandomConeCheck {
    seed: u64,
    count: usize,
    max_closed_form_error: f64,
    min_fitted_order: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct ConeReport {
    n: usize,
    alpha: f64,
    r: f64,
    angles: Vec<f64>,
    norm_a_squared: f64,
    mean_curvature: f64,
    random: Option<RandomConeCheck>,
}

/// Closed form against `(n − 1)cot²α/r²` and the discrete engine on small
/// local grids at three spacings.
fn random_cone_check(count: usize, seed: u64) -> CliResult<RandomConeCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for _ in 0..count {
        let n = rng.gen_range(2..=4usize);
        let alpha = rng.gen_range(0.4..1.5);
        let r = rng.gen_range(1.0..5.0);
        let theta: Vec<f64> = (0..n - 1)
            .map(|i| if i + 2 == n { rng.gen_range(0.0..2.0 * PI) } else { rng.gen_range(0.5..PI - 0.5) })
            .collect();
        let spec = ConeSpec::new(n, alpha)?;
        let cot = alpha.cos() / alpha.sin();
        let exact = (n as f64 - 1.0) * cot * cot / (r * r);
        let geo = cone_geometry(&spec, r, &SphereChart::new(theta.clone()))?;
        max_err = max_err.max((geo.norm_a_squared - exact).abs());
        let bare = PowerGraph { inner_radius: 0.5, ..PowerGraph::radial(0.0, 1.0) };
        let mut log_h = Vec::new();
        let mut log_e = Vec::new();
        for h in [0.08, 0.04, 0.02] {
            let patch = graph_embedding(&spec, &bare, local_grid(r, &theta, h, 5)?)?;
            let fields = fundamental_forms(&patch)?;
            log_h.push(f64::ln(h));
            log_e.push((fields.norm_a_squared[patch.grid.center_node()] - exact).abs().ln());
        }
        min_order = min_order.min(fit_slope(&log_h, &log_e).unwrap_or(f64::NAN));
    }
    Ok(RandomConeCheck {
        seed,
        count,
        max_closed_form_error: max_err,
        min_fitted_order: min_order,
        pass: max_err <= 1e-12 && min_order >= 1.9,
    })
}

pub fn cone(a: &ConeArgs, out: &mut dyn Write) -> CliResult<bool> {
    let spec = ConeSpec::new(a.n, a.alpha)?;
    let angles = a.angles.as_ref().map_or_else(|| vec![FRAC_PI_2; a.n - 1], |l| l.0.clone());
    if angles.len() != a.n - 1 {
        return Err(CliError::Config(format!("--angles needs {} values, got {}", a.n - 1, angles.len())));
    }
    let geo = cone_geometry(&spec, a.r, &SphereChart::new(angles.clone()))?;
    emit(out, format_args!("n = {}, alpha = {:.10} rad, r = {}", a.n, a.alpha, a.r))?;
    emit(out, format_args!("|A|^2 = {:.10}", geo.norm_a_squared))?;
    emit(out, format_args!("H = {:.10}", geo.mean_curvature))?;
    let random = if a.random > 0 {
        let check = random_cone_check(a.random, a.seed)?;
        emit(
            out,
            format_args!(
                "random check ({} cones, seed {}): {} closed-form error {:.1e}, minimum order {:.3}",
                check.count,
                check.seed,
                verdict(check.pass),
                check.max_closed_form_error,
                check.min_fitted_order
            ),
        )?;
        Some(check)
    } else {
        None
    };
    let pass = random.as_ref().is_none_or(|c| c.pass);
    if let Some(path) = &a.output {
        write_json(
            path,
            &ConeReport {
                n: a.n,
                alpha: a.alpha,
                r: a.r,
                angles,
                norm_a_squared: geo.norm_a_squared,
                mean_curvature: geo.mean_curvature,
                random,
            },
        )?;
    }
    Ok(pass)
}

fn profile_options(ode: &OdeArgs) -> CliResult<ProfileOptions> {
    for (name, v) in [("tol", ode.tol), ("s-max", ode.s_max), ("sample-step", ode.sample_step), ("residual-gate", ode.residual_gate)] {
        if !(v > 0.0) {
            return Err(CliError::Config(format!("--{name} must be positive, got {v}")));
        }
    }
    Ok(ProfileOptions {
        tol: ode.tol,
        s_max: ode.s_max,
        sample_step: ode.sample_step,
        residual_gate: ode.residual_gate,
        ..ProfileOptions::default()
    })
}

fn shoot_options(scan: &ScanArgs, ode: &OdeArgs) -> CliResult<ShootOptions> {
    if !(scan.scan_min > 0.0 && scan.scan_max > scan.scan_min) {
        return Err(CliError::Config(format!("bad scan range [{}, {}]", scan.scan_min, scan.scan_max)));
    }
    if scan.per_decade == 0 || !(scan.angle_tol > 0.0) {
        return Err(CliError::config("--per-decade and --angle-tol must be positive"));
    }
    Ok(ShootOptions {
        per_decade: scan.per_decade,
        range: (scan.scan_min, scan.scan_max),
        angle_tol: scan.angle_tol,
        profile: profile_options(ode)?,
    })
}

pub fn profile(a: &ProfileArgs, out: &mut dyn Write) -> CliResult<bool> {
    let family = Family::from(a.family);
    let (name, param) = match (family, a.z0, a.x0) {
        (Family::Disk, Some(z0), None) => ("z0", z0),
        (Family::Neck, None, Some(x0)) => ("x0", x0),
        (Family::Disk, _, _) => return Err(CliError::config("a disk profile takes --z0 and no --x0")),
        (Family::Neck, _, _) => return Err(CliError::config("a neck profile takes --x0 and no --z0")),
    };
    let p = integrate_profile(a.n, family, param, &profile_options(&a.ode)?)?;
    let doc = ProfileDocument::new(&p);
    if let Some(path) = &a.output {
        write_json(path, &doc)?;
    }
    if let Some(path) = &a.csv {
        write_samples_csv(create(path)?, &p.samples)?;
    }
    let angle = asymptotic_angle(&p);
    let alpha = match &angle {
        Ok(e) => format!("{:.10} ± {:.1e}", e.alpha_hat, e.uncertainty),
        Err(e) => format!("unavailable ({e})"),
    };
    emit(
        out,
        format_args!(
            "profile n={} {} {name}={param}: {} residual {:.1e}, alpha_hat {alpha}, {} samples",
            p.n,
            family_name(family),
            verdict(angle.is_ok()),
            p.residual_sup,
            p.samples.len()
        ),
    )?;
    Ok(angle.is_ok())
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Disk => "disk",
        Family::Neck => "neck",
    }
}

pub fn shoot(a: &ShootArgs, out: &mut dyn Write) -> CliResult<bool> {
    let family = Family::from(a.family);
    let result = shoot_to_angle(a.n, family, a.alpha, &shoot_options(&a.scan, &a.ode)?)?;
    emit(
        out,
        format_args!(
            "shoot n={} {} alpha={}: {} roots, {} scan points skipped",
            a.n,
            family_name(family),
            a.alpha,
            result.roots.len(),
            result.skipped.len()
        ),
    )?;
    for d in &result.diagnostics {
        emit(
            out,
            format_args!(
                "  root {:.10}: alpha_hat {:.10}, H in [{:.4}, {:.4}], mean convex {}, convex {}",
                d.shoot_param, d.alpha_hat, d.min_mean_curvature, d.max_mean_curvature, d.mean_convex, d.convex
            ),
        )?;
    }
    if let Some(path) = &a.output {
        write_json(path, &result)?;
    }
    Ok(true)
}

pub fn critical(a: &CriticalArgs, out: &mut dyn Write) -> CliResult<bool> {
    let c = critical_angle(a.n, &shoot_options(&a.scan, &a.ode)?)?;
    emit(out, format_args!("critical angle n={}: alpha_crit {:.10} at x0 {:.6}", a.n, c.alpha_crit, c.x0))?;
    if let Some(path) = &a.output {
        write_json(path, &c)?;
    }
    Ok(true)
}

/// `ek` or `ei^ej`, 1-based.
fn parse_axis(spec: &str, ambient: usize) -> CliResult<RotationField> {
    let index = |t: &str| -> CliResult<usize> {
        t.strip_prefix('e')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(|k| k - 1)
            .ok_or_else(|| CliError::Config(format!("bad axis {spec:?}; use ek or ei^ej")))
    };
    Ok(match spec.split_once('^') {
        Some((p, q)) => RotationField::plane(ambient, index(p)?, index(q)?)?,
        None => RotationField::about_axis(ambient, index(spec)?)?,
    })
}

fn parse_vector(spec: &str, ambient: usize) -> CliResult<Vec<f64>> {
    let k = spec
        .strip_prefix('e')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&k| (1..=ambient).contains(&k))
        .ok_or_else(|| CliError::Config(format!("bad vector {spec:?}; use ek with 1 ≤ k ≤ {ambient}")))?;
    let mut v = vec![0.0; ambient];
    v[k - 1] = 1.0;
    Ok(v)
}

fn angle_axes(n: usize, nodes: usize) -> Vec<Axis> {
    let mut axes: Vec<Axis> = (0..n.saturating_sub(2)).map(|_| Axis::span(0.7, PI - 0.7, nodes)).collect();
    axes.push(Axis::span(0.0, 1.5, nodes));
    axes
}

fn load_profile(path: &std::path::Path) -> CliResult<Profile> {
    read_json::<ProfileDocument>(path)?.into_profile()
}

pub fn verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<bool> {
    let p = load_profile(&a.input)?;
    let ambient = p.n + 1;
    let axes: Vec<RotationField> = a.axes.0.iter().map(|s| parse_axis(s, ambient)).collect::<CliResult<_>>()?;
    let vectors: Vec<Vec<f64>> = a.v.0.iter().map(|s| parse_vector(s, ambient)).collect::<CliResult<_>>()?;
    if a.resolutions.0.len() < 2 || a.resolutions.0.iter().any(|&m| m < 9) {
        return Err(CliError::config("--resolutions needs at least two levels of at least 9 nodes"));
    }
    let (s_lo, s_hi) = match p.family {
        Family::Disk => (a.s_min.unwrap_or(0.5), a.s_max.unwrap_or(2.5)),
        Family::Neck => (a.s_min.unwrap_or(-2.0), a.s_max.unwrap_or(2.0)),
    };
    if !(s_hi > s_lo) {
        return Err(CliError::Config(format!("empty arc-length window [{s_lo}, {s_hi}]")));
    }
    let mut named: Vec<(String, Vec<ResidualSample>)> = Vec::new();
    let mut push = |name: String, sample: ResidualSample| match named.iter_mut().find(|(n, _)| *n == name) {
        Some((_, v)) => v.push(sample),
        None => named.push((name, vec![sample])),
    };
    for &nodes in &a.resolutions.0 {
        let mut grid_axes = vec![Axis::span(s_lo, s_hi, nodes)];
        grid_axes.extend(angle_axes(p.n, nodes));
        let patch = revolve(&p, Grid::new(grid_axes)?)?.with_boundary(BoundaryPolicy::Trim, (nodes - 1) / 8);
        let fields = fundamental_forms(&patch)?;
        push("expander".into(), expander_residual(&patch, &fields));
        for ns in identity_residuals(&patch, &fields, &axes, &vectors, EXPANDER_GATE)? {
            push(ns.name, ns.sample);
        }
        if a.quotient {
            for (rot, spec) in axes.iter().zip(&a.axes.0) {
                let f = support_function(&patch, &fields, rot);
                let q = quotient_residual(&patch, &fields, &f, a.lambda, a.epsilon, EXPANDER_GATE)?;
                push(format!("quotient[{spec}]"), q);
            }
        }
    }
    let reports: Vec<ResidualReport> = named
        .iter()
        .map(|(name, samples)| ResidualReport::from_samples(name, samples))
        .collect::<Result<_, _>>()?;
    let mut pass = true;
    for r in &reports {
        let ok = r.converges_at(a.min_order) && r.finest_sup() < IDENTITY_TOLERANCE;
        pass &= ok;
        let order = |q: Option<f64>| q.map_or("exact".to_string(), |q| format!("{q:.3}"));
        emit(
            out,
            format_args!(
                "{}: {} order {} (l2 {}), finest sup {:.2e}",
                r.identity_name,
                verdict(ok),
                order(r.fitted_order),
                order(r.fitted_order_l2),
                r.finest_sup()
            ),
        )?;
    }
    if let Some(path) = &a.output {
        write_json(path, &reports)?;
    }
    if let Some(path) = &a.csv {
        write_residual_csv(create(path)?, &reports)?;
    }
    Ok(pass)
}

#[derive(Debug, Serialize)]
struct AsymptoticsReport {
    alpha_hat: f64,
    /// `sup |r²|A|² / ((n − 1)cot²α̂) − 1|` over the outermost annulus.
    cone_deviation: f64,
    decay: DecayReport,
}

fn outer_cone_deviation(patch: &SurfacePatch, a2: &[f64], n: usize, alpha: f64, annulus: (f64, f64)) -> f64 {
    let cot = alpha.cos() / alpha.sin();
    let target = (n as f64 - 1.0) * cot * cot;
    let radii = patch.radii();
    patch
        .reported_nodes()
        .into_iter()
        .filter(|&k| radii[k] >= annulus.0 && radii[k] < annulus.1)
        .map(|k| (radii[k] * radii[k] * a2[k] / target - 1.0).abs())
        .fold(0.0, f64::max)
}

pub fn asymptotics(a: &AsymptoticsArgs, out: &mut dyn Write) -> CliResult<bool> {
    let p = load_profile(&a.input)?;
    let alpha = asymptotic_angle(&p)?.alpha_hat;
    let annuli = dyadic_annuli(a.r0, a.annuli);
    let outer = *annuli.last().ok_or_else(|| CliError::config("--annuli must be positive"))?;
    let s_end = p.options.s_max - 1.0;
    if !(a.r0 > 0.0) || outer.1 > s_end + 1e-9 || !(a.spacing > 0.0) || a.angular_nodes < 5 {
        return Err(CliError::Config(format!(
            "annuli up to r = {} need arc length {} but the profile ends at {}",
            outer.1,
            outer.1,
            p.options.s_max
        )));
    }
    let s_start = (0.5 * a.r0).min(1.0);
    let radial = ((s_end - s_start) / a.spacing).ceil() as usize + 1;
    let mut axes = vec![Axis::span(s_start, s_end, radial)];
    axes.extend(angle_axes(p.n, a.angular_nodes));
    let patch = revolve(&p, Grid::new(axes)?)?.with_boundary(BoundaryPolicy::Trim, 3);
    let fields = fundamental_forms(&patch)?;
    let extra: Vec<(String, ScalarField)> = a
        .axes
        .0
        .iter()
        .map(|s| Ok((format!("f_R[{s}]"), support_function(&patch, &fields, &parse_axis(s, p.n + 1)?))))
        .collect::<CliResult<_>>()?;
    let decay = decay_check(&patch, &fields, &extra, &annuli, f64::INFINITY)?;
    let deviation = outer_cone_deviation(&patch, &fields.norm_a_squared, p.n, alpha, outer);
    let cone_ok = deviation <= a.cone_tolerance;
    emit(
        out,
        format_args!(
            "r^2|A|^2 vs cone on [{}, {}): {} deviation {:.2}% (alpha_hat {alpha:.10})",
            outer.0,
            outer.1,
            verdict(cone_ok),
            100.0 * deviation
        ),
    )?;
    for seq in &decay.sequences {
        let sups: Vec<String> = seq.sups.iter().map(|s| format!("{s:.3e}")).collect();
        emit(out, format_args!("decay {}: {} {}", seq.quantity, verdict(seq.monotone), sups.join(" -> ")))?;
    }
    if let Some(path) = &a.csv {
        write_annulus_csv(create(path)?, &decay.rows)?;
    }
    let pass = cone_ok && decay.pass();
    if let Some(path) = &a.output {
        write_json(path, &AsymptoticsReport { alpha_hat: alpha, cone_deviation: deviation, decay })?;
    }
    Ok(pass)
}
