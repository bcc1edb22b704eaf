//! `O(n)`-invariant self-expanders from their profile curves.
//!
//! A curve `γ(s) = (x(s), z(s))` parametrised by arc length and rotated
//! about the `e_{n+1}` axis gives `F(s, ω) = (x(s) Φ(ω), z(s))`. With the
//! turning angle `θ` (so `x′ = cos θ`, `z′ = sin θ`) and the normal
//! `ν = (−sin θ Φ, cos θ)`, the principal curvatures are `θ′` along the
//! profile and `sin θ / x` (multiplicity `n − 1`) along the orbits, and
//! `⟨F, ν⟩ = z cos θ − x sin θ`. Requiring `H = ½⟨F, ν⟩` gives
//!
//! ```text
//! θ′ = ½ (z cos θ − x sin θ) − (n − 1) sin θ / x.
//! ```
//!
//! Two families are integrated: *disk* profiles leave the axis
//! horizontally at height `z₀`, *neck* profiles cross the base plane
//! vertically at radius `x₀` and are odd under `z ↦ −z`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::cone::{hyperspherical_chart, SphereChart};
use crate::linalg::least_squares;
use crate::math::{abs, atan2, cos, exp, ln, round, sin, sqrt};
use crate::surface::{Grid, ScalarField, SurfacePatch};
use crate::{Error, Result};

/// `(x, z, θ)`.
pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Family {
    Disk,
    Neck,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileOptions {
    pub s_max: f64,
    /// Local error tolerance of the integrator (mixed absolute/relative).
    pub tol: f64,
    /// Largest spacing of the stored samples in arc length.
    pub sample_step: f64,
    /// Largest turning of `θ` between samples near the start, which caps the
    /// spacing at `turn_resolution / |θ′(0)|`.
    pub turn_resolution: f64,
    pub max_step: f64,
    /// `θ` must stay in `(−π/2 − m, π/2 + m)`.
    pub angle_margin: f64,
    /// `x` below this at `s > 0` counts as reaching the axis.
    pub x_floor: f64,
    /// Arc length of the series start on the axis.
    pub series_start: f64,
    /// Trailing fraction of the arc used by the angle estimators.
    pub tail_fraction: f64,
    /// Largest allowed spread between the two angle estimators.
    pub conical_tolerance: f64,
    /// Largest allowed `|H − ½⟨γ, ν⟩|` along a returned profile.
    pub residual_gate: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            s_max: 60.0,
            tol: 1e-10,
            sample_step: 0.01,
            turn_resolution: 0.02,
            max_step: 0.05,
            angle_margin: 0.1,
            x_floor: 1e-8,
            series_start: 1e-4,
            tail_fraction: 0.5,
            conical_tolerance: 1e-5,
            residual_gate: 1e-8,
        }
    }
}

/// Right-hand side `(x′, z′, θ′)` of the profile equation.
pub fn expander_ode_step(n: usize, state: State) -> Result<State> {
    rhs(n, f64::NAN, state)
}

fn rhs(n: usize, s: f64, [x, z, theta]: State) -> Result<State> {
    if !(x > 0.0) {
        return Err(Error::AxisSingularity { s, x });
    }
    let (st, ct) = (sin(theta), cos(theta));
    let kappa = 0.5 * (z * ct - x * st) - (n as f64 - 1.0) * st / x;
    Ok([ct, st, kappa])
}

/// `H = θ′ + (n − 1) sin θ / x`, with the axis limit `n θ′` at `x = 0`.
pub fn profile_mean_curvature(n: usize, kappa: f64, [x, _, theta]: State) -> f64 {
    if x == 0.0 {
        n as f64 * kappa
    } else {
        kappa + (n as f64 - 1.0) * sin(theta) / x
    }
}

/// `½⟨γ, ν⟩ = ½ (z cos θ − x sin θ)`.
pub fn half_support(state: State) -> f64 {
    let [x, z, theta] = state;
    0.5 * (z * cos(theta) - x * sin(theta))
}

/// Second-order start of the disk family, `θ′(0) = z₀ / (2n)`.
pub fn disk_series_start(n: usize, z0: f64, s: f64) -> State {
    let k = z0 / (2.0 * n as f64);
    [s, z0 + 0.5 * k * s * s, k * s]
}

/// Initial state at `s = 0`.
pub fn initial_state(family: Family, shoot_param: f64) -> State {
    match family {
        Family::Disk => [0.0, shoot_param, 0.0],
        Family::Neck => [shoot_param, 0.0, FRAC_PI_2],
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a> {
    n: usize,
    opts: &'a ProfileOptions,
    h: f64,
}

impl Stepper<'_> {
    fn check(&self, s: f64, y: State, forward: bool) -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { s, reason: "non-finite state" });
        }
        if y[0] < self.opts.x_floor {
            return Err(Error::BlowUp { s, reason: "profile reached the axis" });
        }
        // angle of the direction of travel
        let travel = if forward { y[2] } else { y[2] - PI };
        let travel = travel - 2.0 * PI * round(travel / (2.0 * PI));
        if abs(travel) >= FRAC_PI_2 + self.opts.angle_margin {
            return Err(Error::BlowUp { s, reason: "turning angle left the graphical range" });
        }
        Ok(())
    }

    /// Advances `y` from `s` to exactly `target` with adaptive steps.
    fn advance(&mut self, s: &mut f64, y: &mut State, target: f64) -> Result<()> {
        let dir = if target >= *s { 1.0 } else { -1.0 };
        let mut k = [[0.0; 3]; 7];
        while dir * (target - *s) > 0.0 {
            let remaining = abs(target - *s);
            let mut h = self.h.min(self.opts.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < 1e-12 * (1.0 + abs(*s)) && !last {
                return Err(Error::ToleranceFailure { s: *s, step: h });
            }
            let hs = dir * h;
            for stage in 0..7 {
                let mut yi = *y;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    for c in 0..3 {
                        yi[c] += hs * A[stage][j] * kj[c];
                    }
                }
                k[stage] = rhs(self.n, *s + C[stage] * hs, yi).map_err(|e| match e {
                    Error::AxisSingularity { x, .. } => Error::AxisSingularity { s: *s, x },
                    other => other,
                })?;
            }
            let mut y_new = *y;
            for c in 0..3 {
                for stage in 0..6 {
                    y_new[c] += hs * A[6][stage] * k[stage][c];
                }
            }
            let mut err: f64 = 0.0;
            for c in 0..3 {
                let e: f64 = (0..7).map(|st| E[st] * k[st][c]).sum::<f64>() * hs;
                // `sin θ / x` turns absolute errors in θ into errors in H
                // amplified by 1/x, so θ is held to a tolerance relative to x
                let scale = if c == 2 {
                    self.opts.tol * y[0].min(y_new[0]).clamp(self.opts.x_floor, 1.0)
                } else {
                    self.opts.tol * (1.0 + abs(y[c]).max(abs(y_new[c])))
                };
                err = err.max(abs(e) / scale);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * exp(-ln(err) / 5.0)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *s = if last { target } else { *s + hs };
                *y = y_new;
                self.check(*s, *y, dir > 0.0)?;
                if !last {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor;
                if self.h < 1e-12 * (1.0 + abs(*s)) {
                    return Err(Error::ToleranceFailure { s: *s, step: self.h });
                }
            }
        }
        Ok(())
    }
}

/// Integrates from `(s_start, start)` through `targets`, which must be
/// monotone and on one side of `s_start`, returning the state at each.
pub fn integrate_states(
    n: usize,
    start: State,
    s_start: f64,
    targets: &[f64],
    opts: &ProfileOptions,
) -> Result<Vec<State>> {
    let mut stepper = Stepper { n, opts, h: opts.max_step.min(opts.sample_step) };
    let mut s = s_start;
    let mut y = start;
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        stepper.advance(&mut s, &mut y, t)?;
        out.push(y);
    }
    Ok(out)
}

/// A sampled profile curve. Samples are `[s, x, z, θ]` at
/// `s = 0, Δs, 2Δs, …`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    pub n: usize,
    pub family: Family,
    pub shoot_param: f64,
    pub options: ProfileOptions,
    pub samples: Vec<[f64; 4]>,
    /// `sup |H − ½⟨γ, ν⟩|` with `θ′` taken by finite differences of the
    /// sampled angle, independently of the equation.
    pub residual_sup: f64,
    /// `sup |(x′)² + (z′)² − 1|` from finite differences of the samples.
    pub speed_defect: f64,
}

/// States along either family at the given ascending arc lengths `≥ 0`.
fn family_states(
    n: usize,
    family: Family,
    shoot_param: f64,
    targets: &[f64],
    opts: &ProfileOptions,
) -> Result<Vec<State>> {
    match family {
        Family::Disk => {
            let s0 = opts.series_start;
            let split = targets.iter().position(|&s| s > s0).unwrap_or(targets.len());
            let mut out: Vec<State> =
                targets[..split].iter().map(|&s| disk_series_start(n, shoot_param, s)).collect();
            let start = disk_series_start(n, shoot_param, s0);
            out.extend(integrate_states(n, start, s0, &targets[split..], opts)?);
            Ok(out)
        }
        Family::Neck => integrate_states(n, initial_state(family, shoot_param), 0.0, targets, opts),
    }
}

pub fn integrate_profile(
    n: usize,
    family: Family,
    shoot_param: f64,
    opts: &ProfileOptions,
) -> Result<Profile> {
    if n < 2 {
        return Err(Error::Domain(alloc::format!("hypersurface dimension n = {n} must be ≥ 2")));
    }
    if !(opts.s_max > 0.0) || !(opts.sample_step > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::Domain("s_max, sample_step and tol must be positive".into()));
    }
    if family == Family::Neck && !(shoot_param > 0.0) {
        return Err(Error::Domain(alloc::format!("neck radius x₀ = {shoot_param} must be positive")));
    }
    let start = initial_state(family, shoot_param);
    let kappa0 = match family {
        Family::Disk => shoot_param / (2.0 * n as f64),
        Family::Neck => rhs(n, 0.0, start)?[2],
    };
    let ds = opts.sample_step.min(opts.turn_resolution / abs(kappa0));
    let count = round(opts.s_max / ds) as usize;
    let s_values: Vec<f64> = (0..=count).map(|k| k as f64 * ds).collect();
    let states = family_states(n, family, shoot_param, &s_values, opts)?;
    let samples: Vec<[f64; 4]> =
        s_values.iter().zip(&states).map(|(&s, y)| [s, y[0], y[1], y[2]]).collect();
    let (residual_sup, speed_defect) = sample_residuals(n, family, &samples, ds);
    if !(residual_sup <= opts.residual_gate) {
        return Err(Error::NotAnExpander { residual: residual_sup, gate: opts.residual_gate });
    }
    Ok(Profile { n, family, shoot_param, options: *opts, samples, residual_sup, speed_defect })
}

/// Sixth-order central first-derivative weights for offsets 1, 2, 3.
const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Sample `k + offset`, continued to negative indices by the symmetry of
/// the family (`θ` odd and `x` odd for disks; `θ ↦ π − θ`, `z` odd for
/// necks).
fn reflected(family: Family, samples: &[[f64; 4]], index: isize) -> [f64; 4] {
    if index >= 0 {
        return samples[index as usize];
    }
    let [s, x, z, t] = samples[(-index) as usize];
    match family {
        Family::Disk => [-s, -x, z, -t],
        Family::Neck => [-s, x, -z, PI - t],
    }
}

fn sample_residuals(n: usize, family: Family, samples: &[[f64; 4]], ds: f64) -> (f64, f64) {
    let mut residual: f64 = 0.0;
    let mut speed: f64 = 0.0;
    let last = samples.len().saturating_sub(3);
    for k in 0..last {
        let deriv = |c: usize| -> f64 {
            D1.iter()
                .enumerate()
                .map(|(j, w)| {
                    let o = j as isize + 1;
                    w * (reflected(family, samples, k as isize + o)[c]
                        - reflected(family, samples, k as isize - o)[c])
                })
                .sum::<f64>()
                / ds
        };
        let [_, x, z, theta] = samples[k];
        let state = [x, z, theta];
        let kappa = deriv(3);
        let h = profile_mean_curvature(n, kappa, state);
        let r = abs(h - half_support(state));
        residual = residual.max(r);
        let (xp, zp) = (deriv(1), deriv(2));
        speed = speed.max(abs(xp * xp + zp * zp - 1.0));
    }
    (residual, speed)
}

impl Profile {
    pub fn state(&self, k: usize) -> State {
        let [_, x, z, t] = self.samples[k];
        [x, z, t]
    }

    /// Closed-form `H` at each sample, with `θ′` from the equation.
    pub fn mean_curvature(&self) -> Vec<f64> {
        (0..self.samples.len())
            .map(|k| {
                let y = self.state(k);
                if y[0] == 0.0 {
                    // axis limit: all principal curvatures equal θ′(0)
                    half_support(y)
                } else {
                    let kappa = rhs(self.n, self.samples[k][0], y).map(|d| d[2]).unwrap_or(f64::NAN);
                    profile_mean_curvature(self.n, kappa, y)
                }
            })
            .collect()
    }

    /// Principal curvatures `(θ′, sin θ / x)` at each sample.
    pub fn principal_curvatures(&self) -> Vec<[f64; 2]> {
        (0..self.samples.len())
            .map(|k| {
                let y = self.state(k);
                if y[0] == 0.0 {
                    let c = self.shoot_param / (2.0 * self.n as f64);
                    [c, c]
                } else {
                    let kappa = rhs(self.n, 0.0, y).map(|d| d[2]).unwrap_or(f64::NAN);
                    [kappa, sin(y[2]) / y[0]]
                }
            })
            .collect()
    }
}

/// Estimated opening angle of the asymptotic cone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AngleEstimate {
    pub alpha_hat: f64,
    pub uncertainty: f64,
    /// Limit of the turning angle `θ`.
    pub theta_limit: f64,
    /// Limit of the polar angle `atan2(z, x)`.
    pub polar_limit: f64,
}

/// Fits `a + b t + c t²`, `t = (r_min / r)²`, and returns `a`.
fn tail_limit(r: &[f64], values: &[f64]) -> Result<f64> {
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let rows: Vec<Vec<f64>> = r
        .iter()
        .map(|&ri| {
            let t = (r_min / ri) * (r_min / ri);
            vec![1.0, t, t * t]
        })
        .collect();
    Ok(least_squares(&rows, values)?[0])
}

/// Angle of the cone a sampled curve is asymptotic to, measured from the
/// axis on the side the tail heads towards: `α̂ = π/2 − |θ∞|`.
///
/// `θ∞` is fitted twice over the trailing `tail_fraction` of the arc, from
/// the turning angle and from the polar angle, each as `a + b r⁻² + c r⁻⁴`
/// in `r = |γ|`.
pub fn asymptotic_angle_of(
    samples: &[[f64; 4]],
    tail_fraction: f64,
    tolerance: f64,
) -> Result<AngleEstimate> {
    let s_end = samples.last().map_or(0.0, |p| p[0]);
    let s_start = samples.first().map_or(0.0, |p| p[0]);
    let cut = s_end - tail_fraction * (s_end - s_start);
    let tail: Vec<&[f64; 4]> = samples.iter().filter(|p| p[0] >= cut).collect();
    if tail.len() < 8 {
        return Err(Error::Domain("too few tail samples for the angle fit".into()));
    }
    if tail.iter().any(|p| !(cos(p[3]) > 0.0)) {
        return Err(Error::Domain("x is not increasing on the tail".into()));
    }
    let r: Vec<f64> = tail.iter().map(|p| sqrt(p[1] * p[1] + p[2] * p[2])).collect();
    let theta: Vec<f64> = tail.iter().map(|p| p[3]).collect();
    let polar: Vec<f64> = tail.iter().map(|p| atan2(p[2], p[1])).collect();
    let theta_limit = tail_limit(&r, &theta)?;
    let polar_limit = tail_limit(&r, &polar)?;
    let spread = abs(theta_limit - polar_limit);
    if !(spread <= tolerance) {
        return Err(Error::NotConical { spread, tolerance });
    }
    let limit = 0.5 * (theta_limit + polar_limit);
    Ok(AngleEstimate {
        alpha_hat: FRAC_PI_2 - abs(limit),
        uncertainty: spread,
        theta_limit,
        polar_limit,
    })
}

pub fn asymptotic_angle(profile: &Profile) -> Result<AngleEstimate> {
    asymptotic_angle_of(
        &profile.samples,
        profile.options.tail_fraction,
        profile.options.conical_tolerance,
    )
}

/// `α̂` for one shot, or the error that stopped it.
pub fn shot_angle(n: usize, family: Family, param: f64, opts: &ProfileOptions) -> Result<f64> {
    let profile = integrate_profile(n, family, param, opts)?;
    Ok(asymptotic_angle(&profile)?.alpha_hat)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootOptions {
    pub per_decade: usize,
    pub range: (f64, f64),
    /// Angle tolerance of the bisection, in radians.
    pub angle_tol: f64,
    pub profile: ProfileOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { per_decade: 64, range: (1e-2, 1e2), angle_tol: 1e-6, profile: ProfileOptions::default() }
    }
}

impl ShootOptions {
    /// The log-spaced scan in increasing order. For the disk family it is
    /// mirrored to negative heights (the lower sheet) around 0.
    pub fn scan_points(&self, family: Family) -> Vec<f64> {
        let (lo, hi) = self.range;
        let steps = round(ln(hi / lo) / ln(10.0) * self.per_decade as f64).max(1.0) as usize;
        let positive: Vec<f64> = (0..=steps).map(|k| lo * exp(ln(hi / lo) * k as f64 / steps as f64)).collect();
        match family {
            Family::Neck => positive,
            Family::Disk => {
                let mut out: Vec<f64> = positive.iter().rev().map(|p| -p).collect();
                out.push(0.0);
                out.extend(positive);
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub alpha_mid: f64,
}

/// Sign information of one root's profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RootDiagnostics {
    pub shoot_param: f64,
    pub alpha_hat: f64,
    pub min_mean_curvature: f64,
    pub max_mean_curvature: f64,
    /// Smallest principal curvature along the profile.
    pub min_principal: f64,
    pub mean_convex: bool,
    pub convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootingResult {
    pub family: Family,
    pub roots: Vec<f64>,
    pub target_alpha: f64,
    pub bracket_log: Vec<BracketStep>,
    pub diagnostics: Vec<RootDiagnostics>,
    /// Scan points whose integration or angle estimate failed.
    pub skipped: Vec<f64>,
}

pub fn root_diagnostics(profile: &Profile, alpha_hat: f64) -> RootDiagnostics {
    let h = profile.mean_curvature();
    let min_h = h.iter().copied().fold(f64::INFINITY, f64::min);
    let max_h = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_k = profile
        .principal_curvatures()
        .iter()
        .flat_map(|k| k.iter().copied())
        .fold(f64::INFINITY, f64::min);
    RootDiagnostics {
        shoot_param: profile.shoot_param,
        alpha_hat,
        min_mean_curvature: min_h,
        max_mean_curvature: max_h,
        min_principal: min_k,
        mean_convex: min_h > 0.0,
        convex: min_k > 0.0,
    }
}

/// All shooting parameters in the scan range whose profile is asymptotic
/// to `C_α` with `α = target_alpha`. Disk roots come in pairs `±z₀`, one
/// sheet above and one below the base plane.
pub fn shoot_to_angle(
    n: usize,
    family: Family,
    target_alpha: f64,
    opts: &ShootOptions,
) -> Result<ShootingResult> {
    if !(target_alpha > 0.0 && target_alpha <= FRAC_PI_2) {
        return Err(Error::Domain(alloc::format!("target angle {target_alpha} outside (0, π/2]")));
    }
    let popts = &opts.profile;
    let points = opts.scan_points(family);
    let mut skipped = Vec::new();
    let values: Vec<Option<f64>> = points
        .iter()
        .map(|&p| match shot_angle(n, family, p, popts) {
            Ok(a) => Some(a - target_alpha),
            Err(_) => {
                skipped.push(p);
                None
            }
        })
        .collect();
    let mut roots = Vec::new();
    let mut bracket_log = Vec::new();
    for k in 0..points.len() {
        if let Some(v) = values[k] {
            if abs(v) <= opts.angle_tol {
                roots.push(points[k]);
                continue;
            }
        }
        if k + 1 == points.len() {
            break;
        }
        let (Some(f_lo), Some(f_hi)) = (values[k], values[k + 1]) else { continue };
        if abs(f_hi) <= opts.angle_tol || f_lo.signum() == f_hi.signum() {
            continue;
        }
        let (mut lo, mut hi, mut f_lo) = (points[k], points[k + 1], f_lo);
        let mut root = None;
        for _ in 0..200 {
            let mid = if lo * hi > 0.0 { lo.signum() * sqrt(lo * hi) } else { 0.5 * (lo + hi) };
            let f_mid = shot_angle(n, family, mid, popts)? - target_alpha;
            bracket_log.push(BracketStep { lo, hi, mid, alpha_mid: f_mid + target_alpha });
            if abs(f_mid) <= opts.angle_tol || (hi - lo) <= 1e-14 * abs(lo).max(abs(hi)) {
                root = Some(mid);
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        roots.extend(root);
    }
    let mut diagnostics = Vec::with_capacity(roots.len());
    for &p in &roots {
        let profile = integrate_profile(n, family, p, popts)?;
        let alpha = asymptotic_angle(&profile)?.alpha_hat;
        diagnostics.push(root_diagnostics(&profile, alpha));
    }
    Ok(ShootingResult { family, roots, target_alpha, bracket_log, diagnostics, skipped })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalAngle {
    pub alpha_crit: f64,
    /// Neck radius attaining the minimum.
    pub x0: f64,
    /// Final golden-section bracket in `x₀`.
    pub bracket: (f64, f64),
    /// The scan `(x₀, α̂)` the bracket came from.
    pub scan: Vec<(f64, f64)>,
}

/// Smallest asymptotic angle reached by the neck family, the threshold
/// below which no neck solution exists.
pub fn critical_angle(n: usize, opts: &ShootOptions) -> Result<CriticalAngle> {
    if n < 3 {
        return Err(Error::Domain(alloc::format!("critical angle needs n ≥ 3, got {n}")));
    }
    let popts = &opts.profile;
    let scan: Vec<(f64, f64)> = opts
        .scan_points(Family::Neck)
        .into_iter()
        .filter_map(|p| shot_angle(n, Family::Neck, p, popts).ok().map(|a| (p, a)))
        .collect();
    if scan.len() < 3 {
        return Err(Error::Domain("neck scan produced fewer than three profiles".into()));
    }
    // local minima that stand out from estimator noise, plus the lowest point
    let noise = 10.0 * opts.angle_tol;
    let lowest = scan.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let minima: Vec<usize> = (1..scan.len() - 1)
        .filter(|&k| {
            let (left, here, right) = (scan[k - 1].1, scan[k].1, scan[k + 1].1);
            here <= left && here <= right && (here + noise < left.min(right) || here == lowest)
        })
        .collect();
    let mut distinct: Vec<usize> = Vec::new();
    for &k in &minima {
        if distinct.last().is_none_or(|&j| k > j + 1) {
            distinct.push(k);
        }
    }
    if distinct.len() > 1 {
        return Err(Error::NonConvexLandscape(distinct.iter().map(|&k| scan[k].0).collect()));
    }
    let Some(&k) = distinct.first() else {
        return Err(Error::Domain("neck angle map has no interior minimum in the scan range".into()));
    };
    // golden-section search in ln x₀
    let f = |t: f64| shot_angle(n, Family::Neck, exp(t), popts);
    let (mut a, mut b) = (ln(scan[k - 1].0), ln(scan[k + 1].0));
    let g = (sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let (t, alpha) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(CriticalAngle { alpha_crit: alpha, x0: exp(t), bracket: (exp(a), exp(b)), scan })
}

/// A planar curve `s ↦ (x, z, θ)` that can be rotated into a hypersurface.
pub trait ProfileCurve {
    fn dim(&self) -> usize;

    /// States at ascending arc lengths.
    fn states(&self, s: &[f64]) -> Result<Vec<State>>;

    /// Profile curvature `θ′` at a state.
    fn curvature(&self, s: f64, state: State) -> f64;

    /// `H = θ′ + (n − 1) sin θ / x`.
    fn mean_curvature(&self, s: f64, state: State) -> f64 {
        profile_mean_curvature(self.dim(), self.curvature(s, state), state)
    }
}

/// The ray `z = x cot α` of the cone `C_α`, `s = |γ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeRay {
    pub n: usize,
    pub alpha: f64,
}

impl ConeRay {
    pub fn samples(&self, s_max: f64, step: f64) -> Vec<[f64; 4]> {
        let count = round(s_max / step) as usize;
        (0..=count)
            .map(|k| {
                let s = k as f64 * step;
                [s, s * sin(self.alpha), s * cos(self.alpha), FRAC_PI_2 - self.alpha]
            })
            .collect()
    }
}

impl ProfileCurve for ConeRay {
    fn dim(&self) -> usize {
        self.n
    }

    fn states(&self, s: &[f64]) -> Result<Vec<State>> {
        Ok(s.iter().map(|&s| [s * sin(self.alpha), s * cos(self.alpha), FRAC_PI_2 - self.alpha]).collect())
    }

    fn curvature(&self, _s: f64, _state: State) -> f64 {
        0.0
    }
}

impl ProfileCurve for Profile {
    fn dim(&self) -> usize {
        self.n
    }

    /// Re-integrates onto the requested arc lengths. Neck profiles accept
    /// negative `s` through their reflection symmetry.
    fn states(&self, s: &[f64]) -> Result<Vec<State>> {
        let negative = s.iter().take_while(|&&v| v < 0.0).count();
        if negative > 0 && self.family == Family::Disk {
            return Err(Error::Domain("disk profiles start on the axis at s = 0".into()));
        }
        let mut mirrored: Vec<f64> = s[..negative].iter().rev().map(|v| -v).collect();
        let mut below = family_states(self.n, self.family, self.shoot_param, &mirrored, &self.options)?;
        below.reverse();
        mirrored.clear();
        let mut out: Vec<State> = below.into_iter().map(|[x, z, t]| [x, -z, PI - t]).collect();
        out.extend(family_states(self.n, self.family, self.shoot_param, &s[negative..], &self.options)?);
        Ok(out)
    }

    fn curvature(&self, s: f64, state: State) -> f64 {
        rhs(self.n, s, state).map(|d| d[2]).unwrap_or(f64::NAN)
    }
}

/// `F(s, θ_1, …, θ_{n−1}) = (x(s) Φ(θ), z(s))` on a grid whose first axis is
/// arc length, oriented by the profile normal `(−sin θ Φ, cos θ)`.
pub fn revolve(curve: &dyn ProfileCurve, grid: Grid) -> Result<SurfacePatch> {
    let n = curve.dim();
    if grid.dim() != n {
        return Err(Error::Domain(alloc::format!(
            "grid has {} axes, hypersurface dimension is {n}",
            grid.dim()
        )));
    }
    let s_axis = grid.axes[0];
    let s_values: Vec<f64> = (0..s_axis.len).map(|i| s_axis.coord(i)).collect();
    let states = curve.states(&s_values)?;
    let center = grid.coords(grid.center_node());
    let center_state = states[grid.index_along(grid.center_node(), 0)];
    let frame = hyperspherical_chart(&SphereChart::new(center[1..].to_vec()))?;
    let mut reference: Vec<f64> = frame.phi.iter().map(|p| -sin(center_state[2]) * p).collect();
    reference.push(cos(center_state[2]));
    let ambient = n + 1;
    let mut points = vec![0.0; grid.node_count() * ambient];
    for node in 0..grid.node_count() {
        let c = grid.coords(node);
        let [x, z, _] = states[grid.index_along(node, 0)];
        let chart = hyperspherical_chart(&SphereChart::new(c[1..].to_vec()))?;
        let out = &mut points[node * ambient..(node + 1) * ambient];
        for (o, p) in out.iter_mut().zip(&chart.phi) {
            *o = x * p;
        }
        out[n] = z;
    }
    let patch = SurfacePatch::new(grid, points)?;
    Ok(patch.with_orientation(reference))
}

/// Closed-form `H` of the revolved curve at every node of `grid`.
pub fn revolved_mean_curvature(curve: &dyn ProfileCurve, grid: &Grid) -> Result<ScalarField> {
    let s_axis = grid.axes[0];
    let s_values: Vec<f64> = (0..s_axis.len).map(|i| s_axis.coord(i)).collect();
    let states = curve.states(&s_values)?;
    let per_s: Vec<f64> =
        s_values.iter().zip(&states).map(|(&s, &y)| curve.mean_curvature(s, y)).collect();
    Ok(ScalarField::new((0..grid.node_count()).map(|node| per_s[grid.index_along(node, 0)]).collect()))
}

#[cfg(test)]
mod tests;
