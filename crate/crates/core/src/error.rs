use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A chart angle is closer than the configured margin to a coordinate pole.
    PoleProximity { index: usize, theta: f64, margin: f64 },
    /// An argument is outside the domain of the operation.
    Domain(String),
    /// `det g` fell below the floor at some node.
    DegenerateMetric { node: usize, det: f64 },
    /// Field and patch sizes disagree.
    ShapeMismatch { expected: usize, found: usize },
    /// A normal graph over the cone folds over (`Z ≤ 0`) or a perturbed
    /// patch stopped being an immersion.
    ImmersionFailure(String),
    SingularMetric,
    InsufficientAnnuli { found: usize, required: usize },
    AxisSingularity { s: f64, x: f64 },
    BlowUp { s: f64, reason: &'static str },
    ToleranceFailure { s: f64, step: f64 },
    NotConical { spread: f64, tolerance: f64 },
    /// Several local minima of the neck-family angle map; their locations.
    NonConvexLandscape(Vec<f64>),
    NotAnExpander { residual: f64, gate: f64 },
    NonPositiveDenominator { node: usize, value: f64 },
    NotMeanConvex { node: usize, mean_curvature: f64 },
    NoSplitRadius,
    /// The eigenfunction equation `(L + ½)f = λf` is not satisfied.
    EigenGate { residual: f64, gate: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PoleProximity { index, theta, margin } => write!(
                f,
                "chart angle θ_{} = {theta} is within {margin} rad of a coordinate pole",
                index + 1
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateMetric { node, det } => {
                write!(f, "degenerate metric at node {node}: det g = {det:e}")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected} values, found {found}")
            }
            Error::ImmersionFailure(msg) => write!(f, "immersion failure: {msg}"),
            Error::SingularMetric => write!(f, "singular metric in rank-one update"),
            Error::InsufficientAnnuli { found, required } => {
                write!(f, "need at least {required} annuli, got {found}")
            }
            Error::AxisSingularity { s, x } => {
                write!(f, "profile reached the axis at s = {s} (x = {x:e})")
            }
            Error::BlowUp { s, reason } => write!(f, "profile blow-up at s = {s}: {reason}"),
            Error::ToleranceFailure { s, step } => {
                write!(f, "integrator could not meet tolerance at s = {s} (step {step:e})")
            }
            Error::NotConical { spread, tolerance } => write!(
                f,
                "tail is not conical: angle estimators differ by {spread:e} > {tolerance:e}"
            ),
            Error::NonConvexLandscape(minima) => {
                write!(f, "angle landscape has {} local minima: {minima:?}", minima.len())
            }
            Error::NotAnExpander { residual, gate } => write!(
                f,
                "patch is not a self-expander: sup |H - ½⟨F,ν⟩| = {residual:e} exceeds gate {gate:e}"
            ),
            Error::NonPositiveDenominator { node, value } => {
                write!(f, "H + ε = {value} is not positive at node {node}")
            }
            Error::NotMeanConvex { node, mean_curvature } => {
                write!(f, "not mean-convex: H = {mean_curvature} at node {node}")
            }
            Error::NoSplitRadius => {
                write!(f, "|A|² ≥ λ reaches the patch boundary; no split radius")
            }
            Error::EigenGate { residual, gate } => write!(
                f,
                "eigenfunction gate failed: sup |(L + ½)f - λf| = {residual:e} exceeds {gate:e}"
            ),
        }
    }
}

impl core::error::Error for Error {}
