//! Parameter estimation, significance scoring and the model-selection ladder.
//!
//! Fits minimize `Σ (P_i − model_i)²` over the probabilities `P_i` of a
//! distribution. Prices enter only through offsets from a grid reference
//! level, so translating a distribution by whole ticks translates the fitted
//! centers and leaves everything else bit-identical.

mod init;
mod ladder;
pub mod lm;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::VolumeAtPrice;
use crate::models::{kummer_wave, BesselParams, KummerParams, ModelSpec, SuperpositionParams};
use crate::specfun::{j0_fast, MAX_ORDER};

pub use init::initialize;
pub use ladder::{ladder_families, run_ladder, LadderAttempt, LadderReport};
pub use stats::{r_squared, r_squared_critical};

use lm::{levenberg_marquardt, LmProblem, LmSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("{family} needs at least {needed} price levels, got {got}")]
    TooFewLevels { family: String, needed: usize, got: usize },
    #[error("every optimizer start diverged")]
    AllStartsDiverged,
    #[error("no residual degrees of freedom: {n_levels} levels for {n_params} parameters")]
    InsufficientDegreesOfFreedom { n_levels: usize, n_params: usize },
    #[error("confidence must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("Kummer order {0} exceeds {MAX_ORDER}")]
    KummerOrder(u32),
    #[error("initial model does not belong to family {0}")]
    InitMismatch(String),
}

/// Model family to fit, including the two superposition variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitFamily {
    Bessel,
    /// Two centers sharing one eigenvalue `ω`.
    SuperpositionShared,
    /// Two centers with separate eigenvalues.
    SuperpositionDistinct,
    Kummer { order: u32 },
}

impl FitFamily {
    pub fn n_params(&self) -> usize {
        match self {
            FitFamily::Bessel | FitFamily::Kummer { .. } => 3,
            FitFamily::SuperpositionShared => 4,
            FitFamily::SuperpositionDistinct => 5,
        }
    }

    /// Smallest grid that leaves at least one residual degree of freedom
    /// beyond the parameters.
    pub fn min_levels(&self) -> usize {
        self.n_params() + 2
    }

    pub fn label(&self) -> String {
        match self {
            FitFamily::Bessel => "bessel".into(),
            FitFamily::SuperpositionShared => "superposition-shared".into(),
            FitFamily::SuperpositionDistinct => "superposition".into(),
            FitFamily::Kummer { order } => format!("kummer-m{order}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub confidence: f64,
    /// Order `m` used by the Kummer ladder step.
    pub kummer_order: u32,
    pub max_iterations: usize,
    pub max_starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            kummer_order: 1,
            max_iterations: 200,
            max_starts: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FitFamily,
    pub spec: ModelSpec,
    /// `P_i − model_i` per level.
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub r_squared_crit: f64,
    pub confidence: f64,
    pub significant: bool,
    pub n_levels: usize,
    pub n_params: usize,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Fitted centers snapped to the nearest grid price.
    pub nearest_ticks: Vec<f64>,
}

/// Offsets of the grid levels from the reference level, in price units.
pub(crate) struct Frame {
    pub reference: f64,
    pub offsets: Vec<f64>,
    pub tick: f64,
}

impl Frame {
    pub fn new(dist: &VolumeAtPrice) -> Self {
        let mid = (dist.len() / 2) as i64;
        let offsets = (0..dist.len() as i64).map(|i| (i - mid) as f64 * dist.tick).collect();
        Self {
            reference: (dist.first_level + mid) as f64 * dist.tick,
            offsets,
            tick: dist.tick,
        }
    }

    pub fn width(&self) -> f64 {
        (self.offsets[self.offsets.len() - 1] - self.offsets[0]).max(self.tick)
    }
}

struct FamilyProblem<'a> {
    family: FitFamily,
    frame: &'a Frame,
    y: &'a [f64],
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale: Vec<f64>,
}

impl<'a> FamilyProblem<'a> {
    fn new(family: FitFamily, frame: &'a Frame, y: &'a [f64]) -> Self {
        let tick = frame.tick;
        let rate = (1e-3 / frame.width(), std::f64::consts::TAU / tick);
        let center = (frame.offsets[0] - 2.0 * tick, frame.offsets[frame.offsets.len() - 1] + 2.0 * tick);
        let amp = (1e-12, 10.0);
        let rate_scale = 1.0 / frame.width();
        let (bounds, scale): (Vec<(f64, f64)>, Vec<f64>) = match family {
            FitFamily::Bessel | FitFamily::Kummer { .. } => {
                (vec![amp, rate, center], vec![1e-3, rate_scale, tick])
            }
            FitFamily::SuperpositionShared => {
                (vec![amp, rate, center, center], vec![1e-3, rate_scale, tick, tick])
            }
            FitFamily::SuperpositionDistinct => (
                vec![amp, rate, center, rate, center],
                vec![1e-3, rate_scale, tick, rate_scale, tick],
            ),
        };
        Self {
            family,
            frame,
            y,
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            scale,
        }
    }
}

impl LmProblem for FamilyProblem<'_> {
    fn n_params(&self) -> usize {
        self.family.n_params()
    }

    fn model(&self, t: &[f64]) -> Vec<f64> {
        let xs = &self.frame.offsets;
        match self.family {
            FitFamily::Bessel => xs.iter().map(|x| t[0] * j0_fast(t[1] * (x - t[2])).abs()).collect(),
            FitFamily::SuperpositionShared => xs
                .iter()
                .map(|x| t[0] * (j0_fast(t[1] * (x - t[2])).abs() + j0_fast(t[1] * (x - t[3])).abs()))
                .collect(),
            FitFamily::SuperpositionDistinct => xs
                .iter()
                .map(|x| t[0] * (j0_fast(t[1] * (x - t[2])).abs() + j0_fast(t[3] * (x - t[4])).abs()))
                .collect(),
            FitFamily::Kummer { order } => {
                xs.iter().map(|x| t[0] * kummer_wave(order, t[1], x - t[2]).abs()).collect()
            }
        }
    }

    fn observations(&self) -> &[f64] {
        self.y
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn scale(&self) -> &[f64] {
        &self.scale
    }
}

/// Internal parameter vector (centers as offsets from the frame reference).
pub(crate) fn to_theta(spec: &ModelSpec, family: FitFamily, frame: &Frame) -> Option<Vec<f64>> {
    let r = frame.reference;
    match (family, spec) {
        (FitFamily::Bessel, ModelSpec::BesselSingle(b)) => Some(vec![b.c, b.omega, b.p0 - r]),
        (FitFamily::SuperpositionShared, ModelSpec::BesselSuperposition(s)) => {
            Some(vec![s.c, 0.5 * (s.omega1 + s.omega2), s.p01 - r, s.p02 - r])
        }
        (FitFamily::SuperpositionDistinct, ModelSpec::BesselSuperposition(s)) => {
            Some(vec![s.c, s.omega1, s.p01 - r, s.omega2, s.p02 - r])
        }
        (FitFamily::Kummer { order }, ModelSpec::Kummer(k)) if k.m == order => Some(vec![k.c, k.sqrt_a(), k.p0 - r]),
        _ => None,
    }
}

pub(crate) fn from_theta(t: &[f64], family: FitFamily, frame: &Frame) -> ModelSpec {
    let r = frame.reference;
    match family {
        FitFamily::Bessel => ModelSpec::BesselSingle(BesselParams { c: t[0], omega: t[1], p0: r + t[2] }),
        FitFamily::SuperpositionShared | FitFamily::SuperpositionDistinct => {
            let (w1, d1, w2, d2) = if family == FitFamily::SuperpositionShared {
                (t[1], t[2], t[1], t[3])
            } else {
                (t[1], t[2], t[3], t[4])
            };
            let ((omega1, p01), (omega2, p02)) = if d1 <= d2 { ((w1, d1), (w2, d2)) } else { ((w2, d2), (w1, d1)) };
            ModelSpec::BesselSuperposition(SuperpositionParams {
                c: t[0],
                omega1,
                p01: r + p01,
                omega2,
                p02: r + p02,
            })
        }
        FitFamily::Kummer { order } => ModelSpec::Kummer(KummerParams {
            c: t[0],
            m: order,
            a: t[1] * t[1],
            p0: r + t[2],
        }),
    }
}

/// Fits one family to the distribution's probabilities.
///
/// Runs a bounded Levenberg–Marquardt minimization from every start returned
/// by [`initialize`] (plus `init`, if given, tried first) and keeps the lowest
/// objective; near-ties go to the smaller eigenvalue.
pub fn fit(
    dist: &VolumeAtPrice,
    family: FitFamily,
    init: Option<&ModelSpec>,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    if !(options.confidence > 0.0 && options.confidence < 1.0) {
        return Err(FitError::InvalidConfidence(options.confidence));
    }
    if let FitFamily::Kummer { order } = family {
        if order > MAX_ORDER {
            return Err(FitError::KummerOrder(order));
        }
    }
    let n = dist.len();
    let k = family.n_params();
    if n < family.min_levels() {
        return Err(FitError::TooFewLevels { family: family.label(), needed: family.min_levels(), got: n });
    }
    let r_squared_crit = r_squared_critical(n, k, options.confidence)?;

    let frame = Frame::new(dist);
    let y = &dist.probabilities;
    let problem = FamilyProblem::new(family, &frame, y);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(spec) = init {
        starts.push(to_theta(spec, family, &frame).ok_or_else(|| FitError::InitMismatch(family.label()))?);
    }
    for spec in initialize(dist, family) {
        if let Some(t) = to_theta(&spec, family, &frame) {
            starts.push(t);
        }
    }
    starts.truncate(options.max_starts.max(1));

    let settings = LmSettings { max_iterations: options.max_iterations, ..LmSettings::default() };
    let mut best: Option<lm::LmOutcome> = None;
    for start in &starts {
        let out = levenberg_marquardt(&problem, start, &settings);
        if !out.objective.is_finite() || out.theta.iter().any(|v| !v.is_finite()) {
            continue;
        }
        best = Some(match best {
            None => out,
            Some(b) => {
                let tie = (out.objective - b.objective).abs() <= 1e-12 * b.objective.max(1e-300);
                if out.objective < b.objective && !tie || tie && out.theta[1] < b.theta[1] {
                    out
                } else {
                    b
                }
            }
        });
    }
    let best = best.ok_or(FitError::AllStartsDiverged)?;
    let model = problem.model(&best.theta);
    let residuals: Vec<f64> = y.iter().zip(&model).map(|(a, b)| a - b).collect();
    let r2 = r_squared(y, &residuals);
    let spec = from_theta(&best.theta, family, &frame);
    let nearest_ticks = spec
        .centers()
        .iter()
        .map(|c| (c / dist.tick).round() * dist.tick)
        .collect();
    Ok(FitResult {
        family,
        spec,
        residuals,
        r_squared: r2,
        r_squared_crit,
        confidence: options.confidence,
        significant: r2 > r_squared_crit,
        n_levels: n,
        n_params: k,
        iterations: best.iterations,
        converged: best.converged,
        objective: best.objective,
        nearest_ticks,
    })
}
