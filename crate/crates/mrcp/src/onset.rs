//! Movement-onset localization from limb trajectories, and epoch window
//! extraction.
//!
//! The first difference of a recorded trajectory is smoothed with a window-31
//! order-1 Savitzky–Golay filter and normalized by its maximum absolute
//! value. Onset rules then depend on the motion kind:
//!
//! * **rest** — a fake onset at 2.5 s; trials whose normalized trajectory has
//!   variance below 0.02 are rejected (rule applied verbatim from the source
//!   procedure; see [`RestVarianceRule`] for the inverted variant);
//! * **elbow** — onset where the normalized trajectory first reaches 0.05;
//! * **distal** (fine hand/wrist motions) — a Gaussian-plus-offset curve
//!   `a·exp(−((x−b)/c)²) + d` is fitted; trials are rejected when `a < 0.05`,
//!   `c > 100` or `d > 10`, otherwise the onset is the first sample where the
//!   fitted curve reaches a tenth of its peak rise above the offset.

use ndarray::{Array1, Array2, s};

use crate::data::Trial;
use crate::dsp::savgol_smooth;
use crate::error::{Error, Result};
use crate::linalg;

/// Smoothing window of the trajectory difference.
pub const SAVGOL_WINDOW: usize = 31;
/// Threshold on the normalized trajectory for elbow motions.
pub const ELBOW_THRESHOLD: f64 = 0.05;
/// Fake onset for resting trials, seconds after trial start.
pub const REST_ONSET_S: f64 = 2.5;
/// Variance bound of the rest rejection rule.
pub const REST_VARIANCE_BOUND: f64 = 0.02;
/// Distal rejection bounds on the fitted parameters.
pub const DISTAL_MIN_AMPLITUDE: f64 = 0.05;
pub const DISTAL_MAX_WIDTH: f64 = 100.0;
pub const DISTAL_MAX_OFFSET: f64 = 10.0;
/// Fraction of the fitted peak rise that marks the distal onset.
pub const DISTAL_ONSET_FRACTION: f64 = 0.1;

/// Kind of motion a trajectory belongs to, selecting the onset rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    Elbow,
    Distal,
    Rest,
}

impl MotionKind {
    /// Stable label encoding used by the EPO1 trajectory container.
    pub fn from_label(label: usize) -> Result<Self> {
        match label {
            0 => Ok(MotionKind::Elbow),
            1 => Ok(MotionKind::Distal),
            2 => Ok(MotionKind::Rest),
            other => Err(Error::invalid(
                "motion kind",
                format!("label {other} not in 0=elbow, 1=distal, 2=rest"),
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MotionKind::Elbow => "elbow",
            MotionKind::Distal => "distal",
            MotionKind::Rest => "rest",
        }
    }
}

/// A recorded movement trajectory with its sampling rate and motion kind.
#[derive(Debug, Clone)]
pub struct TrajectoryTrial {
    pub trajectory: Vec<f64>,
    pub fs: f64,
    pub motion_kind: MotionKind,
}

impl TrajectoryTrial {
    pub fn new(trajectory: Vec<f64>, fs: f64, motion_kind: MotionKind) -> Result<Self> {
        if trajectory.len() < SAVGOL_WINDOW + 1 {
            return Err(Error::invalid(
                "trajectory",
                format!(
                    "length {} below minimum {}",
                    trajectory.len(),
                    SAVGOL_WINDOW + 1
                ),
            ));
        }
        if trajectory.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trajectory", "non-finite sample"));
        }
        if !(fs > 0.0) {
            return Err(Error::invalid("trajectory", "fs not > 0"));
        }
        Ok(Self {
            trajectory,
            fs,
            motion_kind,
        })
    }
}

/// Parameters of the fitted curve `f(x) = a·exp(−((x−b)/c)²) + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussFitParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GaussFitParams {
    pub fn evaluate(&self, x: f64) -> f64 {
        let z = (x - self.b) / self.c;
        self.a * (-z * z).exp() + self.d
    }
}

/// Why a trial was rejected by the onset localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NoCrossing,
    LowVariance,
    AmplitudeTooSmall,
    WidthTooLarge,
    OffsetTooLarge,
    FitFailed,
    DegenerateTrajectory,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::NoCrossing => "no-crossing",
            RejectReason::LowVariance => "low-variance",
            RejectReason::AmplitudeTooSmall => "amplitude-too-small",
            RejectReason::WidthTooLarge => "width-too-large",
            RejectReason::OffsetTooLarge => "offset-too-large",
            RejectReason::FitFailed => "fit-failed",
            RejectReason::DegenerateTrajectory => "degenerate-trajectory",
        }
    }
}

/// Outcome of onset localization for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnsetResult {
    pub onset_sample: Option<usize>,
    pub rejected: bool,
    pub reason: Option<RejectReason>,
}

impl OnsetResult {
    pub fn located(onset_sample: usize) -> Self {
        Self {
            onset_sample: Some(onset_sample),
            rejected: false,
            reason: None,
        }
    }

    pub fn rejected(reason: RejectReason) -> Self {
        Self {
            onset_sample: None,
            rejected: true,
            reason: Some(reason),
        }
    }
}

/// Direction of the rest-trial variance rule. `RejectBelow` matches the
/// written procedure (variance < 0.02 rejects); `RejectAbove` is the
/// intuitive inversion, kept available because the written rule reads
/// backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestVarianceRule {
    #[default]
    RejectBelow,
    RejectAbove,
}

/// Smoothed, max-abs-normalized first difference of the trajectory.
pub fn preprocess_trajectory(trial: &TrajectoryTrial) -> Result<Vec<f64>> {
    let diff: Vec<f64> = trial
        .trajectory
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let smoothed = savgol_smooth(&diff, SAVGOL_WINDOW, 1)?;
    let max_abs = smoothed.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs <= 1e-300 {
        return Err(Error::DegenerateTrajectory(
            "trajectory difference is identically zero",
        ));
    }
    Ok(smoothed.iter().map(|v| v / max_abs).collect())
}

/// First index where the signal reaches `threshold` from below.
pub fn locate_onset_threshold(norm_traj: &[f64], threshold: f64) -> OnsetResult {
    for (i, &v) in norm_traj.iter().enumerate() {
        if v >= threshold && (i == 0 || norm_traj[i - 1] < threshold) {
            return OnsetResult::located(i);
        }
    }
    OnsetResult::rejected(RejectReason::NoCrossing)
}

/// Maximum Levenberg–Marquardt iterations for the Gaussian fit.
pub const GAUSS_FIT_MAX_ITERATIONS: usize = 200;
/// Convergence tolerance on the parameter update norm.
pub const GAUSS_FIT_TOLERANCE: f64 = 1e-10;

/// Least-squares fit of `a·exp(−((x−b)/c)²) + d` to `y` over x = 0..len.
///
/// Damped Levenberg–Marquardt from the initialization `a = max−min`,
/// `b = argmax`, `c = len/10`, `d = min`; steps are only accepted when they
/// reduce the residual, so the cost is non-increasing across iterations.
pub fn fit_gaussian(y: &[f64]) -> Result<GaussFitParams> {
    fit_gaussian_traced(y).map(|(params, _)| params)
}

/// As [`fit_gaussian`], also returning the accepted cost history.
pub fn fit_gaussian_traced(y: &[f64]) -> Result<(GaussFitParams, Vec<f64>)> {
    let n = y.len();
    if n < 4 {
        return Err(Error::invalid("gaussian fit", "need at least 4 samples"));
    }
    let (mut max, mut argmax, mut min) = (f64::NEG_INFINITY, 0usize, f64::INFINITY);
    for (i, &v) in y.iter().enumerate() {
        if v > max {
            max = v;
            argmax = i;
        }
        min = min.min(v);
    }
    if max - min <= 1e-12 {
        return Err(Error::DegenerateTrajectory("constant data has no peak"));
    }

    let mut params = GaussFitParams {
        a: max - min,
        b: argmax as f64,
        c: n as f64 / 10.0,
        d: min,
    };
    let cost_of = |p: &GaussFitParams| -> f64 {
        (0..n)
            .map(|i| {
                let r = y[i] - p.evaluate(i as f64);
                r * r
            })
            .sum()
    };
    let mut cost = cost_of(&params);
    let mut history = vec![cost];
    let mut lambda = 1e-3;

    for _ in 0..GAUSS_FIT_MAX_ITERATIONS {
        // accumulate JᵀJ and Jᵀr with the analytic Jacobian
        let mut jtj = Array2::<f64>::zeros((4, 4));
        let mut jtr = Array1::<f64>::zeros(4);
        for i in 0..n {
            let x = i as f64;
            let z = (x - params.b) / params.c;
            let e = (-z * z).exp();
            let jac = [
                e,
                params.a * e * 2.0 * z / params.c,
                params.a * e * 2.0 * z * z / params.c,
                1.0,
            ];
            let r = y[i] - params.evaluate(x);
            for p in 0..4 {
                jtr[p] += jac[p] * r;
                for q in p..4 {
                    jtj[[p, q]] += jac[p] * jac[q];
                }
            }
        }
        for p in 0..4 {
            for q in 0..p {
                jtj[[p, q]] = jtj[[q, p]];
            }
        }

        let mut damped = jtj.clone();
        for p in 0..4 {
            damped[[p, p]] += lambda * jtj[[p, p]].max(1e-12);
        }
        let step = match linalg::solve(&damped, &jtr) {
            Ok(s) => s,
            Err(_) => {
                lambda = (lambda * 10.0).min(1e12);
                continue;
            }
        };
        let mut candidate = GaussFitParams {
            a: params.a + step[0],
            b: params.b + step[1],
            c: params.c + step[2],
            d: params.d + step[3],
        };
        if candidate.c.abs() < 1e-9 {
            candidate.c = 1e-9_f64.copysign(candidate.c + 1e-300);
        }
        let candidate_cost = cost_of(&candidate);
        if candidate_cost <= cost {
            let step_norm = step.dot(&step).sqrt();
            params = candidate;
            cost = candidate_cost;
            history.push(cost);
            lambda = (lambda / 10.0).max(1e-12);
            if step_norm < GAUSS_FIT_TOLERANCE {
                return Ok((params, history));
            }
        } else {
            lambda = (lambda * 10.0).min(1e12);
        }
    }
    Err(Error::FitDidNotConverge {
        iterations: GAUSS_FIT_MAX_ITERATIONS,
    })
}

/// Apply the distal rejection rules to a fitted curve.
pub fn classify_distal_fit(params: &GaussFitParams) -> Option<RejectReason> {
    if params.a < DISTAL_MIN_AMPLITUDE {
        Some(RejectReason::AmplitudeTooSmall)
    } else if params.c.abs() > DISTAL_MAX_WIDTH {
        Some(RejectReason::WidthTooLarge)
    } else if params.d > DISTAL_MAX_OFFSET {
        Some(RejectReason::OffsetTooLarge)
    } else {
        None
    }
}

/// Locate the movement onset of a trajectory trial with the default
/// (verbatim) rest rule.
pub fn locate_onset(trial: &TrajectoryTrial) -> OnsetResult {
    locate_onset_with(trial, RestVarianceRule::default())
}

/// Locate the movement onset with an explicit rest-trial variance rule.
pub fn locate_onset_with(trial: &TrajectoryTrial, rest_rule: RestVarianceRule) -> OnsetResult {
    let norm = match preprocess_trajectory(trial) {
        Ok(v) => v,
        Err(_) => return OnsetResult::rejected(RejectReason::DegenerateTrajectory),
    };
    match trial.motion_kind {
        MotionKind::Rest => {
            let mean = norm.iter().sum::<f64>() / norm.len() as f64;
            let var =
                norm.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / norm.len() as f64;
            let reject = match rest_rule {
                RestVarianceRule::RejectBelow => var < REST_VARIANCE_BOUND,
                RestVarianceRule::RejectAbove => var >= REST_VARIANCE_BOUND,
            };
            if reject {
                OnsetResult::rejected(RejectReason::LowVariance)
            } else {
                OnsetResult::located((REST_ONSET_S * trial.fs).round() as usize)
            }
        }
        MotionKind::Elbow => locate_onset_threshold(&norm, ELBOW_THRESHOLD),
        MotionKind::Distal => {
            let params = match fit_gaussian(&norm) {
                Ok(p) => p,
                Err(Error::DegenerateTrajectory(_)) => {
                    return OnsetResult::rejected(RejectReason::DegenerateTrajectory)
                }
                Err(_) => return OnsetResult::rejected(RejectReason::FitFailed),
            };
            if let Some(reason) = classify_distal_fit(&params) {
                return OnsetResult::rejected(reason);
            }
            // first sample where the fitted curve reaches d + 0.1·a
            let bar = params.d + DISTAL_ONSET_FRACTION * params.a;
            for i in 0..norm.len() {
                if params.evaluate(i as f64) >= bar {
                    return OnsetResult::located(i);
                }
            }
            OnsetResult::rejected(RejectReason::NoCrossing)
        }
    }
}

/// Which epoch window to cut from a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// `[onset − 2 s, onset + 1 s)`, requires a located onset.
    Aligned,
    /// `[cue − 1 s, cue + 2 s)`.
    CueI,
    /// `[cue, cue + 2 s)`.
    CueII,
}

impl WindowMode {
    /// Window length in samples at the given rate.
    pub fn window_samples(&self, fs: f64) -> usize {
        match self {
            WindowMode::Aligned | WindowMode::CueI => (3.0 * fs).round() as usize,
            WindowMode::CueII => (2.0 * fs).round() as usize,
        }
    }
}

/// Cut the classification window out of a trial. `cue_sample` anchors the
/// cue-relative modes; aligned mode uses the trial's own onset.
pub fn extract_window(trial: &Trial, mode: WindowMode, cue_sample: usize) -> Result<Trial> {
    let fs = trial.fs;
    let sec = |s: f64| (s * fs).round() as i64;
    let (start, end) = match mode {
        WindowMode::Aligned => {
            let onset = trial.onset_sample.ok_or_else(|| {
                Error::invalid("extract_window", "aligned mode requires a located onset")
            })? as i64;
            (onset - sec(2.0), onset + sec(1.0))
        }
        WindowMode::CueI => (cue_sample as i64 - sec(1.0), cue_sample as i64 + sec(2.0)),
        WindowMode::CueII => (cue_sample as i64, cue_sample as i64 + sec(2.0)),
    };
    let len = trial.samples();
    if start < 0 || end > len as i64 || start >= end {
        return Err(Error::WindowOutOfBounds { start, end, len });
    }
    let data = trial
        .data
        .slice(s![.., start as usize..end as usize])
        .to_owned();
    let onset = trial.onset_sample.and_then(|o| {
        let o = o as i64;
        if o >= start && o < end {
            Some((o - start) as usize)
        } else {
            None
        }
    });
    Trial::new(data, fs, trial.label, onset)
}
