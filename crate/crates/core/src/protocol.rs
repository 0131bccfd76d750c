//! Iterative transfer protocol: encode at site 1, evolve, measure whether the
//! receiver (site N) left level 0, and on failure collapse and repeat.
//!
//! The chain state is always `Σ_μ a_μ e^{-iμB T} Σ_k c_k |μ_k⟩`, so only the
//! `N` spatial amplitudes `c_k` are evolved. Every probability in the
//! protocol depends on `c` alone and never on the payload.

use std::collections::VecDeque;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sector::{ChainSpec, PropagatorMode, SectorDynamics};
use crate::C64;

/// Branches with less probability than this cannot be forced.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

/// Default time resolution of the optimisation grid, in units of `1/J`.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Window for every iteration after the first, `0 < Jt <= 10`.
pub const LATER_WINDOW: (f64, f64) = (0.0, 10.0);

/// Fraction of the window maximum a local maximum must reach to count as
/// the first peak. Filters round-off ripples while `|F_{N1}|²` is ~1e-30.
pub const DEFAULT_PEAK_FLOOR: f64 = 0.5;

/// The `(d-1)`-level state `Σ_{μ≥1} a_μ |μ⟩` encoded at the sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalPayload {
    /// `coeffs[i]` is `a_{i+1}`; level 0 carries no amplitude.
    pub coeffs: Vec<C64>,
}

impl LogicalPayload {
    pub fn new(d: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() + 1 != d {
            return Err(Error::DimensionMismatch {
                expected: d - 1,
                actual: coeffs.len(),
            });
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid("payload", format!("squared norm is {norm}, expected 1")));
        }
        Ok(LogicalPayload { coeffs })
    }

    /// Scales arbitrary nonzero coefficients to unit norm.
    pub fn normalized(d: usize, coeffs: Vec<C64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("payload", "coefficients must be finite and not all zero"));
        }
        Self::new(d, coeffs.into_iter().map(|c| c / norm).collect())
    }

    /// Equal superposition of levels `1..d`.
    pub fn uniform(d: usize) -> Self {
        let amp = C64::new(1.0 / ((d - 1) as f64).sqrt(), 0.0);
        LogicalPayload {
            coeffs: vec![amp; d - 1],
        }
    }

    pub fn d(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// Amplitude of level `mu` (`a_0 = 0`).
    pub fn level(&self, mu: usize) -> C64 {
        if mu == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[mu - 1]
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &LogicalPayload) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    /// Multiplies `a_μ` by `e^{-iμφ}`.
    fn with_level_phase(&self, phi: f64) -> Self {
        LogicalPayload {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| a * C64::from_polar(1.0, -((i + 1) as f64) * phi))
                .collect(),
        }
    }
}

/// Undoes the field phase accumulated over `total_time`:
/// `a_μ ← a_μ e^{+iμ B T}`. `b_field · total_time` must be in radians, i.e.
/// pass `B/J` together with `Jt`.
pub fn phase_correction(payload: &LogicalPayload, b_field: f64, total_time: f64) -> LogicalPayload {
    payload.with_level_phase(-b_field * total_time)
}

/// Factorised chain state.
#[derive(Debug, Clone)]
pub struct SectorState {
    pub spec: ChainSpec,
    /// Spatial amplitudes `c_1..c_N` shared by all levels.
    pub spatial: DVector<C64>,
    /// Evolution time since the last collapse (`Jt`).
    pub elapsed: f64,
    /// Evolution time since encoding (`Jt`); sets the field phase.
    pub total_time: f64,
    pub payload: LogicalPayload,
    /// Probability of the measurement record that produced this state.
    pub norm_factor: f64,
}

impl SectorState {
    pub fn n_sites(&self) -> usize {
        self.spatial.len()
    }

    /// Coefficient of `|μ_k⟩` (`site` is zero-based) in the represented
    /// chain state.
    pub fn chain_amplitude(&self, mu: usize, site: usize) -> C64 {
        let phase = C64::from_polar(1.0, -(mu as f64) * self.spec.field_ratio() * self.total_time);
        self.payload.level(mu) * phase * self.spatial[site]
    }

    /// Receiver coefficients before phase correction, `a_μ e^{-iμBT}`.
    pub fn received_payload(&self) -> LogicalPayload {
        self.payload
            .with_level_phase(self.spec.field_ratio() * self.total_time)
    }
}

pub fn initialize(spec: &ChainSpec, payload: &LogicalPayload) -> Result<SectorState> {
    spec.validate()?;
    if payload.d() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d - 1,
            actual: payload.coeffs.len(),
        });
    }
    let mut spatial = DVector::<C64>::zeros(spec.n_sites);
    spatial[0] = C64::new(1.0, 0.0);
    Ok(SectorState {
        spec: *spec,
        spatial,
        elapsed: 0.0,
        total_time: 0.0,
        payload: payload.clone(),
        norm_factor: 1.0,
    })
}

pub fn evolve(state: &SectorState, jt: f64, dynamics: &SectorDynamics) -> Result<SectorState> {
    if !(jt.is_finite() && jt >= 0.0) {
        return Err(invalid(
            "t",
            format!("evolution time must be non-negative, got {jt}"),
        ));
    }
    if dynamics.n_sites() != state.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: state.n_sites(),
            actual: dynamics.n_sites(),
        });
    }
    Ok(SectorState {
        spatial: dynamics.evolve(&state.spatial, jt),
        elapsed: state.elapsed + jt,
        total_time: state.total_time + jt,
        ..state.clone()
    })
}

/// `⟨Ψ|O_N|Ψ⟩ = |c_N|²`.
pub fn success_probability(state: &SectorState) -> f64 {
    state.spatial[state.n_sites() - 1].norm_sqr()
}

/// `⟨Ψ|O_m|Ψ⟩ = |c_m|²` for every site.
pub fn excitation_distribution(state: &SectorState) -> Vec<f64> {
    state.spatial.iter().map(|c| c.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The receiver was found outside level 0.
    Success,
    /// The receiver was projected onto level 0.
    Failure,
}

impl Outcome {
    pub fn symbol(self) -> char {
        match self {
            Outcome::Success => 'S',
            Outcome::Failure => 'F',
        }
    }
}

#[derive(Debug, Clone)]
enum Fallback {
    Sample(Box<ChaCha8Rng>),
    Always(Outcome),
}

/// Produces measurement outcomes: a forced prefix followed by seeded Born
/// sampling or a constant outcome.
#[derive(Debug, Clone)]
pub struct OutcomeSource {
    forced: VecDeque<Outcome>,
    fallback: Fallback,
}

impl OutcomeSource {
    pub fn seeded(seed: u64) -> Self {
        OutcomeSource {
            forced: VecDeque::new(),
            fallback: Fallback::Sample(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    /// Forces one outcome per character of `script` (`S` or `F`), then
    /// samples with `seed`.
    pub fn scripted(script: &str, seed: u64) -> Result<Self> {
        let forced = script
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'S' => Ok(Outcome::Success),
                'F' => Ok(Outcome::Failure),
                other => Err(invalid(
                    "force",
                    format!("unexpected outcome `{other}`, use S or F"),
                )),
            })
            .collect::<Result<VecDeque<_>>>()?;
        Ok(OutcomeSource {
            forced,
            ..Self::seeded(seed)
        })
    }

    /// Every measurement fails; drives the all-failure cascade.
    pub fn always(outcome: Outcome) -> Self {
        OutcomeSource {
            forced: VecDeque::new(),
            fallback: Fallback::Always(outcome),
        }
    }

    /// Next outcome for a success probability `p`, and whether it was forced.
    pub fn next(&mut self, p: f64) -> (Outcome, bool) {
        if let Some(outcome) = self.forced.pop_front() {
            return (outcome, true);
        }
        match &mut self.fallback {
            Fallback::Always(outcome) => (*outcome, true),
            Fallback::Sample(rng) => {
                let outcome = if rng.gen::<f64>() < p {
                    Outcome::Success
                } else {
                    Outcome::Failure
                };
                (outcome, false)
            }
        }
    }
}

/// Collapses `state` onto the given measurement branch.
///
/// Success leaves the excitation on the receiver; failure zeroes `c_N` and
/// renormalises by `1/√(1-P)`. Either way the per-iteration clock restarts
/// while `total_time` keeps running.
pub fn project(state: &SectorState, outcome: Outcome) -> Result<SectorState> {
    let n = state.n_sites();
    let p = success_probability(state);
    let branch = match outcome {
        Outcome::Success => p,
        Outcome::Failure => 1.0 - p,
    };
    if branch < MIN_BRANCH_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { probability: branch });
    }
    let mut spatial = DVector::<C64>::zeros(n);
    match outcome {
        Outcome::Success => {
            let c = state.spatial[n - 1];
            spatial[n - 1] = c / c.norm();
        }
        Outcome::Failure => {
            let scale = 1.0 / branch.sqrt();
            for k in 0..n - 1 {
                spatial[k] = state.spatial[k] * scale;
            }
        }
    }
    Ok(SectorState {
        spatial,
        elapsed: 0.0,
        norm_factor: state.norm_factor * branch,
        ..state.clone()
    })
}

/// Measures `O_N` on the receiver, drawing the outcome from `source`.
pub fn measure(state: &SectorState, source: &mut OutcomeSource) -> Result<(Outcome, SectorState)> {
    let (outcome, _) = source.next(success_probability(state));
    Ok((outcome, project(state, outcome)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakCriterion {
    /// First local maximum reaching the peak floor.
    FirstPeak,
    /// Largest value in the window, earliest on ties.
    GlobalMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeOptimum {
    pub t: f64,
    pub p: f64,
    /// No interior maximum was found; `t` is the best grid point, typically
    /// a window endpoint.
    pub at_boundary: bool,
}

/// Grid search for the maximum of `f` on `(t_min, t_max]` with step `step`,
/// refined by a parabola through the bracketing grid points.
pub fn optimize_on_grid<F>(
    f: F,
    window: (f64, f64),
    step: f64,
    criterion: PeakCriterion,
    peak_floor: f64,
) -> Result<TimeOptimum>
where
    F: Fn(f64) -> f64,
{
    let (t_min, t_max) = window;
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
        return Err(invalid(
            "window",
            format!("need t_min < t_max, got ({t_min}, {t_max})"),
        ));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid("grid_step", format!("must be positive, got {step}")));
    }
    let count = ((t_max - t_min) / step - 1e-9).ceil().max(1.0) as usize;
    let times: Vec<f64> = (1..=count)
        .map(|i| (t_min + i as f64 * step).min(t_max))
        .collect();
    let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();

    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] + 1e-12 {
            best = i;
        }
    }
    let peak = match criterion {
        PeakCriterion::GlobalMax => (best > 0 && best + 1 < values.len()).then_some(best),
        PeakCriterion::FirstPeak => {
            let floor = peak_floor * values[best];
            (1..values.len().saturating_sub(1))
                .find(|&i| values[i] >= values[i - 1] && values[i] > values[i + 1] && values[i] >= floor)
        }
    };
    let Some(i) = peak else {
        return Ok(TimeOptimum {
            t: times[best],
            p: values[best],
            at_boundary: true,
        });
    };

    let (left, mid, right) = (values[i - 1], values[i], values[i + 1]);
    let curvature = left - 2.0 * mid + right;
    let mut optimum = TimeOptimum {
        t: times[i],
        p: mid,
        at_boundary: false,
    };
    if curvature < 0.0 {
        let shift = 0.5 * (left - right) / curvature;
        let t = times[i] + shift.clamp(-1.0, 1.0) * step;
        if t > t_min && t <= t_max {
            let p = f(t);
            if p >= mid {
                optimum.t = t;
                optimum.p = p;
            }
        }
    }
    Ok(optimum)
}

/// Best measurement time for `state` within `window`.
pub fn optimize_time(
    state: &SectorState,
    dynamics: &SectorDynamics,
    window: (f64, f64),
    grid_step: f64,
    criterion: PeakCriterion,
) -> Result<TimeOptimum> {
    let probability = dynamics.receiver_probability(&state.spatial);
    optimize_on_grid(probability, window, grid_step, criterion, DEFAULT_PEAK_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// First peak for iteration 1, global maximum in `LATER_WINDOW` after.
    Optimized,
    /// First peak `t_1`, then `t_k = (2k-1) t_1`.
    Regular,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimized" => Ok(Strategy::Optimized),
            "regular" => Ok(Strategy::Regular),
            other => Err(invalid(
                "strategy",
                format!("expected optimized|regular, got `{other}`"),
            )),
        }
    }
}

/// `(2k - 1) t_1`.
pub fn schedule_regular(t1: f64, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(invalid("k", "iterations are numbered from 1"));
    }
    Ok((2 * k - 1) as f64 * t1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub mode: PropagatorMode,
    pub strategy: Strategy,
    pub max_iter: usize,
    pub grid_step: f64,
    /// Search window for `t_1`; `(0, 2N]` when unset.
    pub first_window: Option<(f64, f64)>,
    pub later_window: (f64, f64),
    pub peak_floor: f64,
}

impl ProtocolConfig {
    pub fn new(mode: PropagatorMode, strategy: Strategy, max_iter: usize) -> Self {
        ProtocolConfig {
            mode,
            strategy,
            max_iter,
            grid_step: DEFAULT_GRID_STEP,
            first_window: None,
            later_window: LATER_WINDOW,
            peak_floor: DEFAULT_PEAK_FLOOR,
        }
    }

    pub fn first_window_for(&self, n_sites: usize) -> (f64, f64) {
        self.first_window.unwrap_or((0.0, 2.0 * n_sites as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub index: usize,
    pub t: f64,
    pub p: f64,
    pub outcome: Outcome,
    /// The outcome came from a script rather than Born sampling.
    pub forced: bool,
    pub window: (f64, f64),
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolResult {
    pub mode: PropagatorMode,
    pub strategy: Strategy,
    pub records: Vec<IterationRecord>,
    /// `Π_{m≤k} (1 - p_m)` for every recorded iteration.
    pub p_fail_cumulative: Vec<f64>,
    /// `Σ t_m` over the recorded iterations.
    pub total_time: f64,
    /// The receiver phase correction was applied.
    pub corrected: bool,
    /// Receiver coefficients on success, before correction.
    pub received: Option<LogicalPayload>,
    /// Receiver coefficients on success, after correction.
    pub recovered: Option<LogicalPayload>,
}

impl ProtocolResult {
    pub fn succeeded(&self) -> bool {
        self.records.last().is_some_and(|r| r.outcome == Outcome::Success)
    }

    pub fn final_p_fail(&self) -> f64 {
        self.p_fail_cumulative.last().copied().unwrap_or(1.0)
    }
}

/// Runs up to `max_iter` evolve-and-measure rounds, stopping at the first
/// success.
pub fn run_iterative_protocol(
    spec: &ChainSpec,
    payload: &LogicalPayload,
    config: &ProtocolConfig,
    source: &mut OutcomeSource,
) -> Result<ProtocolResult> {
    let dynamics = SectorDynamics::new(spec, config.mode)?;
    run_with_dynamics(&dynamics, payload, config, source)
}

/// As [`run_iterative_protocol`] with a prebuilt propagator cache.
pub fn run_with_dynamics(
    dynamics: &SectorDynamics,
    payload: &LogicalPayload,
    config: &ProtocolConfig,
    source: &mut OutcomeSource,
) -> Result<ProtocolResult> {
    if config.max_iter < 1 {
        return Err(invalid("max_iter", "need at least one iteration"));
    }
    if dynamics.mode() != config.mode {
        return Err(invalid("mode", "propagator cache built for a different mode"));
    }
    let spec = dynamics.spec();
    let mut state = initialize(spec, payload)?;
    let mut records = Vec::new();
    let mut p_fail_cumulative = Vec::new();
    let mut survival = 1.0;
    let mut t_first = None;

    for k in 1..=config.max_iter {
        let (window, optimum) = match (config.strategy, t_first) {
            (Strategy::Regular, Some(t1)) => {
                let t = schedule_regular(t1, k)?;
                let p = dynamics.receiver_probability(&state.spatial)(t);
                (
                    (t, t),
                    TimeOptimum {
                        t,
                        p,
                        at_boundary: false,
                    },
                )
            }
            _ => {
                let (window, criterion) = if k == 1 {
                    (config.first_window_for(spec.n_sites), PeakCriterion::FirstPeak)
                } else {
                    (config.later_window, PeakCriterion::GlobalMax)
                };
                let probability = dynamics.receiver_probability(&state.spatial);
                let optimum = optimize_on_grid(
                    probability,
                    window,
                    config.grid_step,
                    criterion,
                    config.peak_floor,
                )?;
                (window, optimum)
            }
        };
        if k == 1 {
            t_first = Some(optimum.t);
        }

        state = evolve(&state, optimum.t, dynamics)?;
        let p = success_probability(&state);
        let (outcome, forced) = source.next(p);
        survival *= 1.0 - p;
        records.push(IterationRecord {
            index: k,
            t: optimum.t,
            p,
            outcome,
            forced,
            window,
            at_boundary: optimum.at_boundary,
        });
        p_fail_cumulative.push(survival);
        state = project(&state, outcome)?;
        if outcome == Outcome::Success {
            break;
        }
    }

    let total_time = state.total_time;
    let (received, recovered) = if records.last().map(|r| r.outcome) == Some(Outcome::Success) {
        let received = state.received_payload();
        let recovered = phase_correction(&received, spec.field_ratio(), total_time);
        (Some(received), Some(recovered))
    } else {
        (None, None)
    };
    Ok(ProtocolResult {
        mode: config.mode,
        strategy: config.strategy,
        corrected: recovered.is_some(),
        records,
        p_fail_cumulative,
        total_time,
        received,
        recovered,
    })
}
