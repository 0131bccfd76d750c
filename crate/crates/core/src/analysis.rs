//! Parameter sweeps and fits over protocol runs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::protocol::{
    self, optimize_on_grid, LogicalPayload, Outcome, OutcomeSource, PeakCriterion, ProtocolConfig,
};
use crate::sector::{eigenpair_residual, ChainSpec, EigenpairDiagnostic, PropagatorMode, SectorDynamics};

/// Chain lengths used for the first-iteration scaling: 10, 15, …, 100.
pub fn default_sweep_lengths() -> Vec<usize> {
    (10..=100).step_by(5).collect()
}

/// One swept quantity, `(key, value)` rows sorted by key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    /// Name of the swept parameter, e.g. `n` or `k`.
    pub parameter: String,
    /// Name of the recorded value, e.g. `p1`.
    pub value: String,
    pub mode: PropagatorMode,
    pub rows: Vec<(f64, f64)>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepTable {
    pub fn new(
        parameter: impl Into<String>,
        value: impl Into<String>,
        mode: PropagatorMode,
        mut rows: Vec<(f64, f64)>,
    ) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(invalid("rows", format!("duplicate key {}", w[0].0)));
        }
        Ok(SweepTable {
            parameter: parameter.into(),
            value: value.into(),
            mode,
            rows,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn keys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    /// Union of two tables of the same quantity; mixing propagator modes
    /// is an error.
    pub fn merge(&self, other: &SweepTable) -> Result<SweepTable> {
        if self.mode != other.mode {
            return Err(invalid(
                "mode",
                format!("cannot combine {} and {} rows", self.mode, other.mode),
            ));
        }
        if self.parameter != other.parameter || self.value != other.value {
            return Err(invalid("table", "tables record different quantities"));
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        let mut merged = SweepTable::new(&self.parameter, &self.value, self.mode, rows)?;
        merged.metadata = self.metadata.clone();
        Ok(merged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// `y = A · x^(-α)`, fitted as a line in `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Coefficient of determination of the log-log line.
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * x.powf(-self.exponent)
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= f64::EPSILON * mean_x.abs().max(1.0) {
        return Err(Error::Fit("abscissae are degenerate".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Ordinary least squares `value = slope · key + intercept`.
pub fn linear_fit(table: &SweepTable) -> Result<LinearFit> {
    least_squares(&table.keys(), &table.values())
}

/// Residuals `y - (slope·x + intercept)` in key order.
pub fn linear_residuals(table: &SweepTable, fit: &LinearFit) -> Vec<f64> {
    table
        .rows
        .iter()
        .map(|&(x, y)| y - (fit.slope * x + fit.intercept))
        .collect()
}

/// Unweighted least squares on `(ln key, ln value)`.
pub fn powerlaw_fit(table: &SweepTable) -> Result<PowerLawFit> {
    powerlaw_fit_points(&table.keys(), &table.values())
}

/// [`powerlaw_fit`] on bare samples.
pub fn powerlaw_fit_points(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!(
            "power law needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().zip(ys).any(|(&x, &y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Fit("power law needs positive keys and values".into()));
    }
    let log_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let log_y: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = least_squares(&log_x, &log_y)?;
    Ok(PowerLawFit {
        amplitude: line.intercept.exp(),
        exponent: -line.slope,
        r_squared: line.r_squared,
    })
}

/// First-iteration success probability and time per chain length.
#[derive(Debug, Clone, Serialize)]
pub struct FirstIterationSweep {
    pub p1: SweepTable,
    pub t1: SweepTable,
}

fn annotate(table: SweepTable, config: &ProtocolConfig) -> SweepTable {
    table
        .with_meta("grid_step", config.grid_step)
        .with_meta("peak_floor", config.peak_floor)
        .with_meta("mode", config.mode)
}

/// First-peak `(t_1, P_1)` for every chain length in `lengths`.
pub fn sweep_first_iteration(
    lengths: &[usize],
    d: usize,
    config: &ProtocolConfig,
) -> Result<FirstIterationSweep> {
    let points: Vec<(usize, f64, f64)> = lengths
        .par_iter()
        .map(|&n| {
            let spec = ChainSpec::new(n, d, 1.0, 0.0)?;
            let dynamics = SectorDynamics::new(&spec, config.mode)?;
            let state = protocol::initialize(&spec, &LogicalPayload::uniform(d))?;
            let optimum = optimize_on_grid(
                dynamics.receiver_probability(&state.spatial),
                config.first_window_for(n),
                config.grid_step,
                PeakCriterion::FirstPeak,
                config.peak_floor,
            )?;
            Ok((n, optimum.t, optimum.p))
        })
        .collect::<Result<_>>()?;
    let window = match config.first_window {
        Some((a, b)) => format!("({a}, {b}]"),
        None => "(0, 2N]".to_string(),
    };
    let p1 = SweepTable::new(
        "n",
        "p1",
        config.mode,
        points.iter().map(|&(n, _, p)| (n as f64, p)).collect(),
    )?;
    let t1 = SweepTable::new(
        "n",
        "jt1",
        config.mode,
        points.iter().map(|&(n, t, _)| (n as f64, t)).collect(),
    )?;
    Ok(FirstIterationSweep {
        p1: annotate(p1, config).with_meta("window", &window),
        t1: annotate(t1, config).with_meta("window", &window),
    })
}

/// Deterministic all-failure cascade for one chain length.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeCurve {
    pub n_sites: usize,
    pub p_fail: SweepTable,
    pub p_k: SweepTable,
    pub t_k: SweepTable,
}

pub fn failure_curve(n: usize, d: usize, config: &ProtocolConfig) -> Result<CascadeCurve> {
    let spec = ChainSpec::new(n, d, 1.0, 0.0)?;
    let mut source = OutcomeSource::always(Outcome::Failure);
    let result = protocol::run_iterative_protocol(&spec, &LogicalPayload::uniform(d), config, &mut source)?;
    let table = |value: &str, rows: Vec<(f64, f64)>| -> Result<SweepTable> {
        Ok(annotate(SweepTable::new("k", value, config.mode, rows)?, config)
            .with_meta("n", n)
            .with_meta("strategy", format!("{:?}", config.strategy).to_lowercase()))
    };
    Ok(CascadeCurve {
        n_sites: n,
        p_fail: table(
            "p_fail",
            result
                .records
                .iter()
                .zip(&result.p_fail_cumulative)
                .map(|(r, &f)| (r.index as f64, f))
                .collect(),
        )?,
        p_k: table(
            "p_k",
            result.records.iter().map(|r| (r.index as f64, r.p)).collect(),
        )?,
        t_k: table(
            "jt_k",
            result.records.iter().map(|r| (r.index as f64, r.t)).collect(),
        )?,
    })
}

/// Failure curves for several chain lengths, `k_max` iterations each.
pub fn failure_curves(
    lengths: &[usize],
    d: usize,
    k_max: usize,
    config: &ProtocolConfig,
) -> Result<Vec<CascadeCurve>> {
    if k_max < 1 {
        return Err(invalid("k_max", "need at least one iteration"));
    }
    let config = ProtocolConfig {
        max_iter: k_max,
        ..config.clone()
    };
    lengths
        .par_iter()
        .map(|&n| failure_curve(n, d, &config))
        .collect()
}

/// Occupation `P_m = |F_{m1}(t_1)|² / (1 - P_1)` of sites `1..N-1` after a
/// failed first measurement.
pub fn post_failure_distribution(n: usize, d: usize, config: &ProtocolConfig) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(invalid("n", format!("need at least 3 sites, got {n}")));
    }
    let spec = ChainSpec::new(n, d, 1.0, 0.0)?;
    let dynamics = SectorDynamics::new(&spec, config.mode)?;
    let state = protocol::initialize(&spec, &LogicalPayload::uniform(d))?;
    let optimum = optimize_on_grid(
        dynamics.receiver_probability(&state.spatial),
        config.first_window_for(n),
        config.grid_step,
        PeakCriterion::FirstPeak,
        config.peak_floor,
    )?;
    let evolved = protocol::evolve(&state, optimum.t, &dynamics)?;
    let failed = protocol::project(&evolved, Outcome::Failure)?;
    let mut dist = protocol::excitation_distribution(&failed);
    dist.truncate(n - 1);
    Ok(dist)
}

/// Sine-formula versus swap-chain spectrum for each length.
pub fn eigenpair_diagnostics(lengths: &[usize]) -> Result<Vec<EigenpairDiagnostic>> {
    lengths
        .iter()
        .map(|&n| Ok(eigenpair_residual(&ChainSpec::new(n, 3, 1.0, 0.0)?)))
        .collect()
}
