//! Ensemble runs and their reductions: windowed average fidelity, sweeps
//! over the common field scale, threshold crossings, the linear
//! extrapolation of the threshold to larger registers, and infidelity
//! against the number of fluctuating sites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::StabilizerModel;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, Evolver, FidelityTrace};
use crate::noise::{sample_fields, DefectMask, NoiseParams};

/// Default threshold on the windowed average fidelity.
pub const DEFAULT_LEVEL: f64 = 0.99;

/// Field scale used for defect sweeps unless configured otherwise.
pub const DEFAULT_DEFECT_DELTA: f64 = 0.5;

/// Default sweep grid, in units of the gap.
pub const DEFAULT_DELTA_GRID: [f64; 10] = [0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0];

const TIME_EPS: f64 = 1e-9;

/// An averaging interval `[t0, t1]` in units of `hbar / delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub name: String,
    pub t0: f64,
    pub t1: f64,
}

impl Window {
    pub fn new(name: impl Into<String>, t0: f64, t1: f64) -> Self {
        Self {
            name: name.into(),
            t0,
            t1,
        }
    }

    /// `[0, 2]`.
    pub fn short() -> Self {
        Self::new("short", 0.0, 2.0)
    }

    /// `[0, 6]`.
    pub fn long() -> Self {
        Self::new("long", 0.0, 6.0)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "short" => Some(Self::short()),
            "long" => Some(Self::long()),
            _ => None,
        }
    }
}

/// Which qubits fluctuate in each sample of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskPolicy {
    All,
    /// A fresh uniformly random subset of this size per sample.
    Random(usize),
    Fixed(DefectMask),
}

impl MaskPolicy {
    fn mask(&self, n_qubits: usize, seed: u64, sample_index: usize) -> Result<DefectMask> {
        match self {
            MaskPolicy::All => Ok(DefectMask::all(n_qubits)),
            MaskPolicy::Random(k) => DefectMask::random(n_qubits, *k, seed, sample_index),
            MaskPolicy::Fixed(m) => {
                if m.n_qubits() != n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: n_qubits,
                        found: m.n_qubits(),
                    });
                }
                Ok(m.clone())
            }
        }
    }
}

/// Runs every sample of `params` and returns the traces in sample order.
/// Samples run on the current rayon pool; the result does not depend on
/// the pool size.
pub fn run_ensemble(
    model: &StabilizerModel,
    params: &NoiseParams,
    masks: &MaskPolicy,
    config: &EvolutionConfig,
) -> Result<Vec<FidelityTrace>> {
    let evolver = Evolver::new(model)?;
    run_ensemble_with(&evolver, model.n_qubits(), params, masks, config)
}

fn run_ensemble_with(
    evolver: &Evolver,
    n_qubits: usize,
    params: &NoiseParams,
    masks: &MaskPolicy,
    config: &EvolutionConfig,
) -> Result<Vec<FidelityTrace>> {
    params.validate()?;
    config.validate()?;
    (0..params.n_samples)
        .into_par_iter()
        .map(|k| {
            let mask = masks.mask(n_qubits, params.seed, k)?;
            let sample = sample_fields(params, &mask, k)?;
            evolver.trace(&sample, config, k)
        })
        .collect()
}

/// Mean of `F` over `window`, integrating the piecewise-linear
/// interpolant of the recorded points (the trapezoid rule on the grid).
pub fn time_average(trace: &FidelityTrace, window: &Window) -> Result<f64> {
    let (t0, t1) = (window.t0, window.t1);
    let empty = || Error::EmptyWindow { t0, t1 };
    let times = &trace.times;
    if t1.partial_cmp(&t0) != Some(std::cmp::Ordering::Greater) || times.len() < 2 {
        return Err(empty());
    }
    let (first, last) = (times[0], times[times.len() - 1]);
    if t0 < first - TIME_EPS || t1 > last + TIME_EPS {
        return Err(empty());
    }
    let inside = times.iter().filter(|&&t| t >= t0 - TIME_EPS && t <= t1 + TIME_EPS).count();
    if inside < 2 {
        return Err(empty());
    }
    let f = &trace.fidelity;
    let mut integral = 0.0;
    for k in 0..times.len() - 1 {
        let (ta, tb) = (times[k], times[k + 1]);
        let a = ta.max(t0);
        let b = tb.min(t1);
        if b <= a {
            continue;
        }
        let slope = (f[k + 1] - f[k]) / (tb - ta);
        let fa = f[k] + slope * (a - ta);
        let fb = f[k] + slope * (b - ta);
        integral += 0.5 * (b - a) * (fa + fb);
    }
    Ok(integral / (t1 - t0))
}

/// Mean and sample standard deviation (`n - 1` denominator). Constant
/// input gives exactly that constant and zero.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Ensemble statistics of the windowed average fidelity at one field scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub mean_avg_fidelity: f64,
    pub std_avg_fidelity: f64,
    pub n_samples: usize,
    /// Windowed average per sample index, in sample order.
    pub per_sample: Vec<f64>,
}

/// For each `delta` in `grid`, sets all four bounds to `delta`, runs the
/// ensemble once, and reduces it over every window. Returns one sweep per
/// window, in window order.
pub fn delta_sweep_windows(
    model: &StabilizerModel,
    template: &NoiseParams,
    grid: &[f64],
    windows: &[Window],
    config: &EvolutionConfig,
) -> Result<Vec<Vec<SweepPoint>>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("delta grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidParameter("delta grid must be strictly ascending".into()));
    }
    config.validate()?;
    let evolver = Evolver::new(model)?;
    let n = template.n_samples;
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|d| (0..n).map(move |k| (d, k))).collect();
    let averages: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(d, k)| {
            let params = template.with_delta(grid[d]);
            params.validate()?;
            let sample = sample_fields(&params, &DefectMask::all(model.n_qubits()), k)?;
            let trace = evolver.trace(&sample, config, k)?;
            windows.iter().map(|w| time_average(&trace, w)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..windows.len())
        .map(|w| {
            grid.iter()
                .enumerate()
                .map(|(d, &delta)| {
                    let per_sample: Vec<f64> = (0..n).map(|k| averages[d * n + k][w]).collect();
                    let (mean, std) = mean_std(&per_sample);
                    SweepPoint {
                        delta,
                        mean_avg_fidelity: mean,
                        std_avg_fidelity: std,
                        n_samples: n,
                        per_sample,
                    }
                })
                .collect()
        })
        .collect())
}

/// Single-window form of [`delta_sweep_windows`].
pub fn delta_sweep(
    model: &StabilizerModel,
    template: &NoiseParams,
    grid: &[f64],
    window: &Window,
    config: &EvolutionConfig,
) -> Result<Vec<SweepPoint>> {
    Ok(delta_sweep_windows(model, template, grid, std::slice::from_ref(window), config)?.remove(0))
}

/// Where the mean curve crosses `level`, with the spread of the individual
/// samples' crossings as the error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub level: f64,
    pub delta_star: f64,
    pub delta_star_std: f64,
    /// Samples whose own curve crossed the level inside the grid.
    pub n_crossed: usize,
    /// Samples excluded because their curve never crossed (or started below).
    pub n_excluded: usize,
}

/// First downward crossing of `level` by linear interpolation. Fails when
/// the first point is already below or no point is.
fn crossing(deltas: &[f64], values: &[f64], level: f64) -> std::result::Result<f64, String> {
    let Some(first_below) = values.iter().position(|&v| v < level) else {
        return Err(format!("no point falls below {level}"));
    };
    if first_below == 0 {
        return Err(format!("the first point {} is already below {level}", values[0]));
    }
    let (x0, x1) = (deltas[first_below - 1], deltas[first_below]);
    let (y0, y1) = (values[first_below - 1], values[first_below]);
    Ok(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
}

pub fn threshold_delta(sweep: &[SweepPoint], level: f64) -> Result<Threshold> {
    let deltas: Vec<f64> = sweep.iter().map(|p| p.delta).collect();
    let means: Vec<f64> = sweep.iter().map(|p| p.mean_avg_fidelity).collect();
    let delta_star = crossing(&deltas, &means, level).map_err(|reason| Error::ThresholdNotBracketed { level, reason })?;

    let n_samples = sweep.iter().map(|p| p.per_sample.len()).min().unwrap_or(0);
    let crossings: Vec<f64> = (0..n_samples)
        .filter_map(|k| {
            let values: Vec<f64> = sweep.iter().map(|p| p.per_sample[k]).collect();
            crossing(&deltas, &values, level).ok()
        })
        .collect();
    let std = if crossings.is_empty() { f64::NAN } else { mean_std(&crossings).1 };
    Ok(Threshold {
        level,
        delta_star,
        delta_star_std: std,
        n_crossed: crossings.len(),
        n_excluded: n_samples - crossings.len(),
    })
}

/// Least-squares line `y = slope * x + intercept` with its x-axis crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `-intercept / slope`; `None` when the slope is not negative.
    pub x_intercept: Option<f64>,
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Ordinary least squares of the threshold against the qubit count.
pub fn fit_nmax(points: &[(f64, f64)]) -> Result<LinearFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientPoints(distinct.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    let (x_intercept, diagnostic) = if slope < 0.0 {
        (Some(-intercept / slope), None)
    } else {
        (
            None,
            Some(format!("slope {slope} is not negative; the line never reaches zero at larger N")),
        )
    };
    Ok(LinearFit {
        slope,
        intercept,
        x_intercept,
        points: points.to_vec(),
        residuals,
        diagnostic,
    })
}

/// Infidelity statistics for one number of fluctuating sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectPoint {
    pub n_defect: usize,
    pub mean_infidelity: f64,
    pub std_infidelity: f64,
    pub n_samples: usize,
}

/// For each defect count, runs the ensemble with a random subset of that
/// size per sample and reports `1 - (windowed average fidelity)`.
pub fn defect_sweep(
    model: &StabilizerModel,
    params: &NoiseParams,
    window: &Window,
    n_defect_grid: &[usize],
    config: &EvolutionConfig,
) -> Result<Vec<DefectPoint>> {
    let n = model.n_qubits();
    if let Some(&k) = n_defect_grid.iter().find(|&&k| k > n) {
        return Err(Error::InvalidParameter(format!("{k} defects on a {n}-qubit model")));
    }
    params.validate()?;
    config.validate()?;
    let evolver = Evolver::new(model)?;
    let s = params.n_samples;
    let jobs: Vec<(usize, usize)> = (0..n_defect_grid.len()).flat_map(|d| (0..s).map(move |k| (d, k))).collect();
    let infidelity: Vec<f64> = jobs
        .par_iter()
        .map(|&(d, k)| {
            let mask = DefectMask::random(n, n_defect_grid[d], params.seed, k)?;
            let sample = sample_fields(params, &mask, k)?;
            let trace = evolver.trace(&sample, config, k)?;
            Ok(1.0 - time_average(&trace, window)?)
        })
        .collect::<Result<_>>()?;
    Ok(n_defect_grid
        .iter()
        .enumerate()
        .map(|(d, &n_defect)| {
            let (mean, std) = mean_std(&infidelity[d * s..(d + 1) * s]);
            DefectPoint {
                n_defect,
                mean_infidelity: mean,
                std_infidelity: std,
                n_samples: s,
            }
        })
        .collect())
}

/// Pearson correlation coefficient; `None` if either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
