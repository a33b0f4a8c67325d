//! Boundary-rate, Harnack-quotient and oscillation diagnostics for solved
//! profiles.
//!
//! The exponent map: with forcing weight `d^mu` and singularity `u^-alpha`,
//! the boundary growth of the solution is linear in `d` when
//! `alpha < 1 + mu`, carries a logarithmic correction
//! `d (D - log d)^{1/(1+alpha)}` when `alpha = 1 + mu`, and follows the
//! power `d^{(2+mu)/(1+alpha)}` when `alpha > 1 + mu`. `regime_predict`
//! returns the predicted shape, `fit_power` and `fit_log_corrected` recover
//! the observed one from a profile by least squares in log coordinates, and
//! `rate_report` bundles both fits next to the prediction.
//!
//! `harnack_ratio` measures the boundary Harnack quotient of `v = u/d` at a
//! given scale: the `L^p` mean of `v` over the strip `0 < d <= delta s`
//! against its infimum over `delta s/2 <= d <= 3 delta s/2`, the infimum
//! cushioned by `s` times the `L^N` mean of the forcing. `oscillation_decay`
//! tracks the oscillation of `v` over dyadic boundary strips and fits its
//! decay exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::ProblemSpec;
use crate::transforms::down;

/// Predicted boundary growth shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RatePrediction {
    Linear { exponent: f64 },
    LogCorrected { exponent: f64, log_power: f64 },
    Power { exponent: f64 },
}

impl RatePrediction {
    /// Exponent of the plain power factor in the predicted rate.
    pub fn exponent(&self) -> f64 {
        match self {
            RatePrediction::Linear { exponent }
            | RatePrediction::LogCorrected { exponent, .. }
            | RatePrediction::Power { exponent } => *exponent,
        }
    }
}

/// Boundary-rate regime determined by `mu` and `alpha`.
pub fn regime_predict(mu: f64, alpha: f64) -> Result<RatePrediction> {
    if !(mu >= 0.0 && mu.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Validation(format!(
            "regime prediction needs mu >= 0 and alpha > 0 (got mu = {mu}, alpha = {alpha})"
        )));
    }
    let critical = 1.0 + mu;
    let tol = 1e-12 * (1.0 + alpha.abs());
    Ok(if (alpha - critical).abs() <= tol {
        RatePrediction::LogCorrected {
            exponent: 1.0,
            log_power: 1.0 / (1.0 + alpha),
        }
    } else if alpha < critical {
        RatePrediction::Linear { exponent: 1.0 }
    } else {
        RatePrediction::Power {
            exponent: (2.0 + mu) / (1.0 + alpha),
        }
    })
}

/// Least-squares power law `u ~ amplitude * d^exponent` over a distance
/// window, fitted in log-log coordinates. `residual` is the root mean
/// square misfit of `log u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub nodes: usize,
}

/// Least-squares log-corrected law
/// `u ~ amplitude * d * (offset - log d)^{1/(1+alpha)}`. The offset is
/// found by golden-section search on `[1e-3, 60]`; `at_bracket_edge`
/// reports an optimum pinned to an end of that bracket, which means the
/// offset is not identified by the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub amplitude: f64,
    pub offset: f64,
    pub residual: f64,
    pub at_bracket_edge: bool,
    pub nodes: usize,
}

const MIN_FIT_NODES: usize = 20;

fn window_points(u: &GridFunction, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Validation(format!(
            "fit window must satisfy 0 < lo < hi (got ({lo}, {hi}))"
        )));
    }
    let a = u.grid().a();
    let mut points = Vec::new();
    for i in 0..u.len() {
        let d = u.grid().node(i) - a;
        if d >= lo && d <= hi && u.value(i) > 0.0 {
            points.push((d, u.value(i)));
        }
    }
    if points.len() < MIN_FIT_NODES {
        return Err(Error::Fit(format!(
            "window ({lo}, {hi}) holds {} usable nodes, need at least {MIN_FIT_NODES}",
            points.len()
        )));
    }
    Ok(points)
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let e = y - slope * x - intercept;
        ss += e * e;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Fit `u ~ amplitude * d^exponent` over the absolute distance window
/// `(lo, hi)` measured from the inner edge of the grid.
pub fn fit_power(u: &GridFunction, window: (f64, f64)) -> Result<PowerFit> {
    let points = window_points(u, window)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, residual) = line_fit(&xs, &ys);
    Ok(PowerFit {
        exponent: slope,
        amplitude: intercept.exp(),
        residual,
        nodes: points.len(),
    })
}

const OFFSET_BRACKET: (f64, f64) = (1e-3, 60.0);

/// Fit `u ~ amplitude * d * (offset - log d)^{1/(1+alpha)}` over the
/// window, minimizing the log-space misfit over the offset.
pub fn fit_log_corrected(u: &GridFunction, window: (f64, f64), alpha: f64) -> Result<LogFit> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Validation(format!(
            "log-corrected fit needs alpha > 0 (got {alpha})"
        )));
    }
    let beta = 1.0 / (1.0 + alpha);
    let points = window_points(u, window)?;
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(d, v)| (d.ln(), v.ln() - d.ln()))
        .collect();
    let misfit = |offset: f64| -> (f64, f64) {
        let mut shape = Vec::with_capacity(logs.len());
        for &(ld, y) in &logs {
            let g = offset - ld;
            if g <= 0.0 {
                return (f64::INFINITY, 0.0);
            }
            shape.push((y, beta * g.ln()));
        }
        let mean = shape.iter().map(|(y, s)| y - s).sum::<f64>() / shape.len() as f64;
        let ss = shape
            .iter()
            .map(|(y, s)| {
                let e = y - s - mean;
                e * e
            })
            .sum::<f64>()
            / shape.len() as f64;
        (ss.sqrt(), mean)
    };
    let (mut lo, mut hi) = OFFSET_BRACKET;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = misfit(x1).0;
    let mut f2 = misfit(x2).0;
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = misfit(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = misfit(x2).0;
        }
    }
    let offset = 0.5 * (lo + hi);
    let (residual, mean) = misfit(offset);
    if !residual.is_finite() {
        return Err(Error::Fit(format!(
            "log-corrected fit found no admissible offset in [{}, {}]",
            OFFSET_BRACKET.0, OFFSET_BRACKET.1
        )));
    }
    let span = OFFSET_BRACKET.1 - OFFSET_BRACKET.0;
    let at_bracket_edge = offset <= OFFSET_BRACKET.0 + 1e-3 * span
        || offset >= OFFSET_BRACKET.1 - 1e-3 * span;
    Ok(LogFit {
        amplitude: mean.exp(),
        offset,
        residual,
        at_bracket_edge,
        nodes: points.len(),
    })
}

/// Prediction and both fits for one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub prediction: RatePrediction,
    pub power: PowerFit,
    pub log: LogFit,
}

/// Predict the regime from the forcing exponents and run both fits on the
/// profile over the given absolute distance window.
pub fn rate_report(
    u: &GridFunction,
    spec: &ProblemSpec,
    window: (f64, f64),
) -> Result<RateReport> {
    Ok(RateReport {
        prediction: regime_predict(spec.forcing.mu, spec.forcing.alpha)?,
        power: fit_power(u, window)?,
        log: fit_log_corrected(u, window, spec.forcing.alpha)?,
    })
}

const HARNACK_STRIP: f64 = 0.1;

fn weighted_strip(
    u: &GridFunction,
    l: f64,
    lo: f64,
    hi: f64,
) -> Result<(Vec<(f64, f64, f64)>, f64)> {
    let grid = u.grid();
    let a = grid.a();
    let mut rows = Vec::new();
    let mut total = 0.0;
    for i in 1..u.len() {
        let d = grid.node(i) - a;
        if d < lo || d > hi {
            continue;
        }
        let left = grid.node(i - 1);
        let right = if i + 1 < u.len() {
            grid.node(i + 1)
        } else {
            grid.node(i)
        };
        let weight = 0.5 * (right - left);
        let v = down(l, u.value(i)) / d;
        rows.push((d, v, weight));
        total += weight;
    }
    if rows.len() < 3 {
        return Err(Error::Validation(format!(
            "strip [{lo}, {hi}] holds {} grid nodes, need at least 3; use a finer grid or a larger scale",
            rows.len()
        )));
    }
    Ok((rows, total))
}

/// Boundary Harnack quotient of `v = down(l, u)/d` at one scale.
///
/// `p` is the averaging power of the numerator; `l = 0` leaves `u`
/// untransformed. The denominator is the infimum of `v` over the
/// companion strip plus `scale` times the `L^dim` mean of the forcing
/// over the inner strip.
pub fn harnack_ratio(
    u: &GridFunction,
    spec: &ProblemSpec,
    scale: f64,
    p: f64,
    l: f64,
) -> Result<f64> {
    spec.validate()?;
    if !(scale > 0.0 && scale.is_finite()) || !(p > 0.0 && p.is_finite()) {
        return Err(Error::Validation(format!(
            "harnack needs scale > 0 and p > 0 (got scale = {scale}, p = {p})"
        )));
    }
    let width = u.grid().b() - u.grid().a();
    let inner_hi = HARNACK_STRIP * scale;
    let companion = (inner_hi / 2.0, 1.5 * inner_hi);
    if companion.1 > width {
        return Err(Error::Validation(format!(
            "scale {scale} pushes the companion strip past the outer edge (width {width})"
        )));
    }
    let (inner, inner_total) = weighted_strip(u, l, 0.0, inner_hi)?;
    let (outer, _) = weighted_strip(u, l, companion.0, companion.1)?;
    let mut mean_vp = 0.0;
    let mut mean_fn = 0.0;
    let dim_pow = spec.dim as f64;
    for &(d, v, w) in &inner {
        if !(v > 0.0) {
            return Err(Error::DegenerateInfimum { scale });
        }
        mean_vp += w * v.powf(p);
        if spec.forcing.M > 0.0 {
            let f = spec.forcing.M * d.powf(spec.forcing.mu) * (v * d).powf(-spec.forcing.alpha);
            mean_fn += w * f.powf(dim_pow);
        }
    }
    mean_vp /= inner_total;
    mean_fn /= inner_total;
    let forcing_norm = if spec.forcing.M > 0.0 {
        mean_fn.powf(1.0 / dim_pow)
    } else {
        0.0
    };
    let inf = outer
        .iter()
        .map(|&(_, v, _)| v)
        .fold(f64::INFINITY, f64::min);
    if !(inf > 0.0) {
        return Err(Error::DegenerateInfimum { scale });
    }
    Ok(mean_vp.powf(1.0 / p) / (inf + scale * forcing_norm))
}

/// Oscillation of the boundary quotient over dyadic strips.
///
/// `scales[k]` is `width * 2^{-(k+1)}` for `k = 0 .. 5`; `oscillations[k]`
/// is the oscillation of `v = u/d` over `0 < d <= scales[k]`; `gammas[k]`
/// compares the oscillation at twice the scale against the one at half the
/// scale cushioned by `c_const * scales[k]^{1-nu}`. `fitted_tau` is the
/// log-log slope of the oscillation against the scale, absent for flat
/// quotients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub scales: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub gammas: Vec<f64>,
    pub fitted_tau: Option<f64>,
    pub fit_residual: Option<f64>,
    pub flat: bool,
}

pub fn oscillation_decay(u: &GridFunction, nu: f64, c_const: f64) -> Result<OscillationReport> {
    if !(nu < 1.0 && nu.is_finite()) || !(c_const >= 0.0 && c_const.is_finite()) {
        return Err(Error::Validation(format!(
            "oscillation needs nu < 1 and c >= 0 (got nu = {nu}, c = {c_const})"
        )));
    }
    let grid = u.grid();
    let a = grid.a();
    let width = grid.b() - a;
    let quotient: Vec<(f64, f64)> = (1..u.len())
        .map(|i| {
            let d = grid.node(i) - a;
            (d, u.value(i) / d)
        })
        .collect();
    let osc_at = |s: f64| -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut count = 0usize;
        for &(d, v) in &quotient {
            if d <= s {
                lo = lo.min(v);
                hi = hi.max(v);
                count += 1;
            }
        }
        if count < 2 {
            return Err(Error::Validation(format!(
                "strip of width {s} holds {count} grid nodes, need at least 2"
            )));
        }
        Ok(hi - lo)
    };
    let all: Vec<f64> = (0..=7)
        .map(|k| osc_at(width * 0.5f64.powi(k)))
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = (1..=6).map(|k| width * 0.5f64.powi(k)).collect();
    let oscillations: Vec<f64> = (1..=6).map(|k| all[k as usize]).collect();
    let vmax = quotient
        .iter()
        .map(|&(_, v)| v.abs())
        .fold(0.0f64, f64::max);
    let flat = all.iter().all(|&o| o <= 1e-10 * (1.0 + vmax));
    let mut gammas = Vec::new();
    for k in 1..=6usize {
        let top = all[k - 1];
        let bottom = all[k + 1] + c_const * scales[k - 1].powf(1.0 - nu);
        gammas.push(if bottom > 0.0 { top / bottom } else { 0.0 });
    }
    let (fitted_tau, fit_residual) = if flat {
        (None, None)
    } else {
        let xs: Vec<f64> = scales
            .iter()
            .zip(&oscillations)
            .filter(|(_, &o)| o > 0.0)
            .map(|(&s, _)| s.ln())
            .collect();
        let ys: Vec<f64> = oscillations
            .iter()
            .filter(|&&o| o > 0.0)
            .map(|&o| o.ln())
            .collect();
        if xs.len() >= 3 {
            let (slope, _, residual) = line_fit(&xs, &ys);
            (Some(slope), Some(residual))
        } else {
            (None, None)
        }
    };
    Ok(OscillationReport {
        scales,
        oscillations,
        gammas,
        fitted_tau,
        fit_residual,
        flat,
    })
}
