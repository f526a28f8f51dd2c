//! Predicted Hölder exponents and their empirical counterparts: log-log
//! fits of increment moments, moment scans over simulated ensembles, and
//! the mollifier approximation gap.

mod mollifier;
mod scan;

pub use mollifier::{mollifier_decay_check, mollifier_gap, MollifierCheck};
pub use scan::{
    analytic_temporal_curve, burn_in_time, increment_moment_scan, log_grid, sample_vertices, temporal_window, MomentRow,
    ScanMode,
    MIN_PAIRS_PER_BIN, MIN_REPLICAS,
};

use std::fmt::Write as _;

use crate::fractal::spectral_dimension;
use crate::stats::line_fit;
use crate::{Error, Result};

/// Exponents predicted for the solution with smoothing parameter `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPrediction {
    pub alpha: f64,
    pub d_s: f64,
    pub d_h: f64,
    /// `δ^α`, joint exponent in `(t, x)` for the sup metric
    pub joint: f64,
    /// path exponent in space
    pub spatial: f64,
    /// path exponent in time
    pub temporal: f64,
    /// exponent of `E[(u(t,x) - u(t,y))²]` in `R(x,y)`
    pub spatial_moment: f64,
    /// exponent of `E[(u(s,x) - u(t,x))²]` in `|s - t|`
    pub temporal_moment: f64,
}

pub fn theoretical_exponents(alpha: f64, d_h: f64) -> Result<ExponentPrediction> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("α must be finite and nonnegative, got {alpha}")));
    }
    // bisected dimensions of interval-like structures land a few ulps below 1
    if !(d_h >= 1.0 - 1e-9) || !d_h.is_finite() {
        return Err(Error::InvalidArgument(format!("Hausdorff dimension must be at least 1, got {d_h}")));
    }
    let d_h = d_h.max(1.0);
    let d_s = spectral_dimension(d_h)?;
    let joint = if alpha <= d_s / 2.0 {
        0.5 * (1.0 - d_s / 2.0)
    } else if alpha <= d_s {
        0.5 * (1.0 - d_s + alpha)
    } else {
        0.5
    };
    let temporal_moment = (1.0 - d_s / 2.0).max((1.0 - d_s + alpha).min(1.0)).min(1.0);
    Ok(ExponentPrediction {
        alpha,
        d_s,
        d_h,
        joint,
        spatial: 0.5,
        temporal: temporal_moment / 2.0,
        spatial_moment: 1.0,
        temporal_moment,
    })
}

/// Least-squares fit of `log(moment^{1/p})` against `log(abscissa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the log-log residuals
    pub residual: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
    pub slope_se: f64,
}

impl HolderFit {
    /// `slope ± z·se`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.slope_se, self.slope + z * self.slope_se)
    }

    /// Decades covered by the abscissas.
    pub fn decades(&self) -> f64 {
        (self.x_hi / self.x_lo).log10()
    }
}

pub const MIN_FIT_POINTS: usize = 5;

pub fn fit_exponent(pairs: &[(f64, f64)], p: f64) -> Result<HolderFit> {
    if !(p > 0.0) {
        return Err(Error::DegenerateFit(format!("moment order must be positive, got {p}")));
    }
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} points, at least {MIN_FIT_POINTS} needed",
            pairs.len()
        )));
    }
    if let Some(&(x, m)) = pairs.iter().find(|(x, m)| !(*x > 0.0 && *m > 0.0 && x.is_finite() && m.is_finite())) {
        return Err(Error::DegenerateFit(format!("abscissas and moments must be positive, got ({x}, {m})")));
    }
    let x_lo = pairs.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
    let x_hi = pairs.iter().map(|q| q.0).fold(0.0, f64::max);
    if (x_hi / x_lo).log10() < 1.0 - 1e-12 {
        return Err(Error::DegenerateFit(format!("abscissas span [{x_lo:e}, {x_hi:e}], less than a decade")));
    }
    let xs: Vec<f64> = pairs.iter().map(|q| q.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|q| q.1.ln() / p).collect();
    let y_lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let y_hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if y_hi - y_lo <= 1e-12 * (1.0 + y_hi.abs()) {
        return Err(Error::DegenerateFit("moments do not vary: no scaling to fit".into()));
    }
    let f = line_fit(&xs, &ys);
    Ok(HolderFit {
        slope: f.slope,
        intercept: f.intercept,
        residual: f.residual,
        x_lo,
        x_hi,
        points: pairs.len(),
        slope_se: f.slope_se,
    })
}

/// One line of an exponent report.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub mode: String,
    pub alpha: f64,
    pub predicted: f64,
    pub fitted: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

impl ExponentRow {
    /// Row for a fit with a 95% normal interval on the slope.
    pub fn from_fit(mode: &str, alpha: f64, predicted: f64, fit: &HolderFit) -> Self {
        let (ci_low, ci_high) = fit.interval(1.96);
        ExponentRow {
            mode: mode.to_string(),
            alpha,
            predicted,
            fitted: fit.slope,
            ci_low,
            ci_high,
            window_lo: fit.x_lo,
            window_hi: fit.x_hi,
        }
    }
}

pub const EXPONENT_CSV_HEADER: &str = "mode,alpha,predicted,fitted,ci_low,ci_high,window_lo,window_hi";

pub fn exponent_csv(rows: &[ExponentRow]) -> String {
    let mut s = format!("{EXPONENT_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.mode, r.alpha, r.predicted, r.fitted, r.ci_low, r.ci_high, r.window_lo, r.window_hi
        );
    }
    s
}
