use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Acceptance thresholds of a power-law fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Smallest exponent counted as decay.
    pub min_gamma: f64,
    /// Largest root-mean-square residual in natural-log units.
    pub max_rms: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            min_gamma: 1e-3,
            max_rms: 0.5,
        }
    }
}

/// Least-squares fit of `mass ~ m_hat * delta^gamma_hat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma_hat: f64,
    pub m_hat: f64,
    /// Residuals `ln mass - fitted`, one per point used.
    pub residuals: Vec<f64>,
    pub residual_rms: f64,
    pub points_used: usize,
    /// Positive slope and a small residual: a straight line in log-log coordinates.
    pub consistent: bool,
}

/// Straight-line least squares; returns `(slope, intercept)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits the decay exponent of masses against radii.
///
/// The decaying range drops points at the plateau value (the largest mass) when at
/// least four points remain below it; otherwise all positive points are used.
pub fn fit_decay(deltas: &[f64], masses: &[f64], opts: FitOptions) -> Result<DecayFit> {
    if deltas.len() != masses.len() {
        return Err(Error::DegenerateGrid("radii and masses differ in length".into()));
    }
    let positive: Vec<(f64, f64)> = deltas
        .iter()
        .zip(masses)
        .filter(|(d, m)| **d > 0.0 && **m > 0.0 && d.is_finite() && m.is_finite())
        .map(|(d, m)| (*d, *m))
        .collect();
    if positive.len() < 4 {
        return Err(Error::DegenerateGrid(format!("{} positive points; at least 4 needed", positive.len())));
    }
    let plateau = positive.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let below: Vec<(f64, f64)> = positive.iter().copied().filter(|p| p.1 < plateau).collect();
    let used = if below.len() >= 4 { below } else { positive };
    let xs: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let (gamma_hat, intercept) =
        least_squares(&xs, &ys).ok_or_else(|| Error::DegenerateGrid("radii are all equal".into()))?;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + gamma_hat * x)).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(DecayFit {
        gamma_hat,
        m_hat: intercept.exp(),
        points_used: used.len(),
        consistent: gamma_hat > opts.min_gamma && residual_rms <= opts.max_rms,
        residuals,
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let d: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
        let m: Vec<f64> = d.iter().map(|x| 3.0 * x.sqrt()).collect();
        let f = fit_decay(&d, &m, FitOptions::default()).unwrap();
        assert!((f.gamma_hat - 0.5).abs() < 1e-6 && (f.m_hat - 3.0).abs() < 1e-6);
        assert!(f.consistent && f.residual_rms < 1e-9);
    }

    #[test]
    fn constant_masses_are_flagged() {
        let d = [0.1, 0.2, 0.3, 0.4, 0.5];
        let f = fit_decay(&d, &[0.7; 5], FitOptions::default()).unwrap();
        assert!(f.gamma_hat.abs() < 1e-9 && !f.consistent);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_decay(&[0.1, 0.2, 0.3, 0.4], &[0.0, 0.1, 0.2, 0.3], FitOptions::default()),
            Err(Error::DegenerateGrid(_))
        ));
        assert!(fit_decay(&[0.5; 5], &[0.1, 0.2, 0.3, 0.4, 0.5], FitOptions::default()).is_err());
    }

    #[test]
    fn plateau_is_excluded() {
        let d: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).chain([1.0, 2.0]).collect();
        let m: Vec<f64> = d.iter().map(|x| (x * x).min(0.25)).collect();
        let f = fit_decay(&d, &m, FitOptions::default()).unwrap();
        assert!((f.gamma_hat - 2.0).abs() < 1e-9, "{f:?}");
    }
}
