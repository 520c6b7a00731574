//! Classification of a norm series ‖Z_t u₀‖ as bounded, logarithmic or power-law growth.

use crate::error::{Error, Result};
use crate::roots::line_fit;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthVerdict {
    Bounded,
    Logarithmic { b: f64 },
    Power { p: f64, p_lo: f64, p_hi: f64 },
    Unresolved { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub verdict: GrowthVerdict,
    /// Tail window [t0, t1] used for the fits.
    pub window: (f64, f64),
    pub rss_const: f64,
    pub rss_log: f64,
    pub rss_power: f64,
    /// Residual ratio between the two growth models, worse over better.
    pub ratio: f64,
    pub p: f64,
    pub p_se: f64,
    pub log_slope: f64,
    /// Change of the best growth model across the window, relative to the mean norm.
    pub rel_change: f64,
}

/// Minimum span of the series in decades of t.
pub const MIN_DECADES: f64 = 1.5;
pub const RATIO: f64 = 3.0;
pub const BOUNDED_CHANGE: f64 = 0.1;

/// Fits a, a + b ln t and a t^p on the tail half (in ln t) of the series.
pub fn growth_fit(t: &[f64], norm: &[f64]) -> Result<GrowthFit> {
    if t.len() != norm.len() {
        return Err(Error::Invalid("growth_fit: t and norm differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = t.iter().zip(norm).filter(|(t, n)| **t > 0.0 && **n > 0.0).map(|(t, n)| (*t, *n)).collect();
    let unresolved = |reason: String| GrowthFit {
        verdict: GrowthVerdict::Unresolved { reason },
        window: (0.0, 0.0),
        rss_const: f64::NAN,
        rss_log: f64::NAN,
        rss_power: f64::NAN,
        ratio: f64::NAN,
        p: f64::NAN,
        p_se: f64::NAN,
        log_slope: f64::NAN,
        rel_change: f64::NAN,
    };
    if pts.len() < 6 {
        return Ok(unresolved(format!("{} positive samples, need at least 6", pts.len())));
    }
    let (t0, t1) = (pts[0].0, pts[pts.len() - 1].0);
    let span = (t1 / t0).log10();
    if span < MIN_DECADES {
        return Ok(unresolved(format!("series spans {span:.2} decades, need {MIN_DECADES}")));
    }
    let mid = 0.5 * (t0.ln() + t1.ln());
    let tail: Vec<(f64, f64)> = pts.into_iter().filter(|(t, _)| t.ln() >= mid).collect();
    let m = tail.len();
    if m < 4 {
        return Ok(unresolved(format!("{m} samples in the tail half, need at least 4")));
    }
    let lt: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let n: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let ln_n: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let mean = n.iter().sum::<f64>() / m as f64;
    let floor = 1e-28 * n.iter().map(|v| v * v).sum::<f64>();
    let rss_const = n.iter().map(|v| (v - mean).powi(2)).sum::<f64>() + floor;
    let (_, b1, rms1, _) = line_fit(&lt, &n);
    let rss_log = rms1 * rms1 * m as f64 + floor;
    let (a2, p, _, p_se) = line_fit(&lt, &ln_n);
    let rss_power = lt.iter().zip(&n).map(|(l, v)| (v - (a2 + p * l).exp()).powi(2)).sum::<f64>() + floor;
    let (l0, l1) = (lt[0], lt[m - 1]);
    let log_better = rss_log <= rss_power;
    let change = if log_better { b1 * (l1 - l0) } else { (a2 + p * l1).exp() - (a2 + p * l0).exp() };
    let rel_change = change / mean;
    let ratio = rss_log.max(rss_power) / rss_log.min(rss_power);
    let verdict = if rel_change < BOUNDED_CHANGE || rss_const <= RATIO * rss_log.min(rss_power) {
        GrowthVerdict::Bounded
    } else if ratio >= RATIO {
        if log_better {
            GrowthVerdict::Logarithmic { b: b1 }
        } else {
            GrowthVerdict::Power { p, p_lo: p - 2.0 * p_se, p_hi: p + 2.0 * p_se }
        }
    } else {
        GrowthVerdict::Unresolved { reason: format!("log and power residuals within a factor {ratio:.2}") }
    };
    Ok(GrowthFit {
        verdict,
        window: (tail[0].0, tail[m - 1].0),
        rss_const,
        rss_log,
        rss_power,
        ratio,
        p,
        p_se,
        log_slope: b1,
        rel_change,
    })
}

/// Local exponent d ln‖u‖/d ln t by centred differences.
pub fn local_exponent(t: &[f64], norm: &[f64]) -> Vec<(f64, f64)> {
    (1..t.len().saturating_sub(1))
        .filter(|&i| t[i - 1] > 0.0)
        .map(|i| {
            let d = (norm[i + 1] / norm[i - 1]).ln() / (t[i + 1] / t[i - 1]).ln();
            (t[i], d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times() -> Vec<f64> {
        (0..=40).map(|k| 0.05 * 10f64.powf(3.3 * k as f64 / 40.0)).collect()
    }

    #[test]
    fn power_series_is_power() {
        let t = times();
        let n: Vec<f64> = t.iter().map(|t| 1.3 * t.powf(0.95)).collect();
        let f = growth_fit(&t, &n).unwrap();
        match f.verdict {
            GrowthVerdict::Power { p, p_lo, p_hi } => {
                assert!((0.9..=1.0).contains(&p) && p_lo <= 0.95 && p_hi >= 0.95, "{p}");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn log_series_is_logarithmic() {
        let t = times();
        let n: Vec<f64> = t.iter().map(|t| 2.0 + 3.0 * t.ln()).collect();
        let f = growth_fit(&t, &n).unwrap();
        assert!(matches!(f.verdict, GrowthVerdict::Logarithmic { b } if (b - 3.0).abs() < 1e-9), "{f:?}");
    }

    #[test]
    fn flat_and_decaying_are_bounded() {
        let t = times();
        let n: Vec<f64> = t.iter().map(|t| 1.0 + 0.01 * (t).sin()).collect();
        assert_eq!(growth_fit(&t, &n).unwrap().verdict, GrowthVerdict::Bounded);
        let n: Vec<f64> = t.iter().map(|t| 1.0 + 1.0 / t).collect();
        assert_eq!(growth_fit(&t, &n).unwrap().verdict, GrowthVerdict::Bounded);
    }

    #[test]
    fn short_series_is_unresolved() {
        let t: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let n = t.clone();
        assert!(matches!(growth_fit(&t, &n).unwrap().verdict, GrowthVerdict::Unresolved { .. }));
    }

    #[test]
    fn local_exponent_of_power() {
        let t = times();
        let n: Vec<f64> = t.iter().map(|t| t.powf(0.5)).collect();
        assert!(local_exponent(&t, &n).iter().all(|(_, d)| (d - 0.5).abs() < 1e-12));
    }
}
