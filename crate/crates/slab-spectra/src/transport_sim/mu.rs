//! Discrete-ordinates rules in μ, symmetric about 0.

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuRule {
    /// Gauss–Legendre on [-1, 1].
    FullGauss { n: usize },
    /// Gauss–Legendre on (0, 1) mirrored to (-1, 0).
    HalfRangeGauss { per_half: usize },
    /// Gauss–Legendre in ln μ over [ln μ_min, 0] in four panels, mirrored; for long horizons.
    LogGraded { per_half: usize, mu_min: f64 },
}

impl Default for MuRule {
    fn default() -> Self {
        MuRule::HalfRangeGauss { per_half: 16 }
    }
}

/// Ascending nodes with weights summing to 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuQuad {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MuQuad {
    pub fn new(rule: MuRule) -> Result<Self> {
        let half: Vec<(f64, f64)> = match rule {
            MuRule::FullGauss { n } => {
                if n < 2 || n % 2 == 1 {
                    return Err(Error::Invalid(format!("mu rule: full Gauss needs an even n >= 2, got {n}")));
                }
                GaussRule::new(n).on(-1.0, 1.0).filter(|p| p.0 > 0.0).collect()
            }
            MuRule::HalfRangeGauss { per_half } => {
                if per_half == 0 {
                    return Err(Error::Invalid("mu rule: per_half must be positive".into()));
                }
                GaussRule::new(per_half).on(0.0, 1.0).collect()
            }
            MuRule::LogGraded { per_half, mu_min } => {
                if per_half < 4 || per_half % 4 != 0 || !(mu_min > 0.0 && mu_min < 1.0) {
                    return Err(Error::Invalid(format!(
                        "mu rule: log-graded needs per_half a positive multiple of 4 and 0 < mu_min < 1 (got {per_half}, {mu_min})"
                    )));
                }
                let g = GaussRule::new(per_half / 4);
                let l = mu_min.ln();
                let mut v: Vec<(f64, f64)> = (0..4)
                    .flat_map(|k| {
                        let a = l * (1.0 - k as f64 / 4.0);
                        let b = l * (1.0 - (k + 1) as f64 / 4.0);
                        g.on(a, b).map(|(s, w)| (s.exp(), w * s.exp())).collect::<Vec<_>>()
                    })
                    .collect();
                let tot: f64 = v.iter().map(|p| p.1).sum();
                for p in &mut v {
                    p.1 /= tot;
                }
                v
            }
        };
        let mut half = half;
        half.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes: Vec<f64> = half.iter().rev().map(|p| -p.0).collect();
        let mut weights: Vec<f64> = half.iter().rev().map(|p| p.1).collect();
        nodes.extend(half.iter().map(|p| p.0));
        weights.extend(half.iter().map(|p| p.1));
        Ok(MuQuad { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Positive half as (μ, w) pairs.
    pub fn half(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().zip(&self.weights).filter(|p| *p.0 > 0.0).map(|(&m, &w)| (m, w)).collect()
    }

    /// Index of the node -μ_j.
    pub fn mirror(&self, j: usize) -> usize {
        self.len() - 1 - j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_symmetric_and_normalized() {
        for r in [
            MuRule::FullGauss { n: 32 },
            MuRule::HalfRangeGauss { per_half: 16 },
            MuRule::LogGraded { per_half: 32, mu_min: 1e-5 },
        ] {
            let q = MuQuad::new(r).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for j in 0..q.len() {
                assert_eq!(q.nodes[j], -q.nodes[q.mirror(j)]);
            }
        }
    }

    #[test]
    fn half_range_integrates_abs_mu() {
        let q = MuQuad::new(MuRule::HalfRangeGauss { per_half: 8 }).unwrap();
        let v: f64 = q.nodes.iter().zip(&q.weights).map(|(m, w)| w * m.abs()).sum();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_graded_reaches_mu_min() {
        let q = MuQuad::new(MuRule::LogGraded { per_half: 32, mu_min: 1e-5 }).unwrap();
        let smallest = q.half()[0].0;
        assert!(smallest < 2e-5 && smallest > 1e-5);
    }
}
