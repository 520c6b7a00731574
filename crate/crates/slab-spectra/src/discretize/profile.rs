use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub value: f64,
}

/// Piecewise-constant cross-section c(x) with compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub segments: Vec<Segment>,
}

impl Profile {
    /// All-zero values are allowed (the trivial c ≡ 0 problem); an empty list is not.
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Invalid("profile.segments is empty".into()));
        }
        segments.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        for (i, s) in segments.iter().enumerate() {
            if !(s.x0 < s.x1) || !s.x0.is_finite() || !s.x1.is_finite() {
                return Err(Error::Invalid(format!("profile.segments[{i}]: need x0 < x1")));
            }
            if !(s.value >= 0.0) || !s.value.is_finite() {
                return Err(Error::Invalid(format!("profile.segments[{i}].value must be >= 0")));
            }
        }
        for w in segments.windows(2) {
            if w[1].x0 < w[0].x1 {
                return Err(Error::Invalid("profile.segments overlap".into()));
            }
        }
        Ok(Profile { segments })
    }

    /// κ·indicator[-a, a].
    pub fn step(kappa: f64, a: f64) -> Self {
        Profile { segments: vec![Segment { x0: -a, x1: a, value: kappa }] }
    }

    pub fn zero(a: f64) -> Self {
        Self::step(0.0, a)
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.value == 0.0)
    }

    fn support(&self) -> Option<(f64, f64)> {
        let pos: Vec<_> = self.segments.iter().filter(|s| s.value > 0.0).collect();
        Some((pos.first()?.x0, pos.last()?.x1))
    }

    /// Half the diameter of supp c.
    pub fn half_radius(&self) -> f64 {
        self.support().map(|(a, b)| 0.5 * (b - a)).unwrap_or(0.0)
    }

    /// Full diameter of supp c.
    pub fn diameter(&self) -> f64 {
        self.support().map(|(a, b)| b - a).unwrap_or(0.0)
    }

    pub fn center(&self) -> f64 {
        self.support().map(|(a, b)| 0.5 * (a + b)).unwrap_or(0.0)
    }

    /// Largest |x| over the support.
    pub fn radius(&self) -> f64 {
        self.support().map(|(a, b)| a.abs().max(b.abs())).unwrap_or(0.0)
    }

    pub fn l1(&self) -> f64 {
        self.segments.iter().map(|s| s.value * (s.x1 - s.x0)).sum()
    }

    pub fn scaled(&self, kappa: f64) -> Self {
        Profile {
            segments: self
                .segments
                .iter()
                .map(|s| Segment { value: s.value * kappa, ..*s })
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| x >= s.x0 && x < s.x1)
            .map(|s| s.value)
            .unwrap_or(0.0)
    }

    /// True when c(x) = c(2·center - x).
    pub fn is_even(&self) -> bool {
        let m = self.center();
        let pos: Vec<_> = self.segments.iter().filter(|s| s.value > 0.0).collect();
        let n = pos.len();
        (0..n).all(|i| {
            let a = pos[i];
            let b = pos[n - 1 - i];
            (a.x0 - m + (b.x1 - m)).abs() < 1e-12 && (a.value - b.value).abs() < 1e-12 * a.value.max(1.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_geometry() {
        let p = Profile::step(2.0, 1.0);
        assert_eq!(p.half_radius(), 1.0);
        assert_eq!(p.diameter(), 2.0);
        assert_eq!(p.l1(), 4.0);
        assert!(p.is_even());
    }

    #[test]
    fn rejects_bad_segments() {
        assert!(Profile::new(vec![Segment { x0: 1.0, x1: 0.0, value: 1.0 }]).is_err());
        assert!(Profile::new(vec![Segment { x0: 0.0, x1: 1.0, value: -1.0 }]).is_err());
        let s = vec![
            Segment { x0: 0.0, x1: 1.0, value: 1.0 },
            Segment { x0: 0.5, x1: 2.0, value: 1.0 },
        ];
        assert!(Profile::new(s).is_err());
    }

    #[test]
    fn support_ignores_zero_segments() {
        let p = Profile::new(vec![
            Segment { x0: -3.0, x1: -2.0, value: 0.0 },
            Segment { x0: 0.0, x1: 1.0, value: 1.0 },
            Segment { x0: 2.0, x1: 4.0, value: 0.5 },
        ])
        .unwrap();
        assert_eq!(p.diameter(), 4.0);
        assert!(!p.is_even());
    }
}
