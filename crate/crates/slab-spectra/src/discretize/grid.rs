use super::profile::Profile;
use crate::error::{Error, Result};
use crate::linalg::RVec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub c: f64,
}

impl Cell {
    pub fn h(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Cells tiling supp c; functions are represented in the orthonormal basis χ_p/√h_p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cells: Vec<Cell>,
}

impl GridSpec {
    /// About `n_cells` cells spread over the positive segments in proportion to their length.
    /// For c ≡ 0 the segments themselves are tiled (every matrix is then zero).
    pub fn from_profile(profile: &Profile, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::Invalid("grid.cells must be positive".into()));
        }
        let pos: Vec<_> = if profile.is_zero() {
            profile.segments.clone()
        } else {
            profile.segments.iter().filter(|s| s.value > 0.0).copied().collect()
        };
        if pos.is_empty() {
            return Err(Error::Invalid("empty profile".into()));
        }
        let total: f64 = pos.iter().map(|s| s.x1 - s.x0).sum();
        let mut cells = Vec::with_capacity(n_cells);
        for s in &pos {
            let len = s.x1 - s.x0;
            let m = ((n_cells as f64 * len / total).round() as usize).max(1);
            for i in 0..m {
                let lo = s.x0 + len * i as f64 / m as f64;
                let hi = if i + 1 == m { s.x1 } else { s.x0 + len * (i + 1) as f64 / m as f64 };
                cells.push(Cell { lo, hi, c: s.value });
            }
        }
        Ok(GridSpec { cells })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.cells.iter().map(Cell::mid).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.cells.iter().map(Cell::h).collect()
    }

    /// Coefficients of √c in the orthonormal cell basis: √c_p·√h_p.
    pub fn sqrt_c(&self) -> RVec {
        RVec::from_iterator(self.n_cells(), self.cells.iter().map(|c| (c.c * c.h()).sqrt()))
    }

    /// Every cell split in two.
    pub fn refined(&self) -> Self {
        let mut cells = Vec::with_capacity(2 * self.n_cells());
        for c in &self.cells {
            let m = c.mid();
            cells.push(Cell { lo: c.lo, hi: m, c: c.c });
            cells.push(Cell { lo: m, hi: c.hi, c: c.c });
        }
        GridSpec { cells }
    }

    pub fn scaled(&self, kappa: f64) -> Self {
        GridSpec { cells: self.cells.iter().map(|c| Cell { c: c.c * kappa, ..*c }).collect() }
    }

    /// Cell-average coefficients of a function, in the orthonormal basis.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> RVec {
        let g = crate::quad::GaussRule::new(8);
        RVec::from_iterator(
            self.n_cells(),
            self.cells.iter().map(|c| g.on(c.lo, c.hi).map(|(x, w)| w * f(x)).sum::<f64>() / c.h().sqrt()),
        )
    }

    /// Index of the mirror cell under x -> 2m - x, when the grid is symmetric.
    pub fn mirror(&self) -> Option<Vec<usize>> {
        let n = self.n_cells();
        let m = 0.5 * (self.cells[0].lo + self.cells[n - 1].hi);
        let out: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
        let ok = (0..n).all(|i| {
            let a = self.cells[i];
            let b = self.cells[n - 1 - i];
            (a.lo - m + (b.hi - m)).abs() < 1e-12 && (a.c - b.c).abs() <= 1e-12 * a.c.max(1.0)
        });
        ok.then_some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::profile::Segment;

    #[test]
    fn tiles_support() {
        let p = Profile::step(1.0, 1.0);
        let g = GridSpec::from_profile(&p, 128).unwrap();
        assert_eq!(g.n_cells(), 128);
        let tot: f64 = g.weights().iter().sum();
        assert!((tot - 2.0).abs() < 1e-14);
        assert_eq!(g.cells[0].lo, -1.0);
        assert_eq!(g.cells[127].hi, 1.0);
        assert!(g.mirror().is_some());
    }

    #[test]
    fn two_segments_share_cells() {
        let p = Profile::new(vec![
            Segment { x0: 0.0, x1: 1.0, value: 1.0 },
            Segment { x0: 2.0, x1: 5.0, value: 2.0 },
        ])
        .unwrap();
        let g = GridSpec::from_profile(&p, 40).unwrap();
        assert_eq!(g.n_cells(), 40);
        assert!(g.cells.iter().all(|c| c.h() > 0.0));
    }

    #[test]
    fn sqrt_c_norm_is_l1() {
        let p = Profile::step(3.0, 0.5);
        let g = GridSpec::from_profile(&p, 16).unwrap();
        assert!((g.sqrt_c().norm_squared() - p.l1()).abs() < 1e-13);
        assert_eq!(g.refined().n_cells(), 32);
    }
}
