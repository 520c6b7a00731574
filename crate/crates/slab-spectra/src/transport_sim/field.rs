use super::mu::MuQuad;
use serde::Serialize;

/// Uniform cells on [-X, X].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XGrid {
    pub x_max: f64,
    pub n: usize,
}

impl XGrid {
    pub fn h(&self) -> f64 {
        2.0 * self.x_max / self.n as f64
    }
    pub fn center(&self, i: usize) -> f64 {
        -self.x_max + (i as f64 + 0.5) * self.h()
    }
    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }
}

/// u(x_i, μ_j), stored μ-major: `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub x: XGrid,
    pub mu: MuQuad,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(x: XGrid, mu: MuQuad) -> Self {
        let n = x.n * mu.len();
        Field { x, mu, values: vec![0.0; n] }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(x: XGrid, mu: MuQuad, f: F) -> Self {
        let mut u = Field::zeros(x, mu);
        for j in 0..u.mu.len() {
            let m = u.mu.nodes[j];
            for i in 0..x.n {
                u.values[j * x.n + i] = f(x.center(i), m);
            }
        }
        u
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.x.n + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.x.n..(j + 1) * self.x.n]
    }

    /// Σ h w_j u v
    pub fn inner(&self, other: &[f64]) -> f64 {
        let h = self.x.h();
        let nx = self.x.n;
        self.mu
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let a = &self.values[j * nx..(j + 1) * nx];
                let b = &other[j * nx..(j + 1) * nx];
                w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum::<f64>()
            * h
    }

    pub fn norm(&self) -> f64 {
        self.inner(&self.values).sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// Largest |x| carrying |u| above `tol`·max|u|.
    pub fn effective_radius(&self, tol: f64) -> f64 {
        let m = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let nx = self.x.n;
        let mut r: f64 = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            if v.abs() > tol * m {
                let x = self.x.center(k % nx);
                r = r.max(x.abs() + 0.5 * self.x.h());
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport_sim::mu::MuRule;

    #[test]
    fn norm_of_indicator() {
        let mu = MuQuad::new(MuRule::default()).unwrap();
        let u = Field::from_fn(XGrid { x_max: 4.0, n: 400 }, mu, |x, _| if x.abs() < 1.0 { 1.0 } else { 0.0 });
        assert!((u.norm() - 2.0).abs() < 1e-12);
        assert!((u.effective_radius(1e-12) - 1.0).abs() < 0.011);
    }
}
