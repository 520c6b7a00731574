//! Exact and quadrature cell-pair integrals ∫_p ∫_q g(x - y) dy dx.

use super::grid::Cell;
use crate::quad::GaussRule;
use num_complex::Complex64 as C64;

/// Second antiderivative F with F'' = g turns the double integral into
/// F(b1-a2) - F(a1-a2) - F(b1-b2) + F(a1-b2).
fn four_point<F: Fn(f64) -> f64>(p: (f64, f64), q: (f64, f64), f: F) -> f64 {
    let (a1, b1) = p;
    let (a2, b2) = q;
    f(b1 - a2) - f(a1 - a2) - f(b1 - b2) + f(a1 - b2)
}

/// ∫_p ∫_q ln|x - y| dy dx
pub fn cell_log_moment(p: (f64, f64), q: (f64, f64)) -> f64 {
    four_point(p, q, |u| {
        if u == 0.0 {
            0.0
        } else {
            0.5 * u * u * u.abs().ln() - 0.75 * u * u
        }
    })
}

/// ∫_p ∫_q |x - y| dy dx
pub fn cell_abs_moment(p: (f64, f64), q: (f64, f64)) -> f64 {
    four_point(p, q, |u| u.abs().powi(3) / 6.0)
}

/// ∫_p ∫_q (x - y)² dy dx
pub fn cell_sq_moment(p: (f64, f64), q: (f64, f64)) -> f64 {
    four_point(p, q, |u| u.powi(4) / 12.0)
}

/// ∫_p ∫_q sign(y - x) dy dx
pub fn cell_sign_moment(p: (f64, f64), q: (f64, f64)) -> f64 {
    four_point(p, q, |u| -0.5 * u * u.abs())
}

pub fn span(c: &Cell) -> (f64, f64) {
    (c.lo, c.hi)
}

/// Settings for [`pair_integral`].
#[derive(Debug, Clone)]
pub struct PairQuad {
    pub rule: GaussRule,
    /// Oscillation scale: panels per piece grow like `osc`·length.
    pub osc: f64,
    /// Geometric grading toward u = 0 for kernels with a weak singularity there.
    pub graded: bool,
}

impl PairQuad {
    pub fn new(osc: f64, graded: bool) -> Self {
        PairQuad { rule: GaussRule::new(12), osc, graded }
    }
}

fn overlap(p: (f64, f64), q: (f64, f64), u: f64) -> f64 {
    (p.1.min(q.1 + u) - p.0.max(q.0 + u)).max(0.0)
}

/// ∫∫ g(x - y) over p × q, written as ∫ g(u) W(u) du with the exact overlap weight W.
pub fn pair_integral<G: Fn(f64) -> C64>(p: (f64, f64), q: (f64, f64), g: &G, opt: &PairQuad) -> C64 {
    let mut br = vec![p.0 - q.1, p.0 - q.0, p.1 - q.1, p.1 - q.0];
    if br[0] < 0.0 && br[3] > 0.0 {
        br.push(0.0);
    }
    br.sort_by(f64::total_cmp);
    br.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    let mut acc = C64::new(0.0, 0.0);
    for w in br.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        let len = u1 - u0;
        if len <= 0.0 {
            continue;
        }
        let touches0 = opt.graded && (u0 == 0.0 || u1 == 0.0);
        if touches0 {
            let sgn = if u1 == 0.0 { -1.0 } else { 1.0 };
            let far = if u1 == 0.0 { u0 } else { u1 };
            let rho: f64 = 0.3;
            let mut outer = far.abs();
            for level in 0..32 {
                let inner = if level == 31 { 0.0 } else { outer * rho };
                acc += panels(p, q, g, opt, sgn * inner, sgn * outer);
                outer = inner;
            }
        } else {
            acc += panels(p, q, g, opt, u0, u1);
        }
    }
    acc
}

fn panels<G: Fn(f64) -> C64>(p: (f64, f64), q: (f64, f64), g: &G, opt: &PairQuad, a: f64, b: f64) -> C64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let len = b - a;
    let np = 1 + (opt.osc * len / 3.0).ceil() as usize;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..np {
        let lo = a + len * k as f64 / np as f64;
        let hi = a + len * (k + 1) as f64 / np as f64;
        for (u, w) in opt.rule.on(lo, hi) {
            acc += g(u) * (w * overlap(p, q, u));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    /// Nested adaptive quadrature with the inner integral split at y = x.
    fn oracle_log(p: (f64, f64), q: (f64, f64)) -> f64 {
        let outer = |x: f64| {
            let f = |y: f64| C64::new((x - y).abs().ln(), 0.0);
            if x > q.0 && x < q.1 {
                adaptive(f, q.0, x, 1e-13, 2000).value + adaptive(f, x, q.1, 1e-13, 2000).value
            } else {
                adaptive(f, q.0, q.1, 1e-13, 2000).value
            }
        };
        adaptive(outer, p.0, p.1, 1e-11, 2000).value.re
    }

    #[test]
    fn unit_cell_log_moment() {
        assert!((cell_log_moment((0.0, 1.0), (0.0, 1.0)) + 1.5).abs() < 1e-15);
        let o = oracle_log((0.0, 1.0), (0.0, 1.0));
        assert!((o + 1.5).abs() < 1e-8, "{o}");
    }

    #[test]
    fn log_moment_matches_oracle() {
        for &(p, q) in &[
            ((0.0, 0.3), (0.3, 0.5)),
            ((-1.0, -0.9), (0.4, 0.45)),
            ((0.1, 0.7), (0.2, 0.4)),
        ] {
            let a = cell_log_moment(p, q);
            let o = oracle_log(p, q);
            assert!((a - o).abs() < 1e-9 * (1.0 + o.abs()), "{p:?} {q:?} {a} {o}");
            assert!((a - cell_log_moment(q, p)).abs() < 1e-15);
        }
    }

    #[test]
    fn far_cells_approach_midpoint_rule() {
        let h = 0.01;
        let a = cell_log_moment((0.0, h), (5.0, 5.0 + h));
        let mid = h * h * 5f64.ln();
        assert!((a - mid).abs() < h * h * h * h);
    }

    #[test]
    fn abs_moment_values() {
        assert!((cell_abs_moment((0.0, 1.0), (0.0, 1.0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((cell_abs_moment((0.0, 1.0), (2.0, 3.0)) - 2.0).abs() < 1e-14);
        assert_eq!(cell_abs_moment((0.0, 1.0), (0.5, 2.0)), cell_abs_moment((0.5, 2.0), (0.0, 1.0)));
    }

    #[test]
    fn sign_moment_is_antisymmetric() {
        assert!((cell_sign_moment((0.0, 1.0), (2.0, 3.0)) - 1.0).abs() < 1e-14);
        assert!(cell_sign_moment((0.0, 1.0), (0.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn pair_integral_reproduces_exact_moments() {
        let opt = PairQuad::new(0.0, false);
        for &(p, q) in &[((0.0, 0.3), (0.1, 0.5)), ((0.0, 1.0), (2.0, 3.0)), ((0.0, 1.0), (0.0, 1.0))] {
            let sq = pair_integral(p, q, &|u: f64| C64::new(u * u, 0.0), &opt);
            assert!((sq.re - cell_sq_moment(p, q)).abs() < 1e-14);
            let ab = pair_integral(p, q, &|u: f64| C64::new(u.abs(), 0.0), &opt);
            assert!((ab.re - cell_abs_moment(p, q)).abs() < 1e-14);
        }
        let graded = PairQuad::new(0.0, true);
        let lg = pair_integral((0.0, 1.0), (0.0, 1.0), &|u: f64| C64::new(u.abs().ln(), 0.0), &graded);
        assert!((lg.re + 1.5).abs() < 1e-12, "{lg}");
    }
}
