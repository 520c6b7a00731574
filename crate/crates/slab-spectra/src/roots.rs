//! Bracketed scalar root finding and small least-squares fits.

/// Root of a monotone-enough f on [a, b] with f(a)·f(b) ≤ 0 (Illinois variant of regula falsi).
pub fn bracket_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i32;
    for _ in 0..200 {
        let c = if (b - a).abs() > 1e3 * tol.max(1e-300) && side.abs() < 3 {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = if side <= 0 { -1 } else { side - 1 };
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = if side >= 0 { 1 } else { side + 1 };
        }
        if (b - a).abs() < tol {
            return Some(0.5 * (a + b));
        }
    }
    Some(0.5 * (a + b))
}

/// Least-squares line y ≈ c0 + c1·x; returns (c0, c1, rms residual, standard error of c1).
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - c0 - c1 * a).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let dof = (n - 2.0).max(1.0);
    let se = if sxx > 0.0 { (ss / dof / sxx).sqrt() } else { f64::INFINITY };
    (c0, c1, rms, se)
}
