//! Adaptive Simpson quadrature.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature failure: achieved error {achieved:e} exceeds tolerance {requested:e}")]
pub struct QuadratureError {
    pub achieved: f64,
    pub requested: f64,
}

const MAX_DEPTH: u32 = 48;

#[derive(Default)]
struct Accuracy {
    error: f64,
    exhausted: bool,
    evals: usize,
}

const MAX_EVALS: usize = 2_000_000;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // absolute target from a coarse magnitude estimate
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    let mut acc = Accuracy::default();
    let value = recurse(&f, a, b, fa, fm, fb, whole, rel_tol * scale, MAX_DEPTH, &mut acc);
    let requested = rel_tol * value.abs().max(f64::MIN_POSITIVE);
    if (acc.exhausted && acc.error > requested) || !value.is_finite() {
        return Err(QuadratureError { achieved: acc.error, requested });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut Accuracy,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    acc.evals += 2;
    if depth == 0 || acc.evals > MAX_EVALS || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        acc.error += delta.abs() / 15.0;
        if delta.abs() > 15.0 * tol {
            acc.exhausted = true;
        }
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_sqrt() {
        let v = adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-10).unwrap();
        assert!((v - 9.0).abs() < 1e-9);
        let v = adaptive_simpson(|x: f64| x.powf(-0.5), 1.0, 100.0, 1e-10).unwrap();
        assert!((v - 18.0).abs() < 1e-8);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 2.0, 2.0, 1e-8).unwrap(), 0.0);
    }
}
