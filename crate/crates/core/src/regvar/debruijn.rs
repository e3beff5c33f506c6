use super::{RegVarError, Result, SlowlyVarying};

/// How a conjugate is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateMethod {
    /// Exact reciprocal of a constant.
    ClosedForm,
    /// `L#(y) = 1 / L(x*)` with `x* L(x*) = y`, found by bisection on
    /// `[lo, hi]` where `x L(x)` is strictly increasing.
    NumericFixedPoint { lo: f64, hi: f64 },
}

/// De Bruijn conjugate `L#` of a slowly varying `L`:
/// `L(x) L#(x L(x)) -> 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeBruijnConjugate {
    base: SlowlyVarying,
    method: ConjugateMethod,
    tolerance: f64,
    threshold: f64,
}

const GRID: usize = 512;

/// Conjugate of a catalog `L`.
pub fn de_bruijn_conjugate(l: &SlowlyVarying) -> Result<DeBruijnConjugate> {
    if l.is_constant().is_some() {
        return Ok(DeBruijnConjugate {
            base: l.clone(),
            method: ConjugateMethod::ClosedForm,
            tolerance: 1e-15,
            threshold: 0.0,
        });
    }
    let lo = match l {
        // x (ln x)^beta increases once ln x > -beta
        SlowlyVarying::LogPower(b) => (b.min(0.0).abs()).exp().max(1.0) * (1.0 + 1e-9),
        SlowlyVarying::LogLog(p) => {
            // d/dx of x (ln ln x)^p has the sign of ln ln x * ln x + p
            let mut x = std::f64::consts::E * (1.0 + 1e-9);
            while x.ln().ln() * x.ln() + p <= 0.0 {
                x *= 1.01;
            }
            x
        }
        SlowlyVarying::Tabulated(pts) => pts[0].0 * 1e-3,
        SlowlyVarying::Constant(_) => unreachable!(),
    };
    de_bruijn_conjugate_in(l, lo, 1e300)
}

/// Conjugate solved numerically on a user bracket.
pub fn de_bruijn_conjugate_in(l: &SlowlyVarying, lo: f64, hi: f64) -> Result<DeBruijnConjugate> {
    l.validate()?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(RegVarError::InvalidInput(format!("bad conjugate bracket [{lo}, {hi}]")));
    }
    let step = (hi / lo).ln() / GRID as f64;
    // ln(x L(x)) keeps large brackets finite
    let mut prev = lo.ln() + l.eval(lo).ln();
    for i in 1..=GRID {
        let x = lo * (step * i as f64).exp();
        let y = x.ln() + l.eval(x).ln();
        if !(y > prev) || !y.is_finite() {
            return Err(RegVarError::IllPosedConjugate(format!(
                "x L(x) is not strictly increasing near x = {x:e}"
            )));
        }
        prev = y;
    }
    Ok(DeBruijnConjugate {
        base: l.clone(),
        method: ConjugateMethod::NumericFixedPoint { lo, hi },
        tolerance: 1e-10,
        threshold: lo,
    })
}

impl DeBruijnConjugate {
    pub fn base(&self) -> &SlowlyVarying {
        &self.base
    }

    pub fn method(&self) -> ConjugateMethod {
        self.method
    }

    /// Bound on `|L(x) L#(x L(x)) - 1|` for `x >= threshold()`.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        match self.method {
            ConjugateMethod::ClosedForm => Ok(1.0 / self.base.is_constant().unwrap_or(1.0)),
            ConjugateMethod::NumericFixedPoint { lo, hi } => {
                let x = self.preimage(y, lo, hi)?;
                Ok(1.0 / self.base.eval(x))
            }
        }
    }

    /// Leading-order closed form where one is known: `(ln y)^{-beta}` for
    /// `L = (ln x)^beta`.
    pub fn asymptotic(&self, y: f64) -> Option<f64> {
        match &self.base {
            SlowlyVarying::Constant(c) => Some(1.0 / c),
            SlowlyVarying::LogPower(b) => Some(y.ln().powf(-b)),
            _ => None,
        }
    }

    /// `L(x) L#(x L(x)) - 1`.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let lx = self.base.eval(x);
        Ok(lx * self.eval(x * lx)? - 1.0)
    }

    fn preimage(&self, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let g = |x: f64| x.ln() + self.base.eval(x).ln();
        let ly = y.ln();
        if !(ly >= g(lo) && ly <= g(hi)) {
            return Err(RegVarError::InvalidInput(format!(
                "conjugate argument {y:e} outside [{:e}, {:e}]",
                g(lo).exp(),
                g(hi).exp()
            )));
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m.exp()) < ly {
                a = m;
            } else {
                b = m;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }
}

/// Asymptotic inverse of `f(x) = x^{gamma delta} L^gamma(x^delta)`:
/// `g(x) = x^{1/(gamma delta)} L#(x^{1/gamma})^{1/delta}`.
#[derive(Debug, Clone)]
pub struct AsymptoticInverse {
    gamma: f64,
    delta: f64,
    conjugate: DeBruijnConjugate,
}

pub fn asymptotic_inverse(gamma: f64, delta: f64, l: &SlowlyVarying) -> Result<AsymptoticInverse> {
    if !(gamma > 0.0 && delta > 0.0) {
        return Err(RegVarError::InvalidInput(format!("gamma, delta must be positive, got {gamma}, {delta}")));
    }
    Ok(AsymptoticInverse { gamma, delta, conjugate: de_bruijn_conjugate(l)? })
}

impl AsymptoticInverse {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let c = self.conjugate.eval(x.powf(1.0 / self.gamma))?;
        Ok(x.powf(1.0 / (self.gamma * self.delta)) * c.powf(1.0 / self.delta))
    }

    /// The function being inverted.
    pub fn forward(&self, x: f64) -> f64 {
        x.powf(self.gamma * self.delta) * self.conjugate.base().eval(x.powf(self.delta)).powf(self.gamma)
    }

    /// `f(g(x)) / x`.
    pub fn composition_ratio(&self, x: f64) -> Result<f64> {
        Ok(self.forward(self.eval(x)?) / x)
    }
}
