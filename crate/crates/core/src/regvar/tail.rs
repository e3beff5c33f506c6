use super::{RegVarError, Result, SlowlyVarying};
use crate::quadrature::adaptive_simpson;
use serde::{Deserialize, Serialize};

const QUAD_TOL: f64 = 1e-8;

/// Distribution with `1 - F(x) = min(1, L(x) / x^alpha)` for
/// `x >= support_low` and `F = 0` below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TailSpec", into = "TailSpec")]
pub struct TailModel {
    alpha: f64,
    l: SlowlyVarying,
    support_low: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailSpec {
    alpha: f64,
    #[serde(rename = "L")]
    l: SlowlyVarying,
    #[serde(rename = "supportLow")]
    support_low: f64,
}

impl TryFrom<TailSpec> for TailModel {
    type Error = RegVarError;
    fn try_from(s: TailSpec) -> Result<Self> {
        TailModel::new(s.alpha, s.l, s.support_low)
    }
}

impl From<TailModel> for TailSpec {
    fn from(t: TailModel) -> Self {
        TailSpec { alpha: t.alpha, l: t.l, support_low: t.support_low }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RegVarError::InvalidAlpha(alpha))
    }
}

impl TailModel {
    pub fn new(alpha: f64, l: SlowlyVarying, support_low: f64) -> Result<Self> {
        check_alpha(alpha)?;
        l.validate()?;
        if !(support_low.is_finite() && support_low >= 0.0) {
            return Err(RegVarError::InvalidInput(format!("supportLow must be >= 0, got {support_low}")));
        }
        if support_low <= l.domain_start() && l.is_constant().is_none() {
            return Err(RegVarError::InvalidInput(format!(
                "supportLow {support_low} must exceed the domain start {} of L = {l}",
                l.domain_start()
            )));
        }
        let model = TailModel { alpha, l, support_low };
        model.check_monotone()?;
        Ok(model)
    }

    /// `1 - F(x) = x^{-alpha}` on `[1, inf)`.
    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(alpha, SlowlyVarying::one(), 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slowly_varying(&self) -> &SlowlyVarying {
        &self.l
    }

    pub fn support_low(&self) -> f64 {
        self.support_low
    }

    fn check_monotone(&self) -> Result<()> {
        let start = self.support_low.max(1e-300);
        let ratio: f64 = (1e300 / start).powf(1.0 / 4000.0).max(1.0 + 1e-9);
        let mut prev = self.raw_tail(start);
        let mut x = start;
        while x < 1e300 {
            x *= ratio;
            let g = self.raw_tail(x);
            if g > prev * (1.0 + 1e-12) {
                return Err(RegVarError::InvalidInput(format!(
                    "tail L(x)/x^alpha increases near x = {x:e}; raise supportLow"
                )));
            }
            prev = g;
        }
        Ok(())
    }

    fn raw_tail(&self, x: f64) -> f64 {
        (self.l.eval(x) / x.powf(self.alpha)).min(1.0)
    }

    /// `P(X > t)`.
    pub fn tail_probability(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(RegVarError::InvalidInput(format!("tail probability needs t >= 0, got {t}")));
        }
        Ok(self.tail(t))
    }

    pub(crate) fn tail(&self, t: f64) -> f64 {
        if t < self.support_low || t == 0.0 {
            1.0
        } else if t.is_infinite() {
            0.0
        } else {
            self.raw_tail(t)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            1.0 - self.tail(x)
        }
    }

    /// `F^<-(y) = inf { x : F(x) >= y }`.
    pub fn quantile(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(RegVarError::InvalidInput(format!("quantile level {y} outside [0, 1]")));
        }
        if y == 1.0 {
            return Err(RegVarError::InfiniteQuantile);
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        self.solve(1.0 - y, |x| self.cdf(x) >= y)
    }

    /// `F^<-(1 - p)`, computed without forming `1 - p`.
    pub fn tail_quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(RegVarError::InvalidInput(format!("tail level {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Err(RegVarError::InfiniteQuantile);
        }
        if p == 1.0 {
            return Ok(0.0);
        }
        self.solve(p, |x| self.tail(x) <= p)
    }

    /// Smallest `x` with `accept(x)`, where `accept` is monotone and
    /// approximately `tail(x) <= p`.
    fn solve<A: Fn(f64) -> bool>(&self, p: f64, accept: A) -> Result<f64> {
        let x0 = self.support_low;
        if accept(x0) {
            return Ok(x0);
        }
        let mut x = if let Some(c) = self.l.is_constant() {
            (c / p).powf(1.0 / self.alpha)
        } else {
            let mut lo = x0.max(f64::MIN_POSITIVE).ln();
            let mut hi = lo + 1.0;
            while !accept(hi.exp()) {
                lo = hi;
                hi = lo + 2.0 * (hi - x0.max(f64::MIN_POSITIVE).ln()).max(1.0);
                if hi > 709.0 {
                    if accept(f64::MAX) {
                        hi = f64::MAX.ln();
                        break;
                    }
                    return Err(RegVarError::InfiniteQuantile);
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if accept(mid.exp()) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi.exp()
        };
        if !x.is_finite() {
            return Err(RegVarError::InfiniteQuantile);
        }
        for _ in 0..256 {
            if accept(x) {
                break;
            }
            x = x.next_up();
        }
        for _ in 0..256 {
            let down = x.next_down();
            if down > x0 && accept(down) {
                x = down;
            } else {
                break;
            }
        }
        Ok(x)
    }

    /// `int_0^u x dF(x)`: closed form for constant `L`, adaptive Simpson
    /// otherwise.
    pub fn truncated_mean(&self, u: f64) -> Result<f64> {
        if u.is_nan() || u < 0.0 {
            return Err(RegVarError::InvalidInput(format!("truncation level must be >= 0, got {u}")));
        }
        if u < self.support_low || u == 0.0 {
            return Ok(0.0);
        }
        if u.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let a = self.alpha;
        // below the clamp point the tail is 1 and F carries no mass
        let clamp = match self.l.is_constant() {
            Some(c) => c.powf(1.0 / a).max(self.support_low),
            None => self.solve(1.0, |x| self.raw_tail(x) < 1.0)?,
        };
        if u < clamp {
            return Ok(0.0);
        }
        if let Some(c) = self.l.is_constant() {
            let jump = clamp * self.cdf(clamp);
            return Ok(jump + a * c / (1.0 - a) * (u.powf(1.0 - a) - clamp.powf(1.0 - a)));
        }
        // int_0^u x dF = int_0^u (1 - F) dx - u (1 - F(u)), in log coordinates
        let integral = adaptive_simpson(
            |t: f64| {
                let x = t.exp();
                self.tail(x) * x
            },
            clamp.ln(),
            u.ln(),
            QUAD_TOL,
        )?;
        Ok(clamp + integral - u * self.tail(u))
    }

    /// Karamata asymptotic `alpha/(1-alpha) u^{1-alpha} L(u)` of
    /// [`truncated_mean`](Self::truncated_mean).
    pub fn karamata(&self, u: f64) -> Result<f64> {
        karamata_truncated_moment(self.alpha, &self.l, u)
    }

    /// `karamata(u) / truncated_mean(u) - 1`.
    pub fn karamata_residual(&self, u: f64) -> Result<f64> {
        Ok(self.karamata(u)? / self.truncated_mean(u)? - 1.0)
    }
}

pub fn karamata_truncated_moment(alpha: f64, l: &SlowlyVarying, u: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(u > 0.0) || (u <= l.domain_start() && l.is_constant().is_none()) {
        return Err(RegVarError::InvalidInput(format!("u = {u} outside the domain of L")));
    }
    Ok(alpha / (1.0 - alpha) * u.powf(1.0 - alpha) * l.eval(u))
}
