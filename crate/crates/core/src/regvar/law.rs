use super::{RegVarError, Result, TailModel};
use std::f64::consts::LN_2;

/// Common interface over the distribution functions used by trimming plans.
pub trait DistributionFunction {
    /// `P(X > x)`.
    fn tail(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    /// `F^<-(1 - p)` for `p` in `(0, 1]`.
    fn tail_quantile(&self, p: f64) -> Result<f64>;

    /// `int_0^u x dF(x)`.
    fn truncated_mean(&self, u: f64) -> Result<f64>;
}

impl DistributionFunction for TailModel {
    fn tail(&self, x: f64) -> f64 {
        TailModel::tail(self, x.max(0.0))
    }

    fn cdf(&self, x: f64) -> f64 {
        TailModel::cdf(self, x)
    }

    fn tail_quantile(&self, p: f64) -> Result<f64> {
        TailModel::tail_quantile(self, p)
    }

    fn truncated_mean(&self, u: f64) -> Result<f64> {
        TailModel::truncated_mean(self, u)
    }
}

/// Laws of the observables that drive experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    RegVar(TailModel),
    /// Continued-fraction digit under the Gauss measure:
    /// `P(a >= k) = log2(1 + 1/k)`.
    GaussKuzmin,
    /// `floor(1/x)` under Lebesgue measure: `P(a >= k) = 1/k`.
    ReciprocalFloor,
}

impl Law {
    pub fn tail_index(&self) -> f64 {
        match self {
            Law::RegVar(t) => t.alpha(),
            Law::GaussKuzmin | Law::ReciprocalFloor => 1.0,
        }
    }

    pub fn as_tail_model(&self) -> Option<&TailModel> {
        match self {
            Law::RegVar(t) => Some(t),
            _ => None,
        }
    }

    /// `P(a >= k)` for integer `k >= 1`.
    fn at_least(&self, k: f64) -> f64 {
        match self {
            Law::GaussKuzmin => (1.0 / k).ln_1p() / LN_2,
            Law::ReciprocalFloor => 1.0 / k,
            Law::RegVar(_) => unreachable!(),
        }
    }
}

fn harmonic(n: f64) -> f64 {
    if n < 64.0 {
        (1..=n as u64).map(|k| 1.0 / k as f64).sum()
    } else {
        let inv = 1.0 / n;
        let inv2 = inv * inv;
        n.ln() + 0.577_215_664_901_532_9 + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0
    }
}

impl DistributionFunction for Law {
    fn tail(&self, x: f64) -> f64 {
        match self {
            Law::RegVar(t) => DistributionFunction::tail(t, x),
            _ if x < 1.0 => 1.0,
            _ if x.is_infinite() => 0.0,
            _ => self.at_least(x.floor() + 1.0),
        }
    }

    fn tail_quantile(&self, p: f64) -> Result<f64> {
        if let Law::RegVar(t) = self {
            return t.tail_quantile(p);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(RegVarError::InvalidInput(format!("tail level {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Err(RegVarError::InfiniteQuantile);
        }
        if p == 1.0 {
            return Ok(0.0);
        }
        // smallest integer k >= 1 with P(a >= k + 1) <= p
        let guess = match self {
            Law::GaussKuzmin => 1.0 / (p * LN_2).exp_m1(),
            _ => 1.0 / p,
        };
        let mut k = (guess.ceil() - 1.0).max(1.0);
        if !k.is_finite() {
            return Err(RegVarError::InfiniteQuantile);
        }
        while k > 1.0 && self.at_least(k) <= p {
            k -= 1.0;
        }
        while self.at_least(k + 1.0) > p {
            k += 1.0;
        }
        Ok(k)
    }

    fn truncated_mean(&self, u: f64) -> Result<f64> {
        if let Law::RegVar(t) = self {
            return t.truncated_mean(u);
        }
        if u.is_nan() || u < 0.0 {
            return Err(RegVarError::InvalidInput(format!("truncation level must be >= 0, got {u}")));
        }
        if u.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let n = u.floor();
        if n < 1.0 {
            return Ok(0.0);
        }
        // sum_{j<=n} P(a >= j) - n P(a >= n + 1), telescoped
        Ok(match self {
            Law::GaussKuzmin => ((n + 1.0).ln() - n * (1.0 / (n + 1.0)).ln_1p()) / LN_2,
            _ => harmonic(n) - n / (n + 1.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_mean(law: &Law, n: u64) -> f64 {
        (1..=n)
            .map(|k| {
                let k = k as f64;
                k * (law.at_least(k) - law.at_least(k + 1.0))
            })
            .sum()
    }

    #[test]
    fn discrete_truncated_means_match_summation() {
        for law in [Law::GaussKuzmin, Law::ReciprocalFloor] {
            for n in [1u64, 2, 7, 63, 64, 100, 5000] {
                let a = law.truncated_mean(n as f64 + 0.5).unwrap();
                let b = brute_mean(&law, n);
                assert!((a - b).abs() < 1e-9 * b.max(1.0), "{law:?} n={n} {a} {b}");
            }
            assert_eq!(law.truncated_mean(0.9).unwrap(), 0.0);
        }
    }

    #[test]
    fn gauss_kuzmin_first_digit() {
        let p1 = Law::GaussKuzmin.cdf(1.0);
        assert!((p1 - (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((Law::ReciprocalFloor.cdf(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn discrete_quantiles() {
        for law in [Law::GaussKuzmin, Law::ReciprocalFloor] {
            for p in [0.9, 0.5, 0.1, 1e-3, 1e-6, 1e-9] {
                let k = law.tail_quantile(p).unwrap();
                assert_eq!(k, k.floor());
                assert!(law.tail(k) <= p, "{law:?} p={p}");
                if k > 1.0 {
                    assert!(law.tail(k - 1.0) > p);
                }
            }
        }
        assert_eq!(Law::ReciprocalFloor.tail_quantile(1e-3).unwrap(), 999.0);
    }
}
