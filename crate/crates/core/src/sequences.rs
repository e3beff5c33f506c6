//! Trimming plans: truncation levels, expected exceedances, trim counts,
//! norming sequences and finite-grid checks of the limit theorems'
//! hypotheses.

use crate::regvar::{de_bruijn_conjugate, DistributionFunction, RegVarError, SlowlyVarying, TailModel};
use crate::trimming::CheckpointGrid;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SequenceError {
    #[error("eps must lie in (0, 1/4), got {0}")]
    InvalidEps(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("checkpoint n = {0} is too small: log log n must be positive")]
    CheckpointTooSmall(usize),
    #[error("log psi(floor(log n)) = {value} is not usable at n = {n}")]
    BadPsi { n: usize, value: f64 },
    #[error("threshold {f} at n = {n} lies below the support: F(f) = 0")]
    ThresholdBelowSupport { n: usize, f: f64 },
    #[error("trim count {b} minus margin {margin} at n = {n} is outside (0, n)")]
    TrimTooSmallForMargin { n: usize, b: f64, margin: f64 },
    #[error(transparent)]
    RegVar(#[from] RegVarError),
}

pub type Result<T> = std::result::Result<T, SequenceError>;

/// A summable sequence `psi` (`sum 1/psi(n) < inf`).
#[derive(Clone)]
pub enum PsiFunction {
    /// `n^2`.
    Square,
    /// `(log2 n)^2` at powers of two, `n^2` elsewhere.
    PiecewiseRemark,
    /// Membership asserted by the caller.
    User { name: String, f: Arc<dyn Fn(u64) -> f64 + Send + Sync> },
}

impl PsiFunction {
    pub fn user(name: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        PsiFunction::User { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, n: u64) -> f64 {
        match self {
            PsiFunction::Square => (n as f64).powi(2),
            PsiFunction::PiecewiseRemark => {
                if n.is_power_of_two() {
                    (n.trailing_zeros() as f64).powi(2)
                } else {
                    (n as f64).powi(2)
                }
            }
            PsiFunction::User { f, .. } => f(n),
        }
    }

    /// `log psi(floor(log n))`.
    pub fn log_at_log(&self, n: usize) -> Result<f64> {
        let m = (n as f64).ln().floor();
        if m < 1.0 {
            return Err(SequenceError::InvalidInput(format!("floor(log n) < 1 at n = {n}")));
        }
        let v = self.eval(m as u64).ln();
        if !(v >= 0.0 && v.is_finite()) {
            return Err(SequenceError::BadPsi { n, value: v });
        }
        Ok(v)
    }
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string())
    }
}

impl fmt::Display for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::Square => f.write_str("square"),
            PsiFunction::PiecewiseRemark => f.write_str("piecewiseRemark"),
            PsiFunction::User { name, .. } => write!(f, "user:{name}"),
        }
    }
}

impl PartialEq for PsiFunction {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Serialize for PsiFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PsiFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "square" => Ok(PsiFunction::Square),
            "piecewiseRemark" => Ok(PsiFunction::PiecewiseRemark),
            other => Err(serde::de::Error::custom(format!(
                "unknown psi `{other}`; user functions are available from code only"
            ))),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.25 {
        Ok(())
    } else {
        Err(SequenceError::InvalidEps(eps))
    }
}

/// `c(k, n) = max{k, log psi(floor(log n))}^(1/2+eps) * (log psi(floor(log n)))^(1/2-eps)`.
pub fn c_function(k: f64, n: usize, eps: f64, psi: &PsiFunction) -> Result<f64> {
    check_eps(eps)?;
    if !(k >= 1.0) || n < 3 {
        return Err(SequenceError::InvalidInput(format!("c(k, n) needs k >= 1 and n >= 3, got k = {k}, n = {n}")));
    }
    let lp = psi.log_at_log(n)?;
    Ok(k.max(lp).powf(0.5 + eps) * lp.powf(0.5 - eps))
}

fn log_log(n: usize) -> Result<f64> {
    let v = (n as f64).ln().ln();
    if n < 3 || !(v > 0.0) {
        return Err(SequenceError::CheckpointTooSmall(n));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Provenance {
    GeneralTheorem,
    RegvarTheorem,
    UserFixed,
}

/// One checkpoint of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanRow {
    pub n: usize,
    /// Truncation level.
    pub f: f64,
    /// Expected exceedances `n (1 - F(f))`.
    pub a: f64,
    pub b: usize,
    /// Norming sequence.
    pub d: f64,
    /// Deviation allowance `b - a`.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrimmingPlan {
    pub rows: Vec<PlanRow>,
    pub eps: f64,
    pub w: f64,
    pub psi: PsiFunction,
    pub provenance: Provenance,
    /// `f_n / d_n * max{a^(1/2+eps) (log log n)^(1/2-eps), log n}` for
    /// general plans.
    pub hypothesis: Option<RatioSequence>,
}

impl TrimmingPlan {
    pub fn checkpoints(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn trims(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.b).collect()
    }

    pub fn levels(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f).collect()
    }

    pub fn max_trim(&self) -> usize {
        self.rows.iter().map(|r| r.b).max().unwrap_or(0)
    }

    /// Plan from explicit per-checkpoint values, e.g. a light-trimming
    /// control with constant `b`.
    pub fn fixed(grid: &CheckpointGrid, b: &[usize], f: &[f64], d: &[f64], a: &[f64]) -> Result<Self> {
        let k = grid.len();
        if b.len() != k || f.len() != k || d.len() != k || a.len() != k {
            return Err(SequenceError::InvalidInput("plan columns must match the grid".into()));
        }
        let rows = grid
            .checkpoints()
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                if b[j] > n {
                    return Err(SequenceError::InvalidInput(format!("b = {} exceeds n = {n}", b[j])));
                }
                if !(d[j] > 0.0) {
                    return Err(SequenceError::InvalidInput(format!("norming d = {} at n = {n} must be positive", d[j])));
                }
                Ok(PlanRow { n, f: f[j], a: a[j], b: b[j], d: d[j], gamma: b[j] as f64 - a[j] })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrimmingPlan { rows, eps: 0.1, w: 0.0, psi: PsiFunction::Square, provenance: Provenance::UserFixed, hypothesis: None })
    }
}

/// Plan from truncation levels `f[j]`: `a = n (1 - F(f))`,
/// `d = n int_0^f x dF`, and
/// `b = ceil(a + W max{a^(1/2+eps) (log log n)^(1/2-eps), log log n})`.
pub fn general_trimming_plan<D: DistributionFunction + ?Sized>(
    law: &D,
    f: &[f64],
    grid: &CheckpointGrid,
    eps: f64,
    w: f64,
    psi: &PsiFunction,
) -> Result<TrimmingPlan> {
    check_eps(eps)?;
    if !(w >= 0.0 && w.is_finite()) {
        return Err(SequenceError::InvalidInput(format!("W must be non-negative, got {w}")));
    }
    if f.len() != grid.len() {
        return Err(SequenceError::InvalidInput("one truncation level per checkpoint required".into()));
    }
    let mut rows = Vec::with_capacity(f.len());
    let mut hyp = Vec::with_capacity(f.len());
    for (&n, &fj) in grid.checkpoints().iter().zip(f) {
        let ll = log_log(n)?;
        if !(law.cdf(fj) > 0.0) {
            return Err(SequenceError::ThresholdBelowSupport { n, f: fj });
        }
        let nf = n as f64;
        let a = nf * law.tail(fj);
        let d = nf * law.truncated_mean(fj)?;
        let spread = a.powf(0.5 + eps) * ll.powf(0.5 - eps);
        let b = (a + w * spread.max(ll)).ceil();
        let b = (b as usize).min(n);
        rows.push(PlanRow { n, f: fj, a, b, d, gamma: b as f64 - a });
        hyp.push(fj / d * spread.max(nf.ln()));
    }
    let hypothesis = Some(RatioSequence::new(hyp, Target::Zero));
    Ok(TrimmingPlan { rows, eps, w, psi: psi.clone(), provenance: Provenance::GeneralTheorem, hypothesis })
}

/// `d_n = alpha/(1-alpha) n^(1/alpha) b^(1-1/alpha) (L^(-1/alpha))#((n/b)^(1/alpha))`,
/// i.e. `alpha/(1-alpha) b x_n` with `x_n^alpha / L(x_n) = n/b`.
pub fn regvar_norming(alpha: f64, l: &SlowlyVarying, b: &[usize], grid: &CheckpointGrid) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RegVarError::InvalidAlpha(alpha).into());
    }
    if b.len() != grid.len() {
        return Err(SequenceError::InvalidInput("one trim count per checkpoint required".into()));
    }
    let inv = 1.0 / alpha;
    let conj = match l.is_constant() {
        Some(_) => None,
        None => Some(de_bruijn_conjugate(&l.powf(-inv))?),
    };
    let c0 = l.is_constant().map(|c| c.powf(inv));
    grid.checkpoints()
        .iter()
        .zip(b)
        .map(|(&n, &bj)| {
            if bj < 1 || bj >= n {
                return Err(SequenceError::InvalidInput(format!("need 1 <= b < n, got b = {bj} at n = {n}")));
            }
            let (nf, bf) = (n as f64, bj as f64);
            let lead = alpha / (1.0 - alpha) * pow(nf, inv) / pow(bf, inv - 1.0);
            let sharp = match (&conj, c0) {
                (Some(c), _) => c.eval(pow(nf / bf, inv))?,
                (None, Some(c)) => c,
                (None, None) => unreachable!(),
            };
            Ok(lead * sharp)
        })
        .collect()
}

// integer powers exactly where possible
fn pow(x: f64, p: f64) -> f64 {
    if p == p.round() && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// `f_n = F^<-(1 - (b_n - W c(b_n, n)) / n) - 1`.
pub fn threshold_from_trim<D: DistributionFunction + ?Sized>(
    law: &D,
    b: &[usize],
    grid: &CheckpointGrid,
    w: f64,
    eps: f64,
    psi: &PsiFunction,
) -> Result<Vec<f64>> {
    if b.len() != grid.len() {
        return Err(SequenceError::InvalidInput("one trim count per checkpoint required".into()));
    }
    grid.checkpoints()
        .iter()
        .zip(b)
        .map(|(&n, &bj)| {
            let bf = bj as f64;
            let margin = if w == 0.0 { 0.0 } else { w * c_function(bf.max(1.0), n, eps, psi)? };
            let adj = bf - margin;
            if !(adj > 0.0 && adj < n as f64) {
                return Err(SequenceError::TrimTooSmallForMargin { n, b: bf, margin });
            }
            Ok(law.tail_quantile(adj / n as f64)? - 1.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Target {
    /// Hypothesis asks the ratio to vanish.
    Zero,
    /// Hypothesis asks the ratio to diverge.
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "consistent")]
    Consistent,
    #[serde(rename = "consistent with divergence")]
    ConsistentWithDivergence,
    #[serde(rename = "inconsistent")]
    Inconsistent,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::ConsistentWithDivergence => "consistent with divergence",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Undetermined => "undetermined",
        })
    }
}

/// A hypothesis ratio along the grid with an advisory trend verdict from
/// its first and last values. Limits are not decidable from finitely
/// many points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSequence {
    pub values: Vec<f64>,
    pub target: Target,
    pub verdict: Verdict,
    pub advisory: bool,
}

impl RatioSequence {
    pub fn new(values: Vec<f64>, target: Target) -> Self {
        let verdict = match (values.first(), values.last()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() && values.len() >= 2 => match target {
                Target::Zero if b <= a => Verdict::Consistent,
                Target::Infinity if b > a => Verdict::ConsistentWithDivergence,
                _ => Verdict::Inconsistent,
            },
            _ => Verdict::Undetermined,
        };
        RatioSequence { values, target, verdict, advisory: true }
    }
}

/// Hypothesis ratios of the three limit theorems on the plan's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionReport {
    /// `(f_n / d_n) / (n / log psi(n))`, should vanish.
    pub general: RatioSequence,
    /// `(f_n^alpha / L(f_n)) / (n / log psi(floor(log n)))`, should vanish.
    pub regvar: RatioSequence,
    /// `b_n / log psi(floor(log n))`, should diverge.
    pub trim: RatioSequence,
}

pub fn condition_diagnostics(plan: &TrimmingPlan, tail: Option<&TailModel>, psi: &PsiFunction) -> ConditionReport {
    let mut general = Vec::new();
    let mut regvar = Vec::new();
    let mut trim = Vec::new();
    for r in &plan.rows {
        let nf = r.n as f64;
        general.push(r.f / r.d / (nf / psi.eval(r.n as u64).ln()));
        let lpl = psi.log_at_log(r.n).unwrap_or(f64::NAN);
        regvar.push(match tail {
            Some(t) => r.f.powf(t.alpha()) / t.slowly_varying().eval(r.f) / (nf / lpl),
            None => f64::NAN,
        });
        trim.push(r.b as f64 / lpl);
    }
    ConditionReport {
        general: RatioSequence::new(general, Target::Zero),
        regvar: RatioSequence::new(regvar, Target::Zero),
        trim: RatioSequence::new(trim, Target::Infinity),
    }
}

/// Plan as CSV: `n, f_n, a_n, b_n, d_n, gamma_n` and the three hypothesis
/// ratios.
pub fn plan_csv(plan: &TrimmingPlan, report: &ConditionReport) -> String {
    let mut s = String::from("n,f_n,a_n,b_n,d_n,gamma_n,cond_ratio_a,cond_ratio_regvar,cond_ratio_bn\n");
    for (j, r) in plan.rows.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n, r.f, r.a, r.b, r.d, r.gamma, report.general.values[j], report.regvar.values[j], report.trim.values[j]
        ));
    }
    s
}

/// Trim count schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum TrimSchedule {
    /// `b_n = value`.
    Constant { value: usize },
    /// `b_n = ceil(coef (log n)^power)`.
    LogPower { coef: f64, power: f64 },
    /// `b_n = ceil(coef n^exponent)`.
    PowerLaw { coef: f64, exponent: f64 },
}

impl TrimSchedule {
    pub fn eval(&self, n: usize) -> usize {
        let nf = n as f64;
        let b = match *self {
            TrimSchedule::Constant { value } => return value.min(n),
            TrimSchedule::LogPower { coef, power } => (coef * nf.ln().powf(power)).ceil(),
            TrimSchedule::PowerLaw { coef, exponent } => (coef * nf.powf(exponent)).ceil(),
        };
        (b.max(0.0) as usize).min(n)
    }

    pub fn on(&self, grid: &CheckpointGrid) -> Vec<usize> {
        grid.checkpoints().iter().map(|&n| self.eval(n)).collect()
    }
}

/// Truncation level schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum ThresholdSchedule {
    /// `f_n = coef n^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `f_n = F^<-(1 - target / n)`: `target` expected exceedances.
    Exceedances { target: f64 },
}

impl ThresholdSchedule {
    pub fn on<D: DistributionFunction + ?Sized>(&self, law: &D, grid: &CheckpointGrid) -> Result<Vec<f64>> {
        grid.checkpoints()
            .iter()
            .map(|&n| match *self {
                ThresholdSchedule::Power { coef, exponent } => Ok(coef * (n as f64).powf(exponent)),
                ThresholdSchedule::Exceedances { target } => {
                    if !(target > 0.0 && target <= n as f64) {
                        return Err(SequenceError::InvalidInput(format!("target {target} outside (0, n] at n = {n}")));
                    }
                    Ok(law.tail_quantile(target / n as f64)?)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(v: &[usize]) -> CheckpointGrid {
        CheckpointGrid::new(v.to_vec()).unwrap()
    }

    #[test]
    fn c_function_examples() {
        let sq = PsiFunction::Square;
        assert!((c_function(100.0, 1_000_000, 0.1, &sq).unwrap() - 30.48).abs() < 0.01);
        let lp = 169f64.ln();
        assert!((c_function(1.0, 1_000_000, 0.1, &sq).unwrap() - lp).abs() < 1e-12);
        assert!((c_function(lp, 1_000_000, 0.1, &sq).unwrap() - lp).abs() < 1e-12);
        assert!(matches!(c_function(10.0, 1_000_000, 0.3, &sq), Err(SequenceError::InvalidEps(_))));
        assert!(c_function(10.0, 2, 0.1, &sq).is_err());
    }

    #[test]
    fn c_function_monotone() {
        let sq = PsiFunction::Square;
        let mut prev = 0.0;
        for k in 1..500 {
            let c = c_function(k as f64, 100_000, 0.1, &sq).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        let mut prev = 0.0;
        for e in 1..30 {
            let n = (e as f64).exp().ceil() as usize + 1;
            let c = c_function(50.0, n.max(3), 0.1, &sq).unwrap();
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn piecewise_psi() {
        let p = PsiFunction::PiecewiseRemark;
        assert_eq!(p.eval(8), 9.0);
        assert_eq!(p.eval(7), 49.0);
        assert!(p.log_at_log(5).is_err());
        assert_eq!(p.log_at_log(1_000_000).unwrap(), 169f64.ln());
    }

    #[test]
    fn general_plan_examples() {
        let law = TailModel::pareto(0.5).unwrap();
        let g = grid(&[1_000_000]);
        let p = general_trimming_plan(&law, &[1e6], &g, 0.1, 4.0, &PsiFunction::Square).unwrap();
        let r = p.rows[0];
        assert!((r.a - 1000.0).abs() < 1e-9);
        assert!((r.d - 9.99e8).abs() < 1e-3);
        assert_eq!(r.b, 1372);
        assert!((r.gamma - 372.0).abs() < 1e-9);
        let p = general_trimming_plan(&law, &[1e6], &g, 0.1, 0.0, &PsiFunction::Square).unwrap();
        assert_eq!(p.rows[0].b, 1000);
        let err = general_trimming_plan(&law, &[0.5], &g, 0.1, 4.0, &PsiFunction::Square);
        assert!(matches!(err, Err(SequenceError::ThresholdBelowSupport { .. })));
        assert!(matches!(
            general_trimming_plan(&law, &[10.0], &grid(&[2]), 0.1, 4.0, &PsiFunction::Square),
            Err(SequenceError::CheckpointTooSmall(2))
        ));
    }

    #[test]
    fn no_tail_mass_gives_log_log_trim() {
        struct Bounded;
        impl DistributionFunction for Bounded {
            fn tail(&self, x: f64) -> f64 {
                if x >= 1.0 { 0.0 } else { 1.0 - x }
            }
            fn tail_quantile(&self, p: f64) -> crate::regvar::Result<f64> {
                Ok(1.0 - p)
            }
            fn truncated_mean(&self, u: f64) -> crate::regvar::Result<f64> {
                Ok(0.5 * u.min(1.0).powi(2))
            }
        }
        let g = grid(&[1_000_000]);
        let p = general_trimming_plan(&Bounded, &[2.0], &g, 0.1, 4.0, &PsiFunction::Square).unwrap();
        assert_eq!(p.rows[0].a, 0.0);
        assert_eq!(p.rows[0].b, (4.0 * 1e6f64.ln().ln()).ceil() as usize);
    }

    #[test]
    fn pareto_plans_match_closed_forms() {
        let law = TailModel::pareto(0.5).unwrap();
        let g = CheckpointGrid::geometric(10, 3.0, 10_000_000).unwrap();
        let f: Vec<f64> = g.checkpoints().iter().map(|&n| (n as f64).powf(1.3)).collect();
        let p = general_trimming_plan(&law, &f, &g, 0.1, 4.0, &PsiFunction::Square).unwrap();
        for r in &p.rows {
            let a = r.n as f64 * r.f.powf(-0.5);
            let d = r.n as f64 * (r.f.sqrt() - 1.0);
            assert!((r.a / a - 1.0).abs() < 1e-12);
            assert!((r.d / d - 1.0).abs() < 1e-12);
            assert!(r.b as f64 >= r.a);
        }
    }

    #[test]
    fn norming_examples() {
        let one = SlowlyVarying::one();
        let d = regvar_norming(0.5, &one, &[100, 1], &grid(&[1_000_000, 1_000_001])).unwrap();
        assert_eq!(d[0], 1e10);
        assert_eq!(d[1], 1_000_001f64.powi(2));
        assert!(regvar_norming(0.5, &one, &[1000], &grid(&[1000])).is_err());
        let g = CheckpointGrid::geometric(100, 2.0, 1 << 30).unwrap();
        let b: Vec<usize> = g.checkpoints().iter().map(|&n| ((n as f64).ln().powi(2)).ceil() as usize).collect();
        let d = regvar_norming(0.5, &one, &b, &g).unwrap();
        for ((&n, &bj), dj) in g.checkpoints().iter().zip(&b).zip(&d) {
            assert_eq!(*dj, (n as f64) * (n as f64) / bj as f64);
        }
        // 4 / sqrt(x) = b/n at x = (4n/b)^2, and d = b x
        let d = regvar_norming(0.5, &SlowlyVarying::Constant(4.0), &[100], &grid(&[1_000_000])).unwrap();
        assert!((d[0] / 1.6e11 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norming_matches_truncated_mean_at_the_quantile() {
        // alpha/(1-alpha) n x^(1-alpha) L(x) with n (1 - F(x)) = b equals
        // alpha/(1-alpha) b x, for any L
        for (alpha, l) in [(0.5, SlowlyVarying::LogPower(1.0)), (0.3, SlowlyVarying::LogPower(-2.0)), (0.7, SlowlyVarying::LogLog(1.0))] {
            let tail = TailModel::new(alpha, l.clone(), 1e4).unwrap();
            let g = CheckpointGrid::new(vec![1_000_000, 100_000_000, 10_000_000_000]).unwrap();
            let b: Vec<usize> = g.checkpoints().iter().map(|&n| ((n as f64).ln().powi(2)).ceil() as usize).collect();
            let d = regvar_norming(alpha, &l, &b, &g).unwrap();
            for ((&n, &bj), dj) in g.checkpoints().iter().zip(&b).zip(&d) {
                let x = tail.tail_quantile(bj as f64 / n as f64).unwrap();
                let oracle = n as f64 * tail.karamata(x).unwrap();
                assert!((dj / oracle - 1.0).abs() < 1e-8, "alpha {alpha} L {l}: {dj} vs {oracle}");
            }
        }
    }

    #[test]
    fn threshold_examples() {
        let law = TailModel::pareto(0.5).unwrap();
        let g = grid(&[1_000_000]);
        let f = threshold_from_trim(&law, &[1372], &g, 4.0, 0.1, &PsiFunction::Square).unwrap();
        assert!((f[0] / 1.623e6 - 1.0).abs() < 1e-3, "{}", f[0]);
        let f = threshold_from_trim(&law, &[1000], &g, 0.0, 0.1, &PsiFunction::Square).unwrap();
        assert!((f[0] - (1e6 - 1.0)).abs() < 1e-6);
        assert!(matches!(
            threshold_from_trim(&law, &[100], &g, 4.0, 0.1, &PsiFunction::Square),
            Err(SequenceError::TrimTooSmallForMargin { .. })
        ));
    }

    #[test]
    fn threshold_round_trip() {
        let law = TailModel::pareto(0.5).unwrap();
        let g = CheckpointGrid::geometric(10_000, 2.0, 100_000_000).unwrap();
        let b: Vec<usize> = g.checkpoints().iter().map(|&n| ((n as f64).sqrt() * 2.0) as usize).collect();
        let (w, eps, psi) = (4.0, 0.1, PsiFunction::Square);
        let f = threshold_from_trim(&law, &b, &g, w, eps, &psi).unwrap();
        for ((&n, &bj), fj) in g.checkpoints().iter().zip(&b).zip(&f) {
            let a = n as f64 * law.tail(*fj);
            let c = c_function(bj as f64, n, eps, &psi).unwrap();
            assert!(a <= bj as f64);
            assert!(bj as f64 - a >= w * c - 2.0);
        }
    }

    #[test]
    fn diagnostics_examples() {
        let g = CheckpointGrid::geometric(1000, 10.0, 1_000_000).unwrap();
        let sched = TrimSchedule::LogPower { coef: 1.0, power: 2.0 };
        let b = sched.on(&g);
        assert_eq!(*b.last().unwrap(), 191);
        let k = g.len();
        let plan = TrimmingPlan::fixed(&g, &b, &vec![10.0; k], &vec![1.0; k], &vec![0.0; k]).unwrap();
        let tail = TailModel::pareto(0.5).unwrap();
        let rep = condition_diagnostics(&plan, Some(&tail), &PsiFunction::Square);
        assert!((rep.trim.values.last().unwrap() - 37.2).abs() < 0.05);
        assert_eq!(rep.trim.verdict, Verdict::ConsistentWithDivergence);
        assert_eq!(rep.regvar.verdict, Verdict::Consistent);
        let plan = TrimmingPlan::fixed(&g, &vec![5; k], &vec![10.0; k], &vec![1.0; k], &vec![0.0; k]).unwrap();
        let rep = condition_diagnostics(&plan, Some(&tail), &PsiFunction::Square);
        assert_eq!(rep.trim.verdict, Verdict::Inconsistent);
        assert!(rep.trim.advisory);
        let csv = plan_csv(&plan, &rep);
        assert_eq!(csv.lines().count(), k + 1);
    }

    #[test]
    fn schedules_from_json() {
        let s: TrimSchedule = serde_json::from_str(r#"{"kind":"constant","value":1}"#).unwrap();
        assert_eq!(s.eval(100), 1);
        let t: ThresholdSchedule = serde_json::from_str(r#"{"kind":"exceedances","target":100}"#).unwrap();
        let law = TailModel::pareto(0.5).unwrap();
        let f = t.on(&law, &grid(&[10_000])).unwrap();
        assert!((f[0] - 1e4).abs() < 1e-6);
        let psi: PsiFunction = serde_json::from_str(r#""square""#).unwrap();
        assert_eq!(psi, PsiFunction::Square);
    }
}
