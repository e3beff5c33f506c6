use super::{RegVarError, Result};
use serde::{Deserialize, Serialize};

/// Slowly varying function `L`, evaluated on `x >= domain_start()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SlowlyVaryingSpec", into = "SlowlyVaryingSpec")]
pub enum SlowlyVarying {
    /// `L(x) = c`.
    Constant(f64),
    /// `L(x) = (ln x)^beta`, defined for `x > 1`.
    LogPower(f64),
    /// `L(x) = (ln ln x)^power`, defined for `x > e`.
    LogLog(f64),
    /// Log-log linear interpolation through positive `(x, L(x))` pairs,
    /// held constant outside the table.
    Tabulated(Vec<(f64, f64)>),
}

impl SlowlyVarying {
    pub fn one() -> Self {
        SlowlyVarying::Constant(1.0)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let l = SlowlyVarying::Tabulated(points);
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SlowlyVarying::Constant(c) if !(c.is_finite() && *c > 0.0) => {
                Err(RegVarError::InvalidInput(format!("constant L must be positive, got {c}")))
            }
            SlowlyVarying::LogPower(b) | SlowlyVarying::LogLog(b) if !b.is_finite() => {
                Err(RegVarError::InvalidInput(format!("non-finite exponent {b}")))
            }
            SlowlyVarying::Tabulated(pts) => {
                if pts.is_empty() {
                    return Err(RegVarError::InvalidInput("empty L table".into()));
                }
                if pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
                    return Err(RegVarError::InvalidInput("L table entries must be positive".into()));
                }
                if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(RegVarError::InvalidInput("L table abscissae must increase".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Left end of the evaluation domain (exclusive for log kinds).
    pub fn domain_start(&self) -> f64 {
        match self {
            SlowlyVarying::Constant(_) | SlowlyVarying::Tabulated(_) => 0.0,
            SlowlyVarying::LogPower(_) => 1.0,
            SlowlyVarying::LogLog(_) => std::f64::consts::E,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SlowlyVarying::Constant(c) => *c,
            SlowlyVarying::LogPower(b) => x.ln().powf(*b),
            SlowlyVarying::LogLog(p) => x.ln().ln().powf(*p),
            SlowlyVarying::Tabulated(pts) => interpolate_log_log(pts, x),
        }
    }

    /// `L^p`, which is again slowly varying.
    pub fn powf(&self, p: f64) -> SlowlyVarying {
        match self {
            SlowlyVarying::Constant(c) => SlowlyVarying::Constant(c.powf(p)),
            SlowlyVarying::LogPower(b) => SlowlyVarying::LogPower(b * p),
            SlowlyVarying::LogLog(q) => SlowlyVarying::LogLog(q * p),
            SlowlyVarying::Tabulated(pts) => {
                SlowlyVarying::Tabulated(pts.iter().map(|&(x, y)| (x, y.powf(p))).collect())
            }
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            SlowlyVarying::Constant(c) => Some(*c),
            SlowlyVarying::LogPower(b) | SlowlyVarying::LogLog(b) if *b == 0.0 => Some(1.0),
            _ => None,
        }
    }
}

fn interpolate_log_log(pts: &[(f64, f64)], x: f64) -> f64 {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = pts.partition_point(|p| p.0 <= x);
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    let w = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    (y0.ln() + w * (y1.ln() - y0.ln())).exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlowlyVaryingSpec {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
}

impl TryFrom<SlowlyVaryingSpec> for SlowlyVarying {
    type Error = RegVarError;

    fn try_from(s: SlowlyVaryingSpec) -> Result<Self> {
        let l = match s.kind.as_str() {
            "constant" => SlowlyVarying::Constant(s.param.unwrap_or(1.0)),
            "logPower" => SlowlyVarying::LogPower(s.param.ok_or_else(|| {
                RegVarError::InvalidInput("logPower needs `param` (the exponent)".into())
            })?),
            "logLog" => SlowlyVarying::LogLog(s.param.unwrap_or(1.0)),
            "tabulated" => SlowlyVarying::Tabulated(
                s.points
                    .ok_or_else(|| RegVarError::InvalidInput("tabulated L needs `points`".into()))?
                    .into_iter()
                    .map(|[x, y]| (x, y))
                    .collect(),
            ),
            other => return Err(RegVarError::InvalidInput(format!("unknown L kind `{other}`"))),
        };
        l.validate()?;
        Ok(l)
    }
}

impl From<SlowlyVarying> for SlowlyVaryingSpec {
    fn from(l: SlowlyVarying) -> Self {
        let (kind, param, points) = match l {
            SlowlyVarying::Constant(c) => ("constant", Some(c), None),
            SlowlyVarying::LogPower(b) => ("logPower", Some(b), None),
            SlowlyVarying::LogLog(p) => ("logLog", Some(p), None),
            SlowlyVarying::Tabulated(pts) => {
                ("tabulated", None, Some(pts.into_iter().map(|(x, y)| [x, y]).collect()))
            }
        };
        SlowlyVaryingSpec { kind: kind.into(), param, points }
    }
}

impl std::fmt::Display for SlowlyVarying {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlowlyVarying::Constant(c) => write!(f, "{c}"),
            SlowlyVarying::LogPower(b) => write!(f, "(ln x)^{b}"),
            SlowlyVarying::LogLog(p) => write!(f, "(ln ln x)^{p}"),
            SlowlyVarying::Tabulated(pts) => write!(f, "tabulated[{}]", pts.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let l: SlowlyVarying = serde_json::from_str(r#"{"kind":"logPower","param":2.0}"#).unwrap();
        assert_eq!(l, SlowlyVarying::LogPower(2.0));
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"kind":"logPower","param":2.0}"#);
        assert!(serde_json::from_str::<SlowlyVarying>(r#"{"kind":"bogus"}"#).is_err());
        assert!(serde_json::from_str::<SlowlyVarying>(r#"{"kind":"constant","param":-1}"#).is_err());
    }

    #[test]
    fn positive_on_domain() {
        for l in [SlowlyVarying::one(), SlowlyVarying::LogPower(-2.0), SlowlyVarying::LogPower(3.0), SlowlyVarying::LogLog(1.0)] {
            let mut x = l.domain_start() * 1.01 + 0.01;
            while x < 1e300 {
                assert!(l.eval(x) > 0.0, "{l} at {x}");
                x *= 7.3;
            }
        }
    }

    // |L(2x)/L(x) - 1| for (ln x)^beta behaves like |beta| ln 2 / ln x;
    // it is checked against that rate rather than a fixed cut-off.
    #[test]
    fn slow_variation_rate() {
        for beta in [-3.0, -1.0, 0.5, 1.0, 3.0] {
            let l = SlowlyVarying::LogPower(beta);
            for x in [1e6, 1e30, 1e100, 1e300] {
                let dev = (l.eval(2.0 * x) / l.eval(x) - 1.0).abs();
                let rate = f64::abs(beta) * std::f64::consts::LN_2 / f64::ln(x);
                assert!(dev <= 1.5 * rate, "beta={beta} x={x} dev={dev}");
            }
        }
        let l = SlowlyVarying::LogLog(1.0);
        assert!((l.eval(2e300) / l.eval(1e300) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn tabulated_interpolation() {
        let l = SlowlyVarying::tabulated(vec![(1.0, 1.0), (100.0, 4.0)]).unwrap();
        assert_eq!(l.eval(0.5), 1.0);
        assert!((l.eval(10.0) - 2.0).abs() < 1e-12);
        assert_eq!(l.eval(1e9), 4.0);
        assert!(SlowlyVarying::tabulated(vec![(2.0, 1.0), (1.0, 1.0)]).is_err());
    }
}
