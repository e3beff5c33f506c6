use super::{DynamicsError, IntervalMap, MapKind};
use crate::regvar::{Law, TailModel};
use serde::{Deserialize, Serialize};

/// Non-negative observable on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Observable {
    /// `x^(-1/alpha)`, regularly varying with index `alpha` under Lebesgue.
    Pareto { alpha: f64 },
    /// `floor(1/x)`, the continued-fraction digit.
    FloorReciprocal,
    /// Piecewise linear through `(x, y)` knots with increasing `x`.
    #[serde(alias = "userMonotone")]
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VariationMethod {
    Analytic,
    DyadicRefinement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VariationLevel {
    pub level: f64,
    pub truncated_variation: f64,
    pub indicator_variation: f64,
    pub refinement: u32,
}

/// Empirical constants `K1 >= V(chi 1{chi<=l}) / l` and
/// `K2 >= V(1{chi>l})` over a level grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VariationReport {
    pub k1: f64,
    pub k2: f64,
    pub pass: bool,
    pub method: VariationMethod,
    pub levels: Vec<VariationLevel>,
}

const MIN_REFINEMENT: u32 = 8;
const MAX_REFINEMENT: u32 = 22;

impl Observable {
    pub fn pareto(alpha: f64) -> Result<Self, DynamicsError> {
        let o = Observable::Pareto { alpha };
        o.validate()?;
        Ok(o)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, DynamicsError> {
        let o = Observable::Tabulated { points };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        match self {
            Observable::Pareto { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => {
                Err(DynamicsError::InvalidInput(format!("pareto alpha must be positive, got {alpha}")))
            }
            Observable::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(DynamicsError::InvalidInput("tabulated observable needs two knots".into()));
                }
                if points.iter().any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(y >= 0.0 && y.is_finite())) {
                    return Err(DynamicsError::InvalidInput(
                        "tabulated knots must lie in [0,1] with finite non-negative values".into(),
                    ));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(DynamicsError::InvalidInput("tabulated knots must increase in x".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Pareto { alpha } => pareto_eval(x, 1.0 / alpha),
            Observable::FloorReciprocal => (1.0 / x).floor(),
            Observable::Tabulated { points } => {
                let i = points.partition_point(|p| p.0 <= x);
                if i == 0 {
                    return points[0].1;
                }
                if i == points.len() {
                    return points[i - 1].1;
                }
                let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    fn monotone(&self) -> bool {
        match self {
            Observable::Pareto { .. } | Observable::FloorReciprocal => true,
            Observable::Tabulated { points } => {
                points.windows(2).all(|w| w[1].1 <= w[0].1) || points.windows(2).all(|w| w[1].1 >= w[0].1)
            }
        }
    }

    fn constant(&self) -> bool {
        match self {
            Observable::Tabulated { points } => points.iter().all(|p| p.1 == points[0].1),
            _ => false,
        }
    }

    /// Distribution of the observable under the map's reference measure,
    /// when it is one of the supported closed forms.
    pub fn law(&self, map: &IntervalMap) -> Option<Law> {
        match (self, map.kind()) {
            (Observable::Pareto { alpha }, _) if map.preserves_lebesgue() => {
                TailModel::pareto(*alpha).ok().map(Law::RegVar)
            }
            (Observable::FloorReciprocal, MapKind::Gauss) => Some(Law::GaussKuzmin),
            (Observable::FloorReciprocal, _) if map.preserves_lebesgue() => Some(Law::ReciprocalFloor),
            _ => None,
        }
    }

    /// Variation constants over the level grid. Monotone observables take
    /// the analytic value; the rest use a dyadic refinement doubled until
    /// both variations settle to 0.1%.
    pub fn validate_variation(&self, levels: &[f64]) -> Result<VariationReport, DynamicsError> {
        if self.monotone() {
            return self.variation_analytic(levels);
        }
        self.variation_numeric(levels)
    }

    fn check_levels(levels: &[f64]) -> Result<(), DynamicsError> {
        if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(DynamicsError::InvalidInput("level grid must be non-empty and positive".into()));
        }
        Ok(())
    }

    fn variation_analytic(&self, levels: &[f64]) -> Result<VariationReport, DynamicsError> {
        Self::check_levels(levels)?;
        // a monotone function truncated at l jumps by at most l and moves by
        // at most l otherwise; the indicator jumps once
        let (k1, k2) = if self.constant() { (0.0, 0.0) } else { (2.0, 1.0) };
        Ok(VariationReport { k1, k2, pass: true, method: VariationMethod::Analytic, levels: Vec::new() })
    }

    /// Dyadic-refinement estimate regardless of monotonicity.
    pub fn variation_numeric(&self, levels: &[f64]) -> Result<VariationReport, DynamicsError> {
        Self::check_levels(levels)?;
        let mut out = Vec::with_capacity(levels.len());
        let mut pass = true;
        for &l in levels {
            let mut prev: Option<(f64, f64)> = None;
            let mut level = None;
            let mut streak = 0;
            for r in MIN_REFINEMENT..=MAX_REFINEMENT {
                let (v1, v2) = self.grid_variation(l, r);
                if !(v1.is_finite() && v2.is_finite()) {
                    pass = false;
                    level = Some(VariationLevel { level: l, truncated_variation: v1, indicator_variation: v2, refinement: r });
                    break;
                }
                if prev.is_some_and(|(p1, p2)| close(v1, p1) && close(v2, p2)) {
                    streak += 1;
                } else {
                    streak = 0;
                }
                level = Some(VariationLevel { level: l, truncated_variation: v1, indicator_variation: v2, refinement: r });
                // a coarse grid can miss a level crossing twice in a row
                if streak >= 2 {
                    break;
                }
                prev = Some((v1, v2));
            }
            out.push(level.expect("refinement loop runs at least once"));
        }
        let k1 = out.iter().map(|v| v.truncated_variation / v.level).fold(0.0, f64::max);
        let k2 = out.iter().map(|v| v.indicator_variation).fold(0.0, f64::max);
        let pass = pass && k1.is_finite() && k2.is_finite();
        Ok(VariationReport { k1, k2, pass, method: VariationMethod::DyadicRefinement, levels: out })
    }

    fn grid_variation(&self, l: f64, refinement: u32) -> (f64, f64) {
        let n = 1u64 << refinement;
        let sample = |j: u64| {
            let x = j as f64 / n as f64;
            let v = self.eval(x);
            if v <= l { (v, 0.0f64) } else { (0.0, 1.0) }
        };
        let (mut v1, mut v2) = (0.0f64, 0.0f64);
        let mut last = sample(0);
        for j in 1..=n {
            let cur = sample(j);
            v1 += (cur.0 - last.0).abs();
            v2 += (cur.1 - last.1).abs();
            last = cur;
        }
        (v1, v2)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-3 * a.abs().max(b.abs()) || a == b
}

#[inline]
pub(crate) fn pareto_eval(x: f64, exponent: f64) -> f64 {
    let k = exponent.round();
    if k == exponent && k.abs() <= 8.0 {
        x.powi(-(k as i32))
    } else {
        x.powf(-exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_short_circuit() {
        let r = Observable::pareto(0.5).unwrap().validate_variation(&[2.0, 10.0]).unwrap();
        assert_eq!((r.k1, r.k2, r.pass), (2.0, 1.0, true));
        let r = Observable::FloorReciprocal.validate_variation(&[1.0, 7.5]).unwrap();
        assert_eq!((r.k1, r.k2, r.pass), (2.0, 1.0, true));
        let zero = Observable::tabulated(vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let r = zero.validate_variation(&[1.0]).unwrap();
        assert_eq!((r.k1, r.k2, r.pass), (0.0, 0.0, true));
        assert!(Observable::FloorReciprocal.validate_variation(&[]).is_err());
    }

    #[test]
    fn numeric_matches_jump_computation() {
        // V(x^-2 truncated at l) = l + (l - 1)
        let r = Observable::pareto(0.5).unwrap().variation_numeric(&[10.0, 100.0]).unwrap();
        for v in &r.levels {
            assert!((v.truncated_variation - (2.0 * v.level - 1.0)).abs() < 1e-2 * v.level, "{v:?}");
            assert_eq!(v.indicator_variation, 1.0);
        }
        assert!(r.k1 <= 2.0 && r.pass);
    }

    #[test]
    fn numeric_path_for_hat_function() {
        let hat = Observable::tabulated(vec![(0.0, 0.0), (0.5, 4.0), (1.0, 0.0)]).unwrap();
        let r = hat.validate_variation(&[2.0, 8.0]).unwrap();
        assert_eq!(r.method, VariationMethod::DyadicRefinement);
        // level 2: rise to 2, drop 2 at both crossings, fall 2
        assert!((r.levels[0].truncated_variation - 8.0).abs() < 1e-9);
        assert_eq!(r.levels[0].indicator_variation, 2.0);
        assert!((r.levels[1].truncated_variation - 8.0).abs() < 1e-9);
        assert!((r.k1 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn induced_laws() {
        let d = IntervalMap::doubling();
        let law = Observable::pareto(0.5).unwrap().law(&d).unwrap();
        assert_eq!(law.tail_index(), 0.5);
        assert_eq!(Observable::FloorReciprocal.law(&IntervalMap::gauss()), Some(Law::GaussKuzmin));
        assert_eq!(Observable::FloorReciprocal.law(&d), Some(Law::ReciprocalFloor));
        assert!(Observable::pareto(0.5).unwrap().law(&IntervalMap::gauss()).is_none());
    }

    #[test]
    fn json_forms() {
        let o: Observable = serde_json::from_str(r#"{"kind":"pareto","alpha":0.5}"#).unwrap();
        assert_eq!(o.eval(0.5), 4.0);
        let o: Observable = serde_json::from_str(r#"{"kind":"floorReciprocal"}"#).unwrap();
        assert_eq!(o.eval(0.3), 3.0);
    }
}
