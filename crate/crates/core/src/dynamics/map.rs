use super::DynamicsError;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Affine branch `T(x) = intercept + slope * (x - lo)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineBranch {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl AffineBranch {
    fn image(&self) -> (f64, f64) {
        let a = self.intercept;
        let b = self.intercept + self.slope * (self.hi - self.lo);
        (a.min(b), a.max(b))
    }
}

/// One monotone branch as used by transfer-operator discretisations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Affine(AffineBranch),
    /// `T(x) = 1/x - m` on `(1/(m+1), 1/m]`.
    Reciprocal(u64),
}

impl Branch {
    pub fn domain(&self) -> (f64, f64) {
        match *self {
            Branch::Affine(b) => (b.lo, b.hi),
            Branch::Reciprocal(m) => (1.0 / (m as f64 + 1.0), 1.0 / m as f64),
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Branch::Affine(b) => b.intercept + b.slope * (x - b.lo),
            Branch::Reciprocal(m) => 1.0 / x - m as f64,
        }
    }

    /// Branch preimage of `y`, if `y` lies in the branch image.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        match *self {
            Branch::Affine(b) => {
                let (lo, hi) = b.image();
                (lo..=hi).contains(&y).then(|| b.lo + (y - b.intercept) / b.slope)
            }
            Branch::Reciprocal(m) => (0.0..=1.0).contains(&y).then(|| 1.0 / (y + m as f64)),
        }
    }

    /// The interval `{x in domain : T(x) in [c, d]}`, if non-empty.
    pub fn preimage(&self, c: f64, d: f64) -> Option<(f64, f64)> {
        match *self {
            Branch::Affine(br) => {
                let (ilo, ihi) = br.image();
                let (c, d) = (c.max(ilo), d.min(ihi));
                if c >= d {
                    return None;
                }
                let x1 = br.lo + (c - br.intercept) / br.slope;
                let x2 = br.lo + (d - br.intercept) / br.slope;
                Some((x1.min(x2).max(br.lo), x1.max(x2).min(br.hi)))
            }
            Branch::Reciprocal(m) => {
                let (c, d) = (c.max(0.0), d.min(1.0));
                if c >= d {
                    return None;
                }
                let m = m as f64;
                Some((1.0 / (d + m), 1.0 / (c + m)))
            }
        }
    }

    /// Lebesgue measure of `{x in domain : T(x) in [c, d]}` intersected
    /// with `[a, b]`.
    pub fn preimage_measure(&self, c: f64, d: f64, a: f64, b: f64) -> f64 {
        match *self {
            Branch::Affine(br) => {
                let (ilo, ihi) = br.image();
                let (c, d) = (c.max(ilo), d.min(ihi));
                if c >= d {
                    return 0.0;
                }
                let x1 = br.lo + (c - br.intercept) / br.slope;
                let x2 = br.lo + (d - br.intercept) / br.slope;
                let (lo, hi) = (x1.min(x2).max(a), x1.max(x2).min(b));
                (hi - lo).max(0.0)
            }
            Branch::Reciprocal(m) => {
                let m = m as f64;
                let (lo, hi) = ((1.0 / (d + m)).max(a), (1.0 / (c + m)).min(b));
                (hi - lo).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `2x mod 1`.
    Doubling,
    /// `{1/x}`.
    Gauss,
    PiecewiseAffine(Vec<AffineBranch>),
    /// Diagnostic non-expanding map.
    Identity,
}

/// A piecewise monotone map of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpec", into = "MapSpec")]
pub struct IntervalMap {
    kind: MapKind,
    mixing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MapSpec {
    Named(String),
    Branches { branches: Vec<AffineBranch> },
}

impl TryFrom<MapSpec> for IntervalMap {
    type Error = DynamicsError;
    fn try_from(s: MapSpec) -> Result<Self, DynamicsError> {
        match s {
            MapSpec::Named(n) => match n.as_str() {
                "doubling" => Ok(IntervalMap::doubling()),
                "gauss" => Ok(IntervalMap::gauss()),
                "identity" => Ok(IntervalMap::identity()),
                other => Err(DynamicsError::InvalidMap(format!("unknown map `{other}`"))),
            },
            MapSpec::Branches { branches } => IntervalMap::piecewise_affine(branches),
        }
    }
}

impl From<IntervalMap> for MapSpec {
    fn from(m: IntervalMap) -> Self {
        match m.kind {
            MapKind::Doubling => MapSpec::Named("doubling".into()),
            MapKind::Gauss => MapSpec::Named("gauss".into()),
            MapKind::Identity => MapSpec::Named("identity".into()),
            MapKind::PiecewiseAffine(branches) => MapSpec::Branches { branches },
        }
    }
}

const DOUBLING: [AffineBranch; 2] = [
    AffineBranch { lo: 0.0, hi: 0.5, slope: 2.0, intercept: 0.0 },
    AffineBranch { lo: 0.5, hi: 1.0, slope: 2.0, intercept: 0.0 },
];

impl IntervalMap {
    pub fn doubling() -> Self {
        IntervalMap { kind: MapKind::Doubling, mixing: true }
    }

    pub fn gauss() -> Self {
        IntervalMap { kind: MapKind::Gauss, mixing: true }
    }

    pub fn identity() -> Self {
        IntervalMap { kind: MapKind::Identity, mixing: false }
    }

    /// User map from affine branches. Branches must tile `[0, 1]` in
    /// order, map into `[0, 1]`, and expand uniformly (`|slope| > 1`).
    pub fn piecewise_affine(branches: Vec<AffineBranch>) -> Result<Self, DynamicsError> {
        if branches.is_empty() {
            return Err(DynamicsError::InvalidMap("no branches".into()));
        }
        let mut edge = 0.0;
        for b in &branches {
            if (b.lo - edge).abs() > 1e-12 || !(b.hi > b.lo) {
                return Err(DynamicsError::InvalidMap(format!(
                    "branches must tile [0,1] in order; gap or overlap at {edge}"
                )));
            }
            if !(b.slope.abs() > 1.0) {
                return Err(DynamicsError::InvalidMap(format!("branch slope {} is not expanding", b.slope)));
            }
            let (lo, hi) = b.image();
            if lo < -1e-12 || hi > 1.0 + 1e-12 {
                return Err(DynamicsError::InvalidMap(format!("branch image [{lo}, {hi}] leaves [0,1]")));
            }
            edge = b.hi;
        }
        if (edge - 1.0).abs() > 1e-12 {
            return Err(DynamicsError::InvalidMap("branches do not reach 1".into()));
        }
        Ok(IntervalMap { kind: MapKind::PiecewiseAffine(branches), mixing: true })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MapKind::Doubling => "doubling",
            MapKind::Gauss => "gauss",
            MapKind::PiecewiseAffine(_) => "piecewise-affine",
            MapKind::Identity => "identity",
        }
    }

    /// Mixing is asserted by construction, not verified.
    pub fn is_mixing(&self) -> bool {
        self.mixing
    }

    /// `(k, m)` with `|(T^k)'| >= m` everywhere. The Gauss map only
    /// expands uniformly from the second iterate on.
    pub fn expansion(&self) -> (u32, f64) {
        match &self.kind {
            MapKind::Doubling => (1, 2.0),
            MapKind::Gauss => (2, 4.0),
            MapKind::Identity => (1, 1.0),
            MapKind::PiecewiseAffine(b) => (1, b.iter().map(|b| b.slope.abs()).fold(f64::INFINITY, f64::min)),
        }
    }

    pub fn step(&self, x: f64) -> Result<f64, DynamicsError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(DynamicsError::OutOfDomain(x));
        }
        Ok(match &self.kind {
            MapKind::Doubling => (2.0 * x).fract(),
            MapKind::Gauss => {
                if x == 0.0 {
                    return Err(DynamicsError::UndefinedPoint(x));
                }
                (1.0 / x).fract()
            }
            MapKind::Identity => x,
            MapKind::PiecewiseAffine(branches) => {
                let i = branches.partition_point(|b| b.hi <= x).min(branches.len() - 1);
                Branch::Affine(branches[i]).forward(x).clamp(0.0, 1.0)
            }
        })
    }

    /// Branches in order; the Gauss map is truncated to its first `max`
    /// branches.
    pub fn branches(&self, max: usize) -> Vec<Branch> {
        match &self.kind {
            MapKind::Doubling => DOUBLING.iter().copied().map(Branch::Affine).collect(),
            MapKind::Gauss => (1..=max as u64).map(Branch::Reciprocal).collect(),
            MapKind::Identity => vec![Branch::Affine(AffineBranch { lo: 0.0, hi: 1.0, slope: 1.0, intercept: 0.0 })],
            MapKind::PiecewiseAffine(b) => b.iter().copied().map(Branch::Affine).collect(),
        }
    }

    /// Closed-form invariant density, where available.
    pub fn invariant_density(&self) -> Option<fn(f64) -> f64> {
        match &self.kind {
            MapKind::Doubling | MapKind::Identity => Some(|_| 1.0),
            MapKind::Gauss => Some(|x| 1.0 / (LN_2 * (1.0 + x))),
            MapKind::PiecewiseAffine(b) if self.lebesgue_invariant(b) => Some(|_| 1.0),
            MapKind::PiecewiseAffine(_) => None,
        }
    }

    // full affine branches preserve Lebesgue measure
    fn lebesgue_invariant(&self, branches: &[AffineBranch]) -> bool {
        branches.iter().all(|b| {
            let (lo, hi) = b.image();
            lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12
        })
    }

    pub fn preserves_lebesgue(&self) -> bool {
        match &self.kind {
            MapKind::Doubling | MapKind::Identity => true,
            MapKind::Gauss => false,
            MapKind::PiecewiseAffine(b) => self.lebesgue_invariant(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let d = IntervalMap::doubling();
        assert_eq!(d.step(0.375).unwrap(), 0.75);
        assert_eq!(d.step(0.75).unwrap(), 0.5);
        let g = IntervalMap::gauss();
        assert!((g.step(0.4).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(g.step(0.0), Err(DynamicsError::UndefinedPoint(_))));
        assert!(matches!(d.step(1.5), Err(DynamicsError::OutOfDomain(_))));
        assert!(matches!(d.step(-0.1), Err(DynamicsError::OutOfDomain(_))));
    }

    #[test]
    fn inverse_branches_invert_step() {
        let tent = IntervalMap::piecewise_affine(vec![
            AffineBranch { lo: 0.0, hi: 0.5, slope: 2.0, intercept: 0.0 },
            AffineBranch { lo: 0.5, hi: 1.0, slope: -2.0, intercept: 1.0 },
        ])
        .unwrap();
        for map in [IntervalMap::doubling(), IntervalMap::gauss(), tent] {
            for br in map.branches(50) {
                for k in 1..20 {
                    let y = k as f64 / 20.0;
                    let x = br.inverse(y).unwrap();
                    let (lo, hi) = br.domain();
                    if x > lo && x < hi {
                        assert!((map.step(x).unwrap() - y).abs() < 1e-12, "{:?} y={y}", br);
                    }
                }
            }
        }
    }

    #[test]
    fn user_map_validation() {
        let bad = IntervalMap::piecewise_affine(vec![AffineBranch { lo: 0.0, hi: 1.0, slope: 0.5, intercept: 0.0 }]);
        assert!(bad.is_err());
        let gap = IntervalMap::piecewise_affine(vec![AffineBranch { lo: 0.0, hi: 0.4, slope: 2.0, intercept: 0.0 }]);
        assert!(gap.is_err());
        let json = r#"{"branches":[{"lo":0,"hi":0.5,"slope":2,"intercept":0},{"lo":0.5,"hi":1,"slope":2,"intercept":0}]}"#;
        let m: IntervalMap = serde_json::from_str(json).unwrap();
        assert!(m.preserves_lebesgue());
        assert_eq!(m.step(0.75).unwrap(), 0.5);
        let g: IntervalMap = serde_json::from_str(r#""gauss""#).unwrap();
        assert_eq!(g, IntervalMap::gauss());
    }

    #[test]
    fn expansion_bounds() {
        assert_eq!(IntervalMap::doubling().expansion(), (1, 2.0));
        // |(T^2)'| = 1/(x T x)^2 >= 4 for the Gauss map
        let g = IntervalMap::gauss();
        let mut min = f64::INFINITY;
        for i in 1..100_000 {
            let x = i as f64 / 100_000.0;
            let t = g.step(x).unwrap();
            if t > 0.0 {
                min = min.min(1.0 / (x * t).powi(2));
            }
        }
        assert!(min >= 4.0 - 1e-9);
    }
}
