use super::bits::BitStream;
use super::cf::{cf_digits, BITS_PER_DIGIT};
use super::observable::pareto_eval;
use super::{DynamicsError, IntervalMap, MapKind, Observable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// How orbits are iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OrbitMode {
    /// Hardware floats. Doubling orbits collapse to 0 after about 53 steps
    /// and Gauss orbits of a float end at 0 after a few dozen; both only
    /// shadow true orbits for short runs.
    DoubleFloat,
    /// Doubling map as a shift on a lazily generated bit stream.
    ExactBits,
    /// Gauss map through exact continued-fraction digits.
    ExactCf,
}

impl OrbitMode {
    /// Exact mode for maps that have one, floats otherwise.
    pub fn exact_for(map: &IntervalMap) -> OrbitMode {
        match map.kind() {
            MapKind::Doubling => OrbitMode::ExactBits,
            MapKind::Gauss => OrbitMode::ExactCf,
            _ => OrbitMode::DoubleFloat,
        }
    }

    pub fn check(self, map: &IntervalMap) -> Result<(), DynamicsError> {
        match (self, map.kind()) {
            (OrbitMode::DoubleFloat, _) | (OrbitMode::ExactBits, MapKind::Doubling) | (OrbitMode::ExactCf, MapKind::Gauss) => {
                Ok(())
            }
            _ => Err(DynamicsError::IncompatibleMode { mode: self, map: map.name() }),
        }
    }
}

/// Starting point of an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitStart {
    Point(f64),
    /// Reproducible random start: stream `stream` of base seed `seed`.
    Seed { seed: u64, stream: u64 },
}

/// Draws from a map's invariant measure.
#[derive(Debug, Clone, PartialEq)]
pub enum InvariantSampler {
    Uniform,
    /// Gauss measure by inversion of `log2(1 + x)`.
    Gauss,
    /// Piecewise-uniform density on equal bins.
    Histogram { cdf: Vec<f64> },
}

impl InvariantSampler {
    pub fn for_map(map: &IntervalMap) -> Result<Self, DynamicsError> {
        match map.kind() {
            MapKind::Gauss => Ok(InvariantSampler::Gauss),
            _ if map.preserves_lebesgue() => Ok(InvariantSampler::Uniform),
            _ => Err(DynamicsError::NoSampler),
        }
    }

    /// Sampler for an estimated stationary vector over equal bins.
    pub fn from_histogram(weights: &[f64]) -> Result<Self, DynamicsError> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || !(total > 0.0) {
            return Err(DynamicsError::InvalidInput("histogram weights must be non-negative with positive sum".into()));
        }
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(InvariantSampler::Histogram { cdf })
    }

    /// Inverse CDF at `u in [0, 1]`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        match self {
            InvariantSampler::Uniform => u,
            InvariantSampler::Gauss => u.exp2() - 1.0,
            InvariantSampler::Histogram { cdf } => {
                let k = cdf.len();
                let i = cdf.partition_point(|&c| c < u).min(k - 1);
                let lo = if i == 0 { 0.0 } else { cdf[i - 1] };
                let w = cdf[i] - lo;
                let frac = if w > 0.0 { ((u - lo) / w).clamp(0.0, 1.0) } else { 0.5 };
                (i as f64 + frac) / k as f64
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(rng.random::<f64>())
    }
}

/// One draw from the invariant measure of `map`.
pub fn sample_point<R: Rng + ?Sized>(map: &IntervalMap, rng: &mut R) -> Result<f64, DynamicsError> {
    Ok(InvariantSampler::for_map(map)?.sample(rng))
}

/// Default bit budget for `n` digits.
pub fn default_bit_budget(n: usize) -> u64 {
    (8.0 * BITS_PER_DIGIT * n as f64) as u64 + (1 << 16)
}

/// First `n` digits of a Lebesgue-random point.
pub fn cf_digit_stream(seed: u64, stream: u64, n: usize) -> Result<Vec<u64>, DynamicsError> {
    cf_digits(BitStream::random(seed, stream), n, default_bit_budget(n))
}

const LOOKAHEAD: usize = 48;

/// Binary expansion of a float: exact, since floats are dyadic.
fn float_bits(x: f64) -> Result<BitStream, DynamicsError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(DynamicsError::OutOfDomain(x));
    }
    if x == 1.0 {
        return Ok(BitStream::from_bits(&[true; 1200]));
    }
    let mut bits = Vec::new();
    let mut r = x;
    while r > 0.0 {
        r *= 2.0;
        bits.push(r >= 1.0);
        if r >= 1.0 {
            r -= 1.0;
        }
    }
    Ok(BitStream::from_bits(&bits))
}

#[derive(Debug, Clone)]
enum Orbit {
    Float { map: IntervalMap, x: Option<f64> },
    Bits(BitStream),
    Digits { digits: Vec<u64>, k: usize },
}

/// `x, Tx, T^2 x, ...` for a fixed number of steps. Float and terminating
/// exact orbits that reach a point where the map is undefined end early.
#[derive(Debug, Clone)]
pub struct OrbitStream {
    orbit: Orbit,
    remaining: usize,
}

impl OrbitStream {
    pub fn new(map: &IntervalMap, start: OrbitStart, n: usize, mode: OrbitMode) -> Result<Self, DynamicsError> {
        mode.check(map)?;
        let orbit = match mode {
            OrbitMode::DoubleFloat => {
                let x0 = match start {
                    OrbitStart::Point(x) => {
                        map.step(x)?;
                        x
                    }
                    OrbitStart::Seed { seed, stream } => {
                        let mut rng = ChaCha12Rng::seed_from_u64(seed);
                        rng.set_stream(stream);
                        sample_point(map, &mut rng)?
                    }
                };
                Orbit::Float { map: map.clone(), x: Some(x0) }
            }
            OrbitMode::ExactBits => Orbit::Bits(bit_source(start)?),
            OrbitMode::ExactCf => {
                let digits = cf_digits(bit_source(start)?, n + LOOKAHEAD, default_bit_budget(n + LOOKAHEAD))?;
                Orbit::Digits { digits, k: 0 }
            }
        };
        Ok(OrbitStream { orbit, remaining: n })
    }
}

fn bit_source(start: OrbitStart) -> Result<BitStream, DynamicsError> {
    match start {
        OrbitStart::Point(x) => float_bits(x),
        OrbitStart::Seed { seed, stream } => Ok(BitStream::random(seed, stream)),
    }
}

/// `[0; a_1, a_2, ...]` evaluated from the back.
fn cf_value(digits: &[u64]) -> f64 {
    digits.iter().rev().fold(0.0, |x, &a| 1.0 / (a as f64 + x))
}

impl Iterator for OrbitStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        let x = match &mut self.orbit {
            Orbit::Float { map, x } => {
                let cur = (*x)?;
                *x = map.step(cur).ok();
                cur
            }
            Orbit::Bits(bits) => {
                let v = bits.value();
                bits.advance();
                v
            }
            Orbit::Digits { digits, k } => {
                if *k > digits.len() {
                    return None;
                }
                let v = cf_value(&digits[*k..digits.len().min(*k + LOOKAHEAD)]);
                *k += 1;
                v
            }
        };
        self.remaining -= 1;
        Some(x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, Some(self.remaining))
    }
}

/// `orbitStream` from the operation list: `n` points of the orbit.
pub fn orbit_stream(map: &IntervalMap, start: OrbitStart, n: usize, mode: OrbitMode) -> Result<OrbitStream, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::InvalidInput("orbit length must be at least 1".into()));
    }
    OrbitStream::new(map, start, n, mode)
}

#[derive(Debug, Clone)]
enum Values {
    Digits(std::vec::IntoIter<u64>),
    Pareto { bits: BitStream, exponent: f64 },
    Orbit { orbit: OrbitStream, observable: Observable },
}

/// The process `chi(T^(k-1) x)`, k = 1..n.
#[derive(Debug, Clone)]
pub struct ValueStream(Values);

impl ValueStream {
    pub fn new(
        map: &IntervalMap,
        observable: &Observable,
        start: OrbitStart,
        n: usize,
        mode: OrbitMode,
    ) -> Result<Self, DynamicsError> {
        observable.validate()?;
        mode.check(map)?;
        let values = match (mode, observable) {
            // the digit process itself, without reconstructing the orbit
            (OrbitMode::ExactCf, Observable::FloorReciprocal) => {
                let digits = cf_digits(bit_source(start)?, n, default_bit_budget(n))?;
                Values::Digits(digits.into_iter())
            }
            (OrbitMode::ExactBits, Observable::Pareto { alpha }) => {
                Values::Pareto { bits: bit_source(start)?, exponent: 1.0 / alpha }
            }
            _ => Values::Orbit { orbit: orbit_stream(map, start, n, mode)?, observable: observable.clone() },
        };
        Ok(ValueStream(values))
    }
}

impl Iterator for ValueStream {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        match &mut self.0 {
            Values::Digits(d) => d.next().map(|a| a as f64),
            Values::Pareto { bits, exponent } => {
                let x = bits.value();
                bits.advance();
                Some(pareto_eval(x, *exponent))
            }
            Values::Orbit { orbit, observable } => orbit.next().map(|x| observable.eval(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_examples() {
        let d = IntervalMap::doubling();
        let g = IntervalMap::gauss();
        let bits = BitStream::from_bit_str("101").unwrap();
        let mut s = OrbitStream { orbit: Orbit::Bits(bits), remaining: 3 };
        let v: Vec<f64> = s.by_ref().collect();
        assert_eq!(v, vec![0.625, 0.25, 0.5]);
        let v: Vec<f64> = orbit_stream(&d, OrbitStart::Point(0.625), 3, OrbitMode::ExactBits).unwrap().collect();
        assert_eq!(v, vec![0.625, 0.25, 0.5]);
        let v: Vec<f64> = orbit_stream(&g, OrbitStart::Point(0.3), 1, OrbitMode::DoubleFloat).unwrap().collect();
        assert_eq!(v, vec![0.3]);
        let v: Vec<f64> = orbit_stream(&g, OrbitStart::Point(0.4), 2, OrbitMode::DoubleFloat).unwrap().collect();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], 0.4);
        assert!((v[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn incompatible_modes() {
        let d = IntervalMap::doubling();
        let g = IntervalMap::gauss();
        assert!(matches!(
            orbit_stream(&g, OrbitStart::Point(0.3), 5, OrbitMode::ExactBits),
            Err(DynamicsError::IncompatibleMode { .. })
        ));
        assert!(orbit_stream(&d, OrbitStart::Point(0.3), 5, OrbitMode::ExactCf).is_err());
        assert!(orbit_stream(&d, OrbitStart::Point(0.3), 0, OrbitMode::ExactBits).is_err());
    }

    #[test]
    fn exact_cf_orbit_is_gauss_orbit() {
        let g = IntervalMap::gauss();
        let xs: Vec<f64> = orbit_stream(&g, OrbitStart::Seed { seed: 7, stream: 0 }, 200, OrbitMode::ExactCf).unwrap().collect();
        assert_eq!(xs.len(), 200);
        for w in xs.windows(2) {
            // one float step from an exact point is accurate to ~ 1/x^2 ulps
            let t = g.step(w[0]).unwrap();
            assert!((t - w[1]).abs() <= 1e-12 / (w[0] * w[0]), "{w:?}");
        }
        let digits = cf_digit_stream(7, 0, 200).unwrap();
        for (x, a) in xs.iter().zip(&digits) {
            assert_eq!((1.0 / x).floor() as u64, *a);
        }
    }

    #[test]
    fn rational_start_ends_at_zero() {
        let g = IntervalMap::gauss();
        let xs: Vec<f64> = orbit_stream(&g, OrbitStart::Point(0.375), 10, OrbitMode::ExactCf).unwrap().collect();
        assert_eq!(xs.len(), 4);
        assert_eq!(xs[3], 0.0);
        assert!((xs[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_streams() {
        let d = IntervalMap::doubling();
        let obs = Observable::pareto(0.5).unwrap();
        let a: Vec<f64> = ValueStream::new(&d, &obs, OrbitStart::Seed { seed: 3, stream: 9 }, 1000, OrbitMode::ExactBits)
            .unwrap()
            .take(1000)
            .collect();
        let b: Vec<f64> = ValueStream::new(&d, &obs, OrbitStart::Seed { seed: 3, stream: 9 }, 1000, OrbitMode::ExactBits)
            .unwrap()
            .take(1000)
            .collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| *v >= 1.0));
    }

    #[test]
    fn sampler_examples() {
        let g = InvariantSampler::Gauss;
        assert!((g.from_uniform(0.5) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(g.from_uniform(0.0), 0.0);
        assert_eq!(InvariantSampler::Uniform.from_uniform(0.3), 0.3);
        let h = InvariantSampler::from_histogram(&[1.0, 3.0]).unwrap();
        assert_eq!(h.from_uniform(0.25), 0.5);
        assert_eq!(h.from_uniform(0.625), 0.75);
        let tent_like = IntervalMap::piecewise_affine(vec![
            super::super::AffineBranch { lo: 0.0, hi: 0.5, slope: 1.5, intercept: 0.0 },
            super::super::AffineBranch { lo: 0.5, hi: 1.0, slope: 1.5, intercept: 0.25 },
        ])
        .unwrap();
        assert!(matches!(InvariantSampler::for_map(&tent_like), Err(DynamicsError::NoSampler)));
    }
}
