//! Exact continued-fraction digits of a point given by its binary expansion.
//!
//! Two extraction routes produce identical digits:
//!
//! * [`HomographicDigits`] keeps `x = (p y + q) / (r y + s)` over the unread
//!   bits `y` and emits `a = floor(1/x)` once the interval image decides it.
//!   The coefficients grow with the number of bits read, so the cost per
//!   digit grows with the stream length.
//! * [`cf_digits`] reads a block of `N` bits and runs Lehmer's Euclidean
//!   algorithm on both endpoints of the dyadic interval `[m, m+1) / 2^N`;
//!   the digits shared by both endpoints are the digits of every point in
//!   the interval.

use super::bits::BitStream;
use super::DynamicsError;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Average number of input bits consumed per digit of a Lebesgue-random
/// point, `pi^2 / (6 ln^2 2)`.
pub const BITS_PER_DIGIT: f64 = 3.423_714_2;

/// Lazy digit extractor over an unbounded bit stream.
#[derive(Debug, Clone)]
pub struct HomographicDigits {
    bits: BitStream,
    p: BigInt,
    q: BigInt,
    r: BigInt,
    s: BigInt,
    bit_budget: u64,
    since_digit: u64,
}

impl HomographicDigits {
    /// `bit_budget` bounds the bits read between two digits.
    pub fn new(bits: BitStream, bit_budget: u64) -> Self {
        HomographicDigits {
            bits,
            p: BigInt::one(),
            q: BigInt::zero(),
            r: BigInt::zero(),
            s: BigInt::one(),
            bit_budget,
            since_digit: 0,
        }
    }

    /// Digit fixed by the whole interval `y in (0, 1)`, if any.
    fn decided_digit(&self) -> Option<BigInt> {
        // 1/x at y = 0 is s/q, at y = 1 it is (r+s)/(p+q)
        let (n0, d0) = normalize(self.s.clone(), self.q.clone())?;
        let (n1, d1) = normalize(&self.r + &self.s, &self.p + &self.q)?;
        let ((lo_n, lo_d), (hi_n, hi_d)) = if &n0 * &d1 <= &n1 * &d0 {
            ((n0, d0), (n1, d1))
        } else {
            ((n1, d1), (n0, d0))
        };
        let a = lo_n.div_floor(&lo_d);
        if hi_n <= (&a + 1u32) * &hi_d {
            Some(a)
        } else {
            None
        }
    }

    fn emit(&mut self, a: &BigInt) {
        let p = std::mem::take(&mut self.p);
        let q = std::mem::take(&mut self.q);
        self.p = &self.r - a * &p;
        self.q = &self.s - a * &q;
        self.r = p;
        self.s = q;
        let g = self.p.gcd(&self.q).gcd(&self.r).gcd(&self.s);
        if !g.is_one() && !g.is_zero() {
            self.p /= &g;
            self.q /= &g;
            self.r /= &g;
            self.s /= &g;
        }
        self.since_digit = 0;
    }
}

fn normalize(num: BigInt, den: BigInt) -> Option<(BigInt, BigInt)> {
    if den.is_zero() {
        return None;
    }
    if den.is_negative() {
        Some((-num, -den))
    } else {
        Some((num, den))
    }
}

impl Iterator for HomographicDigits {
    type Item = Result<u64, DynamicsError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(a) = self.decided_digit() {
                self.emit(&a);
                return Some(a.to_u64().ok_or(DynamicsError::DigitOverflow));
            }
            if self.since_digit >= self.bit_budget {
                return Some(Err(DynamicsError::NonTerminating { bits: self.since_digit }));
            }
            let Some(bit) = self.bits.next_bit() else {
                return Some(Err(DynamicsError::InvalidInput(
                    "homographic extraction needs an unbounded bit stream".into(),
                )));
            };
            // y = (bit + y') / 2
            self.q <<= 1;
            self.s <<= 1;
            if bit {
                self.q += &self.p;
                self.s += &self.r;
            }
            self.since_digit += 1;
        }
    }
}

/// First `n` digits of the point whose expansion `bits` produces.
///
/// A terminating expansion is the dyadic rational it spells, whose
/// (finite) expansion may have fewer than `n` digits. Unbounded streams
/// read blocks of growing size until `n` digits are decided or
/// `bit_budget` bits have been read.
pub fn cf_digits(mut bits: BitStream, n: usize, bit_budget: u64) -> Result<Vec<u64>, DynamicsError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some(len) = bits.remaining() {
        let words = read_words(&mut bits, len.div_ceil(64) as usize);
        // m / 2^(64 w): trailing zero padding cancels in the Euclid quotients
        let m = to_limbs(&words);
        let den = power_of_two(64 * words.len() as u64);
        return rational_digits(den, m, n);
    }
    let mut nbits = (BITS_PER_DIGIT * n as f64 + 40.0 * (n as f64).sqrt() + 256.0) as u64;
    let mut words: Vec<u64> = Vec::new();
    loop {
        nbits = nbits.min(bit_budget.max(64));
        let want = nbits.div_ceil(64) as usize;
        if want > words.len() {
            let more = read_words(&mut bits, want - words.len());
            words.extend(more);
        }
        let m = to_limbs(&words);
        let den = power_of_two(64 * words.len() as u64);
        let mut m1 = m.clone();
        add_one(&mut m1);
        let lo = rational_digits(den.clone(), m, n + 1)?;
        let hi = rational_digits(den, m1, n + 1)?;
        // drop the last digit of either expansion: endpoints are rationals
        let shared = lo
            .iter()
            .zip(&hi)
            .take(lo.len().min(hi.len()).saturating_sub(1))
            .take_while(|(a, b)| a == b)
            .count();
        if shared >= n {
            let mut d = lo;
            d.truncate(n);
            return Ok(d);
        }
        if nbits >= bit_budget {
            return Err(DynamicsError::NonTerminating { bits: nbits });
        }
        nbits = nbits + nbits / 8 + 256;
    }
}

fn read_words(bits: &mut BitStream, count: usize) -> Vec<u64> {
    (0..count).map(|_| bits.next_word()).collect()
}

/// Big-endian words to little-endian normalized limbs.
fn to_limbs(words: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = words.iter().rev().copied().collect();
    trim(&mut v);
    v
}

fn power_of_two(k: u64) -> Vec<u64> {
    let mut v = vec![0u64; (k / 64) as usize + 1];
    v[(k / 64) as usize] = 1 << (k % 64);
    v
}

fn add_one(v: &mut Vec<u64>) {
    for limb in v.iter_mut() {
        let (s, c) = limb.overflowing_add(1);
        *limb = s;
        if !c {
            return;
        }
    }
    v.push(1);
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn bit_len(v: &[u64]) -> u64 {
    match v.last() {
        None => 0,
        Some(&top) => 64 * (v.len() as u64 - 1) + (64 - top.leading_zeros() as u64),
    }
}

/// Bits `[shift, shift + 128)` of `v`.
fn extract(v: &[u64], shift: u64) -> u128 {
    let i = (shift / 64) as usize;
    let sh = (shift % 64) as u32;
    let get = |j: usize| v.get(j).copied().unwrap_or(0) as u128;
    let mut w = get(i) | get(i + 1) << 64;
    if sh > 0 {
        w = (w >> sh) | (get(i + 2) << (128 - sh));
    }
    w
}

/// `out = u x - v y`, which must be non-negative.
fn mul_sub(out: &mut Vec<u64>, x: &[u64], u: u64, y: &[u64], v: u64) {
    out.clear();
    let len = x.len().max(y.len());
    let (mut cp, mut cn) = (0u128, 0u128);
    let mut borrow = 0u64;
    for i in 0..len {
        let xi = x.get(i).copied().unwrap_or(0);
        let yi = y.get(i).copied().unwrap_or(0);
        let p = u as u128 * xi as u128 + cp;
        let n = v as u128 * yi as u128 + cn;
        cp = p >> 64;
        cn = n >> 64;
        let (d1, b1) = (p as u64).overflowing_sub(n as u64);
        let (d2, b2) = d1.overflowing_sub(borrow);
        borrow = (b1 | b2) as u64;
        out.push(d2);
    }
    let tail = cp as i128 - cn as i128 - borrow as i128;
    debug_assert!((0..1 << 64).contains(&tail), "negative linear combination");
    if tail > 0 {
        out.push(tail as u64);
    }
    trim(out);
}

fn to_biguint(v: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(2 * v.len());
    for &w in v {
        digits.push(w as u32);
        digits.push((w >> 32) as u32);
    }
    BigUint::new(digits)
}

fn from_biguint(b: &BigUint) -> Vec<u64> {
    let mut v = b.to_u64_digits();
    trim(&mut v);
    v
}

const COFACTOR_LIMIT: i128 = 1 << 62;

/// Euclid quotients of `a / b` (the continued fraction of `b / a` after
/// the leading zero), stopping after `max` quotients.
fn rational_digits(mut a: Vec<u64>, mut b: Vec<u64>, max: usize) -> Result<Vec<u64>, DynamicsError> {
    trim(&mut a);
    trim(&mut b);
    let mut out = Vec::with_capacity(max.min(1 << 24));
    let mut na = Vec::with_capacity(a.len());
    let mut nb = Vec::with_capacity(a.len());
    while !b.is_empty() && out.len() < max {
        if bit_len(&b) > bit_len(&a) {
            out.push(0);
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        if a.len() <= 2 {
            let mut x = a.first().copied().unwrap_or(0) as u128 | (a.get(1).copied().unwrap_or(0) as u128) << 64;
            let mut y = b.first().copied().unwrap_or(0) as u128 | (b.get(1).copied().unwrap_or(0) as u128) << 64;
            while y != 0 && out.len() < max {
                let q = x / y;
                out.push(u64::try_from(q).map_err(|_| DynamicsError::DigitOverflow)?);
                (x, y) = (y, x - q * y);
            }
            return Ok(out);
        }
        let shift = bit_len(&a).saturating_sub(124);
        let mut x = extract(&a, shift) as i128;
        let mut y = extract(&b, shift) as i128;
        let (mut ca, mut cb, mut cc, mut cd) = (1i128, 0i128, 0i128, 1i128);
        let start = out.len();
        while out.len() < max {
            if y + cc <= 0 || y + cd <= 0 {
                break;
            }
            let q = (x + ca) / (y + cc);
            if q != (x + cb) / (y + cd) || q > u64::MAX as i128 {
                break;
            }
            let nc = ca - q * cc;
            let nd = cb - q * cd;
            if nc.abs() >= COFACTOR_LIMIT || nd.abs() >= COFACTOR_LIMIT {
                break;
            }
            out.push(q as u64);
            (ca, cb, cc, cd) = (cc, cd, nc, nd);
            (x, y) = (y, x - q * y);
        }
        if out.len() == start {
            // leading bits cannot decide the quotient: one full division
            let (q, r) = to_biguint(&a).div_rem(&to_biguint(&b));
            out.push(q.to_u64().ok_or(DynamicsError::DigitOverflow)?);
            a = std::mem::take(&mut b);
            b = from_biguint(&r);
            continue;
        }
        lin_comb(&mut na, &a, &b, ca, cb);
        lin_comb(&mut nb, &a, &b, cc, cd);
        std::mem::swap(&mut a, &mut na);
        std::mem::swap(&mut b, &mut nb);
    }
    Ok(out)
}

/// `out = s a + t b` for cofactors of opposite sign (or one zero).
fn lin_comb(out: &mut Vec<u64>, a: &[u64], b: &[u64], s: i128, t: i128) {
    if s >= 0 && t <= 0 {
        mul_sub(out, a, s as u64, b, (-t) as u64);
    } else {
        mul_sub(out, b, t as u64, a, (-s) as u64);
    }
}

/// Digits of an exact rational `num / den` in `(0, 1]`, for tests and
/// deterministic inputs.
pub fn rational_cf(num: u64, den: u64) -> Vec<u64> {
    rational_digits(vec![den], vec![num], usize::MAX).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_rationals() {
        let d = cf_digits(BitStream::from_bit_str("011").unwrap(), 3, 1 << 20).unwrap();
        assert_eq!(d, vec![2, 1, 2]);
        let d = cf_digits(BitStream::from_bit_str("1").unwrap(), 5, 1 << 20).unwrap();
        assert_eq!(d, vec![2]);
        assert!(cf_digits(BitStream::random(1, 0), 0, 1 << 20).unwrap().is_empty());
        assert_eq!(rational_cf(3, 8), vec![2, 1, 2]);
    }

    #[test]
    fn rational_oracle_agrees_with_euclid_on_big_values() {
        // (2^200 + 12345) / 3^130 vs direct BigUint Euclid
        let a = BigUint::from(3u32).pow(130);
        let b = (BigUint::one() << 200usize) + BigUint::from(12345u32);
        let mut expect = Vec::new();
        let (mut x, mut y) = (b.clone(), a.clone());
        while !y.is_zero() {
            let (q, r) = x.div_rem(&y);
            expect.push(q.to_u64().unwrap());
            x = y;
            y = r;
        }
        let got = rational_digits(from_biguint(&b), from_biguint(&a), usize::MAX).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn block_and_homographic_routes_agree() {
        for seed in 0..6 {
            let block = cf_digits(BitStream::random(seed, 0), 600, 1 << 24).unwrap();
            let lazy: Vec<u64> = HomographicDigits::new(BitStream::random(seed, 0), 1 << 16)
                .take(600)
                .collect::<Result<_, _>>()
                .unwrap();
            assert_eq!(block, lazy, "seed {seed}");
        }
    }

    #[test]
    fn prefix_stability() {
        let short = cf_digits(BitStream::random(42, 1), 100, 1 << 24).unwrap();
        let long = cf_digits(BitStream::random(42, 1), 3000, 1 << 24).unwrap();
        assert_eq!(&long[..100], &short[..]);
    }

    #[test]
    fn budget_exhaustion() {
        assert!(matches!(
            cf_digits(BitStream::random(3, 0), 10_000, 1000),
            Err(DynamicsError::NonTerminating { .. })
        ));
    }
}
