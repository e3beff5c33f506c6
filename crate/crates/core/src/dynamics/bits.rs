//! Lazily generated bit streams, read most-significant bit first.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
enum WordSource {
    Random(ChaCha12Rng),
    /// Finite prefix; reads past it yield zero bits.
    Fixed { words: Vec<u64>, next: usize, len_bits: u64 },
}

impl WordSource {
    fn next_word(&mut self) -> u64 {
        match self {
            WordSource::Random(rng) => rng.next_u64(),
            WordSource::Fixed { words, next, .. } => {
                let w = words.get(*next).copied().unwrap_or(0);
                *next += 1;
                w
            }
        }
    }
}

/// Binary expansion `0.b_1 b_2 b_3 ...` of a point in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BitStream {
    source: WordSource,
    buf: VecDeque<u64>,
    /// Offset of the current bit inside `buf[0]`.
    pos: u32,
    consumed: u64,
}

impl BitStream {
    /// Uniform random bits from `(seed, stream)`; distinct streams of the
    /// same seed are independent.
    pub fn random(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::with_source(WordSource::Random(rng))
    }

    /// A terminating expansion, e.g. `"101"` for `0.625`.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (63 - i % 64);
            }
        }
        Self::with_source(WordSource::Fixed { words, next: 0, len_bits: bits.len() as u64 })
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.map(|b| Self::from_bits(&b))
    }

    fn with_source(source: WordSource) -> Self {
        BitStream { source, buf: VecDeque::with_capacity(8), pos: 0, consumed: 0 }
    }

    /// Number of bits left in a terminating expansion, `None` if unbounded.
    pub fn remaining(&self) -> Option<u64> {
        match &self.source {
            WordSource::Random(_) => None,
            WordSource::Fixed { len_bits, .. } => Some(len_bits.saturating_sub(self.consumed)),
        }
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    fn word(&mut self, i: usize) -> u64 {
        while self.buf.len() <= i {
            let w = self.source.next_word();
            self.buf.push_back(w);
        }
        self.buf[i]
    }

    /// 64 bits starting `offset` bits after the current position.
    fn window64(&mut self, offset: u64) -> u64 {
        let abs = self.pos as u64 + offset;
        let i = (abs / 64) as usize;
        let sh = (abs % 64) as u32;
        let hi = self.word(i);
        if sh == 0 {
            hi
        } else {
            (hi << sh) | (self.word(i + 1) >> (64 - sh))
        }
    }

    /// Next bit, or `None` once a terminating expansion is exhausted.
    pub fn next_bit(&mut self) -> Option<bool> {
        if self.remaining() == Some(0) {
            return None;
        }
        let b = (self.word(0) >> (63 - self.pos)) & 1 == 1;
        self.advance();
        Some(b)
    }

    /// Next 64 bits as one word (zeros past a terminating expansion).
    pub fn next_word(&mut self) -> u64 {
        let w = self.window64(0);
        self.buf.pop_front();
        self.consumed += 64;
        w
    }

    /// Shift by one bit: `x <- 2x mod 1`.
    pub fn advance(&mut self) {
        self.pos += 1;
        self.consumed += 1;
        if self.pos == 64 {
            self.pos = 0;
            self.buf.pop_front();
        }
    }

    /// Value of the unread expansion, truncated to 53 significant bits.
    pub fn value(&mut self) -> f64 {
        let mut skipped = 0u64;
        loop {
            let hi = self.window64(skipped);
            if hi != 0 {
                let lz = hi.leading_zeros();
                let lo = self.window64(skipped + 64);
                let w = ((hi as u128) << 64 | lo as u128) << lz;
                let mant = (w >> (128 - 53)) as u64;
                let exp = -(53 + lz as i32 + skipped as i32);
                return mant as f64 * 2f64.powi(exp);
            }
            skipped += 64;
            if skipped >= 1088 {
                return 0.0;
            }
            if let Some(rem) = self.remaining() {
                if skipped >= rem {
                    return 0.0;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_prefix_shift() {
        let mut s = BitStream::from_bit_str("101").unwrap();
        assert_eq!(s.value(), 0.625);
        s.advance();
        assert_eq!(s.value(), 0.25);
        s.advance();
        assert_eq!(s.value(), 0.5);
        assert_eq!(s.next_bit(), Some(true));
        assert_eq!(s.next_bit(), None);
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn value_reads_past_leading_zero_words() {
        let mut bits = vec![false; 150];
        bits.push(true);
        let mut s = BitStream::from_bits(&bits);
        assert_eq!(s.value(), 2f64.powi(-151));
    }

    #[test]
    fn random_streams_reproducible() {
        let mut a = BitStream::random(7, 3);
        let mut b = BitStream::random(7, 3);
        let mut c = BitStream::random(7, 4);
        let va: Vec<f64> = (0..200).map(|_| { let v = a.value(); a.advance(); v }).collect();
        let vb: Vec<f64> = (0..200).map(|_| { let v = b.value(); b.advance(); v }).collect();
        let vc: Vec<f64> = (0..200).map(|_| { let v = c.value(); c.advance(); v }).collect();
        assert_eq!(va, vb);
        assert_ne!(va, vc);
        assert!(va.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn value_is_truncation_of_window() {
        let mut s = BitStream::random(1, 0);
        for _ in 0..100 {
            let w = s.window64(0);
            let v = s.value();
            let approx = w as f64 / 2f64.powi(64);
            assert!((v - approx).abs() <= 2f64.powi(-52) * approx.max(2f64.powi(-60)));
            s.advance();
        }
    }
}
