//! Trimmed, truncated and exceedance-count sums, batch and streaming.

use crate::summation::ExactSum;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrimmingError {
    #[error("cannot trim {b} of {n} values")]
    TrimExceedsLength { b: usize, n: usize },
    #[error("invalid checkpoint grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn check_values(values: &[f64]) -> Result<(), TrimmingError> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(TrimmingError::InvalidInput("NaN value".into()));
    }
    Ok(())
}

/// Sum of all values except the `b` largest.
pub fn trimmed_sum(values: &[f64], b: usize) -> Result<f64, TrimmingError> {
    let n = values.len();
    if b > n {
        return Err(TrimmingError::TrimExceedsLength { b, n });
    }
    check_values(values)?;
    if b == 0 {
        return Ok(values.iter().copied().collect::<ExactSum>().value());
    }
    let mut v = values.to_vec();
    if b < n {
        v.select_nth_unstable_by(n - b, f64::total_cmp);
    }
    Ok(v[..n - b].iter().copied().collect::<ExactSum>().value())
}

/// Sum of the values `<= level`.
pub fn truncated_sum(values: &[f64], level: f64) -> f64 {
    values.iter().copied().filter(|&v| v <= level).collect::<ExactSum>().value()
}

/// Number of values `> level`.
pub fn exceedance_count(values: &[f64], level: f64) -> usize {
    values.iter().filter(|&&v| v > level).count()
}

/// Strictly increasing sample sizes at which a stream is inspected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct CheckpointGrid(Vec<usize>);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum GridSpec {
    Explicit { checkpoints: Vec<usize> },
    Geometric { start: usize, ratio: f64, max: usize },
}

impl TryFrom<GridSpec> for CheckpointGrid {
    type Error = TrimmingError;
    fn try_from(s: GridSpec) -> Result<Self, TrimmingError> {
        match s {
            GridSpec::Explicit { checkpoints } => CheckpointGrid::new(checkpoints),
            GridSpec::Geometric { start, ratio, max } => CheckpointGrid::geometric(start, ratio, max),
        }
    }
}

impl From<CheckpointGrid> for GridSpec {
    fn from(g: CheckpointGrid) -> Self {
        GridSpec::Explicit { checkpoints: g.0 }
    }
}

impl CheckpointGrid {
    pub fn new(checkpoints: Vec<usize>) -> Result<Self, TrimmingError> {
        if checkpoints.is_empty() || checkpoints[0] == 0 {
            return Err(TrimmingError::InvalidGrid("checkpoints must be non-empty and start at 1 or more".into()));
        }
        if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TrimmingError::InvalidGrid("checkpoints must increase strictly".into()));
        }
        Ok(CheckpointGrid(checkpoints))
    }

    /// `n_{j+1} = ceil(ratio n_j)`, ending with `max`.
    pub fn geometric(start: usize, ratio: f64, max: usize) -> Result<Self, TrimmingError> {
        if start == 0 || start > max || !(ratio > 1.0 && ratio.is_finite()) {
            return Err(TrimmingError::InvalidGrid(format!(
                "geometric grid needs 1 <= start <= max and ratio > 1 (start {start}, ratio {ratio}, max {max})"
            )));
        }
        let mut v = vec![start];
        loop {
            let last = *v.last().unwrap();
            if last >= max {
                break;
            }
            let next = ((last as f64 * ratio).ceil() as usize).max(last + 1);
            v.push(next.min(max));
        }
        Ok(CheckpointGrid(v))
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The `K` largest values of a stream with its exact running total.
#[derive(Debug, Clone)]
pub struct TopKTracker {
    capacity: usize,
    heap: BinaryHeap<Reverse<Ordered>>,
    total: ExactSum,
    count: usize,
}

impl TopKTracker {
    pub fn new(capacity: usize) -> Self {
        TopKTracker { capacity, heap: BinaryHeap::with_capacity(capacity + 1), total: ExactSum::new(), count: 0 }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.total.add(v);
        self.count += 1;
        if self.heap.len() < self.capacity {
            self.heap.push(Reverse(Ordered(v)));
        } else if let Some(mut min) = self.heap.peek_mut() {
            if v > min.0 .0 {
                *min = Reverse(Ordered(v));
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn total(&self) -> f64 {
        self.total.value()
    }

    /// Smallest tracked value.
    pub fn minimum(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0 .0)
    }

    /// Whether every value seen so far is still held.
    pub fn holds_all(&self) -> bool {
        self.count <= self.capacity
    }

    /// Tracked values, largest first.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.heap.iter().map(|r| r.0 .0).collect();
        v.sort_unstable_by(|a, b| b.total_cmp(a));
        v
    }

    /// Running total minus the `b` largest values, if they are tracked.
    pub fn trimmed(&self, b: usize) -> Option<f64> {
        if b > self.heap.len() {
            return None;
        }
        let top = self.sorted_desc();
        let mut s = self.total.clone();
        top[..b].iter().for_each(|&v| s.sub(v));
        Some(s.value())
    }

    /// `(truncated sum, exceedance count)` at `level`, if every value above
    /// `level` is tracked.
    pub fn truncated(&self, level: f64) -> Option<(f64, usize)> {
        if !self.holds_all() && self.minimum().is_some_and(|m| level < m) {
            return None;
        }
        let mut s = self.total.clone();
        let mut count = 0;
        for r in self.heap.iter().filter(|r| r.0 .0 > level) {
            s.sub(r.0 .0);
            count += 1;
        }
        Some((s.value(), count))
    }
}

/// Capacity `K` leaving `4 sqrt(K)` slack above `b`.
pub fn default_capacity(max_b: usize) -> usize {
    let r = 2.0 + (4.0 + max_b as f64).sqrt();
    ((r * r).ceil() as usize).max(max_b + 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFlag {
    Ok,
    CapacityInsufficient,
    /// The value stream ended before this checkpoint.
    StreamEnded,
}

impl std::fmt::Display for RecordFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RecordFlag::Ok => "ok",
            RecordFlag::CapacityInsufficient => "capacity-insufficient",
            RecordFlag::StreamEnded => "stream-ended",
        })
    }
}

/// Sums at one checkpoint. Fields a short tracker could not provide are
/// NaN (sums) or zero (count), with the flag set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub n: usize,
    pub sum: f64,
    pub trimmed: f64,
    pub truncated: f64,
    pub exceedances: usize,
    pub b: usize,
    pub f: f64,
    pub flag: RecordFlag,
}

/// Single pass over `values` recording trimmed, truncated and exceedance
/// quantities at every checkpoint. `b[j]` and `f[j]` belong to checkpoint
/// `j`. A stream that ends early yields records up to its length.
pub fn streaming_profile<I>(
    values: I,
    grid: &CheckpointGrid,
    b: &[usize],
    f: &[f64],
    capacity: usize,
) -> Result<Vec<CheckpointRecord>, TrimmingError>
where
    I: IntoIterator<Item = f64>,
{
    let cps = grid.checkpoints();
    if b.len() != cps.len() || f.len() != cps.len() {
        return Err(TrimmingError::InvalidInput(format!(
            "plan has {} trims and {} levels for {} checkpoints",
            b.len(),
            f.len(),
            cps.len()
        )));
    }
    if let Some((j, _)) = b.iter().zip(cps).enumerate().find(|(_, (b, n))| b > n) {
        return Err(TrimmingError::TrimExceedsLength { b: b[j], n: cps[j] });
    }
    let mut tracker = TopKTracker::new(capacity);
    let mut out = Vec::with_capacity(cps.len());
    let mut it = values.into_iter();
    for (j, &n) in cps.iter().enumerate() {
        while tracker.count() < n {
            match it.next() {
                Some(v) => tracker.push(v),
                None => return Ok(out),
            }
        }
        out.push(record(&tracker, b[j], f[j]));
    }
    Ok(out)
}

fn record(t: &TopKTracker, b: usize, f: f64) -> CheckpointRecord {
    let trimmed = t.trimmed(b);
    let truncated = t.truncated(f);
    let ok = trimmed.is_some() && truncated.is_some();
    let (truncated, exceedances) = truncated.unwrap_or((f64::NAN, 0));
    CheckpointRecord {
        n: t.count(),
        sum: t.total(),
        trimmed: trimmed.unwrap_or(f64::NAN),
        truncated,
        exceedances,
        b,
        f,
        flag: if ok { RecordFlag::Ok } else { RecordFlag::CapacityInsufficient },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const V: [f64; 5] = [3.0, 1.0, 4.0, 1.0, 5.0];

    fn sorted_oracle(values: &[f64], b: usize) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v[b..].iter().copied().collect::<ExactSum>().value()
    }

    #[test]
    fn batch_examples() {
        assert_eq!(trimmed_sum(&V, 2).unwrap(), 5.0);
        assert_eq!(trimmed_sum(&V, 0).unwrap(), 14.0);
        assert_eq!(trimmed_sum(&V, 5).unwrap(), 0.0);
        assert_eq!(trimmed_sum(&V, 6), Err(TrimmingError::TrimExceedsLength { b: 6, n: 5 }));
        assert_eq!(truncated_sum(&V, 3.0), 5.0);
        assert_eq!(truncated_sum(&V, 0.0), 0.0);
        assert_eq!(truncated_sum(&V, 10.0), 14.0);
        assert_eq!(exceedance_count(&V, 2.0), 3);
        assert_eq!(exceedance_count(&V, 5.0), 0);
        assert_eq!(exceedance_count(&[], 1.0), 0);
    }

    #[test]
    fn streaming_examples() {
        let grid = CheckpointGrid::new(vec![3, 5]).unwrap();
        let r = streaming_profile(V, &grid, &[1, 2], &[3.0, 4.0], 8).unwrap();
        assert_eq!((r[0].n, r[0].sum, r[0].trimmed, r[0].truncated, r[0].exceedances), (3, 8.0, 4.0, 4.0, 1));
        assert_eq!((r[1].n, r[1].sum, r[1].trimmed, r[1].truncated, r[1].exceedances), (5, 14.0, 5.0, 9.0, 1));
        let ones = std::iter::repeat_n(1.0, 100);
        let grid = CheckpointGrid::geometric(1, 2.0, 100).unwrap();
        let k = grid.len();
        let r = streaming_profile(ones, &grid, &vec![0; k], &vec![1.0; k], 4).unwrap();
        for rec in &r {
            assert_eq!(rec.truncated, rec.n as f64);
            assert_eq!(rec.exceedances, 0);
            assert_eq!(rec.trimmed, rec.sum);
            assert_eq!(rec.flag, RecordFlag::Ok);
        }
    }

    #[test]
    fn capacity_shortfall_is_flagged() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let grid = CheckpointGrid::new(vec![50, 100]).unwrap();
        let r = streaming_profile(values.iter().copied(), &grid, &[2, 2], &[10.0, 95.0], 8).unwrap();
        assert_eq!(r[0].flag, RecordFlag::CapacityInsufficient);
        assert!(r[0].truncated.is_nan());
        assert_eq!(r[1].flag, RecordFlag::Ok);
        assert_eq!(r[1].truncated, truncated_sum(&values, 95.0));
        assert_eq!(r[1].trimmed, trimmed_sum(&values, 2).unwrap());
    }

    #[test]
    fn grids() {
        assert_eq!(CheckpointGrid::geometric(10, 1.5, 40).unwrap().checkpoints(), &[10, 15, 23, 35, 40]);
        assert!(CheckpointGrid::new(vec![3, 3]).is_err());
        assert!(CheckpointGrid::new(vec![0, 3]).is_err());
        let g: CheckpointGrid = serde_json::from_str(r#"{"start":1,"ratio":10,"max":1000}"#).unwrap();
        assert_eq!(g.checkpoints(), &[1, 10, 100, 1000]);
    }

    #[test]
    fn capacity_rule() {
        for b in [0usize, 1, 10, 260, 5000] {
            let k = default_capacity(b) as f64;
            assert!(k >= b as f64 + 4.0 * k.sqrt() - 1e-9);
        }
    }

    // 1000 random arrays against the full sort
    #[test]
    fn selection_matches_sort() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for case in 0..1000 {
            let n = rng.random_range(1..=10_000usize.min(50 + case * 10));
            let pareto = case % 2 == 0;
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    if pareto { (1.0 - u).powf(-2.0) } else { u }
                })
                .collect();
            let b = rng.random_range(0..=n);
            assert_eq!(trimmed_sum(&v, b).unwrap(), sorted_oracle(&v, b));
        }
    }

    proptest! {
        #[test]
        fn monotone_in_parameters(v in prop::collection::vec(0.0f64..1e6, 1..200), b in 0usize..200, l in 0.0f64..1e6) {
            let b = b.min(v.len() - 1);
            prop_assert!(trimmed_sum(&v, b + 1).unwrap() <= trimmed_sum(&v, b).unwrap());
            prop_assert!(truncated_sum(&v, l) <= truncated_sum(&v, l * 1.5 + 1.0));
            prop_assert!(exceedance_count(&v, l) >= exceedance_count(&v, l * 1.5 + 1.0));
        }

        #[test]
        fn sandwich_identity(v in prop::collection::vec(0.0f64..1e3, 1..200), l in 0.0f64..1e3) {
            let k = exceedance_count(&v, l);
            prop_assert_eq!(trimmed_sum(&v, k).unwrap(), truncated_sum(&v, l));
        }

        #[test]
        fn streaming_matches_batch(v in prop::collection::vec(1.0f64..1e4, 10..2000), seed in 0u64..1000) {
            let grid = CheckpointGrid::geometric(1, 1.7, v.len()).unwrap();
            let b: Vec<usize> = grid.checkpoints().iter().map(|&n| ((seed as usize) % 7).min(n)).collect();
            let f: Vec<f64> = grid.checkpoints().iter().map(|&n| 1e4 / (1.0 + n as f64).sqrt()).collect();
            let r = streaming_profile(v.iter().copied(), &grid, &b, &f, v.len()).unwrap();
            for rec in &r {
                let prefix = &v[..rec.n];
                prop_assert_eq!(rec.sum, trimmed_sum(prefix, 0).unwrap());
                prop_assert_eq!(rec.trimmed, trimmed_sum(prefix, rec.b).unwrap());
                prop_assert_eq!(rec.truncated, truncated_sum(prefix, rec.f));
                prop_assert_eq!(rec.exceedances, exceedance_count(prefix, rec.f));
            }
        }
    }
}
