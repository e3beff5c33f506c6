use super::{ExperimentSpec, HarnessError};
use crate::dynamics::{OrbitStart, ValueStream};
use crate::regvar::DistributionFunction;
use crate::sequences::{c_function, TrimmingPlan};
use crate::trimming::{default_capacity, streaming_profile, CheckpointRecord, RecordFlag};
use rayon::prelude::*;
use serde::Serialize;

/// One (seed, checkpoint) observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResultRow {
    pub seed: usize,
    pub n: usize,
    pub sum: f64,
    pub trimmed: f64,
    pub truncated: f64,
    /// `None` when the stream ended before `n`.
    pub exceedances: Option<usize>,
    pub b: usize,
    pub f: f64,
    pub flag: RecordFlag,
    pub ratio_trim: f64,
    pub ratio_trunc: f64,
    pub dev_b: f64,
    pub allowance_b: f64,
    /// Tracker capacity that produced the row.
    pub capacity: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub plan: TrimmingPlan,
    /// `n int_0^f x dF` per checkpoint.
    pub expected_truncated: Vec<f64>,
    /// Ordered by seed, then checkpoint.
    pub rows: Vec<ResultRow>,
    /// Rows where the trimmed/truncated ordering disagrees with the
    /// exceedance count.
    pub violations: Vec<String>,
}

impl ExperimentResult {
    pub fn rows_at(&self, n: usize) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }
}

/// Runs every seed over the grid. Seeds run in parallel; rows come back in
/// (seed, checkpoint) order regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let plan = spec.plan()?;
    let law = spec.law()?;
    let grid = &spec.grid;
    let b = plan.trims();
    let f = plan.levels();
    let expected_truncated = plan
        .rows
        .iter()
        .map(|r| Ok(r.n as f64 * law.truncated_mean(r.f)?))
        .collect::<Result<Vec<f64>, HarnessError>>()?;
    let pb = &spec.property_b;
    let allowance = plan
        .rows
        .iter()
        .map(|r| Ok(pb.v * c_function(r.a.max(1.0), r.n, pb.eps, &pb.psi)?))
        .collect::<Result<Vec<f64>, HarnessError>>()?;

    let mode = spec.mode();
    let n_max = grid.max();
    let per_seed = (0..spec.seeds.count)
        .into_par_iter()
        .map(|seed| {
            let start = OrbitStart::Seed { seed: spec.seeds.base, stream: seed as u64 };
            let mut capacity = default_capacity(plan.max_trim()).min(n_max);
            loop {
                let values = ValueStream::new(&spec.map, &spec.observable, start, n_max, mode)?;
                let recs = streaming_profile(values, grid, &b, &f, capacity)?;
                let short = recs.iter().any(|r| r.flag == RecordFlag::CapacityInsufficient);
                if short && capacity < n_max {
                    capacity = (capacity * 2).min(n_max);
                    continue;
                }
                return Ok((recs, capacity));
            }
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut rows = Vec::with_capacity(spec.seeds.count * grid.len());
    let mut violations = Vec::new();
    for (seed, (recs, capacity)) in per_seed.into_iter().enumerate() {
        for (j, p) in plan.rows.iter().enumerate() {
            let row = match recs.get(j) {
                Some(r) => joined(seed, r, p.d, expected_truncated[j], p.a, allowance[j], capacity),
                None => ended(seed, p.n, p.b, p.f, allowance[j], capacity),
            };
            if let Some(msg) = sandwich_violation(&row) {
                violations.push(msg);
            }
            rows.push(row);
        }
    }
    Ok(ExperimentResult { spec: spec.clone(), plan, expected_truncated, rows, violations })
}

fn joined(seed: usize, r: &CheckpointRecord, d: f64, expected: f64, a: f64, allowance: f64, capacity: usize) -> ResultRow {
    let ok = r.flag == RecordFlag::Ok;
    ResultRow {
        seed,
        n: r.n,
        sum: r.sum,
        trimmed: r.trimmed,
        truncated: r.truncated,
        exceedances: ok.then_some(r.exceedances),
        b: r.b,
        f: r.f,
        flag: r.flag,
        ratio_trim: r.trimmed / d,
        ratio_trunc: r.truncated / expected,
        dev_b: if ok { (r.exceedances as f64 - a).abs() } else { f64::NAN },
        allowance_b: allowance,
        capacity,
    }
}

fn ended(seed: usize, n: usize, b: usize, f: f64, allowance: f64, capacity: usize) -> ResultRow {
    let nan = f64::NAN;
    ResultRow {
        seed,
        n,
        sum: nan,
        trimmed: nan,
        truncated: nan,
        exceedances: None,
        b,
        f,
        flag: RecordFlag::StreamEnded,
        ratio_trim: nan,
        ratio_trunc: nan,
        dev_b: nan,
        allowance_b: allowance,
        capacity,
    }
}

// S^b <= T^f when every exceedance was trimmed, S^b >= T^f otherwise;
// both sides are correctly rounded sums, so the comparison is exact
fn sandwich_violation(r: &ResultRow) -> Option<String> {
    let k = r.exceedances?;
    let bad = if k <= r.b { r.trimmed > r.truncated } else { r.trimmed < r.truncated };
    bad.then(|| {
        format!(
            "seed {} n {}: S_trim = {} vs T_trunc = {} with {} exceedances and b = {}",
            r.seed, r.n, r.trimmed, r.truncated, k, r.b
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// Linear-interpolation quartiles of the finite values; NaN if none.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        Quartiles { q1: quantile(&v, 0.25), median: quantile(&v, 0.5), q3: quantile(&v, 0.75) }
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
    Undetermined,
}

impl Trend {
    fn compare(early: f64, late: f64) -> Self {
        if !(early.is_finite() && late.is_finite()) {
            Trend::Undetermined
        } else if late < early {
            Trend::Decreasing
        } else if late > early {
            Trend::Increasing
        } else {
            Trend::Flat
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckpointSummary {
    pub n: usize,
    pub rows: usize,
    pub ratio_trim: Quartiles,
    pub ratio_trunc: Quartiles,
    /// Median of `|ratio_trim - ratioTarget|`.
    pub trim_error: f64,
    /// Median of `|ratio_trunc - 1|`.
    pub trunc_error: f64,
    pub exceed_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub name: String,
    pub seeds: usize,
    pub ratio_target: f64,
    pub late_window: f64,
    pub checkpoints: Vec<CheckpointSummary>,
    /// Median error over the late checkpoints against the early ones.
    pub trim_trend: Trend,
    pub trunc_trend: Trend,
    /// Fraction of rows with `dev_B > allowance_B`.
    pub property_b_frequency: f64,
    pub flagged_rows: usize,
    pub violations: usize,
}

/// Per-checkpoint quartiles and the early-against-late trend of the
/// median errors. `late_window` is the fraction of checkpoints at each end.
pub fn summarize(result: &ExperimentResult, late_window: f64) -> Summary {
    let target = result.spec.ratio_target;
    let checkpoints: Vec<CheckpointSummary> = result
        .plan
        .checkpoints()
        .into_iter()
        .map(|n| {
            let rows: Vec<&ResultRow> = result.rows_at(n).collect();
            let err = |g: &dyn Fn(&ResultRow) -> f64| Quartiles::of(rows.iter().map(|r| g(r))).median;
            CheckpointSummary {
                n,
                rows: rows.len(),
                ratio_trim: Quartiles::of(rows.iter().map(|r| r.ratio_trim)),
                ratio_trunc: Quartiles::of(rows.iter().map(|r| r.ratio_trunc)),
                trim_error: err(&|r| (r.ratio_trim - target).abs()),
                trunc_error: err(&|r| (r.ratio_trunc - 1.0).abs()),
                exceed_frequency: exceed_frequency(rows.iter().copied()),
            }
        })
        .collect();
    let w = ((checkpoints.len() as f64 * late_window).round() as usize).clamp(1, checkpoints.len().max(1));
    let trend = |g: fn(&CheckpointSummary) -> f64| {
        if checkpoints.len() < 2 {
            return Trend::Undetermined;
        }
        let early = Quartiles::of(checkpoints[..w].iter().map(g)).median;
        let late = Quartiles::of(checkpoints[checkpoints.len() - w..].iter().map(g)).median;
        Trend::compare(early, late)
    };
    Summary {
        name: result.spec.name.clone(),
        seeds: result.spec.seeds.count,
        ratio_target: target,
        late_window,
        trim_trend: trend(|c| c.trim_error),
        trunc_trend: trend(|c| c.trunc_error),
        property_b_frequency: exceed_frequency(result.rows.iter()),
        flagged_rows: result.rows.iter().filter(|r| r.flag != RecordFlag::Ok).count(),
        violations: result.violations.len(),
        checkpoints,
    }
}

fn exceed_frequency<'a>(rows: impl Iterator<Item = &'a ResultRow>) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for r in rows.filter(|r| r.dev_b.is_finite()) {
        total += 1;
        if r.dev_b > r.allowance_b {
            hit += 1;
        }
    }
    if total == 0 {
        f64::NAN
    } else {
        hit as f64 / total as f64
    }
}
