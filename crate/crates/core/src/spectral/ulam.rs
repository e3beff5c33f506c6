use super::{BinFunction, Result, SpectralError};
use crate::dynamics::{InvariantSampler, IntervalMap, MapKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BuildMethod {
    AnalyticBranches,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Ulam matrix on `k` uniform bins:
/// `P[i][j] = leb(I_i ∩ T^-1 I_j) / leb(I_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UlamOperator {
    k: usize,
    #[serde(skip)]
    p: Vec<f64>,
    method: BuildMethod,
    map: &'static str,
    mixing: bool,
    /// Lebesgue mass of Gauss branches beyond the explicit ones, placed
    /// by the digamma closed form.
    tail_mass: f64,
    max_row_error: f64,
    warnings: Vec<String>,
}

const ANALYTIC_ROW_TOL: f64 = 1e-10;
const MC_ROW_TOL: f64 = 1e-3;
const TAIL_WARN: f64 = 1e-8;
const MAX_ITER: usize = 100_000;

impl UlamOperator {
    pub fn bins(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.k..(i + 1) * self.k]
    }

    pub fn method(&self) -> BuildMethod {
        self.method
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn max_row_error(&self) -> f64 {
        self.max_row_error
    }

    /// `out = v P`.
    fn mul_left(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &pij) in out.iter_mut().zip(self.row(i)) {
                *o += vi * pij;
            }
        }
    }

    /// Row-major CSV of the matrix.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.k {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Sampler for the stationary histogram.
    pub fn sampler(&self) -> Result<InvariantSampler> {
        let lead = leading_eigen(self)?;
        Ok(InvariantSampler::from_histogram(&lead.stationary)?)
    }
}

pub fn build_ulam(map: &IntervalMap, k: usize, method: BuildMethod) -> Result<UlamOperator> {
    if k < 2 {
        return Err(SpectralError::InvalidInput(format!("need at least 2 bins, got {k}")));
    }
    let mut op = UlamOperator {
        k,
        p: vec![0.0; k * k],
        method,
        map: map.name(),
        mixing: map.is_mixing(),
        tail_mass: 0.0,
        max_row_error: 0.0,
        warnings: Vec::new(),
    };
    let tol = match method {
        BuildMethod::AnalyticBranches => {
            analytic(map, &mut op);
            ANALYTIC_ROW_TOL
        }
        BuildMethod::MonteCarlo { samples, seed } => {
            monte_carlo(map, &mut op, samples, seed)?;
            MC_ROW_TOL
        }
    };
    for v in op.p.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    op.max_row_error = (0..k).map(|i| (op.row(i).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    if op.max_row_error > tol {
        return Err(SpectralError::InvalidInput(format!(
            "Ulam rows sum to 1 only within {:e} (tolerance {tol:e})",
            op.max_row_error
        )));
    }
    Ok(op)
}

fn analytic(map: &IntervalMap, op: &mut UlamOperator) {
    let k = op.k;
    let kf = k as f64;
    let m_max = (4 * k).max(64);
    for br in map.branches(m_max) {
        for j in 0..k {
            let (c, d) = (j as f64 / kf, (j + 1) as f64 / kf);
            let Some((x1, x2)) = br.preimage(c, d) else { continue };
            // bin coordinates, where bin i is [i, i + 1]
            let (y1, y2) = (x1 * kf, x2 * kf);
            let first = (y1.floor() as usize).min(k - 1);
            let last = (y2.ceil() as usize).clamp(first + 1, k);
            for i in first..last {
                let overlap = y2.min((i + 1) as f64) - y1.max(i as f64);
                if overlap > 0.0 {
                    op.p[i * k + j] += overlap;
                }
            }
        }
    }
    if let MapKind::Gauss = map.kind() {
        // branches m > m_max cover (0, 1/(m_max+1)] inside bin 0; their
        // preimage of [c, d) has measure sum_m 1/(c+m) - 1/(d+m)
        let z = (m_max + 1) as f64;
        for j in 0..k {
            let (c, d) = (j as f64 / kf, (j + 1) as f64 / kf);
            op.p[j] += digamma_diff(z + c, z + d) * kf;
        }
        op.tail_mass = 1.0 / z;
        // error of the asymptotic digamma series beyond the x^-6 term
        let err = kf / (240.0 * z.powi(8));
        if err > TAIL_WARN {
            op.warnings.push(format!("Gauss tail apportionment error bound {err:e}"));
        }
    }
}

/// `psi(b) - psi(a)` for `a, b >= 32` from the asymptotic series.
fn digamma_diff(a: f64, b: f64) -> f64 {
    let s = |x: f64| {
        let r = 1.0 / (x * x);
        -0.5 / x - r * (1.0 / 12.0 - r * (1.0 / 120.0 - r / 252.0))
    };
    ((b - a) / a).ln_1p() + (s(b) - s(a))
}

fn monte_carlo(map: &IntervalMap, op: &mut UlamOperator, samples: usize, seed: u64) -> Result<()> {
    let k = op.k;
    if samples < k {
        return Err(SpectralError::InvalidInput(format!("{samples} samples cannot fill {k} bins")));
    }
    let per_bin = samples.div_ceil(k);
    let w = 1.0 / per_bin as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..k {
        let mut done = 0;
        while done < per_bin {
            let x = (i as f64 + rng.random::<f64>()) / k as f64;
            let Ok(t) = map.step(x) else { continue };
            let j = ((t * k as f64) as usize).min(k - 1);
            op.p[i * k + j] += w;
            done += 1;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LeadingEigen {
    pub eigenvalue: f64,
    /// Invariant mass per bin, summing to 1.
    pub stationary: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Power iteration `v <- v P` from the uniform vector.
pub fn leading_eigen(op: &UlamOperator) -> Result<LeadingEigen> {
    let k = op.k;
    let mut v = vec![1.0 / k as f64; k];
    let mut w = vec![0.0; k];
    let mut diff = f64::INFINITY;
    let mut it = 0;
    while it < MAX_ITER {
        it += 1;
        op.mul_left(&v, &mut w);
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        diff = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut w);
        if diff < 1e-12 {
            break;
        }
    }
    if diff >= 1e-12 {
        return Err(SpectralError::SlowConvergence { iterations: it, residual: diff });
    }
    op.mul_left(&v, &mut w);
    let num: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().map(|a| a * a).sum();
    let eigenvalue = num / den;
    let residual = w.iter().zip(&v).map(|(a, b)| (a - eigenvalue * b).abs()).fold(0.0, f64::max);
    Ok(LeadingEigen { eigenvalue, stationary: v, iterations: it, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapEstimate {
    /// Second eigenvalue modulus from deflated power iteration.
    pub second_modulus: f64,
    /// Same from a dense eigensolve (`k <= 512`).
    pub dense_second_modulus: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `second_modulus < 1`.
    pub has_gap: bool,
}

const DENSE_MAX: usize = 512;
const WINDOW: usize = 64;
const GAP_MAX_ITER: usize = 20_000;

/// Second eigenvalue modulus: power iteration on the sum-zero subspace,
/// which `v -> v P` preserves. Start vectors are integer valued and
/// rescaling is by powers of two, so dyadic matrices are iterated exactly.
pub fn spectral_gap(op: &UlamOperator, lead: &LeadingEigen) -> Result<GapEstimate> {
    let k = op.k;
    let mut starts = Vec::new();
    let mut alt: Vec<f64> = (0..k).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    if k % 2 == 1 {
        alt[k - 1] = 0.0;
    }
    starts.push(alt);
    let mut ends = vec![0.0; k];
    ends[0] = 1.0;
    ends[k - 1] = -1.0;
    starts.push(ends);
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
    let mut rnd: Vec<f64> = (0..k).map(|_| rng.random_range(-4i32..=4) as f64).collect();
    let s: f64 = rnd[..k - 1].iter().sum();
    rnd[k - 1] = -s;
    starts.push(rnd);

    let mut best = 0.0f64;
    let mut iterations = 0;
    let mut converged = true;
    for start in starts {
        let (rho, it, ok) = deflated_power(op, &lead.stationary, start);
        best = best.max(rho);
        iterations = iterations.max(it);
        converged &= ok;
    }
    let dense_second_modulus = (k <= DENSE_MAX).then(|| dense_second(op));
    Ok(GapEstimate { second_modulus: best, dense_second_modulus, iterations, converged, has_gap: best < 1.0 - 1e-9 })
}

fn deflated_power(op: &UlamOperator, pi: &[f64], mut w: Vec<f64>) -> (f64, usize, bool) {
    let k = op.k;
    let mut next = vec![0.0; k];
    let mut logs: Vec<f64> = Vec::new();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut prev_norm = norm(&w);
    if prev_norm == 0.0 {
        return (0.0, 0, true);
    }
    let window_mean = |l: &[f64]| l.iter().sum::<f64>() / l.len() as f64;
    for it in 1..=GAP_MAX_ITER {
        op.mul_left(&w, &mut next);
        let s: f64 = next.iter().sum();
        if s != 0.0 {
            next.iter_mut().zip(pi).for_each(|(x, p)| *x -= s * p);
        }
        let n = norm(&next);
        if n == 0.0 {
            return (0.0, it, true);
        }
        logs.push((n / prev_norm).ln());
        let scale = (-n.log2().round()).exp2();
        next.iter_mut().for_each(|x| *x *= scale);
        prev_norm = n * scale;
        std::mem::swap(&mut w, &mut next);
        if logs.len() >= 2 * WINDOW && logs.len().is_multiple_of(WINDOW) {
            let l = logs.len();
            let a = window_mean(&logs[l - 2 * WINDOW..l - WINDOW]).exp();
            let b = window_mean(&logs[l - WINDOW..]).exp();
            if (a - b).abs() <= 1e-9 * b.max(1e-300) || b < 1e-200 {
                return (b, it, true);
            }
        }
    }
    let l = logs.len();
    (window_mean(&logs[l - WINDOW..]).exp(), GAP_MAX_ITER, false)
}

fn dense_second(op: &UlamOperator) -> f64 {
    let m = DMatrix::from_row_slice(op.k, op.k, &op.p);
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli.get(1).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralReport {
    pub map: &'static str,
    pub bins: usize,
    pub method: BuildMethod,
    pub leading_eigenvalue: f64,
    pub stationary: Vec<f64>,
    pub second_modulus: f64,
    pub dense_second_modulus: Option<f64>,
    pub leading_residual: f64,
    pub leading_iterations: usize,
    pub gap_iterations: usize,
    pub gap_converged: bool,
    pub has_gap: bool,
    /// Mixing as asserted by the map.
    pub mixing: bool,
    pub tail_mass: f64,
    pub max_row_error: f64,
    pub warnings: Vec<String>,
}

pub fn spectral_report(op: &UlamOperator) -> Result<SpectralReport> {
    let lead = leading_eigen(op)?;
    let gap = spectral_gap(op, &lead)?;
    let mut warnings = op.warnings.clone();
    if !gap.has_gap {
        warnings.push("no spectral gap: second eigenvalue has modulus 1".into());
    }
    Ok(SpectralReport {
        map: op.map,
        bins: op.k,
        method: op.method,
        leading_eigenvalue: lead.eigenvalue,
        stationary: lead.stationary,
        second_modulus: gap.second_modulus,
        dense_second_modulus: gap.dense_second_modulus,
        leading_residual: lead.residual,
        leading_iterations: lead.iterations,
        gap_iterations: gap.iterations,
        gap_converged: gap.converged,
        has_gap: gap.has_gap,
        mixing: op.mixing,
        tail_mass: op.tail_mass,
        max_row_error: op.max_row_error,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub t: f64,
    pub lambda: f64,
    /// `|t| max|phi| > 2`: outside the perturbative regime.
    pub extrapolation: bool,
}

/// Leading eigenvalue of `h -> P^T (e^(t phi) h)` for each `t`.
pub fn perturbed_leading_eigenvalue(op: &UlamOperator, phi: &BinFunction, t_grid: &[f64]) -> Result<Vec<LambdaPoint>> {
    let k = op.k;
    if phi.bins() != k {
        return Err(SpectralError::InvalidInput(format!("phi has {} bins, operator has {k}", phi.bins())));
    }
    let lead = leading_eigen(op)?;
    let mean = phi.mean_against(&lead.stationary);
    if mean.abs() > 1e-8 {
        return Err(SpectralError::NotCentered(mean));
    }
    let sup = phi.sup();
    t_grid
        .iter()
        .map(|&t| {
            let weights: Vec<f64> = phi.values().iter().map(|v| (t * v).exp()).collect();
            let lambda = twisted_eigenvalue(op, &weights)?;
            Ok(LambdaPoint { t, lambda, extrapolation: t.abs() * sup > 2.0 })
        })
        .collect()
}

fn twisted_eigenvalue(op: &UlamOperator, weights: &[f64]) -> Result<f64> {
    let k = op.k;
    let mut h = vec![1.0 / k as f64; k];
    let mut u = vec![0.0; k];
    let mut next = vec![0.0; k];
    let mut lambda = 0.0;
    for it in 1..=MAX_ITER {
        u.iter_mut().zip(&h).zip(weights).for_each(|((u, h), w)| *u = h * w);
        op.mul_left(&u, &mut next);
        let s: f64 = next.iter().sum();
        lambda = s / h.iter().sum::<f64>();
        next.iter_mut().for_each(|x| *x /= s);
        let diff = next.iter().zip(&h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut h, &mut next);
        if diff < 1e-14 {
            return Ok(lambda);
        }
        if it == MAX_ITER {
            return Err(SpectralError::SlowConvergence { iterations: it, residual: diff });
        }
    }
    Ok(lambda)
}
