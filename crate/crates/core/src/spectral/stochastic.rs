use super::{BinFunction, Result, SpectralError};
use crate::dynamics::{orbit_stream, IntervalMap, OrbitMode, OrbitStart};
use rayon::prelude::*;
use serde::Serialize;

/// Steps discarded from Lebesgue-random continued-fraction orbits so
/// the retained part is Gauss distributed (the density converges like
/// `0.304^n`).
const CF_BURN_IN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CorrelationStatus {
    Fitted,
    /// No lag `n >= 1` resolves above three standard errors.
    DecayTooFastToResolve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrelationReport {
    /// `|Cor(n)|`, `n = 0..=n_max`.
    pub correlation: Vec<f64>,
    pub standard_error: Vec<f64>,
    /// Lags used by the fit.
    pub fit_range: Option<(usize, usize)>,
    pub rate: Option<f64>,
    pub status: CorrelationStatus,
}

/// Monte Carlo `|int phi1 o T^n * phi2 dmu - int phi1 dmu int phi2 dmu|`
/// from invariant-measure samples, with the geometric rate fitted over the
/// leading lags that exceed three standard errors.
pub fn correlation_decay(
    map: &IntervalMap,
    phi1: &BinFunction,
    phi2: &BinFunction,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    if n_max < 1 || samples < 2 {
        return Err(SpectralError::InvalidInput("need n_max >= 1 and at least two samples".into()));
    }
    let mode = OrbitMode::exact_for(map);
    let burn = if mode == OrbitMode::ExactCf { CF_BURN_IN } else { 0 };
    let len = burn + n_max + 1;
    let rows: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let orbit: Vec<f64> = orbit_stream(map, OrbitStart::Seed { seed, stream: s }, len, mode)?.skip(burn).collect();
            if orbit.len() < n_max + 1 {
                return Err(SpectralError::InvalidInput("orbit ended before n_max".into()));
            }
            let mut row = Vec::with_capacity(n_max + 2);
            row.push(phi2.eval(orbit[0]));
            row.extend(orbit.iter().map(|&x| phi1.eval(x)));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let nf = samples as f64;
    let m2 = rows.iter().map(|r| r[0]).sum::<f64>() / nf;
    let mut correlation = Vec::with_capacity(n_max + 1);
    let mut standard_error = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let m1 = rows.iter().map(|r| r[n + 1]).sum::<f64>() / nf;
        let prods: Vec<f64> = rows.iter().map(|r| (r[n + 1] - m1) * (r[0] - m2)).collect();
        let c = prods.iter().sum::<f64>() / nf;
        let var = prods.iter().map(|p| (p - c).powi(2)).sum::<f64>() / (nf - 1.0);
        correlation.push(c.abs());
        standard_error.push((var / nf).sqrt());
    }
    let resolved = |n: usize| correlation[n] > 3.0 * standard_error[n] + 1e-12;
    let end = (1..=n_max).take_while(|&n| resolved(n)).last();
    let (fit_range, rate, status) = match end {
        Some(e) if e >= 2 => {
            let xs: Vec<f64> = (1..=e).map(|n| n as f64).collect();
            let ys: Vec<f64> = (1..=e).map(|n| correlation[n].ln()).collect();
            let (slope, _) = least_squares(&xs, &ys);
            (Some((1, e)), Some(slope.exp()), CorrelationStatus::Fitted)
        }
        _ => (None, None, CorrelationStatus::DecayTooFastToResolve),
    };
    Ok(CorrelationReport { correlation, standard_error, fit_range, rate, status })
}

/// `(slope, intercept)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `K exp(-U z)` with `z = (u / |phi|_BV) min{u / (n |phi|_1), 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeviationFit {
    pub k: f64,
    pub u: f64,
    /// Indices into the u grid used by the fit.
    pub fit_points: Vec<usize>,
    /// Largest empirical / envelope ratio on the fit range; at most 1.
    pub max_ratio: f64,
    pub bv_norm: f64,
    pub l1_norm: f64,
}

impl DeviationFit {
    pub fn envelope(&self, u: f64, n: usize) -> f64 {
        self.k * (-self.u * deviation_scale(u, n, self.bv_norm, self.l1_norm)).exp()
    }
}

fn deviation_scale(u: f64, n: usize, bv: f64, l1: f64) -> f64 {
    u / bv * (u / (n as f64 * l1)).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeviationProbe {
    pub n: usize,
    pub trials: usize,
    pub u: Vec<f64>,
    /// Trials with `max_{i<=n} |S_i phi| >= u`.
    pub counts: Vec<usize>,
    pub tail: Vec<f64>,
    pub fit: Option<DeviationFit>,
}

/// Empirical `mu(max_{i<=n} |S_i phi| >= u)` over independent orbits
/// (`phi` centred by the caller) and the fitted exponential envelope.
pub fn empirical_deviation_probe(
    map: &IntervalMap,
    phi: &BinFunction,
    n: usize,
    u_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<DeviationProbe> {
    if trials < 100 || n < 1 || u_grid.is_empty() {
        return Err(SpectralError::InvalidInput("need n >= 1, at least 100 trials and a non-empty u grid".into()));
    }
    let mode = OrbitMode::exact_for(map);
    let maxima: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut s = 0.0f64;
            let mut m = 0.0f64;
            for x in orbit_stream(map, OrbitStart::Seed { seed, stream: t }, n, mode)? {
                s += phi.eval(x);
                m = m.max(s.abs());
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = u_grid.iter().map(|&u| maxima.iter().filter(|&&m| m >= u).count()).collect();
    let tail: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    if counts.iter().zip(u_grid).all(|(&c, &u)| c == 0 || u <= 0.0) {
        return Err(SpectralError::NoExceedances);
    }
    let (bv, l1) = (phi.bv_norm(), phi.l1());
    let fit_points: Vec<usize> = (0..u_grid.len()).filter(|&i| counts[i] >= 5 && u_grid[i] > 0.0).collect();
    let fit = (fit_points.len() >= 2).then(|| {
        let z: Vec<f64> = fit_points.iter().map(|&i| deviation_scale(u_grid[i], n, bv, l1)).collect();
        let y: Vec<f64> = fit_points.iter().map(|&i| tail[i].ln()).collect();
        let (slope, intercept) = least_squares(&z, &y);
        let mut f = DeviationFit { k: intercept.exp(), u: -slope, fit_points: fit_points.clone(), max_ratio: 0.0, bv_norm: bv, l1_norm: l1 };
        let worst = fit_points.iter().map(|&i| tail[i] / f.envelope(u_grid[i], n)).fold(0.0, f64::max);
        if worst > 1.0 {
            f.k *= worst;
        }
        f.max_ratio = fit_points.iter().map(|&i| tail[i] / f.envelope(u_grid[i], n)).fold(0.0, f64::max);
        f
    });
    Ok(DeviationProbe { n, trials, u: u_grid.to_vec(), counts, tail, fit })
}
