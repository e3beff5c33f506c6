//! Tail of `max_{i<=n} |S_i phi|` for the coin observable and the fitted
//! exponential envelope.
//!
//! `cargo run --release --example deviation_probe -- [n] [trials]`

use trimlaw::dynamics::IntervalMap;
use trimlaw::spectral::{empirical_deviation_probe, BinFunction};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let trials: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let sd = (n as f64).sqrt() / 2.0;
    let grid: Vec<f64> = (1..=16).map(|i| i as f64 * sd / 4.0).collect();
    let phi = BinFunction::coin(2).unwrap();
    let probe = empirical_deviation_probe(&IntervalMap::doubling(), &phi, n, &grid, trials, 1).unwrap();
    let fit = probe.fit.as_ref();
    println!("{:>8} {:>8} {:>10} {:>10}", "u", "u/sd", "empirical", "envelope");
    for (u, t) in probe.u.iter().zip(&probe.tail) {
        let env = fit.map_or(f64::NAN, |f| f.envelope(*u, n));
        println!("{:>8.1} {:>8.2} {:>10.2e} {:>10.2e}", u, u / sd, t, env);
    }
    if let Some(f) = fit {
        println!("K = {:.3}, U = {:.4}, fitted on {} points", f.k, f.u, f.fit_points.len());
    }
}
