//! Decay of correlations along exact orbits, against the spectral gap.
//!
//! `cargo run --example correlation_decay`

use trimlaw::dynamics::IntervalMap;
use trimlaw::spectral::{correlation_decay, BinFunction};

fn main() {
    let phi = BinFunction::from_fn(64, |x| x - 0.5).unwrap();
    for map in [IntervalMap::gauss(), IntervalMap::doubling()] {
        let rep = correlation_decay(&map, &phi, &phi, 12, 400_000, 5).unwrap();
        println!("{}: status {:?}, fitted rate {:?} over lags {:?}", map.name(), rep.status, rep.rate, rep.fit_range);
        for (n, (c, se)) in rep.correlation.iter().zip(&rep.standard_error).enumerate().take(6) {
            println!("  n = {n:>2}  |Cor| = {c:.3e} +- {se:.1e}");
        }
    }
}
