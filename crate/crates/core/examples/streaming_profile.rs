//! Single-pass trimmed and truncated sums over a checkpoint grid.
//!
//! `cargo run --example streaming_profile -- [n] [b]`

use trimlaw::dynamics::{IntervalMap, Observable, OrbitMode, OrbitStart, ValueStream};
use trimlaw::trimming::{default_capacity, streaming_profile, CheckpointGrid};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let b: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);

    let map = IntervalMap::doubling();
    let chi = Observable::Pareto { alpha: 0.5 };
    let values = ValueStream::new(&map, &chi, OrbitStart::Seed { seed: 7, stream: 0 }, n, OrbitMode::ExactBits).unwrap();
    let grid = CheckpointGrid::geometric(1000, 10.0, n).unwrap();
    let trims = vec![b; grid.len()];
    let levels: Vec<f64> = grid.checkpoints().iter().map(|&m| (m as f64).powi(2) / b as f64).collect();

    let records = streaming_profile(values, &grid, &trims, &levels, default_capacity(b)).unwrap();
    println!("{:>9} {:>14} {:>14} {:>14} {:>6} flag", "n", "S", "S^b", "T^f", "#>f");
    for r in records {
        println!(
            "{:>9} {:>14.6e} {:>14.6e} {:>14.6e} {:>6} {}",
            r.n, r.sum, r.trimmed, r.truncated, r.exceedances, r.flag
        );
    }
}
