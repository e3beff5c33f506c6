//! Ulam matrices of the doubling and Gauss maps: invariant density and
//! the second eigenvalue.
//!
//! `cargo run --example ulam_spectrum -- [bins]`

use trimlaw::dynamics::IntervalMap;
use trimlaw::spectral::{build_ulam, spectral_report, BuildMethod};

fn main() {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);

    for map in [IntervalMap::doubling(), IntervalMap::gauss()] {
        let op = build_ulam(&map, k, BuildMethod::AnalyticBranches).unwrap();
        let rep = spectral_report(&op).unwrap();
        println!("{} with {k} bins", rep.map);
        println!("  leading eigenvalue  {:.12}", rep.leading_eigenvalue);
        println!("  |second eigenvalue| {:.6} (dense: {:?})", rep.second_modulus, rep.dense_second_modulus);
        println!("  spectral gap        {}", rep.has_gap);
        let show = [0, k / 4, k / 2, k - 1];
        for i in show {
            let density = rep.stationary[i] * k as f64;
            let x = (i as f64 + 0.5) / k as f64;
            let exact = map.invariant_density().map_or(f64::NAN, |h| h(x));
            println!("  h({x:.4}) = {density:.5}   exact {exact:.5}");
        }
    }
    println!("\nWirsing constant 0.3036630029... is the Gauss second eigenvalue modulus");

    let mc = build_ulam(&IntervalMap::gauss(), 64, BuildMethod::MonteCarlo { samples: 2_000_000, seed: 3 }).unwrap();
    let rep = spectral_report(&mc).unwrap();
    println!("Monte Carlo Gauss, 64 bins: second modulus {:.4}", rep.second_modulus);
}
