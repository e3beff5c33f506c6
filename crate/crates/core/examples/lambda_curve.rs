//! Leading eigenvalue of the twisted transfer operator for the coin
//! observable under doubling: `lambda_t = cosh(t/2)`.
//!
//! `cargo run --example lambda_curve`

use trimlaw::dynamics::IntervalMap;
use trimlaw::spectral::{build_ulam, perturbed_leading_eigenvalue, BinFunction, BuildMethod};

fn main() {
    let op = build_ulam(&IntervalMap::doubling(), 128, BuildMethod::AnalyticBranches).unwrap();
    let phi = BinFunction::coin(128).unwrap();
    let ts: Vec<f64> = (-8..=8).map(|i| i as f64 / 4.0).collect();
    println!("{:>6} {:>18} {:>18} {:>10}", "t", "lambda_t", "cosh(t/2)", "diff");
    for p in perturbed_leading_eigenvalue(&op, &phi, &ts).unwrap() {
        let exact = (p.t / 2.0).cosh();
        let mark = if p.extrapolation { " *" } else { "" };
        println!("{:>6.2} {:>18.15} {:>18.15} {:>10.1e}{mark}", p.t, p.lambda, exact, p.lambda - exact);
    }

    // a non-trivial observable on the Gauss map: the curve is only convex
    let gauss = build_ulam(&IntervalMap::gauss(), 128, BuildMethod::AnalyticBranches).unwrap();
    let raw = BinFunction::from_fn(128, |x| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
    let h = trimlaw::spectral::leading_eigen(&gauss).unwrap().stationary;
    let centred = raw.centered(&h);
    let curve = perturbed_leading_eigenvalue(&gauss, &centred, &[-0.5, 0.0, 0.5]).unwrap();
    println!("\nGauss, centred 1[0,1/2): lambda(-1/2) = {:.8}, lambda(0) = {:.8}, lambda(1/2) = {:.8}",
        curve[0].lambda, curve[1].lambda, curve[2].lambda);
}
