//! Exact continued-fraction digits of random points.
//!
//! `cargo run --example cf_digits -- [n] [seed]`

use std::time::Instant;
use trimlaw::dynamics::cf_digit_stream;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let start = Instant::now();
    let digits = cf_digit_stream(seed, 0, n).expect("digit extraction");
    let elapsed = start.elapsed();

    println!("{n} digits in {:.2?}", elapsed);
    println!("first digits: {:?}", &digits[..digits.len().min(20)]);
    println!("{:>4} {:>10} {:>10}", "k", "observed", "log2 law");
    for k in 1..=6u64 {
        let count = digits.iter().filter(|&&a| a == k).count();
        let law = (1.0 + 1.0 / (k as f64 * (k as f64 + 2.0))).log2();
        println!("{k:>4} {:>10.5} {:>10.5}", count as f64 / n as f64, law);
    }
    let max = digits.iter().max().copied().unwrap_or(0);
    println!("largest digit: {max}");
}
