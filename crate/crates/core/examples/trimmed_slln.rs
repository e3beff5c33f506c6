//! Intermediate trimming of `x^-2` along doubling orbits:
//! `S^b_n / (n^2 / b_n) -> 1` with `b_n = ceil((log n)^2)`.
//!
//! `cargo run --release --example trimmed_slln -- [config.json]`

use trimlaw::harness::{emit_results, run_experiment, summarize, ExperimentSpec};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.json").to_string());
    let spec = ExperimentSpec::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let result = run_experiment(&spec).unwrap();
    let summary = summarize(&result, spec.late_window);
    println!("{} ({} seeds)", spec.name, spec.seeds.count);
    println!("{:>9} {:>5} {:>10} {:>10} {:>10} {:>12}", "n", "b_n", "q1", "median", "q3", "T/E[T]");
    for (c, row) in summary.checkpoints.iter().zip(&result.plan.rows) {
        println!(
            "{:>9} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>12.4}",
            c.n, row.b, c.ratio_trim.q1, c.ratio_trim.median, c.ratio_trim.q3, c.ratio_trunc.median
        );
    }
    println!("trend of |ratio - 1|: {:?}; sandwich violations: {}", summary.trim_trend, summary.violations);
    let files = emit_results(&result, &summary, None).unwrap();
    println!("wrote {}", files.dir.display());
}
