//! Control: removing a fixed number of terms is not enough for `x^-2`.
//! The ratio against the trimmed-law norming keeps fluctuating by orders
//! of magnitude instead of settling.
//!
//! `cargo run --release --example haynes_control -- [max_n] [seeds]`

use trimlaw::harness::{run_experiment, summarize, ExperimentSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let max: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let seeds: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    for (label, trim) in [("r = 1", r#"{"kind":"constant","value":1}"#), ("b_n = (log n)^2", r#"{"kind":"logPower","coef":1.0,"power":2.0}"#)] {
        let spec = ExperimentSpec::from_json(&format!(
            r#"{{"name":"control","map":"doubling","observable":{{"kind":"pareto","alpha":0.5}},
                "plan":{{"source":"fixed","trim":{trim},"norming":{{"kind":"regvar"}}}},
                "grid":{{"start":1000,"ratio":3.1622776601683795,"max":{max}}},"seeds":{{"count":{seeds},"base":1999}}}}"#
        ))
        .unwrap();
        let result = run_experiment(&spec).unwrap();
        let summary = summarize(&result, 1.0 / 3.0);
        println!("{label}");
        for c in &summary.checkpoints {
            let spread = c.ratio_trim.q3 / c.ratio_trim.q1;
            println!("  n = {:>8}  median {:>9.4}  q3/q1 {:>8.3}", c.n, c.ratio_trim.median, spread);
        }
    }
}
