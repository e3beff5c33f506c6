//! Centred exceedance counts against the allowance `V c(a_n, n)`.
//!
//! `cargo run --release --example property_b -- [seeds]`

use trimlaw::harness::{run_experiment, summarize, ExperimentSpec};

fn main() {
    let seeds: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    println!("{:>6} {:>9} {:>10} {:>10} {:>10}", "a_n", "n", "allowance", "max dev", "exceeded");
    for a in [10, 100, 1000] {
        let spec = ExperimentSpec::from_json(&format!(
            r#"{{"name":"pb","map":"doubling","observable":{{"kind":"pareto","alpha":0.5}},
                "plan":{{"source":"general","threshold":{{"kind":"exceedances","target":{a}}}}},
                "grid":{{"checkpoints":[100000,1000000]}},"seeds":{{"count":{seeds},"base":8}}}}"#
        ))
        .unwrap();
        let result = run_experiment(&spec).unwrap();
        let summary = summarize(&result, 0.5);
        for c in &summary.checkpoints {
            let rows: Vec<_> = result.rows_at(c.n).collect();
            let worst = rows.iter().map(|r| r.dev_b).fold(0.0, f64::max);
            println!(
                "{:>6} {:>9} {:>10.3} {:>10.1} {:>9.1}%",
                a,
                c.n,
                rows[0].allowance_b,
                worst,
                100.0 * c.exceed_frequency
            );
        }
    }
}
