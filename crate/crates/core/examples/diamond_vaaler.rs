//! Light trimming of continued-fraction digits: removing the largest digit
//! gives `S^1_n / (n log n) -> 1 / log 2`.
//!
//! `cargo run --release --example diamond_vaaler -- [n] [seeds]`

use trimlaw::harness::{run_experiment, summarize, ExperimentSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seeds: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let spec = ExperimentSpec::from_json(&format!(
        r#"{{"name":"dv","map":"gauss","observable":{{"kind":"floorReciprocal"}},
            "plan":{{"source":"light","r":1,"norming":{{"kind":"nLogN","coef":1.0}}}},
            "grid":{{"start":1000,"ratio":10,"max":{n}}},"seeds":{{"count":{seeds},"base":1977}},
            "ratioTarget":{}}}"#,
        1.0 / std::f64::consts::LN_2
    ))
    .unwrap();
    let result = run_experiment(&spec).unwrap();
    let summary = summarize(&result, 1.0 / 3.0);
    println!("target 1/log 2 = {:.6}", summary.ratio_target);
    println!("{:>9} {:>10} {:>10} {:>10} {:>10}", "n", "q1", "median", "q3", "untrimmed");
    for c in &summary.checkpoints {
        let raw: Vec<f64> = result.rows_at(c.n).map(|r| r.sum / (r.n as f64 * (r.n as f64).ln())).collect();
        let raw_med = raw.iter().sum::<f64>() / raw.len() as f64;
        println!(
            "{:>9} {:>10.5} {:>10.5} {:>10.5} {:>10.4}",
            c.n, c.ratio_trim.q1, c.ratio_trim.median, c.ratio_trim.q3, raw_med
        );
    }
    println!("trend of the median error: {:?}", summary.trim_trend);
}
