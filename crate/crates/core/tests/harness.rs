use trimlaw::harness::{emit_results, rows_csv, run_experiment, summarize, ExperimentSpec, HarnessError, Trend};
use trimlaw::trimming::RecordFlag;

fn spec(json: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(json).unwrap()
}

fn config(name: &str) -> ExperimentSpec {
    let path = format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    spec(&std::fs::read_to_string(path).unwrap())
}

#[test]
fn one_row_per_seed_and_checkpoint() {
    let s = config("smoke");
    let r = run_experiment(&s).unwrap();
    assert_eq!(r.rows.len(), 12);
    let order: Vec<(usize, usize)> = r.rows.iter().map(|r| (r.seed, r.n)).collect();
    let mut sorted = order.clone();
    sorted.sort();
    assert_eq!(order, sorted);
    assert!(r.violations.is_empty());
    for row in &r.rows {
        assert_eq!(row.flag, RecordFlag::Ok);
        assert!(row.ratio_trim.is_finite() && row.ratio_trim > 0.0);
        assert!(row.ratio_trunc.is_finite() && row.ratio_trunc > 0.0);
    }
}

#[test]
fn untrimmed_degenerate_case() {
    let s = spec(
        r#"{"name":"untrimmed","map":"doubling","observable":{"kind":"pareto","alpha":0.5},
            "plan":{"source":"fixed","trim":{"kind":"constant","value":0},"norming":{"kind":"nLogN","coef":1.0}},
            "grid":{"checkpoints":[100,1000]},"seeds":{"count":2,"base":5}}"#,
    );
    let r = run_experiment(&s).unwrap();
    for row in &r.rows {
        assert_eq!(row.f, f64::INFINITY);
        assert_eq!(row.trimmed, row.sum);
        assert_eq!(row.truncated, row.sum);
        assert_eq!(row.exceedances, Some(0));
        let d = row.n as f64 * (row.n as f64).ln();
        assert_eq!(row.ratio_trim, row.sum / d);
    }
}

#[test]
fn exceedance_count_mean_and_clustered_variance() {
    // 1{x^-2 > n} = 1{x < p} with p = n^-1/2; mean n p
    let s = spec(
        r#"{"name":"binomial","map":"doubling","observable":{"kind":"pareto","alpha":0.5},
            "plan":{"source":"fixed","trim":{"kind":"constant","value":100},"norming":{"kind":"regvar"},
                    "threshold":{"kind":"power","coef":1.0,"exponent":1.0}},
            "grid":{"checkpoints":[10000]},"seeds":{"count":200,"base":11}}"#,
    );
    let r = run_experiment(&s).unwrap();
    let counts: Vec<f64> = r.rows.iter().map(|r| r.exceedances.unwrap() as f64).collect();
    let p = 0.01;
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert!((mean - 100.0).abs() <= 3.0 * 10.0 * 1.1, "mean {mean}");
    let se = (10000.0 * p * (1.0 - p) / counts.len() as f64).sqrt();
    assert!((mean - 100.0).abs() < 4.0 * se, "mean {mean} se {se}");
    // exceedances cluster under doubling, so the variance is not binomial
    let n = 10000usize;
    let oracle = (0..n).fold(n as f64 * p * (1.0 - p), |acc, k| {
        if k == 0 {
            return acc;
        }
        acc + 2.0 * (n - k) as f64 * (joint_below(p, k as u32) - p * p)
    });
    assert!(oracle > 2.5 * 99.0);
    let tol = 4.0 * oracle * (2.0 / (counts.len() - 1) as f64).sqrt();
    assert!((var - oracle).abs() < tol, "var {var} oracle {oracle}");
    assert!(r.violations.is_empty());
}

// Lebesgue measure of {x < p : frac(2^k x) < p}
fn joint_below(p: f64, k: u32) -> f64 {
    if k > 60 {
        return p * p;
    }
    let scale = 2f64.powi(k as i32);
    let y = p * scale;
    (y.floor() * p + (y - y.floor()).min(p)) / scale
}

#[test]
fn deterministic_and_reproducible_from_emitted_spec() {
    let s = config("smoke");
    let r1 = run_experiment(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_results(&r1, &summarize(&r1, 1.0 / 3.0), Some(dir.path())).unwrap();
    let csv = std::fs::read_to_string(&files.rows).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(csv, rows_csv(&run_experiment(&s).unwrap()));
    let resolved = spec(&std::fs::read_to_string(&files.spec).unwrap());
    assert_eq!(rows_csv(&run_experiment(&resolved).unwrap()), csv);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.summary).unwrap()).unwrap();
    assert_eq!(summary["seeds"], 3);
    assert!(std::fs::read_to_string(&files.plan).unwrap().starts_with("n,f_n,a_n,b_n,d_n,gamma_n"));
}

#[test]
fn default_output_directory_from_name() {
    let s = config("smoke");
    assert_eq!(s.output_dir(), "results/smoke");
}

#[test]
fn capacity_is_raised_until_rows_are_complete() {
    // many more exceedances than the default top-k capacity
    let s = spec(
        r#"{"name":"crowded","map":"doubling","observable":{"kind":"pareto","alpha":0.5},
            "plan":{"source":"fixed","trim":{"kind":"constant","value":2},"norming":{"kind":"regvar"},
                    "threshold":{"kind":"power","coef":1.0,"exponent":0.5}},
            "grid":{"checkpoints":[5000]},"seeds":{"count":2,"base":3}}"#,
    );
    let r = run_experiment(&s).unwrap();
    for row in &r.rows {
        assert_eq!(row.flag, RecordFlag::Ok);
        assert!(row.capacity > trimlaw::trimming::default_capacity(2));
        assert!(row.exceedances.unwrap() > 2);
        assert!(row.trimmed >= row.truncated);
    }
}

#[test]
fn summary_examples() {
    let s = config("smoke");
    let mut r = run_experiment(&s).unwrap();
    for row in &mut r.rows {
        row.ratio_trim = 1.0;
        row.ratio_trunc = 1.0;
        row.dev_b = 2.0 * row.allowance_b;
    }
    let sum = summarize(&r, 1.0 / 3.0);
    assert_eq!(sum.trim_trend, Trend::Flat);
    assert_eq!(sum.trunc_trend, Trend::Flat);
    assert_eq!(sum.property_b_frequency, 1.0);
    assert!(sum.checkpoints.iter().all(|c| c.ratio_trim.median == 1.0 && c.trim_error == 0.0));
    for row in &mut r.rows {
        row.dev_b = 0.0;
    }
    assert_eq!(summarize(&r, 1.0 / 3.0).property_b_frequency, 0.0);

    let mut one = config("smoke");
    one.seeds.count = 1;
    let r = run_experiment(&one).unwrap();
    for c in summarize(&r, 1.0 / 3.0).checkpoints {
        assert_eq!(c.ratio_trim.q1, c.ratio_trim.median);
        assert_eq!(c.ratio_trim.q3, c.ratio_trim.median);
    }
}

#[test]
fn config_errors() {
    let bad = [
        r#"{"name":"x","map":"doubling","observable":{"kind":"pareto","alpha":0.5},"plan":{"source":"light","r":1,"norming":{"kind":"regvar"}},"grid":{"checkpoints":[100]},"seeds":{"count":0,"base":1}}"#,
        r#"{"name":"x","map":"doubling","observable":{"kind":"pareto","alpha":0.5},"plan":{"source":"light","r":1,"norming":{"kind":"regvar"}},"grid":{"checkpoints":[100]},"seeds":{"count":1,"base":1},"typo":1}"#,
        r#"{"name":"x","map":"doubling","mode":"exact","observable":{"kind":"floorReciprocal"},"plan":{"source":"light","r":1,"norming":{"kind":"regvar"}},"grid":{"checkpoints":[100]},"seeds":{"count":1,"base":1}}"#,
        r#"{"name":"x","map":"gauss","observable":{"kind":"pareto","alpha":1.5},"plan":{"source":"light","r":1,"norming":{"kind":"regvar"}},"grid":{"checkpoints":[100]},"seeds":{"count":1,"base":1}}"#,
    ];
    for j in bad {
        let e = ExperimentSpec::from_json(j).map(|s| run_experiment(&s).map(|_| ()));
        match e {
            Err(e) => assert_eq!(e.exit_code(), 3, "{e}"),
            Ok(Err(e)) => assert_eq!(e.exit_code(), 3, "{e}"),
            Ok(Ok(())) => panic!("accepted {j}"),
        }
    }
    assert!(matches!(ExperimentSpec::from_json("{"), Err(HarnessError::Config(_))));
    let wrong_mode = ExperimentSpec::from_json(
        r#"{"name":"x","map":"doubling","mode":"fast","observable":{"kind":"pareto","alpha":0.5},"plan":{"source":"light","r":1,"norming":{"kind":"regvar"}},"grid":{"checkpoints":[100]},"seeds":{"count":1,"base":1}}"#,
    );
    match wrong_mode {
        Err(HarnessError::Config(m)) => assert!(m.starts_with("schema:") && m.contains("/mode"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn shipped_configs_parse() {
    for name in ["diamond_vaaler", "trimmed_slln", "property_b_a10", "property_b_a100", "property_b_a1000", "haynes_control", "smoke"] {
        let s = config(name);
        s.plan().unwrap();
        assert_eq!(s.name, name);
    }
}
