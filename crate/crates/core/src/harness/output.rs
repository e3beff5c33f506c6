use super::{ExperimentResult, HarnessError, Summary};
use crate::sequences::{condition_diagnostics, plan_csv};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub dir: PathBuf,
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub spec: PathBuf,
    pub plan: PathBuf,
}

/// Rows as CSV. Floats use the shortest round-trip form.
pub fn rows_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "seed,n,S,S_trim,T_trunc,exceed_count,b_n,f_n,flag,ratio_trim,ratio_trunc,dev_B,allowance_B,capacity\n",
    );
    for r in &result.rows {
        let k = r.exceedances.map_or_else(|| "NaN".to_string(), |k| k.to_string());
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.n,
            r.sum,
            r.trimmed,
            r.truncated,
            k,
            r.b,
            r.f,
            r.flag,
            r.ratio_trim,
            r.ratio_trunc,
            r.dev_b,
            r.allowance_b,
            r.capacity
        )
        .unwrap();
    }
    s
}

/// Writes `rows.csv`, `summary.json`, `plan.csv` and the resolved
/// `spec.json` under `dir`, or under the spec's output path.
pub fn emit_results(result: &ExperimentResult, summary: &Summary, dir: Option<&Path>) -> Result<EmittedFiles, HarnessError> {
    let dir = match dir {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from(result.spec.output_dir()),
    };
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let write = |name: &str, body: String| -> Result<PathBuf, HarnessError> {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))?;
        Ok(p)
    };
    let mut spec = result.spec.clone();
    if spec.tail.is_none() {
        spec.tail = spec.law().ok().and_then(|l| l.as_tail_model().cloned());
    }
    let psi = &result.spec.property_b.psi;
    let report = condition_diagnostics(&result.plan, spec.tail.as_ref(), psi);
    Ok(EmittedFiles {
        rows: write("rows.csv", rows_csv(result))?,
        summary: write("summary.json", serde_json::to_string_pretty(summary).expect("summary serializes") + "\n")?,
        spec: write("spec.json", spec.to_json() + "\n")?,
        plan: write("plan.csv", plan_csv(&result.plan, &report))?,
        dir,
    })
}
