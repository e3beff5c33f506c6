use super::HarnessError;
use crate::dynamics::{IntervalMap, Observable, OrbitMode};
use crate::regvar::{DistributionFunction, Law, TailModel};
use crate::sequences::{
    general_trimming_plan, regvar_norming, threshold_from_trim, PsiFunction, ThresholdSchedule, TrimSchedule,
    TrimmingPlan,
};
use crate::trimming::CheckpointGrid;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// `--mode exact|float`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ModeChoice {
    #[default]
    Exact,
    Float,
}

impl ModeChoice {
    pub fn resolve(self, map: &IntervalMap) -> OrbitMode {
        match self {
            ModeChoice::Exact => OrbitMode::exact_for(map),
            ModeChoice::Float => OrbitMode::DoubleFloat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub count: usize,
    pub base: u64,
}

/// Norming sequences `d_n` for plans that fix `b_n` directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Norming {
    /// Trimmed-law norming from the tail index and slowly varying part.
    Regvar,
    /// `coef n log n`.
    NLogN { coef: f64 },
    /// `n int_0^f x dF`.
    ExpectedTruncated,
}

fn default_eps() -> f64 {
    0.1
}

fn default_w() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "camelCase", deny_unknown_fields)]
pub enum PlanSource {
    /// Trim counts from truncation levels.
    General {
        threshold: ThresholdSchedule,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_w")]
        w: f64,
        #[serde(default = "default_psi")]
        psi: PsiFunction,
    },
    /// Trim counts given; norming and truncation levels from the regularly
    /// varying tail.
    Regvar {
        trim: TrimSchedule,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_w")]
        w: f64,
        #[serde(default = "default_psi")]
        psi: PsiFunction,
    },
    /// Trim counts and norming given. Truncation levels default to
    /// `F^<-(1 - b_n/n) - 1`.
    Fixed {
        trim: TrimSchedule,
        norming: Norming,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<ThresholdSchedule>,
    },
    /// Light trimming: constant `r`.
    Light { r: usize, norming: Norming },
}

fn default_psi() -> PsiFunction {
    PsiFunction::Square
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropertyB {
    #[serde(default = "default_v")]
    pub v: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_psi")]
    pub psi: PsiFunction,
}

fn default_v() -> f64 {
    2.0
}

impl Default for PropertyB {
    fn default() -> Self {
        PropertyB { v: default_v(), eps: default_eps(), psi: PsiFunction::Square }
    }
}

fn default_levels() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}

fn default_target() -> f64 {
    1.0
}

fn default_late() -> f64 {
    1.0 / 3.0
}

/// One experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub map: IntervalMap,
    pub observable: Observable,
    #[serde(default)]
    pub mode: ModeChoice,
    /// Law of the observable; defaults to the one the map induces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailModel>,
    pub plan: PlanSource,
    pub grid: CheckpointGrid,
    pub seeds: Seeds,
    #[serde(default)]
    pub property_b: PropertyB,
    /// Value the trimmed ratio should approach.
    #[serde(default = "default_target")]
    pub ratio_target: f64,
    /// Fraction of the grid compared at each end by trend verdicts.
    #[serde(default = "default_late")]
    pub late_window: f64,
    #[serde(default = "default_levels")]
    pub variation_levels: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentSpec {
    /// Parses, checks against the shipped schema, then validates.
    pub fn from_json(s: &str) -> Result<Self, HarnessError> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        let errors: Vec<String> = schema()
            .iter_errors(&value)
            .take(5)
            .map(|e| format!("{} at `{}`", e, e.instance_path()))
            .collect();
        if !errors.is_empty() {
            return Err(HarnessError::Config(format!("schema: {}", errors.join("; "))));
        }
        let spec: ExperimentSpec = serde_json::from_value(value).map_err(|e| HarnessError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.count < 1 {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(HarnessError::Config(format!("experiment name `{}` must be a plain file name", self.name)));
        }
        if !(self.late_window > 0.0 && self.late_window <= 0.5) {
            return Err(HarnessError::Config("lateWindow must lie in (0, 1/2]".into()));
        }
        self.mode().check(&self.map).map_err(|e| HarnessError::Config(e.to_string()))?;
        self.observable.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let report = self
            .observable
            .validate_variation(&self.variation_levels)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if !report.pass {
            return Err(HarnessError::Config("observable fails the variation bounds".into()));
        }
        self.law()?;
        Ok(())
    }

    pub fn mode(&self) -> OrbitMode {
        self.mode.resolve(&self.map)
    }

    pub fn law(&self) -> Result<Law, HarnessError> {
        match &self.tail {
            Some(t) => Ok(Law::RegVar(t.clone())),
            None => self.observable.law(&self.map).ok_or_else(|| {
                HarnessError::Config("no closed-form law for this map and observable; give `tail`".into())
            }),
        }
    }

    /// The trimming plan on the experiment grid.
    pub fn plan(&self) -> Result<TrimmingPlan, HarnessError> {
        let law = self.law()?;
        let grid = &self.grid;
        let plan = match &self.plan {
            PlanSource::General { threshold, eps, w, psi } => {
                let f = threshold.on(&law, grid)?;
                general_trimming_plan(&law, &f, grid, *eps, *w, psi)?
            }
            PlanSource::Regvar { trim, eps, w, psi } => {
                let tail = regvar_tail(&law)?;
                let b = trim.on(grid);
                let d = regvar_norming(tail.alpha(), tail.slowly_varying(), &b, grid)?;
                let f = threshold_from_trim(&law, &b, grid, *w, *eps, psi)?;
                let a = expected_exceedances(&law, grid, &f);
                let mut p = TrimmingPlan::fixed(grid, &b, &f, &d, &a)?;
                p.provenance = crate::sequences::Provenance::RegvarTheorem;
                (p.eps, p.w, p.psi) = (*eps, *w, psi.clone());
                p
            }
            PlanSource::Fixed { trim, norming, threshold } => {
                fixed_plan(&law, grid, &trim.on(grid), norming, threshold.as_ref())?
            }
            PlanSource::Light { r, norming } => fixed_plan(&law, grid, &vec![*r; grid.len()], norming, None)?,
        };
        Ok(plan)
    }

    pub fn output_dir(&self) -> String {
        self.output.clone().unwrap_or_else(|| format!("results/{}", self.name))
    }
}

/// The experiment JSON schema shipped with the crate.
pub const SCHEMA: &str = include_str!("../../schema/experiment.schema.json");

fn schema() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let s: serde_json::Value = serde_json::from_str(SCHEMA).expect("schema is JSON");
        jsonschema::validator_for(&s).expect("schema compiles")
    })
}

fn regvar_tail(law: &Law) -> Result<&TailModel, HarnessError> {
    law.as_tail_model()
        .ok_or_else(|| HarnessError::Config("this plan needs a regularly varying tail with index in (0, 1)".into()))
}

fn expected_exceedances(law: &Law, grid: &CheckpointGrid, f: &[f64]) -> Vec<f64> {
    grid.checkpoints().iter().zip(f).map(|(&n, &fj)| n as f64 * law.tail(fj)).collect()
}

fn fixed_plan(
    law: &Law,
    grid: &CheckpointGrid,
    b: &[usize],
    norming: &Norming,
    threshold: Option<&ThresholdSchedule>,
) -> Result<TrimmingPlan, HarnessError> {
    let f = match threshold {
        Some(t) => t.on(law, grid)?,
        None => grid
            .checkpoints()
            .iter()
            .zip(b)
            .map(|(&n, &bj)| {
                if bj == 0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok(law.tail_quantile(bj as f64 / n as f64)? - 1.0)
                }
            })
            .collect::<Result<Vec<f64>, HarnessError>>()?,
    };
    let d = match norming {
        Norming::Regvar => {
            let t = regvar_tail(law)?;
            regvar_norming(t.alpha(), t.slowly_varying(), b, grid)?
        }
        Norming::NLogN { coef } => grid.checkpoints().iter().map(|&n| coef * n as f64 * (n as f64).ln()).collect(),
        Norming::ExpectedTruncated => grid
            .checkpoints()
            .iter()
            .zip(&f)
            .map(|(&n, &fj)| Ok(n as f64 * law.truncated_mean(fj)?))
            .collect::<Result<Vec<f64>, HarnessError>>()?,
    };
    let a = expected_exceedances(law, grid, &f);
    Ok(TrimmingPlan::fixed(grid, b, &f, &d, &a)?)
}
