use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::forward::{Condition, ScattererClass, ScattererSpec, Shape};
use crate::geometry::RuleSpec;
use crate::phaseless::PairScheme;
use crate::specfun::SeriesTruncation;
use crate::{Dimension, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Forward,
    Spectrum,
    Translation,
    Retrieve,
    Compare,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Forward,
        Task::Spectrum,
        Task::Translation,
        Task::Retrieve,
        Task::Compare,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Task::Forward => "forward",
            Task::Spectrum => "spectrum",
            Task::Translation => "translation",
            Task::Retrieve => "retrieve",
            Task::Compare => "compare",
        }
    }

    pub fn parse(tag: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.tag() == tag)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A scatterer in a scenario; the wavenumber comes from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererEntry {
    pub shape: Shape,
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offset: Vec<f64>,
}

impl ScattererEntry {
    pub fn spec(&self, k: f64) -> ScattererSpec {
        ScattererSpec {
            shape: self.shape.clone(),
            condition: self.condition,
            wavenumber: k,
            offset: self.offset.clone(),
        }
    }
}

/// Per-task overrides. Unset values take the defaults of [`Tolerances::resolved`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normality: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitarity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circle: Option<f64>,
    /// Lower bound on the imaginary part of floored-in eigenvalues.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_imag: Option<f64>,
    /// Required `Re(tail)·limit`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
    /// Relative error of the computed spectrum against the closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reciprocity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nystrom_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_convergence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub translation_m_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_max_r_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_min_r_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_max_m_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_min_m_diff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTolerances {
    pub normality: f64,
    pub relation: f64,
    pub unitarity: f64,
    pub circle: f64,
    pub min_imag: f64,
    pub tail: f64,
    pub eigen_oracle: f64,
    pub interior_zero: f64,
    pub reciprocity: f64,
    pub nystrom_oracle: f64,
    pub self_convergence: f64,
    pub retrieval: f64,
    pub translation_r: f64,
    pub translation_m_min: f64,
}

impl Tolerances {
    pub fn resolved(&self, dimension: Dimension) -> ResolvedTolerances {
        let three = dimension == Dimension::Three;
        ResolvedTolerances {
            normality: self.normality.unwrap_or(1e-8),
            relation: self.relation.unwrap_or(1e-8),
            unitarity: self.unitarity.unwrap_or(1e-8),
            circle: self.circle.unwrap_or(if three { 1e-7 } else { 1e-6 }),
            min_imag: self.min_imag.unwrap_or(-1e-8),
            tail: self.tail.unwrap_or(0.99),
            eigen_oracle: self.eigen_oracle.unwrap_or(1e-8),
            interior_zero: self.interior_zero.unwrap_or(1e-8),
            reciprocity: self.reciprocity.unwrap_or(1e-8),
            nystrom_oracle: self.nystrom_oracle.unwrap_or(1e-6),
            self_convergence: self.self_convergence.unwrap_or(1e-8),
            retrieval: self.retrieval.unwrap_or(if three { 1e-6 } else { 1e-4 }),
            translation_r: self.translation_r.unwrap_or(1e-12),
            translation_m_min: self.translation_m_min.unwrap_or(1e-3),
        }
    }

    fn violations(&self) -> Vec<String> {
        let fields = [
            ("normality", self.normality),
            ("relation", self.relation),
            ("unitarity", self.unitarity),
            ("circle", self.circle),
            ("min_imag", self.min_imag),
            ("tail", self.tail),
            ("eigen_oracle", self.eigen_oracle),
            ("interior_zero", self.interior_zero),
            ("reciprocity", self.reciprocity),
            ("nystrom_oracle", self.nystrom_oracle),
            ("self_convergence", self.self_convergence),
            ("retrieval", self.retrieval),
            ("translation_r", self.translation_r),
            ("translation_m_min", self.translation_m_min),
            ("compare_max_r_diff", self.compare_max_r_diff),
            ("compare_min_r_diff", self.compare_min_r_diff),
            ("compare_max_m_diff", self.compare_max_m_diff),
            ("compare_min_m_diff", self.compare_min_m_diff),
        ];
        fields
            .iter()
            .filter_map(|(name, v)| match v {
                Some(v) if !v.is_finite() => Some(format!("tolerances.{name} must be finite")),
                _ => None,
            })
            .collect()
    }
}

/// Knobs of individual tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskOptions {
    /// Rule for the retrieval task, whose data grow with the cube of the node count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval_rule: Option<RuleSpec>,
    /// Finer rule on which the wrong-sign count must not grow.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_rule: Option<RuleSpec>,
    /// Highest order compared against closed-form eigenvalues.
    pub oracle_max_order: usize,
    /// Expect an eigenvalue of (near) zero modulus, as at an interior
    /// Dirichlet eigenvalue.
    pub expect_interior_zero: bool,
    /// Scatterer class assumed by retrieval; defaults to the class of the
    /// scatterer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_hint: Option<ScattererClass>,
    /// The retrieve task passes when disambiguation reports a contradiction.
    pub expect_disambiguation_failure: bool,
    pub translation_shifts: usize,
    pub shift_min: f64,
    pub shift_max: f64,
    pub pair_scheme: PairScheme,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self {
            retrieval_rule: None,
            refined_rule: None,
            oracle_max_order: 8,
            expect_interior_zero: false,
            class_hint: None,
            expect_disambiguation_failure: false,
            translation_shifts: 20,
            shift_min: 0.05,
            shift_max: 1.0,
            pair_scheme: PairScheme::FixedReference { reference: 0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub scatterers: Vec<ScattererEntry>,
    pub k: f64,
    pub rule: RuleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<SeriesTruncation>,
    pub tasks: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: TaskOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Seeds the random shifts of the translation task.
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn parsed_tasks(&self) -> Vec<Task> {
        self.tasks.iter().filter_map(|t| Task::parse(t)).collect()
    }

    pub fn specs(&self) -> Vec<ScattererSpec> {
        self.scatterers.iter().map(|s| s.spec(self.k)).collect()
    }

    /// Every problem with the config, so one run reports them all.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.name.trim().is_empty() {
            v.push("name must not be empty".into());
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            v.push(format!("k must be positive and finite, got {}", self.k));
        }
        if self.tasks.is_empty() {
            v.push("tasks must list at least one task".into());
        }
        for t in &self.tasks {
            if Task::parse(t).is_none() {
                let known: Vec<&str> = Task::ALL.iter().map(|t| t.tag()).collect();
                v.push(format!(
                    "unknown task {t:?} (expected one of {})",
                    known.join(", ")
                ));
            }
        }
        let tasks = self.parsed_tasks();
        if self.scatterers.is_empty() {
            v.push("at least one scatterer is required".into());
        }
        if self.scatterers.len() > 2 {
            v.push(format!(
                "at most two scatterers are allowed, got {}",
                self.scatterers.len()
            ));
        }
        if tasks.contains(&Task::Compare) && self.scatterers.len() != 2 {
            v.push(format!(
                "task compare requires two scatterers, got {}",
                self.scatterers.len()
            ));
        }
        let rule_dim = match self.rule.build() {
            Ok(r) => Some(r.dimension()),
            Err(e) => {
                v.push(format!("rule: {e}"));
                None
            }
        };
        for (which, r) in [
            ("options.retrieval_rule", &self.options.retrieval_rule),
            ("options.refined_rule", &self.options.refined_rule),
        ] {
            if let Some(r) = r {
                match r.build() {
                    Ok(b) if Some(b.dimension()) != rule_dim && rule_dim.is_some() => {
                        v.push(format!("{which} has a different dimension than rule"))
                    }
                    Ok(_) => {}
                    Err(e) => v.push(format!("{which}: {e}")),
                }
            }
        }
        for (i, s) in self.specs().iter().enumerate() {
            if self.k > 0.0 && self.k.is_finite() {
                for msg in s.violations() {
                    v.push(format!("scatterers[{i}]: {msg}"));
                }
            }
            if let Some(d) = rule_dim {
                if s.dimension() != d {
                    v.push(format!(
                        "scatterers[{i}] is {}-dimensional but the rule is {}-dimensional",
                        s.dimension().as_usize(),
                        d.as_usize()
                    ));
                }
            }
        }
        if let Some(t) = self.truncation {
            if !(t.tail_tolerance > 0.0 && t.tail_tolerance.is_finite()) {
                v.push("truncation.tail_tolerance must be positive".into());
            }
        }
        let o = &self.options;
        if tasks.contains(&Task::Translation) {
            if o.translation_shifts == 0 {
                v.push("options.translation_shifts must be positive".into());
            }
            if !(o.shift_min > 0.0 && o.shift_min <= o.shift_max && o.shift_max.is_finite()) {
                v.push("options.shift_min and shift_max must satisfy 0 < min <= max".into());
            }
        }
        if let PairScheme::FixedReference { reference } = o.pair_scheme {
            if let Ok(r) = self.rule.build() {
                if reference >= r.len() {
                    v.push(format!(
                        "options.pair_scheme reference {reference} exceeds the {} rule nodes",
                        r.len()
                    ));
                }
            }
        }
        v.extend(self.tolerances.violations());
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}
