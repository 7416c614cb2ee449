//! Running a config through the pipeline and the resulting document.

use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{AnalysisConfig, Task};
use crate::bertrand::{
    construct_mate, fit_bertrand_coefficients, verify_couple, BertrandFit, CoupleCheck,
    CoupleReport, CurveFlags, MateMode,
};
use crate::curve::build_curve;
use crate::error::Error;
use crate::frenet::{self, ClassificationReport, FrenetData};
use crate::stats::Summary;

pub const TOOL_VERSION: &str = concat!("liefrenet ", env!("CARGO_PKG_VERSION"));

/// Per-sample table over the trimmed window of α.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub s: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_g: Vec<f64>,
    pub harmonic: Vec<f64>,
    pub sigma_n: Vec<f64>,
    pub sigma_n_defined: Vec<bool>,
    pub retained: Vec<bool>,
    pub couple: Option<CoupleColumns>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupleColumns {
    pub distance: Vec<f64>,
    pub tangent_angle: Vec<f64>,
    pub normal_alignment: Vec<f64>,
    pub product: Vec<f64>,
}

impl SeriesTable {
    fn new(fd: &FrenetData) -> Self {
        let w = fd.window();
        let torsion = fd.torsion();
        let sigma = fd.sigma();
        let masked = |v: &[f64]| fd.masked(v)[w.clone()].to_vec();
        let nan = vec![f64::NAN; w.len()];
        Self {
            s: fd.s()[w.clone()].to_vec(),
            kappa: masked(fd.kappa()),
            tau: torsion.map_or(nan.clone(), |t| masked(&t.tau)),
            tau_g: torsion.map_or(nan.clone(), |t| masked(&t.tau_g)),
            harmonic: torsion.map_or(nan.clone(), |t| masked(&t.harmonic)),
            sigma_n: sigma.map_or(nan, |s| s.values[w.clone()].to_vec()),
            sigma_n_defined: sigma.map_or(vec![false; w.len()], |s| s.defined[w.clone()].to_vec()),
            retained: fd.retained()[w.clone()].to_vec(),
            couple: None,
        }
    }

    fn attach(&mut self, fd: &FrenetData, couple: &CoupleReport) {
        let w = fd.window();
        self.couple = Some(CoupleColumns {
            distance: couple.distance[w.clone()].to_vec(),
            tangent_angle: couple.tangent_angle[w.clone()].to_vec(),
            normal_alignment: couple.normal_alignment[w.clone()].to_vec(),
            product: couple.product[w].to_vec(),
        });
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Numeric columns in output order, with their header names.
    pub fn columns(&self) -> Vec<(&'static str, Column<'_>)> {
        let mut cols = vec![
            ("s", Column::Real(&self.s)),
            ("kappa", Column::Real(&self.kappa)),
            ("tau", Column::Real(&self.tau)),
            ("tau_g", Column::Real(&self.tau_g)),
            ("H", Column::Real(&self.harmonic)),
            ("sigma_n", Column::Real(&self.sigma_n)),
            ("sigma_n_defined", Column::Flag(&self.sigma_n_defined)),
        ];
        if let Some(c) = &self.couple {
            cols.extend([
                ("distance", Column::Real(&c.distance)),
                ("tangent_angle", Column::Real(&c.tangent_angle)),
                ("normal_alignment", Column::Real(&c.normal_alignment)),
                ("product", Column::Real(&c.product)),
            ]);
        }
        cols
    }
}

pub enum Column<'a> {
    Real(&'a [f64]),
    Flag(&'a [bool]),
}

impl Serialize for SeriesTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = Map::new();
        for (name, col) in self.columns() {
            let v = match col {
                Column::Real(x) => serde_json::to_value(x),
                Column::Flag(x) => serde_json::to_value(x),
            }
            .map_err(serde::ser::Error::custom)?;
            map.insert(name.into(), v);
        }
        map.insert(
            "retained".into(),
            serde_json::to_value(&self.retained).map_err(serde::ser::Error::custom)?,
        );
        Value::Object(map).serialize(s)
    }
}

/// Summaries of the couple series plus the named theorem checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleSummary {
    pub mode: MateMode,
    pub lambda: f64,
    pub mu: f64,
    /// Whether the checks are asserted (abelian) or only reported.
    pub asserted: bool,
    pub expected_tangent_angle: f64,
    pub alpha_flags: CurveFlags,
    pub beta_flags: CurveFlags,
    pub series: Vec<(String, Summary)>,
    pub checks: Vec<CoupleCheck>,
}

impl CoupleSummary {
    fn new(mode: MateMode, couple: &CoupleReport, g_abelian: bool) -> Self {
        Self {
            mode,
            lambda: couple.lambda,
            mu: couple.mu,
            asserted: g_abelian,
            expected_tangent_angle: couple.expected_tangent_angle,
            alpha_flags: couple.alpha_flags,
            beta_flags: couple.beta_flags,
            series: couple
                .series()
                .into_iter()
                .map(|(name, x)| (name.to_string(), Summary::of(x)))
                .collect(),
            checks: couple.checks.clone(),
        }
    }

    pub fn summary(&self, name: &str) -> Option<&Summary> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn check(&self, name: &str) -> Option<&CoupleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub task: Task,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallClock {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub config: AnalysisConfig,
    pub series: Option<SeriesTable>,
    pub classification: Option<ClassificationReport>,
    pub bertrand_fit: Option<BertrandFit>,
    pub couple: Option<CoupleSummary>,
    pub diagnostics: Vec<Diagnostic>,
    pub tool_version: String,
    pub wall_clock: WallClock,
}

impl ReportDocument {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// The document as JSON, keys in schema order. `wall_clock` is last so
    /// that it can be dropped for comparisons.
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        let v = |x: Result<Value, serde_json::Error>| x.expect("report serializes");
        map.insert("config".into(), self.config.to_value());
        map.insert("series".into(), v(serde_json::to_value(&self.series)));
        map.insert(
            "classification".into(),
            v(serde_json::to_value(&self.classification)),
        );
        map.insert(
            "bertrand_fit".into(),
            v(serde_json::to_value(&self.bertrand_fit)),
        );
        let couple = match &self.couple {
            None => Value::Null,
            Some(c) => {
                let mut m = match v(serde_json::to_value(c)) {
                    Value::Object(m) => m,
                    _ => unreachable!(),
                };
                let series: Map<String, Value> = c
                    .series
                    .iter()
                    .map(|(n, s)| (n.clone(), v(serde_json::to_value(s))))
                    .collect();
                m.insert("series".into(), Value::Object(series));
                Value::Object(m)
            }
        };
        map.insert("couple".into(), couple);
        map.insert(
            "diagnostics".into(),
            v(serde_json::to_value(&self.diagnostics)),
        );
        map.insert("tool_version".into(), self.tool_version.clone().into());
        map.insert(
            "wall_clock".into(),
            v(serde_json::to_value(self.wall_clock)),
        );
        Value::Object(map)
    }
}

/// Everything computed by [`run_detailed`], for callers that need the full
/// series rather than the report summaries.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub alpha: Option<FrenetData>,
    pub fit_used: Option<BertrandFit>,
    pub mate: Option<crate::bertrand::MateCurve>,
    pub couple: Option<CoupleReport>,
}

fn diagnose(task: Task, e: impl std::fmt::Display, kind: &str) -> Diagnostic {
    Diagnostic {
        task,
        kind: kind.to_string(),
        message: e.to_string(),
    }
}

fn error_diagnostic(task: Task, e: &Error) -> Diagnostic {
    diagnose(task, e, e.kind())
}

/// Runs the planned tasks in order. A failing task is recorded as a
/// diagnostic and the tasks depending on it are skipped.
pub fn run_detailed(config: &AnalysisConfig) -> (ReportDocument, RunArtifacts) {
    let started = Instant::now();
    let mut doc = ReportDocument {
        config: config.clone(),
        series: None,
        classification: None,
        bertrand_fit: None,
        couple: None,
        diagnostics: Vec::new(),
        tool_version: TOOL_VERSION.to_string(),
        wall_clock: WallClock {
            elapsed_seconds: 0.0,
        },
    };
    let mut art = RunArtifacts {
        alpha: None,
        fit_used: None,
        mate: None,
        couple: None,
    };
    execute(config, &mut doc, &mut art);
    doc.wall_clock.elapsed_seconds = started.elapsed().as_secs_f64();
    (doc, art)
}

pub fn run(config: &AnalysisConfig) -> ReportDocument {
    run_detailed(config).0
}

fn execute(config: &AnalysisConfig, doc: &mut ReportDocument, art: &mut RunArtifacts) {
    let plan = config.planned_tasks();
    let tol = &config.tolerances;
    let spec = match config.curve_spec() {
        Ok(s) => s,
        Err(e) => {
            doc.diagnostics.push(diagnose(Task::Frenet, &e, e.kind()));
            return;
        }
    };
    let alpha = match build_curve(&spec).and_then(|c| frenet::analyze(&c, &tol.frenet())) {
        Ok(fd) => fd,
        Err(e) => {
            doc.diagnostics.push(error_diagnostic(Task::Frenet, &e));
            return;
        }
    };
    doc.series = Some(SeriesTable::new(&alpha));

    if plan.contains(&Task::Classify) {
        match frenet::classify(&alpha, &tol.classify()) {
            Ok(r) => doc.classification = Some(r),
            Err(e) => doc.diagnostics.push(error_diagnostic(Task::Classify, &e)),
        }
    }

    if plan.contains(&Task::Bertrand) {
        let kappa = alpha.retained_values(alpha.kappa());
        let harmonic = alpha.retained_values(&alpha.torsion().expect("analyzed").harmonic);
        match fit_bertrand_coefficients(&kappa, &harmonic) {
            Ok(fit) => doc.bertrand_fit = Some(fit),
            Err(e) => doc.diagnostics.push(error_diagnostic(Task::Bertrand, &e)),
        }

        if let (true, Some(fit)) = (plan.contains(&Task::Mate), doc.bertrand_fit.clone()) {
            let fit_used = match config.mate.lambda {
                None => Ok(fit),
                Some(l) => BertrandFit::with_lambda(&kappa, &harmonic, l),
            };
            let mate = fit_used.and_then(|f| {
                let m =
                    construct_mate(&alpha, f.lambda, config.mate.mode, Some(&f), &tol.frenet())?;
                Ok((f, m))
            });
            match mate {
                Ok((f, m)) => {
                    art.fit_used = Some(f);
                    art.mate = Some(m);
                }
                Err(e) => doc.diagnostics.push(error_diagnostic(Task::Mate, &e)),
            }
        }

        if let (true, Some(f), Some(m)) = (plan.contains(&Task::Verify), &art.fit_used, &art.mate) {
            match verify_couple(&alpha, m, f, &tol.classify()) {
                Ok(c) => {
                    if let Some(t) = doc.series.as_mut() {
                        t.attach(&alpha, &c);
                    }
                    doc.couple = Some(CoupleSummary::new(m.mode, &c, alpha.group().is_abelian()));
                    art.couple = Some(c);
                }
                Err(e) => doc.diagnostics.push(error_diagnostic(Task::Verify, &e)),
            }
        }
    }
    art.alpha = Some(alpha);
}
