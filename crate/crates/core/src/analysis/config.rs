//! Analysis configuration: a flat JSON object naming the group, the curve
//! source, the tasks to run and their tolerances.
//!
//! ```json
//! {"group": "abelian", "family": "abelian_helix", "a": 3, "b": 4, "tasks": ["frenet"]}
//! ```
//!
//! The curve source is one of `family` (with the family's parameters at top
//! level), `points` (rows of `t` followed by group coordinates) or `csv` (a
//! file with the same columns and a header row).

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bertrand::MateMode;
use crate::curve::{CurveSource, CurveSpec, Family, DEFAULT_SAMPLES, MIN_SAMPLES};
use crate::frenet::{
    ClassifyOptions, FrenetOptions, DEFAULT_CLASSIFY_TOL, DEFAULT_H_MIN, DEFAULT_KAPPA_MIN,
};
use crate::lie::{GroupKind, GroupStructure};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{}", describe_parse(.line, .column, .field, .message))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("invalid config: {0}")]
    Validation(String),
}

fn describe_parse(
    line: &Option<usize>,
    column: &Option<usize>,
    field: &Option<String>,
    message: &str,
) -> String {
    let mut out = String::from("config parse error");
    if let Some(l) = line {
        out.push_str(&format!(" at line {l}"));
        if let Some(c) = column {
            out.push_str(&format!(", column {c}"));
        }
    }
    if let Some(f) = field {
        out.push_str(&format!(" in field `{f}`"));
    }
    out.push_str(": ");
    out.push_str(message);
    out
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "ParseError",
            ConfigError::Validation(_) => "ValidationError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Frenet,
    Classify,
    Bertrand,
    Mate,
    Verify,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Frenet,
        Task::Classify,
        Task::Bertrand,
        Task::Mate,
        Task::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Frenet => "frenet",
            Task::Classify => "classify",
            Task::Bertrand => "bertrand",
            Task::Mate => "mate",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub classify_tol: f64,
    pub kappa_min: f64,
    pub h_min: f64,
    /// Count general helices as (degenerate) slant helices.
    pub helix_as_slant: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            classify_tol: DEFAULT_CLASSIFY_TOL,
            kappa_min: DEFAULT_KAPPA_MIN,
            h_min: DEFAULT_H_MIN,
            helix_as_slant: false,
        }
    }
}

impl Tolerances {
    pub fn frenet(&self) -> FrenetOptions {
        FrenetOptions {
            kappa_min: self.kappa_min,
            h_min: self.h_min,
        }
    }

    pub fn classify(&self) -> ClassifyOptions {
        ClassifyOptions {
            tol: self.classify_tol,
            helix_as_slant: self.helix_as_slant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    /// Structure constant `c` in `[Xi, Xj] = c εijk Xk`; the group default
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MateOptions {
    /// Offset distance; the fitted `λ` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub mode: MateMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputOptions {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceConfig {
    Family(Family),
    Points(Vec<Vec<f64>>),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub group: GroupKind,
    pub source: SourceConfig,
    pub t_domain: Option<[f64; 2]>,
    pub n_samples: usize,
    pub metric: MetricOptions,
    pub tolerances: Tolerances,
    pub tasks: Vec<Task>,
    pub mate: MateOptions,
    pub output: OutputOptions,
}

const SOURCE_KEYS: [&str; 3] = ["family", "points", "csv"];

/// Position of the first occurrence of `"key"` in the text, 1-based.
fn locate(text: &str, key: &str) -> (Option<usize>, Option<usize>) {
    let needle = format!("\"{key}\"");
    match text.find(&needle) {
        Some(offset) => {
            let before = &text[..offset];
            let line = before.matches('\n').count() + 1;
            let column = offset - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            (Some(line), Some(column))
        }
        None => (None, None),
    }
}

fn field_error(text: &str, field: &str, message: impl Into<String>) -> ConfigError {
    let (line, column) = locate(text, field);
    ConfigError::Parse {
        line,
        column,
        field: Some(field.to_string()),
        message: message.into(),
    }
}

/// Field named in a serde "unknown field" message, if any.
fn unknown_field_name(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

fn take<T: DeserializeOwned>(
    text: &str,
    map: &mut Map<String, Value>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| {
            let msg = e.to_string();
            match unknown_field_name(&msg) {
                Some(inner) => field_error(text, inner, format!("{key}: {msg}")),
                None => field_error(text, key, msg),
            }
        }),
    }
}

/// Strict parse of a config document. Defaults are filled in; invariants are
/// checked by [`AnalysisConfig::validate`].
pub fn parse_config(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(ConfigError::Parse {
            line: Some(1),
            column: Some(1),
            field: None,
            message: "config must be a JSON object".into(),
        });
    };

    let group: GroupKind = take(text, &mut map, "group")?
        .ok_or_else(|| field_error(text, "group", "missing required field"))?;
    let t_domain = take(text, &mut map, "t_domain")?;
    let n_samples = take(text, &mut map, "n_samples")?.unwrap_or(DEFAULT_SAMPLES);
    let metric = take(text, &mut map, "metric")?.unwrap_or_default();
    let tolerances = take(text, &mut map, "tolerances")?.unwrap_or_default();
    let tasks = take(text, &mut map, "tasks")?
        .ok_or_else(|| field_error(text, "tasks", "missing required field"))?;
    let mate = take(text, &mut map, "mate")?.unwrap_or_default();
    let output = take(text, &mut map, "output")?.unwrap_or_default();

    let present: Vec<&str> = SOURCE_KEYS
        .iter()
        .copied()
        .filter(|k| map.contains_key(*k))
        .collect();
    let source = match present.as_slice() {
        [] => {
            return Err(match map.keys().next() {
                Some(k) => field_error(text, k, "unknown field"),
                None => ConfigError::Parse {
                    line: None,
                    column: None,
                    field: None,
                    message: "no curve source: give one of `family`, `points` or `csv`".into(),
                },
            })
        }
        ["points"] => SourceConfig::Points(take(text, &mut map, "points")?.unwrap_or_default()),
        ["csv"] => SourceConfig::Csv(take(text, &mut map, "csv")?.unwrap_or_default()),
        ["family"] => {
            let name = match map.get("family") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(field_error(text, "family", "expected a family name")),
            };
            let info =
                Family::lookup(&name).map_err(|e| field_error(text, "family", e.to_string()))?;
            if let Some(k) = map
                .keys()
                .find(|k| k.as_str() != "family" && !info.params.contains(&k.as_str()))
            {
                return Err(field_error(
                    text,
                    k,
                    format!("unknown field for family `{name}`"),
                ));
            }
            let rest = std::mem::take(&mut map);
            let family: Family = serde_json::from_value(Value::Object(rest)).map_err(|e| {
                let msg = e.to_string();
                let missing = msg
                    .strip_prefix("missing field `")
                    .and_then(|r| r.split('`').next())
                    .map(str::to_string);
                match missing {
                    Some(f) => ConfigError::Parse {
                        line: None,
                        column: None,
                        field: Some(f),
                        message: format!("family `{name}`: {msg}"),
                    },
                    None => field_error(text, "family", format!("family `{name}`: {msg}")),
                }
            })?;
            SourceConfig::Family(family)
        }
        many => {
            return Err(field_error(
                text,
                many[1],
                format!("give only one curve source, found {}", many.join(" and ")),
            ))
        }
    };
    if let Some(k) = map.keys().next() {
        return Err(field_error(text, k, "unknown field"));
    }

    Ok(AnalysisConfig {
        group,
        source,
        t_domain,
        n_samples,
        metric,
        tolerances,
        tasks,
        mate,
        output,
    })
}

/// Parse and validate.
pub fn load_config(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let config = parse_config(text)?;
    config.validate()?;
    Ok(config)
}

impl AnalysisConfig {
    pub fn has_task(&self, t: Task) -> bool {
        self.tasks.contains(&t)
    }

    /// Requested tasks plus their implied prerequisites, in execution order.
    pub fn planned_tasks(&self) -> Vec<Task> {
        let mut tasks: Vec<Task> = self.tasks.clone();
        if self.has_task(Task::Verify) {
            tasks.push(Task::Mate);
        }
        tasks.push(Task::Frenet);
        tasks.sort();
        tasks.dedup();
        tasks
    }

    pub fn group_structure(&self) -> Result<GroupStructure, ConfigError> {
        match self.metric.bracket_scale {
            None => Ok(GroupStructure::with_default_scale(self.group)),
            Some(c) => GroupStructure::new(self.group, c)
                .map_err(|e| ConfigError::Validation(format!("metric.bracket_scale: {e}"))),
        }
    }

    pub fn curve_spec(&self) -> Result<CurveSpec, ConfigError> {
        let source = match &self.source {
            SourceConfig::Family(f) => CurveSource::Family(f.clone()),
            SourceConfig::Points(p) => CurveSource::Points(p.clone()),
            SourceConfig::Csv(p) => CurveSource::Csv(p.clone()),
        };
        Ok(CurveSpec {
            group: self.group_structure()?,
            source,
            t_domain: match &self.source {
                SourceConfig::Family(f) => Some(self.t_domain.unwrap_or(f.info().default_domain)),
                _ => self.t_domain,
            },
            n_samples: self.n_samples,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Validation(m));
        if self.tasks.is_empty() {
            return invalid("tasks must not be empty".into());
        }
        for t in [Task::Mate, Task::Verify] {
            if self.has_task(t) && !self.has_task(Task::Bertrand) {
                return invalid(format!("task `{}` requires task `bertrand`", t.name()));
            }
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("classify_tol", tol.classify_tol),
            ("kappa_min", tol.kappa_min),
            ("h_min", tol.h_min),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        if let Some(l) = self.mate.lambda {
            if !(l.is_finite() && l != 0.0) {
                return invalid(format!("mate.lambda must be finite and nonzero, got {l}"));
            }
        }
        if self.mate.mode == MateMode::Ambient && self.group != GroupKind::AbelianR3 {
            return invalid(format!(
                "mate.mode `ambient` is only available for the abelian group, not {}",
                self.group.name()
            ));
        }
        if self.n_samples < MIN_SAMPLES {
            return invalid(format!(
                "n_samples must be at least {MIN_SAMPLES}, got {}",
                self.n_samples
            ));
        }
        if self.output.formats.is_empty() {
            return invalid("output.formats must not be empty".into());
        }
        self.curve_spec()?
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))
    }

    /// The config as a JSON object in the schema [`parse_config`] reads, with
    /// every default spelled out.
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("group".into(), serde_json::to_value(self.group).unwrap());
        match &self.source {
            SourceConfig::Family(f) => {
                if let Value::Object(fields) = serde_json::to_value(f).expect("family serializes") {
                    map.extend(fields);
                }
            }
            SourceConfig::Points(p) => {
                map.insert("points".into(), serde_json::to_value(p).unwrap());
            }
            SourceConfig::Csv(p) => {
                map.insert("csv".into(), serde_json::to_value(p).unwrap());
            }
        }
        if let Some(d) = self.t_domain {
            map.insert("t_domain".into(), serde_json::to_value(d).unwrap());
        }
        map.insert("n_samples".into(), self.n_samples.into());
        map.insert("metric".into(), serde_json::to_value(self.metric).unwrap());
        map.insert(
            "tolerances".into(),
            serde_json::to_value(self.tolerances).unwrap(),
        );
        map.insert("tasks".into(), serde_json::to_value(&self.tasks).unwrap());
        map.insert("mate".into(), serde_json::to_value(self.mate).unwrap());
        map.insert("output".into(), serde_json::to_value(&self.output).unwrap());
        Value::Object(map)
    }
}

impl Serialize for AnalysisConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}
