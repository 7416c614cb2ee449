//! The builtin verification fleet: curves with known classification, the
//! abelian Bertrand couples on which the couple theorems are asserted, and
//! non-abelian geodesic-offset couples whose residuals are only reported.
//!
//! Grids for couples are deliberately coarse. Mate torsion is five nested
//! derivatives away from the sampled points, so its roundoff grows like
//! `h⁻⁵` while the truncation error of the fourth-order stencils shrinks
//! like `h⁴`; the sample counts below sit near the crossover.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::config::{load_config, AnalysisConfig};
use super::emit::{emit, to_json_string};
use super::report::{run_detailed, ReportDocument, RunArtifacts};
use crate::lie::GroupKind;

pub const FLEET_FILE: &str = "fleet.json";

/// Tolerance on `τ_G ≡ c/2` for the group-torsion expectation.
const GROUP_TORSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Expectation {
    pub general_helix: Option<bool>,
    pub slant_helix: Option<bool>,
    pub mannheim: Option<bool>,
    pub bertrand: Option<bool>,
    /// Every asserted couple check passes.
    pub couple: bool,
    /// Constant group torsion at every retained sample.
    pub tau_g: Option<f64>,
    /// The run must fail with this error kind.
    pub diagnostic: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct FleetMember {
    pub name: &'static str,
    pub config: AnalysisConfig,
    pub expect: Expectation,
}

const ALL_TASKS: [&str; 5] = ["frenet", "classify", "bertrand", "mate", "verify"];

fn member(name: &'static str, config: serde_json::Value, expect: Expectation) -> FleetMember {
    let config = load_config(&config.to_string())
        .unwrap_or_else(|e| panic!("builtin fleet config `{name}` is invalid: {e}"));
    FleetMember {
        name,
        config,
        expect,
    }
}

fn helix_couple(name: &'static str, a: f64, b: f64, lambda: f64) -> FleetMember {
    member(
        name,
        json!({"group": "abelian", "family": "abelian_helix", "a": a, "b": b,
               "n_samples": 512, "tasks": ALL_TASKS, "mate": {"lambda": lambda}}),
        Expectation {
            general_helix: Some(true),
            slant_helix: Some(false),
            bertrand: Some(true),
            couple: true,
            ..Expectation::default()
        },
    )
}

fn exp_product(name: &'static str, group: &str, c: f64) -> FleetMember {
    member(
        name,
        json!({"group": group, "family": "exp_product",
               "f1": {"poly": [0, 1]}, "f2": {"sin": [{"amp": 0.5, "freq": 1}]}, "f3": {"poly": [0, 0, 0.3]},
               "t_domain": [0, 2], "tasks": ["frenet", "classify"]}),
        Expectation {
            tau_g: Some(c / 2.0),
            ..Expectation::default()
        },
    )
}

fn geodesic_couple(name: &'static str, group: &str) -> FleetMember {
    member(
        name,
        json!({"group": group, "family": "bertrand_ode",
               "kappa": {"poly": [0.4], "sin": [{"amp": 0.1, "freq": 1}]}, "lambda": 0.5, "mu": 1,
               "t_domain": [0, 3], "n_samples": 256, "tasks": ALL_TASKS}),
        Expectation {
            bertrand: Some(true),
            ..Expectation::default()
        },
    )
}

pub fn fleet_members() -> Vec<FleetMember> {
    let not_special = Expectation {
        general_helix: Some(false),
        slant_helix: Some(false),
        mannheim: Some(false),
        bertrand: Some(false),
        ..Expectation::default()
    };
    let bertrand_couple = |slant: bool| Expectation {
        general_helix: Some(false),
        slant_helix: Some(slant),
        bertrand: Some(true),
        couple: true,
        ..Expectation::default()
    };
    vec![
        helix_couple("helix_3_4", 3.0, 4.0, 1.0),
        helix_couple("helix_2_1", 2.0, 1.0, 0.5),
        helix_couple("helix_1_3", 1.0, 3.0, 0.5),
        member(
            "bertrand_sine",
            json!({"group": "abelian", "family": "bertrand_ode",
                   "kappa": {"poly": [0.2], "sin": [{"amp": 0.1, "freq": 1}]}, "lambda": 1, "mu": 2,
                   "t_domain": [0.3, std::f64::consts::PI - 0.3], "n_samples": 96, "tasks": ALL_TASKS}),
            bertrand_couple(false),
        ),
        member(
            "bertrand_linear",
            json!({"group": "abelian", "family": "bertrand_ode",
                   "kappa": {"poly": [0.3, 0.05]}, "lambda": 1, "mu": 3,
                   "t_domain": [0, 8], "n_samples": 128, "tasks": ALL_TASKS}),
            bertrand_couple(false),
        ),
        member(
            "bertrand_slant",
            json!({"group": "abelian", "family": "bertrand_slant_ode",
                   "lambda": 1, "mu": 3, "sigma": 5, "h0": 0.5,
                   "t_domain": [0, 6], "n_samples": 128, "tasks": ALL_TASKS}),
            bertrand_couple(true),
        ),
        member(
            "slant_helix",
            json!({"group": "abelian", "family": "slant_helix_ode", "sigma": 2, "h": {"poly": [-1, 1]},
                   "t_domain": [0, 3], "n_samples": 1024, "tasks": ["frenet", "classify"]}),
            Expectation {
                slant_helix: Some(true),
                general_helix: Some(false),
                mannheim: Some(false),
                bertrand: Some(false),
                ..Expectation::default()
            },
        ),
        member(
            "mannheim",
            json!({"group": "abelian", "family": "mannheim_ode", "lambda": 0.5, "h": {"poly": [0.5, 0.3]},
                   "tasks": ["frenet", "classify"]}),
            Expectation {
                mannheim: Some(true),
                general_helix: Some(false),
                bertrand: Some(false),
                ..Expectation::default()
            },
        ),
        member(
            "non_bertrand",
            json!({"group": "abelian", "family": "frenet_ode",
                   "kappa": {"poly": [1], "den": [1, 0, 1]}, "tau": {"poly": [0.3, 0.1]},
                   "t_domain": [0, 6], "tasks": ["frenet", "classify"]}),
            not_special,
        ),
        exp_product("so3_exp_product", "so3", 1.0),
        exp_product("su2_exp_product", "su2", 2.0),
        member(
            "su2_geodesic",
            json!({"group": "su2", "family": "one_param_subgroup", "v": [0.6, 0, 0.8], "tasks": ["frenet"]}),
            Expectation {
                diagnostic: Some("EverywhereDegenerate"),
                ..Expectation::default()
            },
        ),
        geodesic_couple("so3_couple", "so3"),
        geodesic_couple("su2_couple", "su2"),
    ]
}

/// Residual series of a couple outside the abelian case, on the retained
/// samples: `τ_Gβ - τ_G`, `d(α, β) - |λ|` and the relative deviation of
/// `κ κ_β H H_β` from its mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploratorySeries {
    pub name: String,
    pub group: GroupKind,
    pub lambda: f64,
    pub s: Vec<f64>,
    pub tau_g_gap: Vec<f64>,
    pub distance_gap: Vec<f64>,
    pub product_deviation: Vec<f64>,
    pub max_abs_tau_g_gap: f64,
    pub max_abs_distance_gap: f64,
    pub max_abs_product_deviation: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberSummary {
    pub name: String,
    pub group: GroupKind,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct MemberOutcome {
    pub member: FleetMember,
    pub report: ReportDocument,
    pub artifacts: RunArtifacts,
    pub failures: Vec<String>,
}

impl MemberOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exploratory(&self) -> Option<ExploratorySeries> {
        if self.member.config.group == GroupKind::AbelianR3 {
            return None;
        }
        let couple = self.artifacts.couple.as_ref()?;
        let idx: Vec<usize> = (0..couple.s.len())
            .filter(|&i| couple.retained[i])
            .collect();
        let tau_g_gap: Vec<f64> = idx
            .iter()
            .map(|&i| couple.tau_g_beta[i] - couple.tau_g_alpha[i])
            .collect();
        let distance_gap: Vec<f64> = idx
            .iter()
            .map(|&i| couple.distance[i] - couple.lambda.abs())
            .collect();
        let product: Vec<f64> = idx.iter().map(|&i| couple.product[i]).collect();
        let mean = crate::stats::mean(&product);
        let product_deviation: Vec<f64> = product.iter().map(|p| (p - mean) / mean.abs()).collect();
        let finite = !idx.is_empty()
            && tau_g_gap
                .iter()
                .chain(&distance_gap)
                .chain(&product_deviation)
                .all(|x| x.is_finite());
        Some(ExploratorySeries {
            name: self.member.name.to_string(),
            group: self.member.config.group,
            lambda: couple.lambda,
            s: idx.iter().map(|&i| couple.s[i]).collect(),
            max_abs_tau_g_gap: crate::stats::max_abs(&tau_g_gap),
            max_abs_distance_gap: crate::stats::max_abs(&distance_gap),
            max_abs_product_deviation: crate::stats::max_abs(&product_deviation),
            tau_g_gap,
            distance_gap,
            product_deviation,
            finite,
        })
    }

    pub fn summary(&self) -> MemberSummary {
        MemberSummary {
            name: self.member.name.to_string(),
            group: self.member.config.group,
            passed: self.passed(),
            failures: self.failures.clone(),
        }
    }
}

fn judge(m: &FleetMember, doc: &ReportDocument, art: &RunArtifacts) -> Vec<String> {
    let e = &m.expect;
    let mut failures = Vec::new();
    if let Some(kind) = e.diagnostic {
        if !doc.diagnostics.iter().any(|d| d.kind == kind) {
            failures.push(format!("expected a {kind} diagnostic"));
        }
        return failures;
    }
    for d in &doc.diagnostics {
        failures.push(format!(
            "{} failed: {}: {}",
            d.task.name(),
            d.kind,
            d.message
        ));
    }
    if let Some(c) = &doc.classification {
        for (what, want, got) in [
            ("general helix", e.general_helix, c.is_general_helix),
            ("slant helix", e.slant_helix, c.is_slant_helix),
            ("Mannheim", e.mannheim, c.is_mannheim),
            ("Bertrand", e.bertrand, c.is_bertrand),
        ] {
            if let Some(w) = want {
                if w != got {
                    failures.push(format!("{what}: expected {w}, classified {got}"));
                }
            }
        }
    }
    if let (Some(c), Some(alpha)) = (e.tau_g, &art.alpha) {
        let tg = alpha.retained_values(&alpha.torsion().expect("analyzed").tau_g);
        let dev = crate::stats::max_abs(&tg.iter().map(|x| x - c).collect::<Vec<_>>());
        if !(dev <= GROUP_TORSION_TOL) {
            failures.push(format!("group torsion deviates from {c} by {dev:e}"));
        }
    }
    if e.couple {
        match &doc.couple {
            None => failures.push("no couple report".into()),
            Some(c) => {
                for chk in c.checks.iter().filter(|c| c.asserted && !c.passed) {
                    failures.push(format!(
                        "couple check {}: {:e} > {:e}",
                        chk.name, chk.statistic, chk.tolerance
                    ));
                }
            }
        }
    }
    failures
}

pub fn run_member(m: &FleetMember) -> MemberOutcome {
    let (report, artifacts) = run_detailed(&m.config);
    let mut failures = judge(m, &report, &artifacts);
    if m.config.group != GroupKind::AbelianR3 && m.config.has_task(super::config::Task::Verify) {
        let out = MemberOutcome {
            member: m.clone(),
            report: report.clone(),
            artifacts: artifacts.clone(),
            failures: Vec::new(),
        };
        match out.exploratory() {
            Some(x) if x.finite => {}
            Some(_) => failures.push("exploratory residual series are not finite".into()),
            None => failures.push("no exploratory residual series".into()),
        }
    }
    MemberOutcome {
        member: m.clone(),
        report,
        artifacts,
        failures,
    }
}

/// Runs every member concurrently; outcomes keep the fleet order.
pub fn run_members(members: &[FleetMember]) -> Vec<MemberOutcome> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = members
            .iter()
            .map(|m| scope.spawn(move || run_member(m)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fleet member panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetReport {
    pub passed: bool,
    pub members: Vec<MemberSummary>,
    pub exploratory: Vec<ExploratorySeries>,
    pub tool_version: String,
}

/// Runs the fleet, writing `<dir>/<member>/report.json`, `series.csv` and
/// a `fleet.json` summary.
pub fn verify_fleet(dir: &Path) -> io::Result<(FleetReport, Vec<MemberOutcome>)> {
    let outcomes = run_members(&fleet_members());
    fs::create_dir_all(dir)?;
    for o in &outcomes {
        emit(&o.report, &dir.join(o.member.name))?;
    }
    let report = FleetReport {
        passed: outcomes.iter().all(MemberOutcome::passed),
        members: outcomes.iter().map(MemberOutcome::summary).collect(),
        exploratory: outcomes
            .iter()
            .filter_map(MemberOutcome::exploratory)
            .collect(),
        tool_version: super::report::TOOL_VERSION.to_string(),
    };
    fs::write(dir.join(FLEET_FILE), to_json_string(&report))?;
    Ok((report, outcomes))
}
