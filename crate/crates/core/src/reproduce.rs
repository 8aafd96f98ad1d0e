//! Regeneration of the published reference results: the success-probability
//! table, the finite-battery optimum table, and the figure-caption optima.
//!
//! The published tables and caption optima were evidently computed from the
//! two-decimal success probabilities rather than the full-precision closed
//! forms (the full-precision values drift by more than the printed rounding
//! in several cells), so every optimizer here runs on the rounded reference
//! probabilities. Printed *values* are compared against the metric evaluated
//! at the printed coordinates; printed *coordinates* are compared against the
//! optimizer's argmin.
//!
//! Known discrepancies that this suite reports as failures on purpose: a
//! handful of PoMA q2 caption coordinates disagree with both the closed-form
//! case analysis and an exhaustive grid on the published objective (the
//! printed values at those points are still reproduced). See the README for
//! the full list.

use crate::channel::{success_probs, SuccessProbs};
use crate::error::{Error, Result};
use crate::metrics::BatteryModel;
use crate::opt::{self, Objective, ViolationKind};
use crate::scenario::{bundled_setup1, bundled_setup2, Scenario};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Table1,
    Table2,
    Captions,
}

/// One comparison line of a reproduction report.
#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

fn check(name: impl Into<String>, detail: String, pass: bool) -> CheckLine {
    CheckLine { name: name.into(), detail, pass }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Success probabilities derived from the bundled scenario for a setup.
pub fn derived_probs(setup: u8) -> Result<SuccessProbs> {
    let text = match setup {
        1 => bundled_setup1(),
        2 => bundled_setup2(),
        _ => return Err(Error::domain("setup", "must be 1 or 2")),
    };
    let scenario = Scenario::from_json(text)?;
    success_probs(&scenario.channel.to_params()?)
}

/// The two-decimal reference probabilities the published results were
/// computed from.
pub fn rounded_probs(setup: u8) -> Result<SuccessProbs> {
    let p = derived_probs(setup)?;
    SuccessProbs::new(round2(p.p_d1), round2(p.p_d12), round2(p.p_e2), round2(p.p_e12))
}

#[derive(Deserialize)]
struct Table1Entry {
    setup: u8,
    source: String,
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
}

fn table1() -> Result<Vec<CheckLine>> {
    let entries: Vec<Table1Entry> =
        serde_json::from_str(include_str!("../data/expected/table1.json"))
            .map_err(|e| Error::Parse(e.to_string()))?;
    let mut lines = Vec::new();
    for e in entries {
        let p = derived_probs(e.setup)?;
        for (label, got, want) in [
            ("p_d1", round2(p.p_d1), e.p_d1),
            ("p_d12", round2(p.p_d12), e.p_d12),
            ("p_e2", round2(p.p_e2), e.p_e2),
            ("p_e12", round2(p.p_e12), e.p_e12),
        ] {
            lines.push(check(
                format!("{} / {label}", e.source),
                format!("expected {want:.2}, got {got:.2}"),
                (got - want).abs() < 1e-9,
            ));
        }
    }
    Ok(lines)
}

#[derive(Deserialize)]
struct Table2Row {
    m: Option<u32>,
    q1: f64,
    q2: f64,
    value: f64,
}

#[derive(Deserialize)]
struct Table2File {
    source: String,
    setup1: Vec<Table2Row>,
    setup2: Vec<Table2Row>,
}

fn battery_of(m: Option<u32>) -> BatteryModel {
    match m {
        Some(m) => BatteryModel::Finite { m },
        None => BatteryModel::Infinite,
    }
}

fn table2() -> Result<Vec<CheckLine>> {
    let file: Table2File = serde_json::from_str(include_str!("../data/expected/table2.json"))
        .map_err(|e| Error::Parse(e.to_string()))?;
    let mut lines = Vec::new();
    for (setup, rows) in [(1u8, &file.setup1), (2u8, &file.setup2)] {
        let succ = rounded_probs(setup)?;
        for row in rows {
            let model = battery_of(row.m);
            let opt = match row.m {
                Some(m) => opt::minimize_mean_aoa_finite(&succ, m)?,
                None => opt::minimize_mean_aoa(&succ)?,
            };
            let m_label = row
                .m
                .map(|m| m.to_string())
                .unwrap_or_else(|| "inf".into());
            let at_printed = opt::evaluate(&Objective::MeanAoa, row.q1, row.q2, &succ, &model);
            let ok_q = (opt.q1 - row.q1).abs() <= 0.01 && (opt.q2 - row.q2).abs() <= 0.01;
            let ok_v = (at_printed - row.value).abs() <= 0.01;
            lines.push(check(
                format!("{} / setup {setup}, m={m_label}", file.source),
                format!(
                    "printed ({:.2}, {:.2}) -> {:.2}; argmin ({:.4}, {:.4}), value at printed point {:.4}",
                    row.q1, row.q2, row.value, opt.q1, opt.q2, at_printed
                ),
                ok_q && ok_v,
            ));
        }
    }
    Ok(lines)
}

#[derive(Deserialize)]
struct CaptionEntry {
    name: String,
    family: String,
    setup: u8,
    #[serde(default)]
    m: Option<u32>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    threshold: Option<u32>,
    q1: f64,
    q2: f64,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    tol_q: Option<f64>,
    #[serde(default)]
    tol_value: Option<f64>,
}

fn captions() -> Result<Vec<CheckLine>> {
    let entries: Vec<CaptionEntry> =
        serde_json::from_str(include_str!("../data/expected/captions.json"))
            .map_err(|e| Error::Parse(e.to_string()))?;
    let mut lines = Vec::new();
    for e in entries {
        let succ = rounded_probs(e.setup)?;
        let model = battery_of(e.m);
        let threshold = e.threshold.unwrap_or(5);
        let (opt_result, value_metric) = match e.family.as_str() {
            "aoi_min" => (opt::minimize_mean_aoi(&succ)?, Some(Objective::MeanAoi)),
            "aoa_min" => {
                let r = match e.m {
                    Some(m) => opt::minimize_mean_aoa_finite(&succ, m)?,
                    None => opt::minimize_mean_aoa(&succ)?,
                };
                (r, Some(Objective::MeanAoa))
            }
            "aoi_violation" => (
                opt::minimize_violation(ViolationKind::Aoi, &succ, &model, threshold)?,
                Some(Objective::AoiViolation { threshold }),
            ),
            "aoa_violation" => (
                opt::minimize_violation(ViolationKind::Aoa, &succ, &model, threshold)?,
                // Printed violation values are not reproducible; argmin only.
                None,
            ),
            "aoi_st_aoa" => {
                let delta = e.delta.ok_or_else(|| Error::Config("missing delta".into()))?;
                let r = match e.m {
                    Some(_) => opt::grid_oracle(
                        &Objective::MeanAoi,
                        Some(&opt::Constraint { metric: Objective::MeanAoa, bound: delta }),
                        &succ,
                        &model,
                        1e-2,
                        true,
                    )?,
                    None => opt::minimize_aoi_subject_to_aoa(&succ, delta)?,
                };
                (r, Some(Objective::MeanAoi))
            }
            "poma_st_aoi" => {
                let delta = e.delta.ok_or_else(|| Error::Config("missing delta".into()))?;
                let r = match e.m {
                    // The printed coordinates are 0.01-lattice points and the
                    // PoMA valleys are nearly flat, so the published argmin is
                    // only reproducible on the same unrefined lattice.
                    Some(_) => opt::grid_oracle(
                        &Objective::Poma,
                        Some(&opt::Constraint { metric: Objective::MeanAoi, bound: delta }),
                        &succ,
                        &model,
                        1e-2,
                        false,
                    )?,
                    None => opt::minimize_poma_subject_to_aoi(&succ, delta, &model)?,
                };
                (r, Some(Objective::Poma))
            }
            other => return Err(Error::Config(format!("unknown caption family {other}"))),
        };
        let tol_q = e.tol_q.unwrap_or(0.01);
        let tol_v = e.tol_value.unwrap_or(0.05);
        let ok_q =
            (opt_result.q1 - e.q1).abs() <= tol_q && (opt_result.q2 - e.q2).abs() <= tol_q;
        let (value_detail, ok_v) = match (e.value, value_metric) {
            (Some(want), Some(metric)) => {
                let at_printed = opt::evaluate(&metric, e.q1, e.q2, &succ, &model);
                (
                    format!(", value at printed point {:.4} vs printed {:.4}", at_printed, want),
                    (at_printed - want).abs() <= tol_v,
                )
            }
            _ => (String::new(), true),
        };
        lines.push(check(
            e.name,
            format!(
                "printed ({:.2}, {:.2}); argmin ({:.4}, {:.4}) [{}]{}",
                e.q1, e.q2, opt_result.q1, opt_result.q2, opt_result.case_label, value_detail
            ),
            ok_q && ok_v && opt_result.feasible,
        ));
    }
    Ok(lines)
}

pub fn run(target: Target) -> Result<Vec<CheckLine>> {
    match target {
        Target::Table1 => table1(),
        Target::Table2 => table2(),
        Target::Captions => captions(),
    }
}
