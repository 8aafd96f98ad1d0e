//! wasm-bindgen bindings for the browser demo: metric evaluation at a policy,
//! a metric surface over the (q1, q2) square, and the optimizers. Everything
//! crosses the boundary as plain numbers or JSON strings so the page needs no
//! framework.
//!
//! The `*_impl` functions carry the logic with `String` errors and compile on
//! any target, which is how they are unit-tested; the `#[wasm_bindgen]`
//! wrappers only convert errors to `JsValue` (a wasm-only type at runtime).

use swipt_aoa::channel::SuccessProbs;
use swipt_aoa::metrics::{self, AccessPolicy, BatteryModel};
use swipt_aoa::opt::{self, Constraint, Objective};
use swipt_aoa::reproduce;
use wasm_bindgen::prelude::*;

fn probs(p_d1: f64, p_d12: f64, p_e2: f64, p_e12: f64) -> Result<SuccessProbs, String> {
    SuccessProbs::new(p_d1, p_d12, p_e2, p_e12).map_err(|e| e.to_string())
}

/// `m` < 0 selects the infinite battery; otherwise a finite size (≥ 1).
fn battery(m: i32) -> Result<BatteryModel, String> {
    if m < 0 {
        Ok(BatteryModel::Infinite)
    } else if m >= 1 {
        Ok(BatteryModel::Finite { m: m as u32 })
    } else {
        Err("battery size must be negative (infinite) or at least 1".into())
    }
}

fn objective(metric: &str, threshold: u32) -> Result<Objective, String> {
    Ok(match metric {
        "mean_aoi" => Objective::MeanAoi,
        "mean_aoa" => Objective::MeanAoa,
        "aoi_violation" => Objective::AoiViolation { threshold },
        "aoa_violation" => Objective::AoaViolation { threshold },
        "poma" => Objective::Poma,
        "drop_rate" => Objective::DropRate,
        other => return Err(format!("unknown metric {other}")),
    })
}

pub fn setup_probs_impl(setup: u8) -> Result<Vec<f64>, String> {
    let p = reproduce::derived_probs(setup).map_err(|e| e.to_string())?;
    Ok(vec![p.p_d1, p.p_d12, p.p_e2, p.p_e12])
}

#[allow(clippy::too_many_arguments)]
pub fn metrics_json_impl(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    q1: f64,
    q2: f64,
    m: i32,
    threshold_iv: u32,
    threshold_av: u32,
) -> Result<String, String> {
    let succ = probs(p_d1, p_d12, p_e2, p_e12)?;
    let policy = AccessPolicy::new(q1, q2).map_err(|e| e.to_string())?;
    let report = metrics::report(&policy, &succ, &battery(m)?, threshold_iv, threshold_av);
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_values_impl(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    metric: &str,
    threshold: u32,
    m: i32,
    n: u32,
) -> Result<Vec<f64>, String> {
    if !(2..=401).contains(&n) {
        return Err("lattice size must lie in 2..=401".into());
    }
    let succ = probs(p_d1, p_d12, p_e2, p_e12)?;
    let model = battery(m)?;
    let obj = objective(metric, threshold)?;
    let step = 1.0 / (n - 1) as f64;
    let mut values = Vec::with_capacity((n * n) as usize);
    for i in 0..n {
        for j in 0..n {
            let v = opt::evaluate(&obj, i as f64 * step, j as f64 * step, &succ, &model);
            values.push(if v.is_finite() { v } else { f64::NAN });
        }
    }
    Ok(values)
}

#[allow(clippy::too_many_arguments)]
pub fn optimize_json_impl(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    problem: &str,
    delta: f64,
    threshold: u32,
    m: i32,
) -> Result<String, String> {
    let succ = probs(p_d1, p_d12, p_e2, p_e12)?;
    let model = battery(m)?;
    let err = |e: swipt_aoa::Error| e.to_string();
    let result = match (problem, &model) {
        ("mean_aoi", _) => opt::minimize_mean_aoi(&succ).map_err(err)?,
        ("mean_aoa", BatteryModel::Infinite) => opt::minimize_mean_aoa(&succ).map_err(err)?,
        ("mean_aoa", BatteryModel::Finite { m }) => {
            opt::minimize_mean_aoa_finite(&succ, *m).map_err(err)?
        }
        ("aoi_st_aoa", BatteryModel::Infinite) => {
            opt::minimize_aoi_subject_to_aoa(&succ, delta).map_err(err)?
        }
        ("aoi_st_aoa", BatteryModel::Finite { .. }) => opt::grid_oracle(
            &Objective::MeanAoi,
            Some(&Constraint { metric: Objective::MeanAoa, bound: delta }),
            &succ,
            &model,
            1e-2,
            true,
        )
        .map_err(err)?,
        ("poma_st_aoi", _) => {
            opt::minimize_poma_subject_to_aoi(&succ, delta, &model).map_err(err)?
        }
        ("aoi_violation", _) => {
            opt::minimize_violation(opt::ViolationKind::Aoi, &succ, &model, threshold)
                .map_err(err)?
        }
        ("aoa_violation", _) => {
            opt::minimize_violation(opt::ViolationKind::Aoa, &succ, &model, threshold)
                .map_err(err)?
        }
        (other, _) => return Err(format!("unknown problem {other}")),
    };
    Ok(serde_json::json!({
        "q1": result.q1,
        "q2": result.q2,
        "value": result.value,
        "case": result.case_label,
        "feasible": result.feasible,
    })
    .to_string())
}

/// The bundled reference success probabilities as [p_d1, p_d12, p_e2, p_e12].
#[wasm_bindgen]
pub fn setup_probs(setup: u8) -> Result<Vec<f64>, JsValue> {
    setup_probs_impl(setup).map_err(|e| JsValue::from_str(&e))
}

/// Full analytic metric bundle at one policy, as a JSON object.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn metrics_json(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    q1: f64,
    q2: f64,
    m: i32,
    threshold_iv: u32,
    threshold_av: u32,
) -> Result<String, JsValue> {
    metrics_json_impl(p_d1, p_d12, p_e2, p_e12, q1, q2, m, threshold_iv, threshold_av)
        .map_err(|e| JsValue::from_str(&e))
}

/// Metric surface over an n×n lattice covering [0, 1]², row-major with q1
/// varying slowest. Non-finite values come back as NaN for the heatmap.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn sweep_values(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    metric: &str,
    threshold: u32,
    m: i32,
    n: u32,
) -> Result<Vec<f64>, JsValue> {
    sweep_values_impl(p_d1, p_d12, p_e2, p_e12, metric, threshold, m, n)
        .map_err(|e| JsValue::from_str(&e))
}

/// Solve one optimization problem; returns {q1, q2, value, case, feasible}.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn optimize_json(
    p_d1: f64,
    p_d12: f64,
    p_e2: f64,
    p_e12: f64,
    problem: &str,
    delta: f64,
    threshold: u32,
    m: i32,
) -> Result<String, JsValue> {
    optimize_json_impl(p_d1, p_d12, p_e2, p_e12, problem, delta, threshold, m)
        .map_err(|e| JsValue::from_str(&e))
}
