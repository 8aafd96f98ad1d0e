//! Scenario files: JSON descriptions of a deployment, policy, battery and
//! optional simulation setup.
//!
//! Quantities customarily quoted in dB carry explicit unit suffixes and each
//! must appear in exactly one variant: `p_noise_dbm` or `p_noise_w`,
//! `gamma_d_db` or `gamma_d_lin`, `gamma_e_db` or `gamma_e_lin`, and
//! `p_tx1_w`/`p_tx1_dbm` (same for `p_tx2`). The library itself works in
//! linear units only; conversion happens on load (dBm → watts via
//! 10^((x−30)/10), dB → linear via 10^(x/10)).

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::metrics::{AccessPolicy, BatteryModel};
use crate::sim::SimConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx1_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx1_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx2_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tx2_dbm: Option<f64>,
    pub d1_m: f64,
    pub d2_m: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(default = "one")]
    pub upsilon1: f64,
    #[serde(default = "one")]
    pub upsilon2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_noise_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_noise_dbm: Option<f64>,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_d_lin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_d_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_e_lin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_e_db: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn pick(
    field: &'static str,
    linear: Option<f64>,
    db: Option<f64>,
    convert: fn(f64) -> f64,
) -> Result<f64> {
    match (linear, db) {
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(convert(v)),
        (Some(_), Some(_)) => Err(Error::domain(
            field,
            "specify exactly one unit variant, found both",
        )),
        (None, None) => Err(Error::domain(
            field,
            "missing: specify either the linear or the dB variant",
        )),
    }
}

impl ChannelSpec {
    pub fn to_params(&self) -> Result<ChannelParams> {
        let params = ChannelParams {
            p_tx1: pick("p_tx1", self.p_tx1_w, self.p_tx1_dbm, dbm_to_watts)?,
            p_tx2: pick("p_tx2", self.p_tx2_w, self.p_tx2_dbm, dbm_to_watts)?,
            d1: self.d1_m,
            d2: self.d2_m,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            upsilon1: self.upsilon1,
            upsilon2: self.upsilon2,
            p_noise: pick("p_noise", self.p_noise_w, self.p_noise_dbm, dbm_to_watts)?,
            rho: self.rho,
            gamma_d: pick("gamma_d", self.gamma_d_lin, self.gamma_d_db, db_to_linear)?,
            gamma_e: pick("gamma_e", self.gamma_e_lin, self.gamma_e_db, db_to_linear)?,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub i_v: u32,
    pub a_v: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { i_v: 5, a_v: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub channel: ChannelSpec,
    pub policy: AccessPolicy,
    pub battery: BatteryModel,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sim: Option<SimConfig>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.channel.to_params()?;
        AccessPolicy::new(self.policy.q1, self.policy.q2)?;
        self.battery.validate()?;
        if self.thresholds.i_v < 1 {
            return Err(Error::domain("thresholds.i_v", "must be at least 1"));
        }
        if self.thresholds.a_v < 1 {
            return Err(Error::domain("thresholds.a_v", "must be at least 1"));
        }
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Bundled reference deployments (the two published parameter sets).
pub fn bundled_setup1() -> &'static str {
    include_str!("../data/setup1.json")
}

pub fn bundled_setup2() -> &'static str {
    include_str!("../data/setup2.json")
}
