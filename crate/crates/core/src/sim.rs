//! Seeded slot-level Monte Carlo simulator.
//!
//! Each slot: transmitters fire Bernoulli(q1)/Bernoulli(q2); the data/energy
//! success pair is drawn either from the precomputed success probabilities
//! (abstract mode) or from fresh fading samples (physical mode); the actuation
//! and battery rules are applied; ages reset or grow. Replications run in
//! parallel, each on its own deterministically derived ChaCha8 stream, and the
//! aggregation is order-independent, so reports are bit-identical for a given
//! configuration.
//!
//! Replication k seeds its generator with four SplitMix64 outputs of
//! `seed + k` (see [`replication_rng`]).

use crate::channel::{sample_slot_physics, ActivityCase, ChannelParams, SuccessProbs};
use crate::error::{Error, Result};
use crate::metrics::{AccessPolicy, BatteryModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Number of AoI histogram bins recorded per replication (ages 1..=HIST_BINS;
/// larger ages fold into the last slot).
pub const HIST_BINS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Bernoulli draws on precomputed success probabilities.
    Abstract,
    /// Per-slot fading samples through the threshold rules.
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Slots per replication (≥ 1000).
    pub horizon: u64,
    /// Slots discarded before recording; defaults to horizon/10.
    #[serde(default)]
    pub warmup: Option<u64>,
    pub replications: u32,
    pub seed: u64,
    pub mode: SimMode,
    /// AoI tail threshold I_v.
    pub threshold_iv: u32,
    /// AoA tail threshold A_v.
    pub threshold_av: u32,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1000 {
            return Err(Error::Config(format!(
                "horizon must be at least 1000 slots, got {}",
                self.horizon
            )));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if let Some(w) = self.warmup {
            if w >= self.horizon {
                return Err(Error::Config(format!(
                    "warmup ({w}) must be smaller than the horizon ({})",
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    pub fn effective_warmup(&self) -> u64 {
        self.warmup.unwrap_or(self.horizon / 10)
    }
}

/// Where slot outcomes come from; fixes the event law of the simulation.
#[derive(Clone, Copy, Debug)]
pub enum EventSource<'a> {
    Abstract(&'a SuccessProbs),
    Physical(&'a ChannelParams),
}

/// Mutable per-trajectory state.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: u64,
    pub aoi: u64,
    pub aoa: u64,
    pub battery: u64,
    pub actuations: u64,
    pub missed: u64,
    pub data_attempts: u64,
    pub drops: u64,
}

impl SimState {
    pub fn new() -> Self {
        SimState {
            t: 0,
            aoi: 1,
            aoa: 1,
            battery: 0,
            actuations: 0,
            missed: 0,
            data_attempts: 0,
            drops: 0,
        }
    }
}

impl Default for SimState {
    fn default() -> Self {
        Self::new()
    }
}

/// Resolved randomness of one slot.
#[derive(Clone, Copy, Debug)]
pub struct SlotEvents {
    /// Transmitter 1 issued a data packet.
    pub tx1: bool,
    pub data: bool,
    pub energy: bool,
}

pub fn sample_slot<R: Rng + ?Sized>(
    policy: &AccessPolicy,
    source: &EventSource<'_>,
    rng: &mut R,
) -> SlotEvents {
    let tx1 = rng.gen::<f64>() < policy.q1;
    let tx2 = rng.gen::<f64>() < policy.q2;
    let (data, energy) = match (tx1, tx2) {
        (false, false) => (false, false),
        (true, true) => match source {
            EventSource::Abstract(s) => {
                (rng.gen::<f64>() < s.p_d12, rng.gen::<f64>() < s.p_e12)
            }
            EventSource::Physical(p) => sample_slot_physics(p, ActivityCase::Both, rng),
        },
        (true, false) => match source {
            EventSource::Abstract(s) => (rng.gen::<f64>() < s.p_d1, false),
            EventSource::Physical(p) => sample_slot_physics(p, ActivityCase::Only1, rng),
        },
        (false, true) => match source {
            EventSource::Abstract(s) => (false, rng.gen::<f64>() < s.p_e2),
            EventSource::Physical(p) => sample_slot_physics(p, ActivityCase::Only2, rng),
        },
    };
    SlotEvents { tx1, data, energy }
}

/// Apply one slot to the state. Within-slot order: actuation decision, battery
/// update, then age resets. A packet harvested in the same slot may power the
/// actuation only when the battery is empty; with a stored packet available
/// the actuation consumes storage and the harvested packet takes its place
/// (so a simultaneous data+energy success leaves the level unchanged, with no
/// drop even at capacity). A drop happens only on a harvest with failed data
/// at a full battery.
pub fn step(state: &mut SimState, events: SlotEvents, model: &BatteryModel) {
    let cap = match model {
        BatteryModel::Infinite => u64::MAX,
        BatteryModel::Finite { m } => *m as u64,
    };
    let mut actuated = false;
    if events.data {
        if state.battery > 0 {
            actuated = true;
            if !events.energy {
                state.battery -= 1;
            }
        } else if events.energy {
            // Empty battery: the fresh packet is consumed on the spot.
            actuated = true;
        }
    } else if events.energy {
        if state.battery < cap {
            state.battery += 1;
        } else {
            state.drops += 1;
        }
    }
    state.aoi = if events.data { 1 } else { state.aoi + 1 };
    state.aoa = if actuated { 1 } else { state.aoa + 1 };
    if actuated {
        state.actuations += 1;
    }
    if events.tx1 {
        state.data_attempts += 1;
        if !actuated {
            state.missed += 1;
        }
    }
    state.t += 1;
}

/// Per-replication summary over the post-warmup window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepStats {
    pub mean_aoi: f64,
    pub mean_aoa: f64,
    pub tail_aoi: f64,
    pub tail_aoa: f64,
    pub poma: f64,
    pub drop_rate: f64,
    pub pi0: f64,
    pub pi_m: Option<f64>,
    pub actuations: u64,
    pub data_attempts: u64,
    /// Relative frequency of AoI = i for i in 1..=HIST_BINS (index i−1).
    pub aoi_hist: Vec<f64>,
}

/// Aggregated simulation report: metric means over replications with
/// across-replication standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mean_aoi: f64,
    pub se_mean_aoi: f64,
    pub mean_aoa: f64,
    pub se_mean_aoa: f64,
    pub tail_aoi: f64,
    pub se_tail_aoi: f64,
    pub tail_aoa: f64,
    pub se_tail_aoa: f64,
    pub poma: f64,
    pub se_poma: f64,
    pub drop_rate: Option<f64>,
    pub se_drop_rate: f64,
    pub pi0: f64,
    pub se_pi0: f64,
    pub pi_m: Option<f64>,
    pub se_pi_m: f64,
    pub actuations_total: u64,
    pub per_rep: Vec<RepStats>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic per-replication stream: ChaCha8 keyed by four SplitMix64
/// outputs of `seed + k`.
pub fn replication_rng(seed: u64, k: u32) -> ChaCha8Rng {
    let mut state = seed.wrapping_add(k as u64);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn run_replication(
    config: &SimConfig,
    policy: &AccessPolicy,
    source: &EventSource<'_>,
    model: &BatteryModel,
    k: u32,
) -> RepStats {
    let mut rng = replication_rng(config.seed, k);
    let mut state = SimState::new();
    let warmup = config.effective_warmup();
    for _ in 0..warmup {
        let events = sample_slot(policy, source, &mut rng);
        step(&mut state, events, model);
    }
    // Reset the counters; ages and battery carry over as the steady-state draw.
    state.actuations = 0;
    state.missed = 0;
    state.data_attempts = 0;
    state.drops = 0;

    let cap = match model {
        BatteryModel::Finite { m } => Some(*m as u64),
        BatteryModel::Infinite => None,
    };
    let slots = config.horizon - warmup;
    let mut sum_aoi = 0u128;
    let mut sum_aoa = 0u128;
    let mut tail_i = 0u64;
    let mut tail_a = 0u64;
    let mut empty = 0u64;
    let mut full = 0u64;
    let mut hist = [0u64; HIST_BINS];
    for _ in 0..slots {
        let events = sample_slot(policy, source, &mut rng);
        step(&mut state, events, model);
        sum_aoi += state.aoi as u128;
        sum_aoa += state.aoa as u128;
        tail_i += (state.aoi > config.threshold_iv as u64) as u64;
        tail_a += (state.aoa > config.threshold_av as u64) as u64;
        empty += (state.battery == 0) as u64;
        if let Some(m) = cap {
            full += (state.battery == m) as u64;
        }
        let bin = (state.aoi.min(HIST_BINS as u64) - 1) as usize;
        hist[bin] += 1;
    }
    let n = slots as f64;
    RepStats {
        mean_aoi: sum_aoi as f64 / n,
        mean_aoa: sum_aoa as f64 / n,
        tail_aoi: tail_i as f64 / n,
        tail_aoa: tail_a as f64 / n,
        poma: state.missed as f64 / n,
        drop_rate: state.drops as f64 / n,
        pi0: empty as f64 / n,
        pi_m: cap.map(|_| full as f64 / n),
        actuations: state.actuations,
        data_attempts: state.data_attempts,
        aoi_hist: hist.iter().map(|&c| c as f64 / n).collect(),
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn run(
    config: &SimConfig,
    policy: &AccessPolicy,
    source: &EventSource<'_>,
    model: &BatteryModel,
) -> Result<SimReport> {
    config.validate()?;
    model.validate()?;
    let per_rep: Vec<RepStats> = (0..config.replications)
        .into_par_iter()
        .map(|k| run_replication(config, policy, source, model, k))
        .collect();

    let (mean_aoi, se_mean_aoi) = mean_and_se(per_rep.iter().map(|r| r.mean_aoi));
    let (mean_aoa, se_mean_aoa) = mean_and_se(per_rep.iter().map(|r| r.mean_aoa));
    let (tail_aoi, se_tail_aoi) = mean_and_se(per_rep.iter().map(|r| r.tail_aoi));
    let (tail_aoa, se_tail_aoa) = mean_and_se(per_rep.iter().map(|r| r.tail_aoa));
    let (poma, se_poma) = mean_and_se(per_rep.iter().map(|r| r.poma));
    let (drop, se_drop_rate) = mean_and_se(per_rep.iter().map(|r| r.drop_rate));
    let (pi0, se_pi0) = mean_and_se(per_rep.iter().map(|r| r.pi0));
    let finite = matches!(model, BatteryModel::Finite { .. });
    let (pi_m, se_pi_m) = if finite {
        mean_and_se(per_rep.iter().map(|r| r.pi_m.unwrap_or(0.0)))
    } else {
        (0.0, 0.0)
    };
    Ok(SimReport {
        mean_aoi,
        se_mean_aoi,
        mean_aoa,
        se_mean_aoa,
        tail_aoi,
        se_tail_aoi,
        tail_aoa,
        se_tail_aoa,
        poma,
        se_poma,
        drop_rate: finite.then_some(drop),
        se_drop_rate,
        pi0,
        se_pi0,
        pi_m: finite.then_some(pi_m),
        se_pi_m,
        actuations_total: per_rep.iter().map(|r| r.actuations).sum(),
        per_rep,
    })
}
