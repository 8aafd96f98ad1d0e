//! Exact steady-state analytics: joint event probabilities, AoI, battery
//! occupancy, AoA, violation tails, PoMA, and the energy-packet drop rate.
//!
//! The battery is a birth-death chain with up-rate P_{D̄,E} (harvest without
//! consumption) and down-rate P_{D,Ē} (consumption without harvest); all
//! battery-dependent metrics reduce to functions of the ratio
//! r = P_{D̄,E} / P_{D,Ē}.

use crate::channel::SuccessProbs;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-slot transmit probabilities of the two transmitters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessPolicy {
    pub q1: f64,
    pub q2: f64,
}

impl AccessPolicy {
    pub fn new(q1: f64, q2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q1) {
            return Err(Error::domain("q1", format!("must lie in [0, 1], got {q1}")));
        }
        if !(0.0..=1.0).contains(&q2) {
            return Err(Error::domain("q2", format!("must lie in [0, 1], got {q2}")));
        }
        Ok(AccessPolicy { q1, q2 })
    }
}

/// Joint per-slot probabilities of the data-success (D) and energy-success (E)
/// events, marginals included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventProbs {
    pub p_d: f64,
    pub p_e: f64,
    pub p_de: f64,
    /// P{D, Ē}: data success without energy success.
    pub p_deb: f64,
    /// P{D̄, E}: energy success without data success.
    pub p_dbe: f64,
    /// P{D̄, Ē}: neither.
    pub p_dbeb: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryModel {
    Infinite,
    Finite { m: u32 },
}

impl BatteryModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BatteryModel::Finite { m: 0 } => {
                Err(Error::domain("battery.m", "finite capacity must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Stationary battery occupancy summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryStationary {
    /// Probability of an empty battery.
    pub pi0: f64,
    /// 1 − π₀.
    pub pi0_bar: f64,
    /// Probability of a full battery (finite model only).
    pub pi_m: Option<f64>,
    /// Charge/discharge ratio r = P_{D̄,E}/P_{D,Ē}; +∞ when the battery only
    /// ever charges.
    pub ratio: f64,
}

pub fn event_probs(policy: &AccessPolicy, succ: &SuccessProbs) -> EventProbs {
    let (q1, q2) = (policy.q1, policy.q2);
    let p_d = q1 * q2 * succ.p_d12 + q1 * (1.0 - q2) * succ.p_d1;
    let p_de = q1 * q2 * succ.p_d12 * succ.p_e12;
    let p_deb = q1 * q2 * succ.p_d12 * (1.0 - succ.p_e12) + q1 * (1.0 - q2) * succ.p_d1;
    let p_dbe = q1 * q2 * (1.0 - succ.p_d12) * succ.p_e12 + (1.0 - q1) * q2 * succ.p_e2;
    let p_dbeb = 1.0 - p_de - p_deb - p_dbe;
    EventProbs {
        p_d,
        p_e: p_de + p_dbe,
        p_de,
        p_deb,
        p_dbe,
        p_dbeb,
    }
}

/// Mean AoI = 1/P_D; +∞ when data can never get through.
pub fn mean_aoi(ev: &EventProbs) -> f64 {
    if ev.p_d > 0.0 {
        1.0 / ev.p_d
    } else {
        f64::INFINITY
    }
}

/// Stationary tail P{I > threshold} of the geometric AoI law.
pub fn aoi_violation(ev: &EventProbs, threshold: u32) -> f64 {
    (1.0 - ev.p_d).powi(threshold as i32)
}

pub fn battery_stationary(ev: &EventProbs, model: &BatteryModel) -> BatteryStationary {
    let ratio = if ev.p_deb > 0.0 {
        ev.p_dbe / ev.p_deb
    } else if ev.p_dbe > 0.0 {
        f64::INFINITY
    } else {
        // Battery level never changes; it stays where it started (empty).
        0.0
    };
    let (pi0, pi_m) = match model {
        BatteryModel::Infinite => {
            let pi0 = if ratio.is_infinite() { 0.0 } else { (1.0 - ratio).max(0.0) };
            (pi0, None)
        }
        BatteryModel::Finite { m } => {
            let m = *m;
            if ratio.is_infinite() {
                (0.0, Some(1.0))
            } else if (ratio - 1.0).abs() < 1e-12 {
                let u = 1.0 / (m as f64 + 1.0);
                (u, Some(u))
            } else if ratio < 1.0 {
                let pi0 = (1.0 - ratio) / (1.0 - ratio.powi(m as i32 + 1));
                (pi0, Some(ratio.powi(m as i32) * pi0))
            } else {
                // Mirror the chain in u = 1/r to stay stable for large r^m.
                let u = 1.0 / ratio;
                let pi_m = (1.0 - u) / (1.0 - u.powi(m as i32 + 1));
                (u.powi(m as i32) * pi_m, Some(pi_m))
            }
        }
    };
    BatteryStationary {
        pi0,
        pi0_bar: 1.0 - pi0,
        pi_m,
        ratio,
    }
}

/// Per-slot probability that an actuation fires: data arrives with a stored
/// packet available, or data and energy arrive together at an empty battery.
pub fn actuation_prob(ev: &EventProbs, bat: &BatteryStationary) -> f64 {
    ev.p_d * bat.pi0_bar + ev.p_de * bat.pi0
}

/// Mean AoA = 1/p_A; +∞ when actuation never happens.
pub fn mean_aoa(ev: &EventProbs, model: &BatteryModel) -> f64 {
    let bat = battery_stationary(ev, model);
    let p_a = actuation_prob(ev, &bat);
    if p_a > 0.0 {
        1.0 / p_a
    } else {
        f64::INFINITY
    }
}

/// Stationary tail P{A > threshold} of the geometric AoA law.
pub fn aoa_violation(ev: &EventProbs, model: &BatteryModel, threshold: u32) -> f64 {
    let bat = battery_stationary(ev, model);
    let p_a = actuation_prob(ev, &bat);
    (1.0 - p_a).powi(threshold as i32)
}

/// Probability of missing an actuation: a data packet was issued but either
/// decoding failed, or it decoded into an empty battery with no simultaneous
/// energy packet.
pub fn poma(
    policy: &AccessPolicy,
    succ: &SuccessProbs,
    ev: &EventProbs,
    model: &BatteryModel,
) -> f64 {
    let (q1, q2) = (policy.q1, policy.q2);
    let pi0 = battery_stationary(ev, model).pi0;
    q1 * q2 * (1.0 - succ.p_d12)
        + q1 * (1.0 - q2) * (1.0 - succ.p_d1)
        + pi0 * (q1 * q2 * succ.p_d12 * (1.0 - succ.p_e12) + q1 * (1.0 - q2) * succ.p_d1)
}

/// Per-slot probability that a harvested packet is discarded because the
/// battery is full: π_m · P_{D̄,E}. Finite batteries only.
pub fn drop_rate(ev: &EventProbs, model: &BatteryModel) -> Result<f64> {
    let bat = battery_stationary(ev, model);
    match bat.pi_m {
        Some(pi_m) => Ok(pi_m * ev.p_dbe),
        None => Err(Error::domain(
            "battery",
            "drop rate is only defined for finite batteries",
        )),
    }
}

/// Full analytic bundle for one operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mean_aoi: f64,
    pub mean_aoa: f64,
    pub aoi_violation: f64,
    pub aoa_violation: f64,
    pub poma: f64,
    pub drop_rate: Option<f64>,
    pub actuation_prob: f64,
    pub battery: BatteryStationary,
    pub events: EventProbs,
}

pub fn report(
    policy: &AccessPolicy,
    succ: &SuccessProbs,
    model: &BatteryModel,
    threshold_iv: u32,
    threshold_av: u32,
) -> MetricsReport {
    let ev = event_probs(policy, succ);
    let battery = battery_stationary(&ev, model);
    MetricsReport {
        mean_aoi: mean_aoi(&ev),
        mean_aoa: mean_aoa(&ev, model),
        aoi_violation: aoi_violation(&ev, threshold_iv),
        aoa_violation: aoa_violation(&ev, model, threshold_av),
        poma: poma(policy, succ, &ev, model),
        drop_rate: drop_rate(&ev, model).ok(),
        actuation_prob: actuation_prob(&ev, &battery),
        battery,
        events: ev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::success_probs;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn succ1() -> SuccessProbs {
        success_probs(&crate::test_setups::setup1()).unwrap()
    }

    fn succ2() -> SuccessProbs {
        success_probs(&crate::test_setups::setup2()).unwrap()
    }

    fn pol(q1: f64, q2: f64) -> AccessPolicy {
        AccessPolicy::new(q1, q2).unwrap()
    }

    #[test]
    fn event_probs_reference_point() {
        let ev = event_probs(&pol(1.0, 1.0), &succ1());
        assert_abs_diff_eq!(ev.p_d, 0.6153815230, epsilon = 1e-9);
        assert_abs_diff_eq!(ev.p_dbe, 0.089487, epsilon = 1e-6);
        assert_abs_diff_eq!(ev.p_deb, 0.472205, epsilon = 1e-6);
        let ev0 = event_probs(&pol(0.0, 0.7), &succ1());
        assert_eq!(ev0.p_d, 0.0);
        assert_eq!(ev0.p_de, 0.0);
    }

    #[test]
    fn mean_aoi_reference_points() {
        let ev = event_probs(&pol(1.0, 0.0), &succ1());
        assert_abs_diff_eq!(mean_aoi(&ev), 1.0, epsilon = 1e-6);
        let ev = event_probs(&pol(1.0, 1.0), &succ2());
        assert_abs_diff_eq!(mean_aoi(&ev), 2.9753, epsilon = 1e-3);
        let ev = event_probs(&pol(0.0, 1.0), &succ2());
        assert!(mean_aoi(&ev).is_infinite());
    }

    #[test]
    fn aoi_violation_values() {
        let ev = EventProbs {
            p_d: 0.5,
            p_e: 0.0,
            p_de: 0.0,
            p_deb: 0.5,
            p_dbe: 0.0,
            p_dbeb: 0.5,
        };
        assert_abs_diff_eq!(aoi_violation(&ev, 2), 0.25);
        let ev = event_probs(&pol(1.0, 0.0), &succ1());
        assert!(aoi_violation(&ev, 5) < 1e-30);
    }

    #[test]
    fn aoi_violation_matches_geometric_sum() {
        let ev = event_probs(&pol(0.7, 0.4), &succ1());
        let p = ev.p_d;
        for threshold in [1u32, 3, 10, 100, 1000] {
            let mut cdf = 0.0;
            for i in 1..=threshold {
                cdf += p * (1.0 - p).powi(i as i32 - 1);
            }
            assert_abs_diff_eq!(aoi_violation(&ev, threshold), 1.0 - cdf, epsilon = 1e-12);
        }
    }

    #[test]
    fn battery_reference_point() {
        let ev = event_probs(&pol(1.0, 1.0), &succ1());
        let bat = battery_stationary(&ev, &BatteryModel::Finite { m: 3 });
        assert_abs_diff_eq!(bat.ratio, 0.189510, epsilon = 1e-5);
        assert_abs_diff_eq!(bat.pi0, 0.811539, epsilon = 1e-5);
    }

    #[test]
    fn battery_degenerate_branches() {
        let never = EventProbs {
            p_d: 0.0,
            p_e: 0.0,
            p_de: 0.0,
            p_deb: 0.0,
            p_dbe: 0.0,
            p_dbeb: 1.0,
        };
        assert_eq!(battery_stationary(&never, &BatteryModel::Infinite).pi0, 1.0);
        let only_charge = EventProbs { p_dbe: 0.3, p_e: 0.3, p_dbeb: 0.7, ..never };
        let bat = battery_stationary(&only_charge, &BatteryModel::Finite { m: 4 });
        assert_eq!(bat.pi0, 0.0);
        assert_eq!(bat.pi_m, Some(1.0));
        let symmetric = EventProbs {
            p_d: 0.2,
            p_e: 0.2,
            p_de: 0.0,
            p_deb: 0.2,
            p_dbe: 0.2,
            p_dbeb: 0.6,
        };
        let bat = battery_stationary(&symmetric, &BatteryModel::Finite { m: 1 });
        assert_abs_diff_eq!(bat.pi0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bat.pi_m.unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn actuation_and_aoa_reference_points() {
        let succ = succ1();
        let ev = event_probs(&pol(1.0, 1.0), &succ);
        let bat = battery_stationary(&ev, &BatteryModel::Infinite);
        assert_abs_diff_eq!(actuation_prob(&ev, &bat), succ.p_e12, epsilon = 1e-12);
        assert_abs_diff_eq!(
            mean_aoa(&ev, &BatteryModel::Infinite),
            1.0 / succ.p_e12,
            epsilon = 1e-9
        );
        // Non-empty battery almost surely: AoA reduces to AoI.
        let bat_full = BatteryStationary { pi0: 0.0, pi0_bar: 1.0, pi_m: None, ratio: 2.0 };
        assert_abs_diff_eq!(actuation_prob(&ev, &bat_full), ev.p_d, epsilon = 1e-12);
    }

    #[test]
    fn poma_reference_points() {
        let succ = succ1();
        let policy = pol(0.13, 0.52);
        let ev = event_probs(&policy, &succ);
        let c = poma(&policy, &succ, &ev, &BatteryModel::Infinite);
        assert_abs_diff_eq!(c, 0.026, epsilon = 1e-2);
        let policy = pol(0.0, 0.9);
        let ev = event_probs(&policy, &succ);
        assert_eq!(poma(&policy, &succ, &ev, &BatteryModel::Infinite), 0.0);
        let succ = succ2();
        let policy = pol(0.12, 0.25);
        let ev = event_probs(&policy, &succ);
        let c = poma(&policy, &succ, &ev, &BatteryModel::Finite { m: 1 });
        assert_abs_diff_eq!(c, 0.057, epsilon = 1e-2);
    }

    #[test]
    fn drop_rate_basics() {
        let ev = event_probs(&pol(1.0, 1.0), &succ2());
        assert!(drop_rate(&ev, &BatteryModel::Infinite).is_err());
        let symmetric = EventProbs {
            p_d: 0.2,
            p_e: 0.2,
            p_de: 0.0,
            p_deb: 0.2,
            p_dbe: 0.2,
            p_dbeb: 0.6,
        };
        let d = drop_rate(&symmetric, &BatteryModel::Finite { m: 1 }).unwrap();
        assert_abs_diff_eq!(d, 0.5 * 0.2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn events_sum_to_one(q1 in 0.0..1.0f64, q2 in 0.0..1.0f64) {
            for succ in [succ1(), succ2()] {
                let ev = event_probs(&pol(q1, q2), &succ);
                prop_assert!((ev.p_de + ev.p_deb + ev.p_dbe + ev.p_dbeb - 1.0).abs() < 1e-12);
                prop_assert!((ev.p_d - (ev.p_de + ev.p_deb)).abs() < 1e-12);
                prop_assert!((ev.p_e - (ev.p_de + ev.p_dbe)).abs() < 1e-12);
            }
        }

        #[test]
        fn aoa_dominates_aoi(q1 in 0.0..1.0f64, q2 in 0.0..1.0f64, m in 1u32..10) {
            for succ in [succ1(), succ2()] {
                let ev = event_probs(&pol(q1, q2), &succ);
                for model in [BatteryModel::Infinite, BatteryModel::Finite { m }] {
                    prop_assert!(mean_aoa(&ev, &model) >= mean_aoi(&ev) - 1e-9);
                }
            }
        }

        #[test]
        fn finite_converges_to_infinite(q1 in 0.05..1.0f64, q2 in 0.05..1.0f64) {
            for succ in [succ1(), succ2()] {
                let ev = event_probs(&pol(q1, q2), &succ);
                let bat = battery_stationary(&ev, &BatteryModel::Infinite);
                // Convergence in m slows as the charge ratio approaches 1, so
                // only check clearly energy-limited cases.
                if bat.ratio < 0.95 {
                    let fin = battery_stationary(&ev, &BatteryModel::Finite { m: 2000 });
                    prop_assert!((fin.pi0 - bat.pi0).abs() < 1e-6);
                    let a_inf = mean_aoa(&ev, &BatteryModel::Infinite);
                    let a_fin = mean_aoa(&ev, &BatteryModel::Finite { m: 2000 });
                    prop_assert!((a_fin - a_inf).abs() < 1e-6 * a_inf.max(1.0));
                }
            }
        }

        #[test]
        fn poma_decomposition(q1 in 0.0..1.0f64, q2 in 0.0..1.0f64) {
            // With a never-empty battery the missing probability is exactly the
            // decode-failure mass.
            for succ in [succ1(), succ2()] {
                let policy = pol(q1, q2);
                let decode_fail =
                    q1 * q2 * (1.0 - succ.p_d12) + q1 * (1.0 - q2) * (1.0 - succ.p_d1);
                let ev = event_probs(&policy, &succ);
                let full = poma(&policy, &succ, &ev, &BatteryModel::Infinite);
                let pi0 = battery_stationary(&ev, &BatteryModel::Infinite).pi0;
                let empty_part =
                    pi0 * (q1 * q2 * succ.p_d12 * (1.0 - succ.p_e12) + q1 * (1.0 - q2) * succ.p_d1);
                prop_assert!((full - decode_fail - empty_part).abs() < 1e-12);
            }
        }
    }

    // Solve the explicit (m+1)-state transition matrix numerically and compare
    // with the closed-form stationary probabilities.
    #[test]
    fn battery_matches_numeric_stationary_solve() {
        use nalgebra::{DMatrix, DVector};
        for (q1, q2) in [(1.0, 1.0), (0.6, 0.3), (0.2, 0.9), (0.9, 0.05)] {
            for succ in [succ1(), succ2()] {
                let ev = event_probs(&pol(q1, q2), &succ);
                for m in [1usize, 2, 5, 17, 50] {
                    let n = m + 1;
                    let up = ev.p_dbe;
                    let down = ev.p_deb;
                    let mut p = DMatrix::zeros(n, n);
                    for i in 0..n {
                        if i + 1 < n {
                            p[(i, i + 1)] = up;
                        }
                        if i > 0 {
                            p[(i, i - 1)] = down;
                        }
                        let leave: f64 =
                            (0..n).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
                        p[(i, i)] = 1.0 - leave;
                    }
                    // Solve pi (P - I) = 0 with the normalization row appended.
                    let mut a = (p.transpose() - DMatrix::identity(n, n)).insert_row(n, 1.0);
                    let mut b = DVector::zeros(n + 1);
                    b[n] = 1.0;
                    let sol = a
                        .clone()
                        .svd(true, true)
                        .solve(&b, 1e-14)
                        .expect("stationary solve");
                    let _ = &mut a;
                    let bat = battery_stationary(&ev, &BatteryModel::Finite { m: m as u32 });
                    assert_abs_diff_eq!(bat.pi0, sol[0], epsilon = 1e-10);
                    assert_abs_diff_eq!(bat.pi_m.unwrap(), sol[m], epsilon = 1e-10);
                }
            }
        }
    }
}
