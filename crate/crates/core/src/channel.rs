//! Physical layer: Rayleigh-fading closed forms and per-slot fading draws.
//!
//! Transmitter 1 carries status updates (data), transmitter 2 carries energy.
//! With both active, a power splitter routes a fraction ρ² of the received
//! power to the harvesting circuit and 1−ρ² to the decoder. Channel gains are
//! exponential (|h|² under Rayleigh fading), so all four per-slot success
//! probabilities have closed forms.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative gap below which the two exponential scales are treated as equal
/// and the Erlang-2 limit of the sum CDF is used.
const EQUAL_SCALE_TOL: f64 = 1e-9;

/// Physical deployment parameters, all in linear units (watts, meters,
/// linear ratios). Unit conversion from dBm/dB happens at the scenario layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub p_tx1: f64,
    pub p_tx2: f64,
    pub d1: f64,
    pub d2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
    pub p_noise: f64,
    /// Power-splitting ratio ρ ∈ [0, 1]; ρ² of the power feeds the harvester.
    pub rho: f64,
    /// SINR decode threshold γ_d (linear).
    pub gamma_d: f64,
    /// Energy-harvest threshold γ_e (linear).
    pub gamma_e: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_tx1", self.p_tx1),
            ("p_tx2", self.p_tx2),
            ("d1", self.d1),
            ("d2", self.d2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("upsilon1", self.upsilon1),
            ("upsilon2", self.upsilon2),
            ("p_noise", self.p_noise),
            ("gamma_d", self.gamma_d),
            ("gamma_e", self.gamma_e),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain {
                    field: match name {
                        "p_tx1" => "p_tx1",
                        "p_tx2" => "p_tx2",
                        "d1" => "d1",
                        "d2" => "d2",
                        "alpha1" => "alpha1",
                        "alpha2" => "alpha2",
                        "upsilon1" => "upsilon1",
                        "upsilon2" => "upsilon2",
                        "p_noise" => "p_noise",
                        "gamma_d" => "gamma_d",
                        _ => "gamma_e",
                    },
                    reason: format!("must be strictly positive and finite, got {v}"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::domain("rho", format!("must lie in [0, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// Power factor g₁ = P_tx1 · d₁^(−α₁) of the data link.
    pub fn g1(&self) -> f64 {
        power_factor(self.p_tx1, self.d1, self.alpha1).expect("validated params")
    }

    /// Power factor g₂ = P_tx2 · d₂^(−α₂) of the energy link.
    pub fn g2(&self) -> f64 {
        power_factor(self.p_tx2, self.d2, self.alpha2).expect("validated params")
    }
}

/// The four link-level success probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbs {
    /// Data decoding succeeds, transmitter 1 alone.
    pub p_d1: f64,
    /// Data decoding succeeds, both transmitters active (splitting + interference).
    pub p_d12: f64,
    /// Energy harvesting succeeds, transmitter 2 alone.
    pub p_e2: f64,
    /// Energy harvesting succeeds, both transmitters active.
    pub p_e12: f64,
}

impl SuccessProbs {
    pub fn new(p_d1: f64, p_d12: f64, p_e2: f64, p_e12: f64) -> Result<Self> {
        for (name, v) in [
            ("p_d1", p_d1),
            ("p_d12", p_d12),
            ("p_e2", p_e2),
            ("p_e12", p_e12),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    field: match name {
                        "p_d1" => "p_d1",
                        "p_d12" => "p_d12",
                        "p_e2" => "p_e2",
                        _ => "p_e12",
                    },
                    reason: format!("probability must lie in [0, 1], got {v}"),
                });
            }
        }
        if p_d12 > p_d1 {
            return Err(Error::domain(
                "p_d12",
                format!("interference cannot help decoding: p_d12 ({p_d12}) > p_d1 ({p_d1})"),
            ));
        }
        Ok(SuccessProbs { p_d1, p_d12, p_e2, p_e12 })
    }
}

/// g = p_tx · d^(−α).
pub fn power_factor(p_tx: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(p_tx > 0.0) {
        return Err(Error::domain("p_tx", format!("must be positive, got {p_tx}")));
    }
    if !(d > 0.0) {
        return Err(Error::domain("d", format!("must be positive, got {d}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(p_tx * d.powf(-alpha))
}

/// CDF of X₁ + X₂ for independent exponentials with means `a` and `b`.
///
/// The textbook closed form `(b(e^{-x/b}-1) + a(1-e^{-x/a}))/(a-b)` is 0/0 at
/// a = b and cancels badly nearby, so we evaluate an algebraically equivalent
/// form built on `expm1` and switch to the Erlang-2 limit below a relative
/// gap of 1e-9.
pub fn cdf_sum_exponentials(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("a", format!("scale must be positive, got {a}")));
    }
    if !(b > 0.0) {
        return Err(Error::domain("b", format!("scale must be positive, got {b}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("x", format!("threshold must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // Symmetric in (a, b); order so `a` is the larger scale, which keeps the
    // auxiliary exponent s non-negative and expm1(-s) in (-1, 0].
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let rel_gap = (a - b) / a;
    let f = if rel_gap < EQUAL_SCALE_TOL {
        // Erlang-2 limit: 1 - (1 + x/a) e^{-x/a}.
        let t = x / a;
        1.0 - (1.0 + t) * (-t).exp()
    } else {
        // F = 1 - e^{-x/a} (1 - b·expm1(-s)/(a-b)),  s = x(a-b)/(ab).
        let s = x * (a - b) / (a * b);
        1.0 - (-x / a).exp() * (1.0 - b * (-s).exp_m1() / (a - b))
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Closed-form success probabilities for a deployment.
pub fn success_probs(params: &ChannelParams) -> Result<SuccessProbs> {
    params.validate()?;
    let g1 = params.g1();
    let g2 = params.g2();
    let u1 = params.upsilon1;
    let u2 = params.upsilon2;
    let rho2 = params.rho * params.rho;

    let p_d1 = (-params.gamma_d * params.p_noise / (g1 * u1)).exp();
    let p_d12 = if params.rho >= 1.0 {
        0.0
    } else {
        (-params.gamma_d * params.p_noise / ((1.0 - rho2) * u1 * g1)).exp()
            / (1.0 + params.gamma_d * u2 * g2 / (u1 * g1))
    };
    let p_e2 = (-params.gamma_e / (g2 * u2)).exp();
    let p_e12 = if params.rho <= 0.0 {
        0.0
    } else {
        1.0 - cdf_sum_exponentials(g1 * u1, g2 * u2, params.gamma_e / rho2)?
    };
    SuccessProbs::new(p_d1, p_d12, p_e2, p_e12)
}

/// Which transmitters are active in a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActivityCase {
    Both,
    Only1,
    Only2,
}

/// Draw an exponential variate with the given mean via the inverse CDF, so
/// identical random streams give identical samples on every platform.
fn sample_exp<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -mean * (1.0 - u).ln()
}

/// One slot of physical-layer randomness: draws the fading gains for the
/// active links and applies the SINR / harvested-energy threshold rules.
/// Returns `(data_success, energy_success)`.
pub fn sample_slot_physics<R: Rng + ?Sized>(
    params: &ChannelParams,
    case: ActivityCase,
    rng: &mut R,
) -> (bool, bool) {
    let g1 = params.g1();
    let g2 = params.g2();
    let rho2 = params.rho * params.rho;
    match case {
        ActivityCase::Both => {
            // Decode and harvest are independent events in the analytical
            // model, so each threshold rule gets its own fading draws.
            let a1 = sample_exp(params.upsilon1, rng);
            let a2 = sample_exp(params.upsilon2, rng);
            let data = if params.rho >= 1.0 {
                false
            } else {
                g1 * a1 / (g2 * a2 + params.p_noise / (1.0 - rho2)) >= params.gamma_d
            };
            let b1 = sample_exp(params.upsilon1, rng);
            let b2 = sample_exp(params.upsilon2, rng);
            let energy = rho2 * (g1 * b1 + g2 * b2) >= params.gamma_e;
            (data, energy)
        }
        ActivityCase::Only1 => {
            let a1 = sample_exp(params.upsilon1, rng);
            (g1 * a1 / params.p_noise >= params.gamma_d, false)
        }
        ActivityCase::Only2 => {
            let a2 = sample_exp(params.upsilon2, rng);
            (false, g2 * a2 >= params.gamma_e)
        }
    }
}
