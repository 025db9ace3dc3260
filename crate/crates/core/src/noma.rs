//! Two-user NOMA rate algebra with bit-to-semantic SIC order.
//!
//! The bit user decodes its own signal treating the semantic signal as noise;
//! the semantic user first decodes (and removes) the bit signal, then its own
//! interference-free. Power gains handed in here already carry any array power
//! normalization.

use crate::error::{Error, Result};
use crate::params::ScenarioConfig;
use crate::scalar::Real;
use crate::semantics::SemanticModel;

/// Composite power gains `|g_S|^2`, `|g_B|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EffectiveGain<T> {
    pub g2_s: T,
    pub g2_b: T,
}

/// Semantic power coefficient; the bit user gets the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit<T>(T);

impl<T: Real> PowerSplit<T> {
    /// Accepts `alpha_S` in `(0, 0.5]`; the upper end is reachable through the clamp.
    pub fn new(alpha_s: T) -> Option<Self> {
        (alpha_s > T::zero() && alpha_s <= T::lit(0.5)).then_some(Self(alpha_s))
    }

    pub fn alpha_s(&self) -> T {
        self.0
    }

    pub fn alpha_b(&self) -> T {
        T::one() - self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosThreshold<T> {
    pub tau: T,
}

impl<T: Real> QosThreshold<T> {
    pub fn from_rate(r_b_min: T) -> Self {
        Self {
            tau: T::lit(2.0).powf(r_b_min) - T::one(),
        }
    }
}

/// Largest `alpha_S` admitted by the bit-user QoS and by SIC at the semantic user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBounds<T> {
    pub qos: T,
    pub sic: T,
}

fn bit_decoding_rate<T: Real>(g2: T, alpha_s: T, p_max: T, sigma2: T) -> T {
    let rx = p_max * g2;
    let sinr = (T::one() - alpha_s) * rx / (alpha_s * rx + sigma2);
    sinr.ln_1p() / T::LN_2()
}

/// Bit-user rate (bps/Hz).
pub fn bit_rate<T: Real>(g2_b: T, alpha_s: T, p_max: T, sigma2: T) -> T {
    bit_decoding_rate(g2_b, alpha_s, p_max, sigma2)
}

/// Rate at which the semantic user decodes the bit signal before cancelling it.
pub fn sic_rate<T: Real>(g2_s: T, alpha_s: T, p_max: T, sigma2: T) -> T {
    bit_decoding_rate(g2_s, alpha_s, p_max, sigma2)
}

/// Post-SIC semantic SNR `alpha_S P |g_S|^2 / sigma^2`.
pub fn gamma_s<T: Real>(g2_s: T, alpha_s: T, p_max: T, sigma2: T) -> T {
    alpha_s * p_max * g2_s / sigma2
}

fn alpha_bound<T: Real>(g2: T, tau: T, p_max: T, sigma2: T) -> T {
    let rx = p_max * g2;
    if !(rx > T::zero()) {
        return T::neg_infinity();
    }
    (rx - tau * sigma2) / (rx * (T::one() + tau))
}

pub fn alpha_bounds<T: Real>(g2_s: T, g2_b: T, tau: T, p_max: T, sigma2: T) -> AlphaBounds<T> {
    AlphaBounds {
        qos: alpha_bound(g2_b, tau, p_max, sigma2),
        sic: alpha_bound(g2_s, tau, p_max, sigma2),
    }
}

/// `max{0, min{alpha_qos, alpha_sic, 1/2}}`; zero marks an infeasible geometry.
pub fn alpha_star<T: Real>(bounds: AlphaBounds<T>) -> T {
    let a = bounds.qos.min(bounds.sic).min(T::lit(0.5));
    if a > T::zero() {
        a
    } else {
        T::zero()
    }
}

/// Minimum power gain `tau sigma^2 / (P (alpha_B - tau alpha_S))` meeting the bit rate target.
pub fn t_threshold<T: Real>(alpha_s: T, tau: T, p_max: T, sigma2: T) -> Result<T> {
    let margin = (T::one() - alpha_s) - tau * alpha_s;
    if !(margin > T::zero()) {
        return Err(Error::InfeasibleSplit(margin.to64()));
    }
    Ok(tau * sigma2 / (p_max * margin))
}

/// Outcome of the power split at one geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation<T> {
    pub alpha_s: T,
    pub semantic_se: T,
    pub bit_rate: T,
    pub feasible: bool,
}

impl<T: Real> Allocation<T> {
    pub fn infeasible() -> Self {
        Self {
            alpha_s: T::zero(),
            semantic_se: T::zero(),
            bit_rate: T::zero(),
            feasible: false,
        }
    }

    /// Feasible beats infeasible, then larger semantic SE.
    pub fn better_or_equal(&self, other: &Self) -> bool {
        match (self.feasible, other.feasible) {
            (true, false) => true,
            (false, true) => false,
            _ => self.semantic_se >= other.semantic_se,
        }
    }
}

/// Everything needed to turn power gains into rates; built once per scenario.
#[derive(Debug, Clone)]
pub struct LinkBudget<T> {
    pub p_max: T,
    pub sigma2: T,
    pub r_b_min: T,
    pub tau: T,
    pub model: SemanticModel<T>,
}

impl<T: Real> LinkBudget<T> {
    pub fn new(cfg: &ScenarioConfig<T>) -> Self {
        Self {
            p_max: cfg.p_max,
            sigma2: cfg.sigma2,
            r_b_min: cfg.r_b_min,
            tau: QosThreshold::from_rate(cfg.r_b_min).tau,
            model: SemanticModel::new(cfg.semantic.clone()),
        }
    }

    pub fn bounds(&self, g: &EffectiveGain<T>) -> AlphaBounds<T> {
        alpha_bounds(g.g2_s, g.g2_b, self.tau, self.p_max, self.sigma2)
    }

    /// Whether both rate constraints hold at `alpha_s`. At `alpha_s = 0` this asks
    /// whether some positive split is admissible.
    pub fn admits(&self, g: &EffectiveGain<T>, alpha_s: T) -> bool {
        let b = self.bounds(g);
        let cap = b.qos.min(b.sic);
        cap >= T::zero() && alpha_s <= cap
    }

    /// Rates at a fixed split; infeasible splits score zero.
    pub fn evaluate(&self, g: &EffectiveGain<T>, alpha_s: T) -> Allocation<T> {
        if !(alpha_s > T::zero()) || !self.admits(g, alpha_s) {
            return Allocation::infeasible();
        }
        Allocation {
            alpha_s,
            semantic_se: self
                .model
                .rate(gamma_s(g.g2_s, alpha_s, self.p_max, self.sigma2)),
            bit_rate: bit_rate(g.g2_b, alpha_s, self.p_max, self.sigma2),
            feasible: true,
        }
    }

    /// Closed-form optimal split for fixed gains.
    pub fn optimize(&self, g: &EffectiveGain<T>) -> Allocation<T> {
        let a = alpha_star(self.bounds(g));
        self.evaluate(g, a)
    }
}
