//! Semantic similarity and semantic spectral efficiency.

use crate::params::SemanticConfig;
use crate::scalar::Real;

/// Logistic `1 / (1 + exp(-t))` evaluated without overflow for any finite `t`.
fn logistic<T: Real>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticModel<T> {
    pub cfg: SemanticConfig<T>,
}

impl<T: Real> SemanticModel<T> {
    pub fn new(cfg: SemanticConfig<T>) -> Self {
        Self { cfg }
    }

    /// Similarity `A1 + (A2 - A1) / (1 + exp(-(C1 gamma + C2)))` for a linear SNR.
    pub fn epsilon(&self, gamma: T) -> T {
        let c = &self.cfg;
        if gamma == T::infinity() {
            return c.a2;
        }
        c.a1 + (c.a2 - c.a1) * logistic(c.c1 * gamma + c.c2)
    }

    /// Semantic rate `(I/L) / K * epsilon(gamma)` in suts/s/Hz.
    pub fn rate(&self, gamma: T) -> T {
        self.cfg.i_over_l / T::from_usize_lossy(self.cfg.k) * self.epsilon(gamma)
    }

    pub fn rate_bounds(&self) -> (T, T) {
        let scale = self.cfg.i_over_l / T::from_usize_lossy(self.cfg.k);
        (scale * self.cfg.a1, scale * self.cfg.a2)
    }
}

impl<T: Real> Default for SemanticModel<T> {
    fn default() -> Self {
        Self::new(SemanticConfig::default())
    }
}

pub fn epsilon_k<T: Real>(gamma: T, cfg: &SemanticConfig<T>) -> T {
    SemanticModel::new(cfg.clone()).epsilon(gamma)
}

pub fn semantic_rate<T: Real>(gamma: T, cfg: &SemanticConfig<T>) -> T {
    SemanticModel::new(cfg.clone()).rate(gamma)
}
