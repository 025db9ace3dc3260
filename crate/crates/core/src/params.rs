//! Scenario configuration, unit conversions and derived constants.
//!
//! Everything inside the crate is SI: metres, watts, hertz, radians. Decibel
//! quantities only appear in the config file and on the command line.

use serde::Deserialize;
use std::path::Path;

use crate::error::{config_err, Result};
use crate::scalar::Real;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    T::lit(10.0).powf((dbm - T::lit(30.0)) / T::lit(10.0))
}

pub fn watts_to_dbm<T: Real>(watts: T) -> T {
    T::lit(10.0) * watts.log10() + T::lit(30.0)
}

/// How the fixed-antenna baseline combines its elements at a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CasCombining {
    /// Complex sum of element channels with zero feed phase.
    #[default]
    Coherent,
    /// Sum of element powers.
    Incoherent,
}

/// Generalized-logistic semantic similarity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticConfig<T> {
    /// Semantic symbols per word.
    pub k: usize,
    /// Semantic information per word (suts).
    pub i_over_l: T,
    pub a1: T,
    pub a2: T,
    pub c1: T,
    pub c2: T,
    /// Carried for completeness; no model equation consumes it.
    pub mu: T,
}

impl<T: Real> Default for SemanticConfig<T> {
    fn default() -> Self {
        Self {
            k: 5,
            i_over_l: T::one(),
            a1: T::lit(0.37),
            a2: T::lit(0.98),
            c1: T::lit(0.25),
            c2: T::lit(-0.7895),
            mu: T::lit(40.0),
        }
    }
}

impl<T: Real> SemanticConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(config_err("k", "must be >= 1"));
        }
        if !(self.i_over_l > T::zero()) {
            return Err(config_err("i_over_l", "must be > 0"));
        }
        if !(self.a1 >= T::zero() && self.a1 < self.a2 && self.a2 <= T::one()) {
            return Err(config_err("a1", "need 0 <= a1 < a2 <= 1"));
        }
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(config_err("c1", "logistic constants must be finite"));
        }
        Ok(())
    }
}

/// Physical, QoS and algorithm parameters of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    /// Carrier frequency (Hz).
    pub carrier_hz: T,
    /// Waveguide / antenna height above the user plane (m).
    pub height: T,
    /// Side of the square service region (m).
    pub side: T,
    /// Pinching antennas on the single waveguide (also CAS element count).
    pub n_antennas: usize,
    pub n_waveguides: usize,
    pub eta_eff: T,
    /// Minimum adjacent antenna spacing (m).
    pub min_spacing: T,
    /// Fine-tuning step (m).
    pub fine_step: T,
    /// Transmit power (W).
    pub p_max: T,
    /// Noise power (W).
    pub sigma2: T,
    /// Bit-user rate requirement (bps/Hz).
    pub r_b_min: T,
    /// Phase precision targets (rad).
    pub delta_s: T,
    pub delta_b: T,
    /// Bisection bracket tolerance (m).
    pub bisect_tol: T,
    /// Simplex grid step for waveguide power allocation.
    pub mm_grid_step: T,
    /// Alternating-optimization iteration cap.
    pub max_iters: usize,
    /// MM iteration cap inside one waveguide power update.
    pub mm_max_iters: usize,
    pub seed: u64,
    /// Lateral waveguide offsets (m); `None` spreads them evenly over [-D/4, D/4].
    pub offsets: Option<Vec<T>>,
    pub cas_combining: CasCombining,
    pub semantic: SemanticConfig<T>,
}

/// Wavelength-derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelengths<T> {
    /// Free-space wavelength (m).
    pub lambda: T,
    /// Guided wavelength (m).
    pub lambda_g: T,
    /// Free-space path gain at 1 m (m^2).
    pub eta: T,
}

pub fn derived_constants<T: Real>(carrier_hz: T, eta_eff: T) -> Wavelengths<T> {
    let lambda = T::lit(SPEED_OF_LIGHT) / carrier_hz;
    let sixteen_pi2 = T::lit(16.0) * T::PI() * T::PI();
    Wavelengths {
        lambda,
        lambda_g: lambda / eta_eff,
        eta: lambda * lambda / sixteen_pi2,
    }
}

impl<T: Real> Default for ScenarioConfig<T> {
    fn default() -> Self {
        let carrier_hz = T::lit(28e9);
        let lambda = T::lit(SPEED_OF_LIGHT) / carrier_hz;
        Self {
            carrier_hz,
            height: T::lit(3.0),
            side: T::lit(20.0),
            n_antennas: 3,
            n_waveguides: 3,
            eta_eff: T::lit(1.4),
            min_spacing: lambda / T::lit(2.0),
            fine_step: lambda / T::lit(10.0),
            p_max: dbm_to_watts(T::lit(10.0)),
            sigma2: dbm_to_watts(T::lit(-90.0)),
            r_b_min: T::lit(0.5),
            delta_s: T::lit(0.02),
            delta_b: T::lit(0.02),
            bisect_tol: lambda / T::lit(100.0),
            mm_grid_step: T::lit(0.01),
            max_iters: 50,
            mm_max_iters: 50,
            seed: 0x5EED_0F_5A55,
            offsets: None,
            cas_combining: CasCombining::Coherent,
            semantic: SemanticConfig::default(),
        }
    }
}

impl<T: Real> ScenarioConfig<T> {
    pub fn wavelengths(&self) -> Wavelengths<T> {
        derived_constants(self.carrier_hz, self.eta_eff)
    }

    pub fn tau(&self) -> T {
        T::lit(2.0).powf(self.r_b_min) - T::one()
    }

    pub fn set_power_dbm(&mut self, dbm: T) {
        self.p_max = dbm_to_watts(dbm);
    }

    pub fn with_power_dbm(mut self, dbm: T) -> Self {
        self.set_power_dbm(dbm);
        self
    }

    pub fn with_side(mut self, side: T) -> Self {
        self.side = side;
        self
    }

    pub fn with_antennas(mut self, n: usize) -> Self {
        self.n_antennas = n;
        self
    }

    pub fn with_waveguides(mut self, k: usize) -> Self {
        self.n_waveguides = k;
        self
    }

    pub fn with_rate_min(mut self, r: T) -> Self {
        self.r_b_min = r;
        self
    }

    pub fn with_phase_precision(mut self, delta_s: T, delta_b: T) -> Self {
        self.delta_s = delta_s;
        self.delta_b = delta_b;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Lateral offsets of the waveguides, defaulting to an even spread over [-D/4, D/4].
    pub fn lateral_offsets(&self) -> Vec<T> {
        if let Some(o) = &self.offsets {
            return o.clone();
        }
        let k = self.n_waveguides;
        let quarter = self.side / T::lit(4.0);
        if k == 1 {
            return vec![T::zero()];
        }
        let step = (quarter + quarter) / T::from_usize_lossy(k - 1);
        (0..k).map(|i| -quarter + step * T::from_usize_lossy(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.carrier_hz) {
            return Err(config_err("fc_hz", "must be > 0"));
        }
        if !pos(self.height) {
            return Err(config_err("height_m", "must be > 0"));
        }
        if !pos(self.side) {
            return Err(config_err("side_m", "must be > 0"));
        }
        if self.n_antennas == 0 {
            return Err(config_err("n_antennas", "must be >= 1"));
        }
        if self.n_waveguides == 0 {
            return Err(config_err("n_waveguides", "must be >= 1"));
        }
        if !(self.eta_eff > T::one()) {
            return Err(config_err("eta_eff", "must be > 1"));
        }
        let w = self.wavelengths();
        // Allow for the rounding in lambda/2 itself.
        if !(self.min_spacing >= w.lambda / T::lit(2.0) * (T::one() - T::lit(1e-9))) {
            return Err(config_err(
                "min_spacing_m",
                format!("must be >= lambda/2 = {}", (w.lambda / T::lit(2.0)).to64()),
            ));
        }
        if !pos(self.fine_step) {
            return Err(config_err("fine_step_m", "must be > 0"));
        }
        if !pos(self.p_max) {
            return Err(config_err("p_max_dbm", "power must be positive"));
        }
        if !pos(self.sigma2) {
            return Err(config_err("sigma2_dbm", "noise power must be positive"));
        }
        if !(self.r_b_min >= T::zero()) {
            return Err(config_err("r_b_min", "must be >= 0"));
        }
        if !pos(self.delta_s) {
            return Err(config_err("delta_s", "must be > 0"));
        }
        if !pos(self.delta_b) {
            return Err(config_err("delta_b", "must be > 0"));
        }
        if !pos(self.bisect_tol) {
            return Err(config_err("bisect_tol_m", "must be > 0"));
        }
        if !(self.mm_grid_step > T::zero() && self.mm_grid_step <= T::one()) {
            return Err(config_err("mm_grid_step", "must lie in (0, 1]"));
        }
        let cells = (T::one() / self.mm_grid_step).round();
        if ((T::one() / self.mm_grid_step) - cells).abs() > T::lit(1e-6) {
            return Err(config_err("mm_grid_step", "1/step must be an integer"));
        }
        if self.max_iters == 0 {
            return Err(config_err("max_iters", "must be >= 1"));
        }
        if self.mm_max_iters == 0 {
            return Err(config_err("mm_max_iters", "must be >= 1"));
        }
        if T::from_usize_lossy(self.n_antennas) * self.min_spacing > self.side {
            return Err(config_err(
                "n_antennas",
                format!(
                    "{} antennas at spacing {} m exceed side {} m",
                    self.n_antennas,
                    self.min_spacing.to64(),
                    self.side.to64()
                ),
            ));
        }
        let offsets = self.lateral_offsets();
        if offsets.len() != self.n_waveguides {
            return Err(config_err(
                "offsets_m",
                format!("{} offsets for {} waveguides", offsets.len(), self.n_waveguides),
            ));
        }
        for (i, a) in offsets.iter().enumerate() {
            if !a.is_finite() || a.abs() > self.side / T::lit(2.0) {
                return Err(config_err("offsets_m", "offsets must lie inside the region"));
            }
            if offsets[..i].iter().any(|b| b == a) {
                return Err(config_err("offsets_m", "offsets must be pairwise distinct"));
            }
        }
        self.semantic.validate()
    }
}

/// On-disk configuration: `[scenario]` and `[semantic]` tables, every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub semantic: SemanticSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub fc_hz: Option<f64>,
    pub height_m: Option<f64>,
    pub side_m: Option<f64>,
    pub n_antennas: Option<usize>,
    pub n_waveguides: Option<usize>,
    pub eta_eff: Option<f64>,
    pub min_spacing_m: Option<f64>,
    pub fine_step_m: Option<f64>,
    pub p_max_dbm: Option<f64>,
    pub sigma2_dbm: Option<f64>,
    pub r_b_min: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_b: Option<f64>,
    pub bisect_tol_m: Option<f64>,
    pub mm_grid_step: Option<f64>,
    pub max_iters: Option<usize>,
    pub mm_max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub offsets_m: Option<Vec<f64>>,
    pub cas_combining: Option<CasCombining>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticSection {
    pub k: Option<usize>,
    pub i_over_l: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub mu: Option<f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Resolve into a validated scenario. Wavelength-relative lengths that are
    /// not given are derived from the (possibly overridden) carrier.
    pub fn resolve<T: Real>(&self) -> Result<ScenarioConfig<T>> {
        let s = &self.scenario;
        let mut cfg = ScenarioConfig::<T>::default();
        let lit = T::lit;
        if let Some(v) = s.fc_hz {
            cfg.carrier_hz = lit(v);
        }
        let lambda = cfg.wavelengths().lambda;
        cfg.min_spacing = s.min_spacing_m.map(lit).unwrap_or(lambda / lit(2.0));
        cfg.fine_step = s.fine_step_m.map(lit).unwrap_or(lambda / lit(10.0));
        cfg.bisect_tol = s.bisect_tol_m.map(lit).unwrap_or(lambda / lit(100.0));
        if let Some(v) = s.height_m {
            cfg.height = lit(v);
        }
        if let Some(v) = s.side_m {
            cfg.side = lit(v);
        }
        if let Some(v) = s.n_antennas {
            cfg.n_antennas = v;
        }
        if let Some(v) = s.n_waveguides {
            cfg.n_waveguides = v;
        }
        if let Some(v) = s.eta_eff {
            cfg.eta_eff = lit(v);
        }
        if let Some(v) = s.p_max_dbm {
            cfg.p_max = dbm_to_watts(lit(v));
        }
        if let Some(v) = s.sigma2_dbm {
            cfg.sigma2 = dbm_to_watts(lit(v));
        }
        if let Some(v) = s.r_b_min {
            cfg.r_b_min = lit(v);
        }
        if let Some(v) = s.delta_s {
            cfg.delta_s = lit(v);
        }
        if let Some(v) = s.delta_b {
            cfg.delta_b = lit(v);
        }
        if let Some(v) = s.mm_grid_step {
            cfg.mm_grid_step = lit(v);
        }
        if let Some(v) = s.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = s.mm_max_iters {
            cfg.mm_max_iters = v;
        }
        if let Some(v) = s.seed {
            cfg.seed = v;
        }
        if let Some(v) = &s.offsets_m {
            cfg.offsets = Some(v.iter().copied().map(lit).collect());
        }
        if let Some(v) = s.cas_combining {
            cfg.cas_combining = v;
        }
        let m = &self.semantic;
        let sem = &mut cfg.semantic;
        if let Some(v) = m.k {
            sem.k = v;
        }
        if let Some(v) = m.i_over_l {
            sem.i_over_l = lit(v);
        }
        if let Some(v) = m.a1 {
            sem.a1 = lit(v);
        }
        if let Some(v) = m.a2 {
            sem.a2 = lit(v);
        }
        if let Some(v) = m.c1 {
            sem.c1 = lit(v);
        }
        if let Some(v) = m.c2 {
            sem.c2 = lit(v);
        }
        if let Some(v) = m.mu {
            sem.mu = lit(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
