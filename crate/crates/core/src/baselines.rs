//! Comparison schemes and the one entry point every scheme goes through.

use std::fmt;
use std::str::FromStr;

use crate::channel::{element_gains, MultiWgLayout, SingleWgLayout, Users};
use crate::error::{Error, Result};
use crate::multi_opt::{ao_solve_multi_with, MultiAoOptions};
use crate::noma::{EffectiveGain, LinkBudget};
use crate::params::{CasCombining, ScenarioConfig};
use crate::scalar::Real;
use crate::single_opt::{ao_solve_with, bisection_position, initial_layout, power_gains, AoOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Cas,
    FixedPinch,
    NoFineTune,
}

/// Every scheme the simulator can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    PassSingle,
    PassMulti,
    Cas,
    FixedPinch,
    NoFineTune,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::PassSingle,
        Scheme::PassMulti,
        Scheme::Cas,
        Scheme::FixedPinch,
        Scheme::NoFineTune,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::PassSingle => "pass-single",
            Scheme::PassMulti => "pass-multi",
            Scheme::Cas => "cas",
            Scheme::FixedPinch => "fixed-pinch",
            Scheme::NoFineTune => "no-finetune",
        }
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            Scheme::Cas => Some(BaselineKind::Cas),
            Scheme::FixedPinch => Some(BaselineKind::FixedPinch),
            Scheme::NoFineTune => Some(BaselineKind::NoFineTune),
            _ => None,
        }
    }

    pub fn is_multi(self) -> bool {
        matches!(self, Scheme::PassMulti | Scheme::FixedPinch)
    }
}

impl From<BaselineKind> for Scheme {
    fn from(b: BaselineKind) -> Self {
        match b {
            BaselineKind::Cas => Scheme::Cas,
            BaselineKind::FixedPinch => Scheme::FixedPinch,
            BaselineKind::NoFineTune => Scheme::NoFineTune,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Fixed array centred on the origin at half-wavelength spacing, no waveguide.
pub fn cas_layout<T: Real>(cfg: &ScenarioConfig<T>) -> SingleWgLayout<T> {
    let n = cfg.n_antennas;
    let spacing = cfg.wavelengths().lambda / T::lit(2.0);
    let centre = T::from_usize_lossy(n - 1) / T::lit(2.0);
    SingleWgLayout {
        positions: (0..n)
            .map(|i| (T::from_usize_lossy(i) - centre) * spacing)
            .collect(),
        feed: None,
        height: cfg.height,
    }
}

/// One pinch at the centre of every waveguide.
pub fn fixed_pinch_layout<T: Real>(cfg: &ScenarioConfig<T>) -> MultiWgLayout<T> {
    MultiWgLayout::new(vec![T::zero(); cfg.n_waveguides], cfg)
}

/// Lead antenna from the bisection at `alpha_s`, the rest at the minimum
/// spacing, with no phase alignment. Falls back to the initial layout when the
/// bisection finds nothing feasible.
pub fn no_finetune_layout<T: Real>(
    alpha_s: T,
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
) -> Result<SingleWgLayout<T>> {
    match bisection_position(alpha_s, users, cfg)?.layout {
        Some(l) => Ok(l),
        None => initial_layout(cfg),
    }
}

/// CAS gains under the configured combining rule, `/N` like the pinched array.
pub fn cas_gains<T: Real>(users: &Users<T>, cfg: &ScenarioConfig<T>) -> Result<EffectiveGain<T>> {
    let layout = cas_layout(cfg);
    let w = cfg.wavelengths();
    match cfg.cas_combining {
        CasCombining::Coherent => power_gains(&layout, users, &w),
        CasCombining::Incoherent => {
            let n = T::from_usize_lossy(layout.len());
            let sum = |u| -> Result<T> {
                Ok(element_gains(&layout, u, &w)?
                    .iter()
                    .map(|h| h.norm_sqr())
                    .sum::<T>()
                    / n)
            };
            Ok(EffectiveGain {
                g2_s: sum(&users.semantic)?,
                g2_b: sum(&users.bit)?,
            })
        }
    }
}

/// Outcome of one scheme on one user pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome<T> {
    pub semantic_se: T,
    pub bit_rate: T,
    pub alpha_s: T,
    pub feasible: bool,
    pub iterations: usize,
}

/// Runs `scheme`; all of them end in the same split optimizer.
pub fn solve<T: Real>(scheme: Scheme, users: &Users<T>, cfg: &ScenarioConfig<T>) -> Result<SchemeOutcome<T>> {
    match scheme {
        Scheme::PassSingle | Scheme::NoFineTune => {
            let opts = AoOptions {
                fine_tune: scheme == Scheme::PassSingle,
            };
            let st = ao_solve_with(users, cfg, opts)?;
            Ok(SchemeOutcome {
                semantic_se: st.semantic_se,
                bit_rate: st.bit_rate,
                alpha_s: st.alpha_s,
                feasible: st.feasible,
                iterations: st.iteration,
            })
        }
        Scheme::PassMulti | Scheme::FixedPinch => {
            let opts = MultiAoOptions {
                optimize_positions: scheme == Scheme::PassMulti,
            };
            let st = ao_solve_multi_with(users, cfg, opts)?;
            Ok(SchemeOutcome {
                semantic_se: st.semantic_se,
                bit_rate: st.bit_rate,
                alpha_s: st.alpha_s,
                feasible: st.feasible,
                iterations: st.iteration,
            })
        }
        Scheme::Cas => {
            let a = LinkBudget::new(cfg).optimize(&cas_gains(users, cfg)?);
            Ok(SchemeOutcome {
                semantic_se: a.semantic_se,
                bit_rate: a.bit_rate,
                alpha_s: a.alpha_s,
                feasible: a.feasible,
                iterations: 0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Point3;

    #[test]
    fn scheme_tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.tag().parse::<Scheme>().unwrap(), s);
        }
        assert!(matches!("pass".parse::<Scheme>(), Err(Error::UnknownScheme(_))));
    }

    #[test]
    fn cas_geometry() {
        let cfg = ScenarioConfig::<f64>::default();
        let l = cas_layout(&cfg);
        let half = cfg.wavelengths().lambda / 2.0;
        assert_eq!(l.feed, None);
        assert!((l.positions[0] + half).abs() < 1e-15);
        assert_eq!(l.positions[1], 0.0);
        assert!((l.positions[2] - half).abs() < 1e-15);
        assert_eq!(l.height, cfg.height);
    }

    #[test]
    fn fixed_pinch_geometry() {
        let cfg = ScenarioConfig::<f64>::default();
        let l = fixed_pinch_layout(&cfg);
        assert_eq!(l.positions, vec![0.0; 3]);
        assert_eq!(l.offsets, vec![-5.0, 0.0, 5.0]);
    }

    #[test]
    fn incoherent_cas_is_elementwise_power() {
        let mut cfg = ScenarioConfig::<f64>::default().with_antennas(1);
        let users = Users {
            semantic: Point3::new(3.0, 1.0, 0.0),
            bit: Point3::new(-6.0, 2.0, 0.0),
        };
        let coh = cas_gains(&users, &cfg).unwrap();
        cfg.cas_combining = CasCombining::Incoherent;
        let inc = cas_gains(&users, &cfg).unwrap();
        assert!((coh.g2_s - inc.g2_s).abs() <= 1e-15 * coh.g2_s);
    }

    #[test]
    fn no_finetune_single_antenna_matches_finetune() {
        let cfg = ScenarioConfig::<f64>::default().with_antennas(1);
        let users = Users {
            semantic: Point3::new(4.0, 3.0, 0.0),
            bit: Point3::new(-7.0, -2.0, 0.0),
        };
        let a = solve(Scheme::PassSingle, &users, &cfg).unwrap();
        let b = solve(Scheme::NoFineTune, &users, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
