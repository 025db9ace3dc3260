//! Brute-force references for small instances. They reuse the channel and
//! rate formulas but none of the search code.

use crate::channel::{single_power_gain, SingleWgLayout, Users};
use crate::multi_opt::{QuadraticForm, SimplexPoint};
use crate::noma::{bit_rate, gamma_s, sic_rate, EffectiveGain};
use crate::params::ScenarioConfig;
use crate::scalar::Real;
use crate::semantics::SemanticModel;
use crate::error::Result;

/// Grid maximizer of the semantic rate over `alpha in (0, 0.5]` subject to the
/// bit-user rate and SIC rate constraints; 0 when no grid point is feasible.
pub fn brute_alpha<T: Real>(g2_s: T, g2_b: T, cfg: &ScenarioConfig<T>, step: T) -> T {
    let model = SemanticModel::new(cfg.semantic.clone());
    let n = (T::lit(0.5) / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let mut best = (T::zero(), T::neg_infinity());
    for i in 1..=n {
        let a = (T::from_usize_lossy(i) * step).min(T::lit(0.5));
        let ok = bit_rate(g2_b, a, cfg.p_max, cfg.sigma2) >= cfg.r_b_min
            && sic_rate(g2_s, a, cfg.p_max, cfg.sigma2) >= cfg.r_b_min;
        if !ok {
            continue;
        }
        let r = model.rate(gamma_s(g2_s, a, cfg.p_max, cfg.sigma2));
        // Ties (saturated logistic) go to the larger split.
        if r >= best.1 {
            best = (a, r);
        }
    }
    best.0
}

/// Best grid point of the simplex for the true `q_S` under `q_S, q_B >= t_b`.
pub fn brute_beta<T: Real>(
    qs: &QuadraticForm<T>,
    qb: &QuadraticForm<T>,
    t_b: T,
    grid_step: T,
) -> Option<(SimplexPoint<T>, T)> {
    let k = qs.k;
    let cells = (T::one() / grid_step).round().to_usize().unwrap_or(1).max(1);
    let mut counts = vec![0usize; k];
    let mut best: Option<(Vec<usize>, T)> = None;
    loop {
        if counts.iter().sum::<usize>() == cells {
            let z: Vec<T> = counts
                .iter()
                .map(|&c| (T::from_usize_lossy(c) / T::from_usize_lossy(cells)).sqrt())
                .collect();
            let vs = qs.value(&z);
            if vs >= t_b && qb.value(&z) >= t_b && best.as_ref().is_none_or(|(_, b)| vs > *b) {
                best = Some((counts.clone(), vs));
            }
        }
        // Odometer over {0..=cells}^k.
        let mut i = 0;
        loop {
            if i == k {
                return best.map(|(c, v)| {
                    let beta = c
                        .iter()
                        .map(|&c| T::from_usize_lossy(c) / T::from_usize_lossy(cells))
                        .collect();
                    (SimplexPoint::from_beta(beta).expect("grid point on simplex"), v)
                });
            }
            counts[i] += 1;
            if counts[i] <= cells {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Result of a dense lead-antenna scan.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadScan<T> {
    pub lead: T,
    pub layout: SingleWgLayout<T>,
    pub gains: EffectiveGain<T>,
}

/// Dense scan of the lead antenna over the segment between the users'
/// x-coordinates (clamped to the region). Trailing antennas sit at the minimum
/// spacing towards the centre. Returns the largest `|g_S|^2` among leads whose
/// gains admit `alpha_s`, or `None` when there is none.
pub fn brute_lead_position<T: Real>(
    users: &Users<T>,
    alpha_s: T,
    cfg: &ScenarioConfig<T>,
    grid_step_m: T,
) -> Result<Option<LeadScan<T>>> {
    let half = cfg.side / T::lit(2.0);
    let a = users.semantic.x.max(-half).min(half);
    let b = users.bit.x.max(-half).min(half);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let w = cfg.wavelengths();
    let steps = ((hi - lo) / grid_step_m).floor().to_usize().unwrap_or(0);
    let mut best: Option<LeadScan<T>> = None;
    for i in 0..=steps + 1 {
        let x = if i <= steps {
            lo + T::from_usize_lossy(i) * grid_step_m
        } else {
            hi
        };
        let layout = trailing_layout(x, cfg);
        let g = EffectiveGain {
            g2_s: single_power_gain(&layout, &users.semantic, &w)?,
            g2_b: single_power_gain(&layout, &users.bit, &w)?,
        };
        let ok = bit_rate(g.g2_b, alpha_s, cfg.p_max, cfg.sigma2) >= cfg.r_b_min
            && sic_rate(g.g2_s, alpha_s, cfg.p_max, cfg.sigma2) >= cfg.r_b_min;
        if ok && best.as_ref().is_none_or(|s| g.g2_s > s.gains.g2_s) {
            best = Some(LeadScan {
                lead: x,
                layout,
                gains: g,
            });
        }
    }
    Ok(best)
}

fn trailing_layout<T: Real>(lead: T, cfg: &ScenarioConfig<T>) -> SingleWgLayout<T> {
    let n = cfg.n_antennas;
    let step = if lead > T::zero() {
        -cfg.min_spacing
    } else {
        cfg.min_spacing
    };
    let mut xs: Vec<T> = (0..n).map(|i| lead + T::from_usize_lossy(i) * step).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite positions"));
    SingleWgLayout::pinched(xs, cfg)
}
