//! Small oracle suite behind the `verify` command: closed-form split, MM power
//! allocation and lead placement, each against its brute-force reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::MultiWgLayout;
use crate::error::Result;
use crate::multi_opt::{build_q, waveguide_power_allocate, WaveguideChannels};
use crate::noma::{alpha_bounds, alpha_star, t_threshold, LinkBudget, QosThreshold};
use crate::oracle::{brute_alpha, brute_beta, brute_lead_position};
use crate::params::ScenarioConfig;
use crate::sim::sample_users;
use crate::single_opt::{bisection_position, initial_layout, power_gains};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every check with `instances` random cases each, seeded from `cfg.seed`.
pub fn run_checks(cfg: &ScenarioConfig<f64>, instances: usize) -> Result<Vec<Check>> {
    cfg.validate()?;
    Ok(vec![
        split_check(cfg, instances),
        mm_check(cfg, instances)?,
        bisection_check(cfg, instances)?,
    ])
}

fn split_check(cfg: &ScenarioConfig<f64>, instances: usize) -> Check {
    let tau = QosThreshold::from_rate(cfg.r_b_min).tau;
    let floor = tau * cfg.sigma2 / cfg.p_max;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut worst, mut mismatched) = (0.0f64, 0);
    for _ in 0..instances {
        let gs = 10f64.powf(rng.random_range(-12.0..-7.0));
        let gb = 10f64.powf(rng.random_range(-12.0..-7.0));
        let closed = alpha_star(alpha_bounds(gs, gb, tau, cfg.p_max, cfg.sigma2));
        let brute = brute_alpha(gs, gb, cfg, 1e-4);
        if gs > floor && gb > floor {
            worst = worst.max((closed - brute).abs());
        } else if closed != 0.0 || brute != 0.0 {
            mismatched += 1;
        }
    }
    Check {
        name: "power split vs grid scan",
        passed: worst <= 1e-3 && mismatched == 0,
        detail: format!("max |diff|={worst:.2e}, sentinel mismatches={mismatched}"),
    }
}

fn mm_check(cfg: &ScenarioConfig<f64>, instances: usize) -> Result<Check> {
    let cfg = cfg.clone().with_waveguides(3);
    let w = cfg.wavelengths();
    let half = cfg.side / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4d4d);
    let (mut worst, mut done) = (f64::INFINITY, 0);
    for i in 0..instances as u64 * 20 {
        if done == instances {
            break;
        }
        let users = sample_users::<f64>(cfg.seed, i, cfg.side);
        let pos: Vec<f64> = (0..3).map(|_| rng.random_range(-half..half)).collect();
        let layout = MultiWgLayout::new(pos, &cfg);
        let ch = WaveguideChannels::new(&layout, &users, &w)?;
        let (qs, qb) = (build_q(&ch.semantic), build_q(&ch.bit));
        let t_b = t_threshold(rng.random_range(0.01..0.5), cfg.tau(), cfg.p_max, cfg.sigma2)?;
        let Ok(out) = waveguide_power_allocate(&qs, &qb, t_b, &cfg) else {
            continue;
        };
        if let Some((_, best)) = brute_beta(&qs, &qb, t_b, cfg.mm_grid_step) {
            worst = worst.min(out.final_q_s() / best);
            done += 1;
        }
    }
    Ok(Check {
        name: "waveguide power allocation vs simplex grid",
        passed: worst >= 0.99,
        detail: format!("{done} instances, worst q_S ratio={worst:.4}"),
    })
}

fn bisection_check(cfg: &ScenarioConfig<f64>, instances: usize) -> Result<Check> {
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let start = initial_layout(cfg)?;
    let (mut worst, mut disagree) = (f64::INFINITY, 0);
    for i in 0..instances as u64 {
        let users = sample_users::<f64>(cfg.seed, i, cfg.side);
        let alpha = link.optimize(&power_gains(&start, &users, &w)?).alpha_s;
        let se = |g2_s: f64| link.model.rate(alpha * cfg.p_max * g2_s / cfg.sigma2);
        let found = bisection_position(alpha, &users, cfg)?;
        let oracle = brute_lead_position(&users, alpha, cfg, w.lambda / 20.0)?;
        match (found.layout, oracle) {
            (Some(l), Some(o)) => {
                worst = worst.min(se(power_gains(&l, &users, &w)?.g2_s) / se(o.gains.g2_s));
            }
            (None, None) => {}
            _ => disagree += 1,
        }
    }
    Ok(Check {
        name: "lead placement vs dense scan",
        passed: worst >= 1.0 - 1e-3 && disagree == 0,
        detail: format!("worst SE ratio={worst:.6}, feasibility disagreements={disagree}"),
    })
}
