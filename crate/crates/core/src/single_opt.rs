//! Alternating optimization of the power split and the pinch positions on a
//! single waveguide.
//!
//! Each outer iteration runs a position update (bisection placement of the
//! lead antenna, then fine phase alignment of the remaining ones) followed by
//! the closed-form split for the new positions. The lead is placed at the
//! current split and along a fixed ladder of splits; a placement at one fixed
//! split alone tends to push `|g_B|^2` onto the QoS threshold and pin the
//! split near zero. Candidates are scored with their own optimal split and
//! adopted only if that does not lower the semantic SE, so the SE history
//! never decreases.

use crate::channel::{path_phase, single_power_gain, SingleWgLayout, Users};
use crate::error::{Error, Result};
use crate::noma::{Allocation, EffectiveGain, LinkBudget};
use crate::params::{ScenarioConfig, Wavelengths};
use crate::scalar::{wrap_pi, Real};

/// Stop when consecutive SE values differ by less than this (suts/s/Hz).
pub const SE_TOLERANCE: f64 = 1e-6;
/// Upper bound on fine-tuning sweeps over the antennas.
pub const MAX_FINE_SWEEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AoOptions {
    pub fine_tune: bool,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self { fine_tune: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoTraceRow<T> {
    pub iteration: usize,
    pub alpha_s: T,
    pub positions: Vec<T>,
    pub semantic_se: T,
}

/// Largest wrapped adjacent path-phase mismatch seen by each user (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseResiduals<T> {
    pub semantic: T,
    pub bit: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoState<T> {
    pub layout: SingleWgLayout<T>,
    pub alpha_s: T,
    pub semantic_se: T,
    pub bit_rate: T,
    /// Outer iterations performed.
    pub iteration: usize,
    pub feasible: bool,
    /// Semantic SE after initialization and after every outer iteration.
    pub history: Vec<T>,
    pub trace: Vec<AoTraceRow<T>>,
    pub residuals: PhaseResiduals<T>,
}

/// `|g_S|^2 / N` and `|g_B|^2 / N`.
pub fn power_gains<T: Real>(
    layout: &SingleWgLayout<T>,
    users: &Users<T>,
    w: &Wavelengths<T>,
) -> Result<EffectiveGain<T>> {
    Ok(EffectiveGain {
        g2_s: single_power_gain(layout, &users.semantic, w)?,
        g2_b: single_power_gain(layout, &users.bit, w)?,
    })
}

/// `N` antennas centred on the origin at the minimum spacing.
pub fn initial_layout<T: Real>(cfg: &ScenarioConfig<T>) -> Result<SingleWgLayout<T>> {
    let n = cfg.n_antennas;
    if T::from_usize_lossy(n) * cfg.min_spacing > cfg.side {
        return Err(Error::LayoutDoesNotFit {
            n,
            spacing: cfg.min_spacing.to64(),
            side: cfg.side.to64(),
        });
    }
    let centre = T::from_usize_lossy(n - 1) / T::lit(2.0);
    let positions = (0..n)
        .map(|i| (T::from_usize_lossy(i) - centre) * cfg.min_spacing)
        .collect();
    Ok(SingleWgLayout::pinched(positions, cfg))
}

/// Lead antenna at `lead` (clamped into the region); the others follow at the
/// minimum spacing towards the region centre.
pub fn lead_layout<T: Real>(lead: T, cfg: &ScenarioConfig<T>) -> SingleWgLayout<T> {
    let half = cfg.side / T::lit(2.0);
    let lead = lead.max(-half).min(half);
    let dir = if lead > T::zero() { -T::one() } else { T::one() };
    let mut positions: Vec<T> = (0..cfg.n_antennas)
        .map(|i| lead + dir * T::from_usize_lossy(i) * cfg.min_spacing)
        .collect();
    if dir < T::zero() {
        positions.reverse();
    }
    SingleWgLayout::pinched(positions, cfg)
}

fn clamp_to_region<T: Real>(x: T, cfg: &ScenarioConfig<T>) -> T {
    let half = cfg.side / T::lit(2.0);
    x.max(-half).min(half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection<T> {
    /// Best feasible layout visited, `None` when every probe was infeasible.
    pub layout: Option<SingleWgLayout<T>>,
    pub lead: Option<T>,
    pub iterations: usize,
    /// Initial bracket width (m).
    pub bracket: T,
    /// Probe with the largest SE under its own optimal split, if any is feasible.
    pub best_joint: Option<(T, T)>,
}

struct Probe<T> {
    g2_s: T,
    qos_ok: bool,
    sic_ok: bool,
    joint_se: Option<T>,
}

impl<T: Real> Probe<T> {
    fn feasible(&self) -> bool {
        self.qos_ok && self.sic_ok
    }
}

fn probe<T: Real>(
    lead: T,
    alpha_s: T,
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
    w: &Wavelengths<T>,
    link: &LinkBudget<T>,
) -> Result<Probe<T>> {
    let g = power_gains(&lead_layout(lead, cfg), users, w)?;
    let b = link.bounds(&g);
    let joint = link.optimize(&g);
    Ok(Probe {
        g2_s: g.g2_s,
        qos_ok: b.qos >= T::zero() && alpha_s <= b.qos,
        sic_ok: b.sic >= T::zero() && alpha_s <= b.sic,
        joint_se: joint.feasible.then_some(joint.semantic_se),
    })
}

/// Interior probes per half-bracket when choosing which half survives.
pub const HALF_SAMPLES: usize = 8;
/// Brackets narrower than this many wavelengths compare one probe per half.
pub const WIDE_BRACKET: f64 = 32.0;

/// Place the lead antenna by bisection between the users' x-coordinates.
///
/// The bracket starts at `[x_S, x_B]` and halves every iteration. Each half
/// is probed at `HALF_SAMPLES` evenly spaced interior points while the bracket
/// is wider than `WIDE_BRACKET` wavelengths, at its centre after that; the half holding
/// the largest feasible `|g_S|^2` survives (the semantic half on ties). When no
/// probe is feasible the midpoint steers: failing the bit-user QoS moves the
/// semantic end in, otherwise the bit-user end moves in. The best feasible
/// probe is returned.
pub fn bisection_position<T: Real>(
    alpha_s: T,
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
) -> Result<Bisection<T>> {
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let mut s_end = clamp_to_region(users.semantic.x, cfg);
    let mut b_end = clamp_to_region(users.bit.x, cfg);
    let bracket = (b_end - s_end).abs();

    let mut best: Option<(T, T)> = None;
    let mut best_joint: Option<(T, T)> = None;
    let mut keep = |x: T, p: &Probe<T>| {
        if p.feasible() && best.is_none_or(|(_, g)| p.g2_s > g) {
            best = Some((x, p.g2_s));
        }
        if let Some(se) = p.joint_se {
            if best_joint.is_none_or(|(_, b)| se > b) {
                best_joint = Some((x, se));
            }
        }
    };

    let ps = probe(s_end, alpha_s, users, cfg, &w, &link)?;
    keep(s_end, &ps);
    let pb = probe(b_end, alpha_s, users, cfg, &w, &link)?;
    keep(b_end, &pb);

    // ceil(log2(M / eps)) halvings reach the tolerance.
    let cap = if bracket > cfg.bisect_tol {
        (bracket / cfg.bisect_tol).log2().ceil().to_usize().unwrap_or(0)
    } else {
        0
    };
    let mut iterations = 0;
    while (b_end - s_end).abs() > cfg.bisect_tol && iterations < cap {
        iterations += 1;
        let mid = (s_end + b_end) / T::lit(2.0);
        let pm = probe(mid, alpha_s, users, cfg, &w, &link)?;
        keep(mid, &pm);
        let samples = if (b_end - s_end).abs() > T::lit(WIDE_BRACKET) * w.lambda {
            HALF_SAMPLES
        } else {
            1
        };
        let mut half_best = |a: T, b: T| -> Result<Option<T>> {
            let mut top: Option<T> = None;
            for i in 1..=samples {
                let t = T::from_usize_lossy(i) / T::from_usize_lossy(samples + 1);
                let x = a + (b - a) * t;
                let p = probe(x, alpha_s, users, cfg, &w, &link)?;
                keep(x, &p);
                if p.feasible() && top.is_none_or(|g| p.g2_s > g) {
                    top = Some(p.g2_s);
                }
            }
            Ok(top)
        };
        let on_s = half_best(s_end, mid)?;
        let on_b = half_best(mid, b_end)?;
        let go_s = match (on_s, on_b) {
            (Some(a), Some(b)) => a >= b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            // Nothing feasible: a QoS failure needs the bit user closer.
            (None, None) => pm.qos_ok,
        };
        if go_s {
            b_end = mid;
        } else {
            s_end = mid;
        }
    }

    Ok(Bisection {
        layout: best.map(|(x, _)| lead_layout(x, cfg)),
        lead: best.map(|(x, _)| x),
        iterations,
        bracket,
        best_joint,
    })
}

/// Anchor-side neighbour of every antenna except the anchor itself.
fn neighbours(n: usize, anchor: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).filter(move |&i| i != anchor).map(move |i| {
        if i > anchor {
            (i, i - 1)
        } else {
            (i, i + 1)
        }
    })
}

fn excess<T: Real>(layout: &SingleWgLayout<T>, anchor: usize, user: &crate::channel::Point3<T>, delta: T, w: &Wavelengths<T>) -> T {
    let feed = layout.feed.as_ref();
    let phases: Vec<T> = (0..layout.len())
        .map(|i| path_phase(user, &layout.antenna(i), feed, w))
        .collect();
    neighbours(layout.len(), anchor)
        .map(|(i, j)| (wrap_pi(phases[i] - phases[j]).abs() - delta).max(T::zero()))
        .sum()
}

/// Largest wrapped adjacent path-phase difference for each user.
pub fn phase_residuals<T: Real>(
    layout: &SingleWgLayout<T>,
    users: &Users<T>,
    w: &Wavelengths<T>,
) -> PhaseResiduals<T> {
    let feed = layout.feed.as_ref();
    let worst = |u| {
        layout
            .positions
            .windows(2)
            .enumerate()
            .map(|(i, _)| {
                let a = path_phase(u, &layout.antenna(i), feed, w);
                let b = path_phase(u, &layout.antenna(i + 1), feed, w);
                wrap_pi(a - b).abs()
            })
            .fold(T::zero(), T::max)
    };
    PhaseResiduals {
        semantic: worst(&users.semantic),
        bit: worst(&users.bit),
    }
}

/// Greedy phase alignment by moves of whole multiples of the fine step.
///
/// The antenna nearest the semantic user stays put. Every other antenna is
/// tried at offsets `k * fine_step` (moving the antennas beyond it along, so
/// their spacing is untouched), nearest antenna first. A move is taken when
/// the minimum spacing and the rate constraints at `alpha_s` still hold,
/// `|g_S|^2` does not drop, the semantic phase mismatch above `delta_S` does not
/// grow, and either that mismatch or the bit-user mismatch above `delta_B`
/// shrinks.
pub fn fine_tune_phases<T: Real>(
    layout: &SingleWgLayout<T>,
    users: &Users<T>,
    alpha_s: T,
    cfg: &ScenarioConfig<T>,
) -> Result<SingleWgLayout<T>> {
    let n = layout.len();
    if n < 2 {
        return Ok(layout.clone());
    }
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let xs = users.semantic.x;
    let anchor = (0..n)
        .min_by(|&a, &b| {
            (layout.positions[a] - xs)
                .abs()
                .partial_cmp(&(layout.positions[b] - xs).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut order: Vec<usize> = (0..n).filter(|&i| i != anchor).collect();
    order.sort_by_key(|&i| i.abs_diff(anchor));

    // Enough steps either way to sweep a full cycle of the path phase.
    let max_k = 2 * (w.lambda / cfg.fine_step).ceil().to_usize().unwrap_or(10).max(1);
    let half = cfg.side / T::lit(2.0);
    let slack = cfg.min_spacing * T::lit(1e-9);

    let mut current = layout.clone();
    let mut g_cur = power_gains(&current, users, &w)?;
    let mut ex_s = excess(&current, anchor, &users.semantic, cfg.delta_s, &w);
    let mut ex_b = excess(&current, anchor, &users.bit, cfg.delta_b, &w);

    for _ in 0..MAX_FINE_SWEEPS {
        if ex_s == T::zero() && ex_b == T::zero() {
            break;
        }
        let mut moved = false;
        for &i in &order {
            let tail: Vec<usize> = if i > anchor { (i..n).collect() } else { (0..=i).collect() };
            let mut pick: Option<(SingleWgLayout<T>, EffectiveGain<T>, T, T)> = None;
            for step in 1..=max_k {
                for sign in [T::one(), -T::one()] {
                    let shift = sign * T::from_usize_lossy(step) * cfg.fine_step;
                    let mut cand = current.clone();
                    for &t in &tail {
                        cand.positions[t] = cand.positions[t] + shift;
                    }
                    let gap = if i > anchor {
                        cand.positions[i] - cand.positions[i - 1]
                    } else {
                        cand.positions[i + 1] - cand.positions[i]
                    };
                    if gap < cfg.min_spacing - slack
                        || tail.iter().any(|&t| cand.positions[t].abs() > half)
                    {
                        continue;
                    }
                    let g = power_gains(&cand, users, &w)?;
                    if g.g2_s < g_cur.g2_s || !link.admits(&g, alpha_s) {
                        continue;
                    }
                    let cs = excess(&cand, anchor, &users.semantic, cfg.delta_s, &w);
                    let cb = excess(&cand, anchor, &users.bit, cfg.delta_b, &w);
                    let improves = cs < ex_s || (cs == ex_s && cb < ex_b);
                    if !improves {
                        continue;
                    }
                    let better = match &pick {
                        None => true,
                        Some((_, _, ps, pb)) => cs < *ps || (cs == *ps && cb < *pb),
                    };
                    if better {
                        pick = Some((cand, g, cs, cb));
                    }
                }
            }
            if let Some((cand, g, cs, cb)) = pick {
                current = cand;
                g_cur = g;
                ex_s = cs;
                ex_b = cb;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(current)
}

/// Splits at which the lead antenna is placed in one position update: the
/// current one first, then `1/2, 1/4, ..., 1/32` and `0` (feasibility only).
pub fn split_ladder<T: Real>(current: T) -> Vec<T> {
    let mut v = vec![current];
    let mut a = T::lit(0.5);
    for _ in 0..5 {
        if a != current {
            v.push(a);
        }
        a = a / T::lit(2.0);
    }
    if current != T::zero() {
        v.push(T::zero());
    }
    v
}

/// Single-waveguide alternating optimization.
pub fn ao_solve<T: Real>(users: &Users<T>, cfg: &ScenarioConfig<T>) -> Result<AoState<T>> {
    ao_solve_with(users, cfg, AoOptions::default())
}

pub fn ao_solve_with<T: Real>(
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
    opts: AoOptions,
) -> Result<AoState<T>> {
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let mut layout = initial_layout(cfg)?;
    let mut gains = power_gains(&layout, users, &w)?;
    let mut alloc = link.optimize(&gains);
    let mut history = vec![alloc.semantic_se];
    let mut trace = vec![AoTraceRow {
        iteration: 0,
        alpha_s: alloc.alpha_s,
        positions: layout.positions.clone(),
        semantic_se: alloc.semantic_se,
    }];
    let mut iteration = 0;

    let ceiling = link.model.rate_bounds().1;
    while iteration < cfg.max_iters && alloc.semantic_se < ceiling {
        iteration += 1;
        let alpha = alloc.alpha_s;
        // Lead placement at the split in force and along the ladder; the
        // candidate with the best jointly optimized SE is then fine-tuned.
        let mut pick: Option<(SingleWgLayout<T>, T, Allocation<T>)> = None;
        for a in split_ladder(alpha) {
            let placed = bisection_position(a, users, cfg)?;
            let leads = placed.lead.into_iter().chain(placed.best_joint.map(|(x, _)| x));
            for lead in leads {
                let cand = lead_layout(lead, cfg);
                let joint = link.optimize(&power_gains(&cand, users, &w)?);
                if joint.feasible && pick.as_ref().is_none_or(|(_, _, b)| joint.semantic_se > b.semantic_se) {
                    pick = Some((cand, a, joint));
                }
            }
            if pick.as_ref().is_some_and(|(_, _, b)| b.semantic_se >= ceiling) {
                break;
            }
        }
        if let Some((raw, a, raw_alloc)) = pick {
            let mut best = (raw.clone(), raw_alloc);
            if opts.fine_tune && raw_alloc.semantic_se < ceiling {
                let tuned = fine_tune_phases(&raw, users, raw_alloc.alpha_s.max(a), cfg)?;
                let tuned_alloc = link.optimize(&power_gains(&tuned, users, &w)?);
                if tuned_alloc.better_or_equal(&best.1) {
                    best = (tuned, tuned_alloc);
                }
            }
            if best.1.better_or_equal(&alloc) {
                gains = power_gains(&best.0, users, &w)?;
                layout = best.0;
            }
        }
        let in_force = link.optimize(&gains);
        if opts.fine_tune && in_force.feasible && in_force.semantic_se < ceiling {
            // The layout in force may tune better than any fresh placement.
            let tuned = fine_tune_phases(&layout, users, in_force.alpha_s, cfg)?;
            let tuned_gains = power_gains(&tuned, users, &w)?;
            if link.optimize(&tuned_gains).better_or_equal(&in_force) {
                gains = tuned_gains;
                layout = tuned;
            }
        }
        let prev_se = alloc.semantic_se;
        alloc = link.optimize(&gains);
        history.push(alloc.semantic_se);
        trace.push(AoTraceRow {
            iteration,
            alpha_s: alloc.alpha_s,
            positions: layout.positions.clone(),
            semantic_se: alloc.semantic_se,
        });
        // Infeasible after a zero-split search: nothing left to try.
        if !alloc.feasible || (alloc.semantic_se - prev_se).abs() < T::lit(SE_TOLERANCE) {
            break;
        }
    }

    Ok(finish(layout, alloc, iteration, history, trace, users, &w))
}

fn finish<T: Real>(
    layout: SingleWgLayout<T>,
    alloc: Allocation<T>,
    iteration: usize,
    history: Vec<T>,
    trace: Vec<AoTraceRow<T>>,
    users: &Users<T>,
    w: &Wavelengths<T>,
) -> AoState<T> {
    let residuals = phase_residuals(&layout, users, w);
    AoState {
        layout,
        alpha_s: alloc.alpha_s,
        semantic_se: alloc.semantic_se,
        bit_rate: alloc.bit_rate,
        iteration,
        feasible: alloc.feasible,
        history,
        trace,
        residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Point3;

    fn users(xs: f64, ys: f64, xb: f64, yb: f64) -> Users<f64> {
        Users {
            semantic: Point3::new(xs, ys, 0.0),
            bit: Point3::new(xb, yb, 0.0),
        }
    }

    #[test]
    fn initial_layout_examples() {
        let cfg = ScenarioConfig::<f64>::default();
        let half = cfg.wavelengths().lambda / 2.0;
        let l = initial_layout(&cfg).unwrap();
        for (a, b) in l.positions.iter().zip([-half, 0.0, half]) {
            assert!((a - b).abs() < 1e-15);
        }
        let one = initial_layout(&cfg.clone().with_antennas(1)).unwrap();
        assert_eq!(one.positions, vec![0.0]);
        let seven = initial_layout(&cfg.clone().with_antennas(7)).unwrap();
        let span = seven.positions[6] - seven.positions[0];
        assert!((span - 6.0 * half).abs() < 1e-12);
        assert!((span - 0.032).abs() < 1e-3);
        assert!(seven.is_valid(&cfg));

        let mut tight = cfg.clone().with_antennas(3);
        tight.side = 0.01;
        assert!(matches!(
            initial_layout(&tight),
            Err(Error::LayoutDoesNotFit { .. })
        ));
    }

    #[test]
    fn lead_layout_stays_inside() {
        let cfg = ScenarioConfig::<f64>::default().with_antennas(7);
        for lead in [-50.0, -10.0, -3.0, 0.0, 4.0, 10.0, 12.0] {
            let l = lead_layout(lead, &cfg);
            assert!(l.is_valid(&cfg), "lead {lead}: {:?}", l.positions);
        }
    }

    #[test]
    fn colocated_users_collapse_bracket() {
        let cfg = ScenarioConfig::<f64>::default().with_antennas(1);
        let u = users(2.5, 1.0, 2.5, -1.0);
        let b = bisection_position(0.1, &u, &cfg).unwrap();
        assert_eq!(b.iterations, 0);
        assert_eq!(b.lead, Some(2.5));
        // Users beyond the region edge project onto it.
        let u = users(30.0, 1.0, 30.0, -1.0);
        let b = bisection_position(0.1, &u, &cfg).unwrap();
        assert_eq!(b.lead, Some(10.0));
    }

    #[test]
    fn bisection_iteration_bound() {
        let cfg = ScenarioConfig::<f64>::default().with_antennas(2);
        let u = users(-5.0, 2.0, 5.0, -3.0);
        for alpha in [0.0, 0.2, 0.45, 0.5] {
            let b = bisection_position(alpha, &u, &cfg).unwrap();
            let bound = (b.bracket / cfg.bisect_tol).log2().ceil() as usize;
            assert!(b.iterations <= bound);
        }
    }

    #[test]
    fn bisection_prefers_semantic_side_when_unconstrained() {
        let mut cfg = ScenarioConfig::<f64>::default().with_antennas(1);
        cfg.r_b_min = 0.0;
        let u = users(-5.0, 2.0, 5.0, 2.0);
        let b = bisection_position(0.3, &u, &cfg).unwrap();
        assert!((b.lead.unwrap() + 5.0).abs() <= cfg.bisect_tol);
    }

    #[test]
    fn fine_tune_single_antenna_noop() {
        let cfg = ScenarioConfig::<f64>::default().with_antennas(1);
        let u = users(1.0, 2.0, -3.0, 4.0);
        let l = lead_layout(1.0, &cfg);
        assert_eq!(fine_tune_phases(&l, &u, 0.2, &cfg).unwrap(), l);
    }

    #[test]
    fn fine_tune_never_lowers_semantic_gain() {
        let cfg = ScenarioConfig::<f64>::default();
        let w = cfg.wavelengths();
        for (i, xs) in [-7.0, -2.0, 0.5, 3.0, 8.0].into_iter().enumerate() {
            let u = users(xs, 1.0 + i as f64, -xs / 2.0, -4.0);
            let l = lead_layout(xs, &cfg);
            let tuned = fine_tune_phases(&l, &u, 0.0, &cfg).unwrap();
            assert!(tuned.is_valid(&cfg));
            let before = power_gains(&l, &u, &w).unwrap().g2_s;
            let after = power_gains(&tuned, &u, &w).unwrap().g2_s;
            assert!(after >= before);
            // Fine tuning should approach coherent combining.
            let coherent = 3.0 * w.eta / ((1.0 + i as f64).powi(2) + 9.0);
            assert!(after > 0.8 * coherent, "{after} vs {coherent}");
        }
    }

    #[test]
    fn fine_tune_fixed_point_when_aligned() {
        let cfg = ScenarioConfig::<f64>::default().with_phase_precision(100.0, 100.0);
        let u = users(1.0, 2.0, -3.0, 4.0);
        let l = lead_layout(1.0, &cfg);
        assert_eq!(fine_tune_phases(&l, &u, 0.2, &cfg).unwrap(), l);
    }

    #[test]
    fn ao_history_monotone_and_spaced() {
        let cfg = ScenarioConfig::<f64>::default();
        let u = users(-6.0, 3.0, 7.0, -8.0);
        let st = ao_solve(&u, &cfg).unwrap();
        assert!(st.feasible);
        assert!(st.history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(st.layout.is_valid(&cfg));
        assert_eq!(st.history.len(), st.trace.len());
    }

    #[test]
    fn ao_clamps_at_half_with_strong_bit_channel() {
        // Bit user right under the array at modest rate target: alpha_qos > 1/2 everywhere.
        let cfg = ScenarioConfig::<f64>::default().with_power_dbm(20.0).with_rate_min(0.1);
        let u = users(1.0, 1.0, 0.0, 0.5);
        let st = ao_solve(&u, &cfg).unwrap();
        assert!(st.trace.iter().all(|r| r.alpha_s == 0.5));
    }

    #[test]
    fn ao_infeasible_at_tiny_power() {
        let cfg = ScenarioConfig::<f64>::default().with_power_dbm(-80.0);
        let u = users(-6.0, 3.0, 7.0, -8.0);
        let st = ao_solve(&u, &cfg).unwrap();
        assert!(!st.feasible);
        assert_eq!(st.semantic_se, 0.0);
    }
}
