//! Multi-waveguide optimization: one pinch per waveguide, a passive power
//! split `beta` across waveguides, and minorization-maximization over the
//! simplex for that split.
//!
//! With `z = sqrt(beta)` the received power at user `m` is the quadratic
//! `q_m(z) = z' Q_m z`, `Q_m = Re(conj(h_m) h_m')`. Because `Q_m` is PSD its
//! tangent plane at `z_i` is a global lower bound that is tight at `z_i`;
//! each MM step maximizes that affine surrogate over a uniform simplex grid,
//! using the same lower bounds for the rate constraints.

use num_complex::Complex;

use crate::channel::{waveguide_gains, MultiWgLayout, Users};
use crate::error::{Error, Result};
use crate::noma::{t_threshold, Allocation, EffectiveGain, LinkBudget};
use crate::params::{ScenarioConfig, Wavelengths};
use crate::scalar::Real;
use crate::single_opt::SE_TOLERANCE;

/// Relative true-objective gain below which MM stops.
pub const MM_TOLERANCE: f64 = 1e-9;

/// Point of the probability simplex with its elementwise square root.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    pub beta: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> SimplexPoint<T> {
    pub fn from_beta(beta: Vec<T>) -> Result<Self> {
        let sum: T = beta.iter().copied().sum();
        if beta.iter().any(|&b| b < T::zero() || !b.is_finite())
            || (sum - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
        {
            return Err(Error::NotOnSimplex(sum.to64()));
        }
        let z = beta.iter().map(|b| b.sqrt()).collect();
        Ok(Self { beta, z })
    }

    pub fn uniform(k: usize) -> Self {
        let b = T::one() / T::from_usize_lossy(k);
        Self {
            beta: vec![b; k],
            z: vec![b.sqrt(); k],
        }
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut beta = vec![T::zero(); k];
        beta[i] = T::one();
        Self {
            z: beta.clone(),
            beta,
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

/// Dense symmetric `K x K` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<T> {
    pub k: usize,
    pub entries: Vec<T>,
}

impl<T: Real> QuadraticForm<T> {
    pub fn get(&self, a: usize, b: usize) -> T {
        self.entries[a * self.k + b]
    }

    /// `Q z`.
    pub fn apply(&self, z: &[T]) -> Vec<T> {
        (0..self.k)
            .map(|a| (0..self.k).map(|b| self.get(a, b) * z[b]).sum())
            .collect()
    }

    /// `z' Q z`.
    pub fn value(&self, z: &[T]) -> T {
        dot(&self.apply(z), z)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.k).all(|a| (0..a).all(|b| self.get(a, b) == self.get(b, a)))
    }

    /// PSD check by quadratic probes on the coordinate axes, all pairs, and
    /// `extra` pseudo-random directions.
    pub fn is_psd_probe(&self, extra: usize) -> bool {
        let scale = self
            .entries
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::min_positive_value());
        let tol = -T::lit(1e-9) * scale;
        let mut ok = true;
        for a in 0..self.k {
            for b in 0..self.k {
                for sign in [T::one(), -T::one()] {
                    let mut z = vec![T::zero(); self.k];
                    z[a] = T::one();
                    z[b] = z[b] + sign;
                    ok &= self.value(&z) >= tol;
                }
            }
        }
        // Weyl sequence, deterministic and dependency-free.
        let mut state = 0.5f64;
        for _ in 0..extra {
            let z: Vec<T> = (0..self.k)
                .map(|_| {
                    state = (state + 0.618_033_988_749_895) % 1.0;
                    T::lit(2.0 * state - 1.0)
                })
                .collect();
            ok &= self.value(&z) >= tol;
        }
        ok
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `Q[a][b] = Re(conj(h_a) h_b)`.
pub fn build_q<T: Real>(h: &[Complex<T>]) -> QuadraticForm<T> {
    let k = h.len();
    let mut entries = vec![T::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            entries[a * k + b] = (h[a].conj() * h[b]).re;
        }
    }
    // Enforce exact symmetry.
    for a in 0..k {
        for b in 0..a {
            entries[b * k + a] = entries[a * k + b];
        }
    }
    QuadraticForm { k, entries }
}

/// Tangent-plane lower bound `2 (Q z_i)' z - z_i' Q z_i`.
pub fn surrogate<T: Real>(q: &QuadraticForm<T>, z_i: &[T], z: &[T]) -> T {
    let qz = q.apply(z_i);
    T::lit(2.0) * dot(&qz, z) - dot(&qz, z_i)
}

/// Uniform grid on the simplex with `cells = 1/step` subdivisions, in
/// lexicographic order of the integer compositions.
#[derive(Debug, Clone)]
pub struct SimplexGrid<T> {
    pub k: usize,
    pub cells: usize,
    /// Flattened `z = sqrt(beta)` for every grid point.
    z: Vec<T>,
    counts: Vec<u32>,
}

impl<T: Real> SimplexGrid<T> {
    pub fn new(k: usize, step: T) -> Self {
        let cells = (T::one() / step).round().to_usize().unwrap_or(1).max(1);
        let roots: Vec<T> = (0..=cells)
            .map(|c| (T::from_usize_lossy(c) / T::from_usize_lossy(cells)).sqrt())
            .collect();
        let mut z = Vec::new();
        let mut counts = Vec::new();
        let mut buf = vec![0usize; k];
        compositions(k, cells, 0, &mut buf, &mut |c| {
            counts.extend(c.iter().map(|&v| v as u32));
            z.extend(c.iter().map(|&v| roots[v]));
        });
        Self { k, cells, z, counts }
    }

    pub fn len(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.z.len() / self.k
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn z(&self, i: usize) -> &[T] {
        &self.z[i * self.k..(i + 1) * self.k]
    }

    pub fn point(&self, i: usize) -> SimplexPoint<T> {
        let cells = T::from_usize_lossy(self.cells);
        SimplexPoint {
            beta: self.counts[i * self.k..(i + 1) * self.k]
                .iter()
                .map(|&c| T::from_usize_lossy(c as usize) / cells)
                .collect(),
            z: self.z(i).to_vec(),
        }
    }
}

fn compositions(k: usize, left: usize, pos: usize, buf: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    if pos == k - 1 {
        buf[pos] = left;
        f(buf);
        return;
    }
    for c in (0..=left).rev() {
        buf[pos] = c;
        compositions(k, left - c, pos + 1, buf, f);
    }
}

/// One MM update over the grid. Falls back to `z_i` when no grid point passes
/// the conservative feasibility test.
pub fn mm_step<T: Real>(
    qs: &QuadraticForm<T>,
    qb: &QuadraticForm<T>,
    current: &SimplexPoint<T>,
    t_b: T,
    grid: &SimplexGrid<T>,
) -> SimplexPoint<T> {
    let z_i = &current.z;
    let cs = qs.apply(z_i);
    let cb = qb.apply(z_i);
    let qs_i = dot(&cs, z_i);
    let qb_i = dot(&cb, z_i);
    let two = T::lit(2.0);
    let mut best: Option<(usize, T)> = None;
    for i in 0..grid.len() {
        let z = grid.z(i);
        let lb_b = two * dot(&cb, z) - qb_i;
        let lb_s = two * dot(&cs, z) - qs_i;
        if lb_b < t_b || lb_s < t_b {
            continue;
        }
        // Strict comparison keeps the lexicographically first maximizer.
        if best.is_none_or(|(_, v)| lb_s > v) {
            best = Some((i, lb_s));
        }
    }
    match best {
        Some((i, _)) => grid.point(i),
        None => current.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmTraceRow<T> {
    pub iteration: usize,
    pub beta: Vec<T>,
    pub q_s: T,
    pub surrogate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmOutcome<T> {
    pub point: SimplexPoint<T>,
    /// True `q_S` of every accepted iterate, starting with the initial point.
    pub q_s_history: Vec<T>,
    pub trace: Vec<MmTraceRow<T>>,
}

fn truly_feasible<T: Real>(qs: &QuadraticForm<T>, qb: &QuadraticForm<T>, z: &[T], t_b: T) -> bool {
    qs.value(z) >= t_b && qb.value(z) >= t_b
}

/// Uniform split, then every vertex, then every pairwise midpoint.
pub fn start_points<T: Real>(k: usize) -> Vec<SimplexPoint<T>> {
    let mut v = vec![SimplexPoint::uniform(k)];
    if k > 1 {
        v.extend((0..k).map(|i| SimplexPoint::vertex(k, i)));
    }
    if k > 2 {
        let half = T::lit(0.5);
        for i in 0..k {
            for j in i + 1..k {
                let mut beta = vec![T::zero(); k];
                beta[i] = half;
                beta[j] = half;
                let z = beta.iter().map(|b| b.sqrt()).collect();
                v.push(SimplexPoint { beta, z });
            }
        }
    }
    v
}

/// Waveguide power split: MM from each truly feasible start point, keeping
/// the largest final `q_S` (earliest start on ties). `InfeasibleStart` when
/// no start point meets the constraints.
pub fn waveguide_power_allocate<T: Real>(
    qs: &QuadraticForm<T>,
    qb: &QuadraticForm<T>,
    t_b: T,
    cfg: &ScenarioConfig<T>,
) -> Result<MmOutcome<T>> {
    let grid = SimplexGrid::new(qs.k, cfg.mm_grid_step);
    allocate_on_grid(qs, qb, t_b, &grid, cfg.mm_max_iters)
}

/// `waveguide_power_allocate` with a prebuilt grid.
pub fn allocate_on_grid<T: Real>(
    qs: &QuadraticForm<T>,
    qb: &QuadraticForm<T>,
    t_b: T,
    grid: &SimplexGrid<T>,
    max_iters: usize,
) -> Result<MmOutcome<T>> {
    let mut best: Option<MmOutcome<T>> = None;
    for start in start_points(qs.k) {
        if !truly_feasible(qs, qb, &start.z, t_b) {
            continue;
        }
        let out = allocate_from(qs, qb, t_b, start, grid, max_iters);
        if best.as_ref().is_none_or(|b| out.final_q_s() > b.final_q_s()) {
            best = Some(out);
        }
    }
    best.ok_or(Error::InfeasibleStart)
}

impl<T: Real> MmOutcome<T> {
    pub fn final_q_s(&self) -> T {
        *self.q_s_history.last().expect("history starts with the initial point")
    }
}

/// MM iterations from `start`; an iterate is kept only if it stays feasible
/// and does not lower the true `q_S`.
pub fn allocate_from<T: Real>(
    qs: &QuadraticForm<T>,
    qb: &QuadraticForm<T>,
    t_b: T,
    start: SimplexPoint<T>,
    grid: &SimplexGrid<T>,
    max_iters: usize,
) -> MmOutcome<T> {
    let mut point = start;
    let mut q = qs.value(&point.z);
    let mut q_s_history = vec![q];
    let mut trace = vec![MmTraceRow {
        iteration: 0,
        beta: point.beta.clone(),
        q_s: q,
        surrogate: q,
    }];
    for it in 1..=max_iters {
        let next = mm_step(qs, qb, &point, t_b, grid);
        let q_next = qs.value(&next.z);
        let gain = q_next - q;
        if !(gain > T::zero()) || !truly_feasible(qs, qb, &next.z, t_b) {
            break;
        }
        let sur = surrogate(qs, &point.z, &next.z);
        point = next;
        q = q_next;
        q_s_history.push(q);
        trace.push(MmTraceRow {
            iteration: it,
            beta: point.beta.clone(),
            q_s: q,
            surrogate: sur,
        });
        if gain <= T::lit(MM_TOLERANCE) * q {
            break;
        }
    }
    MmOutcome {
        point,
        q_s_history,
        trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiAoOptions {
    /// When false the pinches stay where they start (fixed-centre placement).
    pub optimize_positions: bool,
}

impl Default for MultiAoOptions {
    fn default() -> Self {
        Self {
            optimize_positions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiAoState<T> {
    pub layout: MultiWgLayout<T>,
    pub power: SimplexPoint<T>,
    pub alpha_s: T,
    pub semantic_se: T,
    pub bit_rate: T,
    pub iteration: usize,
    pub feasible: bool,
    pub history: Vec<T>,
}

/// Per-waveguide channel vectors for both users.
#[derive(Debug, Clone)]
pub struct WaveguideChannels<T> {
    pub semantic: Vec<Complex<T>>,
    pub bit: Vec<Complex<T>>,
}

impl<T: Real> WaveguideChannels<T> {
    pub fn new(layout: &MultiWgLayout<T>, users: &Users<T>, w: &Wavelengths<T>) -> Result<Self> {
        Ok(Self {
            semantic: waveguide_gains(layout, &users.semantic, w)?,
            bit: waveguide_gains(layout, &users.bit, w)?,
        })
    }

    /// `|h_eff|^2` for both users at weights `z`.
    pub fn gains(&self, z: &[T]) -> EffectiveGain<T> {
        let comb = |h: &[Complex<T>]| {
            h.iter()
                .zip(z)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (h, &zk)| acc + *h * zk)
                .norm_sqr()
        };
        EffectiveGain {
            g2_s: comb(&self.semantic),
            g2_b: comb(&self.bit),
        }
    }
}

fn clamp_to_region<T: Real>(x: T, cfg: &ScenarioConfig<T>) -> T {
    let half = cfg.side / T::lit(2.0);
    x.max(-half).min(half)
}

/// Bisection of one waveguide's pinch between the users' x-coordinates with
/// the other waveguides held fixed; same steering rules as the single-waveguide
/// placement, scored on the combined channel.
pub fn bisection_waveguide<T: Real>(
    layout: &MultiWgLayout<T>,
    k: usize,
    power: &SimplexPoint<T>,
    alpha_s: T,
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
) -> Result<Option<(T, T)>> {
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let probe = |x: T| -> Result<(T, bool, bool)> {
        let mut l = layout.clone();
        l.positions[k] = x;
        let g = WaveguideChannels::new(&l, users, &w)?.gains(&power.z);
        let b = link.bounds(&g);
        Ok((
            g.g2_s,
            b.qos >= T::zero() && alpha_s <= b.qos,
            b.sic >= T::zero() && alpha_s <= b.sic,
        ))
    };
    let mut s_end = clamp_to_region(users.semantic.x, cfg);
    let mut b_end = clamp_to_region(users.bit.x, cfg);
    let mut best: Option<(T, T)> = None;
    let mut keep = |x: T, p: &(T, bool, bool)| {
        if p.1 && p.2 && best.is_none_or(|(_, g)| p.0 > g) {
            best = Some((x, p.0));
        }
    };
    let ps = probe(s_end)?;
    keep(s_end, &ps);
    let pb = probe(b_end)?;
    keep(b_end, &pb);
    let (mut s_ok, mut b_ok) = (ps.1 && ps.2, pb.1 && pb.2);
    let bracket = (b_end - s_end).abs();
    let cap = if bracket > cfg.bisect_tol {
        (bracket / cfg.bisect_tol).log2().ceil().to_usize().unwrap_or(0)
    } else {
        0
    };
    let mut it = 0;
    while (b_end - s_end).abs() > cfg.bisect_tol && it < cap {
        it += 1;
        let mid = (s_end + b_end) / T::lit(2.0);
        let pm = probe(mid)?;
        keep(mid, &pm);
        if pm.1 && pm.2 {
            if s_ok && b_ok {
                let q_s = (s_end + mid) / T::lit(2.0);
                let q_b = (mid + b_end) / T::lit(2.0);
                let a = probe(q_s)?;
                let c = probe(q_b)?;
                keep(q_s, &a);
                keep(q_b, &c);
                if a.0 >= c.0 {
                    b_end = mid;
                    b_ok = true;
                } else {
                    s_end = mid;
                    s_ok = true;
                }
            } else {
                b_end = mid;
                b_ok = true;
            }
        } else if pm.1 {
            b_end = mid;
            b_ok = false;
        } else {
            s_end = mid;
            s_ok = false;
        }
    }
    Ok(best)
}

/// Multi-waveguide alternating optimization.
pub fn ao_solve_multi<T: Real>(users: &Users<T>, cfg: &ScenarioConfig<T>) -> Result<MultiAoState<T>> {
    ao_solve_multi_with(users, cfg, MultiAoOptions::default())
}

pub fn ao_solve_multi_with<T: Real>(
    users: &Users<T>,
    cfg: &ScenarioConfig<T>,
    opts: MultiAoOptions,
) -> Result<MultiAoState<T>> {
    let w = cfg.wavelengths();
    let link = LinkBudget::new(cfg);
    let k = cfg.n_waveguides;
    let grid = SimplexGrid::new(k, cfg.mm_grid_step);

    let mut layout = crate::baselines::fixed_pinch_layout(cfg);
    let mut power = SimplexPoint::uniform(k);
    let mut chans = WaveguideChannels::new(&layout, users, &w)?;
    let mut alloc = link.optimize(&chans.gains(&power.z));
    let mut history = vec![alloc.semantic_se];
    let mut iteration = 0;

    let ceiling = link.model.rate_bounds().1;
    while iteration < cfg.max_iters && alloc.semantic_se < ceiling {
        iteration += 1;
        let prev = alloc;
        let alpha = alloc.alpha_s;
        // Score of a candidate at the split currently in force.
        let score = |g: &EffectiveGain<T>| -> Allocation<T> {
            if alloc.feasible {
                link.evaluate(g, alpha)
            } else if link.admits(g, T::zero()) {
                link.optimize(g)
            } else {
                Allocation::infeasible()
            }
        };
        let mut here = score(&chans.gains(&power.z));

        if opts.optimize_positions {
            for wg in 0..k {
                if let Some((x, _)) = bisection_waveguide(&layout, wg, &power, alpha, users, cfg)? {
                    let mut cand = layout.clone();
                    cand.positions[wg] = x;
                    let cand_chans = WaveguideChannels::new(&cand, users, &w)?;
                    let s = score(&cand_chans.gains(&power.z));
                    if s.feasible && s.better_or_equal(&here) {
                        layout = cand;
                        chans = cand_chans;
                        here = s;
                    }
                }
            }
        }

        let qs = build_q(&chans.semantic);
        let qb = build_q(&chans.bit);
        let t_b = if alloc.feasible {
            t_threshold(alpha, link.tau, link.p_max, link.sigma2)?
        } else {
            // No split in force yet: ask only for some admissible split.
            link.tau * link.sigma2 / link.p_max
        };
        match allocate_on_grid(&qs, &qb, t_b, &grid, cfg.mm_max_iters) {
            Ok(out) => {
                let s = score(&chans.gains(&out.point.z));
                if s.feasible && s.better_or_equal(&here) {
                    power = out.point;
                }
            }
            Err(Error::InfeasibleStart) => {}
            Err(e) => return Err(e),
        }

        alloc = link.optimize(&chans.gains(&power.z));
        history.push(alloc.semantic_se);
        if !alloc.feasible && !prev.feasible && history.len() > 2 {
            break;
        }
        if alloc.feasible && prev.feasible && (alloc.semantic_se - prev.semantic_se).abs() < T::lit(SE_TOLERANCE) {
            break;
        }
    }

    Ok(MultiAoState {
        layout,
        power,
        alpha_s: alloc.alpha_s,
        semantic_se: alloc.semantic_se,
        bit_rate: alloc.bit_rate,
        iteration,
        feasible: alloc.feasible,
        history,
    })
}
