//! Seeded Monte Carlo engine: user drops, sweeps over transmit power or the
//! bit-rate target, outage, and distance-ratio binning.
//!
//! Realization `i` always draws its users from stream `i` of a ChaCha8
//! generator keyed by the seed, so every scheme at every sweep point sees the
//! same geometry and results do not depend on thread scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{solve, Scheme};
use crate::channel::{Point3, Users};
use crate::error::Result;
use crate::params::ScenarioConfig;
use crate::scalar::Real;
use crate::single_opt::AoTraceRow;

/// Two users drawn uniformly on the square `[-D/2, D/2]^2` at ground level.
pub fn sample_users<T: Real>(seed: u64, index: u64, side: T) -> Users<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let half = side.to64() / 2.0;
    let mut coord = || T::lit(rng.random_range(-half..=half));
    let semantic = Point3::new(coord(), coord(), T::zero());
    let bit = Point3::new(coord(), coord(), T::zero());
    Users { semantic, bit }
}

/// FNV-1a over the bit patterns of a batch of user drops.
pub fn draw_hash<T: Real>(users: &[Users<T>]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for u in users {
        for v in [u.semantic.x, u.semantic.y, u.bit.x, u.bit.y] {
            for b in v.to64().to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationResult<T> {
    pub index: u64,
    pub users: Users<T>,
    pub scheme: Scheme,
    /// Zero when infeasible.
    pub semantic_se: T,
    pub bit_rate: T,
    pub feasible: bool,
    pub alpha_s: T,
    pub iterations: usize,
}

impl<T: Real> RealizationResult<T> {
    /// `|phi_S| / |phi_B|`, distances from the region centre.
    pub fn distance_ratio(&self) -> T {
        self.users.semantic.norm() / self.users.bit.norm()
    }
}

/// How infeasible draws enter the mean SE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AveragePolicy {
    /// Counted with SE 0.
    #[default]
    InfeasibleAsZero,
    /// Mean over feasible draws only.
    FeasibleOnly,
}

/// Runs `scheme` on realizations `0..n` of `cfg.seed`.
pub fn run_realizations<T: Real>(
    cfg: &ScenarioConfig<T>,
    scheme: Scheme,
    n: usize,
) -> Result<Vec<RealizationResult<T>>> {
    cfg.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|index| {
            let users = sample_users(cfg.seed, index, cfg.side);
            let out = solve(scheme, &users, cfg)?;
            Ok(RealizationResult {
                index,
                users,
                scheme,
                semantic_se: if out.feasible { out.semantic_se } else { T::zero() },
                bit_rate: out.bit_rate,
                feasible: out.feasible,
                alpha_s: out.alpha_s,
                iterations: out.iterations,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub mean_se: f64,
    pub outage: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    /// Column name of the sweep variable.
    pub variable: String,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, scheme: Scheme, value: f64) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && (r.sweep_value - value).abs() < 1e-9)
    }

    /// Rows of one scheme in sweep order.
    pub fn series(&self, scheme: Scheme) -> Vec<&MetricsRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([self.variable.as_str(), "scheme", "mean_se", "outage", "n"])?;
        for r in &self.rows {
            out.write_record([
                r.sweep_value.to_string(),
                r.scheme.tag().to_string(),
                r.mean_se.to_string(),
                r.outage.to_string(),
                r.n.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Mean SE and outage of a batch, summed in index order.
pub fn summarize<T: Real>(results: &[RealizationResult<T>], policy: AveragePolicy) -> (f64, f64) {
    if results.is_empty() {
        return (0.0, 0.0);
    }
    let feasible = results.iter().filter(|r| r.feasible).count();
    let sum: f64 = results.iter().map(|r| r.semantic_se.to64()).sum();
    let denom = match policy {
        AveragePolicy::InfeasibleAsZero => results.len(),
        AveragePolicy::FeasibleOnly => feasible,
    };
    let mean = if denom == 0 { 0.0 } else { sum / denom as f64 };
    let outage = (results.len() - feasible) as f64 / results.len() as f64;
    (mean, outage)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    PowerDbm,
    RateMin,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::PowerDbm => "p_max_dbm",
            SweepVariable::RateMin => "r_b_min",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub variable: SweepVariable,
    pub values: Vec<T>,
    pub realizations: usize,
    pub policy: AveragePolicy,
}

impl<T: Real> SweepSpec<T> {
    pub fn power(values: Vec<T>, realizations: usize) -> Self {
        Self {
            variable: SweepVariable::PowerDbm,
            values,
            realizations,
            policy: AveragePolicy::default(),
        }
    }

    pub fn rate(values: Vec<T>, realizations: usize) -> Self {
        Self {
            variable: SweepVariable::RateMin,
            values,
            realizations,
            policy: AveragePolicy::default(),
        }
    }

    /// `start, start + step, ...` up to `stop` inclusive (within step/1000).
    pub fn range(start: T, stop: T, step: T) -> Vec<T> {
        let n = ((stop - start) / step + T::lit(1e-3)).floor().to_usize().unwrap_or(0);
        (0..=n).map(|i| start + T::from_usize_lossy(i) * step).collect()
    }

    fn apply(&self, cfg: &ScenarioConfig<T>, v: T) -> ScenarioConfig<T> {
        let mut c = cfg.clone();
        match self.variable {
            SweepVariable::PowerDbm => c.set_power_dbm(v),
            SweepVariable::RateMin => c.r_b_min = v,
        }
        c
    }
}

/// Every scheme at every sweep value on the same user drops.
pub fn run_sweep<T: Real>(
    cfg: &ScenarioConfig<T>,
    schemes: &[Scheme],
    spec: &SweepSpec<T>,
) -> Result<MetricsTable> {
    let mut rows = Vec::new();
    for &v in &spec.values {
        let c = spec.apply(cfg, v);
        for &scheme in schemes {
            let res = run_realizations(&c, scheme, spec.realizations)?;
            let (mean_se, outage) = summarize(&res, spec.policy);
            rows.push(MetricsRow {
                sweep_value: v.to64(),
                scheme,
                mean_se,
                outage,
                n: res.len(),
            });
        }
    }
    Ok(MetricsTable {
        variable: spec.variable.column().to_string(),
        rows,
    })
}

/// Mean SE per distance-ratio bin `[k w, (k+1) w)`, bins keyed by centre.
/// Bins run from 0 to the last occupied one (or to `max_ratio` when given,
/// dropping larger ratios); empty bins appear with `n = 0`.
pub fn ratio_binned_se<T: Real>(
    results: &[RealizationResult<T>],
    bin_width: f64,
    max_ratio: Option<f64>,
    policy: AveragePolicy,
) -> MetricsTable {
    let bin_of = |r: f64| (r / bin_width).floor() as usize;
    let kept: Vec<(usize, &RealizationResult<T>)> = results
        .iter()
        .filter_map(|r| {
            let ratio = r.distance_ratio().to64();
            match max_ratio {
                _ if !ratio.is_finite() => None,
                Some(m) if ratio >= m => None,
                _ => Some((bin_of(ratio), r)),
            }
        })
        .collect();
    let n_bins = match max_ratio {
        Some(m) => (m / bin_width).ceil() as usize,
        None => kept.iter().map(|(b, _)| b + 1).max().unwrap_or(0),
    };
    let mut schemes: Vec<Scheme> = results.iter().map(|r| r.scheme).collect();
    schemes.sort();
    schemes.dedup();
    let mut rows = Vec::new();
    for b in 0..n_bins {
        for &s in &schemes {
            let members: Vec<RealizationResult<T>> = kept
                .iter()
                .filter(|(k, r)| *k == b && r.scheme == s)
                .map(|(_, r)| **r)
                .collect();
            let (mean_se, outage) = summarize(&members, policy);
            rows.push(MetricsRow {
                sweep_value: (b as f64 + 0.5) * bin_width,
                scheme: s,
                mean_se,
                outage,
                n: members.len(),
            });
        }
    }
    MetricsTable {
        variable: "ratio_bin".to_string(),
        rows,
    }
}

/// Iteration log of a single-waveguide solve as CSV.
pub fn write_ao_trace<T: Real, W: Write>(trace: &[AoTraceRow<T>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "alpha_s", "semantic_se", "positions_m"])?;
    for r in trace {
        let pos: Vec<String> = r.positions.iter().map(|p| p.to_string()).collect();
        out.write_record([
            r.iteration.to_string(),
            r.alpha_s.to_string(),
            r.semantic_se.to_string(),
            pos.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// MM iterate log as CSV.
pub fn write_mm_trace<T: Real, W: Write>(trace: &[crate::multi_opt::MmTraceRow<T>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "beta", "q_s", "surrogate"])?;
    for r in trace {
        let beta: Vec<String> = r.beta.iter().map(|b| b.to_string()).collect();
        out.write_record([
            r.iteration.to_string(),
            beta.join(";"),
            r.q_s.to_string(),
            r.surrogate.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
