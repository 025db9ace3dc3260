//! Spherical-wave free-space channel, in-waveguide phase and composite gains.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::{ScenarioConfig, Wavelengths};
use crate::scalar::{wrap_pi, Real};

pub type ComplexGain<T> = Complex<T>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Distance from the origin of the user plane.
    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// The semantic user and the bit user of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Users<T> {
    pub semantic: Point3<T>,
    pub bit: Point3<T>,
}

/// Antennas on a line at `y = 0`, `z = height`.
///
/// With a feed the elements are pinches on one dielectric waveguide and pick
/// up the guided phase; without one they are a conventional fixed array.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleWgLayout<T> {
    pub positions: Vec<T>,
    pub feed: Option<Point3<T>>,
    pub height: T,
}

impl<T: Real> SingleWgLayout<T> {
    pub fn pinched(positions: Vec<T>, cfg: &ScenarioConfig<T>) -> Self {
        Self {
            positions,
            feed: Some(single_feed(cfg)),
            height: cfg.height,
        }
    }

    pub fn antenna(&self, n: usize) -> Point3<T> {
        Point3::new(self.positions[n], T::zero(), self.height)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest adjacent gap, `None` for a single antenna.
    pub fn min_gap(&self) -> Option<T> {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .reduce(|a, b| a.min(b))
    }

    /// Ordered, spaced by at least `min_spacing` (up to rounding), inside the region.
    pub fn is_valid(&self, cfg: &ScenarioConfig<T>) -> bool {
        let half = cfg.side / T::lit(2.0);
        let slack = cfg.min_spacing * T::lit(1e-9);
        self.positions.iter().all(|x| x.abs() <= half + slack)
            && self
                .positions
                .windows(2)
                .all(|w| w[1] - w[0] >= cfg.min_spacing - slack)
    }
}

/// One pinching antenna per waveguide; waveguide `k` runs along x at `offsets[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiWgLayout<T> {
    pub positions: Vec<T>,
    pub offsets: Vec<T>,
    pub feeds: Vec<Point3<T>>,
    pub height: T,
}

impl<T: Real> MultiWgLayout<T> {
    pub fn new(positions: Vec<T>, cfg: &ScenarioConfig<T>) -> Self {
        let offsets = cfg.lateral_offsets();
        let half = cfg.side / T::lit(2.0);
        let feeds = offsets
            .iter()
            .map(|&y| Point3::new(-half, y, cfg.height))
            .collect();
        Self {
            positions,
            offsets,
            feeds,
            height: cfg.height,
        }
    }

    pub fn antenna(&self, k: usize) -> Point3<T> {
        Point3::new(self.positions[k], self.offsets[k], self.height)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Feed of the single waveguide: its end at `x = -D/2`.
pub fn single_feed<T: Real>(cfg: &ScenarioConfig<T>) -> Point3<T> {
    Point3::new(-cfg.side / T::lit(2.0), T::zero(), cfg.height)
}

/// `sqrt(eta) * exp(-j 2 pi r / lambda) / r`.
pub fn free_space_gain<T: Real>(
    user: &Point3<T>,
    antenna: &Point3<T>,
    lambda: T,
    eta: T,
) -> Result<ComplexGain<T>> {
    let r = user.distance(antenna);
    if !(r > T::zero()) {
        return Err(Error::SingularChannel);
    }
    let phase = -T::TAU() * (r / lambda).fract();
    Ok(Complex::from_polar(eta.sqrt() / r, phase))
}

/// Guided propagation phase `2 pi |feed - antenna| / lambda_g`, unwrapped.
pub fn waveguide_phase<T: Real>(feed: &Point3<T>, antenna: &Point3<T>, lambda_g: T) -> T {
    T::TAU() * feed.distance(antenna) / lambda_g
}

fn guided_factor<T: Real>(feed: &Point3<T>, antenna: &Point3<T>, lambda_g: T) -> ComplexGain<T> {
    // Reduce the cycle count before scaling so large feed distances keep precision.
    let cycles = (feed.distance(antenna) / lambda_g).fract();
    Complex::from_polar(T::one(), -T::TAU() * cycles)
}

/// Per-element channels including the guided phase, `h_n * exp(-j theta_n)`.
pub fn element_gains<T: Real>(
    layout: &SingleWgLayout<T>,
    user: &Point3<T>,
    w: &Wavelengths<T>,
) -> Result<Vec<ComplexGain<T>>> {
    (0..layout.len())
        .map(|n| {
            let a = layout.antenna(n);
            let h = free_space_gain(user, &a, w.lambda, w.eta)?;
            Ok(match &layout.feed {
                Some(feed) => h * guided_factor(feed, &a, w.lambda_g),
                None => h,
            })
        })
        .collect()
}

/// `g_m = sum_n h_{n,m} exp(-j theta_n)`; the 1/N power split is left to the caller.
pub fn composite_gain_single<T: Real>(
    layout: &SingleWgLayout<T>,
    user: &Point3<T>,
    w: &Wavelengths<T>,
) -> Result<ComplexGain<T>> {
    Ok(element_gains(layout, user, w)?
        .into_iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, h| acc + h))
}

/// Composite power gain with uniform per-antenna power, `|g_m|^2 / N`.
pub fn single_power_gain<T: Real>(
    layout: &SingleWgLayout<T>,
    user: &Point3<T>,
    w: &Wavelengths<T>,
) -> Result<T> {
    let g = composite_gain_single(layout, user, w)?;
    Ok(g.norm_sqr() / T::from_usize_lossy(layout.len()))
}

/// `2 pi (|user - antenna| / lambda - |feed - antenna| / lambda_g)` wrapped to (-pi, pi].
pub fn phase_residual<T: Real>(
    user: &Point3<T>,
    antenna: &Point3<T>,
    feed: &Point3<T>,
    lambda: T,
    lambda_g: T,
) -> T {
    let free = (user.distance(antenna) / lambda).fract();
    let guided = (feed.distance(antenna) / lambda_g).fract();
    wrap_pi(T::TAU() * (free - guided))
}

/// Total phase lag of the feed-to-user path through `antenna`, wrapped to (-pi, pi].
///
/// This is the argument (negated) of `h_n exp(-j theta_n)`; equal values across
/// elements mean the element channels add in phase.
pub fn path_phase<T: Real>(
    user: &Point3<T>,
    antenna: &Point3<T>,
    feed: Option<&Point3<T>>,
    w: &Wavelengths<T>,
) -> T {
    let free = (user.distance(antenna) / w.lambda).fract();
    let guided = feed.map_or(T::zero(), |f| (f.distance(antenna) / w.lambda_g).fract());
    wrap_pi(T::TAU() * (free + guided))
}

/// Per-waveguide channels `h~_{k,m}` for one user.
pub fn waveguide_gains<T: Real>(
    layout: &MultiWgLayout<T>,
    user: &Point3<T>,
    w: &Wavelengths<T>,
) -> Result<Vec<ComplexGain<T>>> {
    (0..layout.len())
        .map(|k| {
            let a = layout.antenna(k);
            let h = free_space_gain(user, &a, w.lambda, w.eta)?;
            Ok(h * guided_factor(&layout.feeds[k], &a, w.lambda_g))
        })
        .collect()
}

pub(crate) fn check_unit_weights<T: Real>(z: &[T]) -> Result<()> {
    let sum_sq: T = z.iter().map(|&v| v * v).sum();
    if z.iter().any(|&v| v < T::zero() || !v.is_finite())
        || (sum_sq - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
    {
        return Err(Error::NotOnSimplex(sum_sq.to64()));
    }
    Ok(())
}

/// `h_eff = sum_k z_k h~_{k,m}` with `z_k = sqrt(beta_k)`.
pub fn effective_gain_multi<T: Real>(
    layout: &MultiWgLayout<T>,
    z: &[T],
    user: &Point3<T>,
    w: &Wavelengths<T>,
) -> Result<ComplexGain<T>> {
    check_unit_weights(z)?;
    Ok(waveguide_gains(layout, user, w)?
        .into_iter()
        .zip(z)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (h, &zk)| acc + h * zk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derived_constants;
    use std::f64::consts::PI;

    fn consts() -> Wavelengths<f64> {
        derived_constants(28e9, 1.4)
    }

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    #[test]
    fn free_space_magnitude_law() {
        let w = consts();
        let h1 = free_space_gain(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 1.0), w.lambda, w.eta).unwrap();
        assert!((h1.norm() - w.eta.sqrt()).abs() < 1e-15);
        let h2 = free_space_gain(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 2.0), w.lambda, w.eta).unwrap();
        assert!((h2.norm() - w.eta.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_space_phase_at_three_metres() {
        let lambda = 0.010707;
        let h = free_space_gain(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 3.0), lambda, 1.0).unwrap();
        // Independent evaluation: reduce 3/lambda cycles by hand.
        let cycles = 3.0 / lambda;
        let expected = wrap_pi(-2.0 * PI * (cycles - cycles.floor()));
        assert!((wrap_pi(h.arg() - expected)).abs() < 1e-9);
    }

    #[test]
    fn coincident_points_are_singular() {
        let w = consts();
        let a = p(1.0, 2.0, 3.0);
        assert!(matches!(
            free_space_gain(&a, &a, w.lambda, w.eta),
            Err(Error::SingularChannel)
        ));
    }

    #[test]
    fn waveguide_phase_examples() {
        let a = p(0.3, 0.0, 3.0);
        assert_eq!(waveguide_phase(&a, &a, 0.007648), 0.0);
        let b = p(0.3 + 0.007648, 0.0, 3.0);
        assert!((waveguide_phase(&a, &b, 0.007648) - 2.0 * PI).abs() < 1e-9);
        let c = p(1.3, 0.0, 3.0);
        assert!((waveguide_phase(&a, &c, 0.007648) - 2.0 * PI * (1.0 / 0.007648)).abs() < 1e-9);
    }

    #[test]
    fn single_antenna_at_feed() {
        let w = consts();
        let feed = p(0.0, 0.0, 1.0);
        let layout = SingleWgLayout {
            positions: vec![0.0],
            feed: Some(feed),
            height: 1.0,
        };
        let g = composite_gain_single(&layout, &p(0.0, 0.0, 0.0), &w).unwrap();
        let expected = Complex::from_polar(w.eta.sqrt(), -2.0 * PI / w.lambda);
        assert!((g - expected).norm() < 1e-12 * w.eta.sqrt());
    }

    #[test]
    fn coherent_and_destructive_pairs() {
        // Fixed array (no feed), user on the perpendicular bisector: equal phases.
        let w = consts();
        let layout = SingleWgLayout {
            positions: vec![-0.5, 0.5],
            feed: None,
            height: 3.0,
        };
        let user = p(0.0, 0.0, 0.0);
        let hs = element_gains(&layout, &user, &w).unwrap();
        let g = composite_gain_single(&layout, &user, &w).unwrap();
        assert!((g.norm() - 2.0 * hs[0].norm()).abs() < 1e-12 * hs[0].norm());

        // Shift one element by half a wavelength in range: opposite phases.
        let r = (0.25f64 + 9.0).sqrt();
        let target = r + w.lambda / 2.0;
        let x2 = (target * target - 9.0).sqrt();
        let layout = SingleWgLayout {
            positions: vec![-0.5, x2],
            feed: None,
            height: 3.0,
        };
        let hs = element_gains(&layout, &user, &w).unwrap();
        let g = composite_gain_single(&layout, &user, &w).unwrap();
        // Magnitudes differ slightly (1/r), phases are opposite.
        assert!((g.norm() - (hs[0].norm() - hs[1].norm()).abs()).abs() < 1e-9 * hs[0].norm());
    }

    #[test]
    fn phase_residual_cancellation_and_wrap() {
        let lambda = 0.01;
        let lambda_g = lambda / 1.4;
        let antenna = p(0.0, 0.0, 3.0);
        // Guided distance chosen so the two terms cancel: d_g / lambda_g = r / lambda.
        let user = p(0.0, 0.0, 0.0);
        let feed = p(-3.0 / 1.4, 0.0, 3.0);
        assert!(phase_residual(&user, &antenna, &feed, lambda, lambda_g).abs() < 1e-9);

        // Raw 1.5 cycles -> pi; raw -0.75 cycles -> pi/2.
        let feed0 = antenna;
        let user15 = p(0.0, 0.0, 3.0 - 1.5 * lambda);
        // Exactly pi sits on the wrap boundary; compare modulo 2 pi.
        assert!(wrap_pi(phase_residual(&user15, &antenna, &feed0, lambda, lambda_g) - PI).abs() < 1e-9);
        let user = p(0.0, 0.0, 3.0 - 0.25 * lambda);
        let feed = p(-lambda_g, 0.0, 3.0);
        assert!((phase_residual(&user, &antenna, &feed, lambda, lambda_g) - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn effective_gain_reductions() {
        let w = consts();
        let cfg = ScenarioConfig::<f64>::default();
        let layout = MultiWgLayout::new(vec![1.0, -2.0, 0.5], &cfg);
        let user = p(3.0, 4.0, 0.0);
        let hk = waveguide_gains(&layout, &user, &w).unwrap();
        for k in 0..3 {
            let mut z = vec![0.0; 3];
            z[k] = 1.0;
            let h = effective_gain_multi(&layout, &z, &user, &w).unwrap();
            assert!((h - hk[k]).norm() < 1e-15);
        }
        assert!(matches!(
            effective_gain_multi(&layout, &[0.5, 0.5, 0.5], &user, &w),
            Err(Error::NotOnSimplex(_))
        ));

        let one = ScenarioConfig::<f64>::default().with_waveguides(1);
        let multi = MultiWgLayout::new(vec![1.5], &one);
        let single = SingleWgLayout::pinched(vec![1.5], &one);
        let a = effective_gain_multi(&multi, &[1.0], &user, &w).unwrap();
        let b = composite_gain_single(&single, &user, &w).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn aligned_uniform_combining_scales_with_sqrt_k() {
        // Equal-magnitude, equal-phase waveguide gains: |sum z_k h| = sqrt(K) |h|.
        let h = Complex::from_polar(2.0e-4, 0.7);
        for k in 1..=5usize {
            let z = vec![(1.0 / k as f64).sqrt(); k];
            let sum: Complex<f64> = z.iter().map(|&zk| h * zk).sum();
            assert!((sum.norm() - (k as f64).sqrt() * h.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn f32_instantiation() {
        let w = derived_constants(28e9f32, 1.4);
        let cfg = ScenarioConfig::<f32>::default();
        let layout = SingleWgLayout::pinched(vec![0.0f32], &cfg);
        let g = composite_gain_single(&layout, &Point3::new(0.0f32, 0.0, 0.0), &w).unwrap();
        assert!((g.norm() - w.eta.sqrt() / 3.0).abs() < 1e-6 * w.eta.sqrt());
    }
}
