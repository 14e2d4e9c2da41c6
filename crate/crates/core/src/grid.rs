//! Uniform sampling of the line, the semiclassical Fourier transform and the
//! trapezoid-rule L² geometry.
//!
//! A grid of half-width `L` with `N` points samples `x_k = -L + 2Lk/N`. At a
//! semiclassical parameter `h` its dual frequency grid is
//! `ξ_m = (m - N/2)·πh/L`, so `Δx·Δξ = 2πh/N` and the discrete transform is
//! exactly unitary for the trapezoid inner products on both sides.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{next_pow2, CompensatedSum};

/// Masses outside the central half of a grid above this fraction count as
/// truncated.
pub const TRUNCATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    half_width: f64,
    len: usize,
}

impl SpatialGrid {
    pub fn new(half_width: f64, len: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::GridWidth(half_width));
        }
        if len < 8 || !len.is_power_of_two() {
            return Err(Error::GridSize(len));
        }
        Ok(Self { half_width, len })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.len as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.point(k))
    }

    /// Dual grid spacing `πh/L`.
    pub fn freq_spacing(&self, h: f64) -> f64 {
        PI * h / self.half_width
    }

    #[inline]
    pub fn freq_point(&self, h: f64, m: usize) -> f64 {
        (m as f64 - (self.len / 2) as f64) * self.freq_spacing(h)
    }

    /// Largest frequency magnitude on the dual grid.
    pub fn freq_half_width(&self, h: f64) -> f64 {
        (self.len / 2) as f64 * self.freq_spacing(h)
    }

    /// Indices whose points fall in `[lo, hi]`.
    pub fn indices_within(&self, lo: f64, hi: f64) -> Range<usize> {
        let dx = self.spacing();
        let a = ((lo + self.half_width) / dx).ceil().max(0.0);
        let b = ((hi + self.half_width) / dx).floor() + 1.0;
        let b = b.min(self.len as f64);
        if b <= a {
            0..0
        } else {
            a as usize..b as usize
        }
    }

    /// Dual-grid indices whose frequencies fall in `[lo, hi]`.
    pub fn freq_indices_within(&self, h: f64, lo: f64, hi: f64) -> Range<usize> {
        let dxi = self.freq_spacing(h);
        let off = (self.len / 2) as f64;
        let a = (lo / dxi + off).ceil().max(0.0);
        let b = (hi / dxi + off).floor() + 1.0;
        let b = b.min(self.len as f64);
        if b <= a {
            0..0
        } else {
            a as usize..b as usize
        }
    }
}

/// Which variable the samples are indexed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Position,
    Frequency,
}

/// Complex samples of a state at one value of `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: SpatialGrid,
    h: f64,
    domain: Domain,
    samples: Vec<Complex64>,
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::BadH(h))
    }
}

impl WaveFunction {
    pub fn new(grid: SpatialGrid, h: f64, domain: Domain, samples: Vec<Complex64>) -> Result<Self> {
        check_h(h)?;
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: samples.len() });
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, h, domain, samples })
    }

    /// Samples a position-side function.
    pub fn from_fn(grid: SpatialGrid, h: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.points().map(f).collect();
        Self::new(grid, h, Domain::Position, samples)
    }

    pub fn zeros(grid: SpatialGrid, h: f64, domain: Domain) -> Result<Self> {
        Self::new(grid, h, domain, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Quadrature weight of one sample.
    pub fn cell(&self) -> f64 {
        match self.domain {
            Domain::Position => self.grid.spacing(),
            Domain::Frequency => self.grid.freq_spacing(self.h),
        }
    }

    /// Coordinate of sample `k` in this function's domain.
    pub fn coordinate(&self, k: usize) -> f64 {
        match self.domain {
            Domain::Position => self.grid.point(k),
            Domain::Frequency => self.grid.freq_point(self.h, k),
        }
    }

    pub(crate) fn same_space(&self, other: &Self) -> bool {
        self.grid == other.grid && self.h == other.h && self.domain == other.domain
    }

    /// Same space, new samples; the caller guarantees the length.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid, self.h, self.domain, samples)
    }

    /// Fraction of the L² mass lying outside the central half of the sample
    /// range.
    pub fn truncation_ratio(&self) -> f64 {
        let n = self.grid.len();
        let (lo, hi) = (n / 4, 3 * n / 4);
        let mut outside = 0.0;
        let mut total = 0.0;
        for (k, z) in self.samples.iter().enumerate() {
            let m = z.norm_sqr();
            total += m;
            if k < lo || k >= hi {
                outside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (outside / total).sqrt()
        }
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncation_ratio() > TRUNCATION_TOLERANCE
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { samples: self.samples.iter().map(|z| z * c).collect(), ..self.clone() }
    }

    /// `self - other` on the same space.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_space(other) {
            return Err(Error::Mismatch);
        }
        let s = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        self.with_samples(s)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `y_m = c·(-1)^m Σ_k (-1)^k x_k e^{∓2πikm/N}` with the sign given by `inverse`.
pub(crate) fn centered_dft(input: &[Complex64], inverse: bool, c: f64) -> Vec<Complex64> {
    let n = input.len();
    let mut buf: Vec<Complex64> = input
        .iter()
        .enumerate()
        .map(|(k, z)| if k % 2 == 0 { *z } else { -*z })
        .collect();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(&mut buf);
    for (m, z) in buf.iter_mut().enumerate() {
        *z *= if m % 2 == 0 { c } else { -c };
    }
    buf
}

/// `F_h u(ξ) = (2πh)^{-1/2} ∫ u(x) e^{-ixξ/h} dx` on the dual grid.
pub fn hfourier_forward(u: &WaveFunction) -> Result<WaveFunction> {
    if u.domain != Domain::Position {
        return Err(Error::Mismatch);
    }
    let c = u.grid.spacing() / (2.0 * PI * u.h).sqrt();
    WaveFunction::new(u.grid, u.h, Domain::Frequency, centered_dft(&u.samples, false, c))
}

/// Inverse of [`hfourier_forward`].
pub fn hfourier_inverse(v: &WaveFunction) -> Result<WaveFunction> {
    if v.domain != Domain::Frequency {
        return Err(Error::Mismatch);
    }
    let c = v.grid.freq_spacing(v.h) / (2.0 * PI * v.h).sqrt();
    WaveFunction::new(v.grid, v.h, Domain::Position, centered_dft(&v.samples, true, c))
}

/// Trapezoid approximation of `∫ u v̄`.
pub fn l2_inner(u: &WaveFunction, v: &WaveFunction) -> Result<Complex64> {
    if !u.same_space(v) {
        return Err(Error::Mismatch);
    }
    let mut acc = CompensatedSum::default();
    for (a, b) in u.samples.iter().zip(&v.samples) {
        acc.add(a * b.conj());
    }
    Ok(acc.value() * u.cell())
}

pub fn l2_norm(u: &WaveFunction) -> f64 {
    (crate::numeric::sum_real(u.samples.iter().map(|z| z.norm_sqr())) * u.cell()).sqrt()
}

/// Chooses grids along an h-ladder so that states living in
/// `[-extent, extent]` with frequencies up to `max_frequency` are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    /// Content must lie in `[-extent, extent]`; the half-width is the next
    /// power of two at or above twice this.
    pub extent: f64,
    /// Largest frequency any sampled state carries.
    pub max_frequency: f64,
    /// Optional minimum number of samples per `√h`; zero disables it.
    pub points_per_sqrt_h: f64,
    /// Upper bound on `N`.
    pub max_points: usize,
}

/// Default cap on grid sizes.
pub const DEFAULT_MAX_POINTS: usize = 1 << 23;

impl GridPlan {
    pub fn new(extent: f64, max_frequency: f64) -> Self {
        Self { extent, max_frequency, points_per_sqrt_h: 0.0, max_points: DEFAULT_MAX_POINTS }
    }

    pub fn with_points_per_sqrt_h(mut self, p: f64) -> Self {
        self.points_per_sqrt_h = p;
        self
    }

    pub fn half_width(&self) -> f64 {
        let want = (2.0 * self.extent).max(1.0);
        let mut l = 1.0;
        while l < want {
            l *= 2.0;
        }
        l
    }

    pub fn grid(&self, h: f64) -> Result<SpatialGrid> {
        check_h(h)?;
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::GridWidth(self.extent));
        }
        let l = self.half_width();
        let xi = self.max_frequency.abs();
        let mut need = (4.0 * xi * l / (PI * h)).max(2.0 * l * (4.0 * xi + 1.0) / h);
        if self.points_per_sqrt_h > 0.0 {
            need = need.max(2.0 * l * self.points_per_sqrt_h / h.sqrt());
        }
        if !need.is_finite() || need > self.max_points as f64 {
            return Err(Error::Budget {
                what: "grid",
                needed: need.min(usize::MAX as f64) as usize,
                budget: self.max_points,
            });
        }
        SpatialGrid::new(l, next_pow2(need, 8))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(grid: SpatialGrid, h: f64, x0: f64, xi0: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, h, |x| {
            Complex64::from_polar((-(x - x0).powi(2) / (2.0 * h)).exp(), (x - x0) * xi0 / h)
        })
        .unwrap()
    }

    #[test]
    fn grid_arithmetic() {
        let g = SpatialGrid::new(16.0, 16).unwrap();
        assert_eq!(g.point(0), -16.0);
        assert_eq!(g.spacing(), 2.0);
        assert_eq!(SpatialGrid::new(16.0, 4096).unwrap().spacing(), 1.0 / 128.0);
        assert_eq!(SpatialGrid::new(16.0, 100), Err(Error::GridSize(100)));
        assert_eq!(SpatialGrid::new(16.0, 4), Err(Error::GridSize(4)));
        assert!(SpatialGrid::new(0.0, 16).is_err());
        assert!(SpatialGrid::new(f64::NAN, 16).is_err());
    }

    #[test]
    fn dual_grid_covers_symmetric_band() {
        let g = SpatialGrid::new(4.0, 64).unwrap();
        let h = 0.01;
        assert!((g.freq_spacing(h) * g.spacing() - 2.0 * PI * h / 64.0).abs() < 1e-18);
        assert_eq!(g.freq_point(h, 32), 0.0);
        assert!((g.freq_point(h, 0) + PI * h * 64.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn index_ranges() {
        let g = SpatialGrid::new(16.0, 16).unwrap();
        assert_eq!(g.indices_within(-16.0, -14.0), 0..2);
        assert_eq!(g.indices_within(-1.0, 1.0), 8..9);
        assert_eq!(g.indices_within(100.0, 200.0), 0..0);
        assert_eq!(g.indices_within(-100.0, 100.0), 0..16);
    }

    #[test]
    fn gaussian_is_self_dual() {
        let h = 0.01;
        let g = SpatialGrid::new(4.0, 2048).unwrap();
        let u = gaussian(g, h, 0.0, 0.0);
        let v = hfourier_forward(&u).unwrap();
        for m in 0..g.len() {
            let xi = g.freq_point(h, m);
            let want = (-xi * xi / (2.0 * h)).exp();
            assert!((v.samples()[m] - want).norm() < 1e-12, "m={m}");
        }
        let w = hfourier_inverse(&v).unwrap();
        for (a, b) in w.samples().iter().zip(u.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn modulated_bump_peaks_at_its_frequency() {
        let h = 1.0 / 256.0;
        let g = GridPlan::new(1.0, 2.0).grid(h).unwrap();
        let xi0 = 1.3;
        let u = WaveFunction::from_fn(g, h, |x| {
            Complex64::from_polar(crate::numeric::unit_bump(x / 0.5), x * xi0 / h)
        })
        .unwrap();
        let v = hfourier_forward(&u).unwrap();
        let (m, _) = v
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((g.freq_point(h, m) - xi0).abs() <= g.freq_spacing(h));
    }

    #[test]
    fn inner_product_rules() {
        let g = SpatialGrid::new(4.0, 256).unwrap();
        let h = 0.05;
        let u = gaussian(g, h, -1.0, 0.5);
        let v = gaussian(g, h, -0.8, 0.0);
        let uv = l2_inner(&u, &v).unwrap();
        let vu = l2_inner(&v, &u).unwrap();
        assert!((uv - vu.conj()).norm() < 1e-15);
        let uu = l2_inner(&u, &u).unwrap();
        assert!(uu.im.abs() < 1e-15 && (uu.re - l2_norm(&u).powi(2)).abs() < 1e-13);
        let left = WaveFunction::from_fn(g, h, |x| if x < 0.0 { 1.0.into() } else { 0.0.into() }).unwrap();
        let right = WaveFunction::from_fn(g, h, |x| if x >= 0.0 { 1.0.into() } else { 0.0.into() }).unwrap();
        assert_eq!(l2_inner(&left, &right).unwrap(), Complex64::new(0.0, 0.0));
        let other = WaveFunction::zeros(g, 0.1, Domain::Position).unwrap();
        assert_eq!(l2_inner(&u, &other), Err(Error::Mismatch));
    }

    #[test]
    fn rejects_bad_samples() {
        let g = SpatialGrid::new(1.0, 8).unwrap();
        let mut s = vec![Complex64::new(0.0, 0.0); 8];
        s[3] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(WaveFunction::new(g, 0.5, Domain::Position, s), Err(Error::NonFinite));
        assert!(WaveFunction::zeros(g, 1.0, Domain::Position).is_err());
        assert!(WaveFunction::new(g, 0.5, Domain::Position, vec![]).is_err());
    }

    #[test]
    fn truncation_flag() {
        let g = SpatialGrid::new(4.0, 512).unwrap();
        assert!(!gaussian(g, 0.01, 0.0, 0.0).truncation_warning());
        assert!(gaussian(g, 0.01, 2.5, 0.0).truncation_warning());
    }

    #[test]
    fn plan_sizes() {
        let p = GridPlan::new(1.5, 2.0);
        assert_eq!(p.half_width(), 4.0);
        let g = p.grid(1.0 / 64.0).unwrap();
        assert!(g.spacing() <= (1.0 / 64.0) / 9.0);
        assert!(g.freq_half_width(1.0 / 64.0) >= 2.0 * 2.0);
        let tiny = GridPlan { max_points: 1024, ..p };
        assert!(matches!(tiny.grid(1e-4), Err(Error::Budget { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn unitary_and_invertible(
            x0 in -1.0f64..1.0, xi0 in -2.0f64..2.0, k in 3u32..10, seed in 0u64..1000
        ) {
            let h = 2f64.powi(-(k as i32));
            let g = GridPlan::new(2.0, 3.0).grid(h).unwrap();
            let phase = seed as f64 * 0.37;
            let u = gaussian(g, h, x0, xi0).scale(Complex64::from_polar(1.0, phase));
            let v = hfourier_forward(&u).unwrap();
            let n = l2_norm(&u);
            prop_assert!((l2_norm(&v) - n).abs() <= 1e-10 * n);
            let w = hfourier_inverse(&v).unwrap();
            prop_assert!(l2_norm(&w.sub(&u).unwrap()) <= 1e-10 * n);
        }

        #[test]
        fn parseval(x0 in -1.0f64..1.0, y0 in -1.0f64..1.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let h = 1.0 / 128.0;
            let g = GridPlan::new(2.0, 3.0).grid(h).unwrap();
            let u = gaussian(g, h, x0, a);
            let v = gaussian(g, h, y0, b);
            let lhs = l2_inner(&u, &v).unwrap();
            let rhs = l2_inner(&hfourier_forward(&u).unwrap(), &hfourier_forward(&v).unwrap()).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * l2_norm(&u) * l2_norm(&v));
        }
    }
}
