//! Window profiles, coherent states `h^{-1/4} w((x-x0)/√h) e^{ixξ0/h}` and
//! WKB states `b(x) e^{iΦ(x)/h}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{centered_dft, check_h, Domain, GridPlan, SpatialGrid, WaveFunction};
use crate::numeric::unit_bump;

/// A real profile used to build coherent states and probes.
pub trait Profile: Sync {
    fn value(&self, y: f64) -> f64;
    /// Beyond this radius the profile is zero or negligible at double precision.
    fn radius(&self) -> f64;
}

/// Window parameters; this is also the configuration format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowSpec {
    /// `ŵ(η) = exp(-1/(1-(η/ρ)²))` on `|η| < ρ`.
    BumpHat { radius: f64 },
    /// `w(x) = (ρ²/π)^{1/4} e^{-ρ²x²/2}`, whose transform has width `ρ`.
    Gaussian { scale: f64 },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::BumpHat { radius: 1.0 }
    }
}

const TABLE_LEN: usize = 1 << 16;
/// Table half-width in units of `1/ρ`.
const TABLE_EXTENT: f64 = 600.0;
const GAUSSIAN_CUTOFF: f64 = 9.0;

struct BumpTable {
    half_width: f64,
    step: f64,
    values: Vec<f64>,
}

impl BumpTable {
    fn build(rho: f64) -> Self {
        let half_width = TABLE_EXTENT / rho;
        let n = TABLE_LEN;
        let step = 2.0 * half_width / n as f64;
        let deta = PI / half_width;
        let hat: Vec<Complex64> = (0..n)
            .map(|m| bump_hat(rho, (m as f64 - (n / 2) as f64) * deta).into())
            .collect();
        let values = centered_dft(&hat, true, deta / (2.0 * PI).sqrt())
            .into_iter()
            .map(|z| z.re)
            .collect();
        Self { half_width, step, values }
    }

    fn eval(&self, y: f64) -> f64 {
        const ORDER: usize = 8;
        let t = (y + self.half_width) / self.step;
        let first = t.floor() as isize - (ORDER as isize / 2 - 1);
        if first < 0 || first as usize + ORDER > self.values.len() {
            return 0.0;
        }
        let first = first as usize;
        let u = t - first as f64;
        if u == u.floor() {
            return self.values[first + u as usize];
        }
        let mut prod = 1.0;
        for k in 0..ORDER {
            prod *= u - k as f64;
        }
        let mut acc = 0.0;
        for j in 0..ORDER {
            acc += self.values[first + j] * prod / ((u - j as f64) * LAGRANGE_DENOM[j]);
        }
        acc
    }
}

/// `Π_{k≠j} (j - k)` for eight equispaced nodes.
const LAGRANGE_DENOM: [f64; 8] = [-5040.0, 720.0, -240.0, 144.0, -144.0, 240.0, -720.0, 5040.0];

fn bump_hat(rho: f64, eta: f64) -> f64 {
    let t = eta / rho;
    let q = 1.0 - t * t;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn table_for(rho: f64) -> Arc<BumpTable> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<BumpTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("window cache poisoned");
    guard.entry(rho.to_bits()).or_insert_with(|| Arc::new(BumpTable::build(rho))).clone()
}

/// Gauss–Legendre rule with `n` nodes on `[a, b]`.
pub(crate) fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(2)).unwrap());
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

/// The profile `φ` of a coherent state together with its unitary transform.
#[derive(Clone)]
pub struct Window {
    spec: WindowSpec,
    table: Option<Arc<BumpTable>>,
    norm: f64,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window").field("spec", &self.spec).field("norm", &self.norm).finish()
    }
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Window {
    pub fn new(spec: WindowSpec) -> Result<Self> {
        match spec {
            WindowSpec::BumpHat { radius } => Self::bump_hat(radius),
            WindowSpec::Gaussian { scale } => Self::gaussian_scaled(scale),
        }
    }

    pub fn bump_hat(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("window radius must be positive, got {radius}")));
        }
        let sq = crate::numeric::sum_real(
            gauss_legendre(256, -radius, radius).into_iter().map(|(x, w)| w * bump_hat(radius, x).powi(2)),
        );
        Ok(Self { spec: WindowSpec::BumpHat { radius }, table: Some(table_for(radius)), norm: sq.sqrt() })
    }

    pub fn gaussian() -> Self {
        Self::gaussian_scaled(1.0).expect("unit scale is valid")
    }

    pub fn gaussian_scaled(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("window scale must be positive, got {scale}")));
        }
        Ok(Self { spec: WindowSpec::Gaussian { scale }, table: None, norm: 1.0 })
    }

    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    /// `‖w‖_{L²}`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `ŵ(η)` under the unitary `h = 1` transform.
    pub fn fourier(&self, eta: f64) -> f64 {
        match self.spec {
            WindowSpec::BumpHat { radius } => bump_hat(radius, eta),
            WindowSpec::Gaussian { scale } => {
                (PI * scale * scale).powf(-0.25) * (-eta * eta / (2.0 * scale * scale)).exp()
            }
        }
    }

    /// Radius of the frequency support, if compact.
    pub fn fourier_support(&self) -> Option<f64> {
        match self.spec {
            WindowSpec::BumpHat { radius } => Some(radius),
            WindowSpec::Gaussian { .. } => None,
        }
    }

    /// Radius beyond which `ŵ` is zero or negligible.
    pub fn fourier_radius(&self) -> f64 {
        match self.spec {
            WindowSpec::BumpHat { radius } => radius,
            WindowSpec::Gaussian { scale } => GAUSSIAN_CUTOFF * scale,
        }
    }

    /// Whether the window meets the compact-transform hypothesis required by
    /// the center-selection experiment.
    pub fn is_conforming(&self) -> bool {
        self.fourier_support().is_some()
    }
}

impl Profile for Window {
    fn value(&self, y: f64) -> f64 {
        match (self.spec, &self.table) {
            (WindowSpec::Gaussian { scale }, _) => {
                (scale * scale / PI).powf(0.25) * (-0.5 * scale * scale * y * y).exp()
            }
            (WindowSpec::BumpHat { .. }, Some(t)) => t.eval(y),
            (WindowSpec::BumpHat { .. }, None) => unreachable!("bump window without table"),
        }
    }

    fn radius(&self) -> f64 {
        match (self.spec, &self.table) {
            (WindowSpec::Gaussian { scale }, _) => GAUSSIAN_CUTOFF / scale,
            (_, Some(t)) => t.half_width,
            _ => unreachable!(),
        }
    }
}

/// `ψ(x) = exp(1 - 1/(1-(x/s)²))` on `|x| < s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestBump {
    pub radius: f64,
}

impl TestBump {
    pub fn new(radius: f64) -> Result<Self> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Self { radius })
        } else {
            Err(invalid(format!("test bump radius must be positive, got {radius}")))
        }
    }
}

impl Default for TestBump {
    fn default() -> Self {
        Self { radius: 0.5 }
    }
}

impl Profile for TestBump {
    fn value(&self, y: f64) -> f64 {
        unit_bump(y / self.radius)
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// Largest admissible grid spacing for frequency `xi` at parameter `h`.
pub fn phase_resolution_limit(h: f64, xi: f64) -> f64 {
    h / (4.0 * xi.abs() + 1.0)
}

fn check_center(grid: &SpatialGrid, h: f64, x0: f64, xi0: f64) -> Result<()> {
    check_h(h)?;
    let limit = phase_resolution_limit(h, xi0);
    let dx = grid.spacing();
    if dx > limit * (1.0 + 1e-12) {
        return Err(Error::UnresolvedPhase { spacing: dx, xi: xi0, limit });
    }
    let l = grid.half_width();
    if !(x0 > -l && x0 < l - dx) {
        return Err(Error::CenterOutsideGrid(x0));
    }
    Ok(())
}

/// Samples `φ_{x0,ξ0,h}` built on `profile`.
pub fn coherent_state<P: Profile + ?Sized>(
    profile: &P,
    x0: f64,
    xi0: f64,
    h: f64,
    grid: SpatialGrid,
) -> Result<WaveFunction> {
    check_center(&grid, h, x0, xi0)?;
    let sh = h.sqrt();
    let amp = h.powf(-0.25);
    let global = Complex64::from_polar(amp, x0 * xi0 / h);
    let reach = profile.radius() * sh;
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in grid.indices_within(x0 - reach, x0 + reach) {
        let d = grid.point(k) - x0;
        let v = profile.value(d / sh);
        if v != 0.0 {
            samples[k] = global * Complex64::from_polar(v, d * xi0 / h);
        }
    }
    WaveFunction::new(grid, h, Domain::Position, samples)
}

/// Closed-form `F_h φ_{x0,ξ0,h}` on the dual grid.
pub fn coherent_state_fourier(
    w: &Window,
    x0: f64,
    xi0: f64,
    h: f64,
    grid: SpatialGrid,
) -> Result<WaveFunction> {
    check_center(&grid, h, x0, xi0)?;
    let sh = h.sqrt();
    let amp = h.powf(-0.25);
    let reach = w.fourier_radius() * sh;
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    for m in grid.freq_indices_within(h, xi0 - reach, xi0 + reach) {
        let xi = grid.freq_point(h, m);
        let v = w.fourier((xi - xi0) / sh);
        if v != 0.0 {
            samples[m] = Complex64::from_polar(amp * v, x0 * (xi0 - xi) / h);
        }
    }
    WaveFunction::new(grid, h, Domain::Frequency, samples)
}

type RealToComplex = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Catalog of WKB data; this is also the configuration format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum WkbCase {
    /// `Φ = x²/2`, `b` the unit bump on `[-1, 1]`.
    RealQuadratic {},
    /// `Φ = xξ0`, `b` the unit bump on `[-1, 1]`.
    LinearPhase { frequency: f64 },
    /// `Φ = ix²`, `b = e^{-1/x²}` times the unit bump.
    FlatGaussian {},
    /// `Φ = ix²`, `b = x²` times the unit bump.
    QuadraticGaussian {},
    /// `Φ = ix²`, `b` the unit bump.
    BumpGaussian {},
}

/// Amplitude, phase and phase gradient of `b(x) e^{iΦ(x)/h}`.
#[derive(Clone)]
pub struct WkbData {
    amplitude: RealToComplex,
    phase: RealToComplex,
    gradient: RealToComplex,
    support: (f64, f64),
}

impl fmt::Debug for WkbData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WkbData").field("support", &self.support).finish_non_exhaustive()
    }
}

impl WkbData {
    /// `support` must contain the support of the amplitude.
    pub fn new(
        amplitude: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        phase: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        gradient: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Result<Self> {
        if !(support.0 < support.1 && support.0.is_finite() && support.1.is_finite()) {
            return Err(invalid("amplitude support must be a bounded interval"));
        }
        Ok(Self {
            amplitude: Arc::new(amplitude),
            phase: Arc::new(phase),
            gradient: Arc::new(gradient),
            support,
        })
    }

    pub fn from_case(case: WkbCase) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let i = Complex64::i();
        let bump = |x: f64| unit_bump(x);
        let built = match case {
            WkbCase::RealQuadratic {} => Self::new(move |x| c(bump(x)), move |x| c(0.5 * x * x), c, (-1.0, 1.0)),
            WkbCase::LinearPhase { frequency } => Self::new(
                move |x| c(bump(x)),
                move |x| c(x * frequency),
                move |_| c(frequency),
                (-1.0, 1.0),
            ),
            WkbCase::FlatGaussian {} => Self::new(
                move |x| c(if x == 0.0 { 0.0 } else { (-1.0 / (x * x)).exp() * bump(x) }),
                move |x| i * x * x,
                move |x| i * 2.0 * x,
                (-1.0, 1.0),
            ),
            WkbCase::QuadraticGaussian {} => {
                Self::new(move |x| c(x * x * bump(x)), move |x| i * x * x, move |x| i * 2.0 * x, (-1.0, 1.0))
            }
            WkbCase::BumpGaussian {} => {
                Self::new(move |x| c(bump(x)), move |x| i * x * x, move |x| i * 2.0 * x, (-1.0, 1.0))
            }
        };
        built.expect("catalog supports are valid")
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        if x < self.support.0 || x > self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.amplitude)(x)
        }
    }

    pub fn phase(&self, x: f64) -> Complex64 {
        (self.phase)(x)
    }

    pub fn phase_gradient(&self, x: f64) -> Complex64 {
        (self.gradient)(x)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `max |Re Φ'|` over the amplitude support, sampled at 4097 points.
    pub fn max_real_gradient(&self) -> f64 {
        let (lo, hi) = self.support;
        let n = 4096;
        (0..=n).map(|k| self.phase_gradient(lo + (hi - lo) * k as f64 / n as f64).re.abs()).fold(0.0, f64::max)
    }

    /// The same data with `Φ` replaced by `Φ + shift`.
    pub fn with_phase_shift(&self, shift: f64) -> Self {
        let phase = self.phase.clone();
        Self { phase: Arc::new(move |x| phase(x) + shift), ..self.clone() }
    }
}

/// Samples `b(x) e^{iΦ(x)/h}`.
pub fn wkb_state(d: &WkbData, h: f64, grid: SpatialGrid) -> Result<WaveFunction> {
    check_h(h)?;
    let dx = grid.spacing();
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in grid.indices_within(d.support.0, d.support.1) {
        let x = grid.point(k);
        let phi = d.phase(x);
        if phi.im < 0.0 {
            return Err(Error::NegativeImaginaryPhase { x, value: phi.im });
        }
        let grad = d.phase_gradient(x).re;
        if dx * grad.abs() / h > 0.25 {
            return Err(Error::UnresolvedPhase { spacing: dx, xi: grad, limit: 0.25 * h / grad.abs() });
        }
        let b = d.amplitude(x);
        if b != Complex64::new(0.0, 0.0) {
            samples[k] = b * Complex64::from_polar((-phi.im / h).exp(), phi.re / h);
        }
    }
    WaveFunction::new(grid, h, Domain::Position, samples)
}

fn unit_gaussian() -> WindowSpec {
    WindowSpec::Gaussian { scale: 1.0 }
}

/// A catalog state family `h ↦ u_h`; this is also the configuration format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Coherent {
        #[serde(default = "unit_gaussian")]
        window: WindowSpec,
        x0: f64,
        xi0: f64,
    },
    RealQuadratic {},
    LinearPhase { frequency: f64 },
    FlatGaussian {},
    QuadraticGaussian {},
    BumpGaussian {},
}

impl StateSpec {
    pub fn wkb_case(&self) -> Option<WkbCase> {
        match *self {
            StateSpec::Coherent { .. } => None,
            StateSpec::RealQuadratic {} => Some(WkbCase::RealQuadratic {}),
            StateSpec::LinearPhase { frequency } => Some(WkbCase::LinearPhase { frequency }),
            StateSpec::FlatGaussian {} => Some(WkbCase::FlatGaussian {}),
            StateSpec::QuadraticGaussian {} => Some(WkbCase::QuadraticGaussian {}),
            StateSpec::BumpGaussian {} => Some(WkbCase::BumpGaussian {}),
        }
    }

    /// Grid plan covering the state for every `h ≤ h_max` together with the
    /// caller's own `extent` and `max_frequency`.
    pub fn plan(&self, h_max: f64, extent: f64, max_frequency: f64) -> Result<GridPlan> {
        check_h(h_max)?;
        let (e, f) = match (*self, self.wkb_case()) {
            (StateSpec::Coherent { window, x0, xi0 }, _) => {
                let w = Window::new(window)?;
                let sh = h_max.sqrt();
                (x0.abs() + w.radius() * sh, xi0.abs() + w.fourier_radius() * sh)
            }
            (_, Some(case)) => {
                let d = WkbData::from_case(case);
                let (lo, hi) = d.support();
                (lo.abs().max(hi.abs()), d.max_real_gradient())
            }
            _ => unreachable!("every non-coherent state is a WKB case"),
        };
        Ok(GridPlan::new(e.max(extent), f.max(max_frequency)))
    }

    pub fn build(&self, h: f64, grid: SpatialGrid) -> Result<WaveFunction> {
        match (*self, self.wkb_case()) {
            (StateSpec::Coherent { window, x0, xi0 }, _) => coherent_state(&Window::new(window)?, x0, xi0, h, grid),
            (_, Some(case)) => wkb_state(&WkbData::from_case(case), h, grid),
            _ => unreachable!("every non-coherent state is a WKB case"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{hfourier_forward, l2_norm, GridPlan};
    use proptest::prelude::*;

    #[test]
    fn reconstructed_transform_of_bump_window() {
        for rho in [0.5, 1.0, 2.0] {
            let w = Window::bump_hat(rho).unwrap();
            let t = w.table.as_ref().unwrap();
            let samples: Vec<Complex64> = t.values.iter().map(|&v| v.into()).collect();
            let back = centered_dft(&samples, false, t.step / (2.0 * PI).sqrt());
            let deta = PI / t.half_width;
            for (m, z) in back.iter().enumerate() {
                let eta = (m as f64 - (TABLE_LEN / 2) as f64) * deta;
                assert!(z.re >= -1e-10);
                if eta.abs() > rho {
                    assert!(z.norm() <= 1e-10, "rho={rho} eta={eta}");
                }
                assert!((z.re - bump_hat(rho, eta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bump_window_interpolation_matches_direct_quadrature() {
        let w = Window::bump_hat(1.0).unwrap();
        let nodes = gauss_legendre(200, -1.0, 1.0);
        for y in [0.0, 0.013, 0.7, 3.3, 11.0, 40.5] {
            let direct: f64 =
                nodes.iter().map(|&(e, wt)| wt * bump_hat(1.0, e) * (e * y).cos()).sum::<f64>() / (2.0 * PI).sqrt();
            assert!((w.value(y) - direct).abs() < 1e-13, "y={y}: {} vs {direct}", w.value(y));
        }
        assert_eq!(w.value(1e6), 0.0);
    }

    #[test]
    fn window_norms() {
        let w = Window::bump_hat(1.0).unwrap();
        let t = w.table.as_ref().unwrap();
        let trap: f64 = t.values.iter().map(|v| v * v).sum::<f64>() * t.step;
        assert!((trap.sqrt() - w.norm()).abs() < 1e-12);
        assert_eq!(Window::gaussian().norm(), 1.0);
        assert!(Window::bump_hat(-1.0).is_err());
        assert!(Window::gaussian_scaled(0.0).is_err());
    }

    #[test]
    fn unit_gaussian_state() {
        let h = 0.01;
        let g = GridPlan::new(1.0, 0.0).grid(h).unwrap();
        let u = coherent_state(&Window::gaussian(), 0.0, 0.0, h, g).unwrap();
        for (k, z) in u.samples().iter().enumerate() {
            let x = g.point(k);
            let want = h.powf(-0.25) * PI.powf(-0.25) * (-x * x / (2.0 * h)).exp();
            assert!((z - want).norm() < 1e-15);
        }
        assert!((l2_norm(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_transform_has_no_phase() {
        let w = Window::bump_hat(1.0).unwrap();
        let h = 1.0 / 64.0;
        let g = GridPlan::new(1.0, 1.0).grid(h).unwrap();
        let v = coherent_state_fourier(&w, 0.0, 0.0, h, g).unwrap();
        for (m, z) in v.samples().iter().enumerate() {
            assert_eq!(z.im, 0.0);
            let xi = g.freq_point(h, m);
            assert!((z.re - h.powf(-0.25) * w.fourier(xi / h.sqrt())).abs() < 1e-15);
        }
    }

    #[test]
    fn preconditions() {
        let g = SpatialGrid::new(4.0, 64).unwrap();
        let w = Window::gaussian();
        assert!(matches!(coherent_state(&w, 0.0, 5.0, 0.01, g), Err(Error::UnresolvedPhase { .. })));
        let g = GridPlan::new(1.0, 1.0).grid(0.01).unwrap();
        assert_eq!(coherent_state(&w, 9.0, 0.0, 0.01, g), Err(Error::CenterOutsideGrid(9.0)));
        assert!(coherent_state_fourier(&w, -9.0, 0.0, 0.01, g).is_err());
    }

    #[test]
    fn fft_matches_closed_form() {
        for w in [Window::gaussian(), Window::bump_hat(1.0).unwrap()] {
            let h: f64 = 1.0 / 256.0;
            let r = w.radius() * h.sqrt();
            let g = GridPlan::new(r + 1.0, 2.0).grid(h).unwrap();
            let u = coherent_state(&w, 0.7, -1.2, h, g).unwrap();
            let v = hfourier_forward(&u).unwrap();
            let exact = coherent_state_fourier(&w, 0.7, -1.2, h, g).unwrap();
            let err = l2_norm(&v.sub(&exact).unwrap()) / l2_norm(&exact);
            assert!(err < 1e-8, "{:?}: {err}", w.spec());
        }
    }

    #[test]
    fn wkb_basics() {
        let h = 1.0 / 64.0;
        let g = GridPlan::new(1.0, 1.0).grid(h).unwrap();
        let zero = WkbData::new(|x| unit_bump(x).into(), |_| 0.0.into(), |_| 0.0.into(), (-1.0, 1.0)).unwrap();
        let u = wkb_state(&zero, h, g).unwrap();
        for (k, z) in u.samples().iter().enumerate() {
            assert_eq!(*z, Complex64::from(unit_bump(g.point(k))));
        }
        let real = WkbData::from_case(WkbCase::RealQuadratic {});
        let u = wkb_state(&real, h, g).unwrap();
        for (k, z) in u.samples().iter().enumerate() {
            let b = unit_bump(g.point(k));
            assert!((z.norm() - b).abs() <= 1e-15);
        }
        let bad = WkbData::new(|x| unit_bump(x).into(), |x| Complex64::new(0.0, -x * x), |_| 0.0.into(), (-1.0, 1.0))
            .unwrap();
        assert!(matches!(wkb_state(&bad, h, g), Err(Error::NegativeImaginaryPhase { .. })));
        let coarse = SpatialGrid::new(2.0, 64).unwrap();
        assert!(matches!(wkb_state(&real, h, coarse), Err(Error::UnresolvedPhase { .. })));
    }

    #[test]
    fn flat_amplitude_is_exponentially_small() {
        let d = WkbData::from_case(WkbCase::FlatGaussian {});
        for k in 4..=14 {
            let h = 2f64.powi(-k);
            let g = GridPlan::new(1.0, 0.5).grid(h).unwrap();
            let u = wkb_state(&d, h, g).unwrap();
            let sup = u.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(sup <= (-2.0 / h.sqrt()).exp() * (1.0 + 1e-12));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coherent_norm_is_invariant(
            x0 in -1.0f64..1.0, xi0 in -2.0f64..2.0, k in 4i32..12, bump in any::<bool>()
        ) {
            let w = if bump { Window::bump_hat(1.0).unwrap() } else { Window::gaussian() };
            let h = 2f64.powi(-k);
            let g = GridPlan::new(w.radius() * h.sqrt() + 1.0, 2.0).with_points_per_sqrt_h(64.0).grid(h).unwrap();
            let u = coherent_state(&w, x0, xi0, h, g).unwrap();
            prop_assert!((l2_norm(&u) - w.norm()).abs() <= 1e-8 * w.norm());
        }

        #[test]
        fn transform_modulus_ignores_position(x0 in -1.0f64..1.0, xi0 in -1.0f64..1.0) {
            let w = Window::gaussian();
            let h = 1.0 / 32.0;
            let g = GridPlan::new(2.0, 2.0).grid(h).unwrap();
            let a = coherent_state_fourier(&w, x0, xi0, h, g).unwrap();
            let b = coherent_state_fourier(&w, 0.0, xi0, h, g).unwrap();
            for (p, q) in a.samples().iter().zip(b.samples()) {
                prop_assert!((p.norm() - q.norm()).abs() <= 1e-14);
            }
        }

        #[test]
        fn wkb_modulus_bounded_by_amplitude(k in 4i32..12, case in 0usize..3) {
            let case = [WkbCase::FlatGaussian {}, WkbCase::QuadraticGaussian {}, WkbCase::BumpGaussian {}][case];
            let d = WkbData::from_case(case);
            let h = 2f64.powi(-k);
            let g = GridPlan::new(1.0, 1.0).grid(h).unwrap();
            let u = wkb_state(&d, h, g).unwrap();
            for (j, z) in u.samples().iter().enumerate() {
                prop_assert!(z.norm() <= d.amplitude(g.point(j)).norm() * (1.0 + 1e-12));
            }
        }
    }
}
