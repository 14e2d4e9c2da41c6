//! Shifted coherent states witnessing the essential support.
//!
//! For a symbol whose essential support contains the origin, the pairing of
//! `Op_{1,h}(a)φ_{0,0,h}` can decay like `O(h^∞)` while a center
//! `(x_h, ξ_h) → 0` chosen per `h` keeps the pairing bounded below by a
//! power of `h`. This module estimates the exponent `α(r)`, selects the
//! centers and measures both pairings through the rescaled integral
//!
//! `(2π)^{-1/2} ∬ a(x_h + √h x, ξ_h + √h ξ; h) ψ(x) ŵ(ξ) e^{ixξ} dx dξ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{GridPlan, WaveFunction};
use crate::numeric::{line_fit, CompensatedSum};
use crate::pdo::{apply_op_t1, apply_op_t1_rows};
use crate::states::{coherent_state_fourier, gauss_legendre, Profile, TestBump, Window, WindowSpec};
use crate::symbols::{ball_argmax, BallMax, Symbol};
use crate::wavefront::{decay_fit, sector_check, DecayFit, FitPolicy, HLadder, PairingSeries, SectorCheck};

/// Largest number of quadrature nodes per axis.
pub const QUAD_BUDGET: usize = 4096;
/// Relative floor for quadrature pairings: magnitudes below this fraction of
/// `∬|integrand|` are indistinguishable from rounding.
pub const QUAD_FLOOR: f64 = 1e-13;

/// Power-law fit of `sup_{B(r)} |a(·,·;h)|` along the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub radius: f64,
    /// Slope over the last `window` ladder points with a nonzero sup;
    /// `None` stands for `+∞` (fewer than two nonzero sups).
    pub alpha: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    /// Slope over every nonzero sup of the ladder.
    pub ladder_slope: Option<f64>,
    pub sups: Vec<f64>,
    pub window: usize,
    /// Large residual, or window and whole-ladder slopes disagree.
    pub unstable: bool,
}

impl AlphaEstimate {
    pub fn alpha_or_inf(&self) -> f64 {
        self.alpha.unwrap_or(f64::INFINITY)
    }

    /// `e^{intercept}`, the constant in `sup ≈ C h^α`.
    pub fn prefactor(&self) -> Option<f64> {
        self.intercept.map(f64::exp)
    }
}

fn window_points(ladder: &[f64], values: &[f64], window: usize) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&h, &v)| (h.ln(), v.ln()))
        .collect();
    let take = if window == 0 { pts.len() } else { window.min(pts.len()) };
    pts[pts.len() - take..].to_vec()
}

fn fit_alpha(radius: f64, ladder: &HLadder, sups: Vec<f64>, window: usize) -> AlphaEstimate {
    let tail = line_fit(&window_points(ladder.values(), &sups, window));
    let whole = line_fit(&window_points(ladder.values(), &sups, 0));
    let unstable = match (tail, whole) {
        (Some(t), Some(w)) => t.residual > 0.05 || (t.slope - w.slope).abs() > 0.25,
        _ => true,
    };
    AlphaEstimate {
        radius,
        alpha: tail.map(|f| f.slope),
        intercept: tail.map(|f| f.intercept),
        residual: tail.map(|f| f.residual),
        ladder_slope: whole.map(|f| f.slope),
        sups,
        window,
        unstable,
    }
}

/// `α̂(r)` for each radius: log-log regression of the grid sup of `|a|` on
/// the disc of radius `r` against `h`, restricted to the last `window`
/// ladder points (`0` uses the whole ladder).
pub fn estimate_alpha(
    a: &Symbol,
    radii: &[f64],
    ladder: &HLadder,
    resolution: usize,
    window: usize,
) -> Result<Vec<AlphaEstimate>> {
    a.validate()?;
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(invalid("radii must be positive"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be strictly decreasing"));
    }
    if window == 1 {
        return Err(invalid("an exponent fit needs at least two points"));
    }
    let hs = ladder.values();
    let pairs: Vec<(usize, usize)> = (0..radii.len()).flat_map(|i| (0..hs.len()).map(move |k| (i, k))).collect();
    let sups: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, k)| ball_argmax(a, radii[i], hs[k], resolution).map(|m| m.value))
        .collect::<Result<_>>()?;
    Ok(radii
        .iter()
        .enumerate()
        .map(|(i, &r)| fit_alpha(r, ladder, sups[i * hs.len()..(i + 1) * hs.len()].to_vec(), window))
        .collect())
}

/// Per-`h` argmax centers with the two forms of the lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSelection {
    pub radius: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// `e^{intercept}` of the exponent fit.
    pub prefactor: f64,
    pub centers: Vec<BallMax>,
    /// `h^{α̂+ε}`.
    pub literal_bound: Vec<f64>,
    /// `e^{intercept} h^{α̂+ε}`.
    pub calibrated_bound: Vec<f64>,
    pub literal_holds: Vec<bool>,
    pub calibrated_holds: Vec<bool>,
    /// Number of smallest-`h` points on which the calibrated bound is enforced.
    pub window: usize,
}

impl CenterSelection {
    fn share(flags: &[bool], window: usize) -> f64 {
        let tail = &flags[flags.len() - window.min(flags.len())..];
        tail.iter().filter(|&&b| b).count() as f64 / tail.len() as f64
    }

    /// Fraction of the fit window on which `|a(x_h, ξ_h; h)| ≥ h^{α̂+ε}`.
    pub fn literal_share(&self) -> f64 {
        Self::share(&self.literal_holds, self.window)
    }

    pub fn calibrated_share(&self) -> f64 {
        Self::share(&self.calibrated_holds, self.window)
    }
}

fn check_epsilon(a: &Symbol, epsilon: f64) -> Result<()> {
    let limit = 0.5 * (0.5 - a.delta());
    if epsilon > 0.0 && epsilon < limit {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must lie in (0, {limit}), got {epsilon}")))
    }
}

fn centers_from(
    a: &Symbol,
    epsilon: f64,
    ladder: &HLadder,
    resolution: usize,
    est: &AlphaEstimate,
) -> Result<CenterSelection> {
    check_epsilon(a, epsilon)?;
    if est.sups.iter().all(|&s| s == 0.0) {
        return Err(Error::ZeroSup(est.radius));
    }
    let (alpha, prefactor) = match (est.alpha, est.prefactor()) {
        (Some(al), Some(c)) if al.is_finite() => (al, c),
        _ => return Err(Error::InfiniteAlpha(est.radius)),
    };
    let hs = ladder.values();
    let centers: Vec<BallMax> =
        hs.par_iter().map(|&h| ball_argmax(a, est.radius, h, resolution)).collect::<Result<_>>()?;
    let literal_bound: Vec<f64> = hs.iter().map(|h| h.powf(alpha + epsilon)).collect();
    let calibrated_bound: Vec<f64> = literal_bound.iter().map(|b| prefactor * b).collect();
    let literal_holds = centers.iter().zip(&literal_bound).map(|(c, b)| c.value >= *b).collect();
    let calibrated_holds: Vec<bool> = centers.iter().zip(&calibrated_bound).map(|(c, b)| c.value >= *b).collect();
    let window = if est.window == 0 { hs.len() } else { est.window.min(hs.len()) };
    let failed = calibrated_holds[hs.len() - window..].iter().filter(|&&b| !b).count();
    if 5 * failed > window {
        return Err(Error::LowerBound { failed, total: window });
    }
    Ok(CenterSelection {
        radius: est.radius,
        epsilon,
        alpha,
        prefactor,
        centers,
        literal_bound,
        calibrated_bound,
        literal_holds,
        calibrated_holds,
        window,
    })
}

/// Argmax centers of `|a(·,·;h)|` on the grid of `B(r)` for each ladder `h`.
///
/// Fails when `ε ∉ (0, ½(½-δ))`, when `a` vanishes on the ball, or when the
/// calibrated bound `e^{intercept} h^{α̂+ε}` fails on more than a fifth of
/// the fit window.
pub fn select_centers(
    a: &Symbol,
    r: f64,
    epsilon: f64,
    ladder: &HLadder,
    resolution: usize,
    window: usize,
) -> Result<CenterSelection> {
    check_epsilon(a, epsilon)?;
    let est = estimate_alpha(a, &[r], ladder, resolution, window)?.remove(0);
    centers_from(a, epsilon, ladder, resolution, &est)
}

/// The rescaled integral and diagnostics of its integrand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPairing {
    pub value: Complex64,
    /// `(2π)^{-1/2} ∬ |integrand|`.
    pub abs_integral: f64,
    /// `∬ ψ ŵ`.
    pub kernel_integral: f64,
    /// Largest deviation of `arg(integrand)` from `arg a(x_h, ξ_h; h)`;
    /// `None` if `a` vanishes at the center.
    pub arg_spread: Option<f64>,
    /// Largest `|arg(ψ ŵ e^{ixξ})|` over the nodes.
    pub kernel_spread: f64,
    /// Sector inequality for the integrand; `None` if it vanishes.
    pub sector: Option<SectorCheck>,
}

fn wrap(t: f64) -> f64 {
    (t + PI).rem_euclid(2.0 * PI) - PI
}

fn reduced_nodes(psi: &TestBump, w: &Window, n: usize) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let rho = w.fourier_support().ok_or(Error::NonCompactWindow)?;
    if n < 65 {
        return Err(invalid(format!("quadrature needs at least 65 nodes per axis, got {n}")));
    }
    if n > QUAD_BUDGET {
        return Err(Error::Budget { what: "quadrature", needed: n, budget: QUAD_BUDGET });
    }
    Ok((gauss_legendre(n, -psi.radius, psi.radius), gauss_legendre(n, -rho, rho)))
}

/// Tensor Gauss–Legendre evaluation of the rescaled pairing with full
/// diagnostics.
pub fn reduced_pairing_detail(
    a: &Symbol,
    center: (f64, f64),
    h: f64,
    psi: &TestBump,
    w: &Window,
    quad_nodes: usize,
) -> Result<ReducedPairing> {
    let (xs, xis) = reduced_nodes(psi, w, quad_nodes)?;
    let sh = h.sqrt();
    let (xc, xic) = center;
    let ac = a.eval(xc, xic, h);
    let ref_arg = (ac != Complex64::new(0.0, 0.0)).then(|| ac.arg());
    struct Row {
        sum: Complex64,
        abs: f64,
        kernel: f64,
        spread: f64,
        kernel_spread: f64,
        samples: Vec<Complex64>,
        weights: Vec<f64>,
    }
    let rows: Vec<Row> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let px = psi.value(x);
            let mut acc = CompensatedSum::default();
            let mut row = Row {
                sum: Complex64::new(0.0, 0.0),
                abs: 0.0,
                kernel: 0.0,
                spread: 0.0,
                kernel_spread: 0.0,
                samples: Vec::with_capacity(xis.len()),
                weights: Vec::with_capacity(xis.len()),
            };
            for &(xi, wxi) in &xis {
                let k = px * w.fourier(xi);
                let wt = wx * wxi;
                row.kernel += wt * k;
                if k == 0.0 {
                    continue;
                }
                row.kernel_spread = row.kernel_spread.max(wrap(x * xi).abs());
                let f = a.eval(xc + sh * x, xic + sh * xi, h) * Complex64::from_polar(k, x * xi);
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc.add(f * wt);
                row.abs += wt * f.norm();
                if let Some(r) = ref_arg {
                    row.spread = row.spread.max(wrap(f.arg() - r).abs());
                }
                row.samples.push(f);
                row.weights.push(wt);
            }
            row.sum = acc.value();
            row
        })
        .collect();
    let mut total = CompensatedSum::default();
    let (mut abs, mut kernel, mut spread, mut kernel_spread) = (0.0, 0.0, 0.0f64, 0.0f64);
    let (mut samples, mut weights) = (Vec::new(), Vec::new());
    for r in rows {
        total.add(r.sum);
        abs += r.abs;
        kernel += r.kernel;
        spread = spread.max(r.spread);
        kernel_spread = kernel_spread.max(r.kernel_spread);
        samples.extend(r.samples);
        weights.extend(r.weights);
    }
    let norm = (2.0 * PI).sqrt();
    let sector = if samples.is_empty() { None } else { Some(sector_check(&samples, &weights)?) };
    Ok(ReducedPairing {
        value: total.value() / norm,
        abs_integral: abs / norm,
        kernel_integral: kernel,
        arg_spread: ref_arg.map(|_| spread),
        kernel_spread,
        sector,
    })
}

/// `(2π)^{-1/2} ∬ a(x_c + √h x, ξ_c + √h ξ; h) ψ(x) ŵ(ξ) e^{ixξ} dx dξ`,
/// which equals `⟨Op_{1,h}(a)φ_{c,h}, ψ_{c,h}⟩`.
pub fn reduced_pairing(
    a: &Symbol,
    center: (f64, f64),
    h: f64,
    psi: &TestBump,
    w: &Window,
    quad_nodes: usize,
) -> Result<Complex64> {
    reduced_pairing_detail(a, center, h, psi, w, quad_nodes).map(|r| r.value)
}

/// The same pairing on a sampled grid: `φ_{c,h}` is built from its
/// transform, `Op_{1,h}(a)` is applied by summation over the dual grid and
/// the result is paired with `ψ_{c,h}` by the trapezoidal rule.
pub fn grid_pairing(
    a: &Symbol,
    center: (f64, f64),
    h: f64,
    psi: &TestBump,
    w: &Window,
    points_per_sqrt_h: f64,
) -> Result<Complex64> {
    let (xc, xic) = center;
    let sh = h.sqrt();
    let plan = GridPlan::new(xc.abs() + (w.radius() + psi.radius) * sh, xic.abs() + w.fourier_radius() * sh)
        .with_points_per_sqrt_h(points_per_sqrt_h);
    let grid = plan.grid(h)?;
    let phi = coherent_state_fourier(w, xc, xic, h, grid)?;
    let image = if a.separable_terms(h).is_some() {
        apply_op_t1(a, &phi)?
    } else {
        let rows = grid.indices_within(xc - psi.radius * sh, xc + psi.radius * sh);
        let vals = apply_op_t1_rows(a, &phi, rows.clone())?;
        let mut full = vec![Complex64::new(0.0, 0.0); grid.len()];
        full[rows].copy_from_slice(&vals);
        WaveFunction::new(grid, h, crate::grid::Domain::Position, full)?
    };
    crate::wavefront::localized_pairing(&image, psi, xc, xic)
}

/// Experiment settings; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Config {
    /// Ball radius for center selection.
    pub radius: f64,
    /// Radii at which `α̂` is reported.
    pub radii: Vec<f64>,
    pub epsilon: f64,
    pub ladder: HLadder,
    pub window: WindowSpec,
    /// Radius `s` of the test bump `ψ`; defaults to `min(½, ½/ρ)`.
    pub test_bump: Option<f64>,
    /// Grid points per axis for sup searches.
    pub resolution: usize,
    pub quad_nodes: usize,
    /// Smallest-`h` points used for `α̂`.
    pub alpha_window: usize,
    /// Smallest-`h` points at which the reduced pairing lower bound is checked.
    pub lower_bound_points: usize,
    pub policy: FitPolicy,
    /// Number of smallest ladder values cross-checked against the grid
    /// pairing.
    pub cross_check: usize,
    pub cross_check_points: f64,
    /// Enlargement of the ball for the gradient check; defaults to `r/2`.
    pub gradient_margin: Option<f64>,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            radius: 0.5,
            radii: (0..4).map(|j| 0.5 * 0.5f64.powi(j)).collect(),
            epsilon: 0.1,
            ladder: HLadder::default(),
            window: WindowSpec::default(),
            test_bump: None,
            resolution: 257,
            quad_nodes: 256,
            alpha_window: 4,
            lower_bound_points: 3,
            policy: FitPolicy::default(),
            cross_check: 0,
            cross_check_points: 256.0,
            gradient_margin: None,
        }
    }
}

impl Theorem1Config {
    pub fn window(&self) -> Result<Window> {
        Window::new(self.window)
    }

    pub fn test_bump(&self) -> Result<TestBump> {
        match self.test_bump {
            Some(s) => TestBump::new(s),
            None => {
                let rho = self.window()?.fourier_support().ok_or(Error::NonCompactWindow)?;
                TestBump::new(0.5f64.min(0.5 / rho))
            }
        }
    }

    pub fn validate(&self, a: &Symbol) -> Result<()> {
        a.validate()?;
        check_epsilon(a, self.epsilon)?;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {}", self.radius)));
        }
        if !self.window()?.is_conforming() {
            return Err(Error::NonCompactWindow);
        }
        self.test_bump()?;
        if self.lower_bound_points == 0 || self.lower_bound_points > self.ladder.len() {
            return Err(invalid("lower_bound_points must lie between 1 and the ladder length"));
        }
        if self.cross_check > self.ladder.len() {
            return Err(invalid("cross_check exceeds the ladder length"));
        }
        Ok(())
    }
}

/// Reduced pairing against the lower bound `¼ h^{α̂+ε} ∬ψŵ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub h: f64,
    /// `|∬ a ψ ŵ e^{ixξ}|`, without the `(2π)^{-1/2}`.
    pub integral: f64,
    pub kernel_integral: f64,
    pub literal_bound: f64,
    /// The bound multiplied by `e^{intercept}` of the exponent fit.
    pub calibrated_bound: f64,
    pub literal_holds: bool,
    pub calibrated_holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRow {
    pub h: f64,
    pub arg_spread: Option<f64>,
    pub kernel_spread: f64,
    /// `arg_spread ≤ π/3`.
    pub within_sector: Option<bool>,
    pub check: Option<SectorCheck>,
}

/// Slope of the sup of `|∇a|` on an enlarged ball against `α̂ - 0.2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientControl {
    pub radius: f64,
    pub sups: Vec<f64>,
    pub slope: Option<f64>,
    pub bound: f64,
    pub holds: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub h: f64,
    pub reduced: Complex64,
    pub grid: Complex64,
    pub relative_difference: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub fixed_center_negligible: bool,
    /// Shifted-center slope at most `α̂ + ε + 0.5`.
    pub shifted_slope_bounded: bool,
    pub lower_bound_literal: bool,
    pub lower_bound_calibrated: bool,
    /// Fixed center negligible, shifted slope bounded and the calibrated
    /// lower bound met.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub symbol: Symbol,
    pub config: Theorem1Config,
    pub test_bump_radius: f64,
    pub alpha_estimates: Vec<AlphaEstimate>,
    pub alpha: AlphaEstimate,
    pub centers: CenterSelection,
    pub fixed_center_series: PairingSeries,
    pub fixed_center_fit: DecayFit,
    pub shifted_center_series: PairingSeries,
    pub shifted_center_fit: DecayFit,
    pub lower_bound: Vec<LowerBoundRow>,
    pub sector_diag: Vec<SectorRow>,
    pub gradient: GradientControl,
    pub cross_check: Vec<CrossCheckRow>,
    pub verdict: Theorem1Verdict,
}

fn verdict_of(
    fixed: &DecayFit,
    shifted: &DecayFit,
    centers: &CenterSelection,
    lower_bound: &[LowerBoundRow],
) -> Theorem1Verdict {
    let fixed_center_negligible = fixed.is_negligible();
    let shifted_slope_bounded = shifted.slope.is_some_and(|s| s <= centers.alpha + centers.epsilon + 0.5);
    let lower_bound_literal = lower_bound.iter().all(|r| r.literal_holds);
    let lower_bound_calibrated = lower_bound.iter().all(|r| r.calibrated_holds);
    Theorem1Verdict {
        fixed_center_negligible,
        shifted_slope_bounded,
        lower_bound_literal,
        lower_bound_calibrated,
        holds: fixed_center_negligible && shifted_slope_bounded && lower_bound_calibrated,
    }
}

impl Theorem1Report {
    /// Reclassifies both pairing series under another policy.
    pub fn refit(&self, policy: &FitPolicy) -> Self {
        let fixed_center_fit = decay_fit(&self.fixed_center_series, policy);
        let shifted_center_fit = decay_fit(&self.shifted_center_series, policy);
        let verdict = verdict_of(&fixed_center_fit, &shifted_center_fit, &self.centers, &self.lower_bound);
        let mut config = self.config.clone();
        config.policy = *policy;
        Self { config, fixed_center_fit, shifted_center_fit, verdict, ..self.clone() }
    }
}

fn gradient_norm(a: &Symbol, x: f64, xi: f64, h: f64, step: f64) -> f64 {
    let d = |f: &dyn Fn(f64) -> Complex64| {
        (f(-2.0 * step) - f(2.0 * step) + 8.0 * (f(step) - f(-step))) / (12.0 * step)
    };
    let dx = d(&|t| a.eval(x + t, xi, h));
    let dxi = d(&|t| a.eval(x, xi + t, h));
    (dx.norm_sqr() + dxi.norm_sqr()).sqrt()
}

/// Grid sup of `|∇a|` on the open disc of radius `r`, by fourth-order
/// central differences.
pub fn gradient_sup(a: &Symbol, r: f64, h: f64, resolution: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) || resolution < 2 {
        return Err(invalid("gradient sup needs a positive radius and two points per axis"));
    }
    let step = 2.0 * r / (resolution - 1) as f64;
    let fd = 1e-3 * r.min(1.0);
    Ok((0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = -r + i as f64 * step;
            let mut best = 0.0f64;
            for j in 0..resolution {
                let xi = -r + j as f64 * step;
                if x * x + xi * xi < r * r {
                    best = best.max(gradient_norm(a, x, xi, h, fd));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

fn gradient_control(a: &Symbol, cfg: &Theorem1Config, alpha: f64) -> Result<GradientControl> {
    let radius = cfg.radius + cfg.gradient_margin.unwrap_or(0.5 * cfg.radius);
    let sups: Vec<f64> = cfg
        .ladder
        .values()
        .iter()
        .map(|&h| gradient_sup(a, radius, h, cfg.resolution))
        .collect::<Result<_>>()?;
    let slope = line_fit(&window_points(cfg.ladder.values(), &sups, cfg.alpha_window)).map(|f| f.slope);
    let bound = alpha - 0.2;
    Ok(GradientControl { radius, sups, slope, bound, holds: slope.map(|s| s >= bound) })
}

fn series_from(ladder: &HLadder, points: Vec<(f64, f64)>, pairs: &[Result<ReducedPairing>]) -> PairingSeries {
    let results = pairs.iter().map(|p| p.as_ref().map(|r| r.value.norm()).map_err(Clone::clone)).collect();
    let floors = pairs.iter().map(|p| p.as_ref().map_or(0.0, |r| QUAD_FLOOR * r.abs_integral)).collect();
    PairingSeries::from_results(ladder.clone(), points, results, floors)
}

/// Runs the fixed-center versus shifted-center comparison for `a`.
pub fn theorem1_experiment(a: &Symbol, cfg: &Theorem1Config) -> Result<Theorem1Report> {
    cfg.validate(a)?;
    let w = cfg.window()?;
    let psi = cfg.test_bump()?;
    let ladder = &cfg.ladder;
    let hs = ladder.values();
    let alpha_estimates = estimate_alpha(a, &cfg.radii, ladder, cfg.resolution, cfg.alpha_window)?;
    let alpha = match alpha_estimates.iter().find(|e| e.radius == cfg.radius) {
        Some(e) => e.clone(),
        None => estimate_alpha(a, &[cfg.radius], ladder, cfg.resolution, cfg.alpha_window)?.remove(0),
    };
    let centers = centers_from(a, cfg.epsilon, ladder, cfg.resolution, &alpha)?;

    let fixed: Vec<Result<ReducedPairing>> =
        hs.iter().map(|&h| reduced_pairing_detail(a, (0.0, 0.0), h, &psi, &w, cfg.quad_nodes)).collect();
    let shifted: Vec<Result<ReducedPairing>> = hs
        .iter()
        .zip(&centers.centers)
        .map(|(&h, c)| reduced_pairing_detail(a, (c.x, c.xi), h, &psi, &w, cfg.quad_nodes))
        .collect();
    let fixed_center_series = series_from(ladder, vec![(0.0, 0.0); hs.len()], &fixed);
    let shifted_center_series = series_from(ladder, centers.centers.iter().map(|c| (c.x, c.xi)).collect(), &shifted);
    let fixed_center_fit = decay_fit(&fixed_center_series, &cfg.policy);
    let shifted_center_fit = decay_fit(&shifted_center_series, &cfg.policy);

    let norm = (2.0 * PI).sqrt();
    let first = hs.len() - cfg.lower_bound_points;
    let mut lower_bound = Vec::new();
    for k in first..hs.len() {
        let r = shifted[k].as_ref().map_err(Clone::clone)?;
        let integral = norm * r.value.norm();
        let literal = 0.25 * centers.literal_bound[k] * r.kernel_integral;
        let calibrated = centers.prefactor * literal;
        lower_bound.push(LowerBoundRow {
            h: hs[k],
            integral,
            kernel_integral: r.kernel_integral,
            literal_bound: literal,
            calibrated_bound: calibrated,
            literal_holds: integral >= literal,
            calibrated_holds: integral >= calibrated,
        });
    }

    let sector_diag = hs
        .iter()
        .zip(&shifted)
        .filter_map(|(&h, r)| r.as_ref().ok().map(|r| (h, r)))
        .map(|(h, r)| SectorRow {
            h,
            arg_spread: r.arg_spread,
            kernel_spread: r.kernel_spread,
            within_sector: r.arg_spread.map(|s| s <= PI / 3.0),
            check: r.sector,
        })
        .collect();

    let gradient = gradient_control(a, cfg, centers.alpha)?;

    let mut cross_check = Vec::new();
    for k in hs.len() - cfg.cross_check..hs.len() {
        let c = &centers.centers[k];
        let reduced = shifted[k].as_ref().map_err(Clone::clone)?.value;
        let grid = grid_pairing(a, (c.x, c.xi), hs[k], &psi, &w, cfg.cross_check_points)?;
        cross_check.push(CrossCheckRow {
            h: hs[k],
            reduced,
            grid,
            relative_difference: (reduced - grid).norm() / reduced.norm().max(grid.norm()).max(f64::MIN_POSITIVE),
        });
    }

    let verdict = verdict_of(&fixed_center_fit, &shifted_center_fit, &centers, &lower_bound);
    Ok(Theorem1Report {
        symbol: a.clone(),
        config: cfg.clone(),
        test_bump_radius: psi.radius,
        alpha_estimates,
        alpha,
        centers,
        fixed_center_series,
        fixed_center_fit,
        shifted_center_series,
        shifted_center_fit,
        lower_bound,
        sector_diag,
        gradient,
        cross_check,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bump_window() -> Window {
        Window::bump_hat(1.0).unwrap()
    }

    #[test]
    fn constant_symbol_collapses_to_spatial_overlap() {
        let psi = TestBump::default();
        let w = bump_window();
        let direct: f64 =
            gauss_legendre(400, -psi.radius, psi.radius).iter().map(|&(x, wt)| wt * psi.value(x) * w.value(x)).sum();
        let one = Symbol::Constant { value: 1.0, imag: 0.0 };
        for h in [0.1, 1e-3] {
            let z = reduced_pairing(&one, (0.3, -0.7), h, &psi, &w, 256).unwrap();
            assert!((z.re - direct).abs() < 1e-10 * direct, "{z} vs {direct}");
            assert!(z.im.abs() < 1e-12);
        }
        let coarse = reduced_pairing(&one, (0.0, 0.0), 0.01, &psi, &w, 128).unwrap();
        let fine = reduced_pairing(&one, (0.0, 0.0), 0.01, &psi, &w, 256).unwrap();
        assert!((coarse - fine).norm() < 1e-10);
    }

    #[test]
    fn kernel_stays_in_sector() {
        let psi = TestBump::default();
        let r = reduced_pairing_detail(&Symbol::example1(), (0.45, 0.0), 1e-3, &psi, &bump_window(), 256).unwrap();
        assert!(r.kernel_spread <= PI / 6.0 + 1e-9);
        assert!(r.arg_spread.unwrap() <= PI / 3.0);
        assert_eq!(r.sector.unwrap().holds, Some(true));
    }

    #[test]
    fn rejects_bad_inputs() {
        let psi = TestBump::default();
        let one = Symbol::Constant { value: 1.0, imag: 0.0 };
        assert_eq!(
            reduced_pairing(&one, (0.0, 0.0), 0.1, &psi, &Window::gaussian(), 256),
            Err(Error::NonCompactWindow)
        );
        assert!(matches!(
            reduced_pairing(&one, (0.0, 0.0), 0.1, &psi, &bump_window(), QUAD_BUDGET + 1),
            Err(Error::Budget { .. })
        ));
        assert!(reduced_pairing(&one, (0.0, 0.0), 0.1, &psi, &bump_window(), 64).is_err());
        let ladder = HLadder::default();
        assert!(select_centers(&Symbol::example1(), 0.5, 0.3, &ladder, 129, 4).is_err());
        let sb = Symbol::ScaledBump { delta: 0.3, power: 0.0, radius: 1.0 };
        assert!(select_centers(&sb, 0.5, 0.15, &ladder, 129, 4).is_err());
        let zero = Symbol::Constant { value: 0.0, imag: 0.0 };
        assert_eq!(select_centers(&zero, 0.5, 0.1, &ladder, 129, 4), Err(Error::ZeroSup(0.5)));
    }

    #[test]
    fn exponent_of_scaled_and_fixed_bumps() {
        let ladder = HLadder::default();
        let radii = [0.5, 0.25, 0.125, 0.0625];
        let scaled = Symbol::Bump { power: 2.0, x0: 0.0, xi0: 0.0, radius: 1.0 };
        for e in estimate_alpha(&scaled, &radii, &ladder, 129, 4).unwrap() {
            assert!((e.alpha.unwrap() - 2.0).abs() < 0.01);
        }
        let fixed = Symbol::Bump { power: 0.0, x0: 0.0, xi0: 0.0, radius: 1.0 };
        for e in estimate_alpha(&fixed, &radii, &ladder, 129, 0).unwrap() {
            assert!(e.alpha.unwrap().abs() < 0.01);
        }
    }

    #[test]
    fn example2_exponent_staircase() {
        let est = estimate_alpha(&Symbol::example2(), &[0.5, 0.25, 0.125, 0.0625], &HLadder::default(), 257, 4).unwrap();
        let alphas: Vec<f64> = est.iter().map(|e| e.alpha.unwrap()).collect();
        assert!(alphas.windows(2).all(|w| w[1] > w[0] + 0.5), "{alphas:?}");
    }

    #[test]
    fn centers_track_fixed_bump() {
        let a = Symbol::Bump { power: 0.0, x0: 0.3, xi0: 0.0, radius: 0.1 };
        let sel = select_centers(&a, 0.5, 0.1, &HLadder::default(), 129, 4).unwrap();
        let step = 1.0 / 128.0;
        for c in &sel.centers {
            assert!((c.x - 0.3).abs() <= step && c.xi.abs() <= step);
        }
    }

    #[test]
    fn example1_centers_sit_right_of_the_gap() {
        let sel = select_centers(&Symbol::example1(), 0.5, 0.1, &HLadder::default(), 257, 4).unwrap();
        for (c, h) in sel.centers.iter().zip(HLadder::default().values()) {
            assert!(c.x * c.x + c.xi * c.xi <= 0.25);
            if c.value > 0.0 {
                assert!(c.x >= h.powf(0.25));
            }
        }
        assert!(sel.calibrated_share() >= 0.8);
    }

    #[test]
    fn example2_meets_literal_center_bound() {
        let sel = select_centers(&Symbol::example2(), 0.5, 0.1, &HLadder::default(), 257, 4).unwrap();
        let all = sel.literal_holds.iter().filter(|&&b| b).count() as f64 / sel.literal_holds.len() as f64;
        assert!(all >= 0.8);
    }

    #[test]
    fn quadrature_matches_grid_for_radial_bump() {
        let a = Symbol::RadialBump { power: 0.0, x0: 0.2, xi0: -0.1, radius: 0.3 };
        let psi = TestBump::default();
        let w = bump_window();
        let h = 2f64.powi(-8);
        let q = reduced_pairing(&a, (0.25, 0.0), h, &psi, &w, 256).unwrap();
        let g = grid_pairing(&a, (0.25, 0.0), h, &psi, &w, 256.0).unwrap();
        assert!((q - g).norm() < 1e-6 * q.norm(), "{q} vs {g}");
    }

    #[test]
    fn gradient_of_linear_profile() {
        let a = Symbol::Momentum {};
        let g = gradient_sup(&a, 0.5, 0.1, 33).unwrap();
        assert!((g - 1.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn exponent_nonincreasing_in_radius(p in 0.0f64..3.0, x0 in -0.05f64..0.05, rad in 0.1f64..0.6) {
            let a = Symbol::Bump { power: p, x0, xi0: 0.0, radius: rad };
            let ladder = HLadder::dyadic(4, 9).unwrap();
            let est = estimate_alpha(&a, &[0.5, 0.25, 0.125], &ladder, 65, 4).unwrap();
            for w in est.windows(2) {
                prop_assert!(w[1].alpha_or_inf() >= w[0].alpha_or_inf() - 0.01);
            }
        }

        #[test]
        fn reduced_pairing_scales_with_power(p in 0.0f64..3.0, k in 3i32..10) {
            let h = 2f64.powi(-k);
            let psi = TestBump::default();
            let w = bump_window();
            let base = Symbol::Bump { power: 0.0, x0: 0.1, xi0: 0.0, radius: 0.5 };
            let scaled = Symbol::Bump { power: p, x0: 0.1, xi0: 0.0, radius: 0.5 };
            let z0 = reduced_pairing(&base, (0.05, 0.0), h, &psi, &w, 96).unwrap();
            let z1 = reduced_pairing(&scaled, (0.05, 0.0), h, &psi, &w, 96).unwrap();
            prop_assert!((z1 - z0 * h.powf(p)).norm() <= 1e-12 * z0.norm() * h.powf(p));
        }
    }
}
