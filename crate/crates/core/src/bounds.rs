//! Exponent bootstrap and sup-norm interpolation estimates for symbols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{line_fit, unit_bump};
use crate::symbols::Symbol;
use crate::wavefront::HLadder;

/// `ε_0 = 1`, `1 - ε_{n+1} = ½ + ½(1 - ε_n)²`, for `n = 0..=n_max`.
pub fn epsilon_recurrence(n_max: usize) -> Result<Vec<f64>> {
    if n_max < 1 {
        return Err(invalid("the recurrence needs n_max >= 1"));
    }
    let mut eps = Vec::with_capacity(n_max + 1);
    eps.push(1.0);
    for n in 0..n_max {
        let q = 1.0 - eps[n];
        eps.push(0.5 - 0.5 * q * q);
    }
    Ok(eps)
}

/// Sup norms of a sampled function and its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientRatio {
    pub sup_f: f64,
    pub sup_df: f64,
    pub sup_d2f: f64,
    /// `‖f'‖ / (‖f‖^{1/2} ‖f''‖^{1/2})`; `None` when `f''` vanishes.
    pub ratio: Option<f64>,
    /// Largest relative change of the derivative sups when the spacing is
    /// doubled.
    pub richardson_gap: f64,
}

fn derivative_sups(f: &[f64], dx: f64, stride: usize) -> (f64, f64) {
    let h = dx * stride as f64;
    let s = stride;
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for k in 2 * s..f.len() - 2 * s {
        let (m2, m1, c, p1, p2) = (f[k - 2 * s], f[k - s], f[k], f[k + s], f[k + 2 * s]);
        d1 = d1.max(((m2 - p2) + 8.0 * (p1 - m1)).abs() / (12.0 * h));
        d2 = d2.max((-(m2 + p2) + 16.0 * (m1 + p1) - 30.0 * c).abs() / (12.0 * h * h));
    }
    (d1, d2)
}

/// Landau–Kolmogorov ratio of samples `f` with spacing `dx`, using
/// fourth-order central differences at interior points.
pub fn gradient_estimate_ratio(f: &[f64], dx: f64) -> Result<GradientRatio> {
    if f.len() < 9 {
        return Err(invalid("need at least nine samples"));
    }
    if !(dx > 0.0 && dx.is_finite()) || f.iter().any(|v| !v.is_finite()) {
        return Err(invalid("samples and spacing must be finite, spacing positive"));
    }
    let sup_f = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (sup_df, sup_d2f) = derivative_sups(f, dx, 1);
    let (c1, c2) = derivative_sups(f, dx, 2);
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let noise = 64.0 * f64::EPSILON * sup_f / (dx * dx);
    let ratio = (sup_d2f > noise && sup_f > 0.0).then(|| sup_df / (sup_f * sup_d2f).sqrt());
    Ok(GradientRatio { sup_f, sup_df, sup_d2f, ratio, richardson_gap: rel(sup_df, c1).max(rel(sup_d2f, c2)) })
}

type CatalogFn = fn(f64) -> f64;

/// Twenty smooth bounded test functions.
pub fn landau_catalog() -> Vec<(&'static str, CatalogFn)> {
    vec![
        ("sin", f64::sin),
        ("cos_2x", |x| (2.0 * x).cos()),
        ("gaussian", |x| (-x * x).exp()),
        ("wide_gaussian", |x| (-x * x / 8.0).exp()),
        ("x_gaussian", |x| x * (-x * x).exp()),
        ("sech", |x| 1.0 / x.cosh()),
        ("sech_squared", |x| 1.0 / x.cosh().powi(2)),
        ("tanh", f64::tanh),
        ("lorentzian", |x| 1.0 / (1.0 + x * x)),
        ("arctan", f64::atan),
        ("bump", |x| unit_bump(x / 3.0)),
        ("two_tone", |x| x.sin() + 0.5 * (3.0 * x).sin()),
        ("beat", |x| x.sin() * (1.1 * x).sin()),
        ("damped_sine", |x| x.sin() * (-x * x / 16.0).exp()),
        ("cos_lorentzian", |x| x.cos() / (1.0 + x * x)),
        ("sinc", |x| if x == 0.0 { 1.0 } else { x.sin() / x }),
        ("logistic", |x| 1.0 / (1.0 + (-x).exp())),
        ("shifted_gaussians", |x| (-(x - 1.0).powi(2)).exp() - 0.5 * (-(x + 1.5).powi(2)).exp()),
        ("hermite_2", |x| (4.0 * x * x - 2.0) * (-x * x / 2.0).exp()),
        ("quartic_decay", |x| 1.0 / (1.0 + x.powi(4))),
    ]
}

/// Largest catalog ratio, attained by `tanh`.
pub const C_EMP: f64 = 1.139_754;

/// Ratios over the catalog on `[-12, 12]` at spacing `dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRatios {
    pub dx: f64,
    pub ratios: Vec<(String, f64)>,
    /// Empirical constant: the largest ratio.
    pub max: f64,
}

pub fn catalog_ratios(dx: f64) -> Result<CatalogRatios> {
    if !(dx > 0.0 && dx < 1.0) {
        return Err(invalid("catalog spacing must lie in (0, 1)"));
    }
    let n = (24.0 / dx).round() as usize + 1;
    let ratios: Vec<(String, f64)> = landau_catalog()
        .par_iter()
        .map(|&(name, f)| {
            let samples: Vec<f64> = (0..n).map(|k| f(-12.0 + k as f64 * dx)).collect();
            let r = gradient_estimate_ratio(&samples, dx)?;
            Ok((name.to_string(), r.ratio.unwrap_or(0.0)))
        })
        .collect::<Result<_>>()?;
    let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CatalogRatios { dx, ratios, max })
}

/// Phase-space box and sampling for [`prop2_scaling_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// Half-widths of the box about the origin, in `x` and `ξ`.
    pub half_width: [f64; 2],
    /// Grid points per `h^δ`.
    pub points_per_scale: f64,
    pub epsilon: f64,
    /// Allowed shortfall of the slope below `α(1-ε)`.
    pub slack: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { half_width: [1.0, 1.0], points_per_scale: 16.0, epsilon: 0.1, slack: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub alpha: f64,
    pub delta: f64,
    /// `sup |h^δ ∇a|` on the box, per ladder value.
    pub sups: Vec<f64>,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    /// `α(1-ε) - slack`.
    pub threshold: f64,
    pub holds: bool,
}

fn scaled_gradient_sup(a: &Symbol, h: f64, delta: f64, cfg: &ScalingConfig) -> f64 {
    let scale = h.powf(delta);
    let step = scale / cfg.points_per_scale;
    let fd = scale / 64.0;
    let nx = (cfg.half_width[0] / step).floor() as i64;
    let nxi = (cfg.half_width[1] / step).floor() as i64;
    let d = |g: &dyn Fn(f64) -> f64| (g(-2.0 * fd) - g(2.0 * fd) + 8.0 * (g(fd) - g(-fd))) / (12.0 * fd);
    (-nx..=nx)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * step;
            let mut best = 0.0f64;
            for j in -nxi..=nxi {
                let xi = j as f64 * step;
                let gx = d(&|t| a.eval(x + t, xi, h).re);
                let gxi = d(&|t| a.eval(x, xi + t, h).re);
                best = best.max(gx.hypot(gxi));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
        * scale
}

/// Slope of `log sup |h^δ ∇a|` against `log h` for a real symbol of known
/// order `alpha`, compared with `α(1-ε)`.
pub fn prop2_scaling_check(a: &Symbol, alpha: f64, ladder: &HLadder, cfg: &ScalingConfig) -> Result<ScalingReport> {
    a.validate()?;
    if !(cfg.points_per_scale >= 2.0) || cfg.half_width.iter().any(|&w| !(w > 0.0)) {
        return Err(invalid("scaling check needs a positive box and at least two points per scale"));
    }
    let delta = a.delta();
    let sups: Vec<f64> = ladder.values().iter().map(|&h| scaled_gradient_sup(a, h, delta, cfg)).collect();
    let pts: Vec<(f64, f64)> = ladder
        .values()
        .iter()
        .zip(&sups)
        .filter(|(_, &s)| s > 0.0)
        .map(|(&h, &s)| (h.ln(), s.ln()))
        .collect();
    let fit = line_fit(&pts);
    let threshold = alpha * (1.0 - cfg.epsilon) - cfg.slack;
    Ok(ScalingReport {
        alpha,
        delta,
        sups,
        slope: fit.map(|f| f.slope),
        residual: fit.map(|f| f.residual),
        threshold,
        holds: fit.is_some_and(|f| f.slope >= threshold),
    })
}
