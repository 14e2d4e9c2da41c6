//! Wavefront sets of WKB states `b(x) e^{iΦ(x)/h}`.
//!
//! The set is bracketed by
//! `{(x, Φ'(x)) : b(x) ≠ 0, Im Φ(x) = 0}‾ ⊆ WF_h ⊆ {(x, Φ'(x)) : x ∈ supp b, Im Φ(x) = 0}`
//! and both brackets are rasterized onto the cells of a scan.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridPlan;
use crate::states::{wkb_state, Profile, Window, WkbCase, WkbData};
use crate::wavefront::{
    decay_fit, pairing, wf_scan, Classification, DecayFit, FitPolicy, HLadder, PairingSeries, PhaseRect, WfScanResult,
};

/// Cells `[i, j]` of a phase rectangle, sorted.
pub type CellSet = BTreeSet<[usize; 2]>;

/// Inner and outer brackets of the wavefront set on a scan grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedWavefront {
    pub inner: CellSet,
    pub outer: CellSet,
}

const ZERO_TOL: f64 = 1e-12;
const GRADIENT_TOL: f64 = 1e-6;
const AMPLITUDE_TOL: f64 = 1e-12;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Points of a refined grid over the amplitude support where `Im Φ`
/// vanishes, with isolated zeros located by golden-section search.
fn real_phase_points(d: &WkbData, xs: &[f64]) -> Vec<f64> {
    let im: Vec<f64> = xs.iter().map(|&x| d.phase(x).im).collect();
    let tol = ZERO_TOL * im.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut zeros = Vec::new();
    for k in 0..xs.len() {
        if im[k] <= tol {
            zeros.push(xs[k]);
            continue;
        }
        let left = k == 0 || im[k] <= im[k - 1];
        let right = k + 1 == xs.len() || im[k] <= im[k + 1];
        if left && right && k > 0 && k + 1 < xs.len() {
            let x = golden_min(|x| d.phase(x).im, xs[k - 1], xs[k + 1]);
            if d.phase(x).im <= tol {
                zeros.push(x);
            }
        }
    }
    zeros
}

/// Rasterizes both brackets onto `rect`, using `refine` samples per cell
/// width along `x`.
pub fn predicted_wavefront(d: &WkbData, rect: &PhaseRect, refine: usize) -> Result<PredictedWavefront> {
    rect.validate()?;
    let (cell, _) = rect.cell_size();
    let (lo, hi) = d.support();
    let lo = lo.max(rect.x[0] - cell);
    let hi = hi.min(rect.x[1] + cell);
    let mut out = PredictedWavefront { inner: CellSet::new(), outer: CellSet::new() };
    if lo >= hi {
        return Ok(out);
    }
    let step = cell.max(f64::MIN_POSITIVE) / refine.max(1) as f64;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|k| (lo + k as f64 * step).min(hi)).collect();
    let b: Vec<f64> = xs.iter().map(|&x| d.amplitude(x).norm()).collect();
    let bmax = b.iter().fold(0.0f64, |m, &v| m.max(v));
    let support: Vec<f64> = xs.iter().zip(&b).filter(|(_, &v)| v != 0.0).map(|(&x, _)| x).collect();
    let in_support = |x: f64| {
        let k = support.partition_point(|&s| s < x);
        let near = |i: usize| support.get(i).is_some_and(|&s| (s - x).abs() <= 0.5 * cell);
        near(k) || (k > 0 && near(k - 1))
    };
    for x in real_phase_points(d, &xs) {
        let g = d.phase_gradient(x);
        if g.im.abs() > GRADIENT_TOL * (1.0 + g.norm()) {
            return Err(Error::ComplexGradient { x, imag: g.im });
        }
        let Some((i, j)) = rect.locate(x, g.re) else { continue };
        if in_support(x) {
            out.outer.insert([i, j]);
        }
        if bmax > 0.0 && d.amplitude(x).norm() > AMPLITUDE_TOL * bmax {
            out.inner.insert([i, j]);
        }
    }
    Ok(out)
}

/// `cells` grown by one cell in every direction, clipped to the grid.
pub fn dilate(cells: &CellSet, rect: &PhaseRect) -> CellSet {
    let mut out = CellSet::new();
    for &[i, j] in cells {
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a >= 0 && b >= 0 && (a as usize) < rect.nx && (b as usize) < rect.nxi {
                    out.insert([a as usize, b as usize]);
                }
            }
        }
    }
    out
}

/// `a ⊆ dilate(b)`.
pub fn within_one_cell(a: &CellSet, b: &CellSet, rect: &PhaseRect) -> bool {
    let grown = dilate(b, rect);
    a.iter().all(|c| grown.contains(c))
}

fn default_probes() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

/// Experiment settings; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WkbConfig {
    pub rect: PhaseRect,
    pub ladder: HLadder,
    pub policy: FitPolicy,
    /// Width `ρ` of the Gaussian probe.
    pub probe_scale: f64,
    /// Phase-space points whose pairing series are reported.
    pub probes: Vec<[f64; 2]>,
    /// Samples per cell when rasterizing the predicted sets.
    pub refine: usize,
}

impl Default for WkbConfig {
    fn default() -> Self {
        Self {
            rect: PhaseRect { x: [-1.5, 1.5], xi: [-1.5, 1.5], nx: 31, nxi: 31 },
            ladder: HLadder::default(),
            policy: FitPolicy::default(),
            probe_scale: 1.0,
            probes: default_probes(),
            refine: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub x: f64,
    pub xi: f64,
    pub series: PairingSeries,
    pub fit: DecayFit,
    pub classification: Classification,
    /// The pairing is not negligible, so the point is in the detected set.
    pub detected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WkbVerdicts {
    /// Inner bracket within one cell of the detected set.
    pub inner_in_detected: bool,
    /// Detected set within one cell of the outer bracket.
    pub detected_in_outer: bool,
    pub inner_in_outer: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbReport {
    pub case: Option<WkbCase>,
    pub config: WkbConfig,
    pub inner_cells: CellSet,
    pub outer_cells: CellSet,
    pub detected_cells: CellSet,
    pub probes: Vec<ProbeResult>,
    pub verdicts: WkbVerdicts,
    pub scan: WfScanResult,
}

fn plan_for(d: &WkbData, cfg: &WkbConfig, probe: &Window) -> GridPlan {
    let (lo, hi) = d.support();
    let reach = probe.radius() * cfg.ladder.values()[0].sqrt();
    let extent = lo.abs().max(hi.abs()).max(cfg.rect.x[0].abs()).max(cfg.rect.x[1].abs()) + reach;
    let grad = d.max_real_gradient();
    let mut xi = grad.max(cfg.rect.xi[0].abs()).max(cfg.rect.xi[1].abs());
    for p in &cfg.probes {
        xi = xi.max(p[1].abs());
    }
    GridPlan::new(extent, xi)
}

/// Scans the sampled WKB family and compares the detected set with the
/// predicted brackets.
pub fn wkb_experiment(d: &WkbData, cfg: &WkbConfig) -> Result<WkbReport> {
    let predicted = predicted_wavefront(d, &cfg.rect, cfg.refine)?;
    let probe = Window::gaussian_scaled(cfg.probe_scale)?;
    let plan = plan_for(d, cfg, &probe);
    let family = |h: f64| wkb_state(d, h, plan.grid(h)?);
    let scan = wf_scan(&family, &probe, &cfg.rect, &cfg.ladder, &cfg.policy)?;
    let detected_cells: CellSet = scan.detected().into_iter().map(|(i, j)| [i, j]).collect();
    let probes = cfg
        .probes
        .iter()
        .map(|&[x, xi]| {
            let series = pairing(&family, &probe, &|_| (x, xi), &cfg.ladder);
            let fit = decay_fit(&series, &cfg.policy);
            ProbeResult { x, xi, classification: fit.classification, detected: !fit.is_negligible(), series, fit }
        })
        .collect();
    let inner_in_detected = within_one_cell(&predicted.inner, &detected_cells, &cfg.rect);
    let detected_in_outer = within_one_cell(&detected_cells, &predicted.outer, &cfg.rect);
    let inner_in_outer = predicted.inner.is_subset(&predicted.outer);
    Ok(WkbReport {
        case: None,
        config: cfg.clone(),
        inner_cells: predicted.inner,
        outer_cells: predicted.outer,
        detected_cells,
        probes,
        verdicts: WkbVerdicts {
            inner_in_detected,
            detected_in_outer,
            inner_in_outer,
            holds: inner_in_detected && detected_in_outer && inner_in_outer,
        },
        scan,
    })
}

/// [`wkb_experiment`] for a catalog case; the case is recorded in the report.
pub fn wkb_case_experiment(case: WkbCase, cfg: &WkbConfig) -> Result<WkbReport> {
    let mut r = wkb_experiment(&WkbData::from_case(case), cfg)?;
    r.case = Some(case);
    Ok(r)
}

/// Cells of `rect` nearest to the graph `{(x, f(x))}` for `x ∈ [lo, hi]`.
pub fn rasterize_graph(rect: &PhaseRect, lo: f64, hi: f64, f: impl Fn(f64) -> f64, samples: usize) -> CellSet {
    (0..=samples)
        .filter_map(|k| {
            let x = lo + (hi - lo) * k as f64 / samples as f64;
            rect.locate(x, f(x)).map(|(i, j)| [i, j])
        })
        .collect()
}
