//! Detection of semiclassical wavefront sets through coherent-state pairings.
//!
//! A family `u(h)` is paired with `ψ_{x,ξ,h}` along a ladder of `h` values and
//! the magnitudes are fitted by a power law in `h`. Steep decay stands in for
//! `O(h^∞)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, WaveFunction};
use crate::numeric::{line_fit, CompensatedSum};
use crate::states::{phase_resolution_limit, Profile};

/// Magnitudes below this are treated as numerical zero in grid pairings.
pub const UNDERFLOW: f64 = 1e-13;

/// Strictly decreasing values of `h` in `(0, 1)`, at least four of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HLadder {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for HLadder {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(invalid("an h-ladder needs at least four values"));
        }
        if values.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return Err(invalid("h-ladder values must lie in (0, 1)"));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("h-ladder must be strictly decreasing"));
        }
        Ok(Self { values })
    }
}

impl From<HLadder> for Vec<f64> {
    fn from(l: HLadder) -> Self {
        l.values
    }
}

impl Default for HLadder {
    fn default() -> Self {
        Self::dyadic(4, 14).expect("default ladder is valid")
    }
}

impl HLadder {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::try_from(values)
    }

    /// `h = 2^{-k}` for `k = first..=last`.
    pub fn dyadic(first: u32, last: u32) -> Result<Self> {
        Self::new((first..=last).map(|k| 2f64.powi(-(k as i32))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The last `n` values (the smallest `h`).
    pub fn tail(&self, n: usize) -> &[f64] {
        &self.values[self.values.len().saturating_sub(n)..]
    }
}

/// Pairing magnitudes along a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingSeries {
    pub ladder: HLadder,
    /// Phase-space point used at each `h`.
    pub points: Vec<(f64, f64)>,
    pub magnitudes: Vec<f64>,
    /// Magnitudes below these, and exact zeros, are flagged as underflow.
    pub floors: Vec<f64>,
    pub underflow: Vec<bool>,
    /// Per-`h` failures; such entries carry magnitude 0 and are not fitted.
    pub errors: Vec<Option<String>>,
}

impl PairingSeries {
    /// Builds a series from per-`h` results with a per-`h` floor.
    pub fn from_results(
        ladder: HLadder,
        points: Vec<(f64, f64)>,
        results: Vec<Result<f64>>,
        floors: Vec<f64>,
    ) -> Self {
        let mut magnitudes = Vec::with_capacity(results.len());
        let mut errors = Vec::with_capacity(results.len());
        for r in results {
            match r {
                Ok(m) if m.is_finite() => {
                    magnitudes.push(m.abs());
                    errors.push(None);
                }
                Ok(m) => {
                    magnitudes.push(0.0);
                    errors.push(Some(format!("non-finite magnitude {m}")));
                }
                Err(e) => {
                    magnitudes.push(0.0);
                    errors.push(Some(e.to_string()));
                }
            }
        }
        let underflow = magnitudes
            .iter()
            .zip(&floors)
            .zip(&errors)
            .map(|((m, f), e)| e.is_none() && (*m < *f || *m == 0.0))
            .collect();
        Self { ladder, points, magnitudes, floors, underflow, errors }
    }

    /// Series with the fixed absolute floor [`UNDERFLOW`].
    pub fn with_absolute_floor(ladder: HLadder, points: Vec<(f64, f64)>, results: Vec<Result<f64>>) -> Self {
        let floors = vec![UNDERFLOW; results.len()];
        Self::from_results(ladder, points, results, floors)
    }
}

/// Thresholds of the power-law classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitPolicy {
    /// Tail slopes at or above this count as rapid decay.
    pub k_detect: f64,
    /// Largest RMS log-residual for a power-law classification.
    pub r_max: f64,
    /// Number of smallest-`h` fitted points used for the tail slope.
    pub tail_points: usize,
    /// Largest slope counted as bounded below.
    pub bounded_slope: f64,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self { k_detect: 5.0, r_max: 0.5, tail_points: 4, bounded_slope: 0.25 }
    }
}

impl FitPolicy {
    pub fn with_k(self, k_detect: f64) -> Self {
        Self { k_detect, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    RapidDecay,
    Polynomial,
    BoundedBelow,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::RapidDecay => "rapid_decay",
            Classification::Polynomial => "polynomial",
            Classification::BoundedBelow => "bounded_below",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

/// Power-law fit `|pairing| ≈ e^{intercept} h^{slope}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Least-squares slope over all fitted points.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    /// Slope over the smallest-`h` fitted points, closed by the first
    /// underflowed entry when the series ends below its floor.
    pub tail_slope: Option<f64>,
    pub fitted: usize,
    pub underflowed: usize,
    pub failed: usize,
    /// Everything after the first usable entry underflowed.
    pub underflow_dominated: bool,
    pub classification: Classification,
}

impl DecayFit {
    /// Rapid decay, or a series that drops to the floor and stays there.
    pub fn is_negligible(&self) -> bool {
        self.classification == Classification::RapidDecay || self.underflow_dominated
    }
}

/// Fits and classifies a series.
pub fn decay_fit(s: &PairingSeries, policy: &FitPolicy) -> DecayFit {
    let ok: Vec<usize> = (0..s.magnitudes.len()).filter(|&i| s.errors[i].is_none()).collect();
    let pts: Vec<(f64, f64)> = ok
        .iter()
        .filter(|&&i| !s.underflow[i])
        .map(|&i| (s.ladder.values()[i].ln(), s.magnitudes[i].ln()))
        .collect();
    let flags: Vec<bool> = ok.iter().map(|&i| s.underflow[i]).collect();
    let underflowed = flags.iter().filter(|&&u| u).count();
    let first_under = flags.iter().position(|&u| u);
    let suffix = first_under.is_some_and(|p| flags[p..].iter().all(|&u| u));
    let full = line_fit(&pts);
    // Past the last fitted point the series sits below its floor, so the
    // first underflowed entry enters the tail at the floor as an upper bound.
    let mut tail_pts = pts[pts.len().saturating_sub(policy.tail_points)..].to_vec();
    if let (true, Some(p), false) = (suffix, first_under, pts.is_empty()) {
        let i = ok[p];
        tail_pts.push((s.ladder.values()[i].ln(), s.floors[i].ln()));
        if tail_pts.len() > policy.tail_points {
            tail_pts.remove(0);
        }
    }
    let tail = line_fit(&tail_pts);
    let tail_slope = tail.map(|f| f.slope);
    let steep = tail_slope.is_some_and(|t| t >= policy.k_detect);
    let few_under = 2 * underflowed <= ok.len();
    let classification = if steep && ((pts.len() >= 4 && few_under) || (pts.len() >= 2 && suffix)) {
        Classification::RapidDecay
    } else if let (Some(f), true) = (full, pts.len() >= 4 && underflowed == 0) {
        if f.residual <= policy.r_max && f.slope <= policy.bounded_slope {
            Classification::BoundedBelow
        } else if f.residual <= policy.r_max {
            Classification::Polynomial
        } else {
            Classification::Inconclusive
        }
    } else {
        Classification::Inconclusive
    };
    DecayFit {
        slope: full.map(|f| f.slope),
        intercept: full.map(|f| f.intercept),
        residual: full.map(|f| f.residual),
        tail_slope,
        fitted: pts.len(),
        underflowed,
        failed: s.magnitudes.len() - ok.len(),
        underflow_dominated: suffix && first_under.is_some_and(|p| p <= 1) && pts.len() <= 1,
        classification,
    }
}

fn check_probe_resolution(u: &WaveFunction, xi0: f64) -> Result<()> {
    let limit = phase_resolution_limit(u.h(), xi0);
    let dx = u.grid().spacing();
    if dx > limit * (1.0 + 1e-12) {
        Err(Error::UnresolvedPhase { spacing: dx, xi: xi0, limit })
    } else {
        Ok(())
    }
}

/// `⟨u, ψ_{x0,ξ0,h}⟩` summed only where the probe is non-negligible.
/// Agrees with `l2_inner(u, coherent_state(probe, x0, xi0, h, grid))`.
pub fn localized_pairing<P: Profile + ?Sized>(u: &WaveFunction, probe: &P, x0: f64, xi0: f64) -> Result<Complex64> {
    if u.domain() != Domain::Position {
        return Err(Error::Mismatch);
    }
    check_probe_resolution(u, xi0)?;
    let grid = u.grid();
    let h = u.h();
    let sh = h.sqrt();
    let reach = probe.radius() * sh;
    let mut acc = CompensatedSum::default();
    for k in grid.indices_within(x0 - reach, x0 + reach) {
        let d = grid.point(k) - x0;
        let p = probe.value(d / sh);
        if p != 0.0 {
            acc.add(u.samples()[k] * Complex64::from_polar(p, -d * xi0 / h));
        }
    }
    let global = Complex64::from_polar(h.powf(-0.25) * grid.spacing(), -x0 * xi0 / h);
    Ok(acc.value() * global)
}

/// A state at each ladder value; failures are recorded per `h`.
pub type Family<'a> = dyn Fn(f64) -> Result<WaveFunction> + Sync + 'a;

/// Pairing magnitudes `|⟨u(h), ψ_{rule(h), h}⟩|` along the ladder.
pub fn pairing<P: Profile + ?Sized>(
    u_family: &Family<'_>,
    probe: &P,
    point_rule: &(dyn Fn(f64) -> (f64, f64) + Sync),
    ladder: &HLadder,
) -> PairingSeries {
    let points: Vec<(f64, f64)> = ladder.values().iter().map(|&h| point_rule(h)).collect();
    let results: Vec<Result<f64>> = ladder
        .values()
        .par_iter()
        .zip(points.par_iter())
        .map(|(&h, &(x, xi))| {
            let u = u_family(h)?;
            localized_pairing(&u, probe, x, xi).map(|z| z.norm())
        })
        .collect();
    PairingSeries::with_absolute_floor(ladder.clone(), points, results)
}

/// Rectangle of phase space sampled on an inclusive grid of cell centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRect {
    pub x: [f64; 2],
    pub xi: [f64; 2],
    pub nx: usize,
    pub nxi: usize,
}

fn axis(range: [f64; 2], n: usize, i: usize) -> f64 {
    if n == 1 {
        0.5 * (range[0] + range[1])
    } else {
        range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
    }
}

impl PhaseRect {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ok(self.x) && ok(self.xi)) || self.nx == 0 || self.nxi == 0 {
            return Err(invalid("phase rectangle needs ordered finite ranges and positive counts"));
        }
        Ok(())
    }

    pub fn x_center(&self, i: usize) -> f64 {
        axis(self.x, self.nx, i)
    }

    pub fn xi_center(&self, j: usize) -> f64 {
        axis(self.xi, self.nxi, j)
    }

    /// Cell widths along each axis.
    pub fn cell_size(&self) -> (f64, f64) {
        let w = |r: [f64; 2], n: usize| if n == 1 { r[1] - r[0] } else { (r[1] - r[0]) / (n - 1) as f64 };
        (w(self.x, self.nx), w(self.xi, self.nxi))
    }

    /// Index of the cell whose center is nearest to `(x, ξ)`, if inside.
    pub fn locate(&self, x: f64, xi: f64) -> Option<(usize, usize)> {
        let (dx, dxi) = self.cell_size();
        let idx = |v: f64, lo: f64, d: f64, n: usize| -> Option<usize> {
            let t = if d > 0.0 { ((v - lo) / d).round() } else { 0.0 };
            if t < -0.0 || t > (n - 1) as f64 || (d > 0.0 && ((v - lo) / d - t).abs() > 0.5 + 1e-12) {
                None
            } else {
                Some(t as usize)
            }
        };
        let i = idx(x, self.x[0], dx, self.nx)?;
        let j = idx(xi, self.xi[0], dxi, self.nxi)?;
        if (x - self.x_center(i)).abs() > 0.5 * dx + 1e-12 || (xi - self.xi_center(j)).abs() > 0.5 * dxi + 1e-12 {
            return None;
        }
        Some((i, j))
    }
}

/// One scanned cell: its pairing magnitudes and their fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub xi: f64,
    pub magnitudes: Vec<f64>,
    pub errors: Vec<Option<String>>,
    pub fit: DecayFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfScanResult {
    pub rect: PhaseRect,
    pub ladder: HLadder,
    pub policy: FitPolicy,
    /// Row-major in `x`, then `ξ`.
    pub cells: Vec<ScanCell>,
}

impl WfScanResult {
    /// Indices `(i, j)` of cells whose pairings are not negligible.
    pub fn detected(&self) -> Vec<(usize, usize)> {
        self.cells.iter().filter(|c| !c.fit.is_negligible()).map(|c| (c.i, c.j)).collect()
    }

    pub fn cell(&self, i: usize, j: usize) -> &ScanCell {
        &self.cells[i * self.rect.nxi + j]
    }

    /// Reclassifies every cell under another policy without recomputing.
    pub fn refit(&self, policy: &FitPolicy) -> Self {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let s = self.series_of(c);
                ScanCell { fit: decay_fit(&s, policy), ..c.clone() }
            })
            .collect();
        Self { policy: *policy, cells, ..self.clone() }
    }

    pub fn series_of(&self, c: &ScanCell) -> PairingSeries {
        let results = c
            .magnitudes
            .iter()
            .zip(&c.errors)
            .map(|(m, e)| match e {
                None => Ok(*m),
                Some(msg) => Err(Error::Invalid(msg.clone())),
            })
            .collect();
        PairingSeries::with_absolute_floor(self.ladder.clone(), vec![(c.x, c.xi); c.magnitudes.len()], results)
    }

    /// CSV with columns `x, xi, slope, residual, class`; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
        let mut out = String::from("x,xi,slope,residual,class\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                num(Some(c.x)),
                num(Some(c.xi)),
                num(c.fit.slope),
                num(c.fit.residual),
                c.fit.classification.as_str()
            ));
        }
        out
    }
}

/// Pairing magnitudes of one state against every cell center of `rect`.
fn scan_one_h<P: Profile + ?Sized>(u: &WaveFunction, probe: &P, rect: &PhaseRect) -> Result<Vec<f64>> {
    let worst = rect.xi[0].abs().max(rect.xi[1].abs());
    check_probe_resolution(u, worst)?;
    let grid = u.grid();
    let h = u.h();
    let sh = h.sqrt();
    let reach = probe.radius() * sh;
    let scale = h.powf(-0.25) * grid.spacing();
    let xi0 = rect.xi_center(0);
    let dxi = if rect.nxi > 1 { rect.xi_center(1) - xi0 } else { 0.0 };
    let columns: Vec<Vec<f64>> = (0..rect.nx)
        .into_par_iter()
        .map(|i| {
            let x0 = rect.x_center(i);
            let mut acc = vec![CompensatedSum::default(); rect.nxi];
            for k in grid.indices_within(x0 - reach, x0 + reach) {
                let uk = u.samples()[k];
                if uk == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d = grid.point(k) - x0;
                let p = probe.value(d / sh);
                if p == 0.0 {
                    continue;
                }
                let mut z = uk * Complex64::from_polar(p, -d * xi0 / h);
                let step = Complex64::from_polar(1.0, -d * dxi / h);
                for (j, a) in acc.iter_mut().enumerate() {
                    if j > 0 && j % 16 == 0 {
                        z = uk * Complex64::from_polar(p, -d * rect.xi_center(j) / h);
                    }
                    a.add(z);
                    z *= step;
                }
            }
            acc.iter().map(|a| a.value().norm() * scale).collect()
        })
        .collect();
    Ok(columns.into_iter().flatten().collect())
}

/// Scans `rect` and classifies every cell. Per-`h` failures mark that entry
/// of every cell as failed.
pub fn wf_scan<P: Profile + ?Sized>(
    u_family: &Family<'_>,
    probe: &P,
    rect: &PhaseRect,
    ladder: &HLadder,
    policy: &FitPolicy,
) -> Result<WfScanResult> {
    rect.validate()?;
    let per_h: Vec<Result<Vec<f64>>> = ladder
        .values()
        .iter()
        .map(|&h| u_family(h).and_then(|u| scan_one_h(&u, probe, rect)))
        .collect();
    let ncells = rect.nx * rect.nxi;
    let cells = (0..ncells)
        .map(|c| {
            let (i, j) = (c / rect.nxi, c % rect.nxi);
            let results: Vec<Result<f64>> = per_h
                .iter()
                .map(|r| match r {
                    Ok(v) => Ok(v[c]),
                    Err(e) => Err(e.clone()),
                })
                .collect();
            let (x, xi) = (rect.x_center(i), rect.xi_center(j));
            let s = PairingSeries::with_absolute_floor(ladder.clone(), vec![(x, xi); ladder.len()], results);
            ScanCell { i, j, x, xi, magnitudes: s.magnitudes.clone(), errors: s.errors.clone(), fit: decay_fit(&s, policy) }
        })
        .collect();
    Ok(WfScanResult { rect: *rect, ladder: ladder.clone(), policy: *policy, cells })
}

/// Outcome of the sector inequality `|Σ w f| ≥ cos θ · Σ w |f|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Half-width of the narrowest sector containing every nonzero sample.
    pub theta: f64,
    /// Direction of that sector's axis.
    pub axis: f64,
    /// `None` when `θ ≥ π/2`, where the inequality says nothing.
    pub holds: Option<bool>,
}

/// Smallest arc of the circle containing all angles; returns (half-width, midpoint).
pub(crate) fn enclosing_arc(mut angles: Vec<f64>) -> (f64, f64) {
    if angles.is_empty() {
        return (0.0, 0.0);
    }
    for a in angles.iter_mut() {
        *a = a.rem_euclid(2.0 * PI);
    }
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let (mut gap, mut after) = (angles[0] + 2.0 * PI - angles[n - 1], 0);
    for i in 1..n {
        let g = angles[i] - angles[i - 1];
        if g > gap {
            gap = g;
            after = i;
        }
    }
    let width = 2.0 * PI - gap;
    let start = angles[after];
    let mid = (start + 0.5 * width).rem_euclid(2.0 * PI);
    let mid = if mid > PI { mid - 2.0 * PI } else { mid };
    (0.5 * width, mid)
}

pub fn sector_check(samples: &[Complex64], weights: &[f64]) -> Result<SectorCheck> {
    if samples.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: samples.len(), got: weights.len() });
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(invalid("weights must be nonnegative"));
    }
    let mut sum = CompensatedSum::default();
    let mut abs = 0.0;
    let mut angles = Vec::new();
    for (f, &w) in samples.iter().zip(weights) {
        if *f != Complex64::new(0.0, 0.0) && w > 0.0 {
            sum.add(f * w);
            abs += w * f.norm();
            angles.push(f.arg());
        }
    }
    if angles.is_empty() {
        return Err(invalid("sector check needs a nonzero sample"));
    }
    let (theta, axis) = enclosing_arc(angles);
    let lhs = sum.value().norm();
    let holds = (theta < 0.5 * PI).then(|| lhs >= theta.cos() * abs - 1e-12 * abs.max(1.0));
    Ok(SectorCheck { lhs, rhs: abs, theta, axis, holds })
}
