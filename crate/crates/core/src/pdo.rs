//! Quantizations `Op_{t,h}(a)` applied to sampled states.
//!
//! Separable symbols go through FFTs; anything else is summed directly over
//! the dual grid, skipping frequency (or position) samples whose magnitude is
//! below `PRUNE` times the maximum. Every output row is accumulated in a fixed
//! order with compensated summation, so results do not depend on the number
//! of worker threads.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{centered_dft, hfourier_forward, hfourier_inverse, Domain, SpatialGrid, WaveFunction};
use crate::numeric::CompensatedSum;
use crate::symbols::Symbol;

/// Relative magnitude below which input samples are skipped by the direct
/// summation paths.
pub const PRUNE: f64 = 1e-15;

/// Largest grid accepted by [`apply_op_general`].
pub const GENERAL_BUDGET: usize = 2048;

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
}

#[inline]
fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn position_input(u: &WaveFunction) -> Result<()> {
    if u.domain() == Domain::Position {
        Ok(())
    } else {
        Err(Error::Mismatch)
    }
}

fn active(samples: &[Complex64]) -> Vec<usize> {
    let max = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    (0..samples.len()).filter(|&k| samples[k].norm() > PRUNE * max).collect()
}

fn spectrum(u: &WaveFunction) -> Result<WaveFunction> {
    match u.domain() {
        Domain::Position => hfourier_forward(u),
        Domain::Frequency => Ok(u.clone()),
    }
}

/// `Op_{1,h}(a)u = F_h^{-1}(a(x, ξ; h) F_h u)`.
///
/// `u` may be given by its samples or by its transform; the result is
/// always in position space.
pub fn apply_op_t1(a: &Symbol, u: &WaveFunction) -> Result<WaveFunction> {
    let h = u.h();
    let grid = u.grid();
    if let Some(terms) = a.separable_terms(h) {
        let v = spectrum(u)?;
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for term in &terms {
            let weighted: Vec<Complex64> =
                (0..grid.len()).map(|m| (term.xi_factor)(grid.freq_point(h, m)) * v.samples()[m]).collect();
            let back = hfourier_inverse(&v.with_samples(weighted)?)?;
            for (k, z) in back.samples().iter().enumerate() {
                let f = (term.x_factor)(grid.point(k));
                if f != Complex64::new(0.0, 0.0) {
                    out[k] += f * z;
                }
            }
        }
        return WaveFunction::new(grid, h, Domain::Position, out);
    }
    let rows = apply_op_t1_rows(a, u, 0..grid.len())?;
    WaveFunction::new(grid, h, Domain::Position, rows)
}

/// Rows `rows` of `Op_{1,h}(a)u`, by direct summation over the dual grid.
pub fn apply_op_t1_rows(a: &Symbol, u: &WaveFunction, rows: Range<usize>) -> Result<Vec<Complex64>> {
    let h = u.h();
    let grid = u.grid();
    let n = grid.len();
    if rows.end > n {
        return Err(Error::LengthMismatch { expected: n, got: rows.end });
    }
    let v = spectrum(u)?;
    let m_active = active(v.samples());
    let tw = twiddles(n);
    let c = grid.freq_spacing(h) / (2.0 * PI * h).sqrt();
    let xis: Vec<f64> = m_active.iter().map(|&m| grid.freq_point(h, m)).collect();
    Ok(rows
        .into_par_iter()
        .map(|j| {
            let x = grid.point(j);
            let mut acc = CompensatedSum::default();
            for (idx, &m) in m_active.iter().enumerate() {
                let av = a.eval(x, xis[idx], h);
                if av != Complex64::new(0.0, 0.0) {
                    let phase = tw[((j as u64 * m as u64) % n as u64) as usize] * sign(j + m);
                    acc.add(av * phase * v.samples()[m]);
                }
            }
            acc.value() * c
        })
        .collect())
}

/// `Op_{0,h}(a)u = F_h^{-1}(F_h(a(y, ξ; h) u(y)))`.
pub fn apply_op_t0(a: &Symbol, u: &WaveFunction) -> Result<WaveFunction> {
    position_input(u)?;
    let h = u.h();
    let grid = u.grid();
    let n = grid.len();
    if let Some(terms) = a.separable_terms(h) {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
        for term in &terms {
            let weighted: Vec<Complex64> =
                (0..n).map(|k| (term.x_factor)(grid.point(k)) * u.samples()[k]).collect();
            let v = hfourier_forward(&u.with_samples(weighted)?)?;
            for (m, z) in v.samples().iter().enumerate() {
                spectrum[m] += (term.xi_factor)(grid.freq_point(h, m)) * z;
            }
        }
        let v = WaveFunction::new(grid, h, Domain::Frequency, spectrum)?;
        return hfourier_inverse(&v);
    }
    let k_active = active(u.samples());
    let tw = twiddles(n);
    let c = grid.spacing() / (2.0 * PI * h).sqrt();
    let xs: Vec<f64> = k_active.iter().map(|&k| grid.point(k)).collect();
    let spectrum: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|m| {
            let xi = grid.freq_point(h, m);
            let mut acc = CompensatedSum::default();
            for (idx, &k) in k_active.iter().enumerate() {
                let av = a.eval(xs[idx], xi, h);
                if av != Complex64::new(0.0, 0.0) {
                    let phase = tw[((k as u64 * m as u64) % n as u64) as usize].conj() * sign(k + m);
                    acc.add(av * phase * u.samples()[k]);
                }
            }
            acc.value() * c
        })
        .collect();
    hfourier_inverse(&WaveFunction::new(grid, h, Domain::Frequency, spectrum)?)
}

/// `Op_{t,h}(a)u(x) = (2πh)^{-1} ∬ a(tx + (1-t)y, ξ; h) e^{i(x-y)ξ/h} u(y) dy dξ`
/// by direct quadrature on the grid and its dual. Reference path, limited to
/// grids of at most [`GENERAL_BUDGET`] points.
pub fn apply_op_general(a: &Symbol, t: f64, u: &WaveFunction) -> Result<WaveFunction> {
    position_input(u)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(crate::error::invalid(format!("t must lie in [0, 1], got {t}")));
    }
    let grid = u.grid();
    let n = grid.len();
    if n > GENERAL_BUDGET {
        return Err(Error::Budget { what: "general quantization", needed: n, budget: GENERAL_BUDGET });
    }
    let h = u.h();
    let k_active = active(u.samples());
    let tw = twiddles(n);
    let xis: Vec<f64> = (0..n).map(|m| grid.freq_point(h, m)).collect();
    let inv_n = 1.0 / n as f64;
    let rows: Vec<Complex64> = match a.separable_terms(h) {
        Some(terms) => (0..n)
            .into_par_iter()
            .map(|j| separable_general_row(&terms, t, u, &grid, &k_active, &tw, &xis, j) * inv_n)
            .collect(),
        None => (0..n)
            .into_par_iter()
            .map(|j| {
                let x = grid.point(j);
                let mut acc = CompensatedSum::default();
                for &k in &k_active {
                    let z = t * x + (1.0 - t) * grid.point(k);
                    let d = (j as i64 - k as i64).rem_euclid(n as i64) as u64;
                    let mut inner = CompensatedSum::default();
                    for (m, &xi) in xis.iter().enumerate() {
                        let av = a.eval(z, xi, h);
                        if av != Complex64::new(0.0, 0.0) {
                            inner.add(av * tw[((d * m as u64) % n as u64) as usize]);
                        }
                    }
                    acc.add(inner.value() * u.samples()[k] * sign(j + k));
                }
                acc.value() * inv_n
            })
            .collect(),
    };
    u.with_samples(rows)
}

#[allow(clippy::too_many_arguments)]
fn separable_general_row(
    terms: &[crate::symbols::SeparableTerm<'_>],
    t: f64,
    u: &WaveFunction,
    grid: &SpatialGrid,
    k_active: &[usize],
    tw: &[Complex64],
    xis: &[f64],
    j: usize,
) -> Complex64 {
    let n = grid.len();
    let x = grid.point(j);
    let mut acc = CompensatedSum::default();
    for term in terms {
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        for &k in k_active {
            s[k] = (term.x_factor)(t * x + (1.0 - t) * grid.point(k)) * u.samples()[k];
        }
        // centered_dft supplies the (-1)^{k+m} factors.
        let spec = centered_dft(&s, false, 1.0);
        for (m, z) in spec.iter().enumerate() {
            let g = (term.xi_factor)(xis[m]);
            if g != Complex64::new(0.0, 0.0) {
                acc.add(g * tw[((j as u64 * m as u64) % n as u64) as usize] * sign(j + m) * z);
            }
        }
    }
    acc.value()
}

/// Dispatches to the fast paths at `t = 0` and `t = 1`.
pub fn apply_op(a: &Symbol, t: f64, u: &WaveFunction) -> Result<WaveFunction> {
    if t == 1.0 {
        apply_op_t1(a, u)
    } else if t == 0.0 {
        apply_op_t0(a, u)
    } else {
        apply_op_general(a, t, u)
    }
}
