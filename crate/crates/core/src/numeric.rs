//! Small numerical helpers shared across modules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// Compensated sum of a sequence of reals.
pub fn sum_real(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for v in values {
        neumaier(&mut s, &mut c, v);
    }
    s + c
}

/// Least-squares line `y = slope * x + intercept` with the RMS residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Ordinary least squares through the points; `None` with fewer than two
/// points or coincident abscissae.
pub fn line_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Some(LineFit { slope, intercept, residual: (ss / nf).sqrt() })
}

/// The standard bump `exp(1 - 1/(1 - t²))` on `|t| < 1`, normalised to 1 at 0.
#[inline]
pub fn unit_bump(t: f64) -> f64 {
    let q = 1.0 - t * t;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

#[inline]
fn flat_edge(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, C^∞ in between.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    let a = flat_edge(t);
    let b = flat_edge(1.0 - t);
    if a + b == 0.0 {
        if t >= 1.0 { 1.0 } else { 0.0 }
    } else {
        a / (a + b)
    }
}

/// Smallest power of two at or above `x` (and at least `floor`).
pub fn next_pow2(x: f64, floor: usize) -> usize {
    let mut n = floor.max(1).next_power_of_two();
    while (n as f64) < x {
        n *= 2;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let f = line_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
    }

    #[test]
    fn degenerate_fits() {
        assert!(line_fit(&[(1.0, 2.0)]).is_none());
        assert!(line_fit(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
    }

    #[test]
    fn bump_and_step_shape() {
        assert_eq!(unit_bump(0.0), 1.0);
        assert_eq!(unit_bump(1.0), 0.0);
        assert_eq!(unit_bump(-1.5), 0.0);
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_cancels() {
        let mut s = CompensatedSum::default();
        for z in [1e16, 1.0, -1e16, 1.0] {
            s.add(Complex64::new(z, -z));
        }
        assert_eq!(s.value(), Complex64::new(2.0, -2.0));
        assert_eq!(sum_real([1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn pow2_rounding() {
        assert_eq!(next_pow2(3.0, 8), 8);
        assert_eq!(next_pow2(9.0, 8), 16);
        assert_eq!(next_pow2(1024.0, 8), 1024);
    }
}
