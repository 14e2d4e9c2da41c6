//! Catalog of phase-space symbols `a(x, ξ; h)`.
//!
//! Every catalog entry is a serializable value: the tag and fields double as
//! the configuration schema. Most entries are finite sums of products
//! `f(x)·g(ξ)`, which the quantization code exploits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{smooth_step, unit_bump};

fn one() -> f64 {
    1.0
}

/// A catalog symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Symbol {
    /// `a ≡ value + i·imag`.
    Constant {
        value: f64,
        #[serde(default)]
        imag: f64,
    },
    /// `g(x - h^{1/4})·β(ξ)` with `g(t) = exp(-1/t - t)` for `t > 0` and
    /// `β(ξ)` the unit bump of radius 2. Vanishes for `x ≤ h^{1/4}` yet
    /// `(0, 0)` lies in its essential support.
    Example1 {},
    /// `Σ_{j ≤ J(h)} h^j a_j(x, ξ)` where `a_j` is a product bump of radius
    /// `2^{-j-2}` centered at `(2^{-j}, 0)`. `J(h) = ⌊log₂(1/h)⌋` unless
    /// `levels` fixes it.
    Example2 {
        #[serde(default)]
        levels: Option<u32>,
    },
    /// `h^power` times a product bump of half-width `radius` at `(x0, xi0)`.
    Bump {
        #[serde(default)]
        power: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        xi0: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `h^power·χ(x/(r h^δ))·χ(ξ/(r h^δ))`, a member of `S_δ`.
    ScaledBump {
        delta: f64,
        #[serde(default)]
        power: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `h^power·bump(|(x - x0, ξ - xi0)|/radius)`; not a product.
    RadialBump {
        #[serde(default)]
        power: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        xi0: f64,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Product cutoff equal to 1 on the box of half-width `inner` about
    /// `(x0, xi0)` and 0 outside half-width `outer`.
    Plateau {
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        xi0: f64,
        inner: f64,
        outer: f64,
    },
    /// `a = ξ`.
    Momentum {},
    /// `h^power·sin(x/h^δ)·bump(x)·bump(ξ)`.
    Oscillating { power: f64, delta: f64 },
}

/// Answer of an essential-support oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    Out,
    Unknown,
}

type Factor<'a> = Box<dyn Fn(f64) -> Complex64 + Send + Sync + 'a>;

/// One product term `f(x)·g(ξ)` of a separable symbol at fixed `h`.
pub struct SeparableTerm<'a> {
    pub x_factor: Factor<'a>,
    pub xi_factor: Factor<'a>,
}

impl<'a> SeparableTerm<'a> {
    fn new(
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'a,
        g: impl Fn(f64) -> Complex64 + Send + Sync + 'a,
    ) -> Self {
        Self { x_factor: Box::new(f), xi_factor: Box::new(g) }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The profile `g(t) = exp(-1/t - t)` for `t > 0`, else 0.
pub fn example1_profile(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t - t).exp()
    } else {
        0.0
    }
}

/// Truncation level `⌊log₂(1/h)⌋`.
pub fn default_levels(h: f64) -> u32 {
    (-h.log2() + 1e-12).floor().max(0.0) as u32
}

fn example2_level_center(j: u32) -> f64 {
    2f64.powi(-(j as i32))
}

fn example2_level_radius(j: u32) -> f64 {
    2f64.powi(-(j as i32) - 2)
}

fn cutoff(t: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - t.abs()) / (outer - inner))
}

impl Symbol {
    pub fn example1() -> Self {
        Symbol::Example1 {}
    }

    pub fn example2() -> Self {
        Symbol::Example2 { levels: None }
    }

    /// Checks parameter ranges, including `δ < 1/2`.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        let delta_ok = |d: f64| {
            if (0.0..0.5).contains(&d) {
                Ok(())
            } else {
                Err(invalid(format!("delta must lie in [0, 1/2), got {d}")))
            }
        };
        match *self {
            Symbol::Bump { radius, .. } | Symbol::RadialBump { radius, .. } => positive("radius", radius),
            Symbol::ScaledBump { delta, radius, .. } => {
                delta_ok(delta)?;
                positive("radius", radius)
            }
            Symbol::Plateau { inner, outer, .. } => {
                positive("inner", inner)?;
                if outer > inner {
                    Ok(())
                } else {
                    Err(invalid("outer must exceed inner"))
                }
            }
            Symbol::Oscillating { delta, .. } => delta_ok(delta),
            _ => Ok(()),
        }
    }

    /// The class index `δ` of `S_δ` this symbol belongs to.
    pub fn delta(&self) -> f64 {
        match *self {
            Symbol::ScaledBump { delta, .. } | Symbol::Oscillating { delta, .. } => delta,
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: f64, xi: f64, h: f64) -> Complex64 {
        match *self {
            Symbol::Constant { value, imag } => Complex64::new(value, imag),
            Symbol::Example1 {} => re(example1_profile(x - h.powf(0.25)) * unit_bump(xi / 2.0)),
            Symbol::Example2 { levels } => {
                if x <= 0.0 {
                    return re(0.0);
                }
                let top = levels.unwrap_or_else(|| default_levels(h));
                let guess = (-x.log2()).round();
                let mut total = 0.0;
                for j in [guess - 1.0, guess, guess + 1.0] {
                    if j < 0.0 || j > top as f64 {
                        continue;
                    }
                    let j = j as u32;
                    let r = example2_level_radius(j);
                    let v = unit_bump((x - example2_level_center(j)) / r) * unit_bump(xi / r);
                    if v != 0.0 {
                        total += h.powi(j as i32) * v;
                    }
                }
                re(total)
            }
            Symbol::Bump { power, x0, xi0, radius } => {
                re(h.powf(power) * unit_bump((x - x0) / radius) * unit_bump((xi - xi0) / radius))
            }
            Symbol::ScaledBump { delta, power, radius } => {
                let s = radius * h.powf(delta);
                re(h.powf(power) * unit_bump(x / s) * unit_bump(xi / s))
            }
            Symbol::RadialBump { power, x0, xi0, radius } => {
                re(h.powf(power) * unit_bump((x - x0).hypot(xi - xi0) / radius))
            }
            Symbol::Plateau { x0, xi0, inner, outer } => {
                re(cutoff(x - x0, inner, outer) * cutoff(xi - xi0, inner, outer))
            }
            Symbol::Momentum {} => re(xi),
            Symbol::Oscillating { power, delta } => {
                re(h.powf(power) * (x / h.powf(delta)).sin() * unit_bump(x) * unit_bump(xi))
            }
        }
    }

    /// Product decomposition at this `h`, when one exists.
    pub fn separable_terms(&self, h: f64) -> Option<Vec<SeparableTerm<'static>>> {
        let terms = match *self {
            Symbol::Constant { value, imag } => {
                vec![SeparableTerm::new(move |_| Complex64::new(value, imag), |_| re(1.0))]
            }
            Symbol::Example1 {} => {
                let shift = h.powf(0.25);
                vec![SeparableTerm::new(
                    move |x| re(example1_profile(x - shift)),
                    |xi| re(unit_bump(xi / 2.0)),
                )]
            }
            Symbol::Example2 { levels } => {
                let top = levels.unwrap_or_else(|| default_levels(h));
                (0..=top)
                    .map(|j| {
                        let (c, r, w) = (example2_level_center(j), example2_level_radius(j), h.powi(j as i32));
                        SeparableTerm::new(move |x| re(w * unit_bump((x - c) / r)), move |xi| re(unit_bump(xi / r)))
                    })
                    .collect()
            }
            Symbol::Bump { power, x0, xi0, radius } => {
                let w = h.powf(power);
                vec![SeparableTerm::new(
                    move |x| re(w * unit_bump((x - x0) / radius)),
                    move |xi| re(unit_bump((xi - xi0) / radius)),
                )]
            }
            Symbol::ScaledBump { delta, power, radius } => {
                let (w, s) = (h.powf(power), radius * h.powf(delta));
                vec![SeparableTerm::new(move |x| re(w * unit_bump(x / s)), move |xi| re(unit_bump(xi / s)))]
            }
            Symbol::RadialBump { .. } => return None,
            Symbol::Plateau { x0, xi0, inner, outer } => vec![SeparableTerm::new(
                move |x| re(cutoff(x - x0, inner, outer)),
                move |xi| re(cutoff(xi - xi0, inner, outer)),
            )],
            Symbol::Momentum {} => vec![SeparableTerm::new(|_| re(1.0), re)],
            Symbol::Oscillating { power, delta } => {
                let (w, s) = (h.powf(power), h.powf(delta));
                vec![SeparableTerm::new(move |x| re(w * (x / s).sin() * unit_bump(x)), |xi| re(unit_bump(xi)))]
            }
        };
        Some(terms)
    }

    /// Whether `(x, ξ)` belongs to the essential support, where known
    /// analytically.
    pub fn ess_support(&self, x: f64, xi: f64) -> Membership {
        let yes = |b: bool| if b { Membership::In } else { Membership::Out };
        match *self {
            Symbol::Constant { value, imag } => yes(value != 0.0 || imag != 0.0),
            Symbol::Example1 {} => yes(x >= 0.0 && xi.abs() <= 2.0),
            Symbol::Example2 { levels } => {
                if levels.is_none() && x == 0.0 && xi == 0.0 {
                    return Membership::In;
                }
                let top = levels.unwrap_or(u32::MAX).min(1074);
                let hit = (0..=top).take_while(|&j| example2_level_center(j) + example2_level_radius(j) >= x)
                    .any(|j| {
                        let r = example2_level_radius(j);
                        (x - example2_level_center(j)).abs() <= r && xi.abs() <= r
                    });
                yes(hit)
            }
            Symbol::Bump { x0, xi0, radius, .. } => yes((x - x0).abs() <= radius && (xi - xi0).abs() <= radius),
            Symbol::ScaledBump { delta, radius, .. } => {
                if delta == 0.0 {
                    yes(x.abs() <= radius && xi.abs() <= radius)
                } else {
                    yes(x == 0.0 && xi == 0.0)
                }
            }
            Symbol::RadialBump { x0, xi0, radius, .. } => yes((x - x0).hypot(xi - xi0) <= radius),
            Symbol::Plateau { x0, xi0, outer, .. } => yes((x - x0).abs() <= outer && (xi - xi0).abs() <= outer),
            Symbol::Momentum {} => Membership::In,
            Symbol::Oscillating { .. } => yes(x.abs() <= 1.0 && xi.abs() <= 1.0),
        }
    }
}

/// Location and value of the grid maximum of `|a|` on a disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallMax {
    pub value: f64,
    pub x: f64,
    pub xi: f64,
}

/// Maximum of `|a(·, ·; h)|` over the uniform grid of `resolution` points
/// per axis (endpoints included) restricted to the open disc of radius `r`.
/// Ties resolve to the first point in row-major order.
pub fn ball_argmax(a: &Symbol, r: f64, h: f64, resolution: usize) -> Result<BallMax> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if resolution < 64 {
        return Err(invalid(format!("resolution must be at least 64, got {resolution}")));
    }
    let step = 2.0 * r / (resolution - 1) as f64;
    let mut best = BallMax { value: 0.0, x: 0.0, xi: 0.0 };
    let mut found = false;
    for i in 0..resolution {
        let x = -r + i as f64 * step;
        for j in 0..resolution {
            let xi = -r + j as f64 * step;
            if x * x + xi * xi >= r * r {
                continue;
            }
            let v = a.eval(x, xi, h).norm();
            if !found || v > best.value {
                best = BallMax { value: v, x, xi };
                found = true;
            }
        }
    }
    Ok(best)
}

/// `max |a|` over the grid of the disc of radius `r`.
pub fn sup_on_ball(a: &Symbol, r: f64, h: f64, resolution: usize) -> Result<f64> {
    ball_argmax(a, r, h, resolution).map(|m| m.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_scaled() {
        let c = Symbol::Constant { value: 1.0, imag: 0.0 };
        assert_eq!(c.eval(3.0, -7.0, 0.1), re(1.0));
        let s = Symbol::ScaledBump { delta: 0.3, power: 0.0, radius: 1.0 };
        assert_eq!(s.eval(0.0, 0.0, 0.1), s.eval(0.0, 0.0, 1e-6));
        assert_eq!(s.eval(0.0, 0.0, 0.1), re(1.0));
    }

    #[test]
    fn example1_values() {
        let a = Symbol::example1();
        for h in [0.5f64, 1e-2, 1e-4] {
            let v = a.eval(h.powf(0.25) + 1.0, 0.0, h);
            assert!((v.re - (-2.0f64).exp()).abs() < 1e-15);
            assert_eq!(a.eval(0.0, 0.0, h), re(0.0));
        }
        let h = 1e-8;
        let r = 0.1;
        let sup = sup_on_ball(&a, r, h, 257).unwrap();
        let step = 2.0 * r / 256.0;
        let near = (-r + ((0.9 * r + r) / step).round() * step, 0.0);
        assert!(sup >= a.eval(near.0, near.1, h).re);
        assert!(sup > 0.0);
    }

    #[test]
    fn example1_vanishes_left_of_shift() {
        let a = Symbol::example1();
        for k in 4..=14 {
            let h = 2f64.powi(-k);
            let edge = h.powf(0.25);
            for i in 0..400 {
                let x = -2.0 + (edge + 2.0) * i as f64 / 400.0;
                for j in 0..41 {
                    assert_eq!(a.eval(x, -3.0 + 0.15 * j as f64, h), re(0.0));
                }
            }
        }
    }

    #[test]
    fn example2_levels() {
        let a = Symbol::example2();
        for j in 0..6u32 {
            let d = example2_level_center(j) - example2_level_radius(j);
            assert_eq!(d, 3.0 * 2f64.powi(-(j as i32) - 2));
        }
        let h: f64 = 1.0 / 1024.0;
        for j in 0..=10u32 {
            let c = example2_level_center(j);
            let x = c + 0.3 * example2_level_radius(j);
            let want = h.powi(j as i32) * unit_bump(0.3) * unit_bump(0.1);
            let got = a.eval(x, 0.1 * example2_level_radius(j), h).re;
            assert!((got - want).abs() <= 1e-15 * want, "j={j}");
        }
        assert_eq!(a.eval(example2_level_center(11), 0.0, h), re(0.0));
        assert_eq!(default_levels(h), 10);
        assert_eq!(default_levels(0.3), 1);
    }

    #[test]
    fn separable_terms_reproduce_symbol() {
        let catalog = [
            Symbol::Constant { value: 2.0, imag: -1.0 },
            Symbol::example1(),
            Symbol::example2(),
            Symbol::Bump { power: 2.0, x0: 0.1, xi0: -0.2, radius: 0.7 },
            Symbol::ScaledBump { delta: 0.3, power: 1.0, radius: 1.0 },
            Symbol::Plateau { x0: 0.0, xi0: 0.5, inner: 0.3, outer: 0.6 },
            Symbol::Momentum {},
            Symbol::Oscillating { power: 2.0, delta: 0.3 },
        ];
        let h = 1.0 / 64.0;
        for a in &catalog {
            let terms = a.separable_terms(h).unwrap();
            for i in 0..37 {
                for j in 0..29 {
                    let (x, xi) = (-1.3 + 0.071 * i as f64, -1.1 + 0.083 * j as f64);
                    let s: Complex64 = terms.iter().map(|t| (t.x_factor)(x) * (t.xi_factor)(xi)).sum();
                    assert!((s - a.eval(x, xi, h)).norm() < 1e-15, "{a:?} at ({x},{xi})");
                }
            }
        }
        assert!(Symbol::RadialBump { power: 0.0, x0: 0.0, xi0: 0.0, radius: 1.0 }.separable_terms(h).is_none());
    }

    #[test]
    fn plateau_is_flat() {
        let a = Symbol::Plateau { x0: 1.0, xi0: -1.0, inner: 0.2, outer: 0.4 };
        assert_eq!(a.eval(1.15, -0.85, 0.1), re(1.0));
        assert_eq!(a.eval(1.45, -1.0, 0.1), re(0.0));
    }

    #[test]
    fn sup_of_scaled_constant() {
        let c = Symbol::Constant { value: -3.0, imag: 4.0 };
        assert!((sup_on_ball(&c, 0.3, 0.1, 64).unwrap() - 5.0).abs() < 1e-15);
        let b = Symbol::Bump { power: 2.0, x0: 0.0, xi0: 0.0, radius: 1.0 };
        let h = 0.01;
        assert!((sup_on_ball(&b, 0.5, h, 65).unwrap() - h * h).abs() < 1e-18);
        assert!(sup_on_ball(&c, 0.3, 0.1, 10).is_err());
        assert!(sup_on_ball(&c, -1.0, 0.1, 64).is_err());
    }

    #[test]
    fn argmax_of_offset_bump() {
        let a = Symbol::Bump { power: 0.0, x0: 0.3, xi0: 0.0, radius: 0.2 };
        for k in [4, 8, 14] {
            let m = ball_argmax(&a, 0.5, 2f64.powi(-k), 257).unwrap();
            assert!((m.x - 0.3).abs() < 0.004 && m.xi.abs() < 0.004);
        }
    }

    #[test]
    fn oracles() {
        assert_eq!(Symbol::example1().ess_support(0.0, 0.0), Membership::In);
        assert_eq!(Symbol::example1().ess_support(-0.01, 0.0), Membership::Out);
        assert_eq!(Symbol::example1().ess_support(0.5, 2.5), Membership::Out);
        let e2 = Symbol::example2();
        assert_eq!(e2.ess_support(0.0, 0.0), Membership::In);
        assert_eq!(e2.ess_support(0.5, 0.0), Membership::In);
        assert_eq!(e2.ess_support(0.34, 0.0), Membership::Out);
        assert_eq!(e2.ess_support(1.0 / 64.0, 0.001), Membership::In);
        assert_eq!(e2.ess_support(-0.1, 0.0), Membership::Out);
    }

    #[test]
    fn validation() {
        assert!(Symbol::ScaledBump { delta: 0.5, power: 0.0, radius: 1.0 }.validate().is_err());
        assert!(Symbol::Plateau { x0: 0.0, xi0: 0.0, inner: 0.5, outer: 0.4 }.validate().is_err());
        assert!(Symbol::example1().validate().is_ok());
    }

    #[test]
    fn config_round_trip() {
        let a: Symbol = serde_json::from_str(r#"{"kind":"bump","power":2.0}"#).unwrap();
        assert_eq!(a, Symbol::Bump { power: 2.0, x0: 0.0, xi0: 0.0, radius: 1.0 });
        let e: Symbol = serde_json::from_str(r#"{"kind":"example2"}"#).unwrap();
        assert_eq!(e, Symbol::example2());
        assert!(serde_json::from_str::<Symbol>(r#"{"kind":"bump","bogus":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn sup_monotone_on_nested_grids(r in 0.05f64..0.6, k in 4i32..14, res in 64usize..130, which in 0usize..4) {
            let a = [
                Symbol::example1(),
                Symbol::example2(),
                Symbol::Bump { power: 1.0, x0: 0.2, xi0: -0.1, radius: 0.3 },
                Symbol::RadialBump { power: 0.0, x0: 0.4, xi0: 0.4, radius: 0.3 },
            ][which].clone();
            let h = 2f64.powi(-k);
            let res = res | 1;
            let small = sup_on_ball(&a, r, h, res).unwrap();
            let doubled = sup_on_ball(&a, 2.0 * r, h, 2 * res - 1).unwrap();
            let refined = sup_on_ball(&a, r, h, 2 * res - 1).unwrap();
            prop_assert!(small <= doubled + 1e-14);
            prop_assert!(small <= refined + 1e-14);
        }

        #[test]
        fn example2_single_level(j in 0u32..10, u in -0.99f64..0.99, v in -0.99f64..0.99) {
            let h: f64 = 1.0 / 1024.0;
            let r = example2_level_radius(j);
            let (x, xi) = (example2_level_center(j) + u * r, v * r);
            let want = h.powi(j as i32) * unit_bump(u) * unit_bump(v);
            prop_assert!((Symbol::example2().eval(x, xi, h).re - want).abs() <= 1e-11 * want.max(1e-300));
        }
    }
}
