//! The acceptance suite: twelve criteria, each a list of named checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::appendix_wkb::{rasterize_graph, wkb_case_experiment, within_one_cell, WkbConfig};
use crate::bounds::{epsilon_recurrence, gradient_estimate_ratio, prop2_scaling_check, ScalingConfig};
use crate::error::Result;
use crate::grid::{hfourier_forward, hfourier_inverse, l2_norm, GridPlan, WaveFunction};
use crate::pdo::{apply_op_t0, apply_op_t1};
use crate::states::{coherent_state, coherent_state_fourier, wkb_state, Profile, TestBump, Window, WindowSpec, WkbCase, WkbData};
use crate::symbols::Symbol;
use crate::theorem1::{grid_pairing, reduced_pairing, theorem1_experiment, Theorem1Config, Theorem1Report};
use crate::wavefront::{decay_fit, wf_scan, FitPolicy, HLadder, PairingSeries, PhaseRect, WfScanResult};

/// One named comparison inside a criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Reported alongside the criterion without deciding it.
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn failing(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && !c.informational).collect()
    }
}

pub const TITLES: [&str; 12] = [
    "Fourier unitarity and inversion",
    "coherent-state transform closed form",
    "locality of Op applied to distant coherent states",
    "wavefront scan of a coherent state",
    "Example 1 fixed versus shifted centers",
    "Example 2 fixed versus shifted centers",
    "reduced pairing versus grid pairing",
    "WKB state with real quadratic phase",
    "sharpness cases with phase i x^2",
    "exponent recurrence and derivative estimates",
    "difference of the two quantizations",
    "robustness in K_detect and window radius",
];

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into(), informational: false }
}

fn info(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { informational: true, ..check(name, passed, detail) }
}

fn rel(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let diff: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum();
    (diff / b.samples().iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:.4}"))
}

type StateBuilder = Box<dyn Fn(f64) -> Result<WaveFunction>>;

fn state_catalog() -> Vec<(&'static str, StateBuilder)> {
    vec![
        (
            "gaussian coherent (0.3, -0.4)",
            Box::new(|h| coherent_state(&Window::gaussian(), 0.3, -0.4, h, GridPlan::new(0.3 + 9.0 * h.sqrt(), 1.0).grid(h)?)),
        ),
        (
            "narrow gaussian coherent (-0.5, 1)",
            Box::new(|h| {
                let w = Window::gaussian_scaled(2.0)?;
                coherent_state(&w, -0.5, 1.0, h, GridPlan::new(0.5 + 5.0 * h.sqrt(), 1.0 + 18.0 * h.sqrt()).grid(h)?)
            }),
        ),
        (
            "bump_hat coherent (0, 0.5)",
            Box::new(|h| {
                let w = Window::bump_hat(1.0)?;
                coherent_state(&w, 0.0, 0.5, h, GridPlan::new(w.radius() * h.sqrt(), 0.5 + h.sqrt()).grid(h)?)
            }),
        ),
        (
            "wkb real quadratic",
            Box::new(|h| wkb_state(&WkbData::from_case(WkbCase::RealQuadratic {}), h, GridPlan::new(1.0, 1.0).grid(h)?)),
        ),
        (
            "wkb bump times e^{-x^2/h}",
            Box::new(|h| wkb_state(&WkbData::from_case(WkbCase::BumpGaussian {}), h, GridPlan::new(1.0, 2.0).grid(h)?)),
        ),
    ]
}

fn unitarity() -> Result<Vec<Check>> {
    let ladder = HLadder::default();
    let mut out = Vec::new();
    for (name, build) in state_catalog() {
        let (mut inv, mut norm) = (0.0f64, 0.0f64);
        for &h in ladder.values() {
            let u = build(h)?;
            let v = hfourier_forward(&u)?;
            inv = inv.max(rel(&hfourier_inverse(&v)?, &u));
            norm = norm.max((l2_norm(&v) - l2_norm(&u)).abs() / l2_norm(&u));
        }
        out.push(check(
            name,
            inv <= 1e-10 && norm <= 1e-10,
            format!("max inversion error {inv:.2e}, max norm error {norm:.2e}"),
        ));
    }
    Ok(out)
}

fn closed_form() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for w in [Window::gaussian(), Window::bump_hat(1.0)?] {
        let mut worst = 0.0f64;
        for (x0, xi0) in [(0.0f64, 0.0f64), (0.4, -0.7), (-0.6, 1.2)] {
            for k in [4, 7, 10, 13] {
                let h = 2f64.powi(-k);
                let plan = GridPlan::new(x0.abs() + w.radius() * h.sqrt(), xi0.abs() + w.fourier_radius() * h.sqrt());
                let grid = plan.grid(h)?;
                let u = coherent_state(&w, x0, xi0, h, grid)?;
                let v = hfourier_forward(&u)?;
                let exact = coherent_state_fourier(&w, x0, xi0, h, grid)?;
                worst = worst.max(rel(&v, &exact));
            }
        }
        out.push(check(format!("{:?}", w.spec()), worst <= 1e-8, format!("max relative L2 error {worst:.2e}")));
    }
    Ok(out)
}

fn locality() -> Result<Vec<Check>> {
    let a = Symbol::Bump { power: 0.0, x0: 0.0, xi0: 0.0, radius: 0.5 };
    let ladder = HLadder::default();
    let w = Window::gaussian();
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut centers = Vec::new();
    while centers.len() < 10 {
        let (x, xi): (f64, f64) = (rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5));
        let dist = (x.abs() - 0.5).max(0.0).hypot((xi.abs() - 0.5).max(0.0));
        if dist > 1.0 {
            centers.push((x, xi));
        }
    }
    let mut out = Vec::new();
    for t in [0.0, 1.0] {
        let mut worst: Option<(f64, (f64, f64))> = None;
        let mut all = true;
        for &(x, xi) in &centers {
            let results: Vec<Result<f64>> = ladder
                .values()
                .iter()
                .map(|&h| {
                    let grid = GridPlan::new(x.abs() + 9.0 * h.sqrt(), xi.abs() + 9.0 * h.sqrt()).grid(h)?;
                    let u = coherent_state(&w, x, xi, h, grid)?;
                    let v = if t == 0.0 { apply_op_t0(&a, &u)? } else { apply_op_t1(&a, &u)? };
                    Ok(l2_norm(&v))
                })
                .collect();
            let s = PairingSeries::with_absolute_floor(ladder.clone(), vec![(x, xi); ladder.len()], results);
            let f = decay_fit(&s, &FitPolicy::default());
            let slope = f.tail_slope.unwrap_or(f64::INFINITY);
            all &= f.is_negligible() && slope >= 5.0;
            if worst.is_none_or(|(s, _)| slope < s) {
                worst = Some((slope, (x, xi)));
            }
        }
        let (s, c) = worst.expect("ten centers");
        out.push(check(
            format!("t = {t}"),
            all,
            format!("smallest tail slope {s:.2} at ({:.3}, {:.3})", c.0, c.1),
        ));
    }
    Ok(out)
}

fn coherent_scan(probe_scale: f64) -> Result<WfScanResult> {
    let rect = PhaseRect { x: [-2.0, 2.0], xi: [-2.0, 2.0], nx: 41, nxi: 41 };
    let probe = Window::gaussian_scaled(probe_scale)?;
    let w = Window::gaussian();
    let family = |h: f64| {
        let grid = GridPlan::new(2.0 + probe.radius() * h.sqrt(), 2.0).grid(h)?;
        coherent_state(&w, 0.5, -1.0, h, grid)
    };
    wf_scan(&family, &probe, &rect, &HLadder::default(), &FitPolicy::default())
}

fn scan_checks(scan: &WfScanResult) -> Vec<Check> {
    let target = scan.rect.locate(0.5, -1.0).expect("target inside the rectangle");
    let detected = scan.detected();
    let near = detected.iter().all(|&(i, j)| i.abs_diff(target.0) <= 1 && j.abs_diff(target.1) <= 1);
    let hit = detected.contains(&target);
    vec![
        check("target cell detected", hit, format!("cell {target:?} class {}", scan.cell(target.0, target.1).fit.classification.as_str())),
        check("no detection beyond one cell", near, format!("{} detected cells: {detected:?}", detected.len())),
    ]
}

fn theorem1_run(a: &Symbol, r: f64, window: WindowSpec) -> Result<Theorem1Report> {
    theorem1_experiment(a, &Theorem1Config { radius: r, window, ..Theorem1Config::default() })
}

fn dichotomy_checks(rep: &Theorem1Report) -> Vec<Check> {
    let r = rep.config.radius;
    let f = &rep.fixed_center_fit;
    let fixed_detail = if f.fitted == 0 {
        format!("pairing identically zero ({} of {} underflow)", f.underflowed, rep.config.ladder.len())
    } else {
        format!("tail slope {}", fmt_opt(f.tail_slope))
    };
    let bound = rep.centers.alpha + rep.config.epsilon + 0.5;
    let s = rep.shifted_center_fit.slope;
    let lit: Vec<String> = rep.lower_bound.iter().map(|l| format!("{:.3e} vs {:.3e}", l.integral, l.literal_bound)).collect();
    let cal: Vec<String> = rep.lower_bound.iter().map(|l| format!("{:.3e} vs {:.3e}", l.integral, l.calibrated_bound)).collect();
    let out = vec![
        check(format!("r = {r}: fixed center negligible"), f.is_negligible(), fixed_detail),
        check(
            format!("r = {r}: shifted slope <= alpha + 0.6"),
            rep.verdict.shifted_slope_bounded,
            format!("slope {} vs {bound:.4} (alpha-hat {:.4})", fmt_opt(s), rep.centers.alpha),
        ),
        check(
            format!("r = {r}: pairing >= h^(alpha+0.1) iint/4 at 3 smallest h"),
            rep.verdict.lower_bound_literal,
            lit.join("; "),
        ),
        info(
            format!("r = {r}: same bound times fitted prefactor {:.3e}", rep.centers.prefactor),
            rep.verdict.lower_bound_calibrated,
            cal.join("; "),
        ),
    ];
    out
}

fn example1() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in [0.5, 0.25] {
        out.extend(dichotomy_checks(&theorem1_run(&Symbol::example1(), r, WindowSpec::default())?));
    }
    Ok(out)
}

fn example2() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut alphas = Vec::new();
    for r in [0.5, 0.25] {
        let rep = theorem1_run(&Symbol::example2(), r, WindowSpec::default())?;
        if alphas.is_empty() {
            alphas = rep.alpha_estimates.iter().map(|e| e.alpha_or_inf()).collect();
        }
        out.extend(dichotomy_checks(&rep));
    }
    let stairs = alphas.windows(2).all(|w| w[1] > w[0]);
    out.push(check(
        "alpha-hat strictly increasing over r = 0.5, 0.25, 0.125, 0.0625",
        stairs,
        format!("{alphas:.4?}"),
    ));
    Ok(out)
}

fn cross_oracle() -> Result<Vec<Check>> {
    let psi = TestBump::default();
    let w = Window::bump_hat(1.0)?;
    let cases = [
        (Symbol::example1(), (0.45, 0.0)),
        (Symbol::example2(), (0.5, 0.0)),
        (Symbol::Bump { power: 0.0, x0: 0.1, xi0: -0.2, radius: 0.4 }, (0.2, -0.1)),
        (Symbol::RadialBump { power: 0.0, x0: 0.2, xi0: -0.1, radius: 0.3 }, (0.25, 0.0)),
        (Symbol::Plateau { x0: 0.0, xi0: 0.0, inner: 0.2, outer: 0.5 }, (0.3, 0.1)),
    ];
    let mut out = Vec::new();
    for (a, c) in cases {
        let (mut grid_gap, mut doubling) = (0.0f64, 0.0f64);
        for k in [6, 9, 12] {
            let h = 2f64.powi(-k);
            let q = reduced_pairing(&a, c, h, &psi, &w, 256)?;
            let q2 = reduced_pairing(&a, c, h, &psi, &w, 512)?;
            let g = grid_pairing(&a, c, h, &psi, &w, 256.0)?;
            grid_gap = grid_gap.max((q - g).norm() / q.norm());
            doubling = doubling.max((q - q2).norm() / q2.norm());
        }
        out.push(check(
            format!("{a:?} at ({}, {})", c.0, c.1),
            grid_gap <= 1e-6 && doubling < 1e-9,
            format!("grid gap {grid_gap:.2e}, doubling change {doubling:.2e}"),
        ));
    }
    Ok(out)
}

fn real_quadratic() -> Result<Vec<Check>> {
    let cfg = WkbConfig::default();
    let r = wkb_case_experiment(WkbCase::RealQuadratic {}, &cfg)?;
    let diagonal = rasterize_graph(&cfg.rect, -1.0, 1.0, |x| x, 10_000);
    Ok(vec![
        check(
            "diagonal within one cell of detected",
            within_one_cell(&diagonal, &r.detected_cells, &cfg.rect),
            format!("{} diagonal cells, {} detected", diagonal.len(), r.detected_cells.len()),
        ),
        check(
            "detected within one cell of diagonal",
            within_one_cell(&r.detected_cells, &diagonal, &cfg.rect),
            format!("{} detected cells", r.detected_cells.len()),
        ),
        check(
            "inner within one cell of detected",
            r.verdicts.inner_in_detected,
            format!("{} inner cells", r.inner_cells.len()),
        ),
        check(
            "detected within one cell of outer",
            r.verdicts.detected_in_outer,
            format!("{} outer cells", r.outer_cells.len()),
        ),
    ])
}

fn sharpness() -> Result<Vec<Check>> {
    let cfg = WkbConfig::default();
    let flat = wkb_case_experiment(WkbCase::FlatGaussian {}, &cfg)?;
    let quad = wkb_case_experiment(WkbCase::QuadraticGaussian {}, &cfg)?;
    let (f, q) = (&flat.probes[0], &quad.probes[0]);
    let slope = q.fit.slope.unwrap_or(f64::NAN);
    Ok(vec![
        check(
            "b = e^{-1/x^2}: probe (0,0) rapid decay",
            f.classification == crate::wavefront::Classification::RapidDecay,
            format!("{} with tail slope {}", f.classification.as_str(), fmt_opt(f.fit.tail_slope)),
        ),
        check(
            "b = x^2: probe (0,0) polynomial with slope 1.25 +- 0.05",
            q.classification == crate::wavefront::Classification::Polynomial && (slope - 1.25).abs() <= 0.05,
            format!("{} with slope {slope:.4}", q.classification.as_str()),
        ),
    ])
}

fn bounds_checks() -> Result<Vec<Check>> {
    let e = epsilon_recurrence(200)?;
    let dx = 1.0 / 1024.0;
    let sin: Vec<f64> = (0..=8192).map(|k| (-4.0 + k as f64 * dx).sin()).collect();
    let ratio = gradient_estimate_ratio(&sin, dx)?.ratio.unwrap_or(f64::NAN);
    let ladder = HLadder::default();
    let cfg = ScalingConfig::default();
    let cases = [
        (Symbol::Bump { power: 2.0, x0: 0.0, xi0: 0.0, radius: 1.0 }, 0.02, false),
        (Symbol::ScaledBump { delta: 0.3, power: 2.0, radius: 1.0 }, 0.05, false),
        (Symbol::Oscillating { power: 2.0, delta: 0.3 }, 0.0, true),
    ];
    let mut out = vec![
        check(
            "recurrence prefix 1, 0.5, 0.375, 0.3046875",
            e[..4] == [1.0, 0.5, 0.375, 0.3046875],
            format!("{:?}", &e[..4]),
        ),
        check("eps_200 < 0.01", e[200] < 0.01, format!("{:.6}", e[200])),
        check("sin ratio 1 +- 1e-6", (ratio - 1.0).abs() <= 1e-6, format!("{ratio:.10}")),
    ];
    for (a, tol, lower_only) in cases {
        let r = prop2_scaling_check(&a, 2.0, &ladder, &cfg)?;
        let s = r.slope.unwrap_or(f64::NAN);
        let ok = if lower_only { s >= 1.8 } else { (s - 2.0).abs() <= tol };
        let want = if lower_only { ">= 1.8".to_string() } else { format!("2 +- {tol}") };
        out.push(check(format!("{a:?} slope {want}"), ok, format!("{s:.4}")));
    }
    Ok(out)
}

fn quantization_change() -> Result<Vec<Check>> {
    let ladder = HLadder::default();
    let w = Window::gaussian();
    let cases = [
        (Symbol::Bump { power: 0.0, x0: 0.0, xi0: 0.0, radius: 1.0 }, (0.3f64, 0.2f64), false),
        (Symbol::Plateau { x0: 0.0, xi0: 0.0, inner: 0.2, outer: 1.2 }, (0.7, -0.7), false),
        (Symbol::Bump { power: 0.0, x0: 0.4, xi0: -0.3, radius: 0.5 }, (0.2, -0.1), false),
        (Symbol::Plateau { x0: 0.0, xi0: 0.0, inner: 0.2, outer: 0.8 }, (0.5, -0.5), true),
    ];
    let mut out = Vec::new();
    for (a, (x, xi), steep) in cases {
        let results: Vec<Result<f64>> = ladder
            .values()
            .iter()
            .map(|&h| {
                let grid = GridPlan::new(x.abs() + 9.0 * h.sqrt() + 2.0, xi.abs() + 9.0 * h.sqrt() + 2.0).grid(h)?;
                let u = coherent_state(&w, x, xi, h, grid)?;
                Ok(l2_norm(&apply_op_t1(&a, &u)?.sub(&apply_op_t0(&a, &u)?)?))
            })
            .collect();
        let s = PairingSeries::with_absolute_floor(ladder.clone(), vec![(x, xi); ladder.len()], results);
        let f = decay_fit(&s, &FitPolicy::default());
        let slope = f.slope.unwrap_or(f64::NAN);
        let detail = format!("slope {slope:.4}, tail slope {}", fmt_opt(f.tail_slope));
        let name = format!("{a:?} at ({x}, {xi})");
        out.push(if steep { info(format!("{name}, steep transition"), slope >= 0.9, detail) } else { check(name, slope >= 0.9, detail) });
    }
    Ok(out)
}

fn verdict_tuple(scan: &WfScanResult, ex: &[Theorem1Report]) -> Vec<bool> {
    let mut v: Vec<bool> = scan_checks(scan).iter().map(|c| c.passed).collect();
    for rep in ex {
        v.extend(dichotomy_checks(rep).iter().map(|c| c.passed));
        v.push(rep.verdict.holds);
    }
    v
}

fn robustness() -> Result<Vec<Check>> {
    let runs = |rho: f64| -> Result<(WfScanResult, Vec<Theorem1Report>)> {
        let scan = coherent_scan(rho)?;
        let spec = WindowSpec::BumpHat { radius: rho };
        let mut reps = Vec::new();
        for a in [Symbol::example1(), Symbol::example2()] {
            for r in [0.5, 0.25] {
                reps.push(theorem1_run(&a, r, spec)?);
            }
        }
        Ok((scan, reps))
    };
    let (base_scan, base_reps) = runs(1.0)?;
    let baseline = verdict_tuple(&base_scan, &base_reps);
    let mut out = Vec::new();
    for rho in [0.5, 1.0, 2.0] {
        let (scan, reps) = if rho == 1.0 { (base_scan.clone(), base_reps.clone()) } else { runs(rho)? };
        for k in [4.0, 6.0, 8.0] {
            let policy = FitPolicy::default().with_k(k);
            let refit: Vec<Theorem1Report> = reps.iter().map(|r| r.refit(&policy)).collect();
            let v = verdict_tuple(&scan.refit(&policy), &refit);
            let changed: Vec<usize> = (0..v.len()).filter(|&i| v[i] != baseline[i]).collect();
            out.push(check(
                format!("rho = {rho}, K = {k}"),
                changed.is_empty(),
                if changed.is_empty() { "verdicts unchanged".to_string() } else { format!("changed entries {changed:?}") },
            ));
        }
    }
    Ok(out)
}

/// Runs one criterion; an execution error becomes a failing check.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let result = match id {
        1 => unitarity(),
        2 => closed_form(),
        3 => locality(),
        4 => coherent_scan(1.0).map(|s| scan_checks(&s)),
        5 => example1(),
        6 => example2(),
        7 => cross_oracle(),
        8 => real_quadratic(),
        9 => sharpness(),
        10 => bounds_checks(),
        11 => quantization_change(),
        12 => robustness(),
        _ => Err(crate::error::invalid(format!("no criterion {id}"))),
    };
    let checks = result.unwrap_or_else(|e| vec![check("execution", false, e.to_string())]);
    let title = TITLES.get((id as usize).wrapping_sub(1)).copied().unwrap_or("unknown").to_string();
    CriterionOutcome { id, title, checks }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=12).map(run_criterion).collect()
}

/// `PASS`/`FAIL` line followed by one indented line per check.
pub fn render(o: &CriterionOutcome) -> String {
    let mut s = format!("{} criterion {:>2}: {}\n", if o.passed() { "PASS" } else { "FAIL" }, o.id, o.title);
    for c in &o.checks {
        let tag = match (c.passed, c.informational) {
            (true, false) => "ok  ",
            (false, false) => "FAIL",
            (true, true) => "info",
            (false, true) => "info!",
        };
        s.push_str(&format!("    [{tag}] {}: {}\n", c.name, c.detail));
    }
    s
}

