use microlocal::appendix_wkb::{wkb_case_experiment, WkbConfig, WkbReport};
use microlocal::grid::{hfourier_forward, l2_norm};
use microlocal::states::{coherent_state, StateSpec, Window, WindowSpec, WkbCase};
use microlocal::symbols::Symbol;
use microlocal::theorem1::{theorem1_experiment, Theorem1Config, Theorem1Report};
use microlocal::wavefront::{FitPolicy, HLadder, PhaseRect};
use microlocal::Error;

#[test]
fn state_spec_builds_the_catalog_state() {
    let spec: StateSpec = serde_json::from_str(r#"{"kind":"coherent","x0":0.25,"xi0":-0.5}"#).unwrap();
    let h = 2f64.powi(-9);
    let grid = spec.plan(h, 0.0, 0.0).unwrap().grid(h).unwrap();
    let u = spec.build(h, grid).unwrap();
    let direct = coherent_state(&Window::gaussian(), 0.25, -0.5, h, grid).unwrap();
    assert_eq!(u, direct);
    assert!(!u.truncation_warning());
    let v = hfourier_forward(&u).unwrap();
    assert!((l2_norm(&v) - 1.0).abs() < 1e-10);
}

#[test]
fn state_spec_rejects_unknown_fields() {
    assert!(serde_json::from_str::<StateSpec>(r#"{"kind":"real_quadratic","x0":1}"#).is_err());
    let lin: StateSpec = serde_json::from_str(r#"{"kind":"linear_phase","frequency":0.5}"#).unwrap();
    assert_eq!(lin.wkb_case(), Some(WkbCase::LinearPhase { frequency: 0.5 }));
    assert!(serde_json::from_str::<Symbol>(r#"{"kind":"example1","radius":1}"#).is_err());
    assert_eq!(serde_json::from_str::<Symbol>(r#"{"kind":"example1"}"#).unwrap(), Symbol::example1());
}

#[test]
fn theorem1_report_round_trips_and_refits() {
    let cfg = Theorem1Config { ladder: HLadder::dyadic(4, 11).unwrap(), ..Theorem1Config::default() };
    let rep = theorem1_experiment(&Symbol::example2(), &cfg).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    let back: Theorem1Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back.verdict, rep.verdict);
    assert_eq!(back.alpha.alpha, rep.alpha.alpha);
    let same = rep.refit(&cfg.policy);
    assert_eq!(same.verdict, rep.verdict);
    assert_eq!(same.fixed_center_fit, rep.fixed_center_fit);
    assert!(rep.verdict.holds);
}

#[test]
fn theorem1_rejects_gaussian_windows() {
    let cfg = Theorem1Config { window: WindowSpec::Gaussian { scale: 1.0 }, ..Theorem1Config::default() };
    assert_eq!(theorem1_experiment(&Symbol::example1(), &cfg).unwrap_err(), Error::NonCompactWindow);
}

#[test]
fn wkb_report_round_trips() {
    let cfg = WkbConfig {
        rect: PhaseRect { x: [-1.5, 1.5], xi: [-1.5, 1.5], nx: 13, nxi: 13 },
        ladder: HLadder::dyadic(4, 11).unwrap(),
        ..WkbConfig::default()
    };
    let rep = wkb_case_experiment(WkbCase::RealQuadratic {}, &cfg).unwrap();
    let back: WkbReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
    assert_eq!(back.detected_cells, rep.detected_cells);
    assert_eq!(back.verdicts, rep.verdicts);
    assert!(rep.verdicts.holds);
    let strict = rep.scan.refit(&FitPolicy::default().with_k(8.0));
    assert!(strict.detected().len() >= rep.scan.detected().len());
}
