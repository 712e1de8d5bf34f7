use super::*;
use crate::exponents::derive_exponents;
use crate::grid::{ScalarSample, Stagger};
use crate::solver::{project, GridSpec, InitialData, SimConfig, Simulation, TimeStep};
use proptest::prelude::*;

fn grid(n: usize) -> CylGrid {
    CylGrid::new(n, n, 1.0, 0.0, 1.0).unwrap()
}

fn cfg_for(g: &CylGrid, c_grow: Option<f64>) -> MonitorConfig {
    let settings = MonitorSettings {
        c_grow,
        c_sob: Some(0.1),
        ..MonitorSettings::default()
    };
    MonitorConfig::resolve(&settings, derive_exponents(6.0, 4.0, 0.0).unwrap(), g, 1.0, true, 1e-8).unwrap()
}

#[test]
fn growth_rate_of_uniform_inflow() {
    // d = q + c |Ω|^{2/3} for u_ρ⁻ ≡ 1 and (a, b, γ) = (6, 4, 0)
    let g = grid(8);
    let cfg = cfg_for(&g, Some(1.0));
    assert_eq!(cfg.exponents.alpha, 6.0);
    assert_eq!(cfg.exponents.beta, 0.0);
    let m = ScalarSample::constant(g, Stagger::Center, 1.0);
    let x = negative_moment(&m, cfg.exponents.alpha, cfg.exponents.beta).unwrap();
    let omega = std::f64::consts::PI;
    assert!((x - omega).abs() < 1e-12);
    let d = cfg.growth_rate(x);
    assert!((d - (4.0 + omega.powf(2.0 / 3.0))).abs() < 1e-12);
}

#[test]
fn derived_constant_matches_hand_computation() {
    // q = 4, p = 2, s = 6, ν = 1: ε₁ = 1, ε₂ = 1.5 / c_sob, c = c_sob / 1.5
    let g = grid(8);
    let cfg = cfg_for(&g, None);
    assert!((cfg.eps1() - 1.0).abs() < 1e-15);
    assert!((cfg.eps2() - 15.0).abs() < 1e-12);
    assert!((cfg.c_grow - 0.1 / 1.5).abs() < 1e-14);
}

#[test]
fn resolve_rejects_bad_settings() {
    let g = grid(4);
    let e = derive_exponents(6.0, 4.0, 0.0).unwrap();
    for s in [
        MonitorSettings { q: 3, ..Default::default() },
        MonitorSettings { epsilon_list: vec![1.0], ..Default::default() },
        MonitorSettings { c3: -1.0, ..Default::default() },
    ] {
        assert!(matches!(MonitorConfig::resolve(&s, e, &g, 1.0, true, 1e-8), Err(Error::Config(_))));
    }
}

#[test]
fn holder_on_constants_is_equality() {
    let g = grid(6);
    let cfg = cfg_for(&g, Some(1.0));
    let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |_, _| 1.0, |_, _| 0.0, |_, _| 0.0);
    let s = Snapshot::new(&v, &ForcingFields::zeros(g), &cfg).unwrap();
    assert!(s.sub_checks.holder_h3.relative().abs() < 1e-14);
}

#[test]
fn transport_vanishes_for_uniform_swirl() {
    let g = grid(12);
    let raw = VelocityState::from_fns(
        g,
        0.0,
        |r, z| r * (1.0 - r) * (6.0 * z).sin(),
        |_, _| 0.7,
        |r, z| r * (6.0 * z).cos(),
        |_, _| 0.0,
    );
    let v = project(&raw).unwrap();
    assert_eq!(transport_cancellation(&v, 4), 0.0);
}

#[test]
fn envelope_of_constant_rate() {
    let t = [0.0, 0.1, 0.2, 0.5];
    let d = [2.0; 4];
    let env = gronwall_envelope(&t, &d, 3.0, &[0.0; 4]).unwrap();
    for (ti, e) in t.iter().zip(&env) {
        assert!((e - 3.0 * (2.0 * ti).exp()).abs() < 1e-12);
    }
    let env = gronwall_envelope(&t, &[0.0; 4], 1.0, &[0.0, 2.0, 1.0, 0.0]).unwrap();
    assert!((env[3] - (1.0 + 0.5 * 2.0)).abs() < 1e-15);
    assert!(gronwall_envelope(&[0.0, 0.0], &[0.0; 2], 1.0, &[0.0; 2]).is_err());
}

#[test]
fn sobolev_calibration_is_resolution_stable() {
    let a = calibrate_c_sob(&CylGrid::new(16, 8, 2.0, 0.0, 1.0).unwrap());
    let b = calibrate_c_sob(&CylGrid::new(32, 16, 2.0, 0.0, 1.0).unwrap());
    assert!(a > 0.0 && b > 0.0);
    assert!((a / b - 1.0).abs() < 0.2, "{a} vs {b}");
}

#[test]
fn blowup_indicator_integrates_vorticity() {
    let r = blowup_indicator(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &[1.0, 1.0, 3.0], &[0.0; 3], true).unwrap();
    assert_eq!(r.vorticity_l2_integral, 3.0);
    assert_eq!(r.functional_ratio, Some(3.0));
    assert!(r.truncated && r.all_finite);
    assert_eq!(r.window_end, 2.0);
}

fn swirl_run(n: usize, forcing: bool) -> MonitorReport {
    let sim_cfg = SimConfig {
        grid: GridSpec { n_rho: n, n_z: n, rho_max: 1.0, z_min: 0.0, z_max: 1.0 },
        nu: 1.0,
        t_start: 0.0,
        t_end: 0.01,
        dt: TimeStep::Cfl { fraction: 0.5 },
        initial: InitialData::TaylorVortexSwirl { amplitude: 0.05, swirl: 0.5, mode: 1 },
        forcing: if forcing {
            serde_json::from_str(
                r#"{"kind": "table", "terms": [{"component": "phi", "amplitude": 2.0,
                    "rho_power": 1, "wall_power": 1, "z_mode": 1}]}"#,
            )
            .unwrap()
        } else {
            Default::default()
        },
        wall: Default::default(),
        checkpoint_stride: 2,
        projection_tolerance: 1e-8,
        poisson: Default::default(),
    };
    let sim = Simulation::new(&sim_cfg).unwrap();
    let g = sim.grid();
    let cfg = MonitorConfig::resolve(
        &MonitorSettings::default(),
        derive_exponents(6.0, 4.0, 0.0).unwrap(),
        &g,
        1.0,
        true,
        1e-8,
    )
    .unwrap();
    let mut mon = Monitor::new(cfg);
    let summary = sim.run_with_observer(|step, v, h| mon.observe(step, v, h)).unwrap();
    mon.finish(summary.failure.is_some()).unwrap()
}

#[test]
fn smooth_run_passes_asserted_checks() {
    let r = swirl_run(16, true);
    for c in &r.checks {
        assert_ne!(c.status, CheckStatus::Fail, "{c:?}");
    }
    let csv = r.to_csv();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("step,time,kinetic_energy"));
    assert_eq!(csv.lines().count(), r.rows.len() + 1);
    let first = csv.lines().nth(1).unwrap();
    // budgets need two checkpoints
    assert!(first.contains(",,"));
}

#[test]
fn identity_residuals_shrink_under_refinement() {
    let coarse = swirl_run(12, true);
    let fine = swirl_run(24, true);
    for name in ["identity_p", "identity_ad"] {
        let a = coarse.check(name).unwrap().worst_score.abs();
        let b = fine.check(name).unwrap().worst_score.abs();
        assert!(b < 0.5 * a, "{name}: {a} -> {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn holder_and_young_steps_hold(
        amp in 0.01f64..3.0,
        radial in -2.0f64..2.0,
        forcing in 0.0f64..5.0,
        kz in 1u32..4,
        shift in 0.0f64..1.0,
    ) {
        let g = grid(10);
        let cfg = cfg_for(&g, None);
        let k = 2.0 * std::f64::consts::PI * kz as f64;
        let v = VelocityState::from_fns(
            g,
            0.0,
            |r, z| radial * r * (k * z + shift).cos(),
            |r, z| amp * r * (1.0 - r) * (1.0 + 0.5 * (k * z).sin()),
            |_, _| 0.0,
            |_, _| 0.0,
        );
        let h = ForcingFields::from_fns(g, |_, _| 0.0, |r, z| forcing * r * (k * z).cos(), |_, _| 0.0);
        let s = Snapshot::new(&v, &h, &cfg).unwrap();
        let sc = s.sub_checks;
        for ineq in [sc.holder_h1, sc.young_y1, sc.holder_h2, sc.holder_h3, sc.young_y2, sc.young_forcing] {
            prop_assert!(ineq.relative() >= -1e-12, "{ineq:?}");
        }
        for vt in &s.vorticity {
            prop_assert!(vt.young_source.relative() >= -1e-12);
        }
        prop_assert!(s.quartic.young_forcing.relative() >= -1e-12);
    }
}
