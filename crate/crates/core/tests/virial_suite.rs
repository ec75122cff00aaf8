use rotnls::diagnostics::{verify_virial_identities, CutoffProfile, Monitor, NullSink};
use rotnls::{evolve_with_cutoff, make_grid, Classification, Complex, DiagnosticsRecord, Field, ModelParams, TimeConfig};

fn run(u0: &Field<f64>, params: &ModelParams<f64>, dt: f64) -> Vec<DiagnosticsRecord<f64>> {
    let cutoff = CutoffProfile::new(u0.grid.half_width() / 3.0, &u0.grid).unwrap();
    assert!(cutoff.support_inside());
    let out = evolve_with_cutoff(u0, params, &TimeConfig::fixed(0.5, dt), Some(cutoff), &mut NullSink).unwrap();
    assert_eq!(out.classification, Classification::Bounded, "{:?}", out.reason);
    out.records
}

#[test]
fn radial_run_identities_converge_at_second_order() {
    let g = make_grid(8.0_f64, 128).unwrap();
    let params = ModelParams::half(3.0, 1.0, 1.0, 1.0, 0.5);
    let u0 = Field::from_real_fn(&g, |x: f64, y: f64| 1.2 * (-(x * x + y * y) / 2.0).exp());
    let report = verify_virial_identities(&run(&u0, &params, 1e-3), &run(&u0, &params, 5e-4)).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn vortex_run_identities_converge_at_second_order() {
    let g = make_grid(8.0_f64, 128).unwrap();
    let params = ModelParams::half(3.0, 1.0, 1.0, 1.5, 0.5);
    let u0 = Field::from_fn(&g, |x: f64, y: f64| Complex::new(x + 0.3, y) * (-(x * x + y * y) / 2.0).exp());
    let report = verify_virial_identities(&run(&u0, &params, 1e-3), &run(&u0, &params, 5e-4)).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn stationary_solution_has_constant_j() {
    let g = make_grid(8.0_f64, 96).unwrap();
    let params = ModelParams::half(3.0, 0.0, 1.0, 1.0, 0.5);
    let q = Field::from_real_fn(&g, |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp());
    let cutoff = CutoffProfile::new(8.0 / 3.0, &g).unwrap();
    let mut mon = Monitor::new(&params, &g, Some(cutoff));
    let j0 = mon.record(&q, 0.0, 0.0).unwrap().j.unwrap();
    for k in 0..50 {
        let t = 0.1 * k as f64;
        // exact solution e^{-iωt} Q with ω = 1
        let u = q.scaled(Complex::from_polar(1.0, -t));
        let r = mon.record(&u, t, 0.1).unwrap();
        assert!(r.j1.unwrap().abs() <= 1e-10, "{:e}", r.j1.unwrap());
        assert!((r.j.unwrap() - j0).abs() <= 1e-10 * j0);
    }
}

#[test]
fn split_step_breathing_of_stationary_state_is_second_order() {
    let g = make_grid(8.0_f64, 96).unwrap();
    let params = ModelParams::half(3.0, 0.0, 1.0, 1.0, 0.5);
    let u0 = Field::from_real_fn(&g, |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp());
    let worst = |dt: f64| run(&u0, &params, dt).iter().map(|r| r.j1.unwrap().abs()).fold(0.0, f64::max);
    let (a, b) = (worst(5e-4), worst(2.5e-4));
    assert!(a <= 1e-6, "{a:e}");
    let ratio = a / b;
    assert!(ratio >= 3.5 && ratio <= 4.5, "{ratio}");
}
