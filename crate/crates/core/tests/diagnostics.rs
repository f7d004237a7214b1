use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use vll_core::diagnostics::{
    analyze_snapshot, atom_mass, dissipation_total, higher_order_certificate, kolmogorov_equivalence_report,
    lambda_con, modulus_of_compactness, omega_con, omega_hat_field, pair, q_con, rate_certificate,
    read_certificate_cells, separable_pairing, short_time_certificate, structure_function_s2, weak_star_pairing,
    DiagnosticTable, TableRow, UReference,
};
use vll_core::dynamics::{evolve, ForceSpec, Trajectory};
use vll_core::equi::{build_inverses, log_cutoff_bound, BetaFunction};
use vll_core::init::{self, RandomSpectrum};
use vll_core::norms::norms;
use vll_core::{biot_savart, make_grid, BallKernel, ScalarField, VectorField};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn frozen(omega: &ScalarField, nu: f64, t_end: f64, steps: usize) -> Trajectory {
    let times: Vec<f64> = (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect();
    let snaps = vec![omega.clone(); times.len()];
    Trajectory::from_snapshots(nu, times, snaps).unwrap()
}

/// Composite Simpson on [a, b] with m (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// ∫_{B_ℓ} g(y₂) dy with y₂ = ℓ sin θ, chord 2ℓ cos θ.
fn disk_integral_of_y2(g: impl Fn(f64) -> f64, ell: f64) -> f64 {
    simpson(|th| g(ell * th.sin()) * 2.0 * ell * th.cos() * ell * th.cos(), -PI / 2.0, PI / 2.0, 4000)
}

#[test]
fn taylor_green_dissipation_closed_form() {
    let g = make_grid(64).unwrap();
    let nu = 1e-2;
    let w0 = init::taylor_green(&g);
    let tr = evolve(&w0, nu, &ForceSpec::None, 1.0, 1e-3, 10).unwrap();
    let w2 = norms(&w0).l2.powi(2);
    let want = w2 * (1.0 - (-4.0 * nu).exp()) / 4.0;
    let got = dissipation_total(&tr, 0.0, 1.0).unwrap();
    assert!(rel(got, want) <= 1e-5, "{got} vs {want}");
    assert!(dissipation_total(&tr, 1.0, 1.0).is_err());
    assert!(dissipation_total(&tr, 0.0, 2.0).is_err());
}

#[test]
fn zero_field_functionals_vanish() {
    let g = make_grid(128).unwrap();
    let tr = frozen(&ScalarField::zeros(&g), 1e-2, 1.0, 4);
    let ell = 0.5;
    assert_eq!(dissipation_total(&tr, 0.0, 1.0).unwrap(), 0.0);
    assert_eq!(structure_function_s2(&tr, ell).unwrap(), 0.0);
    assert_eq!(omega_con(&tr, ell).unwrap(), 0.0);
    assert_eq!(q_con(&tr, ell).unwrap(), 0.0);
    assert_eq!(lambda_con(&tr, UReference::Zero, ell).unwrap(), 0.0);
    assert!(omega_hat_field(&ScalarField::zeros(&g), 0.04).unwrap().values().iter().all(|v| *v == 0.0));
}

#[test]
fn steady_shear_dissipation_per_unit_time() {
    let g = make_grid(128).unwrap();
    for m in [2u32, 4] {
        let nu = 1.0 / (m * m) as f64;
        // u = (sin(m x₂), 0) has ω = −m cos(m x₂).
        let tr = frozen(&init::shear(&g, m).unwrap(), nu, 1.0, 8);
        let got = dissipation_total(&tr, 0.0, 1.0).unwrap();
        assert!(rel(got, 2.0 * PI * PI) <= 1e-12, "m={m}: {got}");
    }
}

#[test]
fn s2_frozen_sine_matches_quadrature() {
    let g = make_grid(128).unwrap();
    let tr = frozen(&init::shear(&g, 1).unwrap(), 1e-2, 1.0, 2);
    let ell = 0.5;
    let avg = disk_integral_of_y2(|y| 1.0 - y.cos(), ell) / (PI * ell * ell);
    let want = TAU * TAU * avg;
    let got = structure_function_s2(&tr, ell).unwrap();
    assert!(rel(got, want) <= 1e-4, "{got} vs {want}");
    assert!(structure_function_s2(&tr, 2.0 * g.spacing()).is_err());
}

#[test]
fn s2_of_constant_is_zero_and_monotone_in_ell() {
    let g = make_grid(64).unwrap();
    let s = ScalarField::zeros(&g);
    let k = BallKernel::new(&g, 0.5).unwrap();
    let c = VectorField::from_fn(&g, |_, _| (0.3, -1.2));
    let r = analyze_snapshot(&s, &k, Some(&c)).unwrap();
    assert_eq!(r.s2, 0.0);

    let w0 = init::random_smooth(&g, &RandomSpectrum { seed: 3, ..Default::default() }).unwrap();
    let tr = evolve(&w0, 1e-2, &ForceSpec::None, 0.2, 1e-2, 2).unwrap();
    let ells = [0.4, 0.6, 0.9, 1.3, 2.0];
    let vals: Vec<f64> = ells.iter().map(|l| structure_function_s2(&tr, *l).unwrap()).collect();
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-3), "{vals:?}");
    }
}

#[test]
fn s2_bounded_by_gradient_integral() {
    let g = make_grid(128).unwrap();
    let nu = 1e-2;
    let w0 = init::random_smooth(&g, &RandomSpectrum { seed: 9, ..Default::default() }).unwrap();
    let tr = evolve(&w0, nu, &ForceSpec::None, 0.5, 5e-3, 2).unwrap();
    let grad: f64 = dissipation_total(&tr, 0.0, 0.5).unwrap() / nu;
    for ell in [0.2, 0.5, 1.0] {
        let s2 = structure_function_s2(&tr, ell).unwrap();
        assert!(s2 <= ell * ell * grad * (1.0 + 1e-3));
    }
}

#[test]
fn lambda_zero_reference_matches_quadrature() {
    let g = make_grid(512).unwrap();
    let tr = frozen(&init::shear(&g, 1).unwrap(), 1e-2, 1.0, 2);
    let ell = 0.5;
    // The sup sits on the line x₂ = π/2, where sin² peaks.
    let want = disk_integral_of_y2(|y| (PI / 2.0 + y).sin().powi(2), ell).sqrt();
    let got = lambda_con(&tr, UReference::Zero, ell).unwrap();
    assert!(rel(got, want) <= 2e-3, "{got} vs {want}");

    let u = tr.velocity(0);
    // Round-off only, seen through a square root.
    assert!(lambda_con(&tr, UReference::Field(&u), ell).unwrap() <= 1e-6);
    let same = frozen(&init::shear(&g, 1).unwrap(), 1e-3, 1.0, 3);
    assert!(lambda_con(&tr, UReference::Trajectory(&same), ell).unwrap() <= 1e-6);
    let other = make_grid(64).unwrap();
    let bad = VectorField::zeros(&other);
    assert!(lambda_con(&tr, UReference::Field(&bad), ell).is_err());
}

#[test]
fn frozen_unit_vortex_mass_is_captured() {
    let g = make_grid(256).unwrap();
    let bump = init::vortex_bump(&g, (PI, PI), 1.0, 0.3).unwrap();
    let k = BallKernel::new(&g, 0.6).unwrap();
    let r = analyze_snapshot(&bump, &k, None).unwrap();
    assert!((r.omega_con - 1.0).abs() <= 1e-3, "{}", r.omega_con);
}

#[test]
fn omega_con_cauchy_schwarz() {
    let g = make_grid(128).unwrap();
    let nu = 1e-2;
    let w0 = init::random_smooth(&g, &RandomSpectrum { seed: 4, ..Default::default() }).unwrap();
    let tr = evolve(&w0, nu, &ForceSpec::None, 0.5, 5e-3, 2).unwrap();
    let ell = 0.4;
    let area = BallKernel::new(&g, ell).unwrap().area();
    let grad = dissipation_total(&tr, 0.0, 0.5).unwrap() / nu;
    let oc = omega_con(&tr, ell).unwrap();
    assert!(oc <= (area * 0.5 * grad).sqrt() * (1.0 + 1e-12));
}

#[test]
fn q_bounded_by_second_moment_for_sine() {
    let g = make_grid(128).unwrap();
    let w = init::shear(&g, 1).unwrap();
    for ell in [0.2, 0.5, 1.5] {
        let r = analyze_snapshot(&w, &BallKernel::new(&g, ell).unwrap(), None).unwrap();
        assert!(r.q_con <= r.lambda_zero);
        assert!(r.q_con > 0.0);
    }
    let c = ScalarField::zeros(&g);
    let r = analyze_snapshot(&c, &BallKernel::new(&g, 0.5).unwrap(), None).unwrap();
    assert_eq!(r.q_con, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn q_le_lambda_on_random_fields(seed in 0u64..1000, ell in 0.2f64..1.5) {
        let g = make_grid(64).unwrap();
        let w = init::random_smooth(&g, &RandomSpectrum { seed, kmax: 8, ..Default::default() }).unwrap();
        let r = analyze_snapshot(&w, &BallKernel::new(&g, ell).unwrap(), None).unwrap();
        prop_assert!(r.q_con <= r.lambda_zero * (1.0 + 1e-12));
        prop_assert!(r.s2 <= ell * ell * r.omega_sq * (1.0 + 1e-12));
    }
}

#[test]
fn omega_hat_constant_and_holder() {
    let g = make_grid(256).unwrap();
    let nu: f64 = 0.04;
    let c = 1.7;
    let area = BallKernel::new(&g, nu.sqrt()).unwrap().area();
    let oh = omega_hat_field(&ScalarField::constant(&g, c), nu).unwrap();
    for v in oh.values() {
        assert!(rel(*v, c * c * area) <= 1e-12);
    }
    assert!(rel(area, PI * nu) <= 0.05);
    assert!(omega_hat_field(&ScalarField::constant(&g, c), 1e-4).is_err());

    let nu: f64 = 1e-2;
    let w = init::mollified_vortex(&g, (PI, PI), 1.0, 1.0, 0.5).unwrap();
    let oh = omega_hat_field(&w, nu).unwrap();
    let tables = build_inverses(&BetaFunction::power(2.0).unwrap()).unwrap();
    let u = biot_savart(&w).unwrap();
    let rep = log_cutoff_bound(&u, &w, &w, &tables, nu.sqrt()).unwrap();
    let sup = vll_core::ball_convolve(&w.abs(), nu.sqrt()).unwrap().max();
    assert!(rel(rep.sup_ball_mass, sup) <= 1e-12);
    assert!(oh.integral() <= norms(&w).l1 * sup * (1.0 + 1e-12));
}

#[test]
fn modulus_of_smooth_field_is_linear() {
    let g = make_grid(128).unwrap();
    let w = init::random_smooth(&g, &RandomSpectrum { seed: 2, kmax: 8, ..Default::default() }).unwrap();
    let u = biot_savart(&w).unwrap();
    let grad = norms(&w).l2;
    let eps = [0.1, 0.2, 0.4, 0.8];
    let tab = modulus_of_compactness(&[u], &eps).unwrap();
    for (e, phi) in &tab {
        assert!(*phi <= e * grad, "eps {e}: {phi} > {}", e * grad);
    }
    assert!(modulus_of_compactness(&[], &[]).unwrap().is_empty());
    let v = VectorField::zeros(&g);
    assert!(modulus_of_compactness(&[v], &[]).unwrap().is_empty());
}

#[test]
fn modulus_detects_oscillation() {
    let g = make_grid(128).unwrap();
    let fam: Vec<VectorField> =
        [4.0, 16.0, 32.0].iter().map(|k| VectorField::from_fn(&g, |_, x2| ((k * x2).sin(), 0.0))).collect();
    let size = PI * 2f64.sqrt();
    let tab = modulus_of_compactness(&fam, &[0.5, 1.0]).unwrap();
    for (_, phi) in tab {
        assert!(phi >= 0.9 * size, "{phi}");
    }
}

#[test]
fn short_time_taylor_green_closed_forms() {
    let g = make_grid(64).unwrap();
    let w0 = init::taylor_green(&g);
    let delta = 0.1;
    let trs: Vec<Trajectory> =
        [1e-2, 1e-3].iter().map(|nu| evolve(&w0, *nu, &ForceSpec::None, 0.2, 1e-3, 1).unwrap()).collect();
    let fam: Vec<&Trajectory> = trs.iter().collect();
    let cert = short_time_certificate(&fam, 0.5, delta).unwrap();
    let u2 = 2.0 * PI * PI;
    let w2 = 4.0 * PI * PI;
    for row in &cert.rows {
        let nu = row.nu;
        let inc = u2 * (1.0 - (-2.0 * nu * delta).exp()).powi(2);
        assert!(rel(row.increment_sq, inc) <= 1e-6, "{} vs {inc}", row.increment_sq);
        let diss = w2 * (1.0 - (-4.0 * nu * delta).exp()) / 4.0;
        assert!(rel(row.dissipation, diss) <= 1e-6);
    }
    assert!(cert.pass);

    let z = frozen(&ScalarField::zeros(&g), 1e-2, 0.2, 20);
    let c = short_time_certificate(&[&z], 0.5, delta).unwrap();
    assert!(c.pass && c.worst_margin == 0.0);
}

#[test]
fn higher_order_taylor_green() {
    let g = make_grid(64).unwrap();
    let nu = 1e-2;
    let w0 = init::taylor_green(&g);
    let tr = evolve(&w0, nu, &ForceSpec::None, 1.0, 1e-3, 10).unwrap();
    let delta = 0.1;
    let c = higher_order_certificate(&tr, delta).unwrap();
    let w2 = 4.0 * PI * PI;
    let lhs = nu * w2 * ((-4.0 * nu * delta).exp() - (-4.0 * nu).exp()) / 2.0;
    assert!(rel(c.lhs, lhs) <= 1e-5, "{} vs {lhs}", c.lhs);
    assert!(rel(c.rhs, 2.0 * PI * PI / delta) <= 1e-12);
    assert!(c.pass);
    assert!(higher_order_certificate(&tr, 1.0).is_err());

    let z = frozen(&ScalarField::zeros(&g), nu, 1.0, 10);
    let c = higher_order_certificate(&z, delta).unwrap();
    assert!(c.pass && c.lhs == 0.0);
}

#[test]
fn kolmogorov_report_taylor_green() {
    let g = make_grid(256).unwrap();
    let nu = 1e-2;
    let w0 = init::taylor_green(&g);
    let t_end = 1.0;
    let tr = evolve(&w0, nu, &ForceSpec::None, t_end, 1e-2, 1).unwrap();
    let rep = kolmogorov_equivalence_report(&tr, UReference::Zero, 1.0, 0.1).unwrap();
    let decay = (1.0 - (-4.0 * nu * t_end).exp()) / (4.0 * nu);
    let ell = nu.sqrt();
    // Both modes have |k| = √2; the disk average is rotation invariant.
    let avg = disk_integral_of_y2(|y| 1.0 - (2f64.sqrt() * y).cos(), ell) / (PI * ell * ell);
    let s2 = 2.0 * avg * 2.0 * PI * PI * decay;
    let diss = nu * 4.0 * PI * PI * decay;
    let cert = rep.certificates.iter().find(|c| c.name == "s2_le_diss").unwrap();
    assert!(rel(cert.lhs, s2) <= 1e-5, "{} vs {s2}", cert.lhs);
    assert!(rel(cert.rhs, diss) <= 1e-5);
    assert!(rel(rep.diss_full, diss) <= 1e-5);
    for c in rep.certificates.iter().filter(|c| c.constant_free) {
        assert!(c.pass, "{c:?}");
    }
    let names: Vec<&str> = rep.certificates.iter().map(|c| c.name.as_str()).collect();
    assert!(names.contains(&"higher_order") && names.contains(&"l1_monotone"));
}

#[test]
fn kolmogorov_report_zero_field() {
    let g = make_grid(128).unwrap();
    let tr = frozen(&ScalarField::zeros(&g), 1e-2, 1.0, 10);
    let rep = kolmogorov_equivalence_report(&tr, UReference::Zero, 2.0, 0.1).unwrap();
    assert_eq!(rep.diss_total, 0.0);
    assert_eq!(rep.s2 + rep.omega_con + rep.q_con + rep.lambda_con, 0.0);
    assert!(rep.certificates.iter().all(|c| c.pass));
    assert!(kolmogorov_equivalence_report(&tr, UReference::Zero, 1.0, 1.0).is_err());
}

#[test]
fn rate_certificate_degenerate_and_monotone() {
    let g = make_grid(64).unwrap();
    let w0 = init::taylor_green(&g);
    let tables = build_inverses(&BetaFunction::power(2.0).unwrap()).unwrap();
    let nus = [1e-2, 1e-3, 1e-4];
    let trs: Vec<Trajectory> = nus.iter().map(|nu| evolve(&w0, *nu, &ForceSpec::None, 0.2, 1e-2, 2).unwrap()).collect();
    let fam: Vec<&Trajectory> = trs.iter().collect();
    let c = rate_certificate(&fam, &tables, 0.05).unwrap();
    for w in c.rows.windows(2) {
        assert!(w[1].envelope_shape < w[0].envelope_shape);
    }
    for r in &c.rows {
        // β = s² has G_β(s) = s^{1/2}.
        assert!(rel(r.g_term, r.nu.powf(0.25)) <= 1e-8);
    }
    let d = rate_certificate(&fam, &tables, 0.2).unwrap();
    assert!(d.rows.iter().all(|r| r.dissipation == 0.0 && r.margin == 0.0));
    assert!(d.pass);
    assert!(rate_certificate(&fam, &tables, 0.3).is_err());
}

#[test]
fn pairing_basics() {
    let g = make_grid(32).unwrap();
    let one = ScalarField::constant(&g, 1.0);
    assert!(rel(pair(&one, &|_, _| 1.0), TAU * TAU) <= 1e-14);

    let rec = weak_star_pairing(&[one.clone(), one.clone()], "one", &|_, _| 1.0).unwrap();
    assert_eq!(rec.values.len(), 2);
    assert!(rec.cauchy_gap <= 1e-12);
    assert!(weak_star_pairing(&[], "one", &|_, _| 1.0).is_err());
}

#[test]
fn separable_pairing_matches_double_sum() {
    let g = make_grid(16).unwrap();
    let rho = ScalarField::from_fn(&g, |x, y| 1.0 + 0.5 * (x + 2.0 * y).sin());
    let phi = |x: f64, y: f64| x.cos() + y * 0.1;
    let psi = |x: f64, y: f64| (x * y).sin() + 2.0;
    let (a, b, ab) = separable_pairing(&rho, &phi, &psi);
    assert_eq!(ab, a * b);
    let n = g.n();
    let w = g.cell_area();
    let mut direct = 0.0;
    for q in 0..n * n {
        let (x1, y1) = (g.coord(q % n), g.coord(q / n));
        let l = rho.values()[q] * phi(x1, y1) * w;
        for p in 0..n * n {
            let (x2, y2) = (g.coord(p % n), g.coord(p / n));
            direct += l * rho.values()[p] * psi(x2, y2) * w;
        }
    }
    assert!(rel(ab, direct) <= 1e-12, "{ab} vs {direct}");
}

#[test]
fn atom_profiles() {
    let g = make_grid(256).unwrap();
    let one = ScalarField::constant(&g, 1.0);
    let radii = [0.2, 0.5, 1.0];
    let p = atom_mass(&one, (1.0, 2.0), &radii).unwrap();
    assert_eq!(p.radii, vec![1.0, 0.5, 0.2]);
    for (r, m) in p.radii.iter().zip(&p.masses) {
        let area = BallKernel::new(&g, *r).unwrap().area();
        assert!(rel(*m, area) <= 1e-12);
        assert!(rel(*m, PI * r * r) <= 0.05);
    }
    assert!(p.masses.windows(2).all(|w| w[1] <= w[0]));

    let a = init::vortex_bump(&g, (PI / 2.0, PI), 1.0, 0.3).unwrap();
    let b = init::vortex_bump(&g, (1.5 * PI, PI), 1.0, 0.3).unwrap();
    let two = a.add(&b).unwrap();
    let p = atom_mass(&two, (PI, PI), &[0.5, 0.2, 0.1]).unwrap();
    assert!(p.score.abs() <= 1e-6, "{}", p.score);
    let p = atom_mass(&two, (PI / 2.0, PI), &[1.0, 0.5]).unwrap();
    assert!(p.masses[0] >= 1.0 - 1e-3);
    assert!(atom_mass(&two, (PI, PI), &[1e-3]).is_err());
}

#[test]
fn table_csv_roundtrip() {
    let g = make_grid(128).unwrap();
    let w0 = init::taylor_green(&g);
    let tr = evolve(&w0, 1e-2, &ForceSpec::None, 0.5, 1e-2, 1).unwrap();
    let rep = kolmogorov_equivalence_report(&tr, UReference::Zero, 2.0, 0.1).unwrap();
    let mut t = DiagnosticTable::new();
    t.push(TableRow::from(&rep));
    t.validate().unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("nu,ell,delta,diss_total,s2,lambda_con,omega_con,q_con,s2_le_diss"));
    let cells = read_certificate_cells(buf.as_slice()).unwrap();
    assert_eq!(cells.len(), rep.certificates.len());
    for (c, r) in cells.iter().zip(&rep.certificates) {
        assert_eq!(c.name, r.name);
        assert_eq!(c.pass, r.pass);
        assert_eq!(c.margin, r.margin);
        assert_eq!(c.constant_free(), r.constant_free);
    }
    let json = t.to_json().unwrap();
    let back: DiagnosticTable = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);

    let mut bad = t.clone();
    bad.rows[0].s2 = f64::NAN;
    assert!(bad.validate().is_err());
}
