use kleinian_core::spectral::*;
use kleinian_core::stats::fit_line;
use proptest::prelude::*;

fn lowest(d: &HyperbolicDomain, h: f64, k: usize) -> Vec<f64> {
    let mesh = build_mesh(d, h).unwrap();
    let sys = assemble(&mesh);
    let (a, b) = sys.reduced_pencil(1.0);
    solve_lowest(&a, &b, k).unwrap().values
}

#[test]
fn strip_ground_state_converges_quadratically() {
    let (a, l) = (0.5, 2.0);
    let d = HyperbolicDomain::strip(a, l).unwrap();
    let exact = HyperbolicDomain::strip_eigenvalue(l, 1);
    let hs = [0.2, 0.1, 0.05, 0.025];
    let errors: Vec<f64> = hs.iter().map(|&h| (lowest(&d, h, 1)[0] - exact).abs()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] < 2e-3, "{errors:?}");
    let fit = fit_line(&hs.map(f64::ln), &errors.iter().map(|e| e.ln()).collect::<Vec<_>>()).unwrap();
    assert!((1.8..=2.2).contains(&fit.slope), "order {} from {errors:?}", fit.slope);
}

#[test]
fn strip_second_vertical_mode() {
    let l = 2.0;
    let d = HyperbolicDomain::strip(0.5, l).unwrap();
    let vals = lowest(&d, 0.05, 2);
    let exact = HyperbolicDomain::strip_eigenvalue(l, 2);
    assert!((vals[1] - exact).abs() < 0.02 * exact, "{} vs {exact}", vals[1]);
}

#[test]
fn all_neumann_ground_state_is_constant() {
    for d in [
        HyperbolicDomain::strip(1.0, 2.0).unwrap().with_truncation_bc(TruncationBc::Neumann),
        HyperbolicDomain::hecke_d1().with_truncation_bc(TruncationBc::Neumann),
    ] {
        let mesh = build_mesh(&d, 0.1).unwrap();
        let sys = assemble(&mesh);
        let (a, b) = sys.reduced_pencil(1.0);
        let pairs = solve_lowest(&a, &b, 2).unwrap();
        assert!(pairs.values[0].abs() < 1e-10, "{}: {}", d.name, pairs.values[0]);
        let v = &pairs.vectors[0];
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-6 * v[0].abs()));
        assert!(pairs.values[1] > 0.1);
    }
}

#[test]
fn dirichlet_walls_never_lower_eigenvalues() {
    let d = HyperbolicDomain::strip(1.0, 2.0).unwrap();
    let base = lowest(&d, 0.1, 5);
    for wall in 0..2 {
        let fixed = lowest(&d.with_wall_bc(wall, BoundaryCondition::Dirichlet).unwrap(), 0.1, 5);
        for (b, f) in base.iter().zip(&fixed) {
            assert!(f >= &(b - 1e-10), "wall {wall}: {f} < {b}");
        }
    }
}

#[test]
fn hecke_domains_below_a_quarter() {
    let schedule = default_schedule();
    let cfg = SpectralConfig::default();

    let d = spectrum_below(&HyperbolicDomain::hecke_d(3.0).unwrap(), 0.25, &schedule, &cfg).unwrap();
    assert_eq!(d.genuine_count, 1);
    let l0 = d.lowest_genuine().unwrap();
    assert!(l0 > 0.0 && l0 < 0.25);

    let d1 = spectrum_below(&HyperbolicDomain::hecke_d1(), 0.25, &schedule, &cfg).unwrap();
    assert_eq!(d1.genuine_count, 1);
    assert!(d1.lowest_genuine().unwrap().abs() < 1e-9);

    let d2 = spectrum_below(&HyperbolicDomain::hecke_d2(3.0).unwrap(), 0.25, &schedule, &cfg).unwrap();
    assert_eq!(d2.genuine_count, 0);

    assert!(d.genuine_count <= d1.genuine_count + d2.genuine_count);
}

#[test]
fn neumann_truncated_strip_constant_is_spurious() {
    // with a Neumann floor the infinite-area strip keeps a constant mode
    // that lives on the truncation
    let d = HyperbolicDomain::hecke_d2(3.0).unwrap().with_truncation_bc(TruncationBc::Neumann);
    let r = spectrum_below(&d, 0.25, &default_schedule(), &SpectralConfig::default()).unwrap();
    assert_eq!(r.genuine_count, 0);
    assert!(r.eigenvalues[0].value.abs() < 1e-9);
    assert_eq!(r.eigenvalues[0].stability, Stability::Spurious);
}

#[test]
fn genuine_eigenvalues_survive_a_truncation_swap() {
    // Dirichlet on the y-axis and the arc leaves no continuous spectrum,
    // so the low eigenfunctions decay into both cusps
    let d = HyperbolicDomain::hecke_d1()
        .with_wall_bc(0, BoundaryCondition::Dirichlet)
        .unwrap()
        .with_wall_bc(1, BoundaryCondition::Dirichlet)
        .unwrap();
    let schedule: Vec<ScheduleStep> = [0.04, 0.02, 0.01]
        .iter()
        .enumerate()
        .map(|(i, &h)| ScheduleStep { h, eps: 0.05 / 2f64.powi(i as i32), top: 8.0 * 2f64.powi(i as i32) })
        .collect();
    let cfg = SpectralConfig::default();
    let run = |bc| spectrum_below(&d.with_truncation_bc(bc), 15.0, &schedule, &cfg).unwrap();
    let (n, dir) = (run(TruncationBc::Neumann), run(TruncationBc::Dirichlet));
    assert_eq!(n.genuine_count, 1, "{:?}", n.eigenvalues);
    assert_eq!(n.genuine_values().len(), dir.genuine_values().len());
    for (a, b) in n.genuine_values().iter().zip(dir.genuine_values()) {
        assert!((a - b).abs() < cfg.stability_tol, "{a} vs {b}");
    }
}

#[test]
fn report_is_ascending_and_serializes() {
    let r = spectrum_below(&HyperbolicDomain::hecke_d(3.0).unwrap(), 0.3, &default_schedule(), &SpectralConfig::default())
        .unwrap();
    assert!(r.eigenvalues.windows(2).all(|w| w[0].value <= w[1].value));
    assert!(r.eigenvalues.iter().all(|e| e.residual <= 1e-8));
    assert_eq!(r.eigenfunctions.len(), r.eigenvalues.len());
    assert!(r.eigenfunctions.iter().all(|f| f.len() == r.vertices.len()));
    let json = serde_json::to_string(&r).unwrap();
    let back: SpectrumReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.eigenvalues, r.eigenvalues);
    assert_eq!(back.genuine_count, r.genuine_count);
}

#[test]
fn schedules_must_refine() {
    let d = HyperbolicDomain::hecke_d1();
    let cfg = SpectralConfig::default();
    let s = default_schedule();
    assert!(spectrum_below(&d, 0.25, &s[..2], &cfg).is_err());
    let mut coarsening = s.clone();
    coarsening.reverse();
    assert!(spectrum_below(&d, 0.25, &coarsening, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn assembled_strip_pencils_are_well_formed(a in 0.3f64..2.0, l in 0.5f64..2.5) {
        let d = HyperbolicDomain::strip(a, l).unwrap().with_truncation_bc(TruncationBc::Neumann);
        let mesh = build_mesh(&d, 0.2).unwrap();
        prop_assert!(mesh.min_angle_deg() >= 20.0);
        let sys = assemble(&mesh);
        prop_assert!(sys.stiffness.is_symmetric(1e-12));
        prop_assert!(sys.mass.is_symmetric(1e-12));
        prop_assert!(sys.mass.diagonal().iter().all(|&v| v > 0.0));
        let ones = vec![1.0; mesh.vertex_count()];
        prop_assert!(sys.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn a_dirichlet_wall_raises_every_eigenvalue(a in 0.3f64..2.0, l in 0.5f64..2.5, wall in 0usize..2) {
        let d = HyperbolicDomain::strip(a, l).unwrap();
        let base = lowest(&d, 0.2, 3);
        let fixed = lowest(&d.with_wall_bc(wall, BoundaryCondition::Dirichlet).unwrap(), 0.2, 3);
        for (b, f) in base.iter().zip(&fixed) {
            prop_assert!(*f >= b - 1e-9);
        }
    }
}
