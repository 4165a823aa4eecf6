mod common;

use common::{gauss, max_abs_diff, tanh_sinh};
use ksmv::field::{
    chemical_concentration, chemical_gradient, chemical_history, drift_b, ks_residual, sup_growth,
    ChemotacticDrift, ExogenousDrift, InitialChemical,
};
use ksmv::grid::{DensityField, Grid1D, TimeMesh};
use ksmv::kernel::KernelSpec;
use ksmv::mild::{march, memory_drift, MarginalHistory, Model, SolveOptions};
use ksmv::Error;
use proptest::prelude::*;

fn frozen(grid: &Grid1D, mesh: &TimeMesh, var: f64) -> MarginalHistory {
    let row = grid.sample(|x| gauss(var, x));
    MarginalHistory::from_rows(grid, mesh, vec![row; mesh.steps() + 1]).unwrap()
}

#[test]
fn sine_drift_by_quadrature() {
    let grid = Grid1D::new(8.0, 64).unwrap();
    let chem = InitialChemical::sine(&grid, 1.0, 1.0).unwrap();
    let spec = KernelSpec::keller_segel(1.0, 0.0).unwrap();
    assert!((drift_b(&spec, &chem, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    for t in [0.1, 0.5, 2.0] {
        for x in [-1.3, 0.0, 0.4, 2.5] {
            let q = tanh_sinh(|y| (x + y).cos() * gauss(t, y), -40.0, 40.0, 1e-14);
            let b = drift_b(&spec, &chem, t, x).unwrap();
            assert!((b - q).abs() < 1e-10);
            assert!((b - (-t / 2.0).exp() * x.cos()).abs() < 1e-12);
        }
    }
    assert!(drift_b(&spec, &chem, -1.0, 0.0).is_err());
}

#[test]
fn bump_drift_by_quadrature() {
    let grid = Grid1D::new(8.0, 64).unwrap();
    let chem = InitialChemical::gaussian_bump(&grid, 2.0, 0.7).unwrap();
    let spec = KernelSpec::keller_segel(1.5, 0.3).unwrap();
    let c0p = |x: f64| -2.0 * x / 0.49 * (-x * x / 0.98).exp();
    for t in [0.05_f64, 1.0] {
        for x in [-1.0, 0.2, 1.7] {
            let q = 1.5
                * (-0.3 * t).exp()
                * tanh_sinh(|y| c0p(x + y) * gauss(t, y), -30.0, 30.0, 1e-14);
            assert!((drift_b(&spec, &chem, t, x).unwrap() - q).abs() < 1e-10);
        }
    }
}

#[test]
fn constant_chemical_gives_no_drift() {
    let grid = Grid1D::new(8.0, 64).unwrap();
    let chem = InitialChemical::constant(&grid, 3.0).unwrap();
    let drift = ChemotacticDrift::with_params(2.0, 0.1, chem);
    for t in [0.0, 0.3] {
        assert!(drift.sample(&grid, t).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn sampled_chemical_matches_its_closed_form() {
    let grid = Grid1D::new(8.0, 512).unwrap();
    let closed = InitialChemical::gaussian_bump(&grid, 1.0, 0.8).unwrap();
    let sampled = InitialChemical::from_samples(&grid, closed.c0.clone(), None).unwrap();
    // central differences are second order
    assert!(max_abs_diff(&sampled.c0_prime, &closed.c0_prime) < 1e-3);
    let h = grid.spacing();
    assert!(max_abs_diff(&sampled.c0_prime, &closed.c0_prime) < 2.0 * h * h);
    for x in [-1.0, 0.0, 0.9] {
        let (a, da) = closed.smoothed_at(0.4, x);
        let (b, db) = sampled.smoothed_at(0.4, x);
        assert!((a - b).abs() < 1e-10);
        assert!((da - db).abs() < 1e-3);
    }
}

#[test]
fn zero_density_leaves_the_smoothed_initial_field() {
    let grid = Grid1D::new(10.0, 256).unwrap();
    let mesh = TimeMesh::new(1.0, 10).unwrap();
    let h = MarginalHistory::from_rows(&grid, &mesh, vec![vec![0.0; 256]; 11]).unwrap();
    let chem = InitialChemical::sine(&grid, 1.0, 1.0).unwrap();
    let c = chemical_concentration(&h, &chem, 0.0, 10).unwrap();
    let exact = grid.sample(|x| (-0.5_f64).exp() * x.sin());
    assert!(max_abs_diff(&c.values, &exact) < 1e-12);
    assert_eq!(c.time, 1.0);
}

#[test]
fn concentration_at_time_zero_is_c0() {
    let grid = Grid1D::new(10.0, 256).unwrap();
    let mesh = TimeMesh::new(1.0, 10).unwrap();
    let p0 = DensityField::gaussian(&grid, 0.0, 1.0).unwrap();
    let h = MarginalHistory::new(&grid, &mesh, &p0).unwrap();
    let chem = InitialChemical::gaussian_bump(&grid, 1.0, 1.0).unwrap();
    let c = chemical_concentration(&h, &chem, 0.5, 0).unwrap();
    assert_eq!(c.values, chem.c0);
    assert_eq!(c.gradient, chem.c0_prime);
}

#[test]
fn frozen_density_duhamel_term() {
    let grid = Grid1D::new(12.0, 1024).unwrap();
    let mesh = TimeMesh::new(1.0, 40).unwrap();
    let h = frozen(&grid, &mesh, 1.0);
    let chem = InitialChemical::constant(&grid, 0.0).unwrap();
    for k in [1, 15, 40] {
        let c = chemical_concentration(&h, &chem, 0.0, k).unwrap();
        let t = mesh.node(k);
        for i in (0..grid.len()).step_by(32) {
            let x = grid.point(i);
            let exact = tanh_sinh(|s| gauss(1.0 + s, x), 0.0, t, 1e-14);
            assert!((c.values[i] - exact).abs() < 1e-4, "k {k} x {x}");
        }
    }
}

#[test]
fn symmetric_density_has_flat_centre() {
    let grid = Grid1D::new(8.0, 256).unwrap();
    let mesh = TimeMesh::new(0.5, 10).unwrap();
    let rows = (0..=10)
        .map(|k| grid.sample(|x| gauss(0.5 + 0.1 * k as f64, x)))
        .collect();
    let h = MarginalHistory::from_rows(&grid, &mesh, rows).unwrap();
    let chem = InitialChemical::constant(&grid, 1.0).unwrap();
    let spec = KernelSpec::keller_segel(1.0, 0.2).unwrap();
    let d = chemical_gradient(&h, &chem, &spec, 10).unwrap();
    assert!(d[grid.origin_index()].abs() < 1e-14);
}

#[test]
fn missing_rows_are_a_usage_error() {
    let grid = Grid1D::new(8.0, 64).unwrap();
    let mesh = TimeMesh::new(1.0, 10).unwrap();
    let p0 = DensityField::gaussian(&grid, 0.0, 1.0).unwrap();
    let h = MarginalHistory::new(&grid, &mesh, &p0).unwrap();
    let chem = InitialChemical::constant(&grid, 0.0).unwrap();
    assert!(matches!(
        chemical_concentration(&h, &chem, 0.0, 4),
        Err(Error::Usage(_))
    ));
    let other = InitialChemical::constant(&Grid1D::new(8.0, 128).unwrap(), 0.0).unwrap();
    assert!(matches!(
        chemical_concentration(&h, &other, 0.0, 0),
        Err(Error::Usage(_))
    ));
}

#[test]
fn gradient_is_chi_inverse_of_total_drift() {
    let grid = Grid1D::new(10.0, 512).unwrap();
    let mesh = TimeMesh::new(1.0, 50).unwrap();
    let spec = KernelSpec::keller_segel(1.3, 0.5).unwrap();
    let chem = InitialChemical::sine(&grid, 1.0, 1.0).unwrap();
    let model = Model::keller_segel(spec, chem.clone());
    let p0 = DensityField::gaussian(&grid, 0.0, 1.0).unwrap();
    let h = march(&p0, &model, &grid, &mesh, &SolveOptions::default()).unwrap();
    let fields = chemical_history(&h, &chem, spec.lambda).unwrap();
    let drift = ChemotacticDrift::new(&spec, chem.clone());
    for (k, f) in fields.iter().enumerate() {
        let b = drift.sample(&grid, mesh.node(k));
        let bb = memory_drift(&h, &spec, k).unwrap();
        let worst = (0..grid.len())
            .map(|i| (spec.chi * f.gradient[i] - b[i] - bb.values[i]).abs())
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-6, "k {k}: {worst:e}");
        if k % 10 == 0 {
            let single = chemical_gradient(&h, &chem, &spec, k).unwrap();
            assert!(max_abs_diff(&single, &f.gradient) < 1e-13);
        }
    }
}

#[test]
fn gradient_agrees_with_differenced_concentration() {
    let grid = Grid1D::new(10.0, 1024).unwrap();
    let mesh = TimeMesh::new(0.5, 25).unwrap();
    let chem = InitialChemical::gaussian_bump(&grid, 1.0, 1.0).unwrap();
    let p0 = DensityField::gaussian(&grid, 0.0, 0.5).unwrap();
    let spec = KernelSpec::keller_segel(1.0, 0.5).unwrap();
    let h = march(
        &p0,
        &Model::keller_segel(spec, chem.clone()),
        &grid,
        &mesh,
        &SolveOptions::default(),
    )
    .unwrap();
    let c = chemical_concentration(&h, &chem, 0.5, 25).unwrap();
    let fd = grid.derivative(&c.values);
    let hh = grid.spacing();
    assert!(max_abs_diff(&fd, &c.gradient) < 10.0 * hh * hh);
}

#[test]
fn residual_shrinks_under_refinement() {
    let spec = KernelSpec::keller_segel(1.0, 0.5).unwrap();
    let run = |n: usize, m: usize| {
        let grid = Grid1D::new(10.0, n).unwrap();
        let mesh = TimeMesh::new(1.0, m).unwrap();
        let chem = InitialChemical::sine(&grid, 1.0, 1.0).unwrap();
        let p0 = DensityField::gaussian(&grid, 0.0, 1.0).unwrap();
        let h = march(
            &p0,
            &Model::keller_segel(spec, chem.clone()),
            &grid,
            &mesh,
            &SolveOptions::default(),
        )
        .unwrap();
        let fields = chemical_history(&h, &chem, spec.lambda).unwrap();
        let r = ks_residual(&h, &fields, spec.lambda).unwrap();
        assert_eq!(r.per_step.len(), m);
        (r.l2, sup_growth(&chem, &fields))
    };
    let (coarse, g1) = run(128, 25);
    let (fine, g2) = run(256, 50);
    assert!(coarse / fine >= 1.5, "{coarse} -> {fine}");
    assert!(g1.is_finite() && g2.is_finite());
}

#[test]
fn gradient_growth_is_bounded_by_the_run() {
    let grid = Grid1D::new(10.0, 256).unwrap();
    let mesh = TimeMesh::new(1.0, 40).unwrap();
    let spec = KernelSpec::keller_segel(1.0, 0.0).unwrap();
    let chem = InitialChemical::sine(&grid, 1.0, 1.0).unwrap();
    let p0 = DensityField::gaussian(&grid, 0.0, 1.0).unwrap();
    let h = march(
        &p0,
        &Model::keller_segel(spec, chem.clone()),
        &grid,
        &mesh,
        &SolveOptions::default(),
    )
    .unwrap();
    let fields = chemical_history(&h, &chem, 0.0).unwrap();
    // the Duhamel part of dc is bounded by int_0^t ||dg(s)||_1 ||p||_inf ds
    let sup_p = h.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
    for f in &fields {
        let sup = f.gradient.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let c_t = 2.0 * (2.0 * f.time / std::f64::consts::PI).sqrt() * sup_p;
        assert!(sup <= chem.sup_prime() + c_t + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn drift_never_exceeds_its_bound(
        chi in 0.0f64..3.0, lambda in 0.0f64..2.0, amp in -2.0f64..2.0, freq in 0.1f64..3.0, t in 0.0f64..3.0,
    ) {
        let grid = Grid1D::new(6.0, 128).unwrap();
        let chem = InitialChemical::sine(&grid, amp, freq).unwrap();
        let bound = chi * chem.sup_prime().max((amp * freq).abs());
        let drift = ChemotacticDrift::with_params(chi, lambda, chem);
        prop_assert!(drift.sample(&grid, t).iter().all(|v| v.abs() <= bound));
    }
}
