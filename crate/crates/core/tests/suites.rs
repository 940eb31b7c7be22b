use superint::spectral::QuantumNumbers;
use superint::verify::{
    check_gauge_identity, general_potential_cases, suite_conservation, suite_eigen_residual, suite_lie,
    suite_general_potential, IdentityReport, SampleConfig, Verdict,
};
use superint::{ModelSpec, Partition};

fn spec(sizes: &[usize], eta: f64, alpha: &[f64]) -> ModelSpec {
    ModelSpec::new(Partition::new(sizes.to_vec()).unwrap(), eta, alpha.to_vec()).unwrap()
}

fn assert_all_pass(reports: &[IdentityReport]) {
    assert!(!reports.is_empty());
    for r in reports {
        assert!(r.passed(), "{}: {:e} ({:?})", r.name, r.max_residual, r.reason);
    }
}

#[test]
fn conservation_two_blocks() {
    let cfg = SampleConfig::default().with_seed(3).with_samples(8);
    assert_all_pass(&suite_conservation(&spec(&[2, 2], 1.3, &[0.7]), &cfg).unwrap());
    assert_all_pass(&suite_conservation(&spec(&[1, 2], 0.4, &[1.9]), &cfg).unwrap());
}

#[test]
fn lie_relations_two_and_three_blocks() {
    let cfg = SampleConfig::default().with_seed(5).with_samples(6);
    let reports = suite_lie(&spec(&[2, 2], 1.3, &[0.7]), &cfg).unwrap();
    assert!(reports.iter().any(|r| r.name.starts_with("[X_3, X_4]")));
    assert_all_pass(&reports);
    assert_all_pass(&suite_lie(&spec(&[1, 1, 1], 0.9, &[0.3, 1.2]), &cfg).unwrap());
}

#[test]
fn general_potential_cases_behave_as_tagged() {
    let cfg = SampleConfig::default().with_seed(11).with_samples(8);
    let s = spec(&[2, 1, 2], 1.0, &[0.6, 1.1]);
    for (label, gp, holds) in general_potential_cases(&s) {
        let reports = suite_general_potential(&gp, s.eta, s.dim(), &cfg).unwrap();
        if holds {
            assert_eq!(reports.len(), gp.m, "{label}");
            assert_all_pass(&reports);
        } else {
            assert_eq!(reports.len(), 1);
            assert_eq!(reports[0].verdict, Verdict::Skipped, "{label}");
            assert!(reports[0].reason.as_deref().unwrap().contains("degree -2"));
        }
    }
}

#[test]
fn gauge_identity_examples() {
    let cfg = SampleConfig::default().with_seed(2).with_samples(12);
    assert_all_pass(&check_gauge_identity(&spec(&[2, 2, 1], 1.0, &[0.9, 1.4]), 2, &[0, 0, 0], &cfg).unwrap());
    for l1 in [0, 1] {
        let s = spec(&[3, 1, 1], 1.0, &[0.5, 0.8]);
        assert_all_pass(&check_gauge_identity(&s, 2, &[l1, 0, 0], &cfg).unwrap());
    }
    // singleton blocks: no gauge factor
    assert_all_pass(&check_gauge_identity(&spec(&[1, 1, 1, 1], 1.0, &[0.2, 0.7, 1.1]), 3, &[0; 4], &cfg).unwrap());
}

#[test]
fn gauge_rejects_bad_block() {
    let cfg = SampleConfig::default();
    let s = spec(&[2, 2, 1], 1.0, &[0.9, 1.4]);
    assert!(check_gauge_identity(&s, 1, &[0, 0, 0], &cfg).is_err());
    assert!(check_gauge_identity(&s, 3, &[0, 0, 0], &cfg).is_err());
    assert!(check_gauge_identity(&s, 2, &[0, 0], &cfg).is_err());
}

#[test]
fn eigenfunctions_solve_the_schrodinger_equation() {
    let cfg = SampleConfig::default().with_seed(9).with_samples(20);
    let hydrogen = spec(&[3], 1.0, &[]);
    for n_r in 0..=2 {
        for l in 0..=1 {
            let qn = QuantumNumbers { n_r, j: vec![], l: vec![l] };
            let r = suite_eigen_residual(&hydrogen, &qn, &cfg).unwrap();
            assert!(r.passed(), "hydrogen {qn:?}: {:e}", r.max_residual);
        }
    }
    let pair = spec(&[1, 1], 1.7, &[0.75]);
    for (n_r, j) in [(0, 0), (1, 2), (2, 1)] {
        let qn = QuantumNumbers { n_r, j: vec![j], l: vec![0, 0] };
        let r = suite_eigen_residual(&pair, &qn, &cfg).unwrap();
        assert!(r.passed(), "(1,1) {qn:?}: {:e}", r.max_residual);
    }
    let mixed = spec(&[2, 1], 0.8, &[0.4]);
    for l1 in [0, 1] {
        let qn = QuantumNumbers { n_r: 1, j: vec![1], l: vec![l1, 0] };
        let r = suite_eigen_residual(&mixed, &qn, &cfg).unwrap();
        assert!(r.passed(), "(2,1) {qn:?}: {:e}", r.max_residual);
    }
}

#[test]
fn zonal_harmonics_in_large_blocks() {
    let cfg = SampleConfig::default().with_seed(6).with_samples(10);
    for (sizes, alpha, l) in [(vec![3, 1], vec![0.5], vec![2, 0]), (vec![4, 1], vec![0.3], vec![3, 0]), (vec![1, 5], vec![1.2], vec![0, 2])] {
        let s = spec(&sizes, 1.1, &alpha);
        let qn = QuantumNumbers { n_r: 1, j: vec![1], l };
        let r = suite_eigen_residual(&s, &qn, &cfg).unwrap();
        assert!(r.passed(), "{sizes:?} {qn:?}: {:e}", r.max_residual);
    }
}

#[test]
fn hydrogen_plane_harmonics() {
    let cfg = SampleConfig::default().with_seed(4).with_samples(10);
    let plane = spec(&[2], 1.0, &[]);
    for (n_r, l) in [(0, 1), (1, 2), (2, 3)] {
        let qn = QuantumNumbers { n_r, j: vec![], l: vec![l] };
        let r = suite_eigen_residual(&plane, &qn, &cfg).unwrap();
        assert!(r.passed(), "{qn:?}: {:e}", r.max_residual);
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = SampleConfig::default().with_seed(42).with_samples(6);
    let s = spec(&[2, 2], 1.3, &[0.7]);
    let a = suite_lie(&s, &cfg).unwrap();
    let b = suite_lie(&s, &cfg).unwrap();
    assert_eq!(a, b);
    for (x, y) in a.iter().zip(&b) {
        let bits = |r: &IdentityReport| r.residuals.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(x), bits(y));
    }
    let other = suite_lie(&s, &cfg.clone().with_seed(43)).unwrap();
    assert_ne!(a[0].residuals, other[0].residuals);
}

#[test]
fn doubling_jet_order_keeps_residuals_small() {
    let s = spec(&[1, 2], 0.4, &[1.9]);
    // same test polynomials (degree 8), only the truncation order changes
    let base = SampleConfig {
        jet_order: 4,
        degree: 8,
        ..SampleConfig::default().with_seed(8).with_samples(6)
    };
    let low = suite_conservation(&s, &base).unwrap();
    let high = suite_conservation(&s, &SampleConfig { jet_order: 8, ..base.clone() }).unwrap();
    for (a, b) in low.iter().zip(&high) {
        assert!(a.passed() && b.passed(), "{}", a.name);
        let floor = 1e-15;
        assert!(
            b.max_residual <= 10.0 * a.max_residual.max(floor),
            "{}: {:e} -> {:e}",
            a.name,
            a.max_residual,
            b.max_residual
        );
    }
}
