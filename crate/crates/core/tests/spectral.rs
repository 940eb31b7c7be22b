use proptest::prelude::*;
use superint::spectral::{classical_poly, enumerate_levels, spectral_data, PolyKind, QuantumNumbers};
use superint::{ModelSpec, Partition};

/// `z(z−1)…(z−k+1)/k!` for real `z`.
fn choose(z: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (z - i as f64) / (i + 1) as f64)
}

/// Explicit sum for `P_n^{(a,b)}(x)` with the absolute sum of its terms.
fn jacobi_naive(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let (u, v) = ((x - 1.0) / 2.0, (x + 1.0) / 2.0);
    (0..=n)
        .map(|s| {
            choose(n as f64 + a, n - s) * choose(n as f64 + b, s) * u.powi(s as i32) * v.powi((n - s) as i32)
        })
        .fold((0.0, 0.0), |(sum, abs), t| (sum + t, abs + t.abs()))
}

fn laguerre_naive(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let mut fact = 1.0;
    (0..=n)
        .map(|i| {
            if i > 0 {
                fact *= i as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * choose(n as f64 + alpha, n - i) * x.powi(i as i32) / fact
        })
        .fold((0.0, 0.0), |(sum, abs), t| (sum + t, abs + t.abs()))
}

fn arb_spec_qn() -> impl Strategy<Value = (ModelSpec, QuantumNumbers)> {
    prop::collection::vec(1usize..=3, 1..=4).prop_flat_map(|sizes| {
        let n = sizes.len();
        (
            Just(sizes.clone()),
            0.1f64..3.0,
            prop::collection::vec(0.1f64..2.0, n - 1),
            0usize..4,
            prop::collection::vec(0usize..4, n - 1),
            prop::collection::vec(0usize..4, n),
        )
            .prop_map(|(sizes, eta, alpha, n_r, j, l)| {
                let last = sizes.len() - 1;
                // a two-dimensional last block has no coupling, so l = 0 there gives 1 + 4λ = 0
                let l = l
                    .iter()
                    .zip(&sizes)
                    .enumerate()
                    .map(|(k, (&l, &d))| match d {
                        1 => 0,
                        2 if k == last => l.max(1),
                        _ => l,
                    })
                    .collect();
                let spec = ModelSpec::new(Partition::new(sizes).unwrap(), eta, alpha).unwrap();
                (spec, QuantumNumbers { n_r, j, l })
            })
    })
}

proptest! {
    #[test]
    fn jacobi_matches_explicit_sum(n in 0usize..=10, a in 0.0f64..10.0, b in 0.0f64..10.0, x in -1.0f64..=1.0) {
        let got = classical_poly(PolyKind::Jacobi { a, b }, n, &x).unwrap();
        let (want, scale) = jacobi_naive(n, a, b, x);
        prop_assert!((got - want).abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE), "{} vs {}", got, want);
    }

    #[test]
    fn laguerre_matches_explicit_sum(n in 0usize..=10, alpha in 0.0f64..10.0, x in 0.0f64..=20.0) {
        let got = classical_poly(PolyKind::Laguerre { alpha }, n, &x).unwrap();
        let (want, scale) = laguerre_naive(n, alpha, x);
        prop_assert!((got - want).abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE), "{} vs {}", got, want);
    }

    #[test]
    fn denominator_is_twice_kappa_plus_radial((spec, qn) in arb_spec_qn()) {
        let d = spectral_data(&spec, &qn).unwrap();
        let n = spec.n_blocks() as f64;
        let j: usize = qn.j.iter().sum();
        let g: f64 = d.gamma.iter().sum();
        prop_assert!((2.0 * d.kappa - (4.0 * j as f64 + 2.0 * n - 1.0 + 2.0 * g)).abs() <= 1e-12 * d.kappa);
        prop_assert!((d.denominator - (2.0 * qn.n_r as f64 + 2.0 * d.kappa)).abs() <= 1e-12 * d.denominator);
        prop_assert_eq!(d.energy, -spec.eta * spec.eta / (d.denominator * d.denominator));
    }

    #[test]
    fn b_follows_kappa_chain((spec, qn) in arb_spec_qn()) {
        let d = spectral_data(&spec, &qn).unwrap();
        for (i, b) in d.b.iter().enumerate().map(|(k, b)| (k + 1, b)) {
            let shift = ((i - 1) * (i - 1)) as f64 / 4.0;
            prop_assert_eq!(*b, d.kappa_chain[i] * d.kappa_chain[i] - shift);
        }
        // the last link of the chain is kappa - 1/2
        prop_assert!((d.kappa_chain[spec.n_blocks() - 1] - (d.kappa - 0.5)).abs() <= 1e-12 * d.kappa);
    }

    #[test]
    fn hydrogen_energy_depends_on_n_r_plus_l(total in 0usize..8, eta in 0.1f64..3.0) {
        let spec = ModelSpec::new(Partition::new(vec![3]).unwrap(), eta, vec![]).unwrap();
        let energies: Vec<f64> = (0..=total)
            .map(|l| spectral_data(&spec, &QuantumNumbers { n_r: total - l, j: vec![], l: vec![l] }).unwrap().energy)
            .collect();
        prop_assert!(energies.iter().all(|&e| e == energies[0]), "{:?}", energies);
    }
}

#[test]
fn hydrogen_levels_have_square_multiplicities() {
    let spec = ModelSpec::new(Partition::new(vec![3]).unwrap(), 1.0, vec![]).unwrap();
    let levels = enumerate_levels(&spec, 6.5).unwrap();
    let got: Vec<(f64, u64)> = levels.iter().map(|l| (l.energy, l.multiplicity)).collect();
    assert_eq!(got, vec![(-0.25, 1), (-1.0 / 16.0, 4), (-1.0 / 36.0, 9)]);
}
