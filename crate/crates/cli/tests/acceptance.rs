//! Acceptance criteria, one line each. Exits nonzero when any criterion fails.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superint::model::{check_potential_conditions, ModelSpec, Partition};
use superint::oracle::{angular_fd_eigen, harmonic_dimension, harmonic_dimension_brute, radial_fd_eigen, Grid1D};
use superint::spectral::{enumerate_levels, spectral_data, QuantumNumbers};
use superint::verify::{
    check_gauge_identity, falsifiability_controls, is_printed_variant, general_potential_cases, singleton_cross_check,
    suite_conservation, suite_eigen_residual, suite_lie, suite_general_potential, suite_quadratic, IdentityReport,
    SampleConfig, Verdict, QUADRATIC_TOLERANCE, VARIANT_VERBATIM,
};

const SEED: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spec(sizes: &[usize], eta: f64, alpha: &[f64]) -> ModelSpec {
    ModelSpec::new(Partition::new(sizes.to_vec()).unwrap(), eta, alpha.to_vec()).unwrap()
}

fn random_spec(sizes: &[usize], rng: &mut ChaCha8Rng) -> ModelSpec {
    let alpha: Vec<f64> = (1..sizes.len()).map(|_| rng.gen_range(0.1..=2.0)).collect();
    spec(sizes, rng.gen_range(0.1..=2.0), &alpha)
}

const CONSERVATION_PARTITIONS: [&[usize]; 5] = [&[3], &[1, 1, 1], &[2, 2], &[2, 3, 1], &[1, 1, 1, 1, 1]];

fn worst<'a>(reports: impl IntoIterator<Item = &'a IdentityReport>) -> (usize, f64, Vec<String>) {
    let mut count = 0;
    let mut max: f64 = 0.0;
    let mut failed = Vec::new();
    for r in reports {
        count += 1;
        max = max.max(r.max_residual);
        if !r.passed() {
            failed.push(format!("{} ({:.1e})", r.name, r.max_residual));
        }
    }
    (count, max, failed)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cfg = SampleConfig::default().with_seed(SEED).with_samples(32);
    let mut all = Vec::new();
    for sizes in CONSERVATION_PARTITIONS {
        let s = random_spec(sizes, &mut rng);
        all.extend(suite_conservation(&s, &cfg).unwrap());
    }
    let (n, max, failed) = worst(&all);
    outcome(
        failed.is_empty(),
        format!("{n} commutators over 5 partitions, max residual {max:.2e} (tol 1e-8); failed: {failed:?}"),
    )
}

fn criterion_2() -> Outcome {
    let cfg = SampleConfig::default().with_seed(SEED);
    let mut notes = Vec::new();
    let mut pass = true;
    for sizes in [&[2, 1, 2][..], &[1, 1, 1]] {
        let s = spec(sizes, 1.0, &vec![0.7; sizes.len() - 1]);
        for (label, gp, tagged_pass) in general_potential_cases(&s) {
            let cond = check_potential_conditions(&gp, s.dim(), cfg.n_samples, cfg.seed, cfg.tolerance).unwrap();
            let reports = suite_general_potential(&gp, s.eta, s.dim(), &cfg).unwrap();
            let ok = if tagged_pass {
                cond.passed() && reports.iter().all(|r| r.passed() && r.max_residual <= 1e-8)
            } else {
                !cond.passed() && reports.iter().all(|r| r.verdict == Verdict::Skipped)
            };
            pass &= ok;
            let (_, max, _) = worst(&reports);
            notes.push(format!(
                "{sizes:?} V={label}: conditions {}, expected {}, max residual {max:.1e}",
                if cond.passed() { "hold" } else { "fail" },
                if tagged_pass { "hold" } else { "fail" }
            ));
        }
    }
    outcome(pass, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let cfg = SampleConfig::default().with_seed(SEED).with_samples(32);
    let mut all = Vec::new();
    for sizes in CONSERVATION_PARTITIONS {
        let s = random_spec(sizes, &mut rng);
        all.extend(suite_lie(&s, &cfg).unwrap());
    }
    let (n, max, failed) = worst(&all);
    outcome(failed.is_empty(), format!("{n} relations, max residual {max:.2e} (tol 1e-8); failed: {failed:?}"))
}

fn criterion_4() -> Outcome {
    let cfg = SampleConfig::default()
        .with_seed(SEED)
        .with_samples(16)
        .with_tolerance(QUADRATIC_TOLERANCE);
    let mut failures = Vec::new();
    let mut corrected = Vec::new();
    let mut qa1_count = 0;

    // qa1 on every N >= 2 partition of criterion 1 and the qa2/qa3 set
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let qa1_set: [&[usize]; 7] = [&[1, 1, 1], &[2, 2], &[2, 3, 1], &[1, 1, 1, 1, 1], &[1, 1, 1, 1], &[2, 1, 1], &[2, 2, 1]];
    let cp_set: [&[usize]; 4] = [&[1, 1, 1], &[1, 1, 1, 1], &[2, 1, 1], &[2, 2, 1]];
    for sizes in qa1_set {
        let s = random_spec(sizes, &mut rng);
        let relations = suite_quadratic(&s, &cfg).unwrap();
        for r in &relations {
            let is_qa1 = r.relation.starts_with("qa1");
            if !is_qa1 && !cp_set.contains(&sizes) {
                continue;
            }
            qa1_count += is_qa1 as usize;
            let printed = r.forms.iter().find(|f| f.passed() && is_printed_variant(f.variant.as_deref()));
            if printed.is_none() {
                let verbatim = r.form(VARIANT_VERBATIM).map_or(f64::NAN, |f| f.max_residual);
                failures.push(format!("{sizes:?} {} verbatim {verbatim:.1e}", r.relation));
                if let Some(v) = &r.variant {
                    corrected.push(format!("{sizes:?} {} passes as '{v}'", r.relation));
                }
            }
        }
    }

    let termwise = SampleConfig::default().with_seed(SEED).with_samples(16).with_tolerance(1e-10);
    for sizes in [&[1, 1, 1][..], &[1, 1, 1, 1]] {
        let s = random_spec(sizes, &mut rng);
        let reports = singleton_cross_check(&s, &termwise).unwrap();
        let mut names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
        names.dedup();
        for name in names {
            let ok = reports
                .iter()
                .any(|r| r.name == name && r.passed() && is_printed_variant(r.variant.as_deref()));
            if !ok {
                failures.push(format!("{sizes:?} {name} termwise"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{qa1_count} qa1 relations and all qa2/qa3 relations pass as written")
    } else {
        format!(
            "{} relations fail as written: {}. Corrected forms: {}. \
             The stated qa2/qa3 right-hand sides do not close (least-squares fits give \
             the exchanged forms), and qa1 line 3 needs the excluded-coordinate integral \
             when the last or first block has more than one coordinate; see the decisions ledger",
            failures.len(),
            failures.join(", "),
            corrected.join(", ")
        )
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_5() -> Outcome {
    let cfg = SampleConfig::default().with_seed(SEED).with_samples(32);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut reports = Vec::new();
    let s = random_spec(&[2, 2, 1], &mut rng);
    reports.extend(check_gauge_identity(&s, 2, &[0, 0, 0], &cfg).unwrap());
    let s = random_spec(&[3, 1, 1], &mut rng);
    for l1 in [0, 1] {
        reports.extend(check_gauge_identity(&s, 2, &[l1, 0, 0], &cfg).unwrap());
    }
    let (n, max, failed) = worst(&reports);
    outcome(failed.is_empty(), format!("{n} gauge checks, max residual {max:.2e} (tol 1e-8); failed: {failed:?}"))
}

fn random_state(rng: &mut ChaCha8Rng) -> (ModelSpec, QuantumNumbers) {
    let n = rng.gen_range(1..=4);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let alpha: Vec<f64> = (1..n).map(|_| rng.gen_range(0.1..=2.0)).collect();
    let s = spec(&sizes, rng.gen_range(0.5..=2.0), &alpha);
    let l = sizes
        .iter()
        .enumerate()
        .map(|(k, &d)| match d {
            1 => 0,
            // no coupling on the last block: l = 0 in a plane gives 1 + 4λ = 0
            2 if k == n - 1 => rng.gen_range(1..=2),
            _ => rng.gen_range(0..=2),
        })
        .collect();
    let qn = QuantumNumbers {
        n_r: rng.gen_range(0..=3),
        j: (1..n).map(|_| rng.gen_range(0..=2)).collect(),
        l,
    };
    (s, qn)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst_rel: f64 = 0.0;
    let mut failed = Vec::new();
    for _ in 0..10 {
        let (s, qn) = random_state(&mut rng);
        let d = spectral_data(&s, &qn).unwrap();
        let grid = Grid1D::radial_for_level(s.eta, d.denominator, d.kappa).unwrap();
        let fd = radial_fd_eigen(s.eta, d.radial_coupling(), &grid, qn.n_r + 1).unwrap()[qn.n_r];
        let rel = (fd - d.energy).abs() / d.energy.abs();
        worst_rel = worst_rel.max(rel);
        if !(rel <= 2e-3) {
            failed.push(format!("{:?} {qn:?}: {rel:.1e}", s.partition.sizes()));
        }
    }
    let g = Grid1D::angular_default();
    let mut worst_b: f64 = 0.0;
    for (coeff, k, exact) in [(0.75, 0, 9.0), (0.0, 0, 4.0), (0.75, 1, 25.0)] {
        let b = angular_fd_eigen(coeff, coeff, 1, &g, k + 1).unwrap()[k];
        worst_b = worst_b.max((b - exact).abs());
    }
    let pair = angular_fd_eigen(0.75, 0.75, 1, &g, 2).unwrap();
    worst_b = worst_b.max((pair[1] - pair[0] - 16.0).abs());
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failed.is_empty() && worst_b <= 1e-2 && secs <= 120.0,
        format!(
            "10 random states, worst |dE|/|E| {worst_rel:.2e} (tol 2e-3); worked angular examples worst |db| {worst_b:.2e} (tol 1e-2); {secs:.1}s; failed: {failed:?}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = SampleConfig::default().with_seed(SEED).with_samples(20);
    let mut reports = Vec::new();
    let hydrogen = spec(&[3], 1.0, &[]);
    for n_r in 0..=2 {
        for l in 0..=1 {
            reports.push(suite_eigen_residual(&hydrogen, &QuantumNumbers { n_r, j: vec![], l: vec![l] }, &cfg).unwrap());
        }
    }
    let pair = spec(&[1, 1], 1.0, &[0.75]);
    for (n_r, j) in [(0, 0), (1, 0), (0, 1), (2, 2)] {
        reports.push(suite_eigen_residual(&pair, &QuantumNumbers { n_r, j: vec![j], l: vec![0, 0] }, &cfg).unwrap());
    }
    let mixed = spec(&[2, 1], 1.0, &[0.6]);
    for l1 in [0, 1] {
        for (n_r, j) in [(0, 0), (1, 1)] {
            let qn = QuantumNumbers { n_r, j: vec![j], l: vec![l1, 0] };
            reports.push(suite_eigen_residual(&mixed, &qn, &cfg).unwrap());
        }
    }
    let (n, max, failed) = worst(&reports);
    outcome(failed.is_empty(), format!("{n} states, max residual {max:.2e} (tol 1e-8); failed: {failed:?}"))
}

fn criterion_8() -> Outcome {
    let s = spec(&[3], 1.0, &[]);
    let levels = enumerate_levels(&s, 6.0).unwrap();
    let got: Vec<(f64, u64)> = levels.iter().map(|l| (l.energy, l.multiplicity)).collect();
    let want = [(-0.25, 1), (-1.0 / 16.0, 4), (-1.0 / 36.0, 9)];
    let levels_ok = got.len() == 3
        && got
            .iter()
            .zip(want)
            .all(|((e, m), (e0, m0))| (e - e0).abs() <= 1e-15 && *m == m0);
    let brute_ok = (0..=2).all(|l| harmonic_dimension(3, l) == harmonic_dimension_brute(3, l));
    outcome(levels_ok && brute_ok, format!("levels {got:?}; harmonic dimensions from kernel rank: {brute_ok}"))
}

fn criterion_9() -> Outcome {
    let controls = falsifiability_controls(&SampleConfig::default().with_seed(SEED)).unwrap();
    let notes: Vec<String> = controls
        .iter()
        .map(|c| {
            format!(
                "{} {} ({:.1e} -> {:.1e})",
                c.suite,
                if c.flipped() { "flips" } else { "DOES NOT flip" },
                c.baseline.max_residual,
                c.mutated.max_residual
            )
        })
        .collect();
    outcome(controls.iter().all(|c| c.flipped()), notes.join("; "))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"partition":[2,1,1],"eta":1.0,"alpha":[0.5,0.25],"verification":{"samples":8}}"#,
    )
    .unwrap();
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_superint"))
            .args(["report", "--seed", "7", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        (out.status.code(), out.stdout)
    };
    let (code_a, a) = run();
    let (code_b, b) = run();
    outcome(
        a == b && !a.is_empty() && code_a == code_b,
        format!("two report runs: {} bytes, identical: {}, exit codes {code_a:?}/{code_b:?}", a.len(), a == b),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("conservation", criterion_1),
        ("extended LRL potentials", criterion_2),
        ("Lie relations", criterion_3),
        ("quadratic algebra", criterion_4),
        ("gauge identity", criterion_5),
        ("spectrum vs finite differences", criterion_6),
        ("eigenfunction residual", criterion_7),
        ("hydrogen degeneracy", criterion_8),
        ("falsifiability controls", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<32} {} [{:.1}s] {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
