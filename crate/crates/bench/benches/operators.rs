use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superint::model::{extended_lrl, hamiltonian};
use superint::spectral::{wavefunction_eval, QuantumNumbers};
use superint::verify::{suite_conservation, SampleConfig};
use superint::{make_jet, Evaluator, ModelSpec, OperatorExpr, Partition, Polynomial, EPS_SING};

fn spec(sizes: &[usize]) -> ModelSpec {
    ModelSpec::new(Partition::new(sizes.to_vec()).unwrap(), 1.0, vec![0.5; sizes.len() - 1]).unwrap()
}

fn jet_products(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_mul");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (dim, order) in [(3, 6), (5, 6), (6, 8)] {
        let base: Arc<[f64]> = (0..dim).map(|i| 0.3 + 0.1 * i as f64).collect();
        let f = make_jet(&Polynomial::random(dim, order, &mut rng), base.clone(), order).unwrap();
        let g = make_jet(&Polynomial::random(dim, order, &mut rng), base, order).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("D{dim}_k{order}")), &(f, g), |b, (f, g)| {
            b.iter(|| black_box(f.mul(g).unwrap()))
        });
    }
    group.finish();
}

fn commutator_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("commutator_apply");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for sizes in [&[1, 1, 1][..], &[2, 3, 1]] {
        let s = spec(sizes);
        let op = OperatorExpr::commutator(&hamiltonian(&s), &extended_lrl(&s, s.dim() - 1).unwrap());
        let order = op.derivative_order() + 2;
        let base: Arc<[f64]> = (0..s.dim()).map(|i| 0.4 + 0.2 * i as f64).collect();
        let f = make_jet(&Polynomial::random(s.dim(), 8, &mut rng), base.clone(), order).unwrap();
        group.bench_function(format!("{sizes:?}"), |b| {
            b.iter(|| black_box(Evaluator::new(base.clone(), EPS_SING).apply(&op, &f).unwrap()))
        });
    }
    group.finish();
}

fn conservation_suite(c: &mut Criterion) {
    let s = spec(&[2, 2]);
    let cfg = SampleConfig::default().with_samples(4);
    c.bench_function("conservation_suite_2_2", |b| b.iter(|| black_box(suite_conservation(&s, &cfg).unwrap())));
}

fn wavefunction(c: &mut Criterion) {
    let s = spec(&[2, 1, 1]);
    let qn = QuantumNumbers {
        n_r: 2,
        j: vec![1, 1],
        l: vec![1, 0, 0],
    };
    let point = [0.3, -0.7, 0.5, 0.9];
    c.bench_function("wavefunction_eval", |b| b.iter(|| black_box(wavefunction_eval(&s, &qn, &point).unwrap())));
}

criterion_group!(benches, jet_products, commutator_apply, conservation_suite, wavefunction);
criterion_main!(benches);
