//! Falsifiability controls: each suite rerun with one coupling or structure
//! constant perturbed by 10%, which must turn a pass into a fail.

use serde::Serialize;

use crate::error::Result;
use crate::model::{
    self, angular_momentum, extended_lrl, hamiltonian, integral_y, radial, s_operator, script_n,
    GeneralPotential, ModelSpec, Partition,
};
use crate::operators::OperatorExpr;
use crate::spectral::{self, QuantumNumbers};

use super::suites::qa1_line2;
use super::{
    check_identity, check_terms, IdentityReport, SampleConfig, Term, Verdict, DEFAULT_TOLERANCE,
    QUADRATIC_TOLERANCE,
};

/// Relative size of every perturbation.
pub const MUTATION_FACTOR: f64 = 1.1;

/// A suite check next to the same check with one constant perturbed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MutationControl {
    pub suite: String,
    pub mutation: String,
    pub baseline: IdentityReport,
    pub mutated: IdentityReport,
}

impl MutationControl {
    /// The unperturbed check passes and the perturbed one fails.
    pub fn flipped(&self) -> bool {
        self.baseline.passed() && self.mutated.verdict == Verdict::Fail
    }
}

fn spec(sizes: &[usize], eta: f64, alpha: &[f64]) -> Result<ModelSpec> {
    ModelSpec::new(Partition::new(sizes.to_vec())?, eta, alpha.to_vec())
}

fn scaled_alpha(s: &ModelSpec, k: usize, factor: f64) -> Result<ModelSpec> {
    let mut alpha = s.alpha.clone();
    alpha[k - 1] *= factor;
    ModelSpec::new(s.partition.clone(), s.eta, alpha)
}

fn control(suite: &str, formula: &str, mutation: &str, pair: (IdentityReport, IdentityReport)) -> MutationControl {
    MutationControl {
        suite: suite.into(),
        mutation: mutation.into(),
        baseline: pair.0.with_formula(formula),
        mutated: pair.1.with_formula(formula),
    }
}

/// Conservation: `X̂_j` built with `α_1` scaled while `Ĥ` keeps it.
pub fn mutate_conservation(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = cfg.clone().with_tolerance(DEFAULT_TOLERANCE);
    let s = spec(&[2, 2], 1.3, &[0.7])?;
    let bent = scaled_alpha(&s, 1, MUTATION_FACTOR)?;
    let h = hamiltonian(&s);
    let j = s.last_block().start;
    let zero = OperatorExpr::zero();
    let check = |x: OperatorExpr| {
        check_identity("conservation [H, X_3]", &OperatorExpr::commutator(&h, &x), &zero, s.dim(), &cfg)
            .map(|r| r.with_spec(&s))
    };
    Ok(control(
        "conservation",
        "[H, X_j] = 0",
        "alpha_1 x 1.1 in X_3 only",
        (check(extended_lrl(&s, j)?)?, check(extended_lrl(&bent, j)?)?),
    ))
}

/// Extended LRL conservation: `V` scaled inside `X_i` while `Ĥ` keeps it.
pub fn mutate_general_potential(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = cfg.clone().with_tolerance(DEFAULT_TOLERANCE);
    let s = spec(&[2, 1, 2], 1.0, &[0.6, 1.1])?;
    let dim = s.dim();
    let gp = GeneralPotential::from_model(&s);
    let bent = GeneralPotential::new(gp.m, gp.v.scaled(MUTATION_FACTOR))?;
    let h = model::hamiltonian_with_potential(dim, s.eta, &gp);
    let i = dim - 1;
    let zero = OperatorExpr::zero();
    let check = |g: &GeneralPotential| {
        let x = model::lrl_with_potential(dim, s.eta, i, g);
        check_identity("extended LRL conservation [X_5, H]", &OperatorExpr::commutator(&x, &h), &zero, dim, &cfg)
    };
    Ok(control("general_potential", "[X_i, -Δ - η/r + V] = 0", "V x 1.1 in X_5 only", (check(&gp)?, check(&bent)?)))
}

/// Lie relations: `[X̂_i, X̂_j] = −4ĤL_ij` with the structure constant scaled.
pub fn mutate_lie(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = cfg.clone().with_tolerance(DEFAULT_TOLERANCE);
    let s = spec(&[2, 2], 1.3, &[0.7])?;
    let dim = s.dim();
    let (i, j) = (2, 3);
    let lhs = OperatorExpr::commutator(&extended_lrl(&s, i)?, &extended_lrl(&s, j)?);
    let hl = hamiltonian(&s) * angular_momentum(dim, i, j)?;
    let check = |c: f64| {
        check_identity("[X_3, X_4] = -4 H L_3,4", &lhs, &hl.scaled(c), dim, &cfg).map(|r| r.with_spec(&s))
    };
    Ok(control("lie", "[X_i, X_j] = −4 H L_ij", "-4 -> -4.4 in [X_i, X_j] = -4 H L_ij", (check(-4.0)?, check(-4.0 * MUTATION_FACTOR)?)))
}

/// Quadratic relations: the `{Ŷ_1, X̂_j}` coefficient of `[Ŷ_1, Ŵ_j]` scaled.
pub fn mutate_quadratic(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = cfg.clone().with_tolerance(QUADRATIC_TOLERANCE);
    let s = spec(&[2, 2], 1.3, &[0.7])?;
    let j = s.last_block().start;
    let y1 = integral_y(&s, 1)?;
    let w = OperatorExpr::commutator(&y1, &extended_lrl(&s, j)?);
    let lhs = OperatorExpr::commutator(&y1, &w);
    let terms = qa1_line2(&s, j)?;
    let mut bent = terms.clone();
    bent[0] = Term::new(format!("1.1 ({})", bent[0].name), bent[0].op.scaled(MUTATION_FACTOR));
    let name = "qa1 [Y_1, W_3]";
    Ok(control(
        "quadratic",
        "[Y_1, W_j] = -2{Y_1, X_j} + (D-3)(D-1) X_j",
        "-2 -> -2.2 on {Y_1, X_j} in [Y_1, W_j]",
        (
            check_terms(name, &lhs, &terms, s.dim(), &cfg)?.with_spec(&s),
            check_terms(name, &lhs, &bent, s.dim(), &cfg)?.with_spec(&s),
        ),
    ))
}

/// Gauge identity: `c_1` scaled in `S_{1,p}(c) + 𝒩_p`.
pub fn mutate_gauge(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = SampleConfig {
        positive: true,
        ..cfg.clone().with_tolerance(DEFAULT_TOLERANCE)
    };
    let s = spec(&[2, 2, 1], 1.0, &[0.9, 1.4])?;
    let (p, l) = (2, [0, 0, 0]);
    let dim = radial::dim(&s);
    let lhs = radial::conjugate(&s, &radial::z(&s, &l, p));
    let target = |factor: f64| -> Result<OperatorExpr> {
        let mut q: Vec<f64> = (1..=p).map(|i| radial::c_value(&s, &l, i)).collect();
        q[0] *= factor;
        Ok(s_operator(0, p - 1, &q)? + OperatorExpr::constant(script_n(&s.partition, p)))
    };
    let check = |factor: f64| -> Result<IdentityReport> {
        Ok(check_identity("gauge Z_2", &lhs, &target(factor)?, dim, &cfg)?.with_spec(&s))
    };
    Ok(control("gauge", "G Z_p G^-1 = S_{1,p}(c_1..c_p) + N_p", "c_1 x 1.1 in S_{1,p}(c_1..c_p)", (check(1.0)?, check(MUTATION_FACTOR)?)))
}

/// Eigenfunction residual with the closed-form energy scaled.
pub fn mutate_eigen(cfg: &SampleConfig) -> Result<MutationControl> {
    let cfg = cfg.clone().with_tolerance(DEFAULT_TOLERANCE);
    let s = spec(&[2, 1], 1.0, &[0.75])?;
    let qn = QuantumNumbers {
        n_r: 1,
        j: vec![0],
        l: vec![1, 0],
    };
    let energy = spectral::spectral_data(&s, &qn)?.energy;
    Ok(control(
        "eigen",
        "H Psi = E Psi",
        "E x 1.1",
        (
            super::check_eigen_residual(&s, &qn, energy, &cfg)?,
            super::check_eigen_residual(&s, &qn, energy * MUTATION_FACTOR, &cfg)?,
        ),
    ))
}

/// Every control, one per suite.
pub fn falsifiability_controls(cfg: &SampleConfig) -> Result<Vec<MutationControl>> {
    Ok(vec![
        mutate_conservation(cfg)?,
        mutate_general_potential(cfg)?,
        mutate_lie(cfg)?,
        mutate_quadratic(cfg)?,
        mutate_gauge(cfg)?,
        mutate_eigen(cfg)?,
    ])
}
