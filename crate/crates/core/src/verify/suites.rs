//! Named identity suites for the block model.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    self, angular_momentum, extended_lrl, hamiltonian, integral_set, integral_y, integral_z,
    radial, script_m, script_n, script_n_formula, singleton, y_formula, z_formula,
    GeneralPotential, ModelSpec,
};
use crate::operators::{CoeffFn, Evaluator, Exponent, OperatorExpr};
use crate::spectral;

use super::{worst, ATTEMPTS_PER_SAMPLE, check_identity, check_term_sets, IdentityReport, SampleConfig, Term, Verdict};

fn comm(a: &OperatorExpr, b: &OperatorExpr) -> OperatorExpr {
    OperatorExpr::commutator(a, b)
}

fn zero() -> OperatorExpr {
    OperatorExpr::zero()
}

/// `[Ĥ, I] = 0` for every constructed integral `I`.
pub fn suite_conservation(spec: &ModelSpec, cfg: &SampleConfig) -> Result<Vec<IdentityReport>> {
    let set = integral_set(spec)?;
    let h = hamiltonian(spec);
    let dim = spec.dim();
    set.operators
        .iter()
        .filter(|o| o.name != "H")
        .map(|o| {
            let name = format!("conservation [H, {}]", o.name);
            Ok(check_identity(&name, &comm(&h, &o.op), &zero(), dim, cfg)?
                .with_formula(format!("[H, {}] = 0", o.name))
                .with_spec(spec))
        })
        .collect()
}

/// Conservation of the LRL components `X_i`, `i` among the last `m`
/// coordinates, for `−Δ − η/r + V`. When `V` violates the hypotheses the
/// single returned report is skipped with the reason.
pub fn suite_general_potential(
    gp: &GeneralPotential,
    eta: f64,
    dim: usize,
    cfg: &SampleConfig,
) -> Result<Vec<IdentityReport>> {
    let cond = model::check_potential_conditions(gp, dim, cfg.n_samples, cfg.seed, cfg.tolerance)?;
    if !cond.passed() {
        let mut why = Vec::new();
        if !cond.independent_of_last_m {
            why.push(format!(
                "potential depends on the last {} coordinates (residual {:e})",
                gp.m, cond.max_gradient_residual
            ));
        }
        if !cond.euler_eigenvalue_minus_two {
            why.push(format!(
                "potential is not homogeneous of degree -2 (residual {:e})",
                cond.max_euler_residual
            ));
        }
        return Ok(vec![IdentityReport::skipped(
            "extended LRL conservation",
            "[X_i, H + V] = 0",
            format!("precondition_failed: {}", why.join("; ")),
        )]);
    }
    let h = model::hamiltonian_with_potential(dim, eta, gp);
    (dim - gp.m..dim)
        .map(|i| {
            let x = model::lrl_with_potential(dim, eta, i, gp);
            Ok(check_identity(
                &format!("extended LRL conservation [X_{}, H]", i + 1),
                &comm(&x, &h),
                &zero(),
                dim,
                cfg,
            )?
            .with_formula(format!("[X_{}, -Δ - η/r + V] = 0", i + 1)))
        })
        .collect()
}

/// Potentials exercising the extended LRL construction in `spec.dim()`
/// variables: the model's `Σ α_k/r_k²` with `m = d_N`, the Coulomb-like
/// `1/r` with `m = 1` (homogeneous of the wrong degree), and `c/x_1²` with
/// `m = D − 1`. The flag says whether the hypotheses hold.
pub fn general_potential_cases(spec: &ModelSpec) -> Vec<(&'static str, GeneralPotential, bool)> {
    let dim = spec.dim();
    let inverse_r = OperatorExpr::mul_by(CoeffFn::radius_power(0, dim, Exponent::int(-1)));
    let first = OperatorExpr::mul_by(CoeffFn::coordinate_power(0, Exponent::int(-2)).scaled(0.8));
    vec![
        ("sum alpha_k / r_k^2", GeneralPotential::from_model(spec), true),
        ("1 / r", GeneralPotential { m: 1, v: inverse_r }, false),
        ("0.8 / x_1^2", GeneralPotential { m: dim - 1, v: first }, true),
    ]
}

fn levi(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Lie-type relations among the integrals.
pub fn suite_lie(spec: &ModelSpec, cfg: &SampleConfig) -> Result<Vec<IdentityReport>> {
    let dim = spec.dim();
    let n = spec.n_blocks();
    let h = hamiltonian(spec);
    let mut out = Vec::new();
    let mut push = |name: String, formula: String, lhs: OperatorExpr, rhs: OperatorExpr| -> Result<()> {
        out.push(check_identity(&name, &lhs, &rhs, dim, cfg)?.with_formula(formula).with_spec(spec));
        Ok(())
    };

    let ys: Vec<OperatorExpr> = (1..n).map(|p| integral_y(spec, p)).collect::<Result<_>>()?;
    let zs: Vec<OperatorExpr> = (2..n).map(|l| integral_z(spec, l)).collect::<Result<_>>()?;
    let last = spec.last_block();
    let xs: Vec<(usize, OperatorExpr)> = last
        .clone()
        .map(|j| extended_lrl(spec, j).map(|x| (j, x)))
        .collect::<Result<_>>()?;

    for a in 0..ys.len() {
        for b in a + 1..ys.len() {
            push(
                format!("[Y_{}, Y_{}] = 0", a + 1, b + 1),
                format!("[Y_{}, Y_{}] = 0", a + 1, b + 1),
                comm(&ys[a], &ys[b]),
                zero(),
            )?;
        }
    }
    for (j, x) in &xs {
        for (k, z) in zs.iter().enumerate() {
            push(
                format!("[X_{}, Z_{}] = 0", j + 1, k + 2),
                format!("[X_{}, Z_{}] = 0", j + 1, k + 2),
                comm(x, z),
                zero(),
            )?;
        }
    }
    if let Some(y1) = ys.first() {
        for (k, z) in zs.iter().enumerate() {
            push(
                format!("[Y_1, Z_{}] = 0", k + 2),
                format!("[Y_1, Z_{}] = 0", k + 2),
                comm(y1, z),
                zero(),
            )?;
        }
    }
    for a in 0..zs.len() {
        for b in a + 1..zs.len() {
            push(
                format!("[Z_{}, Z_{}] = 0", a + 2, b + 2),
                format!("[Z_{}, Z_{}] = 0", a + 2, b + 2),
                comm(&zs[a], &zs[b]),
                zero(),
            )?;
        }
    }

    // so(d_p) structure constants within each block
    let l = |i: usize, j: usize| angular_momentum(dim, i, j);
    for p in 1..=n {
        let r = spec.partition.block_range(p);
        let pairs: Vec<(usize, usize)> = r
            .clone()
            .flat_map(|i| (i + 1..r.end).map(move |j| (i, j)))
            .collect();
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for &(k, m) in &pairs[a + 1..] {
                let rhs = OperatorExpr::sum([
                    l(i, m)?.scaled(levi(j, k)),
                    l(j, m)?.scaled(-levi(i, k)),
                    l(i, k)?.scaled(-levi(j, m)),
                    l(j, k)?.scaled(levi(i, m)),
                ]);
                let name = format!("[L_{},{}, L_{},{}]", i + 1, j + 1, k + 1, m + 1);
                push(
                    name.clone(),
                    format!("{name} = δ_jk L_il − δ_ik L_jl − δ_jl L_ik + δ_il L_jk"),
                    comm(&l(i, j)?, &l(k, m)?),
                    rhs,
                )?;
            }
        }
    }

    // rotations of the last block act on X̂ as on a vector
    for i in last.clone() {
        for j in i + 1..last.end {
            for (k, x) in &xs {
                let xi = &xs[i - last.start].1;
                let xj = &xs[j - last.start].1;
                let rhs = xi.scaled(levi(j, *k)) - xj.scaled(levi(i, *k));
                push(
                    format!("[L_{},{}, X_{}]", i + 1, j + 1, k + 1),
                    "[L_ij, X_k] = δ_jk X_i − δ_ik X_j".into(),
                    comm(&l(i, j)?, x),
                    rhs,
                )?;
            }
        }
    }
    for i in last.clone() {
        for j in i + 1..last.end {
            let xi = &xs[i - last.start].1;
            let xj = &xs[j - last.start].1;
            push(
                format!("[X_{}, X_{}] = -4 H L_{},{}", i + 1, j + 1, i + 1, j + 1),
                "[X_i, X_j] = −4 H L_ij".into(),
                comm(xi, xj),
                (h.clone() * l(i, j)?).scaled(-4.0),
            )?;
        }
    }
    Ok(out)
}

/// How the edge cases `Ẑ_1`, `𝒩_1`, `Ŷ_N` of the quadratic relations are
/// realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `Ẑ_1 = −α_1`, `𝒩_1 = 0`, `Ŷ_N = 0`, `ℳ_N = 0`.
    Verbatim,
    /// The defining formulas evaluated at the edges: `Ẑ_1 = L̂_1² − α_1`,
    /// `𝒩_1 = (d_1 − 1)(d_1 − 3)/4`, `Ŷ_N = L̂_N²`, `ℳ_N = 0`. Agrees with
    /// [`Boundary::Verbatim`] whenever `d_1 = d_N = 1`.
    Formula,
}

/// Which printed form of the `[Ŷ_p, Ĉ_p]` relation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpForm {
    /// The second line multiplies `(Ŷ_1 − ℳ_p)`.
    Verbatim,
    /// The second line multiplies `(Ŷ_p − ℳ_p)`, as in the all-singleton form.
    YpSubstituted,
}

/// Shifted generators entering the quadratic relations.
struct Shifted<'a> {
    spec: &'a ModelSpec,
    boundary: Boundary,
}

impl Shifted<'_> {
    /// `Ẑ_l − 𝒩_l`.
    fn z(&self, l: usize) -> Result<OperatorExpr> {
        let p = &self.spec.partition;
        if l == 1 && self.boundary == Boundary::Formula {
            return Ok(z_formula(self.spec, 1)? - OperatorExpr::constant(script_n_formula(p, 1)));
        }
        Ok(integral_z(self.spec, l)? - OperatorExpr::constant(script_n(p, l)))
    }

    /// `Ŷ_p − ℳ_p`.
    fn y(&self, q: usize) -> Result<OperatorExpr> {
        let n = self.spec.n_blocks();
        if q == n && self.boundary == Boundary::Formula {
            return y_formula(self.spec, n);
        }
        Ok(integral_y(self.spec, q)? - OperatorExpr::constant(script_m(&self.spec.partition, q)))
    }

    /// `c_p = −L̂_p² + α_p + (d_p − 1)(d_p − 3)/4` as an operator.
    fn c(&self, q: usize) -> Result<OperatorExpr> {
        let d = self.spec.partition.size(q) as f64;
        Ok(OperatorExpr::constant(self.spec.alpha(q) + (d - 1.0) * (d - 3.0) / 4.0)
            - model::block_casimir(self.spec, q)?)
    }
}

/// `k + 2 c` as an operator.
fn affine(k: f64, two_c: f64, c: &OperatorExpr) -> OperatorExpr {
    OperatorExpr::constant(k) + c.scaled(two_c)
}

/// Right-hand side of `[Ẑ_p, Ĉ_p]` with `K = N + d_N`.
fn qa2_terms(s: &Shifted, p: usize, exchange: bool) -> Result<Vec<Term>> {
    let k = (s.spec.n_blocks() + s.spec.partition.size(s.spec.n_blocks())) as f64;
    let pf = p as f64;
    let (mut a, mut b) = (s.z(p)?, s.y(p)?);
    if exchange {
        std::mem::swap(&mut a, &mut b);
    }
    let y1 = s.y(1)?;
    let zm = s.z(p - 1)?;
    let yn = s.y(p + 1)?;
    let c = s.c(p)?;
    Ok(vec![
        Term::new("-8 (Z_p-N_p)^2", a.squared().scaled(-8.0)),
        Term::new("-8 {Z_p-N_p, Y_p-M_p}", OperatorExpr::anticommutator(&a, &b).scaled(-8.0)),
        Term::new(
            "-4[(p-2)(N+d_N-1)-p^2+p+4+2c_p](Z_p-N_p)",
            affine((pf - 2.0) * (k - 1.0) - pf * pf + pf + 4.0, 2.0, &c).scaled(-4.0) * a.clone(),
        ),
        Term::new(
            "4(N+d_N-p)(N+d_N-p-4)(Y_p-M_p)",
            b.scaled(4.0 * (k - pf) * (k - pf - 4.0)),
        ),
        Term::new("8(Y_1-M_1+Z_{p-1}-N_{p-1})(Z_p-N_p)", (y1.clone() + zm.clone()).scaled(8.0) * a.clone()),
        Term::new(
            "-4[N+d_N-p-4+2c_p](Y_1-M_1)",
            affine(k - pf - 4.0, 2.0, &c).scaled(-4.0) * y1.clone(),
        ),
        Term::new(
            "-4[(N+d_N-p-1)(N+d_N-p-4)-2c_p](Z_{p-1}-N_{p-1})",
            affine((k - pf - 1.0) * (k - pf - 4.0), -2.0, &c).scaled(-4.0) * zm.clone(),
        ),
        Term::new("4(N+d_N-p)(N+d_N-5)c_p", c.scaled(4.0 * (k - pf) * (k - 5.0))),
        Term::new("4(p-1)(N+d_N-p)(Y_{p+1}-M_{p+1})", yn.scaled(4.0 * (pf - 1.0) * (k - pf))),
        Term::new("-8(Y_1-M_1)(Y_{p+1}-M_{p+1})", (y1 * yn.clone()).scaled(-8.0)),
        Term::new("8(Z_p-N_p)(Y_{p+1}-M_{p+1})", (a * yn.clone()).scaled(8.0)),
        Term::new("8(Z_{p-1}-N_{p-1})(Y_{p+1}-M_{p+1})", (zm * yn).scaled(8.0)),
    ])
}

/// Right-hand side of `[Ŷ_p, Ĉ_p]`.
fn qa3_terms(s: &Shifted, p: usize, form: CpForm, exchange: bool) -> Result<Vec<Term>> {
    let k = (s.spec.n_blocks() + s.spec.partition.size(s.spec.n_blocks())) as f64;
    let pf = p as f64;
    let (mut a, mut b) = (s.z(p)?, s.y(p)?);
    if exchange {
        std::mem::swap(&mut a, &mut b);
    }
    let y1 = s.y(1)?;
    let zm = s.z(p - 1)?;
    let yn = s.y(p + 1)?;
    let c = s.c(p)?;
    let (second, second_name) = match form {
        CpForm::Verbatim => (
            integral_y(s.spec, 1)? - OperatorExpr::constant(script_m(&s.spec.partition, p)),
            "(Y_1-M_p)",
        ),
        CpForm::YpSubstituted => (b.clone(), "(Y_p-M_p)"),
    };
    Ok(vec![
        Term::new("8 (Y_p-M_p)^2", b.squared().scaled(8.0)),
        Term::new("8 {Z_p-N_p, Y_p-M_p}", OperatorExpr::anticommutator(&a, &b).scaled(8.0)),
        Term::new("-4p(p-4)(Z_p-N_p)", a.scaled(-4.0 * pf * (pf - 4.0))),
        Term::new(
            format!("4[(p-2)(N+d_N-1)-p^2+p+4+2c_p]{second_name}"),
            affine((pf - 2.0) * (k - 1.0) - pf * pf + pf + 4.0, 2.0, &c).scaled(4.0) * second,
        ),
        Term::new("-8(Z_{p-1}-N_{p-1})(Y_p-M_p)", (zm.clone() * b.clone()).scaled(-8.0)),
        Term::new("-8(Y_1-M_1)(Y_p-M_p)", (y1.clone() * b.clone()).scaled(-8.0)),
        Term::new("4[p-4+2c_p](Y_1-M_1)", affine(pf - 4.0, 2.0, &c).scaled(4.0) * y1.clone()),
        Term::new("8(Z_{p-1}-N_{p-1})(Y_1-M_1)", (zm.clone() * y1).scaled(8.0)),
        Term::new("-4p(N+d_N-p-1)(Z_{p-1}-N_{p-1})", zm.scaled(-4.0 * pf * (k - pf - 1.0))),
        Term::new("-4p(N+d_N-5)c_p", c.scaled(-4.0 * pf * (k - 5.0))),
        Term::new(
            "4[(p-4)(p-1)-2c_p](Y_{p+1}-M_{p+1})",
            affine((pf - 4.0) * (pf - 1.0), -2.0, &c).scaled(4.0) * yn.clone(),
        ),
        Term::new("-8(Z_{p-1}-N_{p-1})(Y_{p+1}-M_{p+1})", (zm * yn.clone()).scaled(-8.0)),
        Term::new("-8(Y_{p+1}-M_{p+1})(Y_p-M_p)", (yn * b).scaled(-8.0)),
    ])
}

/// Right-hand side of `[Ŷ_1, Ŵ_j]`.
pub(super) fn qa1_line2(spec: &ModelSpec, j: usize) -> Result<Vec<Term>> {
    let d = spec.dim() as f64;
    let x = extended_lrl(spec, j)?;
    let y1 = integral_y(spec, 1)?;
    Ok(vec![
        Term::new("-2{Y_1, X_j}", OperatorExpr::anticommutator(&y1, &x).scaled(-2.0)),
        Term::new("(D-3)(D-1)X_j", x.scaled((d - 3.0) * (d - 1.0))),
    ])
}

/// Right-hand side of `[X̂_j, Ŵ_j]`. With `excluded` the `Ẑ_{N−1} − 𝒩_{N−1}`
/// factor is replaced by [`model::z_excluding`] minus its shift.
fn qa1_line3(s: &Shifted, j: usize, excluded: bool) -> Result<Vec<Term>> {
    let spec = s.spec;
    let n = spec.n_blocks();
    let k = (n + spec.partition.size(n)) as f64;
    let x = extended_lrl(spec, j)?;
    let h = hamiltonian(spec);
    let (z, z_name) = if excluded {
        (
            model::z_excluding(spec, j)? - OperatorExpr::constant(model::script_n_excluding(&spec.partition)),
            "-8 H (Z_(j)-N_(j))",
        )
    } else {
        (s.z(n - 1)?, "-8 H (Z_{N-1}-N_{N-1})")
    };
    Ok(vec![
        Term::new("2 X_j^2", x.squared().scaled(2.0)),
        Term::new(z_name, (h.clone() * z).scaled(-8.0)),
        Term::new("16 (Y_1-M_1) H", (s.y(1)? * h.clone()).scaled(16.0)),
        Term::new("-2(N+d_N-2)^2 H", h.scaled(-2.0 * (k - 2.0) * (k - 2.0))),
        Term::new("-2 eta^2", OperatorExpr::constant(-2.0 * spec.eta * spec.eta)),
    ])
}

/// All-singleton right-hand sides of `[Z_p, C_p]` and `[Y_p, C_p]` for
/// `D = N`, built from coordinate-wise integrals with `Z_1 = −α_1`, `Y_D = 0`.
fn singleton_terms(spec: &ModelSpec, p: usize) -> (Vec<Term>, Vec<Term>) {
    let dim = spec.dim();
    let df = dim as f64;
    let pf = p as f64;
    let al = &spec.alpha;
    let a = spec.alpha(p);
    let z = |l: usize| {
        if l == 1 {
            OperatorExpr::constant(-spec.alpha(1))
        } else {
            singleton::z(dim, al, l)
        }
    };
    let y = |q: usize| {
        if q == dim {
            OperatorExpr::zero()
        } else {
            singleton::y(dim, al, q)
        }
    };
    let (zp, yp, y1, zm, yn) = (z(p), y(p), y(1), z(p - 1), y(p + 1));
    let one = OperatorExpr::constant(1.0);
    let zc = vec![
        Term::new("-8 Z_p^2", zp.squared().scaled(-8.0)),
        Term::new("-8 {Z_p, Y_p}", OperatorExpr::anticommutator(&zp, &yp).scaled(-8.0)),
        Term::new(
            "-4((p-2)D-p^2+p+4+2a_p) Z_p",
            zp.scaled(-4.0 * ((pf - 2.0) * df - pf * pf + pf + 4.0 + 2.0 * a)),
        ),
        Term::new("4(D-p+1)(D-p-3) Y_p", yp.scaled(4.0 * (df - pf + 1.0) * (df - pf - 3.0))),
        Term::new("8(Y_1+Z_{p-1}) Z_p", ((y1.clone() + zm.clone()) * zp.clone()).scaled(8.0)),
        Term::new("-4(D-p-3+2a_p) Y_1", y1.scaled(-4.0 * (df - pf - 3.0 + 2.0 * a))),
        Term::new(
            "-4((D-p)(D-p-3)-2a_p) Z_{p-1}",
            zm.scaled(-4.0 * ((df - pf) * (df - pf - 3.0) - 2.0 * a)),
        ),
        Term::new("4(D-p+1)(D-4)a_p", one.scaled(4.0 * (df - pf + 1.0) * (df - 4.0) * a)),
        Term::new("4(p-1)(D-p+1) Y_{p+1}", yn.scaled(4.0 * (pf - 1.0) * (df - pf + 1.0))),
        Term::new("-8 Y_1 Y_{p+1}", (y1.clone() * yn.clone()).scaled(-8.0)),
        Term::new("8 Z_p Y_{p+1}", (zp.clone() * yn.clone()).scaled(8.0)),
        Term::new("8 Z_{p-1} Y_{p+1}", (zm.clone() * yn.clone()).scaled(8.0)),
    ];
    let yc = vec![
        Term::new("8 Y_p^2", yp.squared().scaled(8.0)),
        Term::new("8 {Z_p, Y_p}", OperatorExpr::anticommutator(&zp, &yp).scaled(8.0)),
        Term::new("-4p(p-4) Z_p", zp.scaled(-4.0 * pf * (pf - 4.0))),
        Term::new(
            "4((p-2)D-p^2+p+4+2a_p) Y_p",
            yp.scaled(4.0 * ((pf - 2.0) * df - pf * pf + pf + 4.0 + 2.0 * a)),
        ),
        Term::new("-8 Z_{p-1} Y_p", (zm.clone() * yp.clone()).scaled(-8.0)),
        Term::new("-8 Y_1 Y_p", (y1.clone() * yp.clone()).scaled(-8.0)),
        Term::new("4(p-4+2a_p) Y_1", y1.scaled(4.0 * (pf - 4.0 + 2.0 * a))),
        Term::new("8 Z_{p-1} Y_1", (zm.clone() * y1).scaled(8.0)),
        Term::new("-4p(D-p) Z_{p-1}", zm.scaled(-4.0 * pf * (df - pf))),
        Term::new("-4p(D-4)a_p", one.scaled(-4.0 * pf * (df - 4.0) * a)),
        Term::new(
            "4((p-4)(p-1)-2a_p) Y_{p+1}",
            yn.scaled(4.0 * ((pf - 4.0) * (pf - 1.0) - 2.0 * a)),
        ),
        Term::new("-8 Z_{p-1} Y_{p+1}", (zm * yn.clone()).scaled(-8.0)),
        Term::new("-8 Y_{p+1} Y_p", (yn * yp).scaled(-8.0)),
    ];
    (zc, yc)
}

/// Variant tag of a form printed in the general relations.
pub const VARIANT_VERBATIM: &str = "verbatim";
/// Variant tag of the `[Ŷ_p, Ĉ_p]` form with `(Ŷ_1 − ℳ_p)` replaced by `(Ŷ_p − ℳ_p)`.
pub const VARIANT_YP_SUBSTITUTED: &str = "Y_1-M_p -> Y_p-M_p";
/// Variant tag of the corrected `[Ẑ_p, Ĉ_p]`, `[Ŷ_p, Ĉ_p]` forms: the
/// negated right-hand side of the other relation with `Ẑ_p − 𝒩_p` and
/// `Ŷ_p − ℳ_p` exchanged, edges from the defining formulas.
pub const VARIANT_EXCHANGED: &str = "exchanged Z_p-N_p <-> Y_p-M_p, edge formulas";
/// Variant tag of the corrected `[X̂_j, Ŵ_j]` form using [`model::z_excluding`].
pub const VARIANT_EXCLUDED: &str = "Z_{N-1} -> Z_(j), excluded coordinate";
/// Variant tag of the all-singleton relations evaluated as identities.
pub const VARIANT_SINGLETON: &str = "all-singleton form";

/// Whether a variant is the printed relation or its single documented
/// substitution.
pub fn is_printed_variant(variant: Option<&str>) -> bool {
    matches!(variant, Some(VARIANT_VERBATIM) | Some(VARIANT_YP_SUBSTITUTED))
}

/// One relation evaluated in several forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub formula: String,
    /// Pass when any form passes, skipped when every form is skipped.
    pub verdict: Verdict,
    /// Tag of the first passing form.
    pub variant: Option<String>,
    pub forms: Vec<IdentityReport>,
}

impl RelationReport {
    fn new(relation: String, formula: &str, forms: Vec<IdentityReport>) -> Self {
        let passing = forms.iter().find(|f| f.passed());
        let verdict = if passing.is_some() {
            Verdict::Pass
        } else if forms.iter().all(|f| f.verdict == Verdict::Skipped) {
            Verdict::Skipped
        } else {
            Verdict::Fail
        };
        RelationReport {
            relation,
            formula: formula.to_string(),
            verdict,
            variant: passing.and_then(|f| f.variant.clone()),
            forms,
        }
    }

    fn skipped(relation: &str, formula: &str, reason: &str) -> Self {
        Self::new(
            relation.to_string(),
            formula,
            vec![IdentityReport::skipped(relation, formula, reason)],
        )
    }

    /// The form carrying `variant`, if it was evaluated.
    pub fn form(&self, variant: &str) -> Option<&IdentityReport> {
        self.forms.iter().find(|f| f.variant.as_deref() == Some(variant))
    }
}

const QA1_Y_FORMULA: &str = "[Y_1, W_j] = -2{Y_1, X_j} + (D-3)(D-1) X_j";
const QA1_X_FORMULA: &str =
    "[X_j, W_j] = 2X_j^2 - 8H(Z_{N-1}-N_{N-1}) + 16(Y_1-M_1)H - 2(N+d_N-2)^2 H - 2eta^2";
const QA2_FORMULA: &str = "[Z_p, C_p] = quadratic polynomial in Z_p-N_p, Y_p-M_p, Y_1-M_1, Z_{p-1}-N_{p-1}, Y_{p+1}-M_{p+1}, c_p";
const QA3_FORMULA: &str = "[Y_p, C_p] = quadratic polynomial in Z_p-N_p, Y_p-M_p, Y_1-M_1, Z_{p-1}-N_{p-1}, Y_{p+1}-M_{p+1}, c_p";

fn negated(terms: Vec<Term>) -> Vec<Term> {
    terms
        .into_iter()
        .map(|t| Term::new(format!("-({})", t.name), -t.op))
        .collect()
}

fn tagged(reports: Vec<IdentityReport>, tags: &[&str], formula: &str, spec: &ModelSpec) -> Vec<IdentityReport> {
    reports
        .into_iter()
        .zip(tags)
        .map(|(r, t)| r.with_variant(*t).with_formula(formula).with_spec(spec))
        .collect()
}

/// The quadratic relations `[Ŷ_1, Ŵ_j]`, `[X̂_j, Ŵ_j]`, `[Ẑ_p, Ĉ_p]`,
/// `[Ŷ_p, Ĉ_p]`, each evaluated as printed (with `Ẑ_1 = −α_1`, `Ŷ_N = 0`),
/// in the documented substitution variant where one applies, and in the
/// corrected forms.
pub fn suite_quadratic(spec: &ModelSpec, cfg: &SampleConfig) -> Result<Vec<RelationReport>> {
    let n = spec.n_blocks();
    let dim = spec.dim();
    let printed = Shifted {
        spec,
        boundary: Boundary::Verbatim,
    };
    let edges = Shifted {
        spec,
        boundary: Boundary::Formula,
    };
    let mut out = Vec::new();
    if n < 2 {
        out.push(RelationReport::skipped("qa1 [Y_1, W_j]", QA1_Y_FORMULA, "requires_two_blocks"));
        out.push(RelationReport::skipped("qa1 [X_j, W_j]", QA1_X_FORMULA, "requires_two_blocks"));
    } else {
        let y1 = integral_y(spec, 1)?;
        for j in spec.last_block() {
            let x = extended_lrl(spec, j)?;
            let w = comm(&y1, &x);
            let name = format!("qa1 [Y_1, W_{}]", j + 1);
            let line2 = qa1_line2(spec, j)?;
            let forms = check_term_sets(&name, &comm(&y1, &w), &[&line2], dim, cfg)?;
            out.push(RelationReport::new(
                name,
                QA1_Y_FORMULA,
                tagged(forms, &[VARIANT_VERBATIM], QA1_Y_FORMULA, spec),
            ));

            let name = format!("qa1 [X_{}, W_{}]", j + 1, j + 1);
            let verbatim = qa1_line3(&printed, j, false)?;
            let excluded = qa1_line3(&printed, j, true)?;
            let forms = check_term_sets(&name, &comm(&x, &w), &[&verbatim, &excluded], dim, cfg)?;
            out.push(RelationReport::new(
                name,
                QA1_X_FORMULA,
                tagged(forms, &[VARIANT_VERBATIM, VARIANT_EXCLUDED], QA1_X_FORMULA, spec),
            ));
        }
    }
    if n < 3 {
        out.push(RelationReport::skipped("qa2 [Z_p, C_p]", QA2_FORMULA, "requires_three_blocks"));
        out.push(RelationReport::skipped("qa3 [Y_p, C_p]", QA3_FORMULA, "requires_three_blocks"));
        return Ok(out);
    }
    let singletons = spec.partition.is_all_singletons();
    for p in 2..n {
        let z = integral_z(spec, p)?;
        let y = integral_y(spec, p)?;
        let c = comm(&z, &y);
        let old = singletons.then(|| singleton_terms(spec, p));

        let name = format!("qa2 [Z_{p}, C_{p}]");
        let mut sets = vec![
            qa2_terms(&printed, p, false)?,
            negated(qa3_terms(&edges, p, CpForm::YpSubstituted, true)?),
        ];
        let mut tags = vec![VARIANT_VERBATIM, VARIANT_EXCHANGED];
        if let Some((zc, _)) = &old {
            sets.push(zc.clone());
            tags.push(VARIANT_SINGLETON);
        }
        let refs: Vec<&[Term]> = sets.iter().map(Vec::as_slice).collect();
        let forms = check_term_sets(&name, &comm(&z, &c), &refs, dim, cfg)?;
        out.push(RelationReport::new(name, QA2_FORMULA, tagged(forms, &tags, QA2_FORMULA, spec)));

        let name = format!("qa3 [Y_{p}, C_{p}]");
        let mut sets = vec![
            qa3_terms(&printed, p, CpForm::Verbatim, false)?,
            qa3_terms(&printed, p, CpForm::YpSubstituted, false)?,
            negated(qa2_terms(&edges, p, true)?),
        ];
        let mut tags = vec![VARIANT_VERBATIM, VARIANT_YP_SUBSTITUTED, VARIANT_EXCHANGED];
        if let Some((_, yc)) = old {
            sets.push(yc);
            tags.push(VARIANT_SINGLETON);
        }
        let refs: Vec<&[Term]> = sets.iter().map(Vec::as_slice).collect();
        let forms = check_term_sets(&name, &comm(&y, &c), &refs, dim, cfg)?;
        out.push(RelationReport::new(name, QA3_FORMULA, tagged(forms, &tags, QA3_FORMULA, spec)));
    }
    Ok(out)
}

/// Term-by-term comparison, for an all-singleton partition, of the general
/// `[Ẑ_p, Ĉ_p]` and `[Ŷ_p, Ĉ_p]` right-hand sides (`𝒩 = ℳ = 0`,
/// `c_p = α_p`) with the all-singleton forms built from coordinate-wise
/// integrals. Each report's residuals are the per-term maxima; the reason
/// lists the mismatching terms.
pub fn singleton_cross_check(spec: &ModelSpec, cfg: &SampleConfig) -> Result<Vec<IdentityReport>> {
    let n = spec.n_blocks();
    if !spec.partition.is_all_singletons() || n < 3 {
        return Ok(vec![IdentityReport::skipped(
            "all-singleton termwise cross-check",
            "general right-hand sides vs all-singleton forms",
            "requires_all_singleton_partition_with_three_blocks",
        )]);
    }
    let dim = spec.dim();
    let s = Shifted {
        spec,
        boundary: Boundary::Verbatim,
    };
    let mut out = Vec::new();
    for p in 2..n {
        let (zc, yc) = singleton_terms(spec, p);
        let cases = [
            (format!("qa2 termwise p={p}"), qa2_terms(&s, p, false)?, zc, VARIANT_VERBATIM),
            (
                format!("qa3 termwise p={p}"),
                qa3_terms(&s, p, CpForm::Verbatim, false)?,
                yc.clone(),
                VARIANT_VERBATIM,
            ),
            (
                format!("qa3 termwise p={p}"),
                qa3_terms(&s, p, CpForm::YpSubstituted, false)?,
                yc,
                VARIANT_YP_SUBSTITUTED,
            ),
        ];
        for (name, general, old, variant) in cases {
            let mut residuals = Vec::new();
            let mut bad = Vec::new();
            for (g, o) in general.iter().zip(&old) {
                let r = check_identity(&g.name, &g.op, &o.op, dim, cfg)?;
                if !r.passed() {
                    bad.push(format!("{} vs {}", g.name, o.name));
                }
                residuals.push(r.max_residual);
            }
            let max_residual = worst(&residuals);
            out.push(IdentityReport {
                name,
                formula: "general right-hand side = all-singleton right-hand side, term by term".into(),
                verdict: if max_residual <= cfg.tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
                max_residual,
                tolerance: cfg.tolerance,
                residuals,
                variant: Some(variant.to_string()),
                seed: cfg.seed,
                spec: Some(spec.clone()),
                reason: (!bad.is_empty()).then(|| format!("mismatching terms: {}", bad.join("; "))),
                terms: Vec::new(),
            });
        }
    }
    Ok(out)
}

/// Gauge identity for `Ẑ_p` and `Ŷ_p` in the radial representation, with
/// block Casimirs replaced by `−l_i(l_i + d_i − 2)`.
pub fn check_gauge_identity(
    spec: &ModelSpec,
    p: usize,
    l: &[usize],
    cfg: &SampleConfig,
) -> Result<Vec<IdentityReport>> {
    let n = spec.n_blocks();
    if p < 2 || p + 1 > n {
        return Err(Error::IndexOutOfRange {
            what: "gauge block",
            index: p,
            bound: n.saturating_sub(1),
        });
    }
    if l.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l.len(),
        });
    }
    let cfg = SampleConfig {
        positive: true,
        ..cfg.clone()
    };
    let dim = radial::dim(spec);
    let z = radial::conjugate(spec, &radial::z(spec, l, p));
    let y = radial::conjugate(spec, &radial::y(spec, l, p));
    Ok(vec![
        check_identity(&format!("gauge Z_{p}"), &z, &radial::z_target(spec, l, p)?, dim, &cfg)?
            .with_formula("G Z_p G^-1 = S_{1,p}(c_1..c_p) + N_p")
            .with_spec(spec),
        check_identity(&format!("gauge Y_{p}"), &y, &radial::y_target(spec, l, p)?, dim, &cfg)?
            .with_formula("G Y_p G^-1 = S_{p,N+d_N-1}(c_p..c_{N-1},0..0) + M_p")
            .with_spec(spec),
    ])
}

/// `(Ĥ − E)Ψ` at `cfg.n_samples` random points with the closed-form `E`.
pub fn suite_eigen_residual(
    spec: &ModelSpec,
    qn: &spectral::QuantumNumbers,
    cfg: &SampleConfig,
) -> Result<IdentityReport> {
    let energy = spectral::spectral_data(spec, qn)?.energy;
    check_eigen_residual(spec, qn, energy, cfg)
}

/// `(Ĥ − energy)Ψ` at `cfg.n_samples` random points. Each point's residual
/// is `|ĤΨ − EΨ|` divided by the largest `|ĤΨ|` over all points, so nodes of
/// `Ψ` do not inflate it.
pub fn check_eigen_residual(
    spec: &ModelSpec,
    qn: &spectral::QuantumNumbers,
    energy: f64,
    cfg: &SampleConfig,
) -> Result<IdentityReport> {
    cfg.validate(0)?;
    let h = hamiltonian(spec);
    let dim = spec.dim();
    let values = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = cfg.rng(i);
            for _ in 0..ATTEMPTS_PER_SAMPLE {
                let point: Arc<[f64]> = cfg.draw_point(&mut rng, dim).into();
                let psi = match spectral::wavefunction_jet(spec, qn, point.clone(), 2, cfg.eps_sing) {
                    Ok(j) => j,
                    Err(Error::SingularPoint { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let hpsi = match Evaluator::new(point, cfg.eps_sing).apply(&h, &psi) {
                    Ok(j) => *j.value(),
                    Err(Error::SingularPoint { .. }) => continue,
                    Err(e) => return Err(e),
                };
                return Ok((hpsi, hpsi - energy * psi.value()));
            }
            Err(Error::NoAdmissiblePoint(ATTEMPTS_PER_SAMPLE))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = values.iter().map(|v| v.0.abs()).fold(0.0, f64::max);
    let residuals: Vec<f64> = values
        .iter()
        .map(|v| if scale > 0.0 { v.1.abs() / scale } else { v.1.abs() })
        .collect();
    let max_residual = worst(&residuals);
    Ok(IdentityReport {
        name: format!("eigenfunction n_r={} J={:?} l={:?}", qn.n_r, qn.j, qn.l),
        formula: "H Psi = E Psi".into(),
        verdict: if max_residual <= cfg.tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        max_residual,
        tolerance: cfg.tolerance,
        residuals,
        variant: None,
        seed: cfg.seed,
        spec: Some(spec.clone()),
        reason: None,
        terms: Vec::new(),
    })
}
