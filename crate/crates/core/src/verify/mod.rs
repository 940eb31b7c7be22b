//! Sampled checking of operator identities.
//!
//! An identity `lhs = Σ terms` is checked by applying both sides to random
//! polynomial test functions at random base points and comparing the value
//! coefficients of the resulting jets. Each sample derives its own random
//! stream from `(seed, index)`, so results do not depend on scheduling.

mod mutations;
mod suites;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{make_jet, Polynomial};
use crate::model::ModelSpec;
use crate::operators::{Evaluator, OperatorExpr, EPS_SING};
use crate::scalar::Scalar;

pub use mutations::*;
pub use suites::*;

/// Default tolerance for the quadratic-algebra suites.
pub const QUADRATIC_TOLERANCE: f64 = 1e-7;
/// Default tolerance for every other suite.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

const ATTEMPTS_PER_SAMPLE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleConfig {
    pub n_samples: usize,
    /// Degree of the random test polynomials.
    pub degree: usize,
    /// Coordinates are drawn with `|x| ∈ [lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    /// Draw only positive coordinates (radial representations).
    pub positive: bool,
    pub eps_sing: f64,
    pub jet_order: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Compare every output coefficient instead of only the value.
    pub full_jet: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n_samples: 32,
            degree: 8,
            lo: 0.5,
            hi: 2.0,
            positive: false,
            eps_sing: EPS_SING,
            jet_order: 8,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            full_jet: false,
        }
    }
}

impl SampleConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Sets jet order and test-polynomial degree together.
    pub fn with_order(mut self, order: usize) -> Self {
        self.jet_order = order;
        self.degree = order;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn validate(&self, needed_order: usize) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("at least one sample is required".into()));
        }
        if self.degree < self.jet_order {
            return Err(Error::InvalidParameter(format!(
                "test degree {} is below jet order {}",
                self.degree, self.jet_order
            )));
        }
        if self.jet_order < needed_order {
            return Err(Error::InsufficientOrder {
                needed: needed_order,
                available: self.jet_order,
            });
        }
        if !(self.lo >= self.eps_sing && self.hi > self.lo) {
            return Err(Error::InvalidParameter(format!(
                "sampling range [{}, {}] must satisfy eps_sing ≤ lo < hi",
                self.lo, self.hi
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    fn draw_point(&self, rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        (0..dim)
            .map(|_| {
                let m = rng.gen_range(self.lo..=self.hi);
                if self.positive || rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// Diagnostic for one right-hand-side term: its largest normalized size and
/// the least-squares multiplier that would best explain the left-hand side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermBreakdown {
    pub term: String,
    pub max_abs: f64,
    pub fitted_multiplier: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub formula: String,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: f64,
    pub residuals: Vec<f64>,
    pub variant: Option<String>,
    pub seed: u64,
    pub spec: Option<ModelSpec>,
    pub reason: Option<String>,
    pub terms: Vec<TermBreakdown>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn skipped(name: impl Into<String>, formula: impl Into<String>, reason: impl Into<String>) -> Self {
        IdentityReport {
            name: name.into(),
            formula: formula.into(),
            verdict: Verdict::Skipped,
            max_residual: 0.0,
            tolerance: 0.0,
            residuals: Vec::new(),
            variant: None,
            seed: 0,
            spec: None,
            reason: Some(reason.into()),
            terms: Vec::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_formula(mut self, formula: impl Into<String>) -> Self {
        self.formula = formula.into();
        self
    }

    pub fn with_spec(mut self, spec: &ModelSpec) -> Self {
        self.spec = Some(spec.clone());
        self
    }

    pub fn with_variant(mut self, variant: impl Into<String>) -> Self {
        self.variant = Some(variant.into());
        self
    }
}

/// A named summand of an identity's right-hand side.
#[derive(Clone, Debug)]
pub struct Term {
    pub name: String,
    pub op: OperatorExpr,
}

impl Term {
    pub fn new(name: impl Into<String>, op: OperatorExpr) -> Self {
        Term {
            name: name.into(),
            op,
        }
    }
}

/// Per-sample values: left-hand side followed by every right-hand term.
struct SampleValues {
    lhs: Vec<f64>,
    terms: Vec<Vec<f64>>,
    residual: f64,
}

fn sample_once<S: Scalar>(
    lhs: &OperatorExpr,
    sets: &[&[Term]],
    dim: usize,
    cfg: &SampleConfig,
    index: usize,
) -> Result<Vec<SampleValues>> {
    let mut rng = cfg.rng(index);
    for _ in 0..ATTEMPTS_PER_SAMPLE {
        let point = cfg.draw_point(&mut rng, dim);
        let f = Polynomial::random(dim, cfg.degree, &mut rng);
        let base: Arc<[S]> = point.iter().map(|&x| S::from_f64(x)).collect();
        match evaluate_at::<S>(lhs, sets, &f, base, cfg) {
            Ok(v) => return Ok(v),
            Err(Error::SingularPoint { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoAdmissiblePoint(ATTEMPTS_PER_SAMPLE))
}

fn evaluate_at<S: Scalar>(
    lhs: &OperatorExpr,
    sets: &[&[Term]],
    f: &Polynomial,
    base: Arc<[S]>,
    cfg: &SampleConfig,
) -> Result<Vec<SampleValues>> {
    let jet = make_jet(f, base.clone(), cfg.jet_order)?;
    let mut ev = Evaluator::new(base, cfg.eps_sing);
    let l = ev.apply(lhs, &jet)?;
    let mut out = Vec::with_capacity(sets.len());
    for terms in sets {
        let t = terms
            .iter()
            .map(|t| ev.apply(&t.op, &jet))
            .collect::<Result<Vec<_>>>()?;
        let order = t.iter().map(|j| j.order()).fold(l.order(), usize::min);
        let n = if cfg.full_jet {
            l.layout().count_up_to(order)
        } else {
            1
        };
        let mut residual: f64 = 0.0;
        for k in 0..n {
            let lv = l.coeffs()[k].clone();
            let mut rv = S::zero();
            for j in &t {
                rv = rv + j.coeffs()[k].clone();
            }
            let diff = (lv.clone() - rv.clone()).to_f64().abs();
            let scale = 1.0 + lv.to_f64().abs().max(rv.to_f64().abs());
            residual = residual.max(diff / scale);
        }
        out.push(SampleValues {
            lhs: l.coeffs()[..n].iter().map(Scalar::to_f64).collect(),
            terms: t.iter().map(|j| j.coeffs()[..n].iter().map(Scalar::to_f64).collect()).collect(),
            residual,
        });
    }
    Ok(out)
}

fn check_generic<S: Scalar>(
    name: &str,
    lhs: &OperatorExpr,
    sets: &[&[Term]],
    dim: usize,
    cfg: &SampleConfig,
) -> Result<Vec<IdentityReport>> {
    let all_terms = || sets.iter().flat_map(|s| s.iter());
    let needed = all_terms()
        .map(|t| t.op.derivative_order())
        .chain([lhs.derivative_order()])
        .max()
        .unwrap_or(0);
    cfg.validate(needed)?;
    let vars = all_terms()
        .filter_map(|t| t.op.max_variable())
        .chain(lhs.max_variable())
        .max()
        .map_or(0, |m| m + 1);
    if vars > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: vars,
        });
    }
    let samples = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| sample_once::<S>(lhs, sets, dim, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(sets
        .iter()
        .enumerate()
        .map(|(k, terms)| {
            let per_set: Vec<&SampleValues> = samples.iter().map(|s| &s[k]).collect();
            let residuals: Vec<f64> = per_set.iter().map(|s| s.residual).collect();
            let max_residual = worst(&residuals);
            let passed = max_residual <= cfg.tolerance;
            let breakdown = if passed || terms.is_empty() {
                Vec::new()
            } else {
                term_breakdown(terms, &per_set)
            };
            IdentityReport {
                name: name.to_string(),
                formula: String::new(),
                verdict: if passed { Verdict::Pass } else { Verdict::Fail },
                max_residual,
                tolerance: cfg.tolerance,
                residuals,
                variant: None,
                seed: cfg.seed,
                spec: None,
                reason: None,
                terms: breakdown,
            }
        })
        .collect())
}

/// Largest residual; NaN if any residual is NaN, so such a check cannot pass.
pub(crate) fn worst(residuals: &[f64]) -> f64 {
    residuals
        .iter()
        .fold(0.0, |m: f64, &r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) })
}

/// Least-squares multipliers `m_k` minimizing `Σ_samples (lhs − Σ m_k t_k)²`,
/// each row normalized by the sample's magnitude. A correct term has `m_k ≈ 1`.
fn term_breakdown(terms: &[Term], samples: &[&SampleValues]) -> Vec<TermBreakdown> {
    let rows: Vec<(f64, Vec<f64>, f64)> = samples
        .iter()
        .flat_map(|s| {
            (0..s.lhs.len()).map(move |k| {
                let t: Vec<f64> = s.terms.iter().map(|v| v[k]).collect();
                let scale = 1.0 + s.lhs[k].abs().max(t.iter().sum::<f64>().abs());
                (s.lhs[k], t, scale)
            })
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), terms.len(), |i, j| rows[i].1[j] / rows[i].2);
    let b = DVector::from_fn(rows.len(), |i, _| rows[i].0 / rows[i].2);
    let fitted = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map(|x| x.iter().cloned().collect::<Vec<_>>())
        .unwrap_or_else(|_| vec![f64::NAN; terms.len()]);
    terms
        .iter()
        .enumerate()
        .map(|(j, t)| TermBreakdown {
            term: t.name.clone(),
            max_abs: (0..rows.len()).map(|i| a[(i, j)].abs()).fold(0.0, f64::max),
            fitted_multiplier: fitted[j],
        })
        .collect()
}

/// Checks `lhs = Σ terms` in `dim` variables with `f64` jets.
pub fn check_terms(
    name: &str,
    lhs: &OperatorExpr,
    terms: &[Term],
    dim: usize,
    cfg: &SampleConfig,
) -> Result<IdentityReport> {
    Ok(check_generic::<f64>(name, lhs, &[terms], dim, cfg)?.remove(0))
}

/// Checks several candidate right-hand sides against one left-hand side,
/// sharing the left-hand evaluation; one report per candidate, in order.
pub fn check_term_sets(
    name: &str,
    lhs: &OperatorExpr,
    sets: &[&[Term]],
    dim: usize,
    cfg: &SampleConfig,
) -> Result<Vec<IdentityReport>> {
    check_generic::<f64>(name, lhs, sets, dim, cfg)
}

/// Checks `lhs = rhs` in `dim` variables with `f64` jets.
pub fn check_identity(
    name: &str,
    lhs: &OperatorExpr,
    rhs: &OperatorExpr,
    dim: usize,
    cfg: &SampleConfig,
) -> Result<IdentityReport> {
    check_terms(name, lhs, &[Term::new("rhs", rhs.clone())], dim, cfg)
}

/// Exact-arithmetic check over the rationals; only operators with polynomial
/// coefficients (integer powers of coordinates) can be evaluated.
pub fn check_identity_exact(
    name: &str,
    lhs: &OperatorExpr,
    rhs: &OperatorExpr,
    dim: usize,
    cfg: &SampleConfig,
) -> Result<IdentityReport> {
    let rhs = [Term::new("rhs", rhs.clone())];
    Ok(check_generic::<BigRational>(name, lhs, &[&rhs], dim, cfg)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_commutator_is_exactly_identity() {
        let lhs = OperatorExpr::commutator(&OperatorExpr::partial(0), &OperatorExpr::coordinate(0));
        let cfg = SampleConfig::default().with_order(4).with_samples(8);
        let r = check_identity_exact("[d1, x1]", &lhs, &OperatorExpr::constant(1.0), 2, &cfg).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn non_conserved_quantity_fails() {
        let h = crate::model::hydrogen_hamiltonian(3, 1.0);
        let lhs = OperatorExpr::commutator(&h, &OperatorExpr::coordinate(0));
        let r = check_identity("[H, x1]", &lhs, &OperatorExpr::zero(), 3, &SampleConfig::default()).unwrap();
        assert!(!r.passed());
        assert!(r.max_residual > 1e-2);
    }

    #[test]
    fn config_validation() {
        let cfg = SampleConfig {
            degree: 4,
            ..SampleConfig::default()
        };
        assert!(cfg.validate(2).is_err());
        let cfg = SampleConfig::default().with_order(2);
        assert!(matches!(cfg.validate(4), Err(Error::InsufficientOrder { .. })));
        let cfg = SampleConfig {
            lo: 1e-4,
            ..SampleConfig::default()
        };
        assert!(cfg.validate(2).is_err());
    }

    #[test]
    fn fitted_multipliers_recover_scaling() {
        // x ∂ + ∂ x = 2 x ∂ + 1; print the constant with the wrong weight.
        let lhs = OperatorExpr::anticommutator(&OperatorExpr::coordinate(0), &OperatorExpr::partial(0));
        let terms = [
            Term::new("2 x d", (OperatorExpr::coordinate(0) * OperatorExpr::partial(0)).scaled(2.0)),
            Term::new("1", OperatorExpr::constant(2.0)),
        ];
        let r = check_terms("anti", &lhs, &terms, 1, &SampleConfig::default().with_order(3)).unwrap();
        assert!(!r.passed());
        assert!((r.terms[0].fitted_multiplier - 1.0).abs() < 1e-8);
        assert!((r.terms[1].fitted_multiplier - 0.5).abs() < 1e-8);
    }
}
