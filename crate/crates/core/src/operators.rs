//! Linear differential operators as expression trees, and their action on
//! jets.
//!
//! Leaves are `∂/∂x_i`, multiplication by a catalog coefficient function, and
//! the identity. Commutators and anticommutators stay as tree nodes and are
//! realized only when the operator is applied, so no symbolic expansion is
//! ever performed. The convention is `p_i = ∂/∂x_i` with no imaginary unit.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{make_jet, Jet, Polynomial};
use crate::scalar::Scalar;

/// Default singularity guard for radii and inverse coordinates.
pub const EPS_SING: f64 = 1e-3;

/// Half-integer exponent, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(i32);

impl Exponent {
    pub const fn int(k: i32) -> Self {
        Exponent(2 * k)
    }

    pub const fn halves(h: i32) -> Self {
        Exponent(h)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    fn is_nonneg_int(self) -> bool {
        self.0 >= 0 && self.0 % 2 == 0
    }
}

/// One multiplicative factor of a coefficient function.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// `x_i^e`.
    Coordinate { index: usize, exponent: Exponent },
    /// `ρ^e` with `ρ = sqrt(Σ_{k ∈ start..end} x_k²)`.
    Radius {
        start: usize,
        end: usize,
        exponent: Exponent,
    },
}

impl Factor {
    fn max_variable(&self) -> usize {
        match *self {
            Factor::Coordinate { index, .. } => index,
            Factor::Radius { end, .. } => end.saturating_sub(1),
        }
    }

    fn jet<S: Scalar>(&self, base: &Arc<[S]>, order: usize, eps: f64) -> Result<Jet<S>> {
        match *self {
            Factor::Coordinate { index, exponent } => {
                let x = Jet::variable(base.clone(), order, index)?;
                if exponent == Exponent::int(1) {
                    return Ok(x);
                }
                if !exponent.is_nonneg_int() {
                    let v = base[index].to_f64();
                    if v.abs() < eps || (exponent.0 % 2 != 0 && v <= 0.0) {
                        return Err(Error::SingularPoint {
                            what: format!("x_{}", index + 1),
                            value: v,
                        });
                    }
                }
                x.pow_ratio(exponent.0, 2)
            }
            Factor::Radius {
                start,
                end,
                exponent,
            } => {
                if start >= end || end > base.len() {
                    return Err(Error::IndexOutOfRange {
                        what: "radius block end",
                        index: end,
                        bound: base.len(),
                    });
                }
                let mut sq = Jet::zero(base.clone(), order)?;
                for k in start..end {
                    sq = sq.add_unchecked(&Jet::variable(base.clone(), order, k)?.mul_coordinate(k));
                }
                let radius = sq.value().to_f64().sqrt();
                if radius < eps {
                    return Err(Error::SingularPoint {
                        what: format!("radius over x_{}..x_{}", start + 1, end),
                        value: radius,
                    });
                }
                // ρ^e = (ρ²)^{e/2}
                sq.pow_ratio(exponent.0, 4)
            }
        }
    }
}

/// Coefficient function: a scaled product of catalog factors.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffFn {
    pub scale: f64,
    pub factors: Vec<Factor>,
}

impl CoeffFn {
    pub fn constant(c: f64) -> Self {
        CoeffFn {
            scale: c,
            factors: Vec::new(),
        }
    }

    pub fn coordinate(i: usize) -> Self {
        Self::coordinate_power(i, Exponent::int(1))
    }

    pub fn coordinate_power(i: usize, exponent: Exponent) -> Self {
        CoeffFn {
            scale: 1.0,
            factors: vec![Factor::Coordinate { index: i, exponent }],
        }
    }

    /// `ρ^e` over the coordinate range `start..end`.
    pub fn radius_power(start: usize, end: usize, exponent: Exponent) -> Self {
        CoeffFn {
            scale: 1.0,
            factors: vec![Factor::Radius {
                start,
                end,
                exponent,
            }],
        }
    }

    pub fn times(mut self, other: CoeffFn) -> Self {
        self.scale *= other.scale;
        self.factors.extend(other.factors);
        self.factors.sort();
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    fn max_variable(&self) -> Option<usize> {
        self.factors.iter().map(Factor::max_variable).max()
    }
}

/// Jet of a coefficient function at `base`.
pub fn coeff_jet<S: Scalar>(c: &CoeffFn, base: Arc<[S]>, order: usize, eps: f64) -> Result<Jet<S>> {
    let mut acc = Jet::constant(base.clone(), order, S::from_f64(c.scale))?;
    for f in &c.factors {
        acc = acc.mul_unchecked(&f.jet(&base, order, eps)?);
    }
    Ok(acc)
}

/// Expression tree for a linear differential operator.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr {
    Identity,
    Partial(usize),
    MultiplyBy(CoeffFn),
    Sum(Vec<OperatorExpr>),
    Scale(f64, Arc<OperatorExpr>),
    Compose(Arc<OperatorExpr>, Arc<OperatorExpr>),
    Commutator(Arc<OperatorExpr>, Arc<OperatorExpr>),
    Anticommutator(Arc<OperatorExpr>, Arc<OperatorExpr>),
}

impl OperatorExpr {
    pub fn zero() -> Self {
        OperatorExpr::Sum(Vec::new())
    }

    pub fn partial(i: usize) -> Self {
        OperatorExpr::Partial(i)
    }

    pub fn mul_by(c: CoeffFn) -> Self {
        OperatorExpr::MultiplyBy(c)
    }

    pub fn constant(c: f64) -> Self {
        OperatorExpr::MultiplyBy(CoeffFn::constant(c))
    }

    pub fn coordinate(i: usize) -> Self {
        OperatorExpr::MultiplyBy(CoeffFn::coordinate(i))
    }

    pub fn sum<I: IntoIterator<Item = OperatorExpr>>(terms: I) -> Self {
        let mut out = Vec::new();
        for t in terms {
            match t {
                OperatorExpr::Sum(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        OperatorExpr::Sum(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        OperatorExpr::Scale(c, Arc::new(self.clone()))
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &OperatorExpr) -> Self {
        OperatorExpr::Compose(Arc::new(self.clone()), Arc::new(other.clone()))
    }

    pub fn squared(&self) -> Self {
        self.compose(self)
    }

    pub fn commutator(a: &OperatorExpr, b: &OperatorExpr) -> Self {
        OperatorExpr::Commutator(Arc::new(a.clone()), Arc::new(b.clone()))
    }

    pub fn anticommutator(a: &OperatorExpr, b: &OperatorExpr) -> Self {
        OperatorExpr::Anticommutator(Arc::new(a.clone()), Arc::new(b.clone()))
    }

    /// Structural upper bound on the differential order.
    pub fn derivative_order(&self) -> usize {
        match self {
            OperatorExpr::Identity | OperatorExpr::MultiplyBy(_) => 0,
            OperatorExpr::Partial(_) => 1,
            OperatorExpr::Sum(terms) => terms.iter().map(Self::derivative_order).max().unwrap_or(0),
            OperatorExpr::Scale(_, a) => a.derivative_order(),
            OperatorExpr::Compose(a, b)
            | OperatorExpr::Commutator(a, b)
            | OperatorExpr::Anticommutator(a, b) => a.derivative_order() + b.derivative_order(),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            OperatorExpr::Identity => None,
            OperatorExpr::Partial(i) => Some(*i),
            OperatorExpr::MultiplyBy(c) => c.max_variable(),
            OperatorExpr::Sum(terms) => terms.iter().filter_map(Self::max_variable).max(),
            OperatorExpr::Scale(_, a) => a.max_variable(),
            OperatorExpr::Compose(a, b)
            | OperatorExpr::Commutator(a, b)
            | OperatorExpr::Anticommutator(a, b) => a.max_variable().max(b.max_variable()),
        }
    }

    /// True when the operator contains no derivative leaves.
    pub fn is_multiplicative(&self) -> bool {
        match self {
            OperatorExpr::Partial(_) => false,
            OperatorExpr::Identity | OperatorExpr::MultiplyBy(_) => true,
            OperatorExpr::Sum(terms) => terms.iter().all(Self::is_multiplicative),
            OperatorExpr::Scale(_, a) => a.is_multiplicative(),
            OperatorExpr::Compose(a, b)
            | OperatorExpr::Commutator(a, b)
            | OperatorExpr::Anticommutator(a, b) => a.is_multiplicative() && b.is_multiplicative(),
        }
    }
}

impl Add for OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: OperatorExpr) -> OperatorExpr {
        OperatorExpr::sum([self, rhs])
    }
}

impl Sub for OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: OperatorExpr) -> OperatorExpr {
        OperatorExpr::sum([self, rhs.scaled(-1.0)])
    }
}

impl Neg for OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        self.scaled(-1.0)
    }
}

/// Composition.
impl Mul for OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Compose(Arc::new(self), Arc::new(rhs))
    }
}

impl Mul<OperatorExpr> for f64 {
    type Output = OperatorExpr;
    fn mul(self, rhs: OperatorExpr) -> OperatorExpr {
        OperatorExpr::Scale(self, Arc::new(rhs))
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorExpr::Identity => write!(f, "1"),
            OperatorExpr::Partial(i) => write!(f, "∂{}", i + 1),
            OperatorExpr::MultiplyBy(c) => write!(f, "({}·{:?})", c.scale, c.factors),
            OperatorExpr::Sum(t) if t.is_empty() => write!(f, "0"),
            OperatorExpr::Sum(t) => {
                write!(f, "(")?;
                for (k, term) in t.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{term}")?;
                }
                write!(f, ")")
            }
            OperatorExpr::Scale(c, a) => write!(f, "{c}·{a}"),
            OperatorExpr::Compose(a, b) => write!(f, "{a}∘{b}"),
            OperatorExpr::Commutator(a, b) => write!(f, "[{a}, {b}]"),
            OperatorExpr::Anticommutator(a, b) => write!(f, "{{{a}, {b}}}"),
        }
    }
}

/// Applies operators to jets at a fixed base point, caching coefficient jets.
pub struct Evaluator<S: Scalar = f64> {
    base: Arc<[S]>,
    eps: f64,
    cache: HashMap<(Vec<Factor>, usize), Jet<S>>,
}

impl<S: Scalar> Evaluator<S> {
    pub fn new(base: Arc<[S]>, eps: f64) -> Self {
        Evaluator {
            base,
            eps,
            cache: HashMap::new(),
        }
    }

    pub fn base(&self) -> &Arc<[S]> {
        &self.base
    }

    fn coefficient(&mut self, c: &CoeffFn, order: usize) -> Result<Jet<S>> {
        let key = (c.factors.clone(), order);
        if let Some(j) = self.cache.get(&key) {
            return Ok(j.clone());
        }
        let unit = CoeffFn {
            scale: 1.0,
            factors: c.factors.clone(),
        };
        let j = coeff_jet(&unit, self.base.clone(), order, self.eps)?;
        self.cache.insert(key, j.clone());
        Ok(j)
    }

    /// Jet of `op f` from the jet of `f`; the order drops by
    /// `op.derivative_order()`.
    pub fn apply(&mut self, op: &OperatorExpr, f: &Jet<S>) -> Result<Jet<S>> {
        let needed = op.derivative_order();
        if f.order() < needed {
            return Err(Error::InsufficientOrder {
                needed,
                available: f.order(),
            });
        }
        if let Some(m) = op.max_variable() {
            if m >= f.dim() {
                return Err(Error::IndexOutOfRange {
                    what: "operator variable",
                    index: m,
                    bound: f.dim(),
                });
            }
        }
        self.apply_inner(op, f)
    }

    fn apply_inner(&mut self, op: &OperatorExpr, f: &Jet<S>) -> Result<Jet<S>> {
        match op {
            OperatorExpr::Identity => Ok(f.clone()),
            OperatorExpr::Partial(i) => f.partial(*i),
            OperatorExpr::MultiplyBy(c) => {
                let scale = S::from_f64(c.scale);
                match c.factors.as_slice() {
                    [] => Ok(f.scale(&scale)),
                    [Factor::Coordinate { index, exponent }] if *exponent == Exponent::int(1) => {
                        let g = f.mul_coordinate(*index);
                        Ok(if c.scale == 1.0 { g } else { g.scale(&scale) })
                    }
                    _ => {
                        let cj = self.coefficient(c, f.order())?;
                        let g = cj.mul_unchecked(f);
                        Ok(if c.scale == 1.0 { g } else { g.scale(&scale) })
                    }
                }
            }
            OperatorExpr::Sum(terms) => {
                let out_order = f.order() - op.derivative_order();
                let mut acc = Jet::zero(f.base().clone(), out_order)?;
                for t in terms {
                    acc = acc.add_unchecked(&self.apply_inner(t, f)?);
                }
                Ok(acc)
            }
            OperatorExpr::Scale(c, a) => Ok(self.apply_inner(a, f)?.scale(&S::from_f64(*c))),
            OperatorExpr::Compose(a, b) => {
                let g = self.apply_inner(b, f)?;
                self.apply_inner(a, &g)
            }
            OperatorExpr::Commutator(a, b) | OperatorExpr::Anticommutator(a, b) => {
                let ab = {
                    let g = self.apply_inner(b, f)?;
                    self.apply_inner(a, &g)?
                };
                let ba = {
                    let g = self.apply_inner(a, f)?;
                    self.apply_inner(b, &g)?
                };
                Ok(if matches!(op, OperatorExpr::Commutator(..)) {
                    ab.sub_unchecked(&ba)
                } else {
                    ab.add_unchecked(&ba)
                })
            }
        }
    }
}

/// Jet of `op f` at `base`, starting from the order-`order` jet of `f`.
pub fn apply<S: Scalar>(
    op: &OperatorExpr,
    f: &Polynomial,
    base: Arc<[S]>,
    order: usize,
) -> Result<Jet<S>> {
    let jet = make_jet(f, base.clone(), order)?;
    Evaluator::new(base, EPS_SING).apply(op, &jet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l(i: usize, j: usize) -> OperatorExpr {
        OperatorExpr::coordinate(i) * OperatorExpr::partial(j)
            - OperatorExpr::coordinate(j) * OperatorExpr::partial(i)
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn position_momentum_commutator_is_identity() {
        let op = OperatorExpr::commutator(&OperatorExpr::partial(0), &OperatorExpr::coordinate(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Polynomial::random(2, 4, &mut rng);
        let base: Arc<[BigRational]> = Arc::from(vec![
            BigRational::from_ratio(1, 3),
            BigRational::from_ratio(-7, 5),
        ]);
        let lhs = apply(&op, &f, base.clone(), 4).unwrap();
        let rhs = make_jet(&f, base, 4).unwrap().truncate(lhs.order());
        assert_eq!(lhs.coeffs(), rhs.coeffs());
    }

    #[test]
    fn rotation_kills_radial_function() {
        let f = Polynomial::new(2, vec![(vec![2, 0], (1, 1)), (vec![0, 2], (1, 1))]).unwrap();
        let out = apply(&l(0, 1), &f, Arc::from(vec![0.8, -1.3]), 3).unwrap();
        assert!(out.coeffs().iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn angular_momentum_commutator_closes() {
        let lhs = OperatorExpr::commutator(&l(0, 1), &l(1, 2));
        let rhs = l(0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f = Polynomial::random(3, 5, &mut rng);
            let base: Arc<[f64]> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = apply(&lhs, &f, base.clone(), 5).unwrap();
            let b = apply(&rhs, &f, base, 5).unwrap();
            assert!(rel_close(*a.value(), *b.value(), 1e-12));
        }
    }

    #[test]
    fn derivative_order_examples() {
        assert_eq!(OperatorExpr::partial(0).derivative_order(), 1);
        let lap = OperatorExpr::sum((0..3).map(|i| OperatorExpr::partial(i).squared()));
        assert_eq!(lap.derivative_order(), 2);
        let nested = OperatorExpr::commutator(&lap, &OperatorExpr::commutator(&lap, &lap));
        assert_eq!(nested.derivative_order(), 6);
        assert_eq!(OperatorExpr::zero().derivative_order(), 0);
    }

    #[test]
    fn coefficient_jets_at_three_four() {
        let base: Arc<[f64]> = Arc::from(vec![3.0, 4.0]);
        let r = coeff_jet(&CoeffFn::radius_power(0, 2, Exponent::int(1)), base.clone(), 2, EPS_SING)
            .unwrap();
        assert!((r.value() - 5.0).abs() < 1e-15);
        let rinv =
            coeff_jet(&CoeffFn::radius_power(0, 2, Exponent::int(-1)), base, 2, EPS_SING).unwrap();
        assert!((rinv.value() - 0.2).abs() < 1e-15);
        let base3: Arc<[f64]> = Arc::from(vec![1.0, 1.0, 0.5]);
        let r1 = coeff_jet(&CoeffFn::radius_power(0, 2, Exponent::int(-2)), base3, 2, EPS_SING)
            .unwrap();
        assert!((r1.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radius_jet_matches_finite_differences() {
        // ∂/∂x (x²+y²)^{-1/2} = −x/r³
        let base: Arc<[f64]> = Arc::from(vec![0.6, -1.1]);
        let j = coeff_jet(&CoeffFn::radius_power(0, 2, Exponent::int(-1)), base, 3, EPS_SING)
            .unwrap();
        let r: f64 = (0.36f64 + 1.21).sqrt();
        assert!((j.coeff(&[1, 0]) + 0.6 / r.powi(3)).abs() < 1e-14);
        // second derivative ∂²/∂y² of 1/r = (2y² − x²)/r⁵, stored as half
        let expected = (2.0 * 1.21 - 0.36) / r.powi(5) / 2.0;
        assert!((j.coeff(&[0, 2]) - expected).abs() < 1e-14);
    }

    #[test]
    fn singular_base_rejected() {
        let base: Arc<[f64]> = Arc::from(vec![1e-4, 2e-4]);
        let op = OperatorExpr::mul_by(CoeffFn::radius_power(0, 2, Exponent::int(-2)));
        let f = Polynomial::monomial(&[1, 0], 1);
        assert!(matches!(apply(&op, &f, base, 2), Err(Error::SingularPoint { .. })));
        let inv_x = OperatorExpr::mul_by(CoeffFn::coordinate_power(0, Exponent::int(-2)));
        assert!(matches!(
            apply(&inv_x, &f, Arc::from(vec![5e-4, 1.0]), 2),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn insufficient_order_rejected() {
        let op = OperatorExpr::partial(0).squared();
        let f = Polynomial::monomial(&[1], 1);
        assert!(matches!(
            apply(&op, &f, Arc::from(vec![1.0]), 1),
            Err(Error::InsufficientOrder { needed: 2, available: 1 })
        ));
    }

    fn catalog(dim: usize, pick: usize, rng: &mut ChaCha8Rng) -> OperatorExpr {
        let i = rng.gen_range(0..dim);
        let j = (i + 1 + rng.gen_range(0..dim - 1)) % dim;
        match pick % 4 {
            0 => l(i, j),
            1 => OperatorExpr::sum((0..dim).map(|k| OperatorExpr::partial(k).squared()))
                + OperatorExpr::mul_by(CoeffFn::radius_power(0, dim, Exponent::int(-1)).scaled(-0.7)),
            2 => OperatorExpr::mul_by(CoeffFn::coordinate(i).times(CoeffFn::radius_power(
                0,
                dim,
                Exponent::int(-2),
            ))) * OperatorExpr::partial(j),
            _ => OperatorExpr::coordinate(j) * OperatorExpr::partial(i).squared()
                + OperatorExpr::constant(1.3),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn jacobi_identity(seed in any::<u64>(), picks in (0usize..4, 0usize..4, 0usize..4)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = catalog(3, picks.0, &mut rng);
            let b = catalog(3, picks.1, &mut rng);
            let c = catalog(3, picks.2, &mut rng);
            let cyc = |x: &OperatorExpr, y: &OperatorExpr, z: &OperatorExpr| {
                OperatorExpr::commutator(x, &OperatorExpr::commutator(y, z))
            };
            let total = cyc(&a, &b, &c) + cyc(&b, &c, &a) + cyc(&c, &a, &b);
            let f = Polynomial::random(3, 8, &mut rng);
            let base: Arc<[f64]> = (0..3)
                .map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let out = apply(&total, &f, base.clone(), 8).unwrap();
            // scale: size of one of the nested terms
            let one = apply(&cyc(&a, &b, &c), &f, base, 8).unwrap();
            prop_assert!(out.value().abs() <= 1e-9 * (1.0 + one.value().abs()));
        }

        #[test]
        fn linearity_and_associativity(seed in any::<u64>(), picks in (0usize..4, 0usize..4, 0usize..4)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = catalog(3, picks.0, &mut rng);
            let b = catalog(3, picks.1, &mut rng);
            let c = catalog(3, picks.2, &mut rng);
            let f = Polynomial::random(3, 7, &mut rng);
            let base: Arc<[f64]> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
            let v = |op: &OperatorExpr| *apply(op, &f, base.clone(), 7).unwrap().value();
            let sum = v(&(a.clone() + b.clone()));
            prop_assert!(rel_close(sum, v(&a) + v(&b), 1e-12));
            prop_assert!(rel_close(v(&(2.5 * a.clone())), 2.5 * v(&a), 1e-12));
            let left = v(&(a.clone() * (b.clone() * c.clone())));
            let right = v(&((a * b) * c));
            prop_assert!(rel_close(left, right, 1e-12));
        }
    }
}
