//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] holds the Taylor coefficients `∂^α f / α!` of a scalar function
//! at a base point, for every multi-index `α` with `|α| ≤ order`. Coefficients
//! are stored densely and grouped by total degree. Within a degree block the
//! ordering depends only on the dimension, so the jet of order `m` is a prefix
//! of the jet of order `n > m`; truncation is a slice.
//!
//! Differential operators act on jets through [`Jet::partial`] (which lowers
//! the order by one) and through multiplication by coefficient jets built from
//! [`Jet::recip`], [`Jet::sqrt`] and friends.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NONE: u32 = u32::MAX;

/// Index tables for all multi-indices of a given dimension up to an order.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    exps: Vec<u8>,
    degrees: Vec<u8>,
    degree_offsets: Vec<usize>,
    up: Vec<u32>,
    down: Vec<u32>,
    products: Vec<[u32; 3]>,
}

impl Layout {
    /// Shared layout for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(layout) = cache.lock().unwrap().get(&(dim, order)) {
            return layout.clone();
        }
        let layout = Arc::new(Layout::build(dim, order));
        cache
            .lock()
            .unwrap()
            .entry((dim, order))
            .or_insert(layout)
            .clone()
    }

    fn build(dim: usize, order: usize) -> Layout {
        assert!(dim >= 1, "jets need at least one variable");
        assert!(order < 256, "jet order too large");
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        let mut degree_offsets = vec![0];
        let mut current = vec![0u8; dim];
        for degree in 0..=order {
            push_compositions(&mut current, 0, degree, &mut exps);
            let count = exps.len() / dim;
            degrees.resize(count, degree as u8);
            degree_offsets.push(count);
        }
        let count = degrees.len();
        let index: HashMap<&[u8], u32> = (0..count)
            .map(|p| (&exps[p * dim..(p + 1) * dim], p as u32))
            .collect();

        let mut up = vec![NONE; count * dim];
        let mut down = vec![NONE; count * dim];
        let mut scratch = vec![0u8; dim];
        for p in 0..count {
            let alpha = &exps[p * dim..(p + 1) * dim];
            for i in 0..dim {
                if (degrees[p] as usize) < order {
                    scratch.copy_from_slice(alpha);
                    scratch[i] += 1;
                    up[p * dim + i] = index[scratch.as_slice()];
                }
                if alpha[i] > 0 {
                    scratch.copy_from_slice(alpha);
                    scratch[i] -= 1;
                    down[p * dim + i] = index[scratch.as_slice()];
                }
            }
        }

        let mut products = Vec::new();
        let mut a = vec![0u8; dim];
        let mut b = vec![0u8; dim];
        for c in 0..count {
            let gamma = &exps[c * dim..(c + 1) * dim];
            a.iter_mut().for_each(|x| *x = 0);
            loop {
                for i in 0..dim {
                    b[i] = gamma[i] - a[i];
                }
                products.push([index[a.as_slice()], index[b.as_slice()], c as u32]);
                // odometer over 0 ≤ a ≤ gamma
                let mut i = 0;
                while i < dim {
                    if a[i] < gamma[i] {
                        a[i] += 1;
                        break;
                    }
                    a[i] = 0;
                    i += 1;
                }
                if i == dim {
                    break;
                }
            }
        }

        Layout {
            dim,
            order,
            exps,
            degrees,
            degree_offsets,
            up,
            down,
            products,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Number of multi-indices of total degree `≤ order`.
    pub fn count_up_to(&self, order: usize) -> usize {
        self.degree_offsets[order.min(self.order) + 1]
    }

    pub fn exponent(&self, pos: usize) -> &[u8] {
        &self.exps[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn degree(&self, pos: usize) -> usize {
        self.degrees[pos] as usize
    }

    /// Position of a multi-index, if it is stored.
    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim || alpha.iter().sum::<usize>() > self.order {
            return None;
        }
        let mut pos = 0usize;
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                pos = self.up[pos * self.dim + i] as usize;
            }
        }
        Some(pos)
    }
}

/// Appends every composition of `remaining` into `current[slot..]`, in
/// descending lexicographic order.
fn push_compositions(current: &mut [u8], slot: usize, remaining: usize, out: &mut Vec<u8>) {
    if slot + 1 == current.len() {
        current[slot] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k as u8;
        push_compositions(current, slot + 1, remaining - k, out);
    }
}

/// Truncated Taylor expansion of a scalar function at a base point.
#[derive(Clone, Debug)]
pub struct Jet<S: Scalar = f64> {
    layout: Arc<Layout>,
    base: Arc<[S]>,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    fn check_base(base: &[S]) -> Result<()> {
        if base.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if base.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteBase);
        }
        Ok(())
    }

    pub fn zero(base: Arc<[S]>, order: usize) -> Result<Self> {
        Self::check_base(&base)?;
        let layout = Layout::get(base.len(), order);
        let coeffs = vec![S::zero(); layout.len()];
        Ok(Jet {
            layout,
            base,
            coeffs,
        })
    }

    pub fn constant(base: Arc<[S]>, order: usize, value: S) -> Result<Self> {
        let mut jet = Self::zero(base, order)?;
        jet.coeffs[0] = value;
        Ok(jet)
    }

    /// Jet of the coordinate function `x_i`.
    pub fn variable(base: Arc<[S]>, order: usize, i: usize) -> Result<Self> {
        let dim = base.len();
        if i >= dim {
            return Err(Error::IndexOutOfRange {
                what: "variable",
                index: i,
                bound: dim,
            });
        }
        let value = base[i].clone();
        let mut jet = Self::constant(base, order, value)?;
        if order >= 1 {
            jet.coeffs[jet.layout.up[i] as usize] = S::one();
        }
        Ok(jet)
    }

    pub fn from_coeffs(base: Arc<[S]>, order: usize, coeffs: Vec<S>) -> Result<Self> {
        Self::check_base(&base)?;
        let layout = Layout::get(base.len(), order);
        if coeffs.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: coeffs.len(),
            });
        }
        Ok(Jet {
            layout,
            base,
            coeffs,
        })
    }

    fn with_coeffs(&self, order: usize, coeffs: Vec<S>) -> Self {
        let layout = if order == self.order() {
            self.layout.clone()
        } else {
            Layout::get(self.dim(), order)
        };
        debug_assert_eq!(coeffs.len(), layout.len());
        Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn base(&self) -> &Arc<[S]> {
        &self.base
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Value of the function at the base point.
    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    /// Taylor coefficient for the multi-index `alpha` (zero beyond the order).
    pub fn coeff(&self, alpha: &[usize]) -> S {
        match self.layout.position(alpha) {
            Some(p) => self.coeffs[p].clone(),
            None => S::zero(),
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let n = self.layout.count_up_to(order);
        self.with_coeffs(order, self.coeffs[..n].to_vec())
    }

    fn same_base(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !Arc::ptr_eq(&self.base, &other.base) && self.base[..] != other.base[..] {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let n = self.layout.count_up_to(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        self.with_coeffs(order, coeffs)
    }

    pub(crate) fn sub_unchecked(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let n = self.layout.count_up_to(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        self.with_coeffs(order, coeffs)
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let layout = Layout::get(self.dim(), order);
        let mut out = vec![S::zero(); layout.len()];
        for &[a, b, c] in &layout.products {
            let term = self.coeffs[a as usize].clone() * other.coeffs[b as usize].clone();
            let slot = &mut out[c as usize];
            *slot = slot.clone() + term;
        }
        Jet {
            layout,
            base: self.base.clone(),
            coeffs: out,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.clone() * c.clone()).collect();
        self.with_coeffs(self.order(), coeffs)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|a| -a.clone()).collect();
        self.with_coeffs(self.order(), coeffs)
    }

    /// Adds a constant to the value coefficient.
    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    /// Multiplies by the coordinate function `x_i` without building its jet.
    pub fn mul_coordinate(&self, i: usize) -> Self {
        let dim = self.dim();
        let b = self.base[i].clone();
        let coeffs = (0..self.coeffs.len())
            .map(|p| {
                let mut v = self.coeffs[p].clone() * b.clone();
                let q = self.layout.down[p * dim + i];
                if q != NONE {
                    v = v + self.coeffs[q as usize].clone();
                }
                v
            })
            .collect();
        self.with_coeffs(self.order(), coeffs)
    }

    /// Jet of `∂f/∂x_i`, one order lower.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder {
                needed: 1,
                available: 0,
            });
        }
        let dim = self.dim();
        if i >= dim {
            return Err(Error::IndexOutOfRange {
                what: "variable",
                index: i,
                bound: dim,
            });
        }
        let order = self.order() - 1;
        let n = self.layout.count_up_to(order);
        let coeffs = (0..n)
            .map(|p| {
                let q = self.layout.up[p * dim + i] as usize;
                let k = self.layout.exponent(p)[i] as usize + 1;
                self.coeffs[q].clone() * S::from_usize(k)
            })
            .collect();
        Ok(self.with_coeffs(order, coeffs))
    }

    /// Series of `a^s` given the leading value `lead = a₀^s`.
    ///
    /// Uses the homogeneous-degree recurrence obtained from `a·δb = s·b·δa`
    /// with `δ` the Euler operator in the displacement variables:
    /// `k·a₀·b_k = Σ_{j≥1} (s·j − (k−j))·a_j·b_{k−j}`.
    fn power_series(&self, s: &S, lead: S) -> Self {
        let a0 = self.coeffs[0].clone();
        let mut b = vec![S::zero(); self.coeffs.len()];
        b[0] = lead;
        let layout = &self.layout;
        let mut start = 0;
        for k in 1..=self.order() {
            let lo = layout.degree_offsets[k];
            let hi = layout.degree_offsets[k + 1];
            let denom = a0.clone() * S::from_usize(k);
            // products are sorted by output position
            while (layout.products[start][2] as usize) < lo {
                start += 1;
            }
            let mut idx = start;
            for c in lo..hi {
                let mut acc = S::zero();
                while idx < layout.products.len() && layout.products[idx][2] as usize == c {
                    let [ia, ib, _] = layout.products[idx];
                    let j = layout.degree(ia as usize);
                    if j >= 1 {
                        let w = s.clone() * S::from_usize(j) - S::from_usize(k - j);
                        acc = acc + w * self.coeffs[ia as usize].clone() * b[ib as usize].clone();
                    }
                    idx += 1;
                }
                b[c] = acc / denom.clone();
            }
            start = idx;
        }
        self.with_coeffs(self.order(), b)
    }

    pub fn recip(&self) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0 == S::zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let lead = S::one() / a0;
        Ok(self.power_series(&-S::one(), lead))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0.to_f64() <= 0.0 || a0 == S::zero() {
            return Err(Error::NonPositiveConstantTerm);
        }
        let lead = a0.sqrt().ok_or(Error::NotRepresentable("square root"))?;
        Ok(self.power_series(&S::from_ratio(1, 2), lead))
    }

    /// `a^(num/den)` for `den ∈ {1, 2, 4}`.
    pub fn pow_ratio(&self, num: i32, den: u32) -> Result<Self> {
        let g = num::integer::gcd(num.unsigned_abs(), den).max(1);
        let (num, den) = (num / g as i32, den / g);
        let a0 = self.coeffs[0].clone();
        if num == 0 {
            return Self::constant(self.base.clone(), self.order(), S::one());
        }
        if den == 1 && num > 0 {
            let mut acc = self.clone();
            for _ in 1..num {
                acc = acc.mul_unchecked(self);
            }
            return Ok(acc);
        }
        if a0 == S::zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let mut root = a0.clone();
        let mut d = den;
        while d > 1 {
            if d % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "unsupported fractional power denominator {den}"
                )));
            }
            if root.to_f64() <= 0.0 {
                return Err(Error::NonPositiveConstantTerm);
            }
            root = root.sqrt().ok_or(Error::NotRepresentable("fractional power"))?;
            d /= 2;
        }
        let lead = root.powi(num);
        Ok(self.power_series(&S::from_ratio(num as i64, den as i64), lead))
    }
}

impl Jet<f64> {
    /// `a^s` for real `s`; requires a positive constant term.
    pub fn powf(&self, s: f64) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(Error::NonPositiveConstantTerm);
        }
        Ok(self.power_series(&s, a0.powf(s)))
    }

    /// `exp(a)`, via `k·b_k = Σ_{j≥1} j·a_j·b_{k−j}`.
    pub fn exp(&self) -> Self {
        let mut b = vec![0.0; self.coeffs.len()];
        b[0] = self.coeffs[0].exp();
        let layout = &self.layout;
        let mut idx = 0;
        for k in 1..=self.order() {
            let lo = layout.degree_offsets[k];
            let hi = layout.degree_offsets[k + 1];
            while (layout.products[idx][2] as usize) < lo {
                idx += 1;
            }
            for c in lo..hi {
                let mut acc = 0.0;
                while idx < layout.products.len() && layout.products[idx][2] as usize == c {
                    let [ia, ib, _] = layout.products[idx];
                    let j = layout.degree(ia as usize);
                    if j >= 1 {
                        acc += j as f64 * self.coeffs[ia as usize] * b[ib as usize];
                    }
                    idx += 1;
                }
                b[c] = acc / k as f64;
            }
        }
        self.with_coeffs(self.order(), b)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Polynomial test function `Σ c_α x^α` with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(Vec<u32>, (i64, i64))>,
}

/// Alias used by the identity checker.
pub type TestFunction = Polynomial;

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, (i64, i64))>) -> Result<Self> {
        for (alpha, (_, den)) in &terms {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.len(),
                });
            }
            if *den == 0 {
                return Err(Error::InvalidParameter("zero denominator".into()));
            }
        }
        Ok(Polynomial { dim, terms })
    }

    /// Single monomial `c·x^α`.
    pub fn monomial(alpha: &[u32], c: i64) -> Self {
        Polynomial {
            dim: alpha.len(),
            terms: vec![(alpha.to_vec(), (c, 1))],
        }
    }

    /// Dense random polynomial of the given total degree; coefficients are
    /// multiples of 1/16 in [−1, 1].
    pub fn random<R: Rng>(dim: usize, degree: usize, rng: &mut R) -> Self {
        let layout = Layout::get(dim, degree);
        let terms = (0..layout.len())
            .map(|p| {
                let alpha = layout.exponent(p).iter().map(|&e| e as u32).collect();
                (alpha, (rng.gen_range(-16..=16), 16))
            })
            .collect();
        Polynomial { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(a, _)| a.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> &[(Vec<u32>, (i64, i64))] {
        &self.terms
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: (i64, i64), other: &Polynomial, beta: (i64, i64)) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mul = |(a, b): (i64, i64), (c, d): (i64, i64)| (a * c, b * d);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), mul(*c, alpha)))
            .chain(other.terms.iter().map(|(m, c)| (m.clone(), mul(*c, beta))))
            .collect();
        Ok(Polynomial {
            dim: self.dim,
            terms,
        })
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, (n, d))| {
                let m: f64 = alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product();
                *n as f64 / *d as f64 * m
            })
            .sum()
    }
}

/// Exact jet of a polynomial at `base`, truncated to `order`.
pub fn make_jet<S: Scalar>(f: &Polynomial, base: Arc<[S]>, order: usize) -> Result<Jet<S>> {
    if f.dim != base.len() {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: base.len(),
        });
    }
    let mut jet = Jet::zero(base, order)?;
    let dim = f.dim;
    // binomial rows, built lazily
    let max_e = f
        .terms
        .iter()
        .flat_map(|(a, _)| a.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    let mut binom = vec![vec![1u64]];
    for n in 1..=max_e {
        let prev = &binom[n - 1];
        let mut row = vec![1u64; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        binom.push(row);
    }
    // powers of base coordinates
    let powers: Vec<Vec<S>> = jet
        .base
        .iter()
        .map(|b| {
            let mut row = vec![S::one()];
            for k in 1..=max_e {
                row.push(row[k - 1].clone() * b.clone());
            }
            row
        })
        .collect();

    let layout = jet.layout.clone();
    for (alpha, (num, den)) in &f.terms {
        let c = S::from_ratio(*num, *den);
        if c == S::zero() {
            continue;
        }
        expand_monomial(
            alpha, 0, 0, 0, c, &binom, &powers, &layout, dim, order, &mut jet.coeffs,
        );
    }
    Ok(jet)
}

#[allow(clippy::too_many_arguments)]
fn expand_monomial<S: Scalar>(
    alpha: &[u32],
    var: usize,
    pos: usize,
    degree: usize,
    acc: S,
    binom: &[Vec<u64>],
    powers: &[Vec<S>],
    layout: &Layout,
    dim: usize,
    order: usize,
    out: &mut [S],
) {
    if var == dim {
        out[pos] = out[pos].clone() + acc;
        return;
    }
    let e = alpha[var] as usize;
    let mut p = pos;
    for k in 0..=e {
        if degree + k > order {
            break;
        }
        if k > 0 {
            p = layout.up[p * dim + var] as usize;
        }
        // (b + t)^e contributes C(e,k) b^{e-k} t^k
        let w = S::from_ratio(binom[e][k] as i64, 1) * powers[var][e - k].clone();
        expand_monomial(
            alpha,
            var + 1,
            p,
            degree + k,
            acc.clone() * w,
            binom,
            powers,
            layout,
            dim,
            order,
            out,
        );
    }
}
