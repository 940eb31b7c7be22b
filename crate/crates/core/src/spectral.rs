//! Closed-form spectrum and eigenfunctions from separation of variables.
//!
//! Each block is written in polar coordinates, the block radii `r_1..r_N` in
//! hyperspherical coordinates `r_{i+1} = ρ_{i+1} cos θ_i`,
//! `ρ_i = ρ_{i+1} sin θ_i` with `ρ_i² = r_1² + … + r_i²` and `ρ_N = r`.

use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::model::ModelSpec;
use crate::oracle::harmonic_dimension;

/// Quantum numbers of one separated eigenfunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n_r: usize,
    /// `J_1..J_{N−1}`.
    pub j: Vec<usize>,
    /// `l_1..l_N`; zero for one-coordinate blocks.
    pub l: Vec<usize>,
}

impl QuantumNumbers {
    pub fn ground(spec: &ModelSpec) -> Self {
        let n = spec.n_blocks();
        QuantumNumbers {
            n_r: 0,
            j: vec![0; n - 1],
            l: vec![0; n],
        }
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let n = spec.n_blocks();
        if self.j.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                found: self.j.len(),
            });
        }
        if self.l.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.l.len(),
            });
        }
        for (k, &l) in self.l.iter().enumerate() {
            if l > 0 && spec.partition.size(k + 1) == 1 {
                return Err(Error::InvalidParameter(format!(
                    "l_{} must be 0 for a one-coordinate block",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    /// `λ_i = l_i(l_i + d_i − 2) + α_i + (d_i − 1)(d_i − 3)/4`.
    pub lambda: Vec<f64>,
    /// `γ_s = √(1 + 4λ_s)/2`.
    pub gamma: Vec<f64>,
    /// `κ_0..κ_{N−1}` with `κ_0 = γ_1`.
    pub kappa_chain: Vec<f64>,
    /// `b_i = κ_i² − (i−1)²/4` for `i = 1..N−1`.
    pub b: Vec<f64>,
    pub kappa: f64,
    /// `2N_r + 4ΣJ_s + 2N − 1 + 2Σγ_s`.
    pub denominator: f64,
    pub energy: f64,
    /// The denominator as an exact rational when every `1 + 4λ_s` is the
    /// square of a rational.
    #[serde(skip)]
    pub exact_denominator: Option<BigRational>,
}

impl SpectralData {
    /// Coefficient of `1/r²` in the reduced radial equation
    /// `−u'' + (c/r² − η/r)u = Eu`, equal to `κ(κ − 1)`.
    pub fn radial_coupling(&self) -> f64 {
        self.kappa * (self.kappa - 1.0)
    }

    /// `(sin, cos)` coefficients of angular equation `i` (1-based), whose
    /// `J_i`-th eigenvalue is `b_i`.
    pub fn angular_coefficients(&self, i: usize) -> (f64, f64) {
        let sin = if i == 1 { self.lambda[0] } else { self.b[i - 2] };
        (sin, self.lambda[i])
    }
}

/// `λ_i` for block `i` (1-based) at angular momentum `l`.
pub fn lambda(spec: &ModelSpec, i: usize, l: usize) -> f64 {
    let d = spec.partition.size(i) as f64;
    let l = l as f64;
    l * (l + d - 2.0) + spec.alpha(i) + (d - 1.0) * (d - 3.0) / 4.0
}

fn gamma_of(lambda: f64, block: usize) -> Result<f64> {
    let disc = 1.0 + 4.0 * lambda;
    if !(disc > 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "1 + 4 lambda_{block} = {disc} is not positive (coupling too attractive)"
        )));
    }
    Ok(disc.sqrt() / 2.0)
}

/// Square root of a non-negative rational when it is rational.
fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

fn exact_gamma(lambda: f64) -> Option<BigRational> {
    let disc = BigRational::from_float(lambda)? * BigRational::from_integer(4.into())
        + BigRational::from_integer(1.into());
    rational_sqrt(&disc).map(|s| s / BigRational::from_integer(2.into()))
}

/// Spectral data of the level labelled by `qn`.
pub fn spectral_data(spec: &ModelSpec, qn: &QuantumNumbers) -> Result<SpectralData> {
    spec.validate()?;
    qn.validate(spec)?;
    let n = spec.n_blocks();
    let lambda: Vec<f64> = (1..=n).map(|i| lambda(spec, i, qn.l[i - 1])).collect();
    let gamma = lambda
        .iter()
        .enumerate()
        .map(|(k, &l)| gamma_of(l, k + 1))
        .collect::<Result<Vec<_>>>()?;
    let mut kappa_chain = vec![gamma[0]];
    let mut j_sum = 0usize;
    let mut g_sum = gamma[0];
    for i in 1..n {
        j_sum += qn.j[i - 1];
        g_sum += gamma[i];
        kappa_chain.push(2.0 * j_sum as f64 + i as f64 + g_sum);
    }
    let b = (1..n)
        .map(|i| kappa_chain[i] * kappa_chain[i] - ((i - 1) * (i - 1)) as f64 / 4.0)
        .collect();
    let kappa = 2.0 * j_sum as f64 + n as f64 - 0.5 + g_sum;
    let integer_part = (2 * qn.n_r + 4 * j_sum + 2 * n - 1) as f64;
    let denominator = integer_part + 2.0 * g_sum;
    let exact_denominator = lambda
        .iter()
        .map(|&l| exact_gamma(l))
        .collect::<Option<Vec<_>>>()
        .map(|gs| {
            gs.into_iter().fold(
                BigRational::from_integer(BigInt::from(2 * qn.n_r + 4 * j_sum + 2 * n - 1)),
                |acc, g| acc + g * BigRational::from_integer(2.into()),
            )
        });
    let energy = -spec.eta * spec.eta / (denominator * denominator);
    Ok(SpectralData {
        lambda,
        gamma,
        kappa_chain,
        b,
        kappa,
        denominator,
        energy,
        exact_denominator,
    })
}

/// Arguments accepted by the orthogonal-polynomial recurrences.
pub trait PolyArg: Sized + Clone {
    /// `a·self + b`.
    fn affine(&self, a: f64, b: f64) -> Self;
    /// `a·self·u + b·v`.
    fn mul_combine(&self, u: &Self, a: f64, v: &Self, b: f64) -> Result<Self>;
    fn constant_like(&self, c: f64) -> Self;
}

impl PolyArg for f64 {
    fn affine(&self, a: f64, b: f64) -> Self {
        a * self + b
    }

    fn mul_combine(&self, u: &Self, a: f64, v: &Self, b: f64) -> Result<Self> {
        Ok(a * self * u + b * v)
    }

    fn constant_like(&self, c: f64) -> Self {
        c
    }
}

impl PolyArg for Jet<f64> {
    fn affine(&self, a: f64, b: f64) -> Self {
        self.scale(&a).add_constant(&b)
    }

    fn mul_combine(&self, u: &Self, a: f64, v: &Self, b: f64) -> Result<Self> {
        self.mul(u)?.scale(&a).add(&v.scale(&b))
    }

    fn constant_like(&self, c: f64) -> Self {
        self.scale(&0.0).add_constant(&c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolyKind {
    /// `P_n^{(a, b)}`.
    Jacobi { a: f64, b: f64 },
    /// `L_n^{(α)}`.
    Laguerre { alpha: f64 },
}

/// Value of a classical orthogonal polynomial by its three-term recurrence.
pub fn classical_poly<T: PolyArg>(kind: PolyKind, n: usize, x: &T) -> Result<T> {
    match kind {
        PolyKind::Jacobi { a, b } => jacobi(n, a, b, x),
        PolyKind::Laguerre { alpha } => laguerre(n, alpha, x),
    }
}

fn jacobi<T: PolyArg>(n: usize, a: f64, b: f64, z: &T) -> Result<T> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Jacobi parameters ({a}, {b}) must exceed -1"
        )));
    }
    let mut prev = z.constant_like(1.0);
    if n == 0 {
        return Ok(prev);
    }
    // P_1 = (a + 1) + (a + b + 2)(z − 1)/2
    let mut cur = z.affine((a + b + 2.0) / 2.0, (a + 1.0) - (a + b + 2.0) / 2.0);
    for k in 1..n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let denom = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
        let lin = z.affine((s + 1.0) * (s + 2.0) * s, (s + 1.0) * (a * a - b * b));
        let next = lin.mul_combine(&cur, 1.0 / denom, &prev, -2.0 * (k + a) * (k + b) * (s + 2.0) / denom)?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn laguerre<T: PolyArg>(n: usize, alpha: f64, x: &T) -> Result<T> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Laguerre parameter {alpha} must exceed -1"
        )));
    }
    let mut prev = x.constant_like(1.0);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = x.affine(-1.0, 1.0 + alpha);
    for k in 1..n {
        let k = k as f64;
        let lin = x.affine(-1.0, 2.0 * k + 1.0 + alpha);
        let next = lin.mul_combine(&cur, 1.0 / (k + 1.0), &prev, -(k + alpha) / (k + 1.0))?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn guard(value: f64, what: &str, eps: f64) -> Result<()> {
    if value < eps {
        return Err(Error::SingularPoint {
            what: what.to_string(),
            value,
        });
    }
    Ok(())
}

/// Jet of the unnormalized eigenfunction `Ψ` at `base`.
///
/// Two-coordinate blocks carry the harmonic `cos(l φ)` with
/// `x_last = r cos φ`, `x_first = r sin φ`. Larger blocks carry the zonal
/// harmonic `P_l^{(a,a)}(x_last/r)`, `a = (d − 3)/2`, i.e. a Gegenbauer
/// polynomial in the cosine of the angle to the block's last axis.
pub fn wavefunction_jet(
    spec: &ModelSpec,
    qn: &QuantumNumbers,
    base: Arc<[f64]>,
    order: usize,
    eps: f64,
) -> Result<Jet<f64>> {
    let data = spectral_data(spec, qn)?;
    let dim = spec.dim();
    if base.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: base.len(),
        });
    }
    let n = spec.n_blocks();
    let x: Vec<Jet<f64>> = (0..dim)
        .map(|i| Jet::variable(base.clone(), order, i))
        .collect::<Result<_>>()?;
    let one = Jet::constant(base.clone(), order, 1.0)?;

    let mut r_sq = Vec::with_capacity(n);
    for k in 1..=n {
        let mut acc = Jet::zero(base.clone(), order)?;
        for i in spec.partition.block_range(k) {
            acc = acc.add(&x[i].mul(&x[i])?)?;
        }
        guard(acc.value().sqrt(), &format!("r_{k}"), eps)?;
        r_sq.push(acc);
    }
    let r: Vec<Jet<f64>> = r_sq.iter().map(Jet::sqrt).collect::<Result<_>>()?;
    // rho_sq[i] = r_1² + … + r_{i+1}²
    let mut rho_sq = vec![r_sq[0].clone()];
    for k in 1..n {
        let next = rho_sq[k - 1].add(&r_sq[k])?;
        rho_sq.push(next);
    }
    let rho: Vec<Jet<f64>> = rho_sq.iter().map(Jet::sqrt).collect::<Result<_>>()?;
    let radius = &rho[n - 1];

    let k_decay = (-data.energy).sqrt();
    let mut psi = radius.powf(data.kappa - (n as f64 - 1.0) / 2.0)?;
    psi = psi.mul(&radius.scale(&-k_decay).exp())?;
    let lag = laguerre(qn.n_r, 2.0 * data.kappa - 1.0, &radius.scale(&(2.0 * k_decay)))?;
    psi = psi.mul(&lag)?;

    for i in 1..n {
        let inv = rho[i].recip()?;
        let sin = rho[i - 1].mul(&inv)?;
        let cos = r[i].mul(&inv)?;
        let cos2 = r_sq[i].sub(&rho_sq[i - 1])?.mul(&rho_sq[i].recip()?)?;
        let kappa_prev = data.kappa_chain[i - 1];
        let angular = sin
            .powf(kappa_prev + 1.0 - i as f64 / 2.0)?
            .mul(&cos.powf(data.gamma[i] + 0.5)?)?
            .mul(&jacobi(qn.j[i - 1], kappa_prev, data.gamma[i], &cos2)?)?;
        psi = psi.mul(&angular)?;
    }

    for k in 1..=n {
        let d = spec.partition.size(k);
        if d > 1 {
            psi = psi.mul(&r[k - 1].powf(-(d as f64 - 1.0) / 2.0)?)?;
        }
        let l = qn.l[k - 1];
        if d == 2 && l > 0 {
            let range = spec.partition.block_range(k);
            let (s, c) = (&x[range.start], &x[range.start + 1]);
            // Re (c + i s)^l by repeated rotation
            let (mut re, mut im) = (one.clone(), Jet::zero(base.clone(), order)?);
            for _ in 0..l {
                let re_next = re.mul(c)?.sub(&im.mul(s)?)?;
                let im_next = im.mul(c)?.add(&re.mul(s)?)?;
                re = re_next;
                im = im_next;
            }
            psi = psi.mul(&re)?.mul(&r[k - 1].powf(-(l as f64))?)?;
        } else if d >= 3 && l > 0 {
            let a = (d as f64 - 3.0) / 2.0;
            let t = x[spec.partition.block_range(k).end - 1].mul(&r[k - 1].recip()?)?;
            psi = psi.mul(&jacobi(l, a, a, &t)?)?;
        }
    }
    Ok(psi)
}

/// `Ψ` at a point.
pub fn wavefunction_eval(spec: &ModelSpec, qn: &QuantumNumbers, point: &[f64]) -> Result<f64> {
    let jet = wavefunction_jet(spec, qn, point.iter().copied().collect(), 0, crate::EPS_SING)?;
    Ok(*jet.value())
}

/// One energy level with its total multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub denominator: f64,
    pub multiplicity: u64,
    /// The first quantum numbers found at this energy.
    pub witness: QuantumNumbers,
}

struct State {
    qn: QuantumNumbers,
    data: SpectralData,
    multiplicity: u64,
}

fn same_level(a: &State, b: &State) -> bool {
    match (&a.data.exact_denominator, &b.data.exact_denominator) {
        (Some(x), Some(y)) => x == y,
        _ => (a.data.energy - b.data.energy).abs() <= 1e-12 * a.data.energy.abs().max(b.data.energy.abs()),
    }
}

fn push_j(j: &mut Vec<usize>, slot: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
    if slot == j.len() {
        out.push(j.clone());
        return;
    }
    for v in 0..=budget {
        j[slot] = v;
        push_j(j, slot + 1, budget - v, out);
    }
    j[slot] = 0;
}

/// Every level whose Balmer denominator is at most `max_denominator`, in
/// ascending energy. Multiplicities sum harmonic dimensions over all
/// quantum numbers at the same energy.
pub fn enumerate_levels(spec: &ModelSpec, max_denominator: f64) -> Result<Vec<Level>> {
    spec.validate()?;
    let n = spec.n_blocks();
    let tol = 1e-9;
    // Angular momenta per block whose 2γ alone fits the budget.
    let base_denominator = (2 * n - 1) as f64;
    let mut l_ranges = Vec::with_capacity(n);
    for k in 1..=n {
        let mut ls = Vec::new();
        let max_l = if spec.partition.size(k) == 1 { 0 } else { usize::MAX };
        let mut l = 0;
        while l <= max_l {
            let g = gamma_of(lambda(spec, k, l), k)?;
            if base_denominator + 2.0 * g > max_denominator + tol {
                break;
            }
            ls.push((l, g));
            l += 1;
        }
        l_ranges.push(ls);
    }
    let mut l_vectors: Vec<Vec<usize>> = vec![Vec::new()];
    for ls in &l_ranges {
        l_vectors = l_vectors
            .into_iter()
            .flat_map(|prefix| {
                ls.iter().map(move |&(l, _)| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    let mut states: Vec<State> = l_vectors
        .par_iter()
        .map(|l| -> Result<Vec<State>> {
            let ground = QuantumNumbers {
                n_r: 0,
                j: vec![0; n - 1],
                l: l.clone(),
            };
            let d0 = spectral_data(spec, &ground)?.denominator;
            if d0 > max_denominator + tol {
                return Ok(Vec::new());
            }
            let slack = ((max_denominator + tol - d0) / 2.0).floor() as usize;
            let harmonic: u64 = l
                .iter()
                .enumerate()
                .map(|(k, &lk)| harmonic_dimension(spec.partition.size(k + 1), lk))
                .product();
            let mut js = Vec::new();
            push_j(&mut vec![0; n - 1], 0, slack / 2, &mut js);
            let mut out = Vec::new();
            for j in js {
                let used = 2 * j.iter().sum::<usize>();
                for n_r in 0..=slack - used {
                    let qn = QuantumNumbers {
                        n_r,
                        j: j.clone(),
                        l: l.clone(),
                    };
                    let data = spectral_data(spec, &qn)?;
                    out.push(State {
                        qn,
                        data,
                        multiplicity: harmonic,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .filter(|s| s.data.denominator <= max_denominator + tol && s.multiplicity > 0)
        .collect();
    states.sort_by(|a, b| {
        a.data
            .energy
            .total_cmp(&b.data.energy)
            .then_with(|| a.qn.l.cmp(&b.qn.l))
            .then_with(|| a.qn.j.cmp(&b.qn.j))
            .then_with(|| a.qn.n_r.cmp(&b.qn.n_r))
    });
    let mut levels: Vec<(State, u64)> = Vec::new();
    for s in states {
        match levels.last_mut() {
            Some((head, total)) if same_level(head, &s) => *total += s.multiplicity,
            _ => {
                let m = s.multiplicity;
                levels.push((s, m));
            }
        }
    }
    Ok(levels
        .into_iter()
        .map(|(s, multiplicity)| Level {
            energy: s.data.energy,
            denominator: s.data.denominator,
            multiplicity,
            witness: s.qn,
        })
        .collect())
}
