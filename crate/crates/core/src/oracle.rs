//! Independent numeric oracles: finite-difference eigensolvers for the
//! separated radial and angular equations, and a brute-force count of
//! harmonic polynomials.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Mutex, OnceLock};

use num::rational::BigRational;
use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform interior grid of `points` nodes on `(start, end)` with Dirichlet
/// conditions at both ends; spacing `(end − start)/(points + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 100;

    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        let g = Grid1D { start, end, points };
        g.validate()?;
        Ok(g)
    }

    /// Grid for a level `F ∝ r^κ e^{−ηr/n} (…)` with Balmer denominator `n`:
    /// `[10⁻⁹/η, n(40 + 2κ)/η]` with spacing at most `0.02/η`. For the
    /// hydrogen ground level this is `[10⁻⁹/η, 80/η]` with 4000 points.
    pub fn radial_for_level(eta: f64, denominator: f64, kappa: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter("radial default grid needs eta > 0".into()));
        }
        let n = denominator.max(1.0);
        let span = n * (40.0 + 2.0 * (kappa - 1.0).max(0.0)) / eta;
        Grid1D::new(1e-9 / eta, span, (span * eta / 0.02).round() as usize)
    }

    pub fn angular_default() -> Self {
        Grid1D {
            start: 1e-9,
            end: FRAC_PI_2 - 1e-9,
            points: 4000,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.points + 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < Self::MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} points, got {}",
                Self::MIN_POINTS,
                self.points
            )));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(Error::InvalidParameter(format!(
                "grid interval [{}, {}] is empty",
                self.start, self.end
            )));
        }
        Ok(())
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Grid1D {
            points: 2 * self.points + 1,
            ..*self
        }
    }

    fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (1..=self.points).map(move |j| self.start + j as f64 * h)
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix
/// with diagonal `diag` and constant off-diagonal `off`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (d.abs() + off.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues, ascending, by bisection on the Sturm count.
pub fn tridiagonal_lowest(diag: &[f64], off: f64, k: usize) -> Vec<f64> {
    let k = k.min(diag.len());
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    (0..k)
        .map(|m| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) > m {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Lowest `k` eigenvalues of `−F″ − η/r F + b_eff/r² F` on the grid.
pub fn radial_fd_eigen(eta: f64, b_eff: f64, grid: &Grid1D, k: usize) -> Result<Vec<f64>> {
    grid.validate()?;
    if !(grid.start > 0.0) {
        return Err(Error::InvalidParameter("radial grid must start at r > 0".into()));
    }
    if !(b_eff + 0.25 > 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "b_eff + 1/4 = {} is not positive",
            b_eff + 0.25
        )));
    }
    let h = grid.spacing();
    let diag: Vec<f64> = grid
        .nodes()
        .map(|r| 2.0 / (h * h) - eta / r + b_eff / (r * r))
        .collect();
    Ok(tridiagonal_lowest(&diag, -1.0 / (h * h), k))
}

/// Lowest `k` values of `b_i` for the angular equation
/// `−y″ − (i−1) cot θ y′ + A/sin²θ y + B/cos²θ y = b_i y` on `(0, π/2)`,
/// where `A = λ_1` for `i = 1` and `A = b_{i−1}` otherwise, and `B = λ_{i+1}`.
///
/// For `i ≥ 2` the equation is discretized after `y = sin^{−(i−1)/2}θ u`,
/// which removes the first-order term.
pub fn angular_fd_eigen(sin_coeff: f64, cos_coeff: f64, index: usize, grid: &Grid1D, k: usize) -> Result<Vec<f64>> {
    grid.validate()?;
    if !(grid.start > 0.0 && grid.end < FRAC_PI_2) {
        return Err(Error::InvalidParameter("angular grid must lie inside (0, π/2)".into()));
    }
    if index == 0 {
        return Err(Error::IndexOutOfRange {
            what: "angular equation",
            index,
            bound: 1,
        });
    }
    let m = (index - 1) as f64;
    let a = sin_coeff + m * (m - 2.0) / 4.0;
    if !(a > -0.25 && cos_coeff > -0.25) {
        return Err(Error::UnsupportedRegime(format!(
            "angular barrier coefficients ({a}, {cos_coeff}) must exceed -1/4"
        )));
    }
    let h = grid.spacing();
    let diag: Vec<f64> = grid
        .nodes()
        .map(|t| {
            let (s, c) = t.sin_cos();
            2.0 / (h * h) + a / (s * s) + cos_coeff / (c * c)
        })
        .collect();
    Ok(tridiagonal_lowest(&diag, -1.0 / (h * h), k)
        .into_iter()
        .map(|e| e - m * m / 4.0)
        .collect())
}

fn monomials(d: usize, degree: usize) -> Vec<Vec<usize>> {
    fn go(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == d {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            go(d, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        go(d, degree, &mut Vec::new(), &mut out);
    }
    out
}

fn exact_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = &rows[r][c] / &pivot;
                for cc in c..cols {
                    let v = &rows[rank][cc] * &f;
                    rows[r][cc] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the kernel of the Laplacian on the span of `source`, by
/// exact elimination.
fn laplacian_kernel_dim(d: usize, source: &[Vec<usize>]) -> u64 {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut entries = Vec::new();
    for (col, m) in source.iter().enumerate() {
        for i in 0..d {
            if m[i] >= 2 {
                let mut t = m.clone();
                t[i] -= 2;
                let next = index.len();
                let row = *index.entry(t).or_insert(next);
                entries.push((row, col, m[i] * (m[i] - 1)));
            }
        }
    }
    // rows: image monomials, columns: source monomials
    let mut rows = vec![vec![BigRational::zero(); source.len()]; index.len()];
    for (r, c, v) in entries {
        rows[r][c] += BigRational::from_integer(BigInt::from(v));
    }
    (source.len() - exact_rank(rows)) as u64
}

/// Dimension of the degree-`l` harmonic polynomials in `d` variables as the
/// kernel of the Laplacian on degree-`l` monomials.
pub fn harmonic_dimension_brute(d: usize, l: usize) -> u64 {
    laplacian_kernel_dim(d, &monomials(d, l))
}

/// Dimension of the harmonic polynomials of degree at most `max_l` in `d`
/// variables, as the kernel of the Laplacian on all monomials up to that
/// degree.
pub fn harmonic_dimension_upto_brute(d: usize, max_l: usize) -> u64 {
    let source: Vec<Vec<usize>> = (0..=max_l).flat_map(|l| monomials(d, l)).collect();
    laplacian_kernel_dim(d, &source)
}

fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `C(l+d−1, d−1) − C(l+d−3, d−1)`.
pub fn harmonic_dimension_closed(d: usize, l: usize) -> u64 {
    if d == 0 {
        return 0;
    }
    let (d, l) = (d as i64, l as i64);
    binomial(l + d - 1, d - 1) - binomial(l + d - 3, d - 1)
}

/// Largest `d` and `l` answered by brute force; beyond them the closed form,
/// which matches the brute force on this range, is used.
pub const BRUTE_FORCE_RANGE: (usize, usize) = (5, 6);

/// Dimension of degree-`l` harmonic polynomials in `d` variables.
pub fn harmonic_dimension(d: usize, l: usize) -> u64 {
    if d > BRUTE_FORCE_RANGE.0 || l > BRUTE_FORCE_RANGE.1 {
        return harmonic_dimension_closed(d, l);
    }
    static MEMO: OnceLock<Mutex<HashMap<(usize, usize), u64>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(&v) = memo.lock().expect("memo lock").get(&(d, l)) {
        return v;
    }
    let v = harmonic_dimension_brute(d, l);
    memo.lock().expect("memo lock").insert((d, l), v);
    v
}
