//! Hamiltonians and integrals of motion for a block partition of the
//! coordinates.
//!
//! Coordinates are indexed from 0 throughout; blocks are indexed from 1 so
//! that `block_range(k)` covers the coordinates of the `k`-th block. The
//! coupling of the last block is fixed to zero.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::operators::{CoeffFn, Evaluator, Exponent, OperatorExpr, EPS_SING};

/// Sizes `d_1..d_N` of the coordinate blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    sizes: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Partition::new(sizes)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Vec<usize> {
        p.sizes
    }
}

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("at least one block is required".into()));
        }
        if sizes.iter().any(|&d| d == 0) {
            return Err(Error::InvalidPartition("blocks must be nonempty".into()));
        }
        Ok(Partition { sizes })
    }

    /// Every block of size one.
    pub fn singletons(dim: usize) -> Self {
        Partition {
            sizes: vec![1; dim],
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of blocks `N`.
    pub fn n_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Total dimension `D`.
    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `d_k` for `1 ≤ k ≤ N`.
    pub fn size(&self, k: usize) -> usize {
        self.sizes[k - 1]
    }

    /// `n_i = d_1 + … + d_i`, with `n_0 = 0`.
    pub fn boundary(&self, i: usize) -> usize {
        self.sizes[..i].iter().sum()
    }

    /// Coordinates of block `k` (1-based).
    pub fn block_range(&self, k: usize) -> Range<usize> {
        self.boundary(k - 1)..self.boundary(k)
    }

    /// Block (1-based) containing coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        let mut k = 1;
        while self.boundary(k) <= i {
            k += 1;
        }
        k
    }

    pub fn is_all_singletons(&self) -> bool {
        self.sizes.iter().all(|&d| d == 1)
    }
}

/// One member of the family: a partition plus `η` and `α_1..α_{N−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub partition: Partition,
    pub eta: f64,
    pub alpha: Vec<f64>,
}

impl ModelSpec {
    pub fn new(partition: Partition, eta: f64, alpha: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec {
            partition,
            eta,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.partition.n_blocks();
        if self.alpha.len() + 1 != n {
            return Err(Error::InvalidParameter(format!(
                "alpha must have {} entries for {} blocks, found {}",
                n - 1,
                n,
                self.alpha.len()
            )));
        }
        if !self.eta.is_finite() || self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn n_blocks(&self) -> usize {
        self.partition.n_blocks()
    }

    /// `α_k` for `1 ≤ k ≤ N`, with `α_N = 0`.
    pub fn alpha(&self, k: usize) -> f64 {
        if k >= 1 && k < self.n_blocks() {
            self.alpha[k - 1]
        } else {
            0.0
        }
    }

    /// Coordinates of the last block.
    pub fn last_block(&self) -> Range<usize> {
        self.partition.block_range(self.n_blocks())
    }
}

fn check_block(spec: &ModelSpec, k: usize, lo: usize, hi: usize) -> Result<()> {
    if k < lo || k > hi {
        return Err(Error::IndexOutOfRange {
            what: "block",
            index: k,
            bound: hi,
        });
    }
    let _ = spec;
    Ok(())
}

/// `ρ^e` for block `k` (`k = 0` is the global radius `r`).
pub fn radial_power(partition: &Partition, k: usize, exponent: i32) -> CoeffFn {
    let range = if k == 0 {
        0..partition.dim()
    } else {
        partition.block_range(k)
    };
    CoeffFn::radius_power(range.start, range.end, Exponent::int(exponent))
}

/// `Σ_{i ∈ range} ∂_i²`.
pub fn laplacian(range: Range<usize>) -> OperatorExpr {
    OperatorExpr::sum(range.map(|i| OperatorExpr::partial(i).squared()))
}

/// Euler operator `Σ_{i ∈ range} x_i ∂_i`.
pub fn euler(range: Range<usize>) -> OperatorExpr {
    OperatorExpr::sum(range.map(|i| OperatorExpr::coordinate(i) * OperatorExpr::partial(i)))
}

/// `Ĥ = −Δ − η/r + Σ_{k<N} α_k / r_k²`.
pub fn hamiltonian(spec: &ModelSpec) -> OperatorExpr {
    let p = &spec.partition;
    let mut terms = vec![
        -laplacian(0..p.dim()),
        OperatorExpr::mul_by(radial_power(p, 0, -1).scaled(-spec.eta)),
    ];
    for k in 1..spec.n_blocks() {
        terms.push(OperatorExpr::mul_by(radial_power(p, k, -2).scaled(spec.alpha(k))));
    }
    OperatorExpr::sum(terms)
}

/// Hydrogen Hamiltonian `−Δ − η/r` in `dim` dimensions.
pub fn hydrogen_hamiltonian(dim: usize, eta: f64) -> OperatorExpr {
    -laplacian(0..dim)
        + OperatorExpr::mul_by(CoeffFn::radius_power(0, dim, Exponent::int(-1)).scaled(-eta))
}

/// `L_ij = x_i ∂_j − x_j ∂_i`.
pub fn angular_momentum(dim: usize, i: usize, j: usize) -> Result<OperatorExpr> {
    for idx in [i, j] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange {
                what: "coordinate",
                index: idx,
                bound: dim,
            });
        }
    }
    if i == j {
        return Ok(OperatorExpr::zero());
    }
    Ok(OperatorExpr::coordinate(i) * OperatorExpr::partial(j)
        - OperatorExpr::coordinate(j) * OperatorExpr::partial(i))
}

fn l_op(i: usize, j: usize) -> OperatorExpr {
    OperatorExpr::coordinate(i) * OperatorExpr::partial(j)
        - OperatorExpr::coordinate(j) * OperatorExpr::partial(i)
}

/// `Σ_{i<k in range} L_ik²`.
pub fn casimir(range: Range<usize>) -> OperatorExpr {
    let mut terms = Vec::new();
    for i in range.clone() {
        for k in i + 1..range.end {
            terms.push(l_op(i, k).squared());
        }
    }
    OperatorExpr::sum(terms)
}

/// Total squared angular momentum `L̂_p²` of block `p`.
pub fn block_casimir(spec: &ModelSpec, p: usize) -> Result<OperatorExpr> {
    check_block(spec, p, 1, spec.n_blocks())?;
    Ok(casimir(spec.partition.block_range(p)))
}

/// `Σ_a (∂_a L_ja + L_ja ∂_a)`, the kinetic part of every LRL vector.
fn lrl_kinetic(dim: usize, j: usize) -> OperatorExpr {
    OperatorExpr::sum((0..dim).filter(|&a| a != j).map(|a| {
        let l = l_op(j, a);
        OperatorExpr::partial(a) * l.clone() + l * OperatorExpr::partial(a)
    }))
}

/// Extended LRL vector `X̂_j`; zero unless `j` lies in the last block.
pub fn extended_lrl(spec: &ModelSpec, j: usize) -> Result<OperatorExpr> {
    let dim = spec.dim();
    if j >= dim {
        return Err(Error::IndexOutOfRange {
            what: "coordinate",
            index: j,
            bound: dim,
        });
    }
    if !spec.last_block().contains(&j) {
        return Ok(OperatorExpr::zero());
    }
    let p = &spec.partition;
    let mut terms = vec![
        lrl_kinetic(dim, j),
        OperatorExpr::mul_by(CoeffFn::coordinate(j).times(radial_power(p, 0, -1)).scaled(spec.eta)),
    ];
    for k in 1..spec.n_blocks() {
        let a = spec.alpha(k);
        if a != 0.0 {
            terms.push(OperatorExpr::mul_by(
                CoeffFn::coordinate(j).times(radial_power(p, k, -2)).scaled(-2.0 * a),
            ));
        }
    }
    Ok(OperatorExpr::sum(terms))
}

/// `Σ ρ_range² · α_i / r_i²` over blocks `blocks`, as a multiplication operator.
fn coupling_term(spec: &ModelSpec, outer: Range<usize>, blocks: Range<usize>) -> OperatorExpr {
    let p = &spec.partition;
    OperatorExpr::sum(blocks.filter(|&k| spec.alpha(k) != 0.0).map(|k| {
        OperatorExpr::mul_by(
            CoeffFn::radius_power(outer.start, outer.end, Exponent::int(2))
                .times(radial_power(p, k, -2))
                .scaled(spec.alpha(k)),
        )
    }))
}

/// `Ẑ_l` evaluated from its defining formula, for `1 ≤ l ≤ N`.
///
/// At `l = 1` this is `L̂_1² − α_1`, which reduces to `−α_1` for a
/// one-coordinate first block.
pub fn z_formula(spec: &ModelSpec, l: usize) -> Result<OperatorExpr> {
    check_block(spec, l, 1, spec.n_blocks())?;
    let end = spec.partition.boundary(l);
    Ok(casimir(0..end) - coupling_term(spec, 0..end, 1..l + 1))
}

/// `Ŷ_p` evaluated from its defining formula, for `1 ≤ p ≤ N`.
///
/// At `p = N` this is `L̂_N²`, which vanishes for a one-coordinate last block.
pub fn y_formula(spec: &ModelSpec, p: usize) -> Result<OperatorExpr> {
    check_block(spec, p, 1, spec.n_blocks())?;
    let start = spec.partition.boundary(p - 1);
    let dim = spec.dim();
    Ok(casimir(start..dim) - coupling_term(spec, start..dim, p..spec.n_blocks()))
}

/// `Ẑ_l` with the boundary convention `Ẑ_1 = −α_1`; valid for `1 ≤ l ≤ N−1`.
pub fn integral_z(spec: &ModelSpec, l: usize) -> Result<OperatorExpr> {
    check_block(spec, l, 1, spec.n_blocks().saturating_sub(1).max(1))?;
    if l == 1 {
        return Ok(OperatorExpr::constant(-spec.alpha(1)));
    }
    z_formula(spec, l)
}

/// `Ŷ_p` with the boundary convention `Ŷ_N = 0`; valid for `1 ≤ p ≤ N`.
pub fn integral_y(spec: &ModelSpec, p: usize) -> Result<OperatorExpr> {
    check_block(spec, p, 1, spec.n_blocks())?;
    if p == spec.n_blocks() {
        return Ok(OperatorExpr::zero());
    }
    y_formula(spec, p)
}

/// The `Ẑ`-type integral on every coordinate except `x_j`, for `j` in the
/// last block: `Σ_{i<k; i,k≠j} L_ik² − (r² − x_j²) Σ_{k<N} α_k/r_k²`.
///
/// Coincides with `Ẑ_{N−1}` when the last block has one coordinate.
pub fn z_excluding(spec: &ModelSpec, j: usize) -> Result<OperatorExpr> {
    let last = spec.last_block();
    if !last.contains(&j) {
        return Err(Error::IndexOutOfRange {
            what: "last-block coordinate",
            index: j,
            bound: last.end,
        });
    }
    let dim = spec.dim();
    let others: Vec<usize> = (0..dim).filter(|&k| k != j).collect();
    let mut terms = Vec::new();
    for (a, &i) in others.iter().enumerate() {
        for &k in &others[a + 1..] {
            terms.push(l_op(i, k).squared());
        }
    }
    let rho2 = OperatorExpr::mul_by(CoeffFn::radius_power(0, dim, Exponent::int(2)))
        - OperatorExpr::mul_by(CoeffFn::coordinate_power(j, Exponent::int(2)));
    let inverse = OperatorExpr::sum(
        (1..spec.n_blocks())
            .filter(|&k| spec.alpha(k) != 0.0)
            .map(|k| OperatorExpr::mul_by(radial_power(&spec.partition, k, -2).scaled(spec.alpha(k)))),
    );
    Ok(OperatorExpr::sum(terms) - rho2 * inverse)
}

/// Shift paired with [`z_excluding`]: `(D−3)h − h²` with `h = Σ_{i<N} (d_i−1)/2`.
pub fn script_n_excluding(partition: &Partition) -> f64 {
    let d = partition.dim() as f64;
    let h: f64 = (1..partition.n_blocks())
        .map(|i| (partition.size(i) as f64 - 1.0) / 2.0)
        .sum();
    (d - 3.0) * h - h * h
}

/// Shift constant `𝒩_p`; zero outside `2 ≤ p ≤ N−1`.
pub fn script_n(partition: &Partition, p: usize) -> f64 {
    if p < 2 || p + 1 > partition.n_blocks() {
        return 0.0;
    }
    script_n_formula(partition, p)
}

/// `𝒩_p` straight from its defining sums, for any `1 ≤ p ≤ N`.
pub fn script_n_formula(partition: &Partition, p: usize) -> f64 {
    let d: f64 = (1..=p).map(|i| partition.size(i) as f64).sum();
    let h: f64 = (1..=p).map(|i| (partition.size(i) as f64 - 1.0) / 2.0).sum();
    (d - 2.0) * h - h * h
}

/// Shift constant `ℳ_p`; zero outside `1 ≤ p ≤ N−1`.
pub fn script_m(partition: &Partition, p: usize) -> f64 {
    let n = partition.n_blocks();
    if p < 1 || p >= n {
        return 0.0;
    }
    let d: f64 = (p..=n).map(|i| partition.size(i) as f64).sum();
    let h: f64 = (p..n).map(|i| (partition.size(i) as f64 - 1.0) / 2.0).sum();
    (d - 2.0) * h - h * h
}

/// `(𝒩_p, ℳ_p)` with the zero boundary convention.
pub fn shift_constants(partition: &Partition, p: usize) -> (f64, f64) {
    (script_n(partition, p), script_m(partition, p))
}

/// `S_{first..=last}(q)`:
/// `ρ²Δ − E² − (n−2)E − ρ² Σ q_k/x_k²` over the listed coordinates, with `E`
/// the Euler operator and `n` the number of coordinates.
pub fn s_operator(first: usize, last: usize, q: &[f64]) -> Result<OperatorExpr> {
    if last <= first {
        return Err(Error::InvalidParameter(format!(
            "S operator needs last > first, got {first}..={last}"
        )));
    }
    let n = last - first + 1;
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
        });
    }
    let range = first..last + 1;
    let rho2 = CoeffFn::radius_power(first, last + 1, Exponent::int(2));
    let e = euler(range.clone());
    let mut terms = vec![
        OperatorExpr::mul_by(rho2.clone()) * laplacian(range.clone()),
        -e.squared(),
        e.scaled(-(n as f64 - 2.0)),
    ];
    for (k, &qk) in range.zip(q) {
        if qk != 0.0 {
            terms.push(OperatorExpr::mul_by(
                rho2.clone()
                    .times(CoeffFn::coordinate_power(k, Exponent::int(-2)))
                    .scaled(-qk),
            ));
        }
    }
    Ok(OperatorExpr::sum(terms))
}

/// Named operator.
#[derive(Clone, Debug)]
pub struct NamedOperator {
    pub name: String,
    pub op: OperatorExpr,
}

/// All constructed integrals of motion, plus the advertised number of
/// algebraically independent ones (`D + N + d_N − 2`).
#[derive(Clone, Debug)]
pub struct IntegralSet {
    pub operators: Vec<NamedOperator>,
    pub advertised_count: usize,
}

impl IntegralSet {
    /// A generating subset whose size equals the advertised count: `Ĥ`, the
    /// `d_k − 1` rotations `L_{first,j}` of each block, the LRL components of
    /// the last block (one fewer when `N = 1`), `Ẑ_2..Ẑ_{N−1}`, `Ŷ_1..Ŷ_{N−1}`.
    pub fn independent_basis(&self, spec: &ModelSpec) -> Vec<&NamedOperator> {
        let p = &spec.partition;
        let mut keep: Vec<String> = vec!["H".into()];
        for k in 1..=p.n_blocks() {
            let r = p.block_range(k);
            for j in r.start + 1..r.end {
                keep.push(format!("L_{},{}", r.start + 1, j + 1));
            }
        }
        let last = spec.last_block();
        let skip = usize::from(p.n_blocks() == 1);
        for j in last.start + skip..last.end {
            keep.push(format!("X_{}", j + 1));
        }
        for l in 2..p.n_blocks() {
            keep.push(format!("Z_{l}"));
        }
        for q in 1..p.n_blocks() {
            keep.push(format!("Y_{q}"));
        }
        keep.iter()
            .filter_map(|name| self.operators.iter().find(|o| &o.name == name))
            .collect()
    }
}

/// `{Ĥ, block L_ij, X̂_j (j in last block), Ẑ_2..Ẑ_{N−1}, Ŷ_1..Ŷ_{N−1}}`.
pub fn integral_set(spec: &ModelSpec) -> Result<IntegralSet> {
    let p = &spec.partition;
    let dim = p.dim();
    let n = p.n_blocks();
    let mut ops = vec![NamedOperator {
        name: "H".into(),
        op: hamiltonian(spec),
    }];
    for k in 1..=n {
        let r = p.block_range(k);
        for i in r.clone() {
            for j in i + 1..r.end {
                ops.push(NamedOperator {
                    name: format!("L_{},{}", i + 1, j + 1),
                    op: angular_momentum(dim, i, j)?,
                });
            }
        }
    }
    for j in spec.last_block() {
        ops.push(NamedOperator {
            name: format!("X_{}", j + 1),
            op: extended_lrl(spec, j)?,
        });
    }
    for l in 2..n {
        ops.push(NamedOperator {
            name: format!("Z_{l}"),
            op: integral_z(spec, l)?,
        });
    }
    for q in 1..n {
        ops.push(NamedOperator {
            name: format!("Y_{q}"),
            op: integral_y(spec, q)?,
        });
    }
    let advertised_count = dim + n + p.size(n) - 2;
    Ok(IntegralSet {
        operators: ops,
        advertised_count,
    })
}

/// Direct constructions for the all-singleton partition, written with
/// explicit inverse coordinate powers instead of block radii.
pub mod singleton {
    use super::*;

    fn inv_sq(k: usize) -> CoeffFn {
        CoeffFn::coordinate_power(k, Exponent::int(-2))
    }

    /// `X = Σ_k (p_k L_Dk + L_Dk p_k) + x_D(η/r − Σ 2α_i/x_i²)`.
    pub fn lrl(dim: usize, eta: f64, alpha: &[f64]) -> OperatorExpr {
        let d = dim - 1;
        let mut terms = vec![
            lrl_kinetic(dim, d),
            OperatorExpr::mul_by(
                CoeffFn::coordinate(d)
                    .times(CoeffFn::radius_power(0, dim, Exponent::int(-1)))
                    .scaled(eta),
            ),
        ];
        for (i, &a) in alpha.iter().enumerate() {
            terms.push(OperatorExpr::mul_by(CoeffFn::coordinate(d).times(inv_sq(i)).scaled(-2.0 * a)));
        }
        OperatorExpr::sum(terms)
    }

    fn sum_sq(range: Range<usize>) -> OperatorExpr {
        OperatorExpr::sum(range.map(|k| {
            OperatorExpr::mul_by(CoeffFn::coordinate_power(k, Exponent::int(2)))
        }))
    }

    fn inverse_sum(range: Range<usize>, alpha: &[f64]) -> OperatorExpr {
        OperatorExpr::sum(
            range
                .filter(|&k| k < alpha.len())
                .map(|k| OperatorExpr::mul_by(inv_sq(k).scaled(alpha[k]))),
        )
    }

    /// `Z_l = Σ_{i<k≤l} L_ik² − (Σ_{i≤l} x_i²)(Σ_{k≤l} α_k/x_k²)`.
    pub fn z(dim: usize, alpha: &[f64], l: usize) -> OperatorExpr {
        let _ = dim;
        casimir(0..l) - sum_sq(0..l) * inverse_sum(0..l, alpha)
    }

    /// `Y_p = Σ_{p≤i<k≤D} L_ik² − (Σ_{i≥p} x_i²)(Σ_{p≤k≤D−1} α_k/x_k²)`.
    pub fn y(dim: usize, alpha: &[f64], p: usize) -> OperatorExpr {
        casimir(p - 1..dim) - sum_sq(p - 1..dim) * inverse_sum(p - 1..dim - 1, alpha)
    }
}

/// Potential `V` for the LRL extension: a multiplication operator that is
/// meant to ignore the last `m` coordinates.
#[derive(Clone, Debug)]
pub struct GeneralPotential {
    pub m: usize,
    pub v: OperatorExpr,
}

impl GeneralPotential {
    pub fn new(m: usize, v: OperatorExpr) -> Result<Self> {
        if !v.is_multiplicative() {
            return Err(Error::InvalidParameter(
                "potential must be a multiplication operator".into(),
            ));
        }
        Ok(GeneralPotential { m, v })
    }

    /// `Σ_{k<N} α_k / r_k²` of a model, with `m = d_N`.
    pub fn from_model(spec: &ModelSpec) -> Self {
        let p = &spec.partition;
        let v = OperatorExpr::sum(
            (1..spec.n_blocks())
                .map(|k| OperatorExpr::mul_by(radial_power(p, k, -2).scaled(spec.alpha(k)))),
        );
        GeneralPotential {
            m: p.size(p.n_blocks()),
            v,
        }
    }
}

/// `−Δ − η/r + V`.
pub fn hamiltonian_with_potential(dim: usize, eta: f64, gp: &GeneralPotential) -> OperatorExpr {
    hydrogen_hamiltonian(dim, eta) + gp.v.clone()
}

/// `X_i = Σ_a (p_a L_ia + L_ia p_a) + x_i η/r − 2 x_i V`.
pub fn lrl_with_potential(dim: usize, eta: f64, i: usize, gp: &GeneralPotential) -> OperatorExpr {
    lrl_kinetic(dim, i)
        + OperatorExpr::mul_by(
            CoeffFn::coordinate(i)
                .times(CoeffFn::radius_power(0, dim, Exponent::int(-1)))
                .scaled(eta),
        )
        + OperatorExpr::mul_by(CoeffFn::coordinate(i).scaled(-2.0)) * gp.v.clone()
}

/// Outcome of [`check_potential_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialVerdict {
    pub independent_of_last_m: bool,
    pub euler_eigenvalue_minus_two: bool,
    pub max_gradient_residual: f64,
    pub max_euler_residual: f64,
    pub samples: usize,
}

impl PotentialVerdict {
    pub fn passed(&self) -> bool {
        self.independent_of_last_m && self.euler_eigenvalue_minus_two
    }
}

/// Checks `∂V/∂x_i = 0` for the last `m` coordinates and `Σ x_i ∂_i V = −2V`
/// at `n_samples` random points with `|x_i| ∈ [0.5, 2]`.
pub fn check_potential_conditions(
    gp: &GeneralPotential,
    dim: usize,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<PotentialVerdict> {
    if gp.m > dim {
        return Err(Error::InvalidParameter(format!("m = {} exceeds D = {dim}", gp.m)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_res: f64 = 0.0;
    let mut euler_res: f64 = 0.0;
    let mut done = 0;
    let budget = 100 * n_samples.max(1);
    let mut attempts = 0;
    while done < n_samples {
        attempts += 1;
        if attempts > budget {
            return Err(Error::NoAdmissiblePoint(budget));
        }
        let base: Arc<[f64]> = (0..dim)
            .map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let one = Jet::constant(base.clone(), 1, 1.0)?;
        let vj = match Evaluator::new(base.clone(), EPS_SING).apply(&gp.v, &one) {
            Ok(j) => j,
            Err(Error::SingularPoint { .. }) => continue,
            Err(e) => return Err(e),
        };
        let v = *vj.value();
        let grads: Vec<f64> = (0..dim).map(|i| vj.coeff(&unit(dim, i))).collect();
        let euler: f64 = grads.iter().zip(base.iter()).map(|(g, x)| g * x).sum();
        let scale = 1.0 + v.abs() + grads.iter().zip(base.iter()).map(|(g, x)| (g * x).abs()).sum::<f64>();
        for g in &grads[dim - gp.m..] {
            grad_res = grad_res.max(g.abs() / scale);
        }
        euler_res = euler_res.max((euler + 2.0 * v).abs() / scale);
        done += 1;
    }
    Ok(PotentialVerdict {
        independent_of_last_m: grad_res <= tol,
        euler_eigenvalue_minus_two: euler_res <= tol,
        max_gradient_residual: grad_res,
        max_euler_residual: euler_res,
        samples: n_samples,
    })
}

fn unit(dim: usize, i: usize) -> Vec<usize> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

/// Operators in the variables `(r_1, …, r_{N−1}, x_{D−d_N+1}, …, x_D)` used by
/// the similarity-transform identities. Each block Casimir is replaced by its
/// eigenvalue `−l_i(l_i + d_i − 2)`.
pub mod radial {
    use super::*;

    /// Ambient dimension `N + d_N − 1`.
    pub fn dim(spec: &ModelSpec) -> usize {
        spec.n_blocks() + spec.partition.size(spec.n_blocks()) - 1
    }

    fn casimir_value(spec: &ModelSpec, l: &[usize], i: usize) -> f64 {
        let d = spec.partition.size(i) as f64;
        let li = l[i - 1] as f64;
        -li * (li + d - 2.0)
    }

    /// `c_i = l_i(l_i + d_i − 2) + α_i + (d_i − 1)(d_i − 3)/4`.
    pub fn c_value(spec: &ModelSpec, l: &[usize], i: usize) -> f64 {
        let d = spec.partition.size(i) as f64;
        -casimir_value(spec, l, i) + spec.alpha(i) + (d - 1.0) * (d - 3.0) / 4.0
    }

    /// Radial block term `∂² + (d−1)/r ∂ + L̂²/r²` for variable `v` of block `i`,
    /// premultiplied by the outer `ρ²` over `outer`.
    fn block_term(spec: &ModelSpec, l: &[usize], outer: &Range<usize>, v: usize, i: usize) -> OperatorExpr {
        let rho2 = CoeffFn::radius_power(outer.start, outer.end, Exponent::int(2));
        let d = spec.partition.size(i) as f64;
        let mut terms = vec![OperatorExpr::mul_by(rho2.clone()) * OperatorExpr::partial(v).squared()];
        if d != 1.0 {
            terms.push(
                OperatorExpr::mul_by(
                    rho2.clone()
                        .times(CoeffFn::coordinate_power(v, Exponent::int(-1)))
                        .scaled(d - 1.0),
                ) * OperatorExpr::partial(v),
            );
        }
        let cas = casimir_value(spec, l, i) - spec.alpha(i);
        if cas != 0.0 {
            terms.push(OperatorExpr::mul_by(
                rho2.times(CoeffFn::coordinate_power(v, Exponent::int(-2))).scaled(cas),
            ));
        }
        OperatorExpr::sum(terms)
    }

    /// Radial form of `Ẑ_p`.
    pub fn z(spec: &ModelSpec, l: &[usize], p: usize) -> OperatorExpr {
        let outer = 0..p;
        let e = euler(outer.clone());
        let dsum: f64 = (1..=p).map(|i| spec.partition.size(i) as f64).sum();
        let mut terms: Vec<OperatorExpr> =
            (1..=p).map(|i| block_term(spec, l, &outer, i - 1, i)).collect();
        terms.push(-e.squared());
        terms.push(e.scaled(-(dsum - 2.0)));
        OperatorExpr::sum(terms)
    }

    /// Radial form of `Ŷ_p`; the last block's coordinates stay Cartesian.
    pub fn y(spec: &ModelSpec, l: &[usize], p: usize) -> OperatorExpr {
        let n = spec.n_blocks();
        let outer = p - 1..dim(spec);
        let e = euler(outer.clone());
        let dsum: f64 = (p..=n).map(|i| spec.partition.size(i) as f64).sum();
        let rho2 = CoeffFn::radius_power(outer.start, outer.end, Exponent::int(2));
        let mut terms: Vec<OperatorExpr> =
            (p..n).map(|i| block_term(spec, l, &outer, i - 1, i)).collect();
        terms.push(OperatorExpr::mul_by(rho2) * laplacian(n - 1..outer.end));
        terms.push(-e.squared());
        terms.push(e.scaled(-(dsum - 2.0)));
        OperatorExpr::sum(terms)
    }

    /// `Π_{i<N} r_i^{s(d_i−1)/2}` with `s = ±1`.
    pub fn gauge(spec: &ModelSpec, sign: i32) -> OperatorExpr {
        let mut c = CoeffFn::constant(1.0);
        for i in 1..spec.n_blocks() {
            let d = spec.partition.size(i) as i32;
            if d > 1 {
                c = c.times(CoeffFn::coordinate_power(i - 1, Exponent::halves(sign * (d - 1))));
            }
        }
        OperatorExpr::mul_by(c)
    }

    /// `G · A · G⁻¹`.
    pub fn conjugate(spec: &ModelSpec, a: &OperatorExpr) -> OperatorExpr {
        gauge(spec, 1) * (a.clone() * gauge(spec, -1))
    }

    /// `S_{1,p}(c_1..c_p) + 𝒩_p`.
    pub fn z_target(spec: &ModelSpec, l: &[usize], p: usize) -> Result<OperatorExpr> {
        let q: Vec<f64> = (1..=p).map(|i| c_value(spec, l, i)).collect();
        Ok(s_operator(0, p - 1, &q)? + OperatorExpr::constant(script_n(&spec.partition, p)))
    }

    /// `S_{p,N+d_N−1}(c_p..c_{N−1}, 0, …, 0) + ℳ_p`.
    pub fn y_target(spec: &ModelSpec, l: &[usize], p: usize) -> Result<OperatorExpr> {
        let n = spec.n_blocks();
        let last = dim(spec) - 1;
        let mut q: Vec<f64> = (p..n).map(|i| c_value(spec, l, i)).collect();
        q.resize(last - (p - 1) + 1, 0.0);
        Ok(s_operator(p - 1, last, &q)? + OperatorExpr::constant(script_m(&spec.partition, p)))
    }
}
