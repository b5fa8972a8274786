//! Finite-dimensional Hilbert-space model: projectors, observables, density
//! states, the Lüders rule, post-measurement mixtures, partial traces and
//! the projection lattice.
//!
//! All matrix deviations are Frobenius norms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, trial_seed};
use crate::tolerance::{Tolerances, PURITY_SLACK};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Computational basis vector `|i>` in dimension `d`.
pub fn ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// `U M U^dagger`.
pub fn conjugate(u: &CMatrix, m: &CMatrix) -> CMatrix {
    u * m * u.adjoint()
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() })
    }
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Number of singular values above `rel * largest`.
pub fn numerical_rank(m: &CMatrix, rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest <= f64::EPSILON {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * largest).count()
}

/// Orthonormal basis of the column span of `m`: Gram-Schmidt with column
/// pivoting and one re-orthogonalization pass, stopping once every residual
/// column is below `rel * (largest column norm)`.
pub fn column_span(m: &CMatrix, rel: f64) -> Vec<CVector> {
    let scale = m.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
    if m.ncols() == 0 || scale <= 1e3 * f64::EPSILON {
        return Vec::new();
    }
    let cutoff = (rel * scale).max(1e3 * f64::EPSILON * scale);
    let mut residual = m.clone();
    let mut basis: Vec<CVector> = Vec::new();
    while basis.len() < m.nrows() {
        let (k, norm) = residual.column_iter().map(|col| col.norm()).enumerate().fold((0, 0.0), |best, (k, n)| {
            if n > best.1 {
                (k, n)
            } else {
                best
            }
        });
        if norm <= cutoff {
            break;
        }
        let mut q: CVector = residual.column(k).into_owned();
        for b in &basis {
            q -= b * b.dotc(&q);
        }
        let q = q.normalize();
        for mut col in residual.column_iter_mut() {
            let overlap = q.dotc(&col);
            col -= &q * overlap;
        }
        basis.push(q);
    }
    basis
}

/// Hermitian idempotent matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProjectorJson", into = "ProjectorJson")]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

#[derive(Serialize, Deserialize)]
struct ProjectorJson(#[serde(with = "crate::matrix_json::matrix")] CMatrix);

impl TryFrom<ProjectorJson> for Projector {
    type Error = Error;
    fn try_from(value: ProjectorJson) -> Result<Self> {
        Projector::new(value.0)
    }
}

impl From<Projector> for ProjectorJson {
    fn from(p: Projector) -> Self {
        ProjectorJson(p.matrix)
    }
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        let deviation = (&matrix * &matrix - &matrix).norm();
        if deviation > tol.idem {
            return Err(Error::NotIdempotent { deviation });
        }
        Ok(Self::wrap(matrix))
    }

    fn wrap(matrix: CMatrix) -> Self {
        let rank = trace_re(&matrix).round().max(0.0) as usize;
        Projector { matrix, rank }
    }

    /// Wraps a matrix already known to be a projector up to rounding.
    pub(crate) fn trusted(matrix: CMatrix) -> Self {
        Self::wrap(hermitize(&matrix))
    }

    pub fn zero(d: usize) -> Self {
        Projector { matrix: CMatrix::zeros(d, d), rank: 0 }
    }

    pub fn identity(d: usize) -> Self {
        Projector { matrix: identity(d), rank: d }
    }

    /// Rank-one projector onto the span of `v`.
    pub fn onto(v: &CVector) -> Self {
        let v = v.normalize();
        Projector { matrix: outer(&v, &v), rank: 1 }
    }

    /// Projector onto the span of orthonormal `columns`.
    pub fn from_orthonormal(d: usize, columns: &[CVector]) -> Self {
        let mut m = CMatrix::zeros(d, d);
        for v in columns {
            m += outer(v, v);
        }
        Projector { matrix: m, rank: columns.len() }
    }

    /// Diagonal projector onto the listed computational basis vectors.
    pub fn diagonal(d: usize, indices: &[usize]) -> Self {
        let cols: Vec<CVector> = indices.iter().map(|&i| ket(d, i)).collect();
        Self::from_orthonormal(d, &cols)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `U P U^dagger`.
    pub fn conjugated(&self, u: &CMatrix) -> Projector {
        Projector::trusted(conjugate(u, &self.matrix))
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self, tol: &Tolerances) -> Vec<CVector> {
        column_span(&self.matrix, tol.rank)
    }
}

/// Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Observable { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Unit-trace positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct DensityState {
    matrix: CMatrix,
    pure: bool,
}

#[derive(Serialize, Deserialize)]
struct StateJson(#[serde(with = "crate::matrix_json::matrix")] CMatrix);

impl TryFrom<StateJson> for DensityState {
    type Error = Error;
    fn try_from(value: StateJson) -> Result<Self> {
        DensityState::new(value.0)
    }
}

impl From<DensityState> for StateJson {
    fn from(s: DensityState) -> Self {
        StateJson(s.matrix)
    }
}

impl DensityState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = trace_re(&matrix);
        if (trace - 1.0).abs() > tol.tr {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue =
            SymmetricEigen::new(hermitize(&matrix)).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let pure = purity_of(&matrix) > 1.0 - PURITY_SLACK;
        Ok(DensityState { matrix, pure })
    }

    /// Wraps a matrix produced by a trace-preserving construction:
    /// hermitizes and renormalizes the trace.
    pub(crate) fn trusted(matrix: CMatrix) -> Self {
        let m = hermitize(&matrix);
        let m = m.unscale(trace_re(&m));
        let purity = purity_of(&m);
        DensityState { matrix: m, pure: purity > 1.0 - PURITY_SLACK }
    }

    /// `|v><v|` for the normalized `v`.
    pub fn pure(v: &CVector) -> Self {
        let v = v.normalize();
        DensityState { matrix: outer(&v, &v), pure: true }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityState { matrix: identity(d).unscale(d as f64), pure: d == 1 }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        purity_of(&self.matrix)
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        (&self.matrix * a).trace().re
    }

    /// Unit vector with `rho = |v><v|`, phase fixed so the largest
    /// component is real and positive.
    pub fn pure_vector(&self) -> Result<CVector> {
        if !self.pure {
            return Err(Error::NotPure { purity: self.purity() });
        }
        let eig = SymmetricEigen::new(self.matrix.clone());
        let top = (0..eig.eigenvalues.len())
            .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("non-empty state");
        let v = eig.eigenvectors.column(top).into_owned();
        let k = (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap();
        let phase = v[k].conj() / v[k].norm();
        Ok(v * phase)
    }

    pub fn conjugated(&self, u: &CMatrix) -> DensityState {
        DensityState::trusted(conjugate(u, &self.matrix))
    }

    pub fn distance(&self, other: &DensityState) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

fn purity_of(m: &CMatrix) -> f64 {
    (m * m).trace().re
}

/// One weighted component of a finite mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: DensityState,
}

/// Finite convex combination with a distinguished decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub tag: String,
    pub components: Vec<MixtureComponent>,
}

impl Mixture {
    pub fn new(tag: impl Into<String>, components: Vec<MixtureComponent>, tol: &Tolerances) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if let Some(bad) = components.iter().find(|c| !(c.weight > 0.0 && c.weight <= 1.0 + tol.tr)) {
            return Err(Error::InvalidMixture(format!("weight {} outside (0, 1]", bad.weight)));
        }
        let d = components[0].state.dim();
        for comp in &components {
            ensure_dim(d, comp.state.dim())?;
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > tol.tr {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(Mixture { tag: tag.into(), components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].state.dim()
    }

    /// `sum_k w_k rho_k`.
    pub fn aggregate_matrix(&self) -> CMatrix {
        self.components
            .iter()
            .fold(CMatrix::zeros(self.dim(), self.dim()), |acc, c| acc + c.state.matrix().scale(c.weight))
    }

    pub fn aggregate(&self) -> DensityState {
        DensityState::trusted(self.aggregate_matrix())
    }

    /// Whether the components sum to `state` within `eps`.
    pub fn describes(&self, state: &DensityState, eps: f64) -> bool {
        (self.aggregate_matrix() - state.matrix()).norm() <= eps
    }
}

/// Eigenvalue with its spectral projector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjector {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// Spectral decomposition `A = sum lambda P_lambda` over distinct eigenvalues,
/// ascending; eigenvalues within `group_tol` of the first of their group are merged.
pub fn spectral_instrument(a: &Observable, group_tol: f64) -> Vec<SpectralProjector> {
    let d = a.dim();
    let eig = SymmetricEigen::new(hermitize(a.matrix()));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in order {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[k] - eig.eigenvalues[g[0]] <= group_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let eigenvalue = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let cols: Vec<CVector> = g.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
            SpectralProjector { eigenvalue, projector: Projector::from_orthonormal(d, &cols) }
        })
        .collect()
}

/// Probability of an outcome and, when it is non-negligible, the conditioned state.
#[derive(Debug, Clone, PartialEq)]
pub struct LudersOutcome {
    pub probability: f64,
    pub post: Option<DensityState>,
}

/// Lüders rule: `Tr(rho P)` and `P rho P / Tr(rho P)`.
pub fn luders_update(rho: &DensityState, p: &Projector, tol: &Tolerances) -> Result<LudersOutcome> {
    ensure_dim(rho.dim(), p.dim())?;
    Ok(luders_unchecked(rho.matrix(), p.matrix(), tol.zero))
}

pub(crate) fn luders_unchecked(rho: &CMatrix, p: &CMatrix, zero: f64) -> LudersOutcome {
    let branch = p * rho * p;
    let probability = trace_re(&branch).clamp(0.0, 1.0);
    let post = (probability > zero).then(|| DensityState::trusted(branch));
    LudersOutcome { probability, post }
}

/// Checks pairwise orthogonality and completeness of `projs`.
pub fn check_resolution(projs: &[&CMatrix], eps: f64) -> Result<()> {
    let Some(first) = projs.first() else {
        return Err(Error::NotResolution { reason: "empty", deviation: f64::INFINITY });
    };
    let d = first.nrows();
    for p in projs {
        ensure_dim(d, p.nrows())?;
    }
    for (i, p) in projs.iter().enumerate() {
        for q in &projs[i + 1..] {
            let deviation = (*p * *q).norm();
            if deviation > eps {
                return Err(Error::NotResolution { reason: "outcomes not orthogonal", deviation });
            }
        }
    }
    let sum = projs.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + *p);
    let deviation = (sum - identity(d)).norm();
    if deviation > eps {
        return Err(Error::NotResolution { reason: "outcomes do not sum to the identity", deviation });
    }
    Ok(())
}

/// Incoherent post-measurement state `sum P rho P` together with its
/// branch decomposition.
pub fn post_measurement_mixture(
    rho: &DensityState,
    projs: &[Projector],
    tol: &Tolerances,
) -> Result<(DensityState, Mixture)> {
    let mats: Vec<&CMatrix> = projs.iter().map(Projector::matrix).collect();
    check_resolution(&mats, tol.num)?;
    ensure_dim(rho.dim(), projs[0].dim())?;
    let d = rho.dim();
    let mut aggregate = CMatrix::zeros(d, d);
    let mut components = Vec::new();
    for p in projs {
        let branch = p.matrix() * rho.matrix() * p.matrix();
        aggregate += &branch;
        let outcome = luders_unchecked(rho.matrix(), p.matrix(), tol.zero);
        if let Some(post) = outcome.post {
            components.push(MixtureComponent { weight: outcome.probability, state: post });
        }
    }
    // renormalize weights dropped below the branch threshold
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for comp in &mut components {
        comp.weight /= total;
    }
    let mixture = Mixture { tag: format!("luders[{}]", projs.len()), components };
    Ok((DensityState::trusted(aggregate), mixture))
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    First,
    Second,
}

/// Partial trace of a `d1*d2` matrix; index `(i, k)` maps to `i*d2 + k`.
pub fn partial_trace_matrix(m: &CMatrix, d1: usize, d2: usize, keep: Factor) -> CMatrix {
    match keep {
        Factor::First => CMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()),
        Factor::Second => CMatrix::from_fn(d2, d2, |k, l| (0..d1).map(|i| m[(i * d2 + k, i * d2 + l)]).sum()),
    }
}

pub fn partial_trace(rho: &DensityState, d1: usize, d2: usize, keep: Factor) -> Result<DensityState> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidInput("factor dimensions must be positive".into()));
    }
    ensure_dim(d1 * d2, rho.dim())?;
    Ok(DensityState::trusted(partial_trace_matrix(rho.matrix(), d1, d2, keep)))
}

/// `I - P`.
pub fn subspace_ortho(p: &Projector) -> Projector {
    Projector { matrix: identity(p.dim()) - p.matrix(), rank: p.dim() - p.rank() }
}

/// Projector onto the span of both ranges.
pub fn subspace_join(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector> {
    ensure_dim(p.dim(), q.dim())?;
    let d = p.dim();
    let mut stacked = CMatrix::zeros(d, 2 * d);
    stacked.columns_mut(0, d).copy_from(p.matrix());
    stacked.columns_mut(d, d).copy_from(q.matrix());
    Ok(Projector::from_orthonormal(d, &column_span(&stacked, tol.rank)))
}

/// Projector onto the intersection of both ranges, `(P' v Q')'`.
pub fn subspace_meet(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector> {
    let join = subspace_join(&subspace_ortho(p), &subspace_ortho(q), tol)?;
    Ok(subspace_ortho(&join))
}

/// Lattice-theoretic commutativity in the projection lattice:
/// `P = (P ^ Q) v (P ^ Q')`.
pub fn lattice_commutes(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<bool> {
    let left = subspace_meet(p, q, tol)?;
    let right = subspace_meet(p, &subspace_ortho(q), tol)?;
    let join = subspace_join(&left, &right, tol)?;
    Ok((join.matrix() - p.matrix()).norm() <= tol.num)
}

/// A draw from the unitary group: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn sample_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = sample_gaussian(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Matrix of independent standard complex Gaussians, `E|z|^2 = 1`.
pub fn sample_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

pub fn sample_unit_vector(rng: &mut impl Rng, d: usize) -> CVector {
    sample_gaussian(rng, d, 1).column(0).normalize()
}

/// Uniformly oriented rank-`rank` projector.
pub fn sample_projector(rng: &mut impl Rng, d: usize, rank: usize) -> Projector {
    let u = sample_unitary(rng, d);
    let cols: Vec<CVector> = (0..rank).map(|k| u.column(k).into_owned()).collect();
    Projector::from_orthonormal(d, &cols)
}

/// Pure states are unitary columns; mixed states are normalized
/// Gaussian-Wishart matrices `G G^dagger / Tr`.
pub fn sample_state(rng: &mut impl Rng, d: usize, pure: bool) -> DensityState {
    if pure {
        DensityState::pure(&sample_unitary(rng, d).column(0).into_owned())
    } else {
        let g = sample_gaussian(rng, d, d);
        DensityState::trusted(&g * g.adjoint())
    }
}

pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    sample_unitary(&mut rng_from_seed(seed), d)
}

pub fn random_state(d: usize, pure: bool, seed: u64) -> DensityState {
    sample_state(&mut rng_from_seed(seed), d, pure)
}

/// Result of one covering trial in the projection lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoveringTrial {
    /// `p ^ a != 0`; the trial does not apply.
    Skipped,
    Holds {
        rank_a: usize,
        rank_join: usize,
    },
    Fails {
        rank_a: usize,
        rank_join: usize,
    },
}

/// Checks `rank(a v p) = rank(a) + 1` for an atom `p` with `p ^ a = 0`.
pub fn covering_trial(p: &Projector, a: &Projector, tol: &Tolerances) -> Result<CoveringTrial> {
    let meet = subspace_meet(p, a, tol)?;
    if numerical_rank(meet.matrix(), tol.rank) != 0 || meet.rank() != 0 {
        return Ok(CoveringTrial::Skipped);
    }
    let join = subspace_join(a, p, tol)?;
    let rank_a = numerical_rank(a.matrix(), tol.rank);
    let rank_join = numerical_rank(join.matrix(), tol.rank);
    Ok(if rank_join == rank_a + 1 {
        CoveringTrial::Holds { rank_a, rank_join }
    } else {
        CoveringTrial::Fails { rank_a, rank_join }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringFailure {
    pub trial: usize,
    pub trial_seed: u64,
    pub rank_a: usize,
    pub rank_join: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringRankReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Samples discarded because `p ^ a != 0`.
    pub resampled: usize,
    pub failures: Vec<CoveringFailure>,
    pub pass: bool,
}

/// Random covering trials in the projection lattice of dimension `d`:
/// atom `p` uniformly oriented, `a` a uniformly oriented subspace of rank
/// drawn from `0..d`.
pub fn covering_rank_check(d: usize, trials: usize, seed: u64, tol: &Tolerances) -> Result<CoveringRankReport> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("covering check needs d >= 2, got {d}")));
    }
    let mut resampled = 0;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let ts = trial_seed(seed, trial as u64);
        let mut rng = rng_from_seed(ts);
        loop {
            let rank = rng.random_range(0..d);
            let a = sample_projector(&mut rng, d, rank);
            let p = sample_projector(&mut rng, d, 1);
            match covering_trial(&p, &a, tol)? {
                CoveringTrial::Skipped => resampled += 1,
                CoveringTrial::Holds { .. } => break,
                CoveringTrial::Fails { rank_a, rank_join } => {
                    failures.push(CoveringFailure { trial, trial_seed: ts, rank_a, rank_join });
                    break;
                }
            }
        }
    }
    Ok(CoveringRankReport { dim: d, trials, seed, resampled, pass: failures.is_empty(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plus() -> CVector {
        CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).normalize()
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn spectral_identity_is_single_outcome() {
        let parts = spectral_instrument(&Observable::new(identity(3)).unwrap(), 1e-8);
        assert_eq!(parts.len(), 1);
        assert_abs_diff_eq!(parts[0].eigenvalue, 1.0, epsilon = 1e-12);
        assert!((parts[0].projector.matrix() - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn spectral_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        let parts = spectral_instrument(&Observable::new(a).unwrap(), 1e-8);
        assert_eq!(parts.len(), 2);
        assert_abs_diff_eq!(parts[0].eigenvalue, 0.0, epsilon = 1e-12);
        assert!((parts[0].projector.matrix() - Projector::diagonal(3, &[0, 1]).matrix()).norm() < 1e-12);
        assert_abs_diff_eq!(parts[1].eigenvalue, 1.0, epsilon = 1e-12);
        assert!((parts[1].projector.matrix() - Projector::diagonal(3, &[2]).matrix()).norm() < 1e-12);
    }

    #[test]
    fn spectral_pauli_x() {
        let parts = spectral_instrument(&Observable::new(pauli_x()).unwrap(), 1e-8);
        assert_eq!(parts.len(), 2);
        // oracle: eigenvectors (1, -1)/sqrt2 for -1 and (1, 1)/sqrt2 for +1
        let minus = CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]).normalize();
        assert_abs_diff_eq!(parts[0].eigenvalue, -1.0, epsilon = 1e-12);
        assert!((parts[0].projector.matrix() - outer(&minus, &minus)).norm() < 1e-12);
        assert_abs_diff_eq!(parts[1].eigenvalue, 1.0, epsilon = 1e-12);
        assert!((parts[1].projector.matrix() - outer(&plus(), &plus())).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_observable_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(Observable::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn luders_examples() {
        let rho = DensityState::pure(&ket(2, 0));
        let out = luders_update(&rho, &Projector::diagonal(2, &[0]), &tol()).unwrap();
        assert_abs_diff_eq!(out.probability, 1.0, epsilon = 1e-15);
        assert!(out.post.unwrap().distance(&rho) < 1e-15);

        let mixed = DensityState::maximally_mixed(2);
        let p = Projector::onto(&plus());
        let out = luders_update(&mixed, &p, &tol()).unwrap();
        assert_abs_diff_eq!(out.probability, 0.5, epsilon = 1e-15);
        assert!((out.post.unwrap().matrix() - p.matrix()).norm() < 1e-14);

        let out = luders_update(&rho, &Projector::diagonal(2, &[1]), &tol()).unwrap();
        assert_eq!(out.probability, 0.0);
        assert!(out.post.is_none());
    }

    #[test]
    fn luders_dimension_mismatch() {
        let rho = DensityState::maximally_mixed(3);
        assert!(matches!(luders_update(&rho, &Projector::identity(2), &tol()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mixture_of_plus_in_computational_basis() {
        let rho = DensityState::pure(&plus());
        let projs = [Projector::diagonal(2, &[0]), Projector::diagonal(2, &[1])];
        let (agg, mix) = post_measurement_mixture(&rho, &projs, &tol()).unwrap();
        // oracle: diag(1/2, 1/2) by direct arithmetic
        assert!((agg.matrix() - identity(2).scale(0.5)).norm() < 1e-15);
        assert_eq!(mix.components.len(), 2);
        for (k, comp) in mix.components.iter().enumerate() {
            assert_abs_diff_eq!(comp.weight, 0.5, epsilon = 1e-15);
            assert!((comp.state.matrix() - projs[k].matrix()).norm() < 1e-14);
        }
        assert!(mix.describes(&agg, 1e-12));
    }

    #[test]
    fn trivial_and_block_diagonal_mixtures() {
        let mut rng = rng_from_seed(3);
        let rho = sample_state(&mut rng, 3, false);
        let (agg, mix) = post_measurement_mixture(&rho, &[Projector::identity(3)], &tol()).unwrap();
        assert!(agg.distance(&rho) < 1e-14);
        assert_eq!(mix.components.len(), 1);

        let block = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.0),
                c(0.1, 0.2),
                c(0.0, 0.0),
                c(0.1, -0.2),
                c(0.3, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.2, 0.0),
            ],
        );
        let rho = DensityState::new(block).unwrap();
        let projs = [Projector::diagonal(3, &[0, 1]), Projector::diagonal(3, &[2])];
        let (agg, _) = post_measurement_mixture(&rho, &projs, &tol()).unwrap();
        assert!(agg.distance(&rho) < 1e-15);
    }

    #[test]
    fn non_resolution_rejected() {
        let rho = DensityState::maximally_mixed(2);
        let projs = [Projector::diagonal(2, &[0]), Projector::onto(&plus())];
        assert!(matches!(post_measurement_mixture(&rho, &projs, &tol()), Err(Error::NotResolution { .. })));
        let projs = [Projector::diagonal(2, &[0])];
        assert!(matches!(post_measurement_mixture(&rho, &projs, &tol()), Err(Error::NotResolution { .. })));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = rng_from_seed(9);
        let r1 = sample_state(&mut rng, 2, false);
        let r2 = sample_state(&mut rng, 3, false);
        let prod = DensityState::new(r1.matrix().kronecker(r2.matrix())).unwrap();
        assert!(partial_trace(&prod, 2, 3, Factor::First).unwrap().distance(&r1) < 1e-14);
        assert!(partial_trace(&prod, 2, 3, Factor::Second).unwrap().distance(&r2) < 1e-14);
        assert!(matches!(partial_trace(&prod, 2, 2, Factor::First), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn subspace_examples() {
        let t = tol();
        let mut rng = rng_from_seed(1);
        let p = sample_projector(&mut rng, 3, 2);
        assert!((subspace_join(&p, &Projector::zero(3), &t).unwrap().matrix() - p.matrix()).norm() < 1e-12);
        assert!((subspace_meet(&p, &Projector::identity(3), &t).unwrap().matrix() - p.matrix()).norm() < 1e-12);
        assert!((subspace_meet(&p, &p, &t).unwrap().matrix() - p.matrix()).norm() < 1e-12);

        let zero = Projector::diagonal(2, &[0]);
        let plus_p = Projector::onto(&plus());
        let join = subspace_join(&zero, &plus_p, &t).unwrap();
        let meet = subspace_meet(&zero, &plus_p, &t).unwrap();
        assert_eq!(join.rank(), 2);
        assert!((join.matrix() - identity(2)).norm() < 1e-12);
        assert_eq!(meet.rank(), 0);
        assert!(meet.matrix().norm() < 1e-12);
    }

    #[test]
    fn covering_trial_skips_atoms_inside() {
        let t = tol();
        let a = Projector::diagonal(3, &[0, 1]);
        let p = Projector::diagonal(3, &[1]);
        assert_eq!(covering_trial(&p, &a, &t).unwrap(), CoveringTrial::Skipped);
        let p = Projector::diagonal(3, &[2]);
        assert_eq!(covering_trial(&p, &a, &t).unwrap(), CoveringTrial::Holds { rank_a: 2, rank_join: 3 });
    }

    #[test]
    fn covering_check_small_dims() {
        let report = covering_rank_check(2, 50, 5, &tol()).unwrap();
        assert!(report.pass);
        assert!(covering_rank_check(1, 1, 0, &tol()).is_err());
    }

    #[test]
    fn random_constructions() {
        let u = random_unitary(5, 42);
        assert_eq!(u, random_unitary(5, 42));
        assert!(unitarity_deviation(&u) <= 1e-12);
        let s = random_state(4, false, 42);
        assert_eq!(s, random_state(4, false, 42));
        let eig = SymmetricEigen::new(s.matrix().clone());
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-12));
        assert_abs_diff_eq!(trace_re(s.matrix()), 1.0, epsilon = 1e-12);
        assert!(random_state(4, true, 1).is_pure());
        assert!(!s.is_pure());
    }

    #[test]
    fn pure_vector_recovers_state() {
        let s = random_state(4, true, 8);
        let v = s.pure_vector().unwrap();
        assert!((outer(&v, &v) - s.matrix()).norm() < 1e-12);
        assert!(DensityState::maximally_mixed(2).pure_vector().is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        let m = identity(2);
        assert!(matches!(DensityState::new(m), Err(Error::TraceNotOne { .. })));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityState::new(m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn projector_json_round_trip() {
        let p = sample_projector(&mut rng_from_seed(4), 3, 2);
        let text = serde_json::to_string(&p).unwrap();
        let back: Projector = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        let s = random_state(3, false, 4);
        let back: DensityState = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        let bad = "[[[1.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]";
        assert!(serde_json::from_str::<Projector>(bad).is_err());
    }
}
#[cfg(test)]
mod span_tests {
    use super::*;

    #[test]
    fn column_span_covers_range_of_low_rank_products() {
        let mut rng = crate::rng::rng_from_seed(1);
        for t in 0..300 {
            let d = 2 + t % 11;
            let r = 1 + t % d;
            let p = sample_projector(&mut rng, d, r);
            let m = p.matrix() * sample_gaussian(&mut rng, d, d);
            let cols = column_span(&m, 1e-8);
            assert_eq!(cols.len(), r);
            let mut u = CMatrix::zeros(d, r);
            for (k, v) in cols.iter().enumerate() {
                u.set_column(k, v);
            }
            assert!((&m - &u * u.adjoint() * &m).norm() < 1e-9);
            assert!((u.adjoint() * &u - identity(r)).norm() < 1e-12);
        }
    }
}
