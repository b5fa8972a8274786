//! Correlated two-factor states and the transfer of a conditioned joint
//! experiment from one tensor factor to a distant one.
//!
//! Sign convention: the two-qubit correlated state is the antisymmetric
//! vector `(|01> - |10>) / sqrt(2)`, so outcomes in any common basis are
//! anti-correlated.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hilbert::{
    c, column_span, ensure_dim, identity, ket, partial_trace_matrix, sample_gaussian, sample_unit_vector,
    sample_unitary, trace_re, CMatrix, CVector, DensityState, Factor, Mixture, MixtureComponent,
};
use crate::instrument::{apply, confluence_joint, distribution, ensure_commuting, random_partition, Instrument};
use crate::report::CheckReport;
use crate::rng::rng_from_seed;
use crate::spacetime::{spacelike, SpacetimeRegion};
use crate::tolerance::Tolerances;

pub fn singlet_vector() -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)])
}

pub fn singlet_state() -> DensityState {
    DensityState::pure(&singlet_vector())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolarizerKind {
    /// Basis `{cos t |0> + sin t |1>, -sin t |0> + cos t |1>}`.
    Linear { angle: f64 },
    /// Basis `{(|0> + i|1>)/sqrt(2), (|0> - i|1>)/sqrt(2)}`.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Arm {
    One,
    Two,
}

impl TryFrom<u8> for Arm {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Arm::One),
            2 => Ok(Arm::Two),
            _ => Err(Error::InvalidInput(format!("arm must be 1 or 2, got {v}"))),
        }
    }
}

impl From<Arm> for u8 {
    fn from(a: Arm) -> u8 {
        match a {
            Arm::One => 1,
            Arm::Two => 2,
        }
    }
}

/// Columns are the two pass / block directions of the polarizer.
pub fn polarizer_basis(kind: PolarizerKind) -> CMatrix {
    match kind {
        PolarizerKind::Linear { angle } => {
            let (s, co) = angle.sin_cos();
            CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
        }
        PolarizerKind::Circular => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(0.0, h), c(0.0, -h)])
        }
    }
}

/// Two-outcome instrument on the two-qubit space: outcome 0 is passage.
pub fn polarizer_instrument(kind: PolarizerKind, arm: Arm) -> Instrument {
    let label = match (kind, arm) {
        (PolarizerKind::Linear { angle }, a) => format!("linear({angle})@{}", u8::from(a)),
        (PolarizerKind::Circular, a) => format!("circular@{}", u8::from(a)),
    };
    let local = Instrument::from_basis(label, &polarizer_basis(kind));
    match arm {
        Arm::One => local.on_first_factor(2),
        Arm::Two => local.on_second_factor(2),
    }
}

/// Measures arm 1 of the singlet along `basis` and describes arm 2: the
/// aggregate state together with the branch decomposition, one component
/// per arm-1 outcome in order.
pub fn remote_mixture(basis: [&CVector; 2], tol: &Tolerances) -> Result<(DensityState, Mixture)> {
    for v in basis {
        ensure_dim(2, v.len())?;
    }
    let gram = CMatrix::from_fn(2, 2, |a, b| basis[a].dotc(basis[b]));
    let deviation = (gram - identity(2)).norm();
    if deviation > tol.num {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut columns = CMatrix::zeros(2, 2);
    columns.set_column(0, basis[0]);
    columns.set_column(1, basis[1]);
    let arm1 = Instrument::from_basis("arm1", &columns).on_first_factor(2);
    let branches = apply(&arm1, &singlet_state(), tol)?;
    let components = branches
        .branches
        .iter()
        .filter_map(|b| {
            b.state.as_ref().map(|s| MixtureComponent {
                weight: b.probability,
                state: DensityState::trusted(partial_trace_matrix(s.matrix(), 2, 2, Factor::Second)),
            })
        })
        .collect();
    let mixture = Mixture::new("arm2_given_arm1", components, tol)?;
    Ok((mixture.aggregate(), mixture))
}

/// `sum_mu Q_mu (sum_lambda P_lambda rho P_lambda) Q_mu`: the unconditioned
/// state after `first` and then `second`.
pub fn composed_measurement(first: &Instrument, second: &Instrument, rho: &DensityState) -> Result<CMatrix> {
    ensure_dim(first.dim(), rho.dim())?;
    ensure_dim(second.dim(), rho.dim())?;
    let after_first: CMatrix = first
        .outcomes()
        .iter()
        .map(|p| p.matrix() * rho.matrix() * p.matrix())
        .fold(CMatrix::zeros(rho.dim(), rho.dim()), |acc, m| acc + m);
    Ok(second
        .outcomes()
        .iter()
        .map(|q| q.matrix() * &after_first * q.matrix())
        .fold(CMatrix::zeros(rho.dim(), rho.dim()), |acc, m| acc + m))
}

/// `H = H1 (x) H2` with index `(a, b) -> a * d2 + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSplit {
    pub d1: usize,
    pub d2: usize,
}

impl TensorSplit {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidInput("factor dimensions must be positive".into()));
        }
        Ok(TensorSplit { d1, d2 })
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// `X (x) I`.
    pub fn embed_first(&self, x: &CMatrix) -> CMatrix {
        x.kronecker(&identity(self.d2))
    }

    /// `I (x) Y`.
    pub fn embed_second(&self, y: &CMatrix) -> CMatrix {
        identity(self.d1).kronecker(y)
    }

    /// Distance from `m` to the nearest operator acting on one factor only.
    pub fn factor_deviation(&self, m: &CMatrix, factor: Factor) -> Result<f64> {
        ensure_dim(self.dim(), m.nrows())?;
        let rebuilt = match factor {
            Factor::First => {
                self.embed_first(&partial_trace_matrix(m, self.d1, self.d2, Factor::First).unscale(self.d2 as f64))
            }
            Factor::Second => {
                self.embed_second(&partial_trace_matrix(m, self.d1, self.d2, Factor::Second).unscale(self.d1 as f64))
            }
        };
        Ok((m - rebuilt).norm())
    }

    pub fn ensure_on(&self, instrument: &Instrument, factor: Factor, eps: f64) -> Result<()> {
        for p in instrument.outcomes() {
            let deviation = self.factor_deviation(p.matrix(), factor)?;
            if deviation > eps {
                let factor = if factor == Factor::First { 1 } else { 2 };
                return Err(Error::NotOnFactor { factor, deviation });
            }
        }
        Ok(())
    }
}

/// How the free choices of the construction are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    /// Smallest admissible middle index, first basis vector.
    #[default]
    First,
    /// Largest admissible middle index, last basis vector.
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiPrimeOptions {
    /// Seed of the random matrix whose projected columns give the block bases.
    pub basis_seed: u64,
    pub choice: Choice,
}

impl Default for PsiPrimeOptions {
    fn default() -> Self {
        PsiPrimeOptions { basis_seed: 0, choice: Choice::First }
    }
}

/// One non-zero block `P_i Q_j Q'_k H` with its orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    #[serde(with = "crate::matrix_json::matrix")]
    pub basis: CMatrix,
}

/// Where the weight of the `(i, j)` outcome of the original pair was put:
/// block `(i, p, j)`, basis vector `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub i: usize,
    pub j: usize,
    pub p: usize,
    pub beta: usize,
    pub amplitude: f64,
}

/// Coordinates of the original and the constructed vector in one block basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub alpha: usize,
    pub original: [f64; 2],
    pub constructed: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiPrimeResult {
    pub split: TensorSplit,
    #[serde(with = "crate::matrix_json::vector")]
    pub psi_prime: CVector,
    pub blocks: Vec<Block>,
    pub placements: Vec<Placement>,
    pub components: Vec<Component>,
}

fn unit_check(psi: &CVector, tol: &Tolerances) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol.num {
        return Err(Error::InvalidInput(format!("state vector has norm {norm}, expected 1")));
    }
    Ok(())
}

/// The `r` leading left singular vectors of `m`.
fn leading_columns(m: &CMatrix, r: usize) -> CMatrix {
    let cols = column_span(m, 0.0);
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, r);
    for (k, v) in cols.iter().take(r).enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Builds a vector on which the distant instrument `remote` (on factor 2)
/// reproduces, jointly with `first`, the statistics that `second` (on
/// factor 1) has jointly with `first` on `psi`. Outcome `k` of `remote`
/// stands for outcome `k` of `second`.
pub fn construct_psi_prime(
    split: TensorSplit,
    first: &Instrument,
    second: &Instrument,
    remote: &Instrument,
    psi: &CVector,
    options: PsiPrimeOptions,
    tol: &Tolerances,
) -> Result<PsiPrimeResult> {
    let d = split.dim();
    for inst in [first, second, remote] {
        ensure_dim(d, inst.dim())?;
    }
    ensure_dim(d, psi.len())?;
    unit_check(psi, tol)?;
    split.ensure_on(first, Factor::First, tol.num)?;
    split.ensure_on(second, Factor::First, tol.num)?;
    split.ensure_on(remote, Factor::Second, tol.num)?;
    ensure_commuting(first, second, tol.num)?;
    if remote.len() != second.len() {
        return Err(Error::InvalidInput(format!(
            "remote instrument has {} outcomes, expected {}",
            remote.len(),
            second.len()
        )));
    }

    let (n, m) = (first.len(), second.len());
    let g = sample_gaussian(&mut rng_from_seed(options.basis_seed), d, d);
    let mut blocks = Vec::new();
    let mut index = vec![None; n * m * m];
    let mut coords: Vec<CVector> = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let pq = first.outcome(i).matrix() * second.outcome(j).matrix();
            for k in 0..m {
                let r = pq.clone() * remote.outcome(k).matrix();
                let rank = trace_re(&r).round().max(0.0) as usize;
                if rank == 0 {
                    continue;
                }
                let basis = leading_columns(&(&r * &g), rank);
                coords.push(basis.adjoint() * psi);
                index[(i * m + j) * m + k] = Some(blocks.len());
                blocks.push(Block { i, j, k, basis });
            }
        }
    }

    let mut psi_prime = CVector::zeros(d);
    let mut placements = Vec::new();
    let mut constructed: Vec<CVector> = coords.iter().map(|v| CVector::zeros(v.len())).collect();
    for i in 0..n {
        for j in 0..m {
            let weight: f64 = (0..m).filter_map(|k| index[(i * m + j) * m + k]).map(|b| coords[b].norm_squared()).sum();
            let valid: Vec<usize> = (0..m).filter(|&p| index[(i * m + p) * m + j].is_some()).collect();
            let chosen = match options.choice {
                Choice::First => valid.first(),
                Choice::Last => valid.last(),
            };
            let Some(&p) = chosen else {
                if weight.sqrt() > tol.zero {
                    return Err(Error::EmptyLambda { i, j });
                }
                continue;
            };
            let b = index[(i * m + p) * m + j].expect("valid index");
            let beta = match options.choice {
                Choice::First => 0,
                Choice::Last => blocks[b].basis.ncols() - 1,
            };
            let amplitude = weight.sqrt();
            psi_prime += blocks[b].basis.column(beta) * c(amplitude, 0.0);
            constructed[b][beta] = c(amplitude, 0.0);
            placements.push(Placement { i, j, p, beta, amplitude });
        }
    }

    let components = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, blk)| {
            let orig = &coords[b];
            let cons = &constructed[b];
            (0..blk.basis.ncols()).map(move |alpha| Component {
                i: blk.i,
                j: blk.j,
                k: blk.k,
                alpha,
                original: [orig[alpha].re, orig[alpha].im],
                constructed: [cons[alpha].re, cons[alpha].im],
            })
        })
        .collect();

    Ok(PsiPrimeResult { split, psi_prime, blocks, placements, components })
}

/// Largest discrepancies in the three equalities between `(first, second)`
/// on `psi` and `(first_prime, remote)` on `psi_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpDeviations {
    pub joint: f64,
    pub conditional: f64,
    pub marginal: f64,
}

impl EpDeviations {
    pub fn max(&self) -> f64 {
        self.joint.max(self.conditional).max(self.marginal)
    }
}

pub fn ep_deviations(
    first: &Instrument,
    second: &Instrument,
    psi: &CVector,
    first_prime: &Instrument,
    remote: &Instrument,
    psi_prime: &CVector,
    tol: &Tolerances,
) -> Result<EpDeviations> {
    let (p, q) = (DensityState::pure(psi), DensityState::pure(psi_prime));
    let joint = confluence_joint(first_prime, remote, &q, tol)?
        .max_probability_diff(&confluence_joint(first, second, &p, tol)?);

    let before = apply(first, &p, tol)?;
    let after = apply(first_prime, &q, tol)?;
    let marginal = before
        .branches
        .iter()
        .zip(&after.branches)
        .map(|(a, b)| (a.probability - b.probability).abs())
        .fold(0.0, f64::max);
    let mut conditional = 0.0f64;
    for (a, b) in before.branches.iter().zip(&after.branches) {
        let dev = match (&a.state, &b.state) {
            (Some(sa), Some(sb)) => distribution(second, sa)?.max_abs_diff(&distribution(remote, sb)?),
            (Some(_), None) => a.probability,
            (None, Some(_)) => b.probability,
            (None, None) => 0.0,
        };
        conditional = conditional.max(dev);
    }
    Ok(EpDeviations { joint, conditional, marginal })
}

/// Factor-2 instrument used by [`verify_ep`]: the computational basis of
/// `H2` with the trailing basis vectors merged into the last outcome.
pub fn canonical_remote(d2: usize, m: usize) -> Result<Instrument> {
    if m == 0 || d2 < m {
        return Err(Error::FactorTooSmall { dim: d2, outcomes: m });
    }
    let groups: Vec<Vec<usize>> = (0..m).map(|k| if k + 1 < m { vec![k] } else { (k..d2).collect() }).collect();
    Ok(Instrument::from_groups("remote", &identity(d2), &groups))
}

/// How [`verify_ep`] obtains a tensor split with both instruments on the
/// first factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Use this split as is.
    Given(TensorSplit),
    /// Find a basis in which both instruments have the form `X (x) I`.
    Detect,
    /// Append a second factor of dimension equal to the outcome count of the
    /// second instrument and work with `psi (x) |0>`.
    Ancilla,
}

/// Unitary `V` with `V^dagger P_i Q_j V = X_ij (x) I_d2` for every outcome
/// pair, where `d2` is the smallest common divisor of the joint block ranks
/// that is at least `min_d2`.
pub fn detect_split(
    first: &Instrument,
    second: &Instrument,
    min_d2: usize,
    tol: &Tolerances,
) -> Result<(TensorSplit, CMatrix)> {
    ensure_commuting(first, second, tol.num)?;
    let d = first.dim();
    let mut ranges = Vec::new();
    for p in first.outcomes() {
        for q in second.outcomes() {
            let r = p.matrix() * q.matrix();
            let rank = trace_re(&r).round().max(0.0) as usize;
            if rank > 0 {
                ranges.push((r, rank));
            }
        }
    }
    let g = ranges.iter().fold(0usize, |acc, (_, r)| gcd(acc, *r));
    let d2 = (min_d2.max(1)..=g).find(|k| g % k == 0).ok_or(Error::NoTensorSplit)?;
    let split = TensorSplit::new(d / d2, d2)?;
    let mut v = CMatrix::zeros(d, d);
    let mut col = 0;
    for (r, rank) in &ranges {
        let basis = leading_columns(r, *rank);
        for t in 0..*rank {
            v.set_column(col, &basis.column(t));
            col += 1;
        }
    }
    if col != d || crate::hilbert::unitarity_deviation(&v) > tol.num {
        return Err(Error::NoTensorSplit);
    }
    Ok((split, v))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Space-like witness regions (1+1): the first factor's instruments and the
/// constructed remote instrument.
pub fn witness_regions() -> (SpacetimeRegion, SpacetimeRegion) {
    (
        SpacetimeRegion::interval_1d([0.0, 1.0], [0.0, 1.0]).expect("valid box"),
        SpacetimeRegion::interval_1d([0.0, 1.0], [5.0, 6.0]).expect("valid box"),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpOutcome {
    pub report: CheckReport,
    pub split: TensorSplit,
    /// `first` as it acts on the space hosting `remote` and `psi_prime`.
    pub first: Instrument,
    pub remote: Instrument,
    #[serde(with = "crate::matrix_json::vector")]
    pub psi_prime: CVector,
    pub deviations: EpDeviations,
}

/// Produces a remote instrument and a vector realizing the joint experiment
/// `(first, second)` on `p` with a space-like separated partner, and checks
/// the three equalities.
pub fn verify_ep(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    mode: SplitMode,
    seed: u64,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<EpOutcome> {
    ensure_dim(first.dim(), second.dim())?;
    ensure_dim(first.dim(), p.dim())?;
    ensure_commuting(first, second, tol.num)?;
    let psi = p.pure_vector()?;
    let m = second.len();

    // work space, the instruments in it, and the map from work coordinates
    // back to the output space
    let (split, work_first, work_second, work_psi, back, out_first) = match mode {
        SplitMode::Given(split) => {
            ensure_dim(split.dim(), first.dim())?;
            (split, first.clone(), second.clone(), psi.clone(), None, first.clone())
        }
        SplitMode::Detect => {
            let (split, v) = detect_split(first, second, m, tol)?;
            let vt = v.adjoint();
            (split, first.conjugated(&vt), second.conjugated(&vt), &vt * &psi, Some(v), first.clone())
        }
        SplitMode::Ancilla => {
            let split = TensorSplit::new(first.dim(), m)?;
            let extended = psi.kronecker(&ket(m, 0));
            let f = first.on_first_factor(m);
            (split, f.clone(), second.on_first_factor(m), extended, None, f)
        }
    };
    let remote_local = canonical_remote(split.d2, m)?;
    let work_remote = remote_local.on_second_factor(split.d1).with_label("remote");
    let options = PsiPrimeOptions { basis_seed: seed, choice: Choice::First };
    let built = construct_psi_prime(split, &work_first, &work_second, &work_remote, &work_psi, options, tol)?;

    let (remote, psi_prime) = match &back {
        Some(v) => (work_remote.conjugated(v), v * &built.psi_prime),
        None => (work_remote, built.psi_prime.clone()),
    };
    let deviations = ep_deviations(first, second, &psi, &out_first, &remote, &psi_prime, tol)?;
    let (region_first, region_remote) = witness_regions();
    let separated = spacelike(&region_first, &region_remote)?;

    let mut report = CheckReport::new("ep_equivalence", check_tol);
    report.record(deviations.max(), Some(seed));
    if !separated {
        report.pass = false;
    }
    let mode_name = match mode {
        SplitMode::Given(_) => "given",
        SplitMode::Detect => "detect",
        SplitMode::Ancilla => "ancilla",
    };
    let report = report.with_detail(json!({
        "split": { "d1": split.d1, "d2": split.d2, "mode": mode_name },
        "joint": deviations.joint,
        "conditional": deviations.conditional,
        "marginal": deviations.marginal,
        "norm_deviation": (psi_prime.norm() - 1.0).abs(),
        "witness": { "first": region_first, "remote": region_remote, "spacelike": separated },
    }));
    Ok(EpOutcome { report, split, first: out_first, remote, psi_prime, deviations })
}

/// A random input for the construction: `first` and `second` coarse-grain
/// one random basis of factor 1, `remote` is a random factor-2 measurement
/// with as many outcomes as `second`, `psi` is a random unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EpCase {
    pub split: TensorSplit,
    pub first: Instrument,
    pub second: Instrument,
    pub remote: Instrument,
    pub psi: CVector,
}

pub fn random_ep_case(rng: &mut impl Rng, d1: usize, d2: usize) -> Result<EpCase> {
    let split = TensorSplit::new(d1, d2)?;
    if d1 < 2 || d2 < 2 {
        return Err(Error::InvalidInput("random cases need both factors of dimension >= 2".into()));
    }
    let u = sample_unitary(rng, d1);
    let n = rng.random_range(2..=d1);
    let m = rng.random_range(2..=d1.min(d2));
    let first = Instrument::from_groups("I", &u, &random_partition(rng, d1, n)).on_first_factor(d2);
    let second = Instrument::from_groups("J", &u, &random_partition(rng, d1, m)).on_first_factor(d2);
    let w = sample_unitary(rng, d2);
    let remote = Instrument::from_groups("J'", &w, &random_partition(rng, d2, m)).on_second_factor(d1);
    let psi = sample_unit_vector(rng, split.dim());
    Ok(EpCase { split, first, second, remote, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::sample_state;
    use crate::hilbert::Projector;
    use crate::instrument::sequential;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn singlet_reduces_to_half_identity() {
        let s = singlet_state();
        for keep in [Factor::First, Factor::Second] {
            let r = partial_trace_matrix(s.matrix(), 2, 2, keep);
            assert!((r - identity(2).scale(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn singlet_is_anticorrelated() {
        for kind in [PolarizerKind::Linear { angle: 0.37 }, PolarizerKind::Circular] {
            let a = polarizer_instrument(kind, Arm::One);
            let b = polarizer_instrument(kind, Arm::Two);
            let joint = confluence_joint(&a, &b, &singlet_state(), &tol()).unwrap();
            assert_abs_diff_eq!(joint.probability(0, 0), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(joint.probability(1, 1), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(joint.probability(0, 1), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn singlet_is_invariant_under_local_pairs() {
        let mut rng = rng_from_seed(3);
        let v = singlet_vector();
        for _ in 0..20 {
            let u = sample_unitary(&mut rng, 2);
            let w = u.kronecker(&u) * &v;
            // equal up to a global phase
            assert_abs_diff_eq!(w.dotc(&v).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn polarizer_examples() {
        let z = polarizer_instrument(PolarizerKind::Linear { angle: 0.0 }, Arm::One);
        let expected0 = Projector::diagonal(2, &[0]).matrix().kronecker(&identity(2));
        assert!((z.outcome(0).matrix() - expected0).norm() < 1e-15);
        let far = polarizer_instrument(PolarizerKind::Circular, Arm::Two);
        assert!(crate::instrument::max_commutator(&z, &far) < 1e-15);
        let near = polarizer_instrument(PolarizerKind::Circular, Arm::One);
        assert!(crate::instrument::max_commutator(&z, &near) > 0.1);
        assert!(Arm::try_from(3).is_err());
    }

    #[test]
    fn remote_mixture_computational() {
        let (agg, mix) = remote_mixture([&ket(2, 0), &ket(2, 1)], &tol()).unwrap();
        assert!((agg.matrix() - identity(2).scale(0.5)).norm() < 1e-15);
        assert_eq!(mix.components.len(), 2);
        assert_abs_diff_eq!(mix.components[0].weight, 0.5, epsilon = 1e-15);
        assert!((mix.components[0].state.matrix() - Projector::diagonal(2, &[1]).matrix()).norm() < 1e-15);
        assert!((mix.components[1].state.matrix() - Projector::diagonal(2, &[0]).matrix()).norm() < 1e-15);
    }

    #[test]
    fn remote_mixture_rejects_skew_basis() {
        let skew = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).normalize();
        assert!(matches!(remote_mixture([&ket(2, 0), &skew], &tol()), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn composed_measurement_matches_sequential_aggregate() {
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let rho = sample_state(&mut rng, 4, false);
            let a = crate::instrument::random_instrument(&mut rng, 4, "A");
            let b = crate::instrument::random_instrument(&mut rng, 4, "B");
            let composed = composed_measurement(&a, &b, &rho).unwrap();
            let agg = sequential(&a, &b, &rho, &tol()).unwrap().aggregate().unwrap();
            assert!((composed - agg.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn factor_deviation_detects_support() {
        let split = TensorSplit::new(2, 3).unwrap();
        let x = Projector::diagonal(2, &[0]).into_matrix();
        let y = Projector::diagonal(3, &[2]).into_matrix();
        assert!(split.factor_deviation(&split.embed_first(&x), Factor::First).unwrap() < 1e-15);
        assert!(split.factor_deviation(&split.embed_second(&y), Factor::Second).unwrap() < 1e-15);
        assert!(split.factor_deviation(&split.embed_second(&y), Factor::First).unwrap() > 0.1);
    }

    fn plus_zero_case() -> (TensorSplit, Instrument, Instrument, Instrument, CVector) {
        let split = TensorSplit::new(2, 2).unwrap();
        let i = Instrument::computational(2).on_first_factor(2);
        let j = i.clone();
        let jp = Instrument::computational(2).on_second_factor(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]).kronecker(&ket(2, 0));
        (split, i, j, jp, psi)
    }

    #[test]
    fn psi_prime_hand_example() {
        let (split, i, j, jp, psi) = plus_zero_case();
        let out = construct_psi_prime(split, &i, &j, &jp, &psi, PsiPrimeOptions::default(), &tol()).unwrap();
        // ||P_i Q'_k psi'||^2 by brute force over all components of psi'
        for a in 0..2 {
            for k in 0..2 {
                let w: f64 =
                    (0..4).filter(|idx| idx / 2 == a && idx % 2 == k).map(|idx| out.psi_prime[idx].norm_sqr()).sum();
                let expected = if a == k { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(w, expected, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(out.psi_prime.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psi_prime_trivial_second() {
        let split = TensorSplit::new(2, 3).unwrap();
        let i = polarizer_basis(PolarizerKind::Linear { angle: 0.4 });
        let i = Instrument::from_basis("I", &i).on_first_factor(3);
        let j = Instrument::trivial(6);
        let jp = Instrument::trivial(6);
        let psi = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]).kronecker(&ket(3, 1));
        let out = construct_psi_prime(split, &i, &j, &jp, &psi, PsiPrimeOptions::default(), &tol()).unwrap();
        let dev = ep_deviations(&i, &j, &psi, &i, &jp, &out.psi_prime, &tol()).unwrap();
        assert!(dev.max() < 1e-12);
    }

    #[test]
    fn psi_prime_random_cases_and_choice_independence() {
        let mut rng = rng_from_seed(21);
        for t in 0..20 {
            let d1 = [2, 4][t % 2];
            let d2 = [2, 3][(t / 2) % 2];
            let case = random_ep_case(&mut rng, d1, d2).unwrap();
            let mut vectors = Vec::new();
            for (seed, choice) in [(1, Choice::First), (2, Choice::Last)] {
                let out = construct_psi_prime(
                    case.split,
                    &case.first,
                    &case.second,
                    &case.remote,
                    &case.psi,
                    PsiPrimeOptions { basis_seed: seed, choice },
                    &tol(),
                )
                .unwrap();
                let dev = ep_deviations(
                    &case.first,
                    &case.second,
                    &case.psi,
                    &case.first,
                    &case.remote,
                    &out.psi_prime,
                    &tol(),
                )
                .unwrap();
                assert!(dev.max() < 1e-10, "trial {t}: {dev:?}");
                vectors.push(out.psi_prime);
            }
            assert!((&vectors[0] - &vectors[1]).norm() > 1e-6);
        }
    }

    #[test]
    fn psi_prime_rejects_misplaced_instruments() {
        let (split, i, j, jp, psi) = plus_zero_case();
        let opts = PsiPrimeOptions::default();
        assert!(matches!(
            construct_psi_prime(split, &i, &jp, &jp, &psi, opts, &tol()),
            Err(Error::NotOnFactor { factor: 1, .. })
        ));
        assert!(matches!(
            construct_psi_prime(split, &i, &j, &j, &psi, opts, &tol()),
            Err(Error::NotOnFactor { factor: 2, .. })
        ));
        let short = psi.scale(0.5);
        assert!(construct_psi_prime(split, &i, &j, &jp, &short, opts, &tol()).is_err());
    }

    #[test]
    fn psi_prime_reports_empty_lambda() {
        // remote outcome 1 is zero, but the pair (0, 1) carries weight
        let split = TensorSplit::new(2, 2).unwrap();
        let i = Instrument::trivial(4);
        let j = Instrument::computational(2).on_first_factor(2);
        let jp = Instrument::new("J'", vec![Projector::identity(2), Projector::zero(2)], &tol())
            .unwrap()
            .on_second_factor(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]).kronecker(&ket(2, 0));
        let err = construct_psi_prime(split, &i, &j, &jp, &psi, PsiPrimeOptions::default(), &tol()).unwrap_err();
        assert_eq!(err, Error::EmptyLambda { i: 0, j: 1 });
    }

    #[test]
    fn verify_ep_modes() {
        let (split, i, _, _, psi) = plus_zero_case();
        let p = DensityState::pure(&psi);
        let same = verify_ep(&i, &i, &p, SplitMode::Given(split), 0, &tol(), 1e-10).unwrap();
        assert!(same.report.pass, "{:?}", same.report);

        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let (a, b) =
                crate::instrument::random_commuting_pair(&mut rng, 6, crate::instrument::PairGenerator::CommonBlock)
                    .unwrap();
            let p = sample_state(&mut rng, 6, true);
            let out = verify_ep(&a, &b, &p, SplitMode::Ancilla, 1, &tol(), 1e-10).unwrap();
            assert!(out.report.pass, "{:?}", out.report);
            assert_eq!(out.psi_prime.len(), 6 * b.len());
        }
    }

    #[test]
    fn verify_ep_detects_split() {
        let mut rng = rng_from_seed(9);
        let u = sample_unitary(&mut rng, 8);
        let case = random_ep_case(&mut rng, 4, 2).unwrap();
        let a = case.first.conjugated(&u);
        let b = case.second.conjugated(&u);
        let p = sample_state(&mut rng, 8, true);
        let out = verify_ep(&a, &b, &p, SplitMode::Detect, 4, &tol(), 1e-10).unwrap();
        assert!(out.report.pass, "{:?}", out.report);
        assert!(crate::instrument::max_commutator(&a, &out.remote) < 1e-9);
    }

    #[test]
    fn verify_ep_rejects_noncommuting() {
        let z = polarizer_instrument(PolarizerKind::Linear { angle: 0.0 }, Arm::One);
        let x = polarizer_instrument(PolarizerKind::Linear { angle: 0.785 }, Arm::One);
        let err = verify_ep(&z, &x, &singlet_state(), SplitMode::Ancilla, 0, &tol(), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonCommuting { .. }));
    }

    #[test]
    fn detect_split_fails_without_common_factor() {
        let a = Instrument::from_groups("A", &identity(3), &[vec![0], vec![1, 2]]);
        assert_eq!(detect_split(&a, &a, 2, &tol()).unwrap_err(), Error::NoTensorSplit);
    }
}
