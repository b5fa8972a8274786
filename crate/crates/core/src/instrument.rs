//! Projective instruments and their calculus: frequencies, collapse maps,
//! confluence of commuting instruments, sequential composition, and direct
//! checks of the factorization and symmetry identities that space-like
//! separated instruments must satisfy.
//!
//! Frequencies and post-measurement states depend only on the outcome
//! projector, never on the instrument label.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_resolution, commutator_norm, ensure_dim, identity, luders_unchecked, sample_unitary, unitarity_deviation,
    CMatrix, CVector, DensityState, Projector,
};
use crate::report::CheckReport;
use crate::tolerance::Tolerances;

/// Exhaustive tuple of mutually orthogonal projectors. Zero outcomes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentJson", into = "InstrumentJson")]
pub struct Instrument {
    label: String,
    outcomes: Vec<Projector>,
}

#[derive(Serialize, Deserialize)]
struct InstrumentJson {
    #[serde(default)]
    label: String,
    outcomes: Vec<Projector>,
}

impl TryFrom<InstrumentJson> for Instrument {
    type Error = Error;
    fn try_from(value: InstrumentJson) -> Result<Self> {
        Instrument::new(value.label, value.outcomes, &Tolerances::default())
    }
}

impl From<Instrument> for InstrumentJson {
    fn from(i: Instrument) -> Self {
        InstrumentJson { label: i.label, outcomes: i.outcomes }
    }
}

impl Instrument {
    pub fn new(label: impl Into<String>, outcomes: Vec<Projector>, tol: &Tolerances) -> Result<Self> {
        let mats: Vec<&CMatrix> = outcomes.iter().map(Projector::matrix).collect();
        check_resolution(&mats, tol.num)?;
        Ok(Instrument { label: label.into(), outcomes })
    }

    /// The one-outcome instrument `(I)`.
    pub fn trivial(d: usize) -> Self {
        Instrument { label: "trivial".into(), outcomes: vec![Projector::identity(d)] }
    }

    /// Rank-one measurement in the computational basis.
    pub fn computational(d: usize) -> Self {
        let outcomes = (0..d).map(|i| Projector::diagonal(d, &[i])).collect();
        Instrument { label: format!("computational{d}"), outcomes }
    }

    /// Rank-one measurement along the columns of `basis` (assumed orthonormal).
    pub fn from_basis(label: impl Into<String>, basis: &CMatrix) -> Self {
        let outcomes = basis.column_iter().map(|col| Projector::onto(&col.into_owned())).collect();
        Instrument { label: label.into(), outcomes }
    }

    /// Coarse-grains the columns of unitary `basis` into the given groups.
    pub fn from_groups(label: impl Into<String>, basis: &CMatrix, groups: &[Vec<usize>]) -> Self {
        let d = basis.nrows();
        let outcomes = groups
            .iter()
            .map(|g| {
                let cols: Vec<CVector> = g.iter().map(|&k| basis.column(k).into_owned()).collect();
                Projector::from_orthonormal(d, &cols)
            })
            .collect();
        Instrument { label: label.into(), outcomes }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Projector] {
        &self.outcomes
    }

    pub fn outcome(&self, i: usize) -> &Projector {
        &self.outcomes[i]
    }

    /// `(U a_1 U^dagger, ..., U a_n U^dagger)`.
    pub fn conjugated(&self, u: &CMatrix) -> Instrument {
        Instrument { label: self.label.clone(), outcomes: self.outcomes.iter().map(|p| p.conjugated(u)).collect() }
    }

    /// Embeds each outcome as `X (x) I_d2`.
    pub fn on_first_factor(&self, d2: usize) -> Instrument {
        let id = identity(d2);
        Instrument {
            label: self.label.clone(),
            outcomes: self.outcomes.iter().map(|p| Projector::trusted(p.matrix().kronecker(&id))).collect(),
        }
    }

    /// Embeds each outcome as `I_d1 (x) Y`.
    pub fn on_second_factor(&self, d1: usize) -> Instrument {
        let id = identity(d1);
        Instrument {
            label: self.label.clone(),
            outcomes: self.outcomes.iter().map(|p| Projector::trusted(id.kronecker(p.matrix()))).collect(),
        }
    }
}

/// Outcome labels with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        max_abs_diff(&self.probabilities, &other.probabilities)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One outcome's probability and, if defined, its post-measurement state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub probability: f64,
    pub state: Option<DensityState>,
}

impl Branch {
    fn undefined() -> Self {
        Branch { probability: 0.0, state: None }
    }

    /// Discrepancy between two branches' post-states: the Frobenius distance
    /// when both are defined, the defined branch's weight when only one is,
    /// zero when neither is.
    pub fn state_deviation(&self, other: &Branch) -> f64 {
        match (&self.state, &other.state) {
            (Some(a), Some(b)) => a.distance(b),
            (Some(_), None) => self.probability,
            (None, Some(_)) => other.probability,
            (None, None) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMap {
    pub labels: Vec<String>,
    pub branches: Vec<Branch>,
}

impl BranchMap {
    pub fn distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            labels: self.labels.clone(),
            probabilities: self.branches.iter().map(|b| b.probability).collect(),
        }
    }

    /// `sum_i p_i rho_i` over defined branches.
    pub fn aggregate(&self) -> Option<DensityState> {
        let d = self.branches.iter().find_map(|b| b.state.as_ref())?.dim();
        let m = self
            .branches
            .iter()
            .filter_map(|b| b.state.as_ref().map(|s| s.matrix().scale(b.probability)))
            .fold(CMatrix::zeros(d, d), |acc, x| acc + x);
        Some(DensityState::trusted(m))
    }
}

/// Joint outcome `(i, j)` of a pair of instruments, row-major in `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointOutcome {
    pub rows: usize,
    pub cols: usize,
    pub branches: Vec<Branch>,
}

impl JointOutcome {
    pub fn branch(&self, i: usize, j: usize) -> &Branch {
        &self.branches[i * self.cols + j]
    }

    pub fn probability(&self, i: usize, j: usize) -> f64 {
        self.branch(i, j).probability
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.probability).collect()
    }

    /// Swaps the roles of the two instruments.
    pub fn transposed(&self) -> JointOutcome {
        let mut branches = Vec::with_capacity(self.branches.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                branches.push(self.branch(i, j).clone());
            }
        }
        JointOutcome { rows: self.cols, cols: self.rows, branches }
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.probability(i, j)).sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.probability(i, j)).sum()).collect()
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        let mut labels = Vec::with_capacity(self.branches.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                labels.push(format!("({i},{j})"));
            }
        }
        OutcomeDistribution { labels, probabilities: self.probabilities() }
    }

    pub fn aggregate(&self) -> Option<DensityState> {
        BranchMap { labels: Vec::new(), branches: self.branches.clone() }.aggregate()
    }

    pub fn max_probability_diff(&self, other: &JointOutcome) -> f64 {
        max_abs_diff(&self.probabilities(), &other.probabilities())
    }

    /// Largest [`Branch::state_deviation`] over matching branches.
    pub fn max_state_diff(&self, other: &JointOutcome) -> f64 {
        self.branches.iter().zip(&other.branches).map(|(a, b)| a.state_deviation(b)).fold(0.0, f64::max)
    }
}

/// `omega_i^I(s) = Tr(s P_i)`.
pub fn frequency(instrument: &Instrument, i: usize, s: &DensityState) -> Result<f64> {
    ensure_dim(instrument.dim(), s.dim())?;
    if i >= instrument.len() {
        return Err(Error::InvalidInput(format!("outcome {i} out of range for {} outcomes", instrument.len())));
    }
    Ok(s.expectation(instrument.outcome(i).matrix()).clamp(0.0, 1.0))
}

pub fn distribution(instrument: &Instrument, s: &DensityState) -> Result<OutcomeDistribution> {
    ensure_dim(instrument.dim(), s.dim())?;
    let probabilities =
        (0..instrument.len()).map(|i| s.expectation(instrument.outcome(i).matrix()).clamp(0.0, 1.0)).collect();
    Ok(OutcomeDistribution { labels: outcome_labels(instrument), probabilities })
}

fn outcome_labels(instrument: &Instrument) -> Vec<String> {
    (0..instrument.len()).map(|i| format!("{}[{i}]", instrument.label())).collect()
}

/// Lüders branch for each outcome; branches with probability at most
/// `tol.zero` are left undefined.
pub fn apply(instrument: &Instrument, s: &DensityState, tol: &Tolerances) -> Result<BranchMap> {
    ensure_dim(instrument.dim(), s.dim())?;
    let branches = instrument
        .outcomes()
        .iter()
        .map(|p| {
            let out = luders_unchecked(s.matrix(), p.matrix(), tol.zero);
            Branch { probability: out.probability, state: out.post }
        })
        .collect();
    Ok(BranchMap { labels: outcome_labels(instrument), branches })
}

/// Fails with the first non-commuting outcome pair.
pub fn ensure_commuting(first: &Instrument, second: &Instrument, eps: f64) -> Result<()> {
    ensure_dim(first.dim(), second.dim())?;
    for (i, p) in first.outcomes().iter().enumerate() {
        for (j, q) in second.outcomes().iter().enumerate() {
            let norm = commutator_norm(p.matrix(), q.matrix());
            if norm > eps {
                return Err(Error::NonCommuting { first: i, second: j, norm });
            }
        }
    }
    Ok(())
}

/// Largest commutator norm over all outcome pairs.
pub fn max_commutator(first: &Instrument, second: &Instrument) -> f64 {
    first
        .outcomes()
        .iter()
        .flat_map(|p| second.outcomes().iter().map(move |q| commutator_norm(p.matrix(), q.matrix())))
        .fold(0.0, f64::max)
}

/// `I ^ J = (a_i b_j)`, outcome `(i, j)` at index `i * m + j`. Zero products
/// are kept so indices line up with the factors.
pub fn confluence(first: &Instrument, second: &Instrument, tol: &Tolerances) -> Result<Instrument> {
    ensure_commuting(first, second, tol.num)?;
    let mut outcomes = Vec::with_capacity(first.len() * second.len());
    for p in first.outcomes() {
        for q in second.outcomes() {
            outcomes.push(Projector::trusted(p.matrix() * q.matrix()));
        }
    }
    Ok(Instrument { label: format!("{}^{}", first.label(), second.label()), outcomes })
}

/// Applies the confluence of `first` and `second` and reshapes the branches
/// into a joint outcome.
pub fn confluence_joint(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    tol: &Tolerances,
) -> Result<JointOutcome> {
    let k = confluence(first, second, tol)?;
    let map = apply(&k, p, tol)?;
    Ok(JointOutcome { rows: first.len(), cols: second.len(), branches: map.branches })
}

/// `first`, then `then` on each conditioned state: probability
/// `omega_j^J(pi_i^I p) omega_i^I(p)`, state `pi_j^J pi_i^I p`.
pub fn sequential(first: &Instrument, then: &Instrument, p: &DensityState, tol: &Tolerances) -> Result<JointOutcome> {
    ensure_dim(first.dim(), p.dim())?;
    ensure_dim(then.dim(), p.dim())?;
    let mut branches = Vec::with_capacity(first.len() * then.len());
    for a in first.outcomes() {
        let outer = luders_unchecked(p.matrix(), a.matrix(), tol.zero);
        for b in then.outcomes() {
            branches.push(match &outer.post {
                Some(mid) => {
                    let inner = luders_unchecked(mid.matrix(), b.matrix(), tol.zero);
                    Branch { probability: inner.probability * outer.probability, state: inner.post }
                }
                None => Branch::undefined(),
            });
        }
    }
    Ok(JointOutcome { rows: first.len(), cols: then.len(), branches })
}

/// Frequency factorization on `p`: the confluence distribution against both sequential
/// orders.
pub fn verify_frequency_factorization(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("frequency_factorization", check_tol);
    let dev = factorization_deviation(first, second, p, tol)?;
    report.record(dev, None);
    Ok(report)
}

pub fn factorization_deviation(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    tol: &Tolerances,
) -> Result<f64> {
    let joint = confluence_joint(first, second, p, tol)?;
    let forward = sequential(first, second, p, tol)?;
    let backward = sequential(second, first, p, tol)?.transposed();
    Ok(joint.max_probability_diff(&forward).max(joint.max_probability_diff(&backward)))
}

/// Collapse composition, extensionally on `states`: post-states of confluence
/// branches against both sequential compositions. `detail` carries the
/// per-branch maximum deviation.
pub fn verify_collapse_composition(
    first: &Instrument,
    second: &Instrument,
    states: &[DensityState],
    tol: &Tolerances,
    check_tol: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("collapse_composition", check_tol);
    let mut per_branch = vec![0.0f64; first.len() * second.len()];
    for s in states {
        let branch_devs = composition_deviations(first, second, s, tol)?;
        for (acc, d) in per_branch.iter_mut().zip(&branch_devs) {
            *acc = acc.max(*d);
        }
        report.record(branch_devs.iter().cloned().fold(0.0, f64::max), None);
    }
    Ok(report.with_detail(json!({ "per_branch_max_deviation": per_branch })))
}

pub fn composition_deviations(
    first: &Instrument,
    second: &Instrument,
    s: &DensityState,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let joint = confluence_joint(first, second, s, tol)?;
    let forward = sequential(first, second, s, tol)?;
    let backward = sequential(second, first, s, tol)?.transposed();
    Ok(joint
        .branches
        .iter()
        .zip(forward.branches.iter().zip(&backward.branches))
        .map(|(k, (f, b))| k.state_deviation(f).max(k.state_deviation(b)))
        .collect())
}

/// How far the two measurement orders disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderAsymmetry {
    /// `max |omega_j^J(pi_i^I p) omega_i^I(p) - omega_i^I(pi_j^J p) omega_j^J(p)|`
    pub frequency: f64,
    /// `max || pi_j^J pi_i^I p - pi_i^I pi_j^J p ||`
    pub state: f64,
}

impl OrderAsymmetry {
    pub fn max(&self) -> f64 {
        self.frequency.max(self.state)
    }
}

/// Compares the two sequential orders directly, without requiring the
/// instruments to commute.
pub fn order_asymmetry(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    tol: &Tolerances,
) -> Result<OrderAsymmetry> {
    let forward = sequential(first, second, p, tol)?;
    let backward = sequential(second, first, p, tol)?.transposed();
    Ok(OrderAsymmetry { frequency: forward.max_probability_diff(&backward), state: forward.max_state_diff(&backward) })
}

/// Order symmetry of frequencies and post-states on `p` for commuting instruments.
pub fn verify_order_symmetry(
    first: &Instrument,
    second: &Instrument,
    p: &DensityState,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<CheckReport> {
    ensure_commuting(first, second, tol.num)?;
    let asym = order_asymmetry(first, second, p, tol)?;
    let mut report = CheckReport::new("order_symmetry", check_tol);
    report.record(asym.max(), None);
    Ok(report.with_detail(json!({ "frequency": asym.frequency, "state": asym.state })))
}

/// Local marginals of `local` against every remote instrument, in both
/// temporal orders: `sum_j omega_j^J(pi_i^I p) omega_i^I(p)` and
/// `sum_j omega_i^I(pi_j^J p) omega_j^J(p)` must both equal `omega_i^I(p)`
/// whatever `J` is.
pub fn no_signaling_check(
    local: &Instrument,
    remotes: &[Instrument],
    p: &DensityState,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<CheckReport> {
    if remotes.is_empty() {
        return Err(Error::InvalidInput("no remote instrument supplied".into()));
    }
    for remote in remotes {
        ensure_commuting(local, remote, tol.num)?;
    }
    let reference = distribution(local, p)?.probabilities;
    let mut report = CheckReport::new("no_signaling", check_tol);
    let mut worst = (0usize, 0.0f64);
    for (r, remote) in remotes.iter().enumerate() {
        let local_first = sequential(local, remote, p, tol)?.row_marginal();
        let remote_first = sequential(remote, local, p, tol)?.col_marginal();
        let dev = max_abs_diff(&local_first, &reference).max(max_abs_diff(&remote_first, &reference));
        if dev > worst.1 {
            worst = (r, dev);
        }
        report.record(dev, None);
    }
    if !report.pass {
        report = report.with_counterexample(json!({ "remote": worst.0 }));
    }
    Ok(report.with_detail(json!({ "local_marginal": reference })))
}

/// Unitary covariance: frequencies invariant and collapse equivariant
/// under `a_i -> U a_i U^dagger`, `s -> U s U^dagger`.
pub fn covariance_check(
    u: &CMatrix,
    instrument: &Instrument,
    s: &DensityState,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<CheckReport> {
    ensure_dim(instrument.dim(), u.nrows())?;
    let deviation = unitarity_deviation(u);
    if deviation > tol.num {
        return Err(Error::NotUnitary { deviation });
    }
    let moved = instrument.conjugated(u);
    let moved_state = s.conjugated(u);
    let before = apply(instrument, s, tol)?;
    let after = apply(&moved, &moved_state, tol)?;
    let freq = max_abs_diff(&before.distribution().probabilities, &after.distribution().probabilities);
    let state = before
        .branches
        .iter()
        .zip(&after.branches)
        .map(|(b, a)| {
            let mapped = Branch { probability: b.probability, state: b.state.as_ref().map(|x| x.conjugated(u)) };
            mapped.state_deviation(a)
        })
        .fold(0.0, f64::max);
    let mut report = CheckReport::new("unitary_covariance", check_tol);
    report.record(freq.max(state), None);
    Ok(report.with_detail(json!({ "frequency": freq, "state": state })))
}

/// How to draw a commuting pair of instruments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairGenerator {
    /// First instrument on the first tensor factor, second on the second.
    TensorFactor,
    /// Both coarse-grain one random orthonormal basis.
    CommonBlock,
}

/// Smallest non-trivial factorization `d = d1 * d2` with `d1 <= d2`.
pub fn factor_split(d: usize) -> Option<(usize, usize)> {
    (2..d).find(|&k| d.is_multiple_of(k)).map(|k| (k, d / k))
}

/// Random partition of `0..d` into `parts` non-empty groups.
pub fn random_partition(rng: &mut impl Rng, d: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1 && parts <= d);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = idx[..parts].iter().map(|&k| vec![k]).collect();
    for &k in &idx[parts..] {
        groups[rng.random_range(0..parts)].push(k);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Coarse-grained measurement in a uniformly random basis, with between
/// two and `d` outcomes (one when `d == 1`).
pub fn random_instrument(rng: &mut impl Rng, d: usize, label: &str) -> Instrument {
    let u = sample_unitary(rng, d);
    let parts = if d == 1 { 1 } else { rng.random_range(2..=d) };
    Instrument::from_groups(label, &u, &random_partition(rng, d, parts))
}

pub fn random_commuting_pair(
    rng: &mut impl Rng,
    d: usize,
    generator: PairGenerator,
) -> Result<(Instrument, Instrument)> {
    match generator {
        PairGenerator::TensorFactor => {
            let (d1, d2) =
                factor_split(d).ok_or_else(|| Error::InvalidInput(format!("dimension {d} has no tensor split")))?;
            let a = random_instrument(rng, d1, "I").on_first_factor(d2);
            let b = random_instrument(rng, d2, "J").on_second_factor(d1);
            Ok((a, b))
        }
        PairGenerator::CommonBlock => {
            if d < 2 {
                return Err(Error::InvalidInput("common-block pairs need d >= 2".into()));
            }
            let u = sample_unitary(rng, d);
            let n = rng.random_range(2..=d);
            let m = rng.random_range(2..=d);
            let a = Instrument::from_groups("I", &u, &random_partition(rng, d, n));
            let b = Instrument::from_groups("J", &u, &random_partition(rng, d, m));
            Ok((a, b))
        }
    }
}
