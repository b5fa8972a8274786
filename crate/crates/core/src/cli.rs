//! Batch driver behind the `coverlaw` binary.
//!
//! Reports are JSON lines: one object per check, then one summary object.
//! Exit status is 0 when every check passes, 1 when one fails, 2 on
//! malformed input or usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::epr::{
    composed_measurement, construct_psi_prime, ep_deviations, polarizer_instrument, random_ep_case, remote_mixture,
    singlet_state, verify_ep, Arm, Choice, PolarizerKind, PsiPrimeOptions, SplitMode, TensorSplit,
};
use crate::error::Error;
use crate::hilbert::{identity, sample_state, sample_unit_vector, sample_unitary, CVector, DensityState};
use crate::instrument::{
    composition_deviations, confluence_joint, factor_split, factorization_deviation, frequency, no_signaling_check,
    order_asymmetry, random_commuting_pair, random_instrument, sequential, Instrument, PairGenerator,
};
use crate::lattice::{boolean_algebra, mo, LatticeSpec, OrthoLattice, Property};
use crate::matrix_json::{vector_from_json, VectorJson};
use crate::report::CheckReport;
use crate::rng::{rng_from_seed, trial_seed};
use crate::scenario::{random_scenario, ScenarioFile};
use crate::spacetime::{
    frame_consistency, minkowski_interval, reordering_boost, spacelike, FrameTransform, Simultaneity, SpacetimeRegion,
};
use crate::tolerance::Tolerances;

/// Tolerance for closed-form values (passage probabilities, the reduced
/// singlet, normalization).
pub const EXACT_TOL: f64 = 1e-12;

/// Keeps geometric trial seeds apart from the scenario trials of the same run.
const GEOMETRY_SALT: u64 = 0x05EE_D6E0;

/// Dimensions cycled through when `--dim` is not given.
pub const DEFAULT_DIMS: [usize; 4] = [4, 6, 8, 9];

#[derive(Debug, Parser)]
#[command(
    name = "coverlaw",
    version,
    about = "Checkers for orthomodular lattices, projective instruments and space-like conditioning"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, global = true, env = "COVERLAW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of random trials (each subcommand has its own default).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Restrict randomized suites to one state-space dimension.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub tol_herm: Option<f64>,
    #[arg(long, global = true)]
    pub tol_idem: Option<f64>,
    #[arg(long, global = true)]
    pub tol_num: Option<f64>,
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    #[arg(long, global = true)]
    pub tol_tr: Option<f64>,
    #[arg(long, global = true)]
    pub tol_zero: Option<f64>,
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub tol_group: Option<f64>,
    /// Pass threshold for numerical identities.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_check: f64,
    /// Write the JSON-lines report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Suppress the text summary on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            herm: self.tol_herm.unwrap_or(d.herm),
            idem: self.tol_idem.unwrap_or(d.idem),
            num: self.tol_num.unwrap_or(d.num),
            psd: self.tol_psd.unwrap_or(d.psd),
            tr: self.tol_tr.unwrap_or(d.tr),
            zero: self.tol_zero.unwrap_or(d.zero),
            rank: self.tol_rank.unwrap_or(d.rank),
            group: self.tol_group.unwrap_or(d.group),
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check lattice files for orthomodularity, the covering law and friends.
    CheckLattice {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Properties to check (default: orthomodular, covering_law).
        #[arg(long = "property")]
        properties: Vec<String>,
    },
    /// Covering law in projection lattices (d = 2..=dim) and in small
    /// Boolean and MO lattices.
    CheckCovering,
    /// Frequency factorization, collapse composition and order symmetry for
    /// random commuting pairs, plus a non-commuting control.
    VerifyTheorem,
    /// Local marginals under change of the remote instrument.
    NoSignaling,
    /// Agreement of frame descriptions for a scenario file, or for random
    /// scenarios together with geometric checks.
    FrameConsistency { file: Option<PathBuf> },
    /// Singlet passage probabilities, remote mixtures and anti-correlation.
    EprDemo,
    /// Build the space-like conditioning vector for an input file or random cases.
    ConstructPsiPrime { file: Option<PathBuf> },
    /// Produce and check space-like partners for random commuting pairs.
    VerifyEp,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckLattice { .. } => "check-lattice",
            Command::CheckCovering => "check-covering",
            Command::VerifyTheorem => "verify-theorem",
            Command::NoSignaling => "no-signaling",
            Command::FrameConsistency { .. } => "frame-consistency",
            Command::EprDemo => "epr-demo",
            Command::ConstructPsiPrime { .. } => "construct-psi-prime",
            Command::VerifyEp => "verify-ep",
        }
    }

    fn default_trials(&self) -> usize {
        match self {
            Command::CheckLattice { .. } | Command::ConstructPsiPrime { file: Some(_) } => 1,
            Command::FrameConsistency { file: Some(_) } => 1,
            Command::CheckCovering | Command::VerifyTheorem => 1000,
            Command::NoSignaling | Command::ConstructPsiPrime { file: None } => 200,
            Command::FrameConsistency { file: None } => 50,
            Command::EprDemo | Command::VerifyEp => 100,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit status 2.
    Input(String),
    /// A computation that should not fail did; exit status 1.
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Effective settings of a run, echoed in the summary.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub trials: usize,
    pub dim: Option<usize>,
    pub tol: Tolerances,
    pub check_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub summary: bool,
    pub command: String,
    pub seed: u64,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub tolerances: Tolerances,
    pub check_tolerance: f64,
    pub checks: usize,
    pub failed: usize,
    pub pass: bool,
}

/// Parses `args` (including the program name), runs, writes the report to
/// `out` (or `--output`) and the text summary to `err`. Returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = RunConfig {
        trials: cli.global.trials.unwrap_or_else(|| cli.command.default_trials()),
        seed: cli.global.seed,
        dim: cli.global.dim,
        tol: cli.global.tolerances(),
        check_tol: cli.global.tol_check,
        command: cli.command.clone(),
    };
    let reports = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "coverlaw {}: {e}", config.command.name());
            return match e {
                CliError::Input(_) => 2,
                CliError::Internal(_) => 1,
            };
        }
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    let summary = Summary {
        summary: true,
        command: config.command.name().to_string(),
        seed: config.seed,
        trials: config.trials,
        dim: config.dim,
        tolerances: config.tol,
        check_tolerance: config.check_tol,
        checks: reports.len(),
        failed,
        pass: failed == 0,
    };
    let mut text = String::new();
    for r in &reports {
        text.push_str(&serde_json::to_string(r).expect("reports serialize"));
        text.push('\n');
    }
    text.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
    text.push('\n');
    let written = match &cli.global.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "coverlaw: cannot write report: {e}");
        return 2;
    }
    if !cli.global.quiet {
        for r in &reports {
            let _ = writeln!(
                err,
                "{} {:<36} max_dev {:<10.3e} tol {:<8.1e} trials {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.property,
                r.max_deviation,
                r.tolerance,
                r.trials
            );
        }
        let _ = writeln!(
            err,
            "coverlaw {}: {}/{} checks passed (seed {})",
            summary.command,
            summary.checks - failed,
            summary.checks,
            summary.seed
        );
    }
    if failed == 0 {
        0
    } else {
        1
    }
}

pub fn execute(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    if config.trials == 0 {
        return Err(CliError::Input("--trials must be positive".into()));
    }
    if let Some(d) = config.dim {
        if d < 2 {
            return Err(CliError::Input("--dim must be at least 2".into()));
        }
    }
    match &config.command {
        Command::CheckLattice { files, properties } => check_lattice(files, properties),
        Command::CheckCovering => check_covering(config),
        Command::VerifyTheorem => verify_theorem(config),
        Command::NoSignaling => no_signaling(config),
        Command::FrameConsistency { file } => frame_suite(config, file.as_deref()),
        Command::EprDemo => epr_demo(config),
        Command::ConstructPsiPrime { file } => psi_prime_suite(config, file.as_deref()),
        Command::VerifyEp => verify_ep_suite(config),
    }
}

/// Reads and deserializes a JSON file, reporting the field path and the
/// line and column of the first problem.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column())
    })
}

fn timed<T>(f: impl FnOnce() -> CliResult<T>) -> CliResult<(T, u64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_millis() as u64))
}

fn stamp(mut r: CheckReport, ms: u64) -> CheckReport {
    r.elapsed_ms = Some(ms);
    r
}

/// Folds per-trial deviations in trial order; the first failing trial
/// supplies the counterexample.
fn fold_trials(property: &str, tolerance: f64, trials: impl IntoIterator<Item = (f64, u64, Value)>) -> CheckReport {
    let mut report = CheckReport::new(property, tolerance);
    for (dev, seed, locator) in trials {
        let was_passing = report.pass;
        report.record(dev, Some(seed));
        if was_passing && !report.pass {
            report.counterexample = Some(locator);
        }
    }
    report
}

fn dims_for(config: &RunConfig) -> Vec<usize> {
    config.dim.map_or_else(|| DEFAULT_DIMS.to_vec(), |d| vec![d])
}

// ---- check-lattice ----------------------------------------------------------

fn lattice_report(property: &str, pass: bool, witness: Option<Value>, input: &Path, size: usize) -> CheckReport {
    let mut r = CheckReport::new(property, 0.0);
    r.record(if pass { 0.0 } else { 1.0 }, None);
    r.counterexample = witness;
    r.with_detail(json!({ "input": input.display().to_string(), "elements": size }))
}

fn check_lattice(files: &[PathBuf], properties: &[String]) -> CliResult<Vec<CheckReport>> {
    let props: Vec<Property> = if properties.is_empty() {
        vec![Property::Orthomodular, Property::CoveringLaw]
    } else {
        properties
            .iter()
            .map(|name| {
                Property::from_name(name).ok_or_else(|| {
                    let known: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
                    CliError::Input(format!("unknown property `{name}` (known: {})", known.join(", ")))
                })
            })
            .collect::<CliResult<_>>()?
    };
    let mut reports = Vec::new();
    for path in files {
        let start = Instant::now();
        let spec: LatticeSpec = load_json(path)?;
        let lattice = match OrthoLattice::build(&spec) {
            Ok(l) => l,
            Err(e) => match e.axiom() {
                Some(axiom) => {
                    let witness = e.counterexample().map(|els| {
                        let names: Option<Vec<&str>> =
                            spec.names.as_ref().map(|n| els.iter().map(|&a| n[a].as_str()).collect());
                        json!({ "elements": els, "names": names, "error": e.to_string() })
                    });
                    let r = lattice_report(&format!("ortholattice:{axiom}"), false, witness, path, spec.n);
                    reports.push(stamp(r, start.elapsed().as_millis() as u64));
                    continue;
                }
                None => return Err(CliError::Input(format!("{}: {e}", path.display()))),
            },
        };
        for p in &props {
            let start = Instant::now();
            let found = p.check(&lattice);
            let witness = found.counterexample.as_ref().map(|els| {
                let names: Vec<String> = els.iter().map(|&a| lattice.name(a)).collect();
                json!({ "elements": els, "names": names })
            });
            let r = lattice_report(p.name(), found.pass, witness, path, lattice.len());
            reports.push(stamp(r, start.elapsed().as_millis() as u64));
        }
    }
    Ok(reports)
}

// ---- check-covering ---------------------------------------------------------

fn check_covering(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    let max_d = config.dim.unwrap_or(6);
    let dims: Vec<usize> = (2..=max_d).collect();
    let results = dims
        .par_iter()
        .map(|&d| {
            timed(|| {
                Ok(crate::hilbert::covering_rank_check(
                    d,
                    config.trials,
                    trial_seed(config.seed, d as u64),
                    &config.tol,
                )?)
            })
        })
        .collect::<Vec<_>>();
    let mut reports = Vec::new();
    for (d, res) in dims.iter().zip(results) {
        let (rep, ms) = res?;
        let mut r = CheckReport::new(format!("covering_rank_d{d}"), 0.0);
        r.trials = rep.trials;
        r.max_deviation = rep.failures.len() as f64;
        r.pass = rep.pass;
        if let Some(f) = rep.failures.first() {
            r.counterexample_seed = Some(f.trial_seed);
            r.counterexample = Some(serde_json::to_value(f).expect("serializable"));
        }
        let r = r.with_detail(json!({ "dim": d, "resampled": rep.resampled, "seed": rep.seed }));
        reports.push(stamp(r, ms));
    }
    for n in 1..=4 {
        for (name, spec) in [(format!("boolean{n}"), boolean_algebra(n)), (format!("mo{n}"), mo(n))] {
            let start = Instant::now();
            let l = OrthoLattice::build(&spec).map_err(|e| CliError::Internal(format!("{name}: {e}")))?;
            for p in [Property::Orthomodular, Property::CoveringLaw] {
                let found = p.check(&l);
                let mut r = CheckReport::new(format!("{name}:{}", p.name()), 0.0);
                r.record(if found.pass { 0.0 } else { 1.0 }, None);
                r.counterexample = found.counterexample.map(|c| json!({ "elements": c }));
                let r = r.with_detail(json!({ "elements": l.len() }));
                reports.push(stamp(r, start.elapsed().as_millis() as u64));
            }
        }
    }
    Ok(reports)
}

// ---- verify-theorem ---------------------------------------------------------

struct TheoremTrial {
    seed: u64,
    locator: Value,
    factorization: f64,
    composition: f64,
    symmetry: f64,
}

fn generator_for(d: usize, round: usize) -> PairGenerator {
    if round.is_multiple_of(2) && factor_split(d).is_some() {
        PairGenerator::TensorFactor
    } else {
        PairGenerator::CommonBlock
    }
}

fn theorem_trial(config: &RunConfig, dims: &[usize], t: usize) -> CliResult<TheoremTrial> {
    let d = dims[t % dims.len()];
    let generator = generator_for(d, t / dims.len());
    let seed = trial_seed(config.seed, t as u64);
    let mut rng = rng_from_seed(seed);
    let (a, b) = random_commuting_pair(&mut rng, d, generator)?;
    let p = sample_state(&mut rng, d, true);
    let tol = &config.tol;
    let factorization = factorization_deviation(&a, &b, &p, tol)?.max(factorization_deviation(&b, &a, &p, tol)?);
    let composition = composition_deviations(&a, &b, &p, tol)?
        .into_iter()
        .chain(composition_deviations(&b, &a, &p, tol)?)
        .fold(0.0, f64::max);
    let symmetry = order_asymmetry(&a, &b, &p, tol)?.max();
    let locator = json!({ "trial": t, "dim": d, "generator": generator });
    Ok(TheoremTrial { seed, locator, factorization, composition, symmetry })
}

/// `Z` against `X` on `|0>`: the orders disagree by 1/4 in frequency.
pub fn negative_control(tol: &Tolerances) -> CliResult<CheckReport> {
    let z = Instrument::computational(2).with_label("Z");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x_basis = crate::hilbert::CMatrix::from_row_slice(
        2,
        2,
        &[crate::hilbert::c(h, 0.0), crate::hilbert::c(h, 0.0), crate::hilbert::c(h, 0.0), crate::hilbert::c(-h, 0.0)],
    );
    let x = Instrument::from_basis("X", &x_basis);
    let p = DensityState::pure(&crate::hilbert::ket(2, 0));
    let asym = order_asymmetry(&z, &x, &p, tol)?;
    let threshold = 1e-3;
    let mut r = CheckReport::new("order_symmetry_negative_control", threshold);
    r.trials = 1;
    r.max_deviation = asym.max();
    r.pass = asym.max() > threshold;
    Ok(r.with_detail(json!({
        "expect": "violation above tolerance",
        "frequency": asym.frequency,
        "state": asym.state,
        "commutator": crate::instrument::max_commutator(&z, &x),
    })))
}

fn verify_theorem(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    let dims = dims_for(config);
    let (trials, ms) = timed(|| {
        (0..config.trials).into_par_iter().map(|t| theorem_trial(config, &dims, t)).collect::<CliResult<Vec<_>>>()
    })?;
    let pick = |f: fn(&TheoremTrial) -> f64| trials.iter().map(move |t| (f(t), t.seed, t.locator.clone()));
    let detail = json!({ "dims": dims, "orders": "both" });
    let mut reports = vec![
        fold_trials("frequency_factorization", config.check_tol, pick(|t| t.factorization)),
        fold_trials("collapse_composition", config.check_tol, pick(|t| t.composition)),
        fold_trials("order_symmetry", config.check_tol, pick(|t| t.symmetry)),
    ]
    .into_iter()
    .map(|r| stamp(r.with_detail(detail.clone()), ms))
    .collect::<Vec<_>>();
    let (control, ms) = timed(|| negative_control(&config.tol))?;
    reports.push(stamp(control, ms));
    Ok(reports)
}

// ---- no-signaling -----------------------------------------------------------

fn random_polarizer(rng: &mut impl Rng) -> PolarizerKind {
    if rng.random_bool(0.25) {
        PolarizerKind::Circular
    } else {
        PolarizerKind::Linear { angle: rng.random_range(0.0..std::f64::consts::PI) }
    }
}

fn no_signaling(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    let tol = &config.tol;
    let (singlet, ms) = timed(|| {
        let mut rng = rng_from_seed(trial_seed(config.seed, u64::MAX));
        let local = polarizer_instrument(random_polarizer(&mut rng), Arm::One);
        let mut remotes: Vec<Instrument> =
            (0..8).map(|_| polarizer_instrument(random_polarizer(&mut rng), Arm::Two)).collect();
        remotes.push(polarizer_instrument(PolarizerKind::Circular, Arm::Two));
        remotes.push(Instrument::trivial(4));
        let mut r = no_signaling_check(&local, &remotes, &singlet_state(), tol, config.check_tol)?;
        r.property = "no_signaling_singlet".into();
        Ok(r)
    })?;

    let dims = dims_for(config);
    let ((results, dims), ms_random) = timed(|| {
        let results = (0..config.trials)
            .into_par_iter()
            .map(|t| -> CliResult<(f64, u64, Value)> {
                let d = dims[t % dims.len()];
                let seed = trial_seed(config.seed, t as u64);
                let mut rng = rng_from_seed(seed);
                let generator = generator_for(d, t / dims.len());
                let (local, remote) = random_commuting_pair(&mut rng, d, generator)?;
                let mut remotes = vec![remote, Instrument::trivial(d)];
                if let PairGenerator::TensorFactor = generator {
                    let (d1, d2) = factor_split(d).expect("tensor generator implies a split");
                    for _ in 0..2 {
                        remotes.push(random_instrument(&mut rng, d2, "J").on_second_factor(d1));
                    }
                }
                let pure = rng.random_bool(0.5);
                let p = sample_state(&mut rng, d, pure);
                let r = no_signaling_check(&local, &remotes, &p, tol, config.check_tol)?;
                Ok((r.max_deviation, seed, json!({ "trial": t, "dim": d, "generator": generator })))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok((results, dims.clone()))
    })?;
    let random =
        fold_trials("no_signaling_random_pairs", config.check_tol, results).with_detail(json!({ "dims": dims }));
    Ok(vec![stamp(singlet, ms), stamp(random, ms_random)])
}

// ---- frame-consistency ------------------------------------------------------

fn frame_suite(config: &RunConfig, file: Option<&Path>) -> CliResult<Vec<CheckReport>> {
    let tol = &config.tol;
    if let Some(path) = file {
        let spec: ScenarioFile = load_json(path)?;
        let loaded = spec.build(tol).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let start = Instant::now();
        let report =
            match frame_consistency(&loaded.scenario, &loaded.frames, loaded.simultaneity, tol, config.check_tol) {
                Ok((report, records)) => {
                    let mut detail = report.detail.clone().unwrap_or(json!({}));
                    detail["frames"] = serde_json::to_value(&records).expect("serializable");
                    detail["input"] = json!(path.display().to_string());
                    CheckReport { detail: Some(detail), ..report }
                }
                Err(e @ Error::LocalityViolation { first, second, norm }) => {
                    let mut r = CheckReport::new("frame_consistency", config.check_tol);
                    r.record(norm, None);
                    r.with_counterexample(json!({ "outcomes": [first, second] }))
                        .with_detail(json!({ "error": e.to_string(), "input": path.display().to_string() }))
                }
                Err(e) => return Err(CliError::Input(format!("{}: {e}", path.display()))),
            };
        return Ok(vec![stamp(report, start.elapsed().as_millis() as u64)]);
    }

    let dims = dims_for(config);
    let (results, ms) = timed(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| -> CliResult<(f64, f64, u64, Value)> {
                let d = dims[t % dims.len()];
                let seed = trial_seed(config.seed, t as u64);
                let mut rng = rng_from_seed(seed);
                let generator = generator_for(d, t / dims.len());
                let s = random_scenario(&mut rng, d, generator)?;
                let (r, records) =
                    frame_consistency(&s.scenario, &s.frames, Simultaneity::Overlap, tol, config.check_tol)?;
                let descriptions: Vec<_> = records.iter().map(|x| x.description).collect();
                // the realization instant may sit anywhere in the region
                let mut instant_dev = 0.0f64;
                for f in [0.0, 1.0, rng.random_range(0.0..1.0)] {
                    let (ri, _) =
                        frame_consistency(&s.scenario, &s.frames, Simultaneity::Instant(f), tol, config.check_tol)?;
                    instant_dev = instant_dev.max(ri.max_deviation);
                }
                let locator = json!({ "trial": t, "dim": d, "generator": generator, "descriptions": descriptions });
                Ok((r.max_deviation, instant_dev, seed, locator))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let consistency = fold_trials(
        "frame_consistency",
        config.check_tol,
        results.iter().map(|(dev, _, seed, loc)| (*dev, *seed, loc.clone())),
    );
    let instants = fold_trials(
        "frame_consistency_any_instant",
        config.check_tol,
        results.iter().map(|(_, dev, seed, loc)| (*dev, *seed, loc.clone())),
    );

    let geo_trials = 2 * config.trials;
    let (geo, geo_ms) = timed(|| Ok(geometric_trials(config.seed, geo_trials)))?;
    let (reorder, interval) = geo;
    Ok(vec![stamp(consistency, ms), stamp(instants, ms), stamp(reorder, geo_ms), stamp(interval, geo_ms)])
}

/// Random 1+1 box pairs: half space-like, half time-like. Returns the
/// reordering-boost check and the corner-interval invariance check.
pub fn geometric_trials(seed: u64, trials: usize) -> (CheckReport, CheckReport) {
    let results: Vec<(f64, f64, u64, Value)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed ^ GEOMETRY_SALT, t as u64);
            let mut rng = rng_from_seed(s);
            let w = |rng: &mut crate::rng::TrialRng| rng.random_range(0.05..0.5);
            let (t0, x0) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (a_t, a_x) = (w(&mut rng), w(&mut rng));
            let a = SpacetimeRegion::interval_1d([t0, t0 + a_t], [x0, x0 + a_x]).expect("valid box");
            let (b_t, b_x) = (w(&mut rng), w(&mut rng));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let want_spacelike = t % 2 == 0;
            let (dt, dx) = if want_spacelike {
                let dx = rng.random_range(1.5..4.0);
                (rng.random_range(-0.9..0.9) * (dx - 1.2), dx)
            } else {
                let dt = rng.random_range(1.5..4.0);
                (sign * dt, rng.random_range(-0.9..0.9) * (dt - 1.2))
            };
            let b = SpacetimeRegion::interval_1d([t0 + dt, t0 + dt + b_t], [x0 + sign * dx, x0 + sign * dx + b_x])
                .expect("valid box");
            let separated = spacelike(&a, &b).expect("same dimension");
            let boost = reordering_boost(&a, &b).expect("same dimension");
            let ok = match (&boost, separated) {
                (Some(v), true) => {
                    let speed = v[0].abs();
                    let g = FrameTransform::boost(v.clone()).expect("subluminal");
                    let (ca, cb) = (a.center(), b.center());
                    let before = cb[0] - ca[0];
                    let after = g.apply_event(&cb)[0] - g.apply_event(&ca)[0];
                    speed < 1.0 && (if before == 0.0 { after != 0.0 } else { before * after < 0.0 })
                }
                (None, false) => true,
                _ => false,
            };
            let g = FrameTransform::boost(vec![rng.random_range(-0.99..0.99)]).expect("subluminal");
            let mut interval_dev = 0.0f64;
            for x in a.corners() {
                for y in b.corners() {
                    let before = minkowski_interval(&x, &y);
                    let after = minkowski_interval(&g.apply_event(&x), &g.apply_event(&y));
                    interval_dev = interval_dev.max((before - after).abs());
                }
            }
            let locator = json!({ "trial": t, "spacelike": separated, "boost": boost });
            (if ok { 0.0 } else { 1.0 }, interval_dev, s, locator)
        })
        .collect();
    let reorder = fold_trials("reordering_boost", 0.0, results.iter().map(|(dev, _, s, loc)| (*dev, *s, loc.clone())));
    let interval =
        fold_trials("corner_interval_invariance", 1e-9, results.iter().map(|(_, dev, s, loc)| (*dev, *s, loc.clone())));
    (reorder, interval)
}

// ---- epr-demo ---------------------------------------------------------------

fn epr_demo(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    let tol = &config.tol;
    let singlet = singlet_state();
    let (rows, ms) = timed(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| -> CliResult<_> {
                let seed = trial_seed(config.seed, t as u64);
                let mut rng = rng_from_seed(seed);
                let kind = random_polarizer(&mut rng);
                let arm = if rng.random_bool(0.5) { Arm::One } else { Arm::Two };
                let pol = polarizer_instrument(kind, arm);
                let passage = (frequency(&pol, 0, &singlet)? - 0.5).abs();

                let u = sample_unitary(&mut rng, 2);
                let (b0, b1) = (u.column(0).into_owned(), u.column(1).into_owned());
                let (aggregate, mixture) = remote_mixture([&b0, &b1], tol)?;
                let aggregate_dev = (aggregate.matrix() - identity(2).scale(0.5)).norm();
                let component = mixture.components[0].state.clone();

                let same = confluence_joint(
                    &polarizer_instrument(kind, Arm::One),
                    &polarizer_instrument(kind, Arm::Two),
                    &singlet,
                    tol,
                )?;
                let coincidence = same.probability(0, 0) + same.probability(1, 1);

                let other = polarizer_instrument(random_polarizer(&mut rng), Arm::Two);
                let composed = composed_measurement(&pol, &other, &singlet)?;
                let seq = sequential(&pol, &other, &singlet, tol)?
                    .aggregate()
                    .ok_or_else(|| CliError::Internal("empty sequential aggregate".into()))?;
                let composed_dev = (composed - seq.matrix()).norm();

                let locator = json!({ "trial": t, "polarizer": kind, "arm": arm });
                Ok((seed, locator, passage, aggregate_dev, component, coincidence, composed_dev))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let passage = fold_trials("singlet_passage_probability", EXACT_TOL, rows.iter().map(|r| (r.2, r.0, r.1.clone())));
    let aggregate = fold_trials("remote_mixture_aggregate", EXACT_TOL, rows.iter().map(|r| (r.3, r.0, r.1.clone())));
    // consecutive random bases must give different decompositions of one aggregate
    let mut varying = CheckReport::new("remote_mixture_components_vary", 1e-6);
    varying.trials = rows.len().saturating_sub(1);
    let min_gap = rows.windows(2).map(|w| w[0].4.distance(&w[1].4)).fold(f64::INFINITY, f64::min);
    varying.max_deviation = if min_gap.is_finite() { min_gap } else { 0.0 };
    varying.pass = rows.len() < 2 || min_gap > 1e-6;
    let varying = varying.with_detail(json!({ "expect": "minimum component distance above tolerance" }));
    let anti = fold_trials("singlet_anticorrelation", EXACT_TOL, rows.iter().map(|r| (r.5, r.0, r.1.clone())));
    let composed = fold_trials("composed_measurement", config.tol.num, rows.iter().map(|r| (r.6, r.0, r.1.clone())));
    Ok([passage, aggregate, varying, anti, composed].into_iter().map(|r| stamp(r, ms)).collect())
}

// ---- construct-psi-prime ----------------------------------------------------

/// Input file for `construct-psi-prime`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiPrimeInput {
    pub d1: usize,
    pub d2: usize,
    pub first: Instrument,
    pub second: Instrument,
    pub remote: Instrument,
    pub psi: VectorJson,
    #[serde(default)]
    pub basis_seed: u64,
    #[serde(default)]
    pub choice: Choice,
}

/// Deviations of one construction: normalization, the remote-marginal
/// identity, and the three equalities.
pub fn psi_prime_deviations(
    first: &Instrument,
    second: &Instrument,
    remote: &Instrument,
    psi: &CVector,
    psi_prime: &CVector,
    tol: &Tolerances,
) -> CliResult<(f64, f64, f64)> {
    let norm = (psi_prime.norm() - 1.0).abs();
    let mut marginal = 0.0f64;
    for p in first.outcomes() {
        for (q, qp) in second.outcomes().iter().zip(remote.outcomes()) {
            let lhs = (qp.matrix() * (p.matrix() * psi_prime)).norm_squared();
            let rhs = (q.matrix() * (p.matrix() * psi)).norm_squared();
            marginal = marginal.max((lhs - rhs).abs());
        }
    }
    let ep = ep_deviations(first, second, psi, first, remote, psi_prime, tol)?.max();
    Ok((norm, marginal, ep))
}

fn psi_prime_suite(config: &RunConfig, file: Option<&Path>) -> CliResult<Vec<CheckReport>> {
    let tol = &config.tol;
    if let Some(path) = file {
        let input: PsiPrimeInput = load_json(path)?;
        let start = Instant::now();
        let split = TensorSplit::new(input.d1, input.d2).map_err(|e| CliError::Input(e.to_string()))?;
        let psi = vector_from_json(&input.psi);
        let options = PsiPrimeOptions { basis_seed: input.basis_seed, choice: input.choice };
        let built = construct_psi_prime(split, &input.first, &input.second, &input.remote, &psi, options, tol)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let (norm, marginal, ep) =
            psi_prime_deviations(&input.first, &input.second, &input.remote, &psi, &built.psi_prime, tol)?;
        let ms = start.elapsed().as_millis() as u64;
        let mut n = CheckReport::new("psi_prime_norm", EXACT_TOL);
        n.record(norm, None);
        let mut m = CheckReport::new("psi_prime_remote_marginals", config.check_tol);
        m.record(marginal, None);
        let mut e = CheckReport::new("psi_prime_ep_equalities", config.check_tol);
        e.record(ep, None);
        let e = e.with_detail(serde_json::to_value(&built).expect("serializable"));
        return Ok(vec![stamp(n, ms), stamp(m, ms), stamp(e, ms)]);
    }

    let shapes = [(2, 2), (2, 3), (4, 2), (4, 3)];
    let (rows, ms) = timed(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| -> CliResult<_> {
                let (d1, d2) = shapes[t % shapes.len()];
                let seed = trial_seed(config.seed, t as u64);
                let mut rng = rng_from_seed(seed);
                let case = random_ep_case(&mut rng, d1, d2)?;
                let options = PsiPrimeOptions { basis_seed: seed, choice: Choice::First };
                let built =
                    construct_psi_prime(case.split, &case.first, &case.second, &case.remote, &case.psi, options, tol)?;
                let devs =
                    psi_prime_deviations(&case.first, &case.second, &case.remote, &case.psi, &built.psi_prime, tol)?;
                Ok((seed, json!({ "trial": t, "d1": d1, "d2": d2 }), devs))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let norm = fold_trials("psi_prime_norm", EXACT_TOL, rows.iter().map(|r| (r.2 .0, r.0, r.1.clone())));
    let marg =
        fold_trials("psi_prime_remote_marginals", config.check_tol, rows.iter().map(|r| (r.2 .1, r.0, r.1.clone())));
    let ep = fold_trials("psi_prime_ep_equalities", config.check_tol, rows.iter().map(|r| (r.2 .2, r.0, r.1.clone())));
    Ok([norm, marg, ep].into_iter().map(|r| stamp(r, ms)).collect())
}

// ---- verify-ep --------------------------------------------------------------

fn verify_ep_suite(config: &RunConfig) -> CliResult<Vec<CheckReport>> {
    let tol = &config.tol;
    let dims = dims_for(config);
    let (rows, ms) = timed(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| -> CliResult<_> {
                let seed = trial_seed(config.seed, t as u64);
                let mut rng = rng_from_seed(seed);
                let (a, b, p, mode, label) = match t % 4 {
                    0 | 1 => {
                        let (d1, d2) = [(2, 2), (2, 3), (4, 2), (3, 3)][(t / 4) % 4];
                        let case = random_ep_case(&mut rng, d1, d2)?;
                        let p = DensityState::pure(&sample_unit_vector(&mut rng, case.split.dim()));
                        if t % 4 == 0 {
                            (case.first, case.second, p, SplitMode::Given(case.split), "given")
                        } else {
                            let u = sample_unitary(&mut rng, case.split.dim());
                            let p = p.conjugated(&u);
                            (case.first.conjugated(&u), case.second.conjugated(&u), p, SplitMode::Detect, "detect")
                        }
                    }
                    2 => {
                        let d = dims[(t / 4) % dims.len()];
                        let (a, b) = random_commuting_pair(&mut rng, d, PairGenerator::CommonBlock)?;
                        (a, b, sample_state(&mut rng, d, true), SplitMode::Ancilla, "ancilla")
                    }
                    _ => {
                        let d = dims[(t / 4) % dims.len()];
                        let a = random_instrument(&mut rng, d, "I");
                        (a.clone(), a, sample_state(&mut rng, d, true), SplitMode::Ancilla, "ancilla_same")
                    }
                };
                let out = verify_ep(&a, &b, &p, mode, seed, tol, config.check_tol)?;
                let separated =
                    out.report.detail.as_ref().and_then(|d| d["witness"]["spacelike"].as_bool()) == Some(true);
                let dev = if separated { out.report.max_deviation } else { f64::INFINITY };
                Ok((dev, seed, json!({ "trial": t, "mode": label, "d1": out.split.d1, "d2": out.split.d2 })))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let report = fold_trials("ep_equivalence", config.check_tol, rows).with_detail(json!({
        "modes": ["given", "detect", "ancilla", "ancilla_same"],
        "witness_spacelike": true,
    }));
    Ok(vec![stamp(report, ms)])
}
