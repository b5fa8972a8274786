//! Scenario files: two localized instruments, a state and a list of frames.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "regions": { "near": [[0, 1], [0, 1]], "far": [[0, 1], [3, 4]] },
//!   "instruments": {
//!     "I": { "region": "near", "polarizer": { "kind": "linear", "angle": 0.0, "arm": 1 } },
//!     "J": { "region": "far", "label": "J", "outcomes": [[[...]]] }
//!   },
//!   "pair": ["I", "J"],
//!   "state": { "preset": "singlet" },
//!   "frames": [{ "v": [0.0] }, { "v": [0.9] }, { "v": [-0.9], "unitary": [[...]] }],
//!   "simultaneity": "overlap"
//! }
//! ```
//!
//! `dim` is the state-space dimension. `pair` may be omitted when exactly
//! two instruments are listed (they are then taken in key order).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::epr::{polarizer_instrument, singlet_state, Arm, PolarizerKind};
use crate::error::{Error, Result};
use crate::hilbert::{sample_state, DensityState, Projector};
use crate::instrument::{random_commuting_pair, Instrument, PairGenerator};
use crate::matrix_json::{matrix_from_json, vector_from_json, MatrixJson, VectorJson};
use crate::spacetime::{
    ordering_boost, Frame, FrameTransform, LocalizedInstrument, Scenario, Simultaneity, SpacetimeRegion, TemporalOrder,
};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub regions: BTreeMap<String, SpacetimeRegion>,
    pub instruments: BTreeMap<String, InstrumentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[String; 2]>,
    pub state: StateSpec,
    pub frames: Vec<FrameSpec>,
    #[serde(default)]
    pub simultaneity: Simultaneity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polarizer {
    #[serde(flatten)]
    pub kind: PolarizerKind,
    pub arm: Arm,
}

/// Either explicit outcome projectors or a polarizer preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentEntry {
    pub region: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<Projector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizer: Option<Polarizer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Singlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Preset(Preset),
    Vector(VectorJson),
    Density(DensityState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub v: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<MatrixJson>,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{path}: {msg}"))
}

impl FrameSpec {
    pub fn build(&self, path: &str) -> Result<Frame> {
        let rotation = match &self.rotation {
            None => None,
            Some(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(invalid(path, "rotation must be square"));
                }
                Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        };
        let transform =
            FrameTransform::new(self.v.clone(), rotation, self.translation.clone()).map_err(|e| invalid(path, e))?;
        let unitary = match &self.unitary {
            None => None,
            Some(m) => Some(matrix_from_json(m).map_err(|e| invalid(&format!("{path}.unitary"), e))?),
        };
        Ok(Frame { transform, unitary })
    }
}

impl StateSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<DensityState> {
        match self {
            StateSpec::Preset(Preset::Singlet) => Ok(singlet_state()),
            StateSpec::Vector(v) => {
                let v = vector_from_json(v);
                let norm = v.norm();
                if (norm - 1.0).abs() > tol.num {
                    return Err(invalid("state.vector", format!("norm is {norm}, expected 1")));
                }
                Ok(DensityState::pure(&v))
            }
            StateSpec::Density(s) => Ok(s.clone()),
        }
    }
}

impl InstrumentEntry {
    pub fn build(&self, name: &str, tol: &Tolerances) -> Result<Instrument> {
        let path = format!("instruments.{name}");
        let label = self.label.clone().unwrap_or_else(|| name.to_string());
        match (&self.outcomes, &self.polarizer) {
            (Some(outcomes), None) => Instrument::new(label, outcomes.clone(), tol).map_err(|e| invalid(&path, e)),
            (None, Some(p)) => Ok(polarizer_instrument(p.kind, p.arm).with_label(label)),
            _ => Err(invalid(&path, "give exactly one of `outcomes` and `polarizer`")),
        }
    }
}

/// Everything a frame-consistency run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub frames: Vec<Frame>,
    pub simultaneity: Simultaneity,
}

impl ScenarioFile {
    pub fn build(&self, tol: &Tolerances) -> Result<LoadedScenario> {
        let [a, b] = match &self.pair {
            Some(p) => p.clone(),
            None => {
                let names: Vec<&String> = self.instruments.keys().collect();
                if names.len() != 2 {
                    return Err(invalid("pair", "required unless exactly two instruments are listed"));
                }
                [names[0].clone(), names[1].clone()]
            }
        };
        let localize = |name: &str| -> Result<LocalizedInstrument> {
            let entry =
                self.instruments.get(name).ok_or_else(|| invalid("pair", format!("unknown instrument `{name}`")))?;
            let region = self
                .regions
                .get(&entry.region)
                .ok_or_else(|| {
                    invalid(&format!("instruments.{name}.region"), format!("unknown region `{}`", entry.region))
                })?
                .clone();
            let instrument = entry.build(name, tol)?;
            if instrument.dim() != self.dim {
                return Err(invalid(
                    &format!("instruments.{name}"),
                    format!("dimension {} does not match dim {}", instrument.dim(), self.dim),
                ));
            }
            Ok(LocalizedInstrument { instrument, region })
        };
        let first = localize(&a)?;
        let second = localize(&b)?;
        let state = self.state.build(tol)?;
        if state.dim() != self.dim {
            return Err(invalid("state", format!("dimension {} does not match dim {}", state.dim(), self.dim)));
        }
        if self.frames.is_empty() {
            return Err(invalid("frames", "at least one frame is required"));
        }
        let frames = self
            .frames
            .iter()
            .enumerate()
            .map(|(k, f)| f.build(&format!("frames[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        for (k, f) in frames.iter().enumerate() {
            if f.transform.spatial_dim() != first.region.spatial_dim() {
                return Err(invalid(&format!("frames[{k}].v"), "spatial dimension does not match the regions"));
            }
            if let Some(u) = &f.unitary {
                if u.nrows() != self.dim || u.ncols() != self.dim {
                    return Err(invalid(&format!("frames[{k}].unitary"), format!("must be {0}x{0}", self.dim)));
                }
            }
        }
        Ok(LoadedScenario { scenario: Scenario { first, second, state }, frames, simultaneity: self.simultaneity })
    }
}

/// A random 1+1 scenario: time intervals that overlap at rest, space-like
/// separated boxes, a commuting pair in dimension `d`, a random pure state,
/// and three frames: rest, one ordering the first region strictly before the
/// second, and one ordering it strictly after.
pub fn random_scenario(rng: &mut impl Rng, d: usize, generator: PairGenerator) -> Result<LoadedScenario> {
    let t0 = rng.random_range(-1.0..1.0);
    let len1: f64 = rng.random_range(0.1..1.0);
    let len2 = rng.random_range(0.1..1.0);
    let shift = rng.random_range(-0.5..0.5) * len1.min(len2);
    let x0 = rng.random_range(-2.0..2.0);
    let w1 = rng.random_range(0.1..1.0);
    let w2 = rng.random_range(0.1..1.0);
    let gap = (len1 + len2) + rng.random_range(0.5..3.0);
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let r1 = SpacetimeRegion::interval_1d([t0, t0 + len1], [x0, x0 + w1])?;
    let x1 = if side > 0.0 { x0 + w1 + gap } else { x0 - gap - w2 };
    let r2 = SpacetimeRegion::interval_1d([t0 + shift, t0 + shift + len2], [x1, x1 + w2])?;
    let (a, b) = random_commuting_pair(rng, d, generator)?;
    let state = sample_state(rng, d, true);
    let mut frames = vec![Frame::new(FrameTransform::identity(1))];
    for want in [TemporalOrder::Before, TemporalOrder::After] {
        let v = ordering_boost(&r1, &r2, want)?.ok_or(Error::NotSpacelike)?;
        frames.push(Frame::new(FrameTransform::boost(v)?));
    }
    Ok(LoadedScenario {
        scenario: Scenario {
            first: LocalizedInstrument { instrument: a, region: r1 },
            second: LocalizedInstrument { instrument: b, region: r2 },
            state,
        },
        frames,
        simultaneity: Simultaneity::Overlap,
    })
}
