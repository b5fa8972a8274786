//! Minkowski bookkeeping for localized instruments (units with `c = 1`).
//!
//! Regions are axis-aligned boxes, coordinate 0 is time. A boosted box is a
//! parallelepiped; it is stored as the bounding box of its corner images
//! and flagged approximate. Time extrema of the image are attained at
//! corners, so temporal order decisions made from the bounding box are
//! exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hilbert::{identity, CMatrix, DensityState};
use crate::instrument::{confluence_joint, max_commutator, sequential, Instrument, JointOutcome};
use crate::report::CheckReport;
use crate::tolerance::Tolerances;

/// Closed box `[lo_0, hi_0] x ... x [lo_d, hi_d]`; axis 0 is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct SpacetimeRegion {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for SpacetimeRegion {
    type Error = Error;
    fn try_from(intervals: Vec<[f64; 2]>) -> Result<Self> {
        SpacetimeRegion::new(intervals)
    }
}

impl From<SpacetimeRegion> for Vec<[f64; 2]> {
    fn from(r: SpacetimeRegion) -> Self {
        r.intervals
    }
}

impl SpacetimeRegion {
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self> {
        if intervals.len() < 2 {
            return Err(Error::InvalidRegion(format!(
                "need a time axis and at least one space axis, got {} axes",
                intervals.len()
            )));
        }
        for (axis, &[lo, hi]) in intervals.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRegion(format!("axis {axis} is unbounded")));
            }
            if lo > hi {
                return Err(Error::InvalidRegion(format!("axis {axis} has lo {lo} > hi {hi}")));
            }
        }
        Ok(SpacetimeRegion { intervals })
    }

    /// `[t0, t1] x [x0, x1]` in 1+1 dimensions.
    pub fn interval_1d(time: [f64; 2], space: [f64; 2]) -> Result<Self> {
        Self::new(vec![time, space])
    }

    /// Number of spatial axes.
    pub fn spatial_dim(&self) -> usize {
        self.intervals.len() - 1
    }

    pub fn axis(&self, k: usize) -> [f64; 2] {
        self.intervals[k]
    }

    pub fn time(&self) -> [f64; 2] {
        self.intervals[0]
    }

    pub fn center(&self) -> Vec<f64> {
        self.intervals.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let axes = self.intervals.len();
        (0..1usize << axes)
            .map(|mask| {
                (0..axes)
                    .map(|k| if mask >> k & 1 == 0 { self.intervals[k][0] } else { self.intervals[k][1] })
                    .collect()
            })
            .collect()
    }

    pub fn translated(&self, by: &[f64]) -> SpacetimeRegion {
        SpacetimeRegion { intervals: self.intervals.iter().zip(by).map(|([lo, hi], a)| [lo + a, hi + a]).collect() }
    }
}

fn same_dim(a: &SpacetimeRegion, b: &SpacetimeRegion) -> Result<()> {
    if a.spatial_dim() == b.spatial_dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a.spatial_dim(), got: b.spatial_dim() })
    }
}

/// Every point of one box is space-like to every point of the other:
/// `(min spatial distance)^2 > (max time gap)^2`. Space and time extrema are
/// attained independently on a box, so this is exact.
pub fn spacelike(a: &SpacetimeRegion, b: &SpacetimeRegion) -> Result<bool> {
    same_dim(a, b)?;
    let [ta0, ta1] = a.time();
    let [tb0, tb1] = b.time();
    let max_dt = (tb1 - ta0).max(ta1 - tb0);
    let min_dx2: f64 = (1..a.intervals.len())
        .map(|k| {
            let [a0, a1] = a.axis(k);
            let [b0, b1] = b.axis(k);
            let gap = (b0 - a1).max(a0 - b1).max(0.0);
            gap * gap
        })
        .sum();
    Ok(min_dx2 > max_dt * max_dt)
}

/// `(dt)^2 - |dx|^2` between two events.
pub fn minkowski_interval(x: &[f64], y: &[f64]) -> f64 {
    let dt = y[0] - x[0];
    let dx2: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| (b - a) * (b - a)).sum();
    dt * dt - dx2
}

/// Poincaré element `x -> B(v) R x + a`: spatial rotation, then boost, then
/// translation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTransform {
    velocity: Vec<f64>,
    rotation: DMatrix<f64>,
    translation: Vec<f64>,
}

impl FrameTransform {
    pub fn new(velocity: Vec<f64>, rotation: Option<DMatrix<f64>>, translation: Option<Vec<f64>>) -> Result<Self> {
        let d = velocity.len();
        if d == 0 {
            return Err(Error::InvalidInput("velocity needs at least one spatial component".into()));
        }
        let speed = velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN is rejected too
        if !(speed < 1.0) {
            return Err(Error::Superluminal { speed });
        }
        let rotation = rotation.unwrap_or_else(|| DMatrix::identity(d, d));
        if rotation.nrows() != d || rotation.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rotation.nrows() });
        }
        let deviation = (rotation.transpose() * &rotation - DMatrix::<f64>::identity(d, d)).norm();
        if deviation > Tolerances::default().num {
            return Err(Error::InvalidInput(format!("rotation is not orthogonal (deviation {deviation:e})")));
        }
        let translation = translation.unwrap_or_else(|| vec![0.0; d + 1]);
        if translation.len() != d + 1 {
            return Err(Error::DimensionMismatch { expected: d + 1, got: translation.len() });
        }
        Ok(FrameTransform { velocity, rotation, translation })
    }

    pub fn identity(d: usize) -> Self {
        FrameTransform { velocity: vec![0.0; d], rotation: DMatrix::identity(d, d), translation: vec![0.0; d + 1] }
    }

    pub fn boost(velocity: Vec<f64>) -> Result<Self> {
        Self::new(velocity, None, None)
    }

    pub fn translation(by: Vec<f64>) -> Result<Self> {
        let d = by.len().saturating_sub(1);
        Self::new(vec![0.0; d], None, Some(by))
    }

    pub fn spatial_dim(&self) -> usize {
        self.velocity.len()
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &[f64] {
        &self.translation
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.velocity.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `(d+1) x (d+1)` Lorentz matrix `B(v) diag(1, R)`.
    pub fn lorentz_matrix(&self) -> DMatrix<f64> {
        let d = self.spatial_dim();
        let mut rot = DMatrix::identity(d + 1, d + 1);
        rot.view_mut((1, 1), (d, d)).copy_from(&self.rotation);
        boost_matrix(&self.velocity) * rot
    }

    pub fn apply_event(&self, x: &[f64]) -> Vec<f64> {
        let lam = self.lorentz_matrix();
        let v = lam * nalgebra::DVector::from_column_slice(x);
        v.iter().zip(&self.translation).map(|(a, b)| a + b).collect()
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        let d = self.spatial_dim();
        let lam = self.lorentz_matrix() * other.lorentz_matrix();
        let shift = self.lorentz_matrix() * nalgebra::DVector::from_column_slice(&other.translation);
        let translation: Vec<f64> = shift.iter().zip(&self.translation).map(|(a, b)| a + b).collect();
        from_lorentz(&lam, d, translation)
    }

    pub fn inverse(&self) -> FrameTransform {
        let d = self.spatial_dim();
        let lam_inv = minkowski_inverse(&self.lorentz_matrix());
        let shift = &lam_inv * nalgebra::DVector::from_column_slice(&self.translation);
        from_lorentz(&lam_inv, d, shift.iter().map(|x| -x).collect())
    }

    /// Whether the image of a box is again an axis-aligned box.
    fn maps_boxes_exactly(&self) -> bool {
        let tiny = 1e-15;
        self.velocity.iter().all(|v| v.abs() <= tiny)
            && self.rotation.row_iter().all(|row| row.iter().filter(|x| x.abs() > tiny).count() == 1)
    }
}

fn boost_matrix(v: &[f64]) -> DMatrix<f64> {
    let d = v.len();
    let v2: f64 = v.iter().map(|x| x * x).sum();
    let mut b = DMatrix::identity(d + 1, d + 1);
    if v2 == 0.0 {
        return b;
    }
    let gamma = 1.0 / (1.0 - v2).sqrt();
    b[(0, 0)] = gamma;
    for i in 0..d {
        b[(0, i + 1)] = -gamma * v[i];
        b[(i + 1, 0)] = -gamma * v[i];
        for j in 0..d {
            b[(i + 1, j + 1)] += (gamma - 1.0) * v[i] * v[j] / v2;
        }
    }
    b
}

/// `L^{-1} = eta L^T eta` for a Lorentz matrix.
fn minkowski_inverse(lam: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lam.nrows();
    let mut eta = DMatrix::<f64>::identity(n, n);
    for k in 1..n {
        eta[(k, k)] = -1.0;
    }
    &eta * lam.transpose() * &eta
}

/// Splits a proper orthochronous Lorentz matrix into boost times rotation.
fn from_lorentz(lam: &DMatrix<f64>, d: usize, translation: Vec<f64>) -> FrameTransform {
    let g = lam[(0, 0)];
    let velocity: Vec<f64> = (0..d).map(|i| -lam[(i + 1, 0)] / g).collect();
    let rest = boost_matrix(&velocity.iter().map(|x| -x).collect::<Vec<_>>()) * lam;
    let rotation = rest.view((1, 1), (d, d)).into_owned();
    FrameTransform { velocity, rotation, translation }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedRegion {
    pub region: SpacetimeRegion,
    /// The true image is a proper subset of `region`.
    pub approximate: bool,
}

/// Bounding box of the corner images.
pub fn transform_region(g: &FrameTransform, region: &SpacetimeRegion) -> Result<TransformedRegion> {
    if g.spatial_dim() != region.spatial_dim() {
        return Err(Error::DimensionMismatch { expected: region.spatial_dim(), got: g.spatial_dim() });
    }
    let images: Vec<Vec<f64>> = region.corners().iter().map(|c| g.apply_event(c)).collect();
    let axes = region.intervals.len();
    let intervals = (0..axes)
        .map(|k| {
            let lo = images.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
            let hi = images.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        })
        .collect();
    Ok(TransformedRegion { region: SpacetimeRegion { intervals }, approximate: !g.maps_boxes_exactly() })
}

/// Order of the first region relative to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalOrder {
    Before,
    After,
    Overlapping,
}

fn order_of_intervals([a0, a1]: [f64; 2], [b0, b1]: [f64; 2]) -> TemporalOrder {
    if a1 < b0 {
        TemporalOrder::Before
    } else if b1 < a0 {
        TemporalOrder::After
    } else {
        TemporalOrder::Overlapping
    }
}

pub fn temporal_order(g: &FrameTransform, a: &SpacetimeRegion, b: &SpacetimeRegion) -> Result<TemporalOrder> {
    same_dim(a, b)?;
    let ta = transform_region(g, a)?.region.time();
    let tb = transform_region(g, b)?.region.time();
    Ok(order_of_intervals(ta, tb))
}

/// Boost velocity reversing the rest-frame order of the two box centers,
/// `None` unless the boxes are space-like separated.
///
/// The boost is along the axis through the centers. With `r = |dt| / |dx|`
/// the reversing speeds are `(r, 1)`; the midpoint `(1 + r) / 2` is returned.
/// Simultaneous centers are broken towards making the second region earlier.
pub fn reordering_boost(a: &SpacetimeRegion, b: &SpacetimeRegion) -> Result<Option<Vec<f64>>> {
    if !spacelike(a, b)? {
        return Ok(None);
    }
    let (ca, cb) = (a.center(), b.center());
    let dt = cb[0] - ca[0];
    let dx: Vec<f64> = ca[1..].iter().zip(&cb[1..]).map(|(x, y)| y - x).collect();
    let dist = dx.iter().map(|x| x * x).sum::<f64>().sqrt();
    if dist == 0.0 || dt.abs() >= dist {
        return Ok(None);
    }
    let speed = 0.5 * (1.0 + dt.abs() / dist);
    let sign = if dt < 0.0 { -1.0 } else { 1.0 };
    Ok(Some(dx.iter().map(|x| sign * speed * x / dist).collect()))
}

/// Boost velocity along the axis through the centers under which the whole
/// of `a` is strictly `want` (`Before` or `After`) the whole of `b`, chosen
/// at the midpoint of the feasible speed interval.
pub fn ordering_boost(a: &SpacetimeRegion, b: &SpacetimeRegion, want: TemporalOrder) -> Result<Option<Vec<f64>>> {
    same_dim(a, b)?;
    let (early, late) = match want {
        TemporalOrder::Before => (a, b),
        TemporalOrder::After => (b, a),
        TemporalOrder::Overlapping => return Err(Error::InvalidInput("ordering_boost needs Before or After".into())),
    };
    let (ca, cb) = (a.center(), b.center());
    let dx: Vec<f64> = ca[1..].iter().zip(&cb[1..]).map(|(x, y)| y - x).collect();
    let dist = dx.iter().map(|x| x * x).sum::<f64>().sqrt();
    let axis: Vec<f64> = if dist > 0.0 {
        dx.iter().map(|x| x / dist).collect()
    } else {
        let mut e = vec![0.0; dx.len()];
        e[0] = 1.0;
        e
    };
    let project = |c: &[f64]| c[1..].iter().zip(&axis).map(|(x, n)| x * n).sum::<f64>();

    // t' is proportional to t - v s with s the coordinate along the axis:
    // need t1 - v s1 < t2 - v s2, i.e. v (s2 - s1) < t2 - t1 for every corner pair.
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for c1 in early.corners() {
        for c2 in late.corners() {
            let slope = project(&c2) - project(&c1);
            let gap = c2[0] - c1[0];
            if slope > 0.0 {
                hi = hi.min(gap / slope);
            } else if slope < 0.0 {
                lo = lo.max(gap / slope);
            } else if gap <= 0.0 {
                return Ok(None);
            }
        }
    }
    if lo >= hi {
        return Ok(None);
    }
    let v = 0.5 * (lo + hi);
    Ok(Some(axis.iter().map(|n| v * n).collect()))
}

/// An instrument attached to the region in which it is realized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedInstrument {
    pub instrument: Instrument,
    pub region: SpacetimeRegion,
}

/// A frame: a Poincaré element plus the unitary it is represented by on the
/// state space (identity when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub transform: FrameTransform,
    pub unitary: Option<CMatrix>,
}

impl Frame {
    pub fn new(transform: FrameTransform) -> Self {
        Frame { transform, unitary: None }
    }
}

/// How a frame decides that two realizations are simultaneous.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Simultaneity {
    /// Overlapping transformed time intervals count as simultaneous.
    #[default]
    Overlap,
    /// Realization instant at `lo + fraction * (hi - lo)` of each
    /// transformed time interval; equal instants are simultaneous.
    Instant(f64),
}

/// The description a frame gives of the two realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Description {
    Confluence,
    FirstThenSecond,
    SecondThenFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub description: Description,
    /// Realization instants of the two instruments in this frame.
    pub instants: [f64; 2],
    pub probability_deviation: f64,
    pub state_deviation: f64,
}

/// Two localized instruments realized on one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub first: LocalizedInstrument,
    pub second: LocalizedInstrument,
    pub state: DensityState,
}

/// Per-frame joint description: confluence when the frame deems the
/// realizations simultaneous, sequential in the frame's order otherwise.
/// Branch states are mapped back through the frame's unitary.
pub fn frame_description(
    scenario: &Scenario,
    frame: &Frame,
    rule: Simultaneity,
    tol: &Tolerances,
) -> Result<(Description, [f64; 2], JointOutcome)> {
    let d = scenario.state.dim();
    let u = frame.unitary.clone().unwrap_or_else(|| identity(d));
    let t1 = transform_region(&frame.transform, &scenario.first.region)?.region.time();
    let t2 = transform_region(&frame.transform, &scenario.second.region)?.region.time();
    let (instants, description) = match rule {
        Simultaneity::Overlap => {
            let mid = |[lo, hi]: [f64; 2]| 0.5 * (lo + hi);
            let description = match order_of_intervals(t1, t2) {
                TemporalOrder::Overlapping => Description::Confluence,
                TemporalOrder::Before => Description::FirstThenSecond,
                TemporalOrder::After => Description::SecondThenFirst,
            };
            ([mid(t1), mid(t2)], description)
        }
        Simultaneity::Instant(f) => {
            let at = |[lo, hi]: [f64; 2]| lo + f * (hi - lo);
            let (s1, s2) = (at(t1), at(t2));
            let description = if (s1 - s2).abs() <= 1e-12 {
                Description::Confluence
            } else if s1 < s2 {
                Description::FirstThenSecond
            } else {
                Description::SecondThenFirst
            };
            ([s1, s2], description)
        }
    };
    let gi = scenario.first.instrument.conjugated(&u);
    let gj = scenario.second.instrument.conjugated(&u);
    let gp = scenario.state.conjugated(&u);
    let mut joint = match description {
        Description::Confluence => confluence_joint(&gi, &gj, &gp, tol)?,
        Description::FirstThenSecond => sequential(&gi, &gj, &gp, tol)?,
        Description::SecondThenFirst => sequential(&gj, &gi, &gp, tol)?.transposed(),
    };
    let back = u.adjoint();
    for branch in &mut joint.branches {
        if let Some(s) = branch.state.take() {
            branch.state = Some(s.conjugated(&back));
        }
    }
    Ok((description, instants, joint))
}

/// All frames must agree on the joint distribution and, mapped back, on the
/// branch states. Requires space-like regions and commuting instruments.
pub fn frame_consistency(
    scenario: &Scenario,
    frames: &[Frame],
    rule: Simultaneity,
    tol: &Tolerances,
    check_tol: f64,
) -> Result<(CheckReport, Vec<FrameRecord>)> {
    if frames.is_empty() {
        return Err(Error::InvalidInput("no frames supplied".into()));
    }
    if !spacelike(&scenario.first.region, &scenario.second.region)? {
        return Err(Error::NotSpacelike);
    }
    let (i, j) = (&scenario.first.instrument, &scenario.second.instrument);
    if max_commutator(i, j) > tol.num {
        let err = crate::instrument::ensure_commuting(i, j, tol.num).unwrap_err();
        return Err(match err {
            Error::NonCommuting { first, second, norm } => Error::LocalityViolation { first, second, norm },
            other => other,
        });
    }
    for frame in frames {
        if let Some(u) = &frame.unitary {
            let deviation = crate::hilbert::unitarity_deviation(u);
            if u.nrows() != scenario.state.dim() || deviation > tol.num {
                return Err(Error::NotUnitary { deviation });
            }
        }
    }

    let mut report = CheckReport::new("frame_consistency", check_tol);
    let mut records = Vec::with_capacity(frames.len());
    let mut reference: Option<JointOutcome> = None;
    for (k, frame) in frames.iter().enumerate() {
        let (description, instants, joint) = frame_description(scenario, frame, rule, tol)?;
        let (pdev, sdev) = match &reference {
            None => (0.0, 0.0),
            Some(r) => (joint.max_probability_diff(r), joint.max_state_diff(r)),
        };
        report.record(pdev.max(sdev), None);
        if !report.pass && report.counterexample.is_none() {
            report.counterexample = Some(json!({ "frame": k }));
        }
        records.push(FrameRecord {
            frame: k,
            description,
            instants,
            probability_deviation: pdev,
            state_deviation: sdev,
        });
        if reference.is_none() {
            reference = Some(joint);
        }
    }
    let descriptions: Vec<Description> = records.iter().map(|r| r.description).collect();
    Ok((report.with_detail(json!({ "descriptions": descriptions })), records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn region(t: [f64; 2], x: [f64; 2]) -> SpacetimeRegion {
        SpacetimeRegion::interval_1d(t, x).unwrap()
    }

    #[test]
    fn spacelike_examples() {
        let o1 = region([0.0, 1.0], [0.0, 1.0]);
        let o2 = region([0.0, 1.0], [3.0, 4.0]);
        assert!(spacelike(&o1, &o2).unwrap());
        assert!(spacelike(&o2, &o1).unwrap());
        assert!(!spacelike(&o1, &region([5.0, 6.0], [3.0, 4.0])).unwrap());
        assert!(!spacelike(&o1, &region([0.5, 2.0], [0.5, 2.0])).unwrap());
        let o3 = SpacetimeRegion::new(vec![[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(spacelike(&o1, &o3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn invalid_regions() {
        assert!(SpacetimeRegion::new(vec![[0.0, 1.0]]).is_err());
        assert!(SpacetimeRegion::new(vec![[1.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(SpacetimeRegion::new(vec![[0.0, f64::INFINITY], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn transform_examples() {
        let o = region([0.0, 1.0], [2.0, 3.0]);
        let same = transform_region(&FrameTransform::identity(1), &o).unwrap();
        assert_eq!(same.region, o);
        assert!(!same.approximate);

        let shifted = transform_region(&FrameTransform::translation(vec![1.0, -2.0]).unwrap(), &o).unwrap();
        assert_eq!(shifted.region, region([1.0, 2.0], [0.0, 1.0]));
        assert!(!shifted.approximate);

        let g = FrameTransform::boost(vec![0.5]).unwrap();
        let image = g.apply_event(&[0.0, 2.0]);
        assert_abs_diff_eq!(image[0], -2.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert!(transform_region(&g, &o).unwrap().approximate);
        assert!(matches!(FrameTransform::boost(vec![1.0]), Err(Error::Superluminal { .. })));
    }

    #[test]
    fn order_under_boost() {
        let o1 = region([0.0, 1.0], [0.0, 1.0]);
        let o2 = region([0.0, 1.0], [3.0, 4.0]);
        let rest = FrameTransform::identity(1);
        assert_eq!(temporal_order(&rest, &o1, &o2).unwrap(), TemporalOrder::Overlapping);
        // corner arithmetic: t' = gamma (t - 0.9 x); o1 spans gamma [-0.9, 1],
        // o2 spans gamma [-3.6, -1.7], so o2 ends before o1 starts.
        let g = FrameTransform::boost(vec![0.9]).unwrap();
        assert_eq!(temporal_order(&g, &o1, &o2).unwrap(), TemporalOrder::After);
        let g = FrameTransform::boost(vec![-0.9]).unwrap();
        assert_eq!(temporal_order(&g, &o1, &o2).unwrap(), TemporalOrder::Before);
    }

    #[test]
    fn timelike_order_is_frame_independent() {
        let o1 = region([0.0, 1.0], [0.0, 1.0]);
        let o2 = region([5.0, 6.0], [0.0, 1.0]);
        for k in -99..=99 {
            let g = FrameTransform::boost(vec![k as f64 / 100.0]).unwrap();
            assert_eq!(temporal_order(&g, &o1, &o2).unwrap(), TemporalOrder::Before);
        }
    }

    #[test]
    fn reordering_examples() {
        let o1 = region([-0.05, 0.05], [-0.05, 0.05]);
        let o2 = region([0.45, 0.55], [1.95, 2.05]);
        let v = reordering_boost(&o1, &o2).unwrap().unwrap();
        // any v with 2 v > 0.5 works; the midpoint rule gives (1 + 0.25) / 2
        assert_abs_diff_eq!(v[0], 0.625, epsilon = 1e-15);
        let g = FrameTransform::boost(v).unwrap();
        let (c1, c2) = (g.apply_event(&o1.center()), g.apply_event(&o2.center()));
        assert!(c2[0] < c1[0]);

        let timelike = region([3.0, 3.1], [0.0, 0.1]);
        assert_eq!(reordering_boost(&o1, &timelike).unwrap(), None);

        let level = region([-0.05, 0.05], [1.95, 2.05]);
        assert_eq!(reordering_boost(&o1, &level).unwrap(), Some(vec![0.5]));
    }

    #[test]
    fn ordering_boost_orders_whole_regions() {
        let o1 = region([0.0, 0.2], [0.0, 0.2]);
        let o2 = region([0.1, 0.3], [3.0, 3.2]);
        for want in [TemporalOrder::Before, TemporalOrder::After] {
            let v = ordering_boost(&o1, &o2, want).unwrap().unwrap();
            let g = FrameTransform::boost(v).unwrap();
            assert_eq!(temporal_order(&g, &o1, &o2).unwrap(), want);
        }
        let timelike = region([5.0, 5.2], [0.0, 0.2]);
        assert!(ordering_boost(&o1, &timelike, TemporalOrder::After).unwrap().is_none());
    }

    #[test]
    fn composition_and_inverse() {
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let g1 = FrameTransform::new(vec![0.3, -0.4], Some(rot), Some(vec![1.0, 2.0, 3.0])).unwrap();
        let g2 = FrameTransform::new(vec![-0.5, 0.2], None, Some(vec![0.5, 0.0, -1.0])).unwrap();
        let composed = g2.compose(&g1);
        let x = [0.7, -1.3, 2.1];
        let direct = g2.apply_event(&g1.apply_event(&x));
        let via = composed.apply_event(&x);
        for (a, b) in direct.iter().zip(&via) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let speed: f64 = composed.velocity().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(speed < 1.0);
        let r = composed.rotation();
        assert!((r.transpose() * r - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);

        let back = g1.inverse().apply_event(&g1.apply_event(&x));
        for (a, b) in back.iter().zip(&x) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn interval_is_boost_invariant() {
        let x = [0.3, 1.0, -2.0];
        let y = [1.7, -0.4, 0.5];
        let g = FrameTransform::new(vec![0.6, 0.7], None, Some(vec![3.0, 1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(
            minkowski_interval(&x, &y),
            minkowski_interval(&g.apply_event(&x), &g.apply_event(&y)),
            epsilon = 1e-12
        );
    }
}
