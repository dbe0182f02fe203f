//! Metric fields over single charts, singular-set descriptions, chart
//! distance functions, and cutoff constructions.
//!
//! Every object here is a closed form over one chart; evaluation is pure.
//! Metrics may degenerate or blow up exactly on their marked singular set,
//! which evaluation refuses to touch.

mod gallery;

pub use gallery::{gallery, GalleryPair, Region};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("evaluation point lies on the marked singular set")]
    SingularPoint,
    #[error("evaluation point is outside the chart domain")]
    OutOfChart,
    #[error("mollifier radius {delta} must be smaller than eps/3 = {limit}")]
    BadMollifierRadius { delta: f64, limit: f64 },
    #[error("unknown gallery entry `{0}`")]
    UnknownGalleryEntry(String),
}

pub fn pad3(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (i, &v) in x.iter().take(3).enumerate() {
        p[i] = v;
    }
    p
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Closed subsets of a chart on which a metric may fail to extend.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum SingularSet {
    Point { at: [f64; 3] },
    PointList { points: Vec<[f64; 3]> },
    Segment { a: [f64; 3], b: [f64; 3] },
    /// Level-k middle-thirds construction along the segment a-b:
    /// 2^k closed intervals, each a 3^-k fraction of the segment.
    CantorApprox { level: u32, a: [f64; 3], b: [f64; 3] },
    /// The circle (2D) or sphere (3D) |x - center| = radius.
    SphereCapBoundary { center: [f64; 3], radius: f64 },
    /// A puncture sitting at the chart's point at infinity; it has no
    /// finite chart distance and cannot be meshed directly.
    ChartInfinity,
}

fn point_segment_distance(x: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = sub3(b, a);
    let ax = sub3(x, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    if len2 == 0.0 {
        return norm3(&ax);
    }
    let t = ((ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2).clamp(0.0, 1.0);
    let closest = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
    norm3(&sub3(x, &closest))
}

/// Distance from parameter u (unit coordinates) to the level-k middle-thirds
/// set on [0, 1]. The set is symmetric about 1/2, so only the nearer half
/// needs descending into.
fn cantor_distance_unit(u: f64, level: u32) -> f64 {
    if level == 0 {
        return if u < 0.0 {
            -u
        } else if u > 1.0 {
            u - 1.0
        } else {
            0.0
        };
    }
    if u <= 0.5 {
        cantor_distance_unit(3.0 * u, level - 1) / 3.0
    } else {
        cantor_distance_unit(3.0 * (1.0 - u), level - 1) / 3.0
    }
}

/// The 2^k closed intervals of the level-k construction on [0, 1], in
/// increasing order. Test oracle companion to `cantor_distance_unit`.
pub fn cantor_intervals_unit(level: u32) -> Vec<(f64, f64)> {
    let mut list = vec![(0.0, 1.0)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(list.len() * 2);
        for (a, b) in list {
            let third = (b - a) / 3.0;
            next.push((a, a + third));
            next.push((b - third, b));
        }
        list = next;
    }
    list
}

impl SingularSet {
    /// Euclidean chart distance from `x` to the set. Exact for every kind
    /// at its stated construction level.
    pub fn distance(&self, x: &[f64; 3]) -> f64 {
        match self {
            SingularSet::Point { at } => norm3(&sub3(x, at)),
            SingularSet::PointList { points } => points
                .iter()
                .map(|p| norm3(&sub3(x, p)))
                .fold(f64::INFINITY, f64::min),
            SingularSet::Segment { a, b } => point_segment_distance(x, a, b),
            SingularSet::CantorApprox { level, a, b } => {
                let ab = sub3(b, a);
                let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
                let len = len2.sqrt();
                if len == 0.0 {
                    return norm3(&sub3(x, a));
                }
                let ax = sub3(x, a);
                let t = (ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2;
                let foot = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
                let perp = norm3(&sub3(x, &foot));
                let axial = len * cantor_distance_unit(t, *level);
                (perp * perp + axial * axial).sqrt()
            }
            SingularSet::SphereCapBoundary { center, radius } => {
                (norm3(&sub3(x, center)) - radius).abs()
            }
            SingularSet::ChartInfinity => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        self.distance(x) == 0.0
    }
}

/// Pointwise value of a metric: the tensor g_ij (top-left dim x dim block)
/// and the volume density sqrt(det g).
#[derive(Debug, Clone, Copy)]
pub struct MetricValue {
    pub dim: usize,
    pub tensor: [[f64; 3]; 3],
    pub density: f64,
}

impl MetricValue {
    fn isotropic(dim: usize, c: f64) -> Self {
        let mut tensor = [[0.0; 3]; 3];
        for i in 0..dim {
            tensor[i][i] = c;
        }
        let density = match dim {
            1 => c.sqrt(),
            2 => c,
            _ => c * c.sqrt(),
        };
        MetricValue { dim, tensor, density }
    }

    fn diagonal(dim: usize, diag: [f64; 3]) -> Self {
        let mut tensor = [[0.0; 3]; 3];
        let mut det = 1.0;
        for i in 0..dim {
            tensor[i][i] = diag[i];
            det *= diag[i];
        }
        MetricValue { dim, tensor, density: det.sqrt() }
    }

    /// Inverse tensor g^ij (top-left dim x dim block).
    pub fn inverse_tensor(&self) -> [[f64; 3]; 3] {
        let t = &self.tensor;
        let mut inv = [[0.0; 3]; 3];
        match self.dim {
            1 => inv[0][0] = 1.0 / t[0][0],
            2 => {
                let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
                inv[0][0] = t[1][1] / det;
                inv[1][1] = t[0][0] / det;
                inv[0][1] = -t[0][1] / det;
                inv[1][0] = -t[1][0] / det;
            }
            _ => {
                let det = t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1])
                    - t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0])
                    + t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0]);
                let c = |i: usize, j: usize| {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    t[i1][j1] * t[i2][j2] - t[i1][j2] * t[i2][j1]
                };
                for i in 0..3 {
                    for j in 0..3 {
                        inv[i][j] = c(j, i) / det;
                    }
                }
            }
        }
        inv
    }

    pub fn determinant(&self) -> f64 {
        let t = &self.tensor;
        match self.dim {
            1 => t[0][0],
            2 => t[0][0] * t[1][1] - t[0][1] * t[1][0],
            _ => {
                t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1])
                    - t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0])
                    + t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])
            }
        }
    }
}

/// Chart domains for the single-chart manifolds in play.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum ChartRegion {
    All,
    Disk { radius: f64 },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Box3 { lo: [f64; 3], hi: [f64; 3] },
    Interval { a: f64, b: f64 },
}

impl ChartRegion {
    pub fn contains(&self, x: &[f64; 3]) -> bool {
        match self {
            ChartRegion::All => true,
            ChartRegion::Disk { radius } => x[0] * x[0] + x[1] * x[1] <= radius * radius,
            ChartRegion::Rect { lo, hi } => {
                x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1]
            }
            ChartRegion::Box3 { lo, hi } => (0..3).all(|i| x[i] >= lo[i] && x[i] <= hi[i]),
            ChartRegion::Interval { a, b } => x[0] >= *a && x[0] <= *b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MetricKind {
    Euclidean,
    /// Conformal factor c(x); tensor = c I, density = c^(dim/2).
    Isotropic(Profile),
    /// 3D product form diag(1, f^2, f^2) with f a power of the transverse
    /// distance to the x-axis inside a tube of the given radius.
    ProductTransverse { exponent: f64, tube_radius: f64 },
    /// 2D strip metric diag(1, w(x)^2) pinched around `center_x`.
    PinchedStrip { center_x: f64, halfwidth: f64, neck: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    /// Constant conformal factor.
    Constant { factor: f64 },
    /// Round unit sphere via stereographic projection: 4 / (1 + |x|^2)^2.
    StereographicSphere,
    /// Unit hemisphere glued to a flat unit disk; Euclidean inside the
    /// unit circle, stereographic factor outside. Continuous at |x| = 1.
    FlatBottomHemisphere,
    /// f^2 with f = (distance to set)^exponent inside the unit-distance
    /// collar around the set, f = 1 outside.
    PowerOfDistance { set: SingularSet, exponent: f64, collar: f64 },
}

fn stereographic_factor(r2: f64) -> f64 {
    let s = 1.0 + r2;
    4.0 / (s * s)
}

/// A Riemannian metric over one chart: pointwise closed-form tensor plus
/// volume density. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    label: String,
    chart: ChartRegion,
    kind: MetricKind,
    singular: Option<SingularSet>,
}

impl MetricField {
    pub fn euclidean(dim: usize) -> Self {
        MetricField {
            dim,
            label: format!("euclidean-{dim}d"),
            chart: ChartRegion::All,
            kind: MetricKind::Euclidean,
            singular: None,
        }
    }

    /// Round unit sphere pulled back through the stereographic chart.
    pub fn stereographic_sphere() -> Self {
        MetricField {
            dim: 2,
            label: "stereographic-sphere".into(),
            chart: ChartRegion::All,
            kind: MetricKind::Isotropic(Profile::StereographicSphere),
            singular: Some(SingularSet::ChartInfinity),
        }
    }

    /// Hemisphere with a flat unit-disk bottom, stereographic chart from the
    /// deleted top point (which sits at the chart's infinity).
    pub fn flat_bottom_sphere() -> Self {
        MetricField {
            dim: 2,
            label: "flat-bottom-sphere".into(),
            chart: ChartRegion::All,
            kind: MetricKind::Isotropic(Profile::FlatBottomHemisphere),
            singular: Some(SingularSet::ChartInfinity),
        }
    }

    /// Conformal power metric f^2 g_euc with f = dist(x, set)^exponent inside
    /// the unit collar around the set and f = 1 outside it.
    pub fn conformal_power(dim: usize, set: SingularSet, exponent: f64) -> Self {
        MetricField {
            dim,
            label: format!("conformal-power({exponent})"),
            chart: ChartRegion::All,
            kind: MetricKind::Isotropic(Profile::PowerOfDistance {
                set: set.clone(),
                exponent,
                collar: 1.0,
            }),
            singular: if exponent == 0.0 { None } else { Some(set) },
        }
    }

    /// 3D product perturbation diag(1, f^2, f^2) around the x-axis.
    pub fn product_transverse(exponent: f64) -> Self {
        let axis = SingularSet::Segment { a: [-1.0, 0.0, 0.0], b: [1.0, 0.0, 0.0] };
        MetricField {
            dim: 3,
            label: format!("product-transverse({exponent})"),
            chart: ChartRegion::All,
            kind: MetricKind::ProductTransverse { exponent, tube_radius: 1.0 },
            singular: if exponent == 0.0 { None } else { Some(axis) },
        }
    }

    /// 2D strip metric diag(1, w(x)^2) whose width profile w dips to `neck`
    /// near `center_x`; the two sides of the pinch couple weakly.
    pub fn pinched_strip(center_x: f64, halfwidth: f64, neck: f64) -> Self {
        assert!(neck > 0.0 && neck <= 1.0 && halfwidth > 0.0);
        MetricField {
            dim: 2,
            label: format!("pinched-strip({center_x},{halfwidth},{neck})"),
            chart: ChartRegion::All,
            kind: MetricKind::PinchedStrip { center_x, halfwidth, neck },
            singular: None,
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn with_chart(mut self, chart: ChartRegion) -> Self {
        self.chart = chart;
        self
    }

    pub fn with_singular(mut self, set: SingularSet) -> Self {
        self.singular = Some(set);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_set(&self) -> Option<&SingularSet> {
        self.singular.as_ref()
    }

    /// Evaluate tensor and density at a chart point off the singular set.
    pub fn eval(&self, x: &[f64; 3]) -> Result<MetricValue, GeometryError> {
        if !self.chart.contains(x) {
            return Err(GeometryError::OutOfChart);
        }
        if let Some(set) = &self.singular {
            if set.contains(x) {
                return Err(GeometryError::SingularPoint);
            }
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without chart/singular guards, for quadrature points that
    /// the mesh already keeps off the singular set.
    pub fn eval_unchecked(&self, x: &[f64; 3]) -> MetricValue {
        match &self.kind {
            MetricKind::Euclidean => MetricValue::isotropic(self.dim, 1.0),
            MetricKind::Isotropic(profile) => {
                let c = match profile {
                    Profile::StereographicSphere => {
                        stereographic_factor(x[0] * x[0] + x[1] * x[1])
                    }
                    Profile::FlatBottomHemisphere => {
                        let r2 = x[0] * x[0] + x[1] * x[1];
                        if r2 <= 1.0 {
                            1.0
                        } else {
                            stereographic_factor(r2)
                        }
                    }
                    Profile::PowerOfDistance { set, exponent, collar } => {
                        let r = set.distance(x);
                        if r >= *collar {
                            1.0
                        } else {
                            let f = r.powf(*exponent);
                            f * f
                        }
                    }
                };
                MetricValue::isotropic(self.dim, c)
            }
            MetricKind::ProductTransverse { exponent, tube_radius } => {
                let r_perp = (x[1] * x[1] + x[2] * x[2]).sqrt();
                let f = if r_perp >= *tube_radius { 1.0 } else { r_perp.powf(*exponent) };
                MetricValue::diagonal(3, [1.0, f * f, f * f])
            }
            MetricKind::PinchedStrip { center_x, halfwidth, neck } => {
                let t = (x[0] - center_x) / halfwidth;
                let w = if t.abs() >= 1.0 {
                    1.0
                } else {
                    let s = 1.0 - t * t;
                    1.0 - (1.0 - neck) * s * s
                };
                MetricValue::diagonal(2, [1.0, w * w, 0.0])
            }
        }
    }
}

/// Base region a cutoff measures its distance from.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum CutoffBase {
    Set(SingularSet),
    Ball { center: [f64; 3], radius: f64 },
    BallComplement { center: [f64; 3], radius: f64 },
    /// Closed radius-r neighborhood of a singular set.
    Neighborhood { set: SingularSet, radius: f64 },
}

impl CutoffBase {
    pub fn distance(&self, x: &[f64; 3]) -> f64 {
        match self {
            CutoffBase::Set(s) => s.distance(x),
            CutoffBase::Ball { center, radius } => {
                (norm3(&sub3(x, center)) - radius).max(0.0)
            }
            CutoffBase::BallComplement { center, radius } => {
                (radius - norm3(&sub3(x, center))).max(0.0)
            }
            CutoffBase::Neighborhood { set, radius } => (set.distance(x) - radius).max(0.0),
        }
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        self.distance(x) == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutoffKind {
    /// (1 - r)_+ : equals 1 on the base set, supported in its unit collar.
    Psi,
    /// (1 - r/eps)_+ : linear ramp over the eps-collar.
    Phi,
    /// (1 AND (2 - 3 r/eps))_+ : 1 within eps/3, 0 beyond 2 eps/3,
    /// gradient bounded by 3/eps.
    ChiHat,
    /// ChiHat convolved with a normalized polynomial bump of radius delta.
    ChiMollified,
}

/// Scalar cutoff over the chart, built from a distance function.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub kind: CutoffKind,
    pub base: CutoffBase,
    pub eps: f64,
    pub delta: f64,
    dim: usize,
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

impl Cutoff {
    pub fn new(
        kind: CutoffKind,
        base: CutoffBase,
        eps: f64,
        delta: f64,
        dim: usize,
    ) -> Result<Self, GeometryError> {
        assert!(eps > 0.0, "cutoff eps must be positive");
        assert!(delta >= 0.0, "mollifier radius must be nonnegative");
        if kind == CutoffKind::ChiMollified && delta >= eps / 3.0 {
            return Err(GeometryError::BadMollifierRadius { delta, limit: eps / 3.0 });
        }
        Ok(Cutoff { kind, base, eps, delta, dim })
    }

    fn raw(&self, kind: CutoffKind, x: &[f64; 3]) -> f64 {
        let r = self.base.distance(x);
        match kind {
            CutoffKind::Psi => (1.0 - r).max(0.0),
            CutoffKind::Phi => (1.0 - r / self.eps).max(0.0),
            CutoffKind::ChiHat | CutoffKind::ChiMollified => {
                (2.0 - 3.0 * r / self.eps).min(1.0).max(0.0)
            }
        }
    }

    /// Evaluate the cutoff; values are always in [0, 1].
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match self.kind {
            CutoffKind::ChiMollified => self.mollified(x),
            k => self.raw(k, x),
        }
    }

    /// Convolution with the bump (1 - |y/delta|^2)^3_+ by tensor Gauss
    /// quadrature of order 5, normalized by the quadrature weight sum so
    /// the result is a convex combination of chi-hat samples.
    fn mollified(&self, x: &[f64; 3]) -> f64 {
        let d = self.delta;
        if d == 0.0 {
            return self.raw(CutoffKind::ChiHat, x);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        let mut visit = |offset: [f64; 3], w: f64| {
            let r2 = (offset[0] * offset[0] + offset[1] * offset[1] + offset[2] * offset[2])
                / (d * d);
            if r2 >= 1.0 {
                return;
            }
            let b = (1.0 - r2).powi(3);
            let y = [x[0] - offset[0], x[1] - offset[1], x[2] - offset[2]];
            num += w * b * self.raw(CutoffKind::ChiHat, &y);
            den += w * b;
        };
        match self.dim {
            1 => {
                for (n, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                    visit([n * d, 0.0, 0.0], w);
                }
            }
            2 => {
                for (n0, w0) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                    for (n1, w1) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                        visit([n0 * d, n1 * d, 0.0], w0 * w1);
                    }
                }
            }
            _ => {
                for (n0, w0) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                    for (n1, w1) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                        for (n2, w2) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                            visit([n0 * d, n1 * d, n2 * d], w0 * w1 * w2);
                        }
                    }
                }
            }
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_identity() {
        let g = MetricField::euclidean(2);
        let v = g.eval(&[0.3, -0.7, 0.0]).unwrap();
        assert_eq!(v.tensor[0][0], 1.0);
        assert_eq!(v.tensor[1][1], 1.0);
        assert_eq!(v.tensor[0][1], 0.0);
        assert_eq!(v.density, 1.0);
    }

    #[test]
    fn stereographic_at_origin_is_four() {
        // Conformal factor of the standard stereographic parametrization at
        // the chart origin: 4/(1+0)^2 = 4, density 4 in 2D.
        let g = MetricField::stereographic_sphere();
        let v = g.eval(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.tensor[0][0], 4.0);
        assert_eq!(v.tensor[1][1], 4.0);
        assert_eq!(v.density, 4.0);
    }

    #[test]
    fn conformal_power_is_identity_at_unit_distance() {
        let set = SingularSet::Point { at: [0.0; 3] };
        let g = MetricField::conformal_power(2, set, 0.75);
        let v = g.eval(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.tensor[0][0], 1.0);
        assert_eq!(v.density, 1.0);
    }

    #[test]
    fn conformal_density_scales_by_f_squared_in_2d() {
        let set = SingularSet::Point { at: [0.0; 3] };
        let g = MetricField::conformal_power(2, set, 1.0);
        let v = g.eval(&[0.5, 0.0, 0.0]).unwrap();
        assert!((v.density - 0.25).abs() < 1e-15);
        assert!((v.tensor[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eval_on_singular_set_is_an_error() {
        let set = SingularSet::Point { at: [0.0; 3] };
        let g = MetricField::conformal_power(2, set, 1.0);
        assert!(matches!(g.eval(&[0.0, 0.0, 0.0]), Err(GeometryError::SingularPoint)));
    }

    #[test]
    fn tensor_symmetric_density_matches_det() {
        let fields = vec![
            MetricField::stereographic_sphere(),
            MetricField::flat_bottom_sphere(),
            MetricField::product_transverse(0.5),
            MetricField::pinched_strip(1.0, 0.3, 0.05),
        ];
        let mut k = 1u64;
        for f in fields {
            for _ in 0..50 {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = |s: u64| ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0;
                let x = [u(k), u(k.wrapping_mul(3)), u(k.wrapping_mul(7))];
                let v = f.eval_unchecked(&x);
                for i in 0..v.dim {
                    for j in 0..v.dim {
                        assert!((v.tensor[i][j] - v.tensor[j][i]).abs() <= 1e-12);
                    }
                }
                let det = v.determinant();
                if det > 0.0 {
                    assert!(
                        (v.density - det.sqrt()).abs() <= 1e-10 * v.density.max(1.0),
                        "density {} vs sqrt det {}",
                        v.density,
                        det.sqrt()
                    );
                }
            }
        }
    }

    #[test]
    fn point_distance() {
        let s = SingularSet::Point { at: [0.0; 3] };
        assert_eq!(s.distance(&[0.7, 0.0, 0.0]), 0.7);
        assert_eq!(s.distance(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn cantor_distance_matches_brute_force() {
        for level in 0..=6u32 {
            let intervals = cantor_intervals_unit(level);
            assert_eq!(intervals.len(), 1usize << level);
            for (a, b) in &intervals {
                assert!((b - a - 3.0f64.powi(-(level as i32))).abs() < 1e-15);
            }
            let set = SingularSet::CantorApprox {
                level,
                a: [0.0, 0.0, 0.0],
                b: [1.0, 0.0, 0.0],
            };
            for i in 0..200 {
                let u = -0.2 + 1.4 * (i as f64) / 199.0;
                let y = if i % 3 == 0 { 0.1 } else { 0.0 };
                let d = set.distance(&[u, y, 0.0]);
                let brute = intervals
                    .iter()
                    .map(|&(a, b)| {
                        let ax = if u < a {
                            a - u
                        } else if u > b {
                            u - b
                        } else {
                            0.0
                        };
                        (ax * ax + y * y).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!((d - brute).abs() < 1e-12, "level {level} u {u}: {d} vs {brute}");
            }
        }
    }

    #[test]
    fn cantor_level2_example() {
        let set = SingularSet::CantorApprox { level: 2, a: [0.0; 3], b: [1.0, 0.0, 0.0] };
        // Nearest level-2 interval to x = 0.5 is [1/3-1/9, 1/3]? The four
        // intervals are [0,1/9],[2/9,1/3],[2/3,7/9],[8/9,1]; axial distance
        // from 0.5 is 0.5 - 1/3 = 1/6.
        let d = set.distance(&[0.5, 0.1, 0.0]);
        let expect = ((1.0f64 / 6.0).powi(2) + 0.01).sqrt();
        assert!((d - expect).abs() < 1e-14);
    }

    #[test]
    fn distance_is_1_lipschitz_on_sampled_pairs() {
        let sets = vec![
            SingularSet::Point { at: [0.2, -0.1, 0.0] },
            SingularSet::Segment { a: [0.0; 3], b: [1.0, 0.5, 0.0] },
            SingularSet::CantorApprox { level: 4, a: [0.0; 3], b: [1.0, 0.0, 0.0] },
            SingularSet::SphereCapBoundary { center: [0.0; 3], radius: 1.0 },
        ];
        let mut state = 9u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 3.0 - 1.5
        };
        for set in sets {
            for _ in 0..300 {
                let p = [next(), next(), 0.0];
                let q = [next(), next(), 0.0];
                let dp = set.distance(&p);
                let dq = set.distance(&q);
                let sep = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                assert!((dp - dq).abs() <= sep + 1e-12);
            }
        }
    }

    #[test]
    fn psi_is_one_on_base() {
        let base = CutoffBase::Set(SingularSet::Point { at: [0.0; 3] });
        let psi = Cutoff::new(CutoffKind::Psi, base, 1.0, 0.0, 2).unwrap();
        assert_eq!(psi.eval(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(psi.eval(&[0.5, 0.0, 0.0]), 0.5);
        assert_eq!(psi.eval(&[2.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn chi_hat_plateau_and_midpoint() {
        let eps = 0.9;
        let base = CutoffBase::Ball { center: [0.0; 3], radius: 1.0 };
        let chi = Cutoff::new(CutoffKind::ChiHat, base, eps, 0.0, 2).unwrap();
        // r = eps/2 -> (2 - 1.5) = 0.5
        assert!((chi.eval(&[1.0 + eps / 2.0, 0.0, 0.0]) - 0.5).abs() < 1e-14);
        // 1 on N(K, eps/3), 0 outside N(K, 2eps/3)
        assert_eq!(chi.eval(&[1.0 + eps / 3.0 - 1e-12, 0.0, 0.0]), 1.0);
        assert_eq!(chi.eval(&[1.0 + 2.0 * eps / 3.0 + 1e-12, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn mollifier_radius_gate() {
        let base = CutoffBase::Ball { center: [0.0; 3], radius: 1.0 };
        let bad = Cutoff::new(CutoffKind::ChiMollified, base.clone(), 0.9, 0.3, 2);
        assert!(matches!(bad, Err(GeometryError::BadMollifierRadius { .. })));
        assert!(Cutoff::new(CutoffKind::ChiMollified, base, 0.9, 0.29, 2).is_ok());
    }

    #[test]
    fn mollified_plateaus_and_bounds() {
        let eps = 0.9;
        let delta = 0.2;
        let base = CutoffBase::Ball { center: [0.0; 3], radius: 1.0 };
        let chi = Cutoff::new(CutoffKind::ChiMollified, base, eps, delta, 2).unwrap();
        for i in 0..400 {
            let r = 0.8 + 2.0 * (i as f64) / 399.0;
            let x = [r * 0.6, r * 0.8, 0.0];
            let v = chi.eval(&x);
            assert!((0.0..=1.0).contains(&v), "value {v} out of range");
            let dist = (r - 1.0).max(0.0);
            if dist <= eps / 3.0 - delta {
                assert!((v - 1.0).abs() < 1e-14, "plateau violated at r={r}: {v}");
            }
            if dist >= 2.0 * eps / 3.0 + delta {
                assert!(v.abs() < 1e-14, "tail violated at r={r}: {v}");
            }
        }
    }

    #[test]
    fn chi_hat_gradient_bound() {
        let eps = 0.6;
        let base = CutoffBase::Ball { center: [0.0; 3], radius: 1.0 };
        let chi = Cutoff::new(CutoffKind::ChiHat, base, eps, 0.0, 2).unwrap();
        let h = 1e-6;
        for i in 0..300 {
            let ang = i as f64 * 0.21;
            let r = 0.9 + 1.1 * (i as f64) / 299.0;
            let x = [r * ang.cos(), r * ang.sin(), 0.0];
            let gx = (chi.eval(&[x[0] + h, x[1], 0.0]) - chi.eval(&[x[0] - h, x[1], 0.0]))
                / (2.0 * h);
            let gy = (chi.eval(&[x[0], x[1] + h, 0.0]) - chi.eval(&[x[0], x[1] - h, 0.0]))
                / (2.0 * h);
            let grad = (gx * gx + gy * gy).sqrt();
            assert!(grad <= 3.0 / eps + 1e-3, "gradient {grad} exceeds {}", 3.0 / eps);
        }
    }
}
