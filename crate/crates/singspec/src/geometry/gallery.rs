//! Named pairs (g, g') of metrics on a shared chart that agree outside a
//! region K, together with the singular set the new metric fails to extend
//! to. These are the study cases the rest of the crate runs experiments on.

use super::{
    ChartRegion, CutoffBase, GeometryError, MetricField, SingularSet,
};
use serde::Serialize;

/// Region of the chart where the metric pair may differ.
pub type Region = CutoffBase;

#[derive(Debug, Clone)]
pub struct GalleryPair {
    pub name: String,
    pub g: MetricField,
    pub g_prime: MetricField,
    pub singular: SingularSet,
    pub region_k: Region,
    pub chart: ChartRegion,
    /// Default truncation radius for meshing non-compact charts.
    pub truncation_radius: f64,
    /// Fixed sample points used by dumps and agreement checks.
    pub sample_points: Vec<[f64; 3]>,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum GalleryRequest {
    FlatBottomSphereVsPlane,
    PuncturedDiskConformal { eps: f64 },
    CantorStrip { eps: f64, level: u32 },
    ProductPerturbation { exponent: f64 },
    InfiniteVolumePuncture { eps: f64 },
}

impl GalleryRequest {
    /// Parse `name(p1,p2)` style identifiers as used by config files.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(lp) if text.ends_with(')') => {
                let inner = &text[lp + 1..text.len() - 1];
                let args: Vec<&str> =
                    inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                (&text[..lp], args)
            }
            _ => (text, Vec::new()),
        };
        let f = |i: usize, default: f64| -> f64 {
            args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default)
        };
        match name {
            "flat-bottom-sphere-vs-plane" => Ok(GalleryRequest::FlatBottomSphereVsPlane),
            "punctured-disk-conformal" => {
                Ok(GalleryRequest::PuncturedDiskConformal { eps: f(0, 0.5) })
            }
            "cantor-strip" => Ok(GalleryRequest::CantorStrip {
                eps: f(0, 0.5),
                level: f(1, 3.0) as u32,
            }),
            "product-perturbation" => {
                Ok(GalleryRequest::ProductPerturbation { exponent: f(0, 0.5) })
            }
            "infinite-volume-puncture" => {
                Ok(GalleryRequest::InfiniteVolumePuncture { eps: f(0, 1.0) })
            }
            other => Err(GeometryError::UnknownGalleryEntry(other.to_string())),
        }
    }
}

/// Build a gallery entry. The two fields share closed forms outside K, so
/// their values there are identical bit for bit.
pub fn gallery(request: &GalleryRequest) -> GalleryPair {
    match *request {
        GalleryRequest::FlatBottomSphereVsPlane => {
            let g = MetricField::flat_bottom_sphere();
            let g_prime = MetricField::euclidean(2).with_label("plane");
            GalleryPair {
                name: "flat-bottom-sphere-vs-plane".into(),
                g,
                g_prime,
                singular: SingularSet::ChartInfinity,
                region_k: Region::BallComplement { center: [0.0; 3], radius: 1.0 },
                chart: ChartRegion::All,
                truncation_radius: 4.0,
                sample_points: vec![
                    [0.2, 0.1, 0.0],
                    [0.5, -0.5, 0.0],
                    [0.0, 0.9, 0.0],
                    [1.5, 0.0, 0.0],
                    [0.0, -2.5, 0.0],
                ],
                description: "hemisphere with a flat unit-disk bottom, deleted top point at \
                              the chart infinity, against the Euclidean plane; the pair agrees \
                              on the flat bottom |x| < 1"
                    .into(),
            }
        }
        GalleryRequest::PuncturedDiskConformal { eps } => {
            let set = SingularSet::Point { at: [0.0; 3] };
            let g = MetricField::euclidean(2);
            let g_prime = MetricField::conformal_power(2, set.clone(), eps)
                .with_label(&format!("conformal-r^{eps}"));
            GalleryPair {
                name: format!("punctured-disk-conformal({eps})"),
                g,
                g_prime,
                singular: set,
                region_k: Region::Ball { center: [0.0; 3], radius: 1.0 },
                chart: ChartRegion::All,
                truncation_radius: 8.0,
                sample_points: vec![
                    [0.5, 0.0, 0.0],
                    [0.1, 0.1, 0.0],
                    [0.0, 0.75, 0.0],
                    [1.25, 0.0, 0.0],
                    [-2.0, 1.0, 0.0],
                ],
                description: "plane with a deleted origin; conformal factor r^(2 eps) inside \
                              the unit disk, unchanged outside"
                    .into(),
            }
        }
        GalleryRequest::CantorStrip { eps, level } => {
            let set = SingularSet::CantorApprox {
                level,
                a: [0.0, 0.0, 0.0],
                b: [1.0, 0.0, 0.0],
            };
            let g = MetricField::euclidean(2);
            let g_prime = MetricField::conformal_power(2, set.clone(), eps)
                .with_label(&format!("cantor-conformal-r^{eps}-L{level}"));
            GalleryPair {
                name: format!("cantor-strip({eps},{level})"),
                g,
                g_prime,
                singular: set.clone(),
                region_k: Region::Neighborhood { set, radius: 1.0 },
                chart: ChartRegion::Rect { lo: [-1.5, -1.5], hi: [2.5, 1.5] },
                truncation_radius: 0.0,
                sample_points: vec![
                    [0.5, 0.5, 0.0],
                    [0.1, -0.2, 0.0],
                    [1.2, 0.1, 0.0],
                    [-1.2, 1.2, 0.0],
                    [2.2, -1.2, 0.0],
                ],
                description: "strip around a level-k middle-thirds set on [0,1] x {0}; the \
                              conformal factor degenerates on the set"
                    .into(),
            }
        }
        GalleryRequest::ProductPerturbation { exponent } => {
            let axis = SingularSet::Segment { a: [-1.0, 0.0, 0.0], b: [1.0, 0.0, 0.0] };
            let g = MetricField::euclidean(3);
            let g_prime = MetricField::product_transverse(exponent);
            GalleryPair {
                name: format!("product-perturbation({exponent})"),
                g,
                g_prime,
                singular: axis.clone(),
                region_k: Region::Neighborhood { set: axis, radius: 1.0 },
                chart: ChartRegion::Box3 { lo: [-1.0; 3], hi: [1.0; 3] },
                truncation_radius: 0.0,
                sample_points: vec![
                    [0.0, 0.3, 0.0],
                    [0.5, 0.0, 0.4],
                    [-0.5, 0.2, 0.2],
                    [0.9, 0.9, 0.3],
                    [0.0, -0.9, 0.9],
                ],
                description: "box with a product metric scaled transversally to the axis \
                              segment: diag(1, f^2, f^2) with f a power of the transverse \
                              distance"
                    .into(),
            }
        }
        GalleryRequest::InfiniteVolumePuncture { eps } => {
            let set = SingularSet::Point { at: [0.0; 3] };
            let g = MetricField::euclidean(2);
            let g_prime = MetricField::conformal_power(2, set.clone(), -eps)
                .with_label(&format!("conformal-r^-{eps}"));
            GalleryPair {
                name: format!("infinite-volume-puncture({eps})"),
                g,
                g_prime,
                singular: set,
                region_k: Region::Ball { center: [0.0; 3], radius: 1.0 },
                chart: ChartRegion::All,
                truncation_radius: 2.0,
                sample_points: vec![
                    [0.5, 0.0, 0.0],
                    [0.25, 0.25, 0.0],
                    [0.0, 0.9, 0.0],
                    [1.5, 0.0, 0.0],
                    [-1.0, 1.0, 0.0],
                ],
                description: "plane with a deleted point; blowing-up conformal factor \
                              r^(-2 eps) inside the unit disk makes the punctured disk \
                              carry infinite volume for eps >= 1"
                    .into(),
            }
        }
    }
}
