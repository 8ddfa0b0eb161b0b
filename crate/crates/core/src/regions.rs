//! Planar regions, ε-plates and cylinder stacks.
//!
//! All boundaries are half-open: rectangles are `[xmin, xmax) × [ymin, ymax)`,
//! disks and annuli include their outer circle and exclude the inner one, and
//! plates and cylinders include their bottom but not their top.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::HPoint;

/// An axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            xmin: self.xmin.min(other.xmin),
            xmax: self.xmax.max(other.xmax),
            ymin: self.ymin.min(other.ymin),
            ymax: self.ymax.max(other.ymax),
        }
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.xmin, self.ymin],
            [self.xmax, self.ymin],
            [self.xmax, self.ymax],
            [self.xmin, self.ymax],
        ]
    }

    /// Largest distance from the origin to a point of the box.
    pub fn max_norm(&self) -> f64 {
        self.corners()
            .iter()
            .map(|c| c[0].hypot(c[1]))
            .fold(0.0, f64::max)
    }
}

/// A bounded planar Borel region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region2 {
    Rectangle {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        r_inner: f64,
        r_outer: f64,
    },
    /// Pairwise disjoint parts.
    #[serde(rename = "union")]
    DisjointUnion { parts: Vec<Region2> },
}

impl Region2 {
    pub fn rectangle(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Region2::Rectangle { xmin, xmax, ymin, ymax }
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Region2::Disk { center, radius }
    }

    pub fn annulus(center: [f64; 2], r_inner: f64, r_outer: f64) -> Self {
        Region2::Annulus { center, r_inner, r_outer }
    }

    /// Disk centered at the origin with area `area`.
    pub fn disk_with_area(area: f64) -> Self {
        Region2::disk([0.0, 0.0], (area / PI).sqrt())
    }

    /// Annulus centered at the origin with inner radius `r_inner` and area `area`.
    pub fn annulus_with_area(r_inner: f64, area: f64) -> Self {
        Region2::annulus([0.0, 0.0], r_inner, (r_inner * r_inner + area / PI).sqrt())
    }

    /// Checks the shape parameters: finite, ordered, positive measure.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Region2::Rectangle { xmin, xmax, ymin, ymax } => {
                if !finite(&[*xmin, *xmax, *ymin, *ymax]) || !(xmin < xmax) || !(ymin < ymax) {
                    return Err(Error::Domain(format!("degenerate rectangle {self:?}")));
                }
            }
            Region2::Disk { center, radius } => {
                if !finite(&[center[0], center[1], *radius]) || !(*radius > 0.0) {
                    return Err(Error::Domain(format!("degenerate disk {self:?}")));
                }
            }
            Region2::Annulus { center, r_inner, r_outer } => {
                if !finite(&[center[0], center[1], *r_inner, *r_outer])
                    || !(*r_inner >= 0.0)
                    || !(r_inner < r_outer)
                {
                    return Err(Error::Domain(format!("degenerate annulus {self:?}")));
                }
            }
            Region2::DisjointUnion { parts } => {
                if parts.is_empty() {
                    return Err(Error::Domain("empty union".into()));
                }
                parts.iter().try_for_each(Region2::validate)?;
            }
        }
        Ok(())
    }

    /// Randomized disjointness check for unions: no sample point may lie in
    /// two parts. Nested unions are checked recursively.
    pub fn spot_check_disjoint<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<()> {
        let Region2::DisjointUnion { parts } = self else {
            return Ok(());
        };
        parts.iter().try_for_each(|p| p.spot_check_disjoint(rng, samples))?;
        let bbox = bounding_box(self);
        for _ in 0..samples {
            let q = [
                rng.random_range(bbox.xmin..bbox.xmax),
                rng.random_range(bbox.ymin..bbox.ymax),
            ];
            if parts.iter().filter(|p| contains2(p, q)).count() > 1 {
                return Err(Error::Domain(format!(
                    "union parts overlap at ({}, {})",
                    q[0], q[1]
                )));
            }
        }
        Ok(())
    }

    /// Draws a uniform point of the region by rejection from its bounding box.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        let bbox = bounding_box(self);
        loop {
            let q = [
                rng.random_range(bbox.xmin..bbox.xmax),
                rng.random_range(bbox.ymin..bbox.ymax),
            ];
            if contains2(self, q) {
                return q;
            }
        }
    }

    /// The part of the region lying between cumulative measures `from` and
    /// `to` in a fixed sweep order: rectangles bottom to top, disks and
    /// annuli from the inside out, unions part by part.
    pub fn slice(&self, from: f64, to: f64) -> Result<Region2> {
        let total = measure2(self);
        if !(0.0 <= from && from < to && to <= total * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "slice [{from}, {to}) outside [0, {total}]"
            )));
        }
        let to = to.min(total);
        Ok(match self {
            Region2::Rectangle { xmin, xmax, ymin, ymax } => {
                let w = xmax - xmin;
                let hi = if to >= total { *ymax } else { ymin + to / w };
                Region2::rectangle(*xmin, *xmax, ymin + from / w, hi)
            }
            Region2::Disk { center, radius } => {
                let r_of = |m: f64| if m >= total { *radius } else { (m / PI).sqrt() };
                if from == 0.0 {
                    Region2::disk(*center, r_of(to))
                } else {
                    Region2::annulus(*center, r_of(from), r_of(to))
                }
            }
            Region2::Annulus { center, r_inner, r_outer } => {
                let r0 = r_inner * r_inner;
                let r_of = |m: f64| if m >= total { *r_outer } else { (r0 + m / PI).sqrt() };
                Region2::annulus(*center, r_of(from), r_of(to))
            }
            Region2::DisjointUnion { parts } => {
                let mut pieces = Vec::new();
                let mut start = 0.0;
                for part in parts {
                    let m = measure2(part);
                    let (lo, hi) = (from.max(start), to.min(start + m));
                    if hi > lo && hi - lo > 1e-15 * total {
                        pieces.push(part.slice(lo - start, hi - start)?);
                    }
                    start += m;
                }
                match pieces.len() {
                    0 => return Err(Error::Domain("empty slice".into())),
                    1 => pieces.pop().unwrap(),
                    _ => Region2::DisjointUnion { parts: pieces },
                }
            }
        })
    }
}

pub fn measure2(region: &Region2) -> f64 {
    match region {
        Region2::Rectangle { xmin, xmax, ymin, ymax } => (xmax - xmin) * (ymax - ymin),
        Region2::Disk { radius, .. } => PI * radius * radius,
        Region2::Annulus { r_inner, r_outer, .. } => PI * (r_outer * r_outer - r_inner * r_inner),
        Region2::DisjointUnion { parts } => parts.iter().map(measure2).sum(),
    }
}

pub fn contains2(region: &Region2, p: [f64; 2]) -> bool {
    match region {
        Region2::Rectangle { xmin, xmax, ymin, ymax } => {
            *xmin <= p[0] && p[0] < *xmax && *ymin <= p[1] && p[1] < *ymax
        }
        Region2::Disk { center, radius } => {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            dx * dx + dy * dy <= radius * radius
        }
        Region2::Annulus { center, r_inner, r_outer } => {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            let d2 = dx * dx + dy * dy;
            d2 > r_inner * r_inner && d2 <= r_outer * r_outer
        }
        Region2::DisjointUnion { parts } => parts.iter().any(|r| contains2(r, p)),
    }
}

pub fn bounding_box(region: &Region2) -> Rect {
    match region {
        Region2::Rectangle { xmin, xmax, ymin, ymax } => Rect {
            xmin: *xmin,
            xmax: *xmax,
            ymin: *ymin,
            ymax: *ymax,
        },
        Region2::Disk { center, radius: r }
        | Region2::Annulus { center, r_outer: r, .. } => Rect {
            xmin: center[0] - r,
            xmax: center[0] + r,
            ymin: center[1] - r,
            ymax: center[1] + r,
        },
        Region2::DisjointUnion { parts } => parts
            .iter()
            .map(bounding_box)
            .reduce(|a, b| a.union(&b))
            .expect("unions are non-empty"),
    }
}

fn reduce_level(z: f64) -> f64 {
    let r = z.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// The ε-plate `A × [z, z + ε)` with the level `z` reduced to `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plate {
    pub base: Region2,
    z: f64,
    eps: f64,
}

impl Plate {
    pub fn new(base: Region2, z: f64, eps: f64) -> Result<Self> {
        base.validate()?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("plate thickness must lie in (0, 1), got {eps}")));
        }
        if !z.is_finite() {
            return Err(Error::Domain("plate level must be finite".into()));
        }
        Ok(Plate {
            base,
            z: reduce_level(z),
            eps,
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// One cylinder `piece × [lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub piece: Region2,
    pub lo: f64,
    pub hi: f64,
}

impl Cylinder {
    pub fn new(piece: Region2, lo: f64, hi: f64) -> Result<Self> {
        piece.validate()?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("cylinder interval [{lo}, {hi}) is empty")));
        }
        Ok(Cylinder { piece, lo, hi })
    }

    pub fn height(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn measure(&self) -> f64 {
        measure2(&self.piece) * self.height()
    }
}

/// A finite union of cylinders with pairwise disjoint pieces or intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CylinderStack {
    pub cylinders: Vec<Cylinder>,
}

impl CylinderStack {
    pub fn new(cylinders: Vec<Cylinder>) -> Self {
        CylinderStack { cylinders }
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }
}

impl From<&Plate> for CylinderStack {
    fn from(p: &Plate) -> Self {
        CylinderStack::new(vec![Cylinder {
            piece: p.base.clone(),
            lo: p.z,
            hi: p.z + p.eps,
        }])
    }
}

/// A bounded subset of `H(R)` with exact volume and membership.
pub trait Solid {
    fn measure3(&self) -> f64;
    fn contains3(&self, p: HPoint) -> bool;
    /// `[lo, hi)` covering every height of the set, or `None` if empty.
    fn height_range(&self) -> Option<(f64, f64)>;
    /// Bounding box of the flat projection, or `None` if empty.
    fn flat_box(&self) -> Option<Rect>;
}

impl Solid for Plate {
    fn measure3(&self) -> f64 {
        measure2(&self.base) * self.eps
    }

    fn contains3(&self, p: HPoint) -> bool {
        self.z <= p.t && p.t < self.z + self.eps && contains2(&self.base, p.flat())
    }

    fn height_range(&self) -> Option<(f64, f64)> {
        Some((self.z, self.z + self.eps))
    }

    fn flat_box(&self) -> Option<Rect> {
        Some(bounding_box(&self.base))
    }
}

impl Solid for CylinderStack {
    fn measure3(&self) -> f64 {
        self.cylinders.iter().map(Cylinder::measure).sum()
    }

    fn contains3(&self, p: HPoint) -> bool {
        self.cylinders
            .iter()
            .any(|c| c.lo <= p.t && p.t < c.hi && contains2(&c.piece, p.flat()))
    }

    fn height_range(&self) -> Option<(f64, f64)> {
        self.cylinders
            .iter()
            .map(|c| (c.lo, c.hi))
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    fn flat_box(&self) -> Option<Rect> {
        self.cylinders
            .iter()
            .map(|c| bounding_box(&c.piece))
            .reduce(|a, b| a.union(&b))
    }
}

pub fn measure3<S: Solid + ?Sized>(solid: &S) -> f64 {
    solid.measure3()
}

/// Region file schema: a region object, optionally carrying plate parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    #[serde(flatten)]
    pub region: Region2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl RegionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: RegionSpec = serde_json::from_str(text)?;
        spec.region.validate()?;
        Ok(spec)
    }
}
