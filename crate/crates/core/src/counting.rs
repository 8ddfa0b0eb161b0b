//! Primitive lattice point counts: the theta transform of a planar region for
//! Euclidean lattices, and the nil-theta transform of plates and cylinder
//! stacks for Heisenberg lattices.
//!
//! Flat candidates are found by pulling the region's bounding box back
//! through `(g*)⁻¹ = gᵗ` and scanning the integer points of the resulting
//! parallelogram line by line, along whichever axis has fewer lines.
//! [`nil_theta_direct`] is an independent brute-force count over a box of
//! `Z³` and is only meant as a test oracle.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::group::{gcd, is_primitive, HIntPoint};
use crate::lattice::{lattice_points_3d, HeisLattice, Lattice2};
use crate::regions::{bounding_box, contains2, CylinderStack, Plate, Rect, Region2, Solid};

/// Maximum number of integer candidates any single enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 1_000_000_000;

/// The parallelogram `gᵗ·rect` holding every `m` with `g*·m ∈ rect`.
fn pullback(g: &Lattice2, rect: &Rect) -> [[f64; 2]; 4] {
    let gt = g.basis().transpose();
    rect.corners().map(|c| gt.apply(c))
}

fn padding(poly: &[[f64; 2]; 4]) -> f64 {
    let scale = poly
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    1e-9 * scale
}

/// Range of the `1 - axis` coordinate on the line `coord[axis] = c` inside the
/// convex polygon, if the line meets it.
fn slice_polygon(poly: &[[f64; 2]; 4], axis: usize, c: f64) -> Option<(f64, f64)> {
    let other = 1 - axis;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..4 {
        let (p, q) = (poly[i], poly[(i + 1) % 4]);
        let (a, b) = (p[axis], q[axis]);
        if (a <= c && c <= b) || (b <= c && c <= a) {
            let y = if a == b {
                lo = lo.min(p[other].min(q[other]));
                hi = hi.max(p[other].max(q[other]));
                continue;
            } else {
                p[other] + (c - a) / (b - a) * (q[other] - p[other])
            };
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Integer points of the pulled-back parallelogram, as scan lines.
struct ScanPlan {
    poly: [[f64; 2]; 4],
    axis: usize,
    lines: (i64, i64),
    pad: f64,
}

impl ScanPlan {
    fn new(g: &Lattice2, rect: &Rect, budget: u64) -> Result<Self> {
        let poly = pullback(g, rect);
        let pad = padding(&poly);
        let extent = |axis: usize| {
            let lo = poly.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
            let hi = poly.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
            ((lo - pad).ceil(), (hi + pad).floor())
        };
        let (x, y) = (extent(0), extent(1));
        let count = |e: (f64, f64)| (e.1 - e.0 + 1.0).max(0.0);
        let axis = if count(x) <= count(y) { 0 } else { 1 };
        let lines = if axis == 0 { x } else { y };
        if count(lines) > budget as f64 {
            return Err(Error::Budget {
                budget,
                needed: count(lines).min(u64::MAX as f64) as u64,
            });
        }
        let plan = ScanPlan {
            poly,
            axis,
            lines: (lines.0 as i64, lines.1 as i64),
            pad,
        };
        let needed = plan.candidates();
        if needed > budget {
            return Err(Error::Budget { budget, needed });
        }
        Ok(plan)
    }

    fn line(&self, c: i64) -> Option<(i64, i64)> {
        let (lo, hi) = slice_polygon(&self.poly, self.axis, c as f64)?;
        let (lo, hi) = ((lo - self.pad).ceil(), (hi + self.pad).floor());
        (lo <= hi).then_some((lo as i64, hi as i64))
    }

    fn candidates(&self) -> u64 {
        (self.lines.0..=self.lines.1)
            .filter_map(|c| self.line(c))
            .map(|(lo, hi)| (hi - lo + 1) as u64)
            .sum()
    }

    fn for_each(&self, mut f: impl FnMut([i64; 2])) {
        for c in self.lines.0..=self.lines.1 {
            if let Some((lo, hi)) = self.line(c) {
                for o in lo..=hi {
                    f(if self.axis == 0 { [c, o] } else { [o, c] });
                }
            }
        }
    }
}

/// Visits every primitive `m ∈ Z²` with `g*·m ∈ region`, passing `m` and `g*·m`.
pub fn for_each_primitive(
    g: &Lattice2,
    region: &Region2,
    budget: u64,
    mut f: impl FnMut([i64; 2], [f64; 2]),
) -> Result<()> {
    let plan = ScanPlan::new(g, &bounding_box(region), budget)?;
    plan.for_each(|m| {
        if gcd(m[0], m[1]) == 1 {
            let flat = g.point(m);
            if contains2(region, flat) {
                f(m, flat);
            }
        }
    });
    Ok(())
}

pub fn enumerate_primitive_in_region(g: &Lattice2, region: &Region2) -> Result<Vec<[i64; 2]>> {
    let mut out = Vec::new();
    for_each_primitive(g, region, ENUMERATION_BUDGET, |m, _| out.push(m))?;
    Ok(out)
}

/// `Θ_A(g)`: the number of primitive points of the lattice in `region`.
pub fn theta_euclidean(g: &Lattice2, region: &Region2) -> Result<u64> {
    let mut n = 0;
    for_each_primitive(g, region, ENUMERATION_BUDGET, |_, _| n += 1)?;
    Ok(n)
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Whether the fiber over a flat point with shear `w` (heights `k - w`) meets
/// the level window `[z, z + eps)`.
fn fiber_meets_window(w: f64, z: f64, eps: f64) -> bool {
    frac(-z - w) < eps
}

/// `Θ^H` of an ε-plate: primitive flat points in the base whose fiber meets
/// the level window.
pub fn nil_theta(lattice: &HeisLattice, plate: &Plate) -> Result<u64> {
    let mut n = 0;
    for_each_primitive(&lattice.base, &plate.base, ENUMERATION_BUDGET, |_, flat| {
        if fiber_meets_window(lattice.shear_at(flat), plate.z(), plate.eps()) {
            n += 1;
        }
    })?;
    Ok(n)
}

/// Splits every cylinder of the stack into equal slabs of height below one.
pub fn stack_slabs(stack: &CylinderStack) -> Result<Vec<Plate>> {
    let mut plates = Vec::new();
    for c in &stack.cylinders {
        let n = c.height().floor() as u64 + 1;
        let h = c.height() / n as f64;
        for j in 0..n {
            plates.push(Plate::new(c.piece.clone(), c.lo + j as f64 * h, h)?);
        }
    }
    Ok(plates)
}

/// `Θ^H` of a cylinder stack: the sum of `nil_theta` over the slabs of
/// [`stack_slabs`]. Each flat point's slab contributions are summed in closed
/// form, as the number of heights `k - w` in `[lo, hi)`.
pub fn theta_count_stack(lattice: &HeisLattice, stack: &CylinderStack) -> Result<u64> {
    let mut n = 0u64;
    for c in &stack.cylinders {
        for_each_primitive(&lattice.base, &c.piece, ENUMERATION_BUDGET, |_, flat| {
            let w = lattice.shear_at(flat);
            let k = (c.hi + w).ceil() - (c.lo + w).ceil();
            n += k.max(0.0) as u64;
        })?;
    }
    Ok(n)
}

/// Heights `k` that [`nil_theta_direct`] must scan so that every point of
/// `solid` can be reached.
pub fn required_k_range<S: Solid + ?Sized>(lattice: &HeisLattice, solid: &S) -> Option<RangeInclusive<i64>> {
    let (lo, hi) = solid.height_range()?;
    let v = lattice.offset();
    // |vᵗ·flat| ≤ |v|·|flat|
    let w = v[0].hypot(v[1]) * solid.flat_box()?.max_norm();
    Some((lo - w).floor() as i64 - 1..=(hi + w).ceil() as i64 + 1)
}

/// Brute-force count of primitive `p ∈ Z³` with `lattice_points_3d(lattice, p) ∈ solid`,
/// scanning the flat bounding box of candidates times `k_range`.
pub fn nil_theta_direct<S: Solid + ?Sized>(
    lattice: &HeisLattice,
    solid: &S,
    k_range: RangeInclusive<i64>,
) -> Result<u64> {
    let Some(needed) = required_k_range(lattice, solid) else {
        return Ok(0);
    };
    if k_range.start() > needed.start() || k_range.end() < needed.end() {
        return Err(Error::Precondition(format!(
            "k range {k_range:?} does not cover the heights {needed:?} the set can meet"
        )));
    }
    let poly = pullback(&lattice.base, &solid.flat_box().expect("non-empty"));
    let pad = padding(&poly);
    let lo = |axis: usize| poly.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
    let hi = |axis: usize| poly.iter().map(|p| p[axis]).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = ((lo(0) - pad).floor() as i64, (hi(0) + pad).ceil() as i64);
    let (y0, y1) = ((lo(1) - pad).floor() as i64, (hi(1) + pad).ceil() as i64);
    let cells = (x1 - x0 + 1) as u64 * (y1 - y0 + 1) as u64;
    let total = cells.saturating_mul((k_range.end() - k_range.start() + 1) as u64);
    if total > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            budget: ENUMERATION_BUDGET,
            needed: total,
        });
    }
    let mut n = 0;
    for m1 in x0..=x1 {
        for m2 in y0..=y1 {
            for k in k_range.clone() {
                let p = HIntPoint::new(m1, m2, k);
                if is_primitive(p) && solid.contains3(lattice_points_3d(lattice, p)) {
                    n += 1;
                }
            }
        }
    }
    Ok(n)
}
