//! Unimodular planar lattices, Heisenberg lattices, and Haar sampling of the
//! spaces they form.
//!
//! A Heisenberg lattice is stored as `(g, v)`: the base lattice `g` together
//! with the fiber coordinate `v = g·u`, `u ∈ [0,1)²`. Its points are the images
//! of `H(Z)` under `(g, v)`: `(g*·m, k - vᵗ·g*·m)` for `(m, k) ∈ Z³`.
//!
//! The Haar measure on `X = SL(2,R)/SL(2,Z)` is sampled by drawing the shape
//! `τ = x + iy` from the hyperbolic area on the modular fundamental domain and
//! a uniform rotation angle in `[0, π)`. The Heisenberg measure is the product
//! of that with the uniform measure on the torus fiber.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{g_star, HIntPoint, HPoint, Mat2};

/// A unimodular lattice `g*·Z²` in the plane, given by its basis `g`
/// (columns are basis vectors of `g·Z²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice2 {
    basis: Mat2,
    dual: Mat2,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    basis: Mat2,
}

impl TryFrom<LatticeRepr> for Lattice2 {
    type Error = Error;
    fn try_from(r: LatticeRepr) -> Result<Self> {
        Lattice2::new(r.basis)
    }
}

impl From<Lattice2> for LatticeRepr {
    fn from(l: Lattice2) -> Self {
        LatticeRepr { basis: l.basis }
    }
}

impl Lattice2 {
    pub fn new(basis: Mat2) -> Result<Self> {
        if !basis.is_unimodular() {
            return Err(Error::Domain(format!(
                "lattice basis must have det 1, got {:e}",
                basis.det()
            )));
        }
        let dual = g_star(&basis)?;
        Ok(Lattice2 { basis, dual })
    }

    pub fn identity() -> Self {
        Lattice2 {
            basis: Mat2::IDENTITY,
            dual: Mat2::IDENTITY,
        }
    }

    pub fn basis(&self) -> Mat2 {
        self.basis
    }

    /// The inverse transpose `g*` of the basis; flat lattice points are `g*·m`.
    pub fn dual(&self) -> Mat2 {
        self.dual
    }

    /// The flat point indexed by `m ∈ Z²`.
    pub fn point(&self, m: [i64; 2]) -> [f64; 2] {
        self.dual.apply([m[0] as f64, m[1] as f64])
    }

    /// The lattice with basis `g·γ`, for `γ` typically in `SL(2,Z)`.
    pub fn right_mul(&self, gamma: &Mat2) -> Result<Self> {
        Lattice2::new(self.basis.mul(gamma))
    }
}

/// Builds the lattice with shape `τ = x + iy` rotated by `theta`:
/// basis `R(theta)·[[1/√y, x/√y], [0, √y]]`.
pub fn lattice_from_coords(x: f64, y: f64, theta: f64) -> Result<Lattice2> {
    if !(y > 0.0) || !y.is_finite() || !x.is_finite() || !theta.is_finite() {
        return Err(Error::Domain(format!(
            "lattice coordinates need finite x, theta and y > 0, got ({x}, {y}, {theta})"
        )));
    }
    let sy = y.sqrt();
    let shape = Mat2::new(1.0 / sy, x / sy, 0.0, sy);
    Lattice2::new(Mat2::rotation(theta).mul(&shape))
}

/// A Heisenberg lattice, stored with its fiber coordinate reduced to `[0,1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisLattice {
    pub base: Lattice2,
    fiber: [f64; 2],
}

fn reduce_unit(u: f64) -> f64 {
    let r = u.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl HeisLattice {
    /// The lattice `(g, g·u)` with `u` taken modulo `Z²`.
    pub fn from_fiber(base: Lattice2, fiber: [f64; 2]) -> Result<Self> {
        if !(fiber[0].is_finite() && fiber[1].is_finite()) {
            return Err(Error::Domain("fiber coordinates must be finite".into()));
        }
        Ok(HeisLattice {
            base,
            fiber: [reduce_unit(fiber[0]), reduce_unit(fiber[1])],
        })
    }

    /// The lattice `(g, v)` for an arbitrary offset `v`; the offset is reduced
    /// modulo `g·Z²`, which does not change the point set.
    pub fn from_offset(base: Lattice2, offset: [f64; 2]) -> Result<Self> {
        // g⁻¹ = (g*)ᵗ
        let u = base.dual().transpose().apply(offset);
        HeisLattice::from_fiber(base, u)
    }

    pub fn standard() -> Self {
        HeisLattice {
            base: Lattice2::identity(),
            fiber: [0.0, 0.0],
        }
    }

    /// Fiber coordinates `u ∈ [0,1)²` with `offset = g·u`.
    pub fn fiber(&self) -> [f64; 2] {
        self.fiber
    }

    pub fn offset(&self) -> [f64; 2] {
        self.base.basis().apply(self.fiber)
    }

    /// Height shift `vᵗ·g*·m` of the fiber over the flat point `g*·m`.
    pub fn shear_at(&self, flat: [f64; 2]) -> f64 {
        let v = self.offset();
        v[0] * flat[0] + v[1] * flat[1]
    }
}

/// Canonical fiber representative; a no-op on values built through the
/// `HeisLattice` constructors, which already store `u ∈ [0,1)²`.
pub fn reduce_offset(lattice: &HeisLattice) -> HeisLattice {
    HeisLattice {
        base: lattice.base,
        fiber: lattice.fiber.map(reduce_unit),
    }
}

/// The point of `lattice` indexed by `p ∈ H(Z)`.
pub fn lattice_points_3d(lattice: &HeisLattice, p: HIntPoint) -> HPoint {
    let flat = lattice.base.point(p.flat());
    HPoint::new(flat[0], flat[1], p.k as f64 - lattice.shear_at(flat))
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` from a master seed. Streams depend only
/// on `(master, index)`, never on scheduling.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// A seeded source of Haar-random lattices.
#[derive(Debug, Clone)]
pub struct HaarSampler {
    rng: ChaCha8Rng,
    master_seed: u64,
}

impl HaarSampler {
    pub fn new(master_seed: u64) -> Self {
        HaarSampler {
            rng: ChaCha8Rng::seed_from_u64(master_seed),
            master_seed,
        }
    }

    /// The sampler owned by trial `index` of an experiment seeded with `master_seed`.
    pub fn for_trial(master_seed: u64, index: u64) -> Self {
        HaarSampler {
            rng: ChaCha8Rng::seed_from_u64(mix_seed(master_seed, index)),
            master_seed,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One rejection proposal from the strip `|x| ≤ 1/2, y ≥ √3/2` with density
    /// `∝ 1/y²`; `None` when it falls below the unit circle.
    pub fn propose_shape(&mut self) -> Option<(f64, f64)> {
        let x = self.rng.random::<f64>() - 0.5;
        // 1 - U lies in (0, 1]
        let y = SQRT3_2 / (1.0 - self.rng.random::<f64>());
        (x * x + y * y >= 1.0).then_some((x, y))
    }

    /// A point of the modular fundamental domain drawn from hyperbolic area.
    pub fn sample_shape(&mut self) -> (f64, f64) {
        loop {
            if let Some(shape) = self.propose_shape() {
                return shape;
            }
        }
    }

    pub fn sample_euclidean(&mut self) -> Lattice2 {
        let (x, y) = self.sample_shape();
        let theta = self.rng.random::<f64>() * std::f64::consts::PI;
        lattice_from_coords(x, y, theta).expect("y ≥ √3/2 on the fundamental domain")
    }

    pub fn sample_heisenberg(&mut self) -> HeisLattice {
        let base = self.sample_euclidean();
        let u = [self.rng.random::<f64>(), self.rng.random::<f64>()];
        HeisLattice::from_fiber(base, u).expect("uniform fiber coordinates are finite")
    }
}

pub fn sample_euclidean(sampler: &mut HaarSampler) -> Lattice2 {
    sampler.sample_euclidean()
}

pub fn sample_heisenberg(sampler: &mut HaarSampler) -> HeisLattice {
    sampler.sample_heisenberg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::h_add_int;
    use crate::group::h_add;

    #[test]
    fn coords_examples() {
        assert_eq!(lattice_from_coords(0.0, 1.0, 0.0).unwrap().basis(), Mat2::IDENTITY);
        let l = lattice_from_coords(0.0, 4.0, 0.0).unwrap();
        assert!(l.basis().max_abs_diff(&Mat2::new(0.5, 0.0, 0.0, 2.0)) < 1e-15);
        let l = lattice_from_coords(-0.37, 12.5, 2.1).unwrap();
        assert!((l.basis().det() - 1.0).abs() < 1e-12);
        assert!(matches!(lattice_from_coords(0.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(lattice_from_coords(0.0, -1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn acceptance_rate_of_shape_proposals() {
        // hyperbolic area π/3 of the fundamental domain over 2/√3 of the strip
        let expected = std::f64::consts::PI * 3f64.sqrt() / 6.0;
        let mut s = HaarSampler::new(2024);
        let n = 1_000_000;
        let accepted = (0..n).filter(|_| s.propose_shape().is_some()).count();
        let rate = accepted as f64 / n as f64;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((rate - expected).abs() <= 3.0 * se, "rate {rate} vs {expected}");
    }

    #[test]
    fn samples_are_unimodular_and_reduced() {
        let mut s = HaarSampler::new(5);
        for _ in 0..10_000 {
            let l = s.sample_heisenberg();
            assert!((l.base.basis().det() - 1.0).abs() <= 1e-9);
            let u = l.fiber();
            assert!((0.0..1.0).contains(&u[0]) && (0.0..1.0).contains(&u[1]));
            let (x, y) = s.sample_shape();
            assert!(x.abs() <= 0.5 && x * x + y * y >= 1.0);
        }
    }

    #[test]
    fn fiber_coordinates_are_uniform() {
        let mut s = HaarSampler::new(99);
        let mut cells = [0u32; 100];
        let n = 100_000;
        for _ in 0..n {
            let u = s.sample_heisenberg().fiber();
            cells[(u[0] * 10.0) as usize * 10 + (u[1] * 10.0) as usize] += 1;
        }
        let expected = n as f64 / 100.0;
        let chi2: f64 = cells.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99 degrees of freedom; upper 0.001 quantile is 148.23
        assert!(chi2 < 148.23, "chi2 = {chi2}");
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let mut a = HaarSampler::for_trial(42, 17);
        let mut b = HaarSampler::for_trial(42, 17);
        for _ in 0..100 {
            assert_eq!(a.sample_heisenberg(), b.sample_heisenberg());
        }
        let mut c = HaarSampler::for_trial(42, 18);
        assert_ne!(HaarSampler::for_trial(42, 17).sample_heisenberg(), c.sample_heisenberg());
    }

    #[test]
    fn reduce_examples() {
        let l = HeisLattice::from_offset(Lattice2::identity(), [2.25, -0.5]).unwrap();
        assert_eq!(l.offset(), [0.25, 0.5]);
        assert_eq!(reduce_offset(&l), l);
        let mut s = HaarSampler::new(3);
        for _ in 0..10_000 {
            let l = s.sample_heisenberg();
            let shifted = HeisLattice::from_offset(l.base, {
                let v = l.offset();
                let e = l.base.basis().columns();
                [v[0] + 3.0 * e[0][0] - 2.0 * e[1][0], v[1] + 3.0 * e[0][1] - 2.0 * e[1][1]]
            })
            .unwrap();
            let once = reduce_offset(&shifted);
            assert_eq!(reduce_offset(&once), once);
            for i in 0..2 {
                let d = (once.fiber()[i] - l.fiber()[i]).abs();
                assert!(d < 1e-9 || (1.0 - d) < 1e-9);
            }
        }
    }

    #[test]
    fn points_3d_examples() {
        let std = HeisLattice::standard();
        assert_eq!(lattice_points_3d(&std, HIntPoint::new(3, -4, 5)), HPoint::new(3.0, -4.0, 5.0));
        let l = HeisLattice::from_offset(Lattice2::identity(), [0.25, 0.0]).unwrap();
        assert_eq!(lattice_points_3d(&l, HIntPoint::new(1, 0, 0)), HPoint::new(1.0, 0.0, -0.25));
        assert_eq!(lattice_points_3d(&l, HIntPoint::new(2, 0, 1)), HPoint::new(2.0, 0.0, 0.5));
    }

    #[test]
    fn lattice_points_form_a_subgroup_image() {
        let mut s = HaarSampler::new(8);
        for _ in 0..2_000 {
            let l = s.sample_heisenberg();
            let mut pt = || {
                let r = s.rng();
                HIntPoint::new(r.random_range(-20..=20), r.random_range(-20..=20), r.random_range(-20..=20))
            };
            let (p, q) = (pt(), pt());
            let lhs = h_add(lattice_points_3d(&l, p), lattice_points_3d(&l, q));
            let rhs = lattice_points_3d(&l, h_add_int(p, q));
            let scale = 1.0 + lhs.t.abs();
            assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * scale, "{lhs:?} vs {rhs:?}");
        }
    }
}
