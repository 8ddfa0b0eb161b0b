//! Dyadic cylinder stacks with high discrepancy, their distance from single
//! cylinders, and thin tubes.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{elapsed_ms, miss_rates, record_miss, ExperimentConfig, ExperimentReport};
use crate::error::{Error, Result};
use crate::regions::{measure2, Cylinder, CylinderStack, Region2, Solid};
use crate::stats::Estimate;

const AVOIDANCE_SAMPLES: usize = 1_000;
const AVOIDANCE_SEED: u64 = 0x6869_6768_6469_7363;

fn distance_to_integer_points(p: [f64; 2]) -> f64 {
    (p[0] - p[0].round()).hypot(p[1] - p[1].round())
}

/// Splits `base` into `k` pieces of measures proportional to `2^{-i}` and
/// stacks the piece `A_i` over `[2^{i-1}, 2^i)`.
///
/// Every cylinder has volume `m(base) / (2 (1 - 2^{-k}))`. The base must lie
/// in the disk of radius `radius` and keep a distance of more than `thicken`
/// from every integer point; this is checked on a fixed sample of points.
pub fn build_high_disc_set(radius: f64, thicken: f64, k: u32, base: &Region2) -> Result<CylinderStack> {
    base.validate()?;
    if !(1..=52).contains(&k) {
        return Err(Error::Domain(format!("k must lie in 1..=52, got {k}")));
    }
    if !(radius > 0.0 && thicken > 0.0) {
        return Err(Error::Domain("radius and thickening must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(AVOIDANCE_SEED);
    for _ in 0..AVOIDANCE_SAMPLES {
        let p = base.sample_point(&mut rng);
        if p[0].hypot(p[1]) >= radius {
            return Err(Error::Domain(format!("base point {p:?} lies outside the disk of radius {radius}")));
        }
        if distance_to_integer_points(p) <= thicken {
            return Err(Error::Domain(format!(
                "base point {p:?} lies within {thicken} of an integer point"
            )));
        }
    }
    let m = measure2(base);
    let norm = 1.0 - 0.5f64.powi(k as i32);
    let mut cylinders = Vec::with_capacity(k as usize);
    let mut cut = 0.0;
    for i in 1..=k {
        let to = if i == k { m } else { cut + m * 0.5f64.powi(i as i32) / norm };
        let lo = 2f64.powi(i as i32 - 1);
        cylinders.push(Cylinder::new(base.slice(cut, to)?, lo, 2.0 * lo)?);
        cut = to;
    }
    Ok(CylinderStack::new(cylinders))
}

/// The punctured tube `(B(0, delta) \ {0}) × [-n, n)`.
pub fn tube(delta: f64, n: f64) -> Result<CylinderStack> {
    Ok(CylinderStack::new(vec![Cylinder::new(
        Region2::annulus([0.0, 0.0], 0.0, delta),
        -n,
        n,
    )?]))
}

fn scale_heights(stack: &CylinderStack, factor: f64) -> CylinderStack {
    CylinderStack::new(
        stack
            .cylinders
            .iter()
            .map(|c| Cylinder {
                piece: c.piece.clone(),
                lo: c.lo * factor,
                hi: c.hi * factor,
            })
            .collect(),
    )
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// `m(C △ S)` for the cylinder `C = (∪_{j ∈ pieces} A_j) × [lo, hi)`, where
/// `A_j` is the piece of the `j`-th cylinder of `S`. The pieces of `S` are
/// assumed pairwise disjoint.
pub fn selection_defect(stack: &CylinderStack, pieces: &[usize], lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi})")));
    }
    if pieces.is_empty() {
        return Err(Error::Domain("cylinder base selects no pieces".into()));
    }
    let mut seen = vec![false; stack.len()];
    let mut defect = stack.measure3();
    for &j in pieces {
        if j >= stack.len() || seen[j] {
            return Err(Error::Domain(format!("piece index {j} is out of range or repeated")));
        }
        seen[j] = true;
        let c = &stack.cylinders[j];
        defect += measure2(&c.piece) * ((hi - lo) - 2.0 * overlap((lo, hi), (c.lo, c.hi)));
    }
    Ok(defect.max(0.0))
}

fn piece_indices(stack: &CylinderStack, base: &Region2) -> Result<Vec<usize>> {
    let find = |r: &Region2| stack.cylinders.iter().position(|c| &c.piece == r);
    if let Some(j) = find(base) {
        return Ok(vec![j]);
    }
    match base {
        Region2::DisjointUnion { parts } => parts
            .iter()
            .map(|p| find(p).ok_or_else(|| Error::Domain("cylinder base part is not a piece of the set".into())))
            .collect(),
        _ => Err(Error::Domain("cylinder base is not a union of the set's pieces".into())),
    }
}

/// Exact `m(C △ S)` for a cylinder whose base is one piece of `S` or a
/// disjoint union of its pieces.
pub fn cylinder_defect(stack: &CylinderStack, c: &Cylinder) -> Result<f64> {
    selection_defect(stack, &piece_indices(stack, &c.piece)?, c.lo, c.hi)
}

fn union_of(stack: &CylinderStack, pieces: &[usize]) -> Region2 {
    match pieces {
        [j] => stack.cylinders[*j].piece.clone(),
        _ => Region2::DisjointUnion {
            parts: pieces.iter().map(|&j| stack.cylinders[j].piece.clone()).collect(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCylinder {
    pub cylinder: Cylinder,
    /// Indices of the pieces making up the base.
    pub pieces: Vec<usize>,
    pub defect: f64,
    /// Smallest defect over bases made of consecutive pieces only.
    pub contiguous_defect: f64,
}

/// The cylinder over a union of pieces of `S` closest to `S` in volume of
/// symmetric difference.
///
/// For a fixed interval the defect is additive over pieces, so the best base
/// keeps exactly the pieces whose interval is more than half covered. As a
/// function of the interval ends the minimum is attained at interval
/// endpoints of `S`, and all of those pairs are tried.
pub fn best_cylinder_search(stack: &CylinderStack) -> Result<BestCylinder> {
    if stack.is_empty() {
        return Err(Error::Domain("empty set".into()));
    }
    let mut ends: Vec<f64> = stack.cylinders.iter().flat_map(|c| [c.lo, c.hi]).collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let weights: Vec<f64> = stack.cylinders.iter().map(|c| measure2(&c.piece)).collect();
    let total = stack.measure3();
    let n = stack.len();

    let mut best: Option<(f64, Vec<usize>, f64, f64)> = None;
    let mut contiguous = f64::INFINITY;
    for (a, &lo) in ends.iter().enumerate() {
        for &hi in &ends[a + 1..] {
            let terms: Vec<f64> = stack
                .cylinders
                .iter()
                .zip(&weights)
                .map(|(c, w)| w * ((hi - lo) - 2.0 * overlap((lo, hi), (c.lo, c.hi))))
                .collect();
            let mut pieces: Vec<usize> = (0..n).filter(|&j| terms[j] < 0.0).collect();
            if pieces.is_empty() {
                let j = (0..n).min_by(|&i, &j| terms[i].total_cmp(&terms[j])).expect("non-empty");
                pieces.push(j);
            }
            let defect = (total + pieces.iter().map(|&j| terms[j]).sum::<f64>()).max(0.0);
            if best.as_ref().is_none_or(|b| defect < b.0) {
                best = Some((defect, pieces, lo, hi));
            }
            for s in 0..n {
                let mut acc = total;
                for &t in &terms[s..] {
                    acc += t;
                    contiguous = contiguous.min(acc.max(0.0));
                }
            }
        }
    }
    let (defect, pieces, lo, hi) = best.expect("at least one interval");
    Ok(BestCylinder {
        cylinder: Cylinder {
            piece: union_of(stack, &pieces),
            lo,
            hi,
        },
        pieces,
        defect,
        contiguous_defect: contiguous,
    })
}

/// `min over 1 <= l <= k of max(c (2^l - l - 2), c (k - l))` with
/// `c = scale · m(A)`: the case split lower bound for the defect of a
/// `k`-piece dyadic stack over a base of measure `m(A)`.
pub fn dyadic_proof_bound(k: u32, base_measure: f64, scale: f64) -> f64 {
    let c = scale * base_measure;
    (1..=k.min(60))
        .map(|l| {
            let l = l as f64;
            (c * (2f64.powf(l) - l - 2.0)).max(c * (k as f64 - l))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sets and thresholds for [`high_disc_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDiscConfig {
    pub radius: f64,
    pub thicken: f64,
    /// Base for the miss-rate sets; its flat projection stays fixed while
    /// the heights grow.
    pub miss_base: Region2,
    /// `(k, measure3)` pairs: dyadic stacks over `miss_base`, heights scaled
    /// to reach the given volume.
    pub miss_sets: Vec<(u32, f64)>,
    pub miss_floor: f64,
    pub tube_delta: f64,
    pub tube_measures: Vec<f64>,
    pub tube_floor: f64,
    /// Base for the defect search.
    pub search_base: Region2,
    pub search_ks: Vec<u32>,
    /// Defect must reach `measure3^exponent` for `k >= exponent_min_k`.
    pub exponent: f64,
    pub exponent_min_k: u32,
}

impl Default for HighDiscConfig {
    fn default() -> Self {
        HighDiscConfig {
            radius: 5.0,
            thicken: 0.05,
            miss_base: Region2::rectangle(0.1, 0.9, 0.1, 0.725),
            miss_sets: vec![(4, 10.0), (8, 100.0), (16, 1000.0)],
            miss_floor: 0.5,
            tube_delta: 0.05,
            tube_measures: vec![10.0, 1000.0],
            tube_floor: 0.9,
            search_base: Region2::rectangle(0.06, 0.94, 0.06, 0.06 + 4.0 / 0.88),
            search_ks: vec![4, 8, 16],
            exponent: 0.9,
            exponent_min_k: 16,
        }
    }
}

fn exact(value: f64) -> Estimate {
    Estimate { value, se: 0.0 }
}

/// Miss rates of growing dyadic stacks and tubes, and the defect of the best
/// single cylinder for dyadic stacks of growing depth.
pub fn high_disc_check(cfg: &ExperimentConfig, hd: &HighDiscConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut r = ExperimentReport::new("high_disc_check", cfg.seed, cfg.trials);
    r.param("config", hd);

    for &(k, target) in &hd.miss_sets {
        let raw = build_high_disc_set(hd.radius, hd.thicken, k, &hd.miss_base).map_err(super::config_error)?;
        let stack = scale_heights(&raw, target / raw.measure3());
        let vol = stack.measure3();
        let prefix = format!("k={k},m={target}/");
        r.estimate(&format!("{prefix}measure3"), exact(vol));
        record_miss(&mut r, &prefix, &miss_rates(cfg, &stack)?, vol, Some(hd.miss_floor));
    }
    for &target in &hd.tube_measures {
        let delta = hd.tube_delta;
        let n = target / (2.0 * std::f64::consts::PI * delta * delta);
        let stack = tube(delta, n).map_err(super::config_error)?;
        let prefix = format!("tube,m={target}/");
        r.estimate(&format!("{prefix}half_height"), exact(n));
        record_miss(&mut r, &prefix, &miss_rates(cfg, &stack)?, stack.measure3(), Some(hd.tube_floor));
    }

    let base_measure = measure2(&hd.search_base);
    let mut defects = Vec::new();
    for &k in &hd.search_ks {
        let stack = build_high_disc_set(hd.radius, hd.thicken, k, &hd.search_base).map_err(super::config_error)?;
        let vol = stack.measure3();
        let best = best_cylinder_search(&stack)?;
        let prefix = format!("search,k={k}/");
        let label = format!("{prefix}defect");
        let halved = dyadic_proof_bound(k, base_measure, 0.5);
        r.estimate(&format!("{prefix}measure3"), exact(vol))
            .estimate(&format!("{prefix}measure3_k_times_base"), exact(k as f64 * base_measure))
            .estimate(&label, exact(best.defect))
            .estimate(&format!("{prefix}contiguous_defect"), exact(best.contiguous_defect))
            .estimate(&format!("{prefix}case_split_bound"), exact(dyadic_proof_bound(k, base_measure, 1.0)))
            .lower_bound(&label, halved)
            .verdict(
                &format!("{prefix}case_split"),
                best.defect >= halved,
                format!("defect >= case split bound at half base measure = {halved}"),
            );
        if k >= hd.exponent_min_k {
            let power = vol.powf(hd.exponent);
            r.lower_bound(&format!("{prefix}measure3_power"), power).verdict(
                &label,
                best.defect >= power,
                format!("defect >= measure3^{} = {power}", hd.exponent),
            );
        }
        defects.push(best.defect);
    }
    if defects.len() > 1 {
        r.verdict(
            "search/defect_growth",
            defects.windows(2).all(|w| w[1] > w[0]),
            "defect strictly increasing in k",
        );
    }
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}
