use heislat::counting::{nil_theta, theta_count_stack, theta_euclidean};
use heislat::experiments::{
    miss_probability, run_trials, siegel_mean_heisenberg, variance_identity_check, ExperimentConfig,
};
use heislat::group::{h_add, h_add_int, h_neg, HIntPoint, HPoint, Mat2};
use heislat::lattice::HaarSampler;
use heislat::orbits::IntMat2;
use heislat::regions::{measure3, Cylinder, CylinderStack, Plate, Region2, Solid};
use heislat::stats::{Estimate, ZETA2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int_point() -> impl Strategy<Value = HIntPoint> {
    (-1000i64..=1000, -1000i64..=1000, -1000i64..=1000).prop_map(|(a, b, c)| HIntPoint::new(a, b, c))
}

fn real_point() -> impl Strategy<Value = HPoint> {
    (-10.0..10.0, -10.0..10.0, -10.0..10.0).prop_map(|(r, s, t)| HPoint::new(r, s, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn integer_law_is_associative(p in int_point(), q in int_point(), w in int_point()) {
        prop_assert_eq!(h_add_int(h_add_int(p, q), w), h_add_int(p, h_add_int(q, w)));
    }

    #[test]
    fn real_law_has_inverses(p in real_point(), q in real_point()) {
        prop_assert!(h_add(p, h_neg(p)).max_abs_diff(&HPoint::ZERO) == 0.0);
        // (p + q) - q = p
        let back = h_add(h_add(p, q), h_neg(q));
        prop_assert!(back.max_abs_diff(&p) < 1e-9);
    }

    #[test]
    fn plate_count_is_periodic_in_the_level(seed in any::<u64>(), z in 0.0f64..1.0, shift in -3i32..=3) {
        let l = HaarSampler::new(seed).sample_heisenberg();
        let a = Region2::disk([0.2, -0.1], 2.0);
        let p = Plate::new(a.clone(), z, 0.3).unwrap();
        let q = Plate::new(a, z + shift as f64, 0.3).unwrap();
        prop_assert_eq!(nil_theta(&l, &p).unwrap(), nil_theta(&l, &q).unwrap());
    }

    #[test]
    fn stack_volume_is_additive(h1 in 0.1f64..5.0, h2 in 0.1f64..5.0, gap in 0.0f64..2.0) {
        let a = Cylinder::new(Region2::disk([0.0, 0.0], 1.0), 0.0, h1).unwrap();
        let b = Cylinder::new(Region2::rectangle(2.0, 3.0, 0.0, 2.0), h1 + gap, h1 + gap + h2).unwrap();
        let both = CylinderStack::new(vec![a.clone(), b.clone()]);
        let sum = measure3(&CylinderStack::new(vec![a])) + measure3(&CylinderStack::new(vec![b]));
        prop_assert!((both.measure3() - sum).abs() < 1e-12);
    }
}

fn to_real(g: &IntMat2) -> Mat2 {
    let [[a, b], [c, d]] = [[g.a, g.b], [g.c, g.d]];
    Mat2::new(a as f64, b as f64, c as f64, d as f64)
}

#[test]
fn euclidean_count_is_invariant_under_change_of_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let regions = [
        Region2::disk([0.3, 0.1], 3.0),
        Region2::rectangle(-2.0, 3.0, -1.0, 2.5),
        Region2::annulus([0.0, 0.5], 1.0, 2.5),
    ];
    for i in 0..500 {
        let g = HaarSampler::for_trial(5, i).sample_euclidean();
        let len = rng.random_range(0..=10);
        let gamma = IntMat2::random_word(&mut rng, len);
        let h = g.right_mul(&to_real(&gamma)).unwrap();
        for a in &regions {
            assert_eq!(theta_euclidean(&g, a).unwrap(), theta_euclidean(&h, a).unwrap(), "trial {i}");
        }
    }
}

#[test]
fn euclidean_miss_rate_times_area_stays_bounded() {
    // P(Θ = 0) ≤ Var/mean² ≤ 16a / (a/ζ(2))², so the product is at most 16 ζ(2)²
    let ceiling = 16.0 * ZETA2 * ZETA2;
    let mut products = Vec::new();
    for area in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let disk = Region2::disk([0.3, 0.2], (area / std::f64::consts::PI).sqrt());
        let cfg = ExperimentConfig::new(disk.clone(), 20_000, 77);
        let misses = run_trials(&cfg, |s| Ok((theta_euclidean(&s.sample_euclidean(), &disk)? == 0) as u8 as f64)).unwrap();
        let rate = Estimate::of_mean(&misses);
        let product = rate.value * area;
        assert!(product <= ceiling + 3.0 * rate.se * area, "area {area}: {product}");
        products.push(product);
    }
    assert!(products[0] > 0.0, "{products:?}");
}

#[test]
fn plate_miss_rate_dominates_projection_miss_rate() {
    for (area, eps) in [(2.0, 0.5), (8.0, 0.25), (20.0, 0.1)] {
        let plate = Plate::new(Region2::disk([0.1, 0.4], (area / std::f64::consts::PI).sqrt()), 0.3, eps).unwrap();
        let cfg = ExperimentConfig::new(plate.base.clone(), 20_000, 11);
        let r = miss_probability(&cfg, &CylinderStack::from(&plate)).unwrap();
        assert!(r.passed(), "{}", r.to_json().unwrap());
        assert!(r.get("miss_heisenberg").unwrap().value > r.get("miss_euclidean").unwrap().value);
    }
}

#[test]
fn large_projection_misses_rarely() {
    let stack = CylinderStack::new(vec![Cylinder::new(Region2::disk([0.0, 0.0], 6.0), 0.0, 3.0).unwrap()]);
    let cfg = ExperimentConfig::new(Region2::disk([0.0, 0.0], 6.0), 5_000, 3);
    let r = miss_probability(&cfg, &stack).unwrap();
    assert_eq!(r.get("miss_heisenberg").unwrap().value, 0.0);
    assert_eq!(r.get("miss_euclidean").unwrap().value, 0.0);
}

#[test]
fn stack_count_is_additive_over_disjoint_pieces() {
    let a = Cylinder::new(Region2::disk([0.0, 0.0], 1.5), -0.4, 2.3).unwrap();
    let b = Cylinder::new(Region2::rectangle(2.0, 4.0, -1.0, 1.0), 0.7, 1.1).unwrap();
    for i in 0..300 {
        let l = HaarSampler::for_trial(21, i).sample_heisenberg();
        let both = theta_count_stack(&l, &CylinderStack::new(vec![a.clone(), b.clone()])).unwrap();
        let sep = theta_count_stack(&l, &CylinderStack::new(vec![a.clone()])).unwrap()
            + theta_count_stack(&l, &CylinderStack::new(vec![b.clone()])).unwrap();
        assert_eq!(both, sep);
    }
}

#[test]
fn reports_reproduce_from_seed() {
    let mut cfg = ExperimentConfig::new(Region2::disk_with_area(10.0), 5_000, 99);
    cfg.eps = 0.3;
    let a = siegel_mean_heisenberg(&cfg).unwrap().without_timing();
    let b = siegel_mean_heisenberg(&cfg).unwrap().without_timing();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    cfg.seed = 100;
    let c = siegel_mean_heisenberg(&cfg).unwrap().without_timing();
    assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
}

#[test]
fn mean_target_ignores_integer_level_shifts() {
    let mut cfg = ExperimentConfig::new(Region2::disk_with_area(10.0), 2_000, 4);
    cfg.z = 0.25;
    let a = siegel_mean_heisenberg(&cfg).unwrap();
    cfg.z = 3.25;
    let b = siegel_mean_heisenberg(&cfg).unwrap();
    assert_eq!(a.targets, b.targets);
    assert_eq!(a.estimates, b.estimates);
}

/// For a base symmetric under `m -> -m` the uncorrected identity misses the
/// `-ε² E[#{m : ±m ∈ A}]` term; the corrected side still matches.
#[test]
fn symmetric_base_needs_the_antipodal_term() {
    let mut cfg = ExperimentConfig::new(Region2::disk_with_area(20.0), 50_000, 8);
    cfg.eps = 0.25;
    let r = variance_identity_check(&cfg).unwrap();
    let lhs = r.get("lhs").unwrap();
    let rhs = r.get("rhs").unwrap();
    let corrected = r.get("rhs_antipodal_corrected").unwrap();
    assert!(!r.passed());
    let expected_gap = cfg.eps * cfg.eps * 20.0 / ZETA2;
    assert!(((rhs.value - corrected.value) - expected_gap).abs() < 0.05 * expected_gap);
    let se = (lhs.se * lhs.se + corrected.se * corrected.se).sqrt();
    assert!((lhs.value - corrected.value).abs() <= 4.0 * se, "{lhs:?} {corrected:?}");
}

#[test]
fn config_invariants_are_enforced() {
    let mut cfg = ExperimentConfig::new(Region2::disk_with_area(10.0), 999, 1);
    assert!(siegel_mean_heisenberg(&cfg).is_err());
    cfg.trials = 1_000;
    cfg.eps = 1.0;
    assert!(siegel_mean_heisenberg(&cfg).is_err());
    cfg.eps = 0.5;
    cfg.z = 0.5;
    assert!(variance_identity_check(&cfg).is_err());
    cfg.z = 0.0;
    cfg.region = Region2::disk_with_area(0.5);
    assert!(variance_identity_check(&cfg).is_err());
    cfg.region = Region2::disk_with_area(16.0);
    cfg.height = 2.5;
    assert!(heislat::experiments::stout_cylinder_check(&cfg).is_err());
}
