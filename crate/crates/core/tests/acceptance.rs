//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use heislat::correlation::{cor_exact, cor_numeric};
use heislat::counting::{nil_theta, nil_theta_direct, required_k_range};
use heislat::experiments::{
    chebyshev_tail, euclidean_variance_check, high_disc_check, siegel_mean_euclidean, siegel_mean_heisenberg,
    stout_cylinder_check, variance_bound_check, variance_identity_check, ExperimentConfig, ExperimentReport,
    HighDiscConfig,
};
use heislat::group::{h_add_int, h_neg_int, HIntPoint};
use heislat::lattice::HaarSampler;
use heislat::orbits::{canonicalize, euler_phi, orbit_count_bruteforce, IntMat2, PrimPair};
use heislat::regions::{Plate, Region2};
use heislat::stats::ZETA2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into().trim_end().to_string(),
        }
    }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail += &format!("; over the {} s limit", limit.as_secs());
        }
    }
    println!(
        "criterion {id:>2} [{}] {name}: {} ({:.1} s)",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64()
    );
    out.pass
}

fn verdicts_line(r: &ExperimentReport) -> String {
    r.verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| format!("{} failed: {}", v.label, v.rule))
        .collect::<Vec<_>>()
        .join("; ")
}

fn est(r: &ExperimentReport, label: &str) -> (f64, f64) {
    let e = r.get(label).unwrap_or_else(|| panic!("{}: no estimate {label}", r.name));
    (e.value, e.se)
}

/// Rectangle of the given area in the upper half plane, so that it never
/// meets its own reflection through the origin.
fn half_plane_rect(area: f64) -> Region2 {
    let w = area.sqrt() * 1.25;
    Region2::rectangle(-w / 2.0, w / 2.0, 0.01, 0.01 + area / w)
}

fn cfg(region: Region2, trials: u64) -> ExperimentConfig {
    ExperimentConfig::new(region, trials, SEED)
}

fn group_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut point = || HIntPoint::new(
        rng.random_range(-1_000_000..=1_000_000),
        rng.random_range(-1_000_000..=1_000_000),
        rng.random_range(-1_000_000..=1_000_000),
    );
    let mut bad = 0;
    for _ in 0..100_000 {
        let (p, q, r) = (point(), point(), point());
        if h_add_int(h_add_int(p, q), r) != h_add_int(p, h_add_int(q, r))
            || h_add_int(p, HIntPoint::ZERO) != p
            || h_add_int(HIntPoint::ZERO, p) != p
            || h_add_int(p, h_neg_int(p)) != HIntPoint::ZERO
            || h_add_int(h_neg_int(p), p) != HIntPoint::ZERO
        {
            bad += 1;
        }
    }
    Outcome::new(bad == 0, format!("{bad} of 100000 triples violate an axiom"))
}

fn random_region<R: Rng>(rng: &mut R) -> Region2 {
    let area: f64 = rng.random_range(0.5..=50.0);
    let c = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    match rng.random_range(0..4) {
        0 => {
            let w = area.sqrt() * rng.random_range(0.3..3.0);
            Region2::rectangle(c[0], c[0] + w, c[1], c[1] + area / w)
        }
        1 => Region2::Disk {
            center: c,
            radius: (area / std::f64::consts::PI).sqrt(),
        },
        2 => {
            let r0 = rng.random_range(0.0..2.0);
            Region2::Annulus {
                center: c,
                r_inner: r0,
                r_outer: (r0 * r0 + area / std::f64::consts::PI).sqrt(),
            }
        }
        _ => {
            let w = (area / 2.0).sqrt();
            Region2::DisjointUnion {
                parts: vec![
                    Region2::rectangle(c[0] - w - 0.1, c[0] - 0.1, c[1], c[1] + w),
                    Region2::rectangle(c[0] + 0.1, c[0] + 0.1 + w, c[1], c[1] + w),
                ],
            }
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = Vec::new();
    for i in 0..1_000u64 {
        let lattice = HaarSampler::for_trial(SEED, i).sample_heisenberg();
        let region = random_region(&mut rng);
        let plate = Plate::new(region, rng.random_range(-5.0..5.0), rng.random_range(0.01..0.99)).unwrap();
        let fast = nil_theta(&lattice, &plate);
        let direct = required_k_range(&lattice, &plate)
            .map(|k| nil_theta_direct(&lattice, &plate, k))
            .unwrap_or(Ok(0));
        match (fast, direct) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => mismatches.push(format!("pair {i}: {a:?} vs {b:?}")),
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!("{} mismatches in 1000 pairs {}", mismatches.len(), mismatches.join(", ")),
    )
}

fn euclidean_mean() -> Outcome {
    let r = siegel_mean_euclidean(&cfg(Region2::annulus_with_area(0.5, 10.0), 100_000)).unwrap();
    let (m, se) = est(&r, "mean");
    Outcome::new(r.passed(), format!("mean {m:.4} target {:.4} se {se:.4}", 10.0 / ZETA2))
}

fn euclidean_variance() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [5.0, 10.0, 20.0, 40.0] {
        let r = euclidean_variance_check(&cfg(Region2::disk_with_area(a), 100_000)).unwrap();
        let (v, se) = est(&r, "second_central_moment");
        pass &= r.passed();
        parts.push(format!("m={a}: {v:.2} (se {se:.2}) <= {}", 16.0 * a));
    }
    Outcome::new(pass, parts.join(", "))
}

fn heisenberg_mean() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, eps) in [(10.0, 0.5), (20.0, 0.25)] {
        let mut c = cfg(Region2::disk_with_area(a), 100_000);
        c.eps = eps;
        let r = siegel_mean_heisenberg(&c).unwrap();
        let (m, se) = est(&r, "mean");
        pass &= r.passed();
        parts.push(format!("({a},{eps}): {m:.4} se {se:.4} target {:.4}", a * eps / ZETA2));
    }
    Outcome::new(pass, parts.join(", "))
}

const VARIANCE_GRID: [(f64, f64); 3] = [(4.0, 0.5), (20.0, 0.25), (50.0, 0.1)];

fn variance_identity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, eps) in VARIANCE_GRID {
        let mut c = cfg(half_plane_rect(a), 100_000);
        c.eps = eps;
        let r = variance_identity_check(&c).unwrap();
        let (l, _) = est(&r, "lhs");
        let (rhs, _) = est(&r, "rhs");
        let (d, se) = est(&r, "lhs_minus_rhs");
        pass &= r.passed();
        parts.push(format!("({a},{eps}): lhs {l:.4} rhs {rhs:.4} diff {d:.4} se {se:.4}"));
    }
    Outcome::new(pass, parts.join(", "))
}

fn variance_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, eps) in VARIANCE_GRID {
        let mut c = cfg(half_plane_rect(a), 100_000);
        c.eps = eps;
        let r = variance_bound_check(&c).unwrap();
        let (v, se) = est(&r, "second_central_moment");
        pass &= r.passed();
        parts.push(format!(
            "({a},{eps}): {v:.4} se {se:.4} <= {:.4}",
            eps * a / ZETA2 + 20.0 * eps * eps * a
        ));
    }
    Outcome::new(pass, parts.join(", "))
}

fn tails() -> Outcome {
    let mut c = cfg(half_plane_rect(10.0), 100_000);
    c.eps = 0.5;
    c.r_values = vec![2.0, 4.0, 8.0];
    let r = chebyshev_tail(&c).unwrap();
    let parts: Vec<String> = [2, 4, 8]
        .iter()
        .map(|x| {
            let (t, se) = est(&r, &format!("r={x}/tail_r2"));
            format!("r={x}: tail*r^2 {t:.4} se {se:.4}")
        })
        .collect();
    let fails = verdicts_line(&r);
    Outcome::new(r.passed(), format!("m(plate)=5, {} {fails}", parts.join(", ")))
}

fn orbit_classification() -> Outcome {
    let mut problems = Vec::new();
    for d in (-6i64..=6).filter(|d| d.abs() >= 1) {
        let c = orbit_count_bruteforce(d, 60).unwrap();
        let expect = if d.abs() == 1 { 1 } else { euler_phi(d.unsigned_abs()) as usize };
        if c.orbits != expect || !c.closure.covered || !c.closure.separated {
            problems.push(format!("D={d}: {} orbits, expected {expect}", c.orbits));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let prim = |rng: &mut ChaCha8Rng| loop {
        let v = [rng.random_range(-30..=30), rng.random_range(-30..=30)];
        if heislat::group::gcd(v[0], v[1]) == 1 {
            return v;
        }
    };
    let mut variant = 0;
    for _ in 0..10_000 {
        let m = prim(&mut rng);
        let n = match rng.random_range(0..4) {
            0 => m,
            1 => [-m[0], -m[1]],
            _ => prim(&mut rng),
        };
        let p = PrimPair::new(m, n).unwrap();
        let len = rng.random_range(0..=12);
        let g = IntMat2::random_word(&mut rng, len);
        if canonicalize(&p).unwrap() != canonicalize(&p.act(&g)).unwrap() {
            variant += 1;
        }
    }
    if variant > 0 {
        problems.push(format!("{variant} of 10000 pairs change class under SL(2,Z)"));
    }
    Outcome::new(
        problems.is_empty(),
        if problems.is_empty() {
            "phi(|D|) orbits for 2 <= |D| <= 6, singletons for D = +-1, 10000 pairs invariant".to_string()
        } else {
            problems.join(", ")
        },
    )
}

fn correlations() -> Outcome {
    let classes: [(&str, [i64; 2], [i64; 2]); 6] = [
        ("0+", [1, 0], [1, 0]),
        ("0-", [1, 0], [-1, 0]),
        ("+1", [1, 0], [0, 1]),
        ("-1", [1, 0], [0, -1]),
        ("2", [1, 0], [1, 2]),
        ("5", [1, 0], [2, 5]),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut seed = SEED;
    for (name, m, n) in classes {
        for eps in [0.1, 0.25, 0.4] {
            seed += 1;
            let exact = cor_exact(m, n, eps, 0.0).unwrap();
            let num = cor_numeric(m, n, eps, 0.0, 1_000_000, seed).unwrap();
            let gap = (exact - num.value).abs();
            if num.se > 0.0 {
                worst = worst.max(gap / num.se);
            }
            if gap > 3.0 * num.se {
                failures.push(format!("{name} eps={eps}: exact {exact} numeric {} se {}", num.value, num.se));
            }
        }
    }
    let logged: Vec<String> = [0.1, 0.25, 0.4]
        .iter()
        .map(|&eps| {
            let e = cor_numeric([1, 0], [-1, 0], eps, eps / 2.0, 1_000_000, SEED).unwrap();
            format!("eps={eps}: {:.5}", e.value)
        })
        .collect();
    Outcome::new(
        failures.is_empty(),
        format!(
            "largest gap {worst:.2} se; {}logged opposite sign at z = eps/2 (closed form 0): {}",
            failures.iter().map(|f| f.clone() + "; ").collect::<String>(),
            logged.join(", ")
        ),
    )
}

fn high_discrepancy() -> Outcome {
    let r = high_disc_check(&cfg(HighDiscConfig::default().miss_base, 10_000), &HighDiscConfig::default()).unwrap();
    let miss: Vec<String> = ["k=4,m=10", "k=8,m=100", "k=16,m=1000", "tube,m=10", "tube,m=1000"]
        .iter()
        .map(|p| {
            format!(
                "{p}: {:.4}/{:.4}",
                est(&r, &format!("{p}/miss_heisenberg")).0,
                est(&r, &format!("{p}/miss_euclidean")).0
            )
        })
        .collect();
    let (d, _) = est(&r, "search,k=16/defect");
    let (v, _) = est(&r, "search,k=16/measure3");
    Outcome::new(
        r.passed(),
        format!(
            "miss heisenberg/euclidean {}; k=16 defect {d:.3} vs m(S)^0.9 {:.3} {}",
            miss.join(", "),
            v.powf(0.9),
            verdicts_line(&r)
        ),
    )
}

fn stout() -> Outcome {
    let mut c = cfg(Region2::disk_with_area(16.0), 10_000);
    c.delta = 0.25;
    c.height = 2.0;
    let r = stout_cylinder_check(&c).unwrap();
    let (d, se) = est(&r, "l2_deviation");
    Outcome::new(
        r.passed(),
        format!("deviation {d:.3} se {se:.3} <= {:.2}", 10.0 * 32f64.powf(0.75)),
    )
}

fn determinism() -> Outcome {
    type Exp = fn(&ExperimentConfig) -> heislat::Result<ExperimentReport>;
    let exps: [(&str, Exp, Region2); 6] = [
        ("siegel_mean_euclidean", siegel_mean_euclidean, Region2::disk_with_area(10.0)),
        ("siegel_mean_heisenberg", siegel_mean_heisenberg, Region2::disk_with_area(10.0)),
        ("variance_identity_check", variance_identity_check, half_plane_rect(20.0)),
        ("chebyshev_tail", chebyshev_tail, half_plane_rect(10.0)),
        ("stout_cylinder_check", stout_cylinder_check, Region2::disk_with_area(16.0)),
        ("high_disc_check", |c| high_disc_check(c, &HighDiscConfig::default()), half_plane_rect(1.0)),
    ];
    let mut differing = Vec::new();
    for (name, f, region) in exps {
        let outputs: Vec<(String, String)> = [1, 2, 8]
            .iter()
            .map(|&t| {
                let mut c = cfg(region.clone(), 10_000);
                c.threads = Some(t);
                let r = f(&c).unwrap().without_timing();
                (r.to_json().unwrap(), r.to_csv().unwrap())
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            "6 experiments byte-identical across 1, 2 and 8 workers".to_string()
        } else {
            format!("reports differ across workers: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        run(1, "group axioms", secs(5), group_axioms),
        run(2, "fast count equals direct enumeration", secs(60), oracle_equivalence),
        run(3, "Euclidean mean value", secs(60), euclidean_mean),
        run(4, "Euclidean variance bound", None, euclidean_variance),
        run(5, "Heisenberg mean value", None, heisenberg_mean),
        run(6, "variance identity", secs(300), variance_identity),
        run(7, "variance bound", None, variance_bound),
        run(8, "Chebyshev tails", None, tails),
        run(9, "orbit classification", secs(60), orbit_classification),
        run(10, "correlation closed form", None, correlations),
        run(11, "high-discrepancy sets", None, high_discrepancy),
        run(12, "stout cylinder", None, stout),
        run(13, "determinism across workers", None, determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
