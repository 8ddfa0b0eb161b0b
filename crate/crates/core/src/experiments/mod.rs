//! Monte Carlo experiments over Haar-random Euclidean and Heisenberg
//! lattices.
//!
//! Each trial `i` draws its lattice from its own stream
//! ([`HaarSampler::for_trial`]), per-trial results are collected in trial
//! order, and every average is a compensated sum in that order, so a report
//! depends only on the configuration and never on the worker count.

mod highdisc;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use highdisc::{
    best_cylinder_search, build_high_disc_set, cylinder_defect, dyadic_proof_bound, high_disc_check,
    selection_defect, tube, BestCylinder, HighDiscConfig,
};
pub use report::{ExperimentReport, LabeledEstimate, Target, Verdict, CSV_COLUMNS};

use crate::counting::{theta_count_stack, theta_euclidean};
use crate::error::{Error, Result};
use crate::lattice::HaarSampler;
use crate::regions::{contains2, measure2, CylinderStack, Plate, Region2, Solid};
use crate::stats::{Estimate, ZETA2};

/// Smallest accepted trial count.
pub const MIN_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: u64,
    pub seed: u64,
    pub region: Region2,
    pub eps: f64,
    pub z: f64,
    pub r_values: Vec<f64>,
    /// Exponent slack for stout cylinders.
    pub delta: f64,
    /// Height `|I|` of the stout cylinder.
    pub height: f64,
    /// Worker cap; `None` uses the available parallelism. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(region: Region2, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            trials,
            seed,
            region,
            eps: 0.25,
            z: 0.0,
            r_values: vec![2.0, 4.0, 8.0],
            delta: 0.25,
            height: 1.0,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !self.z.is_finite() {
            return Err(Error::Config("z must be finite".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.region.validate().map_err(config_error)
    }

    fn plate(&self) -> Result<Plate> {
        Plate::new(self.region.clone(), self.z, self.eps).map_err(config_error)
    }

    fn require_level_zero(&self) -> Result<()> {
        if self.z.rem_euclid(1.0) != 0.0 {
            return Err(Error::Config(format!(
                "this check is defined at level z = 0 (mod 1), got {}",
                self.z
            )));
        }
        Ok(())
    }

    fn require_large_base(&self) -> Result<f64> {
        let m = measure2(&self.region);
        if m <= 1.0 {
            return Err(Error::Config(format!("base measure must exceed 1, got {m}")));
        }
        Ok(m)
    }

    fn report(&self, name: &str) -> ExperimentReport {
        let mut r = ExperimentReport::new(name, self.seed, self.trials);
        r.param("region", &self.region).param("measure2", measure2(&self.region));
        r
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    }
}

/// Runs `f` once per trial with that trial's sampler and returns the results
/// in trial order.
pub fn run_trials<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut HaarSampler) -> Result<T> + Sync + Send,
{
    let work = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| f(&mut HaarSampler::for_trial(cfg.seed, i)))
            .collect::<Result<Vec<T>>>()
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Adds a two-sided verdict `|estimate - target| <= 3 se`.
fn check_target(r: &mut ExperimentReport, label: &str, est: Estimate, target: f64) {
    let tol = 3.0 * est.se;
    r.estimate(label, est).target(label, target).verdict(
        label,
        (est.value - target).abs() <= tol,
        format!("|estimate - target| <= 3 se = {tol}"),
    );
}

/// Adds a one-sided verdict `estimate <= bound + 3 se`.
fn check_upper(r: &mut ExperimentReport, label: &str, est: Estimate, bound: f64) {
    r.estimate(label, est).upper_bound(label, bound).verdict(
        label,
        est.value <= bound + 3.0 * est.se,
        format!("estimate <= bound + 3 se = {}", bound + 3.0 * est.se),
    );
}

fn mean_of(xs: impl Iterator<Item = f64>) -> Estimate {
    Estimate::of_mean(&xs.collect::<Vec<_>>())
}

/// Mean of `Θ_A` over Haar-random Euclidean lattices against `m(A)/ζ(2)`.
pub fn siegel_mean_euclidean(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let counts = run_trials(cfg, |s| Ok(theta_euclidean(&s.sample_euclidean(), &cfg.region)? as f64))?;
    let target = measure2(&cfg.region) / ZETA2;
    let mut r = cfg.report("siegel_mean_euclidean");
    check_target(&mut r, "mean", Estimate::of_mean(&counts), target);
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// Second central moment `E[(Θ_A - m(A)/ζ(2))²]` against `16 m(A)`.
pub fn euclidean_variance_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let a = measure2(&cfg.region);
    let mu = a / ZETA2;
    let counts = run_trials(cfg, |s| Ok(theta_euclidean(&s.sample_euclidean(), &cfg.region)? as f64))?;
    let mut r = cfg.report("euclidean_variance_check");
    r.estimate("mean", Estimate::of_mean(&counts)).target("mean", mu);
    check_upper(
        &mut r,
        "second_central_moment",
        mean_of(counts.iter().map(|x| (x - mu).powi(2))),
        16.0 * a,
    );
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// Mean of `Θ^H` of the plate `A × [z, z + ε)` against `ε m(A)/ζ(2)`.
pub fn siegel_mean_heisenberg(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let stack = CylinderStack::from(&cfg.plate()?);
    let counts = run_trials(cfg, |s| Ok(theta_count_stack(&s.sample_heisenberg(), &stack)? as f64))?;
    let mut r = cfg.report("siegel_mean_heisenberg");
    r.param("eps", cfg.eps).param("z", cfg.z);
    check_target(&mut r, "mean", Estimate::of_mean(&counts), cfg.eps * measure2(&cfg.region) / ZETA2);
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// Per-trial plate and base counts on one Heisenberg lattice, plus the number
/// of primitive base points `m` with `-m` also in the base.
fn plate_trial(s: &mut HaarSampler, plate: &Plate, stack: &CylinderStack) -> Result<(f64, f64, f64)> {
    let lattice = s.sample_heisenberg();
    let h = theta_count_stack(&lattice, stack)?;
    let mut e = 0u64;
    let mut antipodal = 0u64;
    crate::counting::for_each_primitive(
        &lattice.base,
        &plate.base,
        crate::counting::ENUMERATION_BUDGET,
        |_, p| {
            e += 1;
            if contains2(&plate.base, [-p[0], -p[1]]) {
                antipodal += 1;
            }
        },
    )?;
    Ok((h as f64, e as f64, antipodal as f64))
}

/// Compares `E[(Θ^H - εm/ζ(2))²]` with `(ε - ε²) m/ζ(2) + ε² E[(Θ_A - m/ζ(2))²]`
/// on shared base lattices.
///
/// The right-hand side treats every pair `m ≠ n` as uncorrelated. Pairs
/// `n = -m` have correlation 0 rather than `ε²`, so for a base meeting its
/// own reflection the exact value is lower by `ε² E[#{m : ±m ∈ A}]`; that
/// corrected side is reported alongside.
pub fn variance_identity_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    cfg.require_level_zero()?;
    let m = cfg.require_large_base()?;
    let start = Instant::now();
    let plate = cfg.plate()?;
    let stack = CylinderStack::from(&plate);
    let eps = cfg.eps;
    let mu_e = m / ZETA2;
    let mu_h = eps * mu_e;
    let rows = run_trials(cfg, |s| plate_trial(s, &plate, &stack))?;
    let lhs: Vec<f64> = rows.iter().map(|&(h, _, _)| (h - mu_h).powi(2)).collect();
    let rhs: Vec<f64> = rows
        .iter()
        .map(|&(_, e, _)| (eps - eps * eps) * mu_e + eps * eps * (e - mu_e).powi(2))
        .collect();
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect();
    let corrected: Vec<f64> = rhs
        .iter()
        .zip(&rows)
        .map(|(r, &(_, _, a))| r - eps * eps * a)
        .collect();

    let (lhs, rhs, diff) = (Estimate::of_mean(&lhs), Estimate::of_mean(&rhs), Estimate::of_mean(&diff));
    let tol = (3.0 * diff.se).max(0.05 * rhs.value.abs());
    let mut r = cfg.report("variance_identity_check");
    r.param("eps", eps).param("z", cfg.z);
    r.estimate("lhs", lhs)
        .estimate("rhs", rhs)
        .estimate("rhs_antipodal_corrected", Estimate::of_mean(&corrected))
        .estimate("lhs_minus_rhs", diff)
        .target("lhs_minus_rhs", 0.0)
        .verdict(
            "lhs_minus_rhs",
            diff.value.abs() <= tol,
            format!("|lhs - rhs| <= max(3 paired se, 5% of rhs) = {tol}"),
        );
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// `E[(Θ^H - εm/ζ(2))²]` against `ε m/ζ(2) + 20 ε² m`.
pub fn variance_bound_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    cfg.require_level_zero()?;
    let m = cfg.require_large_base()?;
    let start = Instant::now();
    let stack = CylinderStack::from(&cfg.plate()?);
    let mu_h = cfg.eps * m / ZETA2;
    let counts = run_trials(cfg, |s| Ok(theta_count_stack(&s.sample_heisenberg(), &stack)? as f64))?;
    let mut r = cfg.report("variance_bound_check");
    r.param("eps", cfg.eps).param("z", cfg.z);
    check_upper(
        &mut r,
        "second_central_moment",
        mean_of(counts.iter().map(|x| (x - mu_h).powi(2))),
        mu_h + 20.0 * cfg.eps * cfg.eps * m,
    );
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// Tail probabilities `P(|Θ^H - m(P)/ζ(2)| > r √m(P))` of a plate `P`.
///
/// Passes when `tail(r)·r²` for every `r` stays below the constant measured
/// at the smallest `r`, within three combined standard errors, and below the
/// constant `1/ζ(2) + 20ε` that the second-moment bound gives through
/// Chebyshev's inequality, within three standard errors.
pub fn chebyshev_tail(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rs = cfg.r_values.clone();
    if rs.is_empty() || rs.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Config("r_values must be positive and non-empty".into()));
    }
    rs.sort_by(f64::total_cmp);
    let start = Instant::now();
    let plate = cfg.plate()?;
    let stack = CylinderStack::from(&plate);
    let vol = plate.measure3();
    let mu = vol / ZETA2;
    let counts = run_trials(cfg, |s| Ok(theta_count_stack(&s.sample_heisenberg(), &stack)? as f64))?;

    let mut r = cfg.report("chebyshev_tail");
    r.param("eps", cfg.eps).param("z", cfg.z).param("measure3", vol).param("r_values", &rs);
    let tails: Vec<Estimate> = rs
        .iter()
        .map(|&x| {
            let hits = counts.iter().filter(|&&c| (c - mu).abs() > x * vol.sqrt()).count();
            Estimate::of_proportion(hits as u64, cfg.trials)
        })
        .collect();
    let scaled: Vec<Estimate> = rs
        .iter()
        .zip(&tails)
        .map(|(x, t)| Estimate {
            value: t.value * x * x,
            se: t.se * x * x,
        })
        .collect();
    let reference = scaled[0];
    let chebyshev = 1.0 / ZETA2 + 20.0 * cfg.eps;
    r.estimate("empirical_constant", reference);
    r.upper_bound("chebyshev_constant", chebyshev);
    for (i, &x) in rs.iter().enumerate() {
        let label = format!("r={x}");
        r.estimate(&format!("{label}/tail"), tails[i]);
        let s = scaled[i];
        let tol = 3.0 * s.combined_se(&reference);
        r.estimate(&format!("{label}/tail_r2"), s)
            .upper_bound(&format!("{label}/tail_r2"), reference.value)
            .verdict(
                &format!("{label}/tail_r2"),
                s.value <= reference.value + tol,
                format!("tail*r^2 <= empirical constant + 3 combined se = {}", reference.value + tol),
            )
            .verdict(
                &format!("{label}/chebyshev"),
                s.value <= chebyshev + 3.0 * s.se,
                format!("tail*r^2 <= 1/zeta(2) + 20 eps + 3 se = {}", chebyshev + 3.0 * s.se),
            );
    }
    let monotone = tails.windows(2).all(|w| w[1].value <= w[0].value);
    r.verdict("tails_non_increasing", monotone, "tail(r) non-increasing in r (exact)");
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// L² deviation of `Θ^H` on the stout cylinder `A × [z, z + |I|)` against
/// `10 m(C)^{1-δ}`, for `|I| <= m(A)^{1/2-δ}`.
pub fn stout_cylinder_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let a = cfg.require_large_base()?;
    if !(cfg.delta > 0.0 && cfg.delta < 0.5) {
        return Err(Error::Config(format!("delta must lie in (0, 1/2), got {}", cfg.delta)));
    }
    let limit = a.powf(0.5 - cfg.delta);
    if !(cfg.height > 0.0 && cfg.height <= limit * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "cylinder height {} must lie in (0, m(A)^(1/2 - delta)] = (0, {limit}]",
            cfg.height
        )));
    }
    let start = Instant::now();
    let cylinder = crate::regions::Cylinder::new(cfg.region.clone(), cfg.z, cfg.z + cfg.height)
        .map_err(config_error)?;
    let vol = cylinder.measure();
    let stack = CylinderStack::new(vec![cylinder]);
    let mu = vol / ZETA2;
    let counts = run_trials(cfg, |s| Ok(theta_count_stack(&s.sample_heisenberg(), &stack)? as f64))?;
    let sq = mean_of(counts.iter().map(|x| (x - mu).powi(2)));
    let dev = sq.value.sqrt();
    let dev = Estimate {
        value: dev,
        se: if dev > 0.0 { sq.se / (2.0 * dev) } else { 0.0 },
    };
    let mut r = cfg.report("stout_cylinder_check");
    r.param("z", cfg.z).param("height", cfg.height).param("delta", cfg.delta).param("measure3", vol);
    r.estimate("mean", Estimate::of_mean(&counts)).target("mean", mu);
    r.estimate("second_central_moment", sq);
    check_upper(&mut r, "l2_deviation", dev, 10.0 * vol.powf(1.0 - cfg.delta));
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}

/// Paired miss rates of one set: the Heisenberg lattice missing `stack`, and
/// its base lattice missing every piece of the flat projection.
pub(crate) struct MissRates {
    pub heisenberg: Estimate,
    pub euclidean: Estimate,
    pub difference: Estimate,
}

pub(crate) fn miss_rates(cfg: &ExperimentConfig, stack: &CylinderStack) -> Result<MissRates> {
    let rows = run_trials(cfg, |s| {
        let lattice = s.sample_heisenberg();
        let h = theta_count_stack(&lattice, stack)? == 0;
        let mut e = true;
        for c in &stack.cylinders {
            if theta_euclidean(&lattice.base, &c.piece)? > 0 {
                e = false;
                break;
            }
        }
        Ok((h as u8 as f64, e as u8 as f64))
    })?;
    let h: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    Ok(MissRates {
        heisenberg: Estimate::of_mean(&h),
        euclidean: Estimate::of_mean(&e),
        difference: Estimate::of_mean(&d),
    })
}

fn record_miss(r: &mut ExperimentReport, prefix: &str, rates: &MissRates, vol: f64, floor: Option<f64>) {
    let label = |s: &str| format!("{prefix}{s}");
    let slack = 2.0 * rates.heisenberg.combined_se(&rates.euclidean);
    r.estimate(&label("miss_heisenberg"), rates.heisenberg)
        .estimate(&label("miss_euclidean"), rates.euclidean)
        .estimate(&label("miss_difference"), rates.difference)
        .estimate(
            &label("miss_times_measure"),
            Estimate {
                value: rates.heisenberg.value * vol,
                se: rates.heisenberg.se * vol,
            },
        )
        .verdict(
            &label("miss_heisenberg"),
            rates.heisenberg.value >= rates.euclidean.value - slack,
            format!("heisenberg miss >= euclidean miss - 2 combined se = {}", rates.euclidean.value - slack),
        );
    if let Some(f) = floor {
        r.lower_bound(&label("miss_heisenberg"), f).verdict(
            &label("miss_floor"),
            rates.heisenberg.value >= f,
            format!("heisenberg miss >= {f}"),
        );
    }
}

/// Probability that a Heisenberg lattice misses `stack`, next to the
/// probability that its base lattice misses the flat projection.
pub fn miss_probability(cfg: &ExperimentConfig, stack: &CylinderStack) -> Result<ExperimentReport> {
    cfg.validate()?;
    if stack.is_empty() {
        return Err(Error::Config("empty set".into()));
    }
    let start = Instant::now();
    let rates = miss_rates(cfg, stack)?;
    let vol = stack.measure3();
    let mut r = ExperimentReport::new("miss_probability", cfg.seed, cfg.trials);
    r.param("set", stack).param("measure3", vol);
    record_miss(&mut r, "", &rates, vol, None);
    r.elapsed_ms = elapsed_ms(start);
    Ok(r)
}
