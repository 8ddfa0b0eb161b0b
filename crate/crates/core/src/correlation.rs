//! Correlations `Cor_{m,n}(ε, z)`: the Haar measure of the set of `u ∈ T²`
//! with both `{z + u·m} < ε` and `{z + u·n} < ε`.
//!
//! [`cor_exact`] gives the closed form by orbit class; [`cor_numeric`]
//! integrates the indicator product directly with randomly shifted copies of
//! the R2 low-discrepancy sequence and reports the spread across shifts as a
//! standard error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::orbits::{canonicalize, PrimPair};
use crate::stats::{CompensatedSum, Estimate};

/// Number of independent random shifts used by [`cor_numeric`].
pub const QMC_REPLICATES: usize = 64;

/// Smallest sample count accepted by [`cor_numeric`].
pub const MIN_SAMPLES: usize = 10_000;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Closed-form correlation: `ε²` for `det(m, n) ≠ 0`, `ε` for `n = m` and
/// `0` for `n = -m`.
pub fn cor_exact(m: [i64; 2], n: [i64; 2], eps: f64, _z: f64) -> Result<f64> {
    check_eps(eps)?;
    let class = canonicalize(&PrimPair::new(m, n)?)?;
    Ok(match class.sign_tag {
        None => eps * eps,
        Some(1) => eps,
        Some(_) => 0.0,
    })
}

/// Plastic number, the generator of the R2 sequence.
const PLASTIC: f64 = 1.324_717_957_244_746;

fn r2_step() -> [f64; 2] {
    [1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC)]
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn hit(u: [f64; 2], v: [i64; 2], z: f64, eps: f64) -> bool {
    frac(z + u[0] * v[0] as f64 + u[1] * v[1] as f64) < eps
}

/// Randomized quasi-Monte Carlo estimate of `Cor_{m,n}(ε, z)`.
///
/// `samples` points are split evenly over [`QMC_REPLICATES`] shifted copies
/// of the sequence; the shifts come from `seed`.
pub fn cor_numeric(
    m: [i64; 2],
    n: [i64; 2],
    eps: f64,
    z: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_eps(eps)?;
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::Domain("z must be finite".into()));
    }
    let per = samples / QMC_REPLICATES;
    let alpha = r2_step();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<[f64; 2]> = (0..QMC_REPLICATES).map(|_| [rng.random(), rng.random()]).collect();
    let means: Vec<f64> = shifts
        .iter()
        .map(|s| {
            let hits = (1..=per)
                .filter(|&i| {
                    let u = [frac(s[0] + i as f64 * alpha[0]), frac(s[1] + i as f64 * alpha[1])];
                    hit(u, m, z, eps) && hit(u, n, z, eps)
                })
                .count();
            hits as f64 / per as f64
        })
        .collect();
    let r = QMC_REPLICATES as f64;
    let mean = means.iter().copied().collect::<CompensatedSum>().value() / r;
    let ss = means.iter().map(|x| (x - mean).powi(2)).collect::<CompensatedSum>().value();
    Ok(Estimate {
        value: mean,
        se: (ss / (r - 1.0) / r).sqrt(),
    })
}
