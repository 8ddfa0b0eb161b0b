//! Orbits of pairs of primitive integer vectors under the diagonal action of
//! `SL(2,Z)`.
//!
//! Every pair `(m, n)` with `det(m, n) = D` is moved to `m = (1, 0)` by an
//! extended-gcd matrix; the second vector then reads `(k, D)` and the
//! stabilizer of `(1, 0)` shifts `k` by multiples of `D`. The canonical
//! representative is `((1, 0), (k, D))` with `k ∈ [0, |D|)`; primitivity of
//! the second vector forces `gcd(k, D) = 1`.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::gcd;

/// An integer 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat2 {
    pub const IDENTITY: IntMat2 = IntMat2::new(1, 0, 0, 1);
    /// `S = [[0, -1], [1, 0]]`.
    pub const S: IntMat2 = IntMat2::new(0, -1, 1, 0);
    pub const S_INV: IntMat2 = IntMat2::new(0, 1, -1, 0);
    /// `T = [[1, 1], [0, 1]]`.
    pub const T: IntMat2 = IntMat2::new(1, 1, 0, 1);
    pub const T_INV: IntMat2 = IntMat2::new(1, -1, 0, 1);

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &IntMat2) -> IntMat2 {
        IntMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, v: [i64; 2]) -> [i64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// A word of `len` letters drawn from `S`, `T` and `T⁻¹`.
    pub fn random_word<R: rand::Rng>(rng: &mut R, len: usize) -> IntMat2 {
        let letters = [IntMat2::S, IntMat2::T, IntMat2::T_INV];
        (0..len).fold(IntMat2::IDENTITY, |acc, _| {
            acc.mul(&letters[rng.random_range(0..letters.len())])
        })
    }
}

/// A pair of primitive integer vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimPair {
    m: [i64; 2],
    n: [i64; 2],
}

impl PrimPair {
    pub fn new(m: [i64; 2], n: [i64; 2]) -> Result<Self> {
        if gcd(m[0], m[1]) != 1 || gcd(n[0], n[1]) != 1 {
            return Err(Error::Domain(format!(
                "pair ({m:?}, {n:?}) is not a pair of primitive vectors"
            )));
        }
        Ok(PrimPair { m, n })
    }

    pub fn m(&self) -> [i64; 2] {
        self.m
    }

    pub fn n(&self) -> [i64; 2] {
        self.n
    }

    /// `(γ·m, γ·n)`; primitivity is preserved by `SL(2,Z)`.
    pub fn act(&self, gamma: &IntMat2) -> PrimPair {
        debug_assert_eq!(gamma.det(), 1);
        PrimPair {
            m: gamma.apply(self.m),
            n: gamma.apply(self.n),
        }
    }
}

/// An `SL(2,Z)` orbit in `M_D`, named by its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitClass {
    pub det: i64,
    pub rep: PrimPair,
    /// `±1` for `D = 0` (whether `n = m` or `n = -m`), `None` otherwise.
    pub sign_tag: Option<i8>,
}

impl OrbitClass {
    /// The residue `k` of the representative `((1, 0), (k, D))`.
    pub fn residue(&self) -> i64 {
        self.rep.n[0]
    }
}

pub fn det_pair(p: &PrimPair) -> i64 {
    p.m[0] * p.n[1] - p.m[1] * p.n[0]
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) ≥ 0`.
fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// An element of `SL(2,Z)` taking the primitive vector `m` to `(1, 0)`.
pub fn reducer(m: [i64; 2]) -> Result<IntMat2> {
    let (g, x, y) = extended_gcd(m[0], m[1]);
    if g != 1 {
        return Err(Error::Domain(format!("{m:?} is not primitive")));
    }
    Ok(IntMat2::new(x, y, -m[1], m[0]))
}

pub fn canonicalize(p: &PrimPair) -> Result<OrbitClass> {
    // re-check: PrimPair fields are private but may come from deserialization
    let p = PrimPair::new(p.m, p.n)?;
    let gamma = reducer(p.m)?;
    let [k, d] = gamma.apply(p.n);
    debug_assert_eq!(gamma.apply(p.m), [1, 0]);
    debug_assert_eq!(d, det_pair(&p));
    let (k, sign_tag) = if d == 0 {
        // n = ±(1, 0) after reduction
        (k, Some(k.signum() as i8))
    } else {
        (k.rem_euclid(d.abs()), None)
    };
    Ok(OrbitClass {
        det: d,
        rep: PrimPair {
            m: [1, 0],
            n: [k, d],
        },
        sign_tag,
    })
}

pub fn same_orbit(p: &PrimPair, q: &PrimPair) -> Result<bool> {
    Ok(canonicalize(p)? == canonicalize(q)?)
}

/// Result of closing orbit representatives under the generators of `SL(2,Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureCheck {
    /// Largest entry allowed along generator paths.
    pub bound: i64,
    /// Half-width of the box whose pairs must all be reached.
    pub box_half: i64,
    /// Every pair in the box was reached from some representative.
    pub covered: bool,
    /// No pair was reached from two different representatives.
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCount {
    pub det: i64,
    pub height: i64,
    /// Number of pairs in `M_D` with entries in `[-height, height]`.
    pub pairs: u64,
    /// Number of distinct canonical forms among them.
    pub orbits: usize,
    /// Residues `k` of the representatives that occur.
    pub residues: Vec<i64>,
    pub closure: ClosureCheck,
}

/// Calls `f` on every pair in `M_D` with entries in `[-height, height]`.
fn for_each_pair_in_box(det: i64, height: i64, mut f: impl FnMut(PrimPair)) {
    for m0 in -height..=height {
        for m1 in -height..=height {
            if gcd(m0, m1) != 1 {
                continue;
            }
            // m0 x + m1 y = 1 gives the solution n = (-D y, D x) of det(m, n) = D
            let (_, x, y) = extended_gcd(m0, m1);
            let base = [-det * y, det * x];
            // n = base + t·m, t range keeping both entries in the box
            let (mut lo, mut hi) = (i64::MIN, i64::MAX);
            for (b, mi) in [(base[0], m0), (base[1], m1)] {
                if mi == 0 {
                    if b.abs() > height {
                        lo = 1;
                        hi = 0;
                    }
                    continue;
                }
                let (a1, a2) = ((-height - b) as f64 / mi as f64, (height - b) as f64 / mi as f64);
                lo = lo.max(a1.min(a2).ceil() as i64);
                hi = hi.min(a1.max(a2).floor() as i64);
            }
            for t in lo..=hi {
                let n = [base[0] + t * m0, base[1] + t * m1];
                if gcd(n[0], n[1]) == 1 {
                    f(PrimPair { m: [m0, m1], n });
                }
            }
        }
    }
}

/// Closes each representative's orbit under `S^±1, T^±1` inside
/// `|entries| ≤ bound` and checks the pieces cover the box and never meet.
pub fn closure_check(det: i64, reps: &[PrimPair], box_half: i64, bound: i64) -> ClosureCheck {
    let gens = [IntMat2::S, IntMat2::S_INV, IntMat2::T, IntMat2::T_INV];
    let fits = |p: &PrimPair| p.m.iter().chain(p.n.iter()).all(|x| x.abs() <= bound);
    let mut owner: std::collections::HashMap<PrimPair, usize> = Default::default();
    let mut separated = true;
    for (i, rep) in reps.iter().enumerate() {
        let mut seen = HashSet::from([*rep]);
        let mut queue = VecDeque::from([*rep]);
        while let Some(p) = queue.pop_front() {
            match owner.insert(p, i) {
                Some(j) if j != i => separated = false,
                _ => {}
            }
            for g in &gens {
                let q = p.act(g);
                if fits(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
    }
    let mut covered = true;
    for_each_pair_in_box(det, box_half, |p| covered &= owner.contains_key(&p));
    ClosureCheck {
        bound,
        box_half,
        covered,
        separated,
    }
}

/// Counts the orbits met by pairs of determinant `det` with entries in
/// `[-height, height]`, and confirms the representatives by orbit closure.
pub fn orbit_count_bruteforce(det: i64, height: i64) -> Result<OrbitCount> {
    if det.abs() > 12 {
        return Err(Error::Domain(format!("|D| must be at most 12, got {det}")));
    }
    if height < 50 {
        return Err(Error::Domain(format!("height must be at least 50, got {height}")));
    }
    if height > 2_000 {
        return Err(Error::Budget {
            budget: 2_000,
            needed: height as u64,
        });
    }
    let mut classes = BTreeSet::new();
    let mut pairs = 0u64;
    for_each_pair_in_box(det, height, |p| {
        pairs += 1;
        classes.insert(canonicalize(&p).expect("enumerated pairs are primitive"));
    });
    let reps: Vec<PrimPair> = classes.iter().map(|c| c.rep).collect();
    let closure = closure_check(det, &reps, 5, 30);
    Ok(OrbitCount {
        det,
        height,
        pairs,
        orbits: classes.len(),
        residues: classes.iter().map(OrbitClass::residue).collect(),
        closure,
    })
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k as i64, n as i64) == 1).count() as u64
}
