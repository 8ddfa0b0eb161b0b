//! C ABI over `heislat`.
//!
//! Objects are opaque handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Fallible functions return a
//! [`HeislatStatus`] and write results through out-pointers; on failure the
//! message is kept per thread and read with [`heislat_last_error_message`].
//! Arrays are passed as pointers to a fixed number of elements, matrices in
//! row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heislat::counting::{nil_theta, theta_euclidean};
use heislat::group::{h_add, is_primitive, HIntPoint, HPoint, Mat2};
use heislat::lattice::{HaarSampler, HeisLattice, Lattice2};
use heislat::orbits::{canonicalize, PrimPair};
use heislat::regions::{measure2, Plate, RegionSpec};
use heislat::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeislatStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Invariant = 3,
    Budget = 4,
    Precondition = 5,
    Config = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Haar sampler with its own random stream.
pub struct HeislatSampler(HaarSampler);

/// Heisenberg lattice: a unimodular base lattice and a fiber offset.
pub struct HeislatLattice(HeisLattice);

/// Planar region parsed from the JSON region schema.
pub struct HeislatRegion(RegionSpec);

/// Canonical representative `((1, 0), (k, det))` of an orbit of primitive pairs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeislatOrbitClass {
    pub det: i64,
    pub m: [i64; 2],
    pub n: [i64; 2],
    /// `1` for `n = m`, `-1` for `n = -m`, `0` when `det != 0`.
    pub sign_tag: i8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HeislatStatus {
    match e {
        Error::Domain(_) => HeislatStatus::Domain,
        Error::Invariant(_) => HeislatStatus::Invariant,
        Error::Budget { .. } => HeislatStatus::Budget,
        Error::Precondition(_) => HeislatStatus::Precondition,
        Error::Config(_) => HeislatStatus::Config,
        Error::Json(_) | Error::Csv(_) => HeislatStatus::Parse,
        Error::Io(_) => HeislatStatus::Io,
    }
}

type Outcome = Result<(), HeislatStatus>;

fn fail(e: Error) -> HeislatStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> HeislatStatus {
    set_error(format!("null pointer: {what}"));
    HeislatStatus::NullPointer
}

fn guard(f: impl FnOnce() -> Outcome) -> HeislatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HeislatStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            HeislatStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, HeislatStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read<const N: usize, T: Copy>(p: *const T, what: &str) -> Result<[T; N], HeislatStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::array::from_fn(|i| *p.add(i)))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Outcome {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_all<T: Copy>(p: *mut T, values: &[T], what: &str) -> Outcome {
    if p.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), p, values.len());
    Ok(())
}

/// Length in bytes of the last error message on this thread, without the
/// terminating NUL.
#[no_mangle]
pub extern "C" fn heislat_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (at most `len - 1` bytes plus a
/// NUL) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn heislat_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// New sampler seeded with `seed`. Never returns null.
#[no_mangle]
pub extern "C" fn heislat_sampler_new(seed: u64) -> *mut HeislatSampler {
    Box::into_raw(Box::new(HeislatSampler(HaarSampler::new(seed))))
}

/// Sampler for trial `index` of an experiment with master seed `seed`.
#[no_mangle]
pub extern "C" fn heislat_sampler_for_trial(seed: u64, index: u64) -> *mut HeislatSampler {
    Box::into_raw(Box::new(HeislatSampler(HaarSampler::for_trial(seed, index))))
}

/// # Safety
/// `sampler` must be null or come from a sampler constructor, and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn heislat_sampler_free(sampler: *mut HeislatSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

unsafe fn next_lattice(
    sampler: *mut HeislatSampler,
    out: *mut *mut HeislatLattice,
    heisenberg: bool,
) -> HeislatStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or_else(|| null("sampler"))?;
        let l = if heisenberg {
            s.0.sample_heisenberg()
        } else {
            HeisLattice::from_fiber(s.0.sample_euclidean(), [0.0, 0.0]).map_err(fail)?
        };
        write(out, Box::into_raw(Box::new(HeislatLattice(l))), "out")
    })
}

/// Draws a Haar-random Heisenberg lattice into `*out`.
///
/// # Safety
/// `sampler` must be a live sampler handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_sampler_next_heisenberg(
    sampler: *mut HeislatSampler,
    out: *mut *mut HeislatLattice,
) -> HeislatStatus {
    next_lattice(sampler, out, true)
}

/// Draws a Haar-random Euclidean lattice into `*out`, as a Heisenberg
/// lattice with zero fiber.
///
/// # Safety
/// `sampler` must be a live sampler handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_sampler_next_euclidean(
    sampler: *mut HeislatSampler,
    out: *mut *mut HeislatLattice,
) -> HeislatStatus {
    next_lattice(sampler, out, false)
}

/// Lattice with base `basis` (4 values, row-major, determinant 1) and fiber
/// coordinate `fiber` (2 values).
///
/// # Safety
/// `basis` and `fiber` must point to 4 and 2 readable doubles, `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_lattice_new(
    basis: *const f64,
    fiber: *const f64,
    out: *mut *mut HeislatLattice,
) -> HeislatStatus {
    guard(|| {
        let [a, b, c, d] = read::<4, _>(basis, "basis")?;
        let fiber = read::<2, _>(fiber, "fiber")?;
        let base = Lattice2::new(Mat2::new(a, b, c, d)).map_err(fail)?;
        let l = HeisLattice::from_fiber(base, fiber).map_err(fail)?;
        write(out, Box::into_raw(Box::new(HeislatLattice(l))), "out")
    })
}

/// # Safety
/// `lattice` must be null or a lattice handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn heislat_lattice_free(lattice: *mut HeislatLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Writes the base basis (4 values, row-major) to `out`.
///
/// # Safety
/// `lattice` must be a live handle and `out` point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heislat_lattice_basis(lattice: *const HeislatLattice, out: *mut f64) -> HeislatStatus {
    guard(|| {
        let g = deref(lattice, "lattice")?.0.base.basis();
        write_all(out, &[g.a, g.b, g.c, g.d], "out")
    })
}

/// Writes the fiber coordinate, reduced to `[0, 1)²`, to `out`.
///
/// # Safety
/// `lattice` must be a live handle and `out` point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn heislat_lattice_fiber(lattice: *const HeislatLattice, out: *mut f64) -> HeislatStatus {
    guard(|| write_all(out, &deref(lattice, "lattice")?.0.fiber(), "out"))
}

/// Parses a region JSON document (NUL-terminated UTF-8).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_region_from_json(json: *const c_char, out: *mut *mut HeislatRegion) -> HeislatStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(format!("region json is not UTF-8: {e}"));
            HeislatStatus::Parse
        })?;
        let spec = RegionSpec::from_json(text).map_err(fail)?;
        write(out, Box::into_raw(Box::new(HeislatRegion(spec))), "out")
    })
}

/// # Safety
/// `region` must be null or a region handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn heislat_region_free(region: *mut HeislatRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}

/// Area of the region.
///
/// # Safety
/// `region` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_region_measure(region: *const HeislatRegion, out: *mut f64) -> HeislatStatus {
    guard(|| write(out, measure2(&deref(region, "region")?.0.region), "out"))
}

/// Number of primitive points of the base lattice inside the region.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_theta_euclidean(
    lattice: *const HeislatLattice,
    region: *const HeislatRegion,
    out: *mut u64,
) -> HeislatStatus {
    guard(|| {
        let l = deref(lattice, "lattice")?;
        let r = deref(region, "region")?;
        write(out, theta_euclidean(&l.0.base, &r.0.region).map_err(fail)?, "out")
    })
}

/// Number of primitive lattice points in the plate `region × [z, z + eps)`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_nil_theta(
    lattice: *const HeislatLattice,
    region: *const HeislatRegion,
    z: f64,
    eps: f64,
    out: *mut u64,
) -> HeislatStatus {
    guard(|| {
        let l = deref(lattice, "lattice")?;
        let r = deref(region, "region")?;
        let plate = Plate::new(r.0.region.clone(), z, eps).map_err(fail)?;
        write(out, nil_theta(&l.0, &plate).map_err(fail)?, "out")
    })
}

/// Group law of the Heisenberg group on `(r, s, t)` triples.
///
/// # Safety
/// `p` and `q` must point to 3 readable doubles, `out` to 3 writable ones.
#[no_mangle]
pub unsafe extern "C" fn heislat_h_add(p: *const f64, q: *const f64, out: *mut f64) -> HeislatStatus {
    guard(|| {
        let [pr, ps, pt] = read::<3, _>(p, "p")?;
        let [qr, qs, qt] = read::<3, _>(q, "q")?;
        let s = h_add(HPoint::new(pr, ps, pt), HPoint::new(qr, qs, qt));
        write_all(out, &[s.r, s.s, s.t], "out")
    })
}

/// Whether the integer point `(m1, m2, k)` is primitive.
#[no_mangle]
pub extern "C" fn heislat_is_primitive(m1: i64, m2: i64, k: i64) -> bool {
    is_primitive(HIntPoint::new(m1, m2, k))
}

/// Closed-form correlation of the primitive vectors `m` and `n`.
///
/// # Safety
/// `m` and `n` must point to 2 readable integers, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_cor_exact(
    m: *const i64,
    n: *const i64,
    eps: f64,
    z: f64,
    out: *mut f64,
) -> HeislatStatus {
    guard(|| {
        let m = read::<2, _>(m, "m")?;
        let n = read::<2, _>(n, "n")?;
        write(out, heislat::correlation::cor_exact(m, n, eps, z).map_err(fail)?, "out")
    })
}

/// Canonical orbit representative of the pair `(m, n)`.
///
/// # Safety
/// `m` and `n` must point to 2 readable integers, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heislat_orbit_canonicalize(
    m: *const i64,
    n: *const i64,
    out: *mut HeislatOrbitClass,
) -> HeislatStatus {
    guard(|| {
        let m = read::<2, _>(m, "m")?;
        let n = read::<2, _>(n, "n")?;
        let c = PrimPair::new(m, n).and_then(|p| canonicalize(&p)).map_err(fail)?;
        let class = HeislatOrbitClass {
            det: c.det,
            m: c.rep.m(),
            n: c.rep.n(),
            sign_tag: c.sign_tag.unwrap_or(0),
        };
        write(out, class, "out")
    })
}
