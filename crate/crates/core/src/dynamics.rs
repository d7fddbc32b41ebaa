//! Orbit iteration, attracting-cycle discovery via the critical orbits,
//! convergence classification, and Lyapunov-exponent estimation for F_p.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pure::{apply_map, critical_points, spherical_derivative, MapParam};
use crate::sphere::{chordal_distance, SpherePoint};

/// Default chordal radius for convergence and revisit tests.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 500;
/// Floor for per-point log terms in Lyapunov sums; ln of the smallest
/// positive double is about -744.4, so -745 marks an exact-zero derivative.
pub const LOG_FLOOR: f64 = -745.0;

/// Revisit detection compares z_n against z_{n-k} for k up to this bound;
/// attracting periods of a degree-2 map at sane parameters are tiny, and the
/// window is a documented limit rather than general cycle-finding.
const REVISIT_WINDOW: usize = 64;
/// Re-application accuracy required of a polished cycle.
const CYCLE_CLOSE_TOL: f64 = 1e-9;
/// Two detected cycles closer than this pointwise are the same cycle.
const DEDUPE_TOL: f64 = 1e-6;

/// A starting point with its forward orbit, optionally annotated with the
/// cycle it escaped to.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub points: Vec<SpherePoint>,
    pub escaped_to_cycle: Option<usize>,
    pub steps_to_converge: Option<usize>,
}

/// An attracting cycle: period-many points, each mapping to the next
/// (cyclically) within 1e-9 chordal, with multiplier magnitude < 1.
#[derive(Clone, Debug, Serialize)]
pub struct CycleRecord {
    pub points: Vec<SpherePoint>,
    pub period: usize,
    pub multiplier_magnitude: f64,
}

/// Outcome of iterating a point against a set of attracting cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Came within eps of a point of cycle `cycle` after `steps` map
    /// applications (step 0 = the starting point itself).
    Converged { cycle: usize, steps: usize },
    NotConverged,
}

/// The forward orbit z0, F(z0), ..., F^n(z0) (n+1 points).
pub fn iterate_orbit(p: MapParam, z0: SpherePoint, n: usize) -> OrbitRecord {
    let mut points = Vec::with_capacity(n + 1);
    points.push(z0);
    let mut z = z0;
    for _ in 0..n {
        z = apply_map(p, z);
        points.push(z);
    }
    OrbitRecord {
        points,
        escaped_to_cycle: None,
        steps_to_converge: None,
    }
}

impl OrbitRecord {
    /// Fills the convergence annotations: the first recorded point within
    /// eps of any cycle point, if any.
    pub fn annotate(&mut self, cycles: &[CycleRecord], eps: f64) {
        self.escaped_to_cycle = None;
        self.steps_to_converge = None;
        for (step, &z) in self.points.iter().enumerate() {
            if let Some(ci) = nearest_cycle(z, cycles, eps) {
                self.escaped_to_cycle = Some(ci);
                self.steps_to_converge = Some(step);
                return;
            }
        }
    }
}

fn nearest_cycle(z: SpherePoint, cycles: &[CycleRecord], eps: f64) -> Option<usize> {
    cycles
        .iter()
        .position(|c| c.points.iter().any(|&q| chordal_distance(z, q) < eps))
}

fn lex_cmp(a: &SpherePoint, b: &SpherePoint) -> Ordering {
    let ka = a.canonical_key();
    let kb = b.canonical_key();
    ka.0.cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
}

/// Follows both critical orbits {0, infinity} and returns the attracting
/// cycles they fall into: at most 2 for a degree-2 map, each point mapping
/// to the next within 1e-9 chordal, multiplier magnitude < 1, points rotated
/// to start at the lexicographically smallest (infinity sorts last), cycles
/// sorted by starting point.
///
/// # Errors
/// [`Error::InvalidTolerance`] for non-positive eps;
/// [`Error::NoCycleFound`] when neither critical orbit stabilizes within
/// max_iter (reported, not fatal: callers decide).
pub fn find_attracting_cycles(
    p: MapParam,
    max_iter: usize,
    eps: f64,
) -> Result<Vec<CycleRecord>> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidTolerance {
            name: "eps",
            value: eps,
        });
    }
    let mut cycles: Vec<CycleRecord> = Vec::new();
    for z0 in critical_points(p) {
        let Some((q, k_det)) = detect_revisit(p, z0, max_iter, eps) else {
            continue;
        };
        let rec = refine_cycle(p, q, k_det);
        if rec.multiplier_magnitude >= 1.0 {
            continue;
        }
        let duplicate = cycles.iter().any(|c| {
            c.period == rec.period
                && c.points
                    .iter()
                    .zip(&rec.points)
                    .all(|(&a, &b)| chordal_distance(a, b) < DEDUPE_TOL)
        });
        if !duplicate {
            cycles.push(rec);
        }
    }
    if cycles.is_empty() {
        return Err(Error::NoCycleFound { max_iter });
    }
    cycles.sort_by(|a, b| lex_cmp(&a.points[0], &b.points[0]));
    Ok(cycles)
}

/// First revisit of the forward orbit within the trailing window: returns
/// the revisiting point and the lag k with chordal(z_n, z_{n-k}) < eps.
fn detect_revisit(
    p: MapParam,
    z0: SpherePoint,
    max_iter: usize,
    eps: f64,
) -> Option<(SpherePoint, usize)> {
    let mut hist: VecDeque<SpherePoint> = VecDeque::with_capacity(REVISIT_WINDOW + 1);
    hist.push_back(z0);
    let mut z = z0;
    for _ in 0..max_iter {
        z = apply_map(p, z);
        for k in 1..=hist.len() {
            if chordal_distance(z, hist[hist.len() - k]) < eps {
                return Some((z, k));
            }
        }
        hist.push_back(z);
        if hist.len() > REVISIT_WINDOW {
            hist.pop_front();
        }
    }
    None
}

/// Settles a revisit candidate onto the cycle, reduces to the minimal
/// period, and packages points + multiplier.
fn refine_cycle(p: MapParam, mut q: SpherePoint, k_det: usize) -> CycleRecord {
    // Polish: contract along F^{k_det} until the return distance is at
    // rounding level. Superattracting cycles land exactly within a few
    // blocks; generic ones contract by |multiplier| per block.
    for _ in 0..5000 {
        let mut w = q;
        for _ in 0..k_det {
            w = apply_map(p, w);
        }
        let d = chordal_distance(w, q);
        q = w;
        if d < 1e-13 {
            break;
        }
    }
    // Minimal period: the detection window may catch a multiple.
    let mut period = k_det;
    let mut w = q;
    for k in 1..=k_det {
        w = apply_map(p, w);
        if chordal_distance(w, q) < CYCLE_CLOSE_TOL {
            period = k;
            break;
        }
    }
    let mut points = Vec::with_capacity(period);
    let mut z = q;
    for _ in 0..period {
        points.push(z);
        z = apply_map(p, z);
    }
    // The chordal-derivative chart factors telescope around a cycle, so the
    // multiplier magnitude is the plain product of spherical derivatives.
    let multiplier_magnitude: f64 = points
        .iter()
        .map(|&z| spherical_derivative(p, z))
        .product();
    let start = points
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| lex_cmp(a, b))
        .map(|(i, _)| i)
        .unwrap_or(0);
    points.rotate_left(start);
    CycleRecord {
        points,
        period,
        multiplier_magnitude,
    }
}

/// First step at which the orbit of z0 comes within eps of any cycle point
/// (step 0 = z0 itself), checking up to max_iter map applications.
/// Deterministic, and monotone in max_iter: a converged point keeps its
/// step count under any larger budget.
pub fn classify_point(
    p: MapParam,
    z0: SpherePoint,
    cycles: &[CycleRecord],
    eps: f64,
    max_iter: usize,
) -> Classification {
    let mut z = z0;
    for step in 0..=max_iter {
        if let Some(ci) = nearest_cycle(z, cycles, eps) {
            return Classification::Converged { cycle: ci, steps: step };
        }
        if step < max_iter {
            z = apply_map(p, z);
        }
    }
    Classification::NotConverged
}

/// A Lyapunov-sum estimate; `clamped` records that at least one log term
/// hit the [`LOG_FLOOR`] (an exactly or effectively zero derivative, the
/// signature of an orbit inside a superattracting basin).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub clamped: bool,
}

/// (1/n) sum of ln F#(z_k) over the supplied orbit points.
///
/// On the p = 0 unit circle the spherical derivative is 2 everywhere, so
/// this reduces to the classical angle-doubling exponent ln 2; for general
/// p the spherical derivative is what extends that definition to the whole
/// sphere, since it measures expansion in the chordal metric.
///
/// Taking the orbit as input (rather than iterating internally) lets
/// callers feed analytically known invariant orbits, such as the p = 0
/// angle-doubling circle, where forward iteration of a repelling set would
/// be numerically unstable.
///
/// # Panics
/// On an empty orbit.
pub fn lyapunov_estimate(p: MapParam, orbit: &[SpherePoint]) -> LyapunovEstimate {
    assert!(!orbit.is_empty(), "lyapunov_estimate needs at least one orbit point");
    let mut sum = 0.0;
    let mut clamped = false;
    for &z in orbit {
        let sd = spherical_derivative(p, z);
        let term = if sd > 0.0 { sd.ln().max(LOG_FLOOR) } else { LOG_FLOOR };
        if term <= LOG_FLOOR {
            clamped = true;
        }
        sum += term;
    }
    LyapunovEstimate {
        lambda: sum / orbit.len() as f64,
        clamped,
    }
}
