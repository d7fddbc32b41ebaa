//! The single-qubit pure-state reduction: the coordinate z = a0/a1, the
//! degree-2 rational map F_p(z) = (z^2 + p)/(1 - p* z^2) it induces on the
//! Riemann sphere, its spherical derivative, and the correspondence with the
//! density-matrix pipeline.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix, RotationParams};
use crate::error::{Error, Result};
use crate::sphere::{SpherePoint, CHART_SWITCH};

/// |cos x| at or below this leaves p = tan(x) e^{i phi} without a finite
/// value; the coordinate chart breaks down (x near pi/2 mod pi).
pub const SINGULAR_COS_TOL: f64 = 1e-12;

/// Squared magnitude of a map denominator below which the continuous
/// extension (the point at infinity) is returned; equals (1e-150)^2.
const POLE_GUARD_NORM_SQR: f64 = 1e-300;

/// The complex parameter p of F_p. Finite by construction; p = infinity
/// (x = pi/2) is excluded at the [`param_from_rotation`] boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapParam(Complex64);

impl MapParam {
    pub fn new(p: Complex64) -> Result<Self> {
        if !p.re.is_finite() {
            return Err(Error::NonFiniteParameter {
                name: "p.re",
                value: p.re,
            });
        }
        if !p.im.is_finite() {
            return Err(Error::NonFiniteParameter {
                name: "p.im",
                value: p.im,
            });
        }
        Ok(MapParam(p))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl Serialize for MapParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.0.re, self.0.im).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MapParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        MapParam::new(Complex64::new(re, im)).map_err(serde::de::Error::custom)
    }
}

/// A normalized qubit state a0|0> + a1|1>. Global phase is unconstrained;
/// state equality is tested through the phase-free coordinate z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState {
    a0: Complex64,
    a1: Complex64,
}

impl PureState {
    /// Requires |a0|^2 + |a1|^2 = 1 within 1e-12.
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        for (name, value) in [("a0.re", a0.re), ("a0.im", a0.im), ("a1.re", a1.re), ("a1.im", a1.im)]
        {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
        }
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(PureState { a0, a1 })
    }

    /// Rescales arbitrary non-zero amplitudes to a valid state.
    pub fn normalized(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        let scale = norm.sqrt();
        PureState::new(a0 / scale, a1 / scale)
    }

    pub fn amplitude0(&self) -> Complex64 {
        self.a0
    }

    pub fn amplitude1(&self) -> Complex64 {
        self.a1
    }

    /// The rank-1 projector |psi><psi| as a validated density matrix.
    pub fn density(&self) -> DensityMatrix {
        let a = [self.a0, self.a1];
        let mut entries = [Complex64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                entries[i * 2 + j] = a[i] * a[j].conj();
            }
        }
        // Hermitian and rank-1 by construction; trace = |a0|^2 + |a1|^2 = 1
        // within the constructor tolerance.
        DensityMatrix::new(2, &entries).expect("projector of a normalized state is valid")
    }
}

/// p = tan(x) e^{i phi}.
///
/// # Errors
/// [`Error::SingularRotation`] when |cos x| <= 1e-12 (x near pi/2 mod pi,
/// where p leaves the finite plane).
pub fn param_from_rotation(params: RotationParams) -> Result<MapParam> {
    let cos_abs = params.x.cos().abs();
    if cos_abs <= SINGULAR_COS_TOL {
        return Err(Error::SingularRotation {
            x: params.x,
            cos_abs,
        });
    }
    MapParam::new(Complex64::from_polar(params.x.tan(), params.phi))
}

/// F_p(z) = (z^2 + p)/(1 - p* z^2), total on the sphere.
///
/// z = infinity is evaluated by the substitution w = 1/z and algebraic
/// simplification (F_p(inf) = -1/p*, or inf when p = 0), keeping the
/// distinguished orbit points exact. Denominators within 1e-150 of zero yield the
/// continuous extension (infinity). Finite z beyond [`CHART_SWITCH`] in
/// magnitude, and finite z whose standard-chart intermediates overflow, are
/// evaluated in the w = 1/z chart.
pub fn apply_map(p: MapParam, z: SpherePoint) -> SpherePoint {
    let p = p.value();
    let z = match z {
        SpherePoint::Infinity => {
            if p == Complex64::new(0.0, 0.0) {
                return SpherePoint::Infinity;
            }
            return SpherePoint::from_unchecked(-p.conj().finv());
        }
        SpherePoint::Finite(z) => z,
    };
    if z.re.hypot(z.im) <= CHART_SWITCH {
        let z2 = z * z;
        let num = z2 + p;
        let den = Complex64::new(1.0, 0.0) - p.conj() * z2;
        if num.is_finite() && den.is_finite() {
            return quotient_on_sphere(num, den);
        }
        // |p| |z|^2 overflowed; z != 0 here since z = 0 never overflows.
    }
    let w = z.finv();
    let w2 = w * w;
    let num = Complex64::new(1.0, 0.0) + p * w2;
    let den = w2 - p.conj();
    quotient_on_sphere(num, den)
}

/// num/den as a sphere point: vanishing denominators give the continuous
/// extension (infinity), and a division whose intermediates overflow is
/// retried with the denominator prescaled to unit size.
fn quotient_on_sphere(num: Complex64, den: Complex64) -> SpherePoint {
    let norm_sqr = den.norm_sqr();
    if norm_sqr < POLE_GUARD_NORM_SQR {
        return SpherePoint::Infinity;
    }
    if norm_sqr.is_finite() {
        let q = num / den;
        if q.is_finite() {
            return SpherePoint::Finite(q);
        }
    }
    // The pole guard bounds `scale` away from zero.
    let scale = den.re.abs().max(den.im.abs());
    let num = Complex64::new(num.re / scale, num.im / scale);
    let den = Complex64::new(den.re / scale, den.im / scale);
    SpherePoint::from_unchecked(num / den)
}

/// The chart-free derivative magnitude F#(z) = |F'(z)| (1+|z|^2)/(1+|F(z)|^2),
/// evaluated in the w = 1/z chart when |z| > 1. Always finite, non-negative,
/// and zero exactly at the critical points {0, infinity}.
///
/// Both charts reduce to the cancellation-free form
/// 2 |s| (1+|p|^2) (1+|s|^2) / (|num(s)|^2 + |den(s)|^2), with s the chart
/// coordinate: the target-chart factor (1+|F|^2) merges with |den|^2, and
/// num, den never vanish together for finite p.
pub fn spherical_derivative(p: MapParam, z: SpherePoint) -> f64 {
    let p = p.value();
    let scale = 1.0 + p.norm_sqr();
    let (s, num, den) = match z {
        SpherePoint::Infinity => return 0.0,
        SpherePoint::Finite(z) if z.re.hypot(z.im) <= 1.0 => {
            let z2 = z * z;
            (z, z2 + p, Complex64::new(1.0, 0.0) - p.conj() * z2)
        }
        SpherePoint::Finite(z) => {
            let w = z.finv();
            let w2 = w * w;
            (w, Complex64::new(1.0, 0.0) + p * w2, w2 - p.conj())
        }
    };
    let m = s.re.hypot(s.im);
    if m == 0.0 {
        return 0.0;
    }
    2.0 * m * scale * (1.0 + m * m) / (num.norm_sqr() + den.norm_sqr())
}

/// The critical points of F_p: {0, infinity} for every finite p, from
/// F'(z) = 2z(1+|p|^2)/(1-p*z^2)^2 and its w-chart analogue.
pub fn critical_points(_p: MapParam) -> [SpherePoint; 2] {
    [
        SpherePoint::Finite(Complex64::new(0.0, 0.0)),
        SpherePoint::Infinity,
    ]
}

/// z = a0/a1; infinity when a1 = 0 (the state |0>).
pub fn state_to_coordinate(psi: &PureState) -> SpherePoint {
    if psi.a1 == Complex64::new(0.0, 0.0) {
        return SpherePoint::Infinity;
    }
    SpherePoint::from_unchecked(psi.a0 / psi.a1)
}

/// N (z|0> + |1>) with N = (1+|z|^2)^{-1/2}; infinity maps to |0>.
pub fn coordinate_to_state(z: SpherePoint) -> PureState {
    match z {
        SpherePoint::Infinity => PureState {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        },
        SpherePoint::Finite(z) => {
            let h = 1.0_f64.hypot(z.re.hypot(z.im));
            PureState {
                a0: z / h,
                a1: Complex64::new(1.0 / h, 0.0),
            }
        }
    }
}

/// Reads the coordinate off a pure density matrix: z = rho01/rho11 when the
/// |1> population dominates, rho00/rho10 otherwise (both equal a0/a1 for a
/// projector; the dominant row keeps the quotient well-conditioned).
///
/// # Errors
/// [`Error::DimensionMismatch`] unless dim = 2. Mixed states have no
/// coordinate; callers must ensure purity.
pub fn coordinate_from_pure_density(rho: &DensityMatrix) -> Result<SpherePoint> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let (p0, p1) = (rho.entry(0, 0).re, rho.entry(1, 1).re);
    if p1 >= p0 {
        Ok(SpherePoint::from_unchecked(rho.entry(0, 1) / rho.entry(1, 1)))
    } else if rho.entry(1, 0) == Complex64::new(0.0, 0.0) {
        Ok(SpherePoint::Infinity)
    } else {
        Ok(SpherePoint::from_unchecked(rho.entry(0, 0) / rho.entry(1, 0)))
    }
}
