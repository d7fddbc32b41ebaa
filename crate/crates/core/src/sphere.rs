//! Extended complex arithmetic and the chordal metric on the Riemann sphere.
//!
//! Every iteration, convergence test, and cycle comparison in this crate goes
//! through [`SpherePoint`] and [`chordal_distance`], so both are total
//! functions: no input produces NaN, and overflow always resolves to the
//! explicit point at infinity rather than an IEEE infinity smuggled inside a
//! "finite" value.

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes above this are handled in the inverted chart w = 1/z so that
/// squaring cannot overflow f64 (1e100 squared is 1e200, still representable).
pub(crate) const CHART_SWITCH: f64 = 1e100;

/// A point on the Riemann sphere: a finite complex number or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    /// Wraps a finite complex value.
    ///
    /// # Panics
    /// Panics if either component is NaN or infinite; non-finite values must
    /// be converted to [`SpherePoint::Infinity`] deliberately by the caller.
    pub fn finite(z: Complex64) -> Self {
        assert!(
            z.re.is_finite() && z.im.is_finite(),
            "SpherePoint::finite called with non-finite value {z}"
        );
        SpherePoint::Finite(z)
    }

    /// The point for a raw complex value, sending any non-finite component to
    /// infinity. This is the overflow policy for map evaluation results.
    pub(crate) fn from_unchecked(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// The finite value, if any.
    pub fn as_complex(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// |z|, overflow-free; infinity for the point at infinity.
    pub fn magnitude(self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.re.hypot(z.im),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Total ordering used to pick canonical cycle representatives:
    /// finite points lexicographically by (re, im), infinity last.
    pub(crate) fn canonical_key(self) -> (u8, f64, f64) {
        match self {
            SpherePoint::Finite(z) => (0, z.re, z.im),
            SpherePoint::Infinity => (1, 0.0, 0.0),
        }
    }
}

impl From<f64> for SpherePoint {
    fn from(x: f64) -> Self {
        SpherePoint::finite(Complex64::new(x, 0.0))
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::finite(z)
    }
}

impl std::fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{z}"),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// 1/z without overflow: both components are first scaled by |z|.
pub(crate) fn invert_scaled(z: Complex64) -> Complex64 {
    let m = z.re.hypot(z.im);
    Complex64::new((z.re / m) / m, (-z.im / m) / m)
}

/// The chordal distance d(a,b) = 2|a-b| / sqrt((1+|a|^2)(1+|b|^2)), extended
/// by d(a, inf) = 2/sqrt(1+|a|^2). Ranges over [0, 2]; 2 exactly for
/// antipodal pairs.
///
/// When the product of squared sphere factors overflows, the implementation
/// falls back to dividing by the two factors sequentially (larger first),
/// and when both magnitudes are huge it switches to the inverted chart; the
/// chordal metric is invariant under simultaneous inversion, and this keeps
/// every intermediate quantity representable for any pair of finite doubles.
pub fn chordal_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    use SpherePoint::*;
    match (a, b) {
        (Infinity, Infinity) => 0.0,
        (Finite(z), Infinity) | (Infinity, Finite(z)) => 2.0 / 1.0f64.hypot(z.re.hypot(z.im)),
        (Finite(z), Finite(w)) => {
            let (az, aw) = (z.re.hypot(z.im), w.re.hypot(w.im));
            if az > CHART_SWITCH && aw > CHART_SWITCH {
                return chordal_finite(invert_scaled(z), invert_scaled(w));
            }
            chordal_finite(z, w)
        }
    }
}

fn chordal_finite(z: Complex64, w: Complex64) -> f64 {
    let diff = (z.re - w.re).hypot(z.im - w.im);
    // Preferred route: one square root of the product of squared factors.
    // Exact at landmark pairs like (1, -1) -> 2, and symmetric because
    // every operation commutes in its arguments.
    let prod = (1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr());
    if prod.is_finite() {
        return 2.0 * diff / prod.sqrt();
    }
    // Squared factors overflowed (one magnitude beyond ~1e77; both beyond
    // 1e100 never reaches here). Divide by the hypot factors one at a time,
    // larger first; still exactly symmetric.
    let hz = 1.0f64.hypot(z.re.hypot(z.im));
    let hw = 1.0f64.hypot(w.re.hypot(w.im));
    if hz.is_infinite() || hw.is_infinite() {
        // Component magnitudes near f64::MAX: indistinguishable from infinity.
        return 2.0 / hz.min(hw);
    }
    let (hi, lo) = if hz >= hw { (hz, hw) } else { (hw, hz) };
    2.0 * (diff / hi) / lo
}

/// Whether a and b are within chordal distance `eps`.
pub fn is_close(a: SpherePoint, b: SpherePoint, eps: f64) -> Result<bool> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidTolerance {
            name: "eps",
            value: eps,
        });
    }
    Ok(chordal_distance(a, b) < eps)
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
            SpherePoint::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PointVisitor;

        impl<'de> Visitor<'de> for PointVisitor {
            type Value = SpherePoint;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [re, im] pair or the string \"inf\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<SpherePoint, E> {
                if v == "inf" {
                    Ok(SpherePoint::Infinity)
                } else {
                    Err(E::custom(format!("unknown sphere point string {v:?}")))
                }
            }

            fn visit_seq<A: de::SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<SpherePoint, A::Error> {
                let re: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                if !re.is_finite() || !im.is_finite() {
                    return Err(de::Error::custom("finite sphere point with non-finite component"));
                }
                Ok(SpherePoint::Finite(Complex64::new(re, im)))
            }
        }

        deserializer.deserialize_any(PointVisitor)
    }
}
