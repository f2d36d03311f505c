//! Points of the Riemann sphere and the chordal metric.
//!
//! A [`SpherePoint`] is either a finite complex number or the point at
//! infinity. All neighborhood tests in the crate use the chordal distance
//!
//! ```text
//! chi(a, b) = |a - b| / (sqrt(1 + |a|^2) sqrt(1 + |b|^2)),   chi(a, inf) = 1 / sqrt(1 + |a|^2)
//! ```
//!
//! which is bounded by 1 and makes `U_r(a)` a genuine spherical disk.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

/// Moduli above this are folded into the point at infinity.
pub const INFINITY_MODULUS: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64 { re: 0.0, im: 0.0 });

    /// Normalizes a raw complex value: non-finite or huge values become infinity.
    pub fn from_complex(z: Complex64) -> Self {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() > INFINITY_MODULUS {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(z)
        }
    }

    pub fn real(x: f64) -> Self {
        SpherePoint::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// `1/z` on the sphere.
    pub fn reciprocal(&self) -> SpherePoint {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z == Complex64::new(0.0, 0.0) => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::from_complex(z.inv()),
        }
    }

    /// Chordal distance, in `[0, 1]`.
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        chordal(*self, *other)
    }

    /// The local coordinate used for this point: the identity chart on the
    /// closed unit disk, `1/z` outside it.
    pub fn chart(&self) -> Chart {
        match *self {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => Chart::Plane(z),
            SpherePoint::Finite(z) => Chart::Reciprocal(z.inv()),
            SpherePoint::Infinity => Chart::Reciprocal(Complex64::new(0.0, 0.0)),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::from_complex(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// A point expressed in one of the two standard sphere charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Chart {
    /// `z` itself, `|z| <= 1`.
    Plane(Complex64),
    /// `u = 1/z`, `|u| < 1` (`u = 0` is infinity).
    Reciprocal(Complex64),
}

impl Chart {
    pub fn coordinate(&self) -> Complex64 {
        match *self {
            Chart::Plane(z) | Chart::Reciprocal(z) => z,
        }
    }
}

pub fn chordal(a: SpherePoint, b: SpherePoint) -> f64 {
    match (a, b) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity) | (SpherePoint::Infinity, SpherePoint::Finite(z)) => {
            1.0 / (1.0 + z.norm_sqr()).sqrt()
        }
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            // Large moduli: compare reciprocals to avoid overflow in |z|^2.
            if z.norm() > 1e100 || w.norm() > 1e100 {
                return chordal(SpherePoint::Finite(z).reciprocal(), SpherePoint::Finite(w).reciprocal());
            }
            (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
        }
    }
}

/// Parses `"RE,IM"`, `"RE"` or `"inf"`.
pub fn parse_sphere_point(s: &str) -> Result<SpherePoint, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(SpherePoint::Infinity);
    }
    let mut parts = t.split(',');
    let re = parts
        .next()
        .ok_or_else(|| format!("empty point `{s}`"))?
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad real part in `{s}`: {e}"))?;
    let im = match parts.next() {
        Some(p) => p.trim().parse::<f64>().map_err(|e| format!("bad imaginary part in `{s}`: {e}"))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(format!("too many components in `{s}`"));
    }
    Ok(SpherePoint::Finite(Complex64::new(re, im)))
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Infinity => serializer.serialize_str("inf"),
            SpherePoint::Finite(z) => {
                let mut t = serializer.serialize_tuple(2)?;
                t.serialize_element(&z.re)?;
                t.serialize_element(&z.im)?;
                t.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PointVisitor;

        impl<'de> Visitor<'de> for PointVisitor {
            type Value = SpherePoint;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[re, im] or \"inf\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<SpherePoint, E> {
                parse_sphere_point(v).map_err(E::custom)
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<SpherePoint, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                Ok(SpherePoint::Finite(Complex64::new(re, im)))
            }
        }

        deserializer.deserialize_any(PointVisitor)
    }
}

/// Serde helpers for a bare complex number as `[re, im]`.
pub mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde helpers for `Vec<Complex64>` as `[[re, im], ...]`.
pub mod complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| [z.re, z.im]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}
