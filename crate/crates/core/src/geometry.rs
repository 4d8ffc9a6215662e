//! Unit vectors, the sign convention and sphere sampling.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// A two-valued measurement outcome.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    /// Sign of `x` with `sgn(0) = +1`. The caller guarantees `x` is finite.
    #[inline]
    pub fn of<T: Scalar>(x: T) -> Outcome {
        if x >= T::zero() {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    #[inline]
    pub fn scalar<T: Scalar>(self) -> T {
        match self {
            Outcome::Plus => T::one(),
            Outcome::Minus => -T::one(),
        }
    }

    /// Row/column index in a 2x2 table: `+1 -> 0`, `-1 -> 1`.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    #[inline]
    pub fn flip(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn from_value(v: i64) -> Option<Outcome> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }
}

impl Mul for Outcome {
    type Output = Outcome;

    fn mul(self, rhs: Outcome) -> Outcome {
        if self == rhs {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl Neg for Outcome {
    type Output = Outcome;

    fn neg(self) -> Outcome {
        self.flip()
    }
}

/// `+1` for `x >= 0`, `-1` otherwise.
pub fn sgn<T: Scalar>(x: T) -> Result<Outcome> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("sgn({x})")));
    }
    Ok(Outcome::of(x))
}

/// Free 3-vector.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vector3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vector3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(&self, other: &Vector3<T>) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn normalize(&self) -> Result<UnitVector3<T>> {
        UnitVector3::new(self.x, self.y, self.z)
    }
}

impl<T: Scalar> Add for Vector3<T> {
    type Output = Vector3<T>;

    fn add(self, o: Vector3<T>) -> Vector3<T> {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vector3<T> {
    type Output = Vector3<T>;

    fn sub(self, o: Vector3<T>) -> Vector3<T> {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vector3<T> {
    type Output = Vector3<T>;

    fn mul(self, k: T) -> Vector3<T> {
        Vector3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// A direction on the unit sphere.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[T; 3]", try_from = "[T; 3]")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct UnitVector3<T> {
    v: Vector3<T>,
}

impl<T: Scalar> UnitVector3<T> {
    /// Normalizes `(x, y, z)`. Inputs already on the sphere (to a few ulps) are kept bit-for-bit,
    /// which makes normalization idempotent.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("({x}, {y}, {z})")));
        }
        let n2 = v.norm_squared();
        if n2 == T::zero() {
            return Err(Error::ZeroVector);
        }
        if (n2 - T::one()).abs() <= T::epsilon() * T::lit(8.0) {
            return Ok(Self { v });
        }
        let n = n2.sqrt();
        Ok(Self { v: Vector3::new(x / n, y / n, z / n) })
    }

    pub fn x_axis() -> Self {
        Self { v: Vector3::new(T::one(), T::zero(), T::zero()) }
    }

    pub fn y_axis() -> Self {
        Self { v: Vector3::new(T::zero(), T::one(), T::zero()) }
    }

    pub fn z_axis() -> Self {
        Self { v: Vector3::new(T::zero(), T::zero(), T::one()) }
    }

    /// Direction at `degrees` from the x axis in the x-y plane.
    pub fn planar_degrees(degrees: T) -> Self {
        Self::planar_radians(degrees.to_radians())
    }

    pub fn planar_radians(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s, T::zero()).expect("cos/sin pair is finite and non-zero")
    }

    /// Point with polar cosine `cos_theta` and azimuth `phi`.
    pub fn from_spherical(cos_theta: T, phi: T) -> Self {
        let cos_theta = cos_theta.max(-T::one()).min(T::one());
        let sin_theta = (T::one() - cos_theta * cos_theta).max(T::zero()).sqrt();
        let (sp, cp) = phi.sin_cos();
        Self::new(sin_theta * cp, sin_theta * sp, cos_theta).expect("spherical point is finite")
    }

    #[inline]
    pub fn x(&self) -> T {
        self.v.x
    }

    #[inline]
    pub fn y(&self) -> T {
        self.v.y
    }

    #[inline]
    pub fn z(&self) -> T {
        self.v.z
    }

    #[inline]
    pub fn as_vector(&self) -> Vector3<T> {
        self.v
    }

    #[inline]
    pub fn dot(&self, other: &UnitVector3<T>) -> T {
        self.v.dot(&other.v)
    }

    #[inline]
    pub fn dot_vec(&self, other: &Vector3<T>) -> T {
        self.v.dot(other)
    }

    pub fn norm_squared(&self) -> T {
        self.v.norm_squared()
    }

    /// Multiplies by `+1` or `-1`.
    #[inline]
    pub fn signed(&self, s: Outcome) -> Self {
        match s {
            Outcome::Plus => *self,
            Outcome::Minus => -*self,
        }
    }

    /// Rotation about the z axis by `theta`.
    pub fn rotate_z(&self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.v.x - s * self.v.y, s * self.v.x + c * self.v.y, self.v.z)
            .expect("rotation preserves finiteness")
    }

    pub fn cast<U: Scalar>(&self) -> UnitVector3<U> {
        let c = |t: T| U::lit(t.to_f64().expect("finite"));
        UnitVector3::new(c(self.v.x), c(self.v.y), c(self.v.z)).expect("cast of unit vector")
    }
}

impl<T: Scalar> Neg for UnitVector3<T> {
    type Output = UnitVector3<T>;

    fn neg(self) -> UnitVector3<T> {
        Self { v: Vector3::new(-self.v.x, -self.v.y, -self.v.z) }
    }
}

impl<T: Scalar> From<UnitVector3<T>> for [T; 3] {
    fn from(u: UnitVector3<T>) -> [T; 3] {
        [u.v.x, u.v.y, u.v.z]
    }
}

impl<T: Scalar> TryFrom<[T; 3]> for UnitVector3<T> {
    type Error = Error;

    fn try_from(a: [T; 3]) -> Result<Self> {
        UnitVector3::new(a[0], a[1], a[2])
    }
}

/// Uniform direction on the sphere: `z` uniform in `[-1, 1]`, azimuth uniform.
/// Consumes exactly two draws.
pub fn sample_uniform_sphere<T: Scalar>(stream: &mut RandomStream) -> UnitVector3<T> {
    let z = 2.0 * stream.uniform() - 1.0;
    let phi = std::f64::consts::TAU * stream.uniform();
    UnitVector3::from_spherical(T::lit(z), T::lit(phi))
}

/// Equal-area partition of the sphere into `bands * sectors` cells (bands in `z`, sectors in azimuth).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SphereGrid {
    pub bands: usize,
    pub sectors: usize,
}

impl SphereGrid {
    /// The 12-cell grid used for hidden-variable binning.
    pub const COARSE: SphereGrid = SphereGrid { bands: 3, sectors: 4 };

    pub fn cells(&self) -> usize {
        self.bands * self.sectors
    }

    pub fn cell<T: Scalar>(&self, u: &UnitVector3<T>) -> usize {
        let z = u.z().to_f64().unwrap_or(0.0);
        let band = (((z + 1.0) / 2.0 * self.bands as f64) as usize).min(self.bands - 1);
        let phi = u.y().to_f64().unwrap_or(0.0).atan2(u.x().to_f64().unwrap_or(1.0));
        let phi = phi.rem_euclid(std::f64::consts::TAU);
        let sector = ((phi / std::f64::consts::TAU * self.sectors as f64) as usize).min(self.sectors - 1);
        band * self.sectors + sector
    }

    /// `(z_lo, z_hi, phi_lo, phi_hi)` bounds of a cell.
    pub fn bounds(&self, cell: usize) -> (f64, f64, f64, f64) {
        let band = cell / self.sectors;
        let sector = cell % self.sectors;
        let dz = 2.0 / self.bands as f64;
        let dphi = std::f64::consts::TAU / self.sectors as f64;
        (-1.0 + band as f64 * dz, -1.0 + (band + 1) as f64 * dz, sector as f64 * dphi, (sector + 1) as f64 * dphi)
    }
}
