//! SU(2) as unit quaternions and su(2) as imaginary quaternions.
//!
//! The inner product on su(2) is the Euclidean dot product on the
//! coefficients of (i, j, k). In the 2×2 matrix model the trace form is
//! `tr(ξη) = -2⟨ξ,η⟩` and `tr(q) = 2 Re q`; both conversions live in
//! [`matrix_trace`] and [`TRACE_FORM_SCALE`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `tr(ξη) = TRACE_FORM_SCALE · ⟨ξ,η⟩` for ξ, η in su(2).
pub const TRACE_FORM_SCALE: f64 = -2.0;

/// Tolerance on `| |φ| - 1 |` accepted for isotropy base points.
pub const BASE_POINT_TOL: f64 = 1e-9;

/// Quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Element of su(2) ≅ Im H, stored as coefficients of (i, j, k).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgebraVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quat = Quat::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quat = Quat::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn real(w: f64) -> Self {
        Quat::new(w, 0.0, 0.0, 0.0)
    }

    pub fn from_parts(w: f64, v: AlgebraVec) -> Self {
        Quat::new(w, v.x, v.y, v.z)
    }

    pub fn imag(self) -> AlgebraVec {
        AlgebraVec::new(self.x, self.y, self.z)
    }

    /// Imaginary part as a quaternion (real part dropped).
    pub fn im(self) -> Quat {
        Quat::new(0.0, self.x, self.y, self.z)
    }

    pub fn conj(self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product on R⁴.
    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Divide by the norm. The zero quaternion is returned unchanged.
    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn inverse(self) -> Self {
        self.conj().scale(1.0 / self.norm_sq())
    }

    /// Adjoint action `q ξ q⁻¹` for a unit quaternion `q`.
    pub fn ad(self, v: AlgebraVec) -> AlgebraVec {
        let u = self.imag();
        let t = u.cross(v).scale(2.0);
        v + t.scale(self.w) + u.cross(t)
    }

    /// Adjoint action on a full quaternion; the real part is invariant.
    pub fn ad_quat(self, q: Quat) -> Quat {
        Quat::from_parts(q.w, self.ad(q.imag()))
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }
}

impl AlgebraVec {
    pub const ZERO: AlgebraVec = AlgebraVec::new(0.0, 0.0, 0.0);
    pub const I: AlgebraVec = AlgebraVec::new(1.0, 0.0, 0.0);
    pub const J: AlgebraVec = AlgebraVec::new(0.0, 1.0, 0.0);
    pub const K: AlgebraVec = AlgebraVec::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        AlgebraVec { x, y, z }
    }

    pub fn dot(self, o: AlgebraVec) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: AlgebraVec) -> AlgebraVec {
        AlgebraVec::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        AlgebraVec::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn to_quat(self) -> Quat {
        Quat::from_parts(0.0, self)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        AlgebraVec::new(a[0], a[1], a[2])
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, o: Quat) -> Quat {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, o: Quat) -> Quat {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl AddAssign for Quat {
    fn add_assign(&mut self, o: Quat) {
        *self = *self + o;
    }
}

impl SubAssign for Quat {
    fn sub_assign(&mut self, o: Quat) {
        *self = *self - o;
    }
}

/// Hamilton product.
impl Mul for Quat {
    type Output = Quat;
    fn mul(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Add for AlgebraVec {
    type Output = AlgebraVec;
    fn add(self, o: AlgebraVec) -> AlgebraVec {
        AlgebraVec::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for AlgebraVec {
    type Output = AlgebraVec;
    fn sub(self, o: AlgebraVec) -> AlgebraVec {
        AlgebraVec::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for AlgebraVec {
    type Output = AlgebraVec;
    fn neg(self) -> AlgebraVec {
        AlgebraVec::new(-self.x, -self.y, -self.z)
    }
}

impl AddAssign for AlgebraVec {
    fn add_assign(&mut self, o: AlgebraVec) {
        *self = *self + o;
    }
}

pub fn quat_mul(a: Quat, b: Quat) -> Quat {
    a * b
}

/// Quaternion commutator `ab - ba`.
pub fn commutator(a: Quat, b: Quat) -> Quat {
    a * b - b * a
}

/// Lie bracket on su(2): `ξη - ηξ = 2 ξ × η`.
pub fn bracket(xi: AlgebraVec, eta: AlgebraVec) -> AlgebraVec {
    commutator(xi.to_quat(), eta.to_quat()).imag()
}

/// Trace of the 2×2 complex matrix representing `q`.
pub fn matrix_trace(q: Quat) -> f64 {
    2.0 * q.w
}

pub fn exp_su2(xi: AlgebraVec) -> Quat {
    let theta = xi.norm();
    // sin(θ)/θ, with a short series near zero
    let sinc = if theta < 1e-4 {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    };
    Quat::from_parts(theta.cos(), xi.scale(sinc))
}

/// Inverse of [`exp_su2`] on the ball |ξ| < π. Fails at q = -1 where
/// every direction is a valid preimage.
pub fn log_su2(q: Quat) -> Result<AlgebraVec> {
    let v = q.imag();
    let s = v.norm();
    if s <= 1e-12 * q.norm().max(1.0) {
        if q.w < 0.0 {
            return Err(Error::AntipodeSingular);
        }
        return Ok(v.scale(1.0 / q.w));
    }
    let theta = s.atan2(q.w);
    Ok(v.scale(theta / s))
}

/// Split ξ into its components along and orthogonal to the isotropy
/// line through φ: `par = ⟨ξ,φ⟩φ`, `perp = ½ φ[ξ,φ]`.
pub fn proj_isotropy(xi: AlgebraVec, phi: AlgebraVec) -> Result<(AlgebraVec, AlgebraVec)> {
    check_base_point(phi)?;
    Ok((isotropy_par(xi, phi), isotropy_perp(xi, phi)))
}

pub(crate) fn check_base_point(phi: AlgebraVec) -> Result<()> {
    let norm = phi.norm();
    if (norm - 1.0).abs() > BASE_POINT_TOL || !norm.is_finite() {
        return Err(Error::InvalidBasePoint { norm });
    }
    Ok(())
}

#[inline]
pub(crate) fn isotropy_par(xi: AlgebraVec, phi: AlgebraVec) -> AlgebraVec {
    phi.scale(xi.dot(phi))
}

#[inline]
pub(crate) fn isotropy_perp(xi: AlgebraVec, phi: AlgebraVec) -> AlgebraVec {
    let p = phi.to_quat();
    (p * commutator(xi.to_quat(), p)).scale(0.5).imag()
}
