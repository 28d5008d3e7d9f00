//! PSL(2,R) arithmetic and the upper half-plane model.
//!
//! An element `u` of PSL(2,R) doubles as a unit tangent vector of the
//! hyperbolic plane: its base point is `u(i)` and its direction is the image
//! of the upward unit vector at `i`. With this convention the geodesic ray of
//! `u` ends at `u(+inf)`, the direction of the first column of `u`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Trace window around 2 inside which an element is reported parabolic.
pub const PARABOLIC_TRACE_TOL: f64 = 1e-9;

/// A 2x2 real unimodular matrix modulo sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Psl2Element {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Psl2Element {
    pub const IDENTITY: Psl2Element = Psl2Element {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds `[[a, b], [c, d]]`, rescaling by `1/sqrt(det)`.
    ///
    /// Matrices with non-positive determinant are not in SL(2,R) up to a
    /// positive scalar and are rejected.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::Singular(format!(
                "2x2 matrix has determinant {det}, expected > 0"
            )));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Unipotent `[[1, s], [0, 1]]`.
    pub fn unipotent(s: f64) -> Self {
        Psl2Element {
            a: 1.0,
            b: s,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Diagonal `diag(e^{t/2}, e^{-t/2})`.
    pub fn diagonal_flow(t: f64) -> Self {
        let h = (0.5 * t).exp();
        Psl2Element {
            a: h,
            b: 0.0,
            c: 0.0,
            d: 1.0 / h,
        }
    }

    /// Rotation by angle `theta` (an element of the stabilizer of `i`).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self::normalized(c, -s, s, c)
    }

    /// A frame with `endpoint_plus = xi`: the rotation taking `infinity` to
    /// `xi`, followed by geodesic time `t` and horocycle time `b`.
    pub fn frame_at(xi: &BoundaryPoint, t: f64, b: f64) -> Self {
        Self::rotation(2.0 * xi.angle())
            .compose(&Self::diagonal_flow(t))
            .compose(&Self::unipotent(b))
    }

    // The determinant is only trusted beyond its own rounding error; for
    // entries of size m, `ad - bc` carries an error of order eps * m^2.
    fn det_drift(a: f64, b: f64, c: f64, d: f64) -> (f64, bool) {
        let (ad, bc) = (a * d, b * c);
        let det = ad - bc;
        let noise = 8.0 * f64::EPSILON * (ad.abs() + bc.abs());
        (det, (det - 1.0).abs() > noise)
    }

    fn normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let (det, drifted) = Self::det_drift(a, b, c, d);
        let k = if det > 0.0 && drifted { det.sqrt().recip() } else { 1.0 };
        Self::sign_canonical(a * k, b * k, c * k, d * k)
    }

    // Corrects rounding drift in products. A large apparent drift means the
    // product lost precision to cancellation, and rescaling would make it worse.
    fn renormalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let (det, drifted) = Self::det_drift(a, b, c, d);
        if drifted && (det - 1.0).abs() < 1e-8 {
            let k = det.sqrt().recip();
            return Self::sign_canonical(a * k, b * k, c * k, d * k);
        }
        Self::sign_canonical(a, b, c, d)
    }

    fn sign_canonical(a: f64, b: f64, c: f64, d: f64) -> Self {
        let (mut a, mut b, mut c, mut d) = (a, b, c, d);
        let first = [a, b, c, d].into_iter().find(|x| *x != 0.0).unwrap_or(0.0);
        if first < 0.0 {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        Psl2Element { a, b, c, d }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Psl2Element) -> Psl2Element {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (e, f, g, h) = (other.a, other.b, other.c, other.d);
        Self::renormalized(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }

    pub fn inverse(&self) -> Psl2Element {
        Self::sign_canonical(self.d, -self.b, -self.c, self.a)
    }

    /// Horocycle flow `u * [[1, s], [0, 1]]`.
    pub fn horocycle_flow(&self, s: f64) -> Psl2Element {
        self.compose(&Self::unipotent(s))
    }

    /// Geodesic flow `u * diag(e^{t/2}, e^{-t/2})`.
    pub fn geodesic_flow(&self, t: f64) -> Psl2Element {
        self.compose(&Self::diagonal_flow(t))
    }

    /// Right action of the affine group: `u * [[a, b], [0, 1/a]]`.
    pub fn affine_act(&self, a: f64, b: f64) -> Result<Psl2Element> {
        if !(a.is_finite() && a > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "affine parameter must satisfy a > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(self.compose(&Psl2Element {
            a,
            b,
            c: 0.0,
            d: a.recip(),
        }))
    }

    /// Linear action on the boundary `P^1`.
    pub fn mobius_boundary(&self, xi: &BoundaryPoint) -> BoundaryPoint {
        let (x, y) = xi.direction();
        BoundaryPoint::from_direction(self.a * x + self.b * y, self.c * x + self.d * y)
            .expect("invertible matrix maps nonzero vectors to nonzero vectors")
    }

    /// Moebius action on the upper half-plane.
    pub fn act(&self, z: HPoint) -> HPoint {
        let z = Complex64::new(z.x, z.y);
        let w = (self.a * z + self.b) / (self.c * z + self.d);
        HPoint { x: w.re, y: w.im }
    }

    /// Forward endpoint `u(+inf)`: the direction of the first column.
    pub fn endpoint_plus(&self) -> BoundaryPoint {
        BoundaryPoint::from_direction(self.a, self.c).expect("columns of an invertible matrix")
    }

    /// Backward endpoint `u(-inf)`: the direction of the second column.
    pub fn endpoint_minus(&self) -> BoundaryPoint {
        BoundaryPoint::from_direction(self.b, self.d).expect("columns of an invertible matrix")
    }

    /// Base point `u(i)`.
    pub fn basepoint(&self) -> HPoint {
        let n = self.c * self.c + self.d * self.d;
        HPoint {
            x: (self.a * self.c + self.b * self.d) / n,
            y: 1.0 / n,
        }
    }

    pub fn classify(&self) -> IsometryClass {
        let tr = self.trace();
        let atr = tr.abs();
        let near_identity = (self.a - 1.0).abs() < 1e-12
            && self.b.abs() < 1e-12
            && self.c.abs() < 1e-12
            && (self.d - 1.0).abs() < 1e-12;
        if near_identity {
            return IsometryClass::Identity;
        }
        if (atr - 2.0).abs() <= PARABOLIC_TRACE_TOL {
            let s = tr.signum();
            return IsometryClass::Parabolic {
                fix: self.eigendirection(s),
            };
        }
        if atr < 2.0 {
            return IsometryClass::Elliptic;
        }
        let lambda = 0.5 * (atr + (tr * tr - 4.0).sqrt());
        let s = tr.signum();
        IsometryClass::Hyperbolic {
            lambda,
            fix_plus: self.eigendirection(s * lambda),
            fix_minus: self.eigendirection(s / lambda),
        }
    }

    // Eigenvector for a known real eigenvalue, picking the better-conditioned row.
    fn eigendirection(&self, mu: f64) -> BoundaryPoint {
        let r1 = (self.b, mu - self.a);
        let r2 = (mu - self.d, self.c);
        let n1 = r1.0.hypot(r1.1);
        let n2 = r2.0.hypot(r2.1);
        let (x, y) = if n1 >= n2 { r1 } else { r2 };
        BoundaryPoint::from_direction(x, y).unwrap_or_else(BoundaryPoint::infinity)
    }

    /// Max-entry distance between the two matrices modulo sign.
    pub fn distance(&self, other: &Psl2Element) -> f64 {
        let p = self.entries();
        let q = other.entries();
        let minus = p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let plus = p.iter().zip(&q).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
        minus.min(plus)
    }
}

impl Mul for Psl2Element {
    type Output = Psl2Element;
    fn mul(self, rhs: Psl2Element) -> Psl2Element {
        self.compose(&rhs)
    }
}

impl Mul for &Psl2Element {
    type Output = Psl2Element;
    fn mul(self, rhs: &Psl2Element) -> Psl2Element {
        self.compose(rhs)
    }
}

impl fmt::Display for Psl2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

// Four decimal strings with 17 significant digits.
impl Serialize for Psl2Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries().map(|x| format!("{x:.16e}"));
        entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Psl2Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = <[String; 4]>::deserialize(deserializer)?;
        let mut e = [0.0; 4];
        for (slot, s) in e.iter_mut().zip(&raw) {
            *slot = s.trim().parse().map_err(D::Error::custom)?;
        }
        Psl2Element::new(e[0], e[1], e[2], e[3]).map_err(D::Error::custom)
    }
}

/// A point of the circle at infinity `P^1 = R u {inf}`.
///
/// Stored as a unit direction `(x, y)` with `y > 0`, or `(1, 0)` for infinity,
/// so that the finite point `t` is `(t, 1) / |(t, 1)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    x: f64,
    y: f64,
}

impl BoundaryPoint {
    pub fn from_direction(x: f64, y: f64) -> Option<Self> {
        let n = x.hypot(y);
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        let (mut x, mut y) = (x / n, y / n);
        if y < 0.0 || (y == 0.0 && x < 0.0) {
            x = -x;
            y = -y;
        }
        if y == 0.0 {
            x = 1.0;
        }
        Some(BoundaryPoint { x, y })
    }

    pub fn finite(t: f64) -> Self {
        Self::from_direction(t, 1.0).expect("finite real")
    }

    pub fn infinity() -> Self {
        BoundaryPoint { x: 1.0, y: 0.0 }
    }

    pub fn is_infinity(&self) -> bool {
        self.y == 0.0
    }

    pub fn direction(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    /// The real coordinate, or `None` at infinity.
    pub fn as_real(&self) -> Option<f64> {
        (self.y != 0.0).then(|| self.x / self.y)
    }

    /// Angle in `[0, pi)` of the direction; a chart of `P^1` in which the
    /// sine metric is `|sin(theta1 - theta2)|`.
    pub fn angle(&self) -> f64 {
        let th = self.y.atan2(self.x);
        if th >= std::f64::consts::PI {
            th - std::f64::consts::PI
        } else {
            th
        }
    }

    /// Sine metric on `P^1`.
    pub fn dist(&self, other: &BoundaryPoint) -> f64 {
        (self.x * other.y - self.y * other.x).abs()
    }

    /// Image on the unit circle under the Cayley map `t -> (t - i)/(t + i)`.
    pub fn to_circle(&self) -> (f64, f64) {
        // (x - iy)/(x + iy) for the direction (x, y)
        let re = self.x * self.x - self.y * self.y;
        let im = -2.0 * self.x * self.y;
        (re, im)
    }
}

impl Serialize for BoundaryPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundaryPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(deserializer)?;
        BoundaryPoint::from_direction(x, y).ok_or_else(|| D::Error::custom("zero direction"))
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_real() {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "inf"),
        }
    }
}

/// A point `x + iy` of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(Error::invalid(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(HPoint { x, y })
    }

    pub fn i() -> Self {
        HPoint { x: 0.0, y: 1.0 }
    }

    /// Hyperbolic distance.
    pub fn dist(&self, other: &HPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let arg = 1.0 + (dx * dx + dy * dy) / (2.0 * self.y * other.y);
        arg.acosh()
    }
}

/// Conjugacy type of an element of PSL(2,R).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IsometryClass {
    Hyperbolic {
        /// Dominant eigenvalue, `> 1`.
        lambda: f64,
        fix_plus: BoundaryPoint,
        fix_minus: BoundaryPoint,
    },
    Parabolic {
        fix: BoundaryPoint,
    },
    Elliptic,
    Identity,
}

impl IsometryClass {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, IsometryClass::Hyperbolic { .. })
    }
}

/// Busemann cocycle `B_xi(z1, z2)`, normalized so that `B_inf(i, 2i) = ln 2`.
///
/// Closed form through the Poisson kernel `Im z / |q z - p|^2` of the
/// boundary direction `(p, q)`.
pub fn busemann(xi: &BoundaryPoint, z1: &HPoint, z2: &HPoint) -> f64 {
    let (p, q) = xi.direction();
    let kernel = |z: &HPoint| {
        let re = q * z.x - p;
        let im = q * z.y;
        z.y / (re * re + im * im)
    };
    (kernel(z2) / kernel(z1)).ln()
}
