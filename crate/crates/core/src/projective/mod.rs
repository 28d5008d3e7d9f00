//! Real projective space, the projective linear action, the sine metric and
//! proximality.

pub mod eigen;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use eigen::{eigenvalues, spectrum, MAX_ORDER};

/// Default proximality threshold: `|lambda_2| / |lambda_1| <= 1 - gap_tol`.
pub const DEFAULT_GAP_TOL: f64 = 1e-3;

/// Largest power tried by [`contraction_estimate`].
pub const MAX_CONTRACTION_POWER: usize = 64;

/// A point of `P^n`: a unit vector whose first nonzero coordinate is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    v: DVector<f64>,
}

impl ProjPoint {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Singular(
                "cannot projectivize the zero (or non-finite) vector".into(),
            ));
        }
        let mut v = v / n;
        if let Some(first) = v.iter().find(|x| **x != 0.0) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        Ok(ProjPoint { v })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// The coordinate point `e_k` in `P^{dim-1}`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        ProjPoint { v }
    }

    /// Dimension of the ambient vector space (`n + 1`).
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn as_slice(&self) -> &[f64] {
        self.v.as_slice()
    }

    /// Sine of the angle between the two lines, `|v1 ^ v2|`.
    pub fn dist(&self, other: &ProjPoint) -> f64 {
        delta(self, other)
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.v.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(deserializer)?;
        ProjPoint::from_slice(&v).map_err(D::Error::custom)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.v.iter().enumerate() {
            if i > 0 {
                write!(f, " : ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Sine metric: the norm of the wedge product of unit representatives.
///
/// Computed from the 2x2 minors so that nearly equal lines keep full
/// relative precision.
pub fn delta(p: &ProjPoint, q: &ProjPoint) -> f64 {
    assert_eq!(p.dim(), q.dim(), "projective points of different dimension");
    let (a, b) = (&p.v, &q.v);
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let m = a[i] * b[j] - a[j] * b[i];
            s += m * m;
        }
    }
    s.sqrt().min(1.0)
}

/// An element of PSL(n+1, R), stored as a determinant-one representative.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjMat {
    m: DMatrix<f64>,
}

impl ProjMat {
    /// Normalizes `m` to determinant one.
    ///
    /// A negative determinant is fixed by negation in odd order; in even
    /// order it cannot be fixed and is rejected.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(Error::invalid(format!(
                "projective matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if n > MAX_ORDER {
            return Err(Error::invalid(format!("matrix order {n} exceeds {MAX_ORDER}")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let det = m.clone().lu().determinant();
        let scale = m.amax().max(f64::MIN_POSITIVE).powi(n as i32);
        if det.abs() <= 1e-14 * scale {
            return Err(Error::Singular(format!("determinant {det} is numerically zero")));
        }
        let mut m = m;
        if det < 0.0 {
            if n.is_multiple_of(2) {
                return Err(Error::Singular(format!(
                    "determinant {det} < 0 cannot be made positive in even order {n}"
                )));
            }
            m.neg_mut();
        }
        let k = det.abs().powf(-1.0 / n as f64);
        Ok(ProjMat { m: m * k })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows have inconsistent lengths"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    /// Wraps a product of determinant-one matrices without renormalizing.
    pub(crate) fn from_product(m: DMatrix<f64>) -> Self {
        ProjMat { m }
    }

    pub fn identity(dim: usize) -> Self {
        ProjMat {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.m.row(i).iter().copied().collect())
            .collect()
    }

    pub fn mul(&self, other: &ProjMat) -> ProjMat {
        ProjMat { m: &self.m * &other.m }
    }

    pub fn inverse(&self) -> ProjMat {
        let inv = self
            .m
            .clone()
            .try_inverse()
            .expect("determinant-one matrices are invertible");
        ProjMat { m: inv }
    }

    pub fn pow(&self, k: usize) -> ProjMat {
        let mut acc = ProjMat::identity(self.dim());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Projective action `chi -> [A v]`.
    pub fn act(&self, chi: &ProjPoint) -> Result<ProjPoint> {
        proj_act(self, chi)
    }

    /// Distance modulo sign after scaling both to unit Frobenius norm.
    pub fn distance(&self, other: &ProjMat) -> f64 {
        let a = &self.m / self.m.norm();
        let b = &other.m / other.m.norm();
        (&a - &b).amax().min((&a + &b).amax())
    }
}

impl Serialize for ProjMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        ProjMat::from_rows(&rows).map_err(D::Error::custom)
    }
}

pub fn proj_act(a: &ProjMat, chi: &ProjPoint) -> Result<ProjPoint> {
    if a.dim() != chi.dim() {
        return Err(Error::invalid(format!(
            "matrix of order {} acting on a point of dimension {}",
            a.dim(),
            chi.dim()
        )));
    }
    ProjPoint::new(&a.m * &chi.v).map_err(|_| Error::Singular("A v vanished; the matrix is corrupted".into()))
}

/// Dominant eigen-data of a proximal matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProximalData {
    /// Dominant eigenvalue (signed).
    pub lambda: f64,
    /// Attracting fixed point in `P^n`.
    pub chi: ProjPoint,
    /// Orthonormal basis of the repelling hyperplane `W_A`.
    #[serde(skip)]
    pub w_basis: Vec<DVector<f64>>,
    /// Unit normal of `W_A` (the dominant left eigenvector).
    #[serde(skip)]
    pub normal: DVector<f64>,
    /// `|lambda_2| / |lambda_1|`.
    pub gap: f64,
}

impl ProximalData {
    /// Sine distance from `chi` to the projectivized hyperplane `W_A`.
    pub fn dist_to_repelling(&self, chi: &ProjPoint) -> f64 {
        self.normal.dot(chi.vector()).abs()
    }
}

pub fn dist_to_repelling(chi: &ProjPoint, pd: &ProximalData) -> f64 {
    pd.dist_to_repelling(chi)
}

/// Returns the dominant eigen-data when `a` is proximal at threshold
/// `gap_tol`, `None` otherwise.
pub fn is_proximal(a: &ProjMat, gap_tol: f64) -> Result<Option<ProximalData>> {
    let Some((lambda, chi, gap)) = dominant_direction(a, gap_tol)? else {
        return Ok(None);
    };
    let n = a.dim();
    let shift = DMatrix::identity(n, n) * lambda;
    let left = null_vector(&(a.matrix().transpose() - &shift), a.matrix().norm())?;
    let normal = left.normalize();
    let w_basis = complement_basis(&normal);
    Ok(Some(ProximalData {
        lambda,
        chi,
        w_basis,
        normal,
        gap,
    }))
}

/// `(lambda, chi_A, gap)` of a proximal matrix, without the repelling
/// hyperplane.
pub fn dominant_direction(a: &ProjMat, gap_tol: f64) -> Result<Option<(f64, ProjPoint, f64)>> {
    if !(gap_tol > 0.0 && gap_tol < 1.0) {
        return Err(Error::invalid(format!("gap_tol must lie in (0,1), got {gap_tol}")));
    }
    let n = a.dim();
    if n == 1 {
        return Ok(None);
    }
    let vals = eigenvalues(a.matrix())?;
    let top = vals[0];
    let second = vals[1].norm();
    let top_norm = top.norm();
    if top_norm == 0.0 {
        return Ok(None);
    }
    // a complex top eigenvalue comes with its conjugate, so the ratio test
    // also rejects it; the explicit check guards the rounding margin
    if top.im.abs() > 1e-9 * top_norm {
        return Ok(None);
    }
    let gap = second / top_norm;
    if gap > 1.0 - gap_tol {
        return Ok(None);
    }
    let lambda = top.re;
    let shift = DMatrix::identity(n, n) * lambda;
    let right = null_vector(&(a.matrix() - &shift), a.matrix().norm())?;
    Ok(Some((lambda, ProjPoint::new(right)?, gap)))
}

// Right singular vector of the smallest singular value.
fn null_vector(m: &DMatrix<f64>, scale: f64) -> Result<DVector<f64>> {
    let m = m / scale.max(f64::MIN_POSITIVE);
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Singular("SVD did not return right singular vectors".into()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty spectrum");
    Ok(v_t.row(idx).transpose())
}

// Orthonormal basis of the orthogonal complement of a unit vector, read off
// the columns of a Householder reflection.
fn complement_basis(normal: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = normal.len();
    let (k, _) = normal
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .expect("nonempty");
    let mut u = normal.clone();
    u[k] -= if normal[k] >= 0.0 { 1.0 } else { -1.0 };
    let un = u.norm_squared();
    let mut out = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|j| *j != k) {
        let mut col = DVector::zeros(n);
        col[j] = 1.0;
        if un > 0.0 {
            let f = 2.0 * u[j] / un;
            col -= &u * f;
        }
        out.push(col);
    }
    out
}

/// Empirical contraction constants of a proximal matrix near its attracting
/// point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Contraction {
    /// Power of the matrix that contracts the ball.
    pub power: usize,
    /// Worst observed Lipschitz ratio of `A^N` on the ball.
    pub constant: f64,
}

/// Draws a point at sine distance `r` from `center` in a uniformly random
/// tangent direction.
pub fn sample_at_distance(center: &ProjPoint, r: f64, rng: &mut impl Rng) -> ProjPoint {
    let n = center.dim();
    let c = center.vector();
    loop {
        let mut w = DVector::from_fn(n, |_, _| gaussian(rng));
        let proj = w.dot(c);
        w -= c * proj;
        let wn = w.norm();
        if wn < 1e-12 {
            continue;
        }
        let r = r.clamp(0.0, 1.0);
        let v = c * (1.0 - r * r).sqrt() + w * (r / wn);
        return ProjPoint::new(v).expect("nonzero combination");
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Smallest power `N <= 64` whose action contracts the `delta`-ball of the
/// given radius around `chi_A` into itself with an empirical Lipschitz
/// constant `c < 1`, measured on `samples` random pairs.
pub fn contraction_estimate(
    pd: &ProximalData,
    a: &ProjMat,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<Option<Contraction>> {
    if a.dim() != pd.chi.dim() {
        return Err(Error::invalid("proximal data and matrix have different dimensions"));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::invalid(format!("radius must lie in (0,1), got {radius}")));
    }
    if samples == 0 {
        return Err(Error::invalid("at least one sample pair is required"));
    }
    let clearance = pd.dist_to_repelling(&pd.chi);
    if radius >= clearance {
        return Err(Error::precondition(format!(
            "ball of radius {radius} meets the repelling hyperplane (distance {clearance})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(ProjPoint, ProjPoint)> = (0..samples)
        .map(|_| {
            let r1 = radius * rng.gen::<f64>();
            let r2 = radius * rng.gen::<f64>();
            (
                sample_at_distance(&pd.chi, r1, &mut rng),
                sample_at_distance(&pd.chi, r2, &mut rng),
            )
        })
        .collect();
    let rim: Vec<ProjPoint> = (0..samples)
        .map(|_| sample_at_distance(&pd.chi, radius, &mut rng))
        .collect();

    let mut power = ProjMat::identity(a.dim());
    for n in 1..=MAX_CONTRACTION_POWER {
        power = power.mul(a);
        let into_itself = rim
            .iter()
            .chain(pairs.iter().flat_map(|(p, q)| [p, q]))
            .all(|p| match proj_act(&power, p) {
                Ok(img) => delta(&img, &pd.chi) <= radius,
                Err(_) => false,
            });
        if !into_itself {
            continue;
        }
        let mut worst: f64 = 0.0;
        for (p, q) in &pairs {
            let d0 = delta(p, q);
            if d0 < 1e-12 {
                continue;
            }
            let d1 = delta(&proj_act(&power, p)?, &proj_act(&power, q)?);
            worst = worst.max(d1 / d0);
        }
        if worst < 1.0 {
            return Ok(Some(Contraction {
                power: n,
                constant: worst,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn p(v: &[f64]) -> ProjPoint {
        ProjPoint::from_slice(v).unwrap()
    }

    fn diag_model() -> ProjMat {
        ProjMat::diagonal(&[4.0, 1.0, 0.25]).unwrap()
    }

    #[test]
    fn proj_act_examples() {
        let chi = p(&[0.3, -0.2, 0.9]);
        assert_eq!(proj_act(&ProjMat::identity(3), &chi).unwrap(), chi);
        let a = diag_model();
        assert_eq!(proj_act(&a, &p(&[0.0, 1.0, 0.0])).unwrap(), p(&[0.0, 1.0, 0.0]));
        let mut x = p(&[1.0, 1.0, 1.0]);
        for _ in 0..40 {
            x = proj_act(&a, &x).unwrap();
        }
        assert!(delta(&x, &ProjPoint::basis(3, 0)) < 1e-20);
    }

    #[test]
    fn delta_examples() {
        let chi = p(&[0.3, -0.2, 0.9]);
        assert_eq!(delta(&chi, &chi), 0.0);
        assert_eq!(delta(&ProjPoint::basis(3, 0), &ProjPoint::basis(3, 1)), 1.0);
        let d = delta(&ProjPoint::basis(3, 0), &p(&[1.0, 1.0, 0.0]));
        assert!((d - 2f64.sqrt() / 2.0).abs() < 1e-15);
        // antipodal representatives are the same point
        assert!(delta(&p(&[1.0, 2.0, 3.0]), &p(&[-1.0, -2.0, -3.0])) < 1e-16);
    }

    #[test]
    fn projmat_normalization() {
        let m = ProjMat::diagonal(&[2.0, 2.0, 2.0]).unwrap();
        assert!((m.matrix()[(0, 0)] - 1.0).abs() < 1e-15);
        // odd order, negative determinant: fixed by negation
        let m = ProjMat::diagonal(&[-1.0, 1.0, 1.0]).unwrap();
        assert!((m.matrix().determinant() - 1.0).abs() < 1e-12);
        // even order, negative determinant: rejected
        assert!(ProjMat::diagonal(&[-1.0, 1.0]).is_err());
        assert!(ProjMat::diagonal(&[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn spectral_analysis_examples() {
        let s = spectrum(diag_model().matrix()).unwrap();
        let vals: Vec<f64> = s.iter().map(|(v, _)| v.re).collect();
        assert_eq!(vals, vec![4.0, 1.0, 0.25]);
        let th = 1.1f64;
        let rot = ProjMat::from_rows(&[
            vec![th.cos(), -th.sin(), 0.0],
            vec![th.sin(), th.cos(), 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let s = spectrum(rot.matrix()).unwrap();
        assert!(s.iter().all(|(v, _)| (v.norm() - 1.0).abs() < 1e-12));
        assert_eq!(s.iter().filter(|(v, _)| v.im.abs() > 0.5).count(), 2);
    }

    #[test]
    fn proximal_examples() {
        let pd = is_proximal(&diag_model(), 0.1).unwrap().unwrap();
        assert!((pd.lambda - 4.0).abs() < 1e-12);
        assert!(delta(&pd.chi, &ProjPoint::basis(3, 0)) < 1e-12);
        assert!((pd.gap - 0.25).abs() < 1e-12);
        let th = 1.1f64;
        let rot = ProjMat::from_rows(&[
            vec![th.cos(), -th.sin(), 0.0],
            vec![th.sin(), th.cos(), 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(is_proximal(&rot, 0.1).unwrap().is_none());
        let double = ProjMat::diagonal(&[4.0, 4.0, 1.0 / 16.0]).unwrap();
        assert!(is_proximal(&double, 0.1).unwrap().is_none());
        assert!(is_proximal(&diag_model(), 0.0).is_err());
        assert!(is_proximal(&diag_model(), 1.0).is_err());
    }

    #[test]
    fn repelling_distance_examples() {
        let a = diag_model();
        let pd = is_proximal(&a, 0.1).unwrap().unwrap();
        assert!((pd.dist_to_repelling(&pd.chi) - 1.0).abs() < 1e-12);
        assert!(pd.dist_to_repelling(&p(&[0.0, 0.6, 0.8])) < 1e-12);
        let mut x = p(&[0.01, 1.0, 1.0]);
        let mut last = pd.dist_to_repelling(&x);
        for _ in 0..30 {
            x = proj_act(&a, &x).unwrap();
            let d = pd.dist_to_repelling(&x);
            assert!(d >= last - 1e-15);
            last = d;
        }
        assert!((last - 1.0).abs() < 1e-9);
    }

    // W_A is the set of vectors with lambda^{-k} A^k w -> 0.
    #[test]
    fn repelling_hyperplane_matches_limit_definition() {
        let a = ProjMat::from_rows(&[vec![3.0, 1.0, 0.5], vec![0.2, 1.0, 0.3], vec![0.1, 0.4, 0.7]]).unwrap();
        let pd = is_proximal(&a, DEFAULT_GAP_TOL).unwrap().unwrap();
        let scaled = a.matrix() / pd.lambda;
        for w in &pd.w_basis {
            let mut v = w.clone();
            for _ in 0..200 {
                v = &scaled * v;
            }
            assert!(v.norm() < 1e-10, "residual {}", v.norm());
        }
        let mut full = DMatrix::zeros(3, 3);
        full.set_column(0, pd.chi.vector());
        full.set_column(1, &pd.w_basis[0]);
        full.set_column(2, &pd.w_basis[1]);
        assert!(full.determinant().abs() > 1e-3);
        let residual = (a.matrix() * pd.chi.vector() - pd.chi.vector() * pd.lambda).norm();
        assert!(residual < 1e-8 * a.matrix().norm());
    }

    #[test]
    fn contraction_on_diagonal_model() {
        let a = diag_model();
        let pd = is_proximal(&a, DEFAULT_GAP_TOL).unwrap().unwrap();
        let c = contraction_estimate(&pd, &a, 0.3, 2000, 17).unwrap().unwrap();
        assert_eq!(c.power, 1);
        assert!((c.constant - 0.25).abs() <= 0.05, "c = {}", c.constant);
        // decay re-check along orbits
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let r = 0.3 * rng.gen::<f64>();
            let chi = sample_at_distance(&pd.chi, r, &mut rng);
            let d0 = delta(&chi, &pd.chi);
            let step = a.pow(c.power);
            let mut x = chi.clone();
            for k in 1..=10 {
                x = proj_act(&step, &x).unwrap();
                let bound = 1.1 * c.constant.powi(k) * d0;
                assert!(delta(&x, &pd.chi) <= bound + 1e-300);
            }
        }
    }

    #[test]
    fn contraction_rejects_ball_meeting_hyperplane() {
        // chi = e1 and W_A = span(e1 - e2) sit at sine distance 1/sqrt(2)
        let a = ProjMat::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let pd = is_proximal(&a, DEFAULT_GAP_TOL).unwrap().unwrap();
        assert!((pd.dist_to_repelling(&pd.chi) - 0.5f64.sqrt()).abs() < 1e-12);
        let err = contraction_estimate(&pd, &a, 0.75, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(contraction_estimate(&pd, &a, 0.5, 10, 1).unwrap().is_some());
        // a near-identity matrix has no proximal data at all
        let near = ProjMat::diagonal(&[1.0 + 1e-6, 1.0, 1.0 / (1.0 + 1e-6)]).unwrap();
        assert!(is_proximal(&near, DEFAULT_GAP_TOL).unwrap().is_none());
    }

    #[test]
    fn power_iteration_rate() {
        let a = ProjMat::from_rows(&[vec![3.0, 1.0, 0.5], vec![0.2, 1.5, 0.3], vec![0.1, 0.4, 0.7]]).unwrap();
        let pd = is_proximal(&a, DEFAULT_GAP_TOL).unwrap().unwrap();
        let mut x = p(&[0.2, 0.5, -0.7]);
        let mut logs = Vec::new();
        for k in 1..=30 {
            x = proj_act(&a, &x).unwrap();
            if k >= 10 {
                logs.push((k as f64, delta(&x, &pd.chi).ln()));
            }
        }
        let slope = crate::stats::fit_slope(&logs);
        assert!(
            (slope / pd.gap.ln() - 1.0).abs() < 0.1,
            "slope {slope} vs {}",
            pd.gap.ln()
        );
    }

    fn point3() -> impl Strategy<Value = ProjPoint> {
        prop::array::uniform3(-1.0f64..1.0)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| p(&v))
    }

    proptest! {
        #[test]
        fn delta_is_a_metric(a in point3(), b in point3(), c in point3()) {
            prop_assert_eq!(delta(&a, &b), delta(&b, &a));
            prop_assert!(delta(&a, &c) <= delta(&a, &b) + delta(&b, &c) + 1e-12);
        }

        #[test]
        fn inverse_action_round_trips(
            entries in prop::array::uniform9(-2.0f64..2.0),
            x in point3(),
        ) {
            let m = DMatrix::from_row_slice(3, 3, &entries);
            prop_assume!(m.clone().determinant().abs() > 0.05);
            let a = ProjMat::new(m).unwrap();
            let back = proj_act(&a.inverse(), &proj_act(&a, &x).unwrap()).unwrap();
            prop_assert!(delta(&back, &x) < 1e-10);
        }
    }
}
