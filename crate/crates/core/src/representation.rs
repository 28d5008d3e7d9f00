//! Representations of Schottky groups into PSL(n+1,R): symmetric powers with
//! their Veronese limit maps, checks of the Conze-Guivarc'h conditions and of
//! the existence of a limit map, projective limit sets, and the Lorentz model
//! of PSL(2,R) acting on `R^3`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::words::is_cyclically_reduced;
use crate::fuchsian::{letter_from_rank, scan_words, FreeWord, LimitSetSample, SchottkyGroup, WordIter};
use crate::hausdorff::DedupIndex;
use crate::hyperbolic::{BoundaryPoint, Psl2Element};
use crate::projective::{delta, eigenvalues, is_proximal, proj_act, ProjMat, ProjPoint, ProximalData};

/// Largest symmetric power supported (matrix order 12).
pub const MAX_SYM_POWER: usize = 11;
/// Leakage below which a candidate subspace counts as invariant.
pub const CG1_TOLERANCE: f64 = 1e-6;
/// Resolution at which projective samples are merged.
pub const PROJ_DEDUP_RESOLUTION: f64 = 1e-10;

/// A representation given by the images of the free generators.
#[derive(Clone, Debug)]
pub struct Representation {
    group: Arc<SchottkyGroup>,
    images: Vec<ProjMat>,
    inverses: Vec<ProjMat>,
}

impl Representation {
    pub fn new(group: Arc<SchottkyGroup>, images: Vec<ProjMat>) -> Result<Self> {
        if images.len() != group.rank() {
            return Err(Error::invalid(format!(
                "{} generator images for a rank {} group",
                images.len(),
                group.rank()
            )));
        }
        let order = images[0].dim();
        if order < 2 || images.iter().any(|m| m.dim() != order) {
            return Err(Error::invalid("generator images must share one order >= 2"));
        }
        let inverses = images.iter().map(ProjMat::inverse).collect();
        Ok(Representation {
            group,
            images,
            inverses,
        })
    }

    /// `Sym^n` composed with the inclusion of the group.
    pub fn sym_power(group: Arc<SchottkyGroup>, n: usize) -> Result<Self> {
        let images = group
            .generators()
            .iter()
            .map(|g| sym_power(g, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, images)
    }

    /// The inclusion `PSL(2,R) = PSL(2,R)`, i.e. `Sym^1`.
    pub fn inclusion(group: Arc<SchottkyGroup>) -> Result<Self> {
        Self::sym_power(group, 1)
    }

    pub fn group(&self) -> &SchottkyGroup {
        &self.group
    }

    pub fn group_arc(&self) -> Arc<SchottkyGroup> {
        Arc::clone(&self.group)
    }

    pub fn images(&self) -> &[ProjMat] {
        &self.images
    }

    /// Projective dimension `n`.
    pub fn dim(&self) -> usize {
        self.images[0].dim() - 1
    }

    /// Order `n + 1` of the matrices.
    pub fn order(&self) -> usize {
        self.images[0].dim()
    }

    pub fn image(&self, l: i32) -> &ProjMat {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.images[i]
        } else {
            &self.inverses[i]
        }
    }

    pub fn evaluate(&self, w: &FreeWord) -> Result<ProjMat> {
        if w.max_generator() > self.group.rank() {
            return Err(Error::invalid(format!(
                "word {w} uses a generator outside the rank {} group",
                self.group.rank()
            )));
        }
        Ok(self.evaluate_letters(w.letters()))
    }

    pub(crate) fn evaluate_letters(&self, letters: &[i32]) -> ProjMat {
        letters
            .iter()
            .fold(ProjMat::identity(self.order()), |acc, l| acc.mul(self.image(*l)))
    }
}

pub fn evaluate_rep(rho: &Representation, w: &FreeWord) -> Result<ProjMat> {
    rho.evaluate(w)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Action of `g` on degree-`n` symmetric tensors of `R^2`, in the monomial
/// basis `e1^{n-k} e2^k`, `k = 0..n`.
pub fn sym_power(g: &Psl2Element, n: usize) -> Result<ProjMat> {
    if !(1..=MAX_SYM_POWER).contains(&n) {
        return Err(Error::invalid(format!(
            "symmetric power must lie in 1..={MAX_SYM_POWER}, got {n}"
        )));
    }
    let [a, b, c, d] = g.entries();
    // column k expands (a e1 + c e2)^{n-k} (b e1 + d e2)^k; coefficient
    // index j is the power of e2
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let mut col = vec![1.0];
        for _ in 0..n - k {
            col = poly_mul(&col, &[a, c]);
        }
        for _ in 0..k {
            col = poly_mul(&col, &[b, d]);
        }
        for (j, x) in col.into_iter().enumerate() {
            m[(j, k)] = x;
        }
    }
    // det Sym^n(g) = det(g)^{n(n+1)/2} = 1, so no rescaling is needed
    Ok(ProjMat::from_product(m))
}

/// The point `[v^n]` for `v` the direction of `xi`:
/// `[x^n : C(n,1) x^{n-1} y : ... : y^n]`.
pub fn veronese(xi: &BoundaryPoint, n: usize) -> ProjPoint {
    let (x, y) = xi.direction();
    let v: Vec<f64> = (0..=n)
        .map(|k| binomial(n, k) * x.powi((n - k) as i32) * y.powi(k as i32))
        .collect();
    ProjPoint::from_slice(&v).expect("a unit direction has a nonzero power")
}

type BoundaryFn = dyn Fn(&BoundaryPoint) -> ProjPoint + Send + Sync;

/// A candidate limit map `L(Gamma) -> P^n` together with the equivariance
/// residual it was last certified with.
#[derive(Clone)]
pub struct LimitMap {
    name: String,
    dim: usize,
    f: Arc<BoundaryFn>,
    certificate: Option<f64>,
}

impl LimitMap {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&BoundaryPoint) -> ProjPoint + Send + Sync + 'static,
    ) -> Self {
        LimitMap {
            name: name.into(),
            dim,
            f: Arc::new(f),
            certificate: None,
        }
    }

    pub fn veronese(n: usize) -> Self {
        Self::new(format!("veronese-{n}"), n, move |xi| veronese(xi, n))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Projective dimension of the target.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, xi: &BoundaryPoint) -> ProjPoint {
        (self.f)(xi)
    }

    pub fn certificate(&self) -> Option<f64> {
        self.certificate
    }

    /// Records the equivariance residual over `ls`.
    pub fn certify(mut self, rho: &Representation, ls: &LimitSetSample) -> Result<Self> {
        self.certificate = Some(check_condition_n(rho, &self, ls)?);
        Ok(self)
    }
}

impl fmt::Debug for LimitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("certificate", &self.certificate)
            .finish()
    }
}

/// Largest equivariance defect `delta(phi(s xi), rho(s) phi(xi))` over the
/// sampled points and all letters `s`.
pub fn check_condition_n(rho: &Representation, phi: &LimitMap, ls: &LimitSetSample) -> Result<f64> {
    if phi.dim() != rho.dim() {
        return Err(Error::invalid(format!(
            "limit map into P^{} for a representation into PSL({})",
            phi.dim(),
            rho.order()
        )));
    }
    if ls.is_empty() {
        return Err(Error::invalid("empty limit-set sample"));
    }
    let g = rho.group();
    let mut worst: f64 = 0.0;
    for r in 0..2 * g.rank() {
        let s = letter_from_rank(r);
        let gs = g.generator(s);
        let rs = rho.image(s);
        for xi in &ls.points {
            let lhs = phi.eval(&gs.mobius_boundary(xi));
            let rhs = proj_act(rs, &phi.eval(xi))?;
            worst = worst.max(delta(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// First word of length `<= max_len` (length-lex order) with proximal image.
pub fn check_cg2(rho: &Representation, max_len: usize, gap_tol: f64) -> Result<Option<(FreeWord, ProximalData)>> {
    for w in WordIter::new(rho.group().rank(), max_len).skip(1) {
        let a = rho.evaluate(&w)?;
        if let Some(pd) = is_proximal(&a, gap_tol)? {
            return Ok(Some((w, pd)));
        }
    }
    Ok(None)
}

/// Smallest leakage found among candidate subspaces of one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cg1Dimension {
    pub dim: usize,
    pub candidates: usize,
    pub min_leakage: Option<f64>,
    /// Orthonormal basis (as columns) of the best candidate when its leakage
    /// is below tolerance.
    pub witness: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cg1Report {
    pub tolerance: f64,
    pub trials: usize,
    pub usable_trials: usize,
    pub dimensions: Vec<Cg1Dimension>,
    pub invariant_subspace_found: bool,
    pub verdict: String,
    pub note: &'static str,
}

/// Searches for a proper invariant subspace.
///
/// Any invariant subspace is invariant under every word, so it is a sum of
/// real eigenblocks of a word with simple spectrum. Each trial draws a random
/// word of length `<= max_len`, enumerates the sums of its eigenblocks and
/// measures how far the generator images move each candidate:
/// `||(I - QQ^T) S Q||_F / ||S Q||_F`.
pub fn check_cg1_heuristic(rho: &Representation, max_len: usize, trials: usize, seed: u64) -> Result<Cg1Report> {
    if max_len == 0 {
        return Err(Error::invalid("CG1 heuristic needs word length >= 1"));
    }
    let order = rho.order();
    let rank = rho.group().rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<(usize, Option<(f64, DMatrix<f64>)>)> = vec![(0, None); order - 1];
    let mut usable = 0;
    for _ in 0..trials {
        let len = rng.gen_range(1..=max_len);
        let mut letters: Vec<i32> = Vec::with_capacity(len);
        while letters.len() < len {
            let g = rng.gen_range(1..=rank as i32);
            let l = if rng.gen::<bool>() { g } else { -g };
            if letters.last() != Some(&-l) {
                letters.push(l);
            }
        }
        let a = rho.evaluate_letters(&letters);
        let Some(blocks) = real_eigenblocks(a.matrix())? else {
            continue;
        };
        usable += 1;
        let nb = blocks.len();
        for mask in 1u32..(1 << nb) - 1 {
            let cols: Vec<&DVector<f64>> = (0..nb)
                .filter(|i| mask & (1 << i) != 0)
                .flat_map(|i| blocks[i].iter())
                .collect();
            let d = cols.len();
            if d == 0 || d >= order {
                continue;
            }
            let q = orthonormalize(&cols);
            let leak = leakage(rho, &q);
            let slot = &mut best[d - 1];
            slot.0 += 1;
            if slot.1.as_ref().is_none_or(|(l, _)| leak < *l) {
                slot.1 = Some((leak, q));
            }
        }
    }
    let dimensions: Vec<Cg1Dimension> = best
        .into_iter()
        .enumerate()
        .map(|(i, (count, b))| {
            let min_leakage = b.as_ref().map(|(l, _)| *l);
            let witness = b
                .filter(|(l, _)| *l < CG1_TOLERANCE)
                .map(|(_, q)| (0..q.ncols()).map(|j| q.column(j).iter().copied().collect()).collect());
            Cg1Dimension {
                dim: i + 1,
                candidates: count,
                min_leakage,
                witness,
            }
        })
        .collect();
    let found = dimensions.iter().any(|d| d.witness.is_some());
    let verdict = if found {
        let dims: Vec<String> = dimensions
            .iter()
            .filter(|d| d.witness.is_some())
            .map(|d| d.dim.to_string())
            .collect();
        format!(
            "invariant subspace found at tolerance {CG1_TOLERANCE:e} (dimension {})",
            dims.join(", ")
        )
    } else {
        format!("no invariant subspace found at tolerance {CG1_TOLERANCE:e}")
    };
    Ok(Cg1Report {
        tolerance: CG1_TOLERANCE,
        trials,
        usable_trials: usable,
        dimensions,
        invariant_subspace_found: found,
        verdict,
        note: "falsification heuristic: evidence against invariant subspaces, not a proof of irreducibility",
    })
}

fn leakage(rho: &Representation, q: &DMatrix<f64>) -> f64 {
    let proj = q * q.transpose();
    let id = DMatrix::identity(q.nrows(), q.nrows());
    rho.images()
        .iter()
        .map(|s| {
            let sq = s.matrix() * q;
            let out = (&id - &proj) * &sq;
            out.norm() / sq.norm()
        })
        .fold(0.0, f64::max)
}

fn orthonormalize(cols: &[&DVector<f64>]) -> DMatrix<f64> {
    let m = DMatrix::from_columns(&cols.iter().map(|c| (*c).clone()).collect::<Vec<_>>());
    let qr = m.qr();
    qr.q()
}

// Real invariant blocks of a matrix with simple spectrum: eigenlines for real
// eigenvalues, 2-planes for conjugate pairs. `None` when eigenvalues cluster.
fn real_eigenblocks(m: &DMatrix<f64>) -> Result<Option<Vec<Vec<DVector<f64>>>>> {
    let n = m.nrows();
    let vals = eigenvalues(m)?;
    let scale = vals[0].norm();
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= 1e-6 * scale.max(1e-300) {
                return Ok(None);
            }
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut blocks = Vec::new();
    let mut seen_pair = Vec::new();
    for v in &vals {
        if v.im.abs() <= 1e-9 * scale {
            let shifted = m - &id * v.re;
            blocks.push(vec![null_space(&shifted, 1)?[0].clone()]);
        } else {
            if seen_pair
                .iter()
                .any(|w: &num_complex::Complex64| (w - v.conj()).norm() < 1e-9 * scale)
            {
                continue;
            }
            seen_pair.push(*v);
            let quad = m * m - m * (2.0 * v.re) + &id * v.norm_sqr();
            blocks.push(null_space(&quad, 2)?);
        }
    }
    Ok(Some(blocks))
}

fn null_space(m: &DMatrix<f64>, k: usize) -> Result<Vec<DVector<f64>>> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let svd = (m / scale).svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Singular("SVD did not return right singular vectors".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]));
    Ok(idx[..k].iter().map(|i| v_t.row(*i).transpose()).collect())
}

/// Attracting points of proximal images of cyclically reduced words.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjLimitSetSample {
    pub level: usize,
    pub points: Vec<ProjPoint>,
    pub words: Vec<FreeWord>,
}

impl ProjLimitSetSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance_to(&self, chi: &ProjPoint) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::invalid("empty projective limit-set sample"));
        }
        Ok(self.points.iter().map(|p| delta(p, chi)).fold(f64::INFINITY, f64::min))
    }
}

pub fn projective_limit_set_sample(rho: &Representation, max_len: usize, gap_tol: f64) -> Result<ProjLimitSetSample> {
    let mut out = ProjLimitSetSample {
        level: max_len,
        points: Vec::new(),
        words: Vec::new(),
    };
    let mut index = DedupIndex::new(4.0 * PROJ_DEDUP_RESOLUTION);
    let mut failure = None;
    scan_words(
        rho.group().rank(),
        max_len,
        ProjMat::identity(rho.order()),
        |acc, l| acc.mul(rho.image(l)),
        |letters, a| {
            if letters.is_empty() || failure.is_some() || !is_cyclically_reduced(letters) {
                return;
            }
            match is_proximal(a, gap_tol) {
                Ok(Some(pd)) => {
                    let id = out.points.len();
                    let pts = &out.points;
                    let chi = pd.chi;
                    if index.insert_if_new(chi.as_slice()[0], id, |j| delta(&pts[j], &chi) <= PROJ_DEDUP_RESOLUTION) {
                        out.points.push(chi);
                        out.words
                            .push(FreeWord::from_letters(letters).expect("reduced letters"));
                    }
                }
                Ok(None) => {}
                Err(e) => failure = Some(e),
            }
        },
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Quadratic form `x1^2 + x2^2 - x3^2`.
pub fn lorentz_q(x: &[f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] - x[2] * x[2]
}

fn lorentz_bilinear(x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    x[0] * y[0] + x[1] * y[1] - x[2] * y[2]
}

/// `P^{-1} Sym^2(g) P`, where `P^{-1}` sends monomial coordinates
/// `(u0, u1, u2)` to `(u1, u0 - u2, u0 + u2)` and turns the discriminant
/// `u1^2 - 4 u0 u2` into the Lorentz form.
pub fn lorentz_embed(g: &Psl2Element) -> ProjMat {
    let s = sym_power(g, 2).expect("n = 2 is in range");
    let p_inv = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, 1.0]);
    let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 0.0, -0.5, 0.5]);
    ProjMat::from_product(p_inv * s.matrix() * p)
}

/// Isotropic direction `(2xy, x^2 - y^2, x^2 + y^2)` of a boundary point.
pub fn lorentz_isotropic(xi: &BoundaryPoint) -> ProjPoint {
    let (x, y) = xi.direction();
    ProjPoint::from_slice(&[2.0 * x * y, x * x - y * y, x * x + y * y])
        .expect("unit directions give nonzero isotropic vectors")
}

/// Inverse of [`lorentz_isotropic`] on the null cone.
pub fn boundary_of_isotropic(w: &[f64; 3]) -> Result<BoundaryPoint> {
    let s = if w[2] < 0.0 { -1.0 } else { 1.0 };
    let (w1, w2, w3) = (s * w[0], s * w[1], s * w[2]);
    let (xx, yy) = (0.5 * (w3 + w2), 0.5 * (w3 - w2));
    let dir = if xx >= yy {
        let x = xx.max(0.0).sqrt();
        (x, 0.5 * w1 / x)
    } else {
        let y = yy.max(0.0).sqrt();
        (0.5 * w1 / y, y)
    };
    BoundaryPoint::from_direction(dir.0, dir.1)
        .ok_or_else(|| Error::invalid("zero vector is not an isotropic direction"))
}

/// Spacelike unit vector `q`-orthogonal to the isotropic lines of two
/// boundary points.
pub fn lorentz_dual(xi1: &BoundaryPoint, xi2: &BoundaryPoint) -> Result<[f64; 3]> {
    let n1 = Vector3::from_column_slice(lorentz_isotropic(xi1).as_slice());
    let n2 = Vector3::from_column_slice(lorentz_isotropic(xi2).as_slice());
    let c = n1.cross(&n2);
    let x = Vector3::new(c[0], c[1], -c[2]);
    let q = lorentz_bilinear(&x, &x);
    if !(q > 0.0) {
        return Err(Error::invalid("boundary points must be distinct"));
    }
    let x = x / q.sqrt();
    Ok([x[0], x[1], x[2]])
}

/// The two isotropic lines in the `q`-orthogonal plane of `x`, and whether
/// both come from the sampled limit set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H1Membership {
    pub member: bool,
    pub eps: f64,
    pub d1: ProjPoint,
    pub d2: ProjPoint,
    pub xi1: BoundaryPoint,
    pub xi2: BoundaryPoint,
    /// Distances of `d1`, `d2` to the isotropic image of the sample.
    pub dist1: f64,
    pub dist2: f64,
    pub isotropy_residual: f64,
}

pub fn h1_lines(x: &[f64; 3]) -> Result<(ProjPoint, ProjPoint)> {
    let qx = lorentz_q(x);
    if (qx - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("expected q(x) = 1, got {qx}")));
    }
    let xv = Vector3::from_column_slice(x);
    let jx = Vector3::new(x[0], x[1], -x[2]).normalize();
    // orthonormal basis (e, f) of the Euclidean complement of Jx
    let seed = if jx[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e = (seed - jx * jx.dot(&seed)).normalize();
    let f = jx.cross(&e);
    let (qe, qf, bef) = (
        lorentz_bilinear(&e, &e),
        lorentz_bilinear(&f, &f),
        lorentz_bilinear(&e, &f),
    );
    let disc = bef * bef - qe * qf;
    if !(disc > 0.0) {
        return Err(Error::invalid(format!(
            "q-orthogonal plane of {xv:?} has no real isotropic lines"
        )));
    }
    // q(a e + b f) = qe a^2 + 2 bef a b + qf b^2; solve for the ratio along
    // the larger diagonal coefficient, with the stable root pairing
    let r = disc.sqrt();
    let (p, c) = if qe.abs() >= qf.abs() { (qe, qf) } else { (qf, qe) };
    let (t1, t2) = if p == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        let big = -(bef + bef.signum() * r);
        let t1 = big / p;
        (t1, if big == 0.0 { 0.0 } else { c / big })
    };
    let line = |t: f64| {
        let (a, b) = if t.is_infinite() { (0.0, 1.0) } else { (t, 1.0) };
        if qe.abs() >= qf.abs() {
            e * a + f * b
        } else {
            e * b + f * a
        }
    };
    let (l1, l2) = (line(t1), line(t2));
    Ok((
        ProjPoint::from_slice(l1.as_slice())?,
        ProjPoint::from_slice(l2.as_slice())?,
    ))
}

pub fn h1_membership(x: &[f64; 3], ls: &LimitSetSample, eps: f64) -> Result<H1Membership> {
    if ls.is_empty() {
        return Err(Error::invalid("empty limit-set sample"));
    }
    let (d1, d2) = h1_lines(x)?;
    let to_arr = |p: &ProjPoint| [p.as_slice()[0], p.as_slice()[1], p.as_slice()[2]];
    let isotropy_residual = lorentz_q(&to_arr(&d1)).abs().max(lorentz_q(&to_arr(&d2)).abs());
    let cone: Vec<ProjPoint> = ls.points.iter().map(lorentz_isotropic).collect();
    let nearest = |p: &ProjPoint| cone.iter().map(|c| delta(c, p)).fold(f64::INFINITY, f64::min);
    let (dist1, dist2) = (nearest(&d1), nearest(&d2));
    Ok(H1Membership {
        member: dist1 <= eps && dist2 <= eps,
        eps,
        xi1: boundary_of_isotropic(&to_arr(&d1))?,
        xi2: boundary_of_isotropic(&to_arr(&d2))?,
        d1,
        d2,
        dist1,
        dist2,
        isotropy_residual,
    })
}
