//! Dense real eigenvalues: balancing, Householder reduction to Hessenberg
//! form and the Francis double-shift QR iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported matrix order.
pub const MAX_ORDER: usize = 12;

const MAX_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Relative gap under which two eigenvalues are merged into one cluster.
const CLUSTER_TOL: f64 = 1e-5;

/// All eigenvalues of `m`, sorted by modulus (descending), ties broken by
/// real part then imaginary part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::invalid("eigenvalues of a non-square matrix"));
    }
    if n == 0 || n > MAX_ORDER {
        return Err(Error::invalid(format!(
            "matrix order {n} outside the supported range 1..={MAX_ORDER}"
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    balance(&mut a);
    hessenberg(&mut a);
    let mut vals = hqr(&mut a)?;
    vals.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    Ok(vals)
}

/// Eigenvalues grouped into clusters with their multiplicities.
pub fn spectrum(m: &DMatrix<f64>) -> Result<Vec<(Complex64, usize)>> {
    let vals = eigenvalues(m)?;
    let scale = vals.first().map(|v| v.norm()).unwrap_or(1.0).max(1.0);
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for v in vals {
        match out
            .iter_mut()
            .find(|(c, _)| (*c - v).norm() <= CLUSTER_TOL * scale.min(1.0 + c.norm()))
        {
            Some(slot) => slot.1 += 1,
            None => out.push((v, 1)),
        }
    }
    Ok(out)
}

// Diagonal similarity by powers of two, equalizing row and column norms.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        let alpha = alpha_sq.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[k + 1][k];
        let alpha = if x0 > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // A <- H A H with H = I - 2 v v^T / |v|^2 acting on rows/cols k+1..n
        for j in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[k + 1 + t][j]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for (t, vt) in v.iter().enumerate() {
                a[k + 1 + t][j] -= f * vt;
            }
        }
        for row in a.iter_mut() {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * row[k + 1 + t]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for (t, vt) in v.iter().enumerate() {
                row[k + 1 + t] -= f * vt;
            }
        }
        a[k + 1][k] = alpha;
        for row in a.iter_mut().skip(k + 2) {
            row[k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    // 1-based indices below mirror the classical formulation
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[$i - 1][$j - 1]
        };
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nnu = nn as usize;
            let mut l = nnu;
            while l >= 2 {
                let mut s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at!(l, l - 1).abs() + s == s {
                    at!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at!(nnu, nnu);
            if l == nnu {
                wr[nnu - 1] = x + t;
                wi[nnu - 1] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = at!(nnu - 1, nnu - 1);
            let mut w = at!(nnu, nnu - 1) * at!(nnu - 1, nnu);
            if l == nnu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nnu - 2] = x + z;
                    wr[nnu - 1] = x + z;
                    if z != 0.0 {
                        wr[nnu - 1] = x - w / z;
                    }
                    wi[nnu - 2] = 0.0;
                    wi[nnu - 1] = 0.0;
                } else {
                    wr[nnu - 2] = x + p;
                    wr[nnu - 1] = x + p;
                    wi[nnu - 2] = -z;
                    wi[nnu - 1] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITERATIONS_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    dim: n,
                    iterations: its,
                });
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 1..=nnu {
                    at!(i, i) -= x;
                }
                let s = at!(nnu, nnu - 1).abs() + at!(nnu - 1, nnu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nnu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = at!(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - rr - ss;
                r = at!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nnu {
                at!(i, i - 2) = 0.0;
                if i != m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k < nnu {
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = 0.0;
                    if k != nnu - 1 {
                        r = at!(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            at!(k, k - 1) = -at!(k, k - 1);
                        }
                    } else {
                        at!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nnu {
                        p = at!(k, j) + q * at!(k + 1, j);
                        if k != nnu - 1 {
                            p += r * at!(k + 2, j);
                            at!(k + 2, j) -= p * z;
                        }
                        at!(k + 1, j) -= p * y;
                        at!(k, j) -= p * x;
                    }
                    let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                    for i in l..=mmin {
                        p = x * at!(i, k) + y * at!(i, k + 1);
                        if k != nnu - 1 {
                            p += z * at!(i, k + 2);
                            at!(i, k + 2) -= p * r;
                        }
                        at!(i, k + 1) -= p * q;
                        at!(i, k) -= p;
                    }
                }
                k += 1;
            }
            if l >= nnu - 1 {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.25, 4.0, 1.0]));
        let s = spectrum(&m).unwrap();
        let vals: Vec<f64> = s.iter().map(|(v, _)| v.re).collect();
        assert_eq!(vals, vec![4.0, 1.0, 0.25]);
        assert!(s.iter().all(|(v, k)| v.im == 0.0 && *k == 1));
    }

    #[test]
    fn rotation_block() {
        let th = 0.7f64;
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[th.cos(), -th.sin(), 0.0, th.sin(), th.cos(), 0.0, 0.0, 0.0, 1.0],
        );
        let vals = eigenvalues(&m).unwrap();
        let unit = vals.iter().filter(|v| (v.norm() - 1.0).abs() < 1e-12).count();
        assert_eq!(unit, 3);
        assert!(vals
            .iter()
            .any(|v| close(*v, Complex64::new(th.cos(), th.sin()), 1e-12)));
        assert!(vals.iter().any(|v| close(*v, Complex64::new(1.0, 0.0), 1e-12)));
    }

    #[test]
    fn repeated_eigenvalue_cluster() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 4.0, 1.0 / 16.0]));
        let s = spectrum(&m).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].1, 2);
    }

    // Characteristic polynomial residual as an independent check on random input.
    #[test]
    fn random_matrices_match_trace_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=MAX_ORDER {
            for _ in 0..20 {
                let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
                let vals = eigenvalues(&m).unwrap();
                assert_eq!(vals.len(), n);
                let tr: Complex64 = vals.iter().sum();
                assert!((tr.re - m.trace()).abs() < 1e-9 * (1.0 + m.norm()));
                assert!(tr.im.abs() < 1e-9);
                let det: Complex64 = vals.iter().product();
                let exact = m.clone().lu().determinant();
                assert!((det.re - exact).abs() < 1e-8 * (1.0 + exact.abs()));
                for v in &vals {
                    let shifted = m.map(Complex64::from) - DMatrix::<Complex64>::identity(n, n) * *v;
                    let sv = shifted.svd(false, false).singular_values;
                    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                    assert!(smallest < 1e-8 * (1.0 + m.norm()), "n={n} v={v}");
                }
            }
        }
    }

    #[test]
    fn rejects_oversized_and_non_finite() {
        assert!(eigenvalues(&DMatrix::identity(13, 13)).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(eigenvalues(&m).is_err());
    }
}
