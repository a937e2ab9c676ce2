//! Dense complex linear algebra: determinants, Hermitian log-determinants
//! and eigenvalues of general (non-Hermitian) matrices.
//!
//! Matrices are row-major `Vec<Complex<_>>` of side `m`.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stream::RandomStream;

/// Determinant by LU with partial pivoting.
pub fn det_complex<T: Real>(m: usize, mut a: Vec<Complex<T>>) -> Complex<T> {
    let mut det = Complex::new(T::one(), T::zero());
    for k in 0..m {
        let mut piv = k;
        let mut best = a[k * m + k].norm();
        for i in (k + 1)..m {
            let v = a[i * m + k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if piv != k {
            for j in 0..m {
                a.swap(k * m + j, piv * m + j);
            }
            det = -det;
        }
        let d = a[k * m + k];
        det = det * d;
        for i in (k + 1)..m {
            let f = a[i * m + k] / d;
            for j in (k + 1)..m {
                let t = a[k * m + j];
                a[i * m + j] = a[i * m + j] - f * t;
            }
        }
    }
    det
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: usize, a: &[Complex64]) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![0.0; m];
    }
    // entries whose squares underflow make the Householder steps produce NaN
    let floor = scale * 1e-140;
    let mat = DMatrix::from_fn(m, m, |i, j| {
        let v = a[i * m + j];
        if v.norm() < floor {
            Complex64::new(0.0, 0.0)
        } else {
            v
        }
    });
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(mat).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigenvalues of a Hermitian positive semidefinite matrix, ascending.
/// Rows whose diagonal is below `1e-40` of the largest are dropped first;
/// their coupling to the rest is bounded by the square root of the product
/// of diagonals, and the dropped eigenvalues are reported as zero.
pub fn psd_eigenvalues(m: usize, a: &[Complex64]) -> Vec<f64> {
    let dmax = (0..m).map(|i| a[i * m + i].re).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..m).filter(|&i| a[i * m + i].re > dmax * 1e-40).collect();
    let k = keep.len();
    let sub: Vec<Complex64> = keep.iter().flat_map(|&i| keep.iter().map(move |&j| a[i * m + j])).collect();
    let mut ev = vec![0.0; m - k];
    ev.extend(hermitian_eigenvalues(k, &sub));
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// `ln det(I - A)` for Hermitian `A` with `I - A` positive definite, by a
/// Cholesky factorization on split real/imaginary storage. `None` when a
/// pivot is not positive.
pub fn logdet_identity_minus(m: usize, a: &[Complex64]) -> Option<f64> {
    let mut lr = vec![0.0f64; m * m];
    let mut li = vec![0.0f64; m * m];
    let mut logdet = 0.0;
    for j in 0..m {
        let (rj, ij) = (&lr[j * m..j * m + j], &li[j * m..j * m + j]);
        let mut s = 0.0;
        for k in 0..j {
            s += rj[k] * rj[k] + ij[k] * ij[k];
        }
        let d = 1.0 - a[j * m + j].re - s;
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let ljj = d.sqrt();
        logdet += d.ln();
        lr[j * m + j] = ljj;
        let inv = 1.0 / ljj;
        for i in (j + 1)..m {
            // (I - A)_ij - sum_k L_ik conj(L_jk)
            let (head_r, tail_r) = lr.split_at_mut(i * m);
            let (head_i, tail_i) = li.split_at_mut(i * m);
            let (rj, ij) = (&head_r[j * m..j * m + j], &head_i[j * m..j * m + j]);
            let (ri, ii) = (&tail_r[..j], &tail_i[..j]);
            let mut sr = 0.0;
            let mut si = 0.0;
            for k in 0..j {
                sr += ri[k] * rj[k] + ii[k] * ij[k];
                si += ii[k] * rj[k] - ri[k] * ij[k];
            }
            let aij = a[i * m + j];
            tail_r[j] = (-aij.re - sr) * inv;
            tail_i[j] = (-aij.im - si) * inv;
        }
    }
    Some(logdet)
}

/// `ln det(I - A)` for Hermitian `A` whose eigenvalues lie in `[0, 1]`:
/// Cholesky when possible, clamped eigenvalues otherwise.
pub fn logdet_identity_minus_contraction(m: usize, a: &[Complex64]) -> f64 {
    if let Some(v) = logdet_identity_minus(m, a) {
        return v;
    }
    psd_eigenvalues(m, a).iter().map(|l| (1.0 - l.clamp(0.0, 1.0)).ln()).sum()
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(n: usize, a: &mut [Complex64]) {
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for i in 0..len {
            v[i] = a[(k + 1 + i) * n + k];
            norm2 += v[i].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vn = v[..len].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for c in v[..len].iter_mut() {
            *c /= vn;
        }
        // A <- (I - 2 v v*) A on rows k+1..n
        for j in k..n {
            let mut s = zero;
            for i in 0..len {
                s += v[i].conj() * a[(k + 1 + i) * n + j];
            }
            s *= 2.0;
            for i in 0..len {
                a[(k + 1 + i) * n + j] -= v[i] * s;
            }
        }
        // A <- A (I - 2 v v*) on columns k+1..n
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let mut s = zero;
            for t in 0..len {
                s += row[k + 1 + t] * v[t];
            }
            s *= 2.0;
            for t in 0..len {
                row[k + 1 + t] -= s * v[t].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in (k + 2)..n {
            a[i * n + k] = zero;
        }
    }
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on a Hessenberg matrix; eigenvalues only, so rotations touch
/// only the active block.
fn hessenberg_qr(n: usize, h: &mut [Complex64]) -> std::result::Result<Vec<Complex64>, ()> {
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rots: Vec<(f64, Complex64)> = vec![(0.0, zero); n];
    loop {
        if hi == 0 {
            eig[0] = h[0];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            let diag = h[lo * n + lo].norm() + h[(lo - 1) * n + lo - 1].norm();
            let tiny = if diag == 0.0 { f64::MIN_POSITIVE } else { eps * diag };
            if sub <= tiny {
                h[lo * n + lo - 1] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi * n + hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 {
            return Err(());
        }
        let mu = if iter % 11 == 10 {
            let s = h[hi * n + hi - 1].norm() + if hi >= 2 { h[(hi - 1) * n + hi - 2].norm() } else { 0.0 };
            h[hi * n + hi] + Complex64::new(0.75 * s, 0.43 * s)
        } else {
            wilkinson(h[(hi - 1) * n + hi - 1], h[(hi - 1) * n + hi], h[hi * n + hi - 1], h[hi * n + hi])
        };
        for k in lo..=hi {
            h[k * n + k] -= mu;
        }
        for k in lo..hi {
            let a = h[k * n + k];
            let b = h[(k + 1) * n + k];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (1.0, zero)
            } else if a.norm() == 0.0 {
                (0.0, b.conj() / b.norm())
            } else {
                let an = a.norm();
                (an / r, (a / an) * b.conj() / r)
            };
            rots[k] = (c, s);
            for j in k..=hi {
                let x = h[k * n + j];
                let y = h[(k + 1) * n + j];
                h[k * n + j] = x * c + s * y;
                h[(k + 1) * n + j] = -s.conj() * x + y * c;
            }
        }
        for k in lo..hi {
            let (c, s) = rots[k];
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[i * n + k];
                let y = h[i * n + k + 1];
                h[i * n + k] = x * c + y * s.conj();
                h[i * n + k + 1] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[k * n + k] += mu;
        }
    }
    Ok(eig)
}

/// Eigenvalues of a general complex matrix by Hessenberg reduction and
/// single-shift QR with Wilkinson and exceptional shifts. On stagnation the
/// input is perturbed at relative size `1e-14` and solved once more.
pub fn general_eigenvalues(n: usize, a: &[Complex64], retry: &mut RandomStream) -> Result<Vec<Complex64>> {
    let mut h = a.to_vec();
    hessenberg(n, &mut h);
    if let Ok(e) = hessenberg_qr(n, &mut h) {
        return Ok(e);
    }
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut p: Vec<Complex64> = a.iter().map(|c| c + retry.complex_gaussian() * (1e-14 * scale)).collect();
    hessenberg(n, &mut p);
    hessenberg_qr(n, &mut p).map_err(|_| Error::EigenNonConvergence { n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_of_small_matrices() {
        let a = vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, -1.0), c(4.0, 0.0)];
        let d = det_complex(2, a);
        let expect = c(4.0, 0.0) - c(2.0, 1.0) * c(3.0, -1.0);
        assert!((d - expect).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let mut s = RandomStream::new(1, 0);
        let a = vec![c(1.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)];
        let mut e = general_eigenvalues(2, &a, &mut s).unwrap();
        e.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((e[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_preserve_trace_and_determinant() {
        let mut s = RandomStream::new(5, 1);
        for &n in &[3usize, 8, 40] {
            let a: Vec<Complex64> = (0..n * n).map(|_| s.complex_gaussian()).collect();
            let e = general_eigenvalues(n, &a, &mut s).unwrap();
            let tr: Complex64 = (0..n).map(|i| a[i * n + i]).sum();
            let etr: Complex64 = e.iter().sum();
            assert!((tr - etr).norm() < 1e-10 * n as f64, "trace n={n}");
            let det = det_complex(n, a.clone());
            let edet: Complex64 = e.iter().product();
            assert!((det - edet).norm() < 1e-9 * det.norm().max(1.0), "det n={n}");
        }
    }

    #[test]
    fn cholesky_logdet_matches_eigenvalues() {
        let mut s = RandomStream::new(9, 0);
        let m = 12;
        let b: Vec<Complex64> = (0..m * m).map(|_| s.complex_gaussian()).collect();
        // A = B B* / (2 tr) is a Hermitian contraction
        let mut a = vec![c(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = (0..m).map(|k| b[i * m + k] * b[j * m + k].conj()).sum();
            }
        }
        let tr: f64 = (0..m).map(|i| a[i * m + i].re).sum();
        for v in a.iter_mut() {
            *v /= tr;
        }
        let chol = logdet_identity_minus(m, &a).unwrap();
        let ev: f64 = hermitian_eigenvalues(m, &a).iter().map(|l| (1.0 - l).ln()).sum();
        assert!((chol - ev).abs() < 1e-12);
    }
}
