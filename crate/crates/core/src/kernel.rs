//! Ginibre basis functions, correlation kernels and correlation functions.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::ComplexPoint;
use crate::linalg::det_complex;
use crate::scalar::{from_usize, lit, Real};
use crate::special::{ln_factorial, ln_gamma_pq_int};

/// Value of a basis function together with an underflow flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiValue<T> {
    pub value: Complex<T>,
    /// The true value is nonzero but below the smallest representable
    /// magnitude, so `value` is exactly zero.
    pub underflow: bool,
}

/// `phi_k(z) = z^(k-1) e^(-|z|^2/2) / sqrt(pi (k-1)!)`, by the recurrence
/// `phi_(k+1) = z phi_k / sqrt(k)` on a mantissa with a separate log scale.
pub fn eval_phi<T: Real>(k: usize, z: ComplexPoint<T>) -> Result<PhiValue<T>> {
    if k == 0 {
        return Err(Error::Domain("basis index starts at 1".into()));
    }
    let (mant, log_scale) = phi_scaled(k, z);
    Ok(finish(mant, log_scale))
}

fn finish<T: Real>(mant: Complex<T>, log_scale: T) -> PhiValue<T> {
    if mant.re == T::zero() && mant.im == T::zero() {
        return PhiValue { value: mant, underflow: false };
    }
    let f = log_scale.exp();
    let value = mant * f;
    let underflow = value.re == T::zero() && value.im == T::zero();
    PhiValue { value, underflow }
}

fn phi_scaled<T: Real>(k: usize, z: ComplexPoint<T>) -> (Complex<T>, T) {
    let zc = z.to_complex();
    let mut m = Complex::new(T::one() / T::PI().sqrt(), T::zero());
    let mut log_scale = -z.norm_sqr() * lit(0.5);
    let hi: T = lit(T::RESCALE);
    let lo = T::one() / hi;
    for j in 1..k {
        m = m * zc / from_usize::<T>(j).sqrt();
        let a = m.norm();
        if a == T::zero() {
            return (m, log_scale);
        }
        if a > hi || a < lo {
            log_scale = log_scale + a.ln();
            m = m / a;
        }
    }
    (m, log_scale)
}

/// `phi_1(z), ..., phi_n(z)`; underflowed entries are zero.
pub fn eval_phi_all<T: Real>(n: usize, z: ComplexPoint<T>) -> Vec<Complex<T>> {
    let zc = z.to_complex();
    let mut out = Vec::with_capacity(n);
    let mut m = Complex::new(T::one() / T::PI().sqrt(), T::zero());
    let mut log_scale = -z.norm_sqr() * lit(0.5);
    let hi: T = lit(T::RESCALE);
    let lo = T::one() / hi;
    for j in 1..=n {
        out.push(m * log_scale.exp());
        if j == n {
            break;
        }
        m = m * zc / from_usize::<T>(j).sqrt();
        let a = m.norm();
        if a == T::zero() {
            out.resize(n, Complex::new(T::zero(), T::zero()));
            break;
        }
        if a > hi || a < lo {
            log_scale = log_scale + a.ln();
            m = m / a;
        }
    }
    out
}

/// Which determinantal kernel to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec<T> {
    /// `K_n`, the kernel of the `n` eigenvalues.
    FiniteGinibre { n: usize },
    /// `K(z,w) = e^(-|z|^2/2 - |w|^2/2 + z conj(w)) / pi`.
    InfiniteGinibre,
    /// `K_n` conditioned on a point at `anchor`.
    Palm { n: usize, anchor: ComplexPoint<T> },
}

impl<T: Real> KernelSpec<T> {
    pub fn finite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ensemble dimension must be positive".into()));
        }
        Ok(KernelSpec::FiniteGinibre { n })
    }

    pub fn infinite() -> Self {
        KernelSpec::InfiniteGinibre
    }

    /// Palm kernel; rejects anchors where `K_n(x, x)` is numerically zero.
    pub fn palm(n: usize, anchor: ComplexPoint<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ensemble dimension must be positive".into()));
        }
        let d = finite_diagonal(n, anchor).to_f64().unwrap_or(0.0);
        if d <= 1e-300 {
            return Err(Error::AnchorUnderflow(d));
        }
        Ok(KernelSpec::Palm { n, anchor })
    }
}

/// Kahan accumulator for complex sums.
#[derive(Clone, Copy)]
struct Compensated<T> {
    sum: Complex<T>,
    err: Complex<T>,
}

impl<T: Real> Compensated<T> {
    fn new() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { sum: z, err: z }
    }

    fn add(&mut self, x: Complex<T>) {
        let y = x - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `K_n(z, z) = Q(n, |z|^2) / pi`.
pub fn finite_diagonal<T: Real>(n: usize, z: ComplexPoint<T>) -> T {
    ln_gamma_pq_int(n, z.norm_sqr()).1.exp() / T::PI()
}

/// `pi K_n(z, w)` as `mantissa * e^scale`.
///
/// `pi K_n = e^a sum_(j<n) u^j / j!` with `a = -(|z|^2 + |w|^2)/2` and
/// `u = z conj(w)`. When `|u| < n` this is the closed form `e^(a+u)` minus
/// the series tail from `j = n` (skipped when it is below rounding); otherwise
/// the head is summed from its largest term `j = n - 1` downward.
fn finite_scaled<T: Real>(n: usize, z: ComplexPoint<T>, w: ComplexPoint<T>) -> (Complex<T>, T) {
    let zc = z.to_complex();
    let wc = w.to_complex();
    let a = -(z.norm_sqr() + w.norm_sqr()) * lit(0.5);
    let u = zc * wc.conj();
    let mu = u.norm();
    let nf: T = from_usize(n);
    let eps = T::epsilon();
    if mu == T::zero() {
        return (Complex::new(T::one(), T::zero()), a);
    }
    let lnu = Complex::new(mu.ln(), u.im.atan2(u.re));
    if mu < nf {
        let scale = a + u.re;
        let closed = Complex::new(u.im.cos(), u.im.sin());
        // |tail| <= P(Poisson(mu) >= n) e^(a + mu) <= e^(a + n + n ln(mu/n))
        let cutoff = scale + eps.ln() - lit(4.0);
        let chernoff = a + nf + nf * (mu / nf).ln();
        if chernoff < cutoff || ln_gamma_pq_int(n, mu).0 + a + mu < cutoff {
            return (closed, scale);
        }
        let first = (lnu * nf - Complex::new(ln_factorial::<T>(n), T::zero()) + Complex::new(a - scale, T::zero())).exp();
        let mut acc = Compensated::new();
        let mut t = first;
        let mut j = n;
        loop {
            acc.add(t);
            j += 1;
            t = t * u / from_usize::<T>(j);
            if t.norm() <= eps * acc.sum.norm() * lit(0.01) || j > n + 100_000 {
                break;
            }
        }
        (closed - acc.sum, scale)
    } else {
        let top = n - 1;
        let lead = lnu * from_usize::<T>(top) - Complex::new(ln_factorial::<T>(top), T::zero());
        let scale = a + lead.re;
        let mut acc = Compensated::new();
        let mut t = Complex::new(lead.im.cos(), lead.im.sin());
        let mut j = top;
        loop {
            acc.add(t);
            if j == 0 {
                break;
            }
            t = t * from_usize::<T>(j) / u;
            j -= 1;
            if t.norm() <= eps * acc.sum.norm() * lit(0.01) {
                break;
            }
        }
        (acc.sum, scale)
    }
}

/// `K_n(z, w)`.
pub fn finite_kernel<T: Real>(n: usize, z: ComplexPoint<T>, w: ComplexPoint<T>) -> Complex<T> {
    let (m, s) = finite_scaled(n, z, w);
    m * (s.exp() / T::PI())
}

/// `ln |K_n(z, w)|`, finite even where the value itself underflows.
pub fn ln_abs_finite_kernel<T: Real>(n: usize, z: ComplexPoint<T>, w: ComplexPoint<T>) -> T {
    let (m, s) = finite_scaled(n, z, w);
    m.norm().ln() + s - T::PI().ln()
}

/// Infinite Ginibre kernel.
pub fn infinite_kernel<T: Real>(z: ComplexPoint<T>, w: ComplexPoint<T>) -> Complex<T> {
    let u = z.to_complex() * w.to_complex().conj();
    let e = -(z.norm_sqr() + w.norm_sqr()) * lit(0.5) + u.re;
    Complex::new(u.im.cos(), u.im.sin()) * (e.exp() / T::PI())
}

/// Evaluates the kernel selected by `spec` at `(z, w)`.
pub fn eval_kernel<T: Real>(spec: &KernelSpec<T>, z: ComplexPoint<T>, w: ComplexPoint<T>) -> Complex<T> {
    match *spec {
        KernelSpec::FiniteGinibre { n } => {
            if z == w {
                Complex::new(finite_diagonal(n, z), T::zero())
            } else {
                finite_kernel(n, z, w)
            }
        }
        KernelSpec::InfiniteGinibre => infinite_kernel(z, w),
        KernelSpec::Palm { n, anchor } => {
            let base = KernelSpec::FiniteGinibre { n };
            let kzw = eval_kernel(&base, z, w);
            let kzx = eval_kernel(&base, z, anchor);
            let kxw = eval_kernel(&base, anchor, w);
            let kxx = finite_diagonal(n, anchor);
            kzw - kzx * kxw / kxx
        }
    }
}

/// One-point function `K(z, z)`.
pub fn rho_1<T: Real>(spec: &KernelSpec<T>, z: ComplexPoint<T>) -> T {
    eval_kernel(spec, z, z).re
}

/// Kernel matrix `[K(p_i, p_j)]`, row-major.
pub fn kernel_matrix<T: Real>(spec: &KernelSpec<T>, points: &[ComplexPoint<T>]) -> Vec<Complex<T>> {
    let m = points.len();
    let mut a = vec![Complex::new(T::zero(), T::zero()); m * m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = if j < i { a[j * m + i].conj() } else { eval_kernel(spec, points[i], points[j]) };
        }
    }
    for i in 0..m {
        a[i * m + i] = Complex::new(a[i * m + i].re, T::zero());
    }
    a
}

/// m-point correlation function `det[K(p_i, p_j)]`.
///
/// Small negative determinants (above `-1e-10` times the product of the
/// diagonal) are rounding and clamp to zero; anything more negative is
/// reported as a numerical failure.
pub fn rho_m<T: Real>(spec: &KernelSpec<T>, points: &[ComplexPoint<T>]) -> Result<T> {
    let m = points.len();
    if m == 0 {
        return Err(Error::Domain("correlation function needs at least one point".into()));
    }
    if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::Domain("non-finite point".into()));
    }
    let a = kernel_matrix(spec, points);
    let scale = (0..m).fold(T::one(), |acc, i| acc * a[i * m + i].re.abs());
    let det = det_complex(m, a).re;
    if det >= T::zero() {
        Ok(det)
    } else if det >= -lit::<T>(1e-10) * scale.max(T::min_positive_value()) {
        Ok(T::zero())
    } else {
        Err(Error::Numeric(format!("negative correlation determinant {det} (scale {scale})")))
    }
}

/// `log|K_n(sqrt(n) z, sqrt(n) w)| - (log(1/pi) - n|z - w|^2/2)`.
pub fn decay_margin<T: Real>(n: usize, z: ComplexPoint<T>, w: ComplexPoint<T>) -> T {
    let s = from_usize::<T>(n).sqrt();
    let lhs = ln_abs_finite_kernel(n, z.scale(s), w.scale(s));
    let rhs = -T::PI().ln() - from_usize::<T>(n) * z.dist_sqr(w) * lit(0.5);
    lhs - rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(a: f64, b: f64) -> ComplexPoint<f64> {
        ComplexPoint::new(a, b).unwrap()
    }

    #[test]
    fn phi_reference_values() {
        assert!((eval_phi(1, p(0.0, 0.0)).unwrap().value.re - 1.0 / PI.sqrt()).abs() < 1e-16);
        assert_eq!(eval_phi(2, p(0.0, 0.0)).unwrap().value.norm(), 0.0);
        let v = eval_phi(3, p(2.0, 0.0)).unwrap().value;
        let expect = 4.0 * (-2.0f64).exp() / (2.0 * PI).sqrt();
        assert!(((v.re - expect) / expect).abs() < 1e-14 && v.im.abs() < 1e-16);
        assert!(eval_phi::<f64>(0, p(0.0, 0.0)).is_err());
    }

    #[test]
    fn phi_far_mode_is_flagged() {
        let v = eval_phi(1, p(40.0, 0.0)).unwrap();
        assert!(v.underflow);
        let big = eval_phi(1601, p(40.0, 0.0)).unwrap();
        assert!(!big.underflow && big.value.norm() > 1e-3);
    }

    #[test]
    fn finite_kernel_values() {
        for n in [1usize, 2, 7, 64] {
            let k = eval_kernel(&KernelSpec::finite(n).unwrap(), p(0.0, 0.0), p(0.0, 0.0));
            assert!((k.re - 1.0 / PI).abs() < 1e-16);
        }
        let k = eval_kernel(&KernelSpec::finite(2).unwrap(), p(1.0, 0.0), p(0.0, 0.0));
        assert!((k.re - (-0.5f64).exp() / PI).abs() < 1e-16);
    }

    #[test]
    fn kernel_matches_mode_sum() {
        let z = p(1.3, -0.4);
        let w = p(-0.2, 2.1);
        for n in [1usize, 3, 10, 25] {
            let fz = eval_phi_all(n, z);
            let fw = eval_phi_all(n, w);
            let direct: Complex<f64> = fz.iter().zip(&fw).map(|(a, b)| a * b.conj()).sum();
            let k = finite_kernel(n, z, w);
            assert!((k - direct).norm() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn head_sum_branch_matches_mode_sum() {
        // |u| >= n takes the downward head sum
        let z = p(3.0, 1.0);
        let w = p(2.5, 0.5);
        let n = 4;
        let fz = eval_phi_all(n, z);
        let fw = eval_phi_all(n, w);
        let direct: Complex<f64> = fz.iter().zip(&fw).map(|(a, b)| a * b.conj()).sum();
        assert!((finite_kernel(n, z, w) - direct).norm() < 1e-16);
    }

    #[test]
    fn palm_vanishes_at_anchor() {
        let x = p(0.7, -0.3);
        let spec = KernelSpec::palm(10, x).unwrap();
        assert!(eval_kernel(&spec, x, p(1.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn rho_examples() {
        let spec = KernelSpec::finite(2).unwrap();
        let v = rho_m(&spec, &[p(0.0, 0.0), p(1.0, 0.0)]).unwrap();
        assert!((v - (-1.0f64).exp() / (PI * PI)).abs() < 1e-15);
        let z = p(0.4, 0.1);
        assert_eq!(rho_m(&spec, &[z, z]).unwrap(), 0.0);
    }

    #[test]
    fn decay_margin_at_origin() {
        assert!(decay_margin(50, p(0.0, 0.0), p(0.0, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn f32_kernel() {
        let k = finite_kernel(2, ComplexPoint::<f32>::real(1.0), ComplexPoint::origin());
        assert!((k.re - (-0.5f32).exp() / std::f32::consts::PI).abs() < 1e-6);
    }
}
