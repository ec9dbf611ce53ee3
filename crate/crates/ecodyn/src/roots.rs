//! Real polynomial roots via companion-matrix eigenvalues, and a closed-form
//! cubic solver for 3x3 characteristic polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A root is accepted as real when its imaginary part satisfies
/// `|im| <= TOL_IMAG * (1 + |re|)`.
pub const TOL_IMAG: f64 = 1e-9;
/// Relative clustering tolerance for reporting repeated roots once.
pub const TOL_ROOT: f64 = 1e-8;

const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Dense real polynomial, coefficients ordered highest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial of degree `coeffs.len() - 1`; the leading
    /// coefficient must be nonzero and every coefficient finite.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Validation(format!(
                "polynomial needs degree >= 1, got {} coefficients",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("polynomial coefficients must be finite".into()));
        }
        if coeffs[0] == 0.0 {
            return Err(Error::Validation("leading polynomial coefficient is zero".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients, highest degree first.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first two derivatives at `z` in one Horner pass.
    fn eval_with_derivatives(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut p = Complex64::ZERO;
        let mut dp = Complex64::ZERO;
        let mut ddp = Complex64::ZERO;
        for &c in &self.coeffs {
            ddp = ddp * z + dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, ddp * 2.0)
    }

    /// All complex roots from the companion-matrix QR iteration, polished by
    /// a few Newton steps on the polynomial itself, sorted by `(re, im)`.
    pub fn complex_roots(&self) -> Result<Vec<Complex64>> {
        // monic normalization b_i = a_i / a_0
        let lead = self.coeffs[0];
        let monic: Vec<f64> = self.coeffs[1..].iter().map(|c| c / lead).collect();
        let mut h = companion_matrix(&monic);
        balance(&mut h);
        let mut roots = hessenberg_qr_eigenvalues(&mut h)?;
        for r in &mut roots {
            *r = self.polish(*r);
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::EigenFailure);
            }
        }
        roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(roots)
    }

    /// Distinct real roots in ascending order.
    ///
    /// A root counts as real when `|im| <= TOL_IMAG * (1 + |re|)`, or when
    /// its real projection is a backward-stable real root (the residual
    /// there sits inside the floating-point evaluation noise, which is where
    /// the conjugate pair split off a multiple real root lands). Roots
    /// within `TOL_ROOT` relative distance are reported once.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let mut reals: Vec<f64> = self
            .complex_roots()?
            .into_iter()
            .filter(|z| {
                z.im.abs() <= TOL_IMAG * (1.0 + z.re.abs())
                    || self.eval(z.re).abs() <= 4.0 * f64::EPSILON * self.eval_magnitude(z.re)
            })
            .map(|z| z.re)
            .collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        reals.dedup_by(|b, a| (*b - *a).abs() <= TOL_ROOT * (1.0 + b.abs().max(a.abs())));
        Ok(reals)
    }

    /// Horner pass over absolute values: scales the evaluation noise floor.
    fn eval_magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    /// A few polish iterations by Schroeder's method (quadratic even at
    /// multiple roots), falling back to Newton when its denominator
    /// degenerates; keeps the polish only while the residual shrinks.
    fn polish(&self, mut z: Complex64) -> Complex64 {
        let mut best = z;
        let mut best_res = self.eval_complex(z).norm();
        for _ in 0..4 {
            let (p, dp, ddp) = self.eval_with_derivatives(z);
            let schroeder_den = dp * dp - p * ddp;
            let step = if schroeder_den.norm() > f64::EPSILON * dp.norm_sqr().max(p.norm()) {
                p * dp / schroeder_den
            } else if dp.norm() > 0.0 {
                p / dp
            } else {
                break;
            };
            z -= step;
            let res = self.eval_complex(z).norm();
            if res < best_res {
                best = z;
                best_res = res;
            } else {
                break;
            }
        }
        best
    }
}

/// Upper-Hessenberg companion matrix of the monic polynomial
/// `x^n + b[0] x^(n-1) + ... + b[n-1]`.
fn companion_matrix(b: &[f64]) -> Vec<Vec<Complex64>> {
    let n = b.len();
    let mut h = vec![vec![Complex64::ZERO; n]; n];
    for (j, &bj) in b.iter().enumerate() {
        h[0][j] = Complex64::new(-bj, 0.0);
    }
    for i in 1..n {
        h[i][i - 1] = Complex64::ONE;
    }
    h
}

/// Parlett-Reinsch balancing (radix-2 diagonal similarity); reduces the norm
/// spread so the QR iteration sees a well-scaled matrix.
#[allow(clippy::needless_range_loop)]
fn balance(h: &mut [Vec<Complex64>]) {
    let n = h.len();
    for _ in 0..16 {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| h[j][i].norm()).sum();
            let mut r: f64 = (0..n).filter(|&j| j != i).map(|j| h[i][j].norm()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 4.0;
                r /= 4.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 4.0;
                r *= 4.0;
                f /= 2.0;
            }
            if c + r < 0.95 * s {
                converged = false;
                for j in 0..n {
                    h[i][j] /= f;
                }
                for j in 0..n {
                    h[j][i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Shifted QR iteration with deflation on a complex upper-Hessenberg matrix.
#[allow(clippy::needless_range_loop)]
fn hessenberg_qr_eigenvalues(h: &mut [Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut sweeps_in_block = 0usize;

    while hi > 0 {
        // zero out negligible subdiagonals, then deflate trailing blocks
        for k in 1..hi {
            let tol = f64::EPSILON * (h[k - 1][k - 1].norm() + h[k][k].norm());
            if h[k][k - 1].norm() <= tol {
                h[k][k - 1] = Complex64::ZERO;
            }
        }
        if hi == 1 {
            eigs.push(h[0][0]);
            hi = 0;
            continue;
        }
        if h[hi - 1][hi - 2] == Complex64::ZERO {
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            sweeps_in_block = 0;
            continue;
        }
        if hi == 2 || h[hi - 2][hi - 3] == Complex64::ZERO {
            let (l1, l2) = eigenvalues_2x2(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            sweeps_in_block = 0;
            continue;
        }

        sweeps_in_block += 1;
        if sweeps_in_block > MAX_QR_SWEEPS_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                sweeps: sweeps_in_block,
            });
        }

        // active window [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 && h[lo][lo - 1] != Complex64::ZERO {
            lo -= 1;
        }

        // Wilkinson shift from the trailing 2x2; occasional ad-hoc shift
        // breaks symmetry if the iteration stalls.
        let shift = if sweeps_in_block.is_multiple_of(12) {
            h[hi - 1][hi - 1] + Complex64::new(1.5 * h[hi - 1][hi - 2].norm(), 0.0)
        } else {
            let (l1, l2) = eigenvalues_2x2(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            );
            let d = h[hi - 1][hi - 1];
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        qr_step(h, lo, hi, shift);
    }

    Ok(eigs)
}

/// One explicit shifted QR step on the window `[lo, hi)` via Givens rotations.
#[allow(clippy::needless_range_loop)]
fn qr_step(h: &mut [Vec<Complex64>], lo: usize, hi: usize, shift: Complex64) {
    for i in lo..hi {
        h[i][i] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let a = h[k][k];
        let b = h[k + 1][k];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::ONE, Complex64::ZERO)
        } else {
            (a / r, b / r)
        };
        rotations.push((c, s));
        for j in k..hi {
            let t1 = h[k][j];
            let t2 = h[k + 1][j];
            h[k][j] = c.conj() * t1 + s.conj() * t2;
            h[k + 1][j] = -s * t1 + c * t2;
        }
    }
    for (k, &(c, s)) in (lo..hi - 1).zip(rotations.iter()) {
        let top = (k + 2).min(hi - 1);
        for i in lo..=top {
            let t1 = h[i][k];
            let t2 = h[i][k + 1];
            h[i][k] = c * t1 + s * t2;
            h[i][k + 1] = -s.conj() * t1 + c.conj() * t2;
        }
    }
    for i in lo..hi {
        h[i][i] += shift;
    }
}

fn eigenvalues_2x2(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    (mean + disc, mean - disc)
}

/// Roots of `lambda^3 + b lambda^2 + c lambda + d` with real coefficients,
/// solved in closed form with a discriminant branch (trigonometric form for
/// three real roots, Cardano otherwise), then polished with one Newton step.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    // depressed cubic t^3 + p t + q, lambda = t - b/3
    let offset = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let raw: [Complex64; 3] = if p == 0.0 && q == 0.0 {
        [Complex64::new(-offset, 0.0); 3]
    } else {
        let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
        if disc > 0.0 {
            // one real root; pick the cube root away from cancellation
            let s = disc.sqrt();
            let u = if q >= 0.0 {
                (-q / 2.0 - s).cbrt()
            } else {
                (-q / 2.0 + s).cbrt()
            };
            let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
            let t_real = u + v;
            let re = -t_real / 2.0;
            let im = (3.0f64.sqrt() / 2.0) * (u - v);
            [
                Complex64::new(t_real - offset, 0.0),
                Complex64::new(re - offset, im),
                Complex64::new(re - offset, -im),
            ]
        } else {
            // three real roots via the trigonometric form
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            let mut out = [Complex64::ZERO; 3];
            for (k, slot) in out.iter_mut().enumerate() {
                let t = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                *slot = Complex64::new(t - offset, 0.0);
            }
            out
        }
    };

    let poly = [1.0, b, c, d];
    let mut polished = raw;
    for z in &mut polished {
        *z = newton_step(&poly, *z);
    }
    polished.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    polished
}

fn newton_step(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut p = Complex64::ZERO;
    let mut dp = Complex64::ZERO;
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    if dp.norm() == 0.0 {
        return z;
    }
    let next = z - p / dp;
    let mut pn = Complex64::ZERO;
    for &c in coeffs {
        pn = pn * z + c;
    }
    // the step is kept only if it does not increase the residual
    let mut p_next = Complex64::ZERO;
    for &c in coeffs {
        p_next = p_next * next + c;
    }
    if p_next.norm() <= pn.norm() {
        next
    } else {
        z
    }
}
