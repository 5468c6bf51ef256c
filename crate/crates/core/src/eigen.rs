//! Eigenvalues of small dense matrices.
//!
//! `d = 2` uses the closed form. Larger matrices are reduced to upper
//! Hessenberg form by Householder reflections and then iterated with
//! single-shift complex QR (Wilkinson shifts, occasional exceptional shifts).
//! If QR does not converge within `100 * d^2` steps the characteristic
//! polynomial of the Hessenberg matrix is solved with Aberth's method instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// All eigenvalues with algebraic multiplicity, by decreasing modulus.
    pub eigenvalues: Vec<C64>,
    pub rho: f64,
    pub min_modulus: f64,
}

impl Spectrum {
    fn from_values(mut eigenvalues: Vec<C64>) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.norm()
                .total_cmp(&a.norm())
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        let rho = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min_modulus = eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        Spectrum {
            eigenvalues,
            rho,
            min_modulus,
        }
    }

    /// `min |lambda| / rho`, or 1 when the spectrum is `{0}`.
    pub fn peripheral_ratio(&self) -> f64 {
        if self.rho == 0.0 {
            1.0
        } else {
            (self.min_modulus / self.rho).min(1.0)
        }
    }
}

pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    let n = a.dim();
    if n == 2 {
        let (l1, l2) = eig2(a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
        return Ok(Spectrum::from_values(vec![l1, l2]));
    }
    let mut h = a.entries().to_vec();
    hessenberg(&mut h, n);
    let hess = h.clone();
    match hessenberg_qr(&mut h, n, 100 * n * n) {
        Some(values) => Ok(Spectrum::from_values(values)),
        None => polynomial_eigenvalues(&hess, n)
            .map(Spectrum::from_values)
            .ok_or_else(|| Error::NoConvergence(Box::new(a.clone()))),
    }
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.rho)
}

/// Eigenvalues of `[[a, b], [c, d]]`, larger-modulus root first computed
/// without cancellation, the other from the determinant.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let plus = half_tr + disc;
    let minus = half_tr - disc;
    let l1 = if plus.norm() >= minus.norm() { plus } else { minus };
    let det = a * d - b * c;
    let l2 = if l1 == ZERO { minus } else { det / l1 };
    (l1, l2)
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut [C64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // A <- (I - 2 v v^H) A
        for j in 0..n {
            let s: C64 = (k + 1..n).map(|i| v[i - k - 1].conj() * a[i * n + j]).sum();
            for i in k + 1..n {
                a[i * n + j] -= v[i - k - 1] * s * 2.0;
            }
        }
        // A <- A (I - 2 v v^H)
        for i in 0..n {
            let s: C64 = (k + 1..n).map(|j| a[i * n + j] * v[j - k - 1]).sum();
            for j in k + 1..n {
                a[i * n + j] -= s * v[j - k - 1].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }
    }
}

/// Shifted QR on an upper Hessenberg matrix. Returns `None` when the total
/// number of iterations exceeds `cap`.
fn hessenberg_qr(h: &mut [C64], n: usize, cap: usize) -> Option<Vec<C64>> {
    let eps = f64::EPSILON;
    let scale: f64 = h.iter().map(|z| z.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut values = vec![ZERO; n];
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut its = 0usize;
    loop {
        if hi == 0 {
            values[0] = h[0];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            let mut tst = h[(lo - 1) * n + lo - 1].norm() + h[lo * n + lo].norm();
            if tst == 0.0 {
                tst = scale;
            }
            if sub <= eps * tst {
                h[lo * n + lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[hi * n + hi];
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > cap {
            return None;
        }
        let a = h[(hi - 1) * n + hi - 1];
        let b = h[(hi - 1) * n + hi];
        let c = h[hi * n + hi - 1];
        let d = h[hi * n + hi];
        let shift = if its.is_multiple_of(10) {
            let extra = if hi >= 2 { h[(hi - 1) * n + hi - 2].norm() } else { 0.0 };
            d + C64::new(c.norm() + extra, 0.0)
        } else {
            let (l1, l2) = eig2(a, b, c, d);
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        qr_step(h, n, lo, hi, shift);
    }
    Some(values)
}

/// One implicit-free QR step `H - mu I = QR`, `H <- RQ + mu I` on the
/// active window `lo..=hi` using Givens rotations.
fn qr_step(h: &mut [C64], n: usize, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        h[i * n + i] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[k * n + k];
        let y = h[(k + 1) * n + k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (C64::new(1.0, 0.0), ZERO)
        } else {
            (x / r, y / r)
        };
        for j in k..=hi {
            let p = h[k * n + j];
            let q = h[(k + 1) * n + j];
            h[k * n + j] = c.conj() * p + s.conj() * q;
            h[(k + 1) * n + j] = -s * p + c * q;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for i in lo..=hi.min(k + 2) {
            let p = h[i * n + k];
            let q = h[i * n + k + 1];
            h[i * n + k] = p * c + q * s;
            h[i * n + k + 1] = -p * s.conj() + q * c.conj();
        }
    }
    for i in lo..=hi {
        h[i * n + i] += mu;
    }
}

/// Characteristic polynomial coefficients of an upper Hessenberg matrix,
/// lowest degree first, monic, via Hyman's recurrence.
fn hessenberg_charpoly(h: &[C64], n: usize) -> Vec<C64> {
    // p[k] is the characteristic polynomial of the leading k x k block.
    let mut p: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for k in 0..n {
        // (x - h_kk) p_k
        let prev = &p[k];
        let mut next = vec![ZERO; k + 2];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * h[k * n + k];
        }
        // - sum_{i<k} h_{i,k} prod_{j=i+1..=k} h_{j,j-1} p_i
        let mut sub = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            sub *= h[(i + 1) * n + i];
            let coeff = h[i * n + k] * sub;
            if coeff == ZERO {
                continue;
            }
            for (m, &c) in p[i].iter().enumerate() {
                next[m] -= coeff * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

fn polyval(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut val = ZERO;
    let mut der = ZERO;
    for &c in coeffs.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

/// Aberth iteration on a monic polynomial (coefficients lowest first).
fn aberth(coeffs: &[C64]) -> Option<Vec<C64>> {
    let n = coeffs.len() - 1;
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = polyval(coeffs, z[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff == ZERO {
                        ZERO
                    } else {
                        C64::new(1.0, 0.0) / diff
                    }
                })
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step <= 4.0 * f64::EPSILON {
            return Some(z);
        }
    }
    None
}

fn polynomial_eigenvalues(h: &[C64], n: usize) -> Option<Vec<C64>> {
    let coeffs = hessenberg_charpoly(h, n);
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return None;
    }
    aberth(&coeffs)
}
