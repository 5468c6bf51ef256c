//! Independent reference computations on plain nested vectors: naive
//! products, characteristic polynomials by Faddeev-LeVerrier, roots by
//! Durand-Kerner, cofactor determinants and brute-force word searches.

#![allow(dead_code)]

use jsr_core::families::{hare_family, morris_family, random_family, scaled_rotation_family, triangular_family, ALPHA_STAR};
use jsr_core::{Matrix, MatrixSet, NormKind, C64};

pub type Dense = Vec<Vec<C64>>;

pub fn dense(m: &Matrix) -> Dense {
    (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

/// Product `S_w1 * ... * S_wn` by straightforward multiplication.
pub fn word_product(set: &MatrixSet, word: &[usize]) -> Dense {
    word.iter()
        .fold(identity(set.dim()), |acc, &i| mul(&acc, &dense(set.generator(i))))
}

/// Coefficients `c_0 = 1, c_1, ..., c_n` of `det(zI - A)`.
pub fn charpoly(a: &Dense) -> Vec<C64> {
    let n = a.len();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    for k in 1..=n {
        // M_k = A M_(k-1) + c_(k-1) I
        let mut next = mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[k - 1];
        }
        m = next;
        let am = mul(a, &m);
        let tr: C64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

/// All roots of the monic polynomial `coeffs[0] z^n + ... + coeffs[n]`.
pub fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let bound = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    let eval = |x: C64| coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c);
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = C64::new(1e-300, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * bound {
            break;
        }
    }
    z
}

pub fn oracle_eigenvalues(a: &Dense) -> Vec<C64> {
    durand_kerner(&charpoly(a))
}

pub fn oracle_rho(a: &Dense) -> f64 {
    oracle_eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn oracle_norm(a: &Dense, kind: NormKind) -> f64 {
    let n = a.len();
    match kind {
        NormKind::Inf => (0..n).map(|i| a[i].iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        NormKind::One => (0..n).map(|j| (0..n).map(|i| a[i][j].norm()).sum::<f64>()).fold(0.0, f64::max),
        NormKind::Two => {
            // Rayleigh quotient of power iteration on A^H A; accurate even
            // when the top eigenvalue is (nearly) repeated
            let ah: Dense = (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect();
            let g = mul(&ah, a);
            let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.37 * i as f64, 0.11 * i as f64)).collect();
            let mut lambda = 0.0;
            for _ in 0..3000 {
                let y: Vec<C64> = (0..n).map(|i| (0..n).map(|j| g[i][j] * x[j]).sum()).collect();
                let xx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
                lambda = x.iter().zip(&y).map(|(u, v)| (u.conj() * v).re).sum::<f64>() / xx;
                let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if ny == 0.0 {
                    return 0.0;
                }
                x = y.iter().map(|z| z / ny).collect();
            }
            lambda.sqrt()
        }
    }
}

/// Laplace expansion along the first row.
pub fn cofactor_det(a: &Dense) -> C64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Dense = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            a[0][j] * cofactor_det(&minor) * sign
        })
        .sum()
}

/// Every word of length `n` over `k` letters, lexicographically.
pub fn all_words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |i| {
                    let mut v = w.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

/// `(max rho, first maximizing word)` over all words of length `n`, ties
/// resolved within 1e-9 towards the lexicographically least word.
pub fn brute_rho_n(set: &MatrixSet, n: usize) -> (f64, Vec<usize>) {
    let vals: Vec<(f64, Vec<usize>)> = all_words(set.card(), n)
        .into_iter()
        .map(|w| (oracle_rho(&word_product(set, &w)), w))
        .collect();
    let best = vals.iter().map(|v| v.0).fold(0.0, f64::max);
    vals.into_iter().find(|v| v.0 >= best * (1.0 - 1e-9)).unwrap()
}

pub fn brute_rho_hat_n(set: &MatrixSet, n: usize, kind: NormKind) -> f64 {
    all_words(set.card(), n)
        .into_iter()
        .map(|w| oracle_norm(&word_product(set, &w), kind))
        .fold(0.0, f64::max)
}

pub fn golden_conjugate() -> f64 {
    2.0 - (1.0 + 5f64.sqrt()) / 2.0
}

/// The named sets used across property and acceptance checks.
pub fn named_corpus() -> Vec<MatrixSet> {
    vec![
        hare_family(0.5).unwrap(),
        hare_family(ALPHA_STAR).unwrap(),
        morris_family(0.5).unwrap(),
        scaled_rotation_family(&[0.9, 0.8], &[1.0, 2f64.sqrt()]).unwrap(),
        triangular_family(&[vec![0.9, -0.4], vec![0.3, 0.7]], 1).unwrap(),
    ]
}

pub fn random_corpus() -> Vec<MatrixSet> {
    (0..10).map(|s| random_family(s, 2, 2, 1.0).unwrap()).collect()
}

pub fn corpus() -> Vec<MatrixSet> {
    let mut c = named_corpus();
    c.extend(random_corpus());
    c
}
