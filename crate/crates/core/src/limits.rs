//! Numerical exploration of the limit semigroup: accumulation points of
//! `rho^(-n) S_w` for long words `w`.
//!
//! For an irreducible set without the finiteness property every such limit
//! point is singular. Conversely, finding a nonsingular limit point of an
//! irreducible set certifies the finiteness property; that is what
//! [`nonsingular_limit_certificate`] reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix, NormKind, C64};
use crate::products::{evaluate_unchecked, MatrixSet, Word};
use crate::svd;

/// Normalized products outside this inf-norm window are discarded.
pub const MIN_NORM_FILTER: f64 = 0.1;
pub const MAX_NORM_FILTER: f64 = 10.0;
/// Single-linkage radius for merging points, in the inf-norm.
pub const CLUSTER_RADIUS: f64 = 1e-4;
/// Relative singular-value cutoff for the rank of a limit point.
pub const RANK_TOL: f64 = 1e-6;

/// Tolerance for invariance of a witness subspace.
const INVARIANCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Irreducible,
    Reducible,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `d = 2`: a proper invariant subspace is a common eigenvector line.
    CommonEigenvector,
    /// The algebra generated by the set spans all `d x d` matrices.
    AlgebraSpan,
    /// Orbits of eigenvectors of random algebra elements.
    Randomized,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrreducibilityVerdict {
    pub verdict: Verdict,
    pub method: Method,
    /// Orthonormal row vectors spanning a common invariant subspace
    /// (for `x -> x S`), when one was found.
    pub witness: Option<Vec<Vec<C64>>>,
    /// Dimension of the generated algebra, when computed.
    pub algebra_dim: Option<usize>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Adds `v` to the orthonormal `basis` if it is independent of it (twice
/// re-orthogonalized Gram-Schmidt). Returns true if added.
fn extend_basis(basis: &mut Vec<Vec<C64>>, v: &[C64], tol: f64) -> bool {
    let scale = vnorm(v);
    if scale == 0.0 {
        return false;
    }
    let mut r: Vec<C64> = v.iter().map(|z| z / scale).collect();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
    }
    let n = vnorm(&r);
    if n <= tol {
        return false;
    }
    for z in &mut r {
        *z /= n;
    }
    basis.push(r);
    true
}

/// Rotates `v` so that its largest entry is real and positive, normalizes
/// it, and flushes negligible entries to zero.
fn canonical_direction(v: &[C64]) -> Vec<C64> {
    let big = v
        .iter()
        .cloned()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let phase = big / big.norm();
    let n = vnorm(v);
    v.iter()
        .map(|z| {
            let w = z / (phase * n);
            let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
            C64::new(clean(w.re), clean(w.im))
        })
        .collect()
}

fn is_scalar(a: &Matrix) -> bool {
    let d = a.dim();
    let mean: C64 = (0..d).map(|i| a.get(i, i)).sum::<C64>() / d as f64;
    a.shifted(mean).frobenius() <= 1e-12 * a.frobenius().max(f64::MIN_POSITIVE)
}

/// Left eigenvector directions (`v A = lambda v`) for each distinct
/// eigenvalue; real directions only when `real_only`.
fn left_eigen_directions(a: &Matrix, real_only: bool) -> Result<Vec<Vec<C64>>> {
    let spectrum = eigen::eigenvalues(a)?;
    let scale = spectrum.rho.max(1.0);
    let mut distinct: Vec<C64> = Vec::new();
    for &l in &spectrum.eigenvalues {
        if real_only && l.im.abs() > 1e-10 * scale {
            continue;
        }
        let l = if real_only { C64::new(l.re, 0.0) } else { l };
        if distinct.iter().all(|m| (m - l).norm() > 1e-9 * scale) {
            distinct.push(l);
        }
    }
    let at = a.transpose();
    Ok(distinct
        .into_iter()
        .map(|l| {
            let shifted = if real_only {
                at.shifted(l)
            } else {
                at.to_complex().shifted(l)
            };
            let (v, _) = svd::null_vector(&shifted);
            canonical_direction(&v)
        })
        .collect())
}

fn leading_zeros(v: &[C64]) -> usize {
    v.iter().take_while(|z| z.norm() < 1e-12).count()
}

/// Residual of `v S` against the span of the orthonormal `basis`.
fn out_of_span(basis: &[Vec<C64>], v: &[C64]) -> f64 {
    let mut r = v.to_vec();
    for b in basis {
        let c = dot(b, &r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    vnorm(&r)
}

fn is_invariant(set: &MatrixSet, basis: &[Vec<C64>]) -> bool {
    basis.iter().all(|b| {
        set.generators().iter().all(|s| {
            let image = s.left_apply(b);
            out_of_span(basis, &image) <= INVARIANCE_TOL * s.norm(NormKind::Two).max(1.0)
        })
    })
}

fn unit(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Common invariant subspace test.
///
/// `d = 2` is decided exactly (up to rounding) by a common-eigenvector
/// search, over the reals for real sets. For `d >= 3` a generated algebra of
/// full dimension `d^2` proves irreducibility; otherwise a randomized search
/// for an explicit invariant subspace is made and the verdict is
/// inconclusive if none is found. Over the reals a smaller algebra does not
/// imply reducibility.
pub fn irreducibility(set: &MatrixSet) -> Result<IrreducibilityVerdict> {
    let d = set.dim();
    let real_only = set.field() == Field::Real;
    if d == 2 {
        let Some(a) = set.generators().iter().find(|g| !is_scalar(g)) else {
            return Ok(IrreducibilityVerdict {
                verdict: Verdict::Reducible,
                method: Method::CommonEigenvector,
                witness: Some(vec![unit(2, 0)]),
                algebra_dim: None,
            });
        };
        let mut candidates = left_eigen_directions(a, real_only)?;
        candidates.sort_by_key(|v| leading_zeros(v));
        for v in candidates {
            let basis = vec![v];
            if is_invariant(set, &basis) {
                return Ok(IrreducibilityVerdict {
                    verdict: Verdict::Reducible,
                    method: Method::CommonEigenvector,
                    witness: Some(basis),
                    algebra_dim: None,
                });
            }
        }
        return Ok(IrreducibilityVerdict {
            verdict: Verdict::Irreducible,
            method: Method::CommonEigenvector,
            witness: None,
            algebra_dim: None,
        });
    }

    let algebra = algebra_basis(set);
    if algebra.len() == d * d {
        return Ok(IrreducibilityVerdict {
            verdict: Verdict::Irreducible,
            method: Method::AlgebraSpan,
            witness: None,
            algebra_dim: Some(algebra.len()),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x1ee7);
    let mut probes: Vec<Matrix> = set.generators().to_vec();
    for _ in 0..3 {
        let mut acc = Matrix::zeros(d, set.field())?;
        for b in &algebra {
            let c = if real_only {
                C64::new(rng.gen::<f64>() - 0.5, 0.0)
            } else {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            };
            acc = acc.add(&b.scale_complex(c));
        }
        probes.push(acc);
    }
    for probe in &probes {
        if is_scalar(probe) {
            continue;
        }
        for v in left_eigen_directions(probe, real_only)? {
            let mut span = Vec::new();
            for b in &algebra {
                extend_basis(&mut span, &b.left_apply(&v), 1e-9);
            }
            if span.len() < d && !span.is_empty() && is_invariant(set, &span) {
                return Ok(IrreducibilityVerdict {
                    verdict: Verdict::Reducible,
                    method: Method::Randomized,
                    witness: Some(span),
                    algebra_dim: Some(algebra.len()),
                });
            }
        }
    }
    Ok(IrreducibilityVerdict {
        verdict: Verdict::Inconclusive,
        method: Method::AlgebraSpan,
        witness: None,
        algebra_dim: Some(algebra.len()),
    })
}

/// Orthonormal (Frobenius) basis of the unital algebra generated by the set,
/// returned as matrices.
fn algebra_basis(set: &MatrixSet) -> Vec<Matrix> {
    let d = set.dim();
    let full = d * d;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut mats: Vec<Matrix> = Vec::new();
    let mut queue = vec![Matrix::identity(d, set.field()).expect("valid dim")];
    while let Some(x) = queue.pop() {
        if basis.len() == full {
            break;
        }
        if extend_basis(&mut basis, x.entries(), 1e-9) {
            let m = Matrix::from_raw(d, x.field(), basis.last().unwrap().clone());
            for s in set.generators() {
                queue.push(m.mul(s));
            }
            mats.push(m);
        }
    }
    mats
}

/// Number of singular values above `tol` times the largest; 0 for the zero
/// matrix.
pub fn rank_profile(a: &Matrix, tol: f64) -> usize {
    let s = a.singular_values();
    if s[0] == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * s[0]).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSampling {
    pub count: usize,
    pub max_len: usize,
    pub seed: u64,
    /// Words whose powers are sampled. `None` uses the depth-wise
    /// spectral-radius maximizers of a short exhaustive search.
    pub guides: Option<Vec<Word>>,
    /// Whether uniformly random words are drawn alongside guided ones.
    pub random_words: bool,
}

impl LimitSampling {
    pub fn new(count: usize, max_len: usize, seed: u64) -> Self {
        LimitSampling {
            count,
            max_len,
            seed,
            guides: None,
            random_words: true,
        }
    }

    /// Only powers of the given words, no random draws.
    pub fn guided(count: usize, max_len: usize, seed: u64, guides: Vec<Word>) -> Self {
        LimitSampling {
            count,
            max_len,
            seed,
            guides: Some(guides),
            random_words: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitPoint {
    pub cluster: usize,
    /// `rho_est^(-n) S_w` for the representative word.
    pub matrix: Matrix,
    pub word: Word,
    pub word_len: usize,
    /// Largest inf-norm distance from the representative to a member.
    pub radius: f64,
    pub abs_det: f64,
    pub rank: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitPointSet {
    pub rho_estimate: f64,
    pub points: Vec<LimitPoint>,
    pub sampling: LimitSampling,
    /// Words drawn and normalized products kept by the norm filter.
    pub drawn: usize,
    pub kept: usize,
}

/// Default normalization: the best lower bound of a short exhaustive table.
pub fn default_rho_estimate(set: &MatrixSet) -> Result<f64> {
    let depth = (1..=8)
        .take_while(|&n| crate::products::word_count(set.card(), n) <= 1 << 16)
        .last()
        .unwrap_or(1);
    Ok(bounds::bounds_table(set, depth, NormKind::Inf)?.best_lo())
}

fn default_guides(set: &MatrixSet) -> Result<Vec<Word>> {
    let depth = (1..=8)
        .take_while(|&n| crate::products::necklace_count(set.card(), n) <= 1 << 14)
        .last()
        .unwrap_or(1);
    let mut out: Vec<Word> = Vec::new();
    for n in 1..=depth {
        let w = bounds::rho_n(set, n)?.word;
        // skip words that are powers of earlier ones
        if !out.iter().any(|g| w.len() % g.len() == 0 && g.repeat(w.len() / g.len()) == w) {
            out.push(w);
        }
    }
    Ok(out)
}

fn draw_words(set: &MatrixSet, cfg: &LimitSampling, guides: &[Word]) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lo_len = cfg.max_len.div_ceil(2).max(1);
    let mut out = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let use_random = cfg.random_words && (guides.is_empty() || i % 2 == 0);
        if use_random {
            let len = rng.gen_range(lo_len..=cfg.max_len);
            let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..set.card())).collect();
            out.push(Word::new(idx).expect("nonempty"));
        } else {
            let slot = if cfg.random_words { i / 2 } else { i };
            let g = &guides[slot % guides.len()];
            let max_rep = (cfg.max_len / g.len()).max(1);
            let min_rep = cfg.max_len.div_ceil(2 * g.len()).clamp(1, max_rep);
            let reps = rng.gen_range(min_rep..=max_rep);
            out.push(g.repeat(reps));
        }
    }
    out
}

/// Samples normalized long products, filters them by norm and clusters
/// them. Deterministic for a fixed seed.
pub fn sample_limit_points(
    set: &MatrixSet,
    rho_est: f64,
    cfg: &LimitSampling,
) -> Result<LimitPointSet> {
    if !(rho_est > 0.0 && rho_est.is_finite()) {
        return Err(Error::Domain(format!("rho_est = {rho_est} must be positive")));
    }
    if cfg.max_len == 0 {
        return Err(Error::Domain("max_len must be at least 1".into()));
    }
    let guides = match &cfg.guides {
        Some(g) => {
            for w in g {
                set.check_word(w)?;
            }
            g.clone()
        }
        None => default_guides(set)?,
    };
    if guides.is_empty() && !cfg.random_words {
        return Err(Error::Domain("no guide words and random draws disabled".into()));
    }
    let words = draw_words(set, cfg, &guides);
    let ln_rho = rho_est.ln();
    let normalized: Vec<(Word, Matrix)> = words
        .into_par_iter()
        .filter_map(|w| {
            let prod = evaluate_unchecked(set, w.indices());
            let m = prod.scaled_matrix(-(w.len() as f64) * ln_rho);
            let norm = m.norm(NormKind::Inf);
            (norm.is_finite() && (MIN_NORM_FILTER..=MAX_NORM_FILTER).contains(&norm))
                .then_some((w, m))
        })
        .collect();
    let kept = normalized.len();

    // single-linkage clustering via union-find
    let mut parent: Vec<usize> = (0..kept).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..kept {
        for j in i + 1..kept {
            if normalized[i].1.distance_inf(&normalized[j].1) <= CLUSTER_RADIUS {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..kept {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    let points = groups
        .into_iter()
        .enumerate()
        .map(|(cluster, (_, members))| {
            // representative: longest word, earliest drawn among equals
            let rep = *members
                .iter()
                .max_by(|&&a, &&b| normalized[a].0.len().cmp(&normalized[b].0.len()).then(b.cmp(&a)))
                .unwrap();
            let (word, matrix) = &normalized[rep];
            let radius = members
                .iter()
                .map(|&m| matrix.distance_inf(&normalized[m].1))
                .fold(0.0, f64::max);
            LimitPoint {
                cluster,
                abs_det: matrix.determinant().norm(),
                rank: rank_profile(matrix, RANK_TOL),
                word_len: word.len(),
                word: word.clone(),
                matrix: matrix.clone(),
                radius,
                multiplicity: members.len(),
            }
        })
        .collect();
    Ok(LimitPointSet {
        rho_estimate: rho_est,
        points,
        sampling: LimitSampling {
            guides: Some(guides),
            ..cfg.clone()
        },
        drawn: cfg.count,
        kept,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCertificate {
    pub certified: bool,
    pub message: String,
    pub irreducibility: IrreducibilityVerdict,
    pub witness: Option<LimitPoint>,
    pub det_tol: f64,
}

/// Certifies the finiteness property when the set is irreducible and some
/// sampled limit point has `|det| >= det_tol`. Never claims failure of the
/// property.
pub fn nonsingular_limit_certificate(
    set: &MatrixSet,
    lps: &LimitPointSet,
    det_tol: f64,
) -> Result<LimitCertificate> {
    let verdict = irreducibility(set)?;
    let witness = lps
        .points
        .iter()
        .filter(|p| p.abs_det >= det_tol)
        .max_by(|a, b| a.abs_det.total_cmp(&b.abs_det).then(b.cluster.cmp(&a.cluster)))
        .cloned();
    let (certified, message) = match (verdict.verdict, &witness) {
        (Verdict::Irreducible, Some(w)) => (
            true,
            format!(
                "finiteness property certified (nonsingular limit point, |det| = {}, word length {})",
                w.abs_det, w.word_len
            ),
        ),
        (Verdict::Irreducible, None) => (
            false,
            format!("no certificate: every sampled limit point has |det| < {det_tol}"),
        ),
        (v, _) => (
            false,
            format!(
                "no certificate: irreducibility not established (verdict {})",
                match v {
                    Verdict::Reducible => "reducible",
                    _ => "inconclusive",
                }
            ),
        ),
    };
    Ok(LimitCertificate {
        certified,
        message,
        irreducibility: verdict,
        witness: if certified { witness } else { None },
        det_tol,
    })
}
