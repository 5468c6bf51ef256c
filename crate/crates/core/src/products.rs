//! Generator sets, words over the index set, overflow-safe product
//! evaluation and word enumeration.
//!
//! Products are composed left to right: the word `(i1, ..., in)` names
//! `S_i1 * ... * S_in`, which acts on row vectors as `x -> x S_i1 ... S_in`.
//! Indices are 0-based in memory and printed 1-based.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::eigen::{self, Spectrum};
use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix, NormKind};

/// A bounded (finite) family `{S_k}` of square matrices of one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixSet {
    name: Option<String>,
    dim: usize,
    field: Field,
    labels: Vec<String>,
    generators: Vec<Matrix>,
}

impl MatrixSet {
    /// Builds a set from labelled generators. The set's field is complex if
    /// any generator is complex.
    pub fn new(generators: Vec<(String, Matrix)>) -> Result<Self> {
        if generators.len() < 2 {
            return Err(Error::TooFewGenerators(generators.len()));
        }
        let dim = generators[0].1.dim();
        let field = generators
            .iter()
            .fold(Field::Real, |f, (_, m)| f.join(m.field()));
        let mut labels = Vec::with_capacity(generators.len());
        let mut mats = Vec::with_capacity(generators.len());
        for (index, (label, m)) in generators.into_iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::Incompatible {
                    index,
                    reason: format!("dimension {} != {}", m.dim(), dim),
                });
            }
            labels.push(label);
            mats.push(if field == Field::Complex { m.to_complex() } else { m });
        }
        Ok(MatrixSet {
            name: None,
            dim,
            field,
            labels,
            generators: mats,
        })
    }

    /// Generators labelled `S1, S2, ...`.
    pub fn from_matrices(generators: Vec<Matrix>) -> Result<Self> {
        Self::new(
            generators
                .into_iter()
                .enumerate()
                .map(|(i, m)| (format!("S{}", i + 1), m))
                .collect(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `card(K)`.
    pub fn card(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator(&self, k: usize) -> &Matrix {
        &self.generators[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `c * S` for every generator.
    pub fn scaled(&self, c: f64) -> MatrixSet {
        MatrixSet {
            name: self.name.clone(),
            dim: self.dim,
            field: self.field,
            labels: self.labels.clone(),
            generators: self.generators.iter().map(|g| g.scale(c)).collect(),
        }
    }

    pub fn check_word(&self, word: &Word) -> Result<()> {
        match word.0.iter().find(|&&i| i >= self.card()) {
            Some(&index) => Err(Error::WordIndex {
                index,
                card: self.card(),
            }),
            None => Ok(()),
        }
    }

    /// `max_k rho(S_k)`.
    pub fn max_generator_radius(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for g in &self.generators {
            best = best.max(eigen::spectral_radius(g)?);
        }
        Ok(best)
    }
}

/// A nonempty index sequence `(i1, ..., in)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word(indices))
    }

    /// Word from 1-based indices as written in files and on the command line.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0) {
            return Err(Error::WordIndex { index: bad, card: 0 });
        }
        Self::new(indices.iter().map(|&i| i - 1).collect())
    }

    /// `(k)` repeated `n` times.
    pub fn power(k: usize, n: usize) -> Self {
        assert!(n >= 1);
        Word(vec![k; n])
    }

    /// The word repeated `times` times.
    pub fn repeat(&self, times: usize) -> Self {
        assert!(times >= 1);
        Word(self.0.repeat(times))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i + 1).collect()
    }

    /// Cyclic shift by `r` positions to the left.
    pub fn rotation(&self, r: usize) -> Word {
        let n = self.0.len();
        let r = r % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[r..]);
        v.extend_from_slice(&self.0[..r]);
        Word(v)
    }

    /// True if this word is the lexicographically least of its rotations.
    pub fn is_necklace(&self) -> bool {
        is_necklace(&self.0)
    }

    /// Least rotation of this word.
    pub fn canonical(&self) -> Word {
        (1..self.len())
            .map(|r| self.rotation(r))
            .fold(self.clone(), |best, w| if w < best { w } else { best })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses comma-separated 1-based indices, e.g. `1,2,2`.
    fn from_str(s: &str) -> Result<Self> {
        let idx = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Domain(format!("bad word index `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::from_one_based(&idx)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|i| i + 1))
    }
}

/// Exact positive magnitude `frac * 2^exp` with `frac` in `[0.5, 1)`, or zero.
///
/// Ordering is exact, so values from differently rescaled products compare
/// consistently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Magnitude {
    frac: f64,
    exp: i64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude {
        frac: 0.0,
        exp: i64::MIN,
    };

    /// `x * 2^exp` for a finite `x >= 0`.
    pub fn new(x: f64, exp: i64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "magnitude of {x}");
        if x == 0.0 {
            return Self::ZERO;
        }
        let (frac, e) = frexp(x);
        Magnitude {
            frac,
            exp: exp + e as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.frac == 0.0
    }

    /// Natural logarithm (`-inf` for zero).
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.frac.ln() + self.exp as f64 * std::f64::consts::LN_2
        }
    }

    /// The value as a plain float (may overflow to infinity or underflow).
    pub fn value(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            ldexp(self.frac, self.exp)
        }
    }

    /// `value^(1/n)`.
    pub fn root(&self, n: usize) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            (self.ln() / n as f64).exp()
        }
    }
}

impl Eq for Magnitude {}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .exp
                .cmp(&other.exp)
                .then(self.frac.total_cmp(&other.frac)),
        }
    }
}

/// Splits finite positive `x` into `(f, e)` with `x = f * 2^e`, `f` in `[0.5, 1)`.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    if exp_bits == 0 {
        // subnormal: scale into the normal range first
        let (f, e) = frexp(x * 2f64.powi(64));
        return (f, e - 64);
    }
    let e = exp_bits - 1022;
    let f = f64::from_bits((bits & !(0x7ff << 52)) | (1022u64 << 52));
    (f, e)
}

fn ldexp(f: f64, e: i64) -> f64 {
    let e = e.clamp(-2200, 2200) as i32;
    if e > 1000 {
        f * 2f64.powi(1000) * 2f64.powi(e - 1000)
    } else if e < -1000 {
        f * 2f64.powi(-1000) * 2f64.powi(e + 1000)
    } else {
        f * 2f64.powi(e)
    }
}

/// A matrix represented as `base * 2^exp2`.
///
/// Nonzero bases are kept with inf-norm in `[1, 2d)`; rescaling multiplies
/// by powers of two only, so it never perturbs the mantissas.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    base: Matrix,
    exp2: i64,
}

impl ScaledMatrix {
    pub fn new(base: Matrix) -> Self {
        let mut s = ScaledMatrix { base, exp2: 0 };
        s.rescale();
        s
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    /// Power-of-two exponent of the scale.
    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    /// Natural log of the scale factor.
    pub fn log_scale(&self) -> f64 {
        self.exp2 as f64 * std::f64::consts::LN_2
    }

    fn rescale(&mut self) {
        let norm = self.base.norm(NormKind::Inf);
        if norm == 0.0 {
            self.exp2 = 0;
            return;
        }
        let upper = 2.0 * self.base.dim() as f64;
        if (1.0..upper).contains(&norm) {
            return;
        }
        // bring the norm into [1, 2)
        let (_, e) = frexp(norm);
        let shift = (e - 1) as i64;
        self.base = self.base.scale(ldexp(1.0, -shift));
        self.exp2 += shift;
    }

    /// `self * g`, rescaled.
    pub fn mul_matrix(&self, g: &Matrix) -> ScaledMatrix {
        let mut out = ScaledMatrix {
            base: self.base.mul(g),
            exp2: self.exp2,
        };
        out.rescale();
        out
    }

    /// The represented matrix as plain floats (may overflow).
    pub fn to_matrix(&self) -> Matrix {
        self.base.scale(ldexp(1.0, self.exp2))
    }

    /// The represented matrix times `exp(log_factor)`, computed in log space.
    pub fn scaled_matrix(&self, log_factor: f64) -> Matrix {
        let ln = self.log_scale() + log_factor;
        self.base.scale(ln.exp())
    }

    pub fn norm(&self, kind: NormKind) -> Magnitude {
        Magnitude::new(self.base.norm(kind), self.exp2)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eigen::eigenvalues(&self.base)
    }

    pub fn spectral_radius(&self) -> Result<Magnitude> {
        Ok(Magnitude::new(eigen::spectral_radius(&self.base)?, self.exp2))
    }

    /// `ln |det|` of the represented matrix.
    pub fn ln_abs_det(&self) -> f64 {
        let det = self.base.determinant().norm();
        det.ln() + (self.exp2 * self.base.dim() as i64) as f64 * std::f64::consts::LN_2
    }
}

/// `S_i1 * ... * S_in` as a [`ScaledMatrix`].
pub fn evaluate_word(set: &MatrixSet, word: &Word) -> Result<ScaledMatrix> {
    set.check_word(word)?;
    Ok(evaluate_unchecked(set, word.indices()))
}

pub(crate) fn evaluate_unchecked(set: &MatrixSet, indices: &[usize]) -> ScaledMatrix {
    let mut acc = ScaledMatrix::new(set.generator(indices[0]).clone());
    for &i in &indices[1..] {
        acc = acc.mul_matrix(set.generator(i));
    }
    acc
}

/// Naive left-to-right product without rescaling.
pub fn naive_product(set: &MatrixSet, word: &Word) -> Matrix {
    let idx = word.indices();
    idx[1..]
        .iter()
        .fold(set.generator(idx[0]).clone(), |acc, &i| acc.mul(set.generator(i)))
}

/// All `k^n` words of length `n` in lexicographic order.
///
/// The iterator is restartable: [`WordIter::starting_at`] resumes from any
/// word, which lets callers split the word space into disjoint ranges.
#[derive(Clone, Debug)]
pub struct WordIter {
    k: usize,
    current: Option<Vec<usize>>,
    end: Option<Vec<usize>>,
}

impl WordIter {
    pub fn new(k: usize, n: usize) -> Self {
        assert!(k >= 1 && n >= 1);
        WordIter {
            k,
            current: Some(vec![0; n]),
            end: None,
        }
    }

    pub fn starting_at(k: usize, start: &Word) -> Self {
        WordIter {
            k,
            current: Some(start.0.clone()),
            end: None,
        }
    }

    /// All words extending `prefix` to length `n`.
    pub fn with_prefix(k: usize, n: usize, prefix: &[usize]) -> Self {
        assert!(prefix.len() <= n);
        let mut start = prefix.to_vec();
        start.resize(n, 0);
        let mut end = prefix.to_vec();
        end.resize(n, k - 1);
        WordIter {
            k,
            current: Some(start),
            end: Some(end),
        }
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        let out = Word(cur.clone());
        if self.end.as_ref() != Some(&cur) {
            let mut next = cur;
            let mut i = next.len();
            while i > 0 {
                i -= 1;
                if next[i] + 1 < self.k {
                    next[i] += 1;
                    self.current = Some(next);
                    break;
                }
                next[i] = 0;
            }
        }
        Some(out)
    }
}

pub fn enumerate_words(k: usize, n: usize) -> WordIter {
    WordIter::new(k, n)
}

fn is_necklace(w: &[usize]) -> bool {
    // Duval-style check: w is a necklace iff it is a prenecklace whose
    // Lyndon-prefix period divides n.
    let n = w.len();
    let mut p = 1;
    for i in 1..n {
        match w[i].cmp(&w[i - p]) {
            Ordering::Less => return false,
            Ordering::Greater => p = i + 1,
            Ordering::Equal => {}
        }
    }
    n.is_multiple_of(p)
}

/// Necklace representatives (least rotations) of length `n` over `k`
/// symbols, in lexicographic order, via the FKM algorithm.
#[derive(Clone, Debug)]
pub struct Necklaces {
    k: usize,
    word: Vec<usize>,
    done: bool,
}

impl Necklaces {
    pub fn new(k: usize, n: usize) -> Self {
        assert!(k >= 1 && n >= 1);
        Necklaces {
            k,
            word: vec![0; n],
            done: false,
        }
    }

    /// Resumes at the first necklace `>= start` (in lexicographic order).
    pub fn starting_at(k: usize, start: &Word) -> Self {
        let mut it = Necklaces {
            k,
            word: start.0.clone(),
            done: false,
        };
        // step lexicographically until a prenecklace is reached
        while !is_prenecklace(&it.word) {
            let mut i = it.word.len();
            loop {
                if i == 0 {
                    it.done = true;
                    return it;
                }
                i -= 1;
                if it.word[i] + 1 < k {
                    it.word[i] += 1;
                    break;
                }
                it.word[i] = 0;
            }
        }
        it
    }

    /// FKM successor of the current prenecklace.
    fn advance(&mut self) {
        let n = self.word.len();
        let mut i = n;
        while i > 0 && self.word[i - 1] == self.k - 1 {
            i -= 1;
        }
        if i == 0 {
            self.done = true;
            return;
        }
        self.word[i - 1] += 1;
        for j in i..n {
            self.word[j] = self.word[j - i];
        }
    }
}

fn is_prenecklace(w: &[usize]) -> bool {
    let mut p = 1;
    for i in 1..w.len() {
        match w[i].cmp(&w[i - p]) {
            Ordering::Less => return false,
            Ordering::Greater => p = i + 1,
            Ordering::Equal => {}
        }
    }
    true
}

impl Iterator for Necklaces {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        while !self.done {
            let candidate = is_necklace(&self.word).then(|| Word(self.word.clone()));
            self.advance();
            if candidate.is_some() {
                return candidate;
            }
        }
        None
    }
}

pub fn necklace_representatives(k: usize, n: usize) -> Necklaces {
    Necklaces::new(k, n)
}

/// Number of necklaces of length `n` over `k` symbols,
/// `(1/n) sum_{d | n} phi(d) k^(n/d)`.
pub fn necklace_count(k: usize, n: usize) -> u128 {
    let mut total: u128 = 0;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            total += totient(d) as u128 * (k as u128).pow((n / d) as u32);
        }
    }
    total / n as u128
}

fn totient(n: usize) -> usize {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// `k^n`, saturating.
pub fn word_count(k: usize, n: usize) -> u128 {
    (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}
