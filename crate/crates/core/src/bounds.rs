//! Per-depth bounds on the joint spectral radius.
//!
//! For every length `n`,
//!
//! ```text
//! rho_n^(1/n) <= rho(S) = rho_hat(S) <= rho_hat_n^(1/n)
//! ```
//!
//! where `rho_n` is the largest spectral radius and `rho_hat_n` the largest
//! induced norm over all products of length `n`. `rho_n` is searched over
//! necklace representatives only, because the spectral radius of a product
//! does not change under cyclic shifts of its word; `rho_hat_n` needs every
//! word.
//!
//! All maxima break ties towards the lexicographically least word and are
//! reduced in an order-independent way, so results do not depend on how the
//! word space is split across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::NormKind;
use crate::products::{
    evaluate_unchecked, necklace_count, word_count, Magnitude, MatrixSet, Necklaces, ScaledMatrix,
    Word,
};

/// Default cap on product evaluations per depth.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Relative slack used when comparing a bound against an incumbent, so that
/// rounding never prunes a word that attains the maximum.
const PRUNE_MARGIN: f64 = 1e-9;

/// A maximising word together with the exact maximised magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub word: Word,
    pub magnitude: Magnitude,
}

impl Extremum {
    /// The maximised quantity itself (`rho_n` or `rho_hat_n`).
    pub fn value(&self) -> f64 {
        self.magnitude.value()
    }

    /// Its `n`-th root.
    pub fn root(&self) -> f64 {
        self.magnitude.root(self.word.len())
    }

    fn beats(&self, other: &Extremum) -> bool {
        self.magnitude > other.magnitude
            || (self.magnitude == other.magnitude && self.word < other.word)
    }
}

fn pick(a: Option<Extremum>, b: Option<Extremum>) -> Option<Extremum> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn check_budget(depth: usize, needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::BudgetExceeded {
            depth,
            needed,
            budget,
        })
    } else {
        Ok(())
    }
}

fn check_depth(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("depth must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `rho_n(S)` with the default budget.
pub fn rho_n(set: &MatrixSet, n: usize) -> Result<Extremum> {
    rho_n_with_budget(set, n, DEFAULT_BUDGET)
}

/// `rho_n(S) = max over words of length n of rho(S_w)`, exact over all
/// necklace classes.
pub fn rho_n_with_budget(set: &MatrixSet, n: usize, budget: u64) -> Result<Extremum> {
    check_depth(n)?;
    check_budget(n, necklace_count(set.card(), n), budget)?;
    let best = Necklaces::new(set.card(), n)
        .par_bridge()
        .map(|word| {
            let magnitude = evaluate_unchecked(set, word.indices()).spectral_radius()?;
            Ok(Some(Extremum { word, magnitude }))
        })
        .try_reduce(|| None, |a, b| Ok(pick(a, b)))?;
    Ok(best.expect("at least one necklace"))
}

/// `rho_hat_n(S)` with the default budget.
pub fn rho_hat_n(set: &MatrixSet, n: usize, norm: NormKind) -> Result<Extremum> {
    rho_hat_n_with_budget(set, n, norm, DEFAULT_BUDGET)
}

/// `rho_hat_n(S) = max over all words of length n of |S_w|`.
pub fn rho_hat_n_with_budget(
    set: &MatrixSet,
    n: usize,
    norm: NormKind,
    budget: u64,
) -> Result<Extremum> {
    check_depth(n)?;
    check_budget(n, word_count(set.card(), n), budget)?;
    let (_, hi) = scan_depth(set, n, norm, false)?;
    Ok(hi)
}

/// `(rho_n, rho_hat_n)` in one pass over all words of length `n`.
pub(crate) fn depth_extrema(
    set: &MatrixSet,
    n: usize,
    norm: NormKind,
    budget: u64,
) -> Result<(Extremum, Extremum)> {
    check_depth(n)?;
    check_budget(n, word_count(set.card(), n), budget)?;
    let (lo, hi) = scan_depth(set, n, norm, true)?;
    Ok((lo.expect("necklaces scanned"), hi))
}

/// Prefixes used to split the words of length `n` into independent chunks.
fn partition_prefixes(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut len = 0;
    let mut count = 1usize;
    while len < n && count < 64 {
        len += 1;
        count *= k;
    }
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Default)]
struct ScanState {
    lo: Option<Extremum>,
    hi: Option<Extremum>,
}

fn scan_subtree(
    set: &MatrixSet,
    n: usize,
    norm: NormKind,
    want_lo: bool,
    prod: &ScaledMatrix,
    word: &mut Vec<usize>,
    state: &mut ScanState,
) -> Result<()> {
    if word.len() == n {
        let w = Word::new(word.clone())?;
        let norm_mag = prod.norm(norm);
        let cand = Extremum {
            word: w.clone(),
            magnitude: norm_mag,
        };
        state.hi = pick(state.hi.take(), Some(cand));
        if want_lo && w.is_necklace() {
            let cand = Extremum {
                word: w,
                magnitude: prod.spectral_radius()?,
            };
            state.lo = pick(state.lo.take(), Some(cand));
        }
        return Ok(());
    }
    for k in 0..set.card() {
        let child = prod.mul_matrix(set.generator(k));
        word.push(k);
        scan_subtree(set, n, norm, want_lo, &child, word, state)?;
        word.pop();
    }
    Ok(())
}

/// One full pass over all words of length `n`: the `rho_n` extremum (over
/// necklaces, if `want_lo`) and the `rho_hat_n` extremum.
fn scan_depth(
    set: &MatrixSet,
    n: usize,
    norm: NormKind,
    want_lo: bool,
) -> Result<(Option<Extremum>, Extremum)> {
    let parts: Vec<ScanState> = partition_prefixes(set.card(), n)
        .into_par_iter()
        .map(|prefix| {
            let mut state = ScanState::default();
            let prod = evaluate_unchecked(set, &prefix);
            let mut word = prefix;
            scan_subtree(set, n, norm, want_lo, &prod, &mut word, &mut state)?;
            Ok(state)
        })
        .collect::<Result<_>>()?;
    let mut lo = None;
    let mut hi = None;
    for p in parts {
        lo = pick(lo, p.lo);
        hi = pick(hi, p.hi);
    }
    Ok((lo, hi.expect("nonempty word space")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    /// `rho_n^(1/n)`.
    pub lo: f64,
    pub lo_word: Word,
    /// An upper bound on `rho_hat_n^(1/n)`; exact for exhaustive tables.
    pub hi: f64,
    /// Word attaining `hi`, or `None` when the bound comes from a pruned
    /// subtree.
    pub hi_word: Option<Word>,
    pub best_lo: f64,
    pub best_hi: f64,
    #[serde(skip)]
    pub lo_magnitude: Magnitude,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsTable {
    pub norm: NormKind,
    pub rows: Vec<BoundsRow>,
    /// Product nodes evaluated.
    pub nodes: u64,
    /// Depth at which a pruned search ran out of budget, if it did.
    pub exhausted_at: Option<usize>,
}

impl BoundsTable {
    fn push(&mut self, n: usize, lo: Extremum, hi_root: f64, hi_word: Option<Word>) {
        let lo_root = lo.root();
        let (best_lo, best_hi) = match self.rows.last() {
            Some(prev) => (prev.best_lo.max(lo_root), prev.best_hi.min(hi_root)),
            None => (lo_root, hi_root),
        };
        self.rows.push(BoundsRow {
            n,
            lo: lo_root,
            lo_word: lo.word,
            hi: hi_root,
            hi_word,
            best_lo,
            best_hi,
            lo_magnitude: lo.magnitude,
        });
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn best_lo(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.best_lo)
    }

    pub fn best_hi(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.best_hi)
    }

    pub fn row(&self, n: usize) -> Option<&BoundsRow> {
        self.rows.get(n.checked_sub(1)?)
    }
}

/// Exhaustive table for depths `1..=depth` with the default budget.
pub fn bounds_table(set: &MatrixSet, depth: usize, norm: NormKind) -> Result<BoundsTable> {
    bounds_table_with_budget(set, depth, norm, DEFAULT_BUDGET)
}

pub fn bounds_table_with_budget(
    set: &MatrixSet,
    depth: usize,
    norm: NormKind,
    budget: u64,
) -> Result<BoundsTable> {
    check_depth(depth)?;
    let mut table = BoundsTable {
        norm,
        rows: Vec::with_capacity(depth),
        nodes: 0,
        exhausted_at: None,
    };
    for n in 1..=depth {
        let words = word_count(set.card(), n);
        check_budget(n, words, budget)?;
        let (lo, hi) = scan_depth(set, n, norm, true)?;
        table.nodes += words as u64;
        let hi_root = hi.root();
        table.push(n, lo.expect("necklaces exist"), hi_root, Some(hi.word));
    }
    Ok(table)
}

struct Node {
    word: Vec<usize>,
    prod: ScaledMatrix,
    ln_norm: f64,
}

/// Branch-and-bound variant of [`bounds_table`] (Gripenberg-style pruning).
///
/// A prefix `p` of length `m` is dropped once, for every target depth
/// `n <= max_depth`, the submultiplicative cap `|S_p| * cap(n - m)` falls
/// below a known lower bound on `rho_n`. Every word attaining `rho_n` keeps
/// all of its prefixes, so `lo` and its word match [`rho_n`] exactly at every
/// completed depth. `hi` is the resulting upper bound on `rho_hat_n^(1/n)`,
/// including caps of pruned subtrees.
///
/// The search stops at `max_depth` or when the next level would exceed
/// `budget` evaluated nodes; in the latter case `exhausted_at` names the
/// depth that could not be completed.
pub fn refine_bounds(
    set: &MatrixSet,
    max_depth: usize,
    budget: u64,
    norm: NormKind,
) -> Result<BoundsTable> {
    check_depth(max_depth)?;
    let k = set.card();
    if budget < k as u64 {
        return Err(Error::Domain(format!(
            "budget {budget} is below card(K) = {k}"
        )));
    }
    let mut table = BoundsTable {
        norm,
        rows: Vec::new(),
        nodes: 0,
        exhausted_at: None,
    };
    // ln of an upper bound on max |S_w| over |w| = j (index j), and ln rho_j
    let mut ln_cap: Vec<f64> = vec![f64::NEG_INFINITY];
    let mut ln_rho: Vec<f64> = vec![f64::NEG_INFINITY];
    // ln of the largest pruned norm at each level
    let mut ln_pruned: Vec<f64> = vec![f64::NEG_INFINITY];

    let mut level: Vec<Node> = (0..k)
        .map(|i| {
            let prod = ScaledMatrix::new(set.generator(i).clone());
            let ln_norm = prod.norm(norm).ln();
            Node {
                word: vec![i],
                prod,
                ln_norm,
            }
        })
        .collect();
    table.nodes = k as u64;

    for m in 1..=max_depth {
        // evaluate the level
        let evals: Vec<(Option<Extremum>, Option<Extremum>)> = level
            .par_iter()
            .map(|node| {
                let word = Word::new(node.word.clone())?;
                let hi = Extremum {
                    word: word.clone(),
                    magnitude: node.prod.norm(norm),
                };
                let lo = if word.is_necklace() {
                    Some(Extremum {
                        word,
                        magnitude: node.prod.spectral_radius()?,
                    })
                } else {
                    None
                };
                Ok((lo, Some(hi)))
            })
            .collect::<Result<_>>()?;
        let (lo, hi) = evals
            .into_iter()
            .fold((None, None), |(l, h), (a, b)| (pick(l, a), pick(h, b)));
        let Some(lo) = lo else {
            break;
        };
        let hi = hi.expect("level is nonempty");
        let ln_hi_gen = hi.magnitude.ln();
        let ln_hi_pruned = (1..m)
            .map(|i| ln_pruned[i] + ln_cap[m - i])
            .fold(f64::NEG_INFINITY, f64::max);
        let (ln_hi, hi_word) = if ln_hi_pruned > ln_hi_gen {
            (ln_hi_pruned, None)
        } else {
            (ln_hi_gen, Some(hi.word.clone()))
        };
        ln_cap.push(ln_hi);
        ln_rho.push(lo.magnitude.ln());
        table.push(m, lo, (ln_hi / m as f64).exp(), hi_word);

        if m == max_depth {
            break;
        }

        // caps for lengths beyond m by submultiplicativity
        let mut cap = ln_cap.clone();
        for j in m + 1..=max_depth {
            let c = (1..j)
                .map(|a| cap[a] + cap[j - a])
                .fold(f64::INFINITY, f64::min);
            cap.push(c);
        }
        // incumbent lower bounds on ln rho_n from powers of explored words
        let incumbent: Vec<f64> = (0..=max_depth)
            .map(|n| {
                (1..=m.min(n))
                    .filter(|a| n > 0 && n % a == 0)
                    .map(|a| (n / a) as f64 * ln_rho[a])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();

        let mut survivors = Vec::with_capacity(level.len());
        let mut pruned_max = f64::NEG_INFINITY;
        for node in level {
            let keep = (m + 1..=max_depth).any(|n| {
                let bound = node.ln_norm + cap[n - m];
                bound >= incumbent[n] - PRUNE_MARGIN * (1.0 + incumbent[n].abs())
                    || incumbent[n] == f64::NEG_INFINITY
            });
            if keep {
                survivors.push(node);
            } else {
                pruned_max = pruned_max.max(node.ln_norm);
            }
        }
        ln_pruned.push(pruned_max);

        let next_count = (survivors.len() * k) as u64;
        if table.nodes + next_count > budget {
            table.exhausted_at = Some(m + 1);
            break;
        }
        table.nodes += next_count;
        level = survivors
            .par_iter()
            .flat_map_iter(|node| {
                (0..k).map(move |i| {
                    let prod = node.prod.mul_matrix(set.generator(i));
                    let ln_norm = prod.norm(norm).ln();
                    let mut word = node.word.clone();
                    word.push(i);
                    Node {
                        word,
                        prod,
                        ln_norm,
                    }
                })
            })
            .collect();
    }
    Ok(table)
}

/// A product offered as a spectrum-maximizing candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmpCandidate {
    pub word: Word,
    /// `rho(S_w)^(1/|w|)`.
    pub value: f64,
    /// Peripheral ratio `min |lambda| / rho` of `S_w`.
    pub kappa: f64,
}

/// The `rho_n`-attaining words of a table, ranked by value (descending),
/// then shorter word, then lexicographically.
pub fn smp_candidates(set: &MatrixSet, table: &BoundsTable, top: usize) -> Result<Vec<SmpCandidate>> {
    let mut rows: Vec<&BoundsRow> = table.rows.iter().collect();
    rows.sort_by(|a, b| {
        b.lo.total_cmp(&a.lo)
            .then(a.lo_word.len().cmp(&b.lo_word.len()))
            .then(a.lo_word.cmp(&b.lo_word))
    });
    rows.into_iter()
        .take(top)
        .map(|r| {
            let prod = evaluate_unchecked(set, r.lo_word.indices());
            let kappa = eigen::eigenvalues(prod.base())?.peripheral_ratio();
            Ok(SmpCandidate {
                word: r.lo_word.clone(),
                value: r.lo,
                kappa,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::products::enumerate_words;

    fn morris(lambda: f64) -> MatrixSet {
        MatrixSet::from_matrices(vec![
            Matrix::from_rows(&[[1.0, 0.0], [0.0, lambda]]).unwrap(),
            Matrix::from_rows(&[[0.0, lambda], [lambda, 0.0]]).unwrap(),
        ])
        .unwrap()
    }

    fn hare(alpha: f64) -> MatrixSet {
        MatrixSet::from_matrices(vec![
            Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap(),
            Matrix::from_rows(&[[alpha, 0.0], [alpha, alpha]]).unwrap(),
        ])
        .unwrap()
    }

    fn w(one_based: &[usize]) -> Word {
        Word::from_one_based(one_based).unwrap()
    }

    #[test]
    fn morris_rho_n() {
        let set = morris(0.5);
        let r1 = rho_n(&set, 1).unwrap();
        assert_eq!((r1.value(), &r1.word), (1.0, &w(&[1])));
        let r2 = rho_n(&set, 2).unwrap();
        assert_eq!((r2.value(), &r2.word), (1.0, &w(&[1, 1])));
    }

    #[test]
    fn hare_alpha_zero_only_powers_of_first() {
        // alpha = 0 lies outside the family's domain; build the pair directly
        let set = hare(0.0);
        let r = rho_n(&set, 5).unwrap();
        assert_eq!(r.value(), 1.0);
        assert_eq!(r.word, Word::power(0, 5));
    }

    #[test]
    fn rho_hat_examples() {
        let set = morris(0.5);
        let h = rho_hat_n(&set, 1, NormKind::Inf).unwrap();
        assert_eq!((h.value(), &h.word), (1.0, &w(&[1])));

        let id = Matrix::identity(2, crate::Field::Real).unwrap();
        let half = MatrixSet::from_matrices(vec![id.clone(), id.scale(0.5)]).unwrap();
        for kind in NormKind::ALL {
            let h = rho_hat_n(&half, 3, kind).unwrap();
            assert!((h.value() - 1.0).abs() < 1e-15);
            assert_eq!(h.word, w(&[1, 1, 1]));
        }
    }

    #[test]
    fn hare_rho_hat_2_matches_enumeration() {
        let set = hare(0.5);
        let oracle = enumerate_words(2, 2)
            .map(|w| {
                let idx = w.indices();
                let p = set.generator(idx[0]).mul(set.generator(idx[1]));
                (p.norm(NormKind::Inf), w)
            })
            .fold((f64::NEG_INFINITY, None), |(bv, bw), (v, w)| {
                if v > bv {
                    (v, Some(w))
                } else {
                    (bv, bw)
                }
            });
        let h = rho_hat_n(&set, 2, NormKind::Inf).unwrap();
        assert_eq!(h.value(), oracle.0);
        assert_eq!(Some(h.word), oracle.1);
    }

    #[test]
    fn budget_refusal() {
        let set = morris(0.5);
        let err = rho_hat_n_with_budget(&set, 10, NormKind::Inf, 1000).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded {
                depth: 10,
                needed: 1024,
                budget: 1000
            }
        ));
        // 108 necklaces of length 10 fit where 1024 words do not
        assert!(rho_n_with_budget(&set, 10, 108).is_ok());
        assert!(rho_n_with_budget(&set, 10, 107).is_err());
    }

    #[test]
    fn morris_depth_one_closes() {
        let t = bounds_table(&morris(0.5), 1, NormKind::Inf).unwrap();
        assert_eq!(t.best_lo(), 1.0);
        assert_eq!(t.best_hi(), 1.0);
    }

    #[test]
    fn necklace_and_scan_routes_agree() {
        let set = hare(0.75);
        let t = bounds_table(&set, 8, NormKind::Inf).unwrap();
        for row in &t.rows {
            let r = rho_n(&set, row.n).unwrap();
            assert_eq!(r.word, row.lo_word);
            assert_eq!(r.root(), row.lo);
        }
    }

    #[test]
    fn pruning_drops_dominated_subtrees() {
        let id = Matrix::identity(2, crate::Field::Real).unwrap();
        let set = MatrixSet::from_matrices(vec![id.scale(0.5), id.scale(0.25)]).unwrap();
        let t = refine_bounds(&set, 6, 1_000_000, NormKind::Inf).unwrap();
        let naive: u64 = (1..=6).map(|n| 1u64 << n).sum();
        assert!(t.nodes < naive, "{} vs {}", t.nodes, naive);
        // only the (1)-prefixed branch survives each level
        assert_eq!(t.nodes, 2 + 2 * 5);
        for row in &t.rows {
            assert_eq!(row.lo, 0.5);
            assert_eq!(row.lo_word, Word::power(0, row.n));
        }
    }

    #[test]
    fn refine_reports_exhaustion() {
        let set = hare(0.749);
        let t = refine_bounds(&set, 30, 200, NormKind::Inf).unwrap();
        let at = t.exhausted_at.expect("budget should run out");
        assert_eq!(at, t.depth() + 1);
        assert!(t.nodes <= 200);
        assert!(refine_bounds(&set, 3, 1, NormKind::Inf).is_err());
    }

    #[test]
    fn smp_ranking() {
        let set = morris(0.5);
        let t = bounds_table(&set, 4, NormKind::Inf).unwrap();
        let c = smp_candidates(&set, &t, 3).unwrap();
        assert_eq!(c[0].word, w(&[1]));
        assert_eq!(c[0].value, 1.0);
        assert_eq!(c[0].kappa, 0.5);
        assert_eq!(c[1].word, w(&[1, 1]));
        assert!(c.iter().all(|x| x.value <= t.best_hi()));
    }
}
