//! Peripheral-spectrum ratios and the uniformly sub-peripheral finiteness
//! certificate.
//!
//! If a sequence of products `S_w(l)` with lengths `n_l -> inf` has every
//! eigenvalue modulus at least `kappa * rho(S_w(l))` for one fixed
//! `kappa in (0, 1)`, and `rho(S_w(l))^(1/n_l)` converges to the joint
//! spectral radius, then that radius equals `max_k rho(S_k)`. The reason is
//! the chain
//!
//! ```text
//! kappa rho(S_w) <= |det S_w|^(1/d) = prod_j |det S_ij|^(1/d)
//!               <= prod_j rho(S_ij) <= (max_k rho(S_k))^n
//! ```
//!
//! [`certify_finiteness`] checks these conditions numerically on a finite
//! word list. A rejection only means this particular test was inconclusive.

use serde::Serialize;

use crate::bounds;
use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::products::{evaluate_word, MatrixSet, Word};

/// Default relative tolerance for the limit clause.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Log-domain slack per factor for the determinant chain.
const SANDWICH_TOL: f64 = 1e-10;

/// `min |lambda| / max |lambda|`; 1 for a matrix whose spectrum is `{0}`.
pub fn peripheral_ratio(a: &Matrix) -> Result<f64> {
    Ok(eigen::eigenvalues(a)?.peripheral_ratio())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeripheralReport {
    pub word: Word,
    /// `rho(S_w)`.
    pub rho: f64,
    /// `min |lambda| / rho(S_w)`.
    pub kappa: f64,
    /// `|det S_w|^(1/d)`.
    pub det_root: f64,
    #[serde(skip)]
    ln_rho: f64,
    #[serde(skip)]
    ln_det_root: f64,
}

impl PeripheralReport {
    pub fn new(set: &MatrixSet, word: &Word) -> Result<Self> {
        let prod = evaluate_word(set, word)?;
        let spectrum = prod.spectrum()?;
        let ln_rho = (spectrum.rho).ln() + prod.log_scale();
        let ln_det_root = prod.ln_abs_det() / set.dim() as f64;
        Ok(PeripheralReport {
            word: word.clone(),
            rho: ln_rho.exp(),
            kappa: spectrum.peripheral_ratio(),
            det_root: ln_det_root.exp(),
            ln_rho,
            ln_det_root,
        })
    }

    /// `rho(S_w)^(1/n)`.
    pub fn root_value(&self) -> f64 {
        (self.ln_rho / self.word.len() as f64).exp()
    }
}

/// True iff every report has `kappa >= kappa_min`.
pub fn check_uniform_subperipheral(reports: &[PeripheralReport], kappa_min: f64) -> Result<bool> {
    check_kappa(kappa_min)?;
    if reports.is_empty() {
        return Err(Error::Domain("no products to check".into()));
    }
    Ok(reports.iter().all(|r| r.kappa >= kappa_min))
}

fn check_kappa(kappa_min: f64) -> Result<()> {
    if kappa_min > 0.0 && kappa_min < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa_min = {kappa_min} outside (0, 1)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Rejected,
}

/// The certificate conditions, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// (a) every product has `kappa >= kappa_min`.
    UniformSubPeripheral,
    /// (b) the two longest products approximate `max_k rho(S_k)`.
    LimitValue,
    /// (c) the determinant chain holds for every product.
    DeterminantSandwich,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::UniformSubPeripheral => "a",
            Clause::LimitValue => "b",
            Clause::DeterminantSandwich => "c",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub clause: Clause,
    pub detail: String,
}

/// Log-domain residuals of the determinant chain for one product; each must
/// be at most the slack for the chain to hold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichResidual {
    pub word: Word,
    /// `ln(kappa rho) - ln |det|^(1/d)`.
    pub kappa_rho_vs_det: f64,
    /// `| ln |det S_w|^(1/d) - sum ln |det S_ij|^(1/d) |`.
    pub det_multiplicativity: f64,
    /// `sum ln |det S_ij|^(1/d) - sum ln rho(S_ij)`.
    pub det_vs_generators: f64,
    /// `sum ln rho(S_ij) - n ln max_k rho(S_k)`.
    pub generators_vs_sup: f64,
    pub slack: f64,
}

impl SandwichResidual {
    pub fn holds(&self) -> bool {
        self.kappa_rho_vs_det <= self.slack
            && self.det_multiplicativity <= self.slack
            && self.det_vs_generators <= self.slack
            && self.generators_vs_sup <= self.slack
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub status: Status,
    pub kappa_floor: f64,
    pub tolerance: f64,
    pub words: Vec<Word>,
    pub kappas: Vec<f64>,
    /// `rho(S_w)^(1/|w|)` per word.
    pub values: Vec<f64>,
    /// `max_k rho(S_k)`.
    pub generator_sup: f64,
    /// Set when certified: the joint spectral radius.
    pub certified_value: Option<f64>,
    pub rejection: Option<Rejection>,
    pub residuals: Vec<SandwichResidual>,
    /// How the limit of the value sequence is approximated.
    pub limit_rule: &'static str,
}

/// Difference `a - b` of log quantities, treating equal infinities as 0.
fn log_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

/// Checks clauses (a), (b), (c) on `words` and certifies
/// `rho(S) = max_k rho(S_k)` when all hold.
pub fn certify_finiteness(
    set: &MatrixSet,
    words: &[Word],
    kappa_min: f64,
    tol: f64,
) -> Result<Certificate> {
    check_kappa(kappa_min)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    if words.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 words, got {}",
            words.len()
        )));
    }
    if let Some(pair) = words.windows(2).find(|p| p[1].len() <= p[0].len()) {
        return Err(Error::Domain(format!(
            "word lengths must increase strictly ({} then {})",
            pair[0].len(),
            pair[1].len()
        )));
    }
    for w in words {
        set.check_word(w)?;
    }

    let d = set.dim() as f64;
    let mut ln_gen_rho = Vec::with_capacity(set.card());
    let mut ln_gen_det_root = Vec::with_capacity(set.card());
    for g in set.generators() {
        ln_gen_rho.push(eigen::spectral_radius(g)?.ln());
        ln_gen_det_root.push(g.determinant().norm().ln() / d);
    }
    let ln_sup = ln_gen_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let generator_sup = ln_sup.exp();

    let reports = words
        .iter()
        .map(|w| PeripheralReport::new(set, w))
        .collect::<Result<Vec<_>>>()?;

    let residuals: Vec<SandwichResidual> = reports
        .iter()
        .map(|r| {
            let idx = r.word.indices();
            let n = idx.len() as f64;
            let ln_kappa_rho = r.kappa.ln() + r.ln_rho;
            let det_sum: f64 = idx.iter().map(|&i| ln_gen_det_root[i]).sum();
            let rho_sum: f64 = idx.iter().map(|&i| ln_gen_rho[i]).sum();
            SandwichResidual {
                word: r.word.clone(),
                kappa_rho_vs_det: log_gap(ln_kappa_rho, r.ln_det_root),
                det_multiplicativity: log_gap(r.ln_det_root, det_sum).abs(),
                det_vs_generators: log_gap(det_sum, rho_sum),
                generators_vs_sup: log_gap(rho_sum, n * ln_sup),
                slack: SANDWICH_TOL * n.max(1.0),
            }
        })
        .collect();

    let values: Vec<f64> = reports.iter().map(PeripheralReport::root_value).collect();
    let kappas: Vec<f64> = reports.iter().map(|r| r.kappa).collect();

    let rejection = if let Some(r) = reports.iter().find(|r| r.kappa < kappa_min) {
        Some(Rejection {
            clause: Clause::UniformSubPeripheral,
            detail: format!(
                "word {} has kappa {} < kappa_min {}",
                r.word, r.kappa, kappa_min
            ),
        })
    } else if let Some((w, v)) = words[words.len() - 2..]
        .iter()
        .zip(&values[values.len() - 2..])
        .find(|(_, &v)| (v - generator_sup).abs() > tol * generator_sup)
    {
        Some(Rejection {
            clause: Clause::LimitValue,
            detail: format!(
                "word {w} has rho^(1/n) = {v}, max generator radius is {generator_sup}"
            ),
        })
    } else {
        residuals.iter().find(|r| !r.holds()).map(|r| Rejection {
            clause: Clause::DeterminantSandwich,
            detail: format!("determinant chain fails for word {}: {:?}", r.word, r),
        })
    };

    Ok(Certificate {
        status: if rejection.is_none() {
            Status::Certified
        } else {
            Status::Rejected
        },
        kappa_floor: kappa_min,
        tolerance: tol,
        words: words.to_vec(),
        kappas,
        values,
        generator_sup,
        certified_value: rejection.is_none().then_some(generator_sup),
        rejection,
        residuals,
        limit_rule: "two-longest-words",
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R1Point {
    pub n: usize,
    pub word: Word,
    pub kappa: f64,
}

/// Peripheral ratio of the `rho_n`-attaining word for each `n <= depth`.
pub fn r1_diagnostic(set: &MatrixSet, depth: usize) -> Result<Vec<R1Point>> {
    (1..=depth)
        .map(|n| {
            let best = bounds::rho_n(set, n)?;
            let prod = evaluate_word(set, &best.word)?;
            Ok(R1Point {
                n,
                kappa: prod.spectrum()?.peripheral_ratio(),
                word: best.word,
            })
        })
        .collect()
}
