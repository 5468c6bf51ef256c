//! Stability of discrete switched systems `x_t = x_(t-1) S_(i_t)`.
//!
//! The decision procedure interleaves two sound certificates for growing
//! depth `n`: a norm bound `rho_hat_n < 1` proves absolute stability and a
//! spectral bound `rho_n >= 1` proves instability. At the boundary
//! `rho = 1` neither ever fires and the outcome stays unknown.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::matrix::{NormKind, C64};
use crate::products::{MatrixSet, Word};

/// Rounding band around 1: a norm bound must be below `1 - DECISION_TOL`
/// and a spectral bound at least `1 + DECISION_TOL` to decide.
pub const DECISION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Stable,
    Unstable,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Stable => "stable",
            Outcome::Unstable => "unstable",
            Outcome::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub outcome: Outcome,
    /// Depth at which a certificate was found.
    pub witness_depth: Option<usize>,
    /// Word with `rho(S_w) >= 1` (unstable) or with the largest norm at the
    /// witness depth (stable).
    pub witness: Option<Word>,
    /// The certifying `rho_hat_n` (stable) or `rho_n` (unstable), not rooted.
    pub value: Option<f64>,
    pub norm: NormKind,
    /// Deepest level examined.
    pub depth_reached: usize,
}

/// Result of the depth-bounded periodic-switching test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub stable: bool,
    pub depth: usize,
    /// First (shortest, then lexicographically least) word with
    /// `rho(S_w)` not below 1.
    pub violation: Option<Word>,
    pub violation_rho: Option<f64>,
}

/// Whether `rho(S_w) < 1` for every word of length at most `depth`.
/// Spectral radii within `1e-12` of 1 count as violations.
pub fn periodically_switched_stable(set: &MatrixSet, depth: usize) -> Result<PeriodicCheck> {
    periodically_switched_stable_with_budget(set, depth, DEFAULT_BUDGET)
}

pub fn periodically_switched_stable_with_budget(
    set: &MatrixSet,
    depth: usize,
    budget: u64,
) -> Result<PeriodicCheck> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    for n in 1..=depth {
        let best = bounds::rho_n_with_budget(set, n, budget)?;
        if best.value() >= 1.0 - 1e-12 {
            return Ok(PeriodicCheck {
                stable: false,
                depth: n,
                violation_rho: Some(best.value()),
                violation: Some(best.word),
            });
        }
    }
    Ok(PeriodicCheck {
        stable: true,
        depth,
        violation: None,
        violation_rho: None,
    })
}

pub fn decide_stability(set: &MatrixSet, max_depth: usize, norm: NormKind) -> Result<Decision> {
    decide_stability_with_budget(set, max_depth, norm, DEFAULT_BUDGET)
}

/// Interleaved decision for `n = 1..=max_depth`. A depth whose word count
/// exceeds `budget` is refused with an error.
pub fn decide_stability_with_budget(
    set: &MatrixSet,
    max_depth: usize,
    norm: NormKind,
    budget: u64,
) -> Result<Decision> {
    if max_depth == 0 {
        return Err(Error::Domain("max depth must be at least 1".into()));
    }
    for n in 1..=max_depth {
        let (lo, hi) = bounds::depth_extrema(set, n, norm, budget)?;
        if hi.value() < 1.0 - DECISION_TOL {
            return Ok(Decision {
                outcome: Outcome::Stable,
                witness_depth: Some(n),
                value: Some(hi.value()),
                witness: Some(hi.word),
                norm,
                depth_reached: n,
            });
        }
        if lo.value() >= 1.0 + DECISION_TOL {
            return Ok(Decision {
                outcome: Outcome::Unstable,
                witness_depth: Some(n),
                value: Some(lo.value()),
                witness: Some(lo.word),
                norm,
                depth_reached: n,
            });
        }
    }
    Ok(Decision {
        outcome: Outcome::Unknown,
        witness_depth: None,
        witness: None,
        value: None,
        norm,
        depth_reached: max_depth,
    })
}

/// `s_t = floor((t+1) gamma + delta) - floor(t gamma + delta)` for
/// `t = 0..len`, with 0 mapped to the first generator and 1 to the second.
pub fn sturmian_word(gamma: f64, delta: f64, len: usize) -> Result<Word> {
    if !(0.0..=1.0).contains(&gamma) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "sturmian slope must lie in [0, 1] and offset be finite, got ({gamma}, {delta})"
        )));
    }
    if len == 0 {
        return Err(Error::EmptyWord);
    }
    Word::new((0..len).map(|t| sturmian_letter(gamma, delta, t)).collect())
}

fn sturmian_letter(gamma: f64, delta: f64, t: usize) -> usize {
    let t = t as f64;
    (((t + 1.0) * gamma + delta).floor() - (t * gamma + delta).floor()) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SwitchingSequence {
    Periodic { word: Word },
    Random { seed: u64 },
    Sturmian { gamma: f64, delta: f64 },
}

impl SwitchingSequence {
    /// Index stream for a set with `card` generators.
    pub fn indices(&self, card: usize) -> Result<Switching> {
        let state = match self {
            SwitchingSequence::Periodic { word } => {
                if let Some(&bad) = word.indices().iter().find(|&&i| i >= card) {
                    return Err(Error::WordIndex { index: bad + 1, card });
                }
                State::Periodic(word.clone())
            }
            SwitchingSequence::Random { seed } => State::Random(ChaCha8Rng::seed_from_u64(*seed)),
            SwitchingSequence::Sturmian { gamma, delta } => {
                sturmian_word(*gamma, *delta, 1)?;
                State::Sturmian(*gamma, *delta)
            }
        };
        Ok(Switching { state, card, t: 0 })
    }
}

impl fmt::Display for SwitchingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwitchingSequence::Periodic { word } => write!(f, "periodic:{word}"),
            SwitchingSequence::Random { seed } => write!(f, "random:{seed}"),
            SwitchingSequence::Sturmian { gamma, delta } => write!(f, "sturmian:{gamma},{delta}"),
        }
    }
}

impl FromStr for SwitchingSequence {
    type Err = Error;

    /// `periodic:1,2,2`, `random:SEED` or `sturmian:GAMMA,DELTA`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bad switching sequence `{s}`"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "periodic" => Ok(SwitchingSequence::Periodic { word: arg.parse()? }),
            "random" => Ok(SwitchingSequence::Random {
                seed: arg.trim().parse().map_err(|_| bad())?,
            }),
            "sturmian" => {
                let (g, d) = arg.split_once(',').ok_or_else(bad)?;
                let gamma: f64 = g.trim().parse().map_err(|_| bad())?;
                let delta: f64 = d.trim().parse().map_err(|_| bad())?;
                sturmian_word(gamma, delta, 1)?;
                Ok(SwitchingSequence::Sturmian { gamma, delta })
            }
            _ => Err(bad()),
        }
    }
}

enum State {
    Periodic(Word),
    Random(ChaCha8Rng),
    Sturmian(f64, f64),
}

/// Infinite iterator of 0-based generator indices.
pub struct Switching {
    state: State,
    card: usize,
    t: usize,
}

impl Iterator for Switching {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let t = self.t;
        self.t += 1;
        Some(match &mut self.state {
            State::Periodic(w) => w.indices()[t % w.len()],
            State::Random(rng) => rng.gen_range(0..self.card),
            State::Sturmian(g, d) => sturmian_letter(*g, *d, t),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub log_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub sequence: SwitchingSequence,
    pub norm: NormKind,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Least-squares slope of `log |x_t|` over the last half of the run.
    pub fn growth_exponent(&self) -> f64 {
        let tail = &self.points[self.points.len() / 2..];
        let m = tail.len() as f64;
        if tail.len() < 2 {
            return 0.0;
        }
        let mt = tail.iter().map(|p| p.t as f64).sum::<f64>() / m;
        let my = tail.iter().map(|p| p.log_norm).sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for p in tail {
            let dt = p.t as f64 - mt;
            sxy += dt * (p.log_norm - my);
            sxx += dt * dt;
        }
        sxy / sxx
    }
}

fn vector_norm(x: &[C64], kind: NormKind) -> f64 {
    match kind {
        NormKind::One => x.iter().map(|z| z.norm()).sum(),
        NormKind::Inf => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
        NormKind::Two => x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
    }
}

/// Runs `x_t = x_(t-1) S_(i_t)` for `steps` steps and records
/// `(t, ln |x_t|)` for `t = 0..=steps`. The state is renormalized each step,
/// so the log norm never under- or overflows. Once the state hits zero the
/// log norm is `-inf` from then on.
pub fn simulate_trajectory(
    set: &MatrixSet,
    seq: &SwitchingSequence,
    x0: &[C64],
    steps: usize,
    norm: NormKind,
) -> Result<Trajectory> {
    if x0.len() != set.dim() {
        return Err(Error::Domain(format!(
            "initial vector has length {}, expected {}",
            x0.len(),
            set.dim()
        )));
    }
    if steps == 0 {
        return Err(Error::Domain("at least one step is required".into()));
    }
    let n0 = vector_norm(x0, norm);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Domain("initial vector must be nonzero and finite".into()));
    }
    let mut x: Vec<C64> = x0.iter().map(|z| z / n0).collect();
    let mut log = n0.ln();
    let mut points = Vec::with_capacity(steps + 1);
    points.push(TrajectoryPoint { t: 0, log_norm: log });
    for (t, i) in (1..=steps).zip(seq.indices(set.card())?) {
        if log != f64::NEG_INFINITY {
            x = set.generator(i).left_apply(&x);
            let nx = vector_norm(&x, norm);
            if nx > 0.0 {
                x.iter_mut().for_each(|z| *z /= nx);
                log += nx.ln();
            } else {
                log = f64::NEG_INFINITY;
            }
        }
        points.push(TrajectoryPoint { t, log_norm: log });
    }
    Ok(Trajectory {
        sequence: seq.clone(),
        norm,
        points,
    })
}
