//! Named matrix families.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, MAX_DIM, MIN_DIM};
use crate::products::MatrixSet;

/// The parameter at which `hare_family` loses the finiteness property,
/// to the printed precision of its published value. Whether it is rational
/// is unknown.
#[allow(clippy::excessive_precision)]
pub const ALPHA_STAR: f64 = 0.749326546330367557943961948091344672091327370236064317358024;

/// Decimal text of [`ALPHA_STAR`] as published.
pub const ALPHA_STAR_DIGITS: &str =
    "0.749326546330367557943961948091344672091327370236064317358024";

/// Plane rotation by `theta`.
pub fn rotation(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_rows(&[[c, -s], [s, c]]).expect("2x2")
}

/// `{[[1, 1], [0, 1]], alpha [[1, 0], [1, 1]]}` for `0 < alpha <= 1`.
pub fn hare_family(alpha: f64) -> Result<MatrixSet> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("hare: alpha = {alpha} outside (0, 1]")));
    }
    Ok(MatrixSet::from_matrices(vec![
        Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]])?,
        Matrix::from_rows(&[[alpha, 0.0], [alpha, alpha]])?,
    ])?
    .with_name(format!("hare(alpha={alpha})")))
}

/// `{diag(1, lambda), [[0, lambda], [lambda, 0]]}` for `0 < |lambda| < 1`.
pub fn morris_family(lambda: f64) -> Result<MatrixSet> {
    if !(lambda.abs() > 0.0 && lambda.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "morris: lambda = {lambda} needs 0 < |lambda| < 1"
        )));
    }
    Ok(MatrixSet::from_matrices(vec![
        Matrix::from_rows(&[[1.0, 0.0], [0.0, lambda]])?,
        Matrix::from_rows(&[[0.0, lambda], [lambda, 0.0]])?,
    ])?
    .with_name(format!("morris(lambda={lambda})")))
}

/// Generators `c_j R(theta_j)`. Every product is again a scaled rotation.
pub fn scaled_rotation_family(scales: &[f64], angles: &[f64]) -> Result<MatrixSet> {
    if scales.len() != angles.len() {
        return Err(Error::Domain(format!(
            "rotation: {} scales but {} angles",
            scales.len(),
            angles.len()
        )));
    }
    if let Some(bad) = scales.iter().find(|&&c| !(c > 0.0)) {
        return Err(Error::Domain(format!("rotation: scale {bad} must be positive")));
    }
    let gens = scales
        .iter()
        .zip(angles)
        .map(|(&c, &t)| rotation(t).scale(c))
        .collect();
    Ok(MatrixSet::from_matrices(gens)?.with_name("scaled-rotation"))
}

/// Upper-triangular generators with the given diagonals and seeded strict
/// upper parts, uniform in `[-1, 1]`. The joint spectral radius is the
/// largest diagonal modulus.
pub fn triangular_family(diagonals: &[Vec<f64>], strict_upper_seed: u64) -> Result<MatrixSet> {
    let Some(first) = diagonals.first() else {
        return Err(Error::TooFewGenerators(0));
    };
    let d = first.len();
    let mut rng = ChaCha8Rng::seed_from_u64(strict_upper_seed);
    let mut gens = Vec::with_capacity(diagonals.len());
    for (index, diag) in diagonals.iter().enumerate() {
        if diag.len() != d {
            return Err(Error::Incompatible {
                index,
                reason: format!("diagonal of length {} != {}", diag.len(), d),
            });
        }
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            entries[i * d + i] = diag[i];
            for j in i + 1..d {
                entries[i * d + j] = rng.gen::<f64>() * 2.0 - 1.0;
            }
        }
        gens.push(Matrix::real(d, &entries)?);
    }
    Ok(MatrixSet::from_matrices(gens)?.with_name("triangular"))
}

/// All 81 real 2x2 matrices with entries in {-1, 0, 1}, in lexicographic
/// order of their row-major entries.
pub fn sign_matrices() -> Vec<Matrix> {
    let vals = [-1.0, 0.0, 1.0];
    let mut out = Vec::with_capacity(81);
    for a in vals {
        for b in vals {
            for c in vals {
                for d in vals {
                    out.push(Matrix::from_rows(&[[a, b], [c, d]]).expect("2x2"));
                }
            }
        }
    }
    out
}

/// Unordered pairs (with repetition) of 2x2 sign matrices: 3321 sets.
pub fn sign_pair_enumerator(d: usize) -> Result<impl Iterator<Item = MatrixSet>> {
    if d != 2 {
        return Err(Error::Domain(format!(
            "sign pairs are only enumerated for d = 2, not {d}"
        )));
    }
    let mats = sign_matrices();
    Ok((0..mats.len()).flat_map(move |i| {
        let mats = mats.clone();
        (i..mats.len()).map(move |j| {
            MatrixSet::from_matrices(vec![mats[i].clone(), mats[j].clone()])
                .expect("two 2x2 generators")
                .with_name(format!("sign-pair({i},{j})"))
        })
    }))
}

/// `k` generators of size `d` with i.i.d. entries uniform in `[-scale, scale]`.
pub fn random_family(seed: u64, d: usize, k: usize, scale: f64) -> Result<MatrixSet> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::Dimension(d));
    }
    if k < 2 {
        return Err(Error::TooFewGenerators(k));
    }
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("random: scale {scale} must be >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = (0..k)
        .map(|_| {
            let entries: Vec<f64> = (0..d * d)
                .map(|_| scale * (rng.gen::<f64>() * 2.0 - 1.0))
                .collect();
            Matrix::real(d, &entries)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixSet::from_matrices(gens)?.with_name(format!("random(seed={seed})")))
}

/// A family name with its parameters, as given on the command line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub name: String,
    pub params: BTreeMap<String, Vec<f64>>,
}

impl FamilySpec {
    pub fn new(name: impl Into<String>) -> Self {
        FamilySpec {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: impl Into<String>, values: Vec<f64>) -> Self {
        self.params.insert(key.into(), values);
        self
    }

    /// Parses `key=v1,v2,...` pairs. `alpha*` is accepted as a value.
    pub fn with_assignments<S: AsRef<str>>(name: &str, assignments: &[S]) -> Result<Self> {
        let mut spec = FamilySpec::new(name);
        for a in assignments {
            let a = a.as_ref();
            let (key, value) = a
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("parameter `{a}` is not key=value")))?;
            let values = value
                .split(',')
                .map(|v| match v.trim() {
                    "alpha*" => Ok(ALPHA_STAR),
                    t => t
                        .parse::<f64>()
                        .map_err(|_| Error::Domain(format!("bad number `{t}` for `{key}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            spec.params.insert(key.trim().to_string(), values);
        }
        Ok(spec)
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        match self.params.get(key).map(Vec::as_slice) {
            Some([v]) => Ok(*v),
            Some(_) => Err(Error::Domain(format!("`{key}` takes a single value"))),
            None => Err(Error::Domain(format!(
                "family `{}` needs parameter `{key}`",
                self.name
            ))),
        }
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(key) {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }

    fn list(&self, key: &str) -> Result<&[f64]> {
        self.params.get(key).map(Vec::as_slice).ok_or_else(|| {
            Error::Domain(format!("family `{}` needs parameter `{key}`", self.name))
        })
    }

    fn unsigned(&self, key: &str, default: Option<u64>) -> Result<u64> {
        let v = match default {
            Some(d) => self.scalar_or(key, d as f64)?,
            None => self.scalar(key)?,
        };
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Domain(format!("`{key}` must be a nonnegative integer")));
        }
        Ok(v as u64)
    }

    /// Known family names.
    pub const NAMES: [&'static str; 6] = ["hare", "morris", "rotation", "triangular", "random", "sign-pair"];

    pub fn build(&self) -> Result<MatrixSet> {
        match self.name.as_str() {
            "hare" => hare_family(self.scalar_or("alpha", ALPHA_STAR)?),
            "morris" => morris_family(self.scalar("lambda")?),
            "rotation" => scaled_rotation_family(self.list("scales")?, self.list("angles")?),
            "triangular" => {
                let mut diagonals = Vec::new();
                for i in 1.. {
                    match self.params.get(&format!("diag{i}")) {
                        Some(d) => diagonals.push(d.clone()),
                        None => break,
                    }
                }
                triangular_family(&diagonals, self.unsigned("seed", Some(0))?)
            }
            "random" => random_family(
                self.unsigned("seed", Some(0))?,
                self.unsigned("d", Some(2))? as usize,
                self.unsigned("k", Some(2))? as usize,
                self.scalar_or("scale", 1.0)?,
            ),
            "sign-pair" => {
                let index = self.unsigned("index", None)? as usize;
                sign_pair_enumerator(2)?
                    .nth(index)
                    .ok_or_else(|| Error::Domain(format!("sign-pair index {index} >= 3321")))
            }
            other => Err(Error::Domain(format!(
                "unknown family `{other}` (known: {})",
                Self::NAMES.join(", ")
            ))),
        }
    }
}
