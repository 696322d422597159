//! Polynomial surrogates over design features, with the degree picked by
//! k-fold cross-validation.
//!
//! Features are min-max normalized to `[0, 1]` before expansion into every
//! monomial of total degree at most `d`, listed in graded-lexicographic order:
//! the intercept, then degree-1 terms `x0, x1, ...`, then `x0², x0·x1, ...`.
//! A term is stored as the sorted list of feature indices it multiplies, so
//! `[]` is the intercept and `[0, 0, 2]` is `x0²·x2`.
//!
//! Least squares is solved through an SVD. When the design matrix is rank
//! deficient (collinear features are common on design grids) the solver
//! returns the minimum-norm solution and the model records the deficiency;
//! [`FitOptions::strict_rank`] turns that into an error instead.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::AcceleratorConfig;
use crate::costmodel::PpaResult;
use crate::dse::DesignPoint;
use crate::error::{Error, Result};

pub const FEATURE_NAMES: [&str; 8] = [
    "pe_rows",
    "pe_cols",
    "glb_bytes",
    "ifmap_spad_bytes",
    "filter_spad_bytes",
    "psum_spad_bytes",
    "act_bits",
    "wgt_bits",
];

pub const DEFAULT_MAX_DEGREE: usize = 3;
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_SEED: u64 = 0;

/// Degrees whose CV error is within this fraction of the target RMS of the
/// best one count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub fn design_features(cfg: &AcceleratorConfig) -> Vec<f64> {
    vec![
        f64::from(cfg.pe_rows),
        f64::from(cfg.pe_cols),
        cfg.glb_bytes as f64,
        cfg.ifmap_spad_bytes as f64,
        cfg.filter_spad_bytes as f64,
        cfg.psum_spad_bytes as f64,
        f64::from(cfg.pe_type.act_bits()),
        f64::from(cfg.pe_type.wgt_bits()),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, target: f64) -> Self {
        Sample { features, target }
    }
}

/// Quantity a surrogate predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Power,
    Latency,
    Area,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Power, Target::Latency, Target::Area];

    pub fn name(self) -> &'static str {
        match self {
            Target::Power => "power",
            Target::Latency => "latency",
            Target::Area => "area",
        }
    }

    /// Watts, seconds or mm².
    pub fn value(self, ppa: &PpaResult) -> f64 {
        match self {
            Target::Power => ppa.avg_power_w,
            Target::Latency => ppa.latency_s,
            Target::Area => ppa.area_mm2,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::parse("target", format!("`{s}` is not one of power, latency, area")))
    }
}

/// All monomials of total degree ≤ `degree` in `n` variables, graded-lex order.
pub fn monomials(n: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    if n == 0 {
        return out;
    }
    for d in 1..=degree {
        let mut term = vec![0usize; d];
        loop {
            out.push(term.clone());
            let Some(i) = (0..d).rev().find(|&i| term[i] + 1 < n) else {
                break;
            };
            let next = term[i] + 1;
            for slot in &mut term[i..] {
                *slot = next;
            }
        }
    }
    out
}

/// `C(n + degree, degree)`.
pub fn monomial_count(n: usize, degree: usize) -> usize {
    (1..=degree).fold(1usize, |acc, i| acc * (n + i) / i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialModel {
    pub target: String,
    pub degree: usize,
    pub feature_names: Vec<String>,
    /// Normalized feature is `(x - shift) / scale`.
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
    pub terms: Vec<Vec<usize>>,
    pub coefficients: Vec<f64>,
    pub cv_rmse: f64,
    /// CV RMSE for degrees `1..=max_degree`, in order.
    pub cv_rmse_by_degree: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub rank_deficient: bool,
    pub effective_rank: usize,
}

impl PolynomialModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        predict(self, features)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.feature_names.len();
        let bad = |m: String| Err(Error::parse("model", m));
        if self.shift.len() != n || self.scale.len() != n {
            return bad(format!("expected {n} shift and scale entries"));
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.shift.iter().any(|s| !s.is_finite())
        {
            return bad("normalization parameters must be finite with positive scale".into());
        }
        if self.terms != monomials(n, self.degree) {
            return bad("terms are not the graded-lex monomials of the stated degree".into());
        }
        let expected = monomial_count(n, self.degree);
        if self.coefficients.len() != expected {
            return bad(format!(
                "{} coefficients, expected {expected}",
                self.coefficients.len()
            ));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("non-finite coefficient".into());
        }
        if !(self.cv_rmse.is_finite() && self.cv_rmse >= 0.0) {
            return bad("cv_rmse must be finite and non-negative".into());
        }
        Ok(())
    }
}

pub fn parse_model(text: &str) -> Result<PolynomialModel> {
    let model: PolynomialModel =
        serde_json::from_str(text).map_err(|e| Error::parse("model", e.to_string()))?;
    model.validate()?;
    Ok(model)
}

pub fn predict(model: &PolynomialModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.feature_names.len() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_names.len(),
            got: features.len(),
        });
    }
    let norm = Normalization {
        shift: model.shift.clone(),
        scale: model.scale.clone(),
    };
    let z = norm.apply(features);
    Ok(model
        .terms
        .iter()
        .zip(&model.coefficients)
        .map(|(term, c)| c * term_value(term, &z))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub max_degree: usize,
    pub folds: usize,
    pub seed: u64,
    /// Fail with [`Error::RankDeficient`] instead of using the minimum-norm
    /// solution when the final design matrix is rank deficient.
    pub strict_rank: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_degree: DEFAULT_MAX_DEGREE,
            folds: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
            strict_rank: false,
        }
    }
}

pub fn fit_poly(samples: &[Sample], max_degree: usize, k: usize, seed: u64) -> Result<PolynomialModel> {
    fit_poly_with(
        samples,
        &FitOptions {
            max_degree,
            folds: k,
            seed,
            strict_rank: false,
        },
    )
}

pub fn fit_poly_with(samples: &[Sample], opts: &FitOptions) -> Result<PolynomialModel> {
    check_samples(samples, opts.folds)?;
    if opts.max_degree < 1 {
        return Err(Error::InvalidRegression("max_degree must be ≥ 1".into()));
    }
    let n = samples[0].features.len();
    let norm = Normalization::fit(samples);
    let z: Vec<Vec<f64>> = samples.iter().map(|s| norm.apply(&s.features)).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let folds = fold_indices(samples.len(), opts.folds, opts.seed);

    let cv: Vec<f64> = (1..=opts.max_degree)
        .map(|d| cv_rmse(&z, &y, &monomials(n, d), &folds))
        .collect();
    let best = cv.iter().copied().fold(f64::INFINITY, f64::min);
    let rms = (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
    let band = best + TIE_TOLERANCE * rms;
    let chosen = cv.iter().position(|&e| e <= band).expect("some degree attains the minimum");
    let degree = chosen + 1;

    let terms = monomials(n, degree);
    let all: Vec<usize> = (0..samples.len()).collect();
    let fit = least_squares(&z, &y, &terms, &all);
    let rank_deficient = fit.rank < terms.len();
    if rank_deficient && opts.strict_rank {
        return Err(Error::RankDeficient {
            rank: fit.rank,
            columns: terms.len(),
        });
    }
    Ok(PolynomialModel {
        target: "y".into(),
        degree,
        feature_names: (0..n).map(|i| format!("x{i}")).collect(),
        shift: norm.shift,
        scale: norm.scale,
        terms,
        coefficients: fit.coefficients,
        cv_rmse: cv[chosen],
        cv_rmse_by_degree: cv,
        folds: opts.folds,
        seed: opts.seed,
        rank_deficient,
        effective_rank: fit.rank,
    })
}

/// Root-mean-square held-out error of a degree-`degree` fit over `k` folds.
pub fn cv_error(samples: &[Sample], degree: usize, k: usize, seed: u64) -> Result<f64> {
    check_samples(samples, k)?;
    if degree < 1 {
        return Err(Error::InvalidRegression("degree must be ≥ 1".into()));
    }
    let norm = Normalization::fit(samples);
    let z: Vec<Vec<f64>> = samples.iter().map(|s| norm.apply(&s.features)).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let terms = monomials(samples[0].features.len(), degree);
    Ok(cv_rmse(&z, &y, &terms, &fold_indices(samples.len(), k, seed)))
}

fn check_samples(samples: &[Sample], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidRegression("fold count must be ≥ 2".into()));
    }
    if samples.len() < 2 * k {
        return Err(Error::InsufficientSamples {
            needed: 2 * k,
            got: samples.len(),
            folds: k,
        });
    }
    let n = samples[0].features.len();
    for (i, s) in samples.iter().enumerate() {
        if s.features.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.features.len(),
            });
        }
        if !s.target.is_finite() || s.features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidRegression(format!("sample {i} has a non-finite value")));
        }
    }
    Ok(())
}

struct Normalization {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Normalization {
    fn fit(samples: &[Sample]) -> Self {
        let n = samples[0].features.len();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for s in samples {
            for (j, &x) in s.features.iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        let scale = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h > l { h - l } else { 1.0 })
            .collect();
        Normalization { shift: lo, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.shift.iter().zip(&self.scale))
            .map(|(v, (s, c))| (v - s) / c)
            .collect()
    }
}

fn term_value(term: &[usize], z: &[f64]) -> f64 {
    term.iter().map(|&i| z[i]).product()
}

/// Seeded shuffle, then contiguous split; the first `n % k` folds get one
/// extra sample.
fn fold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    folds
}

fn cv_rmse(z: &[Vec<f64>], y: &[f64], terms: &[Vec<usize>], folds: &[Vec<usize>]) -> f64 {
    let mut held_out = vec![false; y.len()];
    let mut sse = 0.0;
    for fold in folds {
        for &i in fold {
            held_out[i] = true;
        }
        let train: Vec<usize> = (0..y.len()).filter(|&i| !held_out[i]).collect();
        let fit = least_squares(z, y, terms, &train);
        for &i in fold {
            let pred: f64 = terms
                .iter()
                .zip(&fit.coefficients)
                .map(|(t, c)| c * term_value(t, &z[i]))
                .sum();
            sse += (pred - y[i]).powi(2);
            held_out[i] = false;
        }
    }
    (sse / y.len() as f64).sqrt()
}

struct Solution {
    coefficients: Vec<f64>,
    rank: usize,
}

fn least_squares(z: &[Vec<f64>], y: &[f64], terms: &[Vec<usize>], rows: &[usize]) -> Solution {
    let a = DMatrix::from_fn(rows.len(), terms.len(), |r, c| term_value(&terms[c], &z[rows[r]]));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&r| y[r]));
    let svd = a.svd(true, true);
    let largest = svd.singular_values.max();
    let cutoff = largest * f64::EPSILON * rows.len().max(terms.len()) as f64;
    let rank = svd.rank(cutoff);
    let x = svd.solve(&b, cutoff).expect("both singular vector sets computed");
    Solution {
        coefficients: x.iter().copied().collect(),
        rank,
    }
}

/// Feature columns plus one target column, as read from a samples file.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub feature_names: Vec<String>,
    pub target: String,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn fit(&self, opts: &FitOptions) -> Result<PolynomialModel> {
        let mut model = fit_poly_with(&self.samples, opts)?;
        model.feature_names = self.feature_names.clone();
        model.target = self.target.clone();
        Ok(model)
    }
}

/// Reads a samples file: a header, then numeric rows. The column named after
/// `target` is the target; other target-named columns (`power`, `latency`,
/// `area`) are ignored and everything else is a feature.
pub fn parse_samples_csv(text: &str, target: Target) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_col = header
        .iter()
        .position(|h| h == target.name())
        .ok_or_else(|| Error::parse("samples", format!("no `{target}` column")))?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&i| Target::ALL.iter().all(|t| t.name() != header[i]))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::parse("samples", "no feature columns"));
    }
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(
                        "samples",
                        format!("row {}: column `{}` is not a finite number: `{raw}`", line + 1, header[i]),
                    )
                })
        };
        let features = feature_cols.iter().map(|&i| cell(i)).collect::<Result<Vec<_>>>()?;
        samples.push(Sample::new(features, cell(target_col)?));
    }
    Ok(SampleSet {
        feature_names: feature_cols.iter().map(|&i| header[i].clone()).collect(),
        target: target.name().to_string(),
        samples,
    })
}

/// Samples file with the design features and all three targets for every
/// feasible point.
pub fn samples_csv_string(points: &[DesignPoint]) -> String {
    let mut out = FEATURE_NAMES.join(",");
    for t in Target::ALL {
        out.push(',');
        out.push_str(t.name());
    }
    out.push('\n');
    for p in points {
        let Some(ppa) = p.ppa.as_ref() else { continue };
        let cells: Vec<String> = design_features(&p.cfg)
            .into_iter()
            .chain(Target::ALL.iter().map(|t| t.value(ppa)))
            .map(|v| v.to_string())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_samples_csv(points: &[DesignPoint], path: &Path) -> Result<()> {
    std::fs::write(path, samples_csv_string(points)).map_err(|e| Error::io(path, e))
}
