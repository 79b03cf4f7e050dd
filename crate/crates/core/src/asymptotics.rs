//! Numeric growth estimates `a_n ~ c * mu^n * n^alpha`.
//!
//! All work happens on logarithms. A log is kept as `mant + exp2 * ln 2` so
//! that differences of neighbouring terms with thousands of digits keep
//! full double precision.

use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_TERMS: usize = 64;
pub const DEFAULT_DEPTH: usize = 6;

/// `mant + exp2 * ln 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub mant: f64,
    pub exp2: i64,
}

impl LogValue {
    pub fn from_f64_ln(v: f64) -> Self {
        LogValue { mant: v, exp2: 0 }
    }

    pub fn value(self) -> f64 {
        self.mant + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// `self - other` without forming the large parts separately.
    pub fn minus(self, other: LogValue) -> f64 {
        (self.mant - other.mant) + (self.exp2 - other.exp2) as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive integer via its leading 64 bits.
pub fn ln_bigint_split(x: &BigInt) -> Option<LogValue> {
    if x.sign() != Sign::Plus {
        return None;
    }
    let bits = x.bits();
    if bits <= 64 {
        return Some(LogValue {
            mant: (x.to_u64()? as f64).ln(),
            exp2: 0,
        });
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    Some(LogValue {
        mant: (top.to_u64()? as f64).ln(),
        exp2: shift as i64,
    })
}

pub fn ln_bigint(x: &BigInt) -> f64 {
    ln_bigint_split(x).map_or(f64::NEG_INFINITY, LogValue::value)
}

/// Logs of consecutive terms `a_start, a_{start+1}, ...`.
#[derive(Clone, Debug)]
pub struct LogTerms {
    pub start: usize,
    pub values: Vec<LogValue>,
}

impl LogTerms {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    fn at(&self, n: usize) -> LogValue {
        self.values[n - self.start]
    }

    /// Drops the first `k` terms.
    pub fn skip(&self, k: usize) -> LogTerms {
        LogTerms {
            start: self.start + k,
            values: self.values[k.min(self.values.len())..].to_vec(),
        }
    }
}

/// Logs of positive integer terms indexed from `start`.
pub fn log_terms(terms: &[BigInt], start: usize) -> Result<LogTerms> {
    let values = terms
        .iter()
        .enumerate()
        .map(|(k, t)| ln_bigint_split(t).ok_or(Error::NonPositiveTerm { index: start + k }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LogTerms { start, values })
}

/// One extrapolated limit with its convergence record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Last-step change along the extrapolation diagonal.
    pub uncertainty: f64,
    pub stable: bool,
    pub depth: usize,
    /// Indices the extrapolation used.
    pub points: Vec<usize>,
    /// Raw estimates at those indices.
    pub raw: Vec<f64>,
    /// Diagonal of the extrapolation table, shallow to deep.
    pub diagonal: Vec<f64>,
}

/// Polynomial extrapolation to `h = 0` through `(h_k, f_k)` (Neville).
pub fn extrapolate(h: &[f64], f: &[f64]) -> Vec<f64> {
    let m = h.len();
    let mut t = f.to_vec();
    let mut diag = vec![t[m - 1]];
    for k in 1..m {
        for j in (k..m).rev() {
            t[j] += (t[j] - t[j - 1]) * h[j] / (h[j - k] - h[j]);
        }
        diag.push(t[m - 1]);
    }
    diag
}

/// Extrapolates and reports the column whose last step is smallest, so
/// that columns past the noise floor do not spoil the estimate. The
/// estimate is stable when that column is past the first, or the step is
/// negligible.
fn estimate_from(points: Vec<usize>, raw: Vec<f64>) -> Estimate {
    let h: Vec<f64> = points.iter().map(|&n| 1.0 / n as f64).collect();
    let diagonal = extrapolate(&h, &raw);
    let depth = diagonal.len() - 1;
    let (value, uncertainty, stable) = if depth == 0 {
        (diagonal[0], f64::INFINITY, false)
    } else {
        let delta = |k: usize| (diagonal[k] - diagonal[k - 1]).abs();
        let best = (1..=depth).rev().min_by(|&a, &b| delta(a).total_cmp(&delta(b))).expect("depth >= 1");
        let value = diagonal[best];
        let last = delta(best);
        let tiny = last <= 1e-9 * value.abs().max(1.0);
        (value, last, tiny || best >= 2 || depth < 2)
    };
    Estimate {
        value,
        uncertainty,
        stable,
        depth,
        points,
        raw,
        diagonal,
    }
}

/// Indices with parity `parity`, spread evenly over the upper half of
/// `[lo, hi]`, `depth + 1` of them.
fn sample_points(lo: usize, hi: usize, parity: usize, depth: usize) -> Result<Vec<usize>> {
    let align_down = |n: usize| if n % 2 == parity { n } else { n - 1 };
    let top = align_down(hi);
    let bottom = (top / 2).max(lo).max(2);
    let span = top.saturating_sub(bottom);
    if span < 2 * depth {
        return Err(Error::InsufficientTerms {
            needed: MIN_TERMS,
            got: hi + 1 - lo,
        });
    }
    let mut pts: Vec<usize> = (0..=depth)
        .map(|k| {
            let n = bottom + span * k / depth;
            let n = if n % 2 == parity { n } else { n + 1 };
            n.min(top)
        })
        .collect();
    pts.dedup();
    if pts.len() != depth + 1 {
        return Err(Error::InsufficientTerms {
            needed: MIN_TERMS,
            got: hi + 1 - lo,
        });
    }
    Ok(pts)
}

fn require(terms: &LogTerms) -> Result<()> {
    if terms.len() < MIN_TERMS {
        return Err(Error::InsufficientTerms {
            needed: MIN_TERMS,
            got: terms.len(),
        });
    }
    Ok(())
}

/// Limit of `(ln a_{n+2} - ln a_n) / 2` over indices of one parity.
pub fn log_growth_parity(terms: &LogTerms, parity: usize, depth: usize) -> Result<Estimate> {
    require(terms)?;
    let pts = sample_points(terms.start, terms.end() - 2, parity, depth)?;
    let raw = pts.iter().map(|&n| terms.at(n + 2).minus(terms.at(n)) / 2.0).collect();
    Ok(estimate_from(pts, raw))
}

/// Limit of `(b_{n+2} - b_n) / ln((n+2)/n)` with `b_n = ln a_n - n ln mu`.
pub fn exponent_parity(terms: &LogTerms, ln_mu: f64, parity: usize, depth: usize) -> Result<Estimate> {
    require(terms)?;
    let lo = terms.start.max(1);
    let pts = sample_points(lo, terms.end() - 2, parity, depth)?;
    let raw = pts
        .iter()
        .map(|&n| {
            let db = terms.at(n + 2).minus(terms.at(n)) - 2.0 * ln_mu;
            db / ((n as f64 + 2.0) / n as f64).ln()
        })
        .collect();
    Ok(estimate_from(pts, raw))
}

/// Limit of `ln a_n - n ln mu - alpha ln n`.
pub fn log_constant_parity(
    terms: &LogTerms,
    ln_mu: f64,
    alpha: f64,
    parity: usize,
    depth: usize,
) -> Result<Estimate> {
    require(terms)?;
    let lo = terms.start.max(1);
    let pts = sample_points(lo, terms.end(), parity, depth)?;
    let raw = pts
        .iter()
        .map(|&n| {
            let v = terms.at(n);
            // Subtract n ln mu in split form to keep digits.
            v.mant + (v.exp2 as f64 * std::f64::consts::LN_2 - n as f64 * ln_mu) - alpha * (n as f64).ln()
        })
        .collect();
    Ok(estimate_from(pts, raw))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Uncertainty {
    pub mu: f64,
    pub alpha: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParityFit {
    pub parity: usize,
    pub mu: f64,
    pub alpha: f64,
    pub c: f64,
    pub uncertainty: Uncertainty,
    pub stable: bool,
    pub ln_mu: Estimate,
    pub exponent: Estimate,
    pub ln_c: Estimate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymFit {
    pub mu: f64,
    pub alpha: f64,
    pub c: f64,
    pub uncertainty: Uncertainty,
    pub terms_used: usize,
    pub stable: bool,
    /// Which parity class gave the reported values.
    pub parity: usize,
    pub depth: usize,
    /// Both parity fits, even first.
    pub parities: Vec<ParityFit>,
}

fn fit_parity(terms: &LogTerms, parity: usize, depth: usize) -> Result<ParityFit> {
    let ln_mu = log_growth_parity(terms, parity, depth)?;
    let exponent = exponent_parity(terms, ln_mu.value, parity, depth)?;
    let ln_c = log_constant_parity(terms, ln_mu.value, exponent.value, parity, depth)?;
    let mu = ln_mu.value.exp();
    let c = ln_c.value.exp();
    Ok(ParityFit {
        parity,
        mu,
        alpha: exponent.value,
        c,
        uncertainty: Uncertainty {
            mu: mu * ln_mu.uncertainty,
            alpha: exponent.uncertainty,
            c: c * ln_c.uncertainty,
        },
        stable: ln_mu.stable && exponent.stable && ln_c.stable,
        ln_mu,
        exponent,
        ln_c,
    })
}

/// Fits both parity classes and reports the one with the smaller exponent
/// uncertainty.
pub fn fit_logs(terms: &LogTerms, depth: usize) -> Result<AsymFit> {
    require(terms)?;
    let parities = vec![fit_parity(terms, 0, depth)?, fit_parity(terms, 1, depth)?];
    let best = parities
        .iter()
        .min_by(|a, b| a.uncertainty.alpha.total_cmp(&b.uncertainty.alpha))
        .expect("two fits")
        .clone();
    Ok(AsymFit {
        mu: best.mu,
        alpha: best.alpha,
        c: best.c,
        uncertainty: best.uncertainty.clone(),
        terms_used: terms.len(),
        stable: best.stable,
        parity: best.parity,
        depth,
        parities,
    })
}

pub fn fit(terms: &[BigInt], depth: usize) -> Result<AsymFit> {
    fit_logs(&log_terms(terms, 0)?, depth)
}

/// Fit for return counts `b_0, b_1, ...` whose odd terms vanish. The even
/// terms are fitted as a sequence in `m = n / 2` and converted back to `n`.
pub fn fit_returns_logs(logs: &[f64], depth: usize) -> Result<AsymFit> {
    let evens: Vec<LogValue> = logs.iter().step_by(2).map(|&v| LogValue::from_f64_ln(v)).collect();
    for (m, v) in evens.iter().enumerate() {
        if !v.mant.is_finite() {
            return Err(Error::NonPositiveTerm { index: 2 * m });
        }
    }
    let mut fit = fit_logs(&LogTerms { start: 0, values: evens }, depth)?;
    convert_half_index(&mut fit);
    Ok(fit)
}

pub fn fit_returns(terms: &[BigInt], depth: usize) -> Result<AsymFit> {
    let evens: Vec<BigInt> = terms.iter().step_by(2).cloned().collect();
    let mut fit = fit_logs(&log_terms(&evens, 0).map_err(|e| match e {
        Error::NonPositiveTerm { index } => Error::NonPositiveTerm { index: 2 * index },
        e => e,
    })?, depth)?;
    convert_half_index(&mut fit);
    Ok(fit)
}

/// `c mu^m m^alpha` with `n = 2m` is `(c 2^-alpha) (sqrt mu)^n n^alpha`.
fn convert_half_index(fit: &mut AsymFit) {
    let conv = |mu: &mut f64, alpha: f64, c: &mut f64, u: &mut Uncertainty| {
        let s = mu.sqrt();
        u.mu = u.mu / (2.0 * s);
        *mu = s;
        let f = 2f64.powf(-alpha);
        u.c = (u.c * f).abs() + (*c * f * std::f64::consts::LN_2 * u.alpha).abs();
        *c *= f;
    };
    conv(&mut fit.mu, fit.alpha, &mut fit.c, &mut fit.uncertainty);
    for p in &mut fit.parities {
        conv(&mut p.mu, p.alpha, &mut p.c, &mut p.uncertainty);
    }
}

/// Growth constant `mu` from the parity class with the tighter estimate.
pub fn growth_rate(terms: &[BigInt]) -> Result<(f64, Estimate)> {
    let logs = log_terms(terms, 0)?;
    let best = best_of(
        log_growth_parity(&logs, 0, DEFAULT_DEPTH)?,
        log_growth_parity(&logs, 1, DEFAULT_DEPTH)?,
    );
    Ok((best.value.exp(), best))
}

pub fn exponent(terms: &[BigInt], mu: f64) -> Result<(f64, Estimate)> {
    let logs = log_terms(terms, 0)?;
    let best = best_of(
        exponent_parity(&logs, mu.ln(), 0, DEFAULT_DEPTH)?,
        exponent_parity(&logs, mu.ln(), 1, DEFAULT_DEPTH)?,
    );
    Ok((best.value, best))
}

pub fn constant(terms: &[BigInt], mu: f64, alpha: f64) -> Result<(f64, Estimate)> {
    let logs = log_terms(terms, 0)?;
    let best = best_of(
        log_constant_parity(&logs, mu.ln(), alpha, 0, DEFAULT_DEPTH)?,
        log_constant_parity(&logs, mu.ln(), alpha, 1, DEFAULT_DEPTH)?,
    );
    Ok((best.value.exp(), best))
}

/// `c` for known `mu` and `alpha`, from log terms.
pub fn constant_logs(terms: &LogTerms, mu: f64, alpha: f64, depth: usize) -> Result<(f64, Estimate)> {
    require(terms)?;
    let best = best_of(
        log_constant_parity(terms, mu.ln(), alpha, 0, depth)?,
        log_constant_parity(terms, mu.ln(), alpha, 1, depth)?,
    );
    Ok((best.value.exp(), best))
}

/// `c` for return counts with known per-step `mu` and `alpha`; odd terms
/// are skipped as in [`fit_returns_logs`].
pub fn constant_returns_logs(logs: &[f64], mu: f64, alpha: f64, depth: usize) -> Result<(f64, Estimate)> {
    let evens: Vec<LogValue> = logs.iter().step_by(2).map(|&v| LogValue::from_f64_ln(v)).collect();
    if let Some(m) = evens.iter().position(|v| !v.mant.is_finite()) {
        return Err(Error::NonPositiveTerm { index: 2 * m });
    }
    let (c_half, est) = constant_logs(&LogTerms { start: 0, values: evens }, mu * mu, alpha, depth)?;
    Ok((c_half * 2f64.powf(-alpha), est))
}

fn best_of(a: Estimate, b: Estimate) -> Estimate {
    if b.uncertainty < a.uncertainty {
        b
    } else {
        a
    }
}
