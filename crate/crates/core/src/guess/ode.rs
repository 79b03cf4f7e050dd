//! Linear differential equations `sum_i q_i(t) f^(i)(t) = 0` for a power
//! series given by its coefficients modulo a prime.

use serde::Serialize;

use super::linalg::{nullspace, ModMatrix};
use super::MARGIN;
use crate::error::{Error, Result};
use crate::ring::PrimeField;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ode {
    pub prime: u32,
    /// `coeffs[i][e]` is the coefficient of `t^e` in `q_i`.
    pub coeffs: Vec<Vec<u32>>,
}

impl Ode {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Scales the top coefficient of the highest derivative to 1.
    fn normalized(mut self) -> Self {
        let field = PrimeField::new(self.prime).expect("prime");
        let lead = self
            .coeffs
            .iter()
            .rev()
            .find_map(|q| q.iter().rev().find(|&&c| c != 0).copied())
            .expect("nonzero equation");
        let inv = field.inv_u32(lead).expect("unit");
        for c in self.coeffs.iter_mut().flatten() {
            *c = field.mul_u32(*c, inv);
        }
        self
    }

    /// Coefficient of `t^m` in `sum_i q_i f^(i)`; needs `terms[m + order]`.
    pub fn row_value(&self, terms: &[u32], m: usize) -> u32 {
        let field = PrimeField::new(self.prime).expect("prime");
        let d = self.degree();
        let mut acc = 0u32;
        for e in 0..=d.min(m) {
            let j = m - e;
            let mut rising = 1u32;
            for (i, q) in self.coeffs.iter().enumerate() {
                if i > 0 {
                    rising = field.mul_u32(rising, ((j + i) as u64 % self.prime as u64) as u32);
                }
                if q[e] != 0 {
                    let v = field.mul_u32(rising, terms[j + i] % self.prime);
                    acc = field.add_u32(acc, field.mul_u32(q[e], v));
                }
            }
        }
        acc
    }

    /// First `m` in `0..=len - order - 1` where the equation fails.
    pub fn first_violation(&self, terms: &[u32]) -> Option<usize> {
        let last = terms.len().checked_sub(self.order() + 1)?;
        (0..=last).find(|&m| self.row_value(terms, m) != 0)
    }
}

/// Matrix whose rows are the `t^m` coefficients, `m = 0..rows`, and whose
/// columns are `(i, e)` with entry `(m-e+1)...(m-e+i) a(m-e+i)`.
fn ode_matrix(terms: &[u32], p: u32, order: usize, degree: usize, rows: usize) -> Result<ModMatrix> {
    let field = PrimeField::new(p)?;
    let cols = (order + 1) * (degree + 1);
    // rising[j][i] = (j+1)...(j+i) mod p
    let span = rows + order;
    let rising: Vec<Vec<u32>> = (0..span)
        .map(|j| {
            let mut v = Vec::with_capacity(order + 1);
            let mut acc = 1u32;
            v.push(acc);
            for i in 1..=order {
                acc = field.mul_u32(acc, ((j + i) as u64 % p as u64) as u32);
                v.push(acc);
            }
            v
        })
        .collect();
    ModMatrix::from_fn(p, rows, cols, |m, col| {
        let (i, e) = (col / (degree + 1), col % (degree + 1));
        if e > m {
            return 0;
        }
        let j = m - e;
        field.mul_u32(rising[j][i], terms[j + i] % p)
    })
}

/// A basis of equations of order `order` with coefficients of degree at
/// most `degree` satisfied by the series on all rows the terms determine.
pub fn guess_ode(terms: &[u32], p: u32, order: usize, degree: usize) -> Result<Vec<Ode>> {
    let cols = (order + 1) * (degree + 1);
    let needed = cols + order + MARGIN;
    if terms.len() < needed {
        return Err(Error::InsufficientTerms {
            needed,
            got: terms.len(),
        });
    }
    let rows = terms.len() - order;
    let m = ode_matrix(terms, p, order, degree, rows)?;
    let mut out: Vec<Ode> = nullspace(m)
        .into_iter()
        .map(|v| {
            Ode {
                prime: p,
                coeffs: v.chunks(degree + 1).map(<[u32]>::to_vec).collect(),
            }
            .normalized()
        })
        .collect();
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeReport {
    pub prime: u32,
    pub order: usize,
    pub degree: usize,
    pub terms_used: usize,
    pub terms_heldout: usize,
    pub dimension: usize,
    /// Candidates satisfied on every held-out row.
    pub holdout_verified: usize,
    #[serde(skip)]
    pub candidates: Vec<(Ode, bool)>,
}

/// Guesses on the leading `1 - holdout` share of the terms and checks every
/// basis vector on the rest.
pub fn guess_ode_holdout(terms: &[u32], p: u32, order: usize, degree: usize, holdout: f64) -> Result<OdeReport> {
    let held = ((terms.len() as f64) * holdout).ceil() as usize;
    let used = terms.len() - held.min(terms.len());
    let basis = guess_ode(&terms[..used], p, order, degree)?;
    let candidates: Vec<(Ode, bool)> = basis
        .into_iter()
        .map(|ode| {
            let ok = ode.first_violation(terms).is_none();
            (ode, ok)
        })
        .collect();
    Ok(OdeReport {
        prime: p,
        order,
        degree,
        terms_used: used,
        terms_heldout: terms.len() - used,
        dimension: candidates.len(),
        holdout_verified: candidates.iter().filter(|(_, ok)| *ok).count(),
        candidates,
    })
}
