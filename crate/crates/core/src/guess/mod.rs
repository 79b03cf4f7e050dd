//! Guessing recurrences and differential equations from sequence terms.
//!
//! Everything runs modulo a prime. A relation of shape `(r, d)` (order `r`,
//! coefficient degree at most `d`) is also a relation of every larger shape,
//! so an empty nullspace at a shape rules out all shapes below it. The
//! search uses this to rule out a whole budget with one elimination per
//! maximal shape.

pub mod linalg;
pub mod ode;
pub mod recurrence;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::PrimeField;
use linalg::{nullspace, ModMatrix};
use recurrence::{sort_basis, verify_recurrence, Recurrence};

/// Extra rows beyond the number of unknowns.
pub const MARGIN: usize = 10;
pub const DEFAULT_HOLDOUT: f64 = 0.25;

fn recurrence_matrix(terms: &[u32], p: u32, order: usize, degree: usize, rows: usize) -> Result<ModMatrix> {
    let field = PrimeField::new(p)?;
    let powers: Vec<Vec<u32>> = (0..rows)
        .map(|n| {
            let base = (n as u64 % p as u64) as u32;
            let mut v = Vec::with_capacity(degree + 1);
            let mut acc = 1u32;
            for _ in 0..=degree {
                v.push(acc);
                acc = field.mul_u32(acc, base);
            }
            v
        })
        .collect();
    ModMatrix::from_fn(p, rows, (order + 1) * (degree + 1), |n, col| {
        let (k, e) = (col / (degree + 1), col % (degree + 1));
        field.mul_u32(powers[n][e], terms[n + k] % p)
    })
}

fn to_recurrence(field: PrimeField, v: &[u32], degree: usize) -> Recurrence<PrimeField> {
    Recurrence::new(field, v.chunks(degree + 1).map(<[u32]>::to_vec).collect())
        .expect("nullspace vectors are nonzero")
        .canonicalize()
}

fn needed_terms(order: usize, degree: usize) -> usize {
    (order + 1) * (degree + 1) + order + MARGIN
}

/// Basis of relations of shape `(order, degree)` holding on every row the
/// terms determine, canonicalized and sorted. Empty when only the zero
/// relation fits.
pub fn guess_recurrence(terms: &[u32], p: u32, order: usize, degree: usize) -> Result<Vec<Recurrence<PrimeField>>> {
    let needed = needed_terms(order, degree);
    if terms.len() < needed {
        return Err(Error::InsufficientTerms {
            needed,
            got: terms.len(),
        });
    }
    let field = PrimeField::new(p)?;
    let m = recurrence_matrix(terms, p, order, degree, terms.len() - order)?;
    let mut basis: Vec<_> = nullspace(m).iter().map(|v| to_recurrence(field, v, degree)).collect();
    sort_basis(&mut basis);
    Ok(basis)
}

/// Whether shape `(order, degree)` admits a nonzero relation on the first
/// `(order + 1)(degree + 1) + MARGIN` rows. A `false` answer also holds for
/// all rows and all smaller shapes.
fn shape_possible(terms: &[u32], p: u32, order: usize, degree: usize) -> Result<bool> {
    let cols = (order + 1) * (degree + 1);
    let rows = (cols + MARGIN).min(terms.len() - order);
    let m = recurrence_matrix(terms, p, order, degree, rows)?;
    Ok(linalg::rank(m) < cols)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Largest `(r + 1)(d + 1)` tried.
    pub budget: usize,
    /// Share of the terms kept back for validation.
    pub holdout: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 64,
            holdout: DEFAULT_HOLDOUT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    /// Survives hold-out at every prime searched.
    Strong,
    /// Survives hold-out at the first prime only.
    Weak,
    /// Fails hold-out.
    Unverified,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoundRecurrence {
    pub prime: u32,
    pub shape: (usize, usize),
    pub order: usize,
    pub degree: usize,
    pub normal_form: String,
    pub coefficients: Vec<Vec<u32>>,
    pub holdout_verified: bool,
    pub strength: Strength,
    #[serde(skip)]
    pub recurrence: Recurrence<PrimeField>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeSearch {
    pub prime: u32,
    /// Maximal shapes in the budget.
    pub frontier: usize,
    /// Eliminations performed.
    pub eliminations: usize,
    /// First shape with a hold-out-verified relation.
    pub hit: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessReport {
    pub budget: usize,
    pub holdout_fraction: f64,
    pub margin: usize,
    pub terms_used: usize,
    pub terms_heldout: usize,
    /// Shapes with `(r + 1)(d + 1) <= budget` that the prefix can determine.
    pub shapes_in_budget: usize,
    pub primes: Vec<u32>,
    pub searches: Vec<PrimeSearch>,
    pub found: Vec<FoundRecurrence>,
}

impl GuessReport {
    pub fn verified(&self) -> impl Iterator<Item = &FoundRecurrence> {
        self.found.iter().filter(|f| f.holdout_verified)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn prefix_len(total: usize, holdout: f64) -> usize {
    let held = ((total as f64) * holdout.clamp(0.0, 1.0)).ceil() as usize;
    total - held.min(total)
}

/// Shapes the prefix can determine, in sweep order: by `(r+1)(d+1)`, then `r`.
fn candidate_shapes(prefix: usize, budget: usize) -> Vec<(usize, usize)> {
    let mut shapes = Vec::new();
    for order in 0..budget {
        for degree in 0..budget {
            let cols = (order + 1) * (degree + 1);
            if cols > budget {
                break;
            }
            if prefix >= needed_terms(order, degree) {
                shapes.push((order, degree));
            }
        }
    }
    shapes.sort_by_key(|&(r, d)| ((r + 1) * (d + 1), r));
    shapes
}

fn maximal_shapes(shapes: &[(usize, usize)]) -> Vec<(usize, usize)> {
    // Largest admissible degree for each order; keep those not dominated by
    // a higher order with at least the same degree.
    let mut best: std::collections::BTreeMap<usize, usize> = Default::default();
    for &(r, d) in shapes {
        let e = best.entry(r).or_insert(d);
        *e = (*e).max(d);
    }
    let mut out = Vec::new();
    let mut top_degree: Option<usize> = None;
    for (&r, &d) in best.iter().rev() {
        if top_degree.is_none_or(|t| d > t) {
            out.push((r, d));
            top_degree = Some(d);
        }
    }
    out.reverse();
    out
}

struct SingleSearch {
    summary: PrimeSearch,
    found: Vec<FoundRecurrence>,
}

fn search_one(terms: &[u32], p: u32, shapes: &[(usize, usize)], prefix: usize) -> Result<SingleSearch> {
    let field = PrimeField::new(p)?;
    let head = &terms[..prefix];
    let frontier = maximal_shapes(shapes);
    let mut eliminations = 0;
    let mut ruled_out = Vec::new();
    for &(r, d) in &frontier {
        eliminations += 1;
        if !shape_possible(head, p, r, d)? {
            ruled_out.push((r, d));
        }
    }
    let mut summary = PrimeSearch {
        prime: field.p(),
        frontier: frontier.len(),
        eliminations,
        hit: None,
    };
    let mut found = Vec::new();
    if ruled_out.len() == frontier.len() {
        return Ok(SingleSearch { summary, found });
    }
    for &(r, d) in shapes {
        if ruled_out.iter().any(|&(fr, fd)| r <= fr && d <= fd) {
            continue;
        }
        summary.eliminations += 1;
        let basis = guess_recurrence(head, p, r, d)?;
        let mut hit = false;
        for rec in basis {
            let ok = verify_recurrence(&rec, terms)?.success();
            hit |= ok;
            found.push(FoundRecurrence {
                prime: field.p(),
                shape: (r, d),
                order: rec.order(),
                degree: rec.degree(),
                normal_form: rec.normal_form(),
                coefficients: rec.coeffs().to_vec(),
                holdout_verified: ok,
                strength: if ok { Strength::Weak } else { Strength::Unverified },
                recurrence: rec,
            });
        }
        if hit {
            summary.hit = Some((r, d));
            break;
        }
    }
    Ok(SingleSearch { summary, found })
}

fn support(rec: &Recurrence<PrimeField>) -> Vec<Vec<bool>> {
    rec.coeffs().iter().map(|p| p.iter().map(|&c| c != 0).collect()).collect()
}

/// Sweeps shapes within the budget for each `(prime, residues)` pair. The
/// first pair drives the search; hits are re-guessed at the same shape for
/// the other primes and marked strong when every prime confirms a relation
/// with the same support.
pub fn guess_search(sequences: &[(u32, Vec<u32>)], options: SearchOptions) -> Result<GuessReport> {
    let Some((_, first)) = sequences.first() else {
        return Err(Error::InsufficientTerms { needed: 1, got: 0 });
    };
    let total = first.len();
    if sequences.iter().any(|(_, t)| t.len() != total) {
        return Err(Error::Parse("sequences for different primes differ in length".into()));
    }
    let mut primes: Vec<u32> = sequences.iter().map(|(p, _)| *p).collect();
    primes.dedup();
    if primes.len() != sequences.len() {
        return Err(Error::Parse("primes must be distinct".into()));
    }
    let prefix = prefix_len(total, options.holdout);
    let shapes = candidate_shapes(prefix, options.budget);

    let mut searches = Vec::new();
    let mut found = Vec::new();
    for (idx, (p, terms)) in sequences.iter().enumerate() {
        let run = search_one(terms, *p, &shapes, prefix)?;
        searches.push(run.summary);
        if idx == 0 {
            found = run.found;
        }
    }
    for cand in found.iter_mut().filter(|c| c.holdout_verified) {
        let (r, d) = cand.shape;
        let pattern = support(&cand.recurrence);
        let mut confirmed = true;
        for (p, terms) in &sequences[1..] {
            let basis = guess_recurrence(&terms[..prefix], *p, r, d)?;
            let agrees = basis
                .iter()
                .any(|rec| support(rec) == pattern && verify_recurrence(rec, terms).map(|v| v.success()).unwrap_or(false));
            confirmed &= agrees;
        }
        if sequences.len() > 1 && confirmed {
            cand.strength = Strength::Strong;
        }
    }
    Ok(GuessReport {
        budget: options.budget,
        holdout_fraction: options.holdout,
        margin: MARGIN,
        terms_used: prefix,
        terms_heldout: total - prefix,
        shapes_in_budget: shapes.len(),
        primes,
        searches,
        found,
    })
}
