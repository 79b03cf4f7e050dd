//! Brute-force enumeration of walks, layer by layer.

use crate::dense;
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly2;
use crate::model::ModelSpec;
use crate::ring::Ring;
use crate::series::TSeries;

/// Environment variable overriding the memory guard, in stored cells.
pub const CELL_BUDGET_VAR: &str = "SEMIPERM_CELL_BUDGET";
pub const DEFAULT_CELL_BUDGET: u64 = 400_000_000;

pub fn cell_budget() -> u64 {
    std::env::var(CELL_BUDGET_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CELL_BUDGET)
}

pub(crate) fn check_budget(needed: u64) -> Result<()> {
    let budget = cell_budget();
    if needed > budget {
        Err(Error::ResourceLimit { needed, budget })
    } else {
        Ok(())
    }
}

/// Walk counts after `n` steps, keyed by endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DPLayer<R: Ring> {
    pub n: usize,
    pub counts: LaurentPoly2<R>,
}

impl<R: Ring> DPLayer<R> {
    pub fn initial(model: &ModelSpec, ring: R) -> Self {
        DPLayer {
            n: 0,
            counts: LaurentPoly2::monomial(ring, model.start.0, model.start.1, ring.one()),
        }
    }

    pub fn total(&self) -> R::Elem {
        self.counts.eval_one()
    }

    /// Support within distance `n` of the start with matching parity.
    pub fn support_ok(&self, start: (i32, i32)) -> bool {
        self.counts.terms().all(|(&(i, j), _)| {
            let d = (i - start.0).abs() + (j - start.1).abs();
            d as usize <= self.n && (d as usize + self.n) % 2 == 0
        })
    }
}

pub fn dp_step<R: Ring>(layer: &DPLayer<R>, model: &ModelSpec) -> DPLayer<R> {
    let mut next = LaurentPoly2::zero(layer.counts.ring());
    for (&(i, j), c) in layer.counts.terms() {
        let p = (i, j);
        if model.east_allowed(p) {
            next.add_term((i + 1, j), c);
        }
        if model.west_allowed(p) {
            next.add_term((i - 1, j), c);
        }
        if model.north_allowed(p) {
            next.add_term((i, j + 1), c);
        }
        if model.south_allowed(p) {
            next.add_term((i, j - 1), c);
        }
    }
    DPLayer {
        n: layer.n + 1,
        counts: next,
    }
}

/// The generating series of admissible walks through `t^order`.
pub fn enumerate_series<R: Ring>(model: &ModelSpec, order: usize, ring: R) -> Result<TSeries<R>> {
    model.validate()?;
    let n = order as u64 + 1;
    check_budget(n * n * n / 3 + n * n)?;
    let mut layer = DPLayer::initial(model, ring);
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(layer.counts.clone());
    for _ in 0..order {
        layer = dp_step(&layer, model);
        coeffs.push(layer.counts.clone());
    }
    Ok(TSeries::from_coeffs(ring, coeffs))
}

/// Number of walks of each length `0..=order`.
pub fn totals<R: Ring>(model: &ModelSpec, order: usize, ring: R) -> Result<Vec<R::Elem>> {
    match ring.modulus() {
        Some(p) => Ok(dense::totals_mod(model, order, p)?
            .into_iter()
            .map(|v| ring.from_i64(v as i64))
            .collect()),
        None => Ok(dense::totals_exact(model, order)?.iter().map(|v| ring.from_bigint(v)).collect()),
    }
}

/// Number of walks of each length that end at the start point.
pub fn returns_to_start<R: Ring>(model: &ModelSpec, order: usize, ring: R) -> Result<Vec<R::Elem>> {
    match ring.modulus() {
        Some(p) => Ok(dense::returns_mod(model, order, p)?
            .into_iter()
            .map(|v| ring.from_i64(v as i64))
            .collect()),
        None => Ok(dense::returns_exact(model, order)?.iter().map(|v| ring.from_bigint(v)).collect()),
    }
}

/// Totals and returns computed from the sparse layers; an oracle for the
/// dense engine.
pub fn sparse_totals_and_returns<R: Ring>(
    model: &ModelSpec,
    order: usize,
    ring: R,
) -> Result<(Vec<R::Elem>, Vec<R::Elem>)> {
    model.validate()?;
    let n = order as u64 + 1;
    check_budget(n * n)?;
    let mut layer = DPLayer::initial(model, ring);
    let mut totals = vec![layer.total()];
    let mut returns = vec![ring.one()];
    for _ in 0..order {
        layer = dp_step(&layer, model);
        totals.push(layer.total());
        returns.push(layer.counts.coeff(model.start.0, model.start.1));
    }
    Ok((totals, returns))
}
