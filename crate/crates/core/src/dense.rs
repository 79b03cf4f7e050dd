//! Dense layer-by-layer counting for long sequences.
//!
//! Layer `n` lives on an `(n+1) x (n+1)` grid indexed by `(a, b)` with
//! `i = s1 - n + a + b` and `j = s2 + a - b`. Steps map `(a, b)` to
//! `(a+1, b+1)` (E), `(a, b)` (W), `(a+1, b)` (N) and `(a, b+1)` (S), so the
//! free update is two passes of neighbour sums done in place, last row
//! first. Barrier lines and region edges touch O(n) cells per layer and are
//! patched afterwards.
//!
//! Every cell holds `K` lanes: `K` independent primes for multi-modular runs,
//! or one `f64` with a factor 1/4 applied per step.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;

use crate::enumerate::check_budget;
use crate::error::Result;
use crate::model::{ModelSpec, Region};
use crate::ring::{primes_below, PrimeField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full grid; totals and returns.
    Totals,
    /// Only cells that can still get back to the start; returns only.
    Returns,
}

trait Lanes: Sync {
    type T: Copy + Default + Send + Sync + PartialEq + Debug;
    fn width(&self) -> usize;
    fn one(&self) -> Self::T;
    /// `dst = a + b` elementwise.
    fn sum_into(&self, dst: &mut [Self::T], a: &[Self::T], b: &[Self::T]);
    /// `dst[x] = scale(h[x] + h[x + K])`.
    fn pair_into(&self, dst: &mut [Self::T], h: &[Self::T]);
    fn add(&self, x: Self::T, y: Self::T, lane: usize) -> Self::T;
    fn sub(&self, x: Self::T, y: Self::T, lane: usize) -> Self::T;
    /// Per-step scaling applied to a value from the previous layer.
    fn scale(&self, x: Self::T) -> Self::T;
    /// Total of the next layer before any step is removed.
    fn grow(&self, total: Self::T, lane: usize) -> Self::T;
}

struct ModLanes {
    primes: Vec<u32>,
    /// `primes` repeated across a row, so row slices see their own moduli.
    moduli: Vec<u32>,
}

impl ModLanes {
    fn new(primes: &[u32], cells: usize) -> Self {
        let moduli = primes.iter().copied().cycle().take(cells * primes.len()).collect();
        ModLanes {
            primes: primes.to_vec(),
            moduli,
        }
    }
}

#[inline(always)]
fn add_mod(x: u32, y: u32, p: u32) -> u32 {
    let s = x.wrapping_add(y);
    s.min(s.wrapping_sub(p))
}

impl Lanes for ModLanes {
    type T = u32;

    #[inline(always)]
    fn width(&self) -> usize {
        self.primes.len()
    }

    #[inline(always)]
    fn one(&self) -> u32 {
        1
    }

    #[inline(always)]
    fn sum_into(&self, dst: &mut [u32], a: &[u32], b: &[u32]) {
        let m = &self.moduli[..dst.len()];
        for (((d, &x), &y), &p) in dst.iter_mut().zip(a).zip(b).zip(m) {
            *d = add_mod(x, y, p);
        }
    }

    #[inline(always)]
    fn pair_into(&self, dst: &mut [u32], h: &[u32]) {
        let k = self.width();
        let n = dst.len();
        let m = &self.moduli[..n];
        for (((d, &x), &y), &p) in dst.iter_mut().zip(&h[..n]).zip(&h[k..k + n]).zip(m) {
            *d = add_mod(x, y, p);
        }
    }

    #[inline(always)]
    fn add(&self, x: u32, y: u32, lane: usize) -> u32 {
        add_mod(x, y, self.primes[lane])
    }

    #[inline(always)]
    fn sub(&self, x: u32, y: u32, lane: usize) -> u32 {
        let p = self.primes[lane];
        add_mod(x, p - y, p)
    }

    #[inline(always)]
    fn scale(&self, x: u32) -> u32 {
        x
    }

    #[inline(always)]
    fn grow(&self, total: u32, lane: usize) -> u32 {
        let p = self.primes[lane] as u64;
        (total as u64 * 4 % p) as u32
    }
}

/// Walk counts divided by `4^n`.
struct ScaledLanes;

impl Lanes for ScaledLanes {
    type T = f64;

    #[inline(always)]
    fn width(&self) -> usize {
        1
    }

    #[inline(always)]
    fn one(&self) -> f64 {
        1.0
    }

    #[inline(always)]
    fn sum_into(&self, dst: &mut [f64], a: &[f64], b: &[f64]) {
        for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
            *d = x + y;
        }
    }

    #[inline(always)]
    fn pair_into(&self, dst: &mut [f64], h: &[f64]) {
        let n = dst.len();
        for ((d, &x), &y) in dst.iter_mut().zip(&h[..n]).zip(&h[1..n + 1]) {
            *d = 0.25 * (x + y);
        }
    }

    #[inline(always)]
    fn add(&self, x: f64, y: f64, _: usize) -> f64 {
        x + y
    }

    #[inline(always)]
    fn sub(&self, x: f64, y: f64, _: usize) -> f64 {
        x - y
    }

    #[inline(always)]
    fn scale(&self, x: f64) -> f64 {
        0.25 * x
    }

    #[inline(always)]
    fn grow(&self, total: f64, _: usize) -> f64 {
        total
    }
}

struct Output<T> {
    /// `totals[n * K + lane]`; empty in returns mode.
    totals: Vec<T>,
    returns: Vec<T>,
}

fn run<L: Lanes>(lanes: &L, model: &ModelSpec, order: usize, mode: Mode) -> Output<L::T> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            return unsafe { run_avx2(lanes, model, order, mode) };
        }
    }
    run_inner(lanes, model, order, mode)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn run_avx2<L: Lanes>(lanes: &L, model: &ModelSpec, order: usize, mode: Mode) -> Output<L::T> {
    run_inner(lanes, model, order, mode)
}

/// Rows and columns of layer `n` that matter in `mode`.
#[inline(always)]
fn window(n: usize, order: usize, mode: Mode) -> (usize, usize) {
    match mode {
        Mode::Totals => (0, n),
        Mode::Returns => {
            let reach = order - n;
            let lo = if n > reach { (n - reach).div_ceil(2) } else { 0 };
            let hi = ((n + reach) / 2).min(n);
            (lo, hi)
        }
    }
}

/// Rows of layer `n` kept in cache at once while several steps are applied.
fn block_steps(row_bytes: usize) -> usize {
    const TARGET: usize = 768 * 1024;
    (TARGET / row_bytes.max(1)).clamp(1, 32)
}

/// State shared by the steps of one block.
struct StepState<T> {
    /// Pending subtractions in the current row: lane offset and saved value.
    saved: Vec<(usize, T)>,
    removed: Vec<T>,
}

#[inline(always)]
fn run_inner<L: Lanes>(lanes: &L, model: &ModelSpec, order: usize, mode: Mode) -> Output<L::T> {
    let k = lanes.width();
    let zero = L::T::default();
    let cells = order + 1;
    let stride = cells * k;
    let mut grid = vec![zero; cells * stride];
    let zero_row = vec![zero; stride];
    let mut h = vec![zero; (cells + 1) * k];
    let (s1, s2) = (model.start.0 as i64, model.start.1 as i64);

    for lane in 0..k {
        grid[lane] = lanes.one();
    }
    let mut totals = Vec::new();
    if mode == Mode::Totals {
        totals = vec![zero; cells * k];
        totals[..k].fill(lanes.one());
    }
    let mut returns = vec![zero; cells * k];
    returns[..k].fill(lanes.one());

    let block = block_steps(stride * std::mem::size_of::<L::T>());
    let mut states: Vec<StepState<L::T>> = (0..block)
        .map(|_| StepState {
            saved: Vec::new(),
            removed: vec![zero; k],
        })
        .collect();

    // Steps n0+1 ..= n0+steps are applied as a skewed wavefront: at wave
    // position w, step n0+t updates row w+t-1. Rows are visited in
    // descending order, so every step reads its two source rows before the
    // next step overwrites them.
    let mut n0 = 0;
    while n0 < order {
        let steps = block.min(order - n0);
        let mut wmax = i64::MIN;
        let mut wmin = i64::MAX;
        for t in 1..=steps {
            let (lo, hi) = window(n0 + t, order, mode);
            wmax = wmax.max(hi as i64 - t as i64 + 1);
            wmin = wmin.min(lo as i64 - t as i64 + 1);
            states[t - 1].removed.fill(zero);
        }
        for w in (wmin..=wmax).rev() {
            for t in 1..=steps {
                let a = w + t as i64 - 1;
                let m = n0 + t;
                let (lo, hi) = window(m, order, mode);
                if a < lo as i64 || a > hi as i64 {
                    continue;
                }
                let a = a as usize;
                let n = m - 1;
                let (olo, ohi) = window(n, order, mode);
                let in_new = |a: i64, b: i64| a >= lo as i64 && a <= hi as i64 && b >= lo as i64 && b <= hi as i64;
                let in_old =
                    |a: i64, b: i64| a >= olo as i64 && a <= ohi as i64 && b >= olo as i64 && b <= ohi as i64;
                let state = &mut states[t - 1];
                let ai = a as i64;

                // West steps from the line i = 0, that is a + b = n - s1.
                state.saved.clear();
                let b = n as i64 - s1 - ai;
                if in_old(ai, b) && model.west_barrier.contains((s2 + ai - b) as i32) && in_new(ai, b) {
                    let at = a * stride + b as usize * k;
                    for lane in 0..k {
                        state.saved.push((b as usize * k + lane, grid[at + lane]));
                    }
                }
                // South steps from the line j = 0, that is b = a + s2.
                let b = ai + s2;
                let i = s1 - n as i64 + 2 * ai + s2;
                if in_old(ai, b) && model.south_barrier.contains(i as i32) && in_new(ai, b + 1) {
                    let at = a * stride + b as usize * k;
                    for lane in 0..k {
                        state.saved.push(((b as usize + 1) * k + lane, grid[at + lane]));
                    }
                }

                let (before, rest) = grid.split_at_mut(a * stride);
                let row = &mut rest[..stride];
                let prev: &[L::T] = if a > 0 { &before[(a - 1) * stride..] } else { &zero_row };
                let width = hi - lo + 1;
                let hs = &mut h[..(width + 1) * k];
                if lo == 0 {
                    hs[..k].fill(zero);
                    lanes.sum_into(&mut hs[k..], &row[..width * k], &prev[..width * k]);
                } else {
                    let from = (lo - 1) * k;
                    let to = (hi + 1) * k;
                    lanes.sum_into(hs, &row[from..to], &prev[from..to]);
                }
                lanes.pair_into(&mut row[lo * k..(hi + 1) * k], hs);

                for &(col, old) in &state.saved {
                    let lane = col % k;
                    let v = lanes.scale(old);
                    row[col] = lanes.sub(row[col], v, lane);
                    state.removed[lane] = lanes.add(state.removed[lane], v, lane);
                }

                let mut clear = |b: i64, row: &mut [L::T]| {
                    if in_new(ai, b) {
                        let at = b as usize * k;
                        for lane in 0..k {
                            state.removed[lane] = lanes.add(state.removed[lane], row[at + lane], lane);
                            row[at + lane] = zero;
                        }
                    }
                };
                let mi = m as i64;
                match model.region {
                    Region::FullPlane => {}
                    Region::QuarterPlane => {
                        // i = -1: a + b = m - 1 - s1; j = -1: b = a + 1 + s2.
                        clear(mi - 1 - s1 - ai, row);
                        clear(ai + 1 + s2, row);
                    }
                    Region::AvoidNonNegQuadrant => {
                        // i = 0 with j >= 0, and j = 0 with i >= 0.
                        let b = mi - s1 - ai;
                        if s2 + ai - b >= 0 {
                            clear(b, row);
                        }
                        let b = ai + s2;
                        if s1 - mi + ai + b >= 0 {
                            clear(b, row);
                        }
                    }
                }

                if m % 2 == 0 && a == m / 2 {
                    let at = (m / 2) * k;
                    returns[m * k..(m + 1) * k].copy_from_slice(&row[at..at + k]);
                }
            }
        }
        if mode == Mode::Totals {
            for t in 1..=steps {
                let (n, m) = (n0 + t - 1, n0 + t);
                for lane in 0..k {
                    let grown = lanes.grow(totals[n * k + lane], lane);
                    totals[m * k + lane] = lanes.sub(grown, states[t - 1].removed[lane], lane);
                }
            }
        }
        n0 += steps;
    }
    Output { totals, returns }
}

fn check_field(p: u32) -> Result<()> {
    PrimeField::new(p).map(|_| ())
}

fn grid_cells(order: usize, lanes: usize) -> u64 {
    let c = order as u64 + 1;
    c * c * lanes as u64
}

/// Totals and returns modulo each prime, one vector per prime.
pub fn counts_multi_mod(
    model: &ModelSpec,
    order: usize,
    primes: &[u32],
    mode: Mode,
) -> Result<(Vec<Vec<u32>>, Vec<Vec<u32>>)> {
    model.validate()?;
    for &p in primes {
        check_field(p)?;
    }
    const BATCH: usize = 8;
    let batches: Vec<&[u32]> = primes.chunks(BATCH).collect();
    let concurrent = rayon::current_num_threads().min(batches.len()).max(1);
    check_budget(grid_cells(order, BATCH.min(primes.len())) * concurrent as u64)?;
    let outs: Vec<Output<u32>> = batches
        .par_iter()
        .map(|batch| run(&ModLanes::new(batch, order + 2), model, order, mode))
        .collect();
    let mut totals = Vec::with_capacity(primes.len());
    let mut returns = Vec::with_capacity(primes.len());
    for (batch, out) in batches.iter().zip(&outs) {
        let k = batch.len();
        for lane in 0..k {
            if mode == Mode::Totals {
                totals.push(out.totals.iter().skip(lane).step_by(k).copied().collect());
            }
            returns.push(out.returns.iter().skip(lane).step_by(k).copied().collect());
        }
    }
    Ok((totals, returns))
}

pub fn totals_mod(model: &ModelSpec, order: usize, p: u32) -> Result<Vec<u32>> {
    Ok(counts_multi_mod(model, order, &[p], Mode::Totals)?.0.remove(0))
}

pub fn returns_mod(model: &ModelSpec, order: usize, p: u32) -> Result<Vec<u32>> {
    Ok(counts_multi_mod(model, order, &[p], Mode::Returns)?.1.remove(0))
}

/// Number of primes below 2^31 whose product exceeds `4^order`.
fn primes_needed(order: usize) -> usize {
    (2 * order + 1).div_ceil(30) + 1
}

/// Chinese remaindering by mixed radix; residues are reconstructed in `[0, prod p)`.
pub struct Garner {
    primes: Vec<u32>,
    /// `inv[i][k] = p_i^{-1} mod p_k` for `i < k`.
    inv: Vec<Vec<u64>>,
}

impl Garner {
    pub fn new(primes: &[u32]) -> Self {
        let inv = (0..primes.len())
            .map(|i| {
                (0..primes.len())
                    .map(|k| {
                        if i < k {
                            let f = PrimeField::new(primes[k]).expect("prime");
                            f.inv_u32(primes[i] % primes[k]).expect("distinct primes") as u64
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        Garner {
            primes: primes.to_vec(),
            inv,
        }
    }

    pub fn reconstruct(&self, residues: &[u32]) -> BigUint {
        let k = self.primes.len();
        let mut digits = vec![0u64; k];
        for j in 0..k {
            let p = self.primes[j] as u64;
            let mut v = residues[j] as u64 % p;
            for i in 0..j {
                v = (v + p - digits[i] % p) % p * self.inv[i][j] % p;
            }
            digits[j] = v;
        }
        let mut x = BigUint::from(0u32);
        for j in (0..k).rev() {
            x = x * self.primes[j] + digits[j];
        }
        x
    }
}

fn exact_counts(model: &ModelSpec, order: usize, mode: Mode) -> Result<Vec<BigInt>> {
    let primes = primes_below(1 << 31, primes_needed(order));
    let (totals, returns) = counts_multi_mod(model, order, &primes, mode)?;
    let per_prime = if mode == Mode::Totals { totals } else { returns };
    let garner = Garner::new(&primes);
    Ok((0..=order)
        .into_par_iter()
        .map(|n| {
            let residues: Vec<u32> = per_prime.iter().map(|v| v[n]).collect();
            BigInt::from(garner.reconstruct(&residues))
        })
        .collect())
}

pub fn totals_exact(model: &ModelSpec, order: usize) -> Result<Vec<BigInt>> {
    exact_counts(model, order, Mode::Totals)
}

pub fn returns_exact(model: &ModelSpec, order: usize) -> Result<Vec<BigInt>> {
    exact_counts(model, order, Mode::Returns)
}

/// Turns subnormal floats into zero while alive; far-away cells underflow
/// and would otherwise crawl.
struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

impl FlushSubnormals {
    #[allow(deprecated)]
    fn new() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_getcsr, _mm_setcsr};
            // SAFETY: only the flush-to-zero and denormals-are-zero bits change.
            unsafe {
                let saved = _mm_getcsr();
                _mm_setcsr(saved | 0x8040);
                FlushSubnormals { saved }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        FlushSubnormals {}
    }
}

impl Drop for FlushSubnormals {
    #[allow(deprecated)]
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: restores the control word read in `new`.
        unsafe {
            std::arch::x86_64::_mm_setcsr(self.saved)
        }
    }
}

/// Natural logs of the counts, from a floating-point run scaled by `4^-n`.
/// Zero counts give `-inf`.
pub fn log_counts_float(model: &ModelSpec, order: usize, mode: Mode) -> Result<Vec<f64>> {
    model.validate()?;
    check_budget(grid_cells(order, 1))?;
    let out = {
        let _flush = FlushSubnormals::new();
        run(&ScaledLanes, model, order, mode)
    };
    let values = if mode == Mode::Totals { out.totals } else { out.returns };
    let ln4 = 4f64.ln();
    Ok(values
        .iter()
        .enumerate()
        .map(|(n, &v)| if v > 0.0 { v.ln() + n as f64 * ln4 } else { f64::NEG_INFINITY })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::sparse_totals_and_returns;
    use crate::model::{model_catalog, DomainSpec};
    use crate::ring::{Integers, Ring};

    fn mixed_models() -> Vec<ModelSpec> {
        let mut out = model_catalog();
        out.push(ModelSpec::barrier("mix", DomainSpec::Pos, DomainSpec::NonPos));
        out.push(ModelSpec {
            start: (-1, 1),
            ..ModelSpec::barrier("alt", DomainSpec::Neg, DomainSpec::Neg)
        });
        out.push(ModelSpec {
            start: (0, -1),
            ..ModelSpec::barrier("edge", DomainSpec::All, DomainSpec::All)
        });
        out.push(ModelSpec {
            start: (2, 3),
            region: Region::QuarterPlane,
            ..ModelSpec::barrier("qp23", DomainSpec::Empty, DomainSpec::Empty)
        });
        out.push(ModelSpec {
            start: (-3, 2),
            region: Region::AvoidNonNegQuadrant,
            ..ModelSpec::barrier("tqp", DomainSpec::NonNeg, DomainSpec::Empty)
        });
        out
    }

    #[test]
    fn matches_sparse_oracle() {
        let p = 1_000_003;
        for m in mixed_models() {
            let (t, r) = sparse_totals_and_returns(&m, 40, PrimeField::new(p).unwrap()).unwrap();
            assert_eq!(totals_mod(&m, 40, p).unwrap(), t, "{}", m.id);
            assert_eq!(returns_mod(&m, 40, p).unwrap(), r, "{}", m.id);
            let (te, re) = sparse_totals_and_returns(&m, 40, Integers).unwrap();
            assert_eq!(totals_exact(&m, 40).unwrap(), te, "{}", m.id);
            assert_eq!(returns_exact(&m, 40).unwrap(), re, "{}", m.id);
        }
    }

    #[test]
    fn multi_prime_lanes_agree_with_single() {
        let m = crate::model::catalog_model("S5").unwrap();
        let primes = primes_below(1 << 31, 11);
        let (t, r) = counts_multi_mod(&m, 60, &primes, Mode::Totals).unwrap();
        for (idx, &p) in primes.iter().enumerate() {
            assert_eq!(t[idx], totals_mod(&m, 60, p).unwrap());
            assert_eq!(r[idx], returns_mod(&m, 60, p).unwrap());
        }
    }

    #[test]
    fn float_run_tracks_exact_logs() {
        for m in mixed_models() {
            let exact = totals_exact(&m, 80).unwrap();
            let logs = log_counts_float(&m, 80, Mode::Totals).unwrap();
            let ret = returns_exact(&m, 80).unwrap();
            let rlogs = log_counts_float(&m, 80, Mode::Returns).unwrap();
            for n in 0..=80 {
                let e = crate::asymptotics::ln_bigint(&exact[n]);
                assert!((e - logs[n]).abs() < 1e-10, "{} n={n}", m.id);
                if ret[n] == BigInt::from(0) {
                    assert!(rlogs[n] == f64::NEG_INFINITY || rlogs[n] < -600.0);
                } else {
                    let e = crate::asymptotics::ln_bigint(&ret[n]);
                    assert!((e - rlogs[n]).abs() < 1e-9, "{} n={n}", m.id);
                }
            }
        }
    }

    #[test]
    fn order_zero_and_small_values() {
        let s2 = crate::model::catalog_model("S2").unwrap();
        assert_eq!(totals_exact(&s2, 0).unwrap(), vec![BigInt::from(1)]);
        let t = totals_exact(&s2, 3).unwrap();
        assert_eq!(t, [1, 4, 14, 48].map(BigInt::from).to_vec());
        let r = returns_mod(&s2, 1, 45007).unwrap();
        assert_eq!(r, vec![1, 0]);
        assert_eq!(Integers.from_i64(3), BigInt::from(3));
    }

    #[test]
    fn garner_round_trip() {
        let primes = primes_below(1 << 31, 5);
        let g = Garner::new(&primes);
        let x = BigUint::from(7u32).pow(50);
        let residues: Vec<u32> = primes
            .iter()
            .map(|&p| (&x % p).try_into().unwrap())
            .collect();
        assert_eq!(g.reconstruct(&residues), x);
    }
}
