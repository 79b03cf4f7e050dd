//! Nullspaces over a prime field.
//!
//! Rows are kept as unreduced `u64` accumulators and only brought back
//! below `p` when another update could overflow. For primes below `2^16`
//! that practically never happens, so the inner loop is a plain
//! multiply-add.

use crate::error::Result;
use crate::ring::PrimeField;

/// A dense matrix over `Z/p`, row-major.
#[derive(Clone, Debug)]
pub struct ModMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn from_fn(p: u32, rows: usize, cols: usize, entry: impl Fn(usize, usize) -> u32) -> Result<Self> {
        let field = PrimeField::new(p)?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend((0..cols).map(|c| (entry(r, c) % p) as u64));
        }
        Ok(ModMatrix { field, rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        (self.data[r * self.cols + c] % self.field.p() as u64) as u32
    }
}

/// Result of forward elimination: pivot rows in normalized form.
struct Echelon {
    /// `(pivot column, row entries from that column on)`; entries reduced.
    pivots: Vec<(usize, Vec<u32>)>,
}

fn reduce_row(row: &mut [u64], p: u64) {
    for v in row {
        *v %= p;
    }
}

#[inline(always)]
fn axpy_inner(row: &mut [u64], pivot: &[u32], factor: u32) {
    for (x, &y) in row.iter_mut().zip(pivot) {
        *x += factor as u64 * y as u64;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_avx2(row: &mut [u64], pivot: &[u32], factor: u32) {
    axpy_inner(row, pivot, factor)
}

/// `row += factor * pivot` without reduction.
fn axpy(row: &mut [u64], pivot: &[u32], factor: u32) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: AVX2 support was checked just above.
            return unsafe { axpy_avx2(row, pivot, factor) };
        }
    }
    axpy_inner(row, pivot, factor)
}

fn echelon(mut m: ModMatrix) -> Echelon {
    let p = m.field.p() as u64;
    let cols = m.cols;
    let step = (p - 1) * (p - 1);
    let max_updates = if step == 0 { u64::MAX } else { (u64::MAX - p) / step };
    let mut updates = vec![0u64; m.rows];
    let mut active: Vec<usize> = (0..m.rows).collect();
    let mut pivots = Vec::new();

    for c in 0..cols {
        if active.is_empty() {
            break;
        }
        let found = active.iter().position(|&r| m.data[r * cols + c] % p != 0);
        let Some(pos) = found else { continue };
        let pr = active.remove(pos);
        let mut pivot: Vec<u32> = m.data[pr * cols + c..(pr + 1) * cols]
            .iter()
            .map(|&v| (v % p) as u32)
            .collect();
        let inv = m.field.inv_u32(pivot[0]).expect("nonzero pivot");
        for v in &mut pivot {
            *v = m.field.mul_u32(*v, inv);
        }
        for &r in &active {
            let row = &mut m.data[r * cols + c..(r + 1) * cols];
            let lead = (row[0] % p) as u32;
            row[0] = 0;
            if lead == 0 {
                continue;
            }
            if updates[r] >= max_updates {
                reduce_row(row, p);
                updates[r] = 0;
            }
            axpy(&mut row[1..], &pivot[1..], m.field.p() - lead);
            updates[r] += 1;
        }
        pivots.push((c, pivot));
    }
    Echelon { pivots }
}

pub fn rank(m: ModMatrix) -> usize {
    echelon(m).pivots.len()
}

/// A basis of `{v : M v = 0}`, one vector per free column, in reduced form:
/// each vector has a 1 at its free column and 0 at the other free columns.
/// Vectors are ordered by free column.
pub fn nullspace(m: ModMatrix) -> Vec<Vec<u32>> {
    let field = m.field;
    let cols = m.cols;
    let ech = echelon(m);
    if ech.pivots.len() == cols {
        return Vec::new();
    }
    // Back substitution to reduced row echelon form, last pivot first.
    let mut rows: Vec<(usize, Vec<u32>)> = ech
        .pivots
        .into_iter()
        .map(|(c, tail)| {
            let mut full = vec![0u32; cols];
            full[c..].copy_from_slice(&tail);
            (c, full)
        })
        .collect();
    for i in (0..rows.len()).rev() {
        let (ci, pivot_row) = {
            let (c, r) = &rows[i];
            (*c, r.clone())
        };
        for (_, row) in rows.iter_mut().take(i) {
            let f = row[ci];
            if f == 0 {
                continue;
            }
            let neg = field.p() - f;
            for (x, &y) in row[ci..].iter_mut().zip(&pivot_row[ci..]) {
                *x = field.add_u32(*x, field.mul_u32(neg, y));
            }
        }
    }
    let mut is_pivot = vec![false; cols];
    for (c, _) in &rows {
        is_pivot[*c] = true;
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![0u32; cols];
            v[free] = 1;
            for (c, row) in &rows {
                v[*c] = field.sub_u32(0, row[free]);
            }
            v
        })
        .collect()
}

/// `M v` reduced mod `p`.
pub fn apply(m: &ModMatrix, v: &[u32]) -> Vec<u32> {
    let f = m.field;
    (0..m.rows)
        .map(|r| {
            (0..m.cols).fold(0u32, |acc, c| f.add_u32(acc, f.mul_u32(m.get(r, c), v[c])))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn splitmix(x: u64) -> u64 {
        let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    #[test]
    fn small_nullspace() {
        // [1 2 3; 2 4 6] over Z/7: rank 1, two free columns.
        let m = ModMatrix::from_fn(7, 2, 3, |r, c| ((r + 1) * (c + 1)) as u32).unwrap();
        let ns = nullspace(m.clone());
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(apply(&m, v).iter().all(|&x| x == 0));
        }
        assert_eq!(ns[0], [5, 1, 0]);
        assert_eq!(rank(m), 1);
    }

    #[test]
    fn identity_has_trivial_nullspace() {
        let m = ModMatrix::from_fn(45007, 5, 5, |r, c| (r == c) as u32).unwrap();
        assert!(nullspace(m).is_empty());
    }

    #[test]
    fn large_prime_reduces_lazily() {
        let p = 2_147_483_629;
        let m = ModMatrix::from_fn(p, 40, 41, |r, c| (splitmix((r * 41 + c) as u64) % p as u64) as u32).unwrap();
        let ns = nullspace(m.clone());
        assert_eq!(ns.len(), 1);
        assert!(apply(&m, &ns[0]).iter().all(|&x| x == 0));
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_annihilated(
            rows in 1usize..12,
            cols in 1usize..12,
            seed in any::<u64>(),
            p in prop::sample::select(vec![2u32, 3, 7, 45007, 65521, 2_147_483_629]),
        ) {
            let m = ModMatrix::from_fn(p, rows, cols, |r, c| {
                let x = seed ^ ((r as u64) << 32 | c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                // Sparse-ish so rank deficiencies actually occur.
                if x % 3 == 0 { 0 } else { (x >> 16) as u32 % p }
            }).unwrap();
            let ns = nullspace(m.clone());
            prop_assert_eq!(ns.len() + rank(m.clone()), cols);
            for v in &ns {
                prop_assert!(apply(&m, v).iter().all(|&x| x == 0));
            }
        }
    }
}
