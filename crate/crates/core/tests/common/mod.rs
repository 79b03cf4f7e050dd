//! Planted sequences shared by the integration tests.

use num_bigint::BigInt;
use rand::Rng as _;
use rand_chacha::ChaCha8Rng;

use semiperm::guess::recurrence::Recurrence;
use semiperm::PrimeField;

/// Random recurrence of shape `(order, degree)` and terms generated from it
/// modulo `p`. The leading polynomial is kept nonzero on every index used.
pub fn planted_recurrence(rng: &mut ChaCha8Rng, p: u32, order: usize, degree: usize, len: usize) -> (Recurrence<PrimeField>, Vec<u32>) {
    let field = PrimeField::new(p).unwrap();
    loop {
        let coeffs: Vec<Vec<u32>> = (0..=order)
            .map(|_| (0..=degree).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        if coeffs[order][degree] == 0 {
            continue;
        }
        let rec = Recurrence::new(field, coeffs.clone()).unwrap();
        let lead_ok = (0..len).all(|n| rec.eval_poly(order, &((n % p as usize) as u32)) != 0);
        if !lead_ok {
            continue;
        }
        let mut terms: Vec<u32> = (0..order).map(|_| rng.gen_range(1..p)).collect();
        while terms.len() < len {
            let n = terms.len() - order;
            let nn = (n % p as usize) as u32;
            let mut acc = 0u32;
            for k in 0..order {
                acc = field.add_u32(acc, field.mul_u32(rec.eval_poly(k, &nn), terms[n + k]));
            }
            let lead = rec.eval_poly(order, &nn);
            let next = field.mul_u32(field.sub_u32(0, acc), field.inv_u32(lead).unwrap());
            terms.push(next);
        }
        return (rec, terms);
    }
}

pub fn flatten(rec: &Recurrence<PrimeField>, order: usize, degree: usize) -> Vec<u32> {
    let mut v = vec![0u32; (order + 1) * (degree + 1)];
    for (k, poly) in rec.coeffs().iter().enumerate() {
        for (e, &c) in poly.iter().enumerate() {
            v[k * (degree + 1) + e] = c;
        }
    }
    v
}

/// `round(c mu^n n^alpha)` for `n = 1..=len`, keeping the full double
/// precision of `c n^alpha`.
pub fn planted_form(c: f64, mu: u32, alpha: f64, len: usize) -> Vec<BigInt> {
    let mut power = BigInt::from(1);
    (1..=len)
        .map(|n| {
            power *= mu;
            let factor = c * (n as f64).powf(alpha);
            let shift = 52 - factor.log2().floor() as i32;
            let mantissa = (factor * 2f64.powi(shift)) as i64;
            let v: BigInt = &power * BigInt::from(mantissa);
            if shift > 0 {
                (v + (BigInt::from(1) << (shift - 1) as usize)) >> shift as usize
            } else {
                v << (-shift) as usize
            }
        })
        .collect()
}
