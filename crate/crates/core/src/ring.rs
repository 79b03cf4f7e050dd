//! Exact coefficient rings.
//!
//! A [`Ring`] is a small copyable context object; elements are plain values
//! (`BigRational`, `BigInt` or a reduced `u32` residue). Every polynomial and
//! series carries its ring, so operands from different rings can be detected
//! and rejected.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default prime for modular computations.
pub const DEFAULT_PRIME: u32 = 45007;
/// Second default prime, used to cross-check modular results.
pub const COLLISION_PRIME: u32 = 2_147_483_629;

pub trait Ring: Copy + Clone + PartialEq + Eq + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` when `a` is not a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn descriptor(&self) -> CoefficientRing;
    fn format(&self, a: &Self::Elem) -> String;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    fn half(&self) -> Option<Self::Elem> {
        self.inv(&self.from_i64(2))
    }

    /// The modulus when this is a prime field.
    fn modulus(&self) -> Option<u32> {
        match self.descriptor() {
            CoefficientRing::ModPrime(p) => Some(p),
            _ => None,
        }
    }
}

/// Runtime description of a coefficient ring, used in file headers, the CLI
/// and the C interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientRing {
    ExactRational,
    ExactInteger,
    ModPrime(u32),
}

impl CoefficientRing {
    pub fn mod_prime(p: u32) -> Result<Self> {
        PrimeField::new(p).map(|f| CoefficientRing::ModPrime(f.p()))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, CoefficientRing::ModPrime(_))
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::ExactRational => write!(f, "rational"),
            CoefficientRing::ExactInteger => write!(f, "exact"),
            CoefficientRing::ModPrime(p) => write!(f, "mod:{p}"),
        }
    }
}

impl FromStr for CoefficientRing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "integer" => Ok(CoefficientRing::ExactInteger),
            "rational" => Ok(CoefficientRing::ExactRational),
            _ => {
                let p = s
                    .strip_prefix("mod:")
                    .or_else(|| s.strip_prefix("mod"))
                    .ok_or_else(|| Error::Parse(format!("unknown ring descriptor `{s}`")))?;
                let p: u32 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad modulus in `{s}`")))?;
                CoefficientRing::mod_prime(p)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Integers;

/// Integers modulo a prime `p < 2^31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p >= 1 << 31 {
            return Err(Error::InvalidModulus(p, "modulus must be below 2^31"));
        }
        if !is_prime(p as u64) {
            return Err(Error::InvalidModulus(p, "modulus is not prime"));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn mul_u32(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn add_u32(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_u32(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn pow_u32(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_u32(acc, base);
            }
            base = self.mul_u32(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv_u32(&self, a: u32) -> Option<u32> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow_u32(a, self.p as u64 - 2))
        }
    }
}

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn add_assign(&self, a: &mut BigRational, b: &BigRational) {
        *a += b;
    }
    fn descriptor(&self) -> CoefficientRing {
        CoefficientRing::ExactRational
    }
    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
}

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn from_bigint(&self, v: &BigInt) -> BigInt {
        v.clone()
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
    fn add_assign(&self, a: &mut BigInt, b: &BigInt) {
        *a += b;
    }
    fn descriptor(&self) -> CoefficientRing {
        CoefficientRing::ExactInteger
    }
    fn format(&self, a: &BigInt) -> String {
        a.to_string()
    }
}

impl Ring for PrimeField {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        self.reduce_i64(v)
    }
    fn from_bigint(&self, v: &BigInt) -> u32 {
        v.mod_floor(&BigInt::from(self.p)).to_u32().unwrap()
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        self.add_u32(*a, *b)
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.sub_u32(*a, *b)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.mul_u32(*a, *b)
    }
    fn neg(&self, a: &u32) -> u32 {
        self.sub_u32(0, *a)
    }
    fn inv(&self, a: &u32) -> Option<u32> {
        self.inv_u32(*a)
    }
    fn descriptor(&self) -> CoefficientRing {
        CoefficientRing::ModPrime(self.p)
    }
    fn format(&self, a: &u32) -> String {
        a.to_string()
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes strictly below `bound`, in decreasing order.
pub fn primes_below(bound: u32, count: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(count);
    let mut c = bound.saturating_sub(1);
    while out.len() < count && c >= 2 {
        if is_prime(c as u64) {
            out.push(c);
        }
        c -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_modulus_rejected() {
        assert!(PrimeField::new(45007).is_ok());
        assert!(PrimeField::new(COLLISION_PRIME).is_ok());
        assert!(matches!(
            PrimeField::new(45009),
            Err(Error::InvalidModulus(45009, _))
        ));
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(2_147_483_659).is_err());
    }

    #[test]
    fn primality_small_table() {
        let sieve: Vec<u64> = (0..2000u64)
            .filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect();
        let mr: Vec<u64> = (0..2000u64).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, mr);
    }

    #[test]
    fn field_inverse_and_half() {
        let f = PrimeField::new(45007).unwrap();
        let h = f.half().unwrap();
        assert_eq!(f.mul(&h, &2), 1);
        assert_eq!(f.inv(&0), None);
        assert_eq!(Integers.half(), None);
        assert_eq!(
            Rationals.half().unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        let two = PrimeField::new(2).unwrap();
        assert_eq!(two.half(), None);
    }

    #[test]
    fn descriptor_round_trip() {
        for d in [
            CoefficientRing::ExactInteger,
            CoefficientRing::ExactRational,
            CoefficientRing::ModPrime(45007),
        ] {
            assert_eq!(d.to_string().parse::<CoefficientRing>().unwrap(), d);
        }
        assert!("mod:45009".parse::<CoefficientRing>().is_err());
    }

    #[test]
    fn negative_bigint_reduces_into_range() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.from_bigint(&BigInt::from(-1)), 6);
        assert_eq!(f.from_i64(-15), 6);
    }
}
