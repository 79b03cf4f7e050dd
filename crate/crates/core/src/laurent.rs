//! Sparse bivariate Laurent polynomials in `x`, `y`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::ring::Ring;

pub type Exponent = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    #[inline]
    pub fn pick(self, (i, j): Exponent) -> i32 {
        match self {
            Axis::X => i,
            Axis::Y => j,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Sign class of an exponent. `Zero`, `Pos` and `Neg` partition the integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignClass {
    All,
    Pos,
    Neg,
    NonNeg,
    NonPos,
    Zero,
}

impl SignClass {
    #[inline]
    pub fn contains(self, e: i32) -> bool {
        match self {
            SignClass::All => true,
            SignClass::Pos => e > 0,
            SignClass::Neg => e < 0,
            SignClass::NonNeg => e >= 0,
            SignClass::NonPos => e <= 0,
            SignClass::Zero => e == 0,
        }
    }
}

/// One bracket operator: `[x^>]`, `[y^0]`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SectionSpec {
    pub axis: Axis,
    pub region: SignClass,
}

impl SectionSpec {
    pub const fn new(axis: Axis, region: SignClass) -> Self {
        SectionSpec { axis, region }
    }

    #[inline]
    pub fn keeps(&self, e: Exponent) -> bool {
        self.region.contains(self.axis.pick(e))
    }
}

/// A Laurent polynomial with no stored zero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly2<R: Ring> {
    ring: R,
    terms: BTreeMap<Exponent, R::Elem>,
}

impl<R: Ring> LaurentPoly2<R> {
    pub fn zero(ring: R) -> Self {
        LaurentPoly2 {
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: R) -> Self {
        Self::monomial(ring, 0, 0, ring.one())
    }

    pub fn monomial(ring: R, i: i32, j: i32, c: R::Elem) -> Self {
        let mut p = Self::zero(ring);
        p.add_term((i, j), &c);
        p
    }

    pub fn x_pow(ring: R, i: i32) -> Self {
        Self::monomial(ring, i, 0, ring.one())
    }

    pub fn y_pow(ring: R, j: i32) -> Self {
        Self::monomial(ring, 0, j, ring.one())
    }

    /// Builds a polynomial from `(i, j, c)` triples with small integer coefficients.
    pub fn from_ints(ring: R, terms: &[(i32, i32, i64)]) -> Self {
        let mut p = Self::zero(ring);
        for &(i, j, c) in terms {
            p.add_term((i, j), &ring.from_i64(c));
        }
        p
    }

    /// `x + y + 1/x + 1/y`.
    pub fn step_polynomial(ring: R) -> Self {
        Self::from_ints(ring, &[(1, 0, 1), (-1, 0, 1), (0, 1, 1), (0, -1, 1)])
    }

    pub fn ring(&self) -> R {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &R::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: i32, j: i32) -> R::Elem {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    /// Adds `c * x^i y^j`, keeping the canonical form.
    pub fn add_term(&mut self, e: Exponent, c: &R::Elem) {
        if self.ring.is_zero(c) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                self.ring.add_assign(o.get_mut(), c);
                if self.ring.is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            Err(Error::MixedRing(
                self.ring.descriptor(),
                other.ring.descriptor(),
            ))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, &self.ring.neg(c));
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let r = self.ring;
        let mut acc: BTreeMap<Exponent, R::Elem> = BTreeMap::new();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                let prod = r.mul(c1, c2);
                acc.entry((i1 + i2, j1 + j2))
                    .and_modify(|c| r.add_assign(c, &prod))
                    .or_insert(prod);
            }
        }
        acc.retain(|_, c| !r.is_zero(c));
        Ok(LaurentPoly2 {
            ring: r,
            terms: acc,
        })
    }

    /// Adds `a * b` into `self` in place.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let r = self.ring;
        for (&(i1, j1), c1) in &a.terms {
            for (&(i2, j2), c2) in &b.terms {
                self.add_term((i1 + i2, j1 + j2), &r.mul(c1, c2));
            }
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let r = self.ring;
        if r.is_zero(c) {
            return Self::zero(r);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| (*e, r.mul(v, c)))
            .filter(|(_, v)| !r.is_zero(v))
            .collect();
        LaurentPoly2 { ring: r, terms }
    }

    /// Multiplies by the monomial `x^di y^dj`.
    pub fn shift(&self, di: i32, dj: i32) -> Self {
        self.map_exponents(|(i, j)| (i + di, j + dj))
    }

    /// Applies an injective exponent map.
    pub fn map_exponents(&self, f: impl Fn(Exponent) -> Exponent) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (f(*e), c.clone())).collect();
        LaurentPoly2 {
            ring: self.ring,
            terms,
        }
    }

    pub fn filter(&self, keep: impl Fn(Exponent) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| keep(**e))
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        LaurentPoly2 {
            ring: self.ring,
            terms,
        }
    }

    pub fn section(&self, s: SectionSpec) -> Self {
        self.filter(|e| s.keeps(e))
    }

    /// Coefficient of `axis^k`, placed at exponent 0 on that axis.
    pub fn coeff_of(&self, axis: Axis, k: i32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| axis.pick(**e) == k)
            .map(|(&(i, j), c)| {
                let e = match axis {
                    Axis::X => (0, j),
                    Axis::Y => (i, 0),
                };
                (e, c.clone())
            })
            .collect();
        LaurentPoly2 {
            ring: self.ring,
            terms,
        }
    }

    pub fn swap_xy(&self) -> Self {
        self.map_exponents(|(i, j)| (j, i))
    }

    /// Value at `x = y = 1`.
    pub fn eval_one(&self) -> R::Elem {
        let r = self.ring;
        self.terms
            .values()
            .fold(r.zero(), |acc, c| r.add(&acc, c))
    }

    pub fn min_exponent(&self, axis: Axis) -> Option<i32> {
        self.terms.keys().map(|e| axis.pick(*e)).min()
    }

    pub fn max_exponent(&self, axis: Axis) -> Option<i32> {
        self.terms.keys().map(|e| axis.pick(*e)).max()
    }

    /// First term in exponent order.
    pub fn first_term(&self) -> Option<(Exponent, R::Elem)> {
        self.terms.iter().next().map(|(e, c)| (*e, c.clone()))
    }
}

fn fmt_var(out: &mut String, name: char, e: i32) {
    match e {
        0 => {}
        1 => out.push(name),
        _ => {
            out.push(name);
            out.push('^');
            out.push_str(&e.to_string());
        }
    }
}

impl<R: Ring> fmt::Display for LaurentPoly2<R> {
    /// Terms in decreasing exponent order, e.g. `x*y - x^-1*y - x*y^-1 + x^-1*y^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (&(i, j), c)) in self.terms.iter().rev().enumerate() {
            let mut cs = self.ring.format(c);
            let negative = cs.starts_with('-');
            if negative {
                cs.remove(0);
            }
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut mono = String::new();
            fmt_var(&mut mono, 'x', i);
            if i != 0 && j != 0 {
                mono.push('*');
            }
            fmt_var(&mut mono, 'y', j);
            match (mono.is_empty(), cs == "1") {
                (true, _) => out.push_str(&cs),
                (false, true) => out.push_str(&mono),
                (false, false) => {
                    if cs.contains('/') {
                        out.push_str(&format!("({cs})*{mono}"));
                    } else {
                        out.push_str(&format!("{cs}*{mono}"));
                    }
                }
            }
        }
        f.write_str(&out)
    }
}

impl<R: Ring> fmt::Debug for LaurentPoly2<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly2[{}]({})", self.ring.descriptor(), self)
    }
}

impl<'a, R: Ring> Add for &'a LaurentPoly2<R> {
    type Output = LaurentPoly2<R>;
    fn add(self, rhs: Self) -> LaurentPoly2<R> {
        self.checked_add(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Sub for &'a LaurentPoly2<R> {
    type Output = LaurentPoly2<R>;
    fn sub(self, rhs: Self) -> LaurentPoly2<R> {
        self.checked_sub(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Mul for &'a LaurentPoly2<R> {
    type Output = LaurentPoly2<R>;
    fn mul(self, rhs: Self) -> LaurentPoly2<R> {
        self.checked_mul(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Neg for &'a LaurentPoly2<R> {
    type Output = LaurentPoly2<R>;
    fn neg(self) -> LaurentPoly2<R> {
        let r = self.ring;
        LaurentPoly2 {
            ring: r,
            terms: self.terms.iter().map(|(e, c)| (*e, r.neg(c))).collect(),
        }
    }
}
