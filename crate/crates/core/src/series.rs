//! Truncated power series in `t` with Laurent-polynomial coefficients.
//!
//! The truncation order is explicit: a series of order `N` knows its
//! coefficients of `t^0..=t^N`. Binary operations truncate to the smaller
//! order of their operands.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::laurent::{Axis, Exponent, LaurentPoly2, SectionSpec};
use crate::ring::Ring;

#[derive(Clone, PartialEq, Eq)]
pub struct TSeries<R: Ring> {
    ring: R,
    coeffs: Vec<LaurentPoly2<R>>,
}

/// Location of the first nonzero coefficient of a series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Offender {
    pub t_order: usize,
    pub exponent: Exponent,
    pub coeff: String,
}

impl fmt::Display for Offender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t^{} x^{} y^{} coefficient {}",
            self.t_order, self.exponent.0, self.exponent.1, self.coeff
        )
    }
}

impl<R: Ring> TSeries<R> {
    pub fn zero(ring: R, order: usize) -> Self {
        TSeries {
            ring,
            coeffs: vec![LaurentPoly2::zero(ring); order + 1],
        }
    }

    /// The polynomial `p` viewed as a series constant in `t`.
    pub fn constant(p: LaurentPoly2<R>, order: usize) -> Self {
        let mut s = Self::zero(p.ring(), order);
        s.coeffs[0] = p;
        s
    }

    pub fn from_coeffs(ring: R, coeffs: Vec<LaurentPoly2<R>>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the t^0 coefficient");
        TSeries { ring, coeffs }
    }

    pub fn ring(&self) -> R {
        self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &LaurentPoly2<R> {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[LaurentPoly2<R>] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, p: LaurentPoly2<R>) {
        self.coeffs[n] = p;
    }

    pub fn truncate(&self, order: usize) -> Self {
        TSeries {
            ring: self.ring,
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
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
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect();
        Ok(TSeries {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect();
        Ok(TSeries {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut c = LaurentPoly2::zero(self.ring);
            for a in 0..=k {
                if self.coeffs[a].is_zero() || other.coeffs[k - a].is_zero() {
                    continue;
                }
                c.add_product(&self.coeffs[a], &other.coeffs[k - a]);
            }
            coeffs.push(c);
        }
        Ok(TSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// Multiplies every coefficient by the polynomial `p`.
    pub fn mul_poly(&self, p: &LaurentPoly2<R>) -> Self {
        self.map(|c| c * p)
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Multiplies by `x^di y^dj`.
    pub fn shift(&self, di: i32, dj: i32) -> Self {
        self.map(|p| p.shift(di, dj))
    }

    /// Multiplies by `t^k`, keeping the truncation order.
    pub fn shift_t(&self, k: usize) -> Self {
        let n = self.order();
        let coeffs = (0..=n)
            .map(|m| {
                if m >= k {
                    self.coeffs[m - k].clone()
                } else {
                    LaurentPoly2::zero(self.ring)
                }
            })
            .collect();
        TSeries {
            ring: self.ring,
            coeffs,
        }
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly2<R>) -> LaurentPoly2<R>) -> Self {
        TSeries {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn section(&self, s: SectionSpec) -> Self {
        self.map(|p| p.section(s))
    }

    /// Keeps the terms whose exponent satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(Exponent) -> bool + Copy) -> Self {
        self.map(|p| p.filter(keep))
    }

    pub fn coeff_of(&self, axis: Axis, k: i32) -> Self {
        self.map(|p| p.coeff_of(axis, k))
    }

    pub fn act(&self, g: GroupElement) -> Self {
        self.map(|p| g.act(p))
    }

    pub fn swap_xy(&self) -> Self {
        self.map(|p| p.swap_xy())
    }

    /// `F(1, 1, t)` as a coefficient list.
    pub fn eval_one(&self) -> Vec<R::Elem> {
        self.coeffs.iter().map(|p| p.eval_one()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|p| p.is_zero())
    }

    /// First nonzero coefficient, scanning `t^0` upwards.
    pub fn first_nonzero(&self) -> Option<Offender> {
        self.coeffs.iter().enumerate().find_map(|(n, p)| {
            p.first_term().map(|(e, c)| Offender {
                t_order: n,
                exponent: e,
                coeff: self.ring.format(&c),
            })
        })
    }

    /// `sum_n S^n t^n`, the expansion of `1 / (1 - S t)`.
    pub fn kernel_inverse(ring: R, order: usize) -> Self {
        let s = LaurentPoly2::step_polynomial(ring);
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(LaurentPoly2::one(ring));
        for n in 1..=order {
            let next = &coeffs[n - 1] * &s;
            coeffs.push(next);
        }
        TSeries { ring, coeffs }
    }

    /// Multiplies by `1 - S t`.
    pub fn mul_kernel(&self) -> Self {
        let s = LaurentPoly2::step_polynomial(self.ring);
        let st = self.mul_poly(&s).shift_t(1);
        self - &st
    }

    /// Multiplies by `1 / (1 - S t)`: `G = F + S t G`, solved order by order.
    pub fn div_kernel(&self) -> Self {
        let s = LaurentPoly2::step_polynomial(self.ring);
        let mut coeffs: Vec<LaurentPoly2<R>> = Vec::with_capacity(self.coeffs.len());
        for n in 0..=self.order() {
            let mut c = self.coeffs[n].clone();
            if n > 0 {
                c.add_product(&coeffs[n - 1], &s);
            }
            coeffs.push(c);
        }
        TSeries {
            ring: self.ring,
            coeffs,
        }
    }

    /// Substitutes `x -> root` where `root` has only `x^0` terms and no
    /// constant term in `t`. Terms with negative `x` exponents are rejected.
    pub fn substitute_x(&self, root: &TSeries<R>) -> Result<Self> {
        self.check_ring(root)?;
        let n = self.order().min(root.order());
        if root.coeffs.iter().any(|p| p.terms().any(|(e, _)| e.0 != 0)) {
            return Err(Error::Unsupported(
                "substitution value must be free of x".into(),
            ));
        }
        if !root.coeffs[0].is_zero() {
            return Err(Error::Unsupported(
                "substitution value must vanish at t = 0".into(),
            ));
        }
        let max_i = self.coeffs[..=n]
            .iter()
            .filter_map(|p| p.max_exponent(Axis::X))
            .max()
            .unwrap_or(0);
        if self.coeffs[..=n]
            .iter()
            .any(|p| p.min_exponent(Axis::X).is_some_and(|m| m < 0))
        {
            return Err(Error::Unsupported(
                "cannot substitute into negative powers of x".into(),
            ));
        }
        let root = root.truncate(n);
        // powers[i] = root^i; root^i = O(t^i) so powers above n vanish.
        let top = (max_i as usize).min(n);
        let mut powers = vec![TSeries::constant(LaurentPoly2::one(self.ring), n)];
        for i in 1..=top {
            let next = &powers[i - 1] * &root;
            powers.push(next);
        }
        let mut out = TSeries::zero(self.ring, n);
        for (m, p) in self.coeffs[..=n].iter().enumerate() {
            for i in 0..=top.min(n - m) {
                let ci = p.coeff_of(Axis::X, i as i32);
                if ci.is_zero() {
                    continue;
                }
                for k in (m + i)..=n {
                    let src = &powers[i].coeffs[k - m];
                    if !src.is_zero() {
                        out.coeffs[k].add_product(src, &ci);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Checks the support and parity of a walk series started at `start`.
    pub fn walk_support_ok(&self, start: (i32, i32)) -> bool {
        self.coeffs.iter().enumerate().all(|(n, p)| {
            p.terms().all(|(&(i, j), _)| {
                let d = (i - start.0).abs() + (j - start.1).abs();
                d as usize <= n && (i + j - start.0 - start.1 - n as i32).rem_euclid(2) == 0
            })
        })
    }
}

impl<R: Ring> fmt::Debug for TSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TSeries[{}] order {}", self.ring.descriptor(), self.order())?;
        for (n, p) in self.coeffs.iter().enumerate() {
            if !p.is_zero() {
                writeln!(f, "  t^{n}: {p}")?;
            }
        }
        Ok(())
    }
}

impl<'a, R: Ring> Add for &'a TSeries<R> {
    type Output = TSeries<R>;
    fn add(self, rhs: Self) -> TSeries<R> {
        self.checked_add(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Sub for &'a TSeries<R> {
    type Output = TSeries<R>;
    fn sub(self, rhs: Self) -> TSeries<R> {
        self.checked_sub(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Mul for &'a TSeries<R> {
    type Output = TSeries<R>;
    fn mul(self, rhs: Self) -> TSeries<R> {
        self.checked_mul(rhs).expect("ring mismatch")
    }
}

impl<'a, R: Ring> Neg for &'a TSeries<R> {
    type Output = TSeries<R>;
    fn neg(self) -> TSeries<R> {
        self.map(|p| -p)
    }
}
