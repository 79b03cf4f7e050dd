//! The group generated by `x -> 1/x` and `y -> 1/y`, and orbit sums.

use crate::laurent::LaurentPoly2;
use crate::ring::Ring;
use crate::series::TSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Id,
    /// `x -> 1/x`
    Phi,
    /// `y -> 1/y`
    Psi,
    PhiPsi,
}

impl GroupElement {
    pub const ALL: [GroupElement; 4] = [
        GroupElement::Id,
        GroupElement::Phi,
        GroupElement::Psi,
        GroupElement::PhiPsi,
    ];

    fn flips(self) -> (bool, bool) {
        match self {
            GroupElement::Id => (false, false),
            GroupElement::Phi => (true, false),
            GroupElement::Psi => (false, true),
            GroupElement::PhiPsi => (true, true),
        }
    }

    fn from_flips(fx: bool, fy: bool) -> Self {
        match (fx, fy) {
            (false, false) => GroupElement::Id,
            (true, false) => GroupElement::Phi,
            (false, true) => GroupElement::Psi,
            (true, true) => GroupElement::PhiPsi,
        }
    }

    /// `self ∘ other`
    pub fn compose(self, other: GroupElement) -> GroupElement {
        let (a, b) = self.flips();
        let (c, d) = other.flips();
        GroupElement::from_flips(a ^ c, b ^ d)
    }

    /// Sign in the orbit sum: `+1` for `Id` and `PhiPsi`, `-1` otherwise.
    pub fn sign(self) -> i64 {
        let (a, b) = self.flips();
        if a ^ b {
            -1
        } else {
            1
        }
    }

    pub fn act<R: Ring>(self, p: &LaurentPoly2<R>) -> LaurentPoly2<R> {
        let (fx, fy) = self.flips();
        p.map_exponents(|(i, j)| (if fx { -i } else { i }, if fy { -j } else { j }))
    }
}

/// `sum_g sign(g) g(x y p)`.
pub fn orbit_sum<R: Ring>(p: &LaurentPoly2<R>) -> LaurentPoly2<R> {
    let r = p.ring();
    let xyp = p.shift(1, 1);
    let mut out = LaurentPoly2::zero(r);
    for g in GroupElement::ALL {
        let term = g.act(&xyp).scale(&r.from_i64(g.sign()));
        out = &out + &term;
    }
    out
}

/// Orbit sum of `x y F` taken coefficientwise in `t`.
pub fn orbit_sum_series<R: Ring>(f: &TSeries<R>) -> TSeries<R> {
    f.map(orbit_sum)
}

/// Orbit sum of the start monomial `x^a y^b`.
pub fn start_orbit_sum<R: Ring>(ring: R, a: i32, b: i32) -> LaurentPoly2<R> {
    orbit_sum(&LaurentPoly2::monomial(ring, a, b, ring.one()))
}
