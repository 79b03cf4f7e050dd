//! Closed forms from the kernel method, evaluated as truncated series.
//!
//! Rational functions appear only as `1 / (1 - S t)`, expanded by
//! [`TSeries::kernel_inverse`] or applied with [`TSeries::div_kernel`].

use std::fmt;
use std::str::FromStr;

use crate::enumerate::enumerate_series;
use crate::error::{Error, Result};
use crate::group::{orbit_sum, orbit_sum_series, start_orbit_sum, GroupElement};
use crate::laurent::{Axis, LaurentPoly2, SectionSpec, SignClass};
use crate::model::{catalog_model, ModelSpec, Region};
use crate::ring::Ring;
use crate::series::TSeries;

const X_POS: SectionSpec = SectionSpec::new(Axis::X, SignClass::Pos);
const X_NEG: SectionSpec = SectionSpec::new(Axis::X, SignClass::Neg);
const X_NONNEG: SectionSpec = SectionSpec::new(Axis::X, SignClass::NonNeg);
const Y_POS: SectionSpec = SectionSpec::new(Axis::Y, SignClass::Pos);
const Y_NEG: SectionSpec = SectionSpec::new(Axis::Y, SignClass::Neg);
const Y_NONNEG: SectionSpec = SectionSpec::new(Axis::Y, SignClass::NonNeg);

pub fn kernel_inverse_series<R: Ring>(order: usize, ring: R) -> TSeries<R> {
    TSeries::kernel_inverse(ring, order)
}

/// `xy - x^-1 y - x y^-1 + x^-1 y^-1`
pub fn orbit_numerator<R: Ring>(ring: R) -> LaurentPoly2<R> {
    orbit_sum(&LaurentPoly2::one(ring))
}

/// `sum_g sign(g) g(f)`
pub fn signed_orbit<R: Ring>(f: &TSeries<R>) -> TSeries<R> {
    let mut out = TSeries::zero(f.ring(), f.order());
    for g in GroupElement::ALL {
        let term = f.act(g);
        out = if g.sign() > 0 { &out + &term } else { &out - &term };
    }
    out
}

/// Quarter-plane walks from the origin: `x^-1 y^-1 [x>][y>](O / (1 - S t))`.
pub fn quarter_plane_q<R: Ring>(order: usize, ring: R) -> TSeries<R> {
    TSeries::constant(orbit_numerator(ring), order)
        .div_kernel()
        .section(X_POS)
        .section(Y_POS)
        .shift(-1, -1)
}

#[derive(Clone, Debug)]
pub struct Compartments<R: Ring> {
    pub f1: TSeries<R>,
    pub f2: TSeries<R>,
    pub f3: TSeries<R>,
    pub f4: TSeries<R>,
}

impl<R: Ring> Compartments<R> {
    pub fn sum(&self) -> TSeries<R> {
        &(&(&self.f1 + &self.f2) + &self.f3) + &self.f4
    }

    /// The four sign-quadrant sections of a series.
    pub fn of_series(f: &TSeries<R>) -> Self {
        Compartments {
            f1: f.section(X_NEG).section(Y_NEG),
            f2: f.section(X_NEG).section(Y_NONNEG),
            f3: f.section(X_NONNEG).section(Y_NEG),
            f4: f.section(X_NONNEG).section(Y_NONNEG),
        }
    }
}

/// The four compartments of the model where both axes are one-way.
pub fn f_compartments_s2<R: Ring>(order: usize, ring: R) -> Compartments<R> {
    let k = TSeries::kernel_inverse(ring, order);
    let y_minus = LaurentPoly2::from_ints(ring, &[(0, 1, 1), (0, -1, -1)]);

    let f1 = quarter_plane_q(order, ring).act(GroupElement::PhiPsi).shift(-1, -1);

    let ok = TSeries::constant(orbit_numerator(ring), order).div_kernel();
    let left = k.mul_poly(&y_minus).section(Y_POS);
    let right = ok.coeff_of(Axis::Y, -1);
    let f2 = (&left * &right).section(X_NEG).shift(0, -1).shift_t(1);
    let f3 = f2.swap_xy();

    let g = &f2.coeff_of(Axis::X, -1).shift(1, 1) + &f3.coeff_of(Axis::Y, -1).shift(1, 1);
    let f4 = signed_orbit(&g)
        .div_kernel()
        .section(X_POS)
        .section(Y_POS)
        .shift(-1, -1)
        .shift_t(1);
    Compartments { f1, f2, f3, f4 }
}

/// The second compartment from its unsimplified positive-part form,
/// `t y^-1 [x<][y>]((y - y^-1) [y^-1](F1 - Phi F1) / (1 - S t))`.
pub fn f2_s2_unsimplified<R: Ring>(f1: &TSeries<R>) -> TSeries<R> {
    let ring = f1.ring();
    let y_minus = LaurentPoly2::from_ints(ring, &[(0, 1, 1), (0, -1, -1)]);
    let diff = f1 - &f1.act(GroupElement::Phi);
    diff.coeff_of(Axis::Y, -1)
        .mul_poly(&y_minus)
        .div_kernel()
        .section(X_NEG)
        .section(Y_POS)
        .shift(0, -1)
        .shift_t(1)
}

/// The fourth compartment written out through products of sections.
pub fn f4_s2_explicit<R: Ring>(order: usize, ring: R) -> TSeries<R> {
    let y_minus = LaurentPoly2::from_ints(ring, &[(0, 1, 1), (0, -1, -1)]);
    let x_minus = y_minus.swap_xy();
    let ok = TSeries::constant(orbit_numerator(ring), order).div_kernel();
    let k = TSeries::kernel_inverse(ring, order);

    let inner_y = ok.coeff_of(Axis::Y, -1).mul_poly(&y_minus).div_kernel().coeff_of(Axis::X, -1);
    let outer_x = k.mul_poly(&x_minus).section(X_POS);
    let first = (&inner_y * &outer_x).section(Y_POS);

    let inner_x = ok.coeff_of(Axis::X, -1).mul_poly(&x_minus).div_kernel().coeff_of(Axis::Y, -1);
    let outer_y = k.mul_poly(&y_minus).section(Y_POS);
    let second = (&inner_x * &outer_y).section(X_POS);

    (&first + &second).shift(-1, -1).shift_t(2)
}

/// How `[y<=] F1(x, 1/y, t)` is read in the quadrant formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstitutionOrder {
    /// Replace `y` by `1/y`, then take the section.
    SubstituteFirst,
    /// Take the section of `F1`, then replace `y` by `1/y`.
    SectionFirst,
}

/// Quadrant part of the model whose barriers are the nonnegative half-axes,
/// from its three-quarter-plane part `f1`.
pub fn f2_s3<R: Ring>(order: usize, f1: &TSeries<R>, reading: SubstitutionOrder) -> Result<TSeries<R>> {
    if f1.order() < order {
        return Err(Error::Truncation {
            needed: order,
            got: f1.order(),
        });
    }
    let f1 = f1.truncate(order);
    let ring = f1.ring();
    let flipped = match reading {
        SubstitutionOrder::SubstituteFirst => f1.act(GroupElement::Psi).section(SectionSpec::new(Axis::Y, SignClass::NonPos)),
        SubstitutionOrder::SectionFirst => f1.section(SectionSpec::new(Axis::Y, SignClass::NonPos)).act(GroupElement::Psi),
    };
    let inner = &flipped.shift(0, -1) - &f1.section(Y_NONNEG).shift(0, 1);
    let xbar_minus_x = LaurentPoly2::from_ints(ring, &[(-1, 0, 1), (1, 0, -1)]);
    let h = inner.coeff_of(Axis::X, -1).mul_poly(&xbar_minus_x);
    let hh = &h + &h.swap_xy();
    Ok(hh
        .div_kernel()
        .section(X_POS)
        .section(Y_POS)
        .shift(-1, -1)
        .shift_t(1))
}

/// Diagonal, lower and upper parts: `i = j >= 0`; `i >= 0, j < i`;
/// `j >= 0, i < j`. Terms with both exponents negative are dropped.
pub fn diag_sections<R: Ring>(f: &TSeries<R>) -> (TSeries<R>, TSeries<R>, TSeries<R>) {
    let d = f.filter(|(i, j)| i == j && i >= 0);
    let l = f.filter(|(i, j)| i >= 0 && j < i);
    let u = f.filter(|(i, j)| j >= 0 && i < j);
    (d, l, u)
}

/// The power series `X(y, t)` with `X = t (X^2 + (y + 1/y) X + 1)`.
pub fn kernel_root_x<R: Ring>(order: usize, ring: R) -> TSeries<R> {
    let y_sum = LaurentPoly2::from_ints(ring, &[(0, 1, 1), (0, -1, 1)]);
    let one = TSeries::constant(LaurentPoly2::one(ring), order);
    let mut x = TSeries::zero(ring, order);
    for _ in 0..order {
        let next = &(&(&x * &x) + &x.mul_poly(&y_sum)) + &one;
        x = next.shift_t(1);
    }
    x
}

/// `1 - S(X, y) t` for a candidate root `X`.
pub fn kernel_at_root<R: Ring>(root: &TSeries<R>) -> TSeries<R> {
    let ring = root.ring();
    let n = root.order();
    let y_sum = LaurentPoly2::from_ints(ring, &[(0, 1, 1), (0, -1, 1)]);
    let one = TSeries::constant(LaurentPoly2::one(ring), n);
    // X (1 - S t) = X - t (X^2 + (y + 1/y) X + 1)
    let s = &(&(root * root) + &root.mul_poly(&y_sum)) + &one;
    root - &s.shift_t(1)
}

fn half<R: Ring>(ring: R) -> Result<R::Elem> {
    ring.half().ok_or(Error::NoHalf(ring.descriptor()))
}

/// Inner and outer parts of a walk series for the model whose barriers are
/// the negative half-axes: `F1 = [x<][y<] F` and `F2 = F - F1`.
pub fn inner_outer<R: Ring>(f: &TSeries<R>) -> (TSeries<R>, TSeries<R>) {
    let f1 = f.section(X_NEG).section(Y_NEG);
    let f2 = f - &f1;
    (f1, f2)
}

/// Residual of
/// `(1 - S t) L - t [x^-1] F1 - (t x + t/y - 1/2) D + t/x [x^0] L`
/// built from the sections of `f`.
pub fn star_residual_of<R: Ring>(f: &TSeries<R>, drop_diagonal: bool) -> Result<TSeries<R>> {
    let ring = f.ring();
    let h = half(ring)?;
    let (f1, f2) = inner_outer(f);
    let (d, l, _) = diag_sections(&f2);
    let d = if drop_diagonal { TSeries::zero(ring, d.order()) } else { d };
    let coef = LaurentPoly2::from_ints(ring, &[(1, 0, 1), (0, -1, 1)]);
    let dterm = &d.mul_poly(&coef).shift_t(1) - &d.scale(&h);
    let x0 = l.coeff_of(Axis::X, 0).shift(-1, 0).shift_t(1);
    let r = &l.mul_kernel() - &f1.coeff_of(Axis::X, -1).shift_t(1);
    Ok(&(&r - &dterm) + &x0)
}

pub fn star_residual<R: Ring>(order: usize, ring: R) -> Result<TSeries<R>> {
    half(ring)?;
    let f = enumerate_series(&catalog_model("S4a").expect("catalog"), order, ring)?;
    star_residual_of(&f, false)
}

/// Residual of `t [x^0] L - t X [x^-1] F1 - X (t X + t/y - 1/2) D(X, y, t)`
/// for a root series `root`.
pub fn x0_identity_residual<R: Ring>(f: &TSeries<R>, root: &TSeries<R>) -> Result<TSeries<R>> {
    let ring = f.ring();
    let h = half(ring)?;
    let (f1, f2) = inner_outer(f);
    let (d, l, _) = diag_sections(&f2);
    let lhs = l.coeff_of(Axis::X, 0).shift_t(1);
    let first = (root * &f1.coeff_of(Axis::X, -1)).shift_t(1);
    let ybar = LaurentPoly2::y_pow(ring, -1);
    let bracket = &(&root.shift_t(1) + &TSeries::constant(ybar, root.order()).shift_t(1))
        - &TSeries::constant(LaurentPoly2::monomial(ring, 0, 0, h), root.order());
    let d_at = d.substitute_x(root)?;
    let second = &(root * &bracket) * &d_at;
    Ok(&(&lhs - &first) - &second)
}

pub fn x0_f2l_identity<R: Ring>(order: usize, ring: R) -> Result<TSeries<R>> {
    half(ring)?;
    let f = enumerate_series(&catalog_model("S4a").expect("catalog"), order, ring)?;
    x0_identity_residual(&f, &kernel_root_x(order, ring))
}

/// Which sections stand for `F(0, y, t)` and `F(x, 0, t)` in the functional
/// equation. `None` drops the term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interpretation {
    /// Region of `y` kept in `[x^0] F`.
    pub west: Option<SignClass>,
    /// Region of `x` kept in `[y^0] F`.
    pub south: Option<SignClass>,
}

impl Interpretation {
    pub fn of_model(m: &ModelSpec) -> Self {
        Interpretation {
            west: m.west_barrier.sign_class(),
            south: m.south_barrier.sign_class(),
        }
    }
}

fn class_name(c: Option<SignClass>) -> &'static str {
    match c {
        None => "none",
        Some(SignClass::All) => "all",
        Some(SignClass::Pos) => "pos",
        Some(SignClass::Neg) => "neg",
        Some(SignClass::NonNeg) => "nonneg",
        Some(SignClass::NonPos) => "nonpos",
        Some(SignClass::Zero) => "zero",
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y-{},x-{}", class_name(self.west), class_name(self.south))
    }
}

impl FromStr for Interpretation {
    type Err = Error;

    /// `y-<class>,x-<class>` in either order; classes are
    /// all, pos, neg, nonneg, nonpos, zero, none.
    fn from_str(s: &str) -> Result<Self> {
        let parse_class = |c: &str| -> Result<Option<SignClass>> {
            Ok(Some(match c {
                "all" => SignClass::All,
                "pos" => SignClass::Pos,
                "neg" => SignClass::Neg,
                "nonneg" => SignClass::NonNeg,
                "nonpos" => SignClass::NonPos,
                "zero" => SignClass::Zero,
                "none" | "empty" => return Ok(None),
                _ => return Err(Error::Parse(format!("unknown section class '{c}'"))),
            }))
        };
        let mut west = None;
        let mut south = None;
        let mut seen = (false, false);
        for part in s.split(',').map(str::trim) {
            if let Some(c) = part.strip_prefix("y-") {
                west = parse_class(c)?;
                seen.0 = true;
            } else if let Some(c) = part.strip_prefix("x-") {
                south = parse_class(c)?;
                seen.1 = true;
            } else {
                return Err(Error::Parse(format!("expected y-<class> or x-<class>, got '{part}'")));
            }
        }
        if !(seen.0 && seen.1) {
            return Err(Error::Parse(format!("interpretation '{s}' needs both y- and x- parts")));
        }
        Ok(Interpretation { west, south })
    }
}

/// `(1 - S t) F - x^s1 y^s2 + t/x [x^0]_west F + t/y [y^0]_south F`
pub fn functional_equation_residual<R: Ring>(
    f: &TSeries<R>,
    start: (i32, i32),
    interp: Interpretation,
) -> TSeries<R> {
    let ring = f.ring();
    let mut r = &f.mul_kernel()
        - &TSeries::constant(LaurentPoly2::monomial(ring, start.0, start.1, ring.one()), f.order());
    if let Some(c) = interp.west {
        let w = f.coeff_of(Axis::X, 0).section(SectionSpec::new(Axis::Y, c));
        r = &r + &w.shift(-1, 0).shift_t(1);
    }
    if let Some(c) = interp.south {
        let s = f.coeff_of(Axis::Y, 0).section(SectionSpec::new(Axis::X, c));
        r = &r + &s.shift(0, -1).shift_t(1);
    }
    r
}

pub fn verify_functional_equation<R: Ring>(
    model: &ModelSpec,
    interp: Interpretation,
    order: usize,
    ring: R,
) -> Result<TSeries<R>> {
    if model.region == Region::AvoidNonNegQuadrant {
        return Err(Error::Unsupported(
            "the functional equation has no section reading for this region".into(),
        ));
    }
    let f = enumerate_series(model, order, ring)?;
    Ok(functional_equation_residual(&f, model.start, interp))
}

/// `(1 - S t) sum_g sign(g) g(xy F) - orbit_sum(start)`; zero for every
/// model without a region constraint and for the quarter plane.
pub fn orbit_identity_residual<R: Ring>(model: &ModelSpec, order: usize, ring: R) -> Result<TSeries<R>> {
    let f = enumerate_series(model, order, ring)?;
    let lhs = orbit_sum_series(&f).mul_kernel();
    let rhs = start_orbit_sum(ring, model.start.0, model.start.1);
    Ok(&lhs - &TSeries::constant(rhs, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainSpec;
    use crate::ring::{Integers, PrimeField, Rationals};

    fn dp(id: &str, order: usize) -> TSeries<Rationals> {
        enumerate_series(&catalog_model(id).unwrap(), order, Rationals).unwrap()
    }

    #[test]
    fn quarter_plane_matches_walks() {
        let q = quarter_plane_q(12, Rationals);
        assert_eq!(q.coeff(0), &LaurentPoly2::one(Rationals));
        assert_eq!(q, dp("QP", 12));
        let totals: Vec<i64> = q.eval_one().iter().take(3).map(|c| c.to_integer().try_into().unwrap()).collect();
        assert_eq!(totals, [1, 2, 6]);
    }

    #[test]
    fn compartments_match_walks() {
        let c = f_compartments_s2(10, Rationals);
        let f = dp("S2", 10);
        let parts = Compartments::of_series(&f);
        assert_eq!(c.f1, parts.f1);
        assert_eq!(c.f2, parts.f2);
        assert_eq!(c.f3, parts.f3);
        assert_eq!(c.f4, parts.f4);
        assert_eq!(c.sum(), f);
        assert_eq!(f2_s2_unsimplified(&c.f1), c.f2);
        assert_eq!(f4_s2_explicit(10, Rationals), c.f4);
        assert!(c.f2.coeff(0).is_zero() && c.f4.coeff(0).is_zero());
        let first = c.f4.first_nonzero().unwrap();
        assert_eq!(first.t_order, 2);
    }

    #[test]
    fn quadrant_formula_reading() {
        let f = dp("S3", 10);
        let quadrant = f.section(X_NONNEG).section(Y_NONNEG);
        let f1 = &f - &quadrant;
        let good = f2_s3(10, &f1, SubstitutionOrder::SubstituteFirst).unwrap();
        assert_eq!(good, quadrant);
        let other = f2_s3(10, &f1, SubstitutionOrder::SectionFirst).unwrap();
        assert_ne!(other, quadrant);
        let tqp = dp("TQP", 10);
        assert_eq!(f2_s3(10, &tqp, SubstitutionOrder::SubstituteFirst).unwrap(), good);
        assert!(matches!(
            f2_s3(12, &f1, SubstitutionOrder::SubstituteFirst),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn diagonal_split_examples() {
        let r = Rationals;
        let mono = |i, j| TSeries::constant(LaurentPoly2::from_ints(r, &[(i, j, 1)]), 0);
        let (d, l, u) = diag_sections(&mono(2, 2));
        assert!(!d.is_zero() && l.is_zero() && u.is_zero());
        let (d, l, u) = diag_sections(&mono(3, 1));
        assert!(d.is_zero() && !l.is_zero() && u.is_zero());
        let f = dp("S4a", 12);
        let (_, f2) = inner_outer(&f);
        let (d, l, u) = diag_sections(&f2);
        assert_eq!(&(&d + &l) + &u, f2);
    }

    #[test]
    fn kernel_root_terms() {
        let x = kernel_root_x(6, Rationals);
        assert!(x.coeff(0).is_zero());
        assert_eq!(x.coeff(1), &LaurentPoly2::one(Rationals));
        assert_eq!(x.coeff(2), &LaurentPoly2::from_ints(Rationals, &[(0, 1, 1), (0, -1, 1)]));
        assert!(kernel_at_root(&x).is_zero());
    }

    #[test]
    fn star_and_root_identities() {
        let ring = Rationals;
        assert!(star_residual(8, ring).unwrap().is_zero());
        assert!(x0_f2l_identity(6, ring).unwrap().is_zero());
        let f = dp("S4a", 8);
        assert!(!star_residual_of(&f, true).unwrap().is_zero());
        let alt = ModelSpec { start: (-1, 1), ..catalog_model("S4a").unwrap() };
        let g = enumerate_series(&alt, 8, ring).unwrap();
        assert!(!star_residual_of(&g, false).unwrap().is_zero());
        let mut root = kernel_root_x(6, ring);
        let bump = LaurentPoly2::one(ring);
        root.set_coeff(2, root.coeff(2) + &bump);
        let f = dp("S4a", 6);
        assert!(!x0_identity_residual(&f, &root).unwrap().is_zero());
        assert!(matches!(star_residual(4, Integers), Err(Error::NoHalf(_))));
        assert!(star_residual(6, PrimeField::new(45007).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn functional_equation_interpretations() {
        for m in crate::model::model_catalog() {
            if m.region == Region::AvoidNonNegQuadrant {
                continue;
            }
            let interp = if m.region == Region::QuarterPlane {
                "y-all,x-all".parse().unwrap()
            } else {
                Interpretation::of_model(&m)
            };
            let r = verify_functional_equation(&m, interp, 10, Integers).unwrap();
            assert!(r.is_zero(), "{}", m.id);
        }
        let s2 = catalog_model("S2").unwrap();
        let s5 = "y-pos,x-pos".parse().unwrap();
        assert!(!verify_functional_equation(&s2, s5, 10, Integers).unwrap().is_zero());
        assert!(verify_functional_equation(&catalog_model("TQP").unwrap(), s5, 3, Integers).is_err());
    }

    #[test]
    fn interpretation_parsing() {
        let i: Interpretation = "x-all,y-all".parse().unwrap();
        assert_eq!(i.west, Some(SignClass::All));
        assert_eq!(i.to_string(), "y-all,x-all");
        assert!("y-all".parse::<Interpretation>().is_err());
        assert!("y-sideways,x-all".parse::<Interpretation>().is_err());
        let m = ModelSpec::barrier("m", DomainSpec::Empty, DomainSpec::Pos);
        assert_eq!(Interpretation::of_model(&m).to_string(), "y-none,x-pos");
    }

    #[test]
    fn orbit_identity() {
        for id in ["S2", "S3", "S4a", "S4b", "S5", "QP"] {
            let r = orbit_identity_residual(&catalog_model(id).unwrap(), 8, Integers).unwrap();
            assert!(r.is_zero(), "{id}");
        }
    }
}
