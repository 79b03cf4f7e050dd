//! Linear recurrences `sum_k p_k(n) a(n+k) = 0` with polynomial coefficients.
//!
//! Text form, one polynomial per shift; `#` starts a comment:
//!
//! ```text
//! a(n):   -16*(n+1)*(n+2)*(n+3)*(n^2+4*n+2)
//! a(n+1): -4*(n+3)*(2*n^3+9*n^2+4*n-18)
//! a(n+2): (n+2)*(n+4)*(n+6)*(n^2+2*n-1)
//! ```
//!
//! Missing shifts are zero. [`Recurrence::to_string`] writes the expanded
//! normal form in the same syntax, so printed recurrences can be read back.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{Integers, PrimeField, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence<R: Ring> {
    ring: R,
    /// `coeffs[k][e]` is the coefficient of `n^e` in `p_k`.
    coeffs: Vec<Vec<R::Elem>>,
}

impl<R: Ring> Recurrence<R> {
    /// Pads every polynomial to a common length; rejects the zero recurrence.
    pub fn new(ring: R, mut coeffs: Vec<Vec<R::Elem>>) -> Result<Self> {
        let width = coeffs.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for p in &mut coeffs {
            p.resize(width, ring.zero());
        }
        let rec = Recurrence { ring, coeffs };
        if rec.is_zero() {
            return Err(Error::ZeroRecurrence);
        }
        Ok(rec.trimmed())
    }

    pub fn ring(&self) -> R {
        self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn coeffs(&self) -> &[Vec<R::Elem>] {
        &self.coeffs
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| self.ring.is_zero(c))
    }

    /// Drops zero top shifts and zero top powers of `n`.
    fn trimmed(mut self) -> Self {
        let ring = self.ring;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().iter().all(|c| ring.is_zero(c)) {
            self.coeffs.pop();
        }
        while self.coeffs[0].len() > 1 && self.coeffs.iter().all(|p| ring.is_zero(p.last().unwrap())) {
            for p in &mut self.coeffs {
                p.pop();
            }
        }
        self
    }

    /// `p_k(n)`
    pub fn eval_poly(&self, k: usize, n: &R::Elem) -> R::Elem {
        let ring = self.ring;
        self.coeffs[k]
            .iter()
            .rev()
            .fold(ring.zero(), |acc, c| ring.add(&ring.mul(&acc, n), c))
    }

    /// `sum_k p_k(n) a(n+k)`
    pub fn residual_at(&self, terms: &[R::Elem], n: usize) -> R::Elem {
        let ring = self.ring;
        let nn = ring.from_i64(n as i64);
        (0..=self.order()).fold(ring.zero(), |acc, k| {
            ring.add(&acc, &ring.mul(&self.eval_poly(k, &nn), &terms[n + k]))
        })
    }

    /// Leading coefficient of the highest shift.
    fn leading(&self) -> &R::Elem {
        let top = self.coeffs.last().unwrap();
        top.iter()
            .rev()
            .find(|c| !self.ring.is_zero(c))
            .expect("top shift is nonzero after trimming")
    }

    fn scaled(&self, c: &R::Elem) -> Self {
        let ring = self.ring;
        Recurrence {
            ring,
            coeffs: self
                .coeffs
                .iter()
                .map(|p| p.iter().map(|x| ring.mul(x, c)).collect())
                .collect(),
        }
    }
}

/// Outcome of checking a recurrence against terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    /// Last `n` at which the relation was checked.
    pub checked_to: usize,
    pub first_violation: Option<usize>,
}

impl Verification {
    pub fn success(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks the relation for `n = 0..=len - order - 1`.
pub fn verify_recurrence<R: Ring>(rec: &Recurrence<R>, terms: &[R::Elem]) -> Result<Verification> {
    let r = rec.order();
    if terms.len() < r + 1 {
        return Err(Error::InsufficientTerms {
            needed: r + 1,
            got: terms.len(),
        });
    }
    let last = terms.len() - r - 1;
    let first_violation = (0..=last).find(|&n| !rec.ring.is_zero(&rec.residual_at(terms, n)));
    Ok(Verification {
        checked_to: last,
        first_violation,
    })
}

impl Recurrence<Integers> {
    /// Divides by the content and makes the leading coefficient positive.
    pub fn canonicalize(&self) -> Self {
        let g = self
            .coeffs
            .iter()
            .flatten()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        let g = if self.leading().is_negative() { -g } else { g };
        Recurrence {
            ring: Integers,
            coeffs: self
                .coeffs
                .iter()
                .map(|p| p.iter().map(|c| c / &g).collect())
                .collect(),
        }
    }

    pub fn reduce_mod(&self, field: PrimeField) -> Recurrence<PrimeField> {
        Recurrence {
            ring: field,
            coeffs: self
                .coeffs
                .iter()
                .map(|p| p.iter().map(|c| field.from_bigint(c)).collect())
                .collect(),
        }
        .trimmed()
    }
}

impl Recurrence<PrimeField> {
    /// Scales the leading coefficient to 1.
    pub fn canonicalize(&self) -> Self {
        let inv = self.ring.inv(self.leading()).expect("nonzero leading coefficient");
        self.scaled(&inv)
    }
}

/// Sorts by (order, degree, coefficients) and drops duplicates.
pub fn sort_basis(basis: &mut Vec<Recurrence<PrimeField>>) {
    basis.sort_by(|a, b| {
        (a.order(), a.degree())
            .cmp(&(b.order(), b.degree()))
            .then_with(|| a.coeffs.cmp(&b.coeffs))
    });
    basis.dedup();
}

/// The recurrence for the total counts of the model where both axes are
/// one-way, starting from `(-1, -1)`.
pub fn s2_totals_recurrence() -> Recurrence<Integers> {
    RECURRENCE_S2.parse().expect("built-in recurrence parses")
}

const RECURRENCE_S2: &str = "\
a(n):   -16*(n+1)*(n+2)*(n+3)*(n^2+4*n+2)
a(n+1): -4*(n+3)*(2*n^3+9*n^2+4*n-18)
a(n+2): (n+2)*(n+4)*(n+6)*(n^2+2*n-1)
";

fn format_poly<R: Ring>(ring: R, p: &[R::Elem], out: &mut String) {
    let mut first = true;
    for (e, c) in p.iter().enumerate().rev() {
        if ring.is_zero(c) {
            continue;
        }
        let text = ring.format(c);
        let (negative, magnitude) = match text.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, text),
        };
        if first {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        first = false;
        match (e, magnitude.as_str()) {
            (0, m) => out.push_str(m),
            (_, "1") => {}
            (_, m) => {
                out.push_str(m);
                out.push('*');
            }
        }
        match e {
            0 => {}
            1 => out.push('n'),
            _ => out.push_str(&format!("n^{e}")),
        }
    }
    if first {
        out.push('0');
    }
}

impl<R: Ring> Recurrence<R> {
    /// `sum_k p_k(n) a(n+k) = 0` on one line.
    pub fn normal_form(&self) -> String {
        let mut parts = Vec::new();
        for (k, p) in self.coeffs.iter().enumerate() {
            if p.iter().all(|c| self.ring.is_zero(c)) {
                continue;
            }
            let mut s = String::from("(");
            format_poly(self.ring, p, &mut s);
            s.push_str(&format!(")*{}", shift_name(k)));
            parts.push(s);
        }
        format!("{} = 0", parts.join(" + "))
    }
}

fn shift_name(k: usize) -> String {
    if k == 0 {
        "a(n)".into()
    } else {
        format!("a(n+{k})")
    }
}

impl<R: Ring> fmt::Display for Recurrence<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.coeffs.iter().enumerate() {
            let mut s = String::new();
            format_poly(self.ring, p, &mut s);
            writeln!(f, "{}: {s}", shift_name(k))?;
        }
        Ok(())
    }
}

impl FromStr for Recurrence<Integers> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut polys: Vec<(usize, Vec<BigInt>, usize)> = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let err = |msg: String| Error::ParseLine { line: line_no, msg };
            let (head, body) = text
                .split_once(':')
                .ok_or_else(|| err("expected 'a(n+k): polynomial'".into()))?;
            let k = parse_shift(head.trim()).ok_or_else(|| err(format!("bad shift '{}'", head.trim())))?;
            if polys.iter().any(|(kk, _, _)| *kk == k) {
                return Err(err(format!("shift {} given twice", shift_name(k))));
            }
            let p = PolyParser::new(body).parse().map_err(err)?;
            polys.push((k, p, line_no));
        }
        if polys.is_empty() {
            return Err(Error::Parse("recurrence has no terms".into()));
        }
        let order = polys.iter().map(|(k, _, _)| *k).max().unwrap();
        let mut coeffs = vec![Vec::new(); order + 1];
        for (k, p, _) in polys {
            coeffs[k] = p;
        }
        Recurrence::new(Integers, coeffs)
    }
}

fn parse_shift(s: &str) -> Option<usize> {
    let inner = s.strip_prefix("a(")?.strip_suffix(')')?.trim();
    let rest = inner.strip_prefix('n')?.trim();
    if rest.is_empty() {
        return Some(0);
    }
    rest.strip_prefix('+')?.trim().parse().ok()
}

/// Dense polynomial arithmetic on coefficient vectors.
fn poly_add(a: &[BigInt], b: &[BigInt], sign: i32) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        if sign < 0 {
            out[i] -= c;
        } else {
            out[i] += c;
        }
    }
    out
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Recursive descent over `+ - * ^ ( )`, integers and `n`.
struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> PolyParser<'a> {
    fn new(s: &'a str) -> Self {
        PolyParser { src: s.as_bytes(), pos: 0 }
    }

    fn parse(mut self) -> std::result::Result<Vec<BigInt>, String> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(format!("unexpected '{}' at column {}", self.src[self.pos] as char, self.pos + 1));
        }
        Ok(p)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> std::result::Result<Vec<BigInt>, String> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                poly_add(&[], &t, -1)
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = poly_add(&acc, &t, if op == b'-' { -1 } else { 1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> std::result::Result<Vec<BigInt>, String> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = poly_mul(&acc, &f);
                }
                // Juxtaposition such as `(n+2)(n+4)` or `2n`.
                Some(b'(') | Some(b'n') => {
                    let f = self.power()?;
                    acc = poly_mul(&acc, &f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> std::result::Result<Vec<BigInt>, String> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| format!("expected exponent at column {}", start + 1))?;
            if e > 10_000 {
                return Err("exponent too large".into());
            }
            let mut out = vec![BigInt::one()];
            for _ in 0..e {
                out = poly_mul(&out, &base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Vec<BigInt>, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(format!("missing ')' at column {}", self.pos + 1));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'n') => {
                self.pos += 1;
                Ok(vec![BigInt::zero(), BigInt::one()])
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let v: BigInt = std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().unwrap();
                Ok(vec![v])
            }
            Some(c) => Err(format!("unexpected '{}' at column {}", c as char, self.pos + 1)),
            None => Err("unexpected end of polynomial".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::sparse_totals_and_returns;
    use crate::model::catalog_model;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn built_in_recurrence_shape() {
        let rec = s2_totals_recurrence();
        assert_eq!(rec.order(), 2);
        assert_eq!(rec.degree(), 5);
        let at0: Vec<BigInt> = (0..3).map(|k| rec.eval_poly(k, &BigInt::zero())).collect();
        assert_eq!(at0, ints(&[-192, 216, -48]));
        assert_eq!(rec.residual_at(&ints(&[1, 4, 14]), 0), BigInt::zero());
    }

    #[test]
    fn verify_on_walk_counts() {
        let rec = s2_totals_recurrence();
        let (s2, _) = sparse_totals_and_returns(&catalog_model("S2").unwrap(), 60, Integers).unwrap();
        assert!(verify_recurrence(&rec, &s2).unwrap().success());
        let (s5, _) = sparse_totals_and_returns(&catalog_model("S5").unwrap(), 60, Integers).unwrap();
        let v = verify_recurrence(&rec, &s5).unwrap();
        assert!(v.first_violation.unwrap() < 10);
        assert!(matches!(verify_recurrence(&rec, &s5[..2]), Err(Error::InsufficientTerms { .. })));
    }

    #[test]
    fn text_round_trip() {
        let rec = s2_totals_recurrence();
        let text = rec.to_string();
        let back: Recurrence<Integers> = text.parse().unwrap();
        assert_eq!(back, rec);
        assert!(rec.normal_form().ends_with("*a(n+2) = 0"));
        let geo: Recurrence<Integers> = "a(n+1): 1\na(n): -2 # comment".parse().unwrap();
        assert_eq!(geo.normal_form(), "(-2)*a(n) + (1)*a(n+1) = 0");
        let juxt: Recurrence<Integers> = "a(n+1): (n+2)\na(n): -(4n+2)".parse().unwrap();
        assert_eq!(juxt.coeffs()[0], ints(&[-2, -4]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "a(n): 1\n\na(n+1): (n+2\n";
        match bad.parse::<Recurrence<Integers>>() {
            Err(Error::ParseLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            "a(n): 1\nb(n): 2".parse::<Recurrence<Integers>>(),
            Err(Error::ParseLine { line: 2, .. })
        ));
        assert!(matches!("a(n): 0".parse::<Recurrence<Integers>>(), Err(Error::ZeroRecurrence)));
        assert!("# nothing".parse::<Recurrence<Integers>>().is_err());
    }

    #[test]
    fn canonical_forms() {
        let rec = s2_totals_recurrence();
        let doubled = rec.scaled(&BigInt::from(-2));
        assert_eq!(doubled.canonicalize(), rec.canonicalize());
        let field = PrimeField::new(45007).unwrap();
        let modp = rec.canonicalize().reduce_mod(field);
        let c = modp.canonicalize();
        assert_eq!(c.canonicalize(), c);
        assert_eq!(c.leading(), &1);
        assert_eq!(doubled.reduce_mod(field).canonicalize(), c);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            coeffs in prop::collection::vec(prop::collection::vec(-50i64..50, 1..5), 1..4)
        ) {
            let polys: Vec<Vec<BigInt>> = coeffs.iter().map(|p| ints(p)).collect();
            if let Ok(rec) = Recurrence::new(Integers, polys) {
                let c = rec.canonicalize();
                prop_assert_eq!(c.canonicalize(), c.clone());
                let field = PrimeField::new(65521).unwrap();
                let m = rec.reduce_mod(field);
                if !m.is_zero() {
                    let cm = m.canonicalize();
                    prop_assert_eq!(cm.canonicalize(), cm);
                }
                let back: Recurrence<Integers> = c.to_string().parse().unwrap();
                prop_assert_eq!(back, c);
            }
        }
    }
}
