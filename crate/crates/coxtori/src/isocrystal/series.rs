//! Truncated Laurent series `F_{q^E}((w))` with absolute precision.

use std::fmt;

use rand::Rng;

use crate::gf::{Elt, Gf};

/// Precision of exactly known elements.
pub const EXACT: i64 = i64::MAX / 4;

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        a + b
    }
}

/// `sum coeffs[j] w^(start + j) + O(w^prec)`.
///
/// Coefficients past the stored ones and below `prec` are zero. After
/// normalization the first stored coefficient is nonzero; an element with no
/// stored coefficients is zero to precision `prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuedElement {
    start: i64,
    coeffs: Vec<Elt>,
    prec: i64,
}

impl ValuedElement {
    pub fn zero() -> Self {
        ValuedElement { start: EXACT, coeffs: Vec::new(), prec: EXACT }
    }

    /// Zero known modulo `w^prec`.
    pub fn big_o(prec: i64) -> Self {
        ValuedElement { start: prec, coeffs: Vec::new(), prec }
    }

    /// The exact monomial `c w^k`.
    pub fn monomial(c: Elt, k: i64) -> Self {
        ValuedElement { start: k, coeffs: vec![c], prec: EXACT }.normalized()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn new(start: i64, coeffs: Vec<Elt>, prec: i64) -> Self {
        assert!(start + coeffs.len() as i64 <= prec || prec >= EXACT, "coefficient beyond precision");
        ValuedElement { start, coeffs, prec }.normalized()
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.start = self.prec;
            return self;
        }
        self.coeffs.drain(..lead);
        self.start += lead as i64;
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        self
    }

    /// `Some(v)` when a nonzero coefficient is known.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.start)
    }

    /// A certified lower bound for the valuation.
    pub fn valuation_lower_bound(&self) -> i64 {
        self.start
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.is_exact()
    }

    /// Coefficient of `w^k`; `None` at or beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Elt> {
        if k >= self.prec {
            return None;
        }
        if k < self.start {
            return Some(0);
        }
        Some(self.coeffs.get((k - self.start) as usize).copied().unwrap_or(0))
    }

    /// Stored terms as `(exponent, coefficient)`, nonzero only.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Elt)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(move |(j, &c)| (self.start + j as i64, c))
    }

    /// Multiplication by `w^k`.
    pub fn shift(&self, k: i64) -> Self {
        ValuedElement {
            start: sat_add(self.start, k),
            coeffs: self.coeffs.clone(),
            prec: sat_add(self.prec, k),
        }
    }

    /// Drop everything at or beyond `w^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let keep = (prec - self.start).clamp(0, self.coeffs.len() as i64) as usize;
        ValuedElement { start: self.start.min(prec), coeffs: self.coeffs[..keep].to_vec(), prec }.normalized()
    }
}

impl fmt::Display for ValuedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}]w^{k}")?;
        }
        if first && !self.is_exact() {
            return write!(f, "O(w^{})", self.prec);
        }
        if first {
            return write!(f, "0");
        }
        if !self.is_exact() {
            write!(f, " + O(w^{})", self.prec)?;
        }
        Ok(())
    }
}

/// Arithmetic context: the residue field and the Frobenius `x -> x^q`.
#[derive(Clone, Debug)]
pub struct SeriesRing {
    field: Gf,
    /// `q = p^frob_step`.
    frob_step: usize,
    /// Relative precision used when inverting exact non-monomials.
    pub default_prec: i64,
}

impl SeriesRing {
    pub fn new(field: Gf, frob_step: usize, default_prec: i64) -> Self {
        SeriesRing { field, frob_step, default_prec }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn add(&self, a: &ValuedElement, b: &ValuedElement) -> ValuedElement {
        self.combine(a, b, false)
    }

    pub fn sub(&self, a: &ValuedElement, b: &ValuedElement) -> ValuedElement {
        self.combine(a, b, true)
    }

    fn combine(&self, a: &ValuedElement, b: &ValuedElement, negate_b: bool) -> ValuedElement {
        let f = &self.field;
        let prec = a.prec.min(b.prec);
        let span = |x: &ValuedElement| {
            let lo = x.start.min(prec);
            let hi = (x.start + x.coeffs.len() as i64).min(prec).max(lo);
            (lo, hi)
        };
        let (lo_a, hi_a) = span(a);
        let (lo_b, hi_b) = span(b);
        let lo = lo_a.min(lo_b);
        let hi = match (hi_a > lo_a, hi_b > lo_b) {
            (true, true) => hi_a.max(hi_b),
            (true, false) => hi_a,
            (false, true) => hi_b,
            (false, false) => lo,
        };
        let mut coeffs = vec![0; (hi - lo) as usize];
        for k in lo_a..hi_a {
            coeffs[(k - lo) as usize] = a.coeffs[(k - a.start) as usize];
        }
        for k in lo_b..hi_b {
            let c = b.coeffs[(k - b.start) as usize];
            let c = if negate_b { f.neg(c) } else { c };
            let slot = &mut coeffs[(k - lo) as usize];
            *slot = f.add(*slot, c);
        }
        ValuedElement { start: lo, coeffs, prec }.normalized()
    }

    pub fn neg(&self, a: &ValuedElement) -> ValuedElement {
        ValuedElement { coeffs: a.coeffs.iter().map(|&c| self.field.neg(c)).collect(), ..a.clone() }
    }

    pub fn scale(&self, c: Elt, a: &ValuedElement) -> ValuedElement {
        ValuedElement { coeffs: a.coeffs.iter().map(|&x| self.field.mul(c, x)).collect(), ..a.clone() }.normalized()
    }

    pub fn mul(&self, a: &ValuedElement, b: &ValuedElement) -> ValuedElement {
        if a.is_exact_zero() || b.is_exact_zero() {
            return ValuedElement::zero();
        }
        let prec = sat_add(a.prec, b.start).min(sat_add(b.prec, a.start));
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return ValuedElement::big_o(prec);
        }
        let start = a.start + b.start;
        let full = a.coeffs.len() + b.coeffs.len() - 1;
        let len = if prec >= EXACT { full } else { (prec - start).clamp(0, full as i64) as usize };
        let f = &self.field;
        let mut coeffs = vec![0; len];
        if let Some((add, mul, size)) = f.small_tables() {
            for (i, &x) in a.coeffs.iter().enumerate().take(len) {
                if x == 0 {
                    continue;
                }
                let row = &mul[x as usize * size..(x as usize + 1) * size];
                let out = coeffs[i..].iter_mut().zip(&b.coeffs);
                if f.p() == 2 {
                    for (c, &y) in out {
                        *c ^= row[y as usize] as Elt;
                    }
                } else {
                    for (c, &y) in out {
                        *c = add[*c as usize * size + row[y as usize] as usize] as Elt;
                    }
                }
            }
            return ValuedElement { start, coeffs, prec }.normalized();
        }
        for (i, &x) in a.coeffs.iter().enumerate().take(len) {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(x, y));
            }
        }
        ValuedElement { start, coeffs, prec }.normalized()
    }

    /// Inverse of an element with known valuation.
    pub fn inv(&self, a: &ValuedElement) -> Option<ValuedElement> {
        let v = a.valuation()?;
        let f = &self.field;
        let c0_inv = f.inv(a.coeffs[0])?;
        if a.is_exact() && a.coeffs.len() == 1 {
            return Some(ValuedElement::monomial(c0_inv, -v));
        }
        let rel = if a.is_exact() { self.default_prec } else { a.prec - v };
        let rel_len = rel.max(0) as usize;
        let mut out = vec![0; rel_len];
        if rel_len > 0 {
            out[0] = c0_inv;
        }
        for k in 1..rel_len {
            let mut s = 0;
            for j in 1..=k.min(a.coeffs.len() - 1) {
                s = f.add(s, f.mul(a.coeffs[j], out[k - j]));
            }
            out[k] = f.neg(f.mul(c0_inv, s));
        }
        Some(ValuedElement { start: -v, coeffs: out, prec: -v + rel }.normalized())
    }

    /// `sigma^e`: raise every coefficient to the power `q^e`.
    pub fn frobenius(&self, a: &ValuedElement, e: usize) -> ValuedElement {
        let k = self.frob_step * e;
        ValuedElement { coeffs: a.coeffs.iter().map(|&c| self.field.frob_pow(c, k)).collect(), ..a.clone() }
    }

    /// A random element of `w^start O` known modulo `w^prec`.
    pub fn random<R: Rng>(&self, start: i64, prec: i64, rng: &mut R) -> ValuedElement {
        let coeffs = (start..prec).map(|_| self.field.random(rng)).collect();
        ValuedElement { start, coeffs, prec }.normalized()
    }

    /// A random unit of `O` known modulo `w^prec`.
    pub fn random_unit<R: Rng>(&self, prec: i64, rng: &mut R) -> ValuedElement {
        loop {
            let x = self.random(0, prec, rng);
            if x.valuation() == Some(0) {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring() -> SeriesRing {
        SeriesRing::new(Gf::new(3, 2).unwrap(), 1, 20)
    }

    fn elt(start: i64, coeffs: Vec<u64>, prec: i64) -> ValuedElement {
        ValuedElement::new(start, coeffs, prec)
    }

    #[test]
    fn inverse_of_unit() {
        let r = ring();
        let a = elt(0, vec![2, 1, 5, 0, 7], 12);
        let b = r.inv(&a).unwrap();
        let p = r.mul(&a, &b);
        assert_eq!(p.valuation(), Some(0));
        assert_eq!(p.precision(), 12);
        assert_eq!(p.terms().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn inverse_tracks_valuation_and_precision() {
        let r = ring();
        let a = elt(3, vec![1, 1], 10);
        let b = r.inv(&a).unwrap();
        assert_eq!(b.valuation(), Some(-3));
        assert_eq!(b.precision(), -3 + 7);
        assert!(r.inv(&ValuedElement::big_o(5)).is_none());
    }

    #[test]
    fn cancellation_loses_known_valuation() {
        let r = ring();
        let a = elt(0, vec![1, 2, 3], 3);
        let z = r.sub(&a, &a);
        assert_eq!(z.valuation(), None);
        assert_eq!(z.precision(), 3);
    }

    #[test]
    fn frobenius_is_multiplicative() {
        let r = ring();
        let a = elt(1, vec![4, 7, 2], 8);
        let b = elt(0, vec![5, 3], 8);
        assert_eq!(r.frobenius(&r.mul(&a, &b), 1), r.mul(&r.frobenius(&a, 1), &r.frobenius(&b, 1)));
        assert_eq!(r.frobenius(&a, 2), a);
    }

    fn arb_elt() -> impl Strategy<Value = ValuedElement> {
        (-3i64..4, proptest::collection::vec(0u64..9, 0..8), 0i64..6).prop_map(|(s, c, extra)| {
            let prec = s + c.len() as i64 + extra;
            ValuedElement::new(s, c, prec)
        })
    }

    proptest! {
        #[test]
        fn valuation_of_product_is_additive(a in arb_elt(), b in arb_elt()) {
            let r = ring();
            let p = r.mul(&a, &b);
            if let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) {
                prop_assert_eq!(p.valuation(), Some(va + vb));
            }
        }

        #[test]
        fn valuation_of_sum(a in arb_elt(), b in arb_elt()) {
            let r = ring();
            let s = r.add(&a, &b);
            prop_assert!(s.valuation_lower_bound() >= a.valuation_lower_bound().min(b.valuation_lower_bound()));
            if let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) {
                if va != vb && va.min(vb) < s.precision() {
                    prop_assert_eq!(s.valuation(), Some(va.min(vb)));
                }
            }
        }

        #[test]
        fn precision_is_pessimistic(a in arb_elt(), b in arb_elt()) {
            // Perturbing an input below its precision leaves the product unchanged below its precision.
            let r = ring();
            let p = r.mul(&a, &b);
            let lo = a.valuation_lower_bound().min(a.precision());
            let mut coeffs: Vec<u64> = (lo..a.precision()).map(|k| a.coeff(k).unwrap()).collect();
            coeffs.extend([1, 2, 5]);
            let a2 = ValuedElement::new(lo, coeffs, a.precision() + 3);
            let p2 = r.mul(&a2, &b);
            prop_assert_eq!(p.truncate(p.precision()), p2.truncate(p.precision()));
        }
    }
}
