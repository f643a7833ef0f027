//! Valuation-only bookkeeping of the cyclic relations satisfied by the
//! cross-section coordinates `a_1, .., a_l`.

use std::fmt;
use std::ops::{Add, Mul};

use serde::Serialize;

use super::IsocrystalError;
use crate::linalg::{q, qfmt, qi, Q};
use crate::root_datum::{Family, GroupType};

/// A certified lower bound for a valuation; `None` is `+inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalValue(pub Option<Q>);

impl TropicalValue {
    pub const INFINITY: TropicalValue = TropicalValue(None);

    pub fn finite(x: Q) -> Self {
        TropicalValue(Some(x))
    }

    pub fn dominates(&self, bound: &Q) -> bool {
        self.0.as_ref().is_none_or(|x| x >= bound)
    }
}

/// Valuation of a sum: the minimum.
impl Add for TropicalValue {
    type Output = TropicalValue;
    fn add(self, o: TropicalValue) -> TropicalValue {
        match (self.0, o.0) {
            (None, x) | (x, None) => TropicalValue(x),
            (Some(a), Some(b)) => TropicalValue(Some(a.min(b))),
        }
    }
}

/// Valuation of a product: the sum.
impl Mul for TropicalValue {
    type Output = TropicalValue;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: TropicalValue) -> TropicalValue {
        match (self.0, o.0) {
            (Some(a), Some(b)) => TropicalValue(Some(a + b)),
            _ => TropicalValue(None),
        }
    }
}

impl fmt::Display for TropicalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(x) => write!(f, "{}", qfmt(x)),
            None => write!(f, "inf"),
        }
    }
}

/// The coefficient `sign * w^varpi * phi^twist(a_var)` of `phi^power(v)`
/// (or `sign * w^varpi` when `var` is `None`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationTerm {
    pub power: usize,
    pub varpi: i64,
    pub var: Option<usize>,
    pub twist: usize,
    pub sign: i8,
}

/// `phi^degree(v) = sum of terms`, for an isocrystal isoclinic of `slope`.
#[derive(Clone, Debug, Serialize)]
pub struct RelationShape {
    pub degree: usize,
    #[serde(serialize_with = "crate::linalg::ser_q")]
    pub slope: Q,
    pub variables: usize,
    pub terms: Vec<RelationTerm>,
}

fn term(power: usize, varpi: i64, var: Option<usize>, twist: usize, sign: i8) -> RelationTerm {
    RelationTerm { power, varpi, var, twist, sign }
}

/// The cyclic relation for the cyclic vector `g(e_1)` of `(V, c_kappa sigma)`.
pub fn relation_shape(t: GroupType, kappa: i64) -> Result<RelationShape, IsocrystalError> {
    t.check_kappa(kappa)?;
    let n = t.rank_param;
    let m = t.m();
    let k = kappa;
    let shape = match t.family {
        Family::A => RelationShape {
            degree: n,
            slope: q(k, n as i64),
            variables: n - 1,
            terms: std::iter::once(term(0, k, None, 0, 1)).chain((1..n).map(|i| term(i, k, Some(i), 0, 1))).collect(),
        },
        Family::C | Family::TwoD => {
            let top = if t.family == Family::C { m } else { m - 1 };
            let mut terms = vec![term(0, k * m as i64, None, 0, 1)];
            terms.extend((1..=top).map(|i| term(i, k * (m - i) as i64, Some(i), 0, 1)));
            // The a_0 slot of the second sum is empty.
            terms.extend((m + 1..2 * m).map(|i| term(i, 0, Some(2 * m - i), i - m, -1)));
            RelationShape { degree: 2 * m, slope: q(k, 2), variables: top, terms }
        }
        Family::TwoA if n % 2 == 1 => {
            let mut terms = vec![term(0, 0, None, 0, 1)];
            terms.extend((1..=m).map(|i| term(i, 0, Some(i), 0, 1)));
            terms.push(term(m + 1, 0, Some(m), 1, -1));
            terms.extend((m + 2..=2 * m).map(|i| term(i, 0, Some(2 * m - i + 1), 1 + 2 * (i - m - 1), -1)));
            RelationShape { degree: 2 * m + 1, slope: qi(0), variables: m, terms }
        }
        _ => {
            return Err(IsocrystalError::Unsupported(format!(
                "{t}: the relation has cross terms; compare the final table instead"
            )))
        }
    };
    Ok(shape)
}

/// Lower bounds for `ord(a_1), .., ord(a_l)` obtained by applying the slope
/// bound `ord(coefficient of phi^i) >= (N - i) slope` to every monomial and
/// keeping the strongest constraint per variable.
pub fn tropical_bound_derivation(t: GroupType, kappa: i64) -> Result<Vec<Q>, IsocrystalError> {
    let shape = relation_shape(t, kappa)?;
    let mut powers: Vec<usize> = shape.terms.iter().map(|t| t.power).collect();
    powers.sort_unstable();
    powers.dedup();
    assert_eq!(powers.len(), shape.terms.len(), "every coefficient is a single monomial");
    let mut bounds: Vec<Option<Q>> = vec![None; shape.variables];
    for tm in &shape.terms {
        let need = qi((shape.degree - tm.power) as i64) * &shape.slope;
        match tm.var {
            // ord(w^e a) = e + ord(a); Frobenius twists preserve valuations.
            Some(j) => {
                let b = need - qi(tm.varpi);
                let slot = &mut bounds[j - 1];
                if slot.as_ref().is_none_or(|x| &b > x) {
                    *slot = Some(b);
                }
            }
            None => debug_assert!(qi(tm.varpi) >= need),
        }
    }
    Ok(bounds.into_iter().map(|b| b.expect("every variable occurs")).collect())
}

/// Tropical valuation of every coefficient of the relation when `ord(a_j)`
/// is bounded below by `table[j-1]`.
pub fn coefficient_valuations(shape: &RelationShape, table: &[Q]) -> Vec<(usize, TropicalValue)> {
    shape
        .terms
        .iter()
        .map(|tm| {
            let w = TropicalValue::finite(qi(tm.varpi));
            let v = match tm.var {
                Some(j) => w * TropicalValue::finite(table[j - 1].clone()),
                None => w,
            };
            (tm.power, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apartment;

    fn ty(f: Family, r: usize) -> GroupType {
        GroupType::model(f, r).unwrap()
    }

    #[test]
    fn tropical_arithmetic() {
        let a = TropicalValue::finite(q(1, 2));
        let b = TropicalValue::finite(qi(2));
        assert_eq!(a.clone() + b.clone(), a.clone());
        assert_eq!(a.clone() * b, TropicalValue::finite(q(5, 2)));
        assert_eq!(a.clone() + TropicalValue::INFINITY, a.clone());
        assert_eq!(a * TropicalValue::INFINITY, TropicalValue::INFINITY);
    }

    #[test]
    fn known_tables() {
        assert_eq!(tropical_bound_derivation(ty(Family::A, 5), 2).unwrap(), (1..5).map(|i| q(-2 * i, 5)).collect::<Vec<_>>());
        assert_eq!(tropical_bound_derivation(ty(Family::C, 4), 1).unwrap(), (1..=4).map(|i| q(i, 2)).collect::<Vec<_>>());
        assert_eq!(tropical_bound_derivation(ty(Family::TwoD, 5), 1).unwrap(), (1..5).map(|i| q(i, 2)).collect::<Vec<_>>());
        assert_eq!(tropical_bound_derivation(ty(Family::TwoA, 7), 0).unwrap(), vec![qi(0); 3]);
    }

    #[test]
    fn unsupported_types() {
        for t in [ty(Family::B, 3), ty(Family::D, 4), ty(Family::TwoA, 6)] {
            assert!(matches!(tropical_bound_derivation(t, 0), Err(IsocrystalError::Unsupported(_))));
        }
    }

    #[test]
    fn agrees_with_apartment_route() {
        for f in [Family::A, Family::C, Family::TwoA, Family::TwoD] {
            for r in f.min_rank()..=10 {
                if f == Family::TwoA && r % 2 == 0 {
                    continue;
                }
                let t = ty(f, r);
                for k in t.kappas() {
                    let trop = tropical_bound_derivation(t, k).unwrap();
                    let apt = apartment::cross_section_bound_table(t, k).unwrap();
                    assert_eq!(trop, apt, "{t} kappa={k}");
                }
            }
        }
    }

    #[test]
    fn derived_tables_satisfy_every_coefficient() {
        let t = ty(Family::C, 5);
        let shape = relation_shape(t, 1).unwrap();
        let table = tropical_bound_derivation(t, 1).unwrap();
        for (i, v) in coefficient_valuations(&shape, &table) {
            assert!(v.dominates(&(qi((shape.degree - i) as i64) * &shape.slope)));
        }
    }
}
