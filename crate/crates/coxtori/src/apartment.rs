//! Fixed points of `b sigma` on the apartment and root-pairing depth bounds.
//!
//! Points live in `X_*(T) (x) Q` modulo the span of the center. A point is
//! normalized by subtracting the central vector that zeroes the pivot
//! coordinates of the center (the `b1` coordinate for A and 2A, `e0` for
//! C, D and 2D).

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::affine::{self, AffineError, ExtAffineElt};
use crate::linalg::{q, qi, to_q, QMat, Q};
use crate::root_datum::{Family, GroupType, RootDatum, RootDatumError};

#[derive(Debug, thiserror::Error)]
pub enum ApartmentError {
    #[error("1 is an eigenvalue of the linear part modulo the center; the fixed point is not unique")]
    Singular,
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Datum(#[from] RootDatumError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApartmentPoint {
    #[serde(serialize_with = "crate::linalg::ser_qvec")]
    pub coords: Vec<Q>,
}

/// Center generators as rational vectors, in echelon form, with their pivots.
fn center_echelon(d: &RootDatum) -> (Vec<Vec<Q>>, Vec<usize>) {
    let z = d.center_lattice();
    let n = d.rank();
    let mut rows: Vec<Vec<Q>> =
        (0..z.cols()).map(|j| z.column(j).into_iter().map(Q::from_integer).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let lead = rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = &*v / &lead;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v = &*v - &f * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Representative of `x` modulo the center with zero pivot coordinates.
pub fn normalize(d: &RootDatum, x: &[Q]) -> ApartmentPoint {
    let (rows, pivots) = center_echelon(d);
    let mut y = x.to_vec();
    for (row, &p) in rows.iter().zip(&pivots) {
        let f = y[p].clone();
        for k in 0..y.len() {
            y[k] = &y[k] - &f * &row[k];
        }
    }
    ApartmentPoint { coords: y }
}

/// The unique `x` (modulo the center) with `W S x + lambda = x`.
pub fn fixed_point(d: &RootDatum, w: &ExtAffineElt) -> Result<ApartmentPoint, ApartmentError> {
    let n = d.rank();
    let l = w.linear_part(d);
    let (rows, pivots) = center_echelon(d);
    let free: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    // Unknowns: x_j for non-pivot j, then the central coefficients t_k.
    // Equations: (I - L) x - sum_k t_k z_k = lambda.
    let mut a = vec![vec![qi(0); n]; n];
    for r in 0..n {
        for (c, &j) in free.iter().enumerate() {
            let id = if r == j { 1 } else { 0 };
            a[r][c] = qi(id - l.get(r, j));
        }
        for (k, z) in rows.iter().enumerate() {
            a[r][free.len() + k] = -z[r].clone();
        }
    }
    let rhs = to_q(w.translation());
    let sol = QMat { data: a }.solve(&rhs).ok_or(ApartmentError::Singular)?;
    let mut x = vec![qi(0); n];
    for (c, &j) in free.iter().enumerate() {
        x[j] = sol[c].clone();
    }
    Ok(normalize(d, &x))
}

/// `<alpha, x>`: the valuation a root coordinate needs to lie in the parahoric at `x`.
pub fn mp_bound(d: &RootDatum, alpha: usize, x: &ApartmentPoint) -> Q {
    d.root(alpha).character.iter().zip(&x.coords).map(|(&c, v)| Q::from_integer(c.into()) * v).sum()
}

/// Labels of the roots of `cU cap U^-` in the order of the coordinates `a_1, .., a_l`.
pub fn cross_section_labels(t: GroupType) -> Vec<String> {
    let m = t.m();
    let n = t.rank_param;
    let tail = |top: usize| (2..=top).map(|i| format!("{i}-1")).collect::<Vec<_>>();
    match t.family {
        Family::A => tail(n),
        Family::TwoA => tail(m + 1),
        Family::TwoD => tail(m),
        Family::C => {
            let mut v = tail(m);
            v.push("-2*1".into());
            v
        }
        Family::B => {
            let mut v = tail(m);
            v.push("-1".into());
            v
        }
        Family::D => {
            let mut v = tail(m);
            v.push(format!("-1-{m}"));
            v
        }
    }
}

pub fn cross_section_root_indices(d: &RootDatum, t: GroupType) -> Vec<usize> {
    cross_section_labels(t).iter().map(|l| d.root_by_label(l).expect("cross-section root exists")).collect()
}

/// `(<alpha, x_b>)` over the cross-section roots, for `b = c_kappa`.
pub fn cross_section_bound_table(t: GroupType, kappa: i64) -> Result<Vec<Q>, ApartmentError> {
    let (d, b) = affine::special_lift(t, kappa)?;
    let x = fixed_point(&d, &b)?;
    Ok(cross_section_root_indices(&d, t).into_iter().map(|a| mp_bound(&d, a, &x)).collect())
}

/// Closed-form fixed point of `c_kappa sigma` in model coordinates.
///
/// For D with `kappa = 2` this is `-(m-1)/4 + (i-1)/2` for `i < m` and
/// `-1/4` for `i = m`. The variant with `-1/4 + (i-1)/2` for `i < m` is not
/// fixed by `c_2 sigma` and gives `0` instead of `(m-2)/4` on `a_{m-1}`.
pub fn closed_form_fixed_point(t: GroupType, kappa: i64) -> Result<Vec<Q>, ApartmentError> {
    t.check_kappa(kappa)?;
    let m = t.m() as i64;
    let n = t.rank_param as i64;
    let k = kappa;
    // C, D and 2D carry the extra coordinate e0 = 0 in front.
    let with_e0 = |v: Vec<Q>| {
        let mut out = vec![qi(0)];
        out.extend(v);
        out
    };
    Ok(match t.family {
        Family::A => (1..=n).map(|i| q(-(i - 1) * k, n)).collect(),
        Family::C => with_e0((1..=m).map(|i| if k == 0 { qi(0) } else { q(-m, 4) + q(i - 1, 2) }).collect()),
        Family::B => (1..=m).map(|_| q(-k, 2)).collect(),
        Family::D => with_e0(match k {
            0 => vec![qi(0); m as usize],
            1 => (1..=m).map(|i| if i == m { q(-1, 2) } else { qi(0) }).collect(),
            _ => (1..=m).map(|i| if i == m { q(-1, 4) } else { q(-(m - 1), 4) + q(i - 1, 2) }).collect(),
        }),
        // Stated as a preimage in X_*(T); compare after normalization.
        Family::TwoA => (1..=n)
            .map(|l| match k {
                0 => qi(0),
                _ if l <= m => q(1, 2),
                _ if l == m + 1 => qi(0),
                _ => q(-1, 2),
            })
            .collect(),
        Family::TwoD => with_e0((1..=m).map(|i| if k == 0 { qi(0) } else { q(-m, 4) + q(i, 2) }).collect()),
    })
}

/// The D, `kappa = 2` variant with a constant offset of `-1/4`; not a fixed point.
pub fn offset_variant_type_d_kappa2(m: usize) -> Vec<Q> {
    let m = m as i64;
    let mut v = vec![qi(0)];
    v.extend((1..=m).map(|i| if i == m { q(-1, 4) } else { q(-1, 4) + q(i - 1, 2) }));
    v
}

/// Published lower bounds for `ord(a_1), .., ord(a_l)`.
pub fn published_bound_table(t: GroupType, kappa: i64) -> Result<Vec<Q>, ApartmentError> {
    t.check_kappa(kappa)?;
    let m = t.m() as i64;
    let n = t.rank_param as i64;
    let k = kappa;
    Ok(match t.family {
        Family::A => (1..n).map(|i| q(-k * i, n)).collect(),
        Family::C => (1..=m).map(|i| q(k * i, 2)).collect(),
        Family::B => (1..=m).map(|i| if i == m { q(k, 2) } else { qi(0) }).collect(),
        Family::D => match k {
            0 => vec![qi(0); m as usize],
            1 => (1..=m).map(|i| if i == m { qi(1) } else { qi(0) }).collect(),
            _ => (1..=m)
                .map(|i| match i {
                    _ if i == m => q(m, 4),
                    _ if i == m - 1 => q(m - 2, 4),
                    _ => q(i, 2),
                })
                .collect(),
        },
        Family::TwoA => vec![qi(0); m as usize],
        Family::TwoD => (1..m).map(|i| q(k * i, 2)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMatch {
    Exact,
    /// Equal after rounding the pairing up to an integer, as valuations are integral.
    Ceiling,
    Mismatch,
}

pub fn compare_bound(computed: &Q, published: &Q) -> BoundMatch {
    if computed == published {
        BoundMatch::Exact
    } else if published.is_integer() && computed.ceil() == *published {
        BoundMatch::Ceiling
    } else {
        BoundMatch::Mismatch
    }
}

/// Entrywise comparison of the computed and published tables.
pub fn compare_bound_tables(t: GroupType, kappa: i64) -> Result<Vec<BoundMatch>, ApartmentError> {
    let c = cross_section_bound_table(t, kappa)?;
    let p = published_bound_table(t, kappa)?;
    debug_assert_eq!(c.len(), p.len());
    Ok(c.iter().zip(&p).map(|(a, b)| compare_bound(a, b)).collect())
}

/// `max |x_i|`, used by callers that report distances from the origin.
pub fn sup_norm(x: &ApartmentPoint) -> Q {
    x.coords.iter().map(|v| v.abs()).max().unwrap_or_else(|| qi(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qvec_fmt;
    use crate::root_datum::Isogeny;
    use crate::weyl;
    use proptest::prelude::*;

    fn model(f: Family, r: usize) -> GroupType {
        GroupType::model(f, r).unwrap()
    }

    fn all_models(max: usize) -> impl Iterator<Item = GroupType> {
        Family::ALL.into_iter().flat_map(move |f| (f.min_rank()..=max).map(move |r| model(f, r)))
    }

    /// Independent check: apply `x -> L x + lambda` and compare modulo the center.
    fn is_fixed(d: &RootDatum, b: &ExtAffineElt, x: &[Q]) -> bool {
        let l = b.linear_part(d);
        let lambda = to_q(b.translation());
        let image: Vec<Q> = l.apply_q(x).iter().zip(&lambda).map(|(a, c)| a + c).collect();
        normalize(d, &image) == normalize(d, x)
    }

    #[test]
    fn fixed_points_satisfy_equation() {
        for t in all_models(8) {
            for k in t.kappas() {
                let (d, b) = affine::special_lift(t, k).unwrap();
                let x = fixed_point(&d, &b).unwrap();
                assert!(is_fixed(&d, &b, &x.coords), "{t} {k}");
            }
        }
    }

    #[test]
    fn closed_forms_agree() {
        for t in all_models(10) {
            for k in t.kappas() {
                let (d, b) = affine::special_lift(t, k).unwrap();
                let x = fixed_point(&d, &b).unwrap();
                let cf = normalize(&d, &closed_form_fixed_point(t, k).unwrap());
                assert_eq!(x, cf, "{t} kappa={k}: {} vs {}", qvec_fmt(&x.coords), qvec_fmt(&cf.coords));
            }
        }
    }

    #[test]
    fn offset_variant_is_not_fixed() {
        for m in 4..=8 {
            let (d, b) = affine::special_lift(model(Family::D, m), 2).unwrap();
            assert!(!is_fixed(&d, &b, &offset_variant_type_d_kappa2(m)));
        }
    }

    #[test]
    fn type_a_example_table() {
        let tab = cross_section_bound_table(model(Family::A, 5), 2).unwrap();
        assert_eq!(tab, vec![q(-2, 5), q(-4, 5), q(-6, 5), q(-8, 5)]);
    }

    #[test]
    fn type_d_example_table() {
        let tab = cross_section_bound_table(model(Family::D, 4), 2).unwrap();
        assert_eq!(tab, vec![q(1, 2), qi(1), q(1, 2), qi(1)]);
    }

    #[test]
    fn kappa_zero_tables_vanish() {
        for t in all_models(8) {
            assert!(cross_section_bound_table(t, 0).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn tables_match_published_values() {
        for t in all_models(10) {
            for k in t.kappas() {
                let cmp = compare_bound_tables(t, k).unwrap();
                assert!(cmp.iter().all(|c| *c != BoundMatch::Mismatch), "{t} {k}: {cmp:?}");
                let rounded = matches!((t.family, k), (Family::D, 1) | (Family::TwoA, 1));
                assert_eq!(cmp.contains(&BoundMatch::Ceiling), rounded, "{t} {k}");
            }
        }
    }

    #[test]
    fn cross_section_roots_are_negative_images() {
        for t in all_models(7) {
            let d = RootDatum::build(t).unwrap();
            let c = weyl::special_coxeter(&d);
            let mut got = cross_section_root_indices(&d, t);
            got.sort_unstable();
            let mut want: Vec<usize> = (0..d.num_positive())
                .map(|i| c.act_on_root(&d, i))
                .filter(|&j| !d.is_positive(j))
                .collect();
            want.sort_unstable();
            assert_eq!(got, want, "{t}");
        }
    }

    #[test]
    fn non_elliptic_is_singular() {
        let d = RootDatum::build(model(Family::C, 2)).unwrap();
        assert!(matches!(fixed_point(&d, &ExtAffineElt::identity(3)), Err(ApartmentError::Singular)));
    }

    #[test]
    fn origin_gives_zero_bounds() {
        let d = RootDatum::build(GroupType::new(Family::B, 3, Isogeny::Adjoint).unwrap()).unwrap();
        let x = ApartmentPoint { coords: vec![qi(0); 3] };
        assert!((0..d.roots().len()).all(|a| mp_bound(&d, a, &x).is_zero()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fixed_point_of_any_coxeter_lift(tau in prop::collection::vec(-4i64..=4, 6)) {
            let t = model(Family::D, 5);
            let d = RootDatum::build(t).unwrap();
            let b = ExtAffineElt::new(weyl::special_coxeter(&d), tau);
            let x = fixed_point(&d, &b).unwrap();
            prop_assert!(is_fixed(&d, &b, &x.coords));
        }

        #[test]
        fn mp_bound_is_linear(a in 0usize..24, b in 0usize..24, xs in prop::collection::vec(-6i64..=6, 5)) {
            let d = RootDatum::build(model(Family::C, 4)).unwrap();
            let x = ApartmentPoint { coords: xs.iter().map(|&v| q(v, 3)).collect() };
            if let Some(s) = d.root_sum(a, b) {
                prop_assert_eq!(mp_bound(&d, s, &x), mp_bound(&d, a, &x) + mp_bound(&d, b, &x));
            }
            let neg = d.negative_of(a);
            prop_assert_eq!(mp_bound(&d, neg, &x), -mp_bound(&d, a, &x));
        }
    }
}
