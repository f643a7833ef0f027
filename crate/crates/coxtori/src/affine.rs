//! Extended affine Weyl group `W x| X_*(T)`, Newton points, basic
//! elements, Kottwitz classes and the map `beta_w`.
//!
//! An element `(w, lambda)` stands for `pi^lambda w`; the product is
//! `(w, l)(w', l') = (w w', l + w l')` and Frobenius acts by
//! `(w, l) -> (s w s^-1, s l)` with `s` the Frobenius matrix.

use num_integer::Integer;
use num_traits::Zero;

use crate::lattice::{self, AbelianGroup, AbelianMap, IntMatrix};
use crate::linalg::{q, qdot, qi, Mat, Q};
use crate::root_datum::{Family, GroupType, Isogeny, Pi1Variant, RootDatum, RootDatumError};
use crate::weyl::{self, WeylElt};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AffineError {
    #[error("pi_1 coinvariants of {0} are infinite; basic classes are not a finite list")]
    InfiniteCoinvariants(String),
    #[error("special lifts are defined on the classical models only, not on {0}")]
    NotAModel(String),
    #[error(transparent)]
    Datum(#[from] RootDatumError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtAffineElt {
    finite: WeylElt,
    translation: Vec<i64>,
}

impl ExtAffineElt {
    pub fn new(finite: WeylElt, translation: Vec<i64>) -> Self {
        assert_eq!(finite.action().rows(), translation.len(), "rank mismatch");
        ExtAffineElt { finite, translation }
    }

    pub fn identity(rank: usize) -> Self {
        Self::new(WeylElt::identity(rank), vec![0; rank])
    }

    pub fn translation_by(lambda: Vec<i64>) -> Self {
        Self::new(WeylElt::identity(lambda.len()), lambda)
    }

    pub fn finite(&self) -> &WeylElt {
        &self.finite
    }

    pub fn translation(&self) -> &[i64] {
        &self.translation
    }

    pub fn mul(&self, o: &ExtAffineElt) -> ExtAffineElt {
        let moved = self.finite.action().apply(&o.translation);
        let translation = self.translation.iter().zip(&moved).map(|(a, b)| a + b).collect();
        ExtAffineElt { finite: self.finite.mul(&o.finite), translation }
    }

    pub fn inverse(&self) -> ExtAffineElt {
        let inv = self.finite.action().inverse_unimodular().expect("Weyl elements are unimodular");
        let translation = inv.apply(&self.translation).into_iter().map(|x| -x).collect();
        ExtAffineElt { finite: WeylElt::from_matrix(inv), translation }
    }

    pub fn sigma(&self, d: &RootDatum) -> ExtAffineElt {
        ExtAffineElt { finite: self.finite.sigma_twist(d), translation: d.sigma().apply(&self.translation) }
    }

    /// `g^-1 self sigma(g)`.
    pub fn sigma_conjugate(&self, d: &RootDatum, g: &ExtAffineElt) -> ExtAffineElt {
        g.inverse().mul(self).mul(&g.sigma(d))
    }

    /// Linear part `w s` of the affine map `x -> w s(x) + lambda` on the apartment.
    pub fn linear_part(&self, d: &RootDatum) -> Mat {
        self.finite.action().mul(d.sigma())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPoint {
    pub vector: Vec<Q>,
    pub dominant_rep: Vec<Q>,
    /// The period `d` used to average.
    pub period: usize,
}

/// Smallest `d >= 1` with `(w s)^d = 1` and `s^d = 1`.
pub fn newton_period(d: &RootDatum, x: &ExtAffineElt) -> usize {
    let bound = 1 << 16;
    let a = x.linear_part(d).order(bound).expect("finite order");
    let s = d.sigma().order(bound).expect("finite order");
    a.lcm(&s)
}

/// `mu = sum_(i<p) (w s)^i lambda`, the translation part of the
/// `p`-fold twisted product `x sigma(x) .. sigma^(p-1)(x)`.
pub fn twisted_norm(d: &RootDatum, x: &ExtAffineElt, p: usize) -> Vec<i64> {
    let a = x.linear_part(d);
    let mut cur = x.translation.clone();
    let mut mu = vec![0; cur.len()];
    for _ in 0..p {
        for (m, c) in mu.iter_mut().zip(&cur) {
            *m += c;
        }
        cur = a.apply(&cur);
    }
    mu
}

pub fn newton_point(d: &RootDatum, x: &ExtAffineElt) -> NewtonPoint {
    newton_point_with_period(d, x, newton_period(d, x))
}

/// Newton point averaged over an explicit period, which must be a
/// multiple of [`newton_period`].
pub fn newton_point_with_period(d: &RootDatum, x: &ExtAffineElt, period: usize) -> NewtonPoint {
    let mu = twisted_norm(d, x, period);
    let vector: Vec<Q> = mu.iter().map(|&m| q(m, period as i64)).collect();
    let dominant_rep = weyl::dominant_representative(d, &vector);
    NewtonPoint { vector, dominant_rep, period }
}

pub fn is_central(d: &RootDatum, nu: &[Q]) -> bool {
    d.roots().iter().all(|r| qdot(&r.character, nu).is_zero())
}

pub fn is_basic(d: &RootDatum, x: &ExtAffineElt) -> bool {
    is_central(d, &newton_point(d, x).vector)
}

/// Pairings of `nu` with the weights of the standard representation;
/// `None` off the classical models.
pub fn slopes(d: &RootDatum, nu: &[Q]) -> Option<Vec<Q>> {
    Some(d.standard_weights()?.iter().map(|w| qdot(w, nu)).collect())
}

/// The common slope when all standard weights pair to the same value.
pub fn isoclinic_slope(d: &RootDatum, nu: &[Q]) -> Option<Q> {
    let s = slopes(d, nu)?;
    let first = s.first()?.clone();
    s.iter().all(|x| *x == first).then_some(first)
}

/// Class of the translation part in `pi_1(G)_<sigma>`, in the canonical
/// coordinates of the coinvariant group.
pub fn kottwitz_class(d: &RootDatum, x: &ExtAffineElt, variant: Pi1Variant) -> Vec<i64> {
    d.fundamental_group(variant).coinvariants.class_of_i64(&x.translation)
}

/// `sigma_w = w s` restricted to the coroot lattice, in its basis.
fn sigma_w_on_sc(d: &RootDatum, sw: &IntMatrix) -> IntMatrix {
    let e = d.sc_lattice();
    let mut out = IntMatrix::zeros(e.cols(), e.cols());
    for j in 0..e.cols() {
        let y = lattice::solve_integer(e, &sw.mul_vec(&e.column(j))).expect("w s preserves the coroot lattice");
        for (i, v) in y.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

/// `beta_w : X_*(T_sc)_<sigma_w> -> X_*(T)_<sigma_w>`.
pub fn beta_map(d: &RootDatum, w: &WeylElt) -> AbelianMap {
    let sw = w.action().mul(d.sigma()).to_int_matrix();
    let source = AbelianGroup::coinvariants(&sigma_w_on_sc(d, &sw));
    let target = AbelianGroup::coinvariants(&sw);
    AbelianMap::induced(source, target, d.sc_lattice()).expect("inclusion is well defined")
}

/// A basic sigma-conjugacy class: its Kottwitz label and a representative
/// `(c, tau)` over the special Coxeter element.
#[derive(Clone, Debug)]
pub struct BasicClass {
    pub label: Vec<i64>,
    pub representative: ExtAffineElt,
    pub newton: NewtonPoint,
}

/// One basic class per element of `pi_1(G)_<sigma>`.
pub fn basic_classes(d: &RootDatum) -> Result<Vec<BasicClass>, AffineError> {
    let pi = d.fundamental_group(Pi1Variant::Model).coinvariants;
    let labels = pi.elements().ok_or_else(|| AffineError::InfiniteCoinvariants(d.name().to_string()))?;
    let c = weyl::special_coxeter(d);
    Ok(labels
        .into_iter()
        .map(|label| {
            let tau = pi.lift_i64(&label);
            let representative = ExtAffineElt::new(c.clone(), tau);
            let newton = newton_point(d, &representative);
            BasicClass { label, representative, newton }
        })
        .collect())
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn scaled(v: &[i64], k: i64) -> Vec<i64> {
    v.iter().map(|x| x * k).collect()
}

/// Translation part of the lift `c_kappa` of the special Coxeter element,
/// read off from the powers of `pi` in its matrix on the standard basis.
///
/// For `D` with `kappa = 1` the sign is chosen so that the lift fixes
/// `-1/2 e_m`; see the README for this convention.
pub fn special_lift_translation(t: GroupType, kappa: i64) -> Result<Vec<i64>, AffineError> {
    t.check_kappa(kappa)?;
    if t.isogeny != Isogeny::PaperModel {
        return Err(AffineError::NotAModel(t.to_string()));
    }
    let d = RootDatum::build(t)?;
    let n = d.rank();
    let c = weyl::special_coxeter(&d);
    let m = t.m();
    Ok(match t.family {
        Family::A | Family::TwoA => scaled(&unit(n, 0), kappa),
        Family::C => scaled(&c.action().apply(&unit(n, 0)), kappa),
        Family::B => scaled(&unit(n, 0), -kappa),
        Family::D => match kappa {
            0 => vec![0; n],
            1 => scaled(&unit(n, m), -1),
            _ => c.action().apply(&unit(n, 0)),
        },
        Family::TwoD => scaled(&unit(n, 0), kappa),
    })
}

/// The lift `c_kappa` as an element of the extended affine Weyl group.
pub fn special_lift(t: GroupType, kappa: i64) -> Result<(RootDatum, ExtAffineElt), AffineError> {
    let lambda = special_lift_translation(t, kappa)?;
    let d = RootDatum::build(t)?;
    let c = weyl::special_coxeter(&d);
    Ok((d, ExtAffineElt::new(c, lambda)))
}

/// Slope of the isocrystal attached to `c_kappa`: `kappa/n` for A, `kappa/2`
/// for C and 2D, `0` for B, 2A and D with `kappa < 2`, `1/2` for D with `kappa = 2`.
pub fn expected_slope(t: GroupType, kappa: i64) -> Q {
    match t.family {
        Family::A => q(kappa, t.rank_param as i64),
        Family::C | Family::TwoD => q(kappa, 2),
        Family::B | Family::TwoA => qi(0),
        Family::D => {
            if kappa == 2 {
                q(1, 2)
            } else {
                qi(0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::WeylGroup;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn model(f: Family, r: usize) -> RootDatum {
        RootDatum::build(GroupType::model(f, r).unwrap()).unwrap()
    }

    /// Dominant representative by brute force over the whole Weyl group.
    fn orbit_dominant(d: &RootDatum, x: &[Q]) -> Vec<Q> {
        let w = WeylGroup::generate(d, 100_000).unwrap();
        let doms: Vec<Vec<Q>> =
            w.elements().iter().map(|e| e.action().apply_q(x)).filter(|y| weyl::is_dominant(d, y)).collect();
        assert!(doms.windows(2).all(|p| p[0] == p[1]), "dominant representative is unique");
        doms[0].clone()
    }

    #[test]
    fn multiplication_is_associative() {
        let d = model(Family::C, 3);
        let s = |p: usize, l: Vec<i64>| ExtAffineElt::new(WeylElt::simple_reflection(&d, p), l);
        let a = s(0, vec![1, 0, 2, -1]);
        let b = s(2, vec![0, 3, 0, 1]);
        let c = s(1, vec![-2, 1, 1, 0]);
        assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        assert_eq!(a.mul(&a.inverse()), ExtAffineElt::identity(4));
    }

    #[test]
    fn dominant_translation_split() {
        let d = model(Family::A, 4);
        let lam = vec![3, 1, 1, 0];
        let nu = newton_point(&d, &ExtAffineElt::translation_by(lam.clone()));
        assert_eq!(nu.vector, lam.iter().map(|&x| qi(x)).collect::<Vec<_>>());
        assert_eq!(nu.dominant_rep, nu.vector);
        assert_eq!(nu.period, 1);
    }

    #[test]
    fn newton_point_independent_of_period() {
        for f in Family::ALL {
            let t = GroupType::model(f, f.min_rank() + 1).unwrap();
            for k in t.kappas() {
                let (d, x) = special_lift(t, k).unwrap();
                let p = newton_period(&d, &x);
                assert_eq!(newton_point(&d, &x).vector, newton_point_with_period(&d, &x, 2 * p).vector);
            }
        }
    }

    #[test]
    fn special_lift_slopes() {
        for f in Family::ALL {
            for r in f.min_rank()..=7 {
                let t = GroupType::model(f, r).unwrap();
                for k in t.kappas() {
                    let (d, x) = special_lift(t, k).unwrap();
                    let nu = newton_point(&d, &x);
                    assert!(is_central(&d, &nu.vector), "{t} kappa={k}");
                    assert_eq!(isoclinic_slope(&d, &nu.vector), Some(expected_slope(t, k)), "{t} kappa={k}");
                }
            }
        }
    }

    #[test]
    fn non_central_translation_is_not_basic() {
        for n in 2..6 {
            let d = model(Family::A, n);
            let mut b1 = vec![0; n];
            b1[0] = 1;
            assert!(!is_basic(&d, &ExtAffineElt::translation_by(b1)));
            assert!(is_basic(&d, &ExtAffineElt::identity(n)));
        }
    }

    #[test]
    fn kottwitz_classes_of_special_lifts() {
        let (d, c0) = special_lift(GroupType::model(Family::C, 3).unwrap(), 0).unwrap();
        let (_, c1) = special_lift(GroupType::model(Family::C, 3).unwrap(), 1).unwrap();
        let pi = d.fundamental_group(Pi1Variant::Adjoint).coinvariants;
        assert_eq!(pi.describe(), "Z/2");
        assert!(kottwitz_class(&d, &c0, Pi1Variant::Adjoint).iter().all(|&x| x == 0));
        assert_eq!(kottwitz_class(&d, &c1, Pi1Variant::Adjoint), pi.class_of_i64(&[1, 0, 0, 0]));
        assert_ne!(kottwitz_class(&d, &c1, Pi1Variant::Adjoint), kottwitz_class(&d, &c0, Pi1Variant::Adjoint));

        // D: c_2 has class e0, outside the image of pi_1 of the derived group.
        let t = GroupType::model(Family::D, 5).unwrap();
        let (d, c2) = special_lift(t, 2).unwrap();
        let pi = d.fundamental_group(Pi1Variant::Model).coinvariants;
        let k2 = kottwitz_class(&d, &c2, Pi1Variant::Model);
        assert_eq!(k2, pi.class_of_i64(&unit(6, 0)));
        for e in 1..=5 {
            for a in -3..=3 {
                assert_ne!(k2, pi.class_of_i64(&scaled(&unit(6, e), a)));
            }
        }
        let w = WeylElt::simple_reflection(&d, 2);
        assert!(kottwitz_class(&d, &ExtAffineElt::new(w, vec![0; 6]), Pi1Variant::Model).iter().all(|&x| x == 0));
    }

    #[test]
    fn beta_vanishes_for_adjoint_coxeter() {
        for f in Family::ALL {
            for r in f.min_rank()..=6 {
                let d = RootDatum::build(GroupType::new(f, r, Isogeny::Adjoint).unwrap()).unwrap();
                let c = weyl::special_coxeter(&d);
                assert!(beta_map(&d, &c).is_zero(), "{f}{r}");
            }
        }
    }

    #[test]
    fn beta_of_identity_for_simply_connected_split() {
        let d = RootDatum::build(GroupType::new(Family::C, 3, Isogeny::SimplyConnected).unwrap()).unwrap();
        let b = beta_map(&d, &WeylElt::identity(3));
        assert_eq!(b.source.describe(), "Z x Z x Z");
        assert!(b.is_injective());
        let img = lattice::image_and_torsion(&b);
        assert_eq!(img.group.invariants(), b.target.invariants());
    }

    #[test]
    fn beta_for_sl2_sl2_mod_mu2() {
        let d = RootDatum::sl2_sl2_mod_mu2();
        let c = weyl::special_coxeter(&d);
        let b = beta_map(&d, &c);
        let img = lattice::image_and_torsion(&b);
        assert_eq!(img.group.order(), Some(BigInt::from(2)));
        assert_eq!(b.target.order(), Some(BigInt::from(4)));
    }

    #[test]
    fn basic_class_counts() {
        let adj = |f, r| RootDatum::build(GroupType::new(f, r, Isogeny::Adjoint).unwrap()).unwrap();
        for n in 2..=6 {
            assert_eq!(basic_classes(&adj(Family::A, n)).unwrap().len(), n);
        }
        assert_eq!(basic_classes(&adj(Family::TwoA, 5)).unwrap().len(), 1);
        assert_eq!(basic_classes(&model(Family::B, 4)).unwrap().len(), 2);
        assert!(matches!(basic_classes(&model(Family::A, 3)), Err(AffineError::InfiniteCoinvariants(_))));
        for cl in basic_classes(&adj(Family::D, 5)).unwrap() {
            assert!(is_central(&adj(Family::D, 5), &cl.newton.vector));
            assert_eq!(kottwitz_class(&adj(Family::D, 5), &cl.representative, Pi1Variant::Model), cl.label);
        }
    }

    #[test]
    fn chamber_walk_matches_orbit_search() {
        let d = model(Family::C, 3);
        let x = vec![q(1, 2), q(-3, 1), q(2, 3), q(0, 1)];
        assert_eq!(weyl::dominant_representative(&d, &x), orbit_dominant(&d, &x));
        let d = model(Family::TwoD, 4);
        let x = vec![q(1, 1), q(-1, 2), q(5, 3), q(0, 1), q(-2, 1)];
        assert_eq!(weyl::dominant_representative(&d, &x), orbit_dominant(&d, &x));
    }

    fn arb_elt(d: &RootDatum) -> impl Strategy<Value = ExtAffineElt> {
        let n = d.rank();
        let l = d.simple_roots().len();
        let d = d.clone();
        (prop::collection::vec(0..l, 0..8), prop::collection::vec(-3i64..=3, n))
            .prop_map(move |(w, t)| ExtAffineElt::new(WeylElt::from_word(&d, &w), t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn newton_point_is_sigma_conjugation_invariant(
            (x, g) in arb_elt(&model(Family::TwoD, 4)).prop_flat_map(|x| (Just(x), arb_elt(&model(Family::TwoD, 4))))
        ) {
            let d = model(Family::TwoD, 4);
            let y = x.sigma_conjugate(&d, &g);
            let nx = newton_point(&d, &x);
            let ny = newton_point(&d, &y);
            prop_assert_eq!(&nx.dominant_rep, &ny.dominant_rep);
            prop_assert_eq!(orbit_dominant(&d, &nx.vector), nx.dominant_rep);
        }

        #[test]
        fn kottwitz_is_additive(a in prop::collection::vec(-5i64..=5, 5), b in prop::collection::vec(-5i64..=5, 5)) {
            let d = model(Family::D, 4);
            let pi = d.fundamental_group(Pi1Variant::Adjoint).coinvariants;
            let k = |v: &[i64]| kottwitz_class(&d, &ExtAffineElt::translation_by(v.to_vec()), Pi1Variant::Adjoint);
            let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ks: Vec<i64> = k(&a).iter().zip(k(&b)).map(|(x, y)| x + y).collect();
            prop_assert_eq!(k(&sum), pi.class_of_i64(&pi.lift_i64(&ks)));
        }

        #[test]
        fn lifts_of_coxeter_elements_are_basic(t in prop::collection::vec(-4i64..=4, 5)) {
            let d = model(Family::TwoD, 4);
            let c = weyl::special_coxeter(&d);
            prop_assert!(is_basic(&d, &ExtAffineElt::new(c, t)));
        }
    }
}
