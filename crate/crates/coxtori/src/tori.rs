//! Stable and rational conjugacy classes of unramified maximal tori in
//! extended pure inner forms.
//!
//! A lift of `w` is `(w, tau)`; lifts are taken modulo `(sigma_w - 1) X_*(T)`,
//! so the set of classes is the coinvariant group `X_*(T)_<sigma_w>` relative
//! to the reference lift `(w, 0)`. A basic class `b` is labelled by its
//! Kottwitz class and Newton point.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::affine::{self, ExtAffineElt};
use crate::lattice::{self, AbelianGroup};
use crate::linalg::{Q, QMat};
use crate::root_datum::{Pi1Variant, RootDatum};
use crate::weyl::{self, WeylElt, WeylError, WeylGroup};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ToriError {
    #[error("label is not basic: its Newton point is not central")]
    NotBasic,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// A point of `F_w / ker kappa_w`: the class of `tau` in `X_*(T)_<sigma_w>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LiftClass {
    pub coset: Vec<i64>,
}

/// `X_*(T)_<sigma_w>` with the data needed to evaluate invariants on it.
#[derive(Clone, Debug)]
pub struct LiftTorsor {
    pub base: WeylElt,
    pub group: AbelianGroup,
}

impl LiftTorsor {
    /// Ambient translation representing a class.
    pub fn representative(&self, cl: &LiftClass) -> Vec<i64> {
        self.group.lift_i64(&cl.coset)
    }

    pub fn class_of(&self, tau: &[i64]) -> LiftClass {
        LiftClass { coset: self.group.class_of_i64(tau) }
    }

    pub fn lift_element(&self, cl: &LiftClass) -> ExtAffineElt {
        ExtAffineElt::new(self.base.clone(), self.representative(cl))
    }
}

pub fn lifts_mod_kernel(d: &RootDatum, w: &WeylElt) -> LiftTorsor {
    let sw = w.action().mul(d.sigma()).to_int_matrix();
    LiftTorsor { base: w.clone(), group: AbelianGroup::coinvariants(&sw) }
}

/// Invariants of a basic sigma-conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasicLabel {
    pub kottwitz: Vec<i64>,
    #[serde(serialize_with = "crate::linalg::ser_qvec")]
    pub newton: Vec<Q>,
}

impl BasicLabel {
    pub fn of(d: &RootDatum, x: &ExtAffineElt) -> Result<Self, ToriError> {
        let nu = affine::newton_point(d, x);
        if !affine::is_central(d, &nu.vector) {
            return Err(ToriError::NotBasic);
        }
        Ok(BasicLabel { kottwitz: affine::kottwitz_class(d, x, Pi1Variant::Model), newton: nu.dominant_rep })
    }

    /// The class of `1`.
    pub fn trivial(d: &RootDatum) -> Self {
        Self::of(d, &ExtAffineElt::identity(d.rank())).expect("1 is basic")
    }
}

/// Distinct basic labels of the lifts `(c, tau)` of the special Coxeter
/// element with `tau` in the box `[-radius, radius]^n`.
pub fn basic_labels_in_box(d: &RootDatum, radius: i64) -> Vec<BasicLabel> {
    let c = weyl::special_coxeter(d);
    let n = d.rank();
    let mut out: Vec<BasicLabel> = Vec::new();
    let mut tau = vec![-radius; n];
    loop {
        let l = BasicLabel::of(d, &ExtAffineElt::new(c.clone(), tau.clone())).expect("Coxeter lifts are basic");
        if !out.contains(&l) {
            out.push(l);
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            tau[k] += 1;
            if tau[k] <= radius {
                break;
            }
            tau[k] = -radius;
            k += 1;
        }
    }
}

/// `kappa^w`: image of a lift class in `pi_1(G)_<sigma>`.
pub fn kottwitz_of_class(d: &RootDatum, t: &LiftTorsor, cl: &LiftClass) -> Vec<i64> {
    affine::kottwitz_class(d, &t.lift_element(cl), Pi1Variant::Model)
}

/// Necessary condition for the cover attached to `cl` to be nonempty:
/// `kappa_G(b) = kappa^w(cl)`.
pub fn nonemptiness_predicate(d: &RootDatum, t: &LiftTorsor, cl: &LiftClass, b: &BasicLabel) -> bool {
    kottwitz_of_class(d, t, cl) == b.kottwitz
}

/// Solve `sum_j y_j cols[j] = target` over `Q`; `None` if inconsistent.
fn solve_columns(cols: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let k = cols.len();
    if k == 0 {
        return target.iter().all(Zero::is_zero).then(Vec::new);
    }
    // Normal equations are exact over Q and the columns are independent.
    let gram: Vec<Vec<Q>> =
        (0..k).map(|i| (0..k).map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum()).collect()).collect();
    let rhs: Vec<Q> = (0..k).map(|i| cols[i].iter().zip(target).map(|(a, b)| a * b).sum()).collect();
    let y = QMat { data: gram }.solve(&rhs)?;
    let ok = (0..target.len()).all(|r| {
        let s: Q = (0..k).map(|j| &y[j] * &cols[j][r]).sum();
        s == target[r]
    });
    ok.then_some(y)
}

/// `{cl : nu(w, cl) = nu_b, kappa^w(cl) = kappa_G(b)}`. The free
/// coordinates of a class are determined by its Newton point, so only
/// torsion coordinates are enumerated.
pub fn basic_fiber(d: &RootDatum, t: &LiftTorsor, b: &BasicLabel) -> Vec<LiftClass> {
    let g = &t.group;
    let inv = g.invariants();
    let free: Vec<usize> = (0..inv.len()).filter(|&i| inv[i].is_zero()).collect();
    let tors: Vec<usize> = (0..inv.len()).filter(|&i| !inv[i].is_zero()).collect();
    let nu_of = |coset: &[i64]| affine::newton_point(d, &ExtAffineElt::new(t.base.clone(), g.lift_i64(coset))).vector;
    let unit = |i: usize| {
        let mut v = vec![0; inv.len()];
        v[i] = 1;
        v
    };
    let cols: Vec<Vec<Q>> = free.iter().map(|&i| nu_of(&unit(i))).collect();
    let Some(y) = solve_columns(&cols, &b.newton) else { return Vec::new() };
    if y.iter().any(|v| !v.is_integer()) {
        return Vec::new();
    }
    let mut base = vec![0; inv.len()];
    for (&i, v) in free.iter().zip(&y) {
        base[i] = v.to_integer().to_i64().expect("small coordinate");
    }
    let dims: Vec<i64> = tors.iter().map(|&i| inv[i].to_i64().expect("small torsion")).collect();
    let mut out = Vec::new();
    let mut digits = vec![0i64; tors.len()];
    loop {
        let mut coset = base.clone();
        for (&i, &x) in tors.iter().zip(&digits) {
            coset[i] = x;
        }
        let cl = LiftClass { coset };
        if nonemptiness_predicate(d, t, &cl, b)
            && affine::newton_point(d, &t.lift_element(&cl)).dominant_rep == b.newton
        {
            out.push(cl);
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                out.sort();
                return out;
            }
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Torsion of `im(beta_w)` as lift classes.
pub fn beta_image_torsion(d: &RootDatum, w: &WeylElt) -> Vec<LiftClass> {
    let b = affine::beta_map(d, w);
    let img = lattice::image_and_torsion(&b);
    let mut out: Vec<LiftClass> =
        img.torsion_elements_in_target(&b.target).into_iter().map(|coset| LiftClass { coset }).collect();
    out.sort();
    out
}

/// Image of `cl` under `v in C_W(w sigma)`, computed as `v~^-1 (w, tau) sigma(v~)`
/// with the lift `v~ = (v, mu)`.
pub fn act(d: &RootDatum, t: &LiftTorsor, v: &WeylElt, mu: &[i64], cl: &LiftClass) -> LiftClass {
    let vt = ExtAffineElt::new(v.clone(), mu.to_vec());
    let y = t.lift_element(cl).sigma_conjugate(d, &vt);
    debug_assert_eq!(y.finite(), &t.base);
    t.class_of(y.translation())
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalClasses {
    pub fiber: Vec<LiftClass>,
    pub orbits: Vec<Vec<LiftClass>>,
    pub centralizer_order: usize,
    pub action_trivial: bool,
}

impl RationalClasses {
    pub fn count(&self) -> usize {
        self.orbits.len()
    }
}

/// Orbits of `C_W(w sigma)` on the basic fiber.
pub fn rational_class_count(d: &RootDatum, w: &WeylElt, b: &BasicLabel, guard: u128) -> Result<RationalClasses, ToriError> {
    if !affine::is_central(d, &b.newton) {
        return Err(ToriError::NotBasic);
    }
    let t = lifts_mod_kernel(d, w);
    let fiber = basic_fiber(d, &t, b);
    let wg = WeylGroup::generate(d, guard)?;
    let cent: Vec<WeylElt> = wg.twisted_centralizer(d, w).into_iter().map(|i| wg.get(i).clone()).collect();
    let zero = vec![0; d.rank()];
    let mut orbit_of = vec![usize::MAX; fiber.len()];
    let mut orbits: Vec<Vec<LiftClass>> = Vec::new();
    let mut action_trivial = true;
    for s in 0..fiber.len() {
        if orbit_of[s] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = vec![s];
        orbit_of[s] = id;
        let mut k = 0;
        while k < members.len() {
            let cur = &fiber[members[k]];
            for v in &cent {
                let img = act(d, &t, v, &zero, cur);
                if img != *cur {
                    action_trivial = false;
                }
                let j = fiber.iter().position(|x| *x == img).expect("the fiber is stable under the centralizer");
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        orbits.push(members.into_iter().map(|i| fiber[i].clone()).collect());
    }
    Ok(RationalClasses { fiber, orbits, centralizer_order: cent.len(), action_trivial })
}

/// The label `b_1` of the worked `(SL2 x SL2)/mu2` example: Kottwitz class of `(e1+e2)/2`.
pub fn sl2_example_nontrivial_label(d: &RootDatum) -> BasicLabel {
    let c = weyl::special_coxeter(d);
    BasicLabel::of(d, &ExtAffineElt::new(c, vec![1, 0])).expect("Coxeter lifts are basic")
}

/// Number of elements of a torsion coinvariant group, as `usize`.
pub fn order_usize(g: &AbelianGroup) -> Option<usize> {
    g.order().and_then(|o: BigInt| o.to_usize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_datum::{Family, GroupType, Isogeny};
    use proptest::prelude::*;

    fn sl2() -> (RootDatum, WeylElt) {
        let d = RootDatum::sl2_sl2_mod_mu2();
        let c = weyl::special_coxeter(&d);
        (d, c)
    }

    #[test]
    fn sl2_example_kernel_and_quotient() {
        let (d, c) = sl2();
        let t = lifts_mod_kernel(&d, &c);
        assert_eq!(t.group.describe(), "Z/2 x Z/2");
        // ker = Z 2e1 + Z (e2 - e1), with e1 = u1 + u2, e2 = u1 - u2.
        assert_eq!(t.class_of(&[2, 2]), t.class_of(&[0, 0]));
        assert_eq!(t.class_of(&[0, -2]), t.class_of(&[0, 0]));
        let img = lattice::image_and_torsion(&affine::beta_map(&d, &c));
        assert_eq!(img.group.order(), Some(BigInt::from(2)));
    }

    #[test]
    fn sl2_example_trivial_b() {
        let (d, c) = sl2();
        let b = BasicLabel::trivial(&d);
        let t = lifts_mod_kernel(&d, &c);
        let fib = basic_fiber(&d, &t, &b);
        let mut expect = vec![t.class_of(&[0, 0]), t.class_of(&[1, 1])];
        expect.sort();
        assert_eq!(fib, expect);
        let rc = rational_class_count(&d, &c, &b, 100).unwrap();
        assert_eq!(rc.count(), 2);
        assert!(rc.action_trivial);
        assert_eq!(rc.centralizer_order, 4);
    }

    #[test]
    fn sl2_example_nontrivial_b() {
        let (d, c) = sl2();
        let b = sl2_example_nontrivial_label(&d);
        let t = lifts_mod_kernel(&d, &c);
        let fib = basic_fiber(&d, &t, &b);
        let mut expect = vec![t.class_of(&[1, 0]), t.class_of(&[0, 1])];
        expect.sort();
        assert_eq!(fib, expect);
        let rc = rational_class_count(&d, &c, &b, 100).unwrap();
        assert_eq!(rc.count(), 1);
        assert!(!rc.action_trivial);
    }

    #[test]
    fn adjoint_coxeter_fibers_are_points() {
        for f in Family::ALL {
            let d = RootDatum::build(GroupType::new(f, f.min_rank() + 1, Isogeny::Adjoint).unwrap()).unwrap();
            let c = weyl::special_coxeter(&d);
            let t = lifts_mod_kernel(&d, &c);
            for cl in affine::basic_classes(&d).unwrap() {
                let b = BasicLabel::of(&d, &cl.representative).unwrap();
                assert_eq!(basic_fiber(&d, &t, &b).len(), 1, "{f}");
                let passing = t.group.elements().unwrap().into_iter().filter(|e| {
                    nonemptiness_predicate(&d, &t, &LiftClass { coset: e.clone() }, &b)
                });
                assert_eq!(passing.count(), 1);
            }
        }
    }

    #[test]
    fn simply_connected_split_identity_torsor_is_free() {
        let d = RootDatum::build(GroupType::new(Family::C, 3, Isogeny::SimplyConnected).unwrap()).unwrap();
        let t = lifts_mod_kernel(&d, &WeylElt::identity(3));
        assert_eq!(t.group.describe(), "Z x Z x Z");
    }

    #[test]
    fn fibers_over_coxeter_are_beta_torsors() {
        for f in Family::ALL {
            for iso in Isogeny::ALL {
                let d = RootDatum::build(GroupType::new(f, f.min_rank(), iso).unwrap()).unwrap();
                let c = weyl::special_coxeter(&d);
                let t = lifts_mod_kernel(&d, &c);
                let img = beta_image_torsion(&d, &c);
                for b in basic_labels_in_box(&d, 1) {
                    let fib = basic_fiber(&d, &t, &b);
                    assert_eq!(fib.len(), img.len(), "{f} {iso}");
                    let base = t.representative(&fib[0]);
                    for x in &fib {
                        let diff: Vec<i64> =
                            t.representative(x).iter().zip(&base).map(|(a, b)| a - b).collect();
                        assert!(img.contains(&t.class_of(&diff)));
                    }
                    for e in &img {
                        let moved: Vec<i64> =
                            base.iter().zip(t.representative(e)).map(|(a, b)| a + b).collect();
                        assert!(fib.contains(&t.class_of(&moved)));
                    }
                }
            }
        }
    }

    #[test]
    fn type_c_lifts_have_distinct_kottwitz_classes() {
        let t = GroupType::model(Family::C, 3).unwrap();
        let (d, c0) = affine::special_lift(t, 0).unwrap();
        let (_, c1) = affine::special_lift(t, 1).unwrap();
        let tor = lifts_mod_kernel(&d, c0.finite());
        let b1 = BasicLabel::of(&d, &c1).unwrap();
        let cl0 = tor.class_of(c0.translation());
        assert!(!nonemptiness_predicate(&d, &tor, &cl0, &b1));
        assert!(nonemptiness_predicate(&d, &tor, &tor.class_of(c1.translation()), &b1));
    }

    #[test]
    fn restriction_of_scalars_counts_agree() {
        let base = RootDatum::build(GroupType::new(Family::A, 3, Isogeny::PaperModel).unwrap()).unwrap();
        for deg in 2..=3 {
            let res = base.restriction_of_scalars(deg).unwrap();
            let c = weyl::special_coxeter(&res);
            let cb = weyl::special_coxeter(&base);
            assert!(weyl::is_twisted_coxeter(&res, &c));
            for b in basic_labels_in_box(&base, 1) {
                let n0 = rational_class_count(&base, &cb, &b, 1000).unwrap().count();
                // The label of (c', tau) corresponds to ((c', 1, ..), (tau, 0, ..)).
                let tau = {
                    let t = lifts_mod_kernel(&base, &cb);
                    let f = basic_fiber(&base, &t, &b);
                    t.representative(&f[0])
                };
                let mut big_tau = tau.clone();
                big_tau.resize(res.rank(), 0);
                let bb = BasicLabel::of(&res, &ExtAffineElt::new(c.clone(), big_tau)).unwrap();
                let n1 = rational_class_count(&res, &c, &bb, 100_000).unwrap().count();
                assert_eq!(n0, n1, "degree {deg}");
            }
        }
    }

    #[test]
    fn coxeter_action_trivial_for_b_one() {
        for f in Family::ALL {
            for iso in Isogeny::ALL {
                for r in f.min_rank()..=4 {
                    let d = RootDatum::build(GroupType::new(f, r, iso).unwrap()).unwrap();
                    let c = weyl::special_coxeter(&d);
                    let rc = rational_class_count(&d, &c, &BasicLabel::trivial(&d), 1_000_000).unwrap();
                    assert!(rc.action_trivial, "{f}{r} {iso}");
                    assert_eq!(rc.count(), beta_image_torsion(&d, &c).len());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn action_independent_of_lift(mu in prop::collection::vec(-3i64..=3, 5), tau in prop::collection::vec(-3i64..=3, 5)) {
            let d = RootDatum::build(GroupType::model(Family::TwoD, 4).unwrap()).unwrap();
            let c = weyl::special_coxeter(&d);
            let t = lifts_mod_kernel(&d, &c);
            let wg = WeylGroup::generate(&d, 10_000).unwrap();
            let cl = t.class_of(&tau);
            for i in wg.twisted_centralizer(&d, &c) {
                let v = wg.get(i);
                prop_assert_eq!(act(&d, &t, v, &mu, &cl), act(&d, &t, v, &[0; 5], &cl));
            }
        }
    }
}
