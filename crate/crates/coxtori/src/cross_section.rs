//! Root filtrations `Phi^+ = Psi_1 ⊇ .. ⊇ Psi_r = {alpha > 0 : c(alpha) < 0}`
//! for special Coxeter elements, and their verification.
//!
//! Conditions checked for a filtration:
//! 1. each `Psi_i` and `Psi_i \ Psi_r` is closed under addition;
//! 2. for `i < r`, `alpha, beta in Psi_i` and `alpha + beta` a root imply
//!    `alpha + beta in Psi_{i+1}`;
//! 3. `sigma(c(Psi_i \ Psi_r)) ⊆ Psi_i`.
//!
//! A filtration is stored as a level function on positive roots:
//! `Psi_i = {alpha : level(alpha) >= i}`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::root_datum::{Family, GroupType, RootDatum};
use crate::weyl::{self, WeylElt};

/// Images of the positive roots under `c` and under `sigma c`.
#[derive(Clone, Debug, Serialize)]
pub struct RootAction {
    pub c: Vec<usize>,
    pub sigma_c: Vec<usize>,
}

pub fn coxeter_action_on_roots(d: &RootDatum, c: &WeylElt) -> RootAction {
    let c_img: Vec<usize> = (0..d.num_positive()).map(|i| c.act_on_root(d, i)).collect();
    let sigma_c = c_img.iter().map(|&j| d.sigma_root(j)).collect();
    RootAction { c: c_img, sigma_c }
}

/// Roots of `cU cap U^-`: `c(Phi^+) cap Phi^-`.
pub fn cross_section_roots(d: &RootDatum, c: &WeylElt) -> Vec<usize> {
    let mut v: Vec<usize> = (0..d.num_positive()).map(|i| c.act_on_root(d, i)).filter(|&j| !d.is_positive(j)).collect();
    v.sort_unstable();
    v
}

/// `{alpha > 0 : c(alpha) < 0}`, the last step of the filtration.
pub fn phi_b(d: &RootDatum, c: &WeylElt) -> Vec<usize> {
    (0..d.num_positive()).filter(|&i| !d.is_positive(c.act_on_root(d, i))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootFiltration {
    pub r: usize,
    /// Level of each positive root, in `1..=r`.
    pub level: Vec<usize>,
}

impl RootFiltration {
    /// `Psi_i` as sorted positive-root indices.
    pub fn psi(&self, i: usize) -> Vec<usize> {
        (0..self.level.len()).filter(|&a| self.level[a] >= i).collect()
    }

    pub fn chain(&self) -> Vec<Vec<usize>> {
        (1..=self.r).map(|i| self.psi(i)).collect()
    }

    pub fn labels(&self, d: &RootDatum, i: usize) -> Vec<String> {
        self.psi(i).into_iter().map(|a| d.root(a).label.clone()).collect()
    }
}

/// Assign levels from a list of `(level, label)` entries; later entries for
/// the same root must not lower its level.
fn from_levels(d: &RootDatum, r: usize, entries: &[(usize, String)]) -> RootFiltration {
    let mut level = vec![1; d.num_positive()];
    for (l, lab) in entries {
        let a = d.root_by_label(lab).unwrap_or_else(|| panic!("no root {lab}"));
        assert!(d.is_positive(a), "{lab} is not positive");
        level[a] = level[a].max(*l);
    }
    RootFiltration { r, level }
}

fn lab_minus(i: usize, j: usize) -> String {
    format!("{i}-{j}")
}

fn lab_plus(i: usize, j: usize) -> String {
    format!("{i}+{j}")
}

fn filtration_entries(t: GroupType) -> (usize, Vec<(usize, String)>) {
    let n = t.rank_param;
    let m = t.m();
    let mut e: Vec<(usize, String)> = Vec::new();
    let r = match t.family {
        Family::A => {
            // level(alpha_{i-j}) = j - 1
            for j in 2..=n {
                for i in 1..j {
                    e.push((j - 1, lab_minus(i, j)));
                }
            }
            n - 1
        }
        Family::C | Family::B => {
            let long = |i: usize| if t.family == Family::C { format!("2*{i}") } else { format!("{i}") };
            for j in 2..=m {
                for i in 1..j {
                    e.push((j - 1, lab_minus(i, j)));
                    e.push((m, lab_plus(i, j)));
                }
            }
            for i in 1..=m {
                e.push((m, long(i)));
            }
            for i in 1..m {
                e.push((m + 1, lab_plus(i, m)));
            }
            e.push((m + 1, long(m)));
            m + 1
        }
        Family::D => {
            for j in 2..m {
                for i in 1..j {
                    e.push((j - 1, lab_minus(i, j)));
                }
            }
            // `i+m` for `i <= m-2` sits at level `m-1`, not `m`: `sigma c`
            // maps it to `(i+1)-m`, which is at level `m-1`.
            for j in 2..m {
                for i in 1..j {
                    e.push((m, lab_plus(i, j)));
                }
            }
            for i in 1..=m - 2 {
                e.push((m - 1, lab_minus(i, m)));
                e.push((m - 1, lab_plus(i, m)));
                e.push((m + 1, lab_plus(i, m - 1)));
            }
            e.push((m + 1, lab_minus(m - 1, m)));
            e.push((m + 1, lab_plus(m - 1, m)));
            m + 1
        }
        Family::TwoA => {
            for j in 1..=m {
                e.push((m + 2, lab_minus(j, m + 1)));
            }
            // For n even, `m-j` (j >= m+2) belongs to level m, as `sigma c`
            // sends it to `(n+1-j)-m`.
            for i in (1..=m).filter(|&i| i != n - m) {
                for j in m + 2..=n {
                    e.push((m + 1, lab_minus(i, j)));
                }
            }
            for i0 in 2..=m {
                for i in 1..i0 {
                    e.push((i0, lab_minus(i, i0)));
                }
                for j in n - i0 + 1..=n {
                    e.push((i0, lab_minus(n - i0, j)));
                }
            }
            m + 2
        }
        Family::TwoD => {
            for i in 1..m {
                e.push((m + 1, lab_minus(i, m)));
                e.push((m - 1, lab_plus(i, m)));
            }
            for j in 2..m {
                for i in 1..j {
                    e.push((m, lab_plus(i, j)));
                    e.push((j - 1, lab_minus(i, j)));
                }
            }
            m + 1
        }
    };
    (r, e)
}

/// The explicit filtration for the special Coxeter element of a model group.
/// Type B uses [`least_filtration`]: transporting the C levels along the
/// root/coroot bijection breaks condition 2 (`e1 + e2` from two level-`m`
/// short roots stays at level `m`).
pub fn build_filtration(d: &RootDatum, t: GroupType) -> RootFiltration {
    if t.family == Family::B {
        return least_filtration(d, &weyl::special_coxeter(d)).expect("type B admits a filtration");
    }
    let (r, e) = filtration_entries(t);
    from_levels(d, r, &e)
}

/// Pointwise least level function satisfying conditions 2 and 3 with
/// `Psi_r = Phi_B`, found by monotone iteration from level 1. `None` if the
/// levels grow without bound.
pub fn least_filtration(d: &RootDatum, c: &WeylElt) -> Option<RootFiltration> {
    let np = d.num_positive();
    let in_b: Vec<bool> = (0..np).map(|a| !d.is_positive(c.act_on_root(d, a))).collect();
    let act = coxeter_action_on_roots(d, c);
    let triples = sum_triples(d);
    let mut level = vec![1usize; np];
    loop {
        let mut changed = false;
        for &(a, b, s) in &triples {
            if in_b[s] {
                continue;
            }
            let lo = match (in_b[a], in_b[b]) {
                (true, true) => return None,
                (true, false) => level[b],
                (false, true) => level[a],
                (false, false) => level[a].min(level[b]),
            };
            if level[s] < lo + 1 {
                level[s] = lo + 1;
                changed = true;
            }
        }
        for a in 0..np {
            let img = act.sigma_c[a];
            if in_b[a] || !d.is_positive(img) || in_b[img] {
                continue;
            }
            if level[img] < level[a] {
                level[img] = level[a];
                changed = true;
            }
        }
        if level.iter().any(|&l| l > np) {
            return None;
        }
        if !changed {
            break;
        }
    }
    let r = (0..np).filter(|&a| !in_b[a]).map(|a| level[a]).max().unwrap_or(0) + 1;
    for a in 0..np {
        if in_b[a] {
            level[a] = r;
        }
    }
    Some(RootFiltration { r, level })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: u8,
    pub level: usize,
    pub roots: Vec<String>,
}

/// The index map on a graded piece `Psi_i \ Psi_{i+1}`: `alpha` goes to
/// `sigma c(alpha)` if that lies in the piece, else to `None`.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaPiece {
    pub level: usize,
    pub map: Vec<(String, Option<String>)>,
    pub fibers_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationReport {
    pub r: usize,
    pub starts_at_positive_roots: bool,
    pub ends_at_phi_b: bool,
    pub violations: Vec<Violation>,
    pub lambda: Vec<LambdaPiece>,
}

impl FiltrationReport {
    pub fn passes(&self) -> bool {
        self.starts_at_positive_roots
            && self.ends_at_phi_b
            && self.violations.is_empty()
            && self.lambda.iter().all(|p| p.fibers_ok)
    }
}

/// Pairs of positive roots whose sum is a root, with that sum.
fn sum_triples(d: &RootDatum) -> Vec<(usize, usize, usize)> {
    let np = d.num_positive();
    let mut out = Vec::new();
    for a in 0..np {
        for b in a..np {
            if let Some(s) = d.root_sum(a, b) {
                out.push((a, b, s));
            }
        }
    }
    out
}

pub fn verify_filtration(d: &RootDatum, f: &RootFiltration, c: &WeylElt) -> FiltrationReport {
    let np = d.num_positive();
    let r = f.r;
    let lv = &f.level;
    let name = |a: usize| d.root(a).label.clone();
    let mut violations = Vec::new();
    let phib = phi_b(d, c);
    let ends_at_phi_b = f.psi(r) == phib;
    let starts_at_positive_roots = lv.len() == np && lv.iter().all(|&l| (1..=r).contains(&l));
    let triples = sum_triples(d);
    for i in 1..=r {
        for &(a, b, s) in &triples {
            if lv[a] < i || lv[b] < i {
                continue;
            }
            let trio = || vec![name(a), name(b), name(s)];
            if lv[s] < i {
                violations.push(Violation { condition: 1, level: i, roots: trio() });
            }
            if lv[a] < r && lv[b] < r && lv[s] >= r {
                violations.push(Violation { condition: 1, level: i, roots: trio() });
            }
            if i < r && lv[s] < i + 1 {
                violations.push(Violation { condition: 2, level: i, roots: trio() });
            }
        }
    }
    let act = coxeter_action_on_roots(d, c);
    for a in 0..np {
        if lv[a] >= r {
            continue;
        }
        let img = act.sigma_c[a];
        if !d.is_positive(img) || lv[img] < lv[a] {
            violations.push(Violation { condition: 3, level: lv[a], roots: vec![name(a), name(img)] });
        }
    }
    let mut lambda = Vec::new();
    for i in 1..r {
        let piece: Vec<usize> = (0..np).filter(|&a| lv[a] == i).collect();
        let mut hits = vec![0usize; np];
        let map = piece
            .iter()
            .map(|&a| {
                let img = act.sigma_c[a];
                let target = (d.is_positive(img) && lv[img] == i).then_some(img);
                if let Some(t) = target {
                    hits[t] += 1;
                }
                (name(a), target.map(name))
            })
            .collect();
        lambda.push(LambdaPiece { level: i, map, fibers_ok: hits.iter().all(|&h| h <= 1) });
    }
    FiltrationReport { r, starts_at_positive_roots, ends_at_phi_b, violations, lambda }
}

/// Move one random root one level up or down, staying in `1..=r`.
/// Needs `r >= 2`.
pub fn mutate<R: Rng>(f: &RootFiltration, rng: &mut R) -> RootFiltration {
    assert!(f.r >= 2, "a one-step filtration cannot be mutated");
    let mut g = f.clone();
    loop {
        let a = rng.gen_range(0..g.level.len());
        let up = rng.gen_bool(0.5);
        let l = g.level[a];
        let new = if up { l + 1 } else { l.wrapping_sub(1) };
        if (1..=g.r).contains(&new) {
            g.level[a] = new;
            return g;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MutationSummary {
    pub trials: usize,
    pub detected: usize,
    /// Mutants that still satisfy every condition according to the oracle.
    pub equivalent: usize,
    /// Mutants the oracle rejects but verification accepted, or vice versa.
    pub disagreements: usize,
}

impl MutationSummary {
    /// Detection rate over non-equivalent mutants.
    pub fn rate(&self) -> f64 {
        let live = self.trials - self.equivalent;
        if live == 0 {
            1.0
        } else {
            self.detected as f64 / live as f64
        }
    }

    pub fn raw_rate(&self) -> f64 {
        self.detected as f64 / self.trials as f64
    }
}

/// Explicit filtrations of all model groups up to `max_rank` with `r >= 2`.
pub fn mutation_cases(max_rank: usize) -> Vec<(RootDatum, WeylElt, RootFiltration)> {
    let mut cases = Vec::new();
    for fam in Family::ALL {
        for r in fam.min_rank()..=max_rank {
            let t = GroupType::model(fam, r).expect("valid model");
            let d = RootDatum::build(t).expect("model builds");
            let c = weyl::special_coxeter(&d);
            let f = build_filtration(&d, t);
            if f.r >= 2 {
                cases.push((d, c, f));
            }
        }
    }
    cases
}

/// Mutate random explicit filtrations and count detections. `oracle` decides
/// independently whether a mutant is still a valid filtration.
pub fn mutation_test<R, O>(trials: usize, max_rank: usize, rng: &mut R, oracle: O) -> MutationSummary
where
    R: Rng,
    O: Fn(&RootDatum, &WeylElt, &RootFiltration) -> bool,
{
    let cases = mutation_cases(max_rank);
    let mut s = MutationSummary { trials, detected: 0, equivalent: 0, disagreements: 0 };
    for _ in 0..trials {
        let (d, c, f) = &cases[rng.gen_range(0..cases.len())];
        let g = mutate(f, rng);
        let flagged = !verify_filtration(d, &g, c).passes();
        let valid = oracle(d, c, &g);
        if flagged {
            s.detected += 1;
        }
        if valid {
            s.equivalent += 1;
        }
        if flagged == valid {
            s.disagreements += 1;
        }
    }
    s
}

/// Set-based check of the conditions, using character arithmetic and
/// coroot images instead of the precomputed root tables.
pub fn holds_by_sets(d: &RootDatum, c: &WeylElt, f: &RootFiltration) -> bool {
    let np = d.num_positive();
    let chain: Vec<BTreeSet<usize>> = (1..=f.r).map(|i| (0..np).filter(|&a| f.level[a] >= i).collect()).collect();
    let sum = |a: usize, b: usize| {
        let v: Vec<i64> = d.root(a).character.iter().zip(&d.root(b).character).map(|(x, y)| x + y).collect();
        d.index_of_character(&v)
    };
    let image = |a: usize| {
        let v = d.sigma().apply(&c.action().apply(&d.root(a).coroot));
        d.index_of_coroot(&v).expect("root image")
    };
    let closed = |s: &BTreeSet<usize>| s.iter().all(|&a| s.iter().all(|&b| sum(a, b).is_none_or(|x| s.contains(&x))));
    let last = &chain[f.r - 1];
    let phib: BTreeSet<usize> =
        (0..np).filter(|&a| d.index_of_coroot(&c.action().apply(&d.root(a).coroot)).unwrap() >= np).collect();
    if *last != phib {
        return false;
    }
    for (i, psi) in chain.iter().enumerate() {
        let rest: BTreeSet<usize> = psi.difference(last).copied().collect();
        if !closed(psi) || !closed(&rest) {
            return false;
        }
        if i + 1 < f.r {
            let next = &chain[i + 1];
            for &a in psi {
                for &b in psi {
                    if sum(a, b).is_some_and(|x| !next.contains(&x)) {
                        return false;
                    }
                }
            }
        }
        if rest.iter().any(|&a| !psi.contains(&image(a))) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(f: Family, r: usize) -> (RootDatum, GroupType, WeylElt) {
        let t = GroupType::model(f, r).unwrap();
        let d = RootDatum::build(t).unwrap();
        let c = weyl::special_coxeter(&d);
        (d, t, c)
    }

    fn idx(d: &RootDatum, l: &str) -> usize {
        d.root_by_label(l).unwrap()
    }

    #[test]
    fn explicit_filtrations_pass() {
        for fam in Family::ALL {
            for r in fam.min_rank()..=10 {
                let (d, t, c) = setup(fam, r);
                let f = build_filtration(&d, t);
                let rep = verify_filtration(&d, &f, &c);
                assert!(rep.passes(), "{t}: {:?} {} {}", rep.violations.first(), rep.ends_at_phi_b, rep.starts_at_positive_roots);
            }
        }
    }

    #[test]
    fn filtration_lengths() {
        // B3 needs 5 steps: the least level function already reaches 4 off Phi_B.
        let cases = [(Family::A, 5, 4), (Family::C, 3, 4), (Family::B, 3, 5), (Family::B, 4, 5), (Family::D, 5, 6), (Family::TwoA, 5, 4), (Family::TwoD, 4, 5)];
        for (fam, r, len) in cases {
            let (d, t, _) = setup(fam, r);
            assert_eq!(build_filtration(&d, t).r, len);
        }
    }

    #[test]
    fn c3_top_step() {
        let (d, t, _) = setup(Family::C, 3);
        let mut got = build_filtration(&d, t).labels(&d, 4);
        got.sort();
        assert_eq!(got, vec!["1+3", "2*3", "2+3"]);
    }

    #[test]
    fn two_a5_top_step() {
        let (d, t, _) = setup(Family::TwoA, 5);
        let mut got = build_filtration(&d, t).labels(&d, 4);
        got.sort();
        assert_eq!(got, vec!["1-3", "2-3"]);
    }

    #[test]
    fn a3_chain() {
        let (d, t, _) = setup(Family::A, 3);
        let f = build_filtration(&d, t);
        assert_eq!(f.psi(1).len(), d.num_positive());
        let mut two = f.labels(&d, 2);
        two.sort();
        assert_eq!(two, vec!["1-3", "2-3"]);
    }

    #[test]
    fn coxeter_action_matches_descriptions() {
        let (d, _, c) = setup(Family::A, 4);
        assert_eq!(c.act_on_root(&d, idx(&d, "1-2")), idx(&d, "2-3"));
        let (d, _, c) = setup(Family::C, 3);
        assert!(!d.is_positive(c.act_on_root(&d, idx(&d, "2*3"))));
        assert_eq!(c.act_on_root(&d, idx(&d, "1-3")), idx(&d, "1+2"));
        let (d, _, c) = setup(Family::D, 5);
        assert_eq!(c.act_on_root(&d, idx(&d, "2-5")), idx(&d, "3+5"));
        assert_eq!(c.act_on_root(&d, idx(&d, "2+5")), idx(&d, "3-5"));
        let (d, _, c) = setup(Family::TwoD, 4);
        for i in 1..4 {
            assert_eq!(d.sigma_root(idx(&d, &format!("{i}+4"))), idx(&d, &format!("{i}-4")));
        }
        assert_eq!(c.act_on_root(&d, idx(&d, "1+4")), idx(&d, "1+2"));
        let (d, _, c) = setup(Family::TwoA, 5);
        assert_eq!(c.act_on_root(&d, idx(&d, "1-4")), idx(&d, "2-4"));
        assert_eq!(c.act_on_root(&d, idx(&d, "3-4")), idx(&d, "1-4"));
        assert_eq!(c.act_on_root(&d, idx(&d, "4-5")), idx(&d, "4-5"));
    }

    #[test]
    fn cross_section_sizes() {
        for fam in Family::ALL {
            for r in fam.min_rank()..=10 {
                let (d, _, c) = setup(fam, r);
                let n = cross_section_roots(&d, &c).len();
                assert_eq!(n, c.length(&d));
                assert_eq!(n, d.sigma_orbits_on_simple().len());
            }
        }
    }

    #[test]
    fn cross_section_examples() {
        let (d, _, c) = setup(Family::C, 2);
        let mut want = vec![idx(&d, "2-1"), idx(&d, "-2*1")];
        want.sort_unstable();
        assert_eq!(cross_section_roots(&d, &c), want);
        let (d, _, c) = setup(Family::D, 4);
        let mut want = vec![idx(&d, "2-1"), idx(&d, "3-1"), idx(&d, "4-1"), idx(&d, "-1-4")];
        want.sort_unstable();
        assert_eq!(cross_section_roots(&d, &c), want);
    }

    #[test]
    fn graded_pieces_are_abelian() {
        for fam in Family::ALL {
            let (d, t, _) = setup(fam, fam.min_rank() + 2);
            let f = build_filtration(&d, t);
            for (a, b, s) in sum_triples(&d) {
                let la = f.level[a];
                assert!(!(la == f.level[b] && la == f.level[s]));
            }
        }
    }

    #[test]
    fn lifting_a_root_breaks_condition_two() {
        let (d, t, c) = setup(Family::C, 3);
        let mut f = build_filtration(&d, t);
        // 1-2 sits at level 1; moving it up makes 1-2 + 2-3 = 1-3 too low.
        f.level[idx(&d, "1-2")] = 2;
        let rep = verify_filtration(&d, &f, &c);
        assert!(rep.violations.iter().any(|v| v.condition == 2));
    }

    #[test]
    fn least_filtration_lengths() {
        for fam in Family::ALL {
            for r in fam.min_rank()..=8 {
                let (d, t, c) = setup(fam, r);
                let f = least_filtration(&d, &c).unwrap();
                assert!(verify_filtration(&d, &f, &c).passes(), "{t}");
                assert!(f.r <= build_filtration(&d, t).r, "{t}");
            }
        }
    }

    #[test]
    fn oracle_accepts_explicit_filtrations() {
        for (d, c, f) in mutation_cases(7) {
            assert!(holds_by_sets(&d, &c, &f), "{}", d.name());
        }
    }

    #[test]
    fn mutations_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = mutation_test(1000, 6, &mut rng, holds_by_sets);
        assert_eq!(s.disagreements, 0);
        assert!(s.rate() >= 0.99, "{s:?}");
        assert!(s.raw_rate() > 0.85, "{s:?}");
    }
}
