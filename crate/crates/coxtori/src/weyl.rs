//! Weyl group elements acting on cocharacters: lengths, reduced words,
//! twisted Coxeter recognition, sigma-conjugacy classes and twisted
//! centralizers.

use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::{qdot, Mat, Q};
use crate::root_datum::RootDatum;

pub const DEFAULT_GUARD: u128 = 10_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WeylError {
    #[error("Weyl group of {name} has order {order}, above the guard {guard}")]
    GuardExceeded { name: String, order: u128, guard: u128 },
    #[error("cannot parse cycle notation `{0}`")]
    BadCycles(String),
}

/// Weyl group element, canonicalized by its action on `X_*(T)`. The word
/// (positions into the simple roots, applied left to right) is advisory.
#[derive(Clone, Debug)]
pub struct WeylElt {
    action: Mat,
    word: Option<Vec<usize>>,
}

impl PartialEq for WeylElt {
    fn eq(&self, other: &Self) -> bool {
        self.action == other.action
    }
}

impl Eq for WeylElt {}

impl Hash for WeylElt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.action.hash(state);
    }
}

impl WeylElt {
    pub fn identity(rank: usize) -> Self {
        WeylElt { action: Mat::identity(rank), word: Some(Vec::new()) }
    }

    pub fn from_matrix(action: Mat) -> Self {
        WeylElt { action, word: None }
    }

    pub fn simple_reflection(d: &RootDatum, pos: usize) -> Self {
        WeylElt { action: d.reflection(d.simple_roots()[pos]), word: Some(vec![pos]) }
    }

    /// Product `s_(w[0]) s_(w[1]) ...` of simple reflections.
    pub fn from_word(d: &RootDatum, word: &[usize]) -> Self {
        let mut m = Mat::identity(d.rank());
        for &p in word {
            m = m.mul(&d.reflection(d.simple_roots()[p]));
        }
        WeylElt { action: m, word: Some(word.to_vec()) }
    }

    pub fn action(&self) -> &Mat {
        &self.action
    }

    pub fn word(&self) -> Option<&[usize]> {
        self.word.as_deref()
    }

    pub fn mul(&self, o: &WeylElt) -> WeylElt {
        let word = match (&self.word, &o.word) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        WeylElt { action: self.action.mul(&o.action), word }
    }

    pub fn is_identity(&self) -> bool {
        self.action.is_identity()
    }

    pub fn inverse(&self, d: &RootDatum) -> WeylElt {
        let mut w = self.reduced_word(d);
        w.reverse();
        WeylElt::from_word(d, &w)
    }

    /// `sigma(w) = s w s^{-1}` with `s` the Frobenius on cocharacters.
    pub fn sigma_twist(&self, d: &RootDatum) -> WeylElt {
        let action = d.sigma().mul(&self.action).mul(d.sigma_inv());
        let simple = d.simple_roots();
        let word = self.word.as_ref().map(|w| {
            w.iter()
                .map(|&p| simple.iter().position(|&s| s == d.sigma_root(simple[p])).expect("sigma permutes simple roots"))
                .collect()
        });
        WeylElt { action, word }
    }

    pub fn act_on_root(&self, d: &RootDatum, i: usize) -> usize {
        d.act_on_root(&self.action, i)
    }

    /// Number of positive roots sent to negative roots.
    pub fn length(&self, d: &RootDatum) -> usize {
        (0..d.num_positive()).filter(|&i| !d.is_positive(self.act_on_root(d, i))).count()
    }

    /// A reduced word, found by peeling off right descents.
    pub fn reduced_word(&self, d: &RootDatum) -> Vec<usize> {
        let simple = d.simple_roots();
        let refl: Vec<Mat> = simple.iter().map(|&s| d.reflection(s)).collect();
        let mut cur = self.action.clone();
        let mut rev = Vec::new();
        'outer: loop {
            for (p, &s) in simple.iter().enumerate() {
                if !d.is_positive(d.act_on_root(&cur, s)) {
                    cur = cur.mul(&refl[p]);
                    rev.push(p);
                    continue 'outer;
                }
            }
            break;
        }
        debug_assert!(cur.is_identity());
        rev.reverse();
        rev
    }

    pub fn with_reduced_word(mut self, d: &RootDatum) -> Self {
        self.word = Some(self.reduced_word(d));
        self
    }
}

/// True iff a reduced word uses exactly one simple reflection from each
/// Frobenius orbit on the simple roots.
pub fn is_twisted_coxeter(d: &RootDatum, w: &WeylElt) -> bool {
    let word = w.reduced_word(d);
    let orbits = d.sigma_orbits_on_simple();
    if word.len() != orbits.len() {
        return false;
    }
    orbits.iter().all(|o| word.iter().filter(|p| o.contains(p)).count() == 1)
}

/// The special Coxeter element of the datum, with its defining word.
pub fn special_coxeter(d: &RootDatum) -> WeylElt {
    WeylElt::from_word(d, d.coxeter_word())
}

/// A random twisted Coxeter element: one simple reflection from each
/// Frobenius orbit, multiplied in a random order.
pub fn random_twisted_coxeter<R: Rng>(d: &RootDatum, rng: &mut R) -> WeylElt {
    let mut word: Vec<usize> = d.sigma_orbits_on_simple().iter().map(|o| *o.choose(rng).expect("orbits are nonempty")).collect();
    word.shuffle(rng);
    WeylElt::from_word(d, &word)
}

/// `c sigma(c) ... sigma^(k-1)(c)` with `k` the order of sigma on the simple roots.
pub fn split_power(d: &RootDatum, c: &WeylElt) -> WeylElt {
    let k = diagram_sigma_order(d);
    let mut out = WeylElt::identity(d.rank());
    let mut cur = c.clone();
    for _ in 0..k {
        out = out.mul(&cur);
        cur = cur.sigma_twist(d);
    }
    out
}

/// Order of the Frobenius permutation of the simple roots.
pub fn diagram_sigma_order(d: &RootDatum) -> usize {
    let lens: Vec<usize> = d.sigma_orbits_on_simple().iter().map(Vec::len).collect();
    lens.into_iter().fold(1, num_integer::lcm)
}

/// Order of the Weyl group, from the Dynkin types of the components.
pub fn weyl_group_order(d: &RootDatum) -> u128 {
    let cartan = d.cartan_matrix();
    let l = cartan.len();
    let mut seen = vec![false; l];
    let mut order: u128 = 1;
    for start in 0..l {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let i = comp[k];
            for j in 0..l {
                if !seen[j] && cartan[i][j] != 0 {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        order *= component_order(&cartan, &comp);
    }
    order
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

fn component_order(c: &[Vec<i64>], comp: &[usize]) -> u128 {
    let k = comp.len() as u128;
    let bond = |i: usize, j: usize| c[i][j] * c[j][i];
    let degree = |i: usize| comp.iter().filter(|&&j| j != i && c[i][j] != 0).count();
    let max_bond = comp.iter().flat_map(|&i| comp.iter().map(move |&j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| bond(i, j)).max().unwrap_or(0);
    match max_bond {
        0 => 2,
        3 => 12,
        2 => {
            let double_inner = comp.iter().flat_map(|&i| comp.iter().map(move |&j| (i, j))).any(|(i, j)| i != j && bond(i, j) == 2 && degree(i) == 2 && degree(j) == 2);
            if double_inner {
                1152
            } else {
                (1u128 << k) * factorial(k)
            }
        }
        _ => {
            let Some(&branch) = comp.iter().find(|&&i| degree(i) == 3) else { return factorial(k + 1) };
            let mut arms: Vec<usize> = comp
                .iter()
                .filter(|&&j| j != branch && c[branch][j] != 0)
                .map(|&start| {
                    let (mut prev, mut cur, mut len) = (branch, start, 1);
                    loop {
                        let next = comp.iter().find(|&&x| x != prev && x != cur && c[cur][x] != 0);
                        match next {
                            Some(&n) => {
                                prev = cur;
                                cur = n;
                                len += 1;
                            }
                            None => break len,
                        }
                    }
                })
                .collect();
            arms.sort_unstable();
            match arms.as_slice() {
                [1, 1, _] => (1u128 << (k - 1)) * factorial(k),
                [1, 2, 2] => 51_840,
                [1, 2, 3] => 2_903_040,
                [1, 2, 4] => 696_729_600,
                _ => unreachable!("not a finite Dynkin diagram"),
            }
        }
    }
}

/// All elements of `W`, indexed by action matrix; elements carry
/// reduced words from breadth-first generation.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    elements: Vec<WeylElt>,
    lengths: Vec<usize>,
    index: HashMap<Mat, usize>,
}

impl WeylGroup {
    pub fn generate(d: &RootDatum, guard: u128) -> Result<Self, WeylError> {
        let order = weyl_group_order(d);
        if order > guard {
            return Err(WeylError::GuardExceeded { name: d.name().to_string(), order, guard });
        }
        let refl: Vec<Mat> = d.simple_roots().iter().map(|&s| d.reflection(s)).collect();
        let id = WeylElt::identity(d.rank());
        let mut index = HashMap::new();
        index.insert(id.action.clone(), 0);
        let mut elements = vec![id];
        let mut lengths = vec![0];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (p, r) in refl.iter().enumerate() {
                let m = elements[i].action.mul(r);
                if index.contains_key(&m) {
                    continue;
                }
                let mut word = elements[i].word.clone().expect("generated elements carry words");
                word.push(p);
                index.insert(m.clone(), elements.len());
                queue.push_back(elements.len());
                lengths.push(lengths[i] + 1);
                elements.push(WeylElt { action: m, word: Some(word) });
            }
        }
        debug_assert_eq!(elements.len() as u128, order);
        Ok(WeylGroup { elements, lengths, index })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[WeylElt] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &WeylElt {
        &self.elements[i]
    }

    pub fn length_of(&self, i: usize) -> usize {
        self.lengths[i]
    }

    pub fn index_of(&self, w: &WeylElt) -> Option<usize> {
        self.index.get(&w.action).copied()
    }

    /// Orbits of `w -> v^{-1} w sigma(v)`; computed from simple reflections,
    /// which generate the action.
    pub fn sigma_conjugacy_classes(&self, d: &RootDatum) -> SigmaClasses {
        let simple = d.simple_roots();
        let refl: Vec<Mat> = simple.iter().map(|&s| d.reflection(s)).collect();
        let sig: Vec<usize> = simple
            .iter()
            .map(|&s| simple.iter().position(|&t| t == d.sigma_root(s)).expect("sigma permutes simple roots"))
            .collect();
        let mut class_of = vec![usize::MAX; self.len()];
        let mut classes = Vec::new();
        for start in 0..self.len() {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = vec![start];
            class_of[start] = id;
            let mut k = 0;
            while k < members.len() {
                let w = &self.elements[members[k]].action;
                for p in 0..refl.len() {
                    let m = refl[p].mul(w).mul(&refl[sig[p]]);
                    let j = self.index[&m];
                    if class_of[j] == usize::MAX {
                        class_of[j] = id;
                        members.push(j);
                    }
                }
                k += 1;
            }
            members.sort_unstable();
            classes.push(members);
        }
        SigmaClasses { classes, class_of }
    }

    /// `{v : v^{-1} w sigma(v) = w}`, by enumeration.
    pub fn twisted_centralizer(&self, d: &RootDatum, w: &WeylElt) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let v = &self.elements[i];
                let sv = v.sigma_twist(d);
                w.action.mul(&sv.action) == v.action.mul(&w.action)
            })
            .collect()
    }

    /// Indices of the cyclic subgroup generated by `g`.
    pub fn cyclic_subgroup(&self, g: &WeylElt) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = Mat::identity(g.action.rows());
        loop {
            let i = self.index[&cur];
            if out.contains(&i) {
                break;
            }
            out.push(i);
            cur = cur.mul(&g.action);
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug)]
pub struct SigmaClasses {
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
}

/// Dominant representative of `x` in its `W`-orbit, by walking chambers:
/// reflect in any simple root pairing negatively until none does.
pub fn dominant_representative(d: &RootDatum, x: &[Q]) -> Vec<Q> {
    let simple = d.simple_roots();
    let mut cur = x.to_vec();
    loop {
        let neg = simple.iter().find(|&&s| qdot(&d.root(s).character, &cur) < Q::zero());
        match neg {
            Some(&s) => {
                let r = d.root(s);
                let c = qdot(&r.character, &cur);
                for (xi, &a) in cur.iter_mut().zip(&r.coroot) {
                    *xi -= &c * num_bigint::BigInt::from(a);
                }
            }
            None => return cur,
        }
    }
}

pub fn is_dominant(d: &RootDatum, x: &[Q]) -> bool {
    d.simple_roots().iter().all(|&s| qdot(&d.root(s).character, x) >= Q::zero())
}

/// Permutation (1-based, `perm[p-1] = p'`) of the standard-representation
/// weights induced by `w`, for the classical models.
pub fn weight_permutation(d: &RootDatum, w: &WeylElt) -> Option<Vec<usize>> {
    let weights = d.standard_weights()?;
    let inv = w.action.inverse_unimodular()?;
    weights
        .iter()
        .map(|chi| {
            let img = inv.left_apply(chi);
            weights.iter().position(|x| *x == img).map(|p| p + 1)
        })
        .collect()
}

/// Permutation of `1..=n` from cycle notation like `(1,2,3)(5,4)`.
pub fn parse_cycles(s: &str, n: usize) -> Result<Vec<usize>, WeylError> {
    let err = || WeylError::BadCycles(s.to_string());
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut seen = vec![false; n + 1];
    for cyc in s.split(')').map(str::trim).filter(|c| !c.is_empty()) {
        let body = cyc.strip_prefix('(').ok_or_else(err)?;
        let pts: Vec<usize> = body.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| err())).collect::<Result<_, _>>()?;
        for (k, &p) in pts.iter().enumerate() {
            if p == 0 || p > n || seen[p] {
                return Err(err());
            }
            seen[p] = true;
            perm[p - 1] = pts[(k + 1) % pts.len()];
        }
    }
    Ok(perm)
}

/// Cycle notation of a 1-based permutation, fixed points omitted.
pub fn cycle_notation(perm: &[usize]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    for s in 0..perm.len() {
        if seen[s] || perm[s] == s + 1 {
            continue;
        }
        let mut cyc = Vec::new();
        let mut cur = s;
        while !seen[cur] {
            seen[cur] = true;
            cyc.push((cur + 1).to_string());
            cur = perm[cur] - 1;
        }
        out.push_str(&format!("({})", cyc.join(",")));
    }
    if out.is_empty() {
        "()".into()
    } else {
        out
    }
}
