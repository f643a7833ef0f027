//! Root data of the unramified classical groups with their Frobenius
//! action, isogeny variants, and fundamental groups.
//!
//! Cocharacter bases follow the classical matrix models: `b1..bn` for
//! `GL_n` and its unitary form, `e0..em` for `GSp_2m`, `GSO_2m` and the
//! twisted `GSO_2m` (with `e0` the similitude direction), and `e1..em` for
//! `SO_2m+1`. Root labels use `i-j`, `i+j`, `-i-j`, `2*i`, `-2*i`, `i`, `-i`.
//!
//! For type 2A the Frobenius acts on cocharacters by `b_i -> -b_(n+1-i)`,
//! which sends the simple root `(i)-(i+1)` to `(n-i)-(n-i+1)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::lattice::{self, AbelianGroup, AbelianMap, IntMatrix, MapKind};
use crate::linalg::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    #[serde(rename = "2A")]
    TwoA,
    #[serde(rename = "2D")]
    TwoD,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::A, Family::B, Family::C, Family::D, Family::TwoA, Family::TwoD];

    pub fn min_rank(self) -> usize {
        match self {
            Family::A => 2,
            Family::TwoA => 3,
            Family::B | Family::C => 2,
            Family::D | Family::TwoD => 4,
        }
    }

    /// Name of the rank parameter: `n` for the `GL_n` families, `m` otherwise.
    pub fn param_name(self) -> &'static str {
        match self {
            Family::A | Family::TwoA => "n",
            _ => "m",
        }
    }

    pub fn is_split(self) -> bool {
        !matches!(self, Family::TwoA | Family::TwoD)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::TwoA => "2A",
            Family::TwoD => "2D",
        })
    }
}

impl FromStr for Family {
    type Err = RootDatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "2A" | "A2" => Ok(Family::TwoA),
            "2D" | "D2" => Ok(Family::TwoD),
            _ => Err(RootDatumError::UnknownFamily(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Isogeny {
    PaperModel,
    Adjoint,
    SimplyConnected,
}

impl Isogeny {
    pub const ALL: [Isogeny; 3] = [Isogeny::PaperModel, Isogeny::Adjoint, Isogeny::SimplyConnected];
}

impl fmt::Display for Isogeny {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Isogeny::PaperModel => "model",
            Isogeny::Adjoint => "adjoint",
            Isogeny::SimplyConnected => "simply_connected",
        })
    }
}

impl FromStr for Isogeny {
    type Err = RootDatumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "model" | "paper_model" | "classical" => Ok(Isogeny::PaperModel),
            "adjoint" | "ad" => Ok(Isogeny::Adjoint),
            "sc" | "simply_connected" => Ok(Isogeny::SimplyConnected),
            _ => Err(RootDatumError::UnknownIsogeny(s.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RootDatumError {
    #[error("type {family} needs {param} >= {min}, got {got}")]
    RankTooSmall { family: Family, param: &'static str, min: usize, got: usize },
    #[error("kappa {kappa} is not allowed for {group}; allowed: {allowed:?}")]
    InvalidKappa { group: String, kappa: i64, allowed: Vec<i64> },
    #[error("unknown family `{0}` (expected A, B, C, D, 2A or 2D)")]
    UnknownFamily(String),
    #[error("unknown isogeny `{0}` (expected model, adjoint or sc)")]
    UnknownIsogeny(String),
    #[error("inconsistent root datum: {0}")]
    Inconsistent(String),
}

/// Family, rank parameter and isogeny variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupType {
    pub family: Family,
    pub rank_param: usize,
    pub isogeny: Isogeny,
}

impl GroupType {
    pub fn new(family: Family, rank_param: usize, isogeny: Isogeny) -> Result<Self, RootDatumError> {
        if rank_param < family.min_rank() {
            return Err(RootDatumError::RankTooSmall {
                family,
                param: family.param_name(),
                min: family.min_rank(),
                got: rank_param,
            });
        }
        Ok(GroupType { family, rank_param, isogeny })
    }

    pub fn model(family: Family, rank_param: usize) -> Result<Self, RootDatumError> {
        Self::new(family, rank_param, Isogeny::PaperModel)
    }

    pub fn with_isogeny(self, isogeny: Isogeny) -> Self {
        GroupType { isogeny, ..self }
    }

    /// `m`: the rank parameter, or `floor(n/2)` for 2A.
    pub fn m(&self) -> usize {
        match self.family {
            Family::TwoA => self.rank_param / 2,
            _ => self.rank_param,
        }
    }

    /// Admissible labels `kappa` of the basic lifts of the special Coxeter element.
    pub fn kappas(&self) -> Vec<i64> {
        match self.family {
            Family::A => (0..self.rank_param as i64).collect(),
            Family::B | Family::C | Family::TwoD => vec![0, 1],
            Family::D => vec![0, 1, 2],
            Family::TwoA if self.rank_param % 2 == 0 => vec![0, 1],
            Family::TwoA => vec![0],
        }
    }

    pub fn check_kappa(&self, kappa: i64) -> Result<(), RootDatumError> {
        let allowed = self.kappas();
        if allowed.contains(&kappa) {
            Ok(())
        } else {
            Err(RootDatumError::InvalidKappa { group: self.to_string(), kappa, allowed })
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}={}", self.family, self.family.param_name(), self.rank_param)?;
        if self.isogeny != Isogeny::PaperModel {
            write!(f, " ({})", self.isogeny)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Root {
    pub label: String,
    pub character: Vec<i64>,
    pub coroot: Vec<i64>,
}

/// Which quotient of the cocharacter lattice computes the fundamental group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pi1Variant {
    /// `X_*(T) / X_*(T_sc)`.
    Model,
    /// `X_*(T) / (X_*(T_sc) + X_*(Z))`.
    Adjoint,
}

/// A fundamental group with its Frobenius action and coinvariants.
#[derive(Clone, Debug)]
pub struct FundamentalGroup {
    pub group: AbelianGroup,
    pub sigma: AbelianMap,
    pub coinvariants: AbelianGroup,
}

/// Root datum with Frobenius. Roots are stored positives first; the
/// negative of positive root `i` sits at index `i + npos`.
#[derive(Clone, Debug)]
pub struct RootDatum {
    name: String,
    group_type: Option<GroupType>,
    basis_labels: Vec<String>,
    roots: Vec<Root>,
    npos: usize,
    simple: Vec<usize>,
    sigma: Mat,
    sigma_inv: Mat,
    sigma_on_roots: Vec<usize>,
    sc: IntMatrix,
    center: IntMatrix,
    coxeter_word: Vec<usize>,
    coroot_index: HashMap<Vec<i64>, usize>,
    char_index: HashMap<Vec<i64>, usize>,
}

/// Raw ingredients for [`RootDatum::from_parts`].
pub struct DatumParts {
    pub name: String,
    pub group_type: Option<GroupType>,
    pub basis_labels: Vec<String>,
    /// `(label, negative label, character, coroot)` of each positive root.
    pub positive: Vec<(String, String, Vec<i64>, Vec<i64>)>,
    /// Indices into `positive`.
    pub simple: Vec<usize>,
    pub sigma: Mat,
    pub sc: IntMatrix,
    pub center: IntMatrix,
    /// Positions in `simple` spelling the special Coxeter element.
    pub coxeter_word: Vec<usize>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn neg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(a: &[i64], k: i64) -> Vec<i64> {
    a.iter().map(|x| x * k).collect()
}

fn big_to_i64(v: &[BigInt]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("coordinate overflow")).collect()
}

impl RootDatum {
    pub fn from_parts(p: DatumParts) -> Result<Self, RootDatumError> {
        let rank = p.basis_labels.len();
        let npos = p.positive.len();
        let mut roots = Vec::with_capacity(2 * npos);
        for (label, _, ch, co) in &p.positive {
            roots.push(Root { label: label.clone(), character: ch.clone(), coroot: co.clone() });
        }
        for (_, nl, ch, co) in &p.positive {
            roots.push(Root { label: nl.clone(), character: neg(ch), coroot: neg(co) });
        }
        let mut coroot_index = HashMap::new();
        let mut char_index = HashMap::new();
        for (i, r) in roots.iter().enumerate() {
            if r.character.len() != rank || r.coroot.len() != rank {
                return Err(RootDatumError::Inconsistent(format!("root {} has wrong length", r.label)));
            }
            if dot(&r.character, &r.coroot) != 2 {
                return Err(RootDatumError::Inconsistent(format!("<a, a^v> != 2 for {}", r.label)));
            }
            if coroot_index.insert(r.coroot.clone(), i).is_some() || char_index.insert(r.character.clone(), i).is_some() {
                return Err(RootDatumError::Inconsistent(format!("duplicate root {}", r.label)));
            }
        }
        let sigma_inv = p
            .sigma
            .inverse_unimodular()
            .ok_or_else(|| RootDatumError::Inconsistent("Frobenius is not invertible over Z".into()))?;
        let mut sigma_on_roots = Vec::with_capacity(roots.len());
        for r in &roots {
            let img = p.sigma.apply(&r.coroot);
            let j = *coroot_index
                .get(&img)
                .ok_or_else(|| RootDatumError::Inconsistent(format!("Frobenius does not preserve roots at {}", r.label)))?;
            // On characters the action is chi -> chi o sigma^{-1}.
            if sigma_inv.left_apply(&r.character) != roots[j].character {
                return Err(RootDatumError::Inconsistent(format!("Frobenius inconsistent on {}", r.label)));
            }
            sigma_on_roots.push(j);
        }
        let d = RootDatum {
            name: p.name,
            group_type: p.group_type,
            basis_labels: p.basis_labels,
            roots,
            npos,
            simple: p.simple,
            sigma: p.sigma,
            sigma_inv,
            sigma_on_roots,
            sc: p.sc,
            center: p.center,
            coxeter_word: p.coxeter_word,
            coroot_index,
            char_index,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), RootDatumError> {
        for &i in &self.simple {
            if !self.is_positive(self.sigma_on_roots[i]) || !self.simple.contains(&self.sigma_on_roots[i]) {
                return Err(RootDatumError::Inconsistent("Frobenius does not permute the simple roots".into()));
            }
        }
        for i in 0..self.npos {
            if !self.is_positive(self.sigma_on_roots[i]) {
                return Err(RootDatumError::Inconsistent("Frobenius does not preserve positivity".into()));
            }
        }
        let s = self.sigma.to_int_matrix();
        for (name, lat) in [("X_*(T_sc)", &self.sc), ("X_*(Z)", &self.center)] {
            for j in 0..lat.cols() {
                let img = s.mul_vec(&lat.column(j));
                if lattice::solve_integer(lat, &img).is_none() {
                    return Err(RootDatumError::Inconsistent(format!("Frobenius does not preserve {name}")));
                }
            }
        }
        for r in &self.roots {
            let co = lattice::big(&r.coroot);
            if lattice::solve_integer(&self.sc, &co).is_none() {
                return Err(RootDatumError::Inconsistent(format!("coroot {} outside X_*(T_sc)", r.label)));
            }
        }
        for j in 0..self.center.cols() {
            let z = big_to_i64(&self.center.column(j));
            if self.roots.iter().any(|r| dot(&r.character, &z) != 0) {
                return Err(RootDatumError::Inconsistent("a root is nontrivial on the center".into()));
            }
        }
        Ok(())
    }

    /// Root datum of the given type and isogeny variant.
    pub fn build(t: GroupType) -> Result<Self, RootDatumError> {
        let t = GroupType::new(t.family, t.rank_param, t.isogeny)?;
        let model = Self::classical_model(t.family, t.rank_param)?;
        match t.isogeny {
            Isogeny::PaperModel => Ok(model),
            Isogeny::Adjoint => model.adjoint_quotient(),
            Isogeny::SimplyConnected => model.simply_connected_cover(),
        }
    }

    fn classical_model(family: Family, r: usize) -> Result<Self, RootDatumError> {
        let parts = match family {
            Family::A => model_a(r, false),
            Family::TwoA => model_a(r, true),
            Family::B => model_b(r),
            Family::C => model_cd(r, true, false),
            Family::D => model_cd(r, false, false),
            Family::TwoD => model_cd(r, false, true),
        };
        Self::from_parts(parts)
    }

    /// `X_*(T) / X_*(Z)` with basis from the Smith form of the quotient.
    pub fn adjoint_quotient(&self) -> Result<Self, RootDatumError> {
        let q = AbelianGroup::quotient(&self.center);
        if q.free_rank() != q.ngens() {
            return Err(RootDatumError::Inconsistent("center is not saturated".into()));
        }
        let p = Mat::from_int_matrix(q.to_canonical()).expect("small coordinates");
        let f = Mat::from_int_matrix(q.from_canonical()).expect("small coordinates");
        let k = q.ngens();
        let positive = (0..self.npos)
            .map(|i| {
                let r = &self.roots[i];
                let nr = &self.roots[i + self.npos];
                (r.label.clone(), nr.label.clone(), f.left_apply(&r.character), p.apply(&r.coroot))
            })
            .collect();
        let sc_img = p.to_int_matrix().mul(&self.sc);
        Self::from_parts(DatumParts {
            name: format!("{} / center", self.name),
            group_type: self.group_type.map(|t| t.with_isogeny(Isogeny::Adjoint)),
            basis_labels: (1..=k).map(|i| format!("y{i}")).collect(),
            positive,
            simple: self.simple.clone(),
            sigma: p.mul(&self.sigma).mul(&f),
            sc: lattice::span_basis(&sc_img),
            center: IntMatrix::zeros(k, 0),
            coxeter_word: self.coxeter_word.clone(),
        })
    }

    /// The sublattice `X_*(T_sc)` spanned by coroots, as a root datum.
    pub fn simply_connected_cover(&self) -> Result<Self, RootDatumError> {
        let cols: Vec<Vec<i64>> = self.roots[..self.npos].iter().map(|r| r.coroot.clone()).collect();
        let e = lattice::span_basis(&IntMatrix::from_columns(self.rank(), &cols));
        let em = Mat::from_int_matrix(&e).expect("small coordinates");
        let k = e.cols();
        let coords = |v: &[i64]| -> Result<Vec<i64>, RootDatumError> {
            lattice::solve_integer(&e, &lattice::big(v))
                .map(|y| big_to_i64(&y))
                .ok_or_else(|| RootDatumError::Inconsistent("vector outside coroot lattice".into()))
        };
        let mut positive = Vec::new();
        for i in 0..self.npos {
            let r = &self.roots[i];
            positive.push((r.label.clone(), self.roots[i + self.npos].label.clone(), em.left_apply(&r.character), coords(&r.coroot)?));
        }
        let mut sig_cols = Vec::new();
        for j in 0..k {
            sig_cols.push(coords(&self.sigma.apply(&em.column(j)))?);
        }
        Self::from_parts(DatumParts {
            name: format!("{} (simply connected)", self.name),
            group_type: self.group_type.map(|t| t.with_isogeny(Isogeny::SimplyConnected)),
            basis_labels: (1..=k).map(|i| format!("z{i}")).collect(),
            positive,
            simple: self.simple.clone(),
            sigma: Mat::from_columns(k, &sig_cols),
            sc: IntMatrix::identity(k),
            center: IntMatrix::zeros(k, 0),
            coxeter_word: self.coxeter_word.clone(),
        })
    }

    /// Weil restriction along an unramified extension of degree `d`:
    /// `d` copies of the datum with Frobenius `(v_1..v_d) -> (s v_d, v_1, .., v_(d-1))`.
    /// The special Coxeter element is `(c', 1, .., 1)`.
    pub fn restriction_of_scalars(&self, d: usize) -> Result<Self, RootDatumError> {
        assert!(d >= 1, "degree must be positive");
        let a = self.rank();
        let n = a * d;
        let embed = |v: &[i64], copy: usize| -> Vec<i64> {
            let mut out = vec![0; n];
            out[copy * a..(copy + 1) * a].copy_from_slice(v);
            out
        };
        let mut positive = Vec::new();
        for copy in 0..d {
            for i in 0..self.npos {
                let r = &self.roots[i];
                positive.push((
                    format!("{}#{}", r.label, copy + 1),
                    format!("{}#{}", self.roots[i + self.npos].label, copy + 1),
                    embed(&r.character, copy),
                    embed(&r.coroot, copy),
                ));
            }
        }
        let simple: Vec<usize> = (0..d).flat_map(|copy| self.simple.iter().map(move |&s| copy * self.npos + s)).collect();
        let mut sigma = Mat::zeros(n, n);
        for copy in 0..d {
            for j in 0..a {
                let src = copy * a + j;
                if copy + 1 < d {
                    sigma.set((copy + 1) * a + j, src, 1);
                } else {
                    for i in 0..a {
                        sigma.set(i, src, self.sigma.get(i, j));
                    }
                }
            }
        }
        let block = |m: &IntMatrix| -> IntMatrix {
            let mut out = IntMatrix::zeros(n, m.cols() * d);
            for copy in 0..d {
                for i in 0..a {
                    for j in 0..m.cols() {
                        out.set(copy * a + i, copy * m.cols() + j, m.get(i, j).clone());
                    }
                }
            }
            out
        };
        Self::from_parts(DatumParts {
            name: format!("Res_{d}({})", self.name),
            group_type: None,
            basis_labels: (0..d).flat_map(|c| self.basis_labels.iter().map(move |l| format!("{l}#{}", c + 1))).collect(),
            positive,
            simple,
            sigma,
            sc: block(&self.sc),
            center: block(&self.center),
            coxeter_word: self.coxeter_word.clone(),
        })
    }

    /// `(SL_2 x SL_2) / mu_2` (diagonal `mu_2`), split. Basis `(e1+e2)/2`, `(e1-e2)/2`
    /// where `e1`, `e2` are the coroots of the two factors.
    pub fn sl2_sl2_mod_mu2() -> Self {
        Self::from_parts(DatumParts {
            name: "(SL2 x SL2)/mu2".into(),
            group_type: None,
            basis_labels: vec!["(e1+e2)/2".into(), "(e1-e2)/2".into()],
            positive: vec![
                ("a1".into(), "-a1".into(), vec![1, 1], vec![1, 1]),
                ("a2".into(), "-a2".into(), vec![1, -1], vec![1, -1]),
            ],
            simple: vec![0, 1],
            sigma: Mat::identity(2),
            sc: IntMatrix::from_rows(&[vec![1, 1], vec![1, -1]]),
            center: IntMatrix::zeros(2, 0),
            coxeter_word: vec![0, 1],
        })
        .expect("preset is consistent")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group_type(&self) -> Option<GroupType> {
        self.group_type
    }

    pub fn rank(&self) -> usize {
        self.basis_labels.len()
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root(&self, i: usize) -> &Root {
        &self.roots[i]
    }

    pub fn num_positive(&self) -> usize {
        self.npos
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.npos
    }

    pub fn negative_of(&self, i: usize) -> usize {
        if i < self.npos {
            i + self.npos
        } else {
            i - self.npos
        }
    }

    pub fn simple_roots(&self) -> &[usize] {
        &self.simple
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &Mat {
        &self.sigma_inv
    }

    pub fn sigma_root(&self, i: usize) -> usize {
        self.sigma_on_roots[i]
    }

    pub fn sc_lattice(&self) -> &IntMatrix {
        &self.sc
    }

    pub fn center_lattice(&self) -> &IntMatrix {
        &self.center
    }

    pub fn coxeter_word(&self) -> &[usize] {
        &self.coxeter_word
    }

    pub fn root_by_label(&self, label: &str) -> Option<usize> {
        self.roots.iter().position(|r| r.label == label)
    }

    pub fn index_of_coroot(&self, v: &[i64]) -> Option<usize> {
        self.coroot_index.get(v).copied()
    }

    pub fn index_of_character(&self, v: &[i64]) -> Option<usize> {
        self.char_index.get(v).copied()
    }

    /// Index of `alpha + beta` if it is a root.
    pub fn root_sum(&self, a: usize, b: usize) -> Option<usize> {
        self.index_of_character(&add(&self.roots[a].character, &self.roots[b].character))
    }

    /// Reflection `x -> x - <alpha, x> alpha^v` on cocharacters.
    pub fn reflection(&self, i: usize) -> Mat {
        let r = &self.roots[i];
        let n = self.rank();
        let mut m = Mat::identity(n);
        for a in 0..n {
            for b in 0..n {
                m.set(a, b, m.get(a, b) - r.coroot[a] * r.character[b]);
            }
        }
        m
    }

    /// Image of root `i` under a linear map `w` of cocharacters preserving the roots.
    pub fn act_on_root(&self, w: &Mat, i: usize) -> usize {
        self.index_of_coroot(&w.apply(&self.roots[i].coroot)).expect("map does not preserve roots")
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        self.simple
            .iter()
            .map(|&i| self.simple.iter().map(|&j| dot(&self.roots[i].character, &self.roots[j].coroot)).collect())
            .collect()
    }

    /// Frobenius orbits on the simple roots, as positions in `simple_roots()`.
    pub fn sigma_orbits_on_simple(&self) -> Vec<Vec<usize>> {
        let pos = |root: usize| self.simple.iter().position(|&s| s == root).expect("simple root");
        let mut seen = vec![false; self.simple.len()];
        let mut orbits = Vec::new();
        for start in 0..self.simple.len() {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![];
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                orbit.push(cur);
                cur = pos(self.sigma_on_roots[self.simple[cur]]);
            }
            orbits.push(orbit);
        }
        orbits
    }

    /// Order of the Frobenius on the cocharacter lattice.
    pub fn sigma_order(&self) -> usize {
        self.sigma.order(1 << 12).expect("Frobenius has finite order")
    }

    /// Weights of the standard representation of the classical model,
    /// listed in the order `e_1 .. e_n` (resp. `e_1 .. e_m, [e_(m+1),] e_-m .. e_-1`).
    pub fn standard_weights(&self) -> Option<Vec<Vec<i64>>> {
        let t = self.group_type?;
        if t.isogeny != Isogeny::PaperModel {
            return None;
        }
        let a = self.rank();
        Some(match t.family {
            Family::A | Family::TwoA => (0..a).map(|i| unit(a, i)).collect(),
            Family::B => {
                let m = t.rank_param;
                let mut w: Vec<Vec<i64>> = (0..m).map(|i| unit(a, i)).collect();
                w.push(vec![0; a]);
                w.extend((0..m).rev().map(|i| neg(&unit(a, i))));
                w
            }
            Family::C | Family::D | Family::TwoD => {
                let m = t.rank_param;
                let mut w: Vec<Vec<i64>> = (1..=m).map(|i| add(&unit(a, 0), &unit(a, i))).collect();
                w.extend((1..=m).rev().map(|i| neg(&unit(a, i))));
                w
            }
        })
    }

    /// Fundamental group `X_*(T)/X_*(T_sc)` (or its adjoint quotient) with
    /// the induced Frobenius and its coinvariants.
    pub fn fundamental_group(&self, variant: Pi1Variant) -> FundamentalGroup {
        let mut rel = self.sc.clone();
        if variant == Pi1Variant::Adjoint {
            rel = rel.hcat(&self.center);
        }
        let group = AbelianGroup::quotient(&rel);
        let s = self.sigma.to_int_matrix();
        let sigma = AbelianMap::induced(group.clone(), group.clone(), &s).expect("Frobenius preserves X_*(T_sc)");
        let coinvariants = AbelianGroup::quotient(&rel.hcat(&s.sub(&IntMatrix::identity(self.rank()))));
        FundamentalGroup { group, sigma, coinvariants }
    }

    /// Frobenius restricted to `X_*(Z)`, in the basis given by the center columns.
    pub fn sigma_on_center(&self) -> IntMatrix {
        let z = &self.center;
        let s = self.sigma.to_int_matrix();
        let mut out = IntMatrix::zeros(z.cols(), z.cols());
        for j in 0..z.cols() {
            let y = lattice::solve_integer(z, &s.mul_vec(&z.column(j))).expect("Frobenius preserves the center");
            for (i, v) in y.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        out
    }

    /// The map `X_*(Z)_<sigma> -> pi_1(G)_<sigma>` induced by inclusion.
    pub fn center_map_on_coinvariants(&self) -> (AbelianMap, MapKind) {
        let source = AbelianGroup::coinvariants(&self.sigma_on_center());
        let target = self.fundamental_group(Pi1Variant::Model).coinvariants;
        let map = AbelianMap::induced(source, target, &self.center).expect("inclusion is well defined");
        let kind = map.classify();
        (map, kind)
    }
}

fn labels(prefix: &str, range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn model_a(n: usize, twisted: bool) -> DatumParts {
    let mut positive = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = sub(&unit(n, i), &unit(n, j));
            positive.push((format!("{}-{}", i + 1, j + 1), format!("{}-{}", j + 1, i + 1), v.clone(), v));
        }
    }
    let simple = (0..n - 1).map(|i| positive.iter().position(|p| p.0 == format!("{}-{}", i + 1, i + 2)).unwrap()).collect();
    let sigma = if twisted {
        let cols: Vec<Vec<i64>> = (0..n).map(|i| neg(&unit(n, n - 1 - i))).collect();
        Mat::from_columns(n, &cols)
    } else {
        Mat::identity(n)
    };
    let sc_cols: Vec<Vec<i64>> = (0..n - 1).map(|i| sub(&unit(n, i), &unit(n, i + 1))).collect();
    let word_len = if twisted { n / 2 } else { n - 1 };
    DatumParts {
        name: if twisted { format!("U_{n} (2A)") } else { format!("GL_{n}") },
        group_type: Some(GroupType { family: if twisted { Family::TwoA } else { Family::A }, rank_param: n, isogeny: Isogeny::PaperModel }),
        basis_labels: labels("b", 1..=n),
        positive,
        simple,
        sigma,
        sc: IntMatrix::from_columns(n, &sc_cols),
        center: IntMatrix::from_columns(n, &[vec![1; n]]),
        coxeter_word: (0..word_len).collect(),
    }
}

fn model_b(m: usize) -> DatumParts {
    let mut positive = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let v = sub(&unit(m, i), &unit(m, j));
            positive.push((format!("{}-{}", i + 1, j + 1), format!("{}-{}", j + 1, i + 1), v.clone(), v));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let v = add(&unit(m, i), &unit(m, j));
            positive.push((format!("{}+{}", i + 1, j + 1), format!("-{}-{}", i + 1, j + 1), v.clone(), v));
        }
    }
    for i in 0..m {
        positive.push((format!("{}", i + 1), format!("-{}", i + 1), unit(m, i), scale(&unit(m, i), 2)));
    }
    let mut simple: Vec<usize> =
        (0..m - 1).map(|i| positive.iter().position(|p| p.0 == format!("{}-{}", i + 1, i + 2)).unwrap()).collect();
    simple.push(positive.iter().position(|p| p.0 == format!("{m}")).unwrap());
    let coroots: Vec<Vec<i64>> = positive.iter().map(|p| p.3.clone()).collect();
    DatumParts {
        name: format!("SO_{}", 2 * m + 1),
        group_type: Some(GroupType { family: Family::B, rank_param: m, isogeny: Isogeny::PaperModel }),
        basis_labels: labels("e", 1..=m),
        positive,
        simple,
        sigma: Mat::identity(m),
        sc: lattice::span_basis(&IntMatrix::from_columns(m, &coroots)),
        center: IntMatrix::zeros(m, 0),
        coxeter_word: (0..m).collect(),
    }
}

/// Types C (`long`), D, and 2D (`twisted`) on the basis `e0..em`.
fn model_cd(m: usize, long: bool, twisted: bool) -> DatumParts {
    let a = m + 1;
    let e = |i: usize| unit(a, i);
    let mut positive = Vec::new();
    for i in 1..=m {
        for j in i + 1..=m {
            let v = sub(&e(i), &e(j));
            positive.push((format!("{i}-{j}"), format!("{j}-{i}"), v.clone(), v));
        }
    }
    for i in 1..=m {
        for j in i + 1..=m {
            let ch = add(&e(0), &add(&e(i), &e(j)));
            positive.push((format!("{i}+{j}"), format!("-{i}-{j}"), ch, add(&e(i), &e(j))));
        }
    }
    if long {
        for i in 1..=m {
            positive.push((format!("2*{i}"), format!("-2*{i}"), add(&e(0), &scale(&e(i), 2)), e(i)));
        }
    }
    let find = |l: String| positive.iter().position(|p| p.0 == l).unwrap();
    let mut simple: Vec<usize> = (1..m).map(|i| find(format!("{i}-{}", i + 1))).collect();
    simple.push(if long { find(format!("2*{m}")) } else { find(format!("{}+{m}", m - 1)) });
    let sigma = if twisted {
        let mut cols: Vec<Vec<i64>> = (0..a).map(e).collect();
        cols[0] = sub(&e(0), &e(m));
        cols[m] = neg(&e(m));
        Mat::from_columns(a, &cols)
    } else {
        Mat::identity(a)
    };
    let coroots: Vec<Vec<i64>> = positive.iter().map(|p| p.3.clone()).collect();
    let mut z = vec![-1; a];
    z[0] = 2;
    let (family, name, word_len) = match (long, twisted) {
        (true, _) => (Family::C, format!("GSp_{}", 2 * m), m),
        (false, false) => (Family::D, format!("GSO_{}", 2 * m), m),
        (false, true) => (Family::TwoD, format!("GSO_{} (2D)", 2 * m), m - 1),
    };
    DatumParts {
        name,
        group_type: Some(GroupType { family, rank_param: m, isogeny: Isogeny::PaperModel }),
        basis_labels: labels("e", 0..=m),
        positive,
        simple,
        sigma,
        sc: lattice::span_basis(&IntMatrix::from_columns(a, &coroots)),
        center: IntMatrix::from_columns(a, &[z]),
        coxeter_word: (0..word_len).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn model(f: Family, r: usize) -> RootDatum {
        RootDatum::build(GroupType::model(f, r).unwrap()).unwrap()
    }

    /// Cartan matrix of the Dynkin type, for the simple-root order
    /// `(1-2), (2-3), .., last`.
    fn expected_cartan(f: Family, r: usize) -> Vec<Vec<i64>> {
        let l = match f {
            Family::A | Family::TwoA => r - 1,
            _ => r,
        };
        let mut c = vec![vec![0; l]; l];
        for i in 0..l {
            c[i][i] = 2;
            if i + 1 < l {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        match f {
            Family::B => c[l - 2][l - 1] = -2,
            Family::C => c[l - 1][l - 2] = -2,
            Family::D | Family::TwoD => {
                c[l - 2][l - 1] = 0;
                c[l - 1][l - 2] = 0;
                c[l - 3][l - 1] = -1;
                c[l - 1][l - 3] = -1;
            }
            _ => {}
        }
        c
    }

    #[test]
    fn type_c_rank_two() {
        let d = model(Family::C, 2);
        assert_eq!(d.rank(), 3);
        assert_eq!(d.roots().len(), 8);
        let sc = d.sc_lattice();
        assert_eq!(sc.cols(), 2);
        for i in 1..=2 {
            assert!(lattice::solve_integer(sc, &lattice::big(&unit(3, i))).is_some());
        }
        assert!(lattice::solve_integer(sc, &lattice::big(&unit(3, 0))).is_none());
    }

    #[test]
    fn type_2d_frobenius() {
        let d = model(Family::TwoD, 4);
        let s = d.sigma();
        for i in 1..4 {
            assert_eq!(s.apply(&unit(5, i)), unit(5, i));
        }
        assert_eq!(s.apply(&unit(5, 4)), neg(&unit(5, 4)));
        assert_eq!(s.apply(&unit(5, 0)), sub(&unit(5, 0), &unit(5, 4)));
    }

    #[test]
    fn adjoint_a2_has_rank_one() {
        let d = RootDatum::build(GroupType::new(Family::A, 2, Isogeny::Adjoint).unwrap()).unwrap();
        assert_eq!(d.rank(), 1);
    }

    #[test]
    fn rank_minimum_enforced() {
        assert!(matches!(GroupType::model(Family::D, 3), Err(RootDatumError::RankTooSmall { .. })));
        assert!(GroupType::model(Family::TwoA, 2).is_err());
        assert!(GroupType::model(Family::A, 2).is_ok());
    }

    #[test]
    fn positive_root_counts_and_cartan() {
        for f in Family::ALL {
            for r in f.min_rank()..=8 {
                for iso in Isogeny::ALL {
                    let d = RootDatum::build(GroupType::new(f, r, iso).unwrap()).unwrap();
                    let expect = match f {
                        Family::A | Family::TwoA => r * (r - 1) / 2,
                        Family::B | Family::C => r * r,
                        Family::D | Family::TwoD => r * (r - 1),
                    };
                    assert_eq!(d.num_positive(), expect, "{f} {r} {iso}");
                    assert_eq!(d.cartan_matrix(), expected_cartan(f, r), "{f} {r} {iso}");
                    let s2 = d.sigma().mul(d.sigma());
                    if f.is_split() {
                        assert!(d.sigma().is_identity());
                    } else {
                        assert!(s2.is_identity() && !d.sigma().is_identity());
                    }
                }
            }
        }
    }

    #[test]
    fn coroot_lattice_equals_sc_for_models() {
        for f in Family::ALL {
            let d = model(f, f.min_rank() + 1);
            let cols: Vec<Vec<i64>> = d.roots().iter().map(|r| r.coroot.clone()).collect();
            let span = lattice::span_basis(&IntMatrix::from_columns(d.rank(), &cols));
            let q1 = AbelianGroup::quotient(&span);
            let q2 = AbelianGroup::quotient(d.sc_lattice());
            assert_eq!(q1.invariants(), q2.invariants());
        }
    }

    #[test]
    fn fundamental_groups() {
        let adj = |f, r| model(f, r).fundamental_group(Pi1Variant::Adjoint);
        assert_eq!(adj(Family::D, 5).group.describe(), "Z/4");
        assert_eq!(adj(Family::D, 4).group.describe(), "Z/2 x Z/2");
        assert!(adj(Family::TwoA, 5).coinvariants.is_trivial());
        assert_eq!(adj(Family::TwoA, 6).coinvariants.describe(), "Z/2");
        assert_eq!(model(Family::B, 3).fundamental_group(Pi1Variant::Model).group.describe(), "Z/2");
        assert_eq!(model(Family::A, 4).fundamental_group(Pi1Variant::Model).group.describe(), "Z");
        assert_eq!(model(Family::D, 4).fundamental_group(Pi1Variant::Model).group.describe(), "Z/2 x Z");
    }

    #[test]
    fn center_maps() {
        let (_, k) = model(Family::TwoA, 4).center_map_on_coinvariants();
        assert_eq!(k, MapKind::Zero);
        let (m, k) = model(Family::TwoD, 5).center_map_on_coinvariants();
        assert_eq!(k, MapKind::Injective);
        assert_eq!(m.source.describe(), "Z");
        assert_eq!(m.target.describe(), "Z");
        assert_eq!(m.matrix.get(0, 0).abs(), BigInt::from(2));
        let (_, k) = model(Family::C, 2).center_map_on_coinvariants();
        assert_eq!(k, MapKind::Injective);
    }

    #[test]
    fn twisted_a_simple_root_permutation() {
        let d = model(Family::TwoA, 5);
        for i in 1..5 {
            let a = d.root_by_label(&format!("{i}-{}", i + 1)).unwrap();
            let b = d.root_by_label(&format!("{}-{}", 5 - i, 6 - i)).unwrap();
            assert_eq!(d.sigma_root(a), b);
        }
    }

    #[test]
    fn restriction_of_scalars_shape() {
        let base = model(Family::A, 3);
        let res = base.restriction_of_scalars(2).unwrap();
        assert_eq!(res.rank(), 6);
        assert_eq!(res.sigma_order(), 2);
        assert_eq!(res.sigma_orbits_on_simple().len(), 2);
    }

    #[test]
    fn sl2_pair_preset() {
        let d = RootDatum::sl2_sl2_mod_mu2();
        assert_eq!(d.fundamental_group(Pi1Variant::Model).group.describe(), "Z/2");
        assert_eq!(d.cartan_matrix(), vec![vec![2, 0], vec![0, 2]]);
    }
}
