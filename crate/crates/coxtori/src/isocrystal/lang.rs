//! Level-by-level solution of `g^{-1} sigma_b(g) = y` in truncations
//! `G(F[[w]]/w^L)` for unipotent upper-triangular groups and diagonal tori.
//!
//! All residue-field computations take place in a fixed ambient field
//! `F_{q^D}` (`D` = the degree bound). An equation unsolvable there needs an
//! extension of degree beyond the bound and is reported with its polynomial.

use std::collections::BTreeMap;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gf::{solve_mod_p, Elt, FieldError, Gf};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LangError {
    #[error("solving needs a residue extension beyond degree {bound}: {polynomial}")]
    DegreeBound { bound: usize, polynomial: String },
    #[error("truncation level {levels} exceeds the configured maximum {max}")]
    Levels { levels: usize, max: usize },
    #[error("twist {0:?} does not preserve the group over the integers")]
    Twist(Vec<i64>),
    #[error("input is not in the group: {0}")]
    NotInGroup(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixGroupSpec {
    /// Upper-triangular unipotent `n x n` matrices.
    Unipotent(usize),
    /// Diagonal `n x n` matrices.
    Torus(usize),
}

impl MatrixGroupSpec {
    pub fn n(self) -> usize {
        match self {
            MatrixGroupSpec::Unipotent(n) | MatrixGroupSpec::Torus(n) => n,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LangConfig {
    pub q: u64,
    pub levels: usize,
    /// Largest residue degree over `F_q` that may be used.
    pub degree_bound: usize,
    pub max_levels: usize,
}

impl Default for LangConfig {
    fn default() -> Self {
        LangConfig { q: 2, levels: 4, degree_bound: 64, max_levels: 16 }
    }
}

/// `n x n` matrix over `F[[w]]/w^levels`; `entries[i][j][k]` is the `w^k` coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncMatrix {
    pub levels: usize,
    pub entries: Vec<Vec<Vec<Elt>>>,
}

impl TruncMatrix {
    pub fn identity(n: usize, levels: usize) -> Self {
        let mut entries = vec![vec![vec![0; levels]; n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i][0] = 1;
        }
        TruncMatrix { levels, entries }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n(), self.levels)
    }

    fn mul(&self, f: &Gf, o: &TruncMatrix) -> TruncMatrix {
        let n = self.n();
        let l = self.levels;
        let mut out = vec![vec![vec![0; l]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s = series_mul(f, &self.entries[i][k], &o.entries[k][j], l);
                    for (a, b) in out[i][j].iter_mut().zip(s) {
                        *a = f.add(*a, b);
                    }
                }
            }
        }
        TruncMatrix { levels: l, entries: out }
    }

    /// Gauss-Jordan inverse over `F[[w]]/w^L`; `None` unless invertible.
    fn inverse(&self, f: &Gf) -> Option<TruncMatrix> {
        let n = self.n();
        let l = self.levels;
        let mut a = self.entries.clone();
        let mut inv = TruncMatrix::identity(n, l).entries;
        for col in 0..n {
            let p = (col..n).find(|&i| a[i][col][0] != 0)?;
            a.swap(col, p);
            inv.swap(col, p);
            let pinv = series_inv(f, &a[col][col])?;
            a[col] = a[col].iter().map(|x| series_mul(f, x, &pinv, l)).collect();
            inv[col] = inv[col].iter().map(|x| series_mul(f, x, &pinv, l)).collect();
            for i in 0..n {
                if i == col || a[i][col].iter().all(|&c| c == 0) {
                    continue;
                }
                let factor = a[i][col].clone();
                for j in 0..n {
                    let t = series_mul(f, &factor, &a[col][j], l);
                    a[i][j] = series_sub(f, &a[i][j], &t);
                    let t = series_mul(f, &factor, &inv[col][j], l);
                    inv[i][j] = series_sub(f, &inv[i][j], &t);
                }
            }
        }
        Some(TruncMatrix { levels: l, entries: inv })
    }
}

fn series_mul(f: &Gf, a: &[Elt], b: &[Elt], l: usize) -> Vec<Elt> {
    let mut out = vec![0; l];
    for (i, &x) in a.iter().enumerate().take(l) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(l - i) {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

fn series_sub(f: &Gf, a: &[Elt], b: &[Elt]) -> Vec<Elt> {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

fn series_inv(f: &Gf, a: &[Elt]) -> Option<Vec<Elt>> {
    let c0 = f.inv(a[0])?;
    let mut out = vec![0; a.len()];
    out[0] = c0;
    for k in 1..a.len() {
        let s = (1..=k).fold(0, |s, j| f.add(s, f.mul(a[j], out[k - j])));
        out[k] = f.neg(f.mul(c0, s));
    }
    Some(out)
}

/// Render an element as a polynomial in the generator `z` of the ambient field.
fn fmt_elt(f: &Gf, a: Elt) -> String {
    let terms: Vec<String> = f
        .digits(a)
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| match (i, c) {
            (0, c) => c.to_string(),
            (1, 1) => "z".into(),
            (1, c) => format!("{c}z"),
            (i, 1) => format!("z^{i}"),
            (i, c) => format!("{c}z^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[derive(Clone, Debug)]
pub struct LangSolution {
    pub g: TruncMatrix,
    /// Degree over `F_q` of the field generated by the entries of `g`.
    pub tower_degree: usize,
    pub residual_vanishes: bool,
}

/// The ambient field with cached data for repeated solves.
pub struct LangTower {
    cfg: LangConfig,
    field: Gf,
    /// `q = p^r`.
    r: usize,
    /// `F_p`-basis of `F_q` inside the ambient field.
    fq_basis: Vec<Elt>,
    /// Matrix of `t -> t^q - t`.
    artin_schreier: Vec<Vec<u64>>,
}

impl LangTower {
    pub fn new(cfg: LangConfig) -> Result<Self, LangError> {
        if cfg.levels > cfg.max_levels {
            return Err(LangError::Levels { levels: cfg.levels, max: cfg.max_levels });
        }
        let (field, r) = Gf::for_q(cfg.q, cfg.degree_bound)?;
        let fq_basis = field.subfield_basis(r);
        let artin_schreier = field.linear_matrix(|t| field.sub(field.frob_pow(t, r), t));
        Ok(LangTower { cfg, field, r, fq_basis, artin_schreier })
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    fn sigma(&self, a: Elt) -> Elt {
        self.field.frob_pow(a, self.r)
    }

    fn sigma_inv(&self, a: Elt) -> Elt {
        self.field.frob_pow(a, self.r * (self.cfg.degree_bound - 1))
    }

    fn random_fq<R: Rng>(&self, rng: &mut R) -> Elt {
        let f = &self.field;
        self.fq_basis.iter().fold(0, |acc, &b| f.add(acc, f.mul(b, rng.gen_range(0..f.p()))))
    }

    /// Degree over `F_q` of the smallest subfield containing `a`.
    fn degree_over_fq(&self, a: Elt) -> usize {
        let d = self.cfg.degree_bound;
        (1..=d).filter(|e| d % e == 0).find(|&e| self.field.frob_pow(a, self.r * e) == a).unwrap_or(d)
    }

    /// A root of `t^q - t - c`.
    fn artin_schreier_root(&self, c: Elt) -> Result<Elt, LangError> {
        let f = &self.field;
        solve_mod_p(&self.artin_schreier, &f.digits(c), f.p()).map(|x| f.from_digits(&x)).ok_or_else(|| {
            LangError::DegreeBound { bound: self.cfg.degree_bound, polynomial: format!("t^{} - t - ({})", self.cfg.q, fmt_elt(f, c)) }
        })
    }

    /// A root of `t^q - u t - c`.
    fn twisted_root(&self, u: Elt, c: Elt) -> Result<Elt, LangError> {
        let f = &self.field;
        let m = f.linear_matrix(|t| f.sub(self.sigma(t), f.mul(u, t)));
        solve_mod_p(&m, &f.digits(c), f.p()).map(|x| f.from_digits(&x)).ok_or_else(|| LangError::DegreeBound {
            bound: self.cfg.degree_bound,
            polynomial: format!("t^{} - ({}) t - ({})", self.cfg.q, fmt_elt(f, u), fmt_elt(f, c)),
        })
    }

    /// A nonzero root of `t^(q-1) = c`, searched in subfields `F_{q^e}` of at most `2^16` elements.
    fn kummer_root(&self, c: Elt) -> Result<Elt, LangError> {
        let f = &self.field;
        if self.cfg.q == 2 {
            return Ok(c);
        }
        let d = self.cfg.degree_bound;
        for e in (1..=d).filter(|e| d % e == 0) {
            let size = (self.cfg.q as u128).pow(e as u32);
            if size > 1 << 16 {
                break;
            }
            let basis = f.subfield_basis(self.r * e);
            let p = f.p();
            for code in 1..size as u64 {
                let mut x = code;
                let t = basis.iter().fold(0, |acc, &b| {
                    let digit = x % p;
                    x /= p;
                    f.add(acc, f.mul(b, digit))
                });
                if f.pow(t, (self.cfg.q - 1) as u128) == c {
                    return Ok(t);
                }
            }
        }
        Err(LangError::DegreeBound { bound: d, polynomial: format!("t^{} - ({})", self.cfg.q - 1, fmt_elt(f, c)) })
    }

    pub fn random_element<R: Rng>(&self, group: MatrixGroupSpec, rng: &mut R) -> TruncMatrix {
        let n = group.n();
        let l = self.cfg.levels;
        let mut y = TruncMatrix::identity(n, l);
        match group {
            MatrixGroupSpec::Unipotent(_) => {
                for i in 0..n {
                    for j in i + 1..n {
                        y.entries[i][j] = (0..l).map(|_| self.random_fq(rng)).collect();
                    }
                }
            }
            MatrixGroupSpec::Torus(_) => {
                for i in 0..n {
                    let mut s: Vec<Elt> = (0..l).map(|_| self.random_fq(rng)).collect();
                    while s[0] == 0 {
                        s[0] = self.random_fq(rng);
                    }
                    y.entries[i][i] = s;
                }
            }
        }
        y
    }

    /// `b sigma(g) b^{-1}` for `b = diag(w^b_i)`.
    fn sigma_b(&self, g: &TruncMatrix, b: &[i64]) -> Result<TruncMatrix, LangError> {
        let l = g.levels;
        let mut out = g.clone();
        for (i, row) in out.entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let s = b[i] - b[j];
                let src: Vec<Elt> = g.entries[i][j].iter().map(|&x| self.sigma(x)).collect();
                if s < 0 && src.iter().any(|&x| x != 0) {
                    return Err(LangError::Twist(b.to_vec()));
                }
                *e = (0..l).map(|k| if (k as i64) < s { 0 } else { src[k - s.max(0) as usize] }).collect();
            }
        }
        Ok(out)
    }

    fn check_input(&self, group: MatrixGroupSpec, b: &[i64], y: &TruncMatrix) -> Result<(), LangError> {
        let n = group.n();
        if y.n() != n || b.len() != n || y.levels != self.cfg.levels {
            return Err(LangError::NotInGroup(format!("expected {n}x{n} at level {}", self.cfg.levels)));
        }
        for i in 0..n {
            for j in 0..n {
                let e = &y.entries[i][j];
                let ok = match group {
                    MatrixGroupSpec::Unipotent(_) if i == j => e[0] == 1 && e[1..].iter().all(|&c| c == 0),
                    MatrixGroupSpec::Unipotent(_) => j > i || e.iter().all(|&c| c == 0),
                    MatrixGroupSpec::Torus(_) if i == j => e[0] != 0,
                    MatrixGroupSpec::Torus(_) => e.iter().all(|&c| c == 0),
                };
                if !ok {
                    return Err(LangError::NotInGroup(format!("entry ({i},{j})")));
                }
            }
        }
        if matches!(group, MatrixGroupSpec::Unipotent(_)) && b.windows(2).any(|w| w[0] < w[1]) {
            return Err(LangError::Twist(b.to_vec()));
        }
        Ok(())
    }

    /// Solve `g^{-1} sigma_b(g) = y` with `b = diag(w^b_i)`.
    pub fn solve(&self, group: MatrixGroupSpec, b: &[i64], y: &TruncMatrix) -> Result<LangSolution, LangError> {
        self.check_input(group, b, y)?;
        let f = &self.field;
        let n = group.n();
        let l = self.cfg.levels;
        let mut g = TruncMatrix::identity(n, l);
        match group {
            MatrixGroupSpec::Unipotent(_) => {
                // b sigma(g) b^{-1} = g y, entry (i,j): w^s sigma(x) = x + R.
                for h in 1..n {
                    for i in 0..n - h {
                        let j = i + h;
                        let mut rhs = y.entries[i][j].clone();
                        for k in i + 1..j {
                            let t = series_mul(f, &g.entries[i][k], &y.entries[k][j], l);
                            rhs = rhs.iter().zip(&t).map(|(&a, &c)| f.add(a, c)).collect();
                        }
                        let s = (b[i] - b[j]) as usize;
                        let mut x = vec![0; l];
                        for k in 0..l {
                            x[k] = if s == 0 {
                                self.artin_schreier_root(rhs[k])?
                            } else {
                                let prev = if k >= s { self.sigma(x[k - s]) } else { 0 };
                                f.sub(prev, rhs[k])
                            };
                        }
                        g.entries[i][j] = x;
                    }
                }
            }
            MatrixGroupSpec::Torus(_) => {
                // sigma(t) = t y, level k: t_k^q - y_0 t_k = sum_{a<k} t_a y_{k-a}.
                for i in 0..n {
                    let yy = &y.entries[i][i];
                    let mut t = vec![0; l];
                    t[0] = self.kummer_root(yy[0])?;
                    for k in 1..l {
                        let rhs = (0..k).fold(0, |s, a| f.add(s, f.mul(t[a], yy[k - a])));
                        t[k] = self.twisted_root(yy[0], rhs)?;
                    }
                    g.entries[i][i] = t;
                }
            }
        }
        let residual_vanishes = match g.inverse(f) {
            Some(gi) => gi.mul(f, &self.sigma_b(&g, b)?) == *y,
            None => false,
        };
        let tower_degree = g
            .entries
            .iter()
            .flatten()
            .flatten()
            .fold(1usize, |acc, &c| acc.lcm(&self.degree_over_fq(c)));
        Ok(LangSolution { g, tower_degree, residual_vanishes })
    }

    /// Inverse Frobenius, exposed for tests of the ambient field.
    pub fn frobenius_inverse(&self, a: Elt) -> Elt {
        self.sigma_inv(a)
    }
}

/// One-shot solve of `g^{-1} sigma_b(g) = y`.
pub fn lang_lift(group: MatrixGroupSpec, b: &[i64], y: &TruncMatrix, cfg: &LangConfig) -> Result<LangSolution, LangError> {
    LangTower::new(cfg.clone())?.solve(group, b, y)
}

#[derive(Clone, Debug, Serialize)]
pub struct LangReport {
    pub group: MatrixGroupSpec,
    pub b: Vec<i64>,
    pub config: LangConfig,
    pub trials: u64,
    pub solved: u64,
    pub residual_vanishes: u64,
    pub max_tower_degree: usize,
    pub tower_degrees: BTreeMap<usize, u64>,
    pub failures: Vec<String>,
}

impl LangReport {
    pub fn all_pass(&self) -> bool {
        self.solved == self.trials && self.residual_vanishes == self.trials
    }
}

/// Solve `trials` random instances; trial `t` draws `y` from stream `t` of `seed`.
pub fn lang_lift_experiment(group: MatrixGroupSpec, b: &[i64], cfg: &LangConfig, trials: u64, seed: u64) -> Result<LangReport, LangError> {
    let tower = LangTower::new(cfg.clone())?;
    let mut rep = LangReport {
        group,
        b: b.to_vec(),
        config: cfg.clone(),
        trials,
        solved: 0,
        residual_vanishes: 0,
        max_tower_degree: 0,
        tower_degrees: BTreeMap::new(),
        failures: Vec::new(),
    };
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let y = tower.random_element(group, &mut rng);
        match tower.solve(group, b, &y) {
            Ok(sol) => {
                rep.solved += 1;
                rep.residual_vanishes += u64::from(sol.residual_vanishes);
                rep.max_tower_degree = rep.max_tower_degree.max(sol.tower_degree);
                *rep.tower_degrees.entry(sol.tower_degree).or_default() += 1;
            }
            Err(e) => rep.failures.push(format!("trial {t}: {e}")),
        }
    }
    Ok(rep)
}

/// A random unipotent element, for callers that supply `y` themselves.
pub fn random_unipotent(cfg: &LangConfig, n: usize, seed: u64) -> Result<TruncMatrix, LangError> {
    let tower = LangTower::new(cfg.clone())?;
    Ok(tower.random_element(MatrixGroupSpec::Unipotent(n), &mut ChaCha8Rng::seed_from_u64(seed)))
}
