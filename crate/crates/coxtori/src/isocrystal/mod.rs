//! Isocrystals over `F_{q^E}((w))`: cyclic relations, Newton polygons, the
//! slope bound on cyclic-vector coefficients, and its tropical consequences
//! for the cross-section coordinates.

mod lang;
mod series;
mod tropical;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gf::{FieldError, Gf};
use crate::linalg::{q, qi, Q};

pub use lang::{
    lang_lift, lang_lift_experiment, random_unipotent, LangConfig, LangError, LangReport, LangSolution, LangTower, MatrixGroupSpec,
    TruncMatrix,
};
pub use series::{SeriesRing, ValuedElement, EXACT};
pub use tropical::{coefficient_valuations, relation_shape, tropical_bound_derivation, RelationShape, RelationTerm, TropicalValue};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IsocrystalError {
    #[error("all valuations are infinite")]
    AllInfinite,
    #[error("vector is not cyclic at working precision (column {column})")]
    NotCyclic { column: usize },
    #[error("matrix is not invertible at working precision")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("slope {k}/{n} is not in lowest terms with 0 <= k < n (or n = 1)")]
    Slope { n: usize, k: i64 },
    #[error("unsupported group type for the tropical route: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Datum(#[from] crate::root_datum::RootDatumError),
}

/// A `sigma^e`-semilinear endomorphism `v -> M sigma^e(v)` of `L^n`.
#[derive(Clone, Debug)]
pub struct PhiMatrix {
    pub entries: Vec<Vec<ValuedElement>>,
    pub frobenius_power: usize,
}

impl PhiMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, r: &SeriesRing, v: &[ValuedElement]) -> Vec<ValuedElement> {
        let sv: Vec<_> = v.iter().map(|x| r.frobenius(x, self.frobenius_power)).collect();
        mat_vec(r, &self.entries, &sv)
    }

    /// The basis change `g^{-1} M sigma^e(g)`.
    pub fn conjugate(&self, r: &SeriesRing, g: &[Vec<ValuedElement>]) -> Result<PhiMatrix, IsocrystalError> {
        let sg: Vec<Vec<_>> = g.iter().map(|row| row.iter().map(|x| r.frobenius(x, self.frobenius_power)).collect()).collect();
        let entries = solve_multi(r, g.to_vec(), mat_mul(r, &self.entries, &sg)).map_err(|_| IsocrystalError::Singular)?;
        Ok(PhiMatrix { entries, frobenius_power: self.frobenius_power })
    }
}

/// The isoclinic companion of slope `k/n`: `e_i -> e_{i+1}`, `e_n -> w^k e_1`.
pub fn companion(n: usize, k: i64) -> PhiMatrix {
    let mut entries = vec![vec![ValuedElement::zero(); n]; n];
    for i in 0..n.saturating_sub(1) {
        entries[i + 1][i] = ValuedElement::one();
    }
    entries[0][n - 1] = ValuedElement::monomial(1, k);
    PhiMatrix { entries, frobenius_power: 1 }
}

pub fn mat_vec(r: &SeriesRing, m: &[Vec<ValuedElement>], v: &[ValuedElement]) -> Vec<ValuedElement> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(ValuedElement::zero(), |acc, (a, b)| r.add(&acc, &r.mul(a, b))))
        .collect()
}

pub fn mat_mul(r: &SeriesRing, a: &[Vec<ValuedElement>], b: &[Vec<ValuedElement>]) -> Vec<Vec<ValuedElement>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(ValuedElement::zero(), |acc, (x, brow)| r.add(&acc, &r.mul(x, &brow[j]))))
                .collect()
        })
        .collect()
}

/// Solve `A X = B` by elimination with minimal-valuation pivots.
fn solve_multi(
    r: &SeriesRing,
    mut a: Vec<Vec<ValuedElement>>,
    mut b: Vec<Vec<ValuedElement>>,
) -> Result<Vec<Vec<ValuedElement>>, IsocrystalError> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .filter_map(|i| a[i][col].valuation().map(|v| (v, i)))
            .min()
            .map(|(_, i)| i)
            .ok_or(IsocrystalError::NotCyclic { column: col })?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = r.inv(&a[col][col]).ok_or(IsocrystalError::NotCyclic { column: col })?;
        for i in col + 1..n {
            if a[i][col].is_exact_zero() {
                continue;
            }
            let f = r.mul(&a[i][col], &inv);
            for j in col..n {
                let t = r.mul(&f, &a[col][j]);
                a[i][j] = r.sub(&a[i][j], &t);
            }
            for j in 0..b[i].len() {
                let t = r.mul(&f, &b[col][j]);
                b[i][j] = r.sub(&b[i][j], &t);
            }
        }
    }
    let k = b.first().map_or(0, Vec::len);
    let mut x = vec![vec![ValuedElement::zero(); k]; n];
    for i in (0..n).rev() {
        let inv = r.inv(&a[i][i]).ok_or(IsocrystalError::NotCyclic { column: i })?;
        for j in 0..k {
            let mut s = b[i][j].clone();
            for l in i + 1..n {
                s = r.sub(&s, &r.mul(&a[i][l], &x[l][j]));
            }
            x[i][j] = r.mul(&s, &inv);
        }
    }
    Ok(x)
}

pub fn invert(r: &SeriesRing, g: &[Vec<ValuedElement>]) -> Result<Vec<Vec<ValuedElement>>, IsocrystalError> {
    let n = g.len();
    let id = (0..n).map(|i| (0..n).map(|j| if i == j { ValuedElement::one() } else { ValuedElement::zero() }).collect()).collect();
    solve_multi(r, g.to_vec(), id).map_err(|_| IsocrystalError::Singular)
}

/// Coefficients `A_0, .., A_{n-1}` with `phi^n(v) = sum A_i phi^i(v)`.
pub fn cyclic_relation(r: &SeriesRing, m: &PhiMatrix, v: &[ValuedElement]) -> Result<Vec<ValuedElement>, IsocrystalError> {
    let n = m.size();
    if v.len() != n {
        return Err(IsocrystalError::Dimension { expected: n, got: v.len() });
    }
    let mut orbit = vec![v.to_vec()];
    for _ in 0..n {
        let next = m.apply(r, orbit.last().expect("nonempty"));
        orbit.push(next);
    }
    let a: Vec<Vec<_>> = (0..n).map(|row| (0..n).map(|col| orbit[col][row].clone()).collect()).collect();
    let b: Vec<Vec<_>> = (0..n).map(|row| vec![orbit[n][row].clone()]).collect();
    let x = solve_multi(r, a, b)?;
    Ok(x.into_iter().map(|mut row| row.remove(0)).collect())
}

/// Lower convex hull with slopes and their horizontal lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    #[serde(serialize_with = "ser_vertices")]
    pub vertices: Vec<(usize, Q)>,
    #[serde(serialize_with = "ser_slopes")]
    pub slopes: Vec<(Q, usize)>,
}

fn ser_vertices<S: serde::Serializer>(v: &[(usize, Q)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(x, y)| (x, crate::linalg::qfmt(y))))
}

fn ser_slopes<S: serde::Serializer>(v: &[(Q, usize)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(x, m)| (crate::linalg::qfmt(x), m)))
}

impl NewtonPolygon {
    pub fn is_isoclinic(&self, slope: &Q, n: usize) -> bool {
        self.slopes.len() == 1 && self.slopes[0].0 == *slope && self.slopes[0].1 == n
    }
}

/// Newton polygon of `X^n - sum A_i X^i` from `(i, ord A_i)` with `A_n`
/// included (`None` means infinite valuation): the lower hull of the points
/// `(n - i, ord A_i)`.
pub fn newton_polygon(valuations: &[(usize, Option<Q>)]) -> Result<NewtonPolygon, IsocrystalError> {
    let n = valuations.iter().map(|(i, _)| *i).max().ok_or(IsocrystalError::AllInfinite)?;
    let mut pts: Vec<(usize, Q)> = valuations.iter().filter_map(|(i, v)| v.clone().map(|v| (n - i, v))).collect();
    if pts.is_empty() {
        return Err(IsocrystalError::AllInfinite);
    }
    pts.sort();
    pts.dedup_by(|b, a| a.0 == b.0 && {
        if b.1 < a.1 {
            a.1 = b.1.clone();
        }
        true
    });
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (x1, y1) = &hull[hull.len() - 2];
            let (x2, y2) = &hull[hull.len() - 1];
            // Drop the middle point when it is on or above the chord.
            let lhs = (y2 - y1) * qi((p.0 - x1) as i64);
            let rhs = (&p.1 - y1) * qi((x2 - x1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            ((&w[1].1 - &w[0].1) / qi(len as i64), len)
        })
        .collect();
    Ok(NewtonPolygon { vertices: hull, slopes })
}

/// Parameters of the randomized check of the slope bound.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaConfig {
    pub q: u64,
    /// Degree `E` of the residue field over `F_q`.
    pub residue_degree: usize,
    /// Working precision; `None` selects `4 (n + n)`.
    pub precision: Option<i64>,
    /// Number of precision doublings before a trial is inconclusive.
    pub max_doublings: u32,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { q: 2, residue_degree: 2, precision: None, max_doublings: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaFailure {
    pub trial: u64,
    pub index: usize,
    pub valuation: i64,
    pub bound: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub n: usize,
    pub k: i64,
    pub q: u64,
    pub trials: u64,
    pub passed: u64,
    pub failures: Vec<LemmaFailure>,
    /// Trials that could not be certified at the largest precision.
    pub inconclusive: u64,
    /// Precision doublings used across all trials.
    pub doublings: u64,
    /// Trials whose Newton polygon was the single segment from `(0,0)` to `(n,k)`.
    pub isoclinic: u64,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.inconclusive == 0 && self.passed == self.trials && self.isoclinic == self.trials
    }
}

enum TrialOutcome {
    Pass { isoclinic: bool },
    Fail(LemmaFailure),
    Inconclusive,
}

fn random_gl_n<R: Rng>(r: &SeriesRing, n: usize, prec: i64, rng: &mut R) -> Vec<Vec<ValuedElement>> {
    loop {
        let g: Vec<Vec<_>> = (0..n).map(|_| (0..n).map(|_| r.random(0, prec, rng)).collect()).collect();
        if residue_invertible(r.field(), &g) {
            return g;
        }
    }
}

/// Whether the reduction modulo `w` is invertible over the residue field.
fn residue_invertible(f: &Gf, g: &[Vec<ValuedElement>]) -> bool {
    let n = g.len();
    let mut a: Vec<Vec<u64>> = g.iter().map(|row| row.iter().map(|x| x.coeff(0).unwrap_or(0)).collect()).collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| a[i][col] != 0) else { return false };
        a.swap(col, p);
        let inv = f.inv(a[col][col]).expect("nonzero");
        for i in col + 1..n {
            let t = f.mul(a[i][col], inv);
            for j in col..n {
                a[i][j] = f.sub(a[i][j], f.mul(t, a[col][j]));
            }
        }
    }
    true
}

fn run_trial(r: &SeriesRing, n: usize, k: i64, prec: i64, trial: u64, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let g = random_gl_n(r, n, prec, rng);
    let m = match companion(n, k).conjugate(r, &g) {
        Ok(m) => m,
        Err(_) => return TrialOutcome::Inconclusive,
    };
    let v: Vec<_> = (0..n).map(|_| r.random(0, prec, rng)).collect();
    let coeffs = match cyclic_relation(r, &m, &v) {
        Ok(c) => c,
        Err(_) => return TrialOutcome::Inconclusive,
    };
    let mut points = vec![(n, Some(qi(0)))];
    for (i, a) in coeffs.iter().enumerate() {
        // ord(A_i) >= (n-i)k/n, i.e. n ord(A_i) >= (n-i)k.
        let need = (n - i) as i64 * k;
        match a.valuation() {
            Some(v) if v * n as i64 >= need && (i > 0 || v == k) => points.push((i, Some(qi(v)))),
            Some(v) => {
                return TrialOutcome::Fail(LemmaFailure { trial, index: i, valuation: v, bound: crate::linalg::qfmt(&q(need, n as i64)) })
            }
            None if i > 0 && a.precision() * n as i64 >= need => points.push((i, Some(qi(a.precision())))),
            None => return TrialOutcome::Inconclusive,
        }
    }
    let isoclinic = newton_polygon(&points).map(|np| np.is_isoclinic(&q(k, n as i64), n)).unwrap_or(false);
    TrialOutcome::Pass { isoclinic }
}

/// Randomized check of `ord(A_i) >= (n-i) k/n` for cyclic vectors of random
/// `GL_n(O)`-conjugates of the slope-`k/n` companion.
///
/// Valuations are certified against the tracked precision; a trial that
/// cannot be certified is retried at doubled precision and counted as
/// inconclusive after `max_doublings`.
pub fn verify_isocrystal_lemma(n: usize, k: i64, trials: u64, seed: u64, cfg: &LemmaConfig) -> Result<LemmaReport, IsocrystalError> {
    let coprime = n >= 1 && k >= 0 && (k as usize) < n.max(1) && (n == 1 || k.gcd(&(n as i64)) == 1);
    if !coprime && !(n == 1 && k >= 0) {
        return Err(IsocrystalError::Slope { n, k });
    }
    let (field, r) = Gf::for_q(cfg.q, cfg.residue_degree)?;
    let base_prec = cfg.precision.unwrap_or(4 * (n + n) as i64);
    let mut report = LemmaReport { n, k, q: cfg.q, trials, passed: 0, failures: Vec::new(), inconclusive: 0, doublings: 0, isoclinic: 0 };
    let mut ring = SeriesRing::new(field, r, base_prec);
    for t in 0..trials {
        let mut prec = base_prec;
        let mut outcome = TrialOutcome::Inconclusive;
        for attempt in 0..=cfg.max_doublings {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            // Later attempts use a fresh draw so that a non-cyclic sample is not repeated.
            for _ in 0..attempt {
                rng.gen::<u64>();
            }
            ring.default_prec = prec;
            outcome = run_trial(&ring, n, k, prec, t, &mut rng);
            if !matches!(outcome, TrialOutcome::Inconclusive) {
                break;
            }
            if attempt < cfg.max_doublings {
                report.doublings += 1;
                prec *= 2;
            }
        }
        match outcome {
            TrialOutcome::Pass { isoclinic } => {
                report.passed += 1;
                report.isoclinic += u64::from(isoclinic);
            }
            TrialOutcome::Fail(f) => report.failures.push(f),
            TrialOutcome::Inconclusive => report.inconclusive += 1,
        }
    }
    Ok(report)
}

/// The slopes `k/n` with `n <= max_n`, `0 <= k < n`, in lowest terms.
pub fn reduced_slopes(max_n: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(1, 0)];
    for n in 2..=max_n {
        for k in 1..n as i64 {
            if k.gcd(&(n as i64)) == 1 {
                out.push((n, k));
            }
        }
    }
    out
}
