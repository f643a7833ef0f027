//! Exact integer lattice algebra: Smith normal form, finitely generated
//! abelian groups given by generators and relations, and induced maps.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Dense integer matrix with arbitrary-precision entries, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        IntMatrix { rows, cols, data: entries.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            flat.extend_from_slice(r);
        }
        Self::from_i64(rows.len(), cols, &flat)
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch in hcat");
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// Sub-matrix of the given rows (all columns).
    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(idx.len(), self.cols);
        for (r, &i) in idx.iter().enumerate() {
            for j in 0..self.cols {
                m.set(r, j, self.get(i, j).clone());
            }
        }
        m
    }

    /// Sub-matrix of the given columns (all rows).
    pub fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (c, &j) in idx.iter().enumerate() {
                m.set(i, c, self.get(i, j).clone());
            }
        }
        m
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = v;
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Result of [`smith_normal_form`]: `u * m * v == d`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `u`, tracked alongside it.
    pub u_inv: IntMatrix,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form. Pivots are chosen as the nonzero entry of smallest
/// absolute value in the active block, ties broken by lowest row, then
/// lowest column, so the transforms are reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let (r, c) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut u_inv = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);

    // row op on u: row[dst] += k row[src]; inverse: col[src] -= k col[dst] on u_inv
    let row_add = |d: &mut IntMatrix, u: &mut IntMatrix, ui: &mut IntMatrix, dst: usize, src: usize, k: &BigInt| {
        d.add_row(dst, src, k);
        u.add_row(dst, src, k);
        ui.add_col(src, dst, &-k);
    };

    for t in 0..r.min(c) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => x.abs() < d.get(pi, pj).abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { return finish(d, u, v, u_inv) };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d.get(t, t).clone();
            let mut dirty = false;
            for i in t + 1..r {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(&p);
                row_add(&mut d, &mut u, &mut u_inv, i, t, &-q);
                dirty |= !d.get(i, t).is_zero();
            }
            for j in t + 1..c {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(&p);
                d.add_col(j, t, &-&q);
                v.add_col(j, t, &-q);
                dirty |= !d.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            // Enforce divisibility: fold an offending row into the pivot row.
            let offender = (t + 1..r).find(|&i| (t + 1..c).any(|j| !d.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => row_add(&mut d, &mut u, &mut u_inv, t, i, &BigInt::one()),
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            // inverse of negating row t is negating column t of u_inv
            for i in 0..r {
                let x = -u_inv.get(i, t);
                u_inv.set(i, t, x);
            }
        }
    }
    finish(d, u, v, u_inv)
}

fn finish(d: IntMatrix, u: IntMatrix, v: IntMatrix, u_inv: IntMatrix) -> Snf {
    Snf { d, u, v, u_inv }
}

/// Kernel basis of `m` (as columns), from the Smith form.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let idx: Vec<usize> = (rank..m.cols).collect();
    snf.v.select_cols(&idx)
}

/// Integer solution `y` of `basis * y = v`, if one exists.
pub fn solve_integer(basis: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let snf = smith_normal_form(basis);
    let uv = snf.u.mul_vec(v);
    let diag = snf.diagonal();
    let mut z = vec![BigInt::zero(); basis.cols];
    for (i, x) in uv.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            if !x.is_zero() {
                return None;
            }
        } else {
            let (qt, r) = x.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            z[i] = qt;
        }
    }
    Some(snf.v.mul_vec(&z))
}

/// Basis (as columns) of the lattice spanned by the columns of `gens`.
pub fn span_basis(gens: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(gens);
    let diag = snf.diagonal();
    let rank = snf.rank();
    let mut b = IntMatrix::zeros(gens.rows, rank);
    for j in 0..rank {
        for i in 0..gens.rows {
            b.set(i, j, snf.u_inv.get(i, j) * &diag[j]);
        }
    }
    b
}

/// Finitely generated abelian group `Z^a / R`, presented by its ambient
/// rank and relation lattice, with canonical coordinates read off the
/// Smith form. Invariant factors `d_1 | d_2 | ...` exclude 1s; free factors
/// are encoded as 0 and come last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    ambient: usize,
    invariants: Vec<BigInt>,
    to_canonical: IntMatrix,
    from_canonical: IntMatrix,
}

impl AbelianGroup {
    /// Quotient of `Z^ambient` by the column span of `relations`.
    pub fn quotient(relations: &IntMatrix) -> Self {
        let a = relations.rows;
        let snf = smith_normal_form(relations);
        let diag = snf.diagonal();
        let mut keep = Vec::new();
        let mut invariants = Vec::new();
        for i in 0..a {
            let di = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if !di.is_one() {
                keep.push(i);
                invariants.push(di);
            }
        }
        AbelianGroup {
            ambient: a,
            invariants,
            to_canonical: snf.u.select_rows(&keep),
            from_canonical: snf.u_inv.select_cols(&keep),
        }
    }

    /// Coinvariants `Z^n / (f - 1) Z^n` of an endomorphism.
    pub fn coinvariants(f: &IntMatrix) -> Self {
        assert_eq!(f.rows, f.cols, "endomorphism must be square");
        Self::quotient(&f.sub(&IntMatrix::identity(f.rows)))
    }

    /// Group with the given invariant factors, presented on its own canonical coordinates.
    pub fn from_invariants(invariants: &[i64]) -> Self {
        let n = invariants.len();
        let mut rel = IntMatrix::zeros(n, n);
        for (i, &d) in invariants.iter().enumerate() {
            rel.set(i, i, BigInt::from(d));
        }
        Self::quotient(&rel)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    /// Number of canonical coordinates.
    pub fn ngens(&self) -> usize {
        self.invariants.len()
    }

    pub fn invariants(&self) -> &[BigInt] {
        &self.invariants
    }

    pub fn to_canonical(&self) -> &IntMatrix {
        &self.to_canonical
    }

    pub fn from_canonical(&self) -> &IntMatrix {
        &self.from_canonical
    }

    pub fn free_rank(&self) -> usize {
        self.invariants.iter().filter(|d| d.is_zero()).count()
    }

    pub fn torsion_invariants(&self) -> Vec<BigInt> {
        self.invariants.iter().filter(|d| !d.is_zero()).cloned().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    /// Group order, or `None` for infinite groups.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.invariants.iter().product())
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion_invariants().iter().product()
    }

    /// Exponent of the torsion subgroup.
    pub fn torsion_exponent(&self) -> BigInt {
        self.torsion_invariants().last().cloned().unwrap_or_else(BigInt::one)
    }

    /// Reduce canonical coordinates to the standard range `[0, d_i)`.
    pub fn normalize(&self, y: &[BigInt]) -> Vec<BigInt> {
        y.iter()
            .zip(&self.invariants)
            .map(|(x, d)| if d.is_zero() { x.clone() } else { x.mod_floor(d) })
            .collect()
    }

    /// Class of an ambient vector, in reduced canonical coordinates.
    pub fn class_of(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.normalize(&self.to_canonical.mul_vec(x))
    }

    pub fn class_of_i64(&self, x: &[i64]) -> Vec<i64> {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        self.class_of(&big).iter().map(|v| v.to_i64().expect("canonical coordinate overflow")).collect()
    }

    /// Ambient representative of a canonical vector.
    pub fn lift(&self, y: &[BigInt]) -> Vec<BigInt> {
        self.from_canonical.mul_vec(y)
    }

    pub fn lift_i64(&self, y: &[i64]) -> Vec<i64> {
        let big: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
        self.lift(&big).iter().map(|v| v.to_i64().expect("lift overflow")).collect()
    }

    pub fn is_zero_class(&self, y: &[BigInt]) -> bool {
        self.normalize(y).iter().all(Zero::is_zero)
    }

    /// All elements in canonical coordinates, for finite groups.
    pub fn elements(&self) -> Option<Vec<Vec<i64>>> {
        if !self.is_finite() {
            return None;
        }
        let dims: Vec<i64> = self.invariants.iter().map(|d| d.to_i64().expect("group too large")).collect();
        let mut out = vec![Vec::new()];
        for &d in &dims {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        Some(out)
    }

    /// Torsion subgroup as an abstract group.
    pub fn torsion_subgroup(&self) -> AbelianGroup {
        let inv: Vec<i64> = self
            .torsion_invariants()
            .iter()
            .map(|d| d.to_i64().expect("invariant factor overflow"))
            .collect();
        Self::from_invariants(&inv)
    }

    /// Abstract isomorphism type, e.g. `Z/2 x Z/4 x Z`.
    pub fn describe(&self) -> String {
        describe_invariants(&self.invariants)
    }
}

pub fn describe_invariants(inv: &[BigInt]) -> String {
    if inv.is_empty() {
        return "0".to_string();
    }
    inv.iter()
        .map(|d| if d.is_zero() { "Z".to_string() } else { format!("Z/{d}") })
        .collect::<Vec<_>>()
        .join(" x ")
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("map does not respect relations: generator {generator} of the source lands outside the target relations")]
    NotWellDefined { generator: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
}

/// Homomorphism between presented groups, as a matrix on canonical coordinates.
#[derive(Clone, Debug)]
pub struct AbelianMap {
    pub source: AbelianGroup,
    pub target: AbelianGroup,
    pub matrix: IntMatrix,
}

/// Image of an [`AbelianMap`].
#[derive(Clone, Debug)]
pub struct Image {
    pub group: AbelianGroup,
    pub torsion: AbelianGroup,
    /// Maps canonical coordinates of `group` to canonical coordinates of the target.
    pub embed: IntMatrix,
}

impl Image {
    /// Image elements in reduced target coordinates, for finite images.
    pub fn elements_in_target(&self, target: &AbelianGroup) -> Option<Vec<Vec<i64>>> {
        Some(self.embed_elements(target, self.group.elements()?))
    }

    /// Torsion of the image, as elements of the target.
    pub fn torsion_elements_in_target(&self, target: &AbelianGroup) -> Vec<Vec<i64>> {
        let k = self.group.ngens();
        let tors: Vec<usize> = (0..k).filter(|&i| !self.group.invariants()[i].is_zero()).collect();
        let dims: Vec<i64> = tors.iter().map(|&i| self.group.invariants()[i].to_i64().unwrap()).collect();
        let mut elems = vec![vec![0i64; k]];
        for (slot, &d) in tors.iter().zip(&dims) {
            elems = elems
                .into_iter()
                .flat_map(|e| {
                    (0..d).map(move |x| {
                        let mut e = e.clone();
                        e[*slot] = x;
                        e
                    })
                })
                .collect();
        }
        self.embed_elements(target, elems)
    }

    fn embed_elements(&self, target: &AbelianGroup, elems: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = elems
            .into_iter()
            .map(|y| {
                let big: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
                target.normalize(&self.embed.mul_vec(&big)).iter().map(|v| v.to_i64().unwrap()).collect()
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl AbelianMap {
    /// Checked constructor from a matrix on canonical coordinates.
    pub fn new(source: AbelianGroup, target: AbelianGroup, matrix: IntMatrix) -> Result<Self, LatticeError> {
        if matrix.rows != target.ngens() || matrix.cols != source.ngens() {
            return Err(LatticeError::Shape {
                expected: format!("{}x{}", target.ngens(), source.ngens()),
                got: format!("{}x{}", matrix.rows, matrix.cols),
            });
        }
        for (j, dj) in source.invariants.iter().enumerate() {
            let col: Vec<BigInt> = matrix.column(j).iter().map(|x| x * dj).collect();
            if !target.is_zero_class(&col) {
                return Err(LatticeError::NotWellDefined { generator: j });
            }
        }
        let reduced = {
            let mut m = matrix;
            for j in 0..m.cols {
                let col = target.normalize(&m.column(j));
                for (i, x) in col.into_iter().enumerate() {
                    m.set(i, j, x);
                }
            }
            m
        };
        Ok(AbelianMap { source, target, matrix: reduced })
    }

    /// Map induced by an ambient linear map `target.ambient x source.ambient`.
    pub fn induced(source: AbelianGroup, target: AbelianGroup, ambient: &IntMatrix) -> Result<Self, LatticeError> {
        if ambient.rows != target.ambient || ambient.cols != source.ambient {
            return Err(LatticeError::Shape {
                expected: format!("{}x{}", target.ambient, source.ambient),
                got: format!("{}x{}", ambient.rows, ambient.cols),
            });
        }
        let m = target.to_canonical.mul(ambient).mul(&source.from_canonical);
        Self::new(source, target, m)
    }

    pub fn apply(&self, y: &[BigInt]) -> Vec<BigInt> {
        self.target.normalize(&self.matrix.mul_vec(y))
    }

    pub fn is_zero(&self) -> bool {
        (0..self.matrix.cols).all(|j| self.target.is_zero_class(&self.matrix.column(j)))
    }

    /// Injective iff the kernel is trivial.
    pub fn is_injective(&self) -> bool {
        self.kernel_lattice_size_matches()
    }

    fn kernel_lattice_size_matches(&self) -> bool {
        // The image is a quotient of the source; injective iff it has the same invariants.
        let img = image_and_torsion(self);
        img.group.invariants == self.source.invariants
    }

    pub fn classify(&self) -> MapKind {
        if self.is_zero() {
            MapKind::Zero
        } else if self.is_injective() {
            MapKind::Injective
        } else {
            MapKind::Other
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Zero,
    Injective,
    Other,
}

/// Image of `phi` (as an abstract group with its embedding into the target) and its torsion.
pub fn image_and_torsion(phi: &AbelianMap) -> Image {
    let k = phi.target.ngens();
    let s = phi.matrix.cols;
    // ker of Z^s -> target: x with M x in D Z^k, i.e. the x-part of ker [M | -D].
    let mut neg_d = IntMatrix::zeros(k, k);
    for (i, d) in phi.target.invariants.iter().enumerate() {
        neg_d.set(i, i, -d);
    }
    let big = phi.matrix.hcat(&neg_d);
    let kernel = kernel_basis(&big);
    let rows: Vec<usize> = (0..s).collect();
    let relations = kernel.select_rows(&rows);
    let group = AbelianGroup::quotient(&relations);
    let embed = phi.matrix.mul(group.from_canonical());
    let torsion = group.torsion_subgroup();
    Image { group, torsion, embed }
}

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(d: &[i64]) -> IntMatrix {
        let n = d.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, BigInt::from(x));
        }
        m
    }

    fn gcd_of_minors(m: &IntMatrix, k: usize) -> BigInt {
        fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = combos(n - 1, k);
            for mut c in combos(n - 1, k - 1) {
                c.push(n - 1);
                out.push(c);
            }
            out
        }
        let mut g = BigInt::zero();
        for r in combos(m.rows(), k) {
            for c in combos(m.cols(), k) {
                g = g.gcd(&m.select_rows(&r).select_cols(&c).det());
            }
        }
        g
    }

    fn check_snf(m: &IntMatrix) {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
        assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(m.rows()));
        let dg = s.diagonal();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        for w in dg.windows(2) {
            if w[1].is_zero() {
                continue;
            }
            assert!(!w[0].is_zero() && w[1].is_multiple_of(&w[0]), "chain broken: {dg:?}");
            assert!(!w[0].is_negative());
        }
        // Independent check: d_1 ... d_k = gcd of k x k minors.
        let mut prod = BigInt::one();
        for k in 1..=dg.len() {
            prod *= &dg[k - 1];
            assert_eq!(prod, gcd_of_minors(m, k));
        }
    }

    #[test]
    fn snf_identity() {
        let s = smith_normal_form(&IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        assert_eq!(s.u, IntMatrix::identity(3));
        assert_eq!(s.v, IntMatrix::identity(3));
    }

    #[test]
    fn snf_diag_2_3() {
        let s = smith_normal_form(&diag(&[2, 3]));
        assert_eq!(s.d, diag(&[1, 6]));
        check_snf(&diag(&[2, 3]));
    }

    #[test]
    fn snf_zero() {
        let s = smith_normal_form(&IntMatrix::zeros(2, 2));
        assert!(s.d.is_zero());
    }

    #[test]
    fn snf_rectangular() {
        check_snf(&IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]));
        check_snf(&IntMatrix::from_rows(&[vec![1, 2], vec![3, 4], vec![5, 6]]));
        check_snf(&IntMatrix::from_rows(&[vec![0, 2, 0, 4]]));
    }

    #[test]
    fn integer_solve_and_span() {
        let b = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3], vec![2, 3]]);
        assert_eq!(solve_integer(&b, &big(&[4, 3, 7])), Some(big(&[2, 1])));
        assert_eq!(solve_integer(&b, &big(&[1, 0, 1])), None);
        let gens = IntMatrix::from_rows(&[vec![1, -1, 0], vec![-1, 0, 1], vec![0, 1, -1]]);
        let basis = span_basis(&gens);
        assert_eq!(basis.cols(), 2);
        for j in 0..3 {
            assert!(solve_integer(&basis, &gens.column(j)).is_some());
        }
    }

    #[test]
    fn coinvariants_minus_one() {
        let g = AbelianGroup::coinvariants(&IntMatrix::from_rows(&[vec![-1]]));
        assert_eq!(g.describe(), "Z/2");
    }

    #[test]
    fn coinvariants_identity_is_free() {
        let g = AbelianGroup::coinvariants(&IntMatrix::identity(3));
        assert_eq!(g.describe(), "Z x Z x Z");
        assert_eq!(g.free_rank(), 3);
    }

    #[test]
    fn image_zero_map() {
        let a = AbelianGroup::from_invariants(&[4]);
        let phi = AbelianMap::new(a.clone(), a, IntMatrix::zeros(1, 1)).unwrap();
        assert!(image_and_torsion(&phi).group.is_trivial());
        assert_eq!(phi.classify(), MapKind::Zero);
    }

    #[test]
    fn image_of_2z_in_z4() {
        // Z -> Z/4, 1 -> 2
        let z = AbelianGroup::from_invariants(&[0]);
        let z4 = AbelianGroup::from_invariants(&[4]);
        let phi = AbelianMap::new(z, z4.clone(), IntMatrix::from_rows(&[vec![2]])).unwrap();
        let img = image_and_torsion(&phi);
        assert_eq!(img.group.describe(), "Z/2");
        assert_eq!(img.torsion.describe(), "Z/2");
        assert_eq!(img.elements_in_target(&z4).unwrap(), vec![vec![0], vec![2]]);
    }

    #[test]
    fn ill_defined_map_rejected() {
        let z2 = AbelianGroup::from_invariants(&[2]);
        let z3 = AbelianGroup::from_invariants(&[3]);
        let err = AbelianMap::new(z2, z3, IntMatrix::from_rows(&[vec![1]])).unwrap_err();
        assert_eq!(err, LatticeError::NotWellDefined { generator: 0 });
    }

    #[test]
    fn canonical_round_trip() {
        let f = IntMatrix::from_rows(&[vec![0, -1, 0], vec![1, 0, 0], vec![0, 0, 1]]);
        let g = AbelianGroup::coinvariants(&f);
        assert_eq!(g.describe(), "Z/2 x Z");
        for y in [vec![1, 5], vec![0, -3]] {
            let x = g.lift_i64(&y);
            assert_eq!(g.class_of_i64(&x), g.normalize(&big(&y)).iter().map(|v| v.to_i64().unwrap()).collect::<Vec<_>>());
        }
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |e| IntMatrix::from_i64(n, n, &e))
    }

    fn unimodular(n: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec((0..n, 0..n, -2i64..=2), 0..8).prop_map(move |ops| {
            let mut m = IntMatrix::identity(n);
            for (i, j, k) in ops {
                if i != j {
                    m.add_row(i, j, &BigInt::from(k));
                }
            }
            m
        })
    }

    fn inverse_of_unimodular(m: &IntMatrix) -> IntMatrix {
        let s = smith_normal_form(m);
        // u m v = 1  =>  m^{-1} = v u
        s.v.mul(&s.u)
    }

    proptest! {
        #[test]
        fn snf_invariants_hold(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(-6i64..=6, 16)) {
            let m = IntMatrix::from_i64(rows, cols, &seed[..rows * cols]);
            check_snf(&m);
        }

        #[test]
        fn torsion_invariant_under_conjugation((f, p) in (1usize..5).prop_flat_map(|n| (small_matrix(n), unimodular(n)))) {
            let g1 = AbelianGroup::coinvariants(&f);
            let conj = p.mul(&f).mul(&inverse_of_unimodular(&p));
            let g2 = AbelianGroup::coinvariants(&conj);
            prop_assert_eq!(g1.invariants(), g2.invariants());
        }

        #[test]
        fn class_map_is_additive(f in small_matrix(3), x in proptest::collection::vec(-5i64..=5, 3), y in proptest::collection::vec(-5i64..=5, 3)) {
            let g = AbelianGroup::coinvariants(&f);
            let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let cx = big(&g.class_of_i64(&x));
            let cy = big(&g.class_of_i64(&y));
            let cs: Vec<BigInt> = cx.iter().zip(&cy).map(|(a, b)| a + b).collect();
            prop_assert_eq!(big(&g.class_of_i64(&sum)), g.normalize(&cs));
        }
    }
}
