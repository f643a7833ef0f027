//! Finite fields `F_{p^d}` with elements packed into a `u64` as base-`p`
//! digits of the polynomial coefficients (bits when `p = 2`).

use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p^d = {p}^{d} does not fit in 64 bits")]
    TooLarge { p: u64, d: usize },
    #[error("degree must be positive")]
    ZeroDegree,
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// `(p, r)` with `q = p^r`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    let p = (2..=q).find(|k| q % k == 0)?;
    let mut r = 0;
    let mut x = q;
    while x % p == 0 {
        x /= p;
        r += 1;
    }
    (x == 1).then_some((p, r))
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            out.push(k);
            while n % k == 0 {
                n /= k;
            }
        }
        k += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over `F_p`, low degree first.
mod poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let dm = m.len() - 1;
        let inv_lead = super::inv_mod(m[dm], p);
        while a.len() > dm {
            let top = a.len() - 1;
            let f = a[top] * inv_lead % p;
            if f != 0 {
                for (i, &c) in m.iter().enumerate() {
                    let k = top - dm + i;
                    a[k] = (a[k] + p - f * c % p) % p;
                }
            }
            a = trim(a);
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// `x^(p^k) mod m`.
    pub fn x_pow_p_pow(k: usize, m: &[u64], p: u64) -> Vec<u64> {
        let mut cur = rem(&[0, 1], m, p);
        for _ in 0..k {
            let mut acc = vec![1];
            let mut base = cur.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, m, p);
                }
                base = mulmod(&base, &base, m, p);
                e >>= 1;
            }
            cur = acc;
        }
        cur
    }
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Rabin's test for a monic polynomial of degree `d`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    let x = poly::rem(&[0, 1], f, p);
    if !poly::sub(&poly::x_pow_p_pow(d, f, p), &x, p).is_empty() {
        return false;
    }
    prime_factors(d).into_iter().all(|r| {
        let h = poly::sub(&poly::x_pow_p_pow(d / r, f, p), &x, p);
        poly::gcd(f, &h, p).len() == 1
    })
}

/// The first monic irreducible polynomial of degree `d` over `F_p`, in the
/// order of the base-`p` encoding of its lower coefficients.
pub fn first_irreducible(p: u64, d: usize) -> Vec<u64> {
    let mut code: u128 = 0;
    loop {
        let mut f = Vec::with_capacity(d + 1);
        let mut c = code;
        for _ in 0..d {
            f.push((c % p as u128) as u64);
            c /= p as u128;
        }
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
        code += 1;
    }
}

#[derive(Clone)]
struct Tables {
    add: Vec<u8>,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

/// `F_{p^d}`. Elements are `u64` codes; `0` is zero and `1` is one.
#[derive(Clone)]
pub struct Gf {
    p: u64,
    d: usize,
    /// Monic modulus, low degree first, length `d + 1`.
    modulus: Vec<u64>,
    /// For `p = 2`: the modulus without its leading term, as bits.
    low_bits: u64,
    tables: Option<Tables>,
    size: Option<u64>,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.d)
    }
}

pub type Elt = u64;

impl Gf {
    pub fn new(p: u64, d: usize) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if d == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let bits = (p as f64).log2() * d as f64;
        if bits > 64.0 + 1e-9 {
            return Err(FieldError::TooLarge { p, d });
        }
        let modulus = first_irreducible(p, d);
        let size = (p as u128).checked_pow(d as u32).and_then(|s| u64::try_from(s).ok());
        let low_bits = if p == 2 { modulus[..d].iter().enumerate().fold(0u64, |acc, (i, &c)| acc | (c << i)) } else { 0 };
        let mut f = Gf { p, d, modulus, low_bits, tables: None, size };
        if let Some(s) = size.filter(|&s| s <= 256) {
            let s = s as usize;
            let mut add = vec![0u8; s * s];
            let mut mul = vec![0u8; s * s];
            let mut inv = vec![0u8; s];
            for a in 0..s {
                for b in 0..s {
                    add[a * s + b] = f.add_slow(a as u64, b as u64) as u8;
                    let m = f.mul_slow(a as u64, b as u64);
                    mul[a * s + b] = m as u8;
                    if m == 1 {
                        inv[a] = b as u8;
                    }
                }
            }
            f.tables = Some(Tables { add, mul, inv });
        }
        Ok(f)
    }

    /// `F_q^e` as a field together with `r` where `q = p^r`.
    pub fn for_q(q: u64, e: usize) -> Result<(Self, usize), FieldError> {
        let (p, r) = prime_power(q).ok_or(FieldError::NotPrime(q))?;
        Ok((Gf::new(p, r * e)?, r))
    }

    /// `(add, mul, size)` lookup tables for fields with at most 256 elements.
    pub(crate) fn small_tables(&self) -> Option<(&[u8], &[u8], usize)> {
        let t = self.tables.as_ref()?;
        Some((&t.add, &t.mul, self.size? as usize))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn size(&self) -> Option<u64> {
        self.size
    }

    pub fn digits(&self, a: Elt) -> Vec<u64> {
        if self.p == 2 {
            return (0..self.d).map(|i| (a >> i) & 1).collect();
        }
        let mut x = a;
        (0..self.d)
            .map(|_| {
                let r = x % self.p;
                x /= self.p;
                r
            })
            .collect()
    }

    pub fn from_digits(&self, ds: &[u64]) -> Elt {
        if self.p == 2 {
            return ds.iter().enumerate().fold(0, |acc, (i, &c)| acc | ((c & 1) << i));
        }
        ds.iter().rev().fold(0u64, |acc, &c| acc * self.p + c % self.p)
    }

    fn add_slow(&self, a: Elt, b: Elt) -> Elt {
        if self.p == 2 {
            return a ^ b;
        }
        let x = self.digits(a);
        let y = self.digits(b);
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.from_digits(&s)
    }

    fn mul_slow(&self, a: Elt, b: Elt) -> Elt {
        if self.p == 2 {
            return self.mul_bin(a, b);
        }
        let prod = poly::mulmod(&poly::trim(self.digits(a)), &poly::trim(self.digits(b)), &self.modulus, self.p);
        let mut ds = prod;
        ds.resize(self.d, 0);
        self.from_digits(&ds)
    }

    fn mul_bin(&self, a: Elt, b: Elt) -> Elt {
        let mut acc: u128 = 0;
        let mut x = a as u128;
        let mut y = b;
        while y != 0 {
            if y & 1 == 1 {
                acc ^= x;
            }
            x <<= 1;
            y >>= 1;
        }
        let d = self.d;
        let low = self.low_bits as u128;
        for i in (d..2 * d).rev() {
            if (acc >> i) & 1 == 1 {
                acc ^= 1u128 << i;
                acc ^= low << (i - d);
            }
        }
        acc as u64
    }

    #[inline]
    pub fn add(&self, a: Elt, b: Elt) -> Elt {
        match &self.tables {
            Some(t) => t.add[a as usize * self.size.unwrap_or(0) as usize + b as usize] as Elt,
            None => self.add_slow(a, b),
        }
    }

    pub fn neg(&self, a: Elt) -> Elt {
        if self.p == 2 {
            return a;
        }
        let ds: Vec<u64> = self.digits(a).into_iter().map(|c| (self.p - c) % self.p).collect();
        self.from_digits(&ds)
    }

    pub fn sub(&self, a: Elt, b: Elt) -> Elt {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elt, b: Elt) -> Elt {
        match &self.tables {
            Some(t) => t.mul[a as usize * self.size.unwrap_or(0) as usize + b as usize] as Elt,
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, a: Elt, mut e: u128) -> Elt {
        let mut r = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Elt) -> Option<Elt> {
        if a == 0 {
            return None;
        }
        if let Some(t) = &self.tables {
            return Some(t.inv[a as usize] as Elt);
        }
        // a^(p^d - 2), with p^d possibly equal to 2^64.
        let order = (self.p as u128).pow(self.d as u32);
        Some(self.pow(a, order - 2))
    }

    /// Absolute Frobenius `a -> a^p`.
    pub fn frob(&self, a: Elt) -> Elt {
        self.pow(a, self.p as u128)
    }

    /// `a -> a^(p^k)`.
    pub fn frob_pow(&self, a: Elt, k: usize) -> Elt {
        let k = k % self.d;
        (0..k).fold(a, |x, _| self.frob(x))
    }

    /// Smallest `e` dividing the degree with `a in F_{p^e}`.
    pub fn element_degree(&self, a: Elt) -> usize {
        (1..=self.d).filter(|e| self.d % e == 0).find(|&e| self.frob_pow(a, e) == a).unwrap_or(self.d)
    }

    /// Trace from `F_{p^d}` down to the subfield `F_{p^e}`, for `a` in `F_{p^(e k)}`.
    pub fn trace(&self, a: Elt, e: usize, k: usize) -> Elt {
        let mut s = 0;
        let mut x = a;
        for _ in 0..k {
            s = self.add(s, x);
            x = self.frob_pow(x, e);
        }
        s
    }

    pub fn random<R: rand::Rng>(&self, rng: &mut R) -> Elt {
        let ds: Vec<u64> = (0..self.d).map(|_| rng.gen_range(0..self.p)).collect();
        self.from_digits(&ds)
    }

    /// Uniform random element of the subfield `F_{p^e}` (`e` divides the degree).
    pub fn random_in_subfield<R: rand::Rng>(&self, e: usize, rng: &mut R) -> Elt {
        assert_eq!(self.d % e, 0, "subfield degree must divide the field degree");
        if e == self.d {
            return self.random(rng);
        }
        let basis = self.subfield_basis(e);
        basis.iter().fold(0, |acc, &b| {
            let c = rng.gen_range(0..self.p);
            self.add(acc, self.mul(b, c))
        })
    }

    /// An `F_p`-basis of the subfield `F_{p^e}`, from the kernel of `x -> x^(p^e) - x`.
    pub fn subfield_basis(&self, e: usize) -> Vec<Elt> {
        let m = self.linear_matrix(|x| self.sub(self.frob_pow(x, e), x));
        kernel_mod_p(&m, self.p).into_iter().map(|v| self.from_digits(&v)).collect()
    }

    /// Matrix over `F_p` (columns = images of the digit basis) of an
    /// `F_p`-linear map.
    pub fn linear_matrix<F: Fn(Elt) -> Elt>(&self, f: F) -> Vec<Vec<u64>> {
        let d = self.d;
        let cols: Vec<Vec<u64>> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                self.digits(f(self.from_digits(&e)))
            })
            .collect();
        (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect()
    }
}

/// Row reduction over `F_p` of an augmented system; returns one solution of
/// `M x = b` or `None`.
pub fn solve_mod_p(m: &[Vec<u64>], b: &[u64], p: u64) -> Option<Vec<u64>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<u64>> = m.iter().zip(b).map(|(r, &x)| r.iter().copied().chain([x]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        let inv = inv_mod(a[r][c], p);
        for v in a[r].iter_mut() {
            *v = *v * inv % p;
        }
        let piv = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (v, &pv) in row.iter_mut().zip(&piv) {
                    *v = (*v + p - f * pv % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| row[cols] != 0) {
        return None;
    }
    let mut x = vec![0; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][cols];
    }
    Some(x)
}

/// Basis of the null space of `M` over `F_p`.
pub fn kernel_mod_p(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        let inv = inv_mod(a[r][c], p);
        for v in a[r].iter_mut() {
            *v = *v * inv % p;
        }
        let piv = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (v, &pv) in row.iter_mut().zip(&piv) {
                    *v = (*v + p - f * pv % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0; cols];
            v[free] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (p - a[i][free]) % p;
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_irreducibles() {
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(first_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert_eq!(first_irreducible(3, 2), vec![1, 0, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
    }

    #[test]
    fn irreducible_count_matches_necklace_formula() {
        // Number of monic irreducibles of degree 4 over F_2 is (16 - 4) / 4 = 3.
        let n = (0..16u64)
            .filter(|c| {
                let f: Vec<u64> = (0..4).map(|i| (c >> i) & 1).chain([1]).collect();
                is_irreducible(&f, 2)
            })
            .count();
        assert_eq!(n, 3);
        // Degree 3 over F_3: (27 - 3) / 3 = 8.
        let n = (0..27u64)
            .filter(|c| {
                let f = vec![c % 3, c / 3 % 3, c / 9, 1];
                is_irreducible(&f, 3)
            })
            .count();
        assert_eq!(n, 8);
    }

    #[test]
    fn multiplicative_group_is_cyclic_of_right_order() {
        for (p, d) in [(2, 3), (3, 2), (5, 2), (2, 4)] {
            let f = Gf::new(p, d).unwrap();
            let s = f.size().unwrap();
            for a in 1..s {
                assert_eq!(f.pow(a, (s - 1) as u128), 1);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn big_binary_field() {
        let f = Gf::new(2, 64).unwrap();
        let a = 0x1234_5678_9abc_def1;
        assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        assert_eq!(f.frob_pow(a, 64), a);
        assert_eq!(f.element_degree(1), 1);
        assert_eq!(f.subfield_basis(4).len(), 4);
    }

    #[test]
    fn subfield_elements_have_small_degree() {
        let f = Gf::new(3, 6).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(1, 7);
        for _ in 0..20 {
            let x = f.random_in_subfield(2, &mut rng);
            assert!(2 % f.element_degree(x) == 0);
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u64..125, b in 0u64..125, c in 0u64..125) {
            static F: std::sync::OnceLock<Gf> = std::sync::OnceLock::new();
            let f = F.get_or_init(|| Gf::new(5, 3).unwrap());
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.frob(f.add(a, b)), f.add(f.frob(a), f.frob(b)));
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
        }

        #[test]
        fn binary_frobenius_additive(a: u64, b: u64) {
            static F: std::sync::OnceLock<Gf> = std::sync::OnceLock::new();
            let f = F.get_or_init(|| Gf::new(2, 64).unwrap());
            prop_assert_eq!(f.frob(a ^ b), f.frob(a) ^ f.frob(b));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        }
    }
}
