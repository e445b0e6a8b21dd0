//! Prime-field arithmetic and exact linear algebra over F_p.
//!
//! Residues are stored as least non-negative representatives in `[0, p)` and
//! every operation reduces eagerly. The modulus is capped below 2^31 so a
//! product of two residues always fits in a `u64`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `p >= x`. Inputs below 2 give 2.
pub fn smallest_prime_geq(x: f64) -> Result<u64> {
    if x.is_nan() {
        return Err(Error::Domain("prime lower bound is NaN".into()));
    }
    if x <= 2.0 {
        return Ok(2);
    }
    if x >= MAX_MODULUS as f64 {
        return Err(Error::ModulusTooLarge(x));
    }
    let mut candidate = x.ceil() as u64;
    while candidate < MAX_MODULUS {
        if is_prime(candidate) {
            return Ok(candidate);
        }
        candidate += 1;
    }
    Err(Error::ModulusTooLarge(x))
}

/// Modulus together with the dimension and growth exponent it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeContext {
    pub p: u64,
    pub n: usize,
    pub lambda: f64,
}

impl PrimeContext {
    /// The prescribed modulus: the smallest prime at least `n^lambda`.
    pub fn prescribed(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        let p = smallest_prime_geq((n as f64).powf(lambda))?;
        Ok(PrimeContext { p, n, lambda })
    }
}

pub(crate) fn check_modulus(p: u64) -> Result<()> {
    if p >= MAX_MODULUS {
        return Err(Error::ModulusTooLarge(p as f64));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero residue.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p), "inverse of zero");
    pow_mod(a, p - 2, p)
}

/// Reduce a signed integer to `[0, p)`.
#[inline]
pub fn reduce_i64(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Dense matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    data: Vec<u64>,
}

/// Reduced row echelon form and the pivot column of each nonzero row.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: FpMatrix,
    pub pivots: Vec<usize>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Result<Self> {
        check_modulus(p)?;
        Ok(FpMatrix {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        })
    }

    pub fn identity(n: usize, p: u64) -> Result<Self> {
        let mut m = Self::zeros(n, n, p)?;
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        Ok(m)
    }

    /// Build from rows; entries are reduced mod `p`. All rows must have `cols` entries.
    pub fn from_rows(rows: &[Vec<u64>], cols: usize, p: u64) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols, p)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.data[i * cols + j] = v % p;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Nonzero entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        p: u64,
        entries: &[(usize, usize, u64)],
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols, p)?;
        for &(i, j, v) in entries {
            if i >= rows {
                return Err(Error::IndexOutOfRange { index: i, size: rows });
            }
            if j >= cols {
                return Err(Error::IndexOutOfRange { index: j, size: cols });
            }
            m.set(i, j, v);
        }
        Ok(m)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix {
            rows: self.cols,
            cols: self.rows,
            p: self.p,
            data: vec![0; self.data.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// First `k` rows.
    pub fn top_rows(&self, k: usize) -> FpMatrix {
        let k = k.min(self.rows);
        FpMatrix {
            rows: k,
            cols: self.cols,
            p: self.p,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if other.cols != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FpMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            p: self.p,
            data,
        })
    }

    /// `M x mod p` for a residue vector.
    pub fn mul_vec(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * (b % self.p)) % self.p)
            })
            .collect()
    }

    /// `M x mod p` for an integer vector.
    pub fn mul_int_vec(&self, x: &[i64]) -> Vec<u64> {
        let residues: Vec<u64> = x.iter().map(|&v| reduce_i64(v, self.p)).collect();
        self.mul_vec(&residues)
    }

    /// `M^T u mod p`.
    pub fn transpose_mul_vec(&self, u: &[u64]) -> Vec<u64> {
        assert_eq!(u.len(), self.rows, "vector length must match row count");
        let mut out = vec![0u64; self.cols];
        for (i, &ui) in u.iter().enumerate() {
            let ui = ui % self.p;
            if ui == 0 {
                continue;
            }
            for (j, &h) in self.row(i).iter().enumerate() {
                out[j] = (out[j] + h * ui) % self.p;
            }
        }
        out
    }

    /// Reduced row echelon form. Pivot search scans columns left to right and
    /// takes the topmost nonzero entry at or below the current row.
    pub fn rref(&self) -> Echelon {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = inv_mod(m.get(r, c), p);
            for j in 0..m.cols {
                let v = mul_mod(m.get(r, j), inv, p);
                m.data[r * m.cols + j] = v;
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let sub = mul_mod(f, m.get(r, j), p);
                    let v = (m.get(i, j) + p - sub) % p;
                    m.data[i * m.cols + j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of `{x : M x = 0}`, returned as the code it defines.
    pub fn nullspace_basis(&self) -> LinearCode {
        let basis = self.kernel_rows();
        LinearCode {
            p: self.p,
            n: self.cols,
            basis,
            check: self.clone(),
        }
    }

    fn kernel_rows(&self) -> FpMatrix {
        let p = self.p;
        let Echelon { matrix: e, pivots } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut data = vec![0u64; free.len() * self.cols];
        for (b, &f) in free.iter().enumerate() {
            let row = &mut data[b * self.cols..(b + 1) * self.cols];
            row[f] = 1 % p;
            for (i, &pc) in pivots.iter().enumerate() {
                row[pc] = (p - e.get(i, f)) % p;
            }
        }
        FpMatrix {
            rows: free.len(),
            cols: self.cols,
            p,
            data,
        }
    }

    /// Nonzero rows of the reduced echelon form.
    pub fn row_space_basis(&self) -> FpMatrix {
        let e = self.rref();
        e.matrix.top_rows(e.pivots.len())
    }

    /// Text form: header `rows cols p`, then one `row col value` line per nonzero entry.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.p);
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let h = parse_fields::<u64>(header, hl + 1)?;
        if h.len() != 3 {
            return Err(Error::parse(hl + 1, "header must be `rows cols p`"));
        }
        let (rows, cols, p) = (h[0] as usize, h[1] as usize, h[2]);
        let mut m = FpMatrix::zeros(rows, cols, p)?;
        for (ln, line) in lines {
            let f = parse_fields::<u64>(line, ln + 1)?;
            if f.len() != 3 {
                return Err(Error::parse(ln + 1, "entry must be `row col value`"));
            }
            let (i, j, v) = (f[0] as usize, f[1] as usize, f[2]);
            if i >= rows || j >= cols {
                return Err(Error::parse(ln + 1, "entry index out of range"));
            }
            if v >= p {
                return Err(Error::parse(ln + 1, "entry not reduced mod p"));
            }
            m.set(i, j, v);
        }
        Ok(m)
    }
}

pub(crate) fn parse_fields<T: std::str::FromStr>(line: &str, line_no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| Error::parse(line_no, format!("bad number `{t}`")))
        })
        .collect()
}

/// Linear code over F_p with both a generator basis and a parity-check matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearCode {
    pub p: u64,
    pub n: usize,
    /// Generator rows (linearly independent).
    pub basis: FpMatrix,
    /// Parity rows; every basis row is annihilated by every check row.
    pub check: FpMatrix,
}

impl LinearCode {
    /// Code defined as the kernel of `check`.
    pub fn from_check(check: &FpMatrix) -> Self {
        check.nullspace_basis()
    }

    /// Code spanned by the rows of `generator`.
    pub fn from_generator(generator: &FpMatrix) -> Self {
        let basis = generator.row_space_basis();
        let check = generator.kernel_rows();
        LinearCode {
            p: generator.p,
            n: generator.cols,
            basis,
            check,
        }
    }

    /// The full space F_p^n.
    pub fn full(n: usize, p: u64) -> Result<Self> {
        Ok(LinearCode {
            p,
            n,
            basis: FpMatrix::identity(n, p)?,
            check: FpMatrix::zeros(0, n, p)?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.rows
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.check.mul_vec(x).iter().all(|&s| s == 0)
    }

    /// Number of codewords, `p^k`, as a float (may exceed any integer type).
    pub fn size_f64(&self) -> f64 {
        (self.p as f64).powi(self.dimension() as i32)
    }

    /// All codewords, enumerated as base-`p` combinations of the basis rows
    /// with the first basis coefficient varying slowest.
    pub fn codewords(&self, budget: u64) -> Result<Vec<Vec<u64>>> {
        let count = self.size_f64();
        if count > budget as f64 {
            return Err(Error::BudgetExceeded {
                needed: count,
                budget,
            });
        }
        let k = self.dimension();
        let p = self.p;
        let mut coeffs = vec![0u64; k];
        let mut out = Vec::with_capacity(count as usize);
        loop {
            let mut word = vec![0u64; self.n];
            for (i, &a) in coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (w, &g) in word.iter_mut().zip(self.basis.row(i)) {
                    *w = (*w + a * g) % p;
                }
            }
            out.push(word);
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                coeffs[pos] += 1;
                if coeffs[pos] < p {
                    break;
                }
                coeffs[pos] = 0;
            }
        }
    }

    /// `{y : <c, y> = 0 for all c in C}`.
    pub fn dual(&self) -> LinearCode {
        LinearCode {
            p: self.p,
            n: self.n,
            basis: self.basis.kernel_rows(),
            check: self.basis.clone(),
        }
    }
}

/// Dual of a code.
pub fn dual_code(code: &LinearCode) -> LinearCode {
    code.dual()
}

/// True when the two matrices span the same row space.
pub fn same_row_space(a: &FpMatrix, b: &FpMatrix) -> bool {
    if a.cols != b.cols || a.p != b.p {
        return false;
    }
    let ra = a.rank();
    let rb = b.rank();
    match a.stack(b) {
        Ok(s) => ra == rb && s.rank() == ra,
        Err(_) => false,
    }
}
