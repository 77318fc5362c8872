//! Exact integer linear algebra.
//!
//! Dense matrices over arbitrary-precision integers, Smith and Hermite normal
//! forms with unimodular witnesses, lattice kernels and cokernels, and ranks
//! over prime fields. Everything downstream (group cohomology, homology of
//! Bieberbach groups, characteristic classes) is reduced to these routines.

use std::fmt;
use std::ops::{Index, IndexMut, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::RaggedMatrix);
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor for small literal matrices.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let converted = rows
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(converted).expect("literal matrix rows must have equal length")
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn block_diagonal(blocks: &[IntMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let k: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(n, k);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_range(&self, start: usize, end: usize) -> Self {
        let mut m = Self::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                m[(i, j - start)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn hstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        Ok(m)
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn pow(&self, mut e: usize) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .sum()
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    /// Inverse of a matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let det = self.determinant()?;
        if det.abs() != BigInt::one() {
            return Err(Error::NotUnimodular(det.abs().to_string()));
        }
        // U M V = I, so M^{-1} = V U.
        let snf = smith_normal_form(self);
        Ok(&snf.v * &snf.u)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += factor * row[source]
    pub fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = factor * &self[(source, j)];
            self[(target, j)] += delta;
        }
    }

    /// col[target] += factor * col[source]
    pub fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = factor * &self[(i, source)];
            self[(i, target)] += delta;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs)
            .expect("matrix product dimension mismatch")
    }
}

impl Sub for &IntMatrix {
    type Output = IntMatrix;

    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<serde_json::Value>>::deserialize(deserializer)?;
        let rows = raw
            .into_iter()
            .map(|row| {
                row.iter()
                    .map(parse_json_integer)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        IntMatrix::from_rows(rows).map_err(de::Error::custom)
    }
}

/// Accepts JSON integers and decimal strings.
pub fn parse_json_integer(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n
            .to_string()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(e.to_string())),
        serde_json::Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("'{s}' is not a decimal integer"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` in Smith normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// Diagonal entries `d_1 | d_2 | ...`, including trailing zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

fn smallest_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a[(bi, bj)].abs() <= x.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Smith normal form with transforms.
///
/// Pivoting always moves the smallest nonzero entry (first in row-major scan)
/// of the active block to the pivot, so the result is reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = smallest_nonzero(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&d[(i, t)] / &d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&d[(t, j)] / &d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // A remainder smaller than the pivot survived; make it the pivot.
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !d[(i, t)].is_zero() && d[(i, t)].abs() < d[best].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !d[(t, j)].is_zero() && d[(t, j)].abs() < d[best].abs() {
                        best = (t, j);
                    }
                }
                d.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                d.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                continue;
            }
            let pivot = d[(t, t)].clone();
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&pivot));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfDecomposition { u, d, v }
}

/// Row-style Hermite normal form: `W · M = H` with `W` unimodular, `H` in
/// row echelon form with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`. Zero rows are moved to the bottom.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut w = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                if best.is_none_or(|b| h[(i, c)].abs() < h[(b, c)].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(r, b);
            w.swap_rows(r, b);
            let mut done = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -(&h[(i, c)] / &h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                w.add_row_multiple(i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            w.negate_row(r);
        }
        let pivot = h[(r, c)].clone();
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&pivot);
            h.add_row_multiple(i, r, &q);
            w.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    (w, h)
}

/// Finitely generated abelian group `Z^free_rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_t`
/// with `1 < d_1 | d_2 | ... | d_t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigUint>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// Normalizes an arbitrary list of cyclic factors `Z/n_i` (zero meaning
    /// `Z`) into invariant-factor form.
    pub fn from_cyclic_factors(free_rank: usize, factors: &[BigInt]) -> Self {
        let diag = IntMatrix::diagonal(factors);
        let snf = smith_normal_form(&diag);
        let mut group = AbelianGroup::free(free_rank);
        for x in snf.diagonal() {
            if x.is_zero() {
                group.free_rank += 1;
            } else if !x.is_one() {
                group.torsion.push(x.magnitude().clone());
            }
        }
        group
    }

    pub fn torsion_part(&self) -> AbelianGroup {
        AbelianGroup {
            free_rank: 0,
            torsion: self.torsion.clone(),
        }
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigUint {
        self.torsion.iter().product()
    }

    /// Cardinality, or `None` for infinite groups.
    pub fn cardinality(&self) -> Option<BigUint> {
        (self.free_rank == 0).then(|| self.torsion_order())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `Z^n / (column lattice of M)` for an `n × k` matrix `M`.
pub fn cokernel(m: &IntMatrix) -> AbelianGroup {
    cokernel_map(m).group
}

/// A cokernel together with the quotient map in coordinates.
///
/// Coordinate `i` of the group is free when `moduli[i]` is `None` and cyclic
/// of order `moduli[i]` otherwise; free coordinates come first, then torsion
/// coordinates in divisor-chain order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelMap {
    pub group: AbelianGroup,
    pub projection: IntMatrix,
    pub moduli: Vec<Option<BigInt>>,
}

impl CokernelMap {
    pub fn project(&self, x: &[BigInt]) -> Vec<BigInt> {
        let y = self.projection.mul_vec(x);
        reduce_coords(&y, &self.moduli)
    }
}

/// Reduces torsion coordinates into `[0, d)`.
pub fn reduce_coords(x: &[BigInt], moduli: &[Option<BigInt>]) -> Vec<BigInt> {
    x.iter()
        .zip(moduli)
        .map(|(v, m)| match m {
            Some(d) => v.mod_floor(d),
            None => v.clone(),
        })
        .collect()
}

pub fn cokernel_map(m: &IntMatrix) -> CokernelMap {
    let n = m.rows();
    let snf = smith_normal_form(m);
    let diag = snf.diagonal();
    let r = snf.rank();
    let mut free_rows = Vec::new();
    let mut torsion_rows = Vec::new();
    for (i, d) in diag.iter().enumerate().take(r) {
        if !d.is_one() {
            torsion_rows.push((i, d.clone()));
        }
    }
    free_rows.extend(r..n);

    let total = free_rows.len() + torsion_rows.len();
    let mut projection = IntMatrix::zeros(total, n);
    let mut moduli = Vec::with_capacity(total);
    for (out, &i) in free_rows.iter().enumerate() {
        for j in 0..n {
            projection[(out, j)] = snf.u[(i, j)].clone();
        }
        moduli.push(None);
    }
    for (k, (i, d)) in torsion_rows.iter().enumerate() {
        let out = free_rows.len() + k;
        for j in 0..n {
            projection[(out, j)] = snf.u[(*i, j)].mod_floor(d);
        }
        moduli.push(Some(d.clone()));
    }
    let group = AbelianGroup {
        free_rank: free_rows.len(),
        torsion: torsion_rows
            .iter()
            .map(|(_, d)| d.magnitude().clone())
            .collect(),
    };
    CokernelMap {
        group,
        projection,
        moduli,
    }
}

/// Basis of `{x ∈ Z^k : M x = 0}` as the columns of the returned matrix.
/// The basis is primitive: it extends to a basis of `Z^k`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    snf.v.column_range(r, m.cols())
}

/// An integer solution of `M x = b`, if one exists.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), b.len(), "right-hand side length mismatch");
    let snf = smith_normal_form(m);
    let ub = snf.u.mul_vec(b);
    let diag = snf.diagonal();
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, c) in ub.iter().enumerate() {
        match diag.get(i) {
            Some(d) if !d.is_zero() => {
                if !c.is_multiple_of(d) {
                    return None;
                }
                y[i] = c / d;
            }
            _ => {
                if !c.is_zero() {
                    return None;
                }
            }
        }
    }
    Some(snf.v.mul_vec(&y))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits in u64")
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Rank of a dense matrix over `F_p`, entries already reduced.
pub(crate) fn rank_mod_dense(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for j in 0..cols {
            a[rank][j] = mul_mod(a[rank][j], inv, p);
        }
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    let sub = mul_mod(f, a[rank][j], p);
                    a[i][j] = (a[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Rank of `M` over the field with `p` elements.
pub fn rank_mod(m: &IntMatrix, p: u64) -> Result<usize> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let dense = (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| residue(x, p)).collect())
        .collect();
    Ok(rank_mod_dense(dense, p))
}

/// Number of solutions of `M x ≡ 0 (mod m)` in `(Z/m)^cols`.
///
/// Works for composite `m`: with `U M V = D`, the count is
/// `∏ gcd(d_i, m)` over nonzero divisors times `m` per remaining column.
pub fn fixed_card_mod(m: &IntMatrix, modulus: u64) -> Result<BigUint> {
    if modulus < 2 {
        return Err(Error::InvalidModulus(modulus));
    }
    let snf = smith_normal_form(m);
    let modulus_big = BigInt::from(modulus);
    let r = snf.rank();
    let mut count = BigUint::one();
    for d in snf.diagonal().iter().take(r) {
        count *= d.gcd(&modulus_big).magnitude();
    }
    count *= BigUint::from(modulus).pow((m.cols() - r) as u32);
    Ok(count)
}

/// Inverse of a square matrix over `F_2`, if invertible.
pub(crate) fn inverse_mod2(a: &[Vec<u8>]) -> Option<Vec<Vec<u8>>> {
    let n = a.len();
    let mut aug: Vec<Vec<u8>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u8> = row.iter().map(|x| x & 1).collect();
            r.extend((0..n).map(|j| u8::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&i| aug[i][c] == 1)?;
        aug.swap(c, piv);
        for i in 0..n {
            if i != c && aug[i][c] == 1 {
                let pivot_row = aug[c].clone();
                for (x, y) in aug[i].iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check_snf(m: &IntMatrix) -> SnfDecomposition {
        let snf = smith_normal_form(m);
        assert_eq!(&(&snf.u * m) * &snf.v, snf.d);
        assert_eq!(snf.u.determinant().unwrap().abs(), BigInt::one());
        assert_eq!(snf.v.determinant().unwrap().abs(), BigInt::one());
        snf
    }

    #[test]
    fn snf_identity() {
        let snf = check_snf(&IntMatrix::identity(3));
        assert!(snf.d.is_identity());
        assert!(snf.u.is_identity());
        assert!(snf.v.is_identity());
    }

    #[test]
    fn snf_gcd_of_minors() {
        // d1 = gcd of entries = 2, d1 d2 = |det| = 8
        let snf = check_snf(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(snf.diagonal(), big(&[2, 4]));
    }

    #[test]
    fn snf_zero_and_empty() {
        let snf = check_snf(&IntMatrix::zeros(2, 2));
        assert!(snf.d.is_zero());
        let empty = smith_normal_form(&IntMatrix::zeros(0, 3));
        assert_eq!(empty.v, IntMatrix::identity(3));
    }

    #[test]
    fn snf_rectangular_divisor_chain() {
        let m = IntMatrix::from_i64(&[&[6, 10, 15], &[4, 6, 9]]);
        let snf = check_snf(&m);
        assert_eq!(snf.diagonal(), big(&[1, 2]));
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 3], &[0, 0]]);
        assert_eq!(check_snf(&m).diagonal(), big(&[1, 6]));
    }

    #[test]
    fn cokernel_examples() {
        let g = cokernel(&IntMatrix::from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(g, AbelianGroup::from_cyclic_factors(0, &big(&[6])));
        assert_eq!(g.to_string(), "Z/6");
        assert_eq!(cokernel(&IntMatrix::zeros(2, 2)), AbelianGroup::free(2));
        assert!(cokernel(&IntMatrix::from_i64(&[&[1]])).is_trivial());
    }

    #[test]
    fn cokernel_map_kills_relations() {
        let m = IntMatrix::from_i64(&[&[2, 4, 0], &[0, 6, 0], &[4, 2, 0]]);
        let map = cokernel_map(&m);
        for j in 0..m.cols() {
            let image = map.project(&m.column(j));
            assert!(image.iter().all(Zero::is_zero), "column {j} survives");
        }
        assert_eq!(
            map.group.free_rank + map.group.torsion.len(),
            map.projection.rows()
        );
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(k.cols(), 1);
        let col = k.column(0);
        assert_eq!(&col[0] + &col[1], BigInt::zero());
        assert_eq!(col[0].abs(), BigInt::one());

        let k = kernel_basis(&IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert_eq!(k.cols(), 0);

        let k = kernel_basis(&IntMatrix::zeros(1, 2));
        assert_eq!(k, IntMatrix::identity(2));
    }

    #[test]
    fn rank_mod_examples() {
        assert_eq!(rank_mod(&IntMatrix::identity(3), 2).unwrap(), 3);
        assert_eq!(
            rank_mod(&IntMatrix::from_i64(&[&[2, 2], &[2, 2]]), 2).unwrap(),
            0
        );
        assert_eq!(
            rank_mod(&IntMatrix::from_i64(&[&[1, 1], &[1, 0]]), 2).unwrap(),
            2
        );
        assert_eq!(
            rank_mod(&IntMatrix::identity(2), 4),
            Err(Error::NotPrime(4))
        );
    }

    fn brute_fixed(m: &IntMatrix, modulus: u64) -> u64 {
        let n = m.cols();
        let total = modulus.pow(n as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let x: Vec<BigInt> = (0..n)
                    .map(|_| {
                        let v = c % modulus;
                        c /= modulus;
                        BigInt::from(v)
                    })
                    .collect();
                m.mul_vec(&x)
                    .iter()
                    .all(|y| y.mod_floor(&BigInt::from(modulus)).is_zero())
            })
            .count() as u64
    }

    #[test]
    fn fixed_card_examples() {
        assert_eq!(
            fixed_card_mod(&IntMatrix::zeros(2, 2), 3).unwrap(),
            BigUint::from(9u32)
        );
        let swap_minus_id = IntMatrix::from_i64(&[&[-1, 1], &[1, -1]]);
        assert_eq!(brute_fixed(&swap_minus_id, 2), 2);
        assert_eq!(
            fixed_card_mod(&swap_minus_id, 2).unwrap(),
            BigUint::from(2u32)
        );
        let rot = &IntMatrix::from_i64(&[&[0, -1], &[1, -1]]) - &IntMatrix::identity(2);
        assert_eq!(brute_fixed(&rot, 3), 3);
        assert_eq!(fixed_card_mod(&rot, 3).unwrap(), BigUint::from(3u32));
        assert_eq!(fixed_card_mod(&rot, 1), Err(Error::InvalidModulus(1)));
    }

    #[test]
    fn fixed_card_composite_matches_enumeration() {
        let m = IntMatrix::from_i64(&[&[2, 4, 1], &[0, 6, 3], &[2, 2, -2]]);
        for modulus in [4u64, 6, 8, 9, 12] {
            assert_eq!(
                fixed_card_mod(&m, modulus).unwrap(),
                BigUint::from(brute_fixed(&m, modulus)),
                "modulus {modulus}"
            );
        }
    }

    #[test]
    fn hermite_form_shape() {
        let m = IntMatrix::from_i64(&[&[0, 2, 0, 1], &[0, 4, 1, 3]]);
        let (w, h) = hermite_normal_form(&m);
        assert_eq!(&w * &m, h);
        assert_eq!(w.determinant().unwrap().abs(), BigInt::one());
        assert_eq!(h, IntMatrix::from_i64(&[&[0, 2, 0, 1], &[0, 0, 1, 1]]));
    }

    #[test]
    fn solve_and_inverse() {
        let m = IntMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse_unimodular().unwrap();
        assert!((&m * &inv).is_identity());
        let x = solve_integer(&m, &big(&[3, 2])).unwrap();
        assert_eq!(m.mul_vec(&x), big(&[3, 2]));
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 2]]);
        assert!(solve_integer(&m, &big(&[1, 0])).is_none());
    }

    #[test]
    fn determinant_bareiss() {
        let m = IntMatrix::from_i64(&[&[0, 2, 1], &[3, -1, 4], &[1, 1, 1]]);
        // cofactor expansion along the first row
        let expected = -2 * (3 - 4) + (3 + 1);
        assert_eq!(m.determinant().unwrap(), BigInt::from(expected));
    }

    #[test]
    fn abelian_group_normalization() {
        let g = AbelianGroup::from_cyclic_factors(1, &big(&[4, 6, 1, 0]));
        assert_eq!(g.free_rank, 2);
        assert_eq!(g.to_string(), "Z^2 + Z/2 + Z/12");
        assert_eq!(g.torsion_order(), BigUint::from(24u32));
        assert_eq!(AbelianGroup::trivial().to_string(), "0");
    }

    #[test]
    fn mod2_inverse() {
        let a = vec![vec![1, 1], vec![0, 1]];
        assert_eq!(inverse_mod2(&a).unwrap(), vec![vec![1, 1], vec![0, 1]]);
        assert!(inverse_mod2(&[vec![1, 1], vec![1, 1]]).is_none());
    }

    #[test]
    fn matrix_json_accepts_numbers_and_strings() {
        let m: IntMatrix =
            serde_json::from_str(r#"[[1,"-2"],["30000000000000000000",4]]"#).unwrap();
        assert_eq!(m[(1, 0)], "30000000000000000000".parse::<BigInt>().unwrap());
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"[["1","-2"],["30000000000000000000","4"]]"#
        );
        assert!(serde_json::from_str::<IntMatrix>("[[1,2],[3]]").is_err());
        assert!(serde_json::from_str::<IntMatrix>("[[1.5]]").is_err());
    }
}
