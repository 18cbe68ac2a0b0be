//! Exact linear algebra over `F_q`.

use std::fmt;

use crate::error::{QncError, Result};
use crate::field::{FieldElement, FieldSpec};

#[derive(Clone, PartialEq, Eq)]
pub struct FqVector {
    field: FieldSpec,
    entries: Vec<FieldElement>,
}

impl fmt::Debug for FqVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_ints())
    }
}

impl FqVector {
    pub fn zeros(field: &FieldSpec, n: usize) -> Self {
        Self { field: field.clone(), entries: vec![field.zero(); n] }
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn unit(field: &FieldSpec, n: usize, i: usize) -> Self {
        let mut v = Self::zeros(field, n);
        v.entries[i] = field.one();
        v
    }

    pub fn from_elements(field: &FieldSpec, entries: Vec<FieldElement>) -> Result<Self> {
        if entries.iter().any(|e| e.spec() != field) {
            return Err(QncError::FieldMismatch);
        }
        Ok(Self { field: field.clone(), entries })
    }

    pub fn from_ints(field: &FieldSpec, codes: &[u64]) -> Result<Self> {
        let entries = codes.iter().map(|&c| field.element(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self { field: field.clone(), entries })
    }

    pub fn to_ints(&self) -> Vec<u64> {
        self.entries.iter().map(FieldElement::to_int).collect()
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &FieldElement {
        &self.entries[i]
    }

    pub fn set(&mut self, i: usize, value: FieldElement) {
        self.entries[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(FieldElement::is_zero)
    }

    pub fn add(&self, other: &FqVector) -> FqVector {
        assert_eq!(self.len(), other.len());
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Self { field: self.field.clone(), entries }
    }

    pub fn sub(&self, other: &FqVector) -> FqVector {
        assert_eq!(self.len(), other.len());
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Self { field: self.field.clone(), entries }
    }

    pub fn scale(&self, c: &FieldElement) -> FqVector {
        let entries = self.entries.iter().map(|a| a * c).collect();
        Self { field: self.field.clone(), entries }
    }

    pub fn dot(&self, other: &FqVector) -> FieldElement {
        assert_eq!(self.len(), other.len());
        self.entries.iter().zip(&other.entries).fold(self.field.zero(), |acc, (a, b)| &acc + &(a * b))
    }

    /// `(self, other)` as one vector.
    pub fn concat(&self, other: &FqVector) -> FqVector {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self { field: self.field.clone(), entries }
    }

    pub fn slice(&self, start: usize, end: usize) -> FqVector {
        Self { field: self.field.clone(), entries: self.entries[start..end].to_vec() }
    }
}

/// Dense row-major matrix over `F_q`.
#[derive(Clone, PartialEq, Eq)]
pub struct FqMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_int_rows())
    }
}

impl FqMatrix {
    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Self { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_int_rows(field: &FieldSpec, rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(QncError::DimensionError("ragged matrix rows".into()));
        }
        let data = rows.iter().flatten().map(|&x| field.element(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { field: field.clone(), rows: r, cols: c, data })
    }

    /// Small-integer constructor; entries are reduced into the prime subfield.
    pub fn from_signed(field: &FieldSpec, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| field.from_int(x))).collect();
        Self { field: field.clone(), rows: r, cols: c, data }
    }

    pub fn to_int_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_int()).collect()).collect()
    }

    /// Matrix whose columns are `columns`, each of length `n`.
    pub fn from_columns(field: &FieldSpec, n: usize, columns: &[FqVector]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != n) {
            return Err(QncError::DimensionError(format!("columns must have length {n}")));
        }
        let mut m = Self::zeros(field, n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in 0..n {
                m.set(i, j, col.get(i).clone());
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
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

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: FieldElement) {
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> FqVector {
        FqVector { field: self.field.clone(), entries: (0..self.rows).map(|i| self.get(i, j).clone()).collect() }
    }

    pub fn columns(&self) -> Vec<FqVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> FqVector {
        FqVector { field: self.field.clone(), entries: self.data[i * self.cols..(i + 1) * self.cols].to_vec() }
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + &(a * other.get(k, j));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &FqVector) -> FqVector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let entries = (0..self.rows)
            .map(|i| (0..self.cols).fold(self.field.zero(), |acc, k| &acc + &(self.get(i, k) * v.get(k))))
            .collect();
        FqVector { field: self.field.clone(), entries }
    }

    pub fn add(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> FqMatrix {
        let data = self.data.iter().map(|a| -a).collect();
        Self { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| {
                let e = self.get(i, j);
                if i == j { e.is_one() } else { e.is_zero() }
            }))
    }

    /// `[[a, b], [c, d]]` from four blocks.
    pub fn block(a: &FqMatrix, b: &FqMatrix, c: &FqMatrix, d: &FqMatrix) -> FqMatrix {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let mut m = Self::zeros(&a.field, a.rows + c.rows, a.cols + b.cols);
        for (blk, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    m.set(r0 + i, c0 + j, blk.get(i, j).clone());
                }
            }
        }
        m
    }

    pub fn block_diag(a: &FqMatrix, d: &FqMatrix) -> FqMatrix {
        let b = Self::zeros(&a.field, a.rows, d.cols);
        let c = Self::zeros(&a.field, d.rows, a.cols);
        Self::block(a, &b, &c, d)
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> FqMatrix {
        let mut m = Self::zeros(&self.field, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        m
    }

    /// Reduced row echelon form with first-nonzero pivoting; returns the
    /// reduced matrix and the pivot columns.
    pub fn rref(&self) -> (FqMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if pr != row {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, row * m.cols + j);
                }
            }
            let inv = m.get(row, col).inv().expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(r, j) - &(&factor * m.get(row, j));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space `{x : M x = 0}`, one vector per free
    /// column in increasing order.
    pub fn kernel_basis(&self) -> Vec<FqVector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = FqVector::zeros(&self.field, self.cols);
                v.set(f, self.field.one());
                for (row, &pc) in pivots.iter().enumerate() {
                    v.set(pc, -r.get(row, f));
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<FqMatrix> {
        if !self.is_square() {
            return Err(QncError::DimensionError("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::block(self, &Self::identity(&self.field, n), &Self::zeros(&self.field, 0, n), &Self::zeros(&self.field, 0, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(QncError::SingularMatrix);
        }
        Ok(r.submatrix(0, n, n, 2 * n))
    }

    /// One solution of `M x = b` (free variables set to zero), if any.
    pub fn solve(&self, b: &FqVector) -> Option<FqVector> {
        assert_eq!(b.len(), self.rows);
        let bm = Self::from_columns(&self.field, self.rows, std::slice::from_ref(b)).expect("length checked");
        let aug = Self::block(self, &bm, &Self::zeros(&self.field, 0, self.cols), &Self::zeros(&self.field, 0, 1));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = FqVector::zeros(&self.field, self.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            x.set(pc, r.get(row, self.cols).clone());
        }
        Some(x)
    }
}

pub fn rank(m: &FqMatrix) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &FqMatrix) -> Vec<FqVector> {
    m.kernel_basis()
}

pub fn inverse(m: &FqMatrix) -> Result<FqMatrix> {
    m.inverse()
}

/// Rank of a list of vectors of common length `n`.
pub fn span_rank(field: &FieldSpec, n: usize, vectors: &[FqVector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    FqMatrix::from_columns(field, n, vectors).map(|m| m.rank()).unwrap_or(0)
}

/// Greedy maximal independent subset, preserving order.
pub fn independent_subset(field: &FieldSpec, n: usize, vectors: &[FqVector]) -> Vec<FqVector> {
    let mut chosen: Vec<FqVector> = Vec::new();
    for v in vectors {
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if span_rank(field, n, &trial) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

/// Extends `vectors` by standard basis vectors, in index order, until the
/// ambient space `F_q^n` is spanned. Returns only the added vectors.
pub fn greedy_complement(field: &FieldSpec, n: usize, vectors: &[FqVector]) -> Vec<FqVector> {
    extend_within(field, n, vectors, &(0..n).map(|i| FqVector::unit(field, n, i)).collect::<Vec<_>>())
}

/// Adds vectors from `candidates`, in order, that are independent of
/// `vectors` and of each other.
pub fn extend_within(field: &FieldSpec, n: usize, vectors: &[FqVector], candidates: &[FqVector]) -> Vec<FqVector> {
    let mut all = vectors.to_vec();
    let mut added = Vec::new();
    let mut r = span_rank(field, n, &all);
    for c in candidates {
        all.push(c.clone());
        let nr = span_rank(field, n, &all);
        if nr > r {
            r = nr;
            added.push(c.clone());
        } else {
            all.pop();
        }
    }
    added
}

/// Coefficients of `v` in the basis `basis` (which must be independent),
/// or `None` if `v` is outside the span.
pub fn coordinates(field: &FieldSpec, basis: &[FqVector], v: &FqVector) -> Option<Vec<FieldElement>> {
    if basis.is_empty() {
        return if v.is_zero() { Some(Vec::new()) } else { None };
    }
    let m = FqMatrix::from_columns(field, v.len(), basis).ok()?;
    m.solve(v).map(|x| x.entries().to_vec())
}

pub fn in_span(field: &FieldSpec, basis: &[FqVector], v: &FqVector) -> bool {
    coordinates(field, basis, v).is_some()
}

/// Splits `v = a + b` along the direct sum `span(first) + span(second)`.
pub fn decompose(field: &FieldSpec, first: &[FqVector], second: &[FqVector], v: &FqVector) -> Result<(FqVector, FqVector)> {
    let mut basis = first.to_vec();
    basis.extend(second.iter().cloned());
    let c = coordinates(field, &basis, v).ok_or_else(|| QncError::DimensionError("vector outside the direct sum".into()))?;
    let combine = |vs: &[FqVector], cs: &[FieldElement]| {
        vs.iter().zip(cs).fold(FqVector::zeros(field, v.len()), |acc, (b, x)| acc.add(&b.scale(x)))
    };
    Ok((combine(first, &c[..first.len()]), combine(second, &c[first.len()..])))
}

/// Basis of `span(a) ∩ span(b)`; both inputs must be independent lists.
pub fn intersection(field: &FieldSpec, n: usize, a: &[FqVector], b: &[FqVector]) -> Vec<FqVector> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve A x = B y; the intersection is { A x }.
    let neg_b: Vec<FqVector> = b.iter().map(|v| v.scale(&-field.one())).collect();
    let mut cols = a.to_vec();
    cols.extend(neg_b);
    let m = FqMatrix::from_columns(field, n, &cols).expect("lengths match");
    let vs: Vec<FqVector> = m
        .kernel_basis()
        .into_iter()
        .map(|k| a.iter().enumerate().fold(FqVector::zeros(field, n), |acc, (i, v)| acc.add(&v.scale(k.get(i)))))
        .collect();
    independent_subset(field, n, &vs)
}

/// Idempotent `P` with image `span` and kernel the complement: `hint` if
/// given, otherwise the greedy standard-basis completion.
pub fn projection_onto(field: &FieldSpec, n: usize, span: &[FqVector], complement_hint: Option<&[FqVector]>) -> Result<FqMatrix> {
    if span.iter().any(|v| v.len() != n) {
        return Err(QncError::DimensionError(format!("span vectors must have length {n}")));
    }
    if span_rank(field, n, span) != span.len() {
        return Err(QncError::DegenerateSpan);
    }
    let complement = match complement_hint {
        Some(h) => h.to_vec(),
        None => greedy_complement(field, n, span),
    };
    let mut basis = span.to_vec();
    basis.extend(complement);
    if basis.len() != n || span_rank(field, n, &basis) != n {
        return Err(QncError::DegenerateSpan);
    }
    let b = FqMatrix::from_columns(field, n, &basis)?;
    let mut d = FqMatrix::zeros(field, n, n);
    for i in 0..span.len() {
        d.set(i, i, field.one());
    }
    Ok(b.mul(&d).mul(&b.inverse()?))
}
