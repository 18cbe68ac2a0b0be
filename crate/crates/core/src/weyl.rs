//! Weyl operators `W(s,t) = X(s) Z(t)` on `q^n` dimensions, Fourier states,
//! basis-linear unitaries and synthesis of `U(g)` for symplectic `g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{digits_of, flat_index, is_unitary, CMat, CVec, ONE, ZERO};
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::{FqMatrix, FqVector};
use crate::symplectic::{is_symplectic, SymplecticContext};

/// Exhaustive checks of the intertwining relation run up to this dimension.
pub const EXHAUSTIVE_DIM: usize = 81;

const TOL: f64 = 1e-9;

/// A dense operator; unitarity is checked on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    entries: CMat,
}

impl DenseOperator {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() {
            return Err(QncError::DimensionError(format!("operator of shape {:?}", entries.shape())));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMat::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn is_unitary(&self) -> bool {
        is_unitary(&self.entries, 1e-10)
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn compose(&self, other: &DenseOperator) -> Self {
        Self { entries: &self.entries * &other.entries }
    }

    /// Row-major `(re, im)` pairs.
    pub fn to_flat(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d * d);
        for r in 0..d {
            for c in 0..d {
                let z = self.entries[(r, c)];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }
}

/// Label `(s, t)` of `W(s,t)` on `n` registers.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylLabel {
    pub s: FqVector,
    pub t: FqVector,
}

impl WeylLabel {
    pub fn new(s: FqVector, t: FqVector) -> Result<Self> {
        if s.len() != t.len() || s.field() != t.field() {
            return Err(QncError::DimensionError("label halves differ in length or field".into()));
        }
        Ok(Self { s, t })
    }

    pub fn from_vector(v: &FqVector) -> Result<Self> {
        if v.len() % 2 == 1 {
            return Err(QncError::DimensionError(format!("odd label length {}", v.len())));
        }
        let n = v.len() / 2;
        Ok(Self { s: v.slice(0, n), t: v.slice(n, 2 * n) })
    }

    pub fn to_vector(&self) -> FqVector {
        self.s.concat(&self.t)
    }

    pub fn registers(&self) -> usize {
        self.s.len()
    }
}

/// Addition, multiplication and trace tables of `F_q` on element codes.
#[derive(Debug, Clone)]
pub struct FieldTables {
    pub q: usize,
    pub p: u32,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    tr: Vec<u32>,
}

impl FieldTables {
    pub fn new(field: &FieldSpec) -> Self {
        let q = field.order();
        let els: Vec<_> = field.elements().collect();
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = (&els[a] + &els[b]).to_int() as u32;
                mul[a * q + b] = (&els[a] * &els[b]).to_int() as u32;
            }
        }
        let neg = els.iter().map(|e| e.neg().to_int() as u32).collect();
        let tr = els.iter().map(|e| e.trace()).collect();
        Self { q, p: field.p(), add, mul, neg, tr }
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.q + b as usize]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.q + b as usize]
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    pub fn trace(&self, a: u32) -> u32 {
        self.tr[a as usize]
    }

    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// `g a` with `g` given by rows of codes.
    pub fn mat_vec(&self, g: &[Vec<u32>], a: &[u32]) -> Vec<u32> {
        g.iter().map(|row| self.dot(row, a)).collect()
    }
}

/// A monomial operator `|x> -> phase[x] |perm[x]>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Self {
        Self { perm: (0..dim).collect(), phase: vec![ONE; dim] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `self * other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let perm = other.perm.iter().map(|&y| self.perm[y]).collect();
        let phase = other.phase.iter().zip(&other.perm).map(|(ph, &y)| ph * self.phase[y]).collect();
        Monomial { perm, phase }
    }

    pub fn scaled(&self, c: Complex64) -> Monomial {
        Monomial { perm: self.perm.clone(), phase: self.phase.iter().map(|z| z * c).collect() }
    }

    pub fn pow(&self, e: u32) -> Monomial {
        (0..e).fold(Monomial::identity(self.dim()), |acc, _| self.compose(&acc))
    }

    /// `Some(c)` if the operator equals `c I`.
    pub fn scalar(&self) -> Option<Complex64> {
        let c = self.phase[0];
        let ok = self.perm.iter().enumerate().all(|(x, &y)| x == y) && self.phase.iter().all(|z| (z - c).norm() < 1e-12);
        ok.then_some(c)
    }

    pub fn apply_basis(&self, x: usize) -> (usize, Complex64) {
        (self.perm[x], self.phase[x])
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (x, (&y, &ph)) in self.perm.iter().zip(&self.phase).enumerate() {
            m[(y, x)] = ph;
        }
        m
    }

    /// `Tr(self^† m)`.
    pub fn overlap(&self, m: &CMat) -> Complex64 {
        self.perm.iter().zip(&self.phase).enumerate().map(|(x, (&y, ph))| ph.conj() * m[(y, x)]).sum()
    }
}

/// Weyl operators on `n` registers of dimension `q`, with labels encoded as
/// code vectors `(s_1..s_n, t_1..t_n)`.
#[derive(Debug, Clone)]
pub struct WeylSpace {
    pub tables: FieldTables,
    pub n: usize,
    dims: Vec<usize>,
    omega: Vec<Complex64>,
}

impl WeylSpace {
    pub fn new(field: &FieldSpec, n: usize) -> Self {
        let tables = FieldTables::new(field);
        let p = tables.p;
        let omega = (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect();
        Self { dims: vec![tables.q; n], tables, n, omega }
    }

    pub fn dim(&self) -> usize {
        self.tables.q.pow(self.n as u32)
    }

    pub fn label_count(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn omega_pow(&self, k: u32) -> Complex64 {
        self.omega[(k % self.tables.p) as usize]
    }

    pub fn label_codes(&self, index: usize) -> Vec<u32> {
        digits_of(index, &vec![self.tables.q; 2 * self.n]).into_iter().map(|d| d as u32).collect()
    }

    pub fn label_index(&self, codes: &[u32]) -> usize {
        let digits: Vec<usize> = codes.iter().map(|&c| c as usize).collect();
        flat_index(&digits, &vec![self.tables.q; 2 * self.n])
    }

    pub fn basis_digits(&self, x: usize) -> Vec<u32> {
        digits_of(x, &self.dims).into_iter().map(|d| d as u32).collect()
    }

    pub fn basis_index(&self, digits: &[u32]) -> usize {
        let d: Vec<usize> = digits.iter().map(|&c| c as usize).collect();
        flat_index(&d, &self.dims)
    }

    /// `W(s,t) |x> = ω^{tr(t.x)} |x + s>`.
    pub fn monomial(&self, label: &[u32]) -> Monomial {
        assert_eq!(label.len(), 2 * self.n);
        let (s, t) = label.split_at(self.n);
        let d = self.dim();
        let mut perm = Vec::with_capacity(d);
        let mut phase = Vec::with_capacity(d);
        for x in 0..d {
            let xd = self.basis_digits(x);
            let shifted: Vec<u32> = xd.iter().zip(s).map(|(&a, &b)| self.tables.add(a, b)).collect();
            perm.push(self.basis_index(&shifted));
            phase.push(self.omega_pow(self.tables.trace(self.tables.dot(t, &xd))));
        }
        Monomial { perm, phase }
    }

    /// `tr(u^T J v)` on code vectors.
    pub fn pairing(&self, u: &[u32], v: &[u32]) -> u32 {
        let n = self.n;
        let t = &self.tables;
        let a = t.dot(&u[n..], &v[..n]);
        let b = t.dot(&u[..n], &v[n..]);
        t.trace(t.add(a, t.neg(b)))
    }

    /// `|x> -> |g x>` for an invertible `g` given by code rows.
    pub fn linear_permutation(&self, g: &[Vec<u32>]) -> Monomial {
        let d = self.dim();
        let perm = (0..d).map(|x| self.basis_index(&self.tables.mat_vec(g, &self.basis_digits(x)))).collect();
        Monomial { perm, phase: vec![ONE; d] }
    }
}

fn codes_of_matrix(g: &FqMatrix) -> Vec<Vec<u32>> {
    g.to_int_rows().into_iter().map(|r| r.into_iter().map(|c| c as u32).collect()).collect()
}

fn codes_of_vector(v: &FqVector) -> Vec<u32> {
    v.to_ints().into_iter().map(|c| c as u32).collect()
}

pub fn weyl(label: &WeylLabel) -> DenseOperator {
    let ws = WeylSpace::new(label.s.field(), label.registers());
    DenseOperator { entries: ws.monomial(&codes_of_vector(&label.to_vector())).to_dense() }
}

/// `|y>_F = q^{-n/2} Σ_x ω^{tr(x.y)} |x>`.
pub fn fourier_state(y: &FqVector) -> CVec {
    let ws = WeylSpace::new(y.field(), y.len());
    let yc = codes_of_vector(y);
    let d = ws.dim();
    let norm = 1.0 / (d as f64).sqrt();
    CVec::from_fn(d, |x, _| ws.omega_pow(ws.tables.trace(ws.tables.dot(&ws.basis_digits(x), &yc))) * norm)
}

/// `Ū(ḡ)|x> = |ḡ x>`.
pub fn basis_linear_unitary(g: &FqMatrix) -> Result<DenseOperator> {
    if !g.is_square() {
        return Err(QncError::DimensionError("basis-linear map must be square".into()));
    }
    g.inverse()?;
    let ws = WeylSpace::new(g.field(), g.rows());
    Ok(DenseOperator { entries: ws.linear_permutation(&codes_of_matrix(g)).to_dense() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaplecticCertificate {
    /// `c_k` for the generator labels `β_j e_i`, in generator order.
    pub generator_phases: Vec<(f64, f64)>,
    /// Largest `| |c| - 1 |` seen over checked labels.
    pub max_phase_error: f64,
    /// Largest entrywise deviation of `U W(a) - c W(g a) U`.
    pub max_deviation: f64,
    pub labels_checked: usize,
    pub exhaustive: bool,
}

struct Generator {
    source: Monomial,
    image: Monomial,
}

/// Synthesizes `U(g)` with `U W(a) U^† = c_a W(g a)` by twirling a matrix
/// unit over the Heisenberg group.
pub fn metaplectic(g: &FqMatrix, ctx: &SymplecticContext) -> Result<(DenseOperator, MetaplecticCertificate)> {
    if !is_symplectic(g, ctx) {
        return Err(QncError::NotSymplectic);
    }
    let field = ctx.field();
    let n = ctx.m0();
    let ws = WeylSpace::new(field, n);
    let gc = codes_of_matrix(g);
    let d = ws.dim();
    let p = field.p();

    let mut gens = Vec::new();
    let mut generator_phases = Vec::new();
    for pos in 0..2 * n {
        for j in 0..field.degree() {
            let mut b = vec![0u32; 2 * n];
            b[pos] = field.basis_element(j).to_int() as u32;
            let source = ws.monomial(&b);
            let image = ws.monomial(&ws.tables.mat_vec(&gc, &b));
            let lambda = source.pow(p).scalar().ok_or_else(|| QncError::SynthesisFailed("W(b)^p is not scalar".into()))?;
            let mu = image.pow(p).scalar().ok_or_else(|| QncError::SynthesisFailed("W(gb)^p is not scalar".into()))?;
            let ratio = lambda / mu;
            let c = Complex64::from_polar(1.0, ratio.arg() / p as f64);
            generator_phases.push((c.re, c.im));
            gens.push(Generator { source, image: image.scaled(c) });
        }
    }

    let k = gens.len();
    let mut best: Option<(f64, CMat)> = None;
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        let mut digits = vec![0u32; k];
        loop {
            let (mut y, mut phi) = (i, ONE);
            let (mut z, mut psi) = (0usize, ONE);
            for idx in (0..k).rev() {
                for _ in 0..digits[idx] {
                    let (ny, ph) = gens[idx].image.apply_basis(y);
                    y = ny;
                    phi *= ph;
                    let (nz, ps) = gens[idx].source.apply_basis(z);
                    z = nz;
                    psi *= ps;
                }
            }
            m[(y, z)] += phi * psi.conj();
            let mut pos = 0;
            while pos < k {
                digits[pos] += 1;
                if digits[pos] < p {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
        let norm = m.norm();
        if best.as_ref().is_none_or(|(b, _)| norm > *b) {
            best = Some((norm, m));
        }
        if norm >= 0.5 * d as f64 {
            break;
        }
    }
    let (norm, m) = best.expect("dimension is positive");
    if norm < 1e-6 {
        return Err(QncError::SynthesisFailed("twirled operator vanished".into()));
    }
    let mut u = m * Complex64::new((d as f64).sqrt() / norm, 0.0);
    normalize_phase(&mut u);
    if !is_unitary(&u, TOL) {
        return Err(QncError::SynthesisFailed("twirled operator is not unitary".into()));
    }

    let exhaustive = d <= EXHAUSTIVE_DIM;
    let labels: Vec<Vec<u32>> = if exhaustive {
        (0..ws.label_count()).map(|a| ws.label_codes(a)).collect()
    } else {
        let mut ls = Vec::new();
        for pos in 0..2 * n {
            for j in 0..field.degree() {
                let mut b = vec![0u32; 2 * n];
                b[pos] = field.basis_element(j).to_int() as u32;
                ls.push(b);
            }
        }
        ls
    };
    let (max_deviation, max_phase_error) = labels
        .par_iter()
        .map(|a| {
            let wa = ws.monomial(a);
            let wga = ws.monomial(&ws.tables.mat_vec(&gc, a));
            intertwining_error(&u, &wa, &wga)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    if max_deviation > TOL || max_phase_error > TOL {
        return Err(QncError::SynthesisFailed(format!(
            "intertwining deviation {max_deviation:e}, phase error {max_phase_error:e}"
        )));
    }
    let cert = MetaplecticCertificate {
        generator_phases,
        max_phase_error,
        max_deviation,
        labels_checked: labels.len(),
        exhaustive,
    };
    Ok((DenseOperator { entries: u }, cert))
}

/// `(max |U W - c W' U|, | |c| - 1 |)` for the best-fitting `c`.
pub fn intertwining_error(u: &CMat, w: &Monomial, w_image: &Monomial) -> (f64, f64) {
    let d = u.nrows();
    let mut left = CMat::zeros(d, d);
    let mut right = CMat::zeros(d, d);
    for x in 0..d {
        let (px, ph) = w.apply_basis(x);
        for r in 0..d {
            left[(r, x)] = u[(r, px)] * ph;
        }
        let (py, ph2) = w_image.apply_basis(x);
        for c in 0..d {
            right[(py, c)] = u[(x, c)] * ph2;
        }
    }
    let c: Complex64 = right.iter().zip(left.iter()).map(|(r, l)| r.conj() * l).sum::<Complex64>() / d as f64;
    let dev = left.iter().zip(right.iter()).map(|(l, r)| (l - c * r).norm()).fold(0.0, f64::max);
    (dev, (c.norm() - 1.0).abs())
}

/// Rotates the global phase so the largest-magnitude entry (first in
/// row-major order on ties) is real and positive.
pub fn normalize_phase(u: &mut CMat) {
    let max = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (rows, cols) = u.shape();
    let mut pick = ZERO;
    'outer: for r in 0..rows {
        for c in 0..cols {
            if u[(r, c)].norm() > max - 1e-9 {
                pick = u[(r, c)];
                break 'outer;
            }
        }
    }
    if pick.norm() > 0.0 {
        let rot = pick.conj() / pick.norm();
        u.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Aligns `b` to `a` by the best global phase and returns the remaining
/// entrywise distance.
pub fn distance_up_to_phase(a: &CMat, b: &CMat) -> f64 {
    let ip: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let rot = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    a.iter().zip(b.iter()).map(|(x, y)| (x - y * rot).norm()).fold(0.0, f64::max)
}
