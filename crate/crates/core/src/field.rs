//! Arithmetic in `F_q = F_p[x]/(f)` with elements kept as coefficient vectors.
//!
//! Elements are encoded to integers little-endian in base `p`:
//! `c_0 + c_1 p + ... + c_{d-1} p^{d-1}`. This encoding is what the
//! config and report formats use.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{QncError, Result};

/// Conway polynomials for the fields shipped by default, as
/// `(p, [c_0, ..., c_d])` with `c_d = 1`.
const BUILTIN_MODULI: &[(u32, &[u32])] = &[
    (2, &[1, 1]),
    (2, &[1, 1, 1]),
    (2, &[1, 1, 0, 1]),
    (3, &[1, 1]),
    (3, &[2, 2, 1]),
    (3, &[1, 2, 0, 1]),
    (5, &[3, 1]),
    (5, &[2, 4, 1]),
    (5, &[3, 3, 0, 1]),
];

#[derive(Debug, PartialEq, Eq, Hash)]
struct FieldInner {
    p: u32,
    degree: usize,
    modulus: Vec<u32>,
}

/// A finite field `F_{p^d}` described by a monic irreducible modulus.
///
/// Cloning is cheap; all elements of one field share the same handle.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<FieldInner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; {:?})", self.p(), self.degree(), self.inner.modulus)
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p`.
fn poly_rem(mut a: Vec<u32>, m: &[u32], p: u32) -> Vec<u32> {
    let d = m.len() - 1;
    while a.len() > d {
        let top = a.pop().unwrap();
        if top != 0 {
            let base = a.len() - d;
            for k in 0..d {
                let sub = (top as u64 * m[k] as u64 % p as u64) as u32;
                a[base + k] = (a[base + k] + p - sub) % p;
            }
        }
    }
    a
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let d = modulus.len() - 1;
    if d == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=d/2.
    for k in 1..=d / 2 {
        let count = (p as u64).pow(k as u32);
        for code in 0..count {
            let mut divisor = Vec::with_capacity(k + 1);
            let mut c = code;
            for _ in 0..k {
                divisor.push((c % p as u64) as u32);
                c /= p as u64;
            }
            divisor.push(1);
            if poly_rem(modulus.to_vec(), &divisor, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Builds `F_p[x]/(modulus)`; `modulus` is `[c_0, ..., c_d]` with `c_d = 1`.
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(QncError::InvalidField(format!("{p} is not prime")));
        }
        if modulus.len() < 2 {
            return Err(QncError::InvalidField("modulus must have degree >= 1".into()));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(QncError::InvalidField("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(QncError::InvalidField(format!("modulus coefficients must lie in [0, {p})")));
        }
        let degree = modulus.len() - 1;
        let trial_cost = (p as f64).powi((degree / 2) as i32);
        if trial_cost > 1e7 {
            return Err(QncError::InvalidField("field too large for exhaustive irreducibility test".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(QncError::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        Ok(Self { inner: Arc::new(FieldInner { p, degree, modulus }) })
    }

    /// The default representation of `F_{p^degree}`: the built-in table for
    /// `p in {2,3,5}, degree <= 3`, otherwise the lexicographically smallest
    /// monic irreducible polynomial.
    pub fn standard(p: u32, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(QncError::InvalidField("degree must be >= 1".into()));
        }
        if let Some((_, m)) = BUILTIN_MODULI.iter().find(|(bp, m)| *bp == p && m.len() == degree + 1) {
            return Self::new(p, m.to_vec());
        }
        if !is_prime(p) {
            return Err(QncError::InvalidField(format!("{p} is not prime")));
        }
        let count = (p as u64).checked_pow(degree as u32).filter(|&c| c <= 1 << 20).ok_or_else(|| {
            QncError::InvalidField("field too large for modulus search".into())
        })?;
        for code in 0..count {
            let mut m = Vec::with_capacity(degree + 1);
            let mut c = code;
            for _ in 0..degree {
                m.push((c % p as u64) as u32);
                c /= p as u64;
            }
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::new(p, m);
            }
        }
        Err(QncError::InvalidField(format!("no irreducible polynomial of degree {degree} over F_{p}")))
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::standard(p, 1)
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    /// `q = p^degree`.
    pub fn order(&self) -> usize {
        (self.inner.p as usize).pow(self.inner.degree as u32)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.degree()], spec: self.clone() }
    }

    pub fn one(&self) -> FieldElement {
        let mut z = self.zero();
        z.coeffs[0] = 1;
        z
    }

    /// The element with integer encoding `code`.
    pub fn element(&self, code: u64) -> Result<FieldElement> {
        if code >= self.order() as u64 {
            return Err(QncError::InvalidField(format!("element code {code} out of range for q = {}", self.order())));
        }
        let p = self.p() as u64;
        let mut c = code;
        let coeffs = (0..self.degree())
            .map(|_| {
                let r = (c % p) as u32;
                c /= p;
                r
            })
            .collect();
        Ok(FieldElement { coeffs, spec: self.clone() })
    }

    /// Element of the prime subfield, `n mod p`.
    pub fn from_int(&self, n: i64) -> FieldElement {
        let p = self.p() as i64;
        let mut z = self.zero();
        z.coeffs[0] = n.rem_euclid(p) as u32;
        z
    }

    pub fn from_coeffs(&self, coeffs: Vec<u32>) -> Result<FieldElement> {
        if coeffs.len() != self.degree() || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(QncError::InvalidField(format!("bad coefficient vector {coeffs:?}")));
        }
        Ok(FieldElement { coeffs, spec: self.clone() })
    }

    /// All `q` elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order() as u64).map(move |c| self.element(c).expect("code in range"))
    }

    /// The generator `x^k` of the `F_p`-basis `{1, x, ..., x^{d-1}}`.
    pub fn basis_element(&self, k: usize) -> FieldElement {
        let mut z = self.zero();
        z.coeffs[k] = 1;
        z
    }
}

/// Arithmetic operations exposed with explicit error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    coeffs: Vec<u32>,
    spec: FieldSpec,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_int())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_int())
    }
}

/// `d x d` matrix over `F_p`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u32,
    pub n: usize,
    pub data: Vec<u32>,
}

impl FpMatrix {
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.n + c]
    }

    pub fn trace(&self) -> u32 {
        (0..self.n).fold(0, |acc, i| (acc + self.get(i, i)) % self.p)
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        let n = self.n;
        let mut data = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                }
                data[i * n + j] = (acc % self.p as u64) as u32;
            }
        }
        FpMatrix { p: self.p, n, data }
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        (0..self.n)
            .map(|i| {
                let acc: u64 = (0..self.n).map(|k| self.get(i, k) as u64 * v[k] as u64).sum();
                (acc % self.p as u64) as u32
            })
            .collect()
    }
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn to_int(&self) -> u64 {
        let p = self.spec.p() as u64;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(QncError::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let p = self.spec.p();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + b) % p).collect();
        Ok(FieldElement { coeffs, spec: self.spec.clone() })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let p = self.spec.p();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + p - b) % p).collect();
        Ok(FieldElement { coeffs, spec: self.spec.clone() })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let p = self.spec.p() as u64;
        let d = self.spec.degree();
        let mut prod = vec![0u32; 2 * d - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + a as u64 * b as u64) % p) as u32;
            }
        }
        let coeffs = poly_rem(prod, self.spec.modulus(), p as u32);
        Ok(FieldElement { coeffs, spec: self.spec.clone() })
    }

    pub fn neg(&self) -> FieldElement {
        let p = self.spec.p();
        let coeffs = self.coeffs.iter().map(|&a| (p - a) % p).collect();
        FieldElement { coeffs, spec: self.spec.clone() }
    }

    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.spec.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^{q-2}`.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(QncError::DivisionByZero);
        }
        Ok(self.pow(self.spec.order() as u64 - 2))
    }

    /// Binary/unary arithmetic with field-mismatch and zero-division checks.
    /// `Inv` and `Neg` ignore `other` apart from the field check.
    pub fn arith(&self, other: &FieldElement, op: ArithOp) -> Result<FieldElement> {
        match op {
            ArithOp::Add => self.checked_add(other),
            ArithOp::Sub => self.checked_sub(other),
            ArithOp::Mul => self.checked_mul(other),
            ArithOp::Inv => {
                self.check(other)?;
                self.inv()
            }
            ArithOp::Neg => {
                self.check(other)?;
                Ok(self.neg())
            }
        }
    }

    /// Matrix of `x -> z x` on `F_p^d` in the basis `{1, x, ..., x^{d-1}}`:
    /// column `k` holds the coefficients of `z x^k`.
    pub fn mul_matrix_rep(&self) -> FpMatrix {
        let d = self.spec.degree();
        let mut data = vec![0u32; d * d];
        for k in 0..d {
            let col = self * &self.spec.basis_element(k);
            for (r, &c) in col.coeffs.iter().enumerate() {
                data[r * d + k] = c;
            }
        }
        FpMatrix { p: self.spec.p(), n: d, data }
    }

    /// `tr z = Tr M_z`, an element of `F_p`.
    pub fn trace(&self) -> u32 {
        self.mul_matrix_rep().trace()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field mismatch")
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$checked(&rhs).expect("field mismatch")
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$checked(rhs).expect("field mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Div<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: &FieldElement) -> FieldElement {
        self.checked_mul(&rhs.inv().expect("division by zero")).expect("operands from the same field")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}
