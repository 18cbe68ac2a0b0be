//! The alternating form `u^T J v` on `F_q^{2 m0}`, symplectic bases, and
//! the construction of the encoding basis `w_1..w_m0, w'_1..w'_m0`.
//!
//! Vectors are laid out as `(s, t)` with `s` the shift (X) part and `t` the
//! phase (Z) part; `J = [[0, -I], [I, 0]]`.

use rand::Rng;

use crate::error::{QncError, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{
    decompose, extend_within, independent_subset, intersection, projection_onto, span_rank, FqMatrix, FqVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticContext {
    m0: usize,
    field: FieldSpec,
    j: FqMatrix,
}

impl SymplecticContext {
    pub fn new(field: &FieldSpec, m0: usize) -> Self {
        let z = FqMatrix::zeros(field, m0, m0);
        let i = FqMatrix::identity(field, m0);
        let j = FqMatrix::block(&z, &i.neg(), &i, &z);
        Self { m0, field: field.clone(), j }
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn dim(&self) -> usize {
        2 * self.m0
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn j(&self) -> &FqMatrix {
        &self.j
    }

    /// `e_i` in `F_q^{2 m0}`, 0-based.
    pub fn unit(&self, i: usize) -> FqVector {
        FqVector::unit(&self.field, self.dim(), i)
    }

    fn check_len(&self, v: &FqVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(QncError::DimensionError(format!("expected length {}, got {}", self.dim(), v.len())));
        }
        Ok(())
    }
}

/// `u^T J v = t_u . s_v - s_u . t_v` over `F_q`.
pub fn fq_form(u: &FqVector, v: &FqVector, ctx: &SymplecticContext) -> Result<FieldElement> {
    ctx.check_len(u)?;
    ctx.check_len(v)?;
    Ok(form(u, v, ctx.m0))
}

fn form(u: &FqVector, v: &FqVector, m0: usize) -> FieldElement {
    let f = u.field();
    let mut acc = f.zero();
    for i in 0..m0 {
        acc = &acc + &(u.get(m0 + i) * v.get(i));
        acc = &acc - &(u.get(i) * v.get(m0 + i));
    }
    acc
}

/// The `F_p`-valued pairing `tr(u^T J v)`; this is the exponent in the Weyl
/// commutation relation.
pub fn fp_pairing(u: &FqVector, v: &FqVector, ctx: &SymplecticContext) -> Result<u32> {
    Ok(fq_form(u, v, ctx)?.trace())
}

/// `g^T J g == J` over `F_q`.
pub fn is_symplectic(g: &FqMatrix, ctx: &SymplecticContext) -> bool {
    g.rows() == ctx.dim() && g.cols() == ctx.dim() && g.transpose().mul(&ctx.j).mul(g) == ctx.j
}

/// `true` iff `(w, w')` satisfy `Q(w'_i, w_j) = δ_ij`, `Q(w_i, w_j) = Q(w'_i, w'_j) = 0`.
pub fn is_hyperbolic_basis(w: &[FqVector], w_prime: &[FqVector], ctx: &SymplecticContext) -> bool {
    if w.len() != w_prime.len() {
        return false;
    }
    let one = ctx.field.one();
    for i in 0..w.len() {
        for j in 0..w.len() {
            let d = form(&w_prime[i], &w[j], ctx.m0);
            if (i == j && d != one) || (i != j && !d.is_zero()) {
                return false;
            }
            if !form(&w[i], &w[j], ctx.m0).is_zero() || !form(&w_prime[i], &w_prime[j], ctx.m0).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Vectors `x` in `span(basis)` with `Q(y, x) = 0` for every `y` in `against`.
fn form_complement_within(basis: &[FqVector], against: &[FqVector], ctx: &SymplecticContext) -> Vec<FqVector> {
    if against.is_empty() {
        return basis.to_vec();
    }
    let f = &ctx.field;
    let mut cons = FqMatrix::zeros(f, against.len(), basis.len());
    for (r, y) in against.iter().enumerate() {
        for (c, b) in basis.iter().enumerate() {
            cons.set(r, c, form(y, b, ctx.m0));
        }
    }
    cons.kernel_basis()
        .into_iter()
        .map(|k| basis.iter().enumerate().fold(FqVector::zeros(f, ctx.dim()), |acc, (i, b)| acc.add(&b.scale(k.get(i)))))
        .collect()
}

/// Inductive symplectic diagonalization of the form restricted to
/// `span(vectors)`: returns `(w, w')` with `Q(w'_i, w_j) = δ_ij` and
/// `Q(w_i, w_j) = Q(w'_i, w'_j) = 0`.
pub fn lc1_diagonalize(vectors: &[FqVector], ctx: &SymplecticContext) -> Result<(Vec<FqVector>, Vec<FqVector>)> {
    for v in vectors {
        ctx.check_len(v)?;
    }
    let f = &ctx.field;
    let n = ctx.dim();
    let basis = independent_subset(f, n, vectors);
    if basis.len() % 2 == 1 {
        return Err(QncError::DegenerateForm);
    }
    let mut ws: Vec<FqVector> = Vec::new();
    let mut wps: Vec<FqVector> = Vec::new();
    while 2 * ws.len() < basis.len() {
        let chosen: Vec<FqVector> = ws.iter().chain(wps.iter()).cloned().collect();
        let rest = independent_subset(f, n, &form_complement_within(&basis, &chosen, ctx));
        let w = rest.first().cloned().ok_or(QncError::DegenerateForm)?;
        let (b, val) = basis
            .iter()
            .map(|b| (b, form(b, &w, ctx.m0)))
            .find(|(_, val)| !val.is_zero())
            .ok_or(QncError::DegenerateForm)?;
        let v = b.scale(&val.inv()?);
        let (_, w_prime) = decompose(f, &chosen, &rest, &v).map_err(|_| QncError::DegenerateForm)?;
        ws.push(w);
        wps.push(w_prime);
    }
    debug_assert!(is_hyperbolic_basis(&ws, &wps, ctx));
    Ok((ws, wps))
}

/// `m_*` and `m_**` of a subspace: `rank(P^T J P) = 2 m_*` for a projection
/// `P` onto it, `m_** = dim - m_*`.
pub fn compute_invariants(v_basis: &[FqVector], ctx: &SymplecticContext, m1: Option<usize>) -> Result<(usize, usize)> {
    let basis = independent_subset(&ctx.field, ctx.dim(), v_basis);
    let (m_star, m_star_star) = invariants_with(&basis, None, ctx)?;
    if m_star < 1 {
        return Err(QncError::InvariantViolation(format!("m_* = {m_star} < 1")));
    }
    if m_star_star < m_star {
        return Err(QncError::InvariantViolation(format!("m_** = {m_star_star} < m_* = {m_star}")));
    }
    if let Some(m1) = m1 {
        if m_star_star + 1 > 2 * m1 {
            return Err(QncError::InvariantViolation(format!("m_** = {m_star_star} > 2 m1 - 1 = {}", 2 * m1 - 1)));
        }
    }
    Ok((m_star, m_star_star))
}

/// Invariants computed with an explicit projection complement.
pub fn invariants_with(basis: &[FqVector], complement: Option<&[FqVector]>, ctx: &SymplecticContext) -> Result<(usize, usize)> {
    for v in basis {
        ctx.check_len(v)?;
    }
    let p = projection_onto(&ctx.field, ctx.dim(), basis, complement)?;
    let r = p.transpose().mul(&ctx.j).mul(&p).rank();
    if r % 2 == 1 {
        return Err(QncError::InternalError(format!("odd rank {r} of an alternating matrix")));
    }
    Ok((r / 2, basis.len() - r / 2))
}

/// The encoding basis. Indices `0..m0-m_**` carry the message; the last
/// `m_**` pairs span the corrupted directions.
#[derive(Debug, Clone, PartialEq)]
pub struct WBasis {
    pub w: Vec<FqVector>,
    pub w_prime: Vec<FqVector>,
    pub m_star: usize,
    pub m_star_star: usize,
}

impl WBasis {
    /// `g_*` with `g_* e_i = w_i`, `g_* e_{m0+i} = w'_i`.
    pub fn g_star(&self, ctx: &SymplecticContext) -> FqMatrix {
        let cols: Vec<FqVector> = self.w.iter().chain(self.w_prime.iter()).cloned().collect();
        FqMatrix::from_columns(&ctx.field, ctx.dim(), &cols).expect("lengths are 2 m0")
    }

    /// Basis of the span of the last `m_**` pairs.
    pub fn corrupted_span(&self) -> Vec<FqVector> {
        let m0 = self.w.len();
        let k = m0 - self.m_star_star;
        self.w[k..].iter().chain(self.w_prime[k..].iter()).cloned().collect()
    }

    /// Whether every vector of `v` lies in the corrupted span.
    pub fn covers(&self, v: &[FqVector], ctx: &SymplecticContext) -> bool {
        let cs = self.corrupted_span();
        let r = span_rank(&ctx.field, ctx.dim(), &cs);
        let mut all = cs;
        all.extend(v.iter().cloned());
        span_rank(&ctx.field, ctx.dim(), &all) == r
    }
}

/// Builds the encoding basis for the error space `span(v_basis)`:
///
/// 1. `V2 = Ker(P^T J P) ∩ V` (the radical of the form on `V`) and a greedy
///    complement `V1` with `V1 + V2 = V`.
/// 2. Diagonalize on `V1` for the `m_*` middle pairs; a basis of `V2` gives
///    the last `m_** - m_*` vectors `w`.
/// 3. Partners `w'` for the `V2` vectors are found inside `V3 = Ker(P^T J P)`
///    by the iterative correction (solve for `u`, split along `V1 + V3`, add
///    `Σ Q(u', w'_i) w_i`), then made form-orthogonal to the `V1` pairs.
/// 4. `V5 = Ker(P_{V4}^T J)` for `V4` the span of the last `m_**` pairs;
///    diagonalize on `V5` for the first `m0 - m_**` pairs.
pub fn build_w_basis(v_basis: &[FqVector], ctx: &SymplecticContext) -> Result<WBasis> {
    let f = &ctx.field;
    let n = ctx.dim();
    let m0 = ctx.m0;
    for v in v_basis {
        if v.len() != n {
            return Err(QncError::DimensionError(format!("error vector of length {} in F_q^{n}", v.len())));
        }
    }
    let vb = independent_subset(f, n, v_basis);
    let p = projection_onto(f, n, &vb, None)?;
    let m = p.transpose().mul(&ctx.j).mul(&p);
    let r = m.rank();
    if r % 2 == 1 {
        return Err(QncError::InternalError(format!("odd rank {r} of an alternating matrix")));
    }
    let m_star = r / 2;
    let m_star_star = vb.len() - m_star;
    if m_star_star > m0 {
        return Err(QncError::DimensionError(format!("m_** = {m_star_star} exceeds m0 = {m0}")));
    }

    let v3 = m.kernel_basis();
    let v2 = intersection(f, n, &vb, &v3);
    let v1 = extend_within(f, n, &v2, &vb);
    debug_assert_eq!(v1.len(), 2 * m_star);
    let (mid_w, mid_wp) = lc1_diagonalize(&v1, ctx)?;

    // Partners for the radical vectors.
    let mut partners: Vec<FqVector> = Vec::new();
    for l in 0..v2.len() {
        let targets: Vec<&FqVector> = v2.iter().chain(partners.iter()).collect();
        let mut a = FqMatrix::zeros(f, targets.len(), n);
        let mut rhs = FqVector::zeros(f, targets.len());
        for (row, y) in targets.iter().enumerate() {
            let jy = ctx.j.mul_vec(y);
            for c in 0..n {
                a.set(row, c, jy.get(c).clone());
            }
        }
        rhs.set(l, f.one());
        let u = a.solve(&rhs).ok_or_else(|| QncError::InternalError("no partner solution for radical vector".into()))?;
        let (u1, wbar) = decompose(f, &v1, &v3, &u)?;
        let correction = partners
            .iter()
            .enumerate()
            .fold(FqVector::zeros(f, n), |acc, (i, wp)| acc.add(&v2[i].scale(&form(&u1, wp, m0))));
        partners.push(wbar.add(&correction));
    }
    // Remove components along the V1 pairs, then restore Q(w'_l, w'_m) = 0
    // using the isotropic radical vectors.
    for p in partners.iter_mut() {
        let mut adj = FqVector::zeros(f, n);
        for (w, wp) in mid_w.iter().zip(&mid_wp) {
            adj = adj.add(&w.scale(&form(wp, p, m0))).sub(&wp.scale(&form(w, p, m0)));
        }
        *p = p.sub(&adj);
    }
    for l in 0..partners.len() {
        let mut fixed = partners[l].clone();
        for mm in 0..l {
            fixed = fixed.add(&v2[mm].scale(&form(&partners[l], &partners[mm], m0)));
        }
        partners[l] = fixed;
    }

    let mut v4: Vec<FqVector> = mid_w.iter().chain(v2.iter()).cloned().collect();
    v4.extend(mid_wp.iter().cloned());
    v4.extend(partners.iter().cloned());
    let p4 = projection_onto(f, n, &v4, None)?;
    let v5 = p4.transpose().mul(&ctx.j).kernel_basis();
    let (head_w, head_wp) = lc1_diagonalize(&v5, ctx)?;

    let w: Vec<FqVector> = head_w.into_iter().chain(mid_w).chain(v2).collect();
    let w_prime: Vec<FqVector> = head_wp.into_iter().chain(mid_wp).chain(partners).collect();
    if w.len() != m0 || !is_hyperbolic_basis(&w, &w_prime, ctx) {
        return Err(QncError::InternalError("constructed basis fails the form table".into()));
    }
    let basis = WBasis { w, w_prime, m_star, m_star_star };
    if !basis.covers(&vb, ctx) {
        return Err(QncError::InternalError("error space not inside the corrupted span".into()));
    }
    Ok(basis)
}

fn random_invertible<R: Rng + ?Sized>(field: &FieldSpec, n: usize, rng: &mut R) -> FqMatrix {
    let q = field.order() as u64;
    loop {
        let rows: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0..q)).collect()).collect();
        let m = FqMatrix::from_int_rows(field, &rows).expect("codes in range");
        if m.rank() == n {
            return m;
        }
    }
}

/// Random element of the symplectic group: a product of random Levi,
/// shear and `J` factors.
pub fn random_symplectic<R: Rng + ?Sized>(ctx: &SymplecticContext, rng: &mut R) -> FqMatrix {
    let f = &ctx.field;
    let m0 = ctx.m0;
    let q = f.order() as u64;
    let id = FqMatrix::identity(f, m0);
    let zero = FqMatrix::zeros(f, m0, m0);
    let mut g = FqMatrix::identity(f, ctx.dim());
    for _ in 0..4 {
        let a = random_invertible(f, m0, rng);
        let levi = FqMatrix::block_diag(&a, &a.inverse().expect("invertible").transpose());
        let mut s = FqMatrix::zeros(f, m0, m0);
        for i in 0..m0 {
            for j in i..m0 {
                let x = f.element(rng.random_range(0..q)).expect("in range");
                s.set(i, j, x.clone());
                s.set(j, i, x);
            }
        }
        let shear = if rng.random_bool(0.5) {
            FqMatrix::block(&id, &s, &zero, &id)
        } else {
            FqMatrix::block(&id, &zero, &s, &id)
        };
        g = g.mul(&levi).mul(&shear);
        if rng.random_bool(0.5) {
            g = g.mul(&ctx.j);
        }
    }
    g
}

pub fn random_invertible_matrix<R: Rng + ?Sized>(field: &FieldSpec, n: usize, rng: &mut R) -> FqMatrix {
    random_invertible(field, n, rng)
}
