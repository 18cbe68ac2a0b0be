//! Basis-linear networks with prescribed ranks `(l1, l2, l3)` of the error
//! matrices, and the worst-case network built from them.

use serde::{Deserialize, Serialize};

use crate::codeplan::split_error_vectors;
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::{span_rank, FqMatrix};
use crate::network::{Layer, LayeredNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTriple {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
    pub m0: usize,
    pub m1: usize,
}

impl RankTriple {
    /// Requires `m1 >= l1 >= l3 >= 1`, `m1 >= l2 >= l3` and `m0 >= l1 + l2 - l3`.
    pub fn new(l1: usize, l2: usize, l3: usize, m0: usize, m1: usize) -> Result<Self> {
        let t = Self { l1, l2, l3, m0, m1 };
        if l3 < 1 {
            return Err(QncError::InvalidTriple(format!("l3 = {l3} must be at least 1")));
        }
        if !(m1 >= l1 && l1 >= l3 && m1 >= l2 && l2 >= l3) {
            return Err(QncError::InvalidTriple(format!("need m1 >= l1, l2 >= l3: got {t:?}")));
        }
        if m0 < l1 + l2 - l3 {
            return Err(QncError::InvalidTriple(format!("m0 = {m0} < l1 + l2 - l3 = {}", l1 + l2 - l3)));
        }
        Ok(t)
    }

    pub fn is_valid(l1: usize, l2: usize, l3: usize, m0: usize, m1: usize) -> bool {
        Self::new(l1, l2, l3, m0, m1).is_ok()
    }

    /// `(m_*, m_**) = (l3, l1 + l2 - l3)`.
    pub fn expected_invariants(&self) -> (usize, usize) {
        (self.l3, self.l1 + self.l2 - self.l3)
    }
}

/// The matrices `A_0..A_{m1}` for `l1 >= l2`; entries `-1` are read in `F_q`.
fn a_matrices(t: &RankTriple, f: &FieldSpec) -> Vec<FqMatrix> {
    let n = t.m0;
    let mut out = Vec::with_capacity(t.m1 + 1);
    for i in 0..=t.m1 {
        let mut a = FqMatrix::identity(f, n);
        if i >= 1 && i <= t.l3 {
            // transposition of entries 1 and i
            let k = i - 1;
            if k != 0 {
                a.set(0, 0, f.zero());
                a.set(k, k, f.zero());
                a.set(0, k, f.one());
                a.set(k, 0, f.one());
            }
        } else if i > t.l3 && i <= t.l2 {
            // 3x3 block on entries 1, l3 + 2j - 1, l3 + 2j
            let j = i - t.l3;
            let (b, c) = (t.l3 + 2 * j - 2, t.l3 + 2 * j - 1);
            a.set(0, c, f.one());
            a.set(b, 0, f.one());
        } else if i > t.l2 && i <= t.l1 {
            // 2x2 block on entries 1 and 2 l2 - l3 + j
            let j = i - t.l2;
            let b = 2 * t.l2 - t.l3 + j - 1;
            a.set(b, 0, f.one());
        }
        out.push(a);
    }
    out
}

/// Generates `ḡ_0..ḡ_{m1}` (with `ḡ_{m1} = I`) whose error vectors have
/// `rank V̄ = l1`, `rank V̄' = l2`, `rank V̄'^T V̄ = l3`.
///
/// `ḡ_{i-1} = A_i^{-1} A_{i-1}`, so that `ḡ_0^{-1} ⋯ ḡ_{i-1}^{-1} = A_i` and
/// `v̄_i = A_i ē_1`, `v̄'_i = (A_i^{-1})^T ē_1`. For `l1 < l2` the triple
/// `(l2, l1, l3)` is generated and every map replaced by `(ḡ^{-1})^T`,
/// which exchanges the roles of the two bases.
pub fn gen_lemma_l1(t: &RankTriple, field: &FieldSpec) -> Result<LayeredNetwork> {
    let t = RankTriple::new(t.l1, t.l2, t.l3, t.m0, t.m1)?;
    let swapped = t.l1 < t.l2;
    let base = if swapped { RankTriple { l1: t.l2, l2: t.l1, ..t } } else { t };
    let a = a_matrices(&base, field);
    let mut gs = Vec::with_capacity(t.m1 + 1);
    for i in 1..=t.m1 {
        gs.push(a[i].inverse()?.mul(&a[i - 1]));
    }
    gs.push(FqMatrix::identity(field, t.m0));
    if swapped {
        gs = gs.into_iter().map(|g| g.inverse().map(|h| h.transpose())).collect::<Result<_>>()?;
    }
    LayeredNetwork::new(field, t.m0, gs.into_iter().map(Layer::BasisLinear).collect())
}

/// `(l1, l2, l3)` measured on a basis-linear network.
pub fn measure_ranks(net: &LayeredNetwork) -> Result<(usize, usize, usize)> {
    let split = split_error_vectors(net)?;
    let f = net.field();
    let m0 = net.m0();
    let l1 = span_rank(f, m0, &split.v_bar);
    let l2 = span_rank(f, m0, &split.v_bar_prime);
    let vb = FqMatrix::from_columns(f, m0, &split.v_bar)?;
    let vp = FqMatrix::from_columns(f, m0, &split.v_bar_prime)?;
    Ok((l1, l2, vp.transpose().mul(&vb).rank()))
}

/// The network attaining `m_** = 2 m1 - 1`: the triple `(m1, m1, 1)`.
pub fn worst_case_network(m0: usize, m1: usize, field: &FieldSpec) -> Result<LayeredNetwork> {
    if m1 == 0 || m0 + 1 < 2 * m1 {
        return Err(QncError::InvalidTriple(format!("worst case needs m1 >= 1 and m0 >= 2 m1 - 1, got m0 = {m0}, m1 = {m1}")));
    }
    gen_lemma_l1(&RankTriple::new(m1, m1, 1, m0, m1)?, field)
}
