//! The code for a Clifford network with known corrupted positions: error
//! directions `v_i`, invariants `m_*`, `m_**`, the encoding basis and the
//! concrete encoder and decoder.

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::CMat;
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::{independent_subset, FqMatrix, FqVector};
use crate::network::{CompiledNetwork, LayeredNetwork};
use crate::simulate::Codec;
use crate::symplectic::{build_w_basis, compute_invariants, SymplecticContext, WBasis};
use crate::weyl::{metaplectic, MetaplecticCertificate};

/// State of the `m_**` sacrificed registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho0Choice {
    #[default]
    MaximallyMixed,
    Zero,
}

impl Rho0Choice {
    pub fn state(self, dim: usize) -> CMat {
        match self {
            Rho0Choice::MaximallyMixed => CMat::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            Rho0Choice::Zero => {
                let mut m = CMat::zeros(dim, dim);
                m[(0, 0)] = Complex64::new(1.0, 0.0);
                m
            }
        }
    }
}

/// `v_1..v_{2 m1}` with `v_i = g_0^{-1} ⋯ g_{i-1}^{-1} e_1` and
/// `v_{m1+i} = g_0^{-1} ⋯ g_{i-1}^{-1} e_{m0+1}`.
pub fn error_vectors(net: &LayeredNetwork) -> Result<Vec<FqVector>> {
    let gs = net.symplectic_layers()?;
    let f = net.field();
    let n = 2 * net.m0();
    let m1 = net.m1();
    let mut h = FqMatrix::identity(f, n);
    let mut xs = Vec::with_capacity(m1);
    let mut zs = Vec::with_capacity(m1);
    for g in gs.iter().take(m1) {
        h = h.mul(&g.inverse()?);
        xs.push(h.column(0));
        zs.push(h.column(net.m0()));
    }
    xs.extend(zs);
    Ok(xs)
}

/// Split form for basis-linear networks: `v_i = (v̄_i, 0)`,
/// `v_{m1+i} = (0, v̄'_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVectors {
    pub v_bar: Vec<FqVector>,
    pub v_bar_prime: Vec<FqVector>,
}

pub fn split_error_vectors(net: &LayeredNetwork) -> Result<SplitVectors> {
    let gs = net.basis_linear_layers().ok_or(QncError::NotClifford)?;
    let f = net.field();
    let m0 = net.m0();
    let mut inv = FqMatrix::identity(f, m0);
    let mut tr = FqMatrix::identity(f, m0);
    let mut v_bar = Vec::new();
    let mut v_bar_prime = Vec::new();
    for g in gs.iter().take(net.m1()) {
        inv = inv.mul(&g.inverse()?);
        tr = tr.mul(&g.transpose());
        v_bar.push(inv.column(0));
        v_bar_prime.push(tr.column(0));
    }
    Ok(SplitVectors { v_bar, v_bar_prime })
}

/// The finite-field part of a code: everything except the dense operators.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeAlgebra {
    pub v: Vec<FqVector>,
    pub v_basis: Vec<FqVector>,
    pub m_star: usize,
    pub m_star_star: usize,
    pub wbasis: WBasis,
    pub g_star: FqMatrix,
}

pub fn code_algebra(net: &LayeredNetwork) -> Result<CodeAlgebra> {
    let ctx = net.context();
    let v = error_vectors(net)?;
    let v_basis = independent_subset(net.field(), ctx.dim(), &v);
    let (m_star, m_star_star) = compute_invariants(&v_basis, &ctx, Some(net.m1()))?;
    if m_star_star >= net.m0() {
        return Err(QncError::NoCapacity { m0: net.m0(), m_star_star });
    }
    let wbasis = build_w_basis(&v_basis, &ctx)?;
    let g_star = wbasis.g_star(&ctx);
    Ok(CodeAlgebra { v, v_basis, m_star, m_star_star, wbasis, g_star })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodePlan {
    pub field: FieldSpec,
    pub m0: usize,
    pub m1: usize,
    pub algebra: CodeAlgebra,
    pub message_registers: usize,
    pub rate_bits: f64,
    pub rho0_choice: Rho0Choice,
    pub encoder_certificate: MetaplecticCertificate,
    codec: Codec,
}

/// Builds the code for a Clifford network: `U_e = U(g_*)` and
/// `U_d = U_e^† U_0^† ⋯ U_{m1}^†`.
pub fn plan_code(net: &LayeredNetwork, rho0: Rho0Choice) -> Result<CodePlan> {
    let compiled = net.compile()?;
    plan_code_compiled(net, &compiled, rho0)
}

/// As [`plan_code`] with the network's unitaries already compiled.
pub fn plan_code_compiled(net: &LayeredNetwork, compiled: &CompiledNetwork, rho0: Rho0Choice) -> Result<CodePlan> {
    let algebra = code_algebra(net)?;
    let ctx = SymplecticContext::new(net.field(), net.m0());
    let (u_e, cert) = metaplectic(&algebra.g_star, &ctx)?;
    let u_enc = u_e.into_matrix();
    let u_dec = u_enc.adjoint() * compiled.total().adjoint();
    let q = net.field().order();
    let message_registers = net.m0() - algebra.m_star_star;
    let junk = q.pow(algebra.m_star_star as u32);
    let codec = Codec { q, m0: net.m0(), message_registers, u_enc, u_dec, rho0: rho0.state(junk) };
    Ok(CodePlan {
        field: net.field().clone(),
        m0: net.m0(),
        m1: net.m1(),
        rate_bits: message_registers as f64 * (q as f64).log2(),
        message_registers,
        rho0_choice: rho0,
        encoder_certificate: cert,
        algebra,
        codec,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub p: u32,
    pub degree: usize,
    pub modulus: Vec<u32>,
}

impl From<&FieldSpec> for FieldReport {
    fn from(f: &FieldSpec) -> Self {
        Self { p: f.p(), degree: f.degree(), modulus: f.modulus().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WBasisReport {
    pub w: Vec<Vec<u64>>,
    pub w_prime: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodePlanReport {
    pub field: FieldReport,
    pub m0: usize,
    pub m1: usize,
    pub m_star: usize,
    pub m_star_star: usize,
    pub message_registers: usize,
    /// Message registers are the first `message_registers` tensor factors.
    pub message_layout: String,
    pub rate_bits: f64,
    pub rate_log_q: usize,
    pub rho0: Rho0Choice,
    pub error_vectors: Vec<Vec<u64>>,
    pub g_star: Vec<Vec<u64>>,
    pub wbasis: WBasisReport,
    pub encoder_max_deviation: f64,
}

impl CodePlan {
    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn m_star(&self) -> usize {
        self.algebra.m_star
    }

    pub fn m_star_star(&self) -> usize {
        self.algebra.m_star_star
    }

    pub fn g_star(&self) -> &FqMatrix {
        &self.algebra.g_star
    }

    pub fn wbasis(&self) -> &WBasis {
        &self.algebra.wbasis
    }

    pub fn encode(&self, rho_msg: &CMat) -> Result<CMat> {
        self.codec.encode(rho_msg)
    }

    pub fn decode(&self, rho: &CMat) -> Result<CMat> {
        self.codec.decode(rho)
    }

    pub fn report(&self) -> CodePlanReport {
        let ints = |vs: &[FqVector]| vs.iter().map(FqVector::to_ints).collect::<Vec<_>>();
        CodePlanReport {
            field: FieldReport::from(&self.field),
            m0: self.m0,
            m1: self.m1,
            m_star: self.algebra.m_star,
            m_star_star: self.algebra.m_star_star,
            message_registers: self.message_registers,
            message_layout: format!("registers 1..{} carry the message", self.message_registers),
            rate_bits: self.rate_bits,
            rate_log_q: self.message_registers,
            rho0: self.rho0_choice,
            error_vectors: ints(&self.algebra.v),
            g_star: self.algebra.g_star.to_int_rows(),
            wbasis: WBasisReport { w: ints(&self.algebra.wbasis.w), w_prime: ints(&self.algebra.wbasis.w_prime) },
            encoder_max_deviation: self.encoder_certificate.max_deviation,
        }
    }
}
