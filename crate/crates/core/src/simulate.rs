//! Exact density-matrix simulation of layered networks under individual,
//! adaptive and mix-substitution corruption, and entanglement fidelity of
//! a code through a corrupted network.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{apply_op, conjugate, haar_unitary, hermitian_eigen, hermitian_eigenvalues, is_unitary, kron, max_abs_diff, partial_trace, trace, CMat, ONE, ZERO};
use crate::error::{QncError, Result};
use crate::network::{CompiledNetwork, CorruptionModel};

const TP_TOL: f64 = 1e-10;

/// Deterministic per-sample generator: stream `index` of the seed.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(QncError::InvalidState(format!("shape {:?}", m.shape())));
        }
        let herm = max_abs_diff(&m, &m.adjoint());
        if herm > 1e-12 {
            return Err(QncError::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = trace(&m);
        if (tr - ONE).norm() > 1e-10 {
            return Err(QncError::InvalidState(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(QncError::NotPsd(min));
        }
        Ok(Self { m })
    }

    pub fn pure(v: &crate::dense::CVec) -> Result<Self> {
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: CMat::identity(d, d) / Complex64::new(d as f64, 0.0) }
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = ONE;
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }
}

/// A channel `ρ -> Σ K ρ K^†` with `Σ K^† K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| QncError::InvalidChannel("empty Kraus list".into()))?;
        let (dout, din) = first.shape();
        if ops.iter().any(|k| k.shape() != (dout, din)) {
            return Err(QncError::InvalidChannel("Kraus operators differ in shape".into()));
        }
        let sum = ops.iter().fold(CMat::zeros(din, din), |acc, k| acc + k.adjoint() * k);
        let dev = max_abs_diff(&sum, &CMat::identity(din, din));
        if dev > TP_TOL {
            return Err(QncError::InvalidChannel(format!("not trace preserving (deviation {dev:e})")));
        }
        Ok(Self { ops })
    }

    pub fn identity(d: usize) -> Self {
        Self { ops: vec![CMat::identity(d, d)] }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `ρ -> Tr(ρ) I/d`, with Kraus operators `|i><j| / sqrt(d)`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        let ops = (0..d * d)
            .map(|k| {
                let mut m = CMat::zeros(d, d);
                m[(k / d, k % d)] = s;
                m
            })
            .collect();
        Self { ops }
    }

    /// Random channel with `k` Kraus operators from a Haar isometry.
    pub fn random<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Self {
        let u = haar_unitary(d * k, rng);
        // isometry V = first d columns; K_a = rows a*d..(a+1)*d
        let ops = (0..k).map(|a| u.view((a * d, 0), (d, d)).into_owned()).collect();
        Self { ops }
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        self.ops.iter().fold(CMat::zeros(self.output_dim(), self.output_dim()), |acc, k| acc + k * rho * k.adjoint())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &KrausChannel) -> KrausChannel {
        let ops = other.ops.iter().flat_map(|b| self.ops.iter().map(move |a| b * a)).collect();
        KrausChannel { ops }
    }

    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let ops = self.ops.iter().flat_map(|a| other.ops.iter().map(move |b| kron(a, b))).collect();
        KrausChannel { ops }
    }

    pub fn conjugated(&self, before: &CMat, after: &CMat) -> KrausChannel {
        KrausChannel { ops: self.ops.iter().map(|k| after * k * before).collect() }
    }
}

/// Eve with a persistent memory: `Ũ_i` acts on register 1 and the memory.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveAdversary {
    memory_dim: usize,
    initial_memory: CMat,
    unitaries: Vec<CMat>,
}

impl AdaptiveAdversary {
    pub fn new(q: usize, memory_dim: usize, initial_memory: CMat, unitaries: Vec<CMat>) -> Result<Self> {
        DensityMatrix::new(initial_memory.clone())?;
        if initial_memory.nrows() != memory_dim {
            return Err(QncError::DimensionError("initial memory state has the wrong dimension".into()));
        }
        for u in &unitaries {
            if u.shape() != (q * memory_dim, q * memory_dim) || !is_unitary(u, TP_TOL) {
                return Err(QncError::InvalidChannel("adversary unitary has wrong shape or is not unitary".into()));
            }
        }
        Ok(Self { memory_dim, initial_memory, unitaries })
    }

    /// Haar-random `Ũ_1..Ũ_{m1}` with memory starting in `|0>`.
    pub fn haar<R: Rng + ?Sized>(q: usize, memory_dim: usize, m1: usize, rng: &mut R) -> Self {
        let mut init = CMat::zeros(memory_dim, memory_dim);
        init[(0, 0)] = ONE;
        let unitaries = (0..m1).map(|_| haar_unitary(q * memory_dim, rng)).collect();
        Self { memory_dim, initial_memory: init, unitaries }
    }

    pub fn memory_dim(&self) -> usize {
        self.memory_dim
    }

    pub fn initial_memory(&self) -> &CMat {
        &self.initial_memory
    }

    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }
}

fn check_state(net: &CompiledNetwork, rho: &CMat) -> Result<()> {
    if rho.shape() != (net.dim(), net.dim()) {
        return Err(QncError::DimensionError(format!("state of dim {} on a {}-dim network", rho.nrows(), net.dim())));
    }
    Ok(())
}

fn check_intervals(net: &CompiledNetwork, count: usize) -> Result<()> {
    if count != net.m1() {
        return Err(QncError::DimensionError(format!("{count} corruptions for {} intervals", net.m1())));
    }
    Ok(())
}

fn conj_full(u: &CMat, rho: &CMat) -> CMat {
    u * rho * u.adjoint()
}

pub fn run_individual(net: &CompiledNetwork, gammas: &[KrausChannel], rho: &CMat) -> Result<CMat> {
    check_state(net, rho)?;
    check_intervals(net, gammas.len())?;
    let q = net.q;
    if gammas.iter().any(|g| g.input_dim() != q || g.output_dim() != q) {
        return Err(QncError::DimensionError(format!("corruption channels must act on dimension {q}")));
    }
    let dims = [q, net.dim() / q];
    let mut state = conj_full(&net.unitaries[0], rho);
    for (g, u) in gammas.iter().zip(&net.unitaries[1..]) {
        let mut next = CMat::zeros(state.nrows(), state.ncols());
        for k in g.ops() {
            next += conjugate(k, &dims, &[0], &state);
        }
        state = conj_full(u, &next);
    }
    Ok(state)
}

pub fn run_adaptive(net: &CompiledNetwork, adv: &AdaptiveAdversary, rho: &CMat) -> Result<CMat> {
    check_state(net, rho)?;
    check_intervals(net, adv.unitaries.len())?;
    if adv.unitaries.iter().any(|u| u.nrows() != net.q * adv.memory_dim) {
        return Err(QncError::DimensionError("adversary unitaries do not match q * memory".into()));
    }
    net.check_budget(adv.memory_dim)?;
    let q = net.q;
    let dims = [q, net.dim() / q, adv.memory_dim];
    let mut state = kron(&conj_full(&net.unitaries[0], rho), &adv.initial_memory);
    for (ut, u) in adv.unitaries.iter().zip(&net.unitaries[1..]) {
        state = conjugate(ut, &dims, &[0, 2], &state);
        state = conjugate(u, &[net.dim(), adv.memory_dim], &[0], &state);
    }
    Ok(partial_trace(&state, &[net.dim(), adv.memory_dim], &[0]))
}

pub fn run_mix_substitution(net: &CompiledNetwork, rho: &CMat) -> Result<CMat> {
    check_state(net, rho)?;
    let q = net.q;
    let rest = net.dim() / q;
    let mixed = CMat::identity(q, q) / Complex64::new(q as f64, 0.0);
    let mut state = conj_full(&net.unitaries[0], rho);
    for u in &net.unitaries[1..] {
        let reduced = partial_trace(&state, &[q, rest], &[1]);
        state = conj_full(u, &kron(&mixed, &reduced));
    }
    Ok(state)
}

pub fn run(net: &CompiledNetwork, corruption: &CorruptionModel, rho: &CMat) -> Result<CMat> {
    match corruption {
        CorruptionModel::Individual(g) => run_individual(net, g, rho),
        CorruptionModel::Adaptive(a) => run_adaptive(net, a, rho),
        CorruptionModel::MixSubstitution => run_mix_substitution(net, rho),
    }
}

/// Kraus operators of `Λ(U, Γ)` on the full `q^m0` space.
pub fn network_kraus(net: &CompiledNetwork, gammas: &[KrausChannel]) -> Result<Vec<CMat>> {
    check_intervals(net, gammas.len())?;
    let dims = [net.q, net.dim() / net.q];
    let mut ops = vec![net.unitaries[0].clone()];
    for (g, u) in gammas.iter().zip(&net.unitaries[1..]) {
        let mut next = Vec::with_capacity(ops.len() * g.ops().len());
        for k in g.ops() {
            for a in &ops {
                next.push(u * apply_op(k, &dims, &[0], a));
            }
        }
        ops = next;
    }
    Ok(ops)
}

/// Encoder and decoder of a code on `m0` registers. The message occupies
/// the first `message_registers` registers; the rest start in `rho0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codec {
    pub q: usize,
    pub m0: usize,
    pub message_registers: usize,
    pub u_enc: CMat,
    pub u_dec: CMat,
    pub rho0: CMat,
}

impl Codec {
    /// Identity encoder and decoder.
    pub fn uncoded(q: usize, m0: usize, message_registers: usize, rho0: CMat) -> Self {
        let d = q.pow(m0 as u32);
        Self { q, m0, message_registers, u_enc: CMat::identity(d, d), u_dec: CMat::identity(d, d), rho0 }
    }

    pub fn message_dim(&self) -> usize {
        self.q.pow(self.message_registers as u32)
    }

    pub fn junk_dim(&self) -> usize {
        self.q.pow((self.m0 - self.message_registers) as u32)
    }

    /// `ρ -> U_e (ρ ⊗ ρ0) U_e^†`.
    pub fn encode(&self, rho_msg: &CMat) -> Result<CMat> {
        if rho_msg.shape() != (self.message_dim(), self.message_dim()) {
            return Err(QncError::DimensionError(format!("message state must be {}-dimensional", self.message_dim())));
        }
        let min = hermitian_eigenvalues(rho_msg).first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(QncError::NotPsd(min));
        }
        Ok(conj_full(&self.u_enc, &kron(rho_msg, &self.rho0)))
    }

    /// `ρ -> Tr_junk(U_d ρ U_d^†)`.
    pub fn decode(&self, rho: &CMat) -> Result<CMat> {
        let d = self.u_dec.nrows();
        if rho.shape() != (d, d) {
            return Err(QncError::DimensionError(format!("received state must be {d}-dimensional")));
        }
        Ok(partial_trace(&conj_full(&self.u_dec, rho), &[self.message_dim(), self.junk_dim()], &[0]))
    }
}

fn eigen_components(rho: &CMat) -> Vec<(f64, Vec<Complex64>)> {
    let (vals, vecs) = hermitian_eigen(rho);
    vals.iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-14)
        .map(|(i, &p)| (p, vecs.column(i).iter().copied().collect()))
        .collect()
}

/// Entanglement fidelity of decode ∘ (network with corruption) ∘ encode on
/// the message space, computed from the effective Kraus operators:
/// `F_e = Σ |Tr K|^2 / d^2`.
pub fn entanglement_fidelity(codec: &Codec, net: &CompiledNetwork, corruption: &CorruptionModel) -> Result<f64> {
    let q = net.q;
    let d_net = net.dim();
    if codec.u_enc.nrows() != d_net || codec.q != q {
        return Err(QncError::DimensionError("codec does not match the network".into()));
    }
    let (mem_dim, mem_state, per_interval): (usize, CMat, Vec<Vec<CMat>>) = match corruption {
        CorruptionModel::Individual(gs) => {
            check_intervals(net, gs.len())?;
            (1, CMat::identity(1, 1), gs.iter().map(|g| g.ops().to_vec()).collect())
        }
        CorruptionModel::Adaptive(a) => {
            check_intervals(net, a.unitaries.len())?;
            (a.memory_dim, a.initial_memory.clone(), a.unitaries.iter().map(|u| vec![u.clone()]).collect())
        }
        CorruptionModel::MixSubstitution => {
            let ops = KrausChannel::completely_depolarizing(q).ops;
            (1, CMat::identity(1, 1), vec![ops; net.m1()])
        }
    };
    if per_interval.iter().flatten().any(|k| k.shape() != (q * mem_dim, q * mem_dim)) {
        return Err(QncError::DimensionError("corruption operators do not match q * memory".into()));
    }
    net.check_budget(mem_dim)?;

    let d_msg = codec.message_dim();
    let d_junk = codec.junk_dim();
    let junk = eigen_components(&codec.rho0);
    let mem = eigen_components(&mem_state);
    let total = d_net * mem_dim;

    // columns |x, φ_j, μ> in (message, junk, memory) order
    let ncols = d_msg * junk.len() * mem.len();
    let mut cols = CMat::zeros(total, ncols);
    let mut weights = Vec::with_capacity(ncols);
    let mut col = 0;
    for x in 0..d_msg {
        for (pj, phi) in &junk {
            for (pm, mu) in &mem {
                for (a, fa) in phi.iter().enumerate() {
                    for (b, mb) in mu.iter().enumerate() {
                        cols[((x * d_junk + a) * mem_dim + b, col)] = fa * mb;
                    }
                }
                weights.push((pj * pm).sqrt());
                col += 1;
            }
        }
    }
    let net_dims = [d_net, mem_dim];
    let start = apply_op(&(&net.unitaries[0] * &codec.u_enc), &net_dims, &[0], &cols);
    let corr_dims = [q, d_net / q, mem_dim];
    let dec_last: Vec<CMat> = net.unitaries[1..].to_vec();

    let mut acc = 0.0;
    let mut stack: Vec<(usize, CMat)> = vec![(0, start)];
    while let Some((level, state)) = stack.pop() {
        if level == per_interval.len() {
            let out = apply_op(&codec.u_dec, &net_dims, &[0], &state);
            let nj = junk.len();
            let nm = mem.len();
            for j in 0..nj {
                for m in 0..nm {
                    for r in 0..d_junk {
                        for mp in 0..mem_dim {
                            let mut tr = ZERO;
                            for x in 0..d_msg {
                                let c = (x * nj + j) * nm + m;
                                tr += out[((x * d_junk + r) * mem_dim + mp, c)] * weights[c];
                            }
                            acc += tr.norm_sqr();
                        }
                    }
                }
            }
            continue;
        }
        for k in &per_interval[level] {
            let hit = apply_op(k, &corr_dims, &[0, 2], &state);
            stack.push((level + 1, apply_op(&dec_last[level], &net_dims, &[0], &hit)));
        }
    }
    Ok((acc / (d_msg * d_msg) as f64).clamp(0.0, 1.0))
}
