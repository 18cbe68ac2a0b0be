//! Entropies, coherent information, Pauli channels and the numerical checks
//! of the capacity bounds.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codeplan::CodePlan;
use crate::dense::{apply_op, haar_unitary, hermitian_eigen, hermitian_eigenvalues, kron, random_density, random_pure, trace, CMat, CVec, ONE, ZERO};
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::FqVector;
use crate::network::CompiledNetwork;
use crate::simulate::{network_kraus, sample_rng, KrausChannel};
use crate::weyl::{fourier_state, WeylSpace};

pub const DIRECT_TOL: f64 = 1e-6;
pub const CONVERSE_DISTANCE_TOL: f64 = 1e-9;
pub const CLASSICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// `-Σ λ log2 λ`, eigenvalues below `1e-12` counted as zero.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    let ev = hermitian_eigenvalues(rho);
    if let Some(&min) = ev.first() {
        if min < -1e-9 {
            return Err(QncError::NotPsd(min));
        }
    }
    Ok(ev.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.log2()).sum())
}

/// `H(B) - H(E)` for the dilation with one environment level per Kraus
/// operator.
pub fn coherent_information_ops(rho: &CMat, ops: &[CMat]) -> Result<f64> {
    let din = rho.nrows();
    if ops.iter().any(|k| k.ncols() != din) {
        return Err(QncError::DimensionError("channel input does not match the state".into()));
    }
    let dout = ops[0].nrows();
    let images: Vec<CMat> = ops.iter().map(|k| k * rho).collect();
    let out = ops.iter().zip(&images).fold(CMat::zeros(dout, dout), |acc, (k, kr)| acc + kr * k.adjoint());
    let n = ops.len();
    let mut env = CMat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            // Tr(K_a ρ K_b^†)
            let v: Complex64 = images[a].iter().zip(ops[b].iter()).map(|(x, y)| x * y.conj()).sum();
            env[(a, b)] = v;
            env[(b, a)] = v.conj();
        }
    }
    Ok(von_neumann_entropy(&out)? - von_neumann_entropy(&env)?)
}

pub fn coherent_information(rho: &CMat, channel: &KrausChannel) -> Result<f64> {
    if rho.nrows() != channel.input_dim() {
        return Err(QncError::DimensionError("channel input does not match the state".into()));
    }
    coherent_information_ops(rho, channel.ops())
}

/// `Λ_P(ρ) = Σ P(a) W(a) ρ W(a)^†` on `l` registers; `dist` is indexed
/// row-major by the label `(s_1..s_l, t_1..t_l)`, `s_1` slowest.
pub fn pauli_channel(field: &FieldSpec, l: usize, dist: &[f64]) -> Result<KrausChannel> {
    let ws = WeylSpace::new(field, l);
    if dist.len() != ws.label_count() {
        return Err(QncError::InvalidDistribution(format!("expected {} weights, got {}", ws.label_count(), dist.len())));
    }
    if dist.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(QncError::InvalidDistribution("negative or non-finite weight".into()));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(QncError::InvalidDistribution(format!("weights sum to {sum}")));
    }
    let ops = dist
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(a, &p)| ws.monomial(&ws.label_codes(a)).to_dense() * Complex64::new(p.sqrt(), 0.0))
        .collect();
    KrausChannel::new(ops)
}

/// Uniform over all of `F_q^{2l}`.
pub fn p_mix(field: &FieldSpec, l: usize) -> Vec<f64> {
    let n = field.order().pow(2 * l as u32);
    vec![1.0 / n as f64; n]
}

/// Uniform over the shifts `(s, 0)`.
pub fn p_mix_z(field: &FieldSpec, l: usize) -> Vec<f64> {
    let ws = WeylSpace::new(field, l);
    let shifts = field.order().pow(l as u32) as f64;
    (0..ws.label_count())
        .map(|a| if ws.label_codes(a)[l..].iter().all(|&t| t == 0) { 1.0 / shifts } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub value_bits: f64,
    pub value_log_q: f64,
    pub bound_bits: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process_distance: Option<f64>,
}

fn report(value: f64, bound: f64, q: usize, dims: Vec<usize>) -> ChannelReport {
    ChannelReport {
        value_bits: value,
        value_log_q: value / (q as f64).log2(),
        bound_bits: bound,
        tolerance: DIRECT_TOL,
        verdict: Verdict::from_bool(value >= bound - DIRECT_TOL),
        dims,
        seed: None,
        rate_bits: None,
        process_distance: None,
    }
}

/// `I_c` of `Λ(U, Γ)` at `U_0^† (|0><0| ⊗ I/q^{m0-1}) U_0`, against
/// `(m0 - 2 m1 + 1) log2 q`.
pub fn verify_direct_bound(net: &CompiledNetwork, gammas: &[KrausChannel]) -> Result<ChannelReport> {
    let q = net.q;
    let d = net.dim();
    let mut w = CMat::zeros(d, d);
    let rest = d / q;
    for i in 0..rest {
        w[(i, i)] = Complex64::new(1.0 / rest as f64, 0.0);
    }
    let u0 = &net.unitaries[0];
    let rho = u0.adjoint() * w * u0;
    let ops = network_kraus(net, gammas)?;
    let value = coherent_information_ops(&rho, &ops)?;
    let bound = (net.m0 as f64 + 1.0 - 2.0 * net.m1() as f64) * (q as f64).log2();
    Ok(report(value, bound, q, vec![q, net.m0, net.m1()]))
}

/// Random unitary layers and random Kraus corruptions, one report per sample.
pub fn direct_bound_sweep(q: usize, m0: usize, m1: usize, samples: usize, seed: u64) -> Result<Vec<ChannelReport>> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let d = q.pow(m0 as u32);
            let layers = (0..=m1).map(|_| haar_unitary(d, &mut rng)).collect();
            let net = CompiledNetwork::from_unitaries(q, m0, layers)?;
            let gammas: Vec<KrausChannel> = (0..m1)
                .map(|_| {
                    let k = rng.random_range(1..=q * q);
                    KrausChannel::random(q, k, &mut rng)
                })
                .collect();
            let mut r = verify_direct_bound(&net, &gammas)?;
            r.seed = Some(i as u64);
            Ok(r)
        })
        .collect()
}

/// Weight of `W(a)` in the ideal decoded mix-substitution channel:
/// identity on the message, uniform on the next `m_*` registers, uniform
/// shifts on the last `m_** - m_*`.
fn ideal_weight(codes: &[u32], m0: usize, msg: usize, m_star: usize, q: usize) -> f64 {
    let (s, t) = codes.split_at(m0);
    let mut w = 1.0;
    for k in 0..m0 {
        if k < msg {
            if s[k] != 0 || t[k] != 0 {
                return 0.0;
            }
        } else if k < msg + m_star {
            w /= (q * q) as f64;
        } else {
            if t[k] != 0 {
                return 0.0;
            }
            w /= q as f64;
        }
    }
    w
}

/// Decoded channel under mix substitution: checks it equals
/// `Id ⊗ Λ_{P_mix, m_*} ⊗ Λ_{P_mixZ, m_** - m_*}` by the Frobenius distance
/// of the process matrices in the Weyl basis, then evaluates `I_c` at
/// `I/d ⊗ |0><0|`.
pub fn verify_converse(plan: &CodePlan, net: &CompiledNetwork) -> Result<ChannelReport> {
    let codec = plan.codec();
    let q = net.q;
    let m0 = net.m0;
    let d = net.dim();
    let dims = [q, d / q];
    let replace = KrausChannel::completely_depolarizing(q);
    let mut ops = vec![&net.unitaries[0] * &codec.u_enc];
    for u in &net.unitaries[1..] {
        let mut next = Vec::with_capacity(ops.len() * replace.ops().len());
        for k in replace.ops() {
            for a in &ops {
                next.push(u * apply_op(k, &dims, &[0], a));
            }
        }
        ops = next;
    }
    let ops: Vec<CMat> = ops.into_iter().map(|k| &codec.u_dec * k).collect();

    let ws = WeylSpace::new(&plan.field, m0);
    let labels = ws.label_count();
    let monomials: Vec<_> = (0..labels).map(|a| ws.monomial(&ws.label_codes(a))).collect();
    let mut chi: HashMap<(usize, usize), Complex64> = HashMap::new();
    for k in &ops {
        let kappa: Vec<(usize, Complex64)> = monomials
            .iter()
            .enumerate()
            .map(|(a, w)| (a, w.overlap(k) / d as f64))
            .filter(|(_, z)| z.norm() > 1e-14)
            .collect();
        for &(a, za) in &kappa {
            for &(b, zb) in &kappa {
                *chi.entry((a, b)).or_insert(ZERO) += za * zb.conj();
            }
        }
    }
    let msg = plan.message_registers;
    let m_star = plan.m_star();
    let mut dist2 = 0.0;
    for (&(a, b), &z) in &chi {
        let target = if a == b { ideal_weight(&ws.label_codes(a), m0, msg, m_star, q) } else { 0.0 };
        dist2 += (z - Complex64::new(target, 0.0)).norm_sqr();
    }
    for a in 0..labels {
        let w = ideal_weight(&ws.label_codes(a), m0, msg, m_star, q);
        if w > 0.0 && !chi.contains_key(&(a, a)) {
            dist2 += w * w;
        }
    }
    let distance = dist2.sqrt();
    if distance > CONVERSE_DISTANCE_TOL {
        return Err(QncError::ConverseMismatch(distance));
    }

    let d_msg = codec.message_dim();
    let d_junk = codec.junk_dim();
    let mut junk0 = CMat::zeros(d_junk, d_junk);
    junk0[(0, 0)] = ONE;
    let rho = kron(&(CMat::identity(d_msg, d_msg) / Complex64::new(d_msg as f64, 0.0)), &junk0);
    let value = coherent_information_ops(&rho, &ops)?;
    let expected = plan.rate_bits;
    let mut r = report(value, expected, q, vec![q, m0, net.m1()]);
    r.verdict = Verdict::from_bool((value - expected).abs() <= DIRECT_TOL);
    r.rate_bits = Some(plan.rate_bits);
    r.process_distance = Some(distance);
    Ok(r)
}

/// Measure-and-prepare channel `ρ -> Σ_k <e_k|ρ|e_k> σ_k` with a rank-one
/// POVM `{|e_k><e_k|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePrepare {
    pub povm: Vec<CVec>,
    pub states: Vec<CMat>,
}

impl MeasurePrepare {
    pub fn new(povm: Vec<CVec>, states: Vec<CMat>) -> Result<Self> {
        if povm.is_empty() || povm.len() != states.len() {
            return Err(QncError::InvalidChannel("need one prepared state per POVM element".into()));
        }
        let d = povm[0].len();
        let sum = povm.iter().fold(CMat::zeros(d, d), |acc, e| acc + e * e.adjoint());
        if crate::dense::max_abs_diff(&sum, &CMat::identity(d, d)) > 1e-10 {
            return Err(QncError::InvalidChannel("POVM does not sum to identity".into()));
        }
        for s in &states {
            crate::simulate::DensityMatrix::new(s.clone())?;
        }
        Ok(Self { povm, states })
    }

    /// Measure and re-prepare in the Fourier basis of one register.
    pub fn fourier_pinching(field: &FieldSpec) -> Self {
        let q = field.order() as u64;
        let povm: Vec<CVec> = (0..q).map(|y| fourier_state(&FqVector::from_ints(field, &[y]).expect("code in range"))).collect();
        let states = povm.iter().map(|v| v * v.adjoint()).collect();
        Self { povm, states }
    }

    pub fn channel(&self) -> KrausChannel {
        let mut ops = Vec::new();
        for (e, s) in self.povm.iter().zip(&self.states) {
            let (vals, vecs) = hermitian_eigen(s);
            for (l, &p) in vals.iter().enumerate() {
                if p > 1e-14 {
                    let psi = vecs.column(l).into_owned();
                    ops.push(psi * e.adjoint() * Complex64::new(p.sqrt(), 0.0));
                }
            }
        }
        KrausChannel::new(ops).expect("validated measure-and-prepare channel")
    }
}

/// Known maximum of `I_c(τ, Λ_B)` with a maximizing state.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMax {
    pub value_bits: f64,
    pub state: CMat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbReport {
    /// Right side used for the verdict.
    pub max_single_bits: f64,
    /// Optimizer estimate of the right side.
    pub optimizer_bits: f64,
    /// `analytic - optimizer` when an analytic value is supplied.
    pub optimizer_gap: Option<f64>,
    pub samples: usize,
    pub max_joint_bits: f64,
    pub max_excess_bits: f64,
    pub product_bits: f64,
    pub product_gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn state_from_params(theta: &[f64], d: usize) -> CMat {
    let a = CMat::from_fn(d, d, |i, j| Complex64::new(theta[2 * (i * d + j)], theta[2 * (i * d + j) + 1]));
    let m = &a * a.adjoint();
    let tr = trace(&m);
    if tr.re <= 1e-300 {
        return CMat::identity(d, d) / Complex64::new(d as f64, 0.0);
    }
    m / tr
}

/// Minimizes `f` by the Nelder–Mead simplex method.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=n)
        .map(|i| {
            let mut x = start.to_vec();
            if i > 0 {
                x[i - 1] += step;
            }
            let fx = f(&x);
            (x, fx)
        })
        .collect();
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() < 1e-13 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(0.5) } else { along(-0.5) };
            let fc = f(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x0) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *fx = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}

/// Multi-start estimate of `max_τ I_c(τ, Λ)` with `τ = A A^† / Tr`.
pub fn maximize_coherent_information<R: Rng + ?Sized>(channel: &KrausChannel, starts: usize, rng: &mut R) -> (f64, CMat) {
    let d = channel.input_dim();
    let objective = |theta: &[f64]| -> f64 { -coherent_information(&state_from_params(theta, d), channel).unwrap_or(f64::NEG_INFINITY) };
    let mut best: Option<(f64, CMat)> = None;
    for s in 0..starts.max(1) {
        let start: Vec<f64> = if s == 0 {
            // the maximally mixed state
            (0..2 * d * d).map(|k| if k % 2 == 0 && (k / 2) % (d + 1) == 0 { 1.0 } else { 0.0 }).collect()
        } else {
            (0..2 * d * d).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let (x, fx) = nelder_mead(objective, &start, 0.3, 2000);
        let val = -fx;
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, state_from_params(&x, d)));
        }
    }
    best.expect("at least one start")
}

/// Samples joint inputs for `Λ_A ⊗ Λ_B` with `Λ_A` entanglement breaking and
/// checks `I_c(ρ_AB) <= max_τ I_c(τ, Λ_B)`; product inputs `ψ ⊗ τ*` must
/// reach the maximum.
pub fn eb_coherent_check(a: &MeasurePrepare, b: &KrausChannel, analytic: Option<&AnalyticMax>, samples: usize, seed: u64) -> Result<EbReport> {
    let ch_a = a.channel();
    let joint = ch_a.tensor(b);
    let (da, db) = (ch_a.input_dim(), b.input_dim());
    let mut rng = sample_rng(seed, u64::MAX);
    let (opt_val, opt_state) = maximize_coherent_information(b, 6, &mut rng);
    let (rhs, tau) = match analytic {
        Some(am) => (am.value_bits, am.state.clone()),
        None => (opt_val, opt_state),
    };
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let rank = rng.random_range(1..=da * db);
            coherent_information(&random_density(da * db, rank, &mut rng), &joint)
        })
        .collect::<Result<_>>()?;
    let max_joint = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi = random_pure(da, &mut rng);
    let product = coherent_information(&kron(&(&psi * psi.adjoint()), &tau), &joint)?;
    let product_gap = (product - rhs).abs();
    let max_excess = max_joint - rhs;
    Ok(EbReport {
        max_single_bits: rhs,
        optimizer_bits: opt_val,
        optimizer_gap: analytic.map(|am| am.value_bits - opt_val),
        samples,
        max_joint_bits: max_joint,
        max_excess_bits: max_excess,
        product_bits: product,
        product_gap,
        tolerance: DIRECT_TOL,
        verdict: Verdict::from_bool(max_excess <= DIRECT_TOL && product_gap <= DIRECT_TOL),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub value_bits: f64,
    pub bound_bits: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn shannon(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// Exact `I(X_0; X'_{m1})` for uniform `X_0` on `[d]^{m0}` through
/// `f_0`, then per interval a kernel on coordinate 1 followed by `f_i`.
/// `f_list` holds `m1 + 1` permutation tables; `kernels[i][a][b] = P(b | a)`.
pub fn classical_bound_check(d: usize, m0: usize, m1: usize, f_list: &[Vec<usize>], kernels: &[Vec<Vec<f64>>]) -> Result<ClassicalReport> {
    let n = d.pow(m0 as u32);
    if f_list.len() != m1 + 1 || kernels.len() != m1 {
        return Err(QncError::DimensionError(format!("need {} maps and {m1} kernels", m1 + 1)));
    }
    for (i, f) in f_list.iter().enumerate() {
        let mut seen = vec![false; n];
        if f.len() != n || f.iter().any(|&y| y >= n || std::mem::replace(&mut seen[y], true)) {
            return Err(QncError::NotInvertible(format!("map {i} is not a permutation of {n} states")));
        }
    }
    for (i, k) in kernels.iter().enumerate() {
        let ok = k.len() == d
            && k.iter().all(|row| row.len() == d && row.iter().all(|&p| p >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if !ok {
            return Err(QncError::NotStochastic(format!("kernel {i}")));
        }
    }
    let rest = n / d;
    let mut joint_h = 0.0;
    let mut out = vec![0.0; n];
    let px = 1.0 / n as f64;
    for x0 in 0..n {
        let mut dist = vec![0.0; n];
        dist[f_list[0][x0]] = 1.0;
        for (k, f) in kernels.iter().zip(&f_list[1..]) {
            let mut hit = vec![0.0; n];
            for a in 0..d {
                for r in 0..rest {
                    let p = dist[a * rest + r];
                    if p == 0.0 {
                        continue;
                    }
                    for (b, &kb) in k[a].iter().enumerate() {
                        hit[b * rest + r] += p * kb;
                    }
                }
            }
            dist = vec![0.0; n];
            for (y, &p) in hit.iter().enumerate() {
                dist[f[y]] += p;
            }
        }
        joint_h += shannon(dist.iter().map(|&p| p * px));
        for (o, p) in out.iter_mut().zip(&dist) {
            *o += p * px;
        }
    }
    let value = (n as f64).log2() + shannon(out.into_iter()) - joint_h;
    let bound = (m0 - m1) as f64 * (d as f64).log2();
    Ok(ClassicalReport { value_bits: value, bound_bits: bound, tolerance: CLASSICAL_TOL, verdict: Verdict::from_bool(value >= bound - CLASSICAL_TOL), seed: None })
}

/// Random permutations and random kernels, one report per sample.
pub fn classical_sweep(d: usize, m0: usize, m1: usize, samples: usize, seed: u64) -> Result<Vec<ClassicalReport>> {
    let n = d.pow(m0 as u32);
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let fs: Vec<Vec<usize>> = (0..=m1)
                .map(|_| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
            let ks: Vec<Vec<Vec<f64>>> = (0..m1)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            let row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                            let s: f64 = row.iter().sum();
                            row.into_iter().map(|x| x / s).collect()
                        })
                        .collect()
                })
                .collect();
            let mut r = classical_bound_check(d, m0, m1, &fs, &ks)?;
            r.seed = Some(i as u64);
            Ok(r)
        })
        .collect()
}
