//! Property tests for the algebraic and numerical invariants.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qnc_core::capacity::{coherent_information, coherent_information_ops, pauli_channel, von_neumann_entropy};
use qnc_core::codeplan::{code_algebra, error_vectors, plan_code, Rho0Choice};
use qnc_core::constructions::{gen_lemma_l1, measure_ranks, RankTriple};
use qnc_core::dense::{haar_unitary, random_density};
use qnc_core::network::{CompiledNetwork, CorruptionModel, Layer, LayeredNetwork};
use qnc_core::simulate::{entanglement_fidelity, run_adaptive, run_individual, sample_rng, AdaptiveAdversary, KrausChannel};
use qnc_core::symplectic::{
    build_w_basis, compute_invariants, fp_pairing, fq_form, is_hyperbolic_basis, is_symplectic, random_invertible_matrix, random_symplectic,
    SymplecticContext,
};
use qnc_core::weyl::{metaplectic, WeylSpace};
use qnc_core::{CMat, FieldSpec, FqMatrix, FqVector, QncError};
use rand::Rng;

fn field_of(k: usize) -> FieldSpec {
    match k % 5 {
        0 => FieldSpec::prime(2).unwrap(),
        1 => FieldSpec::prime(3).unwrap(),
        2 => FieldSpec::standard(2, 2).unwrap(),
        3 => FieldSpec::prime(5).unwrap(),
        _ => FieldSpec::standard(3, 2).unwrap(),
    }
}

fn random_vector<R: Rng>(f: &FieldSpec, n: usize, rng: &mut R) -> FqVector {
    let q = f.order() as u64;
    FqVector::from_ints(f, &(0..n).map(|_| rng.random_range(0..q)).collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms(k in 0usize..5, a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let f = field_of(k);
        let q = f.order() as u64;
        let (x, y, z) = (f.element(a % q).unwrap(), f.element(b % q).unwrap(), f.element(c % q).unwrap());
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &(-&x), f.zero());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.inv().unwrap(), f.one());
        }
        // trace is F_p-linear and agrees with the polynomial definition
        let of = OracleField::new(f.p() as u64, f.modulus());
        prop_assert_eq!(x.trace() as u64, of.trace(x.to_int()));
        prop_assert_eq!((&x + &y).trace(), (x.trace() + y.trace()) % f.p());
        prop_assert_eq!((&x * &y).to_int(), of.mul(x.to_int(), y.to_int()));
        // Frobenius fixes the trace
        prop_assert_eq!(x.pow(f.p() as u64).trace(), x.trace());
    }

    #[test]
    fn rank_nullity_and_inverse(k in 0usize..5, n in 1usize..6, seed in any::<u64>()) {
        let f = field_of(k);
        let mut rng = sample_rng(seed, 0);
        let q = f.order() as u64;
        let rows: Vec<Vec<u64>> = (0..n).map(|_| (0..n + 1).map(|_| rng.random_range(0..q)).collect()).collect();
        let a = FqMatrix::from_int_rows(&f, &rows).unwrap();
        let ker = a.kernel_basis();
        prop_assert_eq!(a.rank() + ker.len(), n + 1);
        for v in &ker {
            prop_assert!(a.mul_vec(v).is_zero());
        }
        if f.degree() == 1 {
            prop_assert_eq!(a.rank(), rank_mod_p(&rows, f.p() as u64));
        }
        let g = random_invertible_matrix(&f, n, &mut rng);
        prop_assert!(g.mul(&g.inverse().unwrap()).is_identity());
    }

    #[test]
    fn symplectic_form_properties(k in 0usize..5, n in 1usize..4, seed in any::<u64>()) {
        let f = field_of(k);
        let ctx = SymplecticContext::new(&f, n);
        let mut rng = sample_rng(seed, 1);
        let (u, v, w) = (random_vector(&f, 2 * n, &mut rng), random_vector(&f, 2 * n, &mut rng), random_vector(&f, 2 * n, &mut rng));
        prop_assert!(fq_form(&u, &u, &ctx).unwrap().is_zero());
        prop_assert_eq!(fq_form(&u, &v, &ctx).unwrap(), -&fq_form(&v, &u, &ctx).unwrap());
        prop_assert_eq!(fq_form(&u.add(&w), &v, &ctx).unwrap(), &fq_form(&u, &v, &ctx).unwrap() + &fq_form(&w, &v, &ctx).unwrap());
        prop_assert_eq!(fp_pairing(&u, &v, &ctx).unwrap(), fq_form(&u, &v, &ctx).unwrap().trace());
        let g = random_symplectic(&ctx, &mut rng);
        prop_assert!(is_symplectic(&g, &ctx));
        prop_assert_eq!(fq_form(&g.mul_vec(&u), &g.mul_vec(&v), &ctx).unwrap(), fq_form(&u, &v, &ctx).unwrap());
    }

    #[test]
    fn clifford_invariants_and_w_basis(k in 0usize..3, m0 in 1usize..5, m1 in 1usize..4, seed in any::<u64>()) {
        let f = field_of(k);
        let ctx = SymplecticContext::new(&f, m0);
        let mut rng = sample_rng(seed, 2);
        let layers = (0..=m1).map(|_| Layer::Symplectic(random_symplectic(&ctx, &mut rng))).collect();
        let net = LayeredNetwork::new(&f, m0, layers).unwrap();
        let v = error_vectors(&net).unwrap();
        let (ms, mss) = compute_invariants(&v, &ctx, Some(m1)).unwrap();
        prop_assert!(ms >= 1 && mss >= ms && mss < 2 * m1 && mss <= m0);
        let w = build_w_basis(&qnc_core::linalg::independent_subset(&f, 2 * m0, &v), &ctx).unwrap();
        prop_assert_eq!((w.m_star, w.m_star_star), (ms, mss));
        prop_assert!(is_hyperbolic_basis(&w.w, &w.w_prime, &ctx));
        prop_assert!(w.covers(&v, &ctx));
        prop_assert!(is_symplectic(&w.g_star(&ctx), &ctx));
        match code_algebra(&net) {
            Ok(a) => prop_assert!(a.m_star_star < m0),
            Err(QncError::NoCapacity { m_star_star, .. }) => prop_assert!(m_star_star >= m0),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn monomials_multiply_like_matrices(k in 0usize..3, n in 1usize..3, a in any::<usize>(), b in any::<usize>()) {
        let f = field_of(k);
        let ws = WeylSpace::new(&f, n);
        let (la, lb) = (ws.label_codes(a % ws.label_count()), ws.label_codes(b % ws.label_count()));
        let (ma, mb) = (ws.monomial(&la), ws.monomial(&lb));
        let dense = ma.to_dense() * mb.to_dense();
        prop_assert!(max_entry(&(ma.compose(&mb).to_dense() - dense)) < 1e-12);
    }

    #[test]
    fn metaplectic_intertwines(k in 0usize..3, n in 1usize..3, seed in any::<u64>()) {
        let f = field_of(k);
        let ctx = SymplecticContext::new(&f, n);
        let mut rng = sample_rng(seed, 3);
        let g = random_symplectic(&ctx, &mut rng);
        let (u, cert) = metaplectic(&g, &ctx).unwrap();
        prop_assert!(u.is_unitary());
        prop_assert!(cert.max_deviation < 1e-9 && cert.max_phase_error < 1e-9);
        let of = OracleField::new(f.p() as u64, f.modulus());
        let a = random_vector(&f, 2 * n, &mut rng).to_ints();
        let ga = g.mul_vec(&FqVector::from_ints(&f, &a).unwrap()).to_ints();
        let (w, wg) = (of.weyl(&a[..n], &a[n..]), of.weyl(&ga[..n], &ga[n..]));
        let m = u.matrix() * w * u.matrix().adjoint();
        let c = (wg.adjoint() * &m).trace() / Complex64::new(wg.nrows() as f64, 0.0);
        prop_assert!((c.norm() - 1.0).abs() < 1e-9);
        prop_assert!(max_entry(&(m - wg * c)) < 1e-9);
    }

    #[test]
    fn entropy_range(d in 1usize..9, rank in 1usize..9, seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 4);
        let rho = random_density(d, rank.min(d), &mut rng);
        let h = von_neumann_entropy(&rho).unwrap();
        prop_assert!(h >= -1e-12 && h <= (d as f64).log2() + 1e-9);
        prop_assert!((h - entropy_bits(&rho)).abs() < 1e-9);
    }

    #[test]
    fn coherent_information_is_representation_independent(d in 2usize..4, k in 1usize..5, seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 5);
        let ch = KrausChannel::random(d, k, &mut rng);
        let rho = random_density(d, d, &mut rng);
        // K'_j = Σ u_jk K_k for a unitary u, padded with zero operators
        let m = k + 1;
        let u = haar_unitary(m, &mut rng);
        let mut padded = ch.ops().to_vec();
        padded.push(CMat::zeros(d, d));
        let mixed: Vec<CMat> = (0..m).map(|j| (0..m).fold(CMat::zeros(d, d), |acc, l| acc + &padded[l] * u[(j, l)])).collect();
        let a = coherent_information(&rho, &ch).unwrap();
        let b = coherent_information_ops(&rho, &mixed).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        let c = coherent_info_purified(&rho, &kraus_map(ch.ops()));
        prop_assert!((a - c).abs() < 1e-9);
    }

    #[test]
    fn coherent_information_additive_on_products(d in 2usize..3, k in 1usize..4, seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 6);
        let ch = KrausChannel::random(d, k, &mut rng);
        let rho = random_density(d, d, &mut rng);
        let single = coherent_information(&rho, &ch).unwrap();
        let double = coherent_information(&kron(&rho, &rho), &ch.tensor(&ch)).unwrap();
        prop_assert!((double - 2.0 * single).abs() < 1e-8);
    }

    #[test]
    fn simulation_is_trace_preserving_and_linear(seed in any::<u64>(), m0 in 1usize..4, m1 in 1usize..3) {
        let mut rng = sample_rng(seed, 7);
        let d = 1usize << m0;
        let net = CompiledNetwork::from_unitaries(2, m0, (0..=m1).map(|_| haar_unitary(d, &mut rng)).collect()).unwrap();
        let gammas: Vec<KrausChannel> = (0..m1).map(|_| KrausChannel::random(2, 3, &mut rng)).collect();
        let (r1, r2) = (random_density(d, d, &mut rng), random_density(d, 1, &mut rng));
        let o1 = run_individual(&net, &gammas, &r1).unwrap();
        let o2 = run_individual(&net, &gammas, &r2).unwrap();
        prop_assert!((o1.trace().re - 1.0).abs() < 1e-10);
        let p = 0.3;
        let mix = &r1 * Complex64::new(p, 0.0) + &r2 * Complex64::new(1.0 - p, 0.0);
        let om = run_individual(&net, &gammas, &mix).unwrap();
        prop_assert!(max_entry(&(om - (o1 * Complex64::new(p, 0.0) + o2 * Complex64::new(1.0 - p, 0.0)))) < 1e-9);
    }

    #[test]
    fn product_adversary_matches_individual(seed in any::<u64>(), mem in 1usize..4) {
        let mut rng = sample_rng(seed, 8);
        let net = CompiledNetwork::from_unitaries(2, 2, (0..3).map(|_| haar_unitary(4, &mut rng)).collect()).unwrap();
        let us: Vec<CMat> = (0..2).map(|_| haar_unitary(2, &mut rng)).collect();
        let mut init = CMat::zeros(mem, mem);
        init[(0, 0)] = Complex64::new(1.0, 0.0);
        let adv = AdaptiveAdversary::new(2, mem, init, us.iter().map(|u| kron(u, &CMat::identity(mem, mem))).collect()).unwrap();
        let gammas: Vec<KrausChannel> = us.iter().map(|u| KrausChannel::unitary(u.clone()).unwrap()).collect();
        let rho = random_density(4, 2, &mut rng);
        let a = run_adaptive(&net, &adv, &rho).unwrap();
        let b = run_individual(&net, &gammas, &rho).unwrap();
        prop_assert!(max_entry(&(a - b)) < 1e-9);
    }

    #[test]
    fn pauli_channel_weights(seed in any::<u64>()) {
        let f = FieldSpec::prime(3).unwrap();
        let mut rng = sample_rng(seed, 9);
        let raw: Vec<f64> = (0..9).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let dist: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let ch = pauli_channel(&f, 1, &dist).unwrap();
        let of = OracleField::new(3, &[0, 1]);
        let rho = random_density(3, 3, &mut rng);
        let mut expect = CMat::zeros(3, 3);
        for (a, &p) in dist.iter().enumerate() {
            let w = of.weyl(&[(a / 3) as u64], &[(a % 3) as u64]);
            expect += &w * &rho * w.adjoint() * Complex64::new(p, 0.0);
        }
        prop_assert!(max_entry(&(ch.apply(&rho) - expect)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn random_valid_triples_are_realized(p in prop::sample::select(vec![2u32, 3]), m1 in 1usize..4, extra in 0usize..2, a in any::<u8>(), b in any::<u8>(), c in any::<u8>()) {
        let f = FieldSpec::prime(p).unwrap();
        let l1 = 1 + a as usize % m1;
        let l2 = 1 + b as usize % m1;
        let l3 = 1 + c as usize % l1.min(l2);
        let m0 = l1 + l2 - l3 + extra;
        let t = RankTriple::new(l1, l2, l3, m0, m1).unwrap();
        let net = gen_lemma_l1(&t, &f).unwrap();
        prop_assert_eq!(measure_ranks(&net).unwrap(), (l1, l2, l3));
        let (ms, mss) = compute_invariants(&error_vectors(&net).unwrap(), &net.context(), Some(m1)).unwrap();
        prop_assert_eq!((ms, mss), t.expected_invariants());
    }

    #[test]
    fn codes_correct_random_clifford_networks(seed in any::<u64>(), m1 in 1usize..3) {
        let f = FieldSpec::prime(2).unwrap();
        let m0 = 3;
        let ctx = SymplecticContext::new(&f, m0);
        let mut rng = sample_rng(seed, 10);
        let layers = (0..=m1).map(|_| Layer::Symplectic(random_symplectic(&ctx, &mut rng))).collect();
        let net = LayeredNetwork::new(&f, m0, layers).unwrap();
        let plan = match plan_code(&net, Rho0Choice::MaximallyMixed) {
            Ok(p) => p,
            Err(QncError::NoCapacity { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!((plan.rate_bits - (m0 - plan.m_star_star()) as f64).abs() < 1e-12);
        let compiled = net.compile().unwrap();
        let adv = AdaptiveAdversary::haar(2, 2, m1, &mut rng);
        let fid = entanglement_fidelity(plan.codec(), &compiled, &CorruptionModel::Adaptive(adv)).unwrap();
        prop_assert!(fid >= 1.0 - 1e-9, "fidelity {}", fid);
        let gammas = (0..m1).map(|_| KrausChannel::random(2, 4, &mut rng)).collect();
        let fid = entanglement_fidelity(plan.codec(), &compiled, &CorruptionModel::Individual(gammas)).unwrap();
        prop_assert!(fid >= 1.0 - 1e-9, "fidelity {}", fid);
    }
}
