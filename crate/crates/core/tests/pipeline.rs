//! End-to-end checks: DAG reorganization against a direct wire-level
//! simulation, code recovery across corruption models, and configuration
//! round trips.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use num_complex::Complex64;
use qnc_core::codeplan::{plan_code, Rho0Choice};
use qnc_core::config::NetworkConfig;
use qnc_core::constructions::worst_case_network;
use qnc_core::dense::{haar_unitary, random_density};
use qnc_core::network::{reorganize, CompiledNetwork, CorruptionModel, DagEdge, DagNetwork, DagNode, Layer, LayeredNetwork, NodeKind, NodeOp};
use qnc_core::simulate::{entanglement_fidelity, run, run_adaptive, run_individual, sample_rng, AdaptiveAdversary, Codec, KrausChannel};
use qnc_core::symplectic::random_invertible_matrix;
use qnc_core::weyl::DenseOperator;
use qnc_core::{CMat, FieldSpec, FqMatrix, FqVector};
use rand::seq::SliceRandom;
use rand::Rng;

/// Local unitary `|x> -> |g x>` on `g.rows()` registers of `F_p`.
fn linear_unitary(g: &FqMatrix, p: usize) -> CMat {
    let n = g.rows();
    let d = p.pow(n as u32);
    let digits = |mut x: usize| -> Vec<u64> {
        let mut v = vec![0; n];
        for k in (0..n).rev() {
            v[k] = (x % p) as u64;
            x /= p;
        }
        v
    };
    let mut u = CMat::zeros(d, d);
    for x in 0..d {
        let gx = g.mul_vec(&FqVector::from_ints(g.field(), &digits(x)).unwrap()).to_ints();
        let y = gx.iter().fold(0usize, |acc, &c| acc * p + c as usize);
        u[(y, x)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Runs the DAG directly on `m0` wires: nodes fire highest id first among
/// the ready ones, a corrupted edge is hit as soon as it is produced, and no
/// wire is ever moved except by the receiver's final reordering.
fn simulate_dag(dag: &DagNetwork, channel_of: &BTreeMap<usize, KrausChannel>, rho: &CMat) -> CMat {
    let q = dag.field().order();
    let m0 = dag.m0();
    let dims = vec![q; m0];
    let mut rho = rho.clone();
    let mut slots: Vec<usize> = dag.out_edges(dag.sender());
    let hit = |rho: &CMat, e: usize, slots: &[usize]| -> CMat {
        match channel_of.get(&e) {
            None => rho.clone(),
            Some(ch) => {
                let pos = slots.iter().position(|&s| s == e).unwrap();
                let ops: Vec<CMat> = ch.ops().iter().map(|k| embed_op(k, &dims, &[pos])).collect();
                let out = kraus_map(&ops)(rho);
                out
            }
        }
    };
    for e in slots.clone() {
        rho = hit(&rho, e, &slots);
    }
    let mut fired: BTreeSet<usize> = BTreeSet::from([dag.sender()]);
    let all: Vec<usize> = dag.node_ids().collect();
    loop {
        let ready: Vec<usize> = all
            .iter()
            .copied()
            .filter(|v| !fired.contains(v) && dag.in_edges(*v).iter().all(|&e| fired.contains(&dag.edge(e).unwrap().from)))
            .collect();
        let Some(&v) = ready.iter().max() else { break };
        fired.insert(v);
        let ins = dag.in_edges(v);
        let positions: Vec<usize> = ins.iter().map(|e| slots.iter().position(|s| s == e).unwrap()).collect();
        match dag.node(v).unwrap() {
            NodeKind::Receiver => {
                // output register k carries in-edge k
                let mut perm = CMat::zeros(rho.nrows(), rho.nrows());
                let d = rho.nrows();
                for x in 0..d {
                    let mut dig = vec![0; m0];
                    let mut t = x;
                    for k in (0..m0).rev() {
                        dig[k] = t % q;
                        t /= q;
                    }
                    let y = positions.iter().fold(0usize, |acc, &s| acc * q + dig[s]);
                    perm[(y, x)] = Complex64::new(1.0, 0.0);
                }
                return &perm * rho * perm.adjoint();
            }
            NodeKind::Intermediate(op) => {
                let local = match op {
                    NodeOp::Identity => None,
                    NodeOp::BasisLinear(g) => Some(linear_unitary(g, q)),
                    NodeOp::Dense(u) => Some(u.matrix().clone()),
                };
                if let Some(u) = local {
                    let full = embed_op(&u, &dims, &positions);
                    rho = &full * rho * full.adjoint();
                }
                for (k, e) in dag.out_edges(v).into_iter().enumerate() {
                    slots[positions[k]] = e;
                    rho = hit(&rho, e, &slots);
                }
            }
            NodeKind::Sender => unreachable!(),
        }
    }
    panic!("receiver never fired")
}

struct RandomDag {
    dag: DagNetwork,
    all_linear: bool,
}

/// Random DAG over `F_2` with `m0` wires; edge ids are shuffled so that id
/// order differs from creation order.
fn random_dag<R: Rng>(m0: usize, m1: usize, dense: bool, rng: &mut R) -> RandomDag {
    let f = FieldSpec::prime(2).unwrap();
    let layers = rng.random_range(1..=3);
    let mut raw_edges: Vec<(usize, usize)> = Vec::new();
    let mut live: Vec<usize> = Vec::new();
    for _ in 0..m0 {
        live.push(raw_edges.len());
        raw_edges.push((0, usize::MAX));
    }
    let mut nodes_ops: Vec<(usize, usize)> = Vec::new();
    for node in 1..=layers {
        let k = rng.random_range(1..=live.len().min(3));
        live.shuffle(rng);
        let taken: Vec<usize> = live.drain(..k).collect();
        for &e in &taken {
            raw_edges[e].1 = node;
        }
        for _ in 0..k {
            live.push(raw_edges.len());
            raw_edges.push((node, usize::MAX));
        }
        nodes_ops.push((node, k));
    }
    let receiver = layers + 1;
    for &e in &live {
        raw_edges[e].1 = receiver;
    }
    let mut ids: Vec<usize> = (0..raw_edges.len()).collect();
    ids.shuffle(rng);
    let edges: Vec<DagEdge> = raw_edges.iter().enumerate().map(|(i, &(from, to))| DagEdge { id: ids[i], from, to }).collect();
    let mut all_linear = true;
    let mut nodes = vec![DagNode { id: 0, kind: NodeKind::Sender }, DagNode { id: receiver, kind: NodeKind::Receiver }];
    for (id, k) in nodes_ops {
        let op = match rng.random_range(0..3) {
            0 => NodeOp::Identity,
            1 if dense => {
                all_linear = false;
                NodeOp::Dense(DenseOperator::new(haar_unitary(1 << k, rng)).unwrap())
            }
            _ => NodeOp::BasisLinear(random_invertible_matrix(&f, k, rng)),
        };
        nodes.push(DagNode { id, kind: NodeKind::Intermediate(op) });
    }
    let mut pick: Vec<usize> = edges.iter().map(|e| e.id).collect();
    pick.shuffle(rng);
    let corrupted = pick[..m1].to_vec();
    RandomDag { dag: DagNetwork::new(&f, nodes, edges, corrupted).unwrap(), all_linear }
}

fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * hermitian_spectrum(&(a - b)).0.iter().map(|l| l.abs()).sum::<f64>()
}

#[test]
fn reorganize_preserves_the_end_to_end_channel() {
    for i in 0..40u64 {
        let mut rng = sample_rng(0xDA6, i);
        let m0 = rng.random_range(1..=4);
        let m1 = rng.random_range(1..=2);
        let rd = random_dag(m0, m1, i % 2 == 1, &mut rng);
        let r = reorganize(&rd.dag).unwrap();
        assert_eq!(r.network.m1(), m1);
        let mut sorted = r.corruption_order.clone();
        sorted.sort_unstable();
        let mut expect = rd.dag.corrupted().to_vec();
        expect.sort_unstable();
        assert_eq!(sorted, expect);
        if rd.all_linear {
            assert!(r.network.layers().iter().all(|l| matches!(l, Layer::BasisLinear(_))), "sample {i}");
        }
        let compiled = r.network.compile().unwrap();
        let gammas: Vec<KrausChannel> = (0..m1).map(|_| KrausChannel::random(2, rng.random_range(1..=4), &mut rng)).collect();
        let channel_of: BTreeMap<usize, KrausChannel> = r.corruption_order.iter().copied().zip(gammas.iter().cloned()).collect();
        let d = 1usize << m0;
        let mut inputs: Vec<CMat> = (0..d)
            .map(|x| {
                let mut b = CMat::zeros(d, d);
                b[(x, x)] = Complex64::new(1.0, 0.0);
                b
            })
            .collect();
        inputs.push(random_density(d, d, &mut rng));
        inputs.push(random_density(d, 1, &mut rng));
        for rho in &inputs {
            let layered = run_individual(&compiled, &gammas, rho).unwrap();
            let direct = simulate_dag(&rd.dag, &channel_of, rho);
            let td = trace_distance(&layered, &direct);
            assert!(td < 1e-9, "sample {i}: trace distance {td}");
        }
    }
}

#[test]
fn six_wire_example_matches_direct_simulation() {
    let f = FieldSpec::prime(2).unwrap();
    let e = |id, from, to| DagEdge { id, from, to };
    let g2 = FqMatrix::from_int_rows(&f, &[vec![1, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]).unwrap();
    let nodes = vec![
        DagNode { id: 0, kind: NodeKind::Sender },
        DagNode { id: 1, kind: NodeKind::Intermediate(NodeOp::BasisLinear(FqMatrix::from_int_rows(&f, &[vec![1, 1], vec![0, 1]]).unwrap())) },
        DagNode { id: 2, kind: NodeKind::Intermediate(NodeOp::BasisLinear(g2)) },
        DagNode { id: 3, kind: NodeKind::Intermediate(NodeOp::Identity) },
        DagNode { id: 4, kind: NodeKind::Receiver },
    ];
    let edges = vec![
        e(0, 0, 4),
        e(1, 0, 1),
        e(2, 0, 1),
        e(3, 1, 4),
        e(4, 1, 2),
        e(5, 0, 2),
        e(6, 0, 2),
        e(7, 0, 3),
        e(8, 2, 3),
        e(9, 2, 3),
        e(10, 2, 4),
        e(11, 3, 4),
        e(12, 3, 4),
        e(13, 3, 4),
    ];
    let dag = DagNetwork::new(&f, nodes, edges, vec![3, 8]).unwrap();
    let r = reorganize(&dag).unwrap();
    assert_eq!(r.corruption_order, vec![8, 3]);
    let compiled = r.network.compile().unwrap();
    let mut rng = sample_rng(26, 0);
    let gammas = vec![KrausChannel::random(2, 3, &mut rng), KrausChannel::random(2, 2, &mut rng)];
    let channel_of: BTreeMap<usize, KrausChannel> = [(8, gammas[0].clone()), (3, gammas[1].clone())].into();
    let rho = random_density(64, 3, &mut rng);
    let td = trace_distance(&run_individual(&compiled, &gammas, &rho).unwrap(), &simulate_dag(&dag, &channel_of, &rho));
    assert!(td < 1e-9, "trace distance {td}");
    // the code for the reorganized network has positive rate
    let plan = plan_code(&r.network, Rho0Choice::MaximallyMixed).unwrap();
    assert!(plan.rate_bits >= (6 - 2 * 2 + 1) as f64);
}

/// `U_d (Γ ∘ U)(U_e (ρ ⊗ ρ0) U_e^†) U_d^†` traced to the message.
fn recover(codec: &Codec, net: &CompiledNetwork, corruption: &CorruptionModel, msg: &CMat) -> CMat {
    let out = run(net, corruption, &codec.encode(msg).unwrap()).unwrap();
    codec.decode(&out).unwrap()
}

#[test]
fn worst_case_code_recovers_messages_under_every_model() {
    let f = FieldSpec::prime(2).unwrap();
    for (m0, m1) in [(4, 2), (3, 1), (5, 2)] {
        let net = worst_case_network(m0, m1, &f).unwrap();
        let compiled = net.compile().unwrap();
        for choice in [Rho0Choice::MaximallyMixed, Rho0Choice::Zero] {
            let plan = plan_code(&net, choice).unwrap();
            assert_eq!(plan.message_registers, m0 + 1 - 2 * m1);
            let codec = plan.codec();
            let dm = codec.message_dim();
            let mut rng = sample_rng(m0 as u64, m1 as u64);
            let mut models = vec![
                CorruptionModel::MixSubstitution,
                CorruptionModel::Individual(vec![KrausChannel::completely_depolarizing(2); m1]),
                CorruptionModel::Individual((0..m1).map(|_| KrausChannel::random(2, 4, &mut rng)).collect()),
            ];
            if m0 <= 4 {
                models.push(CorruptionModel::Adaptive(AdaptiveAdversary::haar(2, 4, m1, &mut rng)));
            }
            for model in &models {
                for _ in 0..3 {
                    let msg = random_density(dm, rng.random_range(1..=dm), &mut rng);
                    let got = recover(codec, &compiled, model, &msg);
                    assert!(max_entry(&(got - &msg)) < 1e-9, "m0={m0} m1={m1} {choice:?}");
                }
                assert!(entanglement_fidelity(codec, &compiled, model).unwrap() >= 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn uncoded_network_loses_the_message() {
    let codec = Codec::uncoded(2, 2, 1, CMat::identity(2, 2) / Complex64::new(2.0, 0.0));
    let net = LayeredNetwork::identity(&FieldSpec::prime(2).unwrap(), 2, 1).compile().unwrap();
    let dep = CorruptionModel::Individual(vec![KrausChannel::completely_depolarizing(2)]);
    let fid = entanglement_fidelity(&codec, &net, &dep).unwrap();
    assert!(fid <= 0.5 + 1e-9);
    assert!((fid - 0.25).abs() < 1e-12);
    let clean = CorruptionModel::Individual(vec![KrausChannel::identity(2)]);
    assert!((entanglement_fidelity(&codec, &net, &clean).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn swap_adversary_relays_its_own_state() {
    // Ũ = SWAP(register 1, memory) with memory_dim = q
    let q = 2;
    let mut swap = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            swap[(b * 2 + a, a * 2 + b)] = Complex64::new(1.0, 0.0);
        }
    }
    let mut init = CMat::zeros(2, 2);
    init[(1, 1)] = Complex64::new(1.0, 0.0);
    let adv = AdaptiveAdversary::new(q, 2, init.clone(), vec![swap]).unwrap();
    let net = CompiledNetwork::from_unitaries(2, 2, vec![CMat::identity(4, 4); 2]).unwrap();
    let mut rng = sample_rng(5, 5);
    for _ in 0..4 {
        let rho = random_density(4, 2, &mut rng);
        let out = run_adaptive(&net, &adv, &rho).unwrap();
        let r1 = partial_trace_keep(&out, &[2, 2], &[0]);
        assert!(max_entry(&(r1 - &init)) < 1e-12);
        let r2 = partial_trace_keep(&out, &[2, 2], &[1]);
        assert!(max_entry(&(r2 - partial_trace_keep(&rho, &[2, 2], &[1]))) < 1e-12);
    }
}

#[test]
fn mix_substitution_equals_uniform_weyl_twirl() {
    let f = FieldSpec::prime(3).unwrap();
    let of = OracleField::new(3, f.modulus());
    let mut rng = sample_rng(9, 9);
    let net = CompiledNetwork::from_unitaries(3, 2, (0..3).map(|_| haar_unitary(9, &mut rng)).collect()).unwrap();
    let twirl: Vec<CMat> = (0..9)
        .map(|a| kron(&of.weyl(&[a / 3], &[a % 3]), &CMat::identity(1, 1)) * Complex64::new(1.0 / 3.0, 0.0))
        .collect();
    let twirl = KrausChannel::new(twirl).unwrap();
    let rho = random_density(9, 4, &mut rng);
    let a = run(&net, &CorruptionModel::MixSubstitution, &rho).unwrap();
    let b = run_individual(&net, &[twirl.clone(), twirl], &rho).unwrap();
    assert!(max_entry(&(a - b)) < 1e-10);
}

#[test]
fn network_configs_round_trip_through_json() {
    let f = FieldSpec::prime(3).unwrap();
    let net = worst_case_network(4, 2, &f).unwrap();
    let text = serde_json::to_string_pretty(&NetworkConfig::from_layered(&net)).unwrap();
    let back: NetworkConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back.build().unwrap().layered(), &net);
    let dense = LayeredNetwork::new(
        &FieldSpec::prime(2).unwrap(),
        1,
        vec![Layer::Dense(DenseOperator::new(haar_unitary(2, &mut sample_rng(1, 1))).unwrap()), Layer::Dense(DenseOperator::identity(2))],
    )
    .unwrap();
    let text = serde_json::to_string(&NetworkConfig::from_layered(&dense)).unwrap();
    let back: NetworkConfig = serde_json::from_str(&text).unwrap();
    let rebuilt = back.build().unwrap();
    let (a, b) = (rebuilt.layered().compile().unwrap(), dense.compile().unwrap());
    assert!(max_entry(&(&a.unitaries[0] - &b.unitaries[0])) < 1e-15);
    assert!(serde_json::from_str::<NetworkConfig>(r#"{"field": {"p": 2}, "layers": [{"bogus": []}]}"#).is_err());
}
