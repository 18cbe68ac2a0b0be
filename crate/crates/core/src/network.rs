//! Network descriptions: the layered form (global unitaries `U_0..U_{m1}`
//! with register 1 corrupted between consecutive layers) and the DAG form,
//! plus the reorganization of a DAG into layered form.

use std::collections::{BTreeMap, BTreeSet};

use crate::dense::{embed, CMat};
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::FqMatrix;
use crate::simulate::{AdaptiveAdversary, KrausChannel};
use crate::symplectic::{is_symplectic, SymplecticContext};
use crate::weyl::{basis_linear_unitary, metaplectic, DenseOperator};

/// Largest joint dimension simulated densely.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// A symplectic `2 m0 x 2 m0` matrix realized by `U(g)`.
    Symplectic(FqMatrix),
    /// An invertible `m0 x m0` matrix realized by `|x> -> |g x>`.
    BasisLinear(FqMatrix),
    /// An explicit unitary on `q^m0` dimensions.
    Dense(DenseOperator),
}

impl Layer {
    /// The symplectic action, if the layer is Clifford.
    pub fn symplectic_matrix(&self) -> Option<FqMatrix> {
        match self {
            Layer::Symplectic(g) => Some(g.clone()),
            Layer::BasisLinear(g) => Some(FqMatrix::block_diag(g, &g.inverse().ok()?.transpose())),
            Layer::Dense(_) => None,
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Layer::Dense(_))
    }

    pub fn unitary(&self, ctx: &SymplecticContext) -> Result<CMat> {
        match self {
            Layer::Symplectic(g) => Ok(metaplectic(g, ctx)?.0.into_matrix()),
            Layer::BasisLinear(g) => Ok(basis_linear_unitary(g)?.into_matrix()),
            Layer::Dense(u) => Ok(u.matrix().clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredNetwork {
    field: FieldSpec,
    m0: usize,
    layers: Vec<Layer>,
}

fn checked_dim(q: usize, m0: usize, mem: usize) -> Result<usize> {
    let dim = (q as u128).checked_pow(m0 as u32).map(|d| d * mem as u128).unwrap_or(u128::MAX);
    if dim > MAX_DIM as u128 {
        return Err(QncError::ResourceLimit { dim: dim.min(usize::MAX as u128) as usize, limit: MAX_DIM });
    }
    Ok(dim as usize)
}

impl LayeredNetwork {
    /// `layers` holds `U_0..U_{m1}`, so `m1 = layers.len() - 1`.
    pub fn new(field: &FieldSpec, m0: usize, layers: Vec<Layer>) -> Result<Self> {
        if m0 == 0 || layers.is_empty() {
            return Err(QncError::InvalidNetwork("need m0 >= 1 and at least one layer".into()));
        }
        let ctx = SymplecticContext::new(field, m0);
        for (i, layer) in layers.iter().enumerate() {
            match layer {
                Layer::Symplectic(g) => {
                    if g.field() != field {
                        return Err(QncError::FieldMismatch);
                    }
                    if !is_symplectic(g, &ctx) {
                        return Err(QncError::NotSymplectic);
                    }
                }
                Layer::BasisLinear(g) => {
                    if g.field() != field {
                        return Err(QncError::FieldMismatch);
                    }
                    if g.rows() != m0 || g.cols() != m0 {
                        return Err(QncError::DimensionError(format!("layer {i}: basis-linear map must be {m0}x{m0}")));
                    }
                    g.inverse()?;
                }
                Layer::Dense(u) => {
                    let d = checked_dim(field.order(), m0, 1)?;
                    if u.dim() != d {
                        return Err(QncError::DimensionError(format!("layer {i}: unitary of dim {} on {d}", u.dim())));
                    }
                    if !u.is_unitary() {
                        return Err(QncError::InvalidNetwork(format!("layer {i} is not unitary")));
                    }
                }
            }
        }
        Ok(Self { field: field.clone(), m0, layers })
    }

    pub fn identity(field: &FieldSpec, m0: usize, m1: usize) -> Self {
        let layers = (0..=m1).map(|_| Layer::BasisLinear(FqMatrix::identity(field, m0))).collect();
        Self { field: field.clone(), m0, layers }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn context(&self) -> SymplecticContext {
        SymplecticContext::new(&self.field, self.m0)
    }

    pub fn is_clifford(&self) -> bool {
        self.layers.iter().all(Layer::is_clifford)
    }

    /// `g_0..g_{m1}`; fails with `NotClifford` on dense layers.
    pub fn symplectic_layers(&self) -> Result<Vec<FqMatrix>> {
        self.layers.iter().map(|l| l.symplectic_matrix().ok_or(QncError::NotClifford)).collect()
    }

    /// `ḡ_0..ḡ_{m1}` when every layer is basis-linear.
    pub fn basis_linear_layers(&self) -> Option<Vec<FqMatrix>> {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::BasisLinear(g) => Some(g.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn compile(&self) -> Result<CompiledNetwork> {
        checked_dim(self.field.order(), self.m0, 1)?;
        let ctx = self.context();
        let unitaries = self.layers.iter().map(|l| l.unitary(&ctx)).collect::<Result<Vec<_>>>()?;
        Ok(CompiledNetwork { q: self.field.order(), m0: self.m0, unitaries })
    }
}

/// A layered network with every layer realized as a dense unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNetwork {
    pub q: usize,
    pub m0: usize,
    pub unitaries: Vec<CMat>,
}

impl CompiledNetwork {
    pub fn from_unitaries(q: usize, m0: usize, unitaries: Vec<CMat>) -> Result<Self> {
        let d = checked_dim(q, m0, 1)?;
        if unitaries.is_empty() || unitaries.iter().any(|u| u.shape() != (d, d)) {
            return Err(QncError::DimensionError(format!("layers must be {d}x{d}")));
        }
        Ok(Self { q, m0, unitaries })
    }

    pub fn dim(&self) -> usize {
        self.q.pow(self.m0 as u32)
    }

    pub fn m1(&self) -> usize {
        self.unitaries.len() - 1
    }

    /// `U_{m1} ⋯ U_0`.
    pub fn total(&self) -> CMat {
        let d = self.dim();
        self.unitaries.iter().fold(CMat::identity(d, d), |acc, u| u * acc)
    }

    /// Resource guard for a memory of dimension `mem`.
    pub fn check_budget(&self, mem: usize) -> Result<usize> {
        checked_dim(self.q, self.m0, mem)
    }
}

/// Corruption on the `m1` intervals.
#[derive(Debug, Clone)]
pub enum CorruptionModel {
    /// A memoryless channel `Γ_i` on register 1 per interval.
    Individual(Vec<KrausChannel>),
    /// Unitaries `Ũ_i` on register 1 and a persistent memory.
    Adaptive(AdaptiveAdversary),
    /// Register 1 replaced by the completely mixed state each interval.
    MixSubstitution,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeOp {
    Identity,
    /// Invertible map on the in-edge registers ordered by edge id.
    BasisLinear(FqMatrix),
    Dense(DenseOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Sender,
    Receiver,
    Intermediate(NodeOp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagNode {
    pub id: usize,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagEdge {
    pub id: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagNetwork {
    field: FieldSpec,
    nodes: BTreeMap<usize, NodeKind>,
    edges: BTreeMap<usize, DagEdge>,
    corrupted: Vec<usize>,
    sender: usize,
    receiver: usize,
    m0: usize,
}

impl DagNetwork {
    pub fn new(field: &FieldSpec, nodes: Vec<DagNode>, edges: Vec<DagEdge>, corrupted: Vec<usize>) -> Result<Self> {
        let mut node_map = BTreeMap::new();
        for n in nodes {
            if node_map.insert(n.id, n.kind).is_some() {
                return Err(QncError::InvalidNetwork(format!("duplicate node id {}", n.id)));
            }
        }
        let mut edge_map = BTreeMap::new();
        for e in edges {
            if !node_map.contains_key(&e.from) || !node_map.contains_key(&e.to) {
                return Err(QncError::InvalidNetwork(format!("edge {} references an unknown node", e.id)));
            }
            if edge_map.insert(e.id, e).is_some() {
                return Err(QncError::InvalidNetwork(format!("duplicate edge id {}", e.id)));
            }
        }
        let find = |want: fn(&NodeKind) -> bool, name: &str| -> Result<usize> {
            let ids: Vec<usize> = node_map.iter().filter(|(_, k)| want(k)).map(|(&id, _)| id).collect();
            match ids.as_slice() {
                [id] => Ok(*id),
                _ => Err(QncError::InvalidNetwork(format!("expected exactly one {name}, found {}", ids.len()))),
            }
        };
        let sender = find(|k| matches!(k, NodeKind::Sender), "sender")?;
        let receiver = find(|k| matches!(k, NodeKind::Receiver), "receiver")?;
        let mut seen = BTreeSet::new();
        for c in &corrupted {
            if !edge_map.contains_key(c) {
                return Err(QncError::InvalidNetwork(format!("corrupted edge {c} does not exist")));
            }
            if !seen.insert(*c) {
                return Err(QncError::InvalidNetwork(format!("edge {c} listed as corrupted twice")));
            }
        }
        let mut dag = Self {
            field: field.clone(),
            nodes: node_map,
            edges: edge_map,
            corrupted,
            sender,
            receiver,
            m0: 0,
        };
        dag.m0 = dag.out_edges(sender).len();
        dag.check_degrees()?;
        dag.topological_order(false)?;
        Ok(dag)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.corrupted.len()
    }

    pub fn corrupted(&self) -> &[usize] {
        &self.corrupted
    }

    pub fn sender(&self) -> usize {
        self.sender
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn node(&self, id: usize) -> Option<&NodeKind> {
        self.nodes.get(&id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edge(&self, id: usize) -> Option<&DagEdge> {
        self.edges.get(&id)
    }

    /// Incoming edge ids sorted ascending.
    pub fn in_edges(&self, node: usize) -> Vec<usize> {
        self.edges.values().filter(|e| e.to == node).map(|e| e.id).collect()
    }

    /// Outgoing edge ids sorted ascending.
    pub fn out_edges(&self, node: usize) -> Vec<usize> {
        self.edges.values().filter(|e| e.from == node).map(|e| e.id).collect()
    }

    fn check_degrees(&self) -> Result<()> {
        if self.m0 == 0 {
            return Err(QncError::DegreeError("sender has no outgoing edges".into()));
        }
        if !self.in_edges(self.sender).is_empty() || !self.out_edges(self.receiver).is_empty() {
            return Err(QncError::DegreeError("sender has inputs or receiver has outputs".into()));
        }
        let r_in = self.in_edges(self.receiver).len();
        if r_in != self.m0 {
            return Err(QncError::DegreeError(format!("sender out-degree {} != receiver in-degree {r_in}", self.m0)));
        }
        let q = self.field.order();
        for (&id, kind) in &self.nodes {
            if let NodeKind::Intermediate(op) = kind {
                let (din, dout) = (self.in_edges(id).len(), self.out_edges(id).len());
                if din != dout || din == 0 {
                    return Err(QncError::DegreeError(format!("node {id} has in-degree {din} and out-degree {dout}")));
                }
                match op {
                    NodeOp::Identity => {}
                    NodeOp::BasisLinear(g) => {
                        if g.rows() != din || g.cols() != din {
                            return Err(QncError::DegreeError(format!("node {id}: map is {}x{}, degree {din}", g.rows(), g.cols())));
                        }
                        if g.field() != &self.field {
                            return Err(QncError::FieldMismatch);
                        }
                        g.inverse()?;
                    }
                    NodeOp::Dense(u) => {
                        let d = checked_dim(q, din, 1)?;
                        if u.dim() != d {
                            return Err(QncError::DegreeError(format!("node {id}: unitary dim {} for degree {din}", u.dim())));
                        }
                        if !u.is_unitary() {
                            return Err(QncError::InvalidNetwork(format!("node {id} is not unitary")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Kahn's algorithm, picking the lowest (or highest) ready node id.
    pub fn topological_order(&self, highest_first: bool) -> Result<Vec<usize>> {
        let mut indeg: BTreeMap<usize, usize> = self.nodes.keys().map(|&id| (id, 0)).collect();
        for e in self.edges.values() {
            *indeg.get_mut(&e.to).expect("validated") += 1;
        }
        let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = if highest_first { ready.pop_last() } else { ready.pop_first() } {
            order.push(v);
            for e in self.out_edges(v) {
                let to = self.edges[&e].to;
                let d = indeg.get_mut(&to).expect("validated");
                *d -= 1;
                if *d == 0 {
                    ready.insert(to);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(QncError::NotADag);
        }
        Ok(order)
    }

    pub fn has_dense_nodes(&self) -> bool {
        self.nodes.values().any(|k| matches!(k, NodeKind::Intermediate(NodeOp::Dense(_))))
    }
}

/// Output of [`reorganize`]: the layered network and the corrupted edge ids
/// in interval order.
#[derive(Debug, Clone, PartialEq)]
pub struct Reorganized {
    pub network: LayeredNetwork,
    pub corruption_order: Vec<usize>,
}

enum WireOp {
    Linear(FqMatrix),
    Dense(CMat),
}

fn transposition(field: &FieldSpec, n: usize, a: usize, b: usize) -> FqMatrix {
    let mut m = FqMatrix::identity(field, n);
    if a != b {
        m.set(a, a, field.zero());
        m.set(b, b, field.zero());
        m.set(a, b, field.one());
        m.set(b, a, field.one());
    }
    m
}

/// Embeds `g` (acting on `positions`, in order) into an `n x n` matrix.
pub fn embed_linear(g: &FqMatrix, n: usize, positions: &[usize]) -> FqMatrix {
    let f = g.field();
    let mut m = FqMatrix::identity(f, n);
    for (a, &pa) in positions.iter().enumerate() {
        for (b, &pb) in positions.iter().enumerate() {
            m.set(pa, pb, g.get(a, b).clone());
        }
    }
    m
}

/// Rewrites a DAG as `m1 + 1` global layers over `m0` wires.
///
/// Nodes fire in Kahn order (lowest id first). Each corruption is placed
/// right before the head of its edge fires, in edge-id order; the corrupted
/// wire is first swapped to position 1 and the layer is closed. The last
/// layer ends with the permutation that lists the receiver's in-edges in id
/// order. Node maps act on their in-edges in id order and out-edge `k`
/// takes the wire of in-edge `k`.
pub fn reorganize(dag: &DagNetwork) -> Result<Reorganized> {
    let f = dag.field();
    let m0 = dag.m0();
    let q = f.order();
    let dense_mode = dag.has_dense_nodes();
    if dense_mode {
        checked_dim(q, m0, 1)?;
    }
    let dims = vec![q; m0];
    let corrupted: BTreeSet<usize> = dag.corrupted().iter().copied().collect();

    let mut slots = dag.out_edges(dag.sender());
    let mut ops: Vec<WireOp> = Vec::new();
    let mut closed: Vec<Vec<WireOp>> = Vec::new();
    let mut order = Vec::new();
    let slot_of = |slots: &[usize], e: usize| slots.iter().position(|&s| s == e).expect("edge is live");

    for v in dag.topological_order(false)? {
        if v == dag.sender() {
            continue;
        }
        for e in dag.in_edges(v).into_iter().filter(|e| corrupted.contains(e)) {
            let s = slot_of(&slots, e);
            if s != 0 {
                ops.push(WireOp::Linear(transposition(f, m0, 0, s)));
                slots.swap(0, s);
            }
            closed.push(std::mem::take(&mut ops));
            order.push(e);
        }
        let ins = dag.in_edges(v);
        let positions: Vec<usize> = ins.iter().map(|&e| slot_of(&slots, e)).collect();
        match dag.node(v).expect("node exists") {
            NodeKind::Receiver => {
                let mut p = FqMatrix::zeros(f, m0, m0);
                for (k, &s) in positions.iter().enumerate() {
                    p.set(k, s, f.one());
                }
                ops.push(WireOp::Linear(p));
                slots = ins;
            }
            NodeKind::Intermediate(op) => {
                match op {
                    NodeOp::Identity => {}
                    NodeOp::BasisLinear(g) => ops.push(WireOp::Linear(embed_linear(g, m0, &positions))),
                    NodeOp::Dense(u) => ops.push(WireOp::Dense(embed(u.matrix(), &dims, &positions))),
                }
                for (k, e) in dag.out_edges(v).into_iter().enumerate() {
                    slots[positions[k]] = e;
                }
            }
            NodeKind::Sender => unreachable!("single sender"),
        }
    }
    closed.push(ops);

    let layers = closed
        .into_iter()
        .map(|ops| -> Result<Layer> {
            if dense_mode {
                let d = q.pow(m0 as u32);
                let mut u = CMat::identity(d, d);
                for op in ops {
                    let m = match op {
                        WireOp::Linear(g) => basis_linear_unitary(&g)?.into_matrix(),
                        WireOp::Dense(m) => m,
                    };
                    u = m * u;
                }
                Ok(Layer::Dense(DenseOperator::new(u)?))
            } else {
                let mut g = FqMatrix::identity(f, m0);
                for op in ops {
                    match op {
                        WireOp::Linear(h) => g = h.mul(&g),
                        WireOp::Dense(_) => unreachable!("no dense nodes"),
                    }
                }
                Ok(Layer::BasisLinear(g))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reorganized { network: LayeredNetwork::new(f, m0, layers)?, corruption_order: order })
}
