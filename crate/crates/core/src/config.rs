//! Serializable descriptions of fields and networks, shared by the command
//! line tool and the generators. Field elements are integer codes
//! (little-endian base-`p` coefficients).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::CMat;
use crate::error::{QncError, Result};
use crate::field::FieldSpec;
use crate::linalg::FqMatrix;
use crate::network::{reorganize, DagEdge, DagNetwork, DagNode, Layer, LayeredNetwork, NodeKind, NodeOp, Reorganized};
use crate::weyl::DenseOperator;

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u32,
    #[serde(default = "one")]
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldConfig {
    pub fn to_spec(&self) -> Result<FieldSpec> {
        match &self.modulus {
            Some(m) => {
                if m.len() != self.degree + 1 {
                    return Err(QncError::Config(format!("modulus has {} coefficients but degree is {}", m.len(), self.degree)));
                }
                FieldSpec::new(self.p, m.clone())
            }
            None => FieldSpec::standard(self.p, self.degree),
        }
    }

    pub fn from_spec(f: &FieldSpec) -> Self {
        Self { p: f.p(), degree: f.degree(), modulus: Some(f.modulus().to_vec()) }
    }
}

/// Complex entries as `[re, im]` pairs.
pub type DenseRows = Vec<Vec<[f64; 2]>>;

fn dense_from_rows(rows: &DenseRows) -> Result<DenseOperator> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(QncError::Config("dense operator must be a non-empty square matrix".into()));
    }
    DenseOperator::new(CMat::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn dense_to_rows(m: &CMat) -> DenseRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerConfig {
    /// `2 m0 x 2 m0` symplectic matrix.
    Symplectic(Vec<Vec<u64>>),
    /// `m0 x m0` invertible matrix acting on computational basis labels.
    BasisLinear(Vec<Vec<u64>>),
    Dense(DenseRows),
}

impl LayerConfig {
    pub fn to_layer(&self, f: &FieldSpec) -> Result<Layer> {
        Ok(match self {
            LayerConfig::Symplectic(rows) => Layer::Symplectic(FqMatrix::from_int_rows(f, rows)?),
            LayerConfig::BasisLinear(rows) => Layer::BasisLinear(FqMatrix::from_int_rows(f, rows)?),
            LayerConfig::Dense(rows) => Layer::Dense(dense_from_rows(rows)?),
        })
    }

    pub fn from_layer(layer: &Layer) -> Self {
        match layer {
            Layer::Symplectic(g) => LayerConfig::Symplectic(g.to_int_rows()),
            Layer::BasisLinear(g) => LayerConfig::BasisLinear(g.to_int_rows()),
            Layer::Dense(u) => LayerConfig::Dense(dense_to_rows(u.matrix())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOpConfig {
    Identity,
    BasisLinear(Vec<Vec<u64>>),
    Dense(DenseRows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeConfig {
    Sender { id: usize },
    Receiver { id: usize },
    Intermediate {
        id: usize,
        #[serde(default = "identity_op")]
        op: NodeOpConfig,
    },
}

fn identity_op() -> NodeOpConfig {
    NodeOpConfig::Identity
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub id: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagConfig {
    pub nodes: Vec<NodeConfig>,
    pub edges: Vec<EdgeConfig>,
    pub corrupted: Vec<usize>,
}

impl DagConfig {
    pub fn to_dag(&self, f: &FieldSpec) -> Result<DagNetwork> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(match n {
                    NodeConfig::Sender { id } => DagNode { id: *id, kind: NodeKind::Sender },
                    NodeConfig::Receiver { id } => DagNode { id: *id, kind: NodeKind::Receiver },
                    NodeConfig::Intermediate { id, op } => {
                        let op = match op {
                            NodeOpConfig::Identity => NodeOp::Identity,
                            NodeOpConfig::BasisLinear(rows) => NodeOp::BasisLinear(FqMatrix::from_int_rows(f, rows)?),
                            NodeOpConfig::Dense(rows) => NodeOp::Dense(dense_from_rows(rows)?),
                        };
                        DagNode { id: *id, kind: NodeKind::Intermediate(op) }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = self.edges.iter().map(|e| DagEdge { id: e.id, from: e.from, to: e.to }).collect();
        DagNetwork::new(f, nodes, edges, self.corrupted.clone())
    }
}

/// Either `layers` (layered form) or `dag`; `m0` and `m1` are checked
/// against the network when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub field: FieldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dag: Option<DagConfig>,
}

#[derive(Debug, Clone)]
pub enum BuiltNetwork {
    Layered(LayeredNetwork),
    Dag { dag: DagNetwork, reorganized: Reorganized },
}

impl BuiltNetwork {
    pub fn layered(&self) -> &LayeredNetwork {
        match self {
            BuiltNetwork::Layered(n) => n,
            BuiltNetwork::Dag { reorganized, .. } => &reorganized.network,
        }
    }
}

impl NetworkConfig {
    pub fn from_layered(net: &LayeredNetwork) -> Self {
        Self {
            field: FieldConfig::from_spec(net.field()),
            m0: Some(net.m0()),
            m1: Some(net.m1()),
            layers: Some(net.layers().iter().map(LayerConfig::from_layer).collect()),
            dag: None,
        }
    }

    pub fn has_network(&self) -> bool {
        self.layers.is_some() || self.dag.is_some()
    }

    pub fn build(&self) -> Result<BuiltNetwork> {
        let f = self.field.to_spec()?;
        let built = match (&self.layers, &self.dag) {
            (Some(_), Some(_)) => return Err(QncError::Config("give either `layers` or `dag`, not both".into())),
            (None, None) => return Err(QncError::Config("missing network: expected `layers` or `dag`".into())),
            (Some(layers), None) => {
                let m0 = self.m0.ok_or_else(|| QncError::Config("layered network needs `m0`".into()))?;
                let layers = layers.iter().map(|l| l.to_layer(&f)).collect::<Result<Vec<_>>>()?;
                BuiltNetwork::Layered(LayeredNetwork::new(&f, m0, layers)?)
            }
            (None, Some(d)) => {
                let dag = d.to_dag(&f)?;
                let reorganized = reorganize(&dag)?;
                BuiltNetwork::Dag { dag, reorganized }
            }
        };
        let net = built.layered();
        if self.m0.is_some_and(|m| m != net.m0()) {
            return Err(QncError::Config(format!("m0 = {} does not match the network ({})", self.m0.unwrap(), net.m0())));
        }
        if self.m1.is_some_and(|m| m != net.m1()) {
            return Err(QncError::Config(format!("m1 = {} does not match the network ({})", self.m1.unwrap(), net.m1())));
        }
        Ok(built)
    }
}
