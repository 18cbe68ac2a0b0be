//! Quantum network codes for unicast networks with Clifford nodes and a
//! bounded number of corrupted channels.
//!
//! The crate covers finite-field arithmetic, exact linear algebra over `F_q`,
//! the symplectic invariants of a network, dense Weyl/Clifford operators,
//! exact density-matrix simulation of individual and adaptive adversaries,
//! code construction, and numerical checks of the capacity bounds.

pub mod capacity;
pub mod codeplan;
pub mod config;
pub mod constructions;
pub mod dense;
pub mod error;
pub mod field;
pub mod linalg;
pub mod network;
pub mod simulate;
pub mod symplectic;
pub mod weyl;

pub use capacity::{ChannelReport, ClassicalReport, EbReport, Verdict};
pub use codeplan::{plan_code, CodePlan, CodePlanReport, Rho0Choice};
pub use config::{FieldConfig, LayerConfig, NetworkConfig};
pub use constructions::{gen_lemma_l1, worst_case_network, RankTriple};
pub use dense::{CMat, CVec};
pub use error::{QncError, Result};
pub use field::{FieldElement, FieldSpec};
pub use linalg::{FqMatrix, FqVector};
pub use network::{reorganize, CompiledNetwork, CorruptionModel, DagNetwork, Layer, LayeredNetwork};
pub use simulate::{entanglement_fidelity, AdaptiveAdversary, Codec, DensityMatrix, KrausChannel};
pub use symplectic::{SymplecticContext, WBasis};
pub use weyl::{DenseOperator, WeylLabel, WeylSpace};
