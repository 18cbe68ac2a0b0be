//! Scenario files and the commands behind the `qnc` binary.
//!
//! A scenario is a JSON document holding a field, a network (layered or
//! DAG), an optional corruption model and experiment parameters. Every
//! command returns an [`Outcome`] whose report embeds the tool version, the
//! SHA-256 of the scenario text and the seed.

use std::fmt::Write as _;

use num_complex::Complex64;
use qnc_core::capacity::{self, ChannelReport, ClassicalReport, Verdict};
use qnc_core::codeplan::{plan_code, CodePlanReport, Rho0Choice};
use qnc_core::config::{DagConfig, DenseRows, FieldConfig, LayerConfig, NetworkConfig};
use qnc_core::constructions::{gen_lemma_l1, worst_case_network, RankTriple};
use qnc_core::network::{CompiledNetwork, CorruptionModel, LayeredNetwork};
use qnc_core::simulate::{entanglement_fidelity, sample_rng, AdaptiveAdversary, KrausChannel};
use qnc_core::{CMat, QncError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "qnc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Minimum entanglement fidelity accepted by `simulate`.
pub const FIDELITY_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] QncError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for failures of a check itself, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(QncError::ConverseMismatch(_) | QncError::SynthesisFailed(_) | QncError::InternalError(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Construct,
    Simulate,
    VerifyDirect,
    VerifyConverse,
    VerifyClassical,
    Gen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Simulate => "simulate",
            Command::VerifyDirect => "verify-direct",
            Command::VerifyConverse => "verify-converse",
            Command::VerifyClassical => "verify-classical",
            Command::Gen => "gen",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Command::Simulate | Command::VerifyClassical => 100,
            Command::VerifyDirect => 50,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorruptionConfig {
    None,
    /// Register 1 replaced by `I/q` in every interval.
    Depolarizing,
    MixSubstitution,
    /// One Kraus list per interval.
    Kraus { channels: Vec<Vec<DenseRows>> },
    /// Fresh random channels with `ops` Kraus operators for every sample.
    RandomKraus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ops: Option<usize>,
    },
    /// Fresh Haar-random adaptive adversary for every sample.
    Adaptive {
        #[serde(default = "default_memory")]
        memory_dim: usize,
    },
}

fn default_memory() -> usize {
    4
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l3: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub worst_case: bool,
    /// Alphabet size for the classical model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Free-form provenance, ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dag: Option<DagConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<Rho0Choice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    fn field(&self) -> Result<&FieldConfig, CliError> {
        self.field.as_ref().ok_or_else(|| CliError::Input("missing `field`".into()))
    }

    fn require(v: Option<usize>, name: &str) -> Result<usize, CliError> {
        v.ok_or_else(|| CliError::Input(format!("missing `{name}`")))
    }

    fn network_config(&self) -> Result<NetworkConfig, CliError> {
        Ok(NetworkConfig {
            field: self.field()?.clone(),
            m0: self.m0,
            m1: self.m1,
            layers: self.layers.clone(),
            dag: self.dag.clone(),
        })
    }

    fn has_network(&self) -> bool {
        self.layers.is_some() || self.dag.is_some()
    }

    fn experiment(&self) -> ExperimentConfig {
        self.experiment.clone().unwrap_or_default()
    }
}

/// Reproducibility header shared by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Report<T: Serialize> {
    #[serde(flatten)]
    provenance: Provenance,
    verdict: Verdict,
    result: T,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Pretty-printed JSON document written to `--out`.
    pub json: String,
    pub verdict: Verdict,
    /// Short human-readable summary.
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.passed() {
            0
        } else {
            1
        }
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn finish<T: Serialize>(provenance: Provenance, verdict: Verdict, result: T, summary: String) -> Result<Outcome, CliError> {
    let json = serde_json::to_string_pretty(&Report { provenance, verdict, result }).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Outcome { json: json + "\n", verdict, summary })
}

/// Parses `text` and runs `command`. The subcommand decides what runs; an
/// `experiment.kind` in the file is only checked for consistency.
pub fn run(command: Command, text: &str, seed: Option<u64>, samples: Option<usize>) -> Result<Outcome, CliError> {
    let cfg = ScenarioConfig::parse(text)?;
    if let Some(kind) = cfg.experiment.as_ref().and_then(|e| e.kind) {
        if kind != command {
            return Err(CliError::Input(format!("scenario is for `{}`, not `{}`", kind.name(), command.name())));
        }
    }
    let provenance = Provenance {
        tool: TOOL,
        version: VERSION,
        command: command.name(),
        config_sha256: sha256_hex(text),
        seed: seed.or(cfg.seed).unwrap_or(0),
        samples: samples.or(cfg.samples).unwrap_or(command.default_samples()),
    };
    if provenance.samples == 0 {
        return Err(CliError::Input("`samples` must be positive".into()));
    }
    match command {
        Command::Construct => cmd_construct(&cfg, provenance),
        Command::Simulate => cmd_simulate(&cfg, provenance),
        Command::VerifyDirect | Command::VerifyConverse | Command::VerifyClassical => cmd_verify(command, &cfg, provenance),
        Command::Gen => cmd_gen(&cfg, provenance),
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConstructResult {
    plan: CodePlanReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    corruption_order: Option<Vec<usize>>,
}

fn plan_summary(plan: &CodePlanReport) -> String {
    format!(
        "m0 = {}, m1 = {}, m_* = {}, m_** = {}, rate = {} log q = {:.6} bits",
        plan.m0, plan.m1, plan.m_star, plan.m_star_star, plan.rate_log_q, plan.rate_bits
    )
}

pub fn cmd_construct(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let built = cfg.network_config()?.build()?;
    let plan = plan_code(built.layered(), cfg.rho0.unwrap_or_default())?;
    let report = plan.report();
    let summary = plan_summary(&report);
    let corruption_order = match &built {
        qnc_core::config::BuiltNetwork::Dag { reorganized, .. } => Some(reorganized.corruption_order.clone()),
        qnc_core::config::BuiltNetwork::Layered(_) => None,
    };
    finish(provenance, Verdict::Pass, ConstructResult { plan: report, corruption_order }, summary)
}

fn kraus_from_rows(ops: &[DenseRows]) -> Result<KrausChannel, CliError> {
    let mats = ops
        .iter()
        .map(|rows| {
            let n = rows.len();
            let m = rows.first().map_or(0, Vec::len);
            if n == 0 || rows.iter().any(|r| r.len() != m) {
                return Err(CliError::Input("Kraus operator must be a non-empty rectangular matrix".into()));
            }
            Ok(CMat::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KrausChannel::new(mats)?)
}

/// Corruption for sample `index`; `None` in the config means no corruption.
fn corruption_for(corruption: &CorruptionConfig, q: usize, m1: usize, seed: u64, index: u64) -> Result<CorruptionModel, CliError> {
    let mut rng = sample_rng(seed, index);
    Ok(match corruption {
        CorruptionConfig::None => CorruptionModel::Individual(vec![KrausChannel::identity(q); m1]),
        CorruptionConfig::Depolarizing => CorruptionModel::Individual(vec![KrausChannel::completely_depolarizing(q); m1]),
        CorruptionConfig::MixSubstitution => CorruptionModel::MixSubstitution,
        CorruptionConfig::Kraus { channels } => {
            if channels.len() != m1 {
                return Err(CliError::Input(format!("need {m1} Kraus lists, got {}", channels.len())));
            }
            CorruptionModel::Individual(channels.iter().map(|c| kraus_from_rows(c)).collect::<Result<_, _>>()?)
        }
        CorruptionConfig::RandomKraus { ops } => {
            let k = ops.unwrap_or(q * q);
            if k == 0 {
                return Err(CliError::Input("`ops` must be positive".into()));
            }
            CorruptionModel::Individual((0..m1).map(|_| KrausChannel::random(q, k, &mut rng)).collect())
        }
        CorruptionConfig::Adaptive { memory_dim } => {
            if *memory_dim == 0 {
                return Err(CliError::Input("`memory_dim` must be positive".into()));
            }
            CorruptionModel::Adaptive(AdaptiveAdversary::haar(q, *memory_dim, m1, &mut rng))
        }
    })
}

fn memory_dim(cfg: &ScenarioConfig) -> usize {
    match cfg.corruption {
        Some(CorruptionConfig::Adaptive { memory_dim }) => memory_dim,
        _ => 1,
    }
}

#[derive(Debug, Clone, Serialize)]
struct SimulateResult {
    rate_bits: f64,
    threshold: f64,
    min_fidelity: f64,
    failing_samples: Vec<usize>,
    fidelities: Vec<f64>,
}

pub fn cmd_simulate(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let net = cfg.network_config()?.build()?.layered().clone();
    let plan = plan_code(&net, cfg.rho0.unwrap_or_default())?;
    let compiled = net.compile()?;
    compiled.check_budget(memory_dim(cfg))?;
    let q = compiled.q;
    let fidelities = (0..provenance.samples)
        .map(|i| {
            let model = corruption_for(cfg.corruption.as_ref().unwrap_or(&CorruptionConfig::None), q, net.m1(), provenance.seed, i as u64)?;
            Ok(entanglement_fidelity(plan.codec(), &compiled, &model)?)
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let min_fidelity = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    let failing_samples: Vec<usize> = fidelities.iter().enumerate().filter(|(_, &f)| f < FIDELITY_THRESHOLD).map(|(i, _)| i).collect();
    let verdict = Verdict::from_bool(failing_samples.is_empty());
    let summary = format!(
        "{} samples, rate {:.6} bits, min entanglement fidelity {:.12}{}",
        fidelities.len(),
        plan.rate_bits,
        min_fidelity,
        failure_note(&failing_samples)
    );
    finish(provenance, verdict, SimulateResult { rate_bits: plan.rate_bits, threshold: FIDELITY_THRESHOLD, min_fidelity, failing_samples, fidelities }, summary)
}

fn failure_note(failing: &[usize]) -> String {
    if failing.is_empty() {
        String::new()
    } else {
        format!("; failing samples {failing:?}")
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepResult<T: Serialize> {
    bound_bits: f64,
    min_value_bits: f64,
    failing_samples: Vec<u64>,
    reports: Vec<T>,
}

fn sweep_summary(what: &str, n: usize, bound: f64, min: f64, failing: &[u64]) -> String {
    let note = if failing.is_empty() { String::new() } else { format!("; failing samples {failing:?}") };
    format!("{what}: {n} samples, bound {bound:.6} bits, minimum {min:.9} bits{note}")
}

pub fn cmd_verify(command: Command, cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    match command {
        Command::VerifyDirect => verify_direct(cfg, provenance),
        Command::VerifyConverse => verify_converse(cfg, provenance),
        Command::VerifyClassical => verify_classical(cfg, provenance),
        other => Err(CliError::Input(format!("`{}` is not a verification command", other.name()))),
    }
}

fn verify_direct(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let reports: Vec<ChannelReport> = if cfg.has_network() {
        let compiled: CompiledNetwork = cfg.network_config()?.build()?.layered().compile()?;
        let n = if matches!(cfg.corruption, Some(CorruptionConfig::Kraus { .. })) { 1 } else { provenance.samples };
        // without an explicit model every sample draws fresh random channels
        let corruption = cfg.corruption.clone().unwrap_or(CorruptionConfig::RandomKraus { ops: None });
        (0..n)
            .map(|i| {
                let CorruptionModel::Individual(gammas) = corruption_for(&corruption, compiled.q, compiled.m1(), provenance.seed, i as u64)? else {
                    return Err(CliError::Input("verify-direct needs an individual corruption model".into()));
                };
                let mut r = capacity::verify_direct_bound(&compiled, &gammas)?;
                r.seed = Some(i as u64);
                Ok(r)
            })
            .collect::<Result<_, CliError>>()?
    } else {
        let q = cfg.field()?.to_spec()?.order();
        let m0 = ScenarioConfig::require(cfg.m0, "m0")?;
        let m1 = ScenarioConfig::require(cfg.m1, "m1")?;
        capacity::direct_bound_sweep(q, m0, m1, provenance.samples, provenance.seed)?
    };
    let failing: Vec<u64> = reports.iter().filter(|r| !r.verdict.passed()).filter_map(|r| r.seed).collect();
    let bound = reports[0].bound_bits;
    let min = reports.iter().map(|r| r.value_bits).fold(f64::INFINITY, f64::min);
    let summary = sweep_summary("direct bound", reports.len(), bound, min, &failing);
    let verdict = Verdict::from_bool(failing.is_empty());
    finish(provenance, verdict, SweepResult { bound_bits: bound, min_value_bits: min, failing_samples: failing, reports }, summary)
}

#[derive(Debug, Clone, Serialize)]
struct ConverseResult {
    rate_bits: f64,
    process_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<ChannelReport>,
}

fn verify_converse(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let net: LayeredNetwork = cfg.network_config()?.build()?.layered().clone();
    let plan = plan_code(&net, cfg.rho0.unwrap_or_default())?;
    let compiled = net.compile()?;
    match capacity::verify_converse(&plan, &compiled) {
        Ok(r) => {
            let summary = format!(
                "converse: decoded channel matches within {:.3e}; I_c = {:.9} bits, expected {:.9}",
                r.process_distance.unwrap_or(0.0),
                r.value_bits,
                plan.rate_bits
            );
            let verdict = r.verdict;
            finish(provenance, verdict, ConverseResult { rate_bits: plan.rate_bits, process_distance: r.process_distance.unwrap_or(0.0), report: Some(r) }, summary)
        }
        Err(QncError::ConverseMismatch(d)) => {
            let summary = format!("converse: decoded channel deviates from the ideal by {d:.3e}");
            finish(provenance, Verdict::Fail, ConverseResult { rate_bits: plan.rate_bits, process_distance: d, report: None }, summary)
        }
        Err(e) => Err(e.into()),
    }
}

fn verify_classical(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let exp = cfg.experiment();
    let d = match (exp.d, &cfg.field) {
        (Some(d), _) => d,
        (None, Some(f)) => f.to_spec()?.order(),
        (None, None) => 2,
    };
    let m0 = ScenarioConfig::require(cfg.m0, "m0")?;
    let m1 = ScenarioConfig::require(cfg.m1, "m1")?;
    if d < 2 || m1 > m0 {
        return Err(CliError::Input(format!("need d >= 2 and m1 <= m0, got d = {d}, m0 = {m0}, m1 = {m1}")));
    }
    if (d as u64).checked_pow(m0 as u32).is_none_or(|n| n > qnc_core::network::MAX_DIM as u64) {
        return Err(QncError::ResourceLimit { dim: usize::MAX, limit: qnc_core::network::MAX_DIM }.into());
    }
    let reports: Vec<ClassicalReport> = match (&exp.maps, &exp.kernels) {
        (Some(maps), Some(kernels)) => vec![capacity::classical_bound_check(d, m0, m1, maps, kernels)?],
        (None, None) => capacity::classical_sweep(d, m0, m1, provenance.samples, provenance.seed)?,
        _ => return Err(CliError::Input("give both `maps` and `kernels`, or neither".into())),
    };
    let failing: Vec<u64> = reports.iter().enumerate().filter(|(_, r)| !r.verdict.passed()).map(|(i, r)| r.seed.unwrap_or(i as u64)).collect();
    let bound = reports[0].bound_bits;
    let min = reports.iter().map(|r| r.value_bits).fold(f64::INFINITY, f64::min);
    let summary = sweep_summary("classical bound", reports.len(), bound, min, &failing);
    let verdict = Verdict::from_bool(failing.is_empty());
    finish(provenance, verdict, SweepResult { bound_bits: bound, min_value_bits: min, failing_samples: failing, reports }, summary)
}

/// Emits a ready-to-run scenario for a rank triple or the worst case. The
/// output is the scenario itself rather than a report, with the provenance
/// under `meta`.
pub fn cmd_gen(cfg: &ScenarioConfig, provenance: Provenance) -> Result<Outcome, CliError> {
    let field = cfg.field()?.to_spec()?;
    let m0 = ScenarioConfig::require(cfg.m0, "m0")?;
    let m1 = ScenarioConfig::require(cfg.m1, "m1")?;
    let exp = cfg.experiment();
    let net = if exp.worst_case {
        worst_case_network(m0, m1, &field)?
    } else {
        let l = |v: Option<usize>, n: &str| ScenarioConfig::require(v, n);
        gen_lemma_l1(&RankTriple::new(l(exp.l1, "experiment.l1")?, l(exp.l2, "experiment.l2")?, l(exp.l3, "experiment.l3")?, m0, m1)?, &field)?
    };
    let nc = NetworkConfig::from_layered(&net);
    let out = ScenarioConfig {
        meta: Some(serde_json::to_value(&provenance).map_err(|e| CliError::Input(e.to_string()))?),
        field: Some(nc.field),
        m0: nc.m0,
        m1: nc.m1,
        layers: nc.layers,
        rho0: cfg.rho0,
        ..Default::default()
    };
    let json = serde_json::to_string_pretty(&out).map_err(|e| CliError::Input(e.to_string()))? + "\n";
    let summary = format!("generated a basis-linear network with m0 = {m0}, m1 = {m1}");
    Ok(Outcome { json, verdict: Verdict::Pass, summary })
}
