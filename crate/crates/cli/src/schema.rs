//! On-disk input and report formats. Node indices in files are 1-based.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use netred::bounds::BoundReport;
use netred::corpus::Instance;
use netred::engines::NormKind;
use netred::graph::{Laplacian, Partition, WeightedGraph};
use netred::netsys::{AgentDynamics, NetworkSystem};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub n_nodes: usize,
    /// `[i, j, w]` with 1-based endpoints.
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub leaders: Vec<usize>,
    /// Defaults to single integrators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentFile>,
    pub partition: Vec<Vec<usize>>,
    #[serde(default)]
    pub options: FileOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileOptions {
    pub norms: Vec<NormKind>,
    pub oracle_check: bool,
    pub tolerances: Tolerances,
}

impl Default for FileOptions {
    fn default() -> Self {
        Self { norms: vec![NormKind::H2, NormKind::Hinf], oracle_check: false, tolerances: Tolerances::default() }
    }
}

/// Agreement thresholds for the oracle cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Lyapunov H2 vs frequency quadrature, relative.
    pub h2_quadrature_rel: f64,
    /// Closed-form H∞ vs frequency sweep, relative.
    pub hinf_sweep_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { h2_quadrature_rel: 1e-4, hinf_sweep_rel: 1e-6 }
    }
}

/// Validated, 0-based model built from a [`NetworkFile`].
pub struct Model {
    pub network: NetworkSystem,
    pub partition: Partition,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Err(invalid(format!("{field}: matrix is empty")));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n_cols {
            return Err(invalid(format!("{field}: row {} has {} entries, row 1 has {n_cols}", r + 1, row.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("{field}: entry ({}, {}) is not finite", r + 1, c + 1)));
        }
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |r, c| rows[r][c]))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl AgentFile {
    fn to_dynamics(&self) -> Result<AgentDynamics, CliError> {
        let a = matrix("agent.A", &self.a)?;
        let b = matrix("agent.B", &self.b)?;
        let e = matrix("agent.E", &self.e)?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(invalid(format!("agent.A: must be square, got {}x{}", n, a.ncols())));
        }
        if b.shape() != (n, n) {
            return Err(invalid(format!("agent.B: must be {n}x{n} to match agent.A, got {}x{}", b.nrows(), b.ncols())));
        }
        if e.nrows() != n {
            return Err(invalid(format!("agent.E: must have {n} rows to match agent.A, got {}", e.nrows())));
        }
        AgentDynamics::new(a, b, e).map_err(|err| invalid(format!("agent: {err}")))
    }

    pub fn from_dynamics(d: &AgentDynamics) -> Self {
        Self { a: matrix_rows(&d.a), b: matrix_rows(&d.b), e: matrix_rows(&d.e) }
    }
}

impl NetworkFile {
    fn node(&self, field: &str, v: usize) -> Result<usize, CliError> {
        if v == 0 || v > self.n_nodes {
            return Err(invalid(format!("{field}: node {v} is outside 1..={}", self.n_nodes)));
        }
        Ok(v - 1)
    }

    pub fn validate(&self) -> Result<Model, CliError> {
        let n = self.n_nodes;
        if n == 0 {
            return Err(invalid("n_nodes: must be at least 1"));
        }

        let mut seen_pairs = BTreeMap::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, &(i, j, w)) in self.edges.iter().enumerate() {
            let field = format!("edges[{}]", k + 1);
            let (a, b) = (self.node(&field, i)?, self.node(&field, j)?);
            if a == b {
                return Err(invalid(format!("{field}: self-loop at node {i}")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(invalid(format!("{field}: weight {w} on ({i}, {j}) must be positive and finite")));
            }
            if let Some(prev) = seen_pairs.insert((a.min(b), a.max(b)), k + 1) {
                return Err(invalid(format!("{field}: pair ({i}, {j}) already given in edges[{prev}]")));
            }
            edges.push((a, b, w));
        }
        let graph = WeightedGraph::new(n, edges).map_err(|e| invalid(format!("edges: {e}")))?;
        let laplacian = Laplacian::from_graph(&graph).map_err(|e| invalid(format!("edges: {e}")))?;

        let mut leaders = Vec::with_capacity(self.leaders.len());
        for (k, &v) in self.leaders.iter().enumerate() {
            let idx = self.node(&format!("leaders[{}]", k + 1), v)?;
            if leaders.contains(&idx) {
                return Err(invalid(format!("leaders: node {v} is listed twice")));
            }
            leaders.push(idx);
        }

        let mut owner: Vec<Option<usize>> = vec![None; n];
        let mut cells = Vec::with_capacity(self.partition.len());
        for (c, cell) in self.partition.iter().enumerate() {
            if cell.is_empty() {
                return Err(invalid(format!("partition: cell {} is empty", c + 1)));
            }
            let mut idx = Vec::with_capacity(cell.len());
            for &v in cell {
                let node = self.node(&format!("partition cell {}", c + 1), v)?;
                if let Some(prev) = owner[node] {
                    return Err(invalid(if prev == c {
                        format!("partition: node {v} appears twice in cell {}", c + 1)
                    } else {
                        format!("partition: node {v} appears in cells {} and {}", prev + 1, c + 1)
                    }));
                }
                owner[node] = Some(c);
                idx.push(node);
            }
            cells.push(idx);
        }
        if let Some(missing) = owner.iter().position(Option::is_none) {
            return Err(invalid(format!("partition: node {} is not in any cell", missing + 1)));
        }
        let partition = Partition::new(n, cells).map_err(|e| invalid(format!("partition: {e}")))?;

        let dynamics = match &self.agent {
            Some(a) => a.to_dynamics()?,
            None => AgentDynamics::single_integrator(),
        };
        let t = &self.options.tolerances;
        if !(t.h2_quadrature_rel > 0.0 && t.hinf_sweep_rel > 0.0) {
            return Err(invalid("options.tolerances: values must be positive"));
        }
        let network = NetworkSystem::new(laplacian, leaders, dynamics).map_err(|e| invalid(format!("leaders: {e}")))?;
        Ok(Model { network, partition })
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let d = inst.network.dynamics();
        Self {
            n_nodes: inst.network.n_nodes(),
            edges: inst.graph.edges().iter().map(|e| (e.i + 1, e.j + 1, e.w)).collect(),
            leaders: inst.network.leaders().iter().map(|v| v + 1).collect(),
            agent: if d.is_single_integrator() { None } else { Some(AgentFile::from_dynamics(d)) },
            partition: inst.partition.cells().iter().map(|c| c.iter().map(|v| v + 1).collect()).collect(),
            options: FileOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalues {
    pub laplacian: Vec<f64>,
    pub reduced: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AepProjectionReport {
    pub matrix: Vec<Vec<f64>>,
    pub delta_frobenius: f64,
    pub has_negative_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub quantity: String,
    pub primary: f64,
    pub oracle: f64,
    pub rel_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub all_pass: bool,
    pub checks: Vec<OracleCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub input: NetworkFile,
    pub aep: bool,
    pub synchronized: bool,
    pub eigenvalues: Eigenvalues,
    pub bounds: BoundReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_aep: Option<AepProjectionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub timings_ms: BTreeMap<String, f64>,
}
