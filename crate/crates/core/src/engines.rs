//! Name-keyed registry of norm engines.
//!
//! Every engine maps a [`StateSpace`] to a [`NormResult`] for one norm kind;
//! callers pick engines by name at runtime (the CLI exposes this as
//! `--h2-engine` / `--hinf-engine`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::StateSpace;
use crate::norms::{h2_norm, h2_norm_quadrature, hinf_norm_sweep, NormResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    H2,
    Hinf,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::H2 => "h2",
            NormKind::Hinf => "hinf",
        })
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h2" => Ok(NormKind::H2),
            "hinf" => Ok(NormKind::Hinf),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

pub trait NormEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> NormKind;
    fn evaluate(&self, sys: &StateSpace) -> Result<NormResult>;
}

/// Kernel-conditioned Lyapunov solve.
pub struct LyapunovEngine;

impl NormEngine for LyapunovEngine {
    fn name(&self) -> &'static str {
        "lyapunov"
    }
    fn kind(&self) -> NormKind {
        NormKind::H2
    }
    fn evaluate(&self, sys: &StateSpace) -> Result<NormResult> {
        h2_norm(sys)
    }
}

/// Log-grid quadrature of the H2 integral.
pub struct QuadratureEngine;

impl NormEngine for QuadratureEngine {
    fn name(&self) -> &'static str {
        "quadrature"
    }
    fn kind(&self) -> NormKind {
        NormKind::H2
    }
    fn evaluate(&self, sys: &StateSpace) -> Result<NormResult> {
        h2_norm_quadrature(sys)
    }
}

/// Adaptive frequency sweep with golden-section refinement.
pub struct SweepEngine;

impl NormEngine for SweepEngine {
    fn name(&self) -> &'static str {
        "sweep"
    }
    fn kind(&self) -> NormKind {
        NormKind::Hinf
    }
    fn evaluate(&self, sys: &StateSpace) -> Result<NormResult> {
        hinf_norm_sweep(sys)
    }
}

pub struct NormRegistry {
    engines: Vec<Box<dyn NormEngine>>,
}

impl Default for NormRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(LyapunovEngine));
        reg.register(Box::new(QuadratureEngine));
        reg.register(Box::new(SweepEngine));
        reg
    }
}

impl NormRegistry {
    pub fn empty() -> Self {
        Self { engines: Vec::new() }
    }

    /// Adds an engine, replacing any engine of the same name.
    pub fn register(&mut self, engine: Box<dyn NormEngine>) {
        self.engines.retain(|e| e.name() != engine.name());
        self.engines.push(engine);
    }

    pub fn get(&self, name: &str) -> Result<&dyn NormEngine> {
        self.engines
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Looks up `name` and checks that it computes `kind`.
    pub fn get_kind(&self, name: &str, kind: NormKind) -> Result<&dyn NormEngine> {
        let engine = self.get(name)?;
        if engine.kind() != kind {
            return Err(Error::UnknownName(format!("{name} is not a {kind} engine")));
        }
        Ok(engine)
    }

    pub fn names(&self, kind: NormKind) -> Vec<&'static str> {
        self.engines.iter().filter(|e| e.kind() == kind).map(|e| e.name()).collect()
    }

    /// Default engine for each norm kind.
    pub fn default_name(kind: NormKind) -> &'static str {
        match kind {
            NormKind::H2 => "lyapunov",
            NormKind::Hinf => "sweep",
        }
    }
}
