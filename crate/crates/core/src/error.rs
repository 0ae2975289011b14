use thiserror::Error;

/// Errors raised by the numerical kernels, graph layer, and bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hurwitz (largest real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("unstable subspace is not contained in ker C (residual {residual:e})")]
    KernelConditionViolated { residual: f64 },

    #[error("transfer function has poles that are not in the open left half plane (residual {residual:e})")]
    UnstablePoles { residual: f64 },

    #[error("edge ({i}, {j}) has negative weight {weight}")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("matrix is not a valid Laplacian: {0}")]
    InvalidLaplacian(String),

    #[error("invalid partition: {reason}")]
    InvalidPartition { reason: String, node: Option<usize> },

    #[error("node {node} belongs to the cell it is measured against")]
    NodeInCell { node: usize },

    #[error("invalid leader set: {reason}")]
    InvalidLeaders { reason: String, node: Option<usize> },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("network is not synchronized")]
    NotSynchronized,

    #[error("partition is not almost equitable")]
    NotAep,

    #[error("agent dynamics are not single integrators")]
    NotSingleIntegrator,

    #[error("agent matrices A and B are not both symmetric")]
    NotSymmetricDynamics,

    #[error("witness does not satisfy CA = XC (residual {residual:e})")]
    WitnessInvalid { residual: f64 },

    #[error("ker A is not contained in ker C (residual {residual:e})")]
    KernelViolated { residual: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("quantity is undefined: {0}")]
    Degenerate(String),
}

impl Error {
    /// Stable machine-readable identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotSquare { .. } => "not_square",
            Error::Dimension(_) => "dimension",
            Error::NotHurwitz { .. } => "not_hurwitz",
            Error::KernelConditionViolated { .. } => "kernel_condition_violated",
            Error::UnstablePoles { .. } => "unstable_poles",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::InvalidLaplacian(_) => "invalid_laplacian",
            Error::InvalidPartition { .. } => "invalid_partition",
            Error::NodeInCell { .. } => "node_in_cell",
            Error::InvalidLeaders { .. } => "invalid_leaders",
            Error::Disconnected => "disconnected",
            Error::NotSynchronized => "not_synchronized",
            Error::NotAep => "not_aep",
            Error::NotSingleIntegrator => "not_single_integrator",
            Error::NotSymmetricDynamics => "not_symmetric_dynamics",
            Error::WitnessInvalid { .. } => "witness_invalid",
            Error::KernelViolated { .. } => "kernel_violated",
            Error::Singular => "singular",
            Error::NoConvergence(_) => "no_convergence",
            Error::UnknownName(_) => "unknown_name",
            Error::Degenerate(_) => "degenerate",
        }
    }

    /// Errors that mean a theorem's hypotheses do not hold for the input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Disconnected
                | Error::NotSynchronized
                | Error::NotAep
                | Error::NotSingleIntegrator
                | Error::NotSymmetricDynamics
                | Error::KernelConditionViolated { .. }
                | Error::UnstablePoles { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
