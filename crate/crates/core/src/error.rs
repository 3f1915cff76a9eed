use thiserror::Error;

/// Errors produced anywhere in the interpolation pipeline.
///
/// Every variant maps to a stable machine-readable [`Error::code`] and to a
/// process exit status via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("edge endpoint `{0}` is not a declared vertex")]
    DanglingEdge(String),

    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge `{0}`-`{1}`")]
    DuplicateEdge(String, String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("negative or non-finite mass {mass} at vertex `{vertex}`")]
    InvalidMass { vertex: String, mass: f64 },

    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("measure has empty support")]
    EmptySupport,

    #[error("no distance row available for vertex `{0}`")]
    MissingDistanceRow(String),

    #[error("infeasible coupling: {0}")]
    InfeasibleCoupling(String),

    #[error("min-cost flow failed: {0}")]
    Flow(String),

    #[error("support union is empty")]
    EmptySupportUnion,

    #[error("edge `{0}`-`{1}` is oriented both ways")]
    OrientationConflict(String, String),

    #[error("oriented graph contains a cycle through `{0}`")]
    OrientedCycle(String),

    #[error("oriented path from `{from}` to `{to}` has length {length} but distance is {distance}")]
    NotGeodesic {
        from: String,
        to: String,
        length: usize,
        distance: usize,
    },

    #[error("source or sink set is empty")]
    NoExtremalVertices,

    #[error("spanning forest misses active vertex `{0}`")]
    NotSpanning(String),

    #[error("edge set is not a forest of oriented edges: {0}")]
    NotAForest(String),

    #[error("rates of change do not sum to zero on a component (residual {0:e})")]
    UnbalancedRates(f64),

    #[error("weight on `{0}`->`{1}` must be positive and finite")]
    NonPositiveWeight(String, String),

    #[error("weights are not divergence-free at `{vertex}` (in {inflow}, out {outflow})")]
    DivergenceViolation {
        vertex: String,
        inflow: f64,
        outflow: f64,
    },

    #[error("vertices `{0}` and `{1}` are not comparable")]
    NotComparable(String, String),

    #[error("optimal face has no admissible pair")]
    EmptyFace,

    #[error("coupling puts mass on `{0}`->`{1}` outside the admissible face")]
    SupportViolation(String, String),

    #[error("optimal face is degenerate: pair `{0}`->`{1}` is forced to zero mass")]
    DegenerateFace(String, String),

    #[error("scaling did not converge after {iterations} iterations (marginal error {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("time {0} is outside the admissible range")]
    InvalidTime(f64),

    #[error("density vanishes at `{vertex}` for t = {t}")]
    ZeroDensity { vertex: String, t: f64 },

    #[error("vertex sequence is not an oriented path")]
    NotOrientedPath,

    #[error("perturbation with eta = {eta} leaves the admissible set at t = {t}")]
    PerturbationInfeasible { eta: f64, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "empty_graph",
            Error::DuplicateVertex(_) => "duplicate_vertex",
            Error::DanglingEdge(_) => "dangling_edge",
            Error::SelfLoop(_) => "self_loop",
            Error::DuplicateEdge(..) => "duplicate_edge",
            Error::Disconnected { .. } => "disconnected_graph",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::InvalidMass { .. } => "invalid_mass",
            Error::NotNormalized { .. } => "not_normalized",
            Error::EmptySupport => "empty_support",
            Error::MissingDistanceRow(_) => "missing_distance_row",
            Error::InfeasibleCoupling(_) => "infeasible_coupling",
            Error::Flow(_) => "flow_failure",
            Error::EmptySupportUnion => "empty_support_union",
            Error::OrientationConflict(..) => "orientation_conflict",
            Error::OrientedCycle(_) => "oriented_cycle",
            Error::NotGeodesic { .. } => "not_geodesic",
            Error::NoExtremalVertices => "no_extremal_vertices",
            Error::NotSpanning(_) => "not_spanning",
            Error::NotAForest(_) => "not_a_forest",
            Error::UnbalancedRates(_) => "unbalanced_rates",
            Error::NonPositiveWeight(..) => "non_positive_weight",
            Error::DivergenceViolation { .. } => "divergence_violation",
            Error::NotComparable(..) => "not_comparable",
            Error::EmptyFace => "empty_face",
            Error::SupportViolation(..) => "support_violation",
            Error::DegenerateFace(..) => "degenerate_face",
            Error::NoConvergence { .. } => "no_convergence",
            Error::InvalidTime(_) => "invalid_time",
            Error::ZeroDensity { .. } => "zero_density",
            Error::NotOrientedPath => "not_oriented_path",
            Error::PerturbationInfeasible { .. } => "perturbation_infeasible",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Document(_) => "malformed_document",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status: 2 for convergence failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
