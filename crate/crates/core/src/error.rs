use thiserror::Error;

/// Errors raised by the geometry, solver and moduli layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZollError {
    #[error("point lies on the conic within tolerance (|q| = {0:.3e}); tangent lines coincide")]
    DegenerateTangency(f64),
    #[error("upsilon is singular near the conic (|q| = {0:.3e})")]
    NearConic(f64),
    #[error("quadrature unresolved: successive refinements {coarse} and {fine} disagree")]
    QuadratureUnresolved { coarse: f64, fine: f64 },
    #[error("disk sample within {distance:.3e} chordal of the chart pole")]
    ChartOverflow { distance: f64 },
    #[error("Newton corrector stagnated at residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("negative-frequency energy {energy:.3e} after chart change")]
    HolomorphyLoss { energy: f64 },
    #[error("continuation stuck at t = {t} with step {step:.3e}")]
    ContinuationStuck { t: f64, step: f64 },
    #[error("surface failed docility certification")]
    DocilityRequired,
    #[error("boundary derivative vanishes (min |gamma'| = {0:.3e})")]
    DerivativeVanishes(f64),
    #[error("phase increment reaches pi/2 even at {0} nodes")]
    PhaseStepTooLarge(usize),
    #[error("no disk boundary of the grid passes near the requested point (best {0:.3e})")]
    SeedNotFound(f64),
    #[error("geodesic trace diverged: {0}")]
    TraceDiverged(String),
    #[error("geodesic did not close within {0} steps")]
    NotClosed(usize),
    #[error("disk at u0 = {u0} failed: {source}")]
    AtPoint { u0: String, source: Box<ZollError> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ZollError {
    fn from(e: std::io::Error) -> Self {
        ZollError::Io(e.to_string())
    }
}

impl ZollError {
    /// The underlying error when wrapped with a sample location.
    pub fn root(&self) -> &ZollError {
        match self {
            ZollError::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            ZollError::DegenerateTangency(_) => "degenerate_tangency",
            ZollError::NearConic(_) => "near_conic",
            ZollError::QuadratureUnresolved { .. } => "quadrature_unresolved",
            ZollError::ChartOverflow { .. } => "chart_overflow",
            ZollError::NoConvergence { .. } => "no_convergence",
            ZollError::HolomorphyLoss { .. } => "holomorphy_loss",
            ZollError::ContinuationStuck { .. } => "continuation_stuck",
            ZollError::DocilityRequired => "docility_required",
            ZollError::DerivativeVanishes(_) => "derivative_vanishes",
            ZollError::PhaseStepTooLarge(_) => "phase_step_too_large",
            ZollError::SeedNotFound(_) => "seed_not_found",
            ZollError::TraceDiverged(_) => "trace_diverged",
            ZollError::NotClosed(_) => "not_closed",
            ZollError::AtPoint { .. } => "at_point",
            ZollError::InvalidInput(_) => "invalid_input",
            ZollError::Format(_) => "format",
            ZollError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, ZollError>;
