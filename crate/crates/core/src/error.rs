use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: lattice has {expected} points, array has {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("instability overflow in mode {mode} (k = {wavevector}, kappa*dt = {kappa_dt})")]
    InstabilityOverflow { mode: usize, wavevector: f64, kappa_dt: f64 },
    #[error("Bessel argument {0} outside [0, 700]")]
    BesselDomain(f64),
    #[error("wraparound risk: {0}")]
    WraparoundRisk(String),
    #[error("margin violation: {0}")]
    MarginViolation(String),
    #[error("wavepacket band must lie in the normal band: {0}")]
    BandNotNormal(String),
    #[error("group-velocity tracking failed: {0}")]
    Tracking(String),
    #[error("no carrier present: {0}")]
    NoCarrier(String),
    #[error("state is identically zero")]
    ZeroState,
    #[error("displacement is not conjugate-symmetric: {0}")]
    SymmetryViolation(String),
    #[error("covariance mismatch: {0}")]
    CovarianceMismatch(String),
    #[error("states are at different times ({0} vs {1})")]
    TimeMismatch(f64, f64),
}

impl LabError {
    /// Guards that reflect the physics of the run (rather than bad input).
    pub fn is_physics_guard(&self) -> bool {
        matches!(
            self,
            LabError::InstabilityOverflow { .. }
                | LabError::WraparoundRisk(_)
                | LabError::MarginViolation(_)
        )
    }
}
