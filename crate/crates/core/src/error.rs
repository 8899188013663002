use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transmittance out of range: eps_par={eps_par}, eps_perp={eps_perp} (need 0 <= eps_perp <= eps_par <= 1)")]
    TransmittanceOutOfRange { eps_par: f64, eps_perp: f64 },
    #[error("analyzer must be present for this operation")]
    AnalyzerAbsent,
    #[error("visibility undefined: fringe scan has zero counts everywhere")]
    UndefinedVisibility,
    #[error("grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
    #[error("acquisition time must be positive")]
    ZeroAcquisition,
    #[error("calibration estimation failed: corrected trigger counts <= 0")]
    EstimationFailure,
    #[error("Fraunhofer far-field condition violated: width^2/(lambda*distance) = {0}")]
    FraunhoferViolated(f64),
    #[error("grid too coarse: fringe period spans fewer than 4 grid steps")]
    GridTooCoarse,
    #[error("integration range too narrow: must cover at least 6 envelope zeros on the partner plane")]
    IntegrationRangeTooNarrow,
    #[error("singular least-squares fit")]
    SingularFit,
    #[error("need at least 2 more data points than free parameters")]
    TooFewPoints,
    #[error("protocol needs at least one round")]
    NoRounds,
    #[error("no sifted rounds survived post-selection")]
    EmptySiftedSet,
    #[error("information target {target} unreachable: channel reaches at most {max} at full interception")]
    UnreachableTarget { target: f64, max: f64 },
    #[error("Poisson mean must be nonnegative, got {0}")]
    NegativeMean(f64),
    #[error("mutual information needs a nonempty count table with positive total")]
    EmptyTable,
}

pub type Result<T> = std::result::Result<T, Error>;
