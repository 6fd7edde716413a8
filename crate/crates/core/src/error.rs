use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("rotation is not orthogonal (max |RᵀR - I| = {residual:e})")]
    NonOrthogonal { residual: f64 },

    #[error("singular force law `{law}`: separation {distance:e} below epsilon {epsilon:e}")]
    Singularity { law: String, distance: f64, epsilon: f64 },

    #[error("velocity Verlet needs a velocity-independent force, but `{law}` depends on velocity")]
    VelocityDependentLaw { law: String },

    #[error("invalid integration parameters: {0}")]
    InvalidIntegration(String),

    #[error("speed {speed} is not below the limiting speed {limit}")]
    SpeedOutOfRange { speed: f64, limit: f64 },

    #[error("operands use different velocity groups ({left} vs {right})")]
    MixedGroups { left: String, right: String },

    #[error("root solve did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
