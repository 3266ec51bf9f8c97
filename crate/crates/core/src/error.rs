use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not an element of se2(3): {0}")]
    NotInAlgebra(String),

    #[error("rotation angle {angle} rad is within {margin} rad of pi")]
    NearSingularity { angle: f64, margin: f64 },

    #[error("position norm {radius} m is inside the {guard} m origin guard")]
    OriginSingularity { radius: f64, guard: f64 },

    #[error("invalid rotation matrix: {0}")]
    InvalidRotation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size underflow at t = {t} s (h = {h} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("gain synthesis failed: {0}")]
    GainSynthesis(String),

    #[error("propagation aborted after t = {t_last} s: {source}")]
    Aborted {
        t_last: f64,
        #[source]
        source: Box<Error>,
    },
}
