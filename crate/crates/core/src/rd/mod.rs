//! Frame-level rate and distortion predictors anchored on the previously
//! coded frame, power-law surrogates of those predictors, and the lambda
//! derived from their slopes.

mod calibration;
mod hyperbolic;
mod lambda;
mod surrogate;

pub use calibration::{
    estimate_distortion, estimate_rate, DistortionModel, FrameCalibration, RateModel,
};
pub use hyperbolic::{fit_hyperbolic, HyperbolicFit};
pub use lambda::{lambda_at, stabilization_scale, stabilize_lambda, LambdaState, TAU};
pub use surrogate::{candidate_qps, ModelTraceRow, RdSurrogate, N_CANDIDATES};
