//! Coefficient histograms and discrete distribution models.
//!
//! The composite model puts an explicit spike `p0` at level zero and an
//! `alpha / (n^2 + beta)` Cauchy shape on every non-zero integer level. Two
//! conventional baselines (discretized Laplacian and Cauchy) are provided for
//! comparison through the KL divergence.

mod baseline;
mod composite;
mod fit;
mod histogram;
mod kl;
mod sample;

pub use baseline::{fit_baseline, BaselineKind, BaselineModel};
pub use composite::{alpha_from_beta, CompositeCauchyModel, TAIL_CUTOFF};
pub use fit::{fit_composite_cauchy, BetaGrid};
pub use histogram::{build_histogram, CoefficientHistogram};
pub use kl::{kl_divergence, model_kl, Pmf};
pub use sample::PmfSampler;

/// A probability mass function over the integers.
pub trait DiscretePmf {
    fn pmf(&self, n: i64) -> f64;

    /// Natural log of `pmf(n)`. Implementations whose mass underflows far out
    /// in the tail override this with an exact form.
    fn ln_pmf(&self, n: i64) -> f64 {
        self.pmf(n).ln()
    }
}
