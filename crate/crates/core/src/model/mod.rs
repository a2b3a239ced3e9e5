//! State-space models: a hidden Markov chain `x_t` observed through scalar
//! `y_t`.
//!
//! A model provides the prior `p(x_0)`, the transition kernel
//! `p(x_t | x_{t-1})`, and the observation density `p(y_t | x_t)` together
//! with its CDF when one exists in closed form.

mod growth;
mod lgss;
mod lorenz;

pub use growth::{GrowthModel, GrowthParams};
pub use lgss::{Lgss, LgssParams};
pub use lorenz::{Lorenz63, Lorenz63Params};

use core::fmt::Debug;

use rand::Rng;

use crate::Result;

/// A point in the state space, stored inline.
pub trait StateVector: Copy + Debug + PartialEq + Send + Sync + 'static {
    /// State dimension `dx`.
    const DIM: usize;

    fn zero() -> Self;

    fn component(&self, i: usize) -> f64;

    /// `self += w * other`
    fn add_scaled(&mut self, w: f64, other: &Self);
}

impl StateVector for f64 {
    const DIM: usize = 1;

    fn zero() -> Self {
        0.0
    }

    fn component(&self, i: usize) -> f64 {
        assert_eq!(i, 0, "scalar state has a single component");
        *self
    }

    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
}

impl<const N: usize> StateVector for [f64; N] {
    const DIM: usize = N;

    fn zero() -> Self {
        [0.0; N]
    }

    fn component(&self, i: usize) -> f64 {
        self[i]
    }

    fn add_scaled(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += w * b;
        }
    }
}

/// A discrete-time Markov state-space model with scalar observations.
///
/// Implementations are immutable after construction; all randomness comes
/// from the generator passed to each sampler, so a model can be shared by
/// concurrent runs.
pub trait StateSpaceModel: Send + Sync {
    type State: StateVector;

    fn prior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    /// Noise-free part of the transition at time `t`.
    fn drift(&self, x: &Self::State, t: usize) -> Self::State;

    /// One draw from `p(x_t | x_{t-1} = x)`.
    fn transition_sample<R: Rng + ?Sized>(
        &self,
        x: &Self::State,
        t: usize,
        rng: &mut R,
    ) -> Self::State;

    /// `log p(y | x)` at time `t`.
    fn log_likelihood(&self, y: f64, x: &Self::State, t: usize) -> f64;

    /// `p(y | x)` at time `t`.
    fn likelihood(&self, y: f64, x: &Self::State, t: usize) -> f64 {
        libm::exp(self.log_likelihood(y, x, t))
    }

    /// `P(Y <= y | x)` at time `t`.
    ///
    /// Returns [`crate::Error::UnsupportedModel`] unless the model overrides it.
    fn likelihood_cdf(&self, _y: f64, _x: &Self::State, _t: usize) -> Result<f64> {
        Err(crate::Error::UnsupportedModel)
    }

    /// Conditional mean `E[Y | x]`.
    fn observation_mean(&self, x: &Self::State, t: usize) -> f64;

    /// One draw from `p(y | x)` at time `t`.
    fn observation_sample<R: Rng + ?Sized>(&self, x: &Self::State, t: usize, rng: &mut R) -> f64;
}

/// Observation `y = h(x) + v`, `v ~ N(0, sd^2)`; shared by the bundled models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GaussianNoise {
    pub sd: f64,
}

impl GaussianNoise {
    #[inline]
    pub fn ln_pdf(&self, y: f64, mean: f64) -> f64 {
        crate::math::normal_ln_pdf(y, mean, self.sd)
    }

    #[inline]
    pub fn cdf(&self, y: f64, mean: f64) -> f64 {
        crate::math::normal_cdf((y - mean) / self.sd)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        mean + self.sd * standard_normal(rng)
    }
}

#[inline]
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

pub(crate) fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::InvalidParameter {
            name,
            reason: "must be positive and finite",
        })
    }
}
