use rand::Rng;

use super::{require_positive, standard_normal, GaussianNoise, StateSpaceModel};
use crate::Result;

/// Parameters of the scalar linear-Gaussian model
/// `x_t = a x_{t-1} + u_t`, `y_t = x_t + v_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgssParams {
    pub a: f64,
    pub sigma_u: f64,
    pub sigma_v: f64,
    pub prior_mean: f64,
    pub prior_std: f64,
}

impl Default for LgssParams {
    fn default() -> Self {
        Self {
            a: 0.9,
            sigma_u: core::f64::consts::FRAC_1_SQRT_2,
            sigma_v: 1.0,
            prior_mean: 0.0,
            prior_std: 1.0,
        }
    }
}

impl LgssParams {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.prior_mean.is_finite() {
            return Err(crate::Error::InvalidParameter {
                name: "a/prior_mean",
                reason: "must be finite",
            });
        }
        require_positive("sigma_u", self.sigma_u)?;
        require_positive("sigma_v", self.sigma_v)?;
        require_positive("prior_std", self.prior_std)
    }
}

/// Linear-Gaussian state-space model; the Kalman filter in [`crate::oracle`]
/// solves it exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lgss {
    params: LgssParams,
    noise: GaussianNoise,
}

impl Lgss {
    pub fn new(params: LgssParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            noise: GaussianNoise { sd: params.sigma_v },
        })
    }

    pub fn params(&self) -> &LgssParams {
        &self.params
    }
}

impl StateSpaceModel for Lgss {
    type State = f64;

    fn prior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.params.prior_mean + self.params.prior_std * standard_normal(rng)
    }

    fn drift(&self, x: &f64, _t: usize) -> f64 {
        self.params.a * x
    }

    fn transition_sample<R: Rng + ?Sized>(&self, x: &f64, t: usize, rng: &mut R) -> f64 {
        self.drift(x, t) + self.params.sigma_u * standard_normal(rng)
    }

    fn log_likelihood(&self, y: f64, x: &f64, _t: usize) -> f64 {
        self.noise.ln_pdf(y, *x)
    }

    fn likelihood_cdf(&self, y: f64, x: &f64, _t: usize) -> Result<f64> {
        Ok(self.noise.cdf(y, *x))
    }

    fn observation_mean(&self, x: &f64, _t: usize) -> f64 {
        *x
    }

    fn observation_sample<R: Rng + ?Sized>(&self, x: &f64, _t: usize, rng: &mut R) -> f64 {
        self.noise.sample(*x, rng)
    }
}
