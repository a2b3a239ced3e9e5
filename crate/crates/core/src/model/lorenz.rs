use rand::Rng;

use super::{require_positive, standard_normal, GaussianNoise, StateSpaceModel};
use crate::Result;

/// Stochastic Lorenz 63 system, integrated with Euler–Maruyama at step
/// `delta` and observed through its first coordinate every `t_obs` time
/// units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz63Params {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    /// Integration step (time units).
    pub delta: f64,
    /// Time between observations; must be a whole number of steps.
    pub t_obs: f64,
    /// Observation noise variance.
    pub sigma2_obs: f64,
    /// Diffusion intensity; each step adds noise of variance `sigma2_state * delta` per coordinate.
    pub sigma2_state: f64,
    pub prior_mean: [f64; 3],
    pub prior_std: f64,
}

impl Default for Lorenz63Params {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            delta: 1e-3,
            t_obs: 0.2,
            sigma2_obs: 0.5,
            sigma2_state: 1.0,
            prior_mean: [-5.9, -5.5, 24.6],
            prior_std: 1.0,
        }
    }
}

impl Lorenz63Params {
    /// Number of integration steps between observations.
    pub fn substeps(&self) -> Result<usize> {
        require_positive("delta", self.delta)?;
        require_positive("t_obs", self.t_obs)?;
        let ratio = self.t_obs / self.delta;
        let n = libm::round(ratio);
        if n < 1.0 || libm::fabs(ratio - n) > 1e-9 * ratio {
            return Err(crate::Error::InvalidParameter {
                name: "t_obs",
                reason: "must be a positive multiple of delta",
            });
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.substeps()?;
        require_positive("sigma2_obs", self.sigma2_obs)?;
        require_positive("prior_std", self.prior_std)?;
        if !(self.sigma2_state >= 0.0 && self.sigma2_state.is_finite()) {
            return Err(crate::Error::InvalidParameter {
                name: "sigma2_state",
                reason: "must be non-negative",
            });
        }
        if ![self.sigma, self.rho, self.beta]
            .iter()
            .all(|c| c.is_finite())
        {
            return Err(crate::Error::InvalidParameter {
                name: "sigma/rho/beta",
                reason: "must be finite",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz63 {
    params: Lorenz63Params,
    substeps: usize,
    step_noise_sd: f64,
    noise: GaussianNoise,
}

impl Lorenz63 {
    pub fn new(params: Lorenz63Params) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            substeps: params.substeps()?,
            step_noise_sd: libm::sqrt(params.sigma2_state * params.delta),
            noise: GaussianNoise {
                sd: libm::sqrt(params.sigma2_obs),
            },
        })
    }

    pub fn params(&self) -> &Lorenz63Params {
        &self.params
    }

    #[inline]
    fn vector_field(&self, x: &[f64; 3]) -> [f64; 3] {
        let p = &self.params;
        [
            p.sigma * (x[1] - x[0]),
            x[0] * (p.rho - x[2]) - x[1],
            x[0] * x[1] - p.beta * x[2],
        ]
    }

    #[inline]
    fn euler(&self, x: &mut [f64; 3]) {
        let f = self.vector_field(x);
        for (xi, fi) in x.iter_mut().zip(f) {
            *xi += self.params.delta * fi;
        }
    }
}

impl StateSpaceModel for Lorenz63 {
    type State = [f64; 3];

    fn prior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let m = self.params.prior_mean;
        let s = self.params.prior_std;
        [
            m[0] + s * standard_normal(rng),
            m[1] + s * standard_normal(rng),
            m[2] + s * standard_normal(rng),
        ]
    }

    /// Deterministic Euler integration over one observation period.
    fn drift(&self, x: &[f64; 3], _t: usize) -> [f64; 3] {
        let mut x = *x;
        for _ in 0..self.substeps {
            self.euler(&mut x);
        }
        x
    }

    fn transition_sample<R: Rng + ?Sized>(&self, x: &[f64; 3], _t: usize, rng: &mut R) -> [f64; 3] {
        let mut x = *x;
        for _ in 0..self.substeps {
            self.euler(&mut x);
            if self.step_noise_sd > 0.0 {
                for xi in x.iter_mut() {
                    *xi += self.step_noise_sd * standard_normal(rng);
                }
            }
        }
        x
    }

    fn log_likelihood(&self, y: f64, x: &[f64; 3], _t: usize) -> f64 {
        self.noise.ln_pdf(y, x[0])
    }

    fn likelihood_cdf(&self, y: f64, x: &[f64; 3], _t: usize) -> Result<f64> {
        Ok(self.noise.cdf(y, x[0]))
    }

    fn observation_mean(&self, x: &[f64; 3], _t: usize) -> f64 {
        x[0]
    }

    fn observation_sample<R: Rng + ?Sized>(&self, x: &[f64; 3], _t: usize, rng: &mut R) -> f64 {
        self.noise.sample(x[0], rng)
    }
}
