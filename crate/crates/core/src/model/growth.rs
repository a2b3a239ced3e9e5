use rand::Rng;

use super::{require_positive, standard_normal, GaussianNoise, StateSpaceModel};
use crate::Result;

/// Parameters of the stochastic growth model
///
/// ```text
/// x_t = x_{t-1}/2 + 25 x_{t-1} / (1 + x_{t-1}^2) + 8 cos(phi t) + u_t
/// y_t = x_t^2 / 20 + v_t
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub phi: f64,
    pub sigma_u: f64,
    pub sigma_v: f64,
}

impl GrowthParams {
    /// `sigma_u = 1`, `sigma_v = 0.5`.
    pub const MODEL_1: Self = Self {
        phi: 0.4,
        sigma_u: 1.0,
        sigma_v: 0.5,
    };
    /// `sigma_u = 2`, `sigma_v = 0.1`.
    pub const MODEL_2: Self = Self {
        phi: 0.4,
        sigma_u: 2.0,
        sigma_v: 0.1,
    };

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() {
            return Err(crate::Error::InvalidParameter {
                name: "phi",
                reason: "must be finite",
            });
        }
        require_positive("sigma_u", self.sigma_u)?;
        require_positive("sigma_v", self.sigma_v)
    }
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self::MODEL_1
    }
}

/// Stochastic growth model. The prior is `x_0 ~ N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthModel {
    params: GrowthParams,
    noise: GaussianNoise,
}

impl GrowthModel {
    pub fn new(params: GrowthParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            noise: GaussianNoise { sd: params.sigma_v },
        })
    }

    pub fn params(&self) -> &GrowthParams {
        &self.params
    }

    #[inline]
    fn h(x: f64) -> f64 {
        x * x / 20.0
    }
}

impl StateSpaceModel for GrowthModel {
    type State = f64;

    fn prior_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        standard_normal(rng)
    }

    fn drift(&self, x: &f64, t: usize) -> f64 {
        let x = *x;
        0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * libm::cos(self.params.phi * t as f64)
    }

    fn transition_sample<R: Rng + ?Sized>(&self, x: &f64, t: usize, rng: &mut R) -> f64 {
        self.drift(x, t) + self.params.sigma_u * standard_normal(rng)
    }

    fn log_likelihood(&self, y: f64, x: &f64, _t: usize) -> f64 {
        self.noise.ln_pdf(y, Self::h(*x))
    }

    fn likelihood_cdf(&self, y: f64, x: &f64, _t: usize) -> Result<f64> {
        Ok(self.noise.cdf(y, Self::h(*x)))
    }

    fn observation_mean(&self, x: &f64, _t: usize) -> f64 {
        Self::h(*x)
    }

    fn observation_sample<R: Rng + ?Sized>(&self, x: &f64, _t: usize, rng: &mut R) -> f64 {
        self.noise.sample(Self::h(*x), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drift_at_origin() {
        let m = GrowthModel::new(GrowthParams::MODEL_1).unwrap();
        let want = 8.0 * 0.4f64.cos();
        assert!((m.drift(&0.0, 1) - want).abs() < 1e-15);
        assert!((m.drift(&0.0, 1) - 7.3684).abs() < 1e-4);
    }

    #[test]
    fn drift_iteration_is_reproducible() {
        let m = GrowthModel::new(GrowthParams::MODEL_1).unwrap();
        let run = || {
            (1..=500).scan(0.3f64, |x, t| {
                *x = m.drift(x, t);
                Some(*x)
            })
        };
        let a: Vec<u64> = run().map(f64::to_bits).collect();
        let b: Vec<u64> = run().map(f64::to_bits).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn likelihood_peaks_at_observation_mean() {
        let m = GrowthModel::new(GrowthParams::MODEL_1).unwrap();
        let peak = 1.0 / (0.5 * (2.0 * core::f64::consts::PI).sqrt());
        assert!((m.likelihood(0.0, &0.0, 1) - peak).abs() < 1e-14);
        assert!((m.likelihood(0.0, &0.0, 1) - 0.7979).abs() < 1e-4);
        assert!((m.likelihood(0.2, &2.0, 1) - peak).abs() < 1e-14);
        assert_eq!(m.likelihood_cdf(0.2, &2.0, 1).unwrap(), 0.5);
    }

    #[test]
    fn prior_is_finite_scalar() {
        let m = GrowthModel::new(GrowthParams::MODEL_2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(m.prior_sample(&mut rng).is_finite());
    }

    #[test]
    fn noiseless_observation() {
        let m = GrowthModel::new(GrowthParams {
            sigma_v: 1e-12,
            ..GrowthParams::MODEL_1
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!((m.observation_sample(&2.0, 1, &mut rng) - 0.2).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GrowthModel::new(GrowthParams {
            sigma_u: 0.0,
            ..GrowthParams::MODEL_1
        })
        .is_err());
        assert!(GrowthModel::new(GrowthParams {
            phi: f64::NAN,
            ..GrowthParams::MODEL_1
        })
        .is_err());
    }
}
