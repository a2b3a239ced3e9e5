//! Exact references: the Kalman filter for the linear-Gaussian model, the
//! exact predictive CDF, and rank statistics under an exact sampler.

use alloc::vec::Vec;

use rand::Rng;

use crate::adapt::run_scheduled_filter;
use crate::diagnostics::{a_statistic, empirical_pmf};
use crate::math::normal_cdf;
use crate::model::{standard_normal, Lgss, LgssParams};
use crate::simulate::simulate_data;
use crate::{Error, Result};

/// Kalman filter state: the posterior `N(mean, var)` of `x_t` and the
/// one-step predictive `N(pred_obs_mean, pred_obs_var)` of `y_t` that was
/// used to assimilate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub mean: f64,
    pub var: f64,
    pub pred_obs_mean: f64,
    pub pred_obs_var: f64,
}

impl KalmanState {
    /// The prior `p(x_0)`; the predictive fields describe `y_1`.
    pub fn prior(params: &LgssParams) -> Self {
        let var = params.prior_std * params.prior_std;
        let mut ks = Self {
            mean: params.prior_mean,
            var,
            pred_obs_mean: 0.0,
            pred_obs_var: 0.0,
        };
        ks.set_prediction(params);
        ks
    }

    fn set_prediction(&mut self, p: &LgssParams) {
        self.pred_obs_mean = p.a * self.mean;
        self.pred_obs_var = p.a * p.a * self.var + p.sigma_u * p.sigma_u + p.sigma_v * p.sigma_v;
    }
}

/// Predict and update with observation `y`.
pub fn kalman_step(params: &LgssParams, ks: &KalmanState, y: f64) -> KalmanState {
    let pred_mean = params.a * ks.mean;
    let pred_var = params.a * params.a * ks.var + params.sigma_u * params.sigma_u;
    let obs_var = pred_var + params.sigma_v * params.sigma_v;
    let gain = pred_var / obs_var;
    KalmanState {
        mean: pred_mean + gain * (y - pred_mean),
        var: pred_var * (1.0 - gain),
        pred_obs_mean: pred_mean,
        pred_obs_var: obs_var,
    }
}

/// Runs the filter over `observations`; entry `i` is the state after `y_{i+1}`.
pub fn kalman_filter(params: &LgssParams, observations: &[f64]) -> Vec<KalmanState> {
    let mut ks = KalmanState::prior(params);
    observations
        .iter()
        .map(|y| {
            ks = kalman_step(params, &ks, *y);
            ks
        })
        .collect()
}

/// Exact predictive CDF at `y`, using the prediction stored in `ks`.
pub fn exact_b(ks: &KalmanState, y: f64) -> f64 {
    normal_cdf((y - ks.pred_obs_mean) / libm::sqrt(ks.pred_obs_var))
}

/// Ranks of `y` among `k` fictitious draws, all i.i.d. standard normal, for
/// `n` independent steps.
pub fn exact_sampler_ranks<R: Rng + ?Sized>(k: u32, n: usize, rng: &mut R) -> Result<Vec<u32>> {
    if k == 0 {
        return Err(Error::InvalidCount {
            what: "K",
            value: 0,
        });
    }
    let mut fict = alloc::vec![0.0; k as usize];
    Ok((0..n)
        .map(|_| {
            let y = standard_normal(rng);
            fict.iter_mut().for_each(|f| *f = standard_normal(rng));
            a_statistic(y, &fict)
        })
        .collect())
}

/// Empirical pmf of the rank statistic under the exact sampler.
pub fn exact_sampler_pmf<R: Rng + ?Sized>(k: u32, draws: usize, rng: &mut R) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(Error::InvalidCount {
            what: "draws",
            value: 0,
        });
    }
    empirical_pmf(&exact_sampler_ranks(k, draws, rng)?, k)
}

/// Squared differences between the particle filter's predicted observation
/// and the Kalman one, per step, for one filter run on `observations`.
pub fn pf_vs_kalman_sq_errors<R, F>(
    params: &LgssParams,
    observations: &[f64],
    schedule: F,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> usize,
{
    let model = Lgss::new(*params)?;
    let trace = run_scheduled_filter(
        &model,
        observations,
        1,
        observations.len(),
        schedule,
        false,
        rng,
    )?
    .map_err(|f| f.error)?;
    let exact = kalman_filter(params, observations);
    Ok(trace
        .steps
        .iter()
        .zip(&exact)
        .map(|(s, k)| {
            let d = s.predicted_obs - k.pred_obs_mean;
            d * d
        })
        .collect())
}

/// Mean of the last quarter (`t > T - T/4`) of a per-step series.
pub fn last_quarter_mean(values: &[f64]) -> f64 {
    let q = (values.len() / 4).max(1);
    let tail = &values[values.len() - q..];
    tail.iter().sum::<f64>() / q as f64
}

/// Mean over `runs` fresh trajectories of the last-quarter squared error
/// between the predicted observation of an `m`-particle filter and the
/// Kalman prediction.
pub fn pf_vs_kalman_mse<R: Rng + ?Sized>(
    params: &LgssParams,
    m: usize,
    steps: usize,
    runs: usize,
    rng: &mut R,
) -> Result<f64> {
    if runs == 0 {
        return Err(Error::InvalidCount {
            what: "runs",
            value: 0,
        });
    }
    let model = Lgss::new(*params)?;
    let mut total = 0.0;
    for _ in 0..runs {
        let (_, y) = simulate_data(&model, steps, rng)?;
        total += last_quarter_mean(&pf_vs_kalman_sq_errors(params, &y, |_| m, rng)?);
    }
    Ok(total / runs as f64)
}
