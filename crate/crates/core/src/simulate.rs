//! Synthetic trajectories from a state-space model.

use alloc::vec::Vec;

use rand::Rng;

use crate::model::StateSpaceModel;
use crate::{Error, Result};

/// Draws `x_0` from the prior, then `(x_t, y_t)` for `t = 1..=steps`.
///
/// Returns the hidden states `x_1..x_T` and observations `y_1..y_T`.
pub fn simulate_data<M, R>(
    model: &M,
    steps: usize,
    rng: &mut R,
) -> Result<(Vec<M::State>, Vec<f64>)>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
{
    if steps == 0 {
        return Err(Error::InvalidCount {
            what: "T",
            value: 0,
        });
    }
    let mut x = model.prior_sample(rng);
    let mut states = Vec::with_capacity(steps);
    let mut obs = Vec::with_capacity(steps);
    for t in 1..=steps {
        x = model.transition_sample(&x, t, rng);
        obs.push(model.observation_sample(&x, t, rng));
        states.push(x);
    }
    Ok((states, obs))
}
