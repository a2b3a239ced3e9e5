//! The bootstrap particle filter: propagation, weighting, multinomial
//! resampling to an arbitrary target size, and the predictive mixture
//! `p_t^M(y) = (1/M) sum_m p(y | xbar_t^(m))` from which fictitious
//! observations are drawn.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Exp1;

use crate::model::{StateSpaceModel, StateVector};
use crate::{Error, Result};

/// `M` particles at time `t`, with weights.
///
/// After [`initialize`] and [`resample`] the weights are uniform; after
/// [`propagate_and_weight`] they are proportional to the likelihood of the
/// current observation. Either way they are normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<S> {
    particles: Vec<S>,
    weights: Vec<f64>,
    t: usize,
    uniform: bool,
}

impl<S: StateVector> ParticleSet<S> {
    /// Equally weighted set.
    pub fn uniform(particles: Vec<S>, t: usize) -> Result<Self> {
        let m = particles.len();
        if m == 0 {
            return Err(Error::InvalidCount {
                what: "particle count",
                value: 0,
            });
        }
        let w = 1.0 / m as f64;
        Ok(Self {
            weights: alloc::vec![w; m],
            particles,
            t,
            uniform: true,
        })
    }

    /// Weighted set; weights are normalized here.
    pub fn weighted(particles: Vec<S>, weights: Vec<f64>, t: usize) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidCount {
                what: "particle count",
                value: 0,
            });
        }
        if weights.len() != particles.len() {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "length differs from particle count",
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "must be finite and non-negative",
            });
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateWeights { t });
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            particles,
            weights,
            t,
            uniform: false,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// True when every weight equals `1/M` (freshly initialized or resampled).
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// The equal-weight predictive mixture over these particles.
    ///
    /// Meaningful right after [`propagate_and_weight`], where the particles
    /// are the propagated `xbar_t^(m)`; the weights play no part.
    pub fn predictive_mixture<'a, M>(&'a self, model: &'a M) -> PredictiveMixture<'a, M>
    where
        M: StateSpaceModel<State = S>,
    {
        PredictiveMixture {
            model,
            components: &self.particles,
            t: self.t,
        }
    }

    /// Weighted mean of the particles, one entry per state coordinate.
    pub fn posterior_mean(&self) -> S {
        let mut mean = S::zero();
        for (x, w) in self.particles.iter().zip(&self.weights) {
            mean.add_scaled(*w, x);
        }
        mean
    }
}

/// Equal-weight mixture `p_t^M(y) = (1/M) sum_m p(y | xbar_t^(m))`.
#[derive(Debug, Clone, Copy)]
pub struct PredictiveMixture<'a, M: StateSpaceModel> {
    model: &'a M,
    components: &'a [M::State],
    t: usize,
}

impl<'a, M: StateSpaceModel> PredictiveMixture<'a, M> {
    pub fn new(model: &'a M, components: &'a [M::State], t: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidCount {
                what: "mixture components",
                value: 0,
            });
        }
        Ok(Self {
            model,
            components,
            t,
        })
    }

    pub fn components(&self) -> &'a [M::State] {
        self.components
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Mixture mean `(1/M) sum_m E[Y | xbar^(m)]`.
    pub fn mean(&self) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .map(|x| self.model.observation_mean(x, self.t))
            .sum();
        s / self.components.len() as f64
    }

    /// Mixture CDF at `y`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        let mut s = 0.0;
        for x in self.components {
            s += self.model.likelihood_cdf(y, x, self.t)?;
        }
        Ok((s / self.components.len() as f64).clamp(0.0, 1.0))
    }

    /// One draw: pick a component uniformly, then sample the observation model.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = rng.random_range(0..self.components.len());
        self.model
            .observation_sample(&self.components[i], self.t, rng)
    }
}

/// Draws `m0` particles from the prior, with uniform weights, at `t = 0`.
pub fn initialize<M, R>(model: &M, m0: usize, rng: &mut R) -> Result<ParticleSet<M::State>>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
{
    if m0 == 0 {
        return Err(Error::InvalidCount {
            what: "initial particle count",
            value: m0,
        });
    }
    let particles = (0..m0).map(|_| model.prior_sample(rng)).collect();
    ParticleSet::uniform(particles, 0)
}

/// Moves every particle through the transition kernel to time `t + 1` and
/// weights it by the likelihood of `y`.
///
/// The input must be equally weighted (the bootstrap filter resamples every
/// step). The predictive mixture of the returned set is
/// [`ParticleSet::predictive_mixture`].
pub fn propagate_and_weight<M, R>(
    model: &M,
    ps: ParticleSet<M::State>,
    y: f64,
    rng: &mut R,
) -> Result<ParticleSet<M::State>>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
{
    debug_assert!(
        ps.uniform,
        "propagate_and_weight expects an equally weighted set"
    );
    let t = ps.t + 1;
    let mut particles = ps.particles;
    let mut weights = ps.weights;
    for (x, lw) in particles.iter_mut().zip(weights.iter_mut()) {
        *x = model.transition_sample(x, t, rng);
        *lw = model.log_likelihood(y, x, t);
    }
    if !normalize_log_weights(&mut weights) {
        return Err(Error::DegenerateWeights { t });
    }
    Ok(ParticleSet {
        particles,
        weights,
        t,
        uniform: false,
    })
}

/// Converts log-weights in place to normalized weights, subtracting the
/// maximum before exponentiating. Returns `false`, leaving `w` untouched,
/// if any entry is NaN or none is finite.
pub fn normalize_log_weights(w: &mut [f64]) -> bool {
    if w.iter().any(|v| v.is_nan()) {
        return false;
    }
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return false;
    }
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
    true
}

/// Multinomial resampling: `m_target` i.i.d. draws from the weighted
/// empirical distribution of `ps`. The output size may differ from the input.
///
/// Runs in `O(M + m_target)` by walking the cumulative weights with sorted
/// uniforms built from exponential spacings.
pub fn resample<S, R>(ps: &ParticleSet<S>, m_target: usize, rng: &mut R) -> Result<ParticleSet<S>>
where
    S: StateVector,
    R: Rng + ?Sized,
{
    let idx = multinomial_indices(&ps.weights, m_target, rng)?;
    let particles = idx.into_iter().map(|i| ps.particles[i]).collect();
    ParticleSet::uniform(particles, ps.t)
}

/// Ancestor indices of a multinomial resample, in nondecreasing order.
pub fn multinomial_indices<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidCount {
            what: "resample size",
            value: 0,
        });
    }
    if weights.is_empty() {
        return Err(Error::InvalidCount {
            what: "particle count",
            value: 0,
        });
    }
    // Order statistics of n uniforms: partial sums of n + 1 exponentials,
    // divided by their total.
    let mut spacings: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total_exp: f64 = spacings.iter().sum();
    let total_w: f64 = weights.iter().sum();
    let scale = total_w / total_exp;
    let last = weights.len() - 1;

    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut cum_w = weights[0];
    let mut u = 0.0;
    for e in spacings.drain(..n) {
        u += e * scale;
        while u >= cum_w && i < last {
            i += 1;
            cum_w += weights[i];
        }
        // Skip zero-weight tail entries that rounding may land on.
        while weights[i] == 0.0 && i > 0 {
            i -= 1;
        }
        out.push(i);
    }
    Ok(out)
}

/// `k` i.i.d. fictitious observations from the predictive mixture.
pub fn sample_fictitious<M, R>(
    pm: &PredictiveMixture<'_, M>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
{
    if k == 0 {
        return Err(Error::InvalidCount {
            what: "fictitious observation count",
            value: 0,
        });
    }
    Ok((0..k).map(|_| pm.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthModel, GrowthParams, Lgss, LgssParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn lgss() -> Lgss {
        Lgss::new(LgssParams::default()).unwrap()
    }

    #[test]
    fn initialize_counts() {
        let m = lgss();
        assert!(matches!(
            initialize(&m, 0, &mut rng(0)),
            Err(Error::InvalidCount { .. })
        ));
        let one = initialize(&m, 1, &mut rng(0)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.weights(), &[1.0]);
        let big = initialize(&m, 1024, &mut rng(0)).unwrap();
        assert!((big.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(big.t(), 0);
        assert!(big.is_uniform());
    }

    #[test]
    fn initialize_mean_of_sixteen() {
        // Mean of 16 N(0,1) draws has sd 1/4; |mean| > 1 is a 4-sigma event.
        let m = lgss();
        let mut r = rng(1);
        for _ in 0..200 {
            let ps = initialize(&m, 16, &mut r).unwrap();
            let mean = ps.particles().iter().sum::<f64>() / 16.0;
            assert!((-1.0..=1.0).contains(&mean));
        }
    }

    #[test]
    fn single_particle_weight_is_one() {
        let m = GrowthModel::new(GrowthParams::MODEL_2).unwrap();
        let ps = initialize(&m, 1, &mut rng(2)).unwrap();
        let w = propagate_and_weight(&m, ps, 1e6, &mut rng(3)).unwrap();
        assert_eq!(w.weights(), &[1.0]);
        assert_eq!(w.t(), 1);
    }

    #[test]
    fn weights_follow_gaussian_likelihood_ratio() {
        let m = lgss();
        let ps = ParticleSet::uniform(alloc::vec![0.3, -1.2, 2.0], 0).unwrap();
        let y = 0.8;
        let w = propagate_and_weight(&m, ps, y, &mut rng(4)).unwrap();
        assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let x = w.particles();
        let want = (-((y - x[0]).powi(2) - (y - x[1]).powi(2)) / 2.0).exp();
        assert!((w.weights()[0] / w.weights()[1] / want - 1.0).abs() < 1e-10);
    }

    #[test]
    fn equal_likelihood_gives_equal_weights() {
        let m = lgss();
        let ps = ParticleSet::weighted(alloc::vec![1.0, -1.0], alloc::vec![1.0, 1.0], 3).unwrap();
        assert_eq!(ps.weights(), &[0.5, 0.5]);
        let mut w = alloc::vec![
            m.log_likelihood(0.0, &1.0, 1),
            m.log_likelihood(0.0, &-1.0, 1)
        ];
        assert!(normalize_log_weights(&mut w));
        assert_eq!(w, alloc::vec![0.5, 0.5]);
    }

    #[test]
    fn peaked_likelihood_does_not_underflow() {
        let mut w = alloc::vec![-1e5, -1e5 - 1.0, -2e5];
        assert!(normalize_log_weights(&mut w));
        assert!((w[0] / w[1] - 1f64.exp()).abs() < 1e-12);
        assert!(!normalize_log_weights(&mut [f64::NEG_INFINITY; 3]));
        assert!(!normalize_log_weights(&mut [0.0, f64::NAN]));
    }

    #[test]
    fn degenerate_weights_error() {
        struct Hopeless;
        impl StateSpaceModel for Hopeless {
            type State = f64;
            fn prior_sample<R: Rng + ?Sized>(&self, _: &mut R) -> f64 {
                0.0
            }
            fn drift(&self, x: &f64, _: usize) -> f64 {
                *x
            }
            fn transition_sample<R: Rng + ?Sized>(&self, x: &f64, _: usize, _: &mut R) -> f64 {
                *x
            }
            fn log_likelihood(&self, _: f64, _: &f64, _: usize) -> f64 {
                f64::NEG_INFINITY
            }
            fn observation_mean(&self, x: &f64, _: usize) -> f64 {
                *x
            }
            fn observation_sample<R: Rng + ?Sized>(&self, x: &f64, _: usize, _: &mut R) -> f64 {
                *x
            }
        }
        let ps = initialize(&Hopeless, 4, &mut rng(0)).unwrap();
        let err = propagate_and_weight(&Hopeless, ps, 1.0, &mut rng(0)).unwrap_err();
        assert_eq!(err, Error::DegenerateWeights { t: 1 });
        assert!(PredictiveMixture::new(&Hopeless, &[], 0).is_err());
    }

    #[test]
    fn resample_degenerate_weights() {
        let ps = ParticleSet::weighted(alloc::vec![1.0, 2.0, 3.0], alloc::vec![1.0, 0.0, 0.0], 1)
            .unwrap();
        let out = resample(&ps, 5, &mut rng(5)).unwrap();
        assert_eq!(out.particles(), &[1.0; 5]);
        let ps = ParticleSet::weighted(alloc::vec![1.0, 2.0, 3.0], alloc::vec![0.0, 0.0, 1.0], 1)
            .unwrap();
        assert_eq!(
            resample(&ps, 4, &mut rng(5)).unwrap().particles(),
            &[3.0; 4]
        );
        assert!(resample(&ps, 0, &mut rng(5)).is_err());
    }

    #[test]
    fn resample_preserves_support_and_size() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.37).collect();
        let ps = ParticleSet::uniform(xs.clone(), 2).unwrap();
        for target in [1, 7, 50, 333] {
            let out = resample(&ps, target, &mut rng(target as u64)).unwrap();
            assert_eq!(out.len(), target);
            assert!(out.is_uniform());
            assert_eq!(out.t(), 2);
            assert!(out.particles().iter().all(|x| xs.contains(x)));
        }
    }

    #[test]
    fn resample_is_unbiased() {
        let xs = alloc::vec![-2.0, 0.5, 1.0, 4.0];
        let ws = alloc::vec![0.1, 0.4, 0.3, 0.2];
        let ps = ParticleSet::weighted(xs.clone(), ws.clone(), 1).unwrap();
        let mean: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum();
        let var: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * (x - mean).powi(2))
            .sum();
        let n = 100_000;
        let out = resample(&ps, n, &mut rng(6)).unwrap();
        let got = out.particles().iter().sum::<f64>() / n as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (got - mean).abs() < 4.0 * se,
            "got {got} want {mean} se {se}"
        );
        // Frequencies match the weights.
        for (x, w) in xs.iter().zip(&ws) {
            let f = out.particles().iter().filter(|p| *p == x).count() as f64 / n as f64;
            assert!((f - w).abs() < 5.0 * (w * (1.0 - w) / n as f64).sqrt());
        }
    }

    #[test]
    fn posterior_mean_values() {
        let ps = ParticleSet::uniform(alloc::vec![3.0], 0).unwrap();
        assert_eq!(ps.posterior_mean(), 3.0);
        let ps = ParticleSet::weighted(alloc::vec![0.0, 10.0], alloc::vec![0.3, 0.7], 0).unwrap();
        assert!((ps.posterior_mean() - 7.0).abs() < 1e-12);
        let ps = ParticleSet::weighted(
            alloc::vec![[1.0, 2.0], [3.0, 6.0]],
            alloc::vec![0.5, 0.5],
            0,
        )
        .unwrap();
        assert_eq!(ps.posterior_mean(), [2.0, 4.0]);
    }

    #[test]
    fn fictitious_from_single_component() {
        let m = lgss();
        let comps = [2.0];
        let pm = PredictiveMixture::new(&m, &comps, 1).unwrap();
        let ys = sample_fictitious(&pm, 50_000, &mut rng(7)).unwrap();
        assert_eq!(ys.len(), 50_000);
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((mean - 2.0).abs() < 0.02);
        assert!(sample_fictitious(&pm, 0, &mut rng(7)).is_err());
        assert_eq!(pm.mean(), 2.0);
    }

    #[test]
    fn fictitious_mixture_is_equally_weighted() {
        let m = Lgss::new(LgssParams {
            sigma_v: 0.1,
            ..Default::default()
        })
        .unwrap();
        let comps = [0.0, 10.0];
        let pm = PredictiveMixture::new(&m, &comps, 1).unwrap();
        let ys = sample_fictitious(&pm, 10_000, &mut rng(8)).unwrap();
        let below = ys.iter().filter(|y| **y < 5.0).count() as f64 / 1e4;
        assert!((0.47..=0.53).contains(&below), "{below}");
        assert!((pm.cdf(5.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_seeds_identical_sets() {
        let m = GrowthModel::new(GrowthParams::MODEL_1).unwrap();
        let run = |seed| {
            let mut r = rng(seed);
            let mut ps = initialize(&m, 64, &mut r).unwrap();
            for y in [0.1, 3.0, 7.5, 0.2] {
                let w = propagate_and_weight(&m, ps, y, &mut r).unwrap();
                ps = resample(&w, 64, &mut r).unwrap();
            }
            ps
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }
}
