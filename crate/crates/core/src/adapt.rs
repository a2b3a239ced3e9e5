//! Block-adaptive control of the particle count.
//!
//! The filter runs in blocks of `W` steps. At the end of each block the
//! collected statistics are assessed, the particle count is updated, and
//! the weighted set at the block's last step is resampled to the new size.

use alloc::vec::Vec;

use rand::Rng;

use crate::diagnostics::{
    a_statistic, b_statistic, chi2_uniformity_pvalue, chi2_uniformity_pvalue_continuous,
    lag_correlation_ranks, WindowRecord,
};
use crate::filter::{initialize, propagate_and_weight, resample, sample_fictitious};
use crate::model::StateSpaceModel;
use crate::{Error, Result};

/// Which block statistic drives the particle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Chi-squared uniformity test on the ranks `A`.
    UniformityA,
    /// Lag-1 correlation of the ranks `A`.
    CorrelationA,
    /// Chi-squared uniformity test on `B`, binned into `K + 1` cells.
    UniformityB,
    /// Never adapt; statistics are still recorded.
    Fixed,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::UniformityA => "uniformity-a",
            Method::CorrelationA => "correlation-a",
            Method::UniformityB => "uniformity-b",
            Method::Fixed => "fixed",
        }
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniformity-a" => Ok(Method::UniformityA),
            "correlation-a" => Ok(Method::CorrelationA),
            "uniformity-b" => Ok(Method::UniformityB),
            "fixed" => Ok(Method::Fixed),
            _ => Err(Error::InvalidParameter {
                name: "method",
                reason: "unknown method",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptPolicy {
    /// Fictitious observations per step.
    pub k: u32,
    /// Block length `W`.
    pub window: usize,
    pub p_low: f64,
    pub p_high: f64,
    /// Correlation thresholds: increase above `r_high`, decrease below `r_low`.
    pub r_low: f64,
    pub r_high: f64,
    pub m_min: usize,
    pub m_max: usize,
    /// Multiplicative step for the particle count.
    pub scale: f64,
    pub method: Method,
    /// Record `B` at every step when the model supports it.
    pub track_b: bool,
}

impl Default for AdaptPolicy {
    fn default() -> Self {
        Self {
            k: 7,
            window: 50,
            p_low: 0.2,
            p_high: 0.6,
            r_low: 0.05,
            r_high: 0.2,
            m_min: 16,
            m_max: 1 << 16,
            scale: 2.0,
            method: Method::UniformityA,
            track_b: true,
        }
    }
}

impl AdaptPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidCount {
                what: "K",
                value: 0,
            });
        }
        if self.window == 0 {
            return Err(Error::InvalidCount {
                what: "window",
                value: 0,
            });
        }
        if !(0.0 < self.p_low && self.p_low < self.p_high && self.p_high < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_low/p_high",
                reason: "need 0 < p_low < p_high < 1",
            });
        }
        if !(0.0 <= self.r_low && self.r_low < self.r_high) {
            return Err(Error::InvalidParameter {
                name: "r_low/r_high",
                reason: "need 0 <= r_low < r_high",
            });
        }
        if !(1 <= self.m_min && self.m_min <= self.m_max) {
            return Err(Error::InvalidParameter {
                name: "m_min/m_max",
                reason: "need 1 <= m_min <= m_max",
            });
        }
        if !(self.scale > 1.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: "must exceed 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Increase,
    Keep,
    Decrease,
}

/// The test value behind a decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evidence {
    PValue(f64),
    Correlation(f64),
    /// Constant window; treated as no evidence.
    DegenerateVariance,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptDecision {
    pub action: Action,
    pub evidence: Evidence,
}

impl AdaptDecision {
    fn from_p_value(p: f64, policy: &AdaptPolicy) -> Self {
        let action = if p < policy.p_low {
            Action::Increase
        } else if p > policy.p_high {
            Action::Decrease
        } else {
            Action::Keep
        };
        Self {
            action,
            evidence: Evidence::PValue(p),
        }
    }

    fn from_correlation(r: f64, policy: &AdaptPolicy) -> Self {
        let abs = libm::fabs(r);
        let action = if abs > policy.r_high {
            Action::Increase
        } else if abs < policy.r_low {
            Action::Decrease
        } else {
            Action::Keep
        };
        Self {
            action,
            evidence: Evidence::Correlation(r),
        }
    }
}

/// Runs the policy's test on a completed block.
pub fn assess_block(rec: &WindowRecord, policy: &AdaptPolicy) -> Result<AdaptDecision> {
    match policy.method {
        Method::Fixed => Ok(AdaptDecision {
            action: Action::Keep,
            evidence: Evidence::None,
        }),
        Method::UniformityA => {
            let p = chi2_uniformity_pvalue(&rec.a_values, policy.k)?;
            Ok(AdaptDecision::from_p_value(p, policy))
        }
        Method::UniformityB => {
            let p = chi2_uniformity_pvalue_continuous(&rec.b_values, policy.k + 1)?;
            Ok(AdaptDecision::from_p_value(p, policy))
        }
        Method::CorrelationA => match lag_correlation_ranks(&rec.a_values, 1) {
            Ok(r) => Ok(AdaptDecision::from_correlation(r, policy)),
            Err(Error::DegenerateVariance) => Ok(AdaptDecision {
                action: Action::Keep,
                evidence: Evidence::DegenerateVariance,
            }),
            Err(e) => Err(e),
        },
    }
}

/// Geometric update: multiply or divide by `scale`, then clamp to
/// `[m_min, m_max]`.
pub fn update_m(m: usize, d: &AdaptDecision, policy: &AdaptPolicy) -> usize {
    let next = match d.action {
        Action::Keep => return m,
        Action::Increase => libm::round(m as f64 * policy.scale),
        Action::Decrease => libm::round(m as f64 / policy.scale),
    };
    (next as usize).clamp(policy.m_min, policy.m_max)
}

/// One filtering step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<S> {
    pub t: usize,
    /// Particle count used at this step.
    pub particles: usize,
    /// Weighted posterior mean of the state.
    pub estimate: S,
    /// Mean of the predictive mixture, the one-step prediction of `y_t`.
    pub predicted_obs: f64,
    pub a: u32,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub window: WindowRecord,
    /// Absent for runs whose particle count follows a fixed schedule.
    pub decision: Option<AdaptDecision>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<S> {
    pub steps: Vec<StepRecord<S>>,
    pub blocks: Vec<BlockRecord>,
    /// Seed of the generator that drove the run, when the caller knows it.
    pub seed: Option<u64>,
}

impl<S> RunTrace<S> {
    pub fn a_values(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.a).collect()
    }

    /// Mean particle count over the last `n` complete blocks (all of them if
    /// fewer than `n`).
    pub fn mean_particles_last_blocks(&self, n: usize) -> Option<f64> {
        let take = n.min(self.blocks.len());
        if take == 0 {
            return None;
        }
        let tail = &self.blocks[self.blocks.len() - take..];
        Some(tail.iter().map(|b| b.window.particles as f64).sum::<f64>() / take as f64)
    }

    /// Mean block p-value (chi-squared on `A`) over complete blocks.
    pub fn mean_p_value(&self) -> Option<f64> {
        let ps: Vec<f64> = self
            .blocks
            .iter()
            .filter_map(|b| b.window.p_value)
            .collect();
        if ps.is_empty() {
            None
        } else {
            Some(ps.iter().sum::<f64>() / ps.len() as f64)
        }
    }
}

/// A run that stopped early; `trace` holds every step completed before
/// `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure<S> {
    pub error: Error,
    pub trace: RunTrace<S>,
}

impl<S: core::fmt::Debug> core::fmt::Display for RunFailure<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} after {} steps", self.error, self.trace.steps.len())
    }
}

impl<S: core::fmt::Debug> core::error::Error for RunFailure<S> {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub type RunResult<S> = core::result::Result<RunTrace<S>, RunFailure<S>>;

/// Block-adaptive bootstrap filter over `observations` (`y_1, y_2, ...`).
///
/// Each step propagates and weights the particles, draws `K` fictitious
/// observations from the predictive mixture, records `A` (and `B` when the
/// model has a closed-form CDF) and resamples. At the end of block `n` the
/// policy chooses `M_{n+1}` and the resampling at that step draws
/// `M_{n+1}` particles from the weighted set. A trailing partial block is
/// not assessed.
pub fn run_adaptive_filter<M, R>(
    model: &M,
    observations: &[f64],
    policy: &AdaptPolicy,
    m0: usize,
    rng: &mut R,
) -> Result<RunResult<M::State>>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
{
    policy.validate()?;
    if policy.method != Method::Fixed && !(policy.m_min..=policy.m_max).contains(&m0) {
        return Err(Error::InvalidParameter {
            name: "M0",
            reason: "outside [m_min, m_max]",
        });
    }
    let driver = Driver::new(
        model,
        observations,
        policy.k,
        policy.window,
        m0,
        policy.track_b,
        policy.method,
    )?;
    Ok(driver.run(rng, |_t, m, block| match block {
        Some(rec) => {
            let d = assess_block(rec, policy)?;
            Ok((Some(d), update_m(m, &d, policy)))
        }
        None => Ok((None, m)),
    }))
}

/// Bootstrap filter whose particle count at step `t` is `schedule(t)`.
///
/// Statistics and block records are collected exactly as in
/// [`run_adaptive_filter`], without decisions. A fixed-`M` run is
/// `|_| m`; a two-phase run switches from `M_1` to `M_2` at `T/2`.
pub fn run_scheduled_filter<M, R, F>(
    model: &M,
    observations: &[f64],
    k: u32,
    window: usize,
    mut schedule: F,
    track_b: bool,
    rng: &mut R,
) -> Result<RunResult<M::State>>
where
    M: StateSpaceModel,
    R: Rng + ?Sized,
    F: FnMut(usize) -> usize,
{
    if k == 0 {
        return Err(Error::InvalidCount {
            what: "K",
            value: 0,
        });
    }
    if window == 0 {
        return Err(Error::InvalidCount {
            what: "window",
            value: 0,
        });
    }
    let m1 = schedule(1);
    let driver = Driver::new(model, observations, k, window, m1, track_b, Method::Fixed)?;
    Ok(driver.run(rng, |t, _m, _block| {
        let next = schedule(t + 1);
        if next == 0 {
            return Err(Error::InvalidCount {
                what: "scheduled particle count",
                value: 0,
            });
        }
        Ok((None, next))
    }))
}

struct Driver<'a, M> {
    model: &'a M,
    observations: &'a [f64],
    k: u32,
    window: usize,
    m0: usize,
    track_b: bool,
    method: Method,
}

impl<'a, M: StateSpaceModel> Driver<'a, M> {
    fn new(
        model: &'a M,
        observations: &'a [f64],
        k: u32,
        window: usize,
        m0: usize,
        track_b: bool,
        method: Method,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::TooShort { len: 0, needed: 1 });
        }
        if m0 == 0 {
            return Err(Error::InvalidCount {
                what: "initial particle count",
                value: 0,
            });
        }
        Ok(Self {
            model,
            observations,
            k,
            window,
            m0,
            track_b: track_b || method == Method::UniformityB,
            method,
        })
    }

    /// `next_m(t, m, completed_block)` returns the decision (if any) and the
    /// particle count for step `t + 1`.
    fn run<R, F>(self, rng: &mut R, mut next_m: F) -> RunResult<M::State>
    where
        R: Rng + ?Sized,
        F: FnMut(usize, usize, Option<&WindowRecord>) -> Result<(Option<AdaptDecision>, usize)>,
    {
        let mut trace = RunTrace {
            steps: Vec::with_capacity(self.observations.len()),
            blocks: Vec::new(),
            seed: None,
        };
        macro_rules! bail {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(error) => return Err(RunFailure { error, trace }),
                }
            };
        }

        let mut m = self.m0;
        let mut ps = bail!(initialize(self.model, m, rng));
        let mut track_b = self.track_b;
        let mut a_buf: Vec<u32> = Vec::with_capacity(self.window);
        let mut b_buf: Vec<f64> = Vec::with_capacity(self.window);
        let mut block_start = 1;

        for &y in self.observations {
            let weighted = bail!(propagate_and_weight(self.model, ps, y, rng));
            let t = weighted.t();
            let (a, b) = {
                let pm = weighted.predictive_mixture(self.model);
                let fict = bail!(sample_fictitious(&pm, self.k as usize, rng));
                let a = a_statistic(y, &fict);
                let b = if track_b {
                    match b_statistic(&pm, y) {
                        Ok(b) => Some(b),
                        Err(Error::UnsupportedModel) if self.method != Method::UniformityB => {
                            track_b = false;
                            None
                        }
                        Err(e) => bail!(Err(e)),
                    }
                } else {
                    None
                };
                trace.steps.push(StepRecord {
                    t,
                    particles: m,
                    estimate: weighted.posterior_mean(),
                    predicted_obs: pm.mean(),
                    a,
                    b,
                });
                (a, b)
            };
            a_buf.push(a);
            if let Some(b) = b {
                b_buf.push(b);
            }

            let next = if a_buf.len() == self.window {
                let rec = WindowRecord {
                    n: trace.blocks.len(),
                    t_start: block_start,
                    window: self.window,
                    particles: m,
                    p_value: chi2_uniformity_pvalue(&a_buf, self.k).ok(),
                    corr: lag_correlation_ranks(&a_buf, 1).ok(),
                    a_values: core::mem::take(&mut a_buf),
                    b_values: core::mem::take(&mut b_buf),
                };
                let (decision, next) = bail!(next_m(t, m, Some(&rec)));
                trace.blocks.push(BlockRecord {
                    window: rec,
                    decision,
                });
                block_start = t + 1;
                next
            } else {
                bail!(next_m(t, m, None)).1
            };
            m = next;
            ps = bail!(resample(&weighted, m, rng));
        }
        Ok(trace)
    }
}

/// Particle count for a two-phase run: `m1` for `t <= switch`, `m2` after.
pub fn two_phase(m1: usize, m2: usize, switch: usize) -> impl Fn(usize) -> usize + Copy {
    move |t| if t <= switch { m1 } else { m2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthModel, GrowthParams, Lgss, LgssParams};
    use crate::simulate::simulate_data;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn record(a_values: Vec<u32>) -> WindowRecord {
        WindowRecord {
            n: 0,
            t_start: 1,
            window: a_values.len(),
            particles: 100,
            a_values,
            b_values: Vec::new(),
            p_value: None,
            corr: None,
        }
    }

    #[test]
    fn p_value_rule() {
        let pol = AdaptPolicy::default();
        assert_eq!(
            AdaptDecision::from_p_value(0.05, &pol).action,
            Action::Increase
        );
        assert_eq!(
            AdaptDecision::from_p_value(0.7, &pol).action,
            Action::Decrease
        );
        assert_eq!(AdaptDecision::from_p_value(0.4, &pol).action, Action::Keep);
    }

    #[test]
    fn assess_uniformity_a() {
        let pol = AdaptPolicy {
            window: 16,
            ..Default::default()
        };
        let d = assess_block(&record((0..16).map(|i| i % 8).collect()), &pol).unwrap();
        assert_eq!(
            d,
            AdaptDecision {
                action: Action::Decrease,
                evidence: Evidence::PValue(1.0)
            }
        );
        let d = assess_block(&record(alloc::vec![7; 16]), &pol).unwrap();
        assert_eq!(d.action, Action::Increase);
    }

    #[test]
    fn assess_correlation_and_fixed() {
        let pol = AdaptPolicy {
            method: Method::CorrelationA,
            ..Default::default()
        };
        let alternating: Vec<u32> = (0..50).map(|i| (i % 2) * 7).collect();
        let d = assess_block(&record(alternating), &pol).unwrap();
        assert_eq!(d.action, Action::Increase);
        let d = assess_block(&record(alloc::vec![3; 50]), &pol).unwrap();
        assert_eq!(
            d,
            AdaptDecision {
                action: Action::Keep,
                evidence: Evidence::DegenerateVariance
            }
        );
        let pol = AdaptPolicy {
            method: Method::Fixed,
            ..Default::default()
        };
        assert_eq!(
            assess_block(&record(alloc::vec![3; 50]), &pol)
                .unwrap()
                .action,
            Action::Keep
        );
    }

    #[test]
    fn assess_uniformity_b() {
        let pol = AdaptPolicy {
            method: Method::UniformityB,
            ..Default::default()
        };
        let mut rec = record(alloc::vec![0; 40]);
        rec.b_values = (0..40).map(|i| (i as f64 + 0.5) / 40.0).collect();
        assert_eq!(assess_block(&rec, &pol).unwrap().action, Action::Decrease);
        rec.b_values = alloc::vec![0.99; 40];
        assert_eq!(assess_block(&rec, &pol).unwrap().action, Action::Increase);
    }

    #[test]
    fn update_rule_examples() {
        let pol = AdaptPolicy {
            m_max: 10_000,
            ..Default::default()
        };
        let inc = AdaptDecision {
            action: Action::Increase,
            evidence: Evidence::None,
        };
        let dec = AdaptDecision {
            action: Action::Decrease,
            evidence: Evidence::None,
        };
        let keep = AdaptDecision {
            action: Action::Keep,
            evidence: Evidence::None,
        };
        assert_eq!(update_m(100, &inc, &pol), 200);
        assert_eq!(update_m(10_000, &inc, &pol), 10_000);
        assert_eq!(update_m(24, &dec, &pol), 16);
        assert_eq!(update_m(77, &keep, &pol), 77);
    }

    #[test]
    fn policy_validation() {
        assert!(AdaptPolicy::default().validate().is_ok());
        assert!(AdaptPolicy {
            p_low: 0.7,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdaptPolicy {
            scale: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdaptPolicy {
            m_min: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdaptPolicy {
            k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(
            "correlation-a".parse::<Method>().unwrap(),
            Method::CorrelationA
        );
        assert!("bogus".parse::<Method>().is_err());
    }

    fn growth_data(t: usize, seed: u64) -> (GrowthModel, Vec<f64>) {
        let m = GrowthModel::new(GrowthParams::MODEL_1).unwrap();
        let (_, y) = simulate_data(&m, t, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        (m, y)
    }

    #[test]
    fn fixed_policy_keeps_m() {
        let (m, y) = growth_data(300, 1);
        let pol = AdaptPolicy {
            method: Method::Fixed,
            window: 50,
            ..Default::default()
        };
        let trace = run_adaptive_filter(&m, &y, &pol, 256, &mut ChaCha8Rng::seed_from_u64(2))
            .unwrap()
            .unwrap();
        assert_eq!(trace.steps.len(), 300);
        assert_eq!(trace.blocks.len(), 6);
        assert!(trace.steps.iter().all(|s| s.particles == 256));
        assert!(trace
            .blocks
            .iter()
            .all(|b| b.window.particles == 256 && b.window.a_values.len() == 50));
        assert!(trace.steps.iter().all(|s| s.a <= 7 && s.b.is_some()));
    }

    #[test]
    fn adaptive_changes_only_at_block_ends() {
        let (m, y) = growth_data(1000, 3);
        let pol = AdaptPolicy {
            window: 20,
            ..Default::default()
        };
        let trace = run_adaptive_filter(&m, &y, &pol, 16, &mut ChaCha8Rng::seed_from_u64(4))
            .unwrap()
            .unwrap();
        for pair in trace.steps.windows(2) {
            if pair[0].particles != pair[1].particles {
                assert_eq!(pair[0].t % 20, 0, "change after t = {}", pair[0].t);
            }
        }
        for (n, b) in trace.blocks.iter().enumerate() {
            assert_eq!(b.window.n, n);
            assert_eq!(b.window.t_start, 20 * n + 1);
            assert!((pol.m_min..=pol.m_max).contains(&b.window.particles));
            let d = b.decision.unwrap();
            let next = trace.blocks.get(n + 1).map(|nb| nb.window.particles);
            if let Some(next) = next {
                assert_eq!(next, update_m(b.window.particles, &d, &pol));
            }
        }
        // Sixteen particles are far too few for this model; the controller grows the set.
        assert!(trace.blocks.last().unwrap().window.particles > 16);
    }

    #[test]
    fn runs_are_deterministic() {
        let (m, y) = growth_data(400, 5);
        let pol = AdaptPolicy {
            window: 25,
            ..Default::default()
        };
        let go = |seed| {
            run_adaptive_filter(&m, &y, &pol, 64, &mut ChaCha8Rng::seed_from_u64(seed))
                .unwrap()
                .unwrap()
        };
        assert_eq!(go(9), go(9));
    }

    #[test]
    fn two_phase_schedule() {
        let m = Lgss::new(LgssParams::default()).unwrap();
        let (_, y) = simulate_data(&m, 100, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let trace = run_scheduled_filter(
            &m,
            &y,
            7,
            10,
            two_phase(30, 90, 50),
            false,
            &mut ChaCha8Rng::seed_from_u64(7),
        )
        .unwrap()
        .unwrap();
        assert!(trace
            .steps
            .iter()
            .all(|s| s.particles == if s.t <= 50 { 30 } else { 90 }));
        assert!(trace.steps.iter().all(|s| s.b.is_none()));
        assert_eq!(trace.blocks.len(), 10);
        assert!(trace.blocks.iter().all(|b| b.decision.is_none()));
    }

    #[test]
    fn divergence_returns_partial_trace() {
        let m = GrowthModel::new(GrowthParams::MODEL_2).unwrap();
        let y = [1.0, 2.0, f64::NAN, 3.0];
        let res =
            run_scheduled_filter(&m, &y, 3, 2, |_| 8, true, &mut ChaCha8Rng::seed_from_u64(8))
                .unwrap();
        let fail = res.unwrap_err();
        assert_eq!(fail.error, Error::DegenerateWeights { t: 3 });
        assert_eq!(fail.trace.steps.len(), 2);
        assert_eq!(fail.trace.blocks.len(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (m, y) = growth_data(10, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_adaptive_filter(&m, &[], &AdaptPolicy::default(), 16, &mut rng).is_err());
        assert!(run_adaptive_filter(&m, &y, &AdaptPolicy::default(), 8, &mut rng).is_err());
        assert!(run_scheduled_filter(&m, &y, 7, 5, |_| 0, true, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn low_p_never_yields_fewer_particles_than_high_p(
            m in 16usize..=65536, p_lo in 0.0f64..0.2, p_hi in 0.6001f64..1.0, scale in 1.1f64..4.0,
        ) {
            let pol = AdaptPolicy { scale, ..Default::default() };
            let up = update_m(m, &AdaptDecision::from_p_value(p_lo, &pol), &pol);
            let down = update_m(m, &AdaptDecision::from_p_value(p_hi, &pol), &pol);
            prop_assert!(up >= down);
            prop_assert!(up >= m && down <= m);
            prop_assert!((pol.m_min..=pol.m_max).contains(&up));
            prop_assert!((pol.m_min..=pol.m_max).contains(&down));
        }
    }
}
