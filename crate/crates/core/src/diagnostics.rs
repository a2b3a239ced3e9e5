//! Predictive statistics and the tests run on them at block boundaries.
//!
//! `A` is the rank of the actual observation among `K` fictitious ones,
//! uniform on `{0, ..., K}` when the predictive mixture is exact. `B` is the
//! mixture CDF at the actual observation, uniform on `(0, 1)` under the same
//! condition, and the limit of `A / K` as `K` grows.

use alloc::vec::Vec;

use crate::filter::PredictiveMixture;
use crate::math::chi2_sf;
use crate::model::StateSpaceModel;
use crate::{Error, Result};

/// Statistics collected over one block of `W_n` steps run with `M_n` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    /// Block index, from 0.
    pub n: usize,
    /// Time index of the first step in the block.
    pub t_start: usize,
    pub window: usize,
    pub particles: usize,
    pub a_values: Vec<u32>,
    /// Empty when the model has no closed-form observation CDF.
    pub b_values: Vec<f64>,
    pub p_value: Option<f64>,
    pub corr: Option<f64>,
}

/// Number of fictitious observations strictly below `y`.
///
/// Ties count as not-smaller; they have probability zero for continuous
/// observation models.
pub fn a_statistic(y: f64, fictitious: &[f64]) -> u32 {
    fictitious.iter().filter(|v| **v < y).count() as u32
}

/// `B = (1/M) sum_m P(Y <= y | xbar^(m))`, the predictive mixture CDF at `y`.
pub fn b_statistic<M: StateSpaceModel>(pm: &PredictiveMixture<'_, M>, y: f64) -> Result<f64> {
    pm.cdf(y)
}

fn check_ranks(values: &[u32], k: u32) -> Result<()> {
    match values.iter().find(|v| **v > k) {
        Some(v) => Err(Error::OutOfDomain {
            value: u64::from(*v),
            k,
        }),
        None => Ok(()),
    }
}

fn bin_counts(values: &[u32], k: u32) -> Result<Vec<u64>> {
    check_ranks(values, k)?;
    let mut counts = alloc::vec![0u64; k as usize + 1];
    for v in values {
        counts[*v as usize] += 1;
    }
    Ok(counts)
}

/// Pearson's chi-squared statistic for equal expected counts.
pub fn chi2_uniform_statistic(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|c| {
            let d = *c as f64 - expected;
            d * d
        })
        .sum::<f64>()
        / expected
}

/// p-value of Pearson's chi-squared test that `a_values` are uniform on
/// `{0, ..., k}` (`k` degrees of freedom).
///
/// No minimum expected-count rule is applied; short windows (e.g. `W = 15`,
/// `K = 7`) rely on the asymptotic approximation.
pub fn chi2_uniformity_pvalue(a_values: &[u32], k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidCount {
            what: "K",
            value: 0,
        });
    }
    if a_values.is_empty() {
        return Err(Error::TooShort { len: 0, needed: 1 });
    }
    let counts = bin_counts(a_values, k)?;
    Ok(chi2_sf(chi2_uniform_statistic(&counts), f64::from(k)))
}

/// Same test on values in `[0, 1]`, binned into `bins` equal-width cells.
pub fn chi2_uniformity_pvalue_continuous(b_values: &[f64], bins: u32) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidCount {
            what: "bin count",
            value: bins as usize,
        });
    }
    if b_values.is_empty() {
        return Err(Error::TooShort { len: 0, needed: 1 });
    }
    let mut counts = alloc::vec![0u64; bins as usize];
    for b in b_values {
        if !(0.0..=1.0).contains(b) {
            return Err(Error::InvalidParameter {
                name: "b_values",
                reason: "must lie in [0, 1]",
            });
        }
        let i = ((b * f64::from(bins)) as usize).min(bins as usize - 1);
        counts[i] += 1;
    }
    Ok(chi2_sf(
        chi2_uniform_statistic(&counts),
        f64::from(bins - 1),
    ))
}

/// Sample Pearson correlation between `v[..n-lag]` and `v[lag..]`.
///
/// Returns [`Error::DegenerateVariance`] when either slice is constant.
pub fn lag_correlation(values: &[f64], lag: usize) -> Result<f64> {
    if lag == 0 {
        return Err(Error::InvalidCount {
            what: "lag",
            value: 0,
        });
    }
    if values.len() <= lag + 1 {
        return Err(Error::TooShort {
            len: values.len(),
            needed: lag + 2,
        });
    }
    let a = &values[..values.len() - lag];
    let b = &values[lag..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// [`lag_correlation`] on rank statistics.
pub fn lag_correlation_ranks(values: &[u32], lag: usize) -> Result<f64> {
    let v: Vec<f64> = values.iter().map(|a| f64::from(*a)).collect();
    lag_correlation(&v, lag)
}

/// Relative frequencies of each rank in `{0, ..., k}`.
pub fn empirical_pmf(a_values: &[u32], k: u32) -> Result<Vec<f64>> {
    if a_values.is_empty() {
        return Err(Error::TooShort { len: 0, needed: 1 });
    }
    let counts = bin_counts(a_values, k)?;
    let n = a_values.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Sample moments `m_j = mean(b^j)` for `j = 1..=n_max`.
///
/// For exact predictive CDF values these approach `1/(j+1)`.
pub fn moment_check(b_values: &[f64], n_max: usize) -> Vec<f64> {
    let n = b_values.len() as f64;
    let mut sums = alloc::vec![0.0; n_max];
    for b in b_values {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= b;
            *s += p;
        }
    }
    sums.into_iter().map(|s| s / n).collect()
}
