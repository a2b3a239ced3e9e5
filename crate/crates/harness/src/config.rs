//! Experiment configuration: a flat `key = value` text file.
//!
//! Blank lines and lines starting with `#` are ignored. List-valued keys take
//! comma-separated values. Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `name`, `description` | labels |
//! | `model` | `lgss`, `growth1`, `growth2` or `lorenz63` |
//! | `mode` | `fixed`, `adaptive` or `two-phase` |
//! | `T`, `runs`, `seed` | series length, replicates per cell, base seed |
//! | `K`, `W` | lists of fictitious-observation counts and window lengths |
//! | `M` | particle counts (`fixed`) |
//! | `M0` | initial particle counts (`adaptive`) |
//! | `pairs` | `M1:M2` pairs (`two-phase`; switch at `T/2`) |
//! | `method`, `p_low`, `p_high`, `r_low`, `r_high`, `M_min`, `M_max`, `scale`, `last_windows` | adaptive policy |
//! | `reference_M` | particle count of the surrogate reference filter (`two-phase`, non-linear models) |
//! | `metrics` | metrics to report; defaults depend on the mode |
//! | `output` | CSV path |
//! | `a`, `sigma_u`, `sigma_v`, `prior_mean`, `prior_std`, `phi`, `lorenz_sigma`, `rho`, `beta`, `delta`, `t_obs`, `sigma2_obs`, `sigma2_state` | model overrides |

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use blockpf::adapt::{AdaptPolicy, Method};
use blockpf::{GrowthParams, LgssParams, Lorenz63Params};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lgss,
    Growth1,
    Growth2,
    Lorenz63,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Lgss => "lgss",
            ModelKind::Growth1 => "growth1",
            ModelKind::Growth2 => "growth2",
            ModelKind::Lorenz63 => "lorenz63",
        }
    }
}

impl FromStr for ModelKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "lgss" => Ok(ModelKind::Lgss),
            "growth1" => Ok(ModelKind::Growth1),
            "growth2" => Ok(ModelKind::Growth2),
            "lorenz63" => Ok(ModelKind::Lorenz63),
            other => Err(ConfigError::invalid(
                "model",
                other,
                "expected lgss, growth1, growth2 or lorenz63",
            )),
        }
    }
}

/// Fully resolved model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelConfig {
    Lgss(LgssParams),
    Growth(GrowthParams),
    Lorenz63(Lorenz63Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fixed,
    Adaptive,
    TwoPhase,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Fixed => "fixed",
            Mode::Adaptive => "adaptive",
            Mode::TwoPhase => "two-phase",
        }
    }

    pub fn default_metrics(&self) -> Vec<Metric> {
        match self {
            Mode::Fixed => vec![Metric::PValue, Metric::AbsR1, Metric::MseState],
            Mode::Adaptive => vec![Metric::MeanMLast, Metric::MeanM, Metric::PValue],
            Mode::TwoPhase => vec![Metric::MsePred],
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "fixed" => Ok(Mode::Fixed),
            "adaptive" => Ok(Mode::Adaptive),
            "two-phase" => Ok(Mode::TwoPhase),
            other => Err(ConfigError::invalid(
                "mode",
                other,
                "expected fixed, adaptive or two-phase",
            )),
        }
    }
}

/// Per-replicate quantities that can be aggregated into the CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Mean chi-squared p-value of the rank statistic over complete windows.
    PValue,
    /// `|r|`, lag-1 correlation of the whole rank sequence.
    AbsR1,
    /// Mean `|B - A/K|` over steps.
    AbGap,
    /// Mean squared error of the posterior mean (first coordinate) against the hidden state.
    MseState,
    /// Mean squared error of the posterior mean against the Kalman mean (LGSS only).
    MseKalman,
    /// Mean particle count over the last `last_windows` windows.
    MeanMLast,
    /// Mean particle count over all steps.
    MeanM,
    /// Last-quarter squared error of the predicted observation against the exact
    /// (LGSS) or reference-filter prediction.
    MsePred,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::PValue,
        Metric::AbsR1,
        Metric::AbGap,
        Metric::MseState,
        Metric::MseKalman,
        Metric::MeanMLast,
        Metric::MeanM,
        Metric::MsePred,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::PValue => "p_value",
            Metric::AbsR1 => "abs_r1",
            Metric::AbGap => "ab_gap",
            Metric::MseState => "mse_state",
            Metric::MseKalman => "mse_kalman",
            Metric::MeanMLast => "mean_m_last",
            Metric::MeanM => "mean_m",
            Metric::MsePred => "mse_pred",
        }
    }

    fn allowed_in(&self, mode: Mode) -> bool {
        match self {
            Metric::MsePred => mode == Mode::TwoPhase,
            Metric::MeanMLast | Metric::MeanM => mode == Mode::Adaptive,
            _ => mode != Mode::TwoPhase,
        }
    }
}

impl FromStr for Metric {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError::invalid("metrics", s, "unknown metric"))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub description: String,
    pub model_kind: ModelKind,
    pub model: ModelConfig,
    pub mode: Mode,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub k_list: Vec<u32>,
    pub w_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub m0_list: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    /// Adaptive policy template; `k` and `window` are overridden per cell.
    pub policy: AdaptPolicy,
    pub last_windows: usize,
    pub reference_m: usize,
    pub metrics: Vec<Metric>,
    pub output: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "description",
    "model",
    "mode",
    "T",
    "runs",
    "seed",
    "K",
    "W",
    "M",
    "M0",
    "pairs",
    "method",
    "p_low",
    "p_high",
    "r_low",
    "r_high",
    "M_min",
    "M_max",
    "scale",
    "last_windows",
    "reference_M",
    "metrics",
    "output",
    "a",
    "sigma_u",
    "sigma_v",
    "prior_mean",
    "prior_std",
    "phi",
    "lorenz_sigma",
    "rho",
    "beta",
    "delta",
    "t_obs",
    "sigma2_obs",
    "sigma2_state",
    "track_b",
];

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            let value = value.split(" #").next().unwrap_or("").trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey(key.to_string()));
            }
        }
        Ok(Self(map))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| ConfigError::invalid(key, v, "cannot parse value"))
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, key: &'static str) -> Result<Vec<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|_| ConfigError::invalid(key, s, "cannot parse list item"))
                })
                .collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;
        let model_kind: ModelKind = e.get("model")?.ok_or(ConfigError::Missing("model"))?;
        let mode: Mode = e.get("mode")?.ok_or(ConfigError::Missing("mode"))?;
        let model = match model_kind {
            ModelKind::Lgss => {
                let d = LgssParams::default();
                ModelConfig::Lgss(LgssParams {
                    a: e.get_or("a", d.a)?,
                    sigma_u: e.get_or("sigma_u", d.sigma_u)?,
                    sigma_v: e.get_or("sigma_v", d.sigma_v)?,
                    prior_mean: e.get_or("prior_mean", d.prior_mean)?,
                    prior_std: e.get_or("prior_std", d.prior_std)?,
                })
            }
            ModelKind::Growth1 | ModelKind::Growth2 => {
                let d = if model_kind == ModelKind::Growth1 {
                    GrowthParams::MODEL_1
                } else {
                    GrowthParams::MODEL_2
                };
                ModelConfig::Growth(GrowthParams {
                    phi: e.get_or("phi", d.phi)?,
                    sigma_u: e.get_or("sigma_u", d.sigma_u)?,
                    sigma_v: e.get_or("sigma_v", d.sigma_v)?,
                })
            }
            ModelKind::Lorenz63 => {
                let d = Lorenz63Params::default();
                ModelConfig::Lorenz63(Lorenz63Params {
                    sigma: e.get_or("lorenz_sigma", d.sigma)?,
                    rho: e.get_or("rho", d.rho)?,
                    beta: e.get_or("beta", d.beta)?,
                    delta: e.get_or("delta", d.delta)?,
                    t_obs: e.get_or("t_obs", d.t_obs)?,
                    sigma2_obs: e.get_or("sigma2_obs", d.sigma2_obs)?,
                    sigma2_state: e.get_or("sigma2_state", d.sigma2_state)?,
                    prior_mean: d.prior_mean,
                    prior_std: e.get_or("prior_std", d.prior_std)?,
                })
            }
        };

        let d = AdaptPolicy::default();
        let policy = AdaptPolicy {
            k: d.k,
            window: d.window,
            p_low: e.get_or("p_low", d.p_low)?,
            p_high: e.get_or("p_high", d.p_high)?,
            r_low: e.get_or("r_low", d.r_low)?,
            r_high: e.get_or("r_high", d.r_high)?,
            m_min: e.get_or("M_min", d.m_min)?,
            m_max: e.get_or("M_max", d.m_max)?,
            scale: e.get_or("scale", d.scale)?,
            method: e
                .raw("method")
                .map(|m| {
                    m.parse::<Method>()
                        .map_err(|_| ConfigError::invalid("method", m, "unknown method"))
                })
                .transpose()?
                .unwrap_or(d.method),
            track_b: e.get_or("track_b", d.track_b)?,
        };

        let pairs = e
            .list::<String>("pairs")?
            .iter()
            .map(|p| {
                let (a, b) = p
                    .split_once(':')
                    .ok_or_else(|| ConfigError::invalid("pairs", p, "expected M1:M2"))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| ConfigError::invalid("pairs", p, "expected M1:M2"))
                };
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let mut metrics = e.list::<Metric>("metrics")?;
        if metrics.is_empty() {
            metrics = mode.default_metrics();
        }

        let cfg = Self {
            name: e.raw("name").unwrap_or("experiment").to_string(),
            description: e.raw("description").unwrap_or("").to_string(),
            model_kind,
            model,
            mode,
            steps: e.get("T")?.ok_or(ConfigError::Missing("T"))?,
            runs: e.get_or("runs", 100)?,
            seed: e.get_or("seed", 0)?,
            k_list: {
                let k = e.list("K")?;
                if k.is_empty() {
                    vec![7]
                } else {
                    k
                }
            },
            w_list: {
                let w = e.list("W")?;
                if w.is_empty() {
                    vec![50]
                } else {
                    w
                }
            },
            m_list: e.list("M")?,
            m0_list: e.list("M0")?,
            pairs,
            policy,
            last_windows: e.get_or("last_windows", 50)?,
            reference_m: e.get_or("reference_M", 1 << 17)?,
            metrics,
            output: e.raw("output").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: usize| {
            if v == 0 {
                Err(ConfigError::invalid(key, "0", "must be positive"))
            } else {
                Ok(())
            }
        };
        positive("T", self.steps)?;
        positive("runs", self.runs)?;
        positive("last_windows", self.last_windows)?;
        positive("reference_M", self.reference_m)?;
        for k in &self.k_list {
            positive("K", *k as usize)?;
        }
        for w in &self.w_list {
            positive("W", *w)?;
        }
        match self.mode {
            Mode::Fixed if self.m_list.is_empty() => return Err(ConfigError::Missing("M")),
            Mode::Adaptive if self.m0_list.is_empty() => return Err(ConfigError::Missing("M0")),
            Mode::TwoPhase if self.pairs.is_empty() => return Err(ConfigError::Missing("pairs")),
            _ => {}
        }
        for m in self.m_list.iter().chain(&self.m0_list) {
            positive("M", *m)?;
        }
        for (m1, m2) in &self.pairs {
            positive("pairs", *m1)?;
            positive("pairs", *m2)?;
        }
        if self.mode == Mode::TwoPhase && self.steps < 4 {
            return Err(ConfigError::invalid(
                "T",
                &self.steps.to_string(),
                "two-phase runs need T >= 4",
            ));
        }
        if self.mode == Mode::Adaptive {
            let mut p = self.policy.clone();
            p.k = self.k_list[0];
            p.window = self.w_list[0];
            p.validate().map_err(|e| {
                ConfigError::invalid("policy", &e.to_string(), "invalid adaptive policy")
            })?;
            for m0 in &self.m0_list {
                if !(p.m_min..=p.m_max).contains(m0) && p.method != Method::Fixed {
                    return Err(ConfigError::invalid(
                        "M0",
                        &m0.to_string(),
                        "outside [M_min, M_max]",
                    ));
                }
            }
        }
        for m in &self.metrics {
            if !m.allowed_in(self.mode) {
                return Err(ConfigError::invalid(
                    "metrics",
                    m.name(),
                    "not available in this mode",
                ));
            }
            if *m == Metric::MseKalman && self.model_kind != ModelKind::Lgss {
                return Err(ConfigError::invalid(
                    "metrics",
                    m.name(),
                    "needs model = lgss",
                ));
            }
        }
        match self.model {
            ModelConfig::Lgss(p) => p.validate(),
            ModelConfig::Growth(p) => p.validate(),
            ModelConfig::Lorenz63(p) => p.validate(),
        }
        .map_err(|e| ConfigError::invalid("model parameters", &e.to_string(), "invalid model"))
    }

    /// Canonical `key = value` rendering of the resolved configuration.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(", ");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        kv("name", self.name.clone());
        if !self.description.is_empty() {
            kv("description", self.description.clone());
        }
        kv("model", self.model_kind.name().into());
        match self.model {
            ModelConfig::Lgss(p) => {
                kv("a", p.a.to_string());
                kv("sigma_u", p.sigma_u.to_string());
                kv("sigma_v", p.sigma_v.to_string());
                kv("prior_mean", p.prior_mean.to_string());
                kv("prior_std", p.prior_std.to_string());
            }
            ModelConfig::Growth(p) => {
                kv("phi", p.phi.to_string());
                kv("sigma_u", p.sigma_u.to_string());
                kv("sigma_v", p.sigma_v.to_string());
            }
            ModelConfig::Lorenz63(p) => {
                kv("lorenz_sigma", p.sigma.to_string());
                kv("rho", p.rho.to_string());
                kv("beta", p.beta.to_string());
                kv("delta", p.delta.to_string());
                kv("t_obs", p.t_obs.to_string());
                kv("sigma2_obs", p.sigma2_obs.to_string());
                kv("sigma2_state", p.sigma2_state.to_string());
                kv("prior_std", p.prior_std.to_string());
            }
        }
        kv("mode", self.mode.name().into());
        kv("T", self.steps.to_string());
        kv("runs", self.runs.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "K",
            join(&self.k_list.iter().map(u32::to_string).collect::<Vec<_>>()),
        );
        kv(
            "W",
            join(&self.w_list.iter().map(usize::to_string).collect::<Vec<_>>()),
        );
        match self.mode {
            Mode::Fixed => kv(
                "M",
                join(&self.m_list.iter().map(usize::to_string).collect::<Vec<_>>()),
            ),
            Mode::Adaptive => {
                kv(
                    "M0",
                    join(
                        &self
                            .m0_list
                            .iter()
                            .map(usize::to_string)
                            .collect::<Vec<_>>(),
                    ),
                );
                let p = &self.policy;
                kv("method", p.method.name().into());
                kv("p_low", p.p_low.to_string());
                kv("p_high", p.p_high.to_string());
                kv("r_low", p.r_low.to_string());
                kv("r_high", p.r_high.to_string());
                kv("M_min", p.m_min.to_string());
                kv("M_max", p.m_max.to_string());
                kv("scale", p.scale.to_string());
                kv("last_windows", self.last_windows.to_string());
            }
            Mode::TwoPhase => {
                kv(
                    "pairs",
                    join(
                        &self
                            .pairs
                            .iter()
                            .map(|(a, b)| format!("{a}:{b}"))
                            .collect::<Vec<_>>(),
                    ),
                );
                if self.model_kind != ModelKind::Lgss {
                    kv("reference_M", self.reference_m.to_string());
                }
            }
        }
        kv("track_b", self.policy.track_b.to_string());
        kv(
            "metrics",
            join(
                &self
                    .metrics
                    .iter()
                    .map(|m| m.name().to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        if let Some(o) = &self.output {
            kv("output", o.display().to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
        # comment
        name = demo
        model = growth1
        mode = fixed
        T = 200
        runs = 5
        seed = 9
        K = 3, 7
        W = 15
        M = 2, 16   # trailing comment
        metrics = p_value, ab_gap
    ";

    #[test]
    fn parses_lists_and_defaults() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.k_list, vec![3, 7]);
        assert_eq!(c.m_list, vec![2, 16]);
        assert_eq!(c.metrics, vec![Metric::PValue, Metric::AbGap]);
        assert_eq!(c.model, ModelConfig::Growth(GrowthParams::MODEL_1));
        assert_eq!(c.output, None);
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        let again = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::parse(
            "model = growth1\nmode = two-phase\nT = 100\npairs = 50:1000\nsigma_v = 0.1\n",
        )
        .unwrap();
        assert_eq!(
            c.model,
            ModelConfig::Growth(GrowthParams {
                sigma_v: 0.1,
                ..GrowthParams::MODEL_1
            })
        );
        assert_eq!(c.pairs, vec![(50, 1000)]);
        assert_eq!(c.metrics, vec![Metric::MsePred]);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "model = growth1\nmode = fixed\nT = 10\n",
            "model = growth1\nmode = fixed\nT = 0\nM = 4\n",
            "model = mars\nmode = fixed\nT = 10\nM = 4\n",
            "model = growth1\nmode = fixed\nT = 10\nM = 4\nbogus = 1\n",
            "model = growth1\nmode = fixed\nT = 10\nM = 4\nM = 8\n",
            "model = growth1\nmode = fixed\nT = 10\nM = 4\nmetrics = mse_kalman\n",
            "model = growth1\nmode = fixed\nT = 10\nM = 4\nmetrics = mse_pred\n",
            "model = growth1\nmode = adaptive\nT = 10\nM0 = 4\n",
            "model = growth1\nmode = adaptive\nT = 10\nM0 = 64\np_low = 0.9\n",
            "model = lgss\nmode = two-phase\nT = 10\npairs = 100-1000\n",
            "model = lgss\nmode = fixed\nT = 10\nM = 4\nsigma_v = -1\n",
            "model = lgss\nmode = fixed\nT = 10\nM = 4\nno equals sign\n",
        ];
        for text in bad {
            assert!(ExperimentConfig::parse(text).is_err(), "accepted:\n{text}");
        }
    }
}
