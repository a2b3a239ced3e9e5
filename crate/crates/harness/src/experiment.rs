//! Grid expansion, replicated runs and aggregation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use blockpf::adapt::{run_adaptive_filter, run_scheduled_filter, two_phase, RunTrace};
use blockpf::diagnostics::lag_correlation_ranks;
use blockpf::oracle::{kalman_filter, last_quarter_mean};
use blockpf::simulate::simulate_data;
use blockpf::{GrowthModel, Lgss, LgssParams, Lorenz63, StateSpaceModel, StateVector};

use crate::config::{ExperimentConfig, Metric, Mode, ModelConfig};
use crate::seeds::replicate_seed;
use crate::HarnessError;

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Fixed {
        m: usize,
        k: u32,
        w: usize,
    },
    Adaptive {
        m0: usize,
        k: u32,
        w: usize,
    },
    /// Three filters on shared data: `M1` throughout, `M2` throughout, and
    /// `M1` then `M2` after `T/2`.
    TwoPhase {
        m1: usize,
        m2: usize,
        k: u32,
        w: usize,
    },
}

impl Cell {
    /// Row labels (`M` column) for the variants evaluated in this cell.
    pub fn variants(&self) -> Vec<String> {
        match *self {
            Cell::Fixed { m, .. } => vec![m.to_string()],
            Cell::Adaptive { m0, .. } => vec![format!("M0={m0}")],
            Cell::TwoPhase { m1, m2, .. } => {
                vec![m1.to_string(), m2.to_string(), format!("{m1}:{m2}")]
            }
        }
    }

    pub fn k(&self) -> u32 {
        match *self {
            Cell::Fixed { k, .. } | Cell::Adaptive { k, .. } | Cell::TwoPhase { k, .. } => k,
        }
    }

    pub fn w(&self) -> usize {
        match *self {
            Cell::Fixed { w, .. } | Cell::Adaptive { w, .. } | Cell::TwoPhase { w, .. } => w,
        }
    }
}

/// Cells in output order.
pub fn grid(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    match cfg.mode {
        Mode::Fixed => {
            for &m in &cfg.m_list {
                for &k in &cfg.k_list {
                    for &w in &cfg.w_list {
                        cells.push(Cell::Fixed { m, k, w });
                    }
                }
            }
        }
        Mode::Adaptive => {
            for &m0 in &cfg.m0_list {
                for &k in &cfg.k_list {
                    for &w in &cfg.w_list {
                        cells.push(Cell::Adaptive { m0, k, w });
                    }
                }
            }
        }
        Mode::TwoPhase => {
            for &(m1, m2) in &cfg.pairs {
                cells.push(Cell::TwoPhase {
                    m1,
                    m2,
                    k: cfg.k_list[0],
                    w: cfg.w_list[0],
                });
            }
        }
    }
    cells
}

/// Values of one replicate: `values[variant][metric]`, or `None` if the
/// filter diverged.
pub type Replicate = Option<Vec<Vec<f64>>>;

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub seeds: Vec<u64>,
    pub replicates: Vec<Replicate>,
}

/// Runs every replicate of every cell. Replicates execute in parallel; the
/// result order is fixed by cell and replicate index.
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<Vec<CellResult>, HarnessError> {
    cfg.validate()?;
    // Fail fast on model parameters before spawning work.
    match cfg.model {
        ModelConfig::Lgss(p) => drop(Lgss::new(p)?),
        ModelConfig::Growth(p) => drop(GrowthModel::new(p)?),
        ModelConfig::Lorenz63(p) => drop(Lorenz63::new(p)?),
    }
    let cells = grid(cfg);
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.runs).map(move |r| (c, r)))
        .collect();
    let outputs: Vec<Replicate> = jobs
        .par_iter()
        .map(|&(c, r)| run_one(cfg, &cells[c], replicate_seed(cfg.seed, c, r)))
        .collect();
    let mut outputs = outputs.into_iter();
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(c, cell)| CellResult {
            cell,
            seeds: (0..cfg.runs)
                .map(|r| replicate_seed(cfg.seed, c, r))
                .collect(),
            replicates: outputs.by_ref().take(cfg.runs).collect(),
        })
        .collect())
}

fn run_one(cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> Replicate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.model {
        ModelConfig::Lgss(p) => replicate(&Lgss::new(p).ok()?, Some(&p), cfg, cell, &mut rng),
        ModelConfig::Growth(p) => replicate(&GrowthModel::new(p).ok()?, None, cfg, cell, &mut rng),
        ModelConfig::Lorenz63(p) => replicate(&Lorenz63::new(p).ok()?, None, cfg, cell, &mut rng),
    }
}

fn replicate<M: StateSpaceModel>(
    model: &M,
    lgss: Option<&LgssParams>,
    cfg: &ExperimentConfig,
    cell: &Cell,
    rng: &mut ChaCha8Rng,
) -> Replicate {
    let (states, y) = simulate_data(model, cfg.steps, rng).ok()?;
    let track_b = cfg.metrics.contains(&Metric::AbGap);
    match *cell {
        Cell::Fixed { m, k, w } => {
            let trace = run_scheduled_filter(model, &y, k, w, |_| m, track_b, rng)
                .ok()?
                .ok()?;
            Some(vec![trace_metrics(cfg, &trace, &states, &y, lgss, k)])
        }
        Cell::Adaptive { m0, k, w } => {
            let mut policy = cfg.policy.clone();
            policy.k = k;
            policy.window = w;
            policy.track_b = policy.track_b && track_b;
            let trace = run_adaptive_filter(model, &y, &policy, m0, rng)
                .ok()?
                .ok()?;
            Some(vec![trace_metrics(cfg, &trace, &states, &y, lgss, k)])
        }
        Cell::TwoPhase { m1, m2, k, w } => {
            let reference: Vec<f64> = match lgss {
                Some(p) => kalman_filter(p, &y)
                    .iter()
                    .map(|s| s.pred_obs_mean)
                    .collect(),
                None => {
                    let r = cfg.reference_m;
                    predicted_obs(
                        &run_scheduled_filter(model, &y, k, w, |_| r, false, rng)
                            .ok()?
                            .ok()?,
                    )
                }
            };
            let switch = cfg.steps / 2;
            let mut out = Vec::with_capacity(3);
            for schedule in [
                two_phase(m1, m1, switch),
                two_phase(m2, m2, switch),
                two_phase(m1, m2, switch),
            ] {
                let trace = run_scheduled_filter(model, &y, k, w, schedule, false, rng)
                    .ok()?
                    .ok()?;
                let sq: Vec<f64> = predicted_obs(&trace)
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b) * (a - b))
                    .collect();
                let mse = last_quarter_mean(&sq);
                out.push(cfg.metrics.iter().map(|_| mse).collect());
            }
            Some(out)
        }
    }
}

fn predicted_obs<S>(trace: &RunTrace<S>) -> Vec<f64> {
    trace.steps.iter().map(|s| s.predicted_obs).collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn trace_metrics<S: StateVector>(
    cfg: &ExperimentConfig,
    trace: &RunTrace<S>,
    states: &[S],
    y: &[f64],
    lgss: Option<&LgssParams>,
    k: u32,
) -> Vec<f64> {
    cfg.metrics
        .iter()
        .map(|metric| match metric {
            Metric::PValue => trace.mean_p_value().unwrap_or(f64::NAN),
            Metric::AbsR1 => lag_correlation_ranks(&trace.a_values(), 1)
                .map(f64::abs)
                .unwrap_or(f64::NAN),
            Metric::AbGap => mean(
                trace
                    .steps
                    .iter()
                    .filter_map(|s| s.b.map(|b| (b - f64::from(s.a) / f64::from(k)).abs())),
            ),
            Metric::MseState => mean(trace.steps.iter().zip(states).map(|(s, x)| {
                let d = s.estimate.component(0) - x.component(0);
                d * d
            })),
            Metric::MseKalman => match lgss {
                Some(p) => mean(trace.steps.iter().zip(kalman_filter(p, y)).map(|(s, ks)| {
                    let d = s.estimate.component(0) - ks.mean;
                    d * d
                })),
                None => f64::NAN,
            },
            Metric::MeanMLast => trace
                .mean_particles_last_blocks(cfg.last_windows)
                .unwrap_or(f64::NAN),
            Metric::MeanM => mean(trace.steps.iter().map(|s| s.particles as f64)),
            Metric::MsePred => f64::NAN,
        })
        .collect()
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub model: String,
    pub m: String,
    pub k: u32,
    pub w: usize,
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
    /// Replicates contributing a finite value.
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    /// First row matching `m` label and metric name.
    pub fn get(&self, m: &str, metric: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.m == m && r.metric == metric)
    }

    pub fn get_cell(&self, m: &str, k: u32, w: usize, metric: &str) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.m == m && r.k == k && r.w == w && r.metric == metric)
    }
}

/// Mean and standard error of the finite entries.
pub fn mean_stderr(values: &[f64]) -> (f64, f64, usize) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = finite.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let m = finite.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0, 1);
    }
    let var = finite.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt(), n)
}

/// Aggregates replicate values into rows: for every cell and variant, one
/// row per metric, then a `diverged` row counting failed replicates.
pub fn aggregate(cfg: &ExperimentConfig, results: &[CellResult]) -> Table {
    let mut rows = Vec::new();
    for res in results {
        let diverged = res.replicates.iter().filter(|r| r.is_none()).count();
        for (vi, label) in res.cell.variants().into_iter().enumerate() {
            let row = |metric: &str, (value, stderr, runs): (f64, f64, usize)| Row {
                model: cfg.model_kind.name().to_string(),
                m: label.clone(),
                k: res.cell.k(),
                w: res.cell.w(),
                metric: metric.to_string(),
                value,
                stderr,
                runs,
                seed: cfg.seed,
            };
            for (mi, metric) in cfg.metrics.iter().enumerate() {
                let vals: Vec<f64> = res.replicates.iter().flatten().map(|v| v[vi][mi]).collect();
                rows.push(row(metric.name(), mean_stderr(&vals)));
            }
            rows.push(row(
                "diverged",
                (diverged as f64, 0.0, res.replicates.len()),
            ));
        }
    }
    Table { rows }
}

/// Runs the whole grid and aggregates it.
pub fn run_table(cfg: &ExperimentConfig) -> Result<Table, HarnessError> {
    Ok(aggregate(cfg, &run_replicates(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn grid_sizes() {
        let c = cfg("model = growth1\nmode = fixed\nT = 10\nM = 2, 4, 8\nK = 3, 7\nW = 5, 10\n");
        assert_eq!(grid(&c).len(), 12);
        let c = cfg("model = lgss\nmode = two-phase\nT = 10\npairs = 10:20, 20:40\n");
        assert_eq!(grid(&c).len(), 2);
    }

    #[test]
    fn row_count_matches_grid() {
        let c = cfg("model = growth1\nmode = fixed\nT = 30\nruns = 3\nM = 4, 8\nK = 3\nW = 10\nmetrics = p_value, ab_gap\n");
        let t = run_table(&c).unwrap();
        assert_eq!(t.rows.len(), 2 * 3);
        assert!(t.rows.iter().all(|r| r.runs <= 3));
        let c = cfg("model = lgss\nmode = two-phase\nT = 40\nruns = 2\npairs = 10:40\n");
        let t = run_table(&c).unwrap();
        assert_eq!(t.rows.len(), 3 * 2);
        assert!(t.get("10:40", "mse_pred").unwrap().value.is_finite());
    }

    #[test]
    fn aggregation_matches_independent_recomputation() {
        let c = cfg("model = lgss\nmode = fixed\nT = 60\nruns = 6\nM = 16, 64\nK = 5\nW = 20\nmetrics = p_value, mse_kalman, mse_state, ab_gap\n");
        let results = run_replicates(&c).unwrap();
        let table = aggregate(&c, &results);
        for (ci, res) in results.iter().enumerate() {
            for (mi, metric) in c.metrics.iter().enumerate() {
                let vals: Vec<f64> = res
                    .replicates
                    .iter()
                    .map(|r| r.as_ref().unwrap()[0][mi])
                    .collect();
                let naive = vals.iter().sum::<f64>() / vals.len() as f64;
                let row = &table.rows[ci * (c.metrics.len() + 1) + mi];
                assert_eq!(row.metric, metric.name());
                assert!((row.value - naive).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_stderr_skips_non_finite() {
        let (m, se, n) = mean_stderr(&[1.0, f64::NAN, 3.0]);
        assert_eq!((m, n), (2.0, 2));
        assert!((se - 1.0).abs() < 1e-12);
        assert!(mean_stderr(&[]).0.is_nan());
    }
}
