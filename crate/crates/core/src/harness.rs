//! Seeded experiment sweeps over `(problem, n, seed)` cells, per-cell
//! aggregation and runtime-scaling fits.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::one_plus_one_ea;
use crate::cga::{run_cga, RunTrace, TelemetryOptions};
use crate::error::{Error, Result};
use crate::fitness::{make_well_behaved, FitnessFunction};
use crate::lab::stats::quantile_sorted;
use crate::rng::{derive_seed, rng_from_seed};

/// `K` in the population-size rule `mu = K sqrt(n) ln n`, chosen by pilot.
pub const DEFAULT_MU_FACTOR: f64 = 8.0;
pub const DEFAULT_CAP_FACTOR: f64 = 50.0;
pub const DEFAULT_EA_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Cga,
    Ea,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Onemax,
    Jump,
}

/// One problem family of a sweep. Jump takes either a fixed `k` or
/// `k = max(1, floor(k_log_factor * ln n))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_log_factor: Option<f64>,
}

impl ProblemSpec {
    pub fn onemax() -> Self {
        Self { kind: ProblemKind::Onemax, k: None, k_log_factor: None }
    }

    pub fn jump(k: usize) -> Self {
        Self { kind: ProblemKind::Jump, k: Some(k), k_log_factor: None }
    }

    fn validate(&self) -> Result<()> {
        match (self.kind, self.k, self.k_log_factor) {
            (ProblemKind::Onemax, None, None) => Ok(()),
            (ProblemKind::Onemax, _, _) => Err(Error::Config("onemax takes no k".into())),
            (ProblemKind::Jump, Some(k), None) if k >= 1 => Ok(()),
            (ProblemKind::Jump, None, Some(c)) if c > 0.0 && c.is_finite() => Ok(()),
            (ProblemKind::Jump, _, _) => {
                Err(Error::Config("jump needs exactly one of k >= 1 or k_log_factor > 0".into()))
            }
        }
    }

    pub fn instantiate(&self, n: usize) -> Result<FitnessFunction> {
        match self.kind {
            ProblemKind::Onemax => FitnessFunction::onemax(n),
            ProblemKind::Jump => {
                let k = match (self.k, self.k_log_factor) {
                    (Some(k), _) => k,
                    (None, Some(c)) => ((c * (n as f64).ln()).floor() as usize).max(1),
                    (None, None) => return Err(Error::Config("jump needs k".into())),
                };
                FitnessFunction::jump(n, k)
            }
        }
    }
}

/// Population size: `make_well_behaved(n, ceil(factor sqrt(n) ln n))`, or a
/// fixed requested value (also made well-behaved).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuRule {
    #[serde(default = "default_mu_factor")]
    pub factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<u64>,
}

fn default_mu_factor() -> f64 {
    DEFAULT_MU_FACTOR
}

impl Default for MuRule {
    fn default() -> Self {
        Self { factor: DEFAULT_MU_FACTOR, fixed: None }
    }
}

impl MuRule {
    /// `(requested, effective)` population size for dimension `n`.
    pub fn resolve(&self, n: usize) -> Result<(u64, u64)> {
        let requested = match self.fixed {
            Some(m) => m,
            None => auto_mu_request(n, self.factor),
        };
        Ok((requested, make_well_behaved(n, requested)?))
    }
}

/// `ceil(factor sqrt(n) ln n)`, at least 1.
pub fn auto_mu_request(n: usize, factor: f64) -> u64 {
    let nf = n as f64;
    ((factor * nf.sqrt() * nf.ln()).ceil() as u64).max(1)
}

pub fn auto_mu(n: usize, factor: f64) -> Result<u64> {
    make_well_behaved(n, auto_mu_request(n, factor))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub count: u64,
    #[serde(default)]
    pub base: u64,
}

/// Thresholds `D' = c' ln n` and `D'' = max(2k + 1, c'')` for the
/// first-crossing markers (`k = 1` for OneMax).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelemetryConfig {
    #[serde(default = "one")]
    pub d_prime_factor: f64,
    #[serde(default = "twenty")]
    pub d_double_prime_min: f64,
    #[serde(default)]
    pub record_trajectories: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
}

fn one() -> f64 {
    1.0
}

fn twenty() -> f64 {
    20.0
}

impl Default for TelemetryConfig {
    fn default() -> Self {
        Self { d_prime_factor: 1.0, d_double_prime_min: 20.0, record_trajectories: false, stride: None }
    }
}

impl TelemetryConfig {
    pub fn options_for(&self, fit: &FitnessFunction) -> TelemetryOptions {
        let n = fit.n() as f64;
        let k = fit.k().unwrap_or(1) as f64;
        TelemetryOptions {
            record_trajectories: self.record_trajectories,
            stride: self.stride,
            d_prime: Some(self.d_prime_factor * n.ln()),
            d_double_prime: Some((2.0 * k + 1.0).max(self.d_double_prime_min)),
            stop_on_collapse: false,
        }
    }
}

/// A declarative sweep: every problem on every `n`, `seeds.count` runs each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub algorithm: Algorithm,
    pub problems: Vec<ProblemSpec>,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub mu: MuRule,
    pub seeds: SeedSpec,
    /// cGA iteration cap `ceil(cap_factor mu sqrt(n))`.
    #[serde(default = "default_cap_factor")]
    pub cap_factor: f64,
    /// (1+1) EA evaluation cap.
    #[serde(default = "default_ea_cap")]
    pub ea_evaluation_cap: u64,
    #[serde(default)]
    pub telemetry: TelemetryConfig,
}

fn default_cap_factor() -> f64 {
    DEFAULT_CAP_FACTOR
}

fn default_ea_cap() -> u64 {
    DEFAULT_EA_CAP
}

impl ExperimentConfig {
    pub fn new(problems: Vec<ProblemSpec>, n_grid: Vec<usize>, seeds: u64, base_seed: u64) -> Self {
        Self {
            algorithm: Algorithm::Cga,
            problems,
            n_grid,
            mu: MuRule::default(),
            seeds: SeedSpec { count: seeds, base: base_seed },
            cap_factor: DEFAULT_CAP_FACTOR,
            ea_evaluation_cap: DEFAULT_EA_CAP,
            telemetry: TelemetryConfig::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::Config("no problems".into()));
        }
        self.problems.iter().try_for_each(ProblemSpec::validate)?;
        if self.n_grid.is_empty() {
            return Err(Error::Config("empty n_grid".into()));
        }
        if self.n_grid.iter().any(|&n| n < 3) {
            return Err(Error::Config("every n must be at least 3".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.seeds.count == 0 {
            return Err(Error::Config("seed count must be positive".into()));
        }
        if !(self.cap_factor > 0.0 && self.cap_factor.is_finite()) {
            return Err(Error::Config("cap_factor must be positive".into()));
        }
        if self.ea_evaluation_cap == 0 {
            return Err(Error::Config("ea_evaluation_cap must be positive".into()));
        }
        if self.mu.fixed == Some(0) || !(self.mu.factor > 0.0 && self.mu.factor.is_finite()) {
            return Err(Error::Config("population size rule must be positive".into()));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n: usize, mu: u64) -> u64 {
        ((self.cap_factor * mu as f64 * (n as f64).sqrt()).ceil() as u64).max(1)
    }
}

/// Seed of run `seed_index` in dimension `n`. It does not depend on the
/// problem, so OneMax and Jump runs of one `(n, index)` share randomness.
pub fn run_seed(base: u64, n: usize, seed_index: u64) -> u64 {
    derive_seed(&[base, n as u64, seed_index])
}

/// One run of a sweep; exactly one of `trace` and `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub problem: FitnessFunction,
    pub n: usize,
    pub k: Option<usize>,
    pub mu: Option<u64>,
    pub mu_requested: Option<u64>,
    pub seed_index: u64,
    pub seed: u64,
    pub cap: u64,
    pub trace: Option<RunTrace>,
    pub error: Option<String>,
}

impl RunRecord {
    fn sort_key(&self) -> (Algorithm, u8, usize, usize, u64) {
        let kind = matches!(self.problem, FitnessFunction::Jump { .. }) as u8;
        (self.algorithm, kind, self.k.unwrap_or(0), self.n, self.seed_index)
    }

    pub fn succeeded(&self) -> bool {
        self.trace.as_ref().is_some_and(RunTrace::succeeded)
    }
}

/// Runs every `(problem, n, seed index)` cell; the output is sorted by
/// algorithm, problem, `k`, `n` and seed index. Invalid cells produce
/// records with `error` set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for p in &config.problems {
        for &n in &config.n_grid {
            for s in 0..config.seeds.count {
                jobs.push((p.clone(), n, s));
            }
        }
    }
    let mut records: Vec<RunRecord> = jobs.into_par_iter().map(|(p, n, s)| execute(config, &p, n, s)).collect();
    records.sort_by_key(RunRecord::sort_key);
    Ok(records)
}

fn execute(config: &ExperimentConfig, p: &ProblemSpec, n: usize, seed_index: u64) -> RunRecord {
    let seed = run_seed(config.seeds.base, n, seed_index);
    let mut rec = RunRecord {
        algorithm: config.algorithm,
        problem: FitnessFunction::OneMax { n },
        n,
        k: None,
        mu: None,
        mu_requested: None,
        seed_index,
        seed,
        cap: 0,
        trace: None,
        error: None,
    };
    let result = (|| -> Result<RunTrace> {
        let fit = p.instantiate(n)?;
        rec.problem = fit;
        rec.k = fit.k();
        match config.algorithm {
            Algorithm::Cga => {
                let (req, mu) = config.mu.resolve(n)?;
                rec.mu_requested = Some(req);
                rec.mu = Some(mu);
                rec.cap = config.iteration_cap(n, mu);
                run_cga(fit, mu, Some(rec.cap), config.telemetry.options_for(&fit), seed)
            }
            Algorithm::Ea => {
                rec.cap = config.ea_evaluation_cap;
                one_plus_one_ea(fit, rec.cap, seed)
            }
        }
    })();
    match result {
        Ok(t) => rec.trace = Some(t),
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub min: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            count: v.len() as u64,
            min: *v.first()?,
            median: quantile_sorted(&v, 0.5)?,
            q25: quantile_sorted(&v, 0.25)?,
            q75: quantile_sorted(&v, 0.75)?,
            mean: v.iter().sum::<f64>() / v.len() as f64,
            max: *v.last()?,
        })
    }
}

/// Statistics of one `(algorithm, problem, n)` cell. Runtime summaries use
/// successful runs only; `None` marks a cell without any.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub algorithm: Algorithm,
    pub problem: String,
    pub n: usize,
    pub k: Option<usize>,
    pub mu: Option<u64>,
    pub runs: u64,
    pub successes: u64,
    pub errors: u64,
    pub success_rate: f64,
    pub iterations: Option<Summary>,
    pub evaluations: Option<Summary>,
    /// First time `D_t <= D'`, over runs that got there.
    pub d_prime_crossing: Option<Summary>,
    /// First time `D_t <= D''`, over runs that got there.
    pub d_double_prime_crossing: Option<Summary>,
    /// Fraction of runs in which no frequency fell below 1/3 before
    /// `D_t <= D''` was first reached.
    pub floor_held_fraction: f64,
    /// Minimum frequency over the recorded trajectory, per run.
    pub min_frequency: Option<Summary>,
    pub gap_samples: Option<Summary>,
}

type CellKey = (Algorithm, u8, usize, usize);

fn cell_key(r: &RunRecord) -> CellKey {
    let (a, kind, k, n, _) = r.sort_key();
    (a, kind, k, n)
}

/// Floor held: no drop below 1/3, or the drop came no earlier than the
/// first `D_t <= D''`.
fn floor_held(t: &RunTrace) -> bool {
    match (t.first_t_any_freq_below_one_third, t.first_t_d_le_ddoubleprime) {
        (None, _) => true,
        (Some(drop), Some(reach)) => drop >= reach,
        (Some(_), None) => false,
    }
}

/// Per-cell statistics, in canonical cell order. Independent of the order
/// of `records`.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateStats> {
    let mut cells: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells.entry(cell_key(r)).or_default().push(r);
    }
    cells
        .into_values()
        .map(|mut rs| {
            rs.sort_by_key(|r| r.seed_index);
            let first = rs[0];
            let traces: Vec<&RunTrace> = rs.iter().filter_map(|r| r.trace.as_ref()).collect();
            let ok: Vec<&RunTrace> = traces.iter().copied().filter(|t| t.succeeded()).collect();
            let col = |f: &dyn Fn(&RunTrace) -> Option<f64>, set: &[&RunTrace]| {
                Summary::of(&set.iter().filter_map(|t| f(t)).collect::<Vec<_>>())
            };
            let runs = rs.len() as u64;
            let successes = ok.len() as u64;
            AggregateStats {
                algorithm: first.algorithm,
                problem: first.problem.label(),
                n: first.n,
                k: first.k,
                mu: first.mu,
                runs,
                successes,
                errors: rs.iter().filter(|r| r.error.is_some()).count() as u64,
                success_rate: successes as f64 / runs as f64,
                iterations: col(&|t| Some(t.iterations as f64), &ok),
                evaluations: col(&|t| Some(t.evaluations as f64), &ok),
                d_prime_crossing: col(&|t| t.first_t_d_le_dprime.map(|v| v as f64), &traces),
                d_double_prime_crossing: col(&|t| t.first_t_d_le_ddoubleprime.map(|v| v as f64), &traces),
                floor_held_fraction: if traces.is_empty() {
                    0.0
                } else {
                    traces.iter().filter(|t| floor_held(t)).count() as f64 / traces.len() as f64
                },
                min_frequency: col(
                    &|t| t.min_frequency_trajectory.as_ref().and_then(|v| v.iter().map(|p| p.1).min_by(f64::total_cmp)),
                    &traces,
                ),
                gap_samples: col(&|t| Some(t.gap_sample_count as f64), &traces),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

/// Least-squares fit of `ln y` against `ln x`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("at least three points are needed".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidArgument("all coordinates must be positive".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("x values must not all be equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(ScalingFit { slope, intercept, max_residual })
}

/// Scaling fit of median iterations over successful runs, for the cells of
/// one algorithm and problem label.
pub fn fit_median_iterations(
    stats: &[AggregateStats],
    algorithm: Algorithm,
    problem_prefix: &str,
) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter(|s| s.algorithm == algorithm && s.problem.starts_with(problem_prefix))
        .filter_map(|s| s.iterations.map(|i| (s.n as f64, i.median)))
        .collect();
    fit_scaling(&pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub n: usize,
    pub k: usize,
    pub median_jump: f64,
    pub median_onemax: f64,
    pub ratio: f64,
    /// Percentile bootstrap interval (99%) of the ratio of medians.
    pub ci: (f64, f64),
    pub resamples: u64,
}

fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5).unwrap_or(f64::NAN)
}

/// Ratio of median Jump to median OneMax iterations (successful cGA runs)
/// for every `n` with both, each Jump `k` separately.
pub fn compare_jump_vs_onemax(records: &[RunRecord], resamples: u64, seed: u64) -> Result<Vec<RatioReport>> {
    let mut onemax: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    // seed order keeps the bootstrap independent of record order
    let mut om_raw: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    let mut jump: BTreeMap<(usize, usize), Vec<(u64, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.algorithm == Algorithm::Cga && r.succeeded()) {
        let it = r.trace.as_ref().unwrap().iterations as f64;
        match r.problem {
            FitnessFunction::OneMax { n } => om_raw.entry(n).or_default().push((r.seed_index, it)),
            FitnessFunction::Jump { n, k } => jump.entry((n, k)).or_default().push((r.seed_index, it)),
        }
    }
    for (n, mut v) in om_raw {
        v.sort_by_key(|a| a.0);
        onemax.insert(n, v.into_iter().map(|p| p.1).collect());
    }
    let mut out = Vec::new();
    for ((n, k), mut js) in jump {
        let Some(om) = onemax.get(&n) else { continue };
        js.sort_by_key(|a| a.0);
        let js: Vec<f64> = js.into_iter().map(|p| p.1).collect();
        let (mj, mo) = (median_of(&js), median_of(om));
        let mut rng = rng_from_seed(derive_seed(&[seed, n as u64, k as u64]));
        let mut ratios: Vec<f64> = (0..resamples)
            .map(|_| {
                let a: Vec<f64> = (0..js.len()).map(|_| js[rng.random_range(0..js.len())]).collect();
                let b: Vec<f64> = (0..om.len()).map(|_| om[rng.random_range(0..om.len())]).collect();
                median_of(&a) / median_of(&b)
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let ci =
            (quantile_sorted(&ratios, 0.005).unwrap_or(f64::NAN), quantile_sorted(&ratios, 0.995).unwrap_or(f64::NAN));
        out.push(RatioReport { n, k, median_jump: mj, median_onemax: mo, ratio: mj / mo, ci, resamples });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(2)], vec![12, 16], 5, 9);
        c.mu = MuRule { factor: 2.0, fixed: None };
        c
    }

    #[test]
    fn auto_mu_values() {
        // ceil(8 * 8 * ln 64) = 267; mu * 62/64 even needs 64 | mu
        assert_eq!(auto_mu_request(64, 8.0), 267);
        assert_eq!(auto_mu(64, 8.0).unwrap(), 320);
    }

    #[test]
    fn validation() {
        let mut c = small_config();
        assert!(c.validate().is_ok());
        c.n_grid = vec![16, 12];
        assert!(c.validate().is_err());
        c.n_grid = vec![2, 12];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.problems = vec![ProblemSpec { kind: ProblemKind::Jump, k: Some(2), k_log_factor: Some(1.0) }];
        assert!(c.validate().is_err());
        c.problems = vec![ProblemSpec { kind: ProblemKind::Onemax, k: Some(2), k_log_factor: None }];
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            n_grid = [32, 64]
            seeds = { count = 3, base = 11 }
            [mu]
            factor = 4.0
            [[problems]]
            kind = "onemax"
            [[problems]]
            kind = "jump"
            k_log_factor = 0.5
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.cap_factor, 50.0);
        assert_eq!(c.problems[1].instantiate(64).unwrap(), FitnessFunction::jump(64, 2).unwrap());
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(ExperimentConfig::from_toml_str("n_grid = [8]\nbogus = 1").is_err());
    }

    #[test]
    fn one_cell_one_seed_one_record() {
        let c = ExperimentConfig::new(vec![ProblemSpec::onemax()], vec![10], 1, 0);
        assert_eq!(run_experiment(&c).unwrap().len(), 1);
    }

    #[test]
    fn sweep_is_deterministic_and_sorted() {
        let c = small_config();
        let a = run_experiment(&c).unwrap();
        assert_eq!(a.len(), 20);
        assert_eq!(a, run_experiment(&c).unwrap());
        let keys: Vec<_> = a.iter().map(RunRecord::sort_key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(a.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn k_one_jump_shares_onemax_trace() {
        let c = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(1)], vec![20], 4, 2);
        let recs = run_experiment(&c).unwrap();
        let (om, jp) = recs.split_at(4);
        for (a, b) in om.iter().zip(jp) {
            let (ta, tb) = (a.trace.as_ref().unwrap(), b.trace.as_ref().unwrap());
            assert_eq!(ta.iterations, tb.iterations);
            assert_eq!(ta.outcome, tb.outcome);
        }
    }

    #[test]
    fn invalid_cells_are_recorded_not_fatal() {
        // k = 20 is too large for n = 12 but fine for n = 40
        let c = ExperimentConfig::new(vec![ProblemSpec::jump(20)], vec![12, 40], 1, 0);
        let recs = run_experiment(&c).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].error.is_some());
        assert!(recs[1].error.is_none());
    }

    #[test]
    fn aggregate_basics() {
        let mut recs = run_experiment(&small_config()).unwrap();
        let stats = aggregate(&recs);
        assert_eq!(stats.len(), 4);
        for s in &stats {
            assert_eq!(s.runs, 5);
            if let Some(i) = s.iterations {
                assert!(i.q25 <= i.median && i.median <= i.q75);
            }
        }
        recs.reverse();
        assert_eq!(aggregate(&recs), stats);
    }

    #[test]
    fn summary_examples() {
        let s = Summary::of(&[30.0, 10.0, 20.0]).unwrap();
        assert_eq!(s.median, 20.0);
        assert_eq!(s.max, 30.0);
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn success_rate_counts_failures() {
        let t = |ok| RunTrace {
            outcome: if ok { crate::cga::Outcome::OptimumFound } else { crate::cga::Outcome::IterationCapReached },
            iterations: 10,
            evaluations: 20,
            d_trajectory: None,
            min_frequency_trajectory: None,
            first_t_d_le_dprime: None,
            first_t_d_le_ddoubleprime: None,
            gap_sample_count: 0,
            first_t_any_freq_below_one_third: None,
        };
        let recs: Vec<RunRecord> = (0..100)
            .map(|i| RunRecord {
                algorithm: Algorithm::Cga,
                problem: FitnessFunction::onemax(10).unwrap(),
                n: 10,
                k: None,
                mu: Some(10),
                mu_requested: Some(10),
                seed_index: i,
                seed: i,
                cap: 100,
                trace: Some(t(i < 95)),
                error: None,
            })
            .collect();
        assert_eq!(aggregate(&recs)[0].success_rate, 0.95);
    }

    #[test]
    fn scaling_fit_examples() {
        let f = fit_scaling(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        let f = fit_scaling(&[(1.0, 1.0), (10.0, 100.0), (100.0, 1e4)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        let planted: Vec<(f64, f64)> = [3.0, 7.0, 20.0, 55.0].iter().map(|&x| (x, 0.3 * f64::powf(x, 1.37))).collect();
        let f = fit_scaling(&planted).unwrap();
        assert!((f.slope - 1.37).abs() < 1e-9 && f.max_residual < 1e-9);
        assert!((f.intercept - 0.3f64.ln()).abs() < 1e-9);
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn ratio_for_k_one_is_one() {
        let mut c = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(1)], vec![16], 20, 4);
        c.mu = MuRule { factor: 2.0, fixed: None };
        let recs = run_experiment(&c).unwrap();
        let r = compare_jump_vs_onemax(&recs, 200, 0).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].ratio, 1.0);
        assert!(r[0].ci.0 <= 1.0 && r[0].ci.1 >= 1.0);
    }
}
