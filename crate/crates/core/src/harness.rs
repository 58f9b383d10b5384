//! Config-driven experiment runner.
//!
//! A config names one scenario, a list of learners, a list of comparators and
//! a list of seeds (and optionally several horizons). Every
//! `(horizon, seed, learner, comparator)` combination produces one per-round
//! CSV and one row of `summary.csv`.
//!
//! Numbers are written with Rust's `Display` for `f64`: the shortest decimal
//! string that round-trips, never in exponent notation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gd::{DiscountedGd, GdConfig, GdRule, Schedule};
use crate::geometry::Vector;
use crate::learner::{run_learner, LearnerTrace, OnlineLearner};
use crate::losses::ConvexityProfile;
use crate::meta::{ExpertGrid, ExpertKind, MetaLearner, MixingRate};
use crate::newton::{DiscountedNewton, EpsilonPreset, NewtonCase, NewtonConfig};
use crate::regret::{regret_of, ComparatorKind, ComparatorTrace, GrowthFit};
use crate::rls::DiscountedRls;
use crate::scenarios::{generate, Scenario, ScenarioKind, ScenarioSpec};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "DYNREGRET_WORKERS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Either a value for `ε` or one of the named presets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Value(f64),
    Preset(EpsilonPreset),
}

impl EpsilonSpec {
    fn value(&self, profile: &ConvexityProfile, radius: f64, experts: usize) -> f64 {
        match self {
            EpsilonSpec::Value(v) => *v,
            EpsilonSpec::Preset(p) => p.value(profile, radius, experts),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetaBase {
    Newton {
        case: NewtonCase,
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        epsilon: Option<EpsilonSpec>,
    },
    Gd {
        rule: GdRule,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// `eta` defaults to the largest admissible value for the case, `epsilon`
    /// to 1.
    Newton {
        case: NewtonCase,
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        epsilon: Option<EpsilonSpec>,
    },
    /// `ℓ` and `u` come from the scenario's loss family.
    Gd { rule: GdRule },
    Rls,
    Meta {
        base: MetaBase,
        mixing: MixingRate,
        #[serde(default)]
        include_gamma_one: bool,
    },
}

impl LearnerSpec {
    fn default_id(&self) -> String {
        match self {
            LearnerSpec::Newton { case, .. } => format!("newton_{}", snake(case)),
            LearnerSpec::Gd { rule } => format!("gd_{}", snake(rule)),
            LearnerSpec::Rls => "rls".into(),
            LearnerSpec::Meta { base: MetaBase::Newton { .. }, .. } => "meta_newton".into(),
            LearnerSpec::Meta { base: MetaBase::Gd { .. }, .. } => "meta_gd".into(),
        }
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    #[derive(Serialize)]
    struct Wrap<'a, T> {
        v: &'a T,
    }
    toml::to_string(&Wrap { v })
        .ok()
        .and_then(|s| s.split('"').nth(1).map(str::to_owned))
        .unwrap_or_default()
}

/// The discount schedule of a single learner. A path-tuned schedule without
/// a budget uses the scenario's declared budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    BetaPower {
        beta: f64,
    },
    PathTuned {
        #[serde(default)]
        budget: Option<f64>,
    },
    Fixed {
        gamma: f64,
    },
}

impl ScheduleSpec {
    pub fn resolve(&self, spec: &ScenarioSpec) -> Result<f64, HarnessError> {
        let schedule = match *self {
            ScheduleSpec::BetaPower { beta } => Schedule::BetaPower { beta },
            ScheduleSpec::Fixed { gamma } => Schedule::Fixed { gamma },
            ScheduleSpec::PathTuned { budget } => {
                let budget = budget.or_else(|| spec.declared_budget()).ok_or_else(|| {
                    config_err("path_tuned schedule without a budget needs a scenario with a declared budget")
                })?;
                Schedule::PathTuned { budget }
            }
        };
        schedule.make_gamma(spec.horizon, spec.radius).map_err(config_err)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub learner: LearnerSpec,
    /// Required for every learner except `meta`, which builds its own grid.
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
}

impl AlgorithmSpec {
    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.learner.default_id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario id used in file names; defaults to the scenario kind.
    #[serde(default)]
    pub name: Option<String>,
    pub scenario: ScenarioSpec,
    /// Horizons to run; empty means the scenario's own horizon.
    #[serde(default)]
    pub horizons: Vec<u64>,
    /// Seeds to run; empty means the scenario's own seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub comparators: Vec<ComparatorKind>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(config_err)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn scenario_id(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.scenario.kind.label().to_owned())
    }

    pub fn horizons(&self) -> Vec<u64> {
        if self.horizons.is_empty() {
            vec![self.scenario.horizon]
        } else {
            self.horizons.clone()
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.scenario.seed]
        } else {
            self.seeds.clone()
        }
    }

    /// Checks everything that can be checked without running a learner.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.algorithms.is_empty() {
            return Err(config_err("at least one algorithm is required"));
        }
        if self.comparators.is_empty() {
            return Err(config_err("at least one comparator is required"));
        }
        check_id(&self.scenario_id())?;
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            let id = a.id();
            check_id(&id)?;
            if !seen.insert(id.clone()) {
                return Err(config_err(format!("duplicate algorithm id {id:?}")));
            }
        }
        let mut seen = HashSet::new();
        for c in &self.comparators {
            if !seen.insert(c.label()) {
                return Err(config_err(format!("duplicate comparator {:?}", c.label())));
            }
            match c {
                ComparatorKind::Explicit => {
                    return Err(config_err("explicit comparators cannot be given in a config"));
                }
                ComparatorKind::Designated
                    if !matches!(self.scenario.kind, ScenarioKind::LowerBoundAdversary { .. }) =>
                {
                    return Err(config_err("the designated comparator needs the lower_bound_adversary scenario"));
                }
                ComparatorKind::TrackingBudget { budget } if !(budget.is_finite() && *budget >= 0.0) => {
                    return Err(config_err(format!("comparator budget must be finite and ≥ 0, got {budget}")));
                }
                _ => {}
            }
        }
        if self.workers == Some(0) {
            return Err(config_err("workers must be at least 1"));
        }
        for horizon in self.horizons() {
            let spec = self.scenario.clone().with_horizon(horizon);
            spec.validate().map_err(config_err)?;
            let profile = spec.profile().map_err(config_err)?;
            for a in &self.algorithms {
                build_learner(a, &spec, &profile).map_err(|e| config_err(format!("algorithm {}: {e}", a.id())))?;
            }
        }
        Ok(())
    }
}

fn check_id(id: &str) -> Result<(), HarnessError> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
        return Err(config_err(format!("id {id:?} must be non-empty and use only [A-Za-z0-9_.-]")));
    }
    Ok(())
}

fn build_learner(
    alg: &AlgorithmSpec,
    spec: &ScenarioSpec,
    profile: &ConvexityProfile,
) -> Result<Box<dyn OnlineLearner + Send>, HarnessError> {
    let ball = spec.ball().map_err(config_err)?;
    let theta1 = Vector::zeros(spec.dim);
    let gamma = || -> Result<f64, HarnessError> {
        alg.schedule
            .ok_or_else(|| config_err("this learner needs a schedule"))?
            .resolve(spec)
    };
    let newton = |case: NewtonCase, eta: Option<f64>, epsilon: Option<EpsilonSpec>, gamma: f64, experts: usize, default_eps: EpsilonPreset| {
        let eta = eta.unwrap_or_else(|| case.max_eta(profile, spec.radius));
        let eps = epsilon.unwrap_or(EpsilonSpec::Preset(default_eps)).value(profile, spec.radius, experts);
        let config = NewtonConfig::new(case, gamma, eta, eps).map_err(config_err)?;
        config.validate_for(profile, &ball).map_err(config_err)?;
        Ok::<_, HarnessError>(config)
    };
    let gd_config = |rule: GdRule, gamma: f64| match rule {
        GdRule::SmoothStronglyConvex => GdConfig::smooth(gamma, profile.ell(), profile.u()),
        GdRule::StronglyConvex => GdConfig::strongly_convex(gamma, profile.ell()),
    };
    Ok(match alg.learner {
        LearnerSpec::Newton { case, eta, epsilon } => {
            let config = newton(case, eta, epsilon, gamma()?, 1, EpsilonPreset::Unit)?;
            Box::new(DiscountedNewton::new(config, ball, theta1).map_err(config_err)?)
        }
        LearnerSpec::Gd { rule } => {
            let config = gd_config(rule, gamma()?).map_err(config_err)?;
            Box::new(DiscountedGd::new(config, ball, theta1).map_err(config_err)?)
        }
        LearnerSpec::Rls => Box::new(DiscountedRls::new(theta1, gamma()?).map_err(config_err)?),
        LearnerSpec::Meta { base, mixing, include_gamma_one } => {
            if alg.schedule.is_some() {
                return Err(config_err("meta learners build their own discount grid; remove the schedule"));
            }
            let grid = ExpertGrid::build(spec.horizon, spec.radius, include_gamma_one).map_err(config_err)?;
            let kind = match base {
                MetaBase::Newton { case, eta, epsilon } => {
                    let c = newton(case, eta, epsilon, 1.0, grid.len(), EpsilonPreset::InverseRhoSqDSqN)?;
                    ExpertKind::Newton { case, eta: c.eta(), epsilon: c.epsilon() }
                }
                MetaBase::Gd { rule } => {
                    gd_config(rule, 1.0).map_err(config_err)?;
                    ExpertKind::Gd { rule, ell: profile.ell(), u: profile.u() }
                }
            };
            let lambda = mixing.lambda(profile);
            Box::new(MetaLearner::new(&grid, kind, lambda, &ball, theta1).map_err(config_err)?)
        }
    })
}

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub scenario: String,
    pub comparator: String,
    pub seed: u64,
    pub horizon: u64,
    pub path_length: f64,
    pub final_regret: f64,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    pub status: String,
}

pub const SUMMARY_HEADER: &str = "algorithm,scenario,comparator,seed,T,path_length,final_regret,slope,r2,status";

impl SummaryRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.scenario,
            self.comparator,
            self.seed,
            self.horizon,
            self.path_length,
            self.final_regret,
            opt(self.slope),
            opt(self.r2),
            self.status.replace([',', '\n', '\r'], ";")
        )
    }

    fn from_csv(line: &str) -> Result<Self, HarnessError> {
        let cols: Vec<&str> = line.splitn(10, ',').collect();
        if cols.len() != 10 {
            return Err(config_err(format!("summary row has {} columns, expected 10: {line:?}", cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| config_err(format!("bad number {s:?}: {e}")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        Ok(SummaryRow {
            algorithm: cols[0].into(),
            scenario: cols[1].into(),
            comparator: cols[2].into(),
            seed: cols[3].parse().map_err(|e| config_err(format!("bad seed {:?}: {e}", cols[3])))?,
            horizon: cols[4].parse().map_err(|e| config_err(format!("bad horizon {:?}: {e}", cols[4])))?,
            path_length: num(cols[5])?,
            final_regret: num(cols[6])?,
            slope: opt(cols[7])?,
            r2: opt(cols[8])?,
            status: cols[9].into(),
        })
    }
}

/// What a finished `run` produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// 0 when every run succeeded, 2 when at least one failed numerically.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            2
        }
    }
}

struct Prepared {
    horizon: u64,
    seed: u64,
    scenario: Result<(Scenario, ConvexityProfile), String>,
    comparators: Vec<Result<ComparatorTrace, String>>,
}

fn prepare(config: &ExperimentConfig, horizon: u64, seed: u64) -> Prepared {
    let spec = config.scenario.clone().with_horizon(horizon).with_seed(seed);
    let scenario = generate(&spec).and_then(|s| Ok((s, spec.profile()?))).map_err(|e| e.to_string());
    let comparators = config
        .comparators
        .iter()
        .map(|kind| {
            let (s, _) = scenario.as_ref().map_err(Clone::clone)?;
            let ball = spec.ball().map_err(|e| e.to_string())?;
            match kind {
                ComparatorKind::FixedOptimum => ComparatorTrace::fixed_optimum(&s.losses, &ball),
                ComparatorKind::PerRoundMinimizer => ComparatorTrace::per_round_minimizers(&s.losses, &ball),
                ComparatorKind::TrackingBudget { budget } => ComparatorTrace::tracking_budget(&s.losses, &ball, *budget),
                ComparatorKind::Designated => match &s.designated {
                    Some(z) => ComparatorTrace::designated(z.clone(), &ball),
                    None => return Err("scenario has no designated comparator".into()),
                },
                ComparatorKind::Explicit => return Err("explicit comparators are not supported here".into()),
            }
            .map_err(|e| e.to_string())
        })
        .collect();
    Prepared { horizon, seed, scenario, comparators }
}

fn worker_count(config: &ExperimentConfig) -> Result<Option<usize>, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(config_err(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(config.workers),
    }
}

/// Runs every combination in the config and writes the CSVs.
///
/// `output_dir` overrides the config's directory.
pub fn run_experiment(config: &ExperimentConfig, output_dir: Option<&Path>) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let out = output_dir.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.clone());
    fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(config)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| config_err(format!("cannot start workers: {e}")))?;

    let cells: Vec<(u64, u64)> =
        config.horizons().into_iter().flat_map(|h| config.seeds().into_iter().map(move |s| (h, s))).collect();
    let rows: Vec<Result<Vec<SummaryRow>, HarnessError>> = pool.install(|| {
        let prepared: Vec<Prepared> = cells.par_iter().map(|&(h, s)| prepare(config, h, s)).collect();
        let jobs: Vec<(&Prepared, &AlgorithmSpec)> =
            prepared.iter().flat_map(|p| config.algorithms.iter().map(move |a| (p, a))).collect();
        jobs.par_iter().map(|(p, a)| run_job(config, p, a, &out)).collect()
    });
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for r in &all {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    let summary_path = out.join("summary.csv");
    write_atomic(&summary_path, &text)?;
    Ok(RunOutcome { rows: all, summary_path })
}

fn run_job(
    config: &ExperimentConfig,
    prepared: &Prepared,
    alg: &AlgorithmSpec,
    out: &Path,
) -> Result<Vec<SummaryRow>, HarnessError> {
    let scenario_id = config.scenario_id();
    let alg_id = alg.id();
    let row = |comparator: &str, status: String| SummaryRow {
        algorithm: alg_id.clone(),
        scenario: scenario_id.clone(),
        comparator: comparator.to_owned(),
        seed: prepared.seed,
        horizon: prepared.horizon,
        path_length: f64::NAN,
        final_regret: f64::NAN,
        slope: None,
        r2: None,
        status,
    };
    let failed_all = |msg: &str| -> Vec<SummaryRow> {
        config.comparators.iter().map(|c| row(c.label(), format!("failed: {msg}"))).collect()
    };

    let (scenario, profile) = match &prepared.scenario {
        Ok(s) => s,
        Err(e) => return Ok(failed_all(e)),
    };
    let trace: LearnerTrace = match build_learner(alg, &scenario.spec, profile) {
        Err(e) => return Err(e),
        Ok(mut learner) => match run_learner(learner.as_mut(), &scenario.losses) {
            Ok(t) => t,
            Err(e) => return Ok(failed_all(&e.to_string())),
        },
    };

    let mut rows = Vec::with_capacity(config.comparators.len());
    for (kind, cmp) in config.comparators.iter().zip(&prepared.comparators) {
        let label = kind.label();
        let cmp = match cmp {
            Ok(c) => c,
            Err(e) => {
                rows.push(row(label, format!("failed: {e}")));
                continue;
            }
        };
        let report = match regret_of(trace.played(), &scenario.losses, cmp) {
            Ok(r) => r,
            Err(e) => {
                rows.push(row(label, format!("failed: {e}")));
                continue;
            }
        };
        if !report.total().is_finite() {
            rows.push(row(label, "failed: non-finite regret".into()));
            continue;
        }
        let csv = round_csv(&report, &trace);
        let file = out.join(format!(
            "{alg_id}__{scenario_id}__{label}__T{}__seed{}.csv",
            prepared.horizon, prepared.seed
        ));
        write_atomic(&file, &csv)?;
        let fit = GrowthFit::power_law(&report.checkpoints()).ok().filter(|f| f.points_used >= 4);
        rows.push(SummaryRow {
            path_length: report.path_length,
            final_regret: report.total(),
            slope: fit.as_ref().map(|f| f.slope),
            r2: fit.as_ref().map(|f| f.r2),
            ..row(label, "ok".into())
        });
    }
    Ok(rows)
}

/// Per-round CSV: `t,loss,comparator_loss,cum_regret,eta_t,gamma` plus one
/// `weight_<i>` column per expert for aggregating learners.
pub fn round_csv(report: &crate::regret::RegretReport, trace: &LearnerTrace) -> String {
    let experts = trace.weights.first().map_or(0, Vec::len);
    let mut s = String::from("t,loss,comparator_loss,cum_regret,eta_t,gamma");
    for i in 1..=experts {
        let _ = write!(s, ",weight_{i}");
    }
    s.push('\n');
    for (i, r) in report.records.iter().enumerate() {
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            r.t, r.loss, r.comparator_loss, r.cum_regret, trace.step_sizes[i], trace.discounts[i]
        );
        if let Some(w) = trace.weights.get(i) {
            for x in w {
                let _ = write!(s, ",{x}");
            }
        }
        s.push('\n');
    }
    s
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

/// Growth fit across horizons for one `(algorithm, scenario, comparator)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub algorithm: String,
    pub scenario: String,
    pub comparator: String,
    /// `(T, mean final regret over successful seeds)`.
    pub points: Vec<(f64, f64)>,
    pub power: Option<GrowthFit>,
    pub log_log: Option<GrowthFit>,
    pub note: String,
}

pub const FIT_HEADER: &str = "algorithm,scenario,comparator,points,slope,r2,loglog_slope,loglog_r2,note";

impl FitRow {
    pub fn to_csv(&self) -> String {
        let f = |g: &Option<GrowthFit>, pick: fn(&GrowthFit) -> f64| g.as_ref().map(|x| pick(x).to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.scenario,
            self.comparator,
            self.points.len(),
            f(&self.power, |g| g.slope),
            f(&self.power, |g| g.r2),
            f(&self.log_log, |g| g.slope),
            f(&self.log_log, |g| g.r2),
            self.note
        )
    }
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SUMMARY_HEADER => {}
        other => return Err(config_err(format!("unexpected summary header {other:?}"))),
    }
    lines.filter(|l| !l.trim().is_empty()).map(SummaryRow::from_csv).collect()
}

/// Fits final regret against the horizon for each group of summary rows.
/// A group needs at least four horizons with positive mean regret.
pub fn fit_summary(rows: &[SummaryRow]) -> Vec<FitRow> {
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for r in rows {
        let k = (r.algorithm.clone(), r.scenario.clone(), r.comparator.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(algorithm, scenario, comparator)| {
            let mut horizons: Vec<u64> = Vec::new();
            let group: Vec<&SummaryRow> = rows
                .iter()
                .filter(|r| r.is_ok() && r.algorithm == algorithm && r.scenario == scenario && r.comparator == comparator)
                .collect();
            for r in &group {
                if !horizons.contains(&r.horizon) {
                    horizons.push(r.horizon);
                }
            }
            horizons.sort_unstable();
            let points: Vec<(f64, f64)> = horizons
                .iter()
                .map(|&h| {
                    let vals: Vec<f64> = group.iter().filter(|r| r.horizon == h).map(|r| r.final_regret).collect();
                    (h as f64, vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect();
            let positive = points.iter().filter(|(_, r)| *r > 0.0).count();
            let (power, log_log, note) = if positive < 4 {
                (None, None, format!("need 4 horizons with positive regret, have {positive}"))
            } else {
                let power = GrowthFit::power_law(&points).ok();
                let log_log = GrowthFit::log_log(&points).ok();
                let dropped = points.len() - positive;
                let note = if dropped > 0 { format!("dropped {dropped} non-positive") } else { "ok".into() };
                (power, log_log, note)
            };
            FitRow { algorithm, scenario, comparator, points, power, log_log, note }
        })
        .collect()
}
