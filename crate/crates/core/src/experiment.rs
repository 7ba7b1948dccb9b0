//! Seeded Monte Carlo experiments over transmit budget, activation power and
//! candidate density, plus convergence traces and result files.
//!
//! Every trial is a pure function of `(config, seed)`. Users are drawn from
//! a ChaCha stream seeded with the trial seed; the random initial matching
//! uses a second stream of the same seed, so all schemes in a trial see the
//! same users and the same starting point.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    conventional_baseline, exhaustive_search, nearest_pa_scheme, SchemeId, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::config::{dbm_to_watts, ConfigFile, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{build_layout, feed_channel, ChannelMatrix, Layout};
use crate::link::{EEOutcome, Radiators};
use crate::matching::{MatchingSearch, TracePoint};
use crate::power_alloc::InnerRule;

/// `L` used for exhaustive rows when the sweep's own `L` exceeds the cap.
pub const SWEEP_EXHAUSTIVE_POSITIONS: usize = 10;

pub const CSV_HEADER: [&str; 12] = [
    "seed",
    "K",
    "L",
    "Pt_dBm",
    "Pact_dBm",
    "scheme",
    "ee_bits_per_joule",
    "sum_rate_bps",
    "n_active",
    "feasible",
    "outer_iterations",
    "dinkelbach_iterations_total",
];

pub const CONVERGENCE_HEADER: [&str; 4] = ["seed", "sweep_index", "utility_after_move", "n_active_after_move"];

/// Users, positions and channels of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: Layout,
    pub channel: ChannelMatrix,
    /// Free-space channel from the feed point, for the conventional antenna.
    pub feed: Vec<Complex64>,
}

pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matching_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// i.i.d. uniform users over `[0, D2] × [-D1/2, D1/2]`.
pub fn sample_users<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Vec<(f64, f64)> {
    let half = config.region_width / 2.0;
    (0..config.num_users)
        .map(|_| {
            let x = rng.gen_range(0.0..=config.region_length);
            let y = rng.gen_range(-half..=half);
            (x, y)
        })
        .collect()
}

pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let users = sample_users(config, &mut scenario_rng(seed));
    scenario_from_users(config, &users)
}

pub fn scenario_from_users(config: &ScenarioConfig, users: &[(f64, f64)]) -> Result<Scenario> {
    let layout = build_layout(config, users)?;
    let channel = ChannelMatrix::build(config, &layout);
    let feed = feed_channel(config, &layout);
    Ok(Scenario { layout, channel, feed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    pub outcome: EEOutcome,
    pub active: Vec<usize>,
    /// Candidate positions the scheme actually searched over.
    pub num_positions: usize,
    pub dinkelbach_iterations_total: usize,
}

impl SchemeResult {
    fn infeasible(scheme: SchemeId, config: &ScenarioConfig) -> Self {
        Self {
            scheme,
            outcome: EEOutcome::infeasible(Radiators::pinching(0), config),
            active: Vec::new(),
            num_positions: config.num_positions,
            dinkelbach_iterations_total: 0,
        }
    }
}

/// Runs one scheme on one trial. `scenario` must come from
/// `generate_scenario(config, seed)`.
pub fn run_scheme(
    scheme: SchemeId,
    config: &ScenarioConfig,
    seed: u64,
    scenario: &Scenario,
    exhaustive_cap: usize,
) -> Result<SchemeResult> {
    let l = config.num_positions;
    let matched = |rule: InnerRule| -> Result<SchemeResult> {
        let mut search = MatchingSearch::new(&scenario.channel, config, rule);
        match search.run(&mut matching_rng(seed), |_| {}) {
            Ok(run) => Ok(SchemeResult {
                scheme,
                active: run.state.matching.active_positions(),
                outcome: run.state.outcome,
                num_positions: l,
                dinkelbach_iterations_total: run.dinkelbach_iterations_total,
            }),
            Err(Error::InitializationInfeasible) => Ok(SchemeResult::infeasible(scheme, config)),
            Err(e) => Err(e),
        }
    };
    match scheme {
        SchemeId::Proposed => matched(InnerRule::Optimal),
        SchemeId::MinPower => matched(InnerRule::MinPower),
        SchemeId::Conventional => {
            let sol = conventional_baseline(&scenario.feed, config)?;
            Ok(SchemeResult {
                scheme,
                dinkelbach_iterations_total: sol.trace.iterations,
                outcome: sol.outcome,
                active: Vec::new(),
                num_positions: l,
            })
        }
        SchemeId::Nearest => {
            let (active, sol) = nearest_pa_scheme(&scenario.channel, &scenario.layout, config)?;
            Ok(SchemeResult {
                scheme,
                dinkelbach_iterations_total: sol.trace.iterations,
                outcome: sol.outcome,
                active,
                num_positions: l,
            })
        }
        SchemeId::Exhaustive => {
            let reduced;
            let (cfg, scn) = if l > exhaustive_cap {
                let mut c = config.clone();
                c.num_positions = SWEEP_EXHAUSTIVE_POSITIONS.min(exhaustive_cap);
                reduced = (generate_scenario(&c, seed)?, c);
                (&reduced.1, &reduced.0)
            } else {
                (config, scenario)
            };
            let res = exhaustive_search(&scn.channel, cfg, None, exhaustive_cap)?;
            Ok(SchemeResult {
                scheme,
                outcome: res.solution.outcome.clone(),
                active: res.active.clone(),
                num_positions: cfg.num_positions,
                dinkelbach_iterations_total: res.dinkelbach_iterations_total,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    PtDbm,
    PactDbm,
    L,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::PtDbm => "Pt_dBm",
            SweepVariable::PactDbm => "Pact_dBm",
            SweepVariable::L => "L",
        }
    }

    /// The swept value as recorded in a row.
    pub fn value_of(&self, record: &TrialRecord) -> f64 {
        match self {
            SweepVariable::PtDbm => record.pt_dbm,
            SweepVariable::PactDbm => record.pact_dbm,
            SweepVariable::L => record.l as f64,
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Pt_dBm" | "pt_dbm" | "Pt" => Ok(SweepVariable::PtDbm),
            "Pact_dBm" | "pact_dbm" | "Pact" => Ok(SweepVariable::PactDbm),
            "L" | "l" => Ok(SweepVariable::L),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep variable '{other}' (expected Pt_dBm, Pact_dBm or L)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    pub num_trials: usize,
    pub base_config: ScenarioConfig,
    pub exhaustive_cap: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, base_config: ScenarioConfig) -> Self {
        Self {
            variable,
            values,
            schemes: vec![SchemeId::Proposed],
            num_trials: 100,
            base_config,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn from_config_file(file: &ConfigFile) -> Result<Self> {
        let base = file.scenario()?;
        let variable = file
            .sweep_variable
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("sweep_variable is required for a sweep".into()))?
            .parse()?;
        let values = file
            .sweep_values
            .clone()
            .ok_or_else(|| Error::InvalidConfig("sweep_values is required for a sweep".into()))?;
        let mut spec = SweepSpec::new(variable, values, base);
        if let Some(schemes) = &file.schemes {
            spec.schemes = schemes.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(t) = file.trials {
            spec.num_trials = t;
        }
        if let Some(cap) = file.exhaustive_cap {
            spec.exhaustive_cap = cap;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep_values must not be empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidConfig("sweep_values must be sorted ascending".into()));
        }
        if self.num_trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("at least one scheme is required".into()));
        }
        if self.variable == SweepVariable::L && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::InvalidConfig("L sweep values must be positive integers".into()));
        }
        self.base_config.validate()
    }

    /// Scenario config at one sweep point, with the dBm labels for its rows.
    pub fn point(&self, value: f64) -> Result<(ScenarioConfig, f64, f64)> {
        let mut cfg = self.base_config.clone();
        // dBm labels are rounded so 10^(3/10) mW reads back as 3 dBm
        let mut pt = round_label(cfg.transmit_budget_dbm());
        let mut pact = round_label(cfg.activation_power_dbm());
        match self.variable {
            SweepVariable::PtDbm => {
                cfg.transmit_budget_w = dbm_to_watts(value);
                pt = value;
            }
            SweepVariable::PactDbm => {
                cfg.activation_power_w = dbm_to_watts(value);
                pact = value;
            }
            SweepVariable::L => cfg.num_positions = value as usize,
        }
        cfg.validate()?;
        Ok((cfg, pt, pact))
    }
}

fn round_label(dbm: f64) -> f64 {
    (dbm * 1e9).round() / 1e9
}

/// One row per (sweep point, trial, scheme).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "Pt_dBm")]
    pub pt_dbm: f64,
    #[serde(rename = "Pact_dBm")]
    pub pact_dbm: f64,
    pub scheme: SchemeId,
    /// `None` when infeasible.
    pub ee_bits_per_joule: Option<f64>,
    pub sum_rate_bps: Option<f64>,
    pub n_active: usize,
    pub feasible: bool,
    pub outer_iterations: usize,
    pub dinkelbach_iterations_total: usize,
}

impl TrialRecord {
    pub fn new(seed: u64, config: &ScenarioConfig, pt_dbm: f64, pact_dbm: f64, result: &SchemeResult) -> Self {
        let o = &result.outcome;
        Self {
            seed,
            k: config.num_users,
            l: result.num_positions,
            pt_dbm,
            pact_dbm,
            scheme: result.scheme,
            ee_bits_per_joule: o.feasible.then_some(o.ee),
            sum_rate_bps: o.feasible.then_some(o.sum_rate),
            n_active: o.n_active,
            feasible: o.feasible,
            outer_iterations: o.outer_iterations,
            dinkelbach_iterations_total: result.dinkelbach_iterations_total,
        }
    }
}

/// Runs every (point, trial, scheme) combination in parallel; rows come back
/// sorted by (point, seed, scheme) regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    if spec.schemes.contains(&SchemeId::Exhaustive) {
        let max_l = match spec.variable {
            SweepVariable::L => spec.values.iter().fold(0.0f64, |a, &b| a.max(b)) as usize,
            _ => spec.base_config.num_positions,
        };
        if max_l > spec.exhaustive_cap {
            log::info!(
                "exhaustive rows use L = {} (sweep L = {max_l} exceeds cap {})",
                SWEEP_EXHAUSTIVE_POSITIONS.min(spec.exhaustive_cap),
                spec.exhaustive_cap
            );
        }
    }
    let points = spec.values.iter().map(|&v| spec.point(v)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.num_trials).map(move |t| (p, t)))
        .collect();

    let mut rows = jobs
        .par_iter()
        .map(|&(p, trial)| {
            let (cfg, pt, pact) = &points[p];
            let seed = spec.base_config.seed.wrapping_add(trial as u64);
            let scenario = generate_scenario(cfg, seed)?;
            spec.schemes
                .iter()
                .map(|&scheme| {
                    let res = run_scheme(scheme, cfg, seed, &scenario, spec.exhaustive_cap)?;
                    Ok((p, TrialRecord::new(seed, cfg, *pt, *pact, &res)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    rows.sort_by_key(|r| (r.0, r.1.seed, r.1.scheme));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Aggregate of one (sweep point, scheme) cell over feasible trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub value: f64,
    pub scheme: SchemeId,
    pub mean_ee: f64,
    pub mean_sum_rate: f64,
    pub mean_n_active: f64,
    pub feasible: usize,
    pub infeasible: usize,
}

/// Means over feasible rows only, in sweep-value then scheme order. A cell
/// with no feasible rows reports NaN means.
pub fn summarize(records: &[TrialRecord], variable: SweepVariable) -> Vec<PointSummary> {
    let mut cells: Vec<PointSummary> = Vec::new();
    for r in records {
        let value = variable.value_of(r);
        let idx = match cells.iter().position(|c| c.value == value && c.scheme == r.scheme) {
            Some(i) => i,
            None => {
                cells.push(PointSummary {
                    value,
                    scheme: r.scheme,
                    mean_ee: 0.0,
                    mean_sum_rate: 0.0,
                    mean_n_active: 0.0,
                    feasible: 0,
                    infeasible: 0,
                });
                cells.len() - 1
            }
        };
        let c = &mut cells[idx];
        match (r.feasible, r.ee_bits_per_joule, r.sum_rate_bps) {
            (true, Some(ee), Some(rate)) => {
                c.mean_ee += ee;
                c.mean_sum_rate += rate;
                c.mean_n_active += r.n_active as f64;
                c.feasible += 1;
            }
            _ => c.infeasible += 1,
        }
    }
    for c in &mut cells {
        let n = c.feasible as f64;
        c.mean_ee /= n;
        c.mean_sum_rate /= n;
        c.mean_n_active /= n;
    }
    cells.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.scheme.cmp(&b.scheme)));
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub seed: u64,
    /// 0 for the starting activation, then one per accepted move.
    pub sweep_index: usize,
    pub utility_after_move: f64,
    pub n_active_after_move: usize,
}

/// Utility after every accepted matching move of the proposed scheme.
pub fn run_convergence(config: &ScenarioConfig, seed: u64) -> Result<Vec<ConvergenceRecord>> {
    let scenario = generate_scenario(config, seed)?;
    let mut points: Vec<TracePoint> = Vec::new();
    MatchingSearch::new(&scenario.channel, config, InnerRule::Optimal).run(&mut matching_rng(seed), |s| {
        points.push(TracePoint {
            utility: s.utility,
            n_active: s.matching.len(),
        })
    })?;
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(i, p)| ConvergenceRecord {
            seed,
            sweep_index: i,
            utility_after_move: p.utility,
            n_active_after_move: p.n_active,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn record_fields(r: &TrialRecord) -> [String; 12] {
    [
        r.seed.to_string(),
        r.k.to_string(),
        r.l.to_string(),
        fmt_f64(r.pt_dbm),
        fmt_f64(r.pact_dbm),
        r.scheme.to_string(),
        opt_f64(r.ee_bits_per_joule),
        opt_f64(r.sum_rate_bps),
        r.n_active.to_string(),
        r.feasible.to_string(),
        r.outer_iterations.to_string(),
        r.dinkelbach_iterations_total.to_string(),
    ]
}

pub fn results_to_csv(records: &[TrialRecord]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&record_fields(r).join(","));
        out.push('\n');
    }
    out
}

pub fn results_to_json(records: &[TrialRecord]) -> String {
    let mut out = String::from("[");
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n  {");
        for (j, (key, value)) in CSV_HEADER.iter().zip(record_fields(r)).enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let value = match *key {
                "scheme" => format!("\"{value}\""),
                _ if value.is_empty() => "null".to_string(),
                _ => value,
            };
            let _ = write!(out, "\"{key}\": {value}");
        }
        out.push('}');
    }
    out.push_str(if records.is_empty() { "]\n" } else { "\n]\n" });
    out
}

pub fn write_results(records: &[TrialRecord], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Csv => results_to_csv(records),
        OutputFormat::Json => results_to_json(records),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let parse_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(path).map_err(parse_err)?;
    reader.deserialize().map(|row| row.map_err(parse_err)).collect()
}

pub fn read_results_json(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn convergence_to_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = CONVERGENCE_HEADER.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.seed,
            r.sweep_index,
            fmt_f64(r.utility_after_move),
            r.n_active_after_move
        );
    }
    out
}

pub fn convergence_to_json(records: &[ConvergenceRecord]) -> String {
    let rows: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "  {{\"seed\": {}, \"sweep_index\": {}, \"utility_after_move\": {}, \"n_active_after_move\": {}}}",
                r.seed,
                r.sweep_index,
                fmt_f64(r.utility_after_move),
                r.n_active_after_move
            )
        })
        .collect();
    if rows.is_empty() {
        "[]\n".to_string()
    } else {
        format!("[\n{}\n]\n", rows.join(",\n"))
    }
}

pub fn write_convergence(records: &[ConvergenceRecord], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Csv => convergence_to_csv(records),
        OutputFormat::Json => convergence_to_json(records),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
