//! Reference activation strategies. All of them share the inner power
//! allocator so that EE differences come from the activation choice alone.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{distance, ChannelMatrix, Layout};
use crate::link::{EEOutcome, Radiators};
use crate::matching::{MatchRun, MatchingSearch};
use crate::power_alloc::{solve_for_gains, solve_power_allocation, InnerRule, InnerSolution};

/// Default largest `L` for which exhaustive search is allowed.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    Proposed,
    Conventional,
    MinPower,
    Nearest,
    Exhaustive,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Proposed,
        SchemeId::Conventional,
        SchemeId::MinPower,
        SchemeId::Nearest,
        SchemeId::Exhaustive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Conventional => "conventional",
            SchemeId::MinPower => "min_power",
            SchemeId::Nearest => "nearest",
            SchemeId::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "proposed" | "prop" => Ok(SchemeId::Proposed),
            "conventional" => Ok(SchemeId::Conventional),
            "min_power" | "minpower" => Ok(SchemeId::MinPower),
            "nearest" => Ok(SchemeId::Nearest),
            "exhaustive" => Ok(SchemeId::Exhaustive),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

/// One antenna mounted at the feed point: free-space loss only, the
/// transmit budget is not split, and no activation power is billed.
pub fn conventional_baseline(feed_channel: &[Complex64], config: &ScenarioConfig) -> Result<InnerSolution> {
    let gains: Vec<f64> = feed_channel.iter().map(|g| g.norm_sqr()).collect();
    solve_for_gains(&gains, Radiators::conventional(), config, InnerRule::Optimal)
}

/// Matching search whose inner layer pins every user to its minimum rate.
pub fn min_power_scheme<R: Rng + ?Sized>(
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<MatchRun> {
    MatchingSearch::new(channel, config, InnerRule::MinPower).run(rng, |_| {})
}

/// Positions closest (3-D distance) to each user, de-duplicated and sorted.
pub fn nearest_positions(layout: &Layout) -> Vec<usize> {
    let mut chosen: Vec<usize> = layout
        .user_positions
        .iter()
        .map(|u| {
            layout
                .candidate_positions
                .iter()
                .enumerate()
                .min_by(|(ia, a), (ib, b)| distance(u, a).total_cmp(&distance(u, b)).then(ia.cmp(ib)))
                .map(|(i, _)| i)
                .expect("layout has at least one candidate")
        })
        .collect();
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

pub fn nearest_pa_scheme(
    channel: &ChannelMatrix,
    layout: &Layout,
    config: &ScenarioConfig,
) -> Result<(Vec<usize>, InnerSolution)> {
    let active = nearest_positions(layout);
    let solution = solve_power_allocation(&active, channel, config)?;
    Ok((active, solution))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub active: Vec<usize>,
    pub solution: InnerSolution,
    pub subsets_evaluated: usize,
    pub dinkelbach_iterations_total: usize,
}

impl ExhaustiveResult {
    pub fn outcome(&self) -> &EEOutcome {
        &self.solution.outcome
    }
}

/// Higher EE first, then fewer activated PAs, then the lexicographically
/// smaller position set.
fn rank(a: &(Vec<usize>, InnerSolution), b: &(Vec<usize>, InnerSolution)) -> Ordering {
    a.1.utility()
        .total_cmp(&b.1.utility())
        .then_with(|| b.0.len().cmp(&a.0.len()))
        .then_with(|| b.0.cmp(&a.0))
}

/// Evaluates every non-empty activation set of at most `max_subset_size`
/// positions (all of them when `None`). Refuses when `L > cap`.
pub fn exhaustive_search(
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
    max_subset_size: Option<usize>,
    cap: usize,
) -> Result<ExhaustiveResult> {
    let positions = channel.num_positions();
    if positions > cap || positions >= 32 {
        return Err(Error::SearchSpaceTooLarge { positions, cap });
    }
    let max_size = max_subset_size.unwrap_or(positions).min(positions);
    let masks: Vec<u32> = (1u32..(1u32 << positions))
        .filter(|m| m.count_ones() as usize <= max_size)
        .collect();

    let evaluated = masks
        .par_iter()
        .map(|&mask| {
            let active: Vec<usize> = (0..positions).filter(|l| mask & (1 << l) != 0).collect();
            let solution = solve_power_allocation(&active, channel, config)?;
            Ok((active, solution))
        })
        .collect::<Result<Vec<_>>>()?;

    let dinkelbach_iterations_total = evaluated.iter().map(|(_, s)| s.trace.iterations).sum();
    let subsets_evaluated = evaluated.len();
    let (active, solution) = evaluated
        .into_iter()
        .max_by(rank)
        .expect("at least one subset when L >= 1");
    Ok(ExhaustiveResult {
        active,
        solution,
        subsets_evaluated,
        dinkelbach_iterations_total,
    })
}
