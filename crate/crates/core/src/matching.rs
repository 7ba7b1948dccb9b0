//! Pinching-antenna activation by one-sided one-to-one matching.
//!
//! PA labels `0..N_m` are matched to candidate positions `0..L` (at most one
//! position per label, at most one label per position). A label may be
//! moved to any free position, activated there if it was unassigned, or
//! switched off. Starting from a random activation, the search sweeps
//! labels and positions in ascending order and applies every move that
//! strictly raises the energy efficiency of the resulting activation set,
//! until a full sweep changes nothing.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::ChannelMatrix;
use crate::link::{EEOutcome, PowerAllocation, Radiators};
use crate::power_alloc::{solve_with_rule, DinkelbachTrace, InnerRule, InnerSolution};

/// Maximum number of full sweeps, as a multiple of the label count.
pub const SWEEP_CAP_PER_LABEL: usize = 10;

/// Injective partial map from PA labels to candidate positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<Option<usize>>,
    occupant: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(num_labels: usize, num_positions: usize) -> Self {
        Self {
            assignment: vec![None; num_labels],
            occupant: vec![None; num_positions],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<usize>>, num_positions: usize) -> Result<Self> {
        let mut m = Self::empty(assignment.len(), num_positions);
        for (label, pos) in assignment.into_iter().enumerate() {
            if let Some(pos) = pos {
                if pos >= num_positions {
                    return Err(Error::PositionOutOfRange {
                        index: pos,
                        len: num_positions,
                    });
                }
                if m.occupant[pos].is_some() {
                    return Err(Error::InvalidConfig(format!(
                        "position {pos} assigned to more than one label"
                    )));
                }
                m.assignment[label] = Some(pos);
                m.occupant[pos] = Some(label);
            }
        }
        Ok(m)
    }

    pub fn num_labels(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_positions(&self) -> usize {
        self.occupant.len()
    }

    pub fn position_of(&self, label: usize) -> Option<usize> {
        self.assignment[label]
    }

    pub fn occupant(&self, position: usize) -> Option<usize> {
        self.occupant[position]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// Occupied positions in ascending order.
    pub fn active_positions(&self) -> Vec<usize> {
        self.occupant
            .iter()
            .enumerate()
            .filter_map(|(pos, o)| o.map(|_| pos))
            .collect()
    }

    /// Number of activated PAs, `|Φ|`.
    pub fn len(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.iter().all(Option::is_none)
    }

    /// Copy with `label` placed at the free `position` (activation or
    /// relocation).
    pub fn with_placement(&self, label: usize, position: usize) -> Self {
        debug_assert!(self.occupant[position].is_none());
        let mut next = self.clone();
        if let Some(old) = next.assignment[label] {
            next.occupant[old] = None;
        }
        next.assignment[label] = Some(position);
        next.occupant[position] = Some(label);
        next
    }

    /// Copy with `label` switched off.
    pub fn without(&self, label: usize) -> Self {
        let mut next = self.clone();
        if let Some(old) = next.assignment[label].take() {
            next.occupant[old] = None;
        }
        next
    }

    /// Checks both directions of the label/position bookkeeping.
    pub fn is_valid(&self) -> bool {
        let forward = self.assignment.iter().enumerate().all(|(label, pos)| match pos {
            Some(p) => *p < self.occupant.len() && self.occupant[*p] == Some(label),
            None => true,
        });
        let backward = self.occupant.iter().enumerate().all(|(pos, label)| match label {
            Some(n) => *n < self.assignment.len() && self.assignment[*n] == Some(pos),
            None => true,
        });
        forward && backward
    }
}

/// All matchings reachable from `matching` by one move of `label`.
pub fn candidate_moves(matching: &Matching, label: usize) -> Vec<Matching> {
    (0..matching.num_positions())
        .filter_map(|pos| move_at(matching, label, pos))
        .collect()
}

/// The move considered for `(label, position)`: placement when the position
/// is free, removal when the label already sits there.
fn move_at(matching: &Matching, label: usize, position: usize) -> Option<Matching> {
    match matching.occupant(position) {
        None => Some(matching.with_placement(label, position)),
        Some(o) if o == label => Some(matching.without(label)),
        Some(_) => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchState {
    pub matching: Matching,
    /// User indices in SIC order for the current activation.
    pub sic_order: Vec<usize>,
    /// Energy efficiency, negative infinity when empty or infeasible.
    pub utility: f64,
    pub alpha_star: Option<PowerAllocation>,
    pub outcome: EEOutcome,
    pub trace: DinkelbachTrace,
}

impl MatchState {
    fn new(matching: Matching, solution: &InnerSolution) -> Self {
        Self {
            matching,
            sic_order: solution.sic_order.clone(),
            utility: solution.utility(),
            alpha_star: solution.allocation.clone(),
            outcome: solution.outcome.clone(),
            trace: solution.trace.clone(),
        }
    }
}

/// Memoized inner-layer evaluations keyed by the active position set.
pub struct UtilityEvaluator<'a> {
    channel: &'a ChannelMatrix,
    config: &'a ScenarioConfig,
    rule: InnerRule,
    cache: HashMap<Vec<usize>, Rc<InnerSolution>>,
    inner_solves: usize,
    dinkelbach_iterations: usize,
}

impl<'a> UtilityEvaluator<'a> {
    pub fn new(channel: &'a ChannelMatrix, config: &'a ScenarioConfig, rule: InnerRule) -> Self {
        Self {
            channel,
            config,
            rule,
            cache: HashMap::new(),
            inner_solves: 0,
            dinkelbach_iterations: 0,
        }
    }

    pub fn evaluate(&mut self, matching: &Matching) -> Result<Rc<InnerSolution>> {
        let active = matching.active_positions();
        if let Some(hit) = self.cache.get(&active) {
            return Ok(Rc::clone(hit));
        }
        let solution = if active.is_empty() {
            InnerSolution {
                sic_order: (0..self.channel.num_users()).collect(),
                allocation: None,
                outcome: EEOutcome::infeasible(Radiators::pinching(0), self.config),
                trace: DinkelbachTrace::default(),
            }
        } else {
            self.inner_solves += 1;
            let s = solve_with_rule(&active, self.channel, self.config, self.rule)?;
            self.dinkelbach_iterations += s.trace.iterations;
            s
        };
        let solution = Rc::new(solution);
        self.cache.insert(active, Rc::clone(&solution));
        Ok(solution)
    }

    pub fn state(&mut self, matching: Matching) -> Result<MatchState> {
        let solution = self.evaluate(&matching)?;
        Ok(MatchState::new(matching, &solution))
    }

    /// Returns the candidate's state iff it strictly improves on `current`.
    pub fn improvement(&mut self, current: &MatchState, candidate: Matching) -> Result<Option<MatchState>> {
        let solution = self.evaluate(&candidate)?;
        if solution.utility() > current.utility {
            Ok(Some(MatchState::new(candidate, &solution)))
        } else {
            Ok(None)
        }
    }

    pub fn accept_if_better(&mut self, current: MatchState, candidate: Matching) -> Result<MatchState> {
        Ok(self.improvement(&current, candidate)?.unwrap_or(current))
    }

    /// Every inner solution computed so far, keyed by active set.
    pub fn solutions(&self) -> impl Iterator<Item = (&Vec<usize>, &InnerSolution)> {
        self.cache.iter().map(|(k, v)| (k, v.as_ref()))
    }

    /// Distinct activation sets passed to the inner solver so far.
    pub fn inner_solves(&self) -> usize {
        self.inner_solves
    }

    pub fn dinkelbach_iterations(&self) -> usize {
        self.dinkelbach_iterations
    }
}

/// Energy efficiency of a matching under the optimal inner allocation.
pub fn utility(matching: &Matching, channel: &ChannelMatrix, config: &ScenarioConfig) -> Result<f64> {
    Ok(UtilityEvaluator::new(channel, config, InnerRule::Optimal)
        .evaluate(matching)?
        .utility())
}

pub fn accept_if_better(
    current: MatchState,
    candidate: Matching,
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
) -> Result<MatchState> {
    UtilityEvaluator::new(channel, config, InnerRule::Optimal).accept_if_better(current, candidate)
}

/// True when no single move of any label strictly improves the utility.
pub fn is_core_stable(state: &MatchState, channel: &ChannelMatrix, config: &ScenarioConfig) -> Result<bool> {
    is_core_stable_with(state, &mut UtilityEvaluator::new(channel, config, InnerRule::Optimal))
}

pub fn is_core_stable_with(state: &MatchState, evaluator: &mut UtilityEvaluator<'_>) -> Result<bool> {
    for label in 0..state.matching.num_labels() {
        for candidate in candidate_moves(&state.matching, label) {
            if evaluator.evaluate(&candidate)?.utility() > state.utility {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub utility: f64,
    pub n_active: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRun {
    pub state: MatchState,
    pub initial_matching: Matching,
    pub initial_utility: f64,
    /// True when the random start was infeasible and replaced by the best
    /// single-position activation.
    pub reseeded: bool,
    /// Full sweeps performed, including the final one that found no move.
    pub outer_iterations: usize,
    /// Utility and activation count after every accepted move.
    pub accepted: Vec<TracePoint>,
    /// Candidate matchings examined in each sweep.
    pub evaluations_per_sweep: Vec<usize>,
    pub inner_solves: usize,
    pub dinkelbach_iterations_total: usize,
}

pub struct MatchingSearch<'a> {
    channel: &'a ChannelMatrix,
    config: &'a ScenarioConfig,
    evaluator: UtilityEvaluator<'a>,
}

impl<'a> MatchingSearch<'a> {
    pub fn new(channel: &'a ChannelMatrix, config: &'a ScenarioConfig, rule: InnerRule) -> Self {
        Self {
            channel,
            config,
            evaluator: UtilityEvaluator::new(channel, config, rule),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.channel.num_positions()
    }

    /// `min(K, L)` labels placed on positions drawn without replacement.
    pub fn random_matching<R: Rng + ?Sized>(&self, rng: &mut R) -> Matching {
        let positions = self.channel.num_positions();
        let count = self.config.num_users.min(positions);
        let mut m = Matching::empty(self.num_labels(), positions);
        for (label, pos) in rand::seq::index::sample(rng, positions, count).into_iter().enumerate() {
            m = m.with_placement(label, pos);
        }
        m
    }

    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R, observer: impl FnMut(&MatchState)) -> Result<MatchRun> {
        let start = self.random_matching(rng);
        self.run_from(start, observer)
    }

    /// Runs the sweeps from `start`. `observer` sees the initial state and
    /// every accepted state.
    pub fn run_from(&mut self, start: Matching, mut observer: impl FnMut(&MatchState)) -> Result<MatchRun> {
        let mut state = self.evaluator.state(start)?;
        let mut reseeded = false;
        if state.utility == f64::NEG_INFINITY {
            state = self.best_single()?;
            reseeded = true;
        }
        let initial_matching = state.matching.clone();
        let initial_utility = state.utility;
        observer(&state);

        let labels = self.num_labels();
        let positions = self.channel.num_positions();
        let cap = SWEEP_CAP_PER_LABEL * labels.max(1);
        let mut accepted = Vec::new();
        let mut evaluations_per_sweep = Vec::new();
        for sweep in 1..=cap {
            let mut evaluations = 0;
            let mut moved = false;
            for label in 0..labels {
                for pos in 0..positions {
                    let Some(candidate) = move_at(&state.matching, label, pos) else {
                        continue;
                    };
                    evaluations += 1;
                    if let Some(next) = self.evaluator.improvement(&state, candidate)? {
                        state = next;
                        moved = true;
                        accepted.push(TracePoint {
                            utility: state.utility,
                            n_active: state.matching.len(),
                        });
                        observer(&state);
                    }
                }
            }
            evaluations_per_sweep.push(evaluations);
            if !moved {
                state.outcome.outer_iterations = sweep;
                return Ok(MatchRun {
                    state,
                    initial_matching,
                    initial_utility,
                    reseeded,
                    outer_iterations: sweep,
                    accepted,
                    evaluations_per_sweep,
                    inner_solves: self.evaluator.inner_solves(),
                    dinkelbach_iterations_total: self.evaluator.dinkelbach_iterations(),
                });
            }
        }
        Err(Error::MatchingSweepCap { sweeps: cap })
    }

    /// Best feasible activation of a single position (ties to the lowest
    /// position).
    fn best_single(&mut self) -> Result<MatchState> {
        let mut best: Option<MatchState> = None;
        for pos in 0..self.channel.num_positions() {
            let m = Matching::empty(self.num_labels(), self.channel.num_positions()).with_placement(0, pos);
            let s = self.evaluator.state(m)?;
            if s.utility > best.as_ref().map_or(f64::NEG_INFINITY, |b| b.utility) {
                best = Some(s);
            }
        }
        best.ok_or(Error::InitializationInfeasible)
    }

    pub fn evaluator(&mut self) -> &mut UtilityEvaluator<'a> {
        &mut self.evaluator
    }
}

/// Matching search with the optimal inner allocation.
pub fn run_matching<R: Rng + ?Sized>(
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<MatchRun> {
    MatchingSearch::new(channel, config, InnerRule::Optimal).run(rng, |_| {})
}
