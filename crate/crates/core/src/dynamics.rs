//! Coalition better-response dynamics: applies sequences of weak considerate
//! improving moves under pluggable schedulers, with exact cycle detection
//! and oracle-confirmed convergence.
//!
//! Runs terminate in one of four ways: the state is confirmed immune to
//! weak considerate improving clique moves (`ConvergedCe`), a previously
//! visited player-labeled state recurs (`Cycle`), a scripted proposal fails
//! validation (`InvalidMove`), or some budget — steps, schedule, or oracle
//! search — runs out before a verdict (`BudgetExhausted`). Convergence is
//! never claimed without an exhaustive oracle check, and cycles are keyed on
//! the full assignment vector, not load profiles, so permuting players never
//! reports a spurious cycle.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::game::{load_profile, player_cost, GameInstance, Player, Resource, State};
use crate::moves::{apply_deviation, classify_move, Deviation};
use crate::oracle::{find_weak_considerate_clique_move, Budget};
use crate::social::{enumerate_cliques, partition_classes, SocialGraph};

/// How many random (clique, replacement vector) probes the random scheduler
/// attempts before falling back to the exhaustive oracle.
const RANDOM_PROBE_LIMIT: usize = 200;

// ============================================================================
// Traces and schedulers
// ============================================================================

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The final state provably admits no weak considerate improving clique
    /// move (exhaustive oracle check within budget).
    ConvergedCe,
    /// The state after step `first_repeat_index + period` equals the state
    /// after step `first_repeat_index` (index 0 is the initial state).
    Cycle { first_repeat_index: usize, period: usize },
    /// Steps, schedule, or oracle budget ran out before any verdict.
    BudgetExhausted,
    /// The scripted proposal at this schedule index failed validation.
    InvalidMove { index: usize },
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::ConvergedCe => write!(f, "converged_ce"),
            Outcome::Cycle { first_repeat_index, period } => {
                write!(f, "cycle first_repeat={first_repeat_index} period={period}")
            }
            Outcome::BudgetExhausted => write!(f, "budget_exhausted"),
            Outcome::InvalidMove { index } => write!(f, "invalid_move index={index}"),
        }
    }
}

/// One applied move and the state it produced.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub dev: Deviation,
    pub state: State,
}

/// Complete record of a run. Every recorded deviation classified as weak
/// considerate improving at its predecessor state.
#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: State,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl Trace {
    #[must_use]
    pub fn final_state(&self) -> &State {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }
}

/// Move source for a run.
#[derive(Debug, Clone)]
pub enum Scheduler {
    /// Proposes the given deviations in order; each is validated before
    /// application and an invalid one aborts the run.
    Scripted(Vec<Deviation>),
    /// Draws a uniformly random enumerated clique and a uniformly random
    /// non-identity replacement vector, retrying until a valid move is found
    /// or the probe limit triggers an exhaustive check. Reproducible: the
    /// same seed and inputs yield the identical trace.
    RandomClique { seed: u64 },
    /// Always applies the oracle's first move in deterministic order.
    ExhaustiveFirst,
}

// ============================================================================
// Running dynamics
// ============================================================================

struct CycleDetector {
    seen: HashMap<Vec<Resource>, usize>,
}

impl CycleDetector {
    fn new(initial: &State) -> Self {
        let mut seen = HashMap::new();
        seen.insert(initial.assignment().to_vec(), 0);
        Self { seen }
    }

    /// Records a state with its index; returns the index of the earlier
    /// visit if this exact assignment was seen before.
    fn check(&mut self, state: &State, index: usize) -> Option<usize> {
        match self.seen.entry(state.assignment().to_vec()) {
            std::collections::hash_map::Entry::Occupied(e) => Some(*e.get()),
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(index);
                None
            }
        }
    }
}

/// Runs coalition dynamics from `initial` until convergence, a cycle, an
/// invalid scripted move, or budget exhaustion — whichever comes first.
/// `max_steps` bounds the number of applied moves; the oracle `budget`
/// bounds each convergence check.
pub fn run_dynamics(
    instance: &GameInstance,
    graph: &SocialGraph,
    initial: &State,
    scheduler: &Scheduler,
    max_steps: usize,
    budget: &Budget,
) -> Result<Trace> {
    if max_steps == 0 {
        return Err(Error::Contract("dynamics needs max_steps >= 1".into()));
    }
    let mut trace =
        Trace { initial: initial.clone(), steps: Vec::new(), outcome: Outcome::BudgetExhausted };
    let mut detector = CycleDetector::new(initial);

    // Scheduler-specific mutable state.
    let mut schedule_pos = 0usize;
    let mut rng_and_cliques = match scheduler {
        Scheduler::RandomClique { seed } => {
            let cliques =
                match enumerate_cliques(graph, instance.players(), budget.max_cliques) {
                    Ok(c) => c,
                    Err(_) => {
                        // Cannot even enumerate the move space.
                        trace.outcome = Outcome::BudgetExhausted;
                        return Ok(trace);
                    }
                };
            Some((ChaCha8Rng::seed_from_u64(*seed), cliques))
        }
        _ => None,
    };

    loop {
        if trace.steps.len() == max_steps {
            // Step budget spent; one last oracle look decides between honest
            // exhaustion and a state that genuinely converged on the final
            // step.
            trace.outcome =
                match find_weak_considerate_clique_move(instance, graph, trace.final_state(), budget)
                {
                    Ok(None) => Outcome::ConvergedCe,
                    _ => Outcome::BudgetExhausted,
                };
            return Ok(trace);
        }

        let state = trace.final_state().clone();
        let proposal: Deviation = match scheduler {
            Scheduler::Scripted(schedule) => {
                if schedule_pos == schedule.len() {
                    // Schedule dry: report convergence only if the oracle
                    // confirms it; otherwise the schedule was too short.
                    trace.outcome =
                        match find_weak_considerate_clique_move(instance, graph, &state, budget) {
                            Ok(None) => Outcome::ConvergedCe,
                            _ => Outcome::BudgetExhausted,
                        };
                    return Ok(trace);
                }
                let dev = schedule[schedule_pos].clone();
                let class = classify_move(instance, graph, &state, &dev)?;
                if !class.weak_considerate_improving {
                    trace.outcome = Outcome::InvalidMove { index: schedule_pos };
                    return Ok(trace);
                }
                schedule_pos += 1;
                dev
            }
            Scheduler::RandomClique { .. } => {
                let (rng, cliques) =
                    rng_and_cliques.as_mut().expect("random scheduler state initialized");
                match random_probe(instance, graph, &state, rng, cliques.iter().collect())? {
                    Some(dev) => dev,
                    None => {
                        // Probes failed; ask the oracle. A found move keeps
                        // the run alive, since random probing gives no
                        // completeness guarantee.
                        match find_weak_considerate_clique_move(instance, graph, &state, budget) {
                            Ok(None) => {
                                trace.outcome = Outcome::ConvergedCe;
                                return Ok(trace);
                            }
                            Ok(Some(dev)) => dev,
                            Err(_) => {
                                trace.outcome = Outcome::BudgetExhausted;
                                return Ok(trace);
                            }
                        }
                    }
                }
            }
            Scheduler::ExhaustiveFirst => {
                match find_weak_considerate_clique_move(instance, graph, &state, budget) {
                    Ok(None) => {
                        trace.outcome = Outcome::ConvergedCe;
                        return Ok(trace);
                    }
                    Ok(Some(dev)) => dev,
                    Err(_) => {
                        trace.outcome = Outcome::BudgetExhausted;
                        return Ok(trace);
                    }
                }
            }
        };

        let next = apply_deviation(instance, &state, &proposal)?;
        trace.steps.push(TraceStep { dev: proposal, state: next });
        let index = trace.steps.len();
        if let Some(first) = detector.check(trace.final_state(), index) {
            trace.outcome = Outcome::Cycle { first_repeat_index: first, period: index - first };
            return Ok(trace);
        }
    }
}

/// Draws random (clique, replacement vector) pairs until one classifies as
/// weak considerate improving; `None` after the probe limit.
fn random_probe(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    rng: &mut ChaCha8Rng,
    cliques: Vec<&[Player]>,
) -> Result<Option<Deviation>> {
    if cliques.is_empty() {
        return Ok(None);
    }
    let m = instance.resources();
    for _ in 0..RANDOM_PROBE_LIMIT {
        let members = cliques[rng.gen_range(0..cliques.len())];
        let targets: Vec<Resource> = members.iter().map(|_| rng.gen_range(0..m)).collect();
        let identity =
            members.iter().zip(&targets).all(|(&i, &t)| state.resource_of(i) == t);
        if identity {
            continue;
        }
        let dev = Deviation::from_pairs(members.iter().copied().zip(targets))?;
        let class = classify_move(instance, graph, state, &dev)?;
        if class.weak_considerate_improving {
            return Ok(Some(dev));
        }
    }
    Ok(None)
}

// ============================================================================
// Partition-class cost accounting
// ============================================================================

/// Change in the total cost of the deviating coalition's whole partition
/// class: (class cost sum after) − (class cost sum before).
///
/// Requires the graph to be a disjoint union of cliques, the coalition to
/// lie inside a single class, and the move to classify as weak considerate
/// improving (which is what makes the delta provably negative: members and
/// class mates are all no-worse, and at least one member strictly gains).
pub fn partition_move_check(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    dev: &Deviation,
) -> Result<i128> {
    let Some(classes) = partition_classes(graph) else {
        return Err(Error::Contract(
            "partition accounting requires a graph that is a disjoint union of cliques".into(),
        ));
    };
    let members = dev.coalition_vec();
    let class = classes
        .iter()
        .find(|c| c.contains(&members[0]))
        .expect("every player belongs to a partition class");
    if !members.iter().all(|i| class.contains(i)) {
        return Err(Error::Contract(
            "the deviating coalition spans more than one partition class".into(),
        ));
    }
    let classification = classify_move(instance, graph, state, dev)?;
    if !classification.weak_considerate_improving {
        return Err(Error::Contract(
            "partition accounting requires a weak considerate improving move".into(),
        ));
    }

    let after = apply_deviation(instance, state, dev)?;
    let loads_before = load_profile(instance, state);
    let loads_after = load_profile(instance, &after);
    let mut delta: i128 = 0;
    for &i in class {
        delta += i128::from(player_cost(instance, &after, &loads_after, i));
        delta -= i128::from(player_cost(instance, state, &loads_before, i));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tiny_linear_game;
    use crate::oracle::classify_state;

    #[test]
    fn ce_input_converges_immediately() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::ExhaustiveFirst,
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::ConvergedCe);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn exhaustive_scheduler_reaches_equilibrium() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::ExhaustiveFirst,
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::ConvergedCe);
        assert!(!trace.steps.is_empty());
        let report = classify_state(&g, &graph, trace.final_state(), &Budget::default());
        assert!(report.ce.is_yes());
    }

    #[test]
    fn every_recorded_step_was_weak_considerate_improving() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1)]).unwrap();
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::RandomClique { seed: 7 },
            100,
            &Budget::default(),
        )
        .unwrap();
        let mut state = trace.initial.clone();
        for step in &trace.steps {
            let class = classify_move(&g, &graph, &state, &step.dev).unwrap();
            assert!(class.weak_considerate_improving);
            state = apply_deviation(&g, &state, &step.dev).unwrap();
            assert_eq!(state.assignment(), step.state.assignment());
        }
    }

    #[test]
    fn random_scheduler_is_deterministic_per_seed() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let run = |seed: u64| {
            run_dynamics(
                &g,
                &graph,
                &s,
                &Scheduler::RandomClique { seed },
                100,
                &Budget::default(),
            )
            .unwrap()
        };
        let (a, b) = (run(11), run(11));
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.state.assignment(), y.state.assignment());
            assert_eq!(x.dev, y.dev);
        }
    }

    #[test]
    fn scripted_invalid_move_reports_schedule_index() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        // First move is a genuine improvement; the second piles a player
        // onto the fuller resource, which is strictly worse.
        let good = Deviation::from_pairs([(0, 1)]).unwrap();
        let bad = Deviation::from_pairs([(1, 1)]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::Scripted(vec![good, bad]),
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::InvalidMove { index: 1 });
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn scripted_identity_move_is_invalid() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let identity = Deviation::from_pairs([(0, 0)]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::Scripted(vec![identity]),
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::InvalidMove { index: 0 });
    }

    #[test]
    fn scripted_dry_schedule_at_equilibrium_converges() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::Scripted(Vec::new()),
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::ConvergedCe);
    }

    #[test]
    fn scripted_dry_schedule_short_of_equilibrium_exhausts() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::Scripted(Vec::new()),
            100,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.outcome, Outcome::BudgetExhausted);
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        // From (0,0,0) the exhaustive scheduler needs one move to rebalance;
        // max_steps = 1 lets it make that move, after which the final-state
        // check confirms convergence. With a state needing two moves and
        // max_steps = 1, the outcome is exhaustion.
        let g = GameInstance::uniform(4, 2, vec![1, 2, 3, 4]).unwrap();
        let graph = SocialGraph::empty(4);
        let s = State::new(&g, vec![0, 0, 0, 0]).unwrap();
        let trace = run_dynamics(
            &g,
            &graph,
            &s,
            &Scheduler::ExhaustiveFirst,
            1,
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.outcome, Outcome::BudgetExhausted);
    }

    #[test]
    fn zero_step_budget_is_a_contract_error() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        assert!(matches!(
            run_dynamics(&g, &graph, &s, &Scheduler::ExhaustiveFirst, 0, &Budget::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn partition_delta_on_identical_linear_delays() {
        // Two adjacent players both on r0 of two identical d(x) = x
        // resources: class cost 2 + 2; after one member moves over, 1 + 1.
        let g = GameInstance::uniform(2, 2, vec![1, 2]).unwrap();
        let graph = SocialGraph::from_edges(2, &[(0, 1)]).unwrap();
        let s = State::new(&g, vec![0, 0]).unwrap();
        let dev = Deviation::from_pairs([(0, 1)]).unwrap();
        let delta = partition_move_check(&g, &graph, &s, &dev).unwrap();
        assert_eq!(delta, -2);
    }

    #[test]
    fn partition_check_rejects_cross_class_coalitions() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1)]).unwrap(); // {0,1} + {2}
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let dev = Deviation::from_pairs([(0, 1), (2, 1)]).unwrap();
        assert!(matches!(
            partition_move_check(&g, &graph, &s, &dev),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn partition_check_rejects_non_clique_partition() {
        let g = tiny_linear_game();
        let path = SocialGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let dev = Deviation::from_pairs([(0, 1)]).unwrap();
        assert!(matches!(
            partition_move_check(&g, &path, &s, &dev),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn partition_check_rejects_non_improving_moves() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1)]).unwrap();
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        // Player 1 joining the fuller resource is strictly worse.
        let dev = Deviation::from_pairs([(1, 0)]).unwrap();
        assert!(matches!(
            partition_move_check(&g, &graph, &s, &dev),
            Err(Error::Contract(_))
        ));
    }
}
