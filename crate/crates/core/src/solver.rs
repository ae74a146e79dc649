//! Constructive solver: from any instance to a state that is both a Nash
//! equilibrium and immune to weak considerate improving clique moves.
//!
//! The procedure builds a Nash equilibrium greedily, then repeatedly moves a
//! single player from a "high" resource (one realizing the maximum player
//! cost `d_max`) to a "low" resource (one whose delay would reach exactly
//! `d_max` if one more player arrived) whenever that player keeps strictly
//! more neighbors on its current resource than it would find on the target
//! (step 2), or keeps equally many but the move strictly shrinks the delay
//! sum (step 3). Every intermediate state stays a Nash equilibrium, and an
//! exact integer potential drops with every move, so the loop terminates.
//! When neither step applies, no clique of the social graph has a weak
//! considerate improving move left.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{load_profile, player_cost, Cost, GameInstance, Player, Resource, State};
use crate::social::{own_resource_neighbors, same_resource_neighbors, SocialGraph};

// ============================================================================
// Nash equilibria
// ============================================================================

/// True iff no single player can strictly lower its cost by switching
/// resources.
#[must_use]
pub fn is_nash(instance: &GameInstance, state: &State) -> bool {
    let loads = load_profile(instance, state);
    for i in 0..instance.players() {
        let cost = player_cost(instance, state, &loads, i);
        for r in 0..instance.resources() {
            if r == state.resource_of(i) {
                continue;
            }
            // Entering r raises its load by one; the mover's old resource
            // only gets lighter, so this comparison is exact.
            if instance.delay(r, loads.load(r) + 1) < cost {
                return false;
            }
        }
    }
    true
}

/// Builds a Nash equilibrium by inserting players `0..n` one at a time, each
/// picking a resource with the cheapest entry delay (ties break toward the
/// lowest resource index). With strictly increasing delays the result is
/// always a Nash equilibrium; the solver re-checks that property anyway.
#[must_use]
pub fn greedy_nash(instance: &GameInstance) -> State {
    let mut loads = vec![0usize; instance.resources()];
    let mut assignment = Vec::with_capacity(instance.players());
    for _ in 0..instance.players() {
        let best = (0..instance.resources())
            .min_by_key(|&r| instance.delay(r, loads[r] + 1))
            .expect("instance has at least one resource");
        loads[best] += 1;
        assignment.push(best);
    }
    State::new(instance, assignment).expect("greedy assignment is in range")
}

// ============================================================================
// High/low classification
// ============================================================================

/// Resources of a Nash equilibrium split by their relation to the maximum
/// player cost `d_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceClassification {
    /// Maximum cost any player pays in the state.
    pub d_max: Cost,
    /// Used resources whose current delay is exactly `d_max`.
    pub high: Vec<Resource>,
    /// Resources below `d_max` (or empty) that would hit exactly `d_max`
    /// with one more player. An unused resource with `d_r(1) = d_max`
    /// qualifies.
    pub low: Vec<Resource>,
    /// Everything else.
    pub other: Vec<Resource>,
}

impl ResourceClassification {
    #[must_use]
    pub fn is_high(&self, r: Resource) -> bool {
        self.high.binary_search(&r).is_ok()
    }

    #[must_use]
    pub fn is_low(&self, r: Resource) -> bool {
        self.low.binary_search(&r).is_ok()
    }
}

/// Splits resources into high/low/other at a Nash equilibrium.
/// Calling this on a non-equilibrium state is a contract violation.
pub fn classify_resources(
    instance: &GameInstance,
    state: &State,
) -> Result<ResourceClassification> {
    if !is_nash(instance, state) {
        return Err(Error::Contract(
            "classify_resources requires a Nash equilibrium".into(),
        ));
    }
    let loads = load_profile(instance, state);
    let d_max = (0..instance.players())
        .map(|i| player_cost(instance, state, &loads, i))
        .max()
        .expect("instance has at least one player");

    let n = instance.players();
    let mut high = Vec::new();
    let mut low = Vec::new();
    let mut other = Vec::new();
    for r in 0..instance.resources() {
        let l = loads.load(r);
        if l > 0 && instance.delay(r, l) == d_max {
            high.push(r);
        } else if l < n && instance.delay(r, l + 1) == d_max {
            // Empty resources count as strictly below d_max here; used ones
            // are below d_max because they are not high and the state is an
            // equilibrium.
            low.push(r);
        } else {
            other.push(r);
        }
    }
    Ok(ResourceClassification { d_max, high, low, other })
}

// ============================================================================
// Witness moves
// ============================================================================

/// Which rule of the process produced a witness move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Strictly fewer same-resource neighbors on the target low resource.
    Step2,
    /// Equal neighbor counts, but the move strictly shrinks the delay sum.
    Step3,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessKind::Step2 => write!(f, "step2"),
            WitnessKind::Step3 => write!(f, "step3"),
        }
    }
}

/// A single-player move from a high resource to a low one, as selected by
/// the process. Witness moves are process steps, not improving moves: the
/// mover's own cost stays exactly `d_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessMove {
    pub player: Player,
    pub from: Resource,
    pub to: Resource,
    pub kind: WitnessKind,
}

/// Delay contribution of a resource under a hypothetical load, with empty
/// resources contributing zero. This is the quantity the potential's delay
/// term sums, so comparing contributions decides step 3.
fn delay_contrib(instance: &GameInstance, r: Resource, load: usize) -> Cost {
    if load == 0 {
        0
    } else {
        instance.delay(r, load)
    }
}

/// Finds the next process move at a Nash equilibrium, or `None` when neither
/// step applies (at which point the state is immune to weak considerate
/// improving clique moves). Deterministic: step 2 is preferred over step 3,
/// and within a step the lowest player index wins, then the lowest target
/// resource index.
pub fn find_witness_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
) -> Result<Option<WitnessMove>> {
    if graph.players() != instance.players() {
        return Err(Error::Validation(format!(
            "graph has {} players, instance has {}",
            graph.players(),
            instance.players()
        )));
    }
    if !is_nash(instance, state) {
        return Err(Error::Contract(
            "find_witness_move requires a Nash equilibrium".into(),
        ));
    }
    let cls = classify_resources(instance, state)?;
    if cls.low.is_empty() {
        return Ok(None);
    }
    let loads = load_profile(instance, state);

    // Step 2 takes priority over step 3 everywhere, so two separate sweeps.
    for i in 0..instance.players() {
        let r = state.resource_of(i);
        if !cls.is_high(r) {
            continue;
        }
        let here = same_resource_neighbors(graph, state, i, r);
        for &to in &cls.low {
            if same_resource_neighbors(graph, state, i, to) < here {
                return Ok(Some(WitnessMove { player: i, from: r, to, kind: WitnessKind::Step2 }));
            }
        }
    }
    for i in 0..instance.players() {
        let r = state.resource_of(i);
        if !cls.is_high(r) {
            continue;
        }
        let here = same_resource_neighbors(graph, state, i, r);
        for &to in &cls.low {
            if same_resource_neighbors(graph, state, i, to) != here {
                continue;
            }
            // The move leaves r one player lighter and fills `to` up to
            // d_max, so the delay sum changes by exactly
            // contrib(r, l_r - 1) - contrib(to, l_to).
            if delay_contrib(instance, r, loads.load(r) - 1)
                < delay_contrib(instance, to, loads.load(to))
            {
                return Ok(Some(WitnessMove { player: i, from: r, to, kind: WitnessKind::Step3 }));
            }
        }
    }
    Ok(None)
}

// ============================================================================
// Potential
// ============================================================================

/// Configuration for the process: the neighbor weight `M` and an iteration
/// safety budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Weight of one same-resource neighbor pair endpoint in the potential.
    /// Must exceed the largest possible delay sum, so that neighbor-count
    /// progress always dominates delay changes.
    pub m_weight: Cost,
    /// Hard cap on process iterations. The potential bounds the real
    /// iteration count, so running out indicates a bug.
    pub max_iterations: usize,
}

impl SolverConfig {
    /// Default weight `1 + sum_r d_r(n)` and a generous iteration budget.
    pub fn for_instance(instance: &GameInstance) -> Result<Self> {
        let sum = instance.delay_sum_at_full_load()?;
        let m_weight = sum
            .checked_add(1)
            .ok_or_else(|| Error::Validation("potential weight overflows u64".into()))?;
        Ok(Self { m_weight, max_iterations: 1_000_000 })
    }

    fn validate(&self, instance: &GameInstance) -> Result<()> {
        if self.m_weight <= instance.delay_sum_at_full_load()? {
            return Err(Error::Contract(
                "solver weight must exceed the full-load delay sum".into(),
            ));
        }
        Ok(())
    }
}

/// Exact potential: `sum_i M * |N_i(s)|  +  sum_r d_r(l_r)`, the delay sum
/// ranging over used resources. Computed in 128 bits so it is exact for any
/// valid u64 delay table.
#[must_use]
pub fn potential_phi(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    config: &SolverConfig,
) -> u128 {
    let loads = load_profile(instance, state);
    let mut neighbor_pairs: u128 = 0;
    for i in 0..instance.players() {
        neighbor_pairs += own_resource_neighbors(graph, state, i) as u128;
    }
    let mut delay_sum: u128 = 0;
    for r in 0..instance.resources() {
        delay_sum += u128::from(delay_contrib(instance, r, loads.load(r)));
    }
    u128::from(config.m_weight) * neighbor_pairs + delay_sum
}

// ============================================================================
// The full process
// ============================================================================

/// One applied process move together with the state and potential after it.
#[derive(Debug, Clone)]
pub struct SolveStep {
    pub mv: WitnessMove,
    pub state: State,
    pub phi: u128,
}

/// Complete run of the process: the greedy equilibrium, every applied move,
/// and the potential along the way.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub initial: State,
    pub phi_start: u128,
    pub steps: Vec<SolveStep>,
}

impl SolveTrace {
    #[must_use]
    pub fn final_state(&self) -> &State {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    #[must_use]
    pub fn phi_end(&self) -> u128 {
        self.steps.last().map_or(self.phi_start, |s| s.phi)
    }

    #[must_use]
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Runs the whole process. The returned final state is a Nash equilibrium
/// admitting no weak considerate improving move by any clique of `graph`;
/// every recorded intermediate state is a Nash equilibrium and the potential
/// strictly decreases step by step (both re-checked here, violations are
/// internal errors).
pub fn solve_ce(
    instance: &GameInstance,
    graph: &SocialGraph,
    config: &SolverConfig,
) -> Result<SolveTrace> {
    config.validate(instance)?;
    let initial = greedy_nash(instance);
    if !is_nash(instance, &initial) {
        return Err(Error::Internal("greedy construction missed an equilibrium".into()));
    }
    let phi_start = potential_phi(instance, graph, &initial, config);

    let mut trace = SolveTrace { initial, phi_start, steps: Vec::new() };
    let mut phi = phi_start;
    loop {
        if trace.steps.len() > config.max_iterations {
            return Err(Error::Internal(format!(
                "process exceeded {} iterations; the potential should forbid this",
                config.max_iterations
            )));
        }
        let state = trace.final_state();
        let Some(mv) = find_witness_move(instance, graph, state)? else {
            return Ok(trace);
        };
        let next = state.with_move(mv.player, mv.to);
        if !is_nash(instance, &next) {
            return Err(Error::Internal(format!(
                "process move {mv:?} left the equilibrium set"
            )));
        }
        let phi_next = potential_phi(instance, graph, &next, config);
        if phi_next >= phi {
            return Err(Error::Internal(format!(
                "potential failed to decrease ({phi} -> {phi_next}) on {mv:?}"
            )));
        }
        phi = phi_next;
        trace.steps.push(SolveStep { mv, state: next, phi });
    }
}
