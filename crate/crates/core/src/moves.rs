//! Coalition deviations and their classification.
//!
//! A deviation is a coalition together with one replacement resource per
//! member (members that keep their strategy are listed too). Classification
//! compares each affected player's cost before and after:
//!
//! * `improving`            — every member strictly gains.
//! * `weak_improving`       — no member loses, at least one strictly gains.
//! * `considerate_improving`— improving, and nobody in `N(C)` loses.
//! * `weak_considerate_improving` — nobody in `C ∪ N(C)` loses and at least
//!   one member strictly gains.
//!
//! A deviation in which no member actually changes resource classifies as
//! none of the above, whatever the costs do.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::game::{load_profile, GameInstance, Player, Resource, State};
use crate::social::{neighborhood, SocialGraph};

// ============================================================================
// Deviations
// ============================================================================

/// A coalition move: the key set is the coalition, the value the target
/// resource of each member (possibly its current one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    moves: BTreeMap<Player, Resource>,
}

impl Deviation {
    pub fn new(moves: BTreeMap<Player, Resource>) -> Result<Self> {
        if moves.is_empty() {
            return Err(Error::Validation("a deviation needs a non-empty coalition".into()));
        }
        Ok(Self { moves })
    }

    /// Convenience constructor from `(player, target)` pairs.
    /// Duplicate players are rejected.
    pub fn from_pairs<I: IntoIterator<Item = (Player, Resource)>>(pairs: I) -> Result<Self> {
        let mut moves = BTreeMap::new();
        for (p, r) in pairs {
            if moves.insert(p, r).is_some() {
                return Err(Error::Validation(format!(
                    "player {p} listed twice in one deviation"
                )));
            }
        }
        Self::new(moves)
    }

    /// Coalition members in ascending order.
    pub fn coalition(&self) -> impl Iterator<Item = Player> + '_ {
        self.moves.keys().copied()
    }

    #[must_use]
    pub fn coalition_vec(&self) -> Vec<Player> {
        self.moves.keys().copied().collect()
    }

    #[must_use]
    pub fn size(&self) -> usize {
        self.moves.len()
    }

    #[must_use]
    pub fn target(&self, i: Player) -> Option<Resource> {
        self.moves.get(&i).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Player, Resource)> + '_ {
        self.moves.iter().map(|(&p, &r)| (p, r))
    }

    /// True iff at least one member's target differs from its strategy in
    /// `state`.
    #[must_use]
    pub fn changes_something(&self, state: &State) -> bool {
        self.entries().any(|(p, r)| state.resource_of(p) != r)
    }

    fn check_bounds(&self, instance: &GameInstance) -> Result<()> {
        for (p, r) in self.entries() {
            if p >= instance.players() {
                return Err(Error::Validation(format!(
                    "deviation references player {p}, instance has {}",
                    instance.players()
                )));
            }
            if r >= instance.resources() {
                return Err(Error::Validation(format!(
                    "deviation sends player {p} to resource {r}, instance has {}",
                    instance.resources()
                )));
            }
        }
        Ok(())
    }
}

/// Classification flags for one deviation at one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoveClass {
    pub improving: bool,
    pub weak_improving: bool,
    pub considerate_improving: bool,
    pub weak_considerate_improving: bool,
}

// ============================================================================
// Operations
// ============================================================================

/// The state after the coalition deviates. Non-members keep their strategy.
pub fn apply_deviation(instance: &GameInstance, state: &State, dev: &Deviation) -> Result<State> {
    dev.check_bounds(instance)?;
    let mut assignment = state.assignment().to_vec();
    for (p, r) in dev.entries() {
        assignment[p] = r;
    }
    State::new(instance, assignment)
}

/// Classifies `dev` at `state`. See the module docs for the four flags.
pub fn classify_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    dev: &Deviation,
) -> Result<MoveClass> {
    dev.check_bounds(instance)?;
    if graph.players() != instance.players() {
        return Err(Error::Validation(format!(
            "graph has {} players, instance has {}",
            graph.players(),
            instance.players()
        )));
    }
    if !dev.changes_something(state) {
        return Ok(MoveClass::default());
    }

    let before = load_profile(instance, state);
    let after_state = apply_deviation(instance, state, dev)?;
    let after = load_profile(instance, &after_state);

    // Cost delta for one player: only the loads of its old and new resource
    // matter, and non-members keep their resource.
    let cost_before = |p: Player| instance.delay(state.resource_of(p), before.load(state.resource_of(p)));
    let cost_after =
        |p: Player| instance.delay(after_state.resource_of(p), after.load(after_state.resource_of(p)));

    let mut all_members_strict = true;
    let mut no_member_worse = true;
    let mut some_member_strict = false;
    for p in dev.coalition() {
        let (b, a) = (cost_before(p), cost_after(p));
        if a >= b {
            all_members_strict = false;
        }
        if a > b {
            no_member_worse = false;
        }
        if a < b {
            some_member_strict = true;
        }
    }

    let coalition = dev.coalition_vec();
    let mut no_neighbor_worse = true;
    for j in neighborhood(graph, &coalition) {
        // Members of N(C) that are also members of C are already constrained
        // above; checking them again is harmless and keeps this literal.
        if cost_after(j) > cost_before(j) {
            no_neighbor_worse = false;
            break;
        }
    }

    let improving = all_members_strict;
    let weak_improving = no_member_worse && some_member_strict;
    Ok(MoveClass {
        improving,
        weak_improving,
        considerate_improving: improving && no_neighbor_worse,
        weak_considerate_improving: weak_improving && no_neighbor_worse,
    })
}
