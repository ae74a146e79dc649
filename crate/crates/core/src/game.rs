//! Resource selection games with explicit integer delay tables.
//!
//! A game has `n` players that each occupy exactly one of `m` resources.
//! Every resource `r` carries a table `d_r(1..=n)` of strictly increasing,
//! non-negative integer delays; a player on `r` pays `d_r(l)` where `l` is
//! the number of players currently on `r`. Lower cost is better. All
//! comparisons are integer-exact — no floating point anywhere.

use crate::error::{Error, Result};

/// Players are dense indices `0..n`.
pub type Player = usize;
/// Resources are dense indices `0..m`.
pub type Resource = usize;
/// A delay table entry. Costs are compared exactly; lower is better.
pub type Cost = u64;

// ============================================================================
// Instance
// ============================================================================

/// An `n`-player, `m`-resource selection game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    n: usize,
    m: usize,
    /// `delays[r][l-1]` is `d_r(l)`, the delay of resource `r` under load `l`.
    delays: Vec<Vec<Cost>>,
}

impl GameInstance {
    /// Builds an instance, validating that there is at least one player and
    /// one resource, that every table has exactly `n` entries, and that every
    /// table is strictly increasing.
    pub fn new(n: usize, m: usize, delays: Vec<Vec<Cost>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("a game needs at least one player".into()));
        }
        if m == 0 {
            return Err(Error::Validation("a game needs at least one resource".into()));
        }
        if delays.len() != m {
            return Err(Error::Validation(format!(
                "expected {} delay tables, got {}",
                m,
                delays.len()
            )));
        }
        for (r, table) in delays.iter().enumerate() {
            if table.len() != n {
                return Err(Error::Validation(format!(
                    "delay table for resource {r} has {} entries, expected {n}",
                    table.len()
                )));
            }
            for w in table.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Validation(format!(
                        "delay table for resource {r} is not strictly increasing ({} then {})",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(Self { n, m, delays })
    }

    /// Convenience constructor: every resource gets the same table.
    pub fn uniform(n: usize, m: usize, table: Vec<Cost>) -> Result<Self> {
        let delays = vec![table; m];
        Self::new(n, m, delays)
    }

    #[must_use]
    pub fn players(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn resources(&self) -> usize {
        self.m
    }

    /// `d_r(load)`. Panics if `load` is 0 or exceeds `n`; a load of 0 has no
    /// delay (an empty resource costs nothing to nobody) and callers must
    /// handle that case themselves.
    #[must_use]
    pub fn delay(&self, r: Resource, load: usize) -> Cost {
        debug_assert!(load >= 1, "d_r(0) is never evaluated");
        self.delays[r][load - 1]
    }

    /// The full table for `r`, indexed by `load - 1`.
    #[must_use]
    pub fn delay_table(&self, r: Resource) -> &[Cost] {
        &self.delays[r]
    }

    /// `sum_r d_r(n)`: the largest possible delay sum over all resources.
    /// Used to pick potential-function weights. Errors on overflow.
    pub fn delay_sum_at_full_load(&self) -> Result<Cost> {
        let mut sum: Cost = 0;
        for r in 0..self.m {
            sum = sum
                .checked_add(self.delay(r, self.n))
                .ok_or_else(|| Error::Validation("delay tables overflow u64 when summed".into()))?;
        }
        Ok(sum)
    }
}

// ============================================================================
// States and loads
// ============================================================================

/// A pure strategy profile: `assignment[i]` is the resource chosen by
/// player `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    assignment: Vec<Resource>,
}

impl State {
    /// Builds a state for `instance`, rejecting out-of-range resources or a
    /// wrong player count.
    pub fn new(instance: &GameInstance, assignment: Vec<Resource>) -> Result<Self> {
        if assignment.len() != instance.players() {
            return Err(Error::Validation(format!(
                "state lists {} players, instance has {}",
                assignment.len(),
                instance.players()
            )));
        }
        if let Some((i, &r)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &r)| r >= instance.resources())
        {
            return Err(Error::Validation(format!(
                "player {i} chose resource {r}, but the instance has only {} resources",
                instance.resources()
            )));
        }
        Ok(Self { assignment })
    }

    #[must_use]
    pub fn resource_of(&self, i: Player) -> Resource {
        self.assignment[i]
    }

    #[must_use]
    pub fn assignment(&self) -> &[Resource] {
        &self.assignment
    }

    /// Returns a copy with player `i` moved to `r`. Bounds are the caller's
    /// responsibility (the solver only produces in-range moves).
    #[must_use]
    pub fn with_move(&self, i: Player, r: Resource) -> State {
        let mut next = self.clone();
        next.assignment[i] = r;
        next
    }
}

/// Per-resource player counts of a state. Loads sum to `n` by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadProfile {
    loads: Vec<usize>,
}

impl LoadProfile {
    #[must_use]
    pub fn load(&self, r: Resource) -> usize {
        self.loads[r]
    }

    #[must_use]
    pub fn as_slice(&self) -> &[usize] {
        &self.loads
    }

    #[must_use]
    pub fn is_used(&self, r: Resource) -> bool {
        self.loads[r] > 0
    }
}

/// Counts how many players sit on each resource.
#[must_use]
pub fn load_profile(instance: &GameInstance, state: &State) -> LoadProfile {
    let mut loads = vec![0usize; instance.resources()];
    for &r in state.assignment() {
        loads[r] += 1;
    }
    debug_assert_eq!(loads.iter().sum::<usize>(), instance.players());
    LoadProfile { loads }
}

/// The cost `d_r(l_r)` paid by player `i`. Every player always occupies a
/// resource, so the load seen here is at least 1.
#[must_use]
pub fn player_cost(instance: &GameInstance, state: &State, loads: &LoadProfile, i: Player) -> Cost {
    let r = state.resource_of(i);
    instance.delay(r, loads.load(r))
}

/// Sum of all player costs, computed per resource as `l_r * d_r(l_r)`.
#[must_use]
pub fn total_cost(instance: &GameInstance, state: &State) -> u128 {
    let loads = load_profile(instance, state);
    let mut sum: u128 = 0;
    for r in 0..instance.resources() {
        let l = loads.load(r);
        if l > 0 {
            sum += (l as u128) * u128::from(instance.delay(r, l));
        }
    }
    sum
}

/// The standard 3-player, 2-resource game with `d_r(x) = x` on both
/// resources. Small enough to enumerate exhaustively, rich enough to show
/// that weak improving moves can defeat every state.
#[must_use]
pub fn tiny_linear_game() -> GameInstance {
    GameInstance::uniform(3, 2, vec![1, 2, 3]).expect("static instance is valid")
}
