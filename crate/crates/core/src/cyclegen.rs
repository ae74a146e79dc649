//! Generator for a family of instances on which coalition dynamics provably
//! cycle: 19 interlocking blocks of 14 players over 5 resources each, wired
//! so that a fixed 76-move schedule of weak considerate improving clique
//! moves returns the global player-labeled state exactly to its start.
//!
//! Each block cycles through ten phases. Within a block, four load-3
//! resources and one load-2 resource rotate roles; every scheduled move
//! either swaps two coalition members between equally loaded resources
//! (cost-neutral) or shifts one member onto the lightly loaded resource so
//! that a teammate left behind strictly improves. The players a move harms
//! sit in other blocks and are never adjacent to the moving coalition, so
//! every move is weak considerate improving. One full rotation advances
//! every block's phase by one position around the 19-cycle; 19 rotations
//! (4 moves each) restore the initial assignment, certifying an infinite
//! run.
//!
//! Block-local loads stay in {2, 3} forever, so every intermediate state is
//! also a Nash equilibrium, and the maximum player cost never changes.

use crate::error::{Error, Result};
use crate::game::{Cost, GameInstance, Player, Resource, State};
use crate::moves::{apply_deviation, classify_move, Deviation};
use crate::social::SocialGraph;
use crate::solver::is_nash;

/// Number of blocks; also the length of the rotation in steps.
pub const BLOCKS: usize = 19;
/// Named players plus dummies in each block.
pub const PLAYERS_PER_BLOCK: usize = 14;
/// Resources owned by each block.
pub const RESOURCES_PER_BLOCK: usize = 5;
/// Moves per rotation step (two eight-player cliques plus two pairs).
pub const MOVES_PER_STEP: usize = 4;

/// Total players: 266.
pub const TOTAL_PLAYERS: usize = BLOCKS * PLAYERS_PER_BLOCK;
/// Total resources: 95.
pub const TOTAL_RESOURCES: usize = BLOCKS * RESOURCES_PER_BLOCK;

// Role offsets inside a block. The first eight are the named players; the
// remaining six are isolated dummies that never move.
const ROLE_B: usize = 0;
const ROLE_C: usize = 1;
const ROLE_D: usize = 2;
const ROLE_E: usize = 3;
const ROLE_F: usize = 4;
const ROLE_G: usize = 5;
const ROLE_P: usize = 6;
const ROLE_Q: usize = 7;
const NAMED_ROLES: usize = 8;
const DUMMIES: usize = 6;

const ROLE_NAMES: [&str; NAMED_ROLES] = ["B", "C", "D", "E", "F", "G", "P", "Q"];

/// Block-local resource index (0..5) each dummy occupies, fixed forever.
/// Together the dummies pre-load the block's resources as (1, 0, 1, 2, 2).
const DUMMY_PLACEMENTS: [usize; DUMMIES] = [0, 2, 3, 3, 4, 4];

fn pid(block: usize, role: usize) -> Player {
    (block % BLOCKS) * PLAYERS_PER_BLOCK + role
}

fn rid(block: usize, slot: usize) -> Resource {
    (block % BLOCKS) * RESOURCES_PER_BLOCK + slot
}

// ============================================================================
// Phases
// ============================================================================

/// The ten per-block configurations the rotation cycles through. The first
/// and last few differ only in where the block's two "traveling" players
/// (one of which is always D) currently sit; the subscripted variants are
/// the intermediate positions of the two three-move circular swaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockPhase {
    Alpha,
    Beta,
    Gamma,
    Gamma1,
    Gamma2,
    Delta,
    Epsilon,
    Zeta,
    Zeta1,
    Zeta2,
}

impl BlockPhase {
    /// Block-local resource index (0..5) of each named player, in role
    /// order B, C, D, E, F, G, P, Q. Together with the dummy pre-load
    /// (1, 0, 1, 2, 2), every phase fills the block's five resources with
    /// loads that are a permutation of (2, 3, 3, 3, 3).
    #[must_use]
    pub fn placements(self) -> [usize; NAMED_ROLES] {
        match self {
            BlockPhase::Alpha => [1, 0, 1, 0, 2, 1, 3, 4],
            BlockPhase::Beta => [1, 0, 2, 0, 2, 1, 3, 4],
            BlockPhase::Gamma => [1, 1, 2, 0, 2, 1, 3, 4],
            BlockPhase::Gamma1 => [1, 1, 3, 0, 2, 1, 2, 4],
            BlockPhase::Gamma2 => [2, 1, 3, 0, 2, 1, 1, 4],
            BlockPhase::Delta => [2, 1, 1, 0, 2, 1, 3, 4],
            BlockPhase::Epsilon => [2, 1, 0, 0, 2, 1, 3, 4],
            BlockPhase::Zeta => [1, 1, 0, 0, 2, 1, 3, 4],
            BlockPhase::Zeta1 => [1, 1, 4, 0, 2, 1, 3, 0],
            BlockPhase::Zeta2 => [1, 0, 4, 0, 2, 1, 3, 1],
        }
    }
}

/// Phase of each block in the starting state. Block 0 is about to complete
/// its circular swap (move A), block 18 has just completed the opposite one.
const START_PHASES: [BlockPhase; BLOCKS] = [
    BlockPhase::Zeta2,
    BlockPhase::Zeta1,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Zeta,
    BlockPhase::Epsilon,
    BlockPhase::Delta,
    BlockPhase::Gamma2,
    BlockPhase::Gamma1,
    BlockPhase::Gamma,
    BlockPhase::Gamma,
    BlockPhase::Gamma,
    BlockPhase::Gamma,
    BlockPhase::Beta,
    BlockPhase::Alpha,
];

// ============================================================================
// Social structure
// ============================================================================

/// The eight-player clique that performs the P-side circular swap anchored
/// at `block`.
fn p_clique(block: usize) -> [Player; 8] {
    [
        pid(block, ROLE_D),
        pid(block, ROLE_P),
        pid(block + 1, ROLE_P),
        pid(block + 1, ROLE_B),
        pid(block + 2, ROLE_D),
        pid(block + 2, ROLE_P),
        pid(block + 6, ROLE_C),
        pid(block + 6, ROLE_E),
    ]
}

/// The eight-player clique that performs the Q-side circular swap anchored
/// at `block`.
fn q_clique(block: usize) -> [Player; 8] {
    [
        pid(block, ROLE_D),
        pid(block, ROLE_Q),
        pid(block + 1, ROLE_Q),
        pid(block + 1, ROLE_C),
        pid(block + 2, ROLE_D),
        pid(block + 2, ROLE_Q),
        pid(block + 9, ROLE_B),
        pid(block + 9, ROLE_F),
    ]
}

// ============================================================================
// Bundle construction
// ============================================================================

/// Everything needed to replay the cycle: instance, social graph, starting
/// state, the 76-move schedule of one full rotation, and human-readable
/// names for the CLI manifest.
#[derive(Debug, Clone)]
pub struct CycleBundle {
    pub instance: GameInstance,
    pub graph: SocialGraph,
    pub start: State,
    pub schedule: Vec<Deviation>,
    pub player_names: Vec<String>,
    pub resource_names: Vec<String>,
}

/// Builds the cycle family with the canonical identical delays d(x) = x.
#[must_use]
pub fn build_cycle_instance() -> CycleBundle {
    let table: Vec<Cost> = (1..=TOTAL_PLAYERS as Cost).collect();
    build_cycle_instance_with_delay_table(&table)
        .expect("the canonical strictly increasing table is valid")
}

/// Builds the cycle family with a custom delay table shared by all 95
/// resources. Any strictly increasing table works: every scheduled move
/// only compares delays at loads 2 and 3, and the construction keeps all
/// loads in {2, 3}.
pub fn build_cycle_instance_with_delay_table(table: &[Cost]) -> Result<CycleBundle> {
    let instance = GameInstance::uniform(TOTAL_PLAYERS, TOTAL_RESOURCES, table.to_vec())?;

    let mut graph = SocialGraph::empty(TOTAL_PLAYERS);
    for b in 0..BLOCKS {
        graph.add_edge(pid(b, ROLE_B), pid(b, ROLE_F))?;
        graph.add_edge(pid(b, ROLE_C), pid(b, ROLE_E))?;
        graph.add_edge(pid(b, ROLE_D), pid(b, ROLE_G))?;
    }
    for b in 0..BLOCKS {
        for clique in [p_clique(b), q_clique(b)] {
            for (x, &i) in clique.iter().enumerate() {
                for &j in &clique[x + 1..] {
                    graph.add_edge(i, j)?;
                }
            }
        }
    }

    let mut assignment = vec![0 as Resource; TOTAL_PLAYERS];
    for b in 0..BLOCKS {
        let placements = START_PHASES[b].placements();
        for (role, &slot) in placements.iter().enumerate() {
            assignment[pid(b, role)] = rid(b, slot);
        }
        for (dummy, &slot) in DUMMY_PLACEMENTS.iter().enumerate() {
            assignment[pid(b, NAMED_ROLES + dummy)] = rid(b, slot);
        }
    }
    let start = State::new(&instance, assignment)?;

    let mut schedule = Vec::with_capacity(BLOCKS * MOVES_PER_STEP);
    for s in 0..BLOCKS {
        schedule.extend(rotation_step(s)?);
    }

    let mut player_names = Vec::with_capacity(TOTAL_PLAYERS);
    for b in 0..BLOCKS {
        for name in ROLE_NAMES {
            player_names.push(format!("{name}^{b}"));
        }
        for d in 1..=DUMMIES {
            player_names.push(format!("X{d}^{b}"));
        }
    }
    let mut resource_names = Vec::with_capacity(TOTAL_RESOURCES);
    for b in 0..BLOCKS {
        for slot in 1..=RESOURCES_PER_BLOCK {
            resource_names.push(format!("r{slot}^{b}"));
        }
    }

    Ok(CycleBundle { instance, graph, start, schedule, player_names, resource_names })
}

/// The four moves of rotation step `s`, in order:
///
/// - **A** — the Q-clique anchored at block `s` runs its circular swap:
///   three cost-neutral two-player swaps across blocks `s`, `s+1`, `s+2`,
///   plus B in block `s+9` stepping aside so that clique-mate F there
///   strictly improves.
/// - **B** — the mirrored P-clique swap anchored at block `s+11`, with C in
///   block `s+17` stepping aside for clique-mate E.
/// - **C** — D and G in block `s+10`: D moves to the lightly loaded
///   resource at equal cost, G strictly improves.
/// - **D** — D and G in block `s+18`: the same pattern one notch further.
///
/// The ten blocks touched by a step are pairwise distinct, so the moves
/// commute; the order fixes the trace.
fn rotation_step(s: usize) -> Result<[Deviation; MOVES_PER_STEP]> {
    let a = s;
    let move_a = Deviation::from_pairs([
        (pid(a, ROLE_D), rid(a, 1)),
        (pid(a, ROLE_Q), rid(a, 4)),
        (pid(a + 1, ROLE_Q), rid(a + 1, 1)),
        (pid(a + 1, ROLE_C), rid(a + 1, 0)),
        (pid(a + 2, ROLE_D), rid(a + 2, 4)),
        (pid(a + 2, ROLE_Q), rid(a + 2, 0)),
        (pid(a + 9, ROLE_B), rid(a + 9, 1)),
        (pid(a + 9, ROLE_F), rid(a + 9, 2)),
    ])?;

    let b = s + 11;
    let move_b = Deviation::from_pairs([
        (pid(b, ROLE_D), rid(b, 1)),
        (pid(b, ROLE_P), rid(b, 3)),
        (pid(b + 1, ROLE_P), rid(b + 1, 1)),
        (pid(b + 1, ROLE_B), rid(b + 1, 2)),
        (pid(b + 2, ROLE_D), rid(b + 2, 3)),
        (pid(b + 2, ROLE_P), rid(b + 2, 2)),
        (pid(b + 6, ROLE_C), rid(b + 6, 1)),
        (pid(b + 6, ROLE_E), rid(b + 6, 0)),
    ])?;

    let c = s + 10;
    let move_c = Deviation::from_pairs([
        (pid(c, ROLE_D), rid(c, 0)),
        (pid(c, ROLE_G), rid(c, 1)),
    ])?;

    let e = s + 18;
    let move_d = Deviation::from_pairs([
        (pid(e, ROLE_D), rid(e, 2)),
        (pid(e, ROLE_G), rid(e, 1)),
    ])?;

    Ok([move_a, move_b, move_c, move_d])
}

// ============================================================================
// Certification
// ============================================================================

/// Proof record of a successful replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleCertificate {
    /// Moves in the scripted schedule (one full rotation).
    pub schedule_len: usize,
    /// Index of the state the run returned to (0 = the starting state).
    pub first_repeat_index: usize,
    /// Moves between the two identical states.
    pub period: usize,
    /// Moves individually re-validated (clique + weak considerate
    /// improving + equilibrium preserved).
    pub moves_validated: usize,
}

/// Replays the bundle's schedule and certifies the cycle: every move's
/// coalition must be a clique, every move must classify as weak considerate
/// improving at its predecessor state, every intermediate state must remain
/// a Nash equilibrium, and the player-labeled starting state must recur.
/// Fails with a diagnostic naming the offending move otherwise.
pub fn replay_and_certify(bundle: &CycleBundle, max_steps: usize) -> Result<CycleCertificate> {
    let CycleBundle { instance, graph, start, schedule, .. } = bundle;
    if !is_nash(instance, start) {
        return Err(Error::Contract("the starting state is not a Nash equilibrium".into()));
    }

    let mut state = start.clone();
    let mut moves_validated = 0usize;
    let mut repeat: Option<(usize, usize)> = None;
    let start_vec = start.assignment().to_vec();

    for (k, dev) in schedule.iter().enumerate() {
        if k == max_steps {
            break;
        }
        let members = dev.coalition_vec();
        if !graph.is_clique(&members) {
            return Err(Error::Contract(format!(
                "schedule move {k}: coalition {members:?} is not a clique"
            )));
        }
        let class = classify_move(instance, graph, &state, dev)?;
        if !class.weak_considerate_improving {
            return Err(Error::Contract(format!(
                "schedule move {k}: not weak considerate improving ({})",
                diagnose_move(instance, graph, &state, dev)?
            )));
        }
        state = apply_deviation(instance, &state, dev)?;
        if !is_nash(instance, &state) {
            return Err(Error::Internal(format!(
                "schedule move {k} left the equilibrium set"
            )));
        }
        moves_validated += 1;
        if state.assignment() == start_vec.as_slice() && repeat.is_none() {
            repeat = Some((0, k + 1));
        }
    }

    let Some((first_repeat_index, period)) = repeat else {
        return Err(Error::Budget(format!(
            "no repeated state within {moves_validated} validated moves"
        )));
    };
    Ok(CycleCertificate {
        schedule_len: schedule.len(),
        first_repeat_index,
        period,
        moves_validated,
    })
}

/// Explains why a move fails to be weak considerate improving: names the
/// first member or neighbor whose cost rises, or reports the absence of a
/// strict improver.
fn diagnose_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    dev: &Deviation,
) -> Result<String> {
    use crate::game::{load_profile, player_cost};
    use crate::social::neighborhood;

    let after = apply_deviation(instance, state, dev)?;
    let loads_before = load_profile(instance, state);
    let loads_after = load_profile(instance, &after);
    let members = dev.coalition_vec();

    let mut any_strict = false;
    for &i in &members {
        let before = player_cost(instance, state, &loads_before, i);
        let now = player_cost(instance, &after, &loads_after, i);
        if now > before {
            return Ok(format!("member {i} cost rises {before} -> {now}"));
        }
        any_strict |= now < before;
    }
    for j in neighborhood(graph, &members) {
        if members.contains(&j) {
            continue;
        }
        let before = player_cost(instance, state, &loads_before, j);
        let now = player_cost(instance, &after, &loads_after, j);
        if now > before {
            return Ok(format!("neighbor {j} cost rises {before} -> {now}"));
        }
    }
    if !any_strict {
        return Ok("no coalition member strictly improves".into());
    }
    Ok("move is valid".into())
}
