//! Brute-force ground truth. Exhaustively searches coalition deviations on
//! small instances to classify a state against every equilibrium notion, and
//! re-derives the structural bookkeeping behind the solver's witness moves.
//!
//! Everything here funnels through [`classify_move`]: a notion holds iff no
//! coalition in its family admits a deviation whose classification sets the
//! notion's flag. The searches are deterministic — coalitions by size then
//! lexicographic order, replacement vectors in lexicographic order — so the
//! first witness found is stable across runs and platforms. All searches are
//! budgeted; running out of budget is an explicit outcome, never a silent
//! truncation, so a "yes" verdict is always exhaustive.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::game::{load_profile, player_cost, Cost, GameInstance, Player, Resource, State};
use crate::moves::{classify_move, Deviation, MoveClass};
use crate::social::{
    enumerate_cliques, partition_classes, same_resource_neighbors, SocialGraph,
};
use crate::solver::{classify_resources, is_nash};

// ============================================================================
// Budgets and verdicts
// ============================================================================

/// Search limits for exhaustive classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of cliques to enumerate for clique-restricted notions.
    pub max_cliques: usize,
    /// Maximum number of deviations to classify per notion search.
    pub max_deviations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_cliques: 20_000, max_deviations: 10_000_000 }
    }
}

/// Outcome of one notion check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Exhaustively verified: no deviation in the family sets the flag.
    Yes,
    /// A witnessing deviation was found.
    No,
    /// The search ran out of budget before finishing.
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Yes => write!(f, "yes"),
            Verdict::No => write!(f, "no"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Verdict for one equilibrium notion, with the witnessing deviation when
/// the verdict is [`Verdict::No`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotionStatus {
    pub verdict: Verdict,
    pub witness: Option<Deviation>,
}

impl NotionStatus {
    fn yes() -> Self {
        Self { verdict: Verdict::Yes, witness: None }
    }

    fn no(witness: Deviation) -> Self {
        Self { verdict: Verdict::No, witness: Some(witness) }
    }

    fn unknown() -> Self {
        Self { verdict: Verdict::Unknown, witness: None }
    }

    #[must_use]
    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    #[must_use]
    pub fn is_no(&self) -> bool {
        self.verdict == Verdict::No
    }
}

/// Full classification of one state.
///
/// - `ne`: no single player has a strictly improving switch.
/// - `cne`: no single player has a strictly improving switch that leaves
///   every neighbor no worse.
/// - `se`: no non-empty player subset has an all-strict improving deviation.
/// - `sse`: no non-empty player subset has a weak improving deviation.
/// - `sce`: no clique has an all-strict deviation leaving its neighborhood
///   no worse.
/// - `ce`: no clique has a weak considerate improving deviation.
/// - `partition`: when the graph is a disjoint union of cliques, no class of
///   that partition has a weak improving deviation; absent otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub ne: NotionStatus,
    pub cne: NotionStatus,
    pub se: NotionStatus,
    pub sse: NotionStatus,
    pub sce: NotionStatus,
    pub ce: NotionStatus,
    pub partition: Option<NotionStatus>,
}

impl EquilibriumReport {
    /// Checks the implication lattice between notions. An implication
    /// `A implies B` is violated only by `A = yes` and `B = no`; unknowns
    /// never violate. Returns the names of violated implications.
    #[must_use]
    pub fn implication_violations(&self) -> Vec<&'static str> {
        let pairs: [(&NotionStatus, &NotionStatus, &'static str); 7] = [
            (&self.sse, &self.se, "sse implies se"),
            (&self.se, &self.ne, "se implies ne"),
            (&self.ne, &self.cne, "ne implies cne"),
            (&self.ce, &self.sce, "ce implies sce"),
            (&self.sce, &self.cne, "sce implies cne"),
            (&self.sse, &self.ce, "sse implies ce"),
            (&self.se, &self.sce, "se implies sce"),
        ];
        pairs
            .into_iter()
            .filter(|(a, b, _)| a.is_yes() && b.is_no())
            .map(|(_, _, name)| name)
            .collect()
    }
}

// ============================================================================
// Deviation enumeration
// ============================================================================

/// Counts classification work against the deviation budget.
struct DevBudget {
    left: usize,
}

impl DevBudget {
    fn new(budget: &Budget) -> Self {
        Self { left: budget.max_deviations }
    }

    fn charge(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::Budget(
                "deviation budget exhausted before the search finished".into(),
            ));
        }
        self.left -= 1;
        Ok(())
    }
}

/// Searches one coalition. Enumerates all `m^|C|` replacement vectors in
/// lexicographic order (stay-put entries included — they matter for the weak
/// notions), skips the identity vector, classifies each remaining deviation,
/// and returns the first one satisfying `flag`.
fn search_coalition(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    members: &[Player],
    flag: fn(&MoveClass) -> bool,
    budget: &mut DevBudget,
) -> Result<Option<Deviation>> {
    let m = instance.resources();
    let mut targets = vec![0 as Resource; members.len()];
    loop {
        let identity = members
            .iter()
            .zip(&targets)
            .all(|(&i, &t)| state.resource_of(i) == t);
        if !identity {
            budget.charge()?;
            let dev = Deviation::from_pairs(
                members.iter().copied().zip(targets.iter().copied()),
            )?;
            let class = classify_move(instance, graph, state, &dev)?;
            if flag(&class) {
                return Ok(Some(dev));
            }
        }
        // Odometer increment; done when it wraps.
        let mut pos = targets.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            targets[pos] += 1;
            if targets[pos] < m {
                break;
            }
            targets[pos] = 0;
        }
    }
}

/// Searches a family of coalitions in the order given, returning the first
/// witness in coalition-major, replacement-vector-minor order.
fn search_family<'a>(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    coalitions: impl IntoIterator<Item = &'a [Player]>,
    flag: fn(&MoveClass) -> bool,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    let mut dev_budget = DevBudget::new(budget);
    for members in coalitions {
        if let Some(witness) =
            search_coalition(instance, graph, state, members, flag, &mut dev_budget)?
        {
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// Lazily yields all non-empty subsets of `0..n`, ordered by size and then
/// lexicographically, without ever materializing the power set.
struct SubsetIter {
    n: usize,
    current: Vec<Player>,
    exhausted: bool,
}

impl SubsetIter {
    fn new(n: usize) -> Self {
        Self { n, current: Vec::new(), exhausted: n == 0 }
    }
}

impl Iterator for SubsetIter {
    type Item = Vec<Player>;

    fn next(&mut self) -> Option<Vec<Player>> {
        if self.exhausted {
            return None;
        }
        if self.current.is_empty() {
            self.current = vec![0];
            return Some(self.current.clone());
        }
        // Advance to the next combination of the same size; on wrap, grow.
        let k = self.current.len();
        let mut pos = k;
        loop {
            if pos == 0 {
                if k == self.n {
                    self.exhausted = true;
                    return None;
                }
                self.current = (0..=k).collect();
                return Some(self.current.clone());
            }
            pos -= 1;
            // Index `pos` may rise to at most n - (k - pos).
            if self.current[pos] < self.n - (k - pos) {
                self.current[pos] += 1;
                for j in pos + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return Some(self.current.clone());
            }
        }
    }
}

// ============================================================================
// Notion searches
// ============================================================================

fn flag_improving(c: &MoveClass) -> bool {
    c.improving
}

fn flag_weak_improving(c: &MoveClass) -> bool {
    c.weak_improving
}

fn flag_considerate(c: &MoveClass) -> bool {
    c.considerate_improving
}

fn flag_weak_considerate(c: &MoveClass) -> bool {
    c.weak_considerate_improving
}

/// First strictly improving unilateral switch, if any. The budget-free
/// oracle form of the Nash check: the state is a Nash equilibrium iff this
/// returns `None`.
pub fn find_improving_singleton_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
) -> Result<Option<Deviation>> {
    let generous = Budget::default();
    let singletons: Vec<Vec<Player>> = (0..instance.players()).map(|i| vec![i]).collect();
    search_family(
        instance,
        graph,
        state,
        singletons.iter().map(Vec::as_slice),
        flag_improving,
        &generous,
    )
}

/// First weak considerate improving deviation by any clique of the graph,
/// in deterministic order. `Ok(None)` means exhaustively verified absent —
/// the state is a considerate equilibrium. Budget exhaustion is an error so
/// truncation is never mistaken for verification.
pub fn find_weak_considerate_clique_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    let cliques = enumerate_cliques(graph, instance.players(), budget.max_cliques)?;
    search_family(instance, graph, state, cliques.iter(), flag_weak_considerate, budget)
}

/// First weak improving deviation by a class of the graph's partition into
/// cliques. Contract error if the graph is not a disjoint union of cliques.
/// `Ok(None)` means the state is a partition equilibrium.
pub fn find_weak_improving_partition_move(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    let Some(classes) = partition_classes(graph) else {
        return Err(Error::Contract(
            "partition check requires a graph that is a disjoint union of cliques".into(),
        ));
    };
    search_family(
        instance,
        graph,
        state,
        classes.iter().map(Vec::as_slice),
        flag_weak_improving,
        budget,
    )
}

/// Runs one notion search and folds the outcome into a status: a witness
/// gives "no", exhaustion of the family gives "yes", running out of budget
/// (or any other search failure) gives "unknown".
fn status_from(result: Result<Option<Deviation>>) -> NotionStatus {
    match result {
        Ok(None) => NotionStatus::yes(),
        Ok(Some(w)) => NotionStatus::no(w),
        Err(_) => NotionStatus::unknown(),
    }
}

/// Classifies a state against every notion. Infallible: searches that
/// exceed their budget yield `unknown` verdicts instead of failing the whole
/// report. Each notion gets the full deviation budget for its own search.
#[must_use]
pub fn classify_state(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    budget: &Budget,
) -> EquilibriumReport {
    classify_state_with(instance, graph, state, budget, true, |_, _| {})
}

/// Like [`classify_state`] but skips the two all-subsets notions, whose
/// search is exponential in the player count regardless of the graph; their
/// statuses come back `unknown`. The clique-restricted and singleton
/// notions are still searched exhaustively.
#[must_use]
pub fn classify_state_basic(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    budget: &Budget,
) -> EquilibriumReport {
    classify_state_with(instance, graph, state, budget, false, |_, _| {})
}

/// Classifies notion by notion, handing each verdict to `emit` as soon as
/// its search finishes. The clique searches dominate the runtime on large
/// instances, so a caller that prints from `emit` shows the cheap singleton
/// verdicts immediately instead of staying silent until the whole report is
/// ready. Notions arrive in report order: `ne`, `cne`, `se` and `sse` (only
/// when `include_subset_notions` is set), `sce`, `ce`, and `partition`
/// (only on a disjoint-clique graph).
pub fn classify_state_with<F>(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    budget: &Budget,
    include_subset_notions: bool,
    mut emit: F,
) -> EquilibriumReport
where
    F: FnMut(&'static str, &NotionStatus),
{
    let singletons: Vec<Vec<Player>> = (0..instance.players()).map(|i| vec![i]).collect();
    let ne = status_from(search_family(
        instance,
        graph,
        state,
        singletons.iter().map(Vec::as_slice),
        flag_improving,
        budget,
    ));
    emit("ne", &ne);
    let cne = status_from(search_family(
        instance,
        graph,
        state,
        singletons.iter().map(Vec::as_slice),
        flag_considerate,
        budget,
    ));
    emit("cne", &cne);

    let (se, sse) = if include_subset_notions {
        let se = status_from(search_subsets(instance, graph, state, flag_improving, budget));
        emit("se", &se);
        let sse = status_from(search_subsets(instance, graph, state, flag_weak_improving, budget));
        emit("sse", &sse);
        (se, sse)
    } else {
        (NotionStatus::unknown(), NotionStatus::unknown())
    };

    let sce = status_from(search_cliques(instance, graph, state, flag_considerate, budget));
    emit("sce", &sce);
    let ce = status_from(search_cliques(instance, graph, state, flag_weak_considerate, budget));
    emit("ce", &ce);

    let partition = partition_classes(graph).map(|_| {
        status_from(find_weak_improving_partition_move(instance, graph, state, budget))
    });
    if let Some(partition) = &partition {
        emit("partition", partition);
    }

    EquilibriumReport { ne, cne, se, sse, sce, ce, partition }
}

fn search_subsets(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    flag: fn(&MoveClass) -> bool,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    let mut dev_budget = DevBudget::new(budget);
    for members in SubsetIter::new(instance.players()) {
        if let Some(witness) =
            search_coalition(instance, graph, state, &members, flag, &mut dev_budget)?
        {
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

fn search_cliques(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    flag: fn(&MoveClass) -> bool,
    budget: &Budget,
) -> Result<Option<Deviation>> {
    let cliques = enumerate_cliques(graph, instance.players(), budget.max_cliques)?;
    search_family(instance, graph, state, cliques.iter(), flag, budget)
}

// ============================================================================
// Structural analysis of a discovered move
// ============================================================================

/// Strong symmetry that emerges when no drained resource offers more
/// same-resource neighbors than any raised resource: both sides have the
/// same number of resources (`q`) and every relevant neighbor count equals
/// `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalancedProfile {
    /// Common size of the drained and raised resource sets.
    pub q: usize,
    /// Common neighbor count: every mover from a drained resource has `k`
    /// neighbors at home and `k` on every raised resource.
    pub k: usize,
}

/// Bookkeeping of how a weak considerate improving clique move rearranges a
/// Nash equilibrium, with every structural relation re-checked from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationAnalysis {
    /// Maximum player cost in the starting state; also in the ending state.
    pub d_max: Cost,
    /// Resources whose delay equals `d_max` in the starting state.
    pub high: Vec<Resource>,
    /// Resources that would reach exactly `d_max` with one more player.
    pub low: Vec<Resource>,
    /// High resources that stop being high (drained).
    pub drained: Vec<Resource>,
    /// Low resources that become high (raised).
    pub raised: Vec<Resource>,
    /// Coalition members starting on a drained resource.
    pub movers_from_drained: Vec<Player>,
    /// Coalition members starting on a raised resource.
    pub movers_from_raised: Vec<Player>,
    /// Largest same-resource neighbor count among `movers_from_drained`;
    /// absent when that set is empty.
    pub max_neighbors_drained: Option<usize>,
    /// Smallest neighbor count a drained-resource mover has on a raised
    /// resource; absent when either set is empty.
    pub min_neighbors_raised: Option<usize>,
    /// Present when the symmetric regime applies (the max above does not
    /// exceed the min above).
    pub balanced: Option<BalancedProfile>,
}

fn structural(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(format!("structural check failed: {what}")))
    }
}

/// Dissects a weak considerate improving clique move away from a Nash
/// equilibrium and asserts every structural relation the solver's
/// witness-existence argument rests on. Precondition violations (state not
/// an equilibrium, coalition not a clique, move not weak considerate
/// improving) are contract errors; a failed structural relation is an
/// internal error, since it would falsify the solver's reasoning.
pub fn analyze_deviation(
    instance: &GameInstance,
    graph: &SocialGraph,
    state: &State,
    dev: &Deviation,
) -> Result<DeviationAnalysis> {
    // ---- Preconditions -----------------------------------------------------
    if !is_nash(instance, state) {
        return Err(Error::Contract(
            "deviation analysis requires a Nash equilibrium starting state".into(),
        ));
    }
    let members = dev.coalition_vec();
    if !graph.is_clique(&members) {
        return Err(Error::Contract(
            "deviation analysis requires the coalition to be a clique".into(),
        ));
    }
    let class = classify_move(instance, graph, state, dev)?;
    if !class.weak_considerate_improving {
        return Err(Error::Contract(
            "deviation analysis requires a weak considerate improving move".into(),
        ));
    }
    let member_set: BTreeSet<Player> = members.iter().copied().collect();

    // ---- High/low structure before and after -------------------------------
    let cls = classify_resources(instance, state)?;
    let d_max = cls.d_max;
    let after = crate::moves::apply_deviation(instance, state, dev)?;
    let loads = load_profile(instance, state);
    let loads_after = load_profile(instance, &after);

    let d_max_after = (0..instance.players())
        .map(|i| player_cost(instance, &after, &loads_after, i))
        .max()
        .expect("instance has at least one player");
    structural(
        d_max_after == d_max,
        "the maximum player cost must be unchanged by the move",
    )?;

    let still_high = |r: Resource| -> bool {
        loads_after.load(r) > 0 && instance.delay(r, loads_after.load(r)) == d_max
    };
    let drained: Vec<Resource> =
        cls.high.iter().copied().filter(|&r| !still_high(r)).collect();
    let raised: Vec<Resource> = cls.low.iter().copied().filter(|&r| still_high(r)).collect();

    // Subset relations hold by construction; keep them as explicit checks.
    structural(
        drained.iter().all(|r| cls.high.contains(r)),
        "drained resources must be high resources",
    )?;
    structural(
        raised.iter().all(|r| cls.low.contains(r)),
        "raised resources must be low resources",
    )?;

    let movers_from_drained: Vec<Player> = members
        .iter()
        .copied()
        .filter(|&i| drained.contains(&state.resource_of(i)))
        .collect();
    let movers_from_raised: Vec<Player> = members
        .iter()
        .copied()
        .filter(|&i| raised.contains(&state.resource_of(i)))
        .collect();

    let max_neighbors_drained = movers_from_drained
        .iter()
        .map(|&i| same_resource_neighbors(graph, state, i, state.resource_of(i)))
        .max();
    let min_neighbors_raised = if movers_from_drained.is_empty() || raised.is_empty() {
        None
    } else {
        movers_from_drained
            .iter()
            .flat_map(|&i| {
                raised.iter().map(move |&r| same_resource_neighbors(graph, state, i, r))
            })
            .min()
    };

    // ---- Counting relations -------------------------------------------------
    structural(
        movers_from_drained.len() >= movers_from_raised.len() + raised.len(),
        "enough movers must leave drained resources to refill the raised ones",
    )?;
    if let Some(max_h) = max_neighbors_drained {
        structural(
            movers_from_drained.len() <= (max_h + 1) * drained.len(),
            "drained resources cannot hold more movers than their neighbor bound allows",
        )?;
    }
    if let Some(min_l) = min_neighbors_raised {
        structural(
            movers_from_raised.len() >= min_l * raised.len(),
            "raised resources must hold at least their neighbor bound in movers",
        )?;
        if let Some(max_h) = max_neighbors_drained {
            structural(
                (max_h + 1) * drained.len() >= (min_l + 1) * raised.len(),
                "the drained-side capacity must cover the raised-side demand",
            )?;
        }
    }
    structural(
        drained.len() <= raised.len(),
        "no more resources can be drained than raised",
    )?;

    // ---- Neighbor bookkeeping on raised resources ---------------------------
    // Considerateness forbids coalition neighbors outside the coalition on
    // any raised resource (their delay would grow), so for a mover from a
    // drained resource the neighbor count on a raised resource is exactly
    // the coalition's occupancy there.
    for &r in &raised {
        for j in 0..instance.players() {
            if state.resource_of(j) == r && !member_set.contains(&j) {
                structural(
                    graph.neighbors(j).iter().all(|nb| !member_set.contains(nb)),
                    "players outside the coalition on a raised resource must have no coalition neighbor",
                )?;
            }
        }
        let occupancy = members.iter().filter(|&&j| state.resource_of(j) == r).count();
        for &i in &movers_from_drained {
            structural(
                same_resource_neighbors(graph, state, i, r) == occupancy,
                "a drained-resource mover's neighbor count on a raised resource must equal the coalition occupancy there",
            )?;
        }
    }

    // ---- Migration accounting ------------------------------------------------
    // Every mover starting on a raised resource leaves it and lands outside
    // the raised set (staying would cost d_max, strictly worse than before).
    for &i in &movers_from_raised {
        let to = after.resource_of(i);
        structural(
            to != state.resource_of(i),
            "movers on raised resources must leave them",
        )?;
        structural(
            !raised.contains(&to),
            "movers from raised resources must land outside the raised set",
        )?;
    }
    // Each raised resource gains exactly one player, and every arrival comes
    // from a high resource (anyone else would end up strictly worse).
    let mut arrivals_into_raised = 0usize;
    for &r in &raised {
        structural(
            loads_after.load(r) == loads.load(r) + 1,
            "a raised resource must gain exactly one player",
        )?;
        for i in 0..instance.players() {
            if after.resource_of(i) == r && state.resource_of(i) != r {
                arrivals_into_raised += 1;
                structural(
                    cls.high.contains(&state.resource_of(i)),
                    "every arrival on a raised resource must come from a high resource",
                )?;
            }
        }
    }
    structural(
        arrivals_into_raised == movers_from_raised.len() + raised.len(),
        "arrivals on raised resources must exactly replace leavers and add one per resource",
    )?;
    // High resources that stay high keep their load, and nobody enters them
    // from outside the high set.
    for &r in &cls.high {
        if drained.contains(&r) {
            continue;
        }
        structural(
            loads_after.load(r) == loads.load(r),
            "a high resource that stays high must keep its load",
        )?;
        for i in 0..instance.players() {
            if after.resource_of(i) == r && state.resource_of(i) != r {
                structural(
                    cls.high.contains(&state.resource_of(i)),
                    "arrivals on a persistent high resource must come from the high set",
                )?;
            }
        }
    }
    // At least as many members leave the drained set as enter the raised set.
    let leavers_from_drained = members
        .iter()
        .filter(|&&i| {
            drained.contains(&state.resource_of(i)) && !drained.contains(&after.resource_of(i))
        })
        .count();
    structural(
        leavers_from_drained >= movers_from_raised.len() + raised.len(),
        "enough movers must leave the drained set to supply the raised one",
    )?;

    // ---- Symmetric regime -----------------------------------------------------
    let balanced = match (max_neighbors_drained, min_neighbors_raised) {
        (Some(max_h), Some(min_l)) if max_h <= min_l => {
            structural(
                drained.len() == raised.len(),
                "the symmetric regime forces equally many drained and raised resources",
            )?;
            structural(
                max_h == min_l,
                "the symmetric regime forces the neighbor extremes to coincide",
            )?;
            let q = drained.len();
            let k = max_h;
            structural(
                movers_from_drained.len() == movers_from_raised.len() + q,
                "the symmetric regime fixes the mover surplus to one per resource",
            )?;
            for &r in &raised {
                let occupancy =
                    members.iter().filter(|&&j| state.resource_of(j) == r).count();
                structural(
                    occupancy == k,
                    "each raised resource must hold the common neighbor count in movers",
                )?;
            }
            for &r in &drained {
                let occupancy =
                    members.iter().filter(|&&j| state.resource_of(j) == r).count();
                structural(
                    occupancy == k + 1,
                    "each drained resource must hold one more mover than the common neighbor count",
                )?;
            }
            for &i in &movers_from_drained {
                structural(
                    same_resource_neighbors(graph, state, i, state.resource_of(i)) == k,
                    "every mover from a drained resource must have exactly the common neighbor count at home",
                )?;
                structural(
                    after.resource_of(i) != state.resource_of(i),
                    "in the symmetric regime every mover from a drained resource departs",
                )?;
            }
            for r in 0..instance.resources() {
                if !drained.contains(&r) && !raised.contains(&r) {
                    structural(
                        loads_after.load(r) == loads.load(r),
                        "in the symmetric regime loads outside the drained and raised sets are unchanged",
                    )?;
                }
            }
            Some(BalancedProfile { q, k })
        }
        _ => None,
    };

    Ok(DeviationAnalysis {
        d_max,
        high: cls.high,
        low: cls.low,
        drained,
        raised,
        movers_from_drained,
        movers_from_raised,
        max_neighbors_drained,
        min_neighbors_raised,
        balanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tiny_linear_game;

    fn all_states(instance: &GameInstance) -> Vec<State> {
        let n = instance.players();
        let m = instance.resources();
        let mut out = Vec::new();
        let total = m.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut assignment = Vec::with_capacity(n);
            for _ in 0..n {
                assignment.push(c % m);
                c /= m;
            }
            out.push(State::new(instance, assignment).unwrap());
        }
        out
    }

    #[test]
    fn subset_iterator_orders_by_size_then_lex() {
        let subsets: Vec<Vec<Player>> = SubsetIter::new(3).collect();
        assert_eq!(
            subsets,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2],
            ]
        );
    }

    #[test]
    fn subset_iterator_counts_power_set() {
        assert_eq!(SubsetIter::new(5).count(), 31);
        assert_eq!(SubsetIter::new(0).count(), 0);
    }

    #[test]
    fn tiny_linear_balanced_state_empty_graph() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let report = classify_state(&g, &graph, &s, &Budget::default());
        assert!(report.ne.is_yes(), "balanced state is a Nash equilibrium");
        assert!(report.cne.is_yes());
        assert!(report.ce.is_yes(), "empty graph: considerate coincides with Nash");
        assert!(report.se.is_yes(), "no all-strict coalition move exists");
        assert!(report.sse.is_no(), "a weak improving move always exists here");
        // First witness in order: coalition {0, 2}, player 2 moving over
        // while player 0 stays and strictly gains.
        let w = report.sse.witness.unwrap();
        assert_eq!(w.coalition_vec(), vec![0, 2]);
        assert_eq!(w.target(0), Some(0));
        assert_eq!(w.target(2), Some(1));
    }

    #[test]
    fn streaming_classification_emits_each_verdict_in_report_order() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let mut seen = Vec::new();
        let report =
            classify_state_with(&g, &graph, &s, &Budget::default(), true, |name, status| {
                seen.push((name, status.clone()));
            });
        let names: Vec<&str> = seen.iter().map(|(n, _)| *n).collect();
        assert_eq!(
            names,
            ["ne", "cne", "se", "sse", "sce", "ce", "partition"],
            "every notion is announced, in report order"
        );
        let by_name = |n: &str| seen.iter().find(|(m, _)| *m == n).unwrap().1.clone();
        assert_eq!(by_name("ne"), report.ne);
        assert_eq!(by_name("sse"), report.sse);
        assert_eq!(Some(by_name("partition")), report.partition);
        // The basic variant announces neither all-subsets notion.
        let mut basic = Vec::new();
        classify_state_with(&g, &graph, &s, &Budget::default(), false, |name, _| {
            basic.push(name);
        });
        assert_eq!(basic, ["ne", "cne", "sce", "ce", "partition"]);
    }

    #[test]
    fn tiny_linear_no_state_is_super_strong() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        for s in all_states(&g) {
            let report = classify_state(&g, &graph, &s, &Budget::default());
            assert!(
                report.sse.is_no(),
                "state {:?} must admit a weak improving move",
                s.assignment()
            );
            assert!(report.implication_violations().is_empty());
        }
    }

    #[test]
    fn tiny_linear_empty_graph_ce_equals_ne() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        for s in all_states(&g) {
            let report = classify_state(&g, &graph, &s, &Budget::default());
            assert_eq!(
                report.ce.is_yes(),
                report.ne.is_yes(),
                "with no edges, considerate equilibria are exactly Nash equilibria ({:?})",
                s.assignment()
            );
        }
    }

    #[test]
    fn single_player_every_state_is_everything() {
        let g = GameInstance::new(1, 2, vec![vec![3], vec![3]]).unwrap();
        let graph = SocialGraph::empty(1);
        for s in all_states(&g) {
            let report = classify_state(&g, &graph, &s, &Budget::default());
            assert!(report.ne.is_yes());
            assert!(report.sse.is_yes(), "a lone player has no weak improving move");
            assert!(report.ce.is_yes());
        }
    }

    #[test]
    fn ce_search_is_deterministic_and_matches_report() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        for s in all_states(&g) {
            let direct =
                find_weak_considerate_clique_move(&g, &graph, &s, &Budget::default()).unwrap();
            let report = classify_state(&g, &graph, &s, &Budget::default());
            assert_eq!(direct.is_none(), report.ce.is_yes());
            assert_eq!(direct, report.ce.witness);
        }
    }

    #[test]
    fn budget_exhaustion_is_an_error_not_a_verdict() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let tiny = Budget { max_cliques: 20_000, max_deviations: 2 };
        assert!(matches!(
            find_weak_considerate_clique_move(&g, &graph, &s, &tiny),
            Err(Error::Budget(_))
        ));
        // classify_state folds the same failure into explicit unknowns.
        let report = classify_state(&g, &graph, &s, &tiny);
        assert_eq!(report.ce.verdict, Verdict::Unknown);
        assert_eq!(report.ce.witness, None);
    }

    #[test]
    fn clique_cap_exhaustion_is_an_error() {
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let tiny = Budget { max_cliques: 2, max_deviations: 1_000 };
        assert!(matches!(
            find_weak_considerate_clique_move(&g, &graph, &s, &tiny),
            Err(Error::CliqueCap { .. })
        ));
    }

    #[test]
    fn partition_check_requires_clique_partition() {
        let g = tiny_linear_game();
        let path = SocialGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        assert!(matches!(
            find_weak_improving_partition_move(&g, &path, &s, &Budget::default()),
            Err(Error::Contract(_))
        ));
        let report = classify_state(&g, &path, &s, &Budget::default());
        assert!(report.partition.is_none(), "path graph has no clique partition");
    }

    #[test]
    fn partition_flag_matches_ce_on_clique_partition() {
        // On a disjoint union of cliques the two notions provably coincide.
        let g = tiny_linear_game();
        let graph = SocialGraph::from_edges(3, &[(0, 1)]).unwrap(); // {0,1} + {2}
        for s in all_states(&g) {
            let report = classify_state(&g, &graph, &s, &Budget::default());
            let partition = report.partition.expect("graph is a clique partition");
            assert_eq!(
                partition.verdict, report.ce.verdict,
                "partition and considerate verdicts must agree on {:?}",
                s.assignment()
            );
        }
    }

    #[test]
    fn singleton_oracle_agrees_with_nash_predicate() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        for s in all_states(&g) {
            let witness = find_improving_singleton_move(&g, &graph, &s).unwrap();
            assert_eq!(witness.is_none(), is_nash(&g, &s), "state {:?}", s.assignment());
        }
    }

    #[test]
    fn analysis_rejects_non_equilibrium_start() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 0, 0]).unwrap();
        let dev = Deviation::from_pairs([(0, 1)]).unwrap();
        assert!(matches!(
            analyze_deviation(&g, &graph, &s, &dev),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn analysis_rejects_non_clique_coalition() {
        let g = tiny_linear_game();
        let path = SocialGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        let dev = Deviation::from_pairs([(0, 1), (2, 1)]).unwrap();
        assert!(matches!(
            analyze_deviation(&g, &path, &s, &dev),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn analysis_rejects_non_witness_move() {
        let g = tiny_linear_game();
        let graph = SocialGraph::empty(3);
        let s = State::new(&g, vec![0, 1, 0]).unwrap();
        // Player 1 moving onto the loaded resource is strictly worse.
        let dev = Deviation::from_pairs([(1, 0)]).unwrap();
        assert!(matches!(
            analyze_deviation(&g, &graph, &s, &dev),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn analysis_of_a_simple_two_player_swap() {
        // Adjacent players 0 and 1 share r0 paying d(2) = 2 = d_max; the
        // empty r1 has d(1) = 2, so it is low, and the state is an
        // equilibrium. Coalition {0, 1}: player 0 moves to r1 (still pays
        // 2), player 1 stays and drops to 1 — weak considerate improving.
        // r0 is drained (delay falls to 1), r1 is raised.
        let g = GameInstance::new(2, 2, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let graph = SocialGraph::from_edges(2, &[(0, 1)]).unwrap();
        let s = State::new(&g, vec![0, 0]).unwrap();
        assert!(is_nash(&g, &s));
        let dev = Deviation::from_pairs([(0, 1), (1, 0)]).unwrap();
        let a = analyze_deviation(&g, &graph, &s, &dev).unwrap();
        assert_eq!(a.d_max, 2);
        assert_eq!(a.high, vec![0]);
        assert_eq!(a.low, vec![1]);
        assert_eq!(a.drained, vec![0]);
        assert_eq!(a.raised, vec![1]);
        assert_eq!(a.movers_from_drained, vec![0, 1]);
        assert!(a.movers_from_raised.is_empty());
        assert_eq!(a.max_neighbors_drained, Some(1));
        // Neither mover has a neighbor waiting on the empty r1.
        assert_eq!(a.min_neighbors_raised, Some(0));
        // max (1) exceeds min (0), so the symmetric regime does not apply.
        assert_eq!(a.balanced, None);
    }

    #[test]
    fn analysis_bookkeeping_with_persistent_high_resource() {
        // Pairs {0,1} on r0 and {2,3} on r1 all pay d(2) = 4 = d_max; the
        // empty r2 has d(1) = 4 (low). Coalition {0,1} sends 0 to r2: r0 is
        // drained, r1 stays high with unchanged load, r2 is raised.
        let g = GameInstance::new(
            4,
            3,
            vec![vec![1, 4, 5, 6], vec![1, 4, 5, 6], vec![4, 5, 6, 7]],
        )
        .unwrap();
        let graph = SocialGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let s = State::new(&g, vec![0, 0, 1, 1]).unwrap();
        assert!(is_nash(&g, &s));
        let dev = Deviation::from_pairs([(0, 2), (1, 0)]).unwrap();
        let a = analyze_deviation(&g, &graph, &s, &dev).unwrap();
        assert_eq!(a.d_max, 4);
        assert_eq!(a.high, vec![0, 1]);
        assert_eq!(a.low, vec![2]);
        assert_eq!(a.drained, vec![0]);
        assert_eq!(a.raised, vec![2]);
        assert_eq!(a.movers_from_drained, vec![0, 1]);
        assert!(a.movers_from_raised.is_empty());
        assert_eq!(a.max_neighbors_drained, Some(1));
        assert_eq!(a.min_neighbors_raised, Some(0));
        assert_eq!(a.balanced, None);
    }
}
