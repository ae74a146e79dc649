//! Undirected social networks over the player set.
//!
//! The graph decides which coalitions may form (cliques) and whose welfare a
//! deviating coalition must respect (its neighborhood). Neighborhoods follow
//! the literal union-of-adjacency definition: `N(C) = { j | some i in C has
//! an edge {i,j} }`, so members of `C` that are adjacent to other members
//! appear in `N(C)` themselves.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::game::{Player, Resource, State};

// ============================================================================
// Graph
// ============================================================================

/// Simple undirected graph on players `0..n`. No loops, no multi-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    n: usize,
    adj: Vec<BTreeSet<Player>>,
}

impl SocialGraph {
    /// An edgeless graph on `n` players.
    #[must_use]
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Builds a graph from an edge list, rejecting loops and out-of-range
    /// endpoints. Duplicate edges are tolerated (the graph is simple).
    pub fn from_edges(n: usize, edges: &[(Player, Player)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: Player, j: Player) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Validation(format!(
                "edge {{{i}, {j}}} references a player outside 0..{}",
                self.n
            )));
        }
        if i == j {
            return Err(Error::Validation(format!("edge {{{i}, {j}}} is a loop")));
        }
        self.adj[i].insert(j);
        self.adj[j].insert(i);
        Ok(())
    }

    #[must_use]
    pub fn players(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn has_edge(&self, i: Player, j: Player) -> bool {
        self.adj[i].contains(&j)
    }

    #[must_use]
    pub fn neighbors(&self, i: Player) -> &BTreeSet<Player> {
        &self.adj[i]
    }

    #[must_use]
    pub fn degree(&self, i: Player) -> usize {
        self.adj[i].len()
    }

    /// All edges as ordered pairs `(i, j)` with `i < j`, ascending.
    #[must_use]
    pub fn edges(&self) -> Vec<(Player, Player)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &j in &self.adj[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// True iff every pair of distinct players in `set` is adjacent.
    /// Singletons and the empty set are cliques.
    #[must_use]
    pub fn is_clique(&self, set: &[Player]) -> bool {
        for (k, &i) in set.iter().enumerate() {
            for &j in &set[k + 1..] {
                if i == j || !self.has_edge(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

// ============================================================================
// Neighborhoods
// ============================================================================

/// `N(C)`: every player adjacent to at least one member of `coalition`.
/// Members adjacent to other members are included; an isolated member is not.
#[must_use]
pub fn neighborhood(graph: &SocialGraph, coalition: &[Player]) -> BTreeSet<Player> {
    let mut out = BTreeSet::new();
    for &i in coalition {
        out.extend(graph.neighbors(i).iter().copied());
    }
    out
}

/// `|N_{i,r}(s)|`: how many neighbors of `i` sit on resource `r` in `state`.
#[must_use]
pub fn same_resource_neighbors(
    graph: &SocialGraph,
    state: &State,
    i: Player,
    r: Resource,
) -> usize {
    graph
        .neighbors(i)
        .iter()
        .filter(|&&j| state.resource_of(j) == r)
        .count()
}

/// Neighbors of `i` that share `i`'s own resource in `state`.
#[must_use]
pub fn own_resource_neighbors(graph: &SocialGraph, state: &State, i: Player) -> usize {
    same_resource_neighbors(graph, state, i, state.resource_of(i))
}

// ============================================================================
// Cliques
// ============================================================================

/// Every clique of the graph up to a size limit, each listed exactly once as
/// an ascending player vector, ordered by size and then lexicographically.
/// Singletons are always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSet {
    cliques: Vec<Vec<Player>>,
}

impl CliqueSet {
    #[must_use]
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Player]> {
        self.cliques.iter().map(Vec::as_slice)
    }

    #[must_use]
    pub fn contains(&self, clique: &[Player]) -> bool {
        self.cliques.iter().any(|c| c == clique)
    }
}

/// Enumerates all cliques of size `1..=max_size`.
///
/// Maximal cliques are found first (Bron–Kerbosch with pivoting), then closed
/// downward: every non-empty subset of a clique is a clique. The result is
/// deduplicated and sorted by (size, lexicographic order). If more than `cap`
/// distinct cliques exist the enumeration aborts with a cap error carrying
/// the partial count, so a brute-force caller never silently truncates.
pub fn enumerate_cliques(graph: &SocialGraph, max_size: usize, cap: usize) -> Result<CliqueSet> {
    let mut found: BTreeSet<Vec<Player>> = BTreeSet::new();
    // Singletons are cliques even for isolated players.
    for i in 0..graph.players() {
        found.insert(vec![i]);
    }
    if found.len() > cap {
        return Err(Error::CliqueCap {
            cap,
            partial: cap,
        });
    }

    let mut maximal: Vec<Vec<Player>> = Vec::new();
    let all: BTreeSet<Player> = (0..graph.players()).collect();
    bron_kerbosch(graph, &mut BTreeSet::new(), all, BTreeSet::new(), &mut maximal);

    for clique in maximal {
        downward_close(&clique, max_size, cap, &mut found)?;
    }

    let mut cliques: Vec<Vec<Player>> = found.into_iter().collect();
    cliques.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(CliqueSet { cliques })
}

/// Bron–Kerbosch with pivoting. `r` is the clique under construction, `p`
/// the candidates, `x` the excluded set. Deterministic because all sets are
/// ordered.
fn bron_kerbosch(
    graph: &SocialGraph,
    r: &mut BTreeSet<Player>,
    p: BTreeSet<Player>,
    x: BTreeSet<Player>,
    out: &mut Vec<Vec<Player>>,
) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            out.push(r.iter().copied().collect());
        }
        return;
    }
    // Pivot on the candidate/excluded player with the most candidates among
    // its neighbors; only non-neighbors of the pivot need exploring.
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.intersection(graph.neighbors(u)).count())
        .expect("p or x is non-empty");
    // Iterate P \ N(pivot); the pivot itself belongs here when it is in P.
    let candidates: Vec<Player> = p
        .iter()
        .copied()
        .filter(|v| !graph.has_edge(pivot, *v))
        .collect();

    let mut p = p;
    let mut x = x;
    for v in candidates {
        let nv = graph.neighbors(v);
        r.insert(v);
        bron_kerbosch(
            graph,
            r,
            p.intersection(nv).copied().collect(),
            x.intersection(nv).copied().collect(),
            out,
        );
        r.remove(&v);
        p.remove(&v);
        x.insert(v);
    }
}

/// Inserts every non-empty subset of `clique` with size `<= max_size`.
fn downward_close(
    clique: &[Player],
    max_size: usize,
    cap: usize,
    found: &mut BTreeSet<Vec<Player>>,
) -> Result<()> {
    let k = clique.len();
    debug_assert!(k <= 64, "clique sizes beyond 64 players are unsupported");
    for mask in 1u64..(1u64 << k) {
        if (mask.count_ones() as usize) > max_size {
            continue;
        }
        let subset: Vec<Player> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| clique[b]).collect();
        found.insert(subset);
        if found.len() > cap {
            return Err(Error::CliqueCap {
                cap,
                partial: cap,
            });
        }
    }
    Ok(())
}

// ============================================================================
// Partition structure
// ============================================================================

/// If the graph is a disjoint union of cliques, returns the classes (each
/// ascending, ordered by smallest member). Otherwise `None`. Isolated
/// players form singleton classes.
#[must_use]
pub fn partition_classes(graph: &SocialGraph) -> Option<Vec<Vec<Player>>> {
    let n = graph.players();
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // Gather the connected component by breadth-first search.
        let mut component = vec![start];
        seen[start] = true;
        let mut queue = vec![start];
        while let Some(v) = queue.pop() {
            for &w in graph.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    component.push(w);
                    queue.push(w);
                }
            }
        }
        component.sort_unstable();
        if !graph.is_clique(&component) {
            return None;
        }
        classes.push(component);
    }
    Some(classes)
}
