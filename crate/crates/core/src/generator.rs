//! Seeded random instance generation for test corpora and CLI scripting.
//!
//! Every output is fully reproducible from the numeric parameters plus a
//! 64-bit seed: the RNG is a fixed-algorithm stream cipher (ChaCha8), delay
//! tables are drawn before graph edges, and both loops run in fixed index
//! order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Cost, GameInstance};
use crate::social::SocialGraph;

/// How to wire the social graph of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    /// No edges: every coalition is a singleton.
    Empty,
    /// Erdős–Rényi: each unordered pair is an edge independently with
    /// probability `p`.
    Gnp { p: f64 },
    /// Disjoint cliques of `size` consecutive players; the last clique may
    /// be smaller. The result always admits a partition into classes.
    Cliques { size: usize },
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "empty" {
            return Ok(GraphSpec::Empty);
        }
        if let Some(raw) = s.strip_prefix("gnp:") {
            let p: f64 = raw
                .parse()
                .map_err(|_| Error::Validation(format!("edge probability `{raw}` is not a number")))?;
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "edge probability must lie in [0, 1], got {raw}"
                )));
            }
            return Ok(GraphSpec::Gnp { p });
        }
        if let Some(raw) = s.strip_prefix("cliques:") {
            let size: usize = raw
                .parse()
                .map_err(|_| Error::Validation(format!("clique size `{raw}` is not an integer")))?;
            if size == 0 {
                return Err(Error::Validation("clique size must be at least 1".into()));
            }
            return Ok(GraphSpec::Cliques { size });
        }
        Err(Error::Validation(format!(
            "graph spec `{s}` not recognized; expected empty, gnp:<p>, or cliques:<k>"
        )))
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Empty => write!(f, "empty"),
            GraphSpec::Gnp { p } => write!(f, "gnp:{p}"),
            GraphSpec::Cliques { size } => write!(f, "cliques:{size}"),
        }
    }
}

/// Generates a random instance and social graph.
///
/// Each resource's delay table is a sorted sample of `n` distinct integers
/// from `[0, delay_max]` (hence strictly increasing); the graph follows
/// `spec`. Requires `delay_max >= n` so every table has room.
pub fn gen_random(
    n: usize,
    m: usize,
    delay_max: Cost,
    spec: &GraphSpec,
    seed: u64,
) -> Result<(GameInstance, SocialGraph)> {
    if n == 0 {
        return Err(Error::Validation("need at least one player".into()));
    }
    if m == 0 {
        return Err(Error::Validation("need at least one resource".into()));
    }
    if delay_max < n as Cost {
        return Err(Error::Validation(format!(
            "delay_max {delay_max} leaves no room for {n} distinct non-negative delays"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut tables = Vec::with_capacity(m);
    for _ in 0..m {
        let mut draws: BTreeSet<Cost> = BTreeSet::new();
        while draws.len() < n {
            draws.insert(rng.gen_range(0..=delay_max));
        }
        tables.push(draws.into_iter().collect::<Vec<Cost>>());
    }
    let instance = GameInstance::new(n, m, tables)?;

    let mut graph = SocialGraph::empty(n);
    match *spec {
        GraphSpec::Empty => {}
        GraphSpec::Gnp { p } => {
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(p) {
                        graph.add_edge(i, j)?;
                    }
                }
            }
        }
        GraphSpec::Cliques { size } => {
            for chunk_start in (0..n).step_by(size) {
                let chunk_end = usize::min(chunk_start + size, n);
                for i in chunk_start..chunk_end {
                    for j in i + 1..chunk_end {
                        graph.add_edge(i, j)?;
                    }
                }
            }
        }
    }

    Ok((instance, graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::social::partition_classes;
    use crate::textio::instance_to_string;

    #[test]
    fn spec_strings_round_trip() {
        for text in ["empty", "gnp:0.25", "cliques:3"] {
            let spec: GraphSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        for text in ["gnp:1.5", "gnp:-0.1", "gnp:abc", "gnp:inf", "cliques:0", "cliques:x", "ring"] {
            assert!(text.parse::<GraphSpec>().is_err(), "{text} must not parse");
        }
    }

    #[test]
    fn same_seed_reproduces_the_instance() {
        let (a_inst, a_graph) = gen_random(8, 4, 50, &GraphSpec::Gnp { p: 0.5 }, 7).unwrap();
        let (b_inst, b_graph) = gen_random(8, 4, 50, &GraphSpec::Gnp { p: 0.5 }, 7).unwrap();
        assert_eq!(
            instance_to_string(&a_inst, &a_graph),
            instance_to_string(&b_inst, &b_graph)
        );
    }

    #[test]
    fn different_seeds_differ() {
        let (a_inst, a_graph) = gen_random(8, 4, 1000, &GraphSpec::Gnp { p: 0.5 }, 1).unwrap();
        let (b_inst, b_graph) = gen_random(8, 4, 1000, &GraphSpec::Gnp { p: 0.5 }, 2).unwrap();
        assert_ne!(
            instance_to_string(&a_inst, &a_graph),
            instance_to_string(&b_inst, &b_graph)
        );
    }

    #[test]
    fn tight_delay_budget_still_yields_increasing_tables() {
        // delay_max == n leaves n + 1 candidate values for n slots.
        let (inst, _) = gen_random(6, 3, 6, &GraphSpec::Empty, 99).unwrap();
        for r in 0..3 {
            for load in 1..6 {
                assert!(inst.delay(r, load) < inst.delay(r, load + 1));
                assert!(inst.delay(r, load + 1) <= 6);
            }
        }
    }

    #[test]
    fn infeasible_delay_budget_is_a_usage_error() {
        let err = gen_random(6, 2, 5, &GraphSpec::Empty, 0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn gnp_extremes_yield_empty_and_complete_graphs() {
        let (_, empty) = gen_random(6, 2, 20, &GraphSpec::Gnp { p: 0.0 }, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let (_, full) = gen_random(6, 2, 20, &GraphSpec::Gnp { p: 1.0 }, 3).unwrap();
        assert_eq!(full.edge_count(), 6 * 5 / 2);
    }

    #[test]
    fn cliques_partition_with_a_short_tail() {
        let (_, graph) = gen_random(7, 2, 20, &GraphSpec::Cliques { size: 3 }, 5).unwrap();
        let classes = partition_classes(&graph).expect("disjoint cliques partition");
        assert_eq!(classes, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]]);
    }

    #[test]
    fn unit_cliques_mean_no_edges() {
        let (_, graph) = gen_random(5, 2, 20, &GraphSpec::Cliques { size: 1 }, 5).unwrap();
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(partition_classes(&graph).unwrap().len(), 5);
    }
}
