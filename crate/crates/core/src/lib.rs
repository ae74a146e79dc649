//! Solver and verification toolkit for resource selection games whose
//! coalition structure is constrained by a social network.
//!
//! Players each occupy one resource; a resource's delay grows strictly with
//! its load, and every player wants minimal delay. A social graph over the
//! players restricts which groups may coordinate (cliques) and whose welfare
//! a deviating group must respect (its neighborhood). The crate provides:
//!
//! - the game model and text formats ([`game`], [`textio`]),
//! - social-graph machinery and clique enumeration ([`social`]),
//! - exact classification of coalition deviations ([`moves`]),
//! - a constructive solver that reaches a state immune to weak considerate
//!   improving clique moves, with a strictly decreasing integer potential
//!   ([`solver`]),
//! - brute-force equilibrium oracles for cross-checking ([`oracle`]),
//! - coalition better-response dynamics with cycle detection ([`dynamics`]),
//! - a generator for a large instance family on which those dynamics
//!   provably cycle ([`cyclegen`]),
//! - seeded random instance generation ([`generator`]).

pub mod error;
pub mod game;
pub mod social;
pub mod moves;
pub mod textio;
pub mod solver;
pub mod oracle;
pub mod dynamics;
pub mod cyclegen;
pub mod generator;

pub use error::{Error, Result};
pub use game::{
    tiny_linear_game, load_profile, player_cost, total_cost, Cost, GameInstance, LoadProfile,
    Player, Resource, State,
};
pub use moves::{apply_deviation, classify_move, Deviation, MoveClass};
pub use social::{enumerate_cliques, neighborhood, partition_classes, CliqueSet, SocialGraph};
pub use solver::{
    classify_resources, find_witness_move, greedy_nash, is_nash, potential_phi, solve_ce,
    ResourceClassification, SolveStep, SolveTrace, SolverConfig, WitnessKind, WitnessMove,
};
pub use oracle::{
    analyze_deviation, classify_state, classify_state_basic, classify_state_with,
    find_improving_singleton_move,
    find_weak_considerate_clique_move, find_weak_improving_partition_move, Budget,
    DeviationAnalysis, EquilibriumReport, NotionStatus, Verdict,
};
pub use dynamics::{partition_move_check, run_dynamics, Outcome, Scheduler, Trace, TraceStep};
pub use cyclegen::{build_cycle_instance, replay_and_certify, CycleBundle, CycleCertificate};
pub use generator::{gen_random, GraphSpec};
