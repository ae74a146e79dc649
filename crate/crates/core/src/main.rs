//! Command-line driver: solving, verifying, running dynamics, and
//! generating instances, all over the line-oriented text formats.
//!
//! Exit codes: 0 success, 2 usage or parse problem, 3 contract violation,
//! 4 exhausted search budget, 1 internal error. Results go to standard
//! output; diagnostics go to standard error as a single
//! `error[<category>]: <message>` line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use considerate::dynamics::{run_dynamics, Scheduler, Trace};
use considerate::error::{Error, Result};
use considerate::game::{GameInstance, State};
use considerate::generator::{gen_random, GraphSpec};
use considerate::oracle::{
    classify_state_with, find_improving_singleton_move, find_weak_considerate_clique_move,
    Budget, NotionStatus,
};
use considerate::social::SocialGraph;
use considerate::solver::{solve_ce, SolverConfig};
use considerate::textio::{
    deviation_to_string, instance_to_string, parse_instance, parse_schedule, parse_state,
    schedule_to_string, state_to_string,
};
use considerate::{cyclegen, Deviation};

/// Seed used when none is given, so default runs are reproducible.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "considerate",
    version,
    about = "Solve, verify, and exercise resource selection games with social-network coalitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a state no clique can leave by a weak considerate improving move.
    Solve {
        /// Instance file (may include edge lines for the social graph).
        instance: PathBuf,
        /// Write the constructed improvement path to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Accepted for scripting uniformity; the construction is deterministic.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Report which equilibrium notions a state satisfies.
    Verify {
        instance: PathBuf,
        state: PathBuf,
        /// Also search the two all-subsets notions (exponential in players).
        #[arg(long)]
        full: bool,
        /// Cap on enumerated cliques per clique-restricted notion.
        #[arg(long = "budget-cliques", default_value_t = Budget::default().max_cliques)]
        budget_cliques: usize,
        /// Cap on classified deviations per notion.
        #[arg(long = "budget-devs", default_value_t = Budget::default().max_deviations)]
        budget_devs: usize,
    },
    /// Run coalition better-response dynamics from a state.
    Dynamics {
        instance: PathBuf,
        state: PathBuf,
        /// scripted:<schedule-file> | random:<seed> | exhaustive
        #[arg(long)]
        scheduler: String,
        /// Maximum number of applied moves.
        #[arg(long = "max-steps")]
        max_steps: usize,
        /// Also write the step and outcome lines to this file.
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
    },
    /// Write the 266-player instance family whose dynamics provably cycle.
    GenCycle {
        /// Output directory for instance, state, schedule, and manifest files.
        #[arg(long)]
        out: PathBuf,
        /// Replay budget; defaults to two full rotations of the schedule.
        #[arg(long = "max-steps")]
        max_steps: Option<usize>,
    },
    /// Generate a seeded random instance and social graph.
    GenRandom {
        /// Number of players.
        #[arg(long)]
        players: usize,
        /// Number of resources.
        #[arg(long)]
        resources: usize,
        /// Upper bound for delay values; must be at least the player count.
        #[arg(long = "delay-max")]
        delay_max: u64,
        /// empty | gnp:<p> | cliques:<k>
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the instance file here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Restores the default Unix reaction to a closed pipe, so
/// `considerate ... | head` terminates quietly instead of panicking when
/// the reader goes away. Rust's runtime ignores SIGPIPE by default, which
/// turns the resulting write error into a panic inside `println!`.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve { instance, trace, seed: _ } => cmd_solve(&instance, trace.as_deref()),
        Command::Verify { instance, state, full, budget_cliques, budget_devs } => {
            let budget = Budget { max_cliques: budget_cliques, max_deviations: budget_devs };
            cmd_verify(&instance, &state, full, &budget)
        }
        Command::Dynamics { instance, state, scheduler, max_steps, trace_out } => {
            cmd_dynamics(&instance, &state, &scheduler, max_steps, trace_out.as_deref())
        }
        Command::GenCycle { out, max_steps } => cmd_gen_cycle(&out, max_steps),
        Command::GenRandom { players, resources, delay_max, graph, seed, out } => {
            cmd_gen_random(players, resources, delay_max, &graph, seed, out.as_deref())
        }
    }
}

// ============================================================================
// File plumbing
// ============================================================================

/// Keeps the failing path in the error: several commands take more than one
/// file, and a bare "No such file or directory" would not say which.
fn annotate_io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| annotate_io(path, e))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| annotate_io(path, e))
}

fn load_instance(path: &Path) -> Result<(GameInstance, SocialGraph)> {
    parse_instance(&read_file(path)?)
}

fn load_state(instance: &GameInstance, path: &Path) -> Result<State> {
    parse_state(instance, &read_file(path)?)
}

// ============================================================================
// solve
// ============================================================================

/// Summarizes a deviation search as a verdict word: exhausted family with no
/// witness is "yes", a witness is "no", a blown budget is "unknown"; other
/// failures abort.
fn verdict_word(result: Result<Option<Deviation>>) -> Result<&'static str> {
    match result {
        Ok(None) => Ok("yes"),
        Ok(Some(_)) => Ok("no"),
        Err(Error::Budget(_)) | Err(Error::CliqueCap { .. }) => Ok("unknown"),
        Err(e) => Err(e),
    }
}

fn cmd_solve(instance_path: &Path, trace_path: Option<&Path>) -> Result<()> {
    let (instance, graph) = load_instance(instance_path)?;
    let config = SolverConfig::for_instance(&instance)?;
    let trace = solve_ce(&instance, &graph, &config)?;
    let final_state = trace.final_state();

    let budget = Budget::default();
    let ne = verdict_word(find_improving_singleton_move(&instance, &graph, final_state))?;
    let ce = verdict_word(find_weak_considerate_clique_move(&instance, &graph, final_state, &budget))?;

    if let Some(path) = trace_path {
        let mut lines = String::new();
        lines.push_str(&format!(
            "initial {} phi={}\n",
            state_to_string(&trace.initial).trim_end(),
            trace.phi_start
        ));
        for (k, step) in trace.steps.iter().enumerate() {
            let dev = Deviation::from_pairs([(step.mv.player, step.mv.to)])?;
            lines.push_str(&format!(
                "step {k} {} -> {} phi={}\n",
                deviation_to_string(&dev),
                state_to_string(&step.state).trim_end(),
                step.phi
            ));
        }
        write_file(path, &lines)?;
    }

    print!("{}", state_to_string(final_state));
    println!(
        "result NE={ne} CE={ce} iterations={} phi_start={} phi_end={}",
        trace.iterations(),
        trace.phi_start,
        trace.phi_end()
    );
    Ok(())
}

// ============================================================================
// verify
// ============================================================================

fn notion_line(name: &str, status: &NotionStatus) -> String {
    match &status.witness {
        Some(w) => format!("{name} {} witness: {}", status.verdict, deviation_to_string(w)),
        None => format!("{name} {}", status.verdict),
    }
}

fn cmd_verify(instance_path: &Path, state_path: &Path, full: bool, budget: &Budget) -> Result<()> {
    let (instance, graph) = load_instance(instance_path)?;
    let state = load_state(&instance, state_path)?;
    // Print each verdict as its search finishes: the clique searches can
    // run for minutes on large instances and would otherwise look like a
    // hang while the cheap singleton verdicts sit ready.
    classify_state_with(&instance, &graph, &state, budget, full, |name, status| {
        println!("{}", notion_line(name, status));
    });
    Ok(())
}

// ============================================================================
// dynamics
// ============================================================================

fn trace_lines(trace: &Trace) -> String {
    let mut out = String::new();
    for (k, step) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "step {k} {} -> {}\n",
            deviation_to_string(&step.dev),
            state_to_string(&step.state).trim_end()
        ));
    }
    out.push_str(&format!("outcome {}\n", trace.outcome));
    out
}

fn parse_scheduler(raw: &str) -> Result<Scheduler> {
    if let Some(path) = raw.strip_prefix("scripted:") {
        let schedule = parse_schedule(&read_file(Path::new(path))?)?;
        return Ok(Scheduler::Scripted(schedule));
    }
    if let Some(seed) = raw.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| {
            Error::Validation(format!("random scheduler seed `{seed}` is not a 64-bit integer"))
        })?;
        return Ok(Scheduler::RandomClique { seed });
    }
    if raw == "exhaustive" {
        return Ok(Scheduler::ExhaustiveFirst);
    }
    Err(Error::Validation(format!(
        "scheduler `{raw}` not recognized; expected scripted:<file>, random:<seed>, or exhaustive"
    )))
}

fn cmd_dynamics(
    instance_path: &Path,
    state_path: &Path,
    scheduler_raw: &str,
    max_steps: usize,
    trace_out: Option<&Path>,
) -> Result<()> {
    let (instance, graph) = load_instance(instance_path)?;
    let state = load_state(&instance, state_path)?;
    let scheduler = parse_scheduler(scheduler_raw)?;
    let trace = run_dynamics(&instance, &graph, &state, &scheduler, max_steps, &Budget::default())?;
    let lines = trace_lines(&trace);
    if let Some(path) = trace_out {
        write_file(path, &lines)?;
    }
    print!("{lines}");
    Ok(())
}

// ============================================================================
// gen-cycle
// ============================================================================

fn cmd_gen_cycle(out_dir: &Path, max_steps: Option<usize>) -> Result<()> {
    let bundle = cyclegen::build_cycle_instance();
    let max_steps = max_steps.unwrap_or(2 * bundle.schedule.len());

    fs::create_dir_all(out_dir).map_err(|e| annotate_io(out_dir, e))?;
    let writes: [(&str, String); 4] = [
        ("instance.txt", instance_to_string(&bundle.instance, &bundle.graph)),
        ("state.txt", state_to_string(&bundle.start)),
        ("schedule.txt", schedule_to_string(&bundle.schedule)),
        ("manifest.txt", manifest_text(&bundle)),
    ];
    for (name, content) in writes {
        let path = out_dir.join(name);
        write_file(&path, &content)?;
        println!("wrote {}", path.display());
    }

    let cert = cyclegen::replay_and_certify(&bundle, max_steps)?;
    println!(
        "cycle certified: first_repeat={} period={} moves_validated={}",
        cert.first_repeat_index, cert.period, cert.moves_validated
    );
    Ok(())
}

fn manifest_text(bundle: &cyclegen::CycleBundle) -> String {
    let mut out = String::new();
    for (i, name) in bundle.player_names.iter().enumerate() {
        out.push_str(&format!("player {i} = {name}\n"));
    }
    for (r, name) in bundle.resource_names.iter().enumerate() {
        out.push_str(&format!("resource {r} = {name}\n"));
    }
    out
}

// ============================================================================
// gen-random
// ============================================================================

fn cmd_gen_random(
    players: usize,
    resources: usize,
    delay_max: u64,
    graph_raw: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let spec: GraphSpec = graph_raw.parse()?;
    let (instance, graph) = gen_random(players, resources, delay_max, &spec, seed)?;
    let text = instance_to_string(&instance, &graph);
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
