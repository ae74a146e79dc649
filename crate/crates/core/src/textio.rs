//! Plain line-oriented text formats for instances, states, deviations and
//! schedules.
//!
//! All formats share the same lexical rules: UTF-8 text, one directive per
//! line, fields separated by whitespace, `#` starts a comment that runs to
//! the end of the line, blank lines are ignored. Players and resources are
//! 0-indexed everywhere. Parsers report 1-based line numbers; serializers
//! emit a canonical form that re-parses to an equal value.
//!
//! Instance files (the social graph is part of the instance file):
//! ```text
//! players 3
//! resources 2
//! delay 0 1 2 3        # resource id, then d_r(1..=n)
//! delay 1 1 2 3
//! edge 0 1             # optional, any number of lines
//! ```
//!
//! State files: `state 0 1 0` (one resource per player).
//!
//! Deviation lines: `move 2 0:1 1:0` — coalition size, then
//! `player:target` pairs; members that stay put are listed explicitly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{GameInstance, State};
use crate::moves::Deviation;
use crate::social::SocialGraph;

// ============================================================================
// Shared lexing
// ============================================================================

/// Strips comments and yields (1-based line number, significant tokens).
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((idx + 1, tokens))
        }
    })
}

fn parse_num<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected {what}, got {token:?}"),
    })
}

// ============================================================================
// Instances
// ============================================================================

/// Parses an instance file, including its optional `edge` section.
pub fn parse_instance(text: &str) -> Result<(GameInstance, SocialGraph)> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut delays: Vec<Option<Vec<u64>>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (line, tokens) in significant_lines(text) {
        match tokens[0] {
            "players" => {
                if n.is_some() {
                    return Err(Error::Parse { line, msg: "duplicate players directive".into() });
                }
                if tokens.len() != 2 {
                    return Err(Error::Parse { line, msg: "usage: players <n>".into() });
                }
                n = Some(parse_num(tokens[1], line, "a player count")?);
            }
            "resources" => {
                if m.is_some() {
                    return Err(Error::Parse { line, msg: "duplicate resources directive".into() });
                }
                if tokens.len() != 2 {
                    return Err(Error::Parse { line, msg: "usage: resources <m>".into() });
                }
                let count: usize = parse_num(tokens[1], line, "a resource count")?;
                delays = vec![None; count];
                m = Some(count);
            }
            "delay" => {
                let (n, m) = match (n, m) {
                    (Some(n), Some(m)) => (n, m),
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: "players and resources must be declared before delay lines".into(),
                        })
                    }
                };
                if tokens.len() != 2 + n {
                    return Err(Error::Parse {
                        line,
                        msg: format!("usage: delay <r> <d(1)> ... <d({n})>"),
                    });
                }
                let r: usize = parse_num(tokens[1], line, "a resource id")?;
                if r >= m {
                    return Err(Error::Parse {
                        line,
                        msg: format!("resource {r} out of range 0..{m}"),
                    });
                }
                if delays[r].is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate delay table for resource {r}"),
                    });
                }
                let mut table = Vec::with_capacity(n);
                for tok in &tokens[2..] {
                    table.push(parse_num(tok, line, "a delay value")?);
                }
                delays[r] = Some(table);
            }
            "edge" => {
                if n.is_none() {
                    return Err(Error::Parse {
                        line,
                        msg: "players must be declared before edge lines".into(),
                    });
                }
                if tokens.len() != 3 {
                    return Err(Error::Parse { line, msg: "usage: edge <i> <j>".into() });
                }
                let i = parse_num(tokens[1], line, "a player id")?;
                let j = parse_num(tokens[2], line, "a player id")?;
                edges.push((i, j));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!(
                        "unknown directive {other:?} (expected players, resources, delay or edge)"
                    ),
                })
            }
        }
    }

    let n = n.ok_or_else(|| Error::Parse { line: 0, msg: "missing players directive".into() })?;
    let m = m.ok_or_else(|| Error::Parse { line: 0, msg: "missing resources directive".into() })?;
    let mut tables = Vec::with_capacity(m);
    for (r, t) in delays.into_iter().enumerate() {
        tables.push(t.ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing delay table for resource {r}"),
        })?);
    }
    let instance = GameInstance::new(n, m, tables)?;
    let graph = SocialGraph::from_edges(n, &edges)?;
    Ok((instance, graph))
}

/// Canonical instance text: players, resources, all delay tables in resource
/// order, then edges ascending.
#[must_use]
pub fn instance_to_string(instance: &GameInstance, graph: &SocialGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "players {}", instance.players());
    let _ = writeln!(out, "resources {}", instance.resources());
    for r in 0..instance.resources() {
        let _ = write!(out, "delay {r}");
        for d in instance.delay_table(r) {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    for (i, j) in graph.edges() {
        let _ = writeln!(out, "edge {i} {j}");
    }
    out
}

// ============================================================================
// States
// ============================================================================

/// Parses a state file: exactly one `state` directive.
pub fn parse_state(instance: &GameInstance, text: &str) -> Result<State> {
    let mut found: Option<State> = None;
    for (line, tokens) in significant_lines(text) {
        if tokens[0] != "state" {
            return Err(Error::Parse {
                line,
                msg: format!("unknown directive {:?} (expected state)", tokens[0]),
            });
        }
        if found.is_some() {
            return Err(Error::Parse { line, msg: "duplicate state directive".into() });
        }
        found = Some(parse_state_line(instance, line, &tokens)?);
    }
    found.ok_or_else(|| Error::Parse { line: 0, msg: "missing state directive".into() })
}

fn parse_state_line(instance: &GameInstance, line: usize, tokens: &[&str]) -> Result<State> {
    if tokens.len() != 1 + instance.players() {
        return Err(Error::Parse {
            line,
            msg: format!(
                "state line lists {} entries, instance has {} players",
                tokens.len() - 1,
                instance.players()
            ),
        });
    }
    let mut assignment = Vec::with_capacity(instance.players());
    for tok in &tokens[1..] {
        assignment.push(parse_num(tok, line, "a resource id")?);
    }
    State::new(instance, assignment)
}

#[must_use]
pub fn state_to_string(state: &State) -> String {
    let mut out = String::from("state");
    for r in state.assignment() {
        let _ = write!(out, " {r}");
    }
    out.push('\n');
    out
}

// ============================================================================
// Deviations and schedules
// ============================================================================

/// Parses one `move` line: `move <k> <p>:<r> ...` with exactly `k` pairs.
pub fn parse_deviation_tokens(line: usize, tokens: &[&str]) -> Result<Deviation> {
    if tokens.len() < 2 || tokens[0] != "move" {
        return Err(Error::Parse { line, msg: "usage: move <k> <player>:<resource> ...".into() });
    }
    let k: usize = parse_num(tokens[1], line, "a coalition size")?;
    if tokens.len() != 2 + k {
        return Err(Error::Parse {
            line,
            msg: format!("move declares {k} members but lists {}", tokens.len() - 2),
        });
    }
    let mut pairs = Vec::with_capacity(k);
    for tok in &tokens[2..] {
        let (p, r) = tok.split_once(':').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected <player>:<resource>, got {tok:?}"),
        })?;
        pairs.push((
            parse_num::<usize>(p, line, "a player id")?,
            parse_num::<usize>(r, line, "a resource id")?,
        ));
    }
    Deviation::from_pairs(pairs).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

/// Parses a single deviation from text (ignoring comments/blank lines).
pub fn parse_deviation(text: &str) -> Result<Deviation> {
    let mut found = None;
    for (line, tokens) in significant_lines(text) {
        if found.is_some() {
            return Err(Error::Parse { line, msg: "expected exactly one move line".into() });
        }
        found = Some(parse_deviation_tokens(line, &tokens)?);
    }
    found.ok_or_else(|| Error::Parse { line: 0, msg: "missing move line".into() })
}

/// A schedule is any number of `move` lines in order.
pub fn parse_schedule(text: &str) -> Result<Vec<Deviation>> {
    let mut out = Vec::new();
    for (line, tokens) in significant_lines(text) {
        out.push(parse_deviation_tokens(line, &tokens)?);
    }
    Ok(out)
}

#[must_use]
pub fn deviation_to_string(dev: &Deviation) -> String {
    let mut out = format!("move {}", dev.size());
    for (p, r) in dev.entries() {
        let _ = write!(out, " {p}:{r}");
    }
    out
}

#[must_use]
pub fn schedule_to_string(schedule: &[Deviation]) -> String {
    let mut out = String::new();
    for dev in schedule {
        out.push_str(&deviation_to_string(dev));
        out.push('\n');
    }
    out
}
