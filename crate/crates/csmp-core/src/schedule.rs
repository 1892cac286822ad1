//! Schedules: sequences of sliding moves, their validation, and the
//! schedule-structure notions (traversed subgraph, waiting / intersection /
//! important vertices, corridors) the reduction and representation machinery
//! is built on.
//!
//! One robot moves per time step. A move slides a robot along a simple path
//! of length >= 1 edge; every path vertex other than the moving robot's own
//! origin must be free of robots at that step, so the destination is
//! unoccupied as well. Robots that do not move simply wait. The makespan of a
//! schedule is its number of moves.
//!
//! Text format:
//!
//! ```text
//! SCHEDULE 1
//! s <timeStep> <robotId> <v0> <v1> ... <vm>
//! ```
//!
//! Time steps must be strictly increasing; they are renumbered to `1..=q` on
//! parse.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::graph::{Graph, Vertex};
use crate::instance::Instance;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub time_step: usize,
    pub robot: usize,
    /// Traversed path including the origin; at least one edge.
    pub path: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Schedule {
    pub moves: Vec<Move>,
}

impl Schedule {
    pub fn new(moves: Vec<Move>) -> Result<Schedule> {
        let mut last = 0;
        for mv in &moves {
            if mv.time_step <= last {
                return Err(Error::InvalidInput(format!(
                    "time step {} does not increase (previous {last})",
                    mv.time_step
                )));
            }
            if mv.path.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "move at step {} traverses no edge",
                    mv.time_step
                )));
            }
            last = mv.time_step;
        }
        Ok(Schedule { moves })
    }

    pub fn makespan(&self) -> usize {
        self.moves.len()
    }

    /// Renumbers time steps to `1..=q`, preserving order.
    pub fn normalized(&self) -> Schedule {
        let moves = self
            .moves
            .iter()
            .enumerate()
            .map(|(i, mv)| Move { time_step: i + 1, ..mv.clone() })
            .collect();
        Schedule { moves }
    }

    fn is_normalized(&self) -> bool {
        self.moves.iter().enumerate().all(|(i, mv)| mv.time_step == i + 1)
    }
}

/// A semantic rule violation: the first offending time step and the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub time_step: usize,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Replays a schedule against an instance.
///
/// Structural problems (unknown robot, out-of-range vertex, edgeless move,
/// non-contiguous numbering) are reported as errors, distinct from semantic
/// rule violations, which come back as an [`Verdict::Invalid`] naming the
/// first offending time step and rule.
pub fn validate(inst: &Instance, s: &Schedule) -> Result<Verdict> {
    let n = inst.graph.n();
    let k = inst.robot_count();
    for (i, mv) in s.moves.iter().enumerate() {
        if mv.time_step != i + 1 {
            return Err(Error::InvalidInput(format!(
                "time steps are not 1..q: found {} at position {}",
                mv.time_step,
                i + 1
            )));
        }
        if mv.robot >= k {
            return Err(Error::InvalidInput(format!(
                "unknown robot id {} at step {}",
                mv.robot, mv.time_step
            )));
        }
        if mv.path.len() < 2 {
            return Err(Error::InvalidInput(format!("move at step {} traverses no edge", mv.time_step)));
        }
        if let Some(&v) = mv.path.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidInput(format!(
                "vertex {v} out of range at step {}",
                mv.time_step
            )));
        }
    }

    let mut pos = inst.starts();
    for mv in &s.moves {
        if mv.time_step > inst.budget {
            return Ok(Verdict::Invalid(Violation {
                time_step: mv.time_step,
                rule: format!("budget exceeded: move {} > budget {}", mv.time_step, inst.budget),
            }));
        }
        if mv.path[0] != pos[mv.robot] {
            return Ok(Verdict::Invalid(Violation {
                time_step: mv.time_step,
                rule: format!(
                    "move starts at {} but robot {} stands on {}",
                    mv.path[0], mv.robot, pos[mv.robot]
                ),
            }));
        }
        if !inst.graph.is_simple_path(&mv.path) {
            return Ok(Verdict::Invalid(Violation {
                time_step: mv.time_step,
                rule: "move path is not a simple path in the graph".into(),
            }));
        }
        for &v in &mv.path {
            if let Some(other) = (0..k).find(|&r| r != mv.robot && pos[r] == v) {
                return Ok(Verdict::Invalid(Violation {
                    time_step: mv.time_step,
                    rule: format!("path blocked by robot {other} at vertex {v}"),
                }));
            }
        }
        pos[mv.robot] = *mv.path.last().unwrap();
    }
    for (i, r) in inst.dest_robots.iter().enumerate() {
        if pos[i] != r.target {
            return Ok(Verdict::Invalid(Violation {
                time_step: s.moves.len(),
                rule: format!(
                    "destination robot {i} ends on {} instead of target {}",
                    pos[i], r.target
                ),
            }));
        }
    }
    Ok(Verdict::Valid)
}

/// Robot positions after the first `j` moves of a normalized schedule.
/// Purely positional replay; no legality checks beyond origin consistency.
pub fn positions_at(inst: &Instance, s: &Schedule, j: usize) -> Vec<Vertex> {
    debug_assert!(s.is_normalized());
    let mut pos = inst.starts();
    for mv in s.moves.iter().take(j) {
        debug_assert_eq!(mv.path[0], pos[mv.robot]);
        pos[mv.robot] = *mv.path.last().unwrap();
    }
    pos
}

/// The prefix traversed subgraph: same vertex set as the instance graph,
/// edges the union of the first `j` move paths' edges.
pub fn traversed_subgraph_prefix(inst: &Instance, s: &Schedule, j: usize) -> Graph {
    let mut edges = Vec::new();
    for mv in s.moves.iter().take(j) {
        edges.extend(mv.path.windows(2).map(|w| (w[0], w[1])));
    }
    Graph::from_edges_lenient(inst.graph.n(), &edges)
}

/// The full traversed subgraph of the schedule.
pub fn traversed_subgraph(inst: &Instance, s: &Schedule) -> Graph {
    traversed_subgraph_prefix(inst, s, s.moves.len())
}

/// Waiting vertices within time interval `[0, j]`: every vertex some robot
/// rests on at the end of a step in `1..=j`. (A robot that arrives at `v`
/// rests there for the remainder of the step, and the initial positions of
/// robots that have not yet moved are resting positions from step 1 on.)
pub fn waiting_vertices(inst: &Instance, s: &Schedule, j: usize) -> BTreeSet<Vertex> {
    debug_assert!(s.is_normalized());
    let mut waiting = BTreeSet::new();
    let mut pos = inst.starts();
    if j == 0 {
        return waiting;
    }
    for mv in s.moves.iter().take(j) {
        pos[mv.robot] = *mv.path.last().unwrap();
        waiting.extend(pos.iter().copied());
    }
    if s.moves.is_empty() {
        // No moves at all: every robot rests on its start from step 1 on.
        waiting.extend(pos.iter().copied());
    }
    waiting
}

/// Intersection vertices within `[0, j]`: degree >= 3 in the prefix
/// traversed subgraph.
pub fn intersection_vertices(inst: &Instance, s: &Schedule, j: usize) -> BTreeSet<Vertex> {
    let g = traversed_subgraph_prefix(inst, s, j);
    (0..g.n()).filter(|&v| g.degree(v) >= 3).collect()
}

/// Important vertices within `[0, j]`: terminals, waiting vertices and
/// intersection vertices.
pub fn important_vertices(inst: &Instance, s: &Schedule, j: usize) -> BTreeSet<Vertex> {
    let mut imp = inst.terminal_vertices();
    imp.extend(waiting_vertices(inst, s, j));
    imp.extend(intersection_vertices(inst, s, j));
    imp
}

/// Corridors within `[0, j]`: paths of the prefix traversed subgraph whose
/// endpoints are distinct important vertices and whose internal vertices are
/// all unimportant. Each corridor is oriented with its lexicographically
/// smaller end first; the list is sorted.
pub fn corridor_paths(inst: &Instance, s: &Schedule, j: usize) -> Vec<Vec<Vertex>> {
    let g = traversed_subgraph_prefix(inst, s, j);
    let imp = important_vertices(inst, s, j);
    let mut corridors: Vec<Vec<Vertex>> = Vec::new();
    // Direct edges between important vertices.
    for (u, v) in g.edges() {
        if imp.contains(&u) && imp.contains(&v) {
            corridors.push(vec![u, v]);
        }
    }
    // Runs of unimportant vertices. Unimportant vertices of the traversed
    // subgraph always have degree exactly 2: they are never move-path
    // endpoints (those are resting positions or terminals), so they are only
    // traversed through, and degree >= 3 would make them intersections.
    let mut seen = vec![false; g.n()];
    for v in 0..g.n() {
        if seen[v] || imp.contains(&v) || g.degree(v) == 0 {
            continue;
        }
        debug_assert_eq!(g.degree(v), 2, "unimportant traversed vertex has degree 2");
        let walk = |mut prev: Vertex, mut cur: Vertex| -> Vec<Vertex> {
            let mut seq = Vec::new();
            loop {
                seq.push(cur);
                if imp.contains(&cur) {
                    return seq;
                }
                let nbrs = g.neighbors(cur);
                let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
                prev = cur;
                cur = next;
            }
        };
        let left = walk(v, g.neighbors(v)[0]);
        let right = walk(v, g.neighbors(v)[1]);
        let mut path: Vec<Vertex> = left.into_iter().rev().collect();
        path.push(v);
        path.extend(right);
        debug_assert_ne!(path.first(), path.last(), "corridor endpoints are distinct");
        for &x in &path {
            if !imp.contains(&x) {
                seen[x] = true;
            }
        }
        corridors.push(path);
    }
    for c in &mut corridors {
        if c.first() > c.last() {
            c.reverse();
        }
    }
    corridors.sort();
    corridors
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut header_seen = false;
    let mut moves: Vec<Move> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != "SCHEDULE 1" {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header 'SCHEDULE 1', found '{line}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        if tag != "s" {
            return Err(Error::Parse { line: lineno, msg: format!("unknown directive '{tag}'") });
        }
        let nums: Vec<usize> = parts
            .map(|a| {
                a.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("invalid number '{a}'"),
                })
            })
            .collect::<Result<_>>()?;
        if nums.len() < 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: "'s' expects a time step, a robot id and at least two vertices".into(),
            });
        }
        let time_step = nums[0];
        if let Some(prev) = moves.last() {
            if time_step <= prev.time_step {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("time step {time_step} does not increase"),
                });
            }
        }
        moves.push(Move { time_step, robot: nums[1], path: nums[2..].to_vec() });
    }
    if !header_seen {
        return Err(Error::Parse { line: 1, msg: "missing header 'SCHEDULE 1'".into() });
    }
    Ok(Schedule::new(moves)?.normalized())
}

pub fn serialize_schedule(s: &Schedule) -> String {
    let mut out = String::new();
    out.push_str("SCHEDULE 1\n");
    for mv in &s.normalized().moves {
        let _ = write!(out, "s {} {}", mv.time_step, mv.robot);
        for &v in &mv.path {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}
