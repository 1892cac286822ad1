//! Independent reference decider.
//!
//! Deliberately shares no search machinery with [`crate::solver`]: states
//! are fully labeled position vectors (no blocker canonicalization), move
//! generation walks the free region with a recursive depth-first
//! exploration, and duplicate detection hashes the raw vectors. Slower, but
//! an honest second opinion for cross-checking.

use std::collections::{HashSet, VecDeque};

use crate::graph::{Graph, Vertex};
use crate::instance::Instance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    /// Solvable; the payload is the minimum number of moves.
    Yes(usize),
    /// Not solvable within the asked depth.
    No,
    /// The state cap was hit first.
    CapExceeded,
}

fn explore(graph: &Graph, blocked: &[bool], v: Vertex, seen: &mut Vec<bool>, out: &mut Vec<Vertex>) {
    seen[v] = true;
    for &w in graph.neighbors(v) {
        if !seen[w] && !blocked[w] {
            out.push(w);
            explore(graph, blocked, w, seen, out);
        }
    }
}

fn home(state: &[Vertex], inst: &Instance) -> bool {
    inst.dest_robots.iter().enumerate().all(|(i, r)| state[i] == r.target)
}

/// Breadth-first decision over labeled states: is there a schedule of at
/// most `depth` moves? Returns the exact minimum when one exists.
pub fn decide(inst: &Instance, depth: usize, max_states: usize) -> OracleOutcome {
    let start = inst.starts();
    if home(&start, inst) {
        return OracleOutcome::Yes(0);
    }
    let mut seen: HashSet<Vec<Vertex>> = HashSet::from([start.clone()]);
    let mut frontier: VecDeque<(Vec<Vertex>, usize)> = VecDeque::from([(start, 0)]);
    while let Some((state, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        if seen.len() > max_states {
            return OracleOutcome::CapExceeded;
        }
        let mut blocked = vec![false; inst.graph.n()];
        for &p in &state {
            blocked[p] = true;
        }
        for r in 0..state.len() {
            blocked[state[r]] = false;
            let mut reach = Vec::new();
            let mut visited = vec![false; inst.graph.n()];
            explore(&inst.graph, &blocked, state[r], &mut visited, &mut reach);
            blocked[state[r]] = true;
            for w in reach {
                let mut next = state.clone();
                next[r] = w;
                if seen.contains(&next) {
                    continue;
                }
                if home(&next, inst) {
                    return OracleOutcome::Yes(d + 1);
                }
                seen.insert(next.clone());
                frontier.push_back((next, d + 1));
            }
        }
    }
    OracleOutcome::No
}
