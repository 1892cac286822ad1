//! Exact optimal search over canonical configurations.
//!
//! A configuration stores the destination robots' positions by robot id and
//! the blockers as an unordered (sorted) vertex set: free robots are
//! interchangeable, so identities are erased during search and reassigned
//! deterministically when a schedule is extracted.
//!
//! Determinism: successors are enumerated destination robots first (by id),
//! then blockers (by position), destinations in ascending vertex order, so
//! breadth-first search breaks ties by `(robot, destination)`. Witness paths
//! are the lexicographically smallest shortest paths in the free graph at
//! the time of the move.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::graph::{Graph, Vertex};
use crate::instance::Instance;
use crate::schedule::{Move, Schedule};
use crate::{Error, Result};

/// Canonical robot placement: `dest[i]` is destination robot `i`'s vertex,
/// `blockers` is the sorted set of free-robot vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub dest: Vec<Vertex>,
    pub blockers: Vec<Vertex>,
}

impl Configuration {
    pub fn of_instance(inst: &Instance) -> Configuration {
        let mut blockers = inst.free_robots.clone();
        blockers.sort_unstable();
        Configuration { dest: inst.dest_robots.iter().map(|r| r.start).collect(), blockers }
    }

    pub fn occupied_mask(&self, n: usize) -> Vec<bool> {
        let mut occ = vec![false; n];
        for &v in self.dest.iter().chain(self.blockers.iter()) {
            occ[v] = true;
        }
        occ
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximum number of moves (schedule depth); `None` for unbounded.
    pub max_depth: Option<usize>,
    /// Maximum number of expanded states before giving up.
    pub max_states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_depth: None, max_states: 10_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub depth_reached: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Minimum-makespan schedule within the depth cap.
    Solved(Schedule),
    /// No schedule within the depth cap; deeper ones may exist.
    NoWithinDepth,
    /// The entire reachable configuration space holds no solution.
    Infeasible,
    /// The state cap was hit before the search could decide.
    CapExceeded,
}

impl SolveOutcome {
    pub fn schedule(&self) -> Option<&Schedule> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

/// One canonical move: either destination robot `dest_idx` or the blocker
/// standing on `from`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct RawMove {
    pub dest_idx: Option<usize>,
    pub from: Vertex,
    pub to: Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum RawOutcome {
    Found(Vec<RawMove>),
    NoWithinDepth,
    Exhausted,
    CapExceeded,
}

/// Vertices reachable from `v` through unoccupied vertices (ascending order,
/// `v` excluded). `occupied` must not mark `v` itself.
fn reachable_from(graph: &Graph, occupied: &[bool], v: Vertex) -> Vec<Vertex> {
    let mut seen = vec![false; graph.n()];
    seen[v] = true;
    let mut queue = VecDeque::from([v]);
    let mut out = Vec::new();
    while let Some(x) = queue.pop_front() {
        for &y in graph.neighbors(x) {
            if !seen[y] && !occupied[y] {
                seen[y] = true;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Successors of a configuration in canonical `(robot, destination)` order.
pub(crate) fn successors(
    graph: &Graph,
    config: &Configuration,
) -> Vec<(RawMove, Configuration)> {
    let mut occ = config.occupied_mask(graph.n());
    let mut out = Vec::new();
    for i in 0..config.dest.len() {
        let v = config.dest[i];
        occ[v] = false;
        for w in reachable_from(graph, &occ, v) {
            let mut next = config.clone();
            next.dest[i] = w;
            out.push((RawMove { dest_idx: Some(i), from: v, to: w }, next));
        }
        occ[v] = true;
    }
    for (bi, &v) in config.blockers.iter().enumerate() {
        occ[v] = false;
        for w in reachable_from(graph, &occ, v) {
            let mut blockers = config.blockers.clone();
            blockers.remove(bi);
            let at = blockers.binary_search(&w).unwrap_err();
            blockers.insert(at, w);
            let next = Configuration { dest: config.dest.clone(), blockers };
            out.push((RawMove { dest_idx: None, from: v, to: w }, next));
        }
        occ[v] = true;
    }
    out
}

/// Breadth-first search from `start` to the first configuration satisfying
/// `goal`, with duplicate detection by canonical-configuration hashing and
/// parent pointers for move extraction.
pub(crate) fn canonical_search(
    graph: &Graph,
    start: Configuration,
    goal: &dyn Fn(&Configuration) -> bool,
    limits: SearchLimits,
) -> (RawOutcome, SearchStats) {
    let mut stats = SearchStats::default();
    if goal(&start) {
        return (RawOutcome::Found(Vec::new()), stats);
    }
    let mut states: Vec<Configuration> = vec![start.clone()];
    let mut depth: Vec<usize> = vec![0];
    let mut parent: Vec<Option<(usize, RawMove)>> = vec![None];
    let mut index: HashMap<Configuration, usize> = HashMap::from([(start, 0)]);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut truncated = false;

    while let Some(cur) = queue.pop_front() {
        if stats.expanded >= limits.max_states {
            return (RawOutcome::CapExceeded, stats);
        }
        stats.expanded += 1;
        let d = depth[cur];
        stats.depth_reached = stats.depth_reached.max(d);
        let config = states[cur].clone();
        for (mv, next) in successors(graph, &config) {
            if index.contains_key(&next) {
                continue;
            }
            if limits.max_depth.is_some_and(|cap| d + 1 > cap) {
                truncated = true;
                continue;
            }
            stats.generated += 1;
            let id = states.len();
            states.push(next.clone());
            depth.push(d + 1);
            parent.push(Some((cur, mv)));
            index.insert(next.clone(), id);
            if goal(&next) {
                stats.depth_reached = stats.depth_reached.max(d + 1);
                let mut moves = Vec::new();
                let mut at = id;
                while let Some((p, mv)) = parent[at] {
                    moves.push(mv);
                    at = p;
                }
                moves.reverse();
                return (RawOutcome::Found(moves), stats);
            }
            queue.push_back(id);
        }
    }
    if truncated {
        (RawOutcome::NoWithinDepth, stats)
    } else {
        (RawOutcome::Exhausted, stats)
    }
}

/// Lexicographically smallest shortest path from `from` to `to` through
/// unoccupied vertices. `occupied` must not mark `from` or `to`.
pub(crate) fn witness_path(
    graph: &Graph,
    occupied: &[bool],
    from: Vertex,
    to: Vertex,
) -> Vec<Vertex> {
    let mut dist_to: Vec<Option<usize>> = vec![None; graph.n()];
    dist_to[to] = Some(0);
    let mut queue = VecDeque::from([to]);
    while let Some(x) = queue.pop_front() {
        let d = dist_to[x].unwrap();
        for &y in graph.neighbors(x) {
            if dist_to[y].is_none() && !occupied[y] {
                dist_to[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let d = dist_to[cur].expect("witness path endpoints are connected");
        let next = graph
            .neighbors(cur)
            .iter()
            .copied()
            .find(|&y| !occupied[y] && dist_to[y] == Some(d - 1))
            .expect("some neighbor advances toward the target");
        path.push(next);
        cur = next;
    }
    path
}

/// Turns raw canonical moves into a schedule, assigning blocker identities by
/// replay (the free robot standing on the origin is the one that moves) and
/// computing witness paths against the occupancy of each step.
pub(crate) fn assemble_schedule(inst: &Instance, raw: &[RawMove]) -> Schedule {
    let m = inst.dest_robots.len();
    let mut pos = inst.starts();
    let mut at_vertex: BTreeMap<Vertex, usize> =
        inst.free_robots.iter().enumerate().map(|(j, &s)| (s, m + j)).collect();
    let mut moves = Vec::new();
    for (i, rm) in raw.iter().enumerate() {
        let robot = match rm.dest_idx {
            Some(d) => d,
            None => *at_vertex.get(&rm.from).expect("a free robot stands on the move origin"),
        };
        debug_assert_eq!(pos[robot], rm.from);
        let mut occupied = vec![false; inst.graph.n()];
        for (r, &p) in pos.iter().enumerate() {
            if r != robot {
                occupied[p] = true;
            }
        }
        let path = witness_path(&inst.graph, &occupied, rm.from, rm.to);
        moves.push(Move { time_step: i + 1, robot, path });
        pos[robot] = rm.to;
        if rm.dest_idx.is_none() {
            at_vertex.remove(&rm.from);
            at_vertex.insert(rm.to, robot);
        }
    }
    Schedule { moves }
}

fn goal_of(inst: &Instance) -> impl Fn(&Configuration) -> bool + '_ {
    move |c: &Configuration| {
        c.dest.iter().zip(inst.dest_robots.iter()).all(|(&p, r)| p == r.target)
    }
}

/// Minimum-makespan schedule with at most `max_depth` moves (unbounded when
/// `None`), subject to the default state cap.
pub fn solve_optimal(inst: &Instance, max_depth: Option<usize>) -> (SolveOutcome, SearchStats) {
    solve_optimal_with(inst, SearchLimits { max_depth, ..SearchLimits::default() })
}

pub fn solve_optimal_with(inst: &Instance, limits: SearchLimits) -> (SolveOutcome, SearchStats) {
    let start = Configuration::of_instance(inst);
    let (outcome, stats) = canonical_search(&inst.graph, start, &goal_of(inst), limits);
    let outcome = match outcome {
        RawOutcome::Found(raw) => SolveOutcome::Solved(assemble_schedule(inst, &raw)),
        RawOutcome::NoWithinDepth => SolveOutcome::NoWithinDepth,
        RawOutcome::Exhausted => SolveOutcome::Infeasible,
        RawOutcome::CapExceeded => SolveOutcome::CapExceeded,
    };
    (outcome, stats)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(usize),
    Infeasible,
    UnknownAtCap,
}

/// Is the instance solvable at all within `cap_depth` moves, regardless of
/// the declared budget?
pub fn feasibility(inst: &Instance, cap_depth: Option<usize>) -> (Feasibility, SearchStats) {
    let (outcome, stats) = solve_optimal(inst, cap_depth);
    let f = match outcome {
        SolveOutcome::Solved(s) => Feasibility::Feasible(s.makespan()),
        SolveOutcome::Infeasible => Feasibility::Infeasible,
        SolveOutcome::NoWithinDepth | SolveOutcome::CapExceeded => Feasibility::UnknownAtCap,
    };
    (f, stats)
}

/// Iterative-deepening depth-first search over the same canonical
/// configurations and successor order as [`solve_optimal`]. Independent
/// traversal order, same minimum makespan.
pub fn solve_iddfs(inst: &Instance, max_depth: Option<usize>) -> (SolveOutcome, SearchStats) {
    solve_iddfs_with(inst, SearchLimits { max_depth, ..SearchLimits::default() })
}

pub fn solve_iddfs_with(inst: &Instance, limits: SearchLimits) -> (SolveOutcome, SearchStats) {
    let start = Configuration::of_instance(inst);
    let goal = goal_of(inst);
    let mut stats = SearchStats::default();
    let mut bound = 0;
    loop {
        if limits.max_depth.is_some_and(|cap| bound > cap) {
            return (SolveOutcome::NoWithinDepth, stats);
        }
        stats.depth_reached = stats.depth_reached.max(bound);
        // g-value memo: revisit a configuration only on a strictly shorter
        // arrival within this iteration.
        let mut memo: HashMap<Configuration, usize> = HashMap::new();
        let mut path: Vec<RawMove> = Vec::new();
        let mut cut = false;
        match dfs(
            &inst.graph,
            &start,
            &goal,
            0,
            bound,
            &mut memo,
            &mut path,
            &mut cut,
            &mut stats,
            limits.max_states,
        ) {
            DfsResult::Found => {
                return (SolveOutcome::Solved(assemble_schedule(inst, &path)), stats)
            }
            DfsResult::CapExceeded => return (SolveOutcome::CapExceeded, stats),
            DfsResult::NotFound => {
                if !cut {
                    return (SolveOutcome::Infeasible, stats);
                }
            }
        }
        bound += 1;
    }
}

enum DfsResult {
    Found,
    NotFound,
    CapExceeded,
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    graph: &Graph,
    config: &Configuration,
    goal: &dyn Fn(&Configuration) -> bool,
    g: usize,
    bound: usize,
    memo: &mut HashMap<Configuration, usize>,
    path: &mut Vec<RawMove>,
    cut: &mut bool,
    stats: &mut SearchStats,
    max_states: usize,
) -> DfsResult {
    if goal(config) {
        return DfsResult::Found;
    }
    if g == bound {
        *cut = true;
        return DfsResult::NotFound;
    }
    if stats.expanded >= max_states {
        return DfsResult::CapExceeded;
    }
    stats.expanded += 1;
    memo.insert(config.clone(), g);
    for (mv, next) in successors(graph, config) {
        if memo.get(&next).is_some_and(|&seen| seen <= g + 1) {
            continue;
        }
        stats.generated += 1;
        path.push(mv);
        match dfs(graph, &next, goal, g + 1, bound, memo, path, cut, stats, max_states) {
            DfsResult::Found => return DfsResult::Found,
            DfsResult::CapExceeded => return DfsResult::CapExceeded,
            DfsResult::NotFound => {
                path.pop();
            }
        }
    }
    DfsResult::NotFound
}

/// Restricts a single-destination instance to the ball of radius
/// `budget * (lambda + 1)` around the main robot's start and solves there.
/// `lambda` is the size of the largest free component; free robots outside
/// the ball are dropped. The decision within `budget` moves is unchanged.
pub fn solve_bounded_ball(
    inst: &Instance,
    budget: usize,
    lambda: usize,
) -> Result<(SolveOutcome, SearchStats)> {
    if inst.dest_robots.len() != 1 {
        return Err(Error::PremiseUnmet(format!(
            "ball restriction needs exactly one destination robot, found {}",
            inst.dest_robots.len()
        )));
    }
    let s = inst.dest_robots[0].start;
    let t = inst.dest_robots[0].target;
    let radius = budget * (lambda + 1);
    let dist = inst.graph.bfs_distances(s);
    let ball: Vec<Vertex> =
        (0..inst.graph.n()).filter(|&v| dist[v].is_some_and(|d| d <= radius)).collect();
    if !ball.contains(&t) {
        // Any solution's traversed subgraph stays inside the ball, so a
        // target outside it is unreachable within the budget.
        return Ok((SolveOutcome::NoWithinDepth, SearchStats::default()));
    }
    let keep: std::collections::BTreeSet<Vertex> = ball.iter().copied().collect();
    let (sub, remap) = inst.graph.induced(&keep);
    let inverse: Vec<Vertex> = {
        let mut inv = vec![0; keep.len()];
        for (old, &new) in remap.iter().enumerate() {
            if let Some(new) = new {
                inv[new] = old;
            }
        }
        inv
    };
    let dest = vec![crate::instance::DestRobot {
        start: remap[s].unwrap(),
        target: remap[t].unwrap(),
    }];
    let free: Vec<Vertex> =
        inst.free_robots.iter().filter_map(|&b| remap[b]).collect();
    let restricted = Instance::new(sub, dest, free, inst.budget, inst.planar_declared)
        .expect("ball restriction preserves instance validity");
    let (outcome, stats) = solve_optimal(&restricted, Some(budget));
    let outcome = match outcome {
        SolveOutcome::Solved(sched) => {
            // Map the schedule back to original vertex ids. Robot ids map
            // 1:1: the main robot is 0 on both sides and free robots keep
            // their relative order.
            let moves = sched
                .moves
                .iter()
                .map(|mv| Move {
                    time_step: mv.time_step,
                    robot: original_robot_id(inst, &remap, mv.robot),
                    path: mv.path.iter().map(|&v| inverse[v]).collect(),
                })
                .collect();
            SolveOutcome::Solved(Schedule { moves })
        }
        other => other,
    };
    Ok((outcome, stats))
}

/// Free robots outside the ball are dropped, so restricted free-robot id `j`
/// corresponds to the `j`-th surviving free robot of the original instance.
fn original_robot_id(inst: &Instance, remap: &[Option<Vertex>], restricted_id: usize) -> usize {
    if restricted_id == 0 {
        return 0;
    }
    let mut j = restricted_id - 1;
    for (orig, &b) in inst.free_robots.iter().enumerate() {
        if remap[b].is_some() {
            if j == 0 {
                return 1 + orig;
            }
            j -= 1;
        }
    }
    unreachable!("restricted free robot has an original counterpart")
}
