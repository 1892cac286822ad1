//! Strong havens and the machinery built on them: detection with the
//! Lemma-style three-part decomposition, exact configuration transfer inside
//! the extended haven, corridor routing through disjoint havens, and the
//! normalization of schedules to bounded crossing counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graph::{Graph, Vertex};
use crate::instance::Instance;
use crate::schedule::{corridor_paths, positions_at, validate, Move, Schedule, Verdict};
use crate::solver::{
    assemble_schedule, canonical_search, Configuration, RawOutcome, SearchLimits,
};
use crate::{Error, Result};

/// Default state cap for transfer searches inside extended havens.
pub const TRANSFER_STATE_CAP: usize = 2_000_000;

/// A connected piece of a haven decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphPart {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
}

impl SubgraphPart {
    fn path_segment(path: &[Vertex]) -> SubgraphPart {
        let vertices = path.iter().copied().collect();
        let edges = path.windows(2).map(|w| norm(w[0], w[1])).collect();
        SubgraphPart { vertices, edges }
    }

    fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.iter().next() else { return true };
        let mut adj: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen: BTreeSet<Vertex> = [start].into_iter().collect();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in adj.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen == self.vertices
    }
}

fn norm(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    (a.min(b), a.max(b))
}

/// A strong q-haven: a length-q path through an anchor of degree at least
/// three sitting in the middle third, together with the three-part
/// decomposition and the extended edge set used for transfers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HavenWitness {
    /// Anchor vertex `w`, degree >= 3 in the host graph.
    pub anchor: Vertex,
    /// The haven path, endpoint to endpoint; `q()` edges long.
    pub path: Vec<Vertex>,
    pub c1: SubgraphPart,
    pub c2: SubgraphPart,
    pub c3: SubgraphPart,
    /// Path edges plus three chosen edges at the anchor.
    pub hat_edges: BTreeSet<(Vertex, Vertex)>,
}

impl HavenWitness {
    pub fn q(&self) -> usize {
        self.path.len() - 1
    }

    pub fn path_vertices(&self) -> BTreeSet<Vertex> {
        self.path.iter().copied().collect()
    }

    /// Every vertex of the decomposition: the path plus the anchor's extra
    /// neighbor when it lies off the path.
    pub fn extended_vertices(&self) -> BTreeSet<Vertex> {
        let mut all = self.c1.vertices.clone();
        all.extend(self.c2.vertices.iter().copied());
        all.extend(self.c3.vertices.iter().copied());
        all
    }

    /// Checks every structural invariant against the host graph and the
    /// robot count `k`.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<()> {
        let q = self.q();
        if q < 3 {
            return Err(Error::InvalidInput(format!("haven length {q} < 3")));
        }
        if !g.is_simple_path(&self.path) {
            return Err(Error::InvalidInput("haven path is not a simple path".into()));
        }
        if g.degree(self.anchor) < 3 {
            return Err(Error::InvalidInput(format!(
                "anchor {} has degree {} < 3",
                self.anchor,
                g.degree(self.anchor)
            )));
        }
        let Some(iw) = self.path.iter().position(|&v| v == self.anchor) else {
            return Err(Error::InvalidInput("anchor not on the haven path".into()));
        };
        let lo = q.div_ceil(3);
        let hi = 2 * q / 3;
        if iw < lo || iw > hi {
            return Err(Error::InvalidInput(format!(
                "anchor at path distance {iw}, outside [{lo},{hi}]"
            )));
        }
        let parts = [&self.c1, &self.c2, &self.c3];
        for (i, p) in parts.iter().enumerate() {
            if !p.vertices.contains(&self.anchor) {
                return Err(Error::InvalidInput(format!("part {} misses the anchor", i + 1)));
            }
            if !p.is_connected() {
                return Err(Error::InvalidInput(format!("part {} is disconnected", i + 1)));
            }
            for &(a, b) in &p.edges {
                if !g.has_edge(a, b) {
                    return Err(Error::InvalidInput(format!(
                        "part {} uses a non-edge ({a},{b})",
                        i + 1
                    )));
                }
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let inter: Vec<&Vertex> =
                parts[i].vertices.intersection(&parts[j].vertices).collect();
            if inter != vec![&self.anchor] {
                return Err(Error::InvalidInput(format!(
                    "parts {} and {} intersect in {:?}, expected only the anchor",
                    i + 1,
                    j + 1,
                    inter
                )));
            }
        }
        if self.c1.vertices.len() < k + 1 || self.c2.vertices.len() < k + 1 {
            return Err(Error::InvalidInput(format!(
                "side parts have sizes {} and {}, need >= {}",
                self.c1.vertices.len(),
                self.c2.vertices.len(),
                k + 1
            )));
        }
        if self.c3.vertices.len() < 2 {
            return Err(Error::InvalidInput("third part has fewer than 2 vertices".into()));
        }
        let union: BTreeSet<Vertex> = parts
            .iter()
            .flat_map(|p| p.vertices.iter().copied())
            .collect();
        let on_path = self.path_vertices();
        if !on_path.is_subset(&union) || union.difference(&on_path).count() > 1 {
            return Err(Error::InvalidInput(
                "decomposition must cover the path plus at most one extra neighbor".into(),
            ));
        }
        for w in self.path.windows(2) {
            if !self.hat_edges.contains(&norm(w[0], w[1])) {
                return Err(Error::InvalidInput("extended edges miss a path edge".into()));
            }
        }
        let at_anchor = self
            .hat_edges
            .iter()
            .filter(|&&(a, b)| a == self.anchor || b == self.anchor)
            .count();
        if at_anchor < 3 {
            return Err(Error::InvalidInput(
                "extended graph needs three edges at the anchor".into(),
            ));
        }
        for &(a, b) in &self.hat_edges {
            if !g.has_edge(a, b) {
                return Err(Error::InvalidInput(format!("extended non-edge ({a},{b})")));
            }
        }
        Ok(())
    }
}

/// Builds the decomposition for anchor position `iw` on `path`, trying the
/// anchor's extra neighbors in ascending order. `None` when no choice meets
/// the size requirements for `k` robots.
fn decompose(g: &Graph, path: &[Vertex], iw: usize, k: usize) -> Option<HavenWitness> {
    let w = path[iw];
    let xp = path[iw - 1];
    let yp = path[iw + 1];
    let pos: BTreeMap<Vertex, usize> = path.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let path_edges: BTreeSet<(Vertex, Vertex)> = path.windows(2).map(|s| norm(s[0], s[1])).collect();
    for &u in g.neighbors(w) {
        if u == xp || u == yp {
            continue;
        }
        let (c1, c2, c3) = match pos.get(&u) {
            None => {
                // Extra neighbor off the path: two subpaths plus the edge.
                let c1 = SubgraphPart::path_segment(&path[..=iw]);
                let c2 = SubgraphPart::path_segment(&path[iw..]);
                let c3 = SubgraphPart {
                    vertices: [w, u].into_iter().collect(),
                    edges: [norm(w, u)].into_iter().collect(),
                };
                (c1, c2, c3)
            }
            Some(&iu) if iu >= iw + 2 => {
                // u between the anchor and the far endpoint: bypass the
                // anchor's path-neighbor on that side through the chord.
                let c1 = SubgraphPart::path_segment(&path[..=iw]);
                let c3 = SubgraphPart {
                    vertices: [w, yp].into_iter().collect(),
                    edges: [norm(w, yp)].into_iter().collect(),
                };
                let mut vertices: BTreeSet<Vertex> = path[iw + 2..].iter().copied().collect();
                vertices.insert(w);
                let mut edges: BTreeSet<(Vertex, Vertex)> =
                    path[iw + 2..].windows(2).map(|s| norm(s[0], s[1])).collect();
                edges.insert(norm(w, u));
                (c1, SubgraphPart { vertices, edges }, c3)
            }
            Some(&iu) => {
                debug_assert!(iu + 2 <= iw);
                let c1 = SubgraphPart::path_segment(&path[iw..]);
                let c3 = SubgraphPart {
                    vertices: [w, xp].into_iter().collect(),
                    edges: [norm(w, xp)].into_iter().collect(),
                };
                let mut vertices: BTreeSet<Vertex> = path[..=iw - 2].iter().copied().collect();
                vertices.insert(w);
                let mut edges: BTreeSet<(Vertex, Vertex)> =
                    path[..=iw - 2].windows(2).map(|s| norm(s[0], s[1])).collect();
                edges.insert(norm(w, u));
                (c1, SubgraphPart { vertices, edges }, c3)
            }
        };
        if c1.vertices.len() < k + 1 || c2.vertices.len() < k + 1 {
            continue;
        }
        let mut hat_edges = path_edges.clone();
        hat_edges.insert(norm(w, xp));
        hat_edges.insert(norm(w, yp));
        hat_edges.insert(norm(w, u));
        return Some(HavenWitness { anchor: w, path: path.to_vec(), c1, c2, c3, hat_edges });
    }
    None
}

/// Exhaustive search for a strong q-haven whose path starts at `v`:
/// depth-first enumeration of simple paths in ascending-neighbor order,
/// checking every admissible anchor position. `work_cap` bounds the number
/// of path extensions.
pub fn find_strong_haven(
    inst: &Instance,
    v: Vertex,
    q: usize,
    work_cap: usize,
) -> Result<Option<HavenWitness>> {
    if q < 3 {
        return Err(Error::InvalidInput(format!("haven length {q} must be at least 3")));
    }
    if v >= inst.graph.n() {
        return Err(Error::InvalidInput(format!("vertex {v} out of range")));
    }
    let g = &inst.graph;
    let k = inst.robot_count();
    let lo = q.div_ceil(3);
    let hi = 2 * q / 3;
    let mut work = 0usize;
    let mut path = vec![v];
    let mut on_path = vec![false; g.n()];
    on_path[v] = true;
    fn dfs(
        g: &Graph,
        k: usize,
        q: usize,
        lo: usize,
        hi: usize,
        path: &mut Vec<Vertex>,
        on_path: &mut Vec<bool>,
        work: &mut usize,
        work_cap: usize,
    ) -> Result<Option<HavenWitness>> {
        if path.len() == q + 1 {
            for iw in lo..=hi {
                if g.degree(path[iw]) >= 3 {
                    if let Some(hw) = decompose(g, path, iw, k) {
                        return Ok(Some(hw));
                    }
                }
            }
            return Ok(None);
        }
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            if on_path[w] {
                continue;
            }
            *work += 1;
            if *work > work_cap {
                return Err(Error::CapExceeded(format!(
                    "haven search exceeded {work_cap} path extensions"
                )));
            }
            path.push(w);
            on_path[w] = true;
            let found = dfs(g, k, q, lo, hi, path, on_path, work, work_cap)?;
            path.pop();
            on_path[w] = false;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    dfs(g, k, q, lo, hi, &mut path, &mut on_path, &mut work, work_cap)
}

/// The extended haven as a search arena: same vertex count as the host,
/// only the extended edges, with edges into `forbidden` vertices removed.
fn arena_graph(g: &Graph, hw: &HavenWitness, forbidden: &BTreeSet<Vertex>) -> Graph {
    let edges: Vec<(Vertex, Vertex)> = hw
        .hat_edges
        .iter()
        .copied()
        .filter(|&(a, b)| !forbidden.contains(&a) && !forbidden.contains(&b))
        .collect();
    Graph::from_edges(g.n(), &edges).expect("extended haven edges are simple")
}

fn transfer_search(
    arena: &Graph,
    from: &Configuration,
    goal: &dyn Fn(&Configuration) -> bool,
) -> Result<Vec<crate::solver::RawMove>> {
    let limits = SearchLimits { max_depth: None, max_states: TRANSFER_STATE_CAP };
    match canonical_search(arena, from.clone(), goal, limits) {
        (RawOutcome::Found(raw), _) => Ok(raw),
        (RawOutcome::Exhausted, _) => Err(Error::PremiseUnmet(
            "target configuration is unreachable inside the extended haven; \
             the transfer guarantee's preconditions do not hold here"
                .into(),
        )),
        (RawOutcome::CapExceeded, _) => Err(Error::CapExceeded(
            "transfer search hit the state cap inside the extended haven; \
             this contradicts the transfer guarantee and is a bug candidate"
                .into(),
        )),
        (RawOutcome::NoWithinDepth, _) => unreachable!("transfer search has no depth cap"),
    }
}

fn check_transfer_configs(
    hw: &HavenWitness,
    from: &Configuration,
    to: &Configuration,
) -> Result<()> {
    if from.dest.len() != to.dest.len() || from.blockers.len() != to.blockers.len() {
        return Err(Error::InvalidInput(
            "transfer endpoints must place the same robot multiset".into(),
        ));
    }
    let on_path = hw.path_vertices();
    for (name, c) in [("source", from), ("target", to)] {
        let mut seen = BTreeSet::new();
        for &v in c.dest.iter().chain(c.blockers.iter()) {
            if !on_path.contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} configuration places a robot on {v}, outside the haven path"
                )));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidInput(format!(
                    "{name} configuration places two robots on {v}"
                )));
            }
        }
    }
    Ok(())
}

/// The restricted instance on which a transfer's moves are a valid
/// schedule: the extended haven's edges, robots at `from`, destination
/// targets at `to`.
pub fn transfer_arena(
    inst: &Instance,
    hw: &HavenWitness,
    from: &Configuration,
    to: &Configuration,
    budget: usize,
) -> Result<Instance> {
    check_transfer_configs(hw, from, to)?;
    let arena = arena_graph(&inst.graph, hw, &BTreeSet::new());
    let dest = from
        .dest
        .iter()
        .zip(to.dest.iter())
        .map(|(&s, &t)| crate::instance::DestRobot { start: s, target: t })
        .collect();
    Instance::new(arena, dest, from.blockers.clone(), budget, inst.planar_declared)
}

/// Moves the robots standing at `from` to exactly `to`, using only the
/// extended haven's edges. Robot ids in the result are transfer-local:
/// destination robots keep their index in `from.dest`, free robots are
/// numbered after them.
pub fn haven_transfer(
    inst: &Instance,
    hw: &HavenWitness,
    from: &Configuration,
    to: &Configuration,
) -> Result<Schedule> {
    hw.validate(&inst.graph, inst.robot_count())?;
    check_transfer_configs(hw, from, to)?;
    let arena = arena_graph(&inst.graph, hw, &BTreeSet::new());
    let raw = transfer_search(&arena, from, &|c: &Configuration| c == to)?;
    let synthetic = transfer_arena(inst, hw, from, to, raw.len())?;
    Ok(assemble_schedule(&synthetic, &raw))
}

/// Internal relaxed transfer: any final blocker arrangement is accepted as
/// long as `goal` holds. Used by the corridor router.
fn transfer_to_goal(
    g: &Graph,
    hw: &HavenWitness,
    forbidden: &BTreeSet<Vertex>,
    from: &Configuration,
    goal: &dyn Fn(&Configuration) -> bool,
) -> Result<Schedule> {
    let arena = arena_graph(g, hw, forbidden);
    let raw = transfer_search(&arena, from, goal)?;
    let dest = from
        .dest
        .iter()
        .map(|&s| crate::instance::DestRobot { start: s, target: s })
        .collect();
    let synthetic = Instance::new(arena, dest, from.blockers.clone(), raw.len(), false)
        .expect("transfer endpoints form a valid instance");
    Ok(assemble_schedule(&synthetic, &raw))
}

/// Routes destination robot `robot_id` from its start to its target along a
/// shortest path, passing through the given pairwise-disjoint havens. The
/// robot enters each haven at most once; robots inside a haven are shuffled
/// with transfer searches, and corridor segments outside havens must be
/// free. Robot ids in the output are the instance's own.
pub fn meta_haven_route(
    inst: &Instance,
    havens: &[HavenWitness],
    robot_id: usize,
) -> Result<Schedule> {
    if robot_id >= inst.dest_robots.len() {
        return Err(Error::InvalidInput(format!("robot {robot_id} has no destination")));
    }
    for hw in havens {
        hw.validate(&inst.graph, inst.robot_count())?;
    }
    for (i, a) in havens.iter().enumerate() {
        for b in &havens[i + 1..] {
            if !a.extended_vertices().is_disjoint(&b.extended_vertices()) {
                return Err(Error::InvalidInput(format!(
                    "havens anchored at {} and {} share vertices; merge them first",
                    a.anchor, b.anchor
                )));
            }
        }
    }
    let g = &inst.graph;
    let s = inst.dest_robots[robot_id].start;
    let t = inst.dest_robots[robot_id].target;
    if s == t {
        return Ok(Schedule { moves: Vec::new() });
    }
    let dist = g.bfs_distances(t);
    if dist[s].is_none() {
        return Err(Error::PremiseUnmet(format!("no path from {s} to {t}")));
    }
    let route = crate::solver::witness_path(g, &vec![false; g.n()], s, t);
    let haven_of: BTreeMap<Vertex, usize> = havens
        .iter()
        .enumerate()
        .flat_map(|(i, hw)| hw.path_vertices().into_iter().map(move |v| (v, i)))
        .collect();
    let last_occ: BTreeMap<usize, usize> = route
        .iter()
        .enumerate()
        .filter_map(|(i, v)| haven_of.get(v).map(|&h| (h, i)))
        .collect();

    let mut positions = inst.starts();
    let mut moves: Vec<Move> = Vec::new();
    let mut step = 0usize;

    let slide = |a: usize,
                 b: usize,
                 positions: &mut Vec<Vertex>,
                 moves: &mut Vec<Move>,
                 step: &mut usize|
     -> Result<()> {
        if a == b {
            return Ok(());
        }
        let segment = route[a..=b].to_vec();
        for (r, &p) in positions.iter().enumerate() {
            if r != robot_id && segment[1..].contains(&p) {
                return Err(Error::PremiseUnmet(format!(
                    "corridor blocked outside havens: robot {r} stands on {p}"
                )));
            }
        }
        *step += 1;
        moves.push(Move { time_step: *step, robot: robot_id, path: segment });
        positions[robot_id] = route[b];
        Ok(())
    };

    let append_transfer = |transfer: &Schedule,
                           positions: &mut Vec<Vertex>,
                           moves: &mut Vec<Move>,
                           step: &mut usize| {
        for mv in &transfer.moves {
            let from = mv.path[0];
            let robot = positions
                .iter()
                .position(|&p| p == from)
                .expect("transfer moves start at occupied vertices");
            *step += 1;
            moves.push(Move { time_step: *step, robot, path: mv.path.clone() });
            positions[robot] = *mv.path.last().unwrap();
        }
    };

    let mut i = 0usize;
    while i < route.len() - 1 {
        // Already inside a haven with a later exit: shuffle across it.
        if let Some(&h) = haven_of.get(&route[i]) {
            let exit = last_occ[&h];
            if exit > i {
                let hw = &havens[h];
                let inside = hw.extended_vertices();
                let members: Vec<usize> = (0..positions.len())
                    .filter(|&r| r != robot_id && inside.contains(&positions[r]))
                    .collect();
                let from = Configuration {
                    dest: vec![positions[robot_id]],
                    blockers: {
                        let mut b: Vec<Vertex> =
                            members.iter().map(|&r| positions[r]).collect();
                        b.sort_unstable();
                        b
                    },
                };
                let forbidden: BTreeSet<Vertex> = (0..positions.len())
                    .filter(|&r| r != robot_id && !members.contains(&r))
                    .map(|r| positions[r])
                    .collect();
                let exit_vertex = route[exit];
                let transfer = transfer_to_goal(g, hw, &forbidden, &from, &|c| {
                    c.dest[0] == exit_vertex
                })?;
                append_transfer(&transfer, &mut positions, &mut moves, &mut step);
                i = exit;
                continue;
            }
        }
        // Find the next haven touch; slide to it (or to the target).
        let touch = (i + 1..route.len()).find(|&j| {
            haven_of.get(&route[j]).is_some_and(|&h| last_occ[&h] >= j)
        });
        match touch {
            None => {
                slide(i, route.len() - 1, &mut positions, &mut moves, &mut step)?;
                i = route.len() - 1;
            }
            Some(j) => {
                let h = haven_of[&route[j]];
                let hw = &havens[h];
                let entry = route[j];
                let inside = hw.extended_vertices();
                let members: Vec<usize> = (0..positions.len())
                    .filter(|&r| r != robot_id && inside.contains(&positions[r]))
                    .collect();
                if members.iter().any(|&r| positions[r] == entry) {
                    let from = Configuration {
                        dest: vec![],
                        blockers: {
                            let mut b: Vec<Vertex> =
                                members.iter().map(|&r| positions[r]).collect();
                            b.sort_unstable();
                            b
                        },
                    };
                    let forbidden: BTreeSet<Vertex> = (0..positions.len())
                        .filter(|&r| r != robot_id && !members.contains(&r))
                        .map(|r| positions[r])
                        .chain([positions[robot_id]])
                        .collect();
                    let transfer = transfer_to_goal(g, hw, &forbidden, &from, &|c| {
                        !c.blockers.contains(&entry)
                    })?;
                    append_transfer(&transfer, &mut positions, &mut moves, &mut step);
                }
                slide(i, j, &mut positions, &mut moves, &mut step)?;
                i = j;
            }
        }
    }
    Schedule::new(moves)
}

/// Crossing points of two paths: vertices of degree at least three in the
/// union of their edge sets, in traversal order along `q`.
pub fn crossing_points(p: &[Vertex], q: &[Vertex]) -> Vec<Vertex> {
    let mut edges: BTreeSet<(Vertex, Vertex)> = p.windows(2).map(|w| norm(w[0], w[1])).collect();
    edges.extend(q.windows(2).map(|w| norm(w[0], w[1])));
    let mut deg: BTreeMap<Vertex, usize> = BTreeMap::new();
    for &(a, b) in &edges {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    q.iter().copied().filter(|v| deg.get(v).copied().unwrap_or(0) >= 3).collect()
}

/// Does every move path cross every corridor path of every earlier prefix
/// at most four times?
pub fn is_special(inst: &Instance, s: &Schedule) -> bool {
    first_crossing_violation(inst, s).is_none()
}

fn first_crossing_violation(inst: &Instance, s: &Schedule) -> Option<(usize, Vec<Vertex>)> {
    for (idx, mv) in s.moves.iter().enumerate() {
        for jp in 0..=idx {
            for p in corridor_paths(inst, s, jp) {
                if crossing_points(&p, &mv.path).len() > 4 {
                    return Some((idx, p));
                }
            }
        }
    }
    None
}

/// Total crossing exceedance and total crossing count over all
/// (move, earlier corridor) pairs; the strictly decreasing measure that
/// drives normalization.
fn crossing_measure(inst: &Instance, s: &Schedule) -> (usize, usize) {
    let mut exceedance = 0;
    let mut total = 0;
    for (idx, mv) in s.moves.iter().enumerate() {
        for jp in 0..=idx {
            for p in corridor_paths(inst, s, jp) {
                let c = crossing_points(&p, &mv.path).len();
                total += c;
                exceedance += c.saturating_sub(4);
            }
        }
    }
    (exceedance, total)
}

/// Loop-erases a walk into a simple path with the same endpoints.
pub(crate) fn simplify_walk(walk: Vec<Vertex>) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::new();
    let mut index: HashMap<Vertex, usize> = HashMap::new();
    for v in walk {
        if let Some(&at) = index.get(&v) {
            for dropped in out.drain(at + 1..) {
                index.remove(&dropped);
            }
        } else {
            index.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

fn splice(q: &[Vertex], p: &[Vertex], x1: Vertex, x2: Vertex) -> Vec<Vertex> {
    let qi1 = q.iter().position(|&v| v == x1).unwrap();
    let qi2 = q.iter().position(|&v| v == x2).unwrap();
    let pi1 = p.iter().position(|&v| v == x1).unwrap();
    let pi2 = p.iter().position(|&v| v == x2).unwrap();
    let mid: Vec<Vertex> = if pi1 <= pi2 {
        p[pi1..=pi2].to_vec()
    } else {
        p[pi2..=pi1].iter().rev().copied().collect()
    };
    let mut walk = q[..qi1].to_vec();
    walk.extend(mid);
    walk.extend_from_slice(&q[qi2 + 1..]);
    simplify_walk(walk)
}

/// Rewrites move paths until every move crosses every earlier corridor path
/// at most four times, keeping the schedule equivalent at every time step
/// (same positions after every move). Offending segments are replaced by
/// corridor subpaths; the preferred cut points are the 2nd and
/// second-to-last crossings, which leaves at most four.
pub fn make_special(inst: &Instance, s: &Schedule) -> Result<Schedule> {
    match validate(inst, s)? {
        Verdict::Valid => {}
        Verdict::Invalid(v) => {
            return Err(Error::InvalidInput(format!(
                "schedule invalid at step {}: {}",
                v.time_step, v.rule
            )))
        }
    }
    let mut cur = s.normalized();
    let mut measure = crossing_measure(inst, &cur);
    for _round in 0..10_000 {
        let Some((idx, p)) = first_crossing_violation(inst, &cur) else {
            return Ok(cur);
        };
        let q = cur.moves[idx].path.clone();
        let x = crossing_points(&p, &q);
        let r = x.len();
        let mut candidates: Vec<(usize, usize)> = vec![(1, r - 2)];
        for a in 0..r {
            for b in a + 1..r {
                if (a, b) != (1, r - 2) {
                    candidates.push((a, b));
                }
            }
        }
        let before = positions_at(inst, &cur, idx);
        let mover = cur.moves[idx].robot;
        let mut applied = false;
        for (a, b) in candidates {
            let new_path = splice(&q, &p, x[a], x[b]);
            if new_path.len() < 2 || !inst.graph.is_simple_path(&new_path) {
                continue;
            }
            if new_path
                .iter()
                .any(|v| before.iter().enumerate().any(|(r2, p2)| r2 != mover && p2 == v))
            {
                continue;
            }
            let mut trial = cur.clone();
            trial.moves[idx].path = new_path;
            let trial_measure = crossing_measure(inst, &trial);
            if trial_measure < measure {
                cur = trial;
                measure = trial_measure;
                applied = true;
                break;
            }
        }
        if !applied {
            return Err(Error::InvalidInput(
                "no legal crossing-reducing splice found; schedule cannot be normalized".into(),
            ));
        }
    }
    Err(Error::InvalidInput("crossing normalization did not converge".into()))
}
