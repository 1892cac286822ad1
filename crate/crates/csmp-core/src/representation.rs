//! Succinct solution descriptions: the representation of a schedule as a
//! rooted graph over its important vertices, brute-force search for rooted
//! topological-minor realizations, schedule reconstruction through a
//! realization, and a solver that enumerates candidate representations.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Graph, RootedGraph, Vertex};
use crate::instance::{relabel_terminals, DestRobot, Instance, TerminalSet};
use crate::schedule::{
    corridor_paths, important_vertices, validate, Move, Schedule, Verdict,
};
use crate::solver::solve_optimal;
use crate::{Error, Result};

/// Work budget for the realization searches inside
/// [`solve_by_representation`].
pub const REALIZATION_WORK_CAP: usize = 5_000_000;

/// One contracted corridor: a path of the traversed subgraph whose internal
/// vertices are unimportant. Endpoints are representation vertex ids,
/// `path[0]` corresponding to `ends.0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorridorAnnotation {
    pub ends: (usize, usize),
    pub path: Vec<Vertex>,
}

/// A schedule's representation: the rooted graph on its important vertices,
/// the map back to instance vertices, and the corridor each edge stands for.
/// When two important vertices are joined by several corridors the rooted
/// graph keeps a single edge and [`Representation::has_parallel_corridors`]
/// records that the annotation layer is richer.
#[derive(Clone, Debug)]
pub struct Representation {
    pub hs: RootedGraph,
    /// Representation vertex id -> instance vertex, ascending.
    pub vertex_map: Vec<Vertex>,
    pub corridors: Vec<CorridorAnnotation>,
    pub has_parallel_corridors: bool,
}

impl Representation {
    /// Representation id of an instance vertex.
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertex_map.binary_search(&v).ok()
    }
}

/// A rooted topological-minor embedding: an injective, label-preserving
/// vertex image together with internally disjoint paths for the edges. Keys
/// of `edge_image` are host-graph edges with the smaller endpoint first; the
/// stored path runs from the image of the smaller endpoint to the larger's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub vertex_image: Vec<Vertex>,
    pub edge_image: BTreeMap<(usize, usize), Vec<Vertex>>,
}

/// The original schedule with every move path rewritten as the sequence of
/// representation vertices it visits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HMove {
    pub time_step: usize,
    pub robot: usize,
    pub hpath: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSchedule {
    pub moves: Vec<HMove>,
}

/// Contracts a valid schedule's traversed subgraph to its representation:
/// vertices are the important vertices, edges the maximal corridors of
/// unimportant degree-2 vertices, terminal roots labeled per the instance.
pub fn extract_representation(inst: &Instance, s: &Schedule) -> Result<Representation> {
    match validate(inst, s)? {
        Verdict::Valid => {}
        Verdict::Invalid(v) => {
            return Err(Error::InvalidInput(format!(
                "schedule invalid at step {}: {}",
                v.time_step, v.rule
            )))
        }
    }
    let s = s.normalized();
    let j = s.moves.len();
    let imp = important_vertices(inst, &s, j);
    let vertex_map: Vec<Vertex> = imp.iter().copied().collect();
    let index: BTreeMap<Vertex, usize> =
        vertex_map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut corridors = Vec::new();
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for path in corridor_paths(inst, &s, j) {
        let a = index[path.first().unwrap()];
        let b = index[path.last().unwrap()];
        edge_set.insert((a.min(b), a.max(b)));
        corridors.push(CorridorAnnotation { ends: (a, b), path });
    }
    let has_parallel_corridors = corridors.len() > edge_set.len();
    let edges: Vec<(Vertex, Vertex)> = edge_set.into_iter().collect();
    let graph = Graph::from_edges(vertex_map.len(), &edges)
        .expect("corridor endpoints are distinct important vertices");
    let ts = TerminalSet::of(inst);
    let mut roots = BTreeMap::new();
    for (i, &v) in vertex_map.iter().enumerate() {
        if let Some(l) = ts.label(v) {
            roots.insert(i, l);
        }
    }
    let hs = RootedGraph::new(graph, roots)?;
    Ok(Representation { hs, vertex_map, corridors, has_parallel_corridors })
}

/// Rewrites every move path as its sequence of important vertices. Move
/// endpoints are always important, so each hop crosses exactly one corridor.
pub fn reinterpret_on_hs(rep: &Representation, s: &Schedule) -> Result<HSchedule> {
    let s = s.normalized();
    let mut moves = Vec::with_capacity(s.moves.len());
    for mv in &s.moves {
        let hpath: Vec<usize> = mv.path.iter().filter_map(|&v| rep.index_of(v)).collect();
        if hpath.len() < 2
            || rep.index_of(mv.path[0]) != Some(hpath[0])
            || rep.index_of(*mv.path.last().unwrap()) != Some(*hpath.last().unwrap())
        {
            return Err(Error::InvalidInput(format!(
                "move at step {} does not start and end on important vertices",
                mv.time_step
            )));
        }
        for w in hpath.windows(2) {
            if !rep.hs.graph.has_edge(w[0], w[1]) {
                return Err(Error::InvalidInput(format!(
                    "move at step {} hops between non-adjacent representation vertices",
                    mv.time_step
                )));
            }
        }
        moves.push(HMove { time_step: mv.time_step, robot: mv.robot, hpath });
    }
    Ok(HSchedule { moves })
}

/// Checks every embedding condition: injectivity, label preservation both
/// ways, edge paths that are simple paths of the host with the right
/// endpoints, pairwise internal disjointness, and no vertex image interior
/// to any edge path.
pub fn verify_realization(h: &RootedGraph, g: &RootedGraph, r: &Realization) -> Result<()> {
    let nh = h.graph.n();
    if r.vertex_image.len() != nh {
        return Err(Error::InvalidInput(format!(
            "vertex image covers {} of {} vertices",
            r.vertex_image.len(),
            nh
        )));
    }
    let mut seen = BTreeSet::new();
    for (v, &gv) in r.vertex_image.iter().enumerate() {
        if gv >= g.graph.n() {
            return Err(Error::InvalidInput(format!("image vertex {gv} out of range")));
        }
        if !seen.insert(gv) {
            return Err(Error::InvalidInput(format!("vertex image reuses {gv}")));
        }
        if h.label(v) != g.label(gv) {
            return Err(Error::InvalidInput(format!(
                "vertex {v} (label {:?}) maps to {gv} (label {:?})",
                h.label(v),
                g.label(gv)
            )));
        }
    }
    let hedges: BTreeSet<(usize, usize)> = h.graph.edges().collect();
    let keys: BTreeSet<(usize, usize)> = r.edge_image.keys().copied().collect();
    if hedges != keys {
        return Err(Error::InvalidInput("edge image keys differ from the edge set".into()));
    }
    let mut internals_seen: BTreeSet<Vertex> = BTreeSet::new();
    for (&(a, b), path) in &r.edge_image {
        if !g.graph.is_simple_path(path) {
            return Err(Error::InvalidInput(format!(
                "edge ({a},{b}) maps to a non-path"
            )));
        }
        if path.first() != Some(&r.vertex_image[a]) || path.last() != Some(&r.vertex_image[b]) {
            return Err(Error::InvalidInput(format!(
                "edge ({a},{b}) path endpoints disagree with the vertex image"
            )));
        }
        for &x in &path[1..path.len() - 1] {
            if seen.contains(&x) {
                return Err(Error::InvalidInput(format!(
                    "vertex image {x} lies inside the path of edge ({a},{b})"
                )));
            }
            if !internals_seen.insert(x) {
                return Err(Error::InvalidInput(format!(
                    "edge paths share internal vertex {x}"
                )));
            }
        }
    }
    Ok(())
}

struct RealizeSearch<'a> {
    h: &'a RootedGraph,
    g: &'a RootedGraph,
    hedges: Vec<(usize, usize)>,
    phi: Vec<Option<Vertex>>,
    image_used: Vec<bool>,
    path_used: Vec<bool>,
    paths: BTreeMap<(usize, usize), Vec<Vertex>>,
    work: usize,
    work_cap: usize,
}

impl RealizeSearch<'_> {
    fn spend(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.work_cap {
            return Err(Error::CapExceeded(format!(
                "realization search exceeded {} steps",
                self.work_cap
            )));
        }
        Ok(())
    }

    fn assign_vertex(&mut self, i: usize) -> Result<Option<Realization>> {
        if i == self.h.graph.n() {
            return self.assign_edge(0);
        }
        let want = self.h.label(i);
        for gv in 0..self.g.graph.n() {
            if self.image_used[gv]
                || self.g.label(gv) != want
                || self.g.graph.degree(gv) < self.h.graph.degree(i)
            {
                continue;
            }
            self.spend()?;
            self.phi[i] = Some(gv);
            self.image_used[gv] = true;
            let found = self.assign_vertex(i + 1)?;
            self.phi[i] = None;
            self.image_used[gv] = false;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn assign_edge(&mut self, e: usize) -> Result<Option<Realization>> {
        if e == self.hedges.len() {
            return Ok(Some(Realization {
                vertex_image: self.phi.iter().map(|x| x.unwrap()).collect(),
                edge_image: self.paths.clone(),
            }));
        }
        let (a, b) = self.hedges[e];
        let from = self.phi[a].unwrap();
        let to = self.phi[b].unwrap();
        let mut path = vec![from];
        let mut on_path = vec![false; self.g.graph.n()];
        on_path[from] = true;
        self.extend_path(e, to, &mut path, &mut on_path)
    }

    /// Depth-first path growth in ascending-neighbor order; internal
    /// vertices must avoid every vertex image and every previous path.
    fn extend_path(
        &mut self,
        e: usize,
        to: Vertex,
        path: &mut Vec<Vertex>,
        on_path: &mut Vec<bool>,
    ) -> Result<Option<Realization>> {
        let last = *path.last().unwrap();
        let nbrs: Vec<Vertex> = self.g.graph.neighbors(last).to_vec();
        for w in nbrs {
            if on_path[w] {
                continue;
            }
            if w == to {
                self.spend()?;
                path.push(w);
                self.paths.insert(self.hedges[e], path.clone());
                for &x in &path[1..path.len() - 1] {
                    self.path_used[x] = true;
                }
                let found = self.assign_edge(e + 1)?;
                for &x in &path[1..path.len() - 1] {
                    self.path_used[x] = false;
                }
                self.paths.remove(&self.hedges[e]);
                path.pop();
                if found.is_some() {
                    return Ok(found);
                }
                continue;
            }
            if self.image_used[w] || self.path_used[w] {
                continue;
            }
            self.spend()?;
            path.push(w);
            on_path[w] = true;
            let found = self.extend_path(e, to, path, on_path)?;
            path.pop();
            on_path[w] = false;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// Exhaustive search for a realization of `h` inside `g`: the first one in
/// lexicographic order (by vertex image, then by edge paths in sorted edge
/// order), `None` when there is none, or a cap error. Labels must match
/// exactly; unlabeled vertices only map to unlabeled vertices.
pub fn find_realization(
    h: &RootedGraph,
    g: &RootedGraph,
    work_cap: usize,
) -> Result<Option<Realization>> {
    let mut search = RealizeSearch {
        h,
        g,
        hedges: h.graph.edges().collect(),
        phi: vec![None; h.graph.n()],
        image_used: vec![false; g.graph.n()],
        path_used: vec![false; g.graph.n()],
        paths: BTreeMap::new(),
        work: 0,
        work_cap,
    };
    search.assign_vertex(0)
}

/// Core reconstruction: replays moves given over `h`'s vertices as moves of
/// the host graph, concatenating edge-image paths hop by hop.
pub fn realize_moves(
    h: &RootedGraph,
    g: &RootedGraph,
    r: &Realization,
    hsched: &HSchedule,
) -> Result<Schedule> {
    verify_realization(h, g, r)?;
    let mut moves = Vec::with_capacity(hsched.moves.len());
    for hm in &hsched.moves {
        if hm.hpath.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "move at step {} visits fewer than two vertices",
                hm.time_step
            )));
        }
        let mut path = vec![r.vertex_image[hm.hpath[0]]];
        for w in hm.hpath.windows(2) {
            let (a, b) = (w[0], w[1]);
            let key = (a.min(b), a.max(b));
            let Some(corridor) = r.edge_image.get(&key) else {
                return Err(Error::InvalidInput(format!(
                    "move at step {} uses missing edge ({a},{b})",
                    hm.time_step
                )));
            };
            if a < b {
                path.extend(&corridor[1..]);
            } else {
                path.extend(corridor[..corridor.len() - 1].iter().rev());
            }
        }
        moves.push(Move { time_step: hm.time_step, robot: hm.robot, path });
    }
    Schedule::new(moves)
}

/// Reconstructs an instance schedule from a realization of the
/// representation, per edge-path concatenation. The output has exactly as
/// many moves as the input.
pub fn schedule_from_realization(
    inst: &Instance,
    rep: &Representation,
    r: &Realization,
    hsched: &HSchedule,
) -> Result<Schedule> {
    let g = relabel_terminals(inst);
    realize_moves(&rep.hs, &g, r, hsched)
}

/// Result of the representation-enumeration solver.
#[derive(Clone, Debug)]
pub enum ReprSolveOutcome {
    Solved(Schedule),
    /// No candidate representation within the size cap admits a schedule of
    /// at most `ell` moves together with a realization.
    NoWithinCaps,
}

/// Lexicographically smallest candidate form: labeled vertices are fixed
/// `0..labels`, the unlabeled block is interchangeable, so minimize the edge
/// list over its permutations.
fn canonical_candidate(m: usize, labeled: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let free: Vec<usize> = (labeled..m).collect();
    let mut perm: Vec<usize> = free.clone();
    let mut best: Option<Vec<(usize, usize)>> = None;
    fn permute(
        perm: &mut Vec<usize>,
        at: usize,
        labeled: usize,
        edges: &[(usize, usize)],
        best: &mut Option<Vec<(usize, usize)>>,
    ) {
        if at == perm.len() {
            let map = |v: usize| if v < labeled { v } else { perm[v - labeled] };
            let mut mapped: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (map(a), map(b));
                    (x.min(y), x.max(y))
                })
                .collect();
            mapped.sort_unstable();
            if best.as_ref().is_none_or(|b| mapped < *b) {
                *best = Some(mapped);
            }
            return;
        }
        for i in at..perm.len() {
            perm.swap(at, i);
            permute(perm, at + 1, labeled, edges, best);
            perm.swap(at, i);
        }
    }
    permute(&mut perm, 0, labeled, edges, &mut best);
    best.unwrap_or_default()
}

/// Enumerates candidate representations up to `repr_size_cap` vertices over
/// the instance's terminal labels, keeps those on which the robots can reach
/// their goals within `ell` moves, and returns the reconstruction through
/// the first candidate that embeds into the instance graph. Exhaustive
/// within the caps: `NoWithinCaps` means no schedule with at most `ell`
/// moves exists whose representation has at most `repr_size_cap` vertices.
pub fn solve_by_representation(
    inst: &Instance,
    repr_size_cap: usize,
    ell: usize,
) -> Result<ReprSolveOutcome> {
    if repr_size_cap > 8 {
        return Err(Error::PremiseUnmet(format!(
            "representation size cap {repr_size_cap} is beyond desk scale (max 8)"
        )));
    }
    if inst.robot_count() == 0 {
        return Ok(ReprSolveOutcome::Solved(Schedule { moves: Vec::new() }));
    }
    let ts = TerminalSet::of(inst);
    let labels: Vec<u32> = ts.labels().values().copied().collect();
    let labeled = labels.len();
    if labeled > repr_size_cap {
        return Err(Error::InvalidInput(format!(
            "{labeled} terminals cannot fit a representation of {repr_size_cap} vertices"
        )));
    }
    // Instance-space label -> candidate vertex id, in ascending label order.
    let label_to_vertex: BTreeMap<u32, usize> =
        labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    // A target label shadowed by a start on the same instance vertex is
    // represented by that start's vertex.
    let mut target_vertex: BTreeMap<u32, usize> = BTreeMap::new();
    let m = inst.dest_robots.len() as u32;
    for (v, &l) in ts.labels() {
        if let Some(shadowed) = ts.shadowed_target(*v) {
            target_vertex.insert(shadowed, label_to_vertex[&l]);
        }
        if (m + 1..=2 * m).contains(&l) {
            target_vertex.insert(l, label_to_vertex[&l]);
        }
    }
    let g = relabel_terminals(inst);

    for nv in labeled..=repr_size_cap {
        let pairs: Vec<(usize, usize)> =
            (0..nv).flat_map(|a| (a + 1..nv).map(move |b| (a, b))).collect();
        let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
        for mask in 0u64..(1u64 << pairs.len()) {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            // An unlabeled isolated vertex never helps: dropping it gives a
            // smaller candidate that is enumerated too.
            let mut deg = vec![0usize; nv];
            for &(a, b) in &edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            if (labeled..nv).any(|v| deg[v] == 0) {
                continue;
            }
            if !seen.insert(canonical_candidate(nv, labeled, &edges)) {
                continue;
            }
            let graph = Graph::from_edges(nv, &edges).expect("generated pairs are simple");
            let roots: BTreeMap<usize, u32> =
                labels.iter().enumerate().map(|(i, &l)| (i, l)).collect();
            let candidate = RootedGraph::new(graph.clone(), roots)?;
            // Step 1: can the robots reach their goals on the candidate
            // itself within the move budget?
            let dest: Vec<DestRobot> = (0..inst.dest_robots.len())
                .map(|i| DestRobot {
                    start: label_to_vertex[&(1 + i as u32)],
                    target: target_vertex[&(m + 1 + i as u32)],
                })
                .collect();
            let free: Vec<Vertex> = (0..inst.free_robots.len())
                .map(|j| label_to_vertex[&(2 * m + 1 + j as u32)])
                .collect();
            let Ok(cand_inst) = Instance::new(graph, dest, free, ell, false) else {
                continue;
            };
            let (outcome, _) = solve_optimal(&cand_inst, Some(ell));
            let Some(cand_sched) = outcome.schedule() else { continue };
            // Step 2: does the candidate embed into the instance graph?
            let Some(r) = find_realization(&candidate, &g, REALIZATION_WORK_CAP)? else {
                continue;
            };
            let hsched = HSchedule {
                moves: cand_sched
                    .moves
                    .iter()
                    .map(|mv| HMove {
                        time_step: mv.time_step,
                        robot: mv.robot,
                        hpath: mv.path.clone(),
                    })
                    .collect(),
            };
            let sched = realize_moves(&candidate, &g, &r, &hsched)?;
            let mut check = inst.clone();
            check.budget = ell;
            match validate(&check, &sched)? {
                Verdict::Valid => return Ok(ReprSolveOutcome::Solved(sched)),
                Verdict::Invalid(v) => {
                    return Err(Error::InvalidInput(format!(
                        "reconstructed schedule fails validation at step {}: {}",
                        v.time_step, v.rule
                    )))
                }
            }
        }
    }
    Ok(ReprSolveOutcome::NoWithinCaps)
}

/// Text form: `REPR 1` header, one `v <id> <label>` line per vertex
/// (non-terminals carry the anonymous label, one past the label slots), one
/// `e <u> <v>` line per edge.
pub fn serialize_representation(inst: &Instance, rep: &Representation) -> String {
    use std::fmt::Write;
    let ts = TerminalSet::of(inst);
    let anonymous = ts.slots() + 1;
    let mut out = String::from("REPR 1\n");
    for i in 0..rep.hs.graph.n() {
        let label = rep.hs.label(i).unwrap_or(anonymous);
        let _ = writeln!(out, "v {i} {label}");
    }
    for (a, b) in rep.hs.graph.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    out
}

/// Parses the `REPR 1` text form back into a rooted graph over `inst`'s
/// terminal labels. Vertices carrying the anonymous label (one past the
/// label slots) become unlabeled; every labeled slot may appear at most
/// once.
pub fn parse_representation(inst: &Instance, text: &str) -> Result<RootedGraph> {
    let slots = TerminalSet::of(inst).slots();
    let anonymous = slots + 1;
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut header_seen = false;
    let mut vertices: BTreeMap<usize, u32> = BTreeMap::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != "REPR 1" {
                return Err(err(lineno, format!("expected header 'REPR 1', found '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let args: Vec<usize> = parts
            .map(|a| {
                a.parse::<usize>()
                    .map_err(|_| err(lineno, format!("invalid number '{a}'")))
            })
            .collect::<Result<_>>()?;
        match (tag, args.as_slice()) {
            ("v", &[id, label]) => {
                let label = u32::try_from(label)
                    .map_err(|_| err(lineno, format!("label {label} out of range")))?;
                if label == 0 || label > anonymous {
                    return Err(err(
                        lineno,
                        format!("label {label} outside 1..={anonymous} (anonymous = {anonymous})"),
                    ));
                }
                if vertices.insert(id, label).is_some() {
                    return Err(err(lineno, format!("duplicate vertex {id}")));
                }
            }
            ("e", &[u, v]) => edges.push((lineno, u, v)),
            _ => return Err(err(lineno, format!("malformed directive '{line}'"))),
        }
    }
    if !header_seen {
        return Err(err(1, "missing header 'REPR 1'".into()));
    }
    let n = vertices.len();
    if vertices.keys().copied().ne(0..n) {
        return Err(Error::InvalidInput(format!(
            "vertex ids must be exactly 0..{n}"
        )));
    }
    let mut roots: BTreeMap<usize, u32> = BTreeMap::new();
    let mut used = vec![false; anonymous as usize];
    for (&id, &label) in &vertices {
        if label == anonymous {
            continue;
        }
        if std::mem::replace(&mut used[label as usize], true) {
            return Err(Error::InvalidInput(format!("label {label} appears twice")));
        }
        roots.insert(id, label);
    }
    let mut edge_list = Vec::with_capacity(edges.len());
    for (lineno, u, v) in edges {
        if u >= n || v >= n {
            return Err(err(lineno, format!("edge ({u}, {v}) out of range (n = {n})")));
        }
        edge_list.push((u, v));
    }
    let graph = Graph::from_edges(n, &edge_list)
        .map_err(|e| Error::InvalidInput(format!("bad edge list: {e}")))?;
    RootedGraph::new(graph, roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{positions_at, traversed_subgraph};
    use crate::solver::SolveOutcome;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path_instance() -> Instance {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        Instance::new(g, vec![DestRobot { start: 0, target: 2 }], vec![], 2, false).unwrap()
    }

    /// C4 with a blocker: the move must detour 0-3-2.
    fn c4_blocker_instance() -> Instance {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        Instance::new(g, vec![DestRobot { start: 0, target: 2 }], vec![1], 2, false).unwrap()
    }

    fn solved(inst: &Instance) -> Schedule {
        solve_optimal(inst, Some(inst.budget)).0.schedule().expect("fixture solvable").clone()
    }

    #[test]
    fn single_move_contracts_to_one_labeled_edge() {
        let inst = path_instance();
        let s = solved(&inst);
        assert_eq!(s.makespan(), 1);
        let rep = extract_representation(&inst, &s).unwrap();
        assert_eq!(rep.vertex_map, vec![0, 2]);
        assert_eq!(rep.hs.graph.n(), 2);
        assert_eq!(rep.hs.graph.edge_count(), 1);
        assert_eq!(rep.hs.label(0), Some(1));
        assert_eq!(rep.hs.label(1), Some(2));
        assert_eq!(rep.corridors.len(), 1);
        assert_eq!(rep.corridors[0].path, vec![0, 1, 2]);
        assert!(!rep.has_parallel_corridors);
    }

    #[test]
    fn blocker_detour_keeps_the_blocker_as_an_isolated_root() {
        let inst = c4_blocker_instance();
        let s = solved(&inst);
        assert_eq!(s.makespan(), 1);
        assert_eq!(s.moves[0].path, vec![0, 3, 2]);
        let rep = extract_representation(&inst, &s).unwrap();
        // Important: terminals 0 (start), 2 (target), 1 (free start).
        assert_eq!(rep.vertex_map, vec![0, 1, 2]);
        assert_eq!(rep.hs.label(0), Some(1));
        assert_eq!(rep.hs.label(1), Some(3));
        assert_eq!(rep.hs.label(2), Some(2));
        assert_eq!(rep.hs.graph.degree(1), 0, "untraversed blocker stays isolated");
        assert_eq!(rep.corridors.len(), 1);
        assert_eq!(rep.corridors[0].path, vec![0, 3, 2]);
    }

    #[test]
    fn invalid_schedule_is_rejected() {
        let inst = path_instance();
        let s = Schedule {
            moves: vec![Move { time_step: 1, robot: 0, path: vec![0, 1] }],
        };
        assert!(matches!(extract_representation(&inst, &s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn corridor_internals_are_unimportant_degree_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(90125);
        let mut checked = 0;
        for _ in 0..120 {
            let Some((inst, s)) = random_solved(&mut rng) else { continue };
            let rep = extract_representation(&inst, &s).unwrap();
            let gs = traversed_subgraph(&inst, &s);
            let imp = important_vertices(&inst, &s, s.moves.len());
            assert_eq!(rep.vertex_map.len(), imp.len(), "vertex count != important count");
            for c in &rep.corridors {
                for &v in &c.path[1..c.path.len() - 1] {
                    assert_eq!(gs.degree(v), 2);
                    assert!(!imp.contains(&v), "important vertex inside a corridor");
                }
            }
            checked += 1;
        }
        assert!(checked > 40, "only {checked} solved samples");
    }

    fn random_solved(rng: &mut ChaCha8Rng) -> Option<(Instance, Schedule)> {
        let n = rng.gen_range(4..=9);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.45) {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut verts: Vec<Vertex> = (0..n).collect();
        for i in (1..verts.len()).rev() {
            verts.swap(i, rng.gen_range(0..=i));
        }
        let k = rng.gen_range(1..=2);
        let inst = Instance::new(
            g,
            vec![DestRobot { start: verts[0], target: verts[n - 1] }],
            verts[1..k].to_vec(),
            rng.gen_range(1..=4),
            false,
        )
        .ok()?;
        let s = solve_optimal(&inst, Some(inst.budget)).0.schedule()?.clone();
        if s.makespan() == 0 {
            return None;
        }
        Some((inst, s))
    }

    #[test]
    fn labeled_edge_realizes_as_the_whole_path() {
        let h = RootedGraph::new(
            Graph::from_edges(2, &[(0, 1)]).unwrap(),
            [(0, 1u32), (1, 2u32)].into_iter().collect(),
        )
        .unwrap();
        let g = RootedGraph::new(
            Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            [(0, 1u32), (3, 2u32)].into_iter().collect(),
        )
        .unwrap();
        let r = find_realization(&h, &g, 10_000).unwrap().expect("path realizes edge");
        assert_eq!(r.vertex_image, vec![0, 3]);
        assert_eq!(r.edge_image[&(0, 1)], vec![0, 1, 2, 3]);
        verify_realization(&h, &g, &r).unwrap();
    }

    #[test]
    fn no_k4_inside_a_tree() {
        let mut k4_edges = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                k4_edges.push((a, b));
            }
        }
        let h = RootedGraph::new(Graph::from_edges(4, &k4_edges).unwrap(), BTreeMap::new())
            .unwrap();
        // A spider with three long legs: plenty of vertices, still a tree.
        let mut edges = vec![(0, 1), (0, 4), (0, 7)];
        edges.extend([(1, 2), (2, 3), (4, 5), (5, 6), (7, 8), (8, 9)]);
        let g =
            RootedGraph::new(Graph::from_edges(10, &edges).unwrap(), BTreeMap::new()).unwrap();
        assert_eq!(find_realization(&h, &g, 10_000_000).unwrap(), None);
    }

    #[test]
    fn realization_cap_is_explicit() {
        let h = RootedGraph::new(
            Graph::from_edges(2, &[(0, 1)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        let g = RootedGraph::new(
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(find_realization(&h, &g, 1), Err(Error::CapExceeded(_))));
    }

    /// Exhaustive reference decision procedure: all injective label-matching
    /// maps, then all combinations of pre-enumerated simple paths.
    fn naive_realizable(h: &RootedGraph, g: &RootedGraph) -> bool {
        let nh = h.graph.n();
        let ng = g.graph.n();
        let mut phi = vec![usize::MAX; nh];
        let mut used = vec![false; ng];
        fn all_simple_paths(g: &Graph, from: Vertex, to: Vertex) -> Vec<Vec<Vertex>> {
            let mut out = Vec::new();
            let mut path = vec![from];
            let mut on = vec![false; g.n()];
            on[from] = true;
            fn go(
                g: &Graph,
                to: Vertex,
                path: &mut Vec<Vertex>,
                on: &mut Vec<bool>,
                out: &mut Vec<Vec<Vertex>>,
            ) {
                let last = *path.last().unwrap();
                if last == to {
                    out.push(path.clone());
                    return;
                }
                for &w in g.neighbors(last) {
                    if !on[w] {
                        path.push(w);
                        on[w] = true;
                        go(g, to, path, on, out);
                        path.pop();
                        on[w] = false;
                    }
                }
            }
            go(g, to, &mut path, &mut on, &mut out);
            out
        }
        fn paths_compatible(chosen: &[&Vec<Vertex>], phi: &[usize]) -> bool {
            let mut internal: BTreeSet<Vertex> = BTreeSet::new();
            for p in chosen {
                for &x in &p[1..p.len() - 1] {
                    if phi.contains(&x) || !internal.insert(x) {
                        return false;
                    }
                }
            }
            true
        }
        fn pick_paths(
            per_edge: &[Vec<Vec<Vertex>>],
            at: usize,
            chosen: &mut Vec<usize>,
            phi: &[usize],
        ) -> bool {
            if at == per_edge.len() {
                let refs: Vec<&Vec<Vertex>> =
                    chosen.iter().enumerate().map(|(e, &i)| &per_edge[e][i]).collect();
                return paths_compatible(&refs, phi);
            }
            for i in 0..per_edge[at].len() {
                chosen.push(i);
                // Prune early: check the partial selection too.
                let refs: Vec<&Vec<Vertex>> =
                    chosen.iter().enumerate().map(|(e, &j)| &per_edge[e][j]).collect();
                let ok = paths_compatible(&refs, phi)
                    && pick_paths(per_edge, at + 1, chosen, phi);
                chosen.pop();
                if ok {
                    return true;
                }
            }
            false
        }
        fn assign(
            h: &RootedGraph,
            g: &RootedGraph,
            i: usize,
            phi: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if i == phi.len() {
                let per_edge: Vec<Vec<Vec<Vertex>>> = h
                    .graph
                    .edges()
                    .map(|(a, b)| all_simple_paths(&g.graph, phi[a], phi[b]))
                    .collect();
                return pick_paths(&per_edge, 0, &mut Vec::new(), phi);
            }
            for gv in 0..g.graph.n() {
                if !used[gv] && g.label(gv) == h.label(i) {
                    phi[i] = gv;
                    used[gv] = true;
                    if assign(h, g, i + 1, phi, used) {
                        used[gv] = false;
                        return true;
                    }
                    used[gv] = false;
                }
            }
            false
        }
        assign(h, g, 0, &mut phi, &mut used)
    }

    #[test]
    fn search_agrees_with_the_naive_enumerator() {
        let mut rng = ChaCha8Rng::seed_from_u64(271828);
        for round in 0..120 {
            let nh = rng.gen_range(2..=4);
            let ng = rng.gen_range(nh..=8);
            let mut hedges = Vec::new();
            for a in 0..nh {
                for b in a + 1..nh {
                    if rng.gen_bool(0.5) {
                        hedges.push((a, b));
                    }
                }
            }
            let mut gedges = Vec::new();
            for a in 0..ng {
                for b in a + 1..ng {
                    if rng.gen_bool(0.4) {
                        gedges.push((a, b));
                    }
                }
            }
            // Pin up to two labels to random vertices on both sides.
            let mut hroots = BTreeMap::new();
            let mut groots = BTreeMap::new();
            for l in 1..=rng.gen_range(0..=2u32) {
                let hv = rng.gen_range(0..nh);
                let gv = rng.gen_range(0..ng);
                if hroots.contains_key(&hv) || groots.contains_key(&gv) {
                    continue;
                }
                hroots.insert(hv, l);
                groots.insert(gv, l);
            }
            let h = RootedGraph::new(Graph::from_edges(nh, &hedges).unwrap(), hroots).unwrap();
            let g = RootedGraph::new(Graph::from_edges(ng, &gedges).unwrap(), groots).unwrap();
            let fast = find_realization(&h, &g, 50_000_000).unwrap();
            let slow = naive_realizable(&h, &g);
            assert_eq!(fast.is_some(), slow, "divergence in round {round}");
            if let Some(r) = fast {
                verify_realization(&h, &g, &r).unwrap();
            }
        }
    }

    #[test]
    fn round_trip_preserves_validity_and_makespan() {
        let mut rng = ChaCha8Rng::seed_from_u64(161803);
        let mut done = 0;
        for _ in 0..120 {
            let Some((inst, s)) = random_solved(&mut rng) else { continue };
            let rep = extract_representation(&inst, &s).unwrap();
            let hsched = reinterpret_on_hs(&rep, &s).unwrap();
            let g = relabel_terminals(&inst);
            let r = find_realization(&rep.hs, &g, 50_000_000)
                .unwrap()
                .expect("extraction output must realize in its own instance");
            let rebuilt = schedule_from_realization(&inst, &rep, &r, &hsched).unwrap();
            assert_eq!(rebuilt.makespan(), s.makespan());
            assert_eq!(validate(&inst, &rebuilt).unwrap(), Verdict::Valid);
            done += 1;
        }
        assert!(done > 40, "only {done} round trips");
    }

    #[test]
    fn hand_built_realization_reroutes_through_the_other_corridor() {
        // C4 without blockers: solver takes 0-1-2; realize the single
        // representation edge through 0-3-2 instead.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let inst =
            Instance::new(g, vec![DestRobot { start: 0, target: 2 }], vec![], 1, false).unwrap();
        let s = solved(&inst);
        assert_eq!(s.moves[0].path, vec![0, 1, 2]);
        let rep = extract_representation(&inst, &s).unwrap();
        let hsched = reinterpret_on_hs(&rep, &s).unwrap();
        let r = Realization {
            vertex_image: vec![0, 2],
            edge_image: [((0usize, 1usize), vec![0, 3, 2])].into_iter().collect(),
        };
        let rebuilt = schedule_from_realization(&inst, &rep, &r, &hsched).unwrap();
        assert_eq!(rebuilt.moves[0].path, vec![0, 3, 2]);
        assert_eq!(validate(&inst, &rebuilt).unwrap(), Verdict::Valid);
        assert_eq!(rebuilt.makespan(), s.makespan());
    }

    #[test]
    fn corrupted_realizations_are_rejected() {
        let inst = path_instance();
        let s = solved(&inst);
        let rep = extract_representation(&inst, &s).unwrap();
        let hsched = reinterpret_on_hs(&rep, &s).unwrap();
        // Image not injective / wrong label.
        let bad = Realization {
            vertex_image: vec![0, 1],
            edge_image: [((0usize, 1usize), vec![0, 1])].into_iter().collect(),
        };
        assert!(schedule_from_realization(&inst, &rep, &bad, &hsched).is_err());
        // Path endpoints disagree with the image.
        let bad = Realization {
            vertex_image: vec![0, 2],
            edge_image: [((0usize, 1usize), vec![0, 1])].into_iter().collect(),
        };
        assert!(schedule_from_realization(&inst, &rep, &bad, &hsched).is_err());
    }

    #[test]
    fn repeated_corridor_traversals_set_the_parallel_flag() {
        // One robot wanders around the C4 and back: both corridors between
        // the two important vertices are traversed, the rooted graph stays
        // simple, and the flag records the collapse.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let inst =
            Instance::new(g, vec![DestRobot { start: 0, target: 2 }], vec![], 3, false).unwrap();
        let s = Schedule {
            moves: vec![
                Move { time_step: 1, robot: 0, path: vec![0, 1, 2] },
                Move { time_step: 2, robot: 0, path: vec![2, 3, 0] },
                Move { time_step: 3, robot: 0, path: vec![0, 1, 2] },
            ],
        };
        assert_eq!(validate(&inst, &s).unwrap(), Verdict::Valid);
        let rep = extract_representation(&inst, &s).unwrap();
        assert_eq!(rep.hs.graph.n(), 2);
        assert_eq!(rep.hs.graph.edge_count(), 1);
        assert_eq!(rep.corridors.len(), 2);
        assert!(rep.has_parallel_corridors);
        // The round trip still works: the reconstruction simply reuses one
        // corridor for every traversal.
        let hsched = reinterpret_on_hs(&rep, &s).unwrap();
        let g = relabel_terminals(&inst);
        let r = find_realization(&rep.hs, &g, 1_000_000).unwrap().unwrap();
        let rebuilt = schedule_from_realization(&inst, &rep, &r, &hsched).unwrap();
        assert_eq!(rebuilt.makespan(), 3);
        assert_eq!(validate(&inst, &rebuilt).unwrap(), Verdict::Valid);
        for j in 0..=3 {
            let orig = positions_at(&inst, &s, j)[0];
            let rb = positions_at(&inst, &rebuilt, j)[0];
            assert_eq!(
                rep.index_of(orig).is_some(),
                rep.index_of(rb).is_some(),
                "resting importance must agree at step {j}"
            );
        }
    }

    #[test]
    fn representation_serializes_to_the_text_format() {
        let inst = c4_blocker_instance();
        let rep = extract_representation(&inst, &solved(&inst)).unwrap();
        let text = serialize_representation(&inst, &rep);
        assert_eq!(text, "REPR 1\nv 0 1\nv 1 3\nv 2 2\ne 0 2\n");
    }

    #[test]
    fn representation_text_round_trips() {
        let inst = c4_blocker_instance();
        let rep = extract_representation(&inst, &solved(&inst)).unwrap();
        let text = serialize_representation(&inst, &rep);
        let parsed = parse_representation(&inst, &text).unwrap();
        assert_eq!(parsed, rep.hs);
        // The parsed graph realizes in the instance it came from.
        let g = relabel_terminals(&inst);
        assert!(find_realization(&parsed, &g, REALIZATION_WORK_CAP).unwrap().is_some());
    }

    #[test]
    fn malformed_representation_text_is_rejected() {
        let inst = c4_blocker_instance();
        for bad in [
            "v 0 1\n",                            // missing header
            "REPR 1\nv 0 1\nv 0 2\n",             // duplicate vertex
            "REPR 1\nv 0 9\n",                    // label out of range
            "REPR 1\nv 0 1\nv 1 1\n",             // label used twice
            "REPR 1\nv 0 1\nv 2 2\n",             // vertex ids with a gap
            "REPR 1\nv 0 1\nv 1 2\ne 0 5\n",      // edge out of range
            "REPR 1\nv 0 1\nwat 3\n",             // unknown directive
        ] {
            assert!(parse_representation(&inst, bad).is_err(), "accepted: {bad:?}");
        }
    }

    #[test]
    fn representation_solver_finds_the_blocker_detour() {
        let inst = c4_blocker_instance();
        match solve_by_representation(&inst, 3, 2).unwrap() {
            ReprSolveOutcome::Solved(s) => {
                assert_eq!(s.makespan(), 1);
                let mut check = inst.clone();
                check.budget = 2;
                assert_eq!(validate(&check, &s).unwrap(), Verdict::Valid);
            }
            ReprSolveOutcome::NoWithinCaps => panic!("C4 detour must be found"),
        }
    }

    #[test]
    fn representation_solver_reports_no_when_jammed() {
        // P3 with both non-target vertices full: the blocker has nowhere to
        // go, so there is no schedule at all.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst =
            Instance::new(g, vec![DestRobot { start: 0, target: 2 }], vec![1], 4, false).unwrap();
        assert!(matches!(
            solve_by_representation(&inst, 4, 4).unwrap(),
            ReprSolveOutcome::NoWithinCaps
        ));
    }

    #[test]
    fn representation_solver_agrees_with_direct_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(314159);
        let mut yes = 0;
        let mut no = 0;
        for _ in 0..40 {
            let n = rng.gen_range(3..=6);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let mut verts: Vec<Vertex> = (0..n).collect();
            for i in (1..verts.len()).rev() {
                verts.swap(i, rng.gen_range(0..=i));
            }
            let k = rng.gen_range(1..=2.min(n));
            let ell = rng.gen_range(1..=3);
            let Ok(inst) = Instance::new(
                g,
                vec![DestRobot { start: verts[0], target: verts[n - 1] }],
                verts[1..k].to_vec(),
                ell,
                false,
            ) else {
                continue;
            };
            let direct = solve_optimal(&inst, Some(ell)).0;
            // Cap = instance size: every representation fits, so the
            // enumeration is a complete decision procedure here.
            let via_repr = solve_by_representation(&inst, n, ell).unwrap();
            match (&direct, &via_repr) {
                (SolveOutcome::Solved(a), ReprSolveOutcome::Solved(b)) => {
                    // Decision-level agreement; the enumeration returns the
                    // first embeddable candidate, not a minimum makespan.
                    assert!(b.makespan() <= ell);
                    assert!(a.makespan() <= b.makespan(), "direct search is optimal");
                    let mut check = inst.clone();
                    check.budget = ell;
                    assert_eq!(validate(&check, b).unwrap(), Verdict::Valid);
                    yes += 1;
                }
                (SolveOutcome::NoWithinDepth | SolveOutcome::Infeasible, _) => {
                    assert!(matches!(via_repr, ReprSolveOutcome::NoWithinCaps));
                    no += 1;
                }
                _ => panic!("decision mismatch: {direct:?} vs {via_repr:?}"),
            }
        }
        assert!(yes >= 5 && no >= 5, "unbalanced sample: {yes} yes / {no} no");
    }
}
