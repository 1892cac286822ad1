//! Kernelization pipeline for planar single-destination instances.
//!
//! The pipeline shrinks an instance without changing whether it is solvable
//! within its move budget. It analyses the free (unoccupied) region around
//! the one destination robot, extracts long *clean paths* — stretches of free
//! vertices of degree exactly two inside their free component — and then
//! either solves the instance outright through a cheap bypass, certifies that
//! no solution can touch the component, or contracts an edge of the clean
//! path that provably no small solution needs. Contractibility is decided by
//! *host testing*: every small rooted pattern graph (a [`Roadmap`]) is
//! searched for around the path, the vertices it can pin onto the path are
//! marked, and any path edge with two unmarked endpoints is safe to contract.
//! Once no component is large enough to make progress, the remaining kernel
//! is solved exactly by a bounded-ball search.
//!
//! The worst-case thresholds guaranteeing progress are astronomically
//! conservative; [`KernelOverrides::desk_scale`] substitutes bench-sized
//! values so the machinery can be exercised end to end. All searches are
//! bounded by an explicit work budget and report cap hits as partial results
//! rather than running open-ended.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::graph::{Graph, Planarity, Vertex};
use crate::havens::simplify_walk;
use crate::instance::Instance;
use crate::schedule::{traversed_subgraph, validate, Move, Schedule};
use crate::solver::{solve_bounded_ball, SolveOutcome};
use crate::{Error, Result};

/// Default bound on elementary search steps for host testing and roadmap
/// enumeration before a run gives up with a partial result.
pub const DEFAULT_WORK_CAP: usize = 20_000_000;

/// Countdown of elementary search steps.
struct Work {
    left: usize,
}

impl Work {
    fn new(cap: usize) -> Work {
        Work { left: cap }
    }

    fn spend(&mut self, amount: usize) -> Result<()> {
        if self.left < amount {
            return Err(Error::CapExceeded("host-test work budget exhausted".into()));
        }
        self.left -= amount;
        Ok(())
    }
}

fn require_single_dest(inst: &Instance) -> Result<(Vertex, Vertex)> {
    match inst.dest_robots.as_slice() {
        [r] => Ok((r.start, r.target)),
        _ => Err(Error::PremiseUnmet(format!(
            "planar pipeline needs exactly one destination robot, got {}",
            inst.dest_robots.len()
        ))),
    }
}

/// Per-vertex blocker indicator: true exactly on free-robot start vertices.
/// The destination robot is not a blocker.
pub fn blocker_weights(inst: &Instance) -> Vec<bool> {
    let mut w = vec![false; inst.graph.n()];
    for &b in &inst.free_robots {
        w[b] = true;
    }
    w
}

/// Fewest blockers on any `v`-`w` path, endpoints included when they are
/// blockers themselves; `None` when the endpoints are disconnected.
pub fn blockd(inst: &Instance, v: Vertex, w: Vertex) -> Option<usize> {
    inst.graph.weighted_distance(&blocker_weights(inst), v, w)
}

// ---------------------------------------------------------------------------
// Free components
// ---------------------------------------------------------------------------

/// The free region of an instance: vertices holding no robot at all, split
/// into connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeAnalysis {
    /// `free[v]` iff no robot starts on `v`.
    pub free: Vec<bool>,
    /// Components of the free subgraph, each sorted ascending, ordered by
    /// smallest member.
    pub components: Vec<Vec<Vertex>>,
    /// Size of the largest free component; 0 when everything is occupied.
    pub lambda: usize,
}

/// Computes the free region. Requires exactly one destination robot (whose
/// start vertex counts as occupied like any other robot position).
pub fn free_analysis(inst: &Instance) -> Result<FreeAnalysis> {
    require_single_dest(inst)?;
    let mut free = vec![true; inst.graph.n()];
    for s in inst.starts() {
        free[s] = false;
    }
    let components = inst.graph.components_within(&free);
    let lambda = components.iter().map(Vec::len).max().unwrap_or(0);
    Ok(FreeAnalysis { free, components, lambda })
}

fn check_free_path(inst: &Instance, q: &[Vertex]) -> Result<()> {
    if !inst.graph.is_simple_path(q) {
        return Err(Error::PremiseUnmet("q must be a nonempty simple path".into()));
    }
    let occ = inst.initial_occupancy();
    if let Some(&v) = q.iter().find(|&&v| occ[v].is_some()) {
        return Err(Error::PremiseUnmet(format!("path vertex {v} is occupied")));
    }
    Ok(())
}

/// `comp` must be a maximal free component, sorted ascending.
fn check_component(inst: &Instance, comp: &[Vertex]) -> Result<()> {
    if comp.is_empty() || comp.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::PremiseUnmet("component must be nonempty and sorted".into()));
    }
    let n = inst.graph.n();
    if *comp.last().unwrap() >= n {
        return Err(Error::PremiseUnmet("component vertex out of range".into()));
    }
    let occ = inst.initial_occupancy();
    let mut member = vec![false; n];
    for &v in comp {
        if occ[v].is_some() {
            return Err(Error::PremiseUnmet(format!("component vertex {v} is occupied")));
        }
        member[v] = true;
    }
    let parts = inst.graph.components_within(&member);
    if parts.len() != 1 {
        return Err(Error::PremiseUnmet("component is not connected".into()));
    }
    for &v in comp {
        for &w in inst.graph.neighbors(v) {
            if !member[w] && occ[w].is_none() {
                return Err(Error::PremiseUnmet(format!(
                    "component is not maximal: free vertex {w} is adjacent"
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Schedule assembly
// ---------------------------------------------------------------------------

/// Greedy schedule construction: every free robot standing on `main_path`
/// slides to an off-path parking spot, then the destination robot slides
/// along the vacated path. Parking routes stay inside `movement` (a subgraph
/// of the instance graph on the same ids). Spots in `preferred` win over
/// others; when `allowed` is given only those vertices may serve as spots.
/// Returns a schedule already checked valid, or `None` when the greedy
/// construction fails.
fn park_and_slide(
    inst: &Instance,
    movement: &Graph,
    main_path: &[Vertex],
    preferred: &BTreeSet<Vertex>,
    allowed: Option<&BTreeSet<Vertex>>,
) -> Option<Schedule> {
    if !inst.graph.is_simple_path(main_path) {
        return None;
    }
    let mut pos = inst.starts();
    let path_set: BTreeSet<Vertex> = main_path.iter().copied().collect();
    let mut moves: Vec<Move> = Vec::new();
    let move_cap = inst.robot_count() + inst.budget + 2;
    loop {
        let offenders: Vec<usize> =
            (1..pos.len()).filter(|&r| path_set.contains(&pos[r])).collect();
        if offenders.is_empty() {
            break;
        }
        if moves.len() >= move_cap {
            return None;
        }
        let mut moved = false;
        for &r in &offenders {
            if let Some(path) = route_to_spot(movement, &pos, r, &path_set, preferred, allowed) {
                pos[r] = *path.last().unwrap();
                moves.push(Move { time_step: 0, robot: r, path });
                moved = true;
                break;
            }
        }
        if !moved {
            return None;
        }
    }
    if main_path.len() >= 2 {
        moves.push(Move { time_step: 0, robot: 0, path: main_path.to_vec() });
    }
    for (i, mv) in moves.iter_mut().enumerate() {
        mv.time_step = i + 1;
    }
    let sched = Schedule::new(moves).ok()?;
    match validate(inst, &sched) {
        Ok(verdict) if verdict.is_valid() => Some(sched),
        _ => None,
    }
}

/// BFS from robot `r`'s position through unoccupied vertices of `movement`
/// to the nearest acceptable parking spot; preferred spots are searched in a
/// first pass of their own. Deterministic via ascending neighbor order.
fn route_to_spot(
    movement: &Graph,
    pos: &[Vertex],
    r: usize,
    path_set: &BTreeSet<Vertex>,
    preferred: &BTreeSet<Vertex>,
    allowed: Option<&BTreeSet<Vertex>>,
) -> Option<Vec<Vertex>> {
    let occupied: BTreeSet<Vertex> = pos.iter().copied().collect();
    let acceptable = |v: Vertex| -> bool {
        !path_set.contains(&v) && allowed.map_or(true, |a| a.contains(&v))
    };
    for phase in 0..2 {
        if phase == 0 && preferred.is_empty() {
            continue;
        }
        let start = pos[r];
        let mut parent: BTreeMap<Vertex, Vertex> = BTreeMap::new();
        let mut seen: BTreeSet<Vertex> = [start].into();
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in movement.neighbors(x) {
                if seen.contains(&y) || occupied.contains(&y) {
                    continue;
                }
                seen.insert(y);
                parent.insert(y, x);
                if acceptable(y) && (phase == 1 || preferred.contains(&y)) {
                    let mut path = vec![y];
                    let mut cur = y;
                    while let Some(&p) = parent.get(&cur) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(y);
            }
        }
    }
    None
}

fn bfs_path_avoiding(
    g: &Graph,
    src: Vertex,
    dst: Vertex,
    forbidden: &BTreeSet<Vertex>,
) -> Option<Vec<Vertex>> {
    if forbidden.contains(&src) || forbidden.contains(&dst) {
        return None;
    }
    let mut parent: Vec<Option<Vertex>> = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    seen[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        if x == dst {
            let mut path = vec![dst];
            let mut cur = dst;
            while let Some(p) = parent[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &y in g.neighbors(x) {
            if !seen[y] && !forbidden.contains(&y) {
                seen[y] = true;
                parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Resilience
// ---------------------------------------------------------------------------

/// Record of an exhaustive bypass scan that found nothing usable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResilienceCertificate {
    /// Ordered far-apart vertex pairs examined on the path.
    pub pairs_checked: usize,
    /// Qualifying detours whose greedy schedule construction failed; a
    /// nonzero count means resilience was not conclusively established.
    pub unconstructed_detours: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResilienceOutcome {
    /// A cheap detour existed and was assembled into a full schedule.
    Solved(Schedule),
    /// No vertex pair far apart on the path admits a cheap enough detour.
    Resilient(ResilienceCertificate),
}

/// Scans a free path `q` for a bypass that solves the whole instance: two
/// vertices `x`, `y` at path distance at least the budget, joined by a
/// detour outside `q` whose blocker count stays within
/// `budget - blockd(s,x) - blockd(y,t) - 1`. When one is found, the blockers
/// on the assembled `s -> x -> y -> t` route are parked (preferring the
/// bypassed stretch of `q`) and the single-main-move schedule is returned.
pub fn resilient_or_solve(inst: &Instance, q: &[Vertex]) -> Result<ResilienceOutcome> {
    let (s, t) = require_single_dest(inst)?;
    check_free_path(inst, q)?;
    let ell = inst.budget;
    let weights = blocker_weights(inst);
    let mut pairs_checked = 0usize;
    let mut unconstructed = 0usize;
    for ix in 0..q.len() {
        for iy in 0..q.len() {
            if ix.abs_diff(iy) < ell.max(1) {
                continue;
            }
            pairs_checked += 1;
            let (x, y) = (q[ix], q[iy]);
            let Some((dsx, path_sx)) = inst.graph.weighted_shortest_path(&weights, s, x) else {
                continue;
            };
            let Some((dyt, path_yt)) = inst.graph.weighted_shortest_path(&weights, y, t) else {
                continue;
            };
            let Some(bound) = ell.checked_sub(dsx + dyt + 1) else { continue };
            let doomed: BTreeSet<Vertex> =
                q.iter().copied().filter(|&v| v != x && v != y).collect();
            let (dg, remap) = inst.graph.delete_vertices(&doomed);
            let (Some(dx), Some(dy)) = (remap[x], remap[y]) else { continue };
            let mut dw = vec![false; dg.n()];
            for (old, slot) in remap.iter().enumerate() {
                if let Some(new) = slot {
                    dw[*new] = weights[old];
                }
            }
            let Some((dcost, dpath)) = dg.weighted_shortest_path(&dw, dx, dy) else {
                continue;
            };
            if dcost > bound || dpath.len() < 2 {
                continue;
            }
            let mut inv = vec![0; dg.n()];
            for (old, slot) in remap.iter().enumerate() {
                if let Some(new) = slot {
                    inv[*new] = old;
                }
            }
            let detour: Vec<Vertex> = dpath.iter().map(|&v| inv[v]).collect();
            let mut walk = path_sx.clone();
            walk.extend_from_slice(&detour[1..]);
            walk.extend_from_slice(&path_yt[1..]);
            let main_path = simplify_walk(walk);
            let (lo, hi) = (ix.min(iy), ix.max(iy));
            let preferred: BTreeSet<Vertex> = q[lo + 1..hi].iter().copied().collect();
            match park_and_slide(inst, &inst.graph, &main_path, &preferred, None) {
                Some(sched) => return Ok(ResilienceOutcome::Solved(sched)),
                None => unconstructed += 1,
            }
        }
    }
    Ok(ResilienceOutcome::Resilient(ResilienceCertificate {
        pairs_checked,
        unconstructed_detours: unconstructed,
    }))
}

// ---------------------------------------------------------------------------
// Structure of solutions through a component
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureOutcome {
    /// The instance was solved outright through the component.
    Solution(Schedule),
    /// No solution can touch the component: every entry/exit pair and every
    /// hub vertex fails its exact boundary-cost test.
    NoSolutionIntersects,
    /// A long cheap traversal survives; any solution through the component
    /// stays close to this path.
    Spine { path: Vec<Vertex>, p: Vertex, q: Vertex },
}

/// Classifies how solutions can interact with one free component (premise:
/// at least `3 * budget` vertices).
///
/// Boundary costs are exact, so `NoSolutionIntersects` is only reported when
/// no pair and no hub passes its cost test. Greedy construction, by
/// contrast, can fail on feasible inputs; when everything constructible
/// failed and no spine candidate remains, the component is left undecided
/// via a `PremiseUnmet` error rather than mis-certified.
pub fn structure_lemma(inst: &Instance, comp: &[Vertex]) -> Result<StructureOutcome> {
    let (s, t) = require_single_dest(inst)?;
    check_component(inst, comp)?;
    let ell = inst.budget;
    if comp.len() < 3 * ell {
        return Err(Error::PremiseUnmet(format!(
            "component has {} vertices, below the 3*budget = {} premise",
            comp.len(),
            3 * ell
        )));
    }
    let weights = blocker_weights(inst);
    let cset: BTreeSet<Vertex> = comp.iter().copied().collect();
    let (cg, cremap) = inst.graph.induced(&cset);
    let cinv: Vec<Vertex> = comp.to_vec();
    let cid = |v: Vertex| cremap[v].expect("component member");
    let cdist: Vec<Vec<Option<usize>>> = (0..cg.n()).map(|v| bfs_all(&cg, v)).collect();
    let bd_s: Vec<Option<usize>> =
        comp.iter().map(|&p| inst.graph.weighted_distance(&weights, s, p)).collect();
    let bd_t: Vec<Option<usize>> =
        comp.iter().map(|&p| inst.graph.weighted_distance(&weights, p, t)).collect();

    let mut feasible_unbuilt = false;

    // Pass 1: entry/exit pairs close enough to leave parking room.
    for (pi, &p) in comp.iter().enumerate() {
        for (qi, &qv) in comp.iter().enumerate() {
            let (Some(a), Some(b)) = (bd_s[pi], bd_t[qi]) else { continue };
            if a + b + 1 > ell {
                continue;
            }
            let Some(dc) = cdist[cid(p)][cid(qv)] else { continue };
            if dc > comp.len() - ell {
                continue;
            }
            feasible_unbuilt = true;
            let spine: Vec<Vertex> = bfs_path_avoiding(&cg, cid(p), cid(qv), &BTreeSet::new())
                .expect("connected component")
                .into_iter()
                .map(|v| cinv[v])
                .collect();
            let (_, path_sp) = inst.graph.weighted_shortest_path(&weights, s, p).unwrap();
            let (_, path_qt) = inst.graph.weighted_shortest_path(&weights, qv, t).unwrap();
            let mut walk = path_sp;
            walk.extend_from_slice(&spine[1..]);
            walk.extend_from_slice(&path_qt[1..]);
            let main_path = simplify_walk(walk);
            let preferred: BTreeSet<Vertex> =
                comp.iter().copied().filter(|v| !spine.contains(v)).collect();
            if let Some(sched) =
                park_and_slide(inst, &inst.graph, &main_path, &preferred, None)
            {
                return Ok(StructureOutcome::Solution(sched));
            }
        }
    }

    // Pass 2: hub vertices whose three arms (to s, to t, into the component)
    // are jointly cheap.
    let (sg, sremap) = inst.graph.delete_vertices(&[s].into());
    let mut sw = vec![false; sg.n()];
    for (old, slot) in sremap.iter().enumerate() {
        if let Some(new) = slot {
            sw[*new] = weights[old];
        }
    }
    for y in 0..inst.graph.n() {
        if y == s {
            continue;
        }
        let (Some(a), Some(b)) = (
            inst.graph.weighted_distance(&weights, s, y),
            inst.graph.weighted_distance(&weights, y, t),
        ) else {
            continue;
        };
        let Some(ys) = sremap[y] else { continue };
        let arm = comp
            .iter()
            .filter_map(|&p| sremap[p].and_then(|ps| sg.weighted_distance(&sw, ys, ps)))
            .min();
        let Some(c) = arm else { continue };
        if a + b + c + 1 > ell {
            continue;
        }
        feasible_unbuilt = true;
        let (_, path_sy) = inst.graph.weighted_shortest_path(&weights, s, y).unwrap();
        let (_, path_yt) = inst.graph.weighted_shortest_path(&weights, y, t).unwrap();
        let mut walk = path_sy;
        walk.extend_from_slice(&path_yt[1..]);
        let main_path = simplify_walk(walk);
        if let Some(sched) = park_and_slide(inst, &inst.graph, &main_path, &cset, None) {
            return Ok(StructureOutcome::Solution(sched));
        }
    }

    // Pass 3: far pairs become spine candidates; pick the farthest, then
    // lexicographically smallest.
    let mut best: Option<(usize, Vertex, Vertex)> = None;
    for (pi, &p) in comp.iter().enumerate() {
        for (qi, &qv) in comp.iter().enumerate() {
            let (Some(a), Some(b)) = (bd_s[pi], bd_t[qi]) else { continue };
            if a + b + 1 > ell {
                continue;
            }
            let Some(dc) = cdist[cid(p)][cid(qv)] else { continue };
            if dc + ell < comp.len() {
                continue;
            }
            if best.map_or(true, |(bd, _, _)| dc > bd) {
                best = Some((dc, p, qv));
            }
        }
    }
    if let Some((_, p, qv)) = best {
        let spine: Vec<Vertex> = bfs_path_avoiding(&cg, cid(p), cid(qv), &BTreeSet::new())
            .expect("connected component")
            .into_iter()
            .map(|v| cinv[v])
            .collect();
        assert!(
            spine.len() + ell >= comp.len() + 1,
            "spine shorter than the guaranteed bound"
        );
        return Ok(StructureOutcome::Spine { path: spine, p, q: qv });
    }
    if feasible_unbuilt {
        return Err(Error::PremiseUnmet(
            "a feasible boundary pair resisted greedy construction; component left undecided"
                .into(),
        ));
    }
    Ok(StructureOutcome::NoSolutionIntersects)
}

fn bfs_all(g: &Graph, src: Vertex) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for &y in g.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

// ---------------------------------------------------------------------------
// Clean paths
// ---------------------------------------------------------------------------

/// A stretch of a free component every kernelization round works on: a free
/// path whose vertices all have degree exactly 2 inside the component, longer
/// than the working threshold, and resilient (no cheap bypass).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanPathWitness {
    /// The free component, sorted ascending.
    pub component: Vec<Vertex>,
    /// The clean stretch along the component's spine.
    pub q: Vec<Vertex>,
    /// Length bound the stretch exceeds.
    pub threshold: usize,
    /// Endpoints of the spine the stretch was carved from.
    pub spine_endpoints: (Vertex, Vertex),
}

impl CleanPathWitness {
    /// Re-checks every structural property of the witness against `inst`.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        check_component(inst, &self.component)?;
        check_free_path(inst, &self.q)?;
        let cset: BTreeSet<Vertex> = self.component.iter().copied().collect();
        for &v in &self.q {
            if !cset.contains(&v) {
                return Err(Error::PremiseUnmet(format!(
                    "path vertex {v} lies outside the component"
                )));
            }
            let deg = inst.graph.neighbors(v).iter().filter(|w| cset.contains(w)).count();
            if deg != 2 {
                return Err(Error::PremiseUnmet(format!(
                    "path vertex {v} has component degree {deg}, want 2"
                )));
            }
        }
        if self.q.len() <= self.threshold {
            return Err(Error::PremiseUnmet(format!(
                "stretch has {} vertices, not more than the threshold {}",
                self.q.len(),
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum CleanOutcome {
    Solved(Schedule),
    /// An edge of the component was contracted; `merged` holds the original
    /// endpoint ids (smaller first).
    Contracted { inst: Instance, merged: (Vertex, Vertex) },
    Witness(CleanPathWitness),
}

/// Component size above which [`clean_path`] is guaranteed to make progress
/// (for budgets of at least 2; smaller budgets never enter the clean-path
/// machinery and get `usize::MAX`).
pub fn clean_premise_bound(budget: usize, threshold: usize) -> usize {
    if budget < 2 {
        return usize::MAX;
    }
    (threshold + 1).saturating_mul(budget - 1).saturating_add(3 * (budget + 2))
}

/// One clean-path round on a free component: solve through it, contract an
/// edge nothing needs, or hand back a resilient clean stretch for marking.
pub fn clean_path(inst: &Instance, comp: &[Vertex], threshold: usize) -> Result<CleanOutcome> {
    require_single_dest(inst)?;
    let ell = inst.budget;
    if ell < 2 {
        return Err(Error::PremiseUnmet(
            "clean-path extraction needs a budget of at least 2".into(),
        ));
    }
    let need = clean_premise_bound(ell, threshold);
    if comp.len() < need {
        return Err(Error::PremiseUnmet(format!(
            "component has {} vertices, below the premise bound {need}",
            comp.len()
        )));
    }
    match structure_lemma(inst, comp)? {
        StructureOutcome::Solution(s) => Ok(CleanOutcome::Solved(s)),
        StructureOutcome::NoSolutionIntersects => {
            let cset: BTreeSet<Vertex> = comp.iter().copied().collect();
            for &a in comp {
                for &b in inst.graph.neighbors(a) {
                    if b > a && cset.contains(&b) {
                        let (g2, remap) = inst.graph.contract_edge(a, b)?;
                        let next = inst.migrate_total(g2, &remap)?;
                        return Ok(CleanOutcome::Contracted { inst: next, merged: (a, b) });
                    }
                }
            }
            Err(Error::PremiseUnmet("component has no internal edge".into()))
        }
        StructureOutcome::Spine { path, p, q } => {
            let cset: BTreeSet<Vertex> = comp.iter().copied().collect();
            let deg2 = |v: Vertex| {
                inst.graph.neighbors(v).iter().filter(|w| cset.contains(w)).count() == 2
            };
            let mut runs: Vec<Vec<Vertex>> = Vec::new();
            let mut cur: Vec<Vertex> = Vec::new();
            for &v in &path {
                if deg2(v) {
                    cur.push(v);
                } else if !cur.is_empty() {
                    runs.push(std::mem::take(&mut cur));
                }
            }
            if !cur.is_empty() {
                runs.push(cur);
            }
            let Some(run) = runs.iter().max_by_key(|r| r.len()).cloned() else {
                return Err(Error::PremiseUnmet("spine has no degree-2 stretch".into()));
            };
            if run.len() <= threshold {
                return Err(Error::PremiseUnmet(format!(
                    "longest clean stretch has {} vertices, needs more than {threshold}",
                    run.len()
                )));
            }
            match resilient_or_solve(inst, &run)? {
                ResilienceOutcome::Solved(s) => Ok(CleanOutcome::Solved(s)),
                ResilienceOutcome::Resilient(cert) => {
                    if cert.unconstructed_detours > 0 {
                        return Err(Error::PremiseUnmet(
                            "resilience inconclusive: a qualifying detour resisted construction"
                                .into(),
                        ));
                    }
                    Ok(CleanOutcome::Witness(CleanPathWitness {
                        component: comp.to_vec(),
                        q: run,
                        threshold,
                        spine_endpoints: (p, q),
                    }))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Roadmaps
// ---------------------------------------------------------------------------

/// A rooted pattern graph for host testing. Vertices `root_u` and `root_v`
/// pin onto the clean path; `occupied` marks vertices that must map onto
/// blockers (roots are never occupied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Roadmap {
    pub graph: Graph,
    pub root_u: Vertex,
    pub root_v: Vertex,
    pub occupied: Vec<bool>,
}

impl Roadmap {
    pub fn new(
        graph: Graph,
        root_u: Vertex,
        root_v: Vertex,
        occupied: Vec<bool>,
    ) -> Result<Roadmap> {
        let n = graph.n();
        if n < 2 || root_u >= n || root_v >= n || root_u == root_v {
            return Err(Error::InvalidInput(
                "roadmap needs two distinct in-range roots".into(),
            ));
        }
        if occupied.len() != n {
            return Err(Error::InvalidInput(format!(
                "occupied flags cover {} vertices, graph has {n}",
                occupied.len()
            )));
        }
        if occupied[root_u] || occupied[root_v] {
            return Err(Error::InvalidInput("roadmap roots cannot be occupied".into()));
        }
        if !graph.connected() {
            return Err(Error::InvalidInput("roadmap must be connected".into()));
        }
        Ok(Roadmap { graph, root_u, root_v, occupied })
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&b| b).count()
    }
}

/// Enumerates every connected rooted roadmap with `2..=max_vertices` vertices
/// and at most `max_occupied` occupied vertices, one representative per
/// isomorphism class (isomorphisms fix both roots). The roots are always
/// vertices 0 and 1. Deterministic order; `work_cap` bounds the candidate
/// graphs inspected.
pub fn enumerate_roadmaps(
    max_vertices: usize,
    max_occupied: usize,
    work_cap: usize,
) -> Result<Vec<Roadmap>> {
    let mut work = Work::new(work_cap);
    enumerate_roadmaps_counted(max_vertices, max_occupied, &mut work)
}

fn enumerate_roadmaps_counted(
    max_vertices: usize,
    max_occupied: usize,
    work: &mut Work,
) -> Result<Vec<Roadmap>> {
    let mut out = Vec::new();
    for p in 2..=max_vertices {
        let pairs: Vec<(usize, usize)> =
            (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        let m = pairs.len();
        if m >= 63 {
            return Err(Error::CapExceeded(format!(
                "roadmap size {p} exceeds the enumerable edge-mask range"
            )));
        }
        let perms = permutations_of((2..p).collect::<Vec<_>>());
        for mask in 0u64..(1u64 << m) {
            work.spend(1)?;
            if !mask_connected(p, &pairs, mask) {
                continue;
            }
            work.spend(perms.len())?;
            let occ_limit = 1u32 << p;
            for occ in 0..occ_limit {
                if occ & 0b11 != 0 {
                    continue; // roots stay free
                }
                if (occ.count_ones() as usize) > max_occupied {
                    continue;
                }
                if !is_canonical(p, &pairs, mask, occ, &perms) {
                    continue;
                }
                let edges: Vec<(Vertex, Vertex)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let graph = Graph::from_edges(p, &edges)?;
                let occupied: Vec<bool> = (0..p).map(|v| occ >> v & 1 == 1).collect();
                out.push(Roadmap::new(graph, 0, 1, occupied)?);
            }
        }
    }
    Ok(out)
}

fn permutations_of(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.clone();
        rest.remove(i);
        for mut tail in permutations_of(rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

fn mask_connected(p: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); p];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if mask >> i & 1 == 1 {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; p];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// `(mask, occ)` is the lexicographic minimum over all root-fixing vertex
/// permutations.
fn is_canonical(
    p: usize,
    pairs: &[(usize, usize)],
    mask: u64,
    occ: u32,
    perms: &[Vec<usize>],
) -> bool {
    let index: BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    for perm in perms {
        let map = |v: usize| -> usize {
            if v < 2 {
                v
            } else {
                perm[v - 2]
            }
        };
        let mut pmask = 0u64;
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (x, y) = (map(a).min(map(b)), map(a).max(map(b)));
                pmask |= 1 << index[&(x, y)];
            }
        }
        let mut pocc = 0u32;
        for v in 0..p {
            if occ >> v & 1 == 1 {
                pocc |= 1 << map(v);
            }
        }
        if (pmask, pocc) < (mask, occ) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Host testing
// ---------------------------------------------------------------------------

/// How a roadmap sits on the graph around a clean path: `phi` maps roadmap
/// vertices to graph vertices and `psi` maps each roadmap edge — keyed
/// `(a, b)` with `a < b` — to the simple path realizing it, oriented from
/// `phi[a]` to `phi[b]`. Edges between path-borne vertices realize as
/// stretches of the clean path; all other edges realize as single edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostWitness {
    pub phi: Vec<Vertex>,
    pub psi: BTreeMap<(usize, usize), Vec<Vertex>>,
}

impl HostWitness {
    /// Host image vertices lying on `q`: the marks the host contributes.
    pub fn marks_on(&self, q: &[Vertex]) -> Vec<Vertex> {
        let qset: BTreeSet<Vertex> = q.iter().copied().collect();
        let mut out: Vec<Vertex> =
            self.phi.iter().copied().filter(|v| qset.contains(v)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Searches for a host of `rm` around the free path `q` with the roots
/// pinned near the ends: `u` at most `budget^2 + 1` vertices from the left
/// end, `v` likewise from the right. Occupied roadmap vertices must map onto
/// blockers, everything else onto unoccupied vertices; vertices other than
/// the path-borne ones stay off `q` entirely. Returns the first host in
/// leftmost search order, `None` when none exists.
pub fn host_test(
    inst: &Instance,
    q: &[Vertex],
    u: Vertex,
    v: Vertex,
    rm: &Roadmap,
    work_cap: usize,
) -> Result<Option<HostWitness>> {
    host_preconditions(inst, q, u, v, rm)?;
    let mut work = Work::new(work_cap);
    host_search(inst, q, u, v, rm, &mut work)
}

fn host_preconditions(
    inst: &Instance,
    q: &[Vertex],
    u: Vertex,
    v: Vertex,
    rm: &Roadmap,
) -> Result<()> {
    let (s, t) = require_single_dest(inst)?;
    check_free_path(inst, q)?;
    let ell = inst.budget;
    let iu = q
        .iter()
        .position(|&x| x == u)
        .ok_or_else(|| Error::PremiseUnmet(format!("u = {u} is not on the path")))?;
    let iv = q
        .iter()
        .position(|&x| x == v)
        .ok_or_else(|| Error::PremiseUnmet(format!("v = {v} is not on the path")))?;
    if iu >= iv {
        return Err(Error::PremiseUnmet("u must precede v on the path".into()));
    }
    let reach = ell * ell + 1;
    if iu > reach {
        return Err(Error::PremiseUnmet(format!(
            "u sits {iu} vertices in, beyond the window bound {reach}"
        )));
    }
    if q.len() - 1 - iv > reach {
        return Err(Error::PremiseUnmet(format!(
            "v sits {} vertices from the right end, beyond the window bound {reach}",
            q.len() - 1 - iv
        )));
    }
    if rm.graph.n() > 2 * ell * ell {
        return Err(Error::PremiseUnmet(format!(
            "roadmap has {} vertices, above the 2*budget^2 = {} bound",
            rm.graph.n(),
            2 * ell * ell
        )));
    }
    let bd_su = blockd(inst, s, u)
        .ok_or_else(|| Error::PremiseUnmet("start cannot reach u".into()))?;
    let bd_vt = blockd(inst, v, t)
        .ok_or_else(|| Error::PremiseUnmet("v cannot reach the target".into()))?;
    let allow = ell as i64 - bd_su as i64 - bd_vt as i64 - 1;
    if (rm.occupied_count() as i64) > allow {
        return Err(Error::PremiseUnmet(format!(
            "roadmap wants {} blockers but the budget leaves room for {allow}",
            rm.occupied_count()
        )));
    }
    Ok(())
}

/// Gap bound between consecutive path-borne vertices: an edge that is not a
/// root-separating cut must realize within `budget` path steps; everything
/// else is unbounded.
const UNBOUNDED: usize = usize::MAX / 4;

fn host_search(
    inst: &Instance,
    q: &[Vertex],
    u: Vertex,
    v: Vertex,
    rm: &Roadmap,
    work: &mut Work,
) -> Result<Option<HostWitness>> {
    let g = &inst.graph;
    let ell = inst.budget;
    let iu = q.iter().position(|&x| x == u).expect("precondition");
    let iv = q.iter().position(|&x| x == v).expect("precondition");
    let p = rm.graph.n();
    if p >= 32 {
        return Err(Error::CapExceeded(format!(
            "roadmap with {p} vertices is beyond the host-search subset range"
        )));
    }
    let occ = inst.initial_occupancy();
    let blocker = blocker_weights(inst);
    let qset: BTreeSet<Vertex> = q.iter().copied().collect();
    let root_bits = (1u32 << rm.root_u) | (1u32 << rm.root_v);
    let occupied_bits: u32 =
        rm.occupied.iter().enumerate().filter(|&(_, &b)| b).map(|(i, _)| 1u32 << i).sum();
    let edge_cut = edge_cut_table(rm);

    for sel in 0u32..(1u32 << p) {
        if sel & root_bits != root_bits || sel & occupied_bits != 0 {
            continue;
        }
        let ustar: Vec<usize> = (0..p).filter(|&i| sel >> i & 1 == 1).collect();
        let off: Vec<usize> = (0..p).filter(|&i| sel >> i & 1 == 0).collect();
        // Off vertices in a breadth-first order from the path-borne set, so
        // each one is assigned after at least one roadmap neighbor.
        let off_order = bfs_off_order(rm, &ustar);
        let middle: Vec<usize> =
            ustar.iter().copied().filter(|&i| i != rm.root_u && i != rm.root_v).collect();
        for perm in permutations_of(middle.clone()) {
            work.spend(1)?;
            let mut lambda = vec![rm.root_u];
            lambda.extend(perm);
            lambda.push(rm.root_v);
            let lpos: BTreeMap<usize, usize> =
                lambda.iter().enumerate().map(|(i, &x)| (x, i)).collect();
            // Path-borne edges must join consecutive vertices; otherwise the
            // realizing stretches would overlap.
            let mut caps = vec![UNBOUNDED; lambda.len() - 1];
            let mut chord = false;
            for (a, b) in rm.graph.edges() {
                let (Some(&ia), Some(&ib)) = (lpos.get(&a), lpos.get(&b)) else { continue };
                if ia.abs_diff(ib) != 1 {
                    chord = true;
                    break;
                }
                if !edge_cut[&(a.min(b), a.max(b))] {
                    caps[ia.min(ib)] = ell;
                }
            }
            if chord {
                continue;
            }
            if let Some(hw) = place_and_assign(
                g, q, iu, iv, rm, &lambda, &caps, &off, &off_order, &qset, &occ, &blocker, work,
            )? {
                return Ok(Some(hw));
            }
        }
    }
    Ok(None)
}

/// For each roadmap edge: does deleting it disconnect the roots?
fn edge_cut_table(rm: &Roadmap) -> BTreeMap<(usize, usize), bool> {
    let mut out = BTreeMap::new();
    for (a, b) in rm.graph.edges() {
        let key = (a.min(b), a.max(b));
        let kept: Vec<(Vertex, Vertex)> =
            rm.graph.edges().filter(|&e| (e.0.min(e.1), e.0.max(e.1)) != key).collect();
        let sub = Graph::from_edges_lenient(rm.graph.n(), &kept);
        let reach = bfs_all(&sub, rm.root_u);
        out.insert(key, reach[rm.root_v].is_none());
    }
    out
}

fn bfs_off_order(rm: &Roadmap, ustar: &[usize]) -> Vec<usize> {
    let inside: BTreeSet<usize> = ustar.iter().copied().collect();
    let mut seen = inside.clone();
    let mut queue: VecDeque<usize> = ustar.iter().copied().collect();
    let mut order = Vec::new();
    while let Some(x) = queue.pop_front() {
        for &y in rm.graph.neighbors(x) {
            if !seen.contains(&y) {
                seen.insert(y);
                order.push(y);
                queue.push_back(y);
            }
        }
    }
    order
}

/// Enumerates positions for the path-borne vertices (anchored attachment
/// vertices first, in leftmost order), then assigns the off-path vertices by
/// backtracking. Returns the first complete host.
#[allow(clippy::too_many_arguments)]
fn place_and_assign(
    g: &Graph,
    q: &[Vertex],
    iu: usize,
    iv: usize,
    rm: &Roadmap,
    lambda: &[usize],
    caps: &[usize],
    off: &[usize],
    off_order: &[usize],
    qset: &BTreeSet<Vertex>,
    occ: &[Option<usize>],
    blocker: &[bool],
    work: &mut Work,
) -> Result<Option<HostWitness>> {
    let m = lambda.len();
    if iv - iu < m - 1 || cap_sum(caps, 0, m - 1) < iv - iu {
        return Ok(None);
    }
    // Attachment vertices: path-borne vertices with off-path neighbors. Off
    // assignment depends only on their images.
    let offset: BTreeSet<usize> = off.iter().copied().collect();
    let attached: Vec<usize> = (0..m)
        .filter(|&i| rm.graph.neighbors(lambda[i]).iter().any(|n| offset.contains(n)))
        .collect();
    // Positions of all anchors (roots plus attachment vertices), λ-ordered.
    let mut anchors: Vec<usize> = attached.clone();
    if !anchors.contains(&0) {
        anchors.insert(0, 0);
    }
    if !anchors.contains(&(m - 1)) {
        anchors.push(m - 1);
    }
    let mut positions: Vec<Option<usize>> = vec![None; m];
    positions[0] = Some(iu);
    positions[m - 1] = Some(iv);
    let mut memo: BTreeMap<Vec<Vertex>, Option<Vec<(usize, Vertex)>>> = BTreeMap::new();
    place_anchors(
        g, q, rm, lambda, caps, &anchors, 0, &mut positions, &attached, off_order, qset, occ,
        blocker, &mut memo, work,
    )
}

/// Sum of gap caps over `caps[a..b]`, saturating at `UNBOUNDED`.
fn cap_sum(caps: &[usize], a: usize, b: usize) -> usize {
    let mut total = 0usize;
    for &c in &caps[a..b] {
        total = total.saturating_add(c);
        if total >= UNBOUNDED {
            return UNBOUNDED;
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn place_anchors(
    g: &Graph,
    q: &[Vertex],
    rm: &Roadmap,
    lambda: &[usize],
    caps: &[usize],
    anchors: &[usize],
    ai: usize,
    positions: &mut Vec<Option<usize>>,
    attached: &[usize],
    off_order: &[usize],
    qset: &BTreeSet<Vertex>,
    occ: &[Option<usize>],
    blocker: &[bool],
    memo: &mut BTreeMap<Vec<Vertex>, Option<Vec<(usize, Vertex)>>>,
    work: &mut Work,
) -> Result<Option<HostWitness>> {
    let m = lambda.len();
    if ai == anchors.len() {
        work.spend(1)?;
        let key: Vec<Vertex> =
            attached.iter().map(|&i| q[positions[i].expect("anchor placed")]).collect();
        let assignment = match memo.get(&key) {
            Some(cached) => cached.clone(),
            None => {
                let mut phi: Vec<Option<Vertex>> = vec![None; rm.graph.n()];
                for &i in attached {
                    phi[lambda[i]] = Some(q[positions[i].unwrap()]);
                }
                let mut used: BTreeSet<Vertex> =
                    phi.iter().flatten().copied().collect();
                let found = assign_off(
                    g, rm, off_order, 0, &mut phi, &mut used, qset, occ, blocker, work,
                )?;
                let entry = found.then(|| {
                    off_order
                        .iter()
                        .map(|&o| (o, phi[o].expect("assigned")))
                        .collect::<Vec<_>>()
                });
                memo.insert(key.clone(), entry.clone());
                entry
            }
        };
        let Some(offmap) = assignment else { return Ok(None) };
        // Fill the remaining path-borne positions leftmost.
        let Some(full) = fill_positions(positions, caps) else { return Ok(None) };
        let mut phi = vec![0usize; rm.graph.n()];
        for (i, &pos) in full.iter().enumerate() {
            phi[lambda[i]] = q[pos];
        }
        for &(o, img) in &offmap {
            phi[o] = img;
        }
        let qindex: BTreeMap<Vertex, usize> =
            q.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut psi = BTreeMap::new();
        for (a, b) in rm.graph.edges() {
            let key = (a.min(b), a.max(b));
            let (pa, pb) = (phi[key.0], phi[key.1]);
            let path = match (qindex.get(&pa), qindex.get(&pb)) {
                (Some(&qa), Some(&qb)) => {
                    if qa <= qb {
                        q[qa..=qb].to_vec()
                    } else {
                        q[qb..=qa].iter().rev().copied().collect()
                    }
                }
                _ => vec![pa, pb],
            };
            psi.insert(key, path);
        }
        return Ok(Some(HostWitness { phi, psi }));
    }

    let idx = anchors[ai];
    if positions[idx].is_some() {
        // Roots are pre-pinned.
        return place_anchors(
            g, q, rm, lambda, caps, anchors, ai + 1, positions, attached, off_order, qset, occ,
            blocker, memo, work,
        );
    }
    let prev_anchor = anchors[ai - 1];
    let prev_pos = positions[prev_anchor].expect("anchors placed in order");
    // Remaining anchors after this one are at λ-indices > idx; the final one
    // (m-1) is pinned at iv.
    let lo = prev_pos + (idx - prev_anchor);
    let hi_by_caps = prev_pos.saturating_add(cap_sum(caps, prev_anchor, idx)).min(UNBOUNDED);
    let iv_pos = positions[m - 1].expect("right root pinned");
    let hi = (iv_pos - (m - 1 - idx)).min(hi_by_caps);
    for pos in lo..=hi.min(iv_pos) {
        work.spend(1)?;
        // The stretch back to the previous anchor and forward to the right
        // root must both stay cap-feasible.
        if pos - prev_pos > cap_sum(caps, prev_anchor, idx) {
            break;
        }
        if iv_pos - pos > cap_sum(caps, idx, m - 1) {
            continue;
        }
        positions[idx] = Some(pos);
        if let Some(hw) = place_anchors(
            g, q, rm, lambda, caps, anchors, ai + 1, positions, attached, off_order, qset, occ,
            blocker, memo, work,
        )? {
            return Ok(Some(hw));
        }
        positions[idx] = None;
    }
    Ok(None)
}

/// Leftmost completion of the path-borne positions subject to the gap caps.
fn fill_positions(positions: &[Option<usize>], caps: &[usize]) -> Option<Vec<usize>> {
    let m = positions.len();
    let mut out: Vec<usize> = Vec::with_capacity(m);
    out.push(positions[0].expect("left root pinned"));
    for i in 1..m {
        if let Some(p) = positions[i] {
            if p <= out[i - 1] || p - out[i - 1] > caps[i - 1] {
                return None;
            }
            out.push(p);
            continue;
        }
        // Smallest position that keeps the next pinned one reachable.
        let j = (i + 1..m).find(|&j| positions[j].is_some())?;
        let pj = positions[j].unwrap();
        let reach = cap_sum(caps, i, j);
        let lo = (out[i - 1] + 1).max(pj.saturating_sub(reach));
        if lo > out[i - 1].saturating_add(caps[i - 1]) || lo + (j - i) > pj {
            return None;
        }
        out.push(lo);
    }
    Some(out)
}

/// Backtracking assignment of off-path roadmap vertices: each gets an image
/// adjacent to all already-assigned roadmap neighbors, off the path, with
/// the right occupancy (blocker for occupied vertices, empty otherwise),
/// injectively. Candidates ascend, so the first solution is deterministic.
#[allow(clippy::too_many_arguments)]
fn assign_off(
    g: &Graph,
    rm: &Roadmap,
    order: &[usize],
    at: usize,
    phi: &mut Vec<Option<Vertex>>,
    used: &mut BTreeSet<Vertex>,
    qset: &BTreeSet<Vertex>,
    occ: &[Option<usize>],
    blocker: &[bool],
    work: &mut Work,
) -> Result<bool> {
    if at == order.len() {
        return Ok(true);
    }
    let o = order[at];
    let anchor = rm
        .graph
        .neighbors(o)
        .iter()
        .find_map(|&n| phi[n])
        .expect("breadth-first order guarantees an assigned neighbor");
    let candidates: Vec<Vertex> = g.neighbors(anchor).to_vec();
    for cand in candidates {
        work.spend(1)?;
        if qset.contains(&cand) || used.contains(&cand) {
            continue;
        }
        if rm.occupied[o] {
            if !blocker[cand] {
                continue;
            }
        } else if occ[cand].is_some() {
            continue;
        }
        let adjacent_ok = rm.graph.neighbors(o).iter().all(|&n| match phi[n] {
            Some(img) => g.neighbors(cand).binary_search(&img).is_ok(),
            None => true,
        });
        if !adjacent_ok {
            continue;
        }
        phi[o] = Some(cand);
        used.insert(cand);
        if assign_off(g, rm, order, at + 1, phi, used, qset, occ, blocker, work)? {
            return Ok(true);
        }
        phi[o] = None;
        used.remove(&cand);
    }
    Ok(false)
}

/// Independent verification of a host: shape, labels, injectivity, window
/// containment, stretch disjointness, and the separation property (with
/// `u`, `v` removed, no host vertex reaches either end of the path in the
/// union of the host image and the path).
pub fn verify_host(
    inst: &Instance,
    q: &[Vertex],
    u: Vertex,
    v: Vertex,
    rm: &Roadmap,
    hw: &HostWitness,
) -> Result<()> {
    host_preconditions(inst, q, u, v, rm)?;
    let g = &inst.graph;
    let n = g.n();
    let bad = |why: String| Err(Error::InvalidInput(why));
    if hw.phi.len() != rm.graph.n() {
        return bad(format!("phi covers {} vertices, roadmap has {}", hw.phi.len(), rm.graph.n()));
    }
    if hw.phi.iter().any(|&x| x >= n) {
        return bad("phi image out of range".into());
    }
    let distinct: BTreeSet<Vertex> = hw.phi.iter().copied().collect();
    if distinct.len() != hw.phi.len() {
        return bad("phi is not injective".into());
    }
    if hw.phi[rm.root_u] != u || hw.phi[rm.root_v] != v {
        return bad("roots are not pinned at u and v".into());
    }
    let occ = inst.initial_occupancy();
    let blocker = blocker_weights(inst);
    for (i, &img) in hw.phi.iter().enumerate() {
        if rm.occupied[i] {
            if !blocker[img] {
                return bad(format!("occupied roadmap vertex {i} maps to non-blocker {img}"));
            }
        } else if occ[img].is_some() {
            return bad(format!("free roadmap vertex {i} maps to occupied vertex {img}"));
        }
    }
    let qindex: BTreeMap<Vertex, usize> = q.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let iu = qindex[&u];
    let iv = qindex[&v];
    for &img in &hw.phi {
        if let Some(&qi) = qindex.get(&img) {
            if qi < iu || qi > iv {
                return bad(format!("host vertex {img} lies on the path outside the window"));
            }
        }
    }
    let rm_edges: BTreeSet<(usize, usize)> =
        rm.graph.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
    let psi_keys: BTreeSet<(usize, usize)> = hw.psi.keys().copied().collect();
    if rm_edges != psi_keys {
        return bad("psi keys do not match the roadmap edge set".into());
    }
    let mut interiors: BTreeSet<Vertex> = BTreeSet::new();
    for (&(a, b), path) in &hw.psi {
        if path.len() < 2 || !g.is_simple_path(path) {
            return bad(format!("psi for edge ({a}, {b}) is not a simple path"));
        }
        if path[0] != hw.phi[a] || *path.last().unwrap() != hw.phi[b] {
            return bad(format!("psi for edge ({a}, {b}) has wrong endpoints"));
        }
        if path.len() > 2 {
            let on_q = path.iter().map(|x| qindex.get(x).copied()).collect::<Vec<_>>();
            let steady = on_q.iter().all(|p| p.is_some())
                && on_q.windows(2).all(|w| w[0].unwrap().abs_diff(w[1].unwrap()) == 1);
            if !steady {
                return bad(format!(
                    "psi for edge ({a}, {b}) is neither a single edge nor a path stretch"
                ));
            }
            for p in &on_q {
                let qi = p.unwrap();
                if qi < iu || qi > iv {
                    return bad(format!("psi for edge ({a}, {b}) leaves the window"));
                }
            }
        }
        for &x in &path[1..path.len() - 1] {
            if !interiors.insert(x) {
                return bad(format!("stretch interiors overlap at {x}"));
            }
        }
    }
    if interiors.iter().any(|x| distinct.contains(x)) {
        return bad("a stretch interior collides with a host vertex".into());
    }
    // Separation: in the union of the host image and the path, removing u
    // and v strands every host vertex away from the path ends.
    let mut union_edges: Vec<(Vertex, Vertex)> =
        q.windows(2).map(|w| (w[0], w[1])).collect();
    for path in hw.psi.values() {
        union_edges.extend(path.windows(2).map(|w| (w[0], w[1])));
    }
    let union = Graph::from_edges_lenient(n, &union_edges);
    let forbidden: BTreeSet<Vertex> = [u, v].into();
    let ends = [q[0], *q.last().unwrap()];
    for &x in distinct.iter().chain(interiors.iter()) {
        if x == u || x == v {
            continue;
        }
        for end in ends {
            if end == u || end == v {
                continue;
            }
            if bfs_path_avoiding(&union, x, end, &forbidden).is_some() {
                return bad(format!("host vertex {x} escapes the window to path end {end}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Marking and contraction
// ---------------------------------------------------------------------------

/// One event of a kernelization trace. Vertex ids always refer to the
/// instance at the moment of the event (contractions renumber).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Mark(Vertex),
    Contract(Vertex, Vertex),
    Solve(String),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Mark(v) => write!(f, "mark {v}"),
            TraceEvent::Contract(a, b) => write!(f, "contract {a} {b}"),
            TraceEvent::Solve(result) => write!(f, "solve {result}"),
        }
    }
}

/// Enumeration counts of one marking round, for auditing the marking bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkStats {
    /// Root pairs `(u, v)` considered.
    pub pairs: usize,
    /// Canonical roadmaps enumerated.
    pub roadmaps: usize,
    /// Roadmap size cap in effect.
    pub size_cap: usize,
    /// Vertices marked.
    pub marked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarkOutcome {
    /// A path edge with two unmarked endpoints was contracted.
    Contracted { inst: Instance, merged: (Vertex, Vertex) },
    /// Every path edge touches a mark; the stretch cannot shrink further.
    NoUnmarkedEdge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkReport {
    pub outcome: MarkOutcome,
    /// Marked vertices, ascending.
    pub marks: Vec<Vertex>,
    pub stats: MarkStats,
}

/// Runs every roadmap against every admissible root pair on the witness
/// stretch, marks the path-borne image of each host found, then contracts
/// the first stretch edge with two unmarked endpoints.
pub fn mark_and_contract(
    inst: &Instance,
    witness: &CleanPathWitness,
    roadmap_cap: usize,
    work_cap: usize,
) -> Result<MarkReport> {
    witness.validate(inst)?;
    let (s, t) = require_single_dest(inst)?;
    let ell = inst.budget;
    if ell == 0 {
        return Err(Error::PremiseUnmet("marking needs a positive budget".into()));
    }
    let size_cap = roadmap_cap.min(2 * ell * ell);
    if size_cap < 2 {
        return Err(Error::InvalidInput(
            "roadmap cap must allow at least two vertices".into(),
        ));
    }
    let mut work = Work::new(work_cap);
    let roadmaps = enumerate_roadmaps_counted(size_cap, ell.saturating_sub(1), &mut work)?;
    let q = &witness.q;
    let reach = ell * ell + 1;
    let pairs: Vec<(usize, usize)> = (0..q.len().min(reach + 1))
        .flat_map(|iu| {
            let lo = q.len().saturating_sub(reach + 1).max(iu + 1);
            (lo..q.len()).map(move |iv| (iu, iv))
        })
        .collect();
    let bd_from_s: Vec<Option<usize>> = q.iter().map(|&x| blockd(inst, s, x)).collect();
    let bd_to_t: Vec<Option<usize>> = q.iter().map(|&x| blockd(inst, x, t)).collect();
    let mut marks: BTreeSet<Vertex> = BTreeSet::new();
    for rm in &roadmaps {
        for &(iu, iv) in &pairs {
            let (Some(a), Some(b)) = (bd_from_s[iu], bd_to_t[iv]) else { continue };
            let allow = ell as i64 - a as i64 - b as i64 - 1;
            if (rm.occupied_count() as i64) > allow {
                continue;
            }
            if let Some(hw) = host_search(inst, q, q[iu], q[iv], rm, &mut work)? {
                marks.extend(hw.marks_on(q));
            }
        }
    }
    let stats = MarkStats {
        pairs: pairs.len(),
        roadmaps: roadmaps.len(),
        size_cap,
        marked: marks.len(),
    };
    assert!(
        stats.marked <= stats.pairs * stats.roadmaps * stats.size_cap,
        "marking exceeded its enumeration bound"
    );
    let marks: Vec<Vertex> = marks.into_iter().collect();
    let markset: BTreeSet<Vertex> = marks.iter().copied().collect();
    for w in q.windows(2) {
        let (a, b) = (w[0], w[1]);
        if markset.contains(&a) || markset.contains(&b) {
            continue;
        }
        let (g2, remap) = inst.graph.contract_edge(a, b)?;
        let next = inst.migrate_total(g2, &remap)?;
        return Ok(MarkReport {
            outcome: MarkOutcome::Contracted { inst: next, merged: (a.min(b), a.max(b)) },
            marks,
            stats,
        });
    }
    Ok(MarkReport { outcome: MarkOutcome::NoUnmarkedEdge, marks, stats })
}

// ---------------------------------------------------------------------------
// The full pipeline
// ---------------------------------------------------------------------------

/// Tuning knobs for [`kernelize_and_solve`]. `None` fields fall back to the
/// worst-case-safe formulas, which are astronomically conservative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KernelOverrides {
    pub clean_threshold: Option<usize>,
    pub roadmap_cap: Option<usize>,
    pub work_cap: Option<usize>,
}

impl KernelOverrides {
    /// Bench-sized settings that let the pipeline run end to end on small
    /// corridor instances.
    pub fn desk_scale() -> KernelOverrides {
        KernelOverrides { clean_threshold: Some(12), roadmap_cap: Some(5), work_cap: None }
    }
}

/// Worst-case clean-path threshold, `32 * budget^6 * 2^(14 * budget^2) + 1`,
/// saturating at `usize::MAX`.
pub fn default_clean_threshold(budget: usize) -> usize {
    let exp = 14usize.saturating_mul(budget.saturating_mul(budget));
    if exp >= usize::BITS as usize {
        return usize::MAX;
    }
    32usize
        .saturating_mul(budget.saturating_pow(6))
        .saturating_mul(1usize << exp)
        .saturating_add(1)
}

#[derive(Clone, Debug)]
pub enum KernelDecision {
    /// Solvable within the budget; the schedule is valid on the kernel
    /// instance.
    Yes(Schedule),
    No,
    /// A cap fired before the pipeline could decide; the kernel reflects the
    /// progress made.
    Undecided(String),
}

#[derive(Clone, Debug)]
pub struct KernelRun {
    pub decision: KernelDecision,
    pub kernel: Instance,
    pub trace: Vec<TraceEvent>,
    pub contractions: usize,
}

/// The full kernelize-then-solve pipeline for declared-planar instances with
/// one destination robot: repeatedly shrink oversized free components via
/// clean paths and marking, then decide the kernel with a bounded-ball
/// search. Contractions preserve solvability within the budget in both
/// directions, so the final decision answers the original instance.
pub fn kernelize_and_solve(inst: &Instance, overrides: &KernelOverrides) -> Result<KernelRun> {
    require_single_dest(inst)?;
    if !inst.planar_declared {
        return Err(Error::PremiseUnmet(
            "pipeline requires an instance declared planar".into(),
        ));
    }
    if let Planarity::Rejected(why) = inst.graph.planarity_sanity() {
        return Err(Error::PremiseUnmet(format!("declared planar but {why}")));
    }
    let ell = inst.budget;
    let threshold = overrides.clean_threshold.unwrap_or_else(|| default_clean_threshold(ell));
    let roadmap_cap =
        overrides.roadmap_cap.unwrap_or_else(|| 2usize.saturating_mul(ell.saturating_mul(ell)));
    let work_cap = overrides.work_cap.unwrap_or(DEFAULT_WORK_CAP);
    let need = clean_premise_bound(ell, threshold);
    let mut cur = inst.clone();
    let mut trace: Vec<TraceEvent> = Vec::new();
    let mut contractions = 0usize;
    let partial = |why: String, cur: Instance, mut trace: Vec<TraceEvent>, contractions| {
        trace.push(TraceEvent::Solve("undecided".into()));
        Ok(KernelRun { decision: KernelDecision::Undecided(why), kernel: cur, trace, contractions })
    };
    loop {
        let fa = free_analysis(&cur)?;
        let mut progressed = false;
        for comp in &fa.components {
            if comp.len() < need {
                continue;
            }
            let outcome = match clean_path(&cur, comp, threshold) {
                Ok(o) => o,
                // An undecidable component stays intact; other components
                // may still shrink.
                Err(Error::PremiseUnmet(_)) => continue,
                Err(Error::CapExceeded(why)) => return partial(why, cur, trace, contractions),
                Err(e) => return Err(e),
            };
            match outcome {
                CleanOutcome::Solved(s) => {
                    trace.push(TraceEvent::Solve("yes".into()));
                    return Ok(KernelRun {
                        decision: KernelDecision::Yes(s),
                        kernel: cur,
                        trace,
                        contractions,
                    });
                }
                CleanOutcome::Contracted { inst: next, merged } => {
                    trace.push(TraceEvent::Contract(merged.0, merged.1));
                    contractions += 1;
                    cur = next;
                    progressed = true;
                    break;
                }
                CleanOutcome::Witness(w) => {
                    match mark_and_contract(&cur, &w, roadmap_cap, work_cap) {
                        Ok(report) => {
                            trace.extend(report.marks.iter().map(|&v| TraceEvent::Mark(v)));
                            match report.outcome {
                                MarkOutcome::Contracted { inst: next, merged } => {
                                    trace.push(TraceEvent::Contract(merged.0, merged.1));
                                    contractions += 1;
                                    cur = next;
                                    progressed = true;
                                    break;
                                }
                                MarkOutcome::NoUnmarkedEdge => continue,
                            }
                        }
                        Err(Error::PremiseUnmet(_)) => continue,
                        Err(Error::CapExceeded(why)) => {
                            return partial(why, cur, trace, contractions)
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        if !progressed {
            break;
        }
    }
    let fa = free_analysis(&cur)?;
    let (outcome, _stats) = solve_bounded_ball(&cur, cur.budget, fa.lambda)?;
    let decision = match outcome {
        SolveOutcome::Solved(s) => {
            trace.push(TraceEvent::Solve("yes".into()));
            KernelDecision::Yes(s)
        }
        SolveOutcome::NoWithinDepth | SolveOutcome::Infeasible => {
            trace.push(TraceEvent::Solve("no".into()));
            KernelDecision::No
        }
        SolveOutcome::CapExceeded => {
            trace.push(TraceEvent::Solve("undecided".into()));
            KernelDecision::Undecided("state cap hit while solving the kernel".into())
        }
    };
    Ok(KernelRun { decision, kernel: cur, trace, contractions })
}

// ---------------------------------------------------------------------------
// Canonical solutions
// ---------------------------------------------------------------------------

/// Vertex set of the window subgraph of a schedule: `u`, `v`, and every
/// component of the traversed subgraph minus `{u, v}` containing neither
/// terminal of the destination robot.
pub fn window_subgraph_vertices(
    inst: &Instance,
    sched: &Schedule,
    u: Vertex,
    v: Vertex,
) -> Result<BTreeSet<Vertex>> {
    let (s, t) = require_single_dest(inst)?;
    let gs = traversed_subgraph(inst, sched);
    let mut part = vec![false; inst.graph.n()];
    for mv in &sched.moves {
        for &x in &mv.path {
            part[x] = true;
        }
    }
    part[u] = false;
    part[v] = false;
    let mut out: BTreeSet<Vertex> = [u, v].into();
    for comp in gs.components_within(&part) {
        if comp.binary_search(&s).is_ok() || comp.binary_search(&t).is_ok() {
            continue;
        }
        out.extend(comp);
    }
    Ok(out)
}

/// Rewrites a valid schedule that crosses the window `[u, v]` of the free
/// path `q` into one whose window subgraph has at most `budget` vertices off
/// `q`: the excess bush is replaced by its first `budget` off-path vertices,
/// blockers are parked there, and the destination robot makes a single move
/// along the straightened route. Schedules already within the bound pass
/// through unchanged.
pub fn canonicalize_solution(
    inst: &Instance,
    sched: &Schedule,
    q: &[Vertex],
    u: Vertex,
    v: Vertex,
) -> Result<Schedule> {
    let (s, t) = require_single_dest(inst)?;
    let ell = inst.budget;
    if !validate(inst, sched)?.is_valid() {
        return Err(Error::PremiseUnmet("schedule must be valid".into()));
    }
    check_free_path(inst, q)?;
    let qset: BTreeSet<Vertex> = q.iter().copied().collect();
    let iu = q
        .iter()
        .position(|&x| x == u)
        .ok_or_else(|| Error::PremiseUnmet(format!("u = {u} is not on the path")))?;
    let iv = q
        .iter()
        .position(|&x| x == v)
        .ok_or_else(|| Error::PremiseUnmet(format!("v = {v} is not on the path")))?;
    if iu >= iv {
        return Err(Error::PremiseUnmet("u must precede v on the path".into()));
    }
    if !sched.moves.iter().any(|m| m.path.iter().any(|x| qset.contains(x))) {
        return Err(Error::PremiseUnmet("schedule does not touch the path".into()));
    }
    let gs = traversed_subgraph(inst, sched);
    let mut part = vec![false; inst.graph.n()];
    for mv in &sched.moves {
        for &x in &mv.path {
            part[x] = true;
        }
    }
    part[u] = false;
    part[v] = false;
    let interior: BTreeSet<Vertex> = q[iu + 1..iv].iter().copied().collect();
    let mut qsuv: BTreeSet<Vertex> = [u, v].into();
    for comp in gs.components_within(&part) {
        let holds_terminal = comp.binary_search(&s).is_ok() || comp.binary_search(&t).is_ok();
        if holds_terminal {
            if comp.iter().any(|x| interior.contains(x)) {
                return Err(Error::PremiseUnmet(
                    "u and v do not separate the window from the terminals".into(),
                ));
            }
            continue;
        }
        qsuv.extend(comp);
    }
    let off: Vec<Vertex> = qsuv.iter().copied().filter(|x| !qset.contains(x)).collect();
    if off.len() <= ell {
        return Ok(sched.clone());
    }
    // Replacement bush: the first `budget` off-path vertices in breadth-first
    // order from the path-borne part of the window subgraph.
    let offset: BTreeSet<Vertex> = off.iter().copied().collect();
    let mut yset: BTreeSet<Vertex> = BTreeSet::new();
    let mut seen: BTreeSet<Vertex> =
        qsuv.iter().copied().filter(|x| qset.contains(x)).collect();
    let mut queue: VecDeque<Vertex> = seen.iter().copied().collect();
    'bfs: while let Some(x) = queue.pop_front() {
        for &y in gs.neighbors(x) {
            if offset.contains(&y) && !seen.contains(&y) {
                seen.insert(y);
                yset.insert(y);
                if yset.len() == ell {
                    break 'bfs;
                }
                queue.push_back(y);
            }
        }
    }
    // Arena: the traversed subgraph without the surplus bush, plus the full
    // window stretch of q (always available, since q is free).
    let keep: BTreeSet<Vertex> = (0..inst.graph.n())
        .filter(|&x| {
            let surplus = offset.contains(&x) && !yset.contains(&x);
            (part[x] || x == u || x == v) && !surplus
        })
        .chain(q[iu..=iv].iter().copied())
        .collect();
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for &x in &keep {
        for &y in gs.neighbors(x) {
            if y > x && keep.contains(&y) {
                edges.push((x, y));
            }
        }
    }
    edges.extend(q[iu..iv].iter().zip(&q[iu + 1..=iv]).map(|(&a, &b)| (a, b)));
    let arena = Graph::from_edges_lenient(inst.graph.n(), &edges);
    let main_path = bfs_path_avoiding(&arena, s, t, &yset)
        .ok_or_else(|| Error::PremiseUnmet("no surviving route through the window".into()))?;
    park_and_slide(inst, &arena, &main_path, &BTreeSet::new(), Some(&yset))
        .ok_or_else(|| Error::PremiseUnmet("canonical rewrite failed to assemble".into()))
}
