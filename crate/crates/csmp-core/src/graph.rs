//! Simple undirected graphs with dense vertex ids `0..n`.
//!
//! Graphs are immutable after construction; every mutating operation
//! (contraction, deletion) returns a fresh graph together with an id remap so
//! callers can migrate vertex references. All operations are deterministic:
//! neighbor lists are kept sorted and iteration never depends on hash order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::{Error, Result};

pub type Vertex = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    edges: BTreeSet<(Vertex, Vertex)>,
}

/// A graph with a distinguished set of labeled root vertices. Labels are
/// positive integers; vertices outside `roots` implicitly share one common
/// "anonymous" label, so label-preserving maps must send unlabeled vertices
/// to unlabeled vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedGraph {
    pub graph: Graph,
    pub roots: BTreeMap<Vertex, u32>,
}

impl RootedGraph {
    pub fn new(graph: Graph, roots: BTreeMap<Vertex, u32>) -> Result<Self> {
        for (&v, &label) in &roots {
            if v >= graph.n() {
                return Err(Error::InvalidInput(format!("root {v} out of range")));
            }
            if label == 0 {
                return Err(Error::InvalidInput("root labels must be positive".into()));
            }
        }
        Ok(RootedGraph { graph, roots })
    }

    pub fn label(&self, v: Vertex) -> Option<u32> {
        self.roots.get(&v).copied()
    }
}

/// Maximal run of degree-2 vertices outside a forbidden set.
///
/// For an open chain, `vertices` starts and ends at the two delimiting
/// vertices (degree != 2 or forbidden); only `vertices[1..len-1]` qualify.
/// The two delimiters may coincide (a cycle attached to one hub). A `closed`
/// chain covers a full cycle of qualifying vertices; `vertices[0]` is the
/// minimum-id vertex on the cycle, the edge from the last vertex back to it
/// is implicit, and every listed vertex qualifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub vertices: Vec<Vertex>,
    pub closed: bool,
}

impl Chain {
    /// The qualifying (degree-2, non-forbidden) vertices of the chain.
    pub fn internal_vertices(&self) -> &[Vertex] {
        if self.closed {
            &self.vertices
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }

    /// Number of edges on the chain.
    pub fn edge_len(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }
}

/// Outcome of [`Graph::planarity_sanity`]: `Rejected` carries a reason the
/// graph cannot be planar; `Plausible` means no certificate of non-planarity
/// was found (a full embedding test is out of scope).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Planarity {
    Plausible,
    Rejected(String),
}

impl Graph {
    /// Builds a graph from an edge list. Rejects self-loops, out-of-range
    /// endpoints and duplicate edges.
    pub fn from_edges(n: usize, edge_list: &[(Vertex, Vertex)]) -> Result<Graph> {
        let mut edges = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edge_list {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !edges.insert(e) {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, adj, edges })
    }

    /// Like [`Graph::from_edges`] but silently dedupes edges and drops
    /// self-loops; used by operations that rebuild graphs after surgery.
    pub(crate) fn from_edges_lenient(n: usize, edge_list: &[(Vertex, Vertex)]) -> Graph {
        let mut edges = BTreeSet::new();
        for &(u, v) in edge_list {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range");
            if u != v {
                edges.insert((u.min(v), u.max(v)));
            }
        }
        let list: Vec<(Vertex, Vertex)> = edges.iter().copied().collect();
        Graph::from_edges(n, &list).expect("deduped edge list is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Edges as normalized `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }

    /// `vs` is a path in the graph: pairwise-distinct vertices, consecutive
    /// ones adjacent. Single vertices are paths; the empty sequence is not.
    pub fn is_simple_path(&self, vs: &[Vertex]) -> bool {
        if vs.is_empty() || vs.iter().any(|&v| v >= self.n) {
            return false;
        }
        let distinct: BTreeSet<Vertex> = vs.iter().copied().collect();
        if distinct.len() != vs.len() {
            return false;
        }
        vs.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Contracts edge `(u, v)`: merges the endpoints into `min(u, v)`, drops
    /// the loop, dedupes parallel edges and recompacts ids. Returns the new
    /// graph and the total old-id -> new-id remap.
    pub fn contract_edge(&self, u: Vertex, v: Vertex) -> Result<(Graph, Vec<Vertex>)> {
        if !self.has_edge(u, v) {
            return Err(Error::InvalidInput(format!("no edge ({u}, {v}) to contract")));
        }
        let keep = u.min(v);
        let drop = u.max(v);
        let remap: Vec<Vertex> = (0..self.n)
            .map(|w| {
                if w == drop {
                    keep
                } else if w > drop {
                    w - 1
                } else {
                    w
                }
            })
            .collect();
        let mapped: Vec<(Vertex, Vertex)> =
            self.edges.iter().map(|&(a, b)| (remap[a], remap[b])).collect();
        Ok((Graph::from_edges_lenient(self.n - 1, &mapped), remap))
    }

    /// Deletes a set of vertices and recompacts ids. Returns the new graph
    /// and the old-id -> new-id remap (`None` for deleted vertices).
    pub fn delete_vertices(&self, doomed: &BTreeSet<Vertex>) -> (Graph, Vec<Option<Vertex>>) {
        let mut remap = vec![None; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !doomed.contains(&v) {
                remap[v] = Some(next);
                next += 1;
            }
        }
        let mapped: Vec<(Vertex, Vertex)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| match (remap[a], remap[b]) {
                (Some(x), Some(y)) => Some((x, y)),
                _ => None,
            })
            .collect();
        (Graph::from_edges_lenient(next, &mapped), remap)
    }

    /// Induced subgraph on `keep` (ids recompacted in ascending order of the
    /// kept vertices). Returns the subgraph and the old -> new remap.
    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> (Graph, Vec<Option<Vertex>>) {
        let doomed: BTreeSet<Vertex> = (0..self.n).filter(|v| !keep.contains(v)).collect();
        self.delete_vertices(&doomed)
    }

    /// Connected components of the subgraph induced by `keep`, each sorted
    /// ascending, ordered by their minimum vertex.
    pub fn components_within(&self, keep: &[bool]) -> Vec<Vec<Vertex>> {
        assert_eq!(keep.len(), self.n);
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if !keep[start] || seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(x) = queue.pop_front() {
                comp.push(x);
                for &y in &self.adj[x] {
                    if keep[y] && !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<Vertex>> {
        self.components_within(&vec![true; self.n])
    }

    pub fn connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Unweighted BFS distances from `start` (`None` for unreachable).
    pub fn bfs_distances(&self, start: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            for &y in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Maximal chains of degree-2 vertices outside `forbidden`.
    ///
    /// Every qualifying vertex (degree exactly 2, not forbidden) appears as an
    /// internal vertex of exactly one chain. A cycle consisting entirely of
    /// qualifying vertices is reported as a single closed chain opened at its
    /// minimum-id vertex.
    pub fn degree2_chains(&self, forbidden: &[bool]) -> Vec<Chain> {
        assert_eq!(forbidden.len(), self.n);
        let qualifies = |v: Vertex| self.adj[v].len() == 2 && !forbidden[v];
        let mut assigned = vec![false; self.n];
        let mut chains = Vec::new();
        for v in 0..self.n {
            if !qualifies(v) || assigned[v] {
                continue;
            }
            // Walk from v in one direction until a non-qualifying vertex or
            // back to v (pure cycle).
            let walk = |mut prev: Vertex, mut cur: Vertex| -> (Vec<Vertex>, bool) {
                let mut seq = Vec::new();
                loop {
                    seq.push(cur);
                    if cur == v || !qualifies(cur) {
                        return (seq, cur == v);
                    }
                    let next = if self.adj[cur][0] == prev { self.adj[cur][1] } else { self.adj[cur][0] };
                    prev = cur;
                    cur = next;
                }
            };
            let (right, cycled) = walk(v, self.adj[v][1]);
            if cycled {
                // right = [a, b, ..., v]: the full cycle after v.
                let mut cycle = vec![v];
                cycle.extend_from_slice(&right[..right.len() - 1]);
                let min_pos = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
                cycle.rotate_left(min_pos);
                for &x in &cycle {
                    assigned[x] = true;
                }
                chains.push(Chain { vertices: cycle, closed: true });
            } else {
                let (left, _) = walk(v, self.adj[v][0]);
                let mut vertices: Vec<Vertex> = left.into_iter().rev().collect();
                vertices.push(v);
                vertices.extend(right);
                for &x in &vertices {
                    if qualifies(x) {
                        assigned[x] = true;
                    }
                }
                chains.push(Chain { vertices, closed: false });
            }
        }
        chains
    }

    /// Minimum total 0/1 vertex weight of a `v`-`w` path, counting both
    /// endpoints (so the distance from `v` to itself is `weights[v]`).
    pub fn weighted_distance(&self, weights: &[bool], v: Vertex, w: Vertex) -> Option<usize> {
        self.weighted_shortest_path(weights, v, w).map(|(d, _)| d)
    }

    /// Same as [`Graph::weighted_distance`] but also returns a witnessing
    /// path. 0-1 BFS with ascending neighbor order; deterministic.
    pub fn weighted_shortest_path(
        &self,
        weights: &[bool],
        v: Vertex,
        w: Vertex,
    ) -> Option<(usize, Vec<Vertex>)> {
        assert_eq!(weights.len(), self.n);
        let mut dist: Vec<Option<usize>> = vec![None; self.n];
        let mut parent: Vec<Option<Vertex>> = vec![None; self.n];
        let mut deque = VecDeque::new();
        dist[v] = Some(weights[v] as usize);
        deque.push_back(v);
        while let Some(x) = deque.pop_front() {
            let d = dist[x].unwrap();
            for &y in &self.adj[x] {
                let nd = d + weights[y] as usize;
                if dist[y].map_or(true, |old| nd < old) {
                    dist[y] = Some(nd);
                    parent[y] = Some(x);
                    if weights[y] {
                        deque.push_back(y);
                    } else {
                        deque.push_front(y);
                    }
                }
            }
        }
        let d = dist[w]?;
        let mut path = vec![w];
        let mut cur = w;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        debug_assert_eq!(path[0], v);
        Some((d, path))
    }

    /// Cheap non-planarity screen: Euler edge bound for every graph, plus an
    /// exhaustive K5/K3,3 topological-minor search when `n <= 10`. `Plausible`
    /// means only that no certificate of non-planarity was found.
    pub fn planarity_sanity(&self) -> Planarity {
        if self.n >= 3 && self.edges.len() > 3 * self.n - 6 {
            return Planarity::Rejected(format!(
                "edge bound violated: {} edges on {} vertices",
                self.edges.len(),
                self.n
            ));
        }
        if self.n <= 10 {
            if self.has_topological_k5() {
                return Planarity::Rejected("contains a K5 topological minor".into());
            }
            if self.has_topological_k33() {
                return Planarity::Rejected("contains a K3,3 topological minor".into());
            }
        }
        Planarity::Plausible
    }

    fn has_topological_k5(&self) -> bool {
        let cand: Vec<Vertex> = (0..self.n).filter(|&v| self.degree(v) >= 4).collect();
        if cand.len() < 5 {
            return false;
        }
        // K5 is vertex-transitive, so unordered branch-vertex choices suffice.
        let mut choice = Vec::new();
        self.k5_choose(&cand, 0, &mut choice)
    }

    fn k5_choose(&self, cand: &[Vertex], from: usize, choice: &mut Vec<Vertex>) -> bool {
        if choice.len() == 5 {
            let edges: Vec<(usize, usize)> =
                (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
            return self.pack_paths(choice, &edges);
        }
        for i in from..cand.len() {
            choice.push(cand[i]);
            if self.k5_choose(cand, i + 1, choice) {
                choice.pop();
                return true;
            }
            choice.pop();
        }
        false
    }

    fn has_topological_k33(&self) -> bool {
        let cand: Vec<Vertex> = (0..self.n).filter(|&v| self.degree(v) >= 3).collect();
        if cand.len() < 6 {
            return false;
        }
        // Choose 6 branch vertices, then split them into two unordered triples.
        let k = cand.len();
        fn combos(k: usize, from: usize, six: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if six.len() == 6 {
                out.push(six.clone());
                return;
            }
            for i in from..k {
                six.push(i);
                combos(k, i + 1, six, out);
                six.pop();
            }
        }
        let mut six = Vec::new();
        let mut all = Vec::new();
        combos(k, 0, &mut six, &mut all);
        for sel in all {
            let vs: Vec<Vertex> = sel.iter().map(|&i| cand[i]).collect();
            // Fix vs[0] on the left side; choose 2 of the remaining 5 to join it.
            for a in 1..5 {
                for b in a + 1..6 {
                    let left = [vs[0], vs[a], vs[b]];
                    let right: Vec<Vertex> =
                        (1..6).filter(|&i| i != a && i != b).map(|i| vs[i]).collect();
                    let branch: Vec<Vertex> =
                        left.iter().chain(right.iter()).copied().collect();
                    let edges: Vec<(usize, usize)> =
                        (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect();
                    if self.pack_paths(&branch, &edges) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Tries to realize the listed `edges` between `branch` vertices as
    /// internally-disjoint paths avoiding all branch vertices internally.
    fn pack_paths(&self, branch: &[Vertex], edges: &[(usize, usize)]) -> bool {
        let mut used = vec![false; self.n];
        for &b in branch {
            used[b] = true;
        }
        self.pack_rec(branch, edges, 0, &mut used)
    }

    fn pack_rec(
        &self,
        branch: &[Vertex],
        edges: &[(usize, usize)],
        idx: usize,
        used: &mut Vec<bool>,
    ) -> bool {
        if idx == edges.len() {
            return true;
        }
        let (s, t) = (branch[edges[idx].0], branch[edges[idx].1]);
        // DFS over simple paths from s to t whose internal vertices are unused.
        let mut stack: Vec<Vertex> = Vec::new();
        self.path_dfs(s, t, &mut stack, used, branch, edges, idx)
    }

    fn path_dfs(
        &self,
        cur: Vertex,
        t: Vertex,
        stack: &mut Vec<Vertex>,
        used: &mut Vec<bool>,
        branch: &[Vertex],
        edges: &[(usize, usize)],
        idx: usize,
    ) -> bool {
        if cur == t {
            return self.pack_rec(branch, edges, idx + 1, used);
        }
        for &y in &self.adj[cur] {
            if y == t {
                stack.push(y);
                if self.pack_rec(branch, edges, idx + 1, used) {
                    stack.pop();
                    return true;
                }
                stack.pop();
            } else if !used[y] {
                used[y] = true;
                stack.push(y);
                if self.path_dfs(y, t, stack, used, branch, edges, idx) {
                    used[y] = false;
                    stack.pop();
                    return true;
                }
                used[y] = false;
                stack.pop();
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> Graph {
        let edges: Vec<(Vertex, Vertex)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn cycle_graph(n: usize) -> Graph {
        let edges: Vec<(Vertex, Vertex)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn complete_graph(n: usize) -> Graph {
        let edges: Vec<(Vertex, Vertex)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    /// rows x cols grid, row-major ids.
    pub(crate) fn grid_graph(rows: usize, cols: usize) -> Graph {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Graph::from_edges(rows * cols, &edges).unwrap()
    }

    #[test]
    fn contract_triangle_gives_single_edge() {
        let g = complete_graph(3);
        let (h, remap) = g.contract_edge(0, 1).unwrap();
        assert_eq!(h.n(), 2);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(remap, vec![0, 0, 1]);
    }

    #[test]
    fn contract_middle_edge_of_p4_gives_p3() {
        let g = path_graph(4);
        let (h, remap) = g.contract_edge(1, 2).unwrap();
        assert_eq!(h.n(), 3);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert_eq!(remap, vec![0, 1, 1, 2]);
    }

    #[test]
    fn contract_k4_edge_gives_triangle() {
        // Expected result computed by merging neighborhoods by hand: K4 minus
        // one vertex with dedup is K3, for any contracted edge.
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            let g = complete_graph(4);
            let (h, _) = g.contract_edge(u, v).unwrap();
            assert_eq!(h.n(), 3);
            assert_eq!(h.edge_count(), 3);
            assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        }
    }

    #[test]
    fn contract_missing_edge_fails() {
        let g = path_graph(3);
        assert!(g.contract_edge(0, 2).is_err());
    }

    #[test]
    fn chains_on_c6_form_one_closed_chain() {
        let g = cycle_graph(6);
        let chains = g.degree2_chains(&vec![false; 6]);
        assert_eq!(chains.len(), 1);
        assert!(chains[0].closed);
        assert_eq!(chains[0].vertices[0], 0);
        assert_eq!(chains[0].vertices.len(), 6);
        assert_eq!(chains[0].edge_len(), 6);
    }

    #[test]
    fn chains_split_at_forbidden_vertex() {
        // Path 0-1-2-3-4 with vertex 2 forbidden: chains 0-1-2 and 2-3-4.
        let g = path_graph(5);
        let mut forbidden = vec![false; 5];
        forbidden[2] = true;
        let chains = g.degree2_chains(&forbidden);
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[0].vertices, vec![0, 1, 2]);
        assert_eq!(chains[1].vertices, vec![2, 3, 4]);
        assert!(!chains[0].closed && !chains[1].closed);
    }

    #[test]
    fn chains_on_star_are_empty() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(g.degree2_chains(&vec![false; 4]).is_empty());
    }

    #[test]
    fn chains_partition_qualifying_vertices() {
        // Random-ish small graphs: every qualifying vertex is internal to
        // exactly one chain.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..9);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let forbidden: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();
            let chains = g.degree2_chains(&forbidden);
            let mut count = vec![0usize; n];
            for ch in &chains {
                for &v in ch.internal_vertices() {
                    count[v] += 1;
                }
            }
            for v in 0..n {
                let qualifies = g.degree(v) == 2 && !forbidden[v];
                assert_eq!(count[v], qualifies as usize, "vertex {v} in {edges:?}");
            }
        }
    }

    #[test]
    fn weighted_distance_to_self_is_own_weight() {
        let g = path_graph(3);
        let weights = vec![false, true, false];
        assert_eq!(g.weighted_distance(&weights, 0, 0), Some(0));
        assert_eq!(g.weighted_distance(&weights, 1, 1), Some(1));
    }

    #[test]
    fn weighted_distance_counts_interior_blockers() {
        let g = path_graph(3);
        let weights = vec![false, true, false];
        assert_eq!(g.weighted_distance(&weights, 0, 2), Some(1));
    }

    /// Brute-force oracle: minimum weight over all simple paths, found by DFS.
    fn weighted_distance_oracle(g: &Graph, weights: &[bool], v: Vertex, w: Vertex) -> Option<usize> {
        fn dfs(
            g: &Graph,
            weights: &[bool],
            cur: Vertex,
            w: Vertex,
            seen: &mut Vec<bool>,
            cost: usize,
            best: &mut Option<usize>,
        ) {
            if cur == w {
                *best = Some(best.map_or(cost, |b: usize| b.min(cost)));
                return;
            }
            for &y in g.neighbors(cur) {
                if !seen[y] {
                    seen[y] = true;
                    dfs(g, weights, y, w, seen, cost + weights[y] as usize, best);
                    seen[y] = false;
                }
            }
        }
        let mut best = None;
        let mut seen = vec![false; g.n()];
        seen[v] = true;
        dfs(g, weights, v, w, &mut seen, weights[v] as usize, &mut best);
        best
    }

    #[test]
    fn grid_weighted_distance_matches_brute_force() {
        // 3x3 grid, middle row weighted: corner to corner costs exactly 1.
        let g = grid_graph(3, 3);
        let weights: Vec<bool> = (0..9).map(|v| (3..6).contains(&v)).collect();
        assert_eq!(weighted_distance_oracle(&g, &weights, 0, 8), Some(1));
        assert_eq!(g.weighted_distance(&weights, 0, 8), Some(1));
    }

    #[test]
    fn weighted_distance_matches_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let n = rng.gen_range(2..8);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let weights: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            for v in 0..n {
                for w in 0..n {
                    assert_eq!(
                        g.weighted_distance(&weights, v, w),
                        weighted_distance_oracle(&g, &weights, v, w),
                        "v={v} w={w} edges={edges:?} weights={weights:?}"
                    );
                    // Symmetry comes with endpoint counting.
                    assert_eq!(
                        g.weighted_distance(&weights, v, w),
                        g.weighted_distance(&weights, w, v)
                    );
                }
            }
        }
    }

    #[test]
    fn weighted_path_witness_is_consistent() {
        let g = grid_graph(3, 3);
        let weights: Vec<bool> = (0..9).map(|v| (3..6).contains(&v)).collect();
        let (d, path) = g.weighted_shortest_path(&weights, 0, 8).unwrap();
        assert!(g.is_simple_path(&path));
        assert_eq!(path.first(), Some(&0));
        assert_eq!(path.last(), Some(&8));
        assert_eq!(path.iter().filter(|&&v| weights[v]).count(), d);
    }

    #[test]
    fn components_of_disconnected_graph() {
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert!(!g.connected());
    }

    #[test]
    fn components_within_keep_subset() {
        // Path 0-1-2-3-4 with 2 dropped: two components.
        let g = path_graph(5);
        let keep = vec![true, true, false, true, true];
        assert_eq!(g.components_within(&keep), vec![vec![0, 1], vec![3, 4]]);
    }

    #[test]
    fn planarity_rejects_k5_and_k33() {
        match complete_graph(5).planarity_sanity() {
            Planarity::Rejected(_) => {}
            Planarity::Plausible => panic!("K5 must be rejected"),
        }
        let k33 = Graph::from_edges(
            6,
            &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)],
        )
        .unwrap();
        match k33.planarity_sanity() {
            Planarity::Rejected(r) => assert!(r.contains("K3,3"), "{r}"),
            Planarity::Plausible => panic!("K3,3 must be rejected"),
        }
    }

    #[test]
    fn planarity_rejects_subdivided_k5() {
        // Subdivide one K5 edge; the topological-minor search must still fire.
        let mut edges: Vec<(Vertex, Vertex)> =
            (0..5).flat_map(|i| (i + 1..5usize).map(move |j| (i, j))).collect();
        edges.retain(|&e| e != (0, 1));
        edges.push((0, 5));
        edges.push((5, 1));
        let g = Graph::from_edges(6, &edges).unwrap();
        assert!(matches!(g.planarity_sanity(), Planarity::Rejected(_)));
    }

    #[test]
    fn planarity_accepts_planar_graphs() {
        assert_eq!(grid_graph(3, 3).planarity_sanity(), Planarity::Plausible);
        assert_eq!(grid_graph(4, 4).planarity_sanity(), Planarity::Plausible);
        assert_eq!(complete_graph(4).planarity_sanity(), Planarity::Plausible);
        assert_eq!(path_graph(8).planarity_sanity(), Planarity::Plausible);
        // Wheel on 7 vertices: planar, every vertex degree >= 3.
        let mut edges: Vec<(Vertex, Vertex)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend((0..6).map(|i| (i, 6)));
        let wheel = Graph::from_edges(7, &edges).unwrap();
        assert_eq!(wheel.planarity_sanity(), Planarity::Plausible);
    }

    #[test]
    fn contraction_preserves_adjacency_structure() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(3..9);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((i, j));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let &(u, v) = &edges[rng.gen_range(0..edges.len())];
            let (h, remap) = g.contract_edge(u, v).unwrap();
            assert_eq!(h.n(), n - 1);
            // Every old edge maps to an edge or a loop; every new edge has a
            // preimage.
            let mut image = BTreeSet::new();
            for (a, b) in g.edges() {
                let (x, y) = (remap[a], remap[b]);
                if x != y {
                    assert!(h.has_edge(x, y), "lost edge ({a},{b})");
                    image.insert((x.min(y), x.max(y)));
                }
            }
            assert_eq!(image, h.edges().collect::<BTreeSet<_>>());
        }
    }
}
