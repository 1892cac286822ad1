//! Instance-shrinking rules that preserve the decision.
//!
//! * [`shorten_paths`]: long terminal-free corridors carry no information
//!   beyond their capacity, so they are cut down to `2k+1` edges.
//! * [`prune_component`]: among many components hanging off the same
//!   separator with identical attachment, the terminal-free ones are
//!   interchangeable parking space; beyond `3k` of them one is redundant.
//! * [`reduce_bounded_treedepth`]: exhaustively applies the pruning rule
//!   over every small separator until fixpoint.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graph::{Graph, Vertex};
use crate::instance::Instance;
use crate::{Error, Result};

/// One applied reduction, reportable as `reduced <rule> <detail>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionEvent {
    pub rule: String,
    pub detail: String,
}

impl std::fmt::Display for ReductionEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "reduced {} {}", self.rule, self.detail)
    }
}

/// Replaces every maximal terminal-free degree-2 chain longer than `2k+1`
/// edges by a fresh chain of exactly `2k+1` edges. Robots and terminals
/// never sit on removed vertices. Instances without robots are returned
/// unchanged (the rule is vacuous and its replacement length degenerates).
pub fn shorten_paths(inst: &Instance) -> (Instance, Vec<ReductionEvent>) {
    let k = inst.robot_count();
    if k == 0 {
        return (inst.clone(), Vec::new());
    }
    let target_len = 2 * k + 1;
    let mut forbidden = vec![false; inst.graph.n()];
    for v in inst.terminal_vertices() {
        forbidden[v] = true;
    }
    let chains = inst.graph.degree2_chains(&forbidden);
    let long: Vec<_> = chains.iter().filter(|c| c.edge_len() > target_len).collect();
    if long.is_empty() {
        return (inst.clone(), Vec::new());
    }
    let mut removed = vec![false; inst.graph.n()];
    for chain in &long {
        for &v in chain.internal_vertices() {
            removed[v] = true;
        }
    }
    // Compact the kept vertices, then append fresh chain interiors.
    let mut remap: Vec<Option<Vertex>> = vec![None; inst.graph.n()];
    let mut next = 0;
    for v in 0..inst.graph.n() {
        if !removed[v] {
            remap[v] = Some(next);
            next += 1;
        }
    }
    let mut edges: Vec<(Vertex, Vertex)> = inst
        .graph
        .edges()
        .filter(|&(u, v)| !removed[u] && !removed[v])
        .map(|(u, v)| (remap[u].unwrap(), remap[v].unwrap()))
        .collect();
    let mut events = Vec::new();
    for chain in &long {
        let fresh: Vec<Vertex> = (0..target_len - 1).map(|i| next + i).collect();
        next += target_len - 1;
        if chain.closed {
            // A floating cycle: replace the whole component by a fresh
            // (2k+1)-cycle.
            let extra = next;
            next += 1;
            let mut cyc = fresh.clone();
            cyc.push(extra);
            for i in 0..cyc.len() {
                edges.push((cyc[i], cyc[(i + 1) % cyc.len()]));
            }
            events.push(ReductionEvent {
                rule: "shorten".into(),
                detail: format!(
                    "cycle component of length {} -> {}",
                    chain.edge_len(),
                    target_len
                ),
            });
        } else {
            let e0 = remap[chain.vertices[0]].unwrap();
            let e1 = remap[*chain.vertices.last().unwrap()].unwrap();
            let mut run = vec![e0];
            run.extend(&fresh);
            run.push(e1);
            for w in run.windows(2) {
                edges.push((w[0], w[1]));
            }
            events.push(ReductionEvent {
                rule: "shorten".into(),
                detail: format!(
                    "chain {}-{} length {} -> {}",
                    chain.vertices[0],
                    chain.vertices.last().unwrap(),
                    chain.edge_len(),
                    target_len
                ),
            });
        }
    }
    let graph = Graph::from_edges(next, &edges).expect("chain surgery keeps the graph simple");
    let reduced = inst.migrate(graph, &remap).expect("robots and terminals are kept");
    (reduced, events)
}

/// Certificate for one pruning step: the separator, the shared attachment
/// neighborhood, the sizes witnessing applicability, and what was removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneCertificate {
    pub separator: BTreeSet<Vertex>,
    pub attachment: BTreeSet<Vertex>,
    pub group_size: usize,
    pub terminal_free: usize,
    pub removed: Vec<Vertex>,
    pub retained_terminal_free: Vec<Vec<Vertex>>,
}

/// Groups the components of `G - X` by their exact neighborhood inside `X`;
/// if some group has at least `3k+1` members of which at least `k+1` are
/// terminal-free, removes one terminal-free member (the `(k+1)`-th in
/// min-vertex order, mirroring the reservation of `k` components as swap
/// space) and returns the reduced instance. `None` when the rule does not
/// apply.
pub fn prune_component(
    inst: &Instance,
    x: &BTreeSet<Vertex>,
) -> Option<(Instance, PruneCertificate)> {
    let k = inst.robot_count();
    if k == 0 {
        return None;
    }
    let mut keep = vec![true; inst.graph.n()];
    for &v in x {
        if v >= inst.graph.n() {
            return None;
        }
        keep[v] = false;
    }
    let comps = inst.graph.components_within(&keep);
    let terminals = inst.terminal_vertices();
    let mut groups: BTreeMap<BTreeSet<Vertex>, Vec<&Vec<Vertex>>> = BTreeMap::new();
    for comp in &comps {
        let mut attachment = BTreeSet::new();
        for &v in comp {
            for &w in inst.graph.neighbors(v) {
                if x.contains(&w) {
                    attachment.insert(w);
                }
            }
        }
        groups.entry(attachment).or_default().push(comp);
    }
    for (attachment, members) in &groups {
        if members.len() < 3 * k + 1 {
            continue;
        }
        let free: Vec<&Vec<Vertex>> = members
            .iter()
            .copied()
            .filter(|c| c.iter().all(|v| !terminals.contains(v)))
            .collect();
        if free.len() < k + 1 {
            continue;
        }
        // Components are already sorted by minimum vertex id.
        let removed = free[k].clone();
        let retained: Vec<Vec<Vertex>> = free[..k].iter().map(|c| (*c).clone()).collect();
        let cert = PruneCertificate {
            separator: x.clone(),
            attachment: attachment.clone(),
            group_size: members.len(),
            terminal_free: free.len(),
            removed: removed.clone(),
            retained_terminal_free: retained,
        };
        let doomed: BTreeSet<Vertex> = removed.iter().copied().collect();
        let (graph, remap) = inst.graph.delete_vertices(&doomed);
        let reduced = inst
            .migrate(graph, &remap)
            .expect("removed component is terminal-free, so robots survive");
        return Some((reduced, cert));
    }
    None
}

impl PruneCertificate {
    pub fn event(&self) -> ReductionEvent {
        ReductionEvent {
            rule: "prune".into(),
            detail: format!(
                "separator {:?} attachment {:?} group {} removed component {:?}",
                self.separator, self.attachment, self.group_size, self.removed
            ),
        }
    }
}

/// Applies [`prune_component`] over every vertex subset of size at most `d`
/// until no subset applies. `work_cap` bounds the number of subsets tested
/// across the whole run.
pub fn reduce_bounded_treedepth(
    inst: &Instance,
    d: usize,
    work_cap: usize,
) -> Result<(Instance, Vec<ReductionEvent>)> {
    let mut current = inst.clone();
    let mut events = Vec::new();
    let mut work = 0usize;
    'outer: loop {
        let n = current.graph.n();
        for size in 0..=d.min(n) {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                if work >= work_cap {
                    return Err(Error::CapExceeded(format!(
                        "treedepth reduction tested {work} separators"
                    )));
                }
                work += 1;
                let x: BTreeSet<Vertex> = combo.iter().copied().collect();
                if let Some((reduced, cert)) = prune_component(&current, &x) {
                    events.push(cert.event());
                    current = reduced;
                    continue 'outer;
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        return Ok((current, events));
    }
}

/// Advances `combo` to the next size-|combo| combination of {0..n} in
/// lexicographic order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact treedepth by exhaustive root enumeration with memoization on the
/// component's vertex bitmask. Exponential; meant for test-size graphs.
pub fn exact_treedepth(g: &Graph) -> usize {
    assert!(g.n() <= 20, "exact treedepth is exponential; test sizes only");
    let mut memo: HashMap<u64, usize> = HashMap::new();
    let full: Vec<Vertex> = (0..g.n()).collect();
    td_of_set(g, &full, &mut memo)
}

fn td_of_set(g: &Graph, vertices: &[Vertex], memo: &mut HashMap<u64, usize>) -> usize {
    if vertices.is_empty() {
        return 0;
    }
    let mask: u64 = vertices.iter().fold(0, |m, &v| m | (1 << v));
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let inside: Vec<bool> = {
        let mut f = vec![false; g.n()];
        for &v in vertices {
            f[v] = true;
        }
        f
    };
    let comps = g.components_within(&inside);
    let result = if comps.len() > 1 {
        comps.iter().map(|c| td_of_set(g, c, memo)).max().unwrap()
    } else if vertices.len() == 1 {
        1
    } else {
        let mut best = usize::MAX;
        for &root in vertices {
            let rest: Vec<Vertex> = vertices.iter().copied().filter(|&v| v != root).collect();
            best = best.min(1 + td_of_set(g, &rest, memo));
        }
        best
    };
    memo.insert(mask, result);
    result
}
