//! Problem instances and their text format.
//!
//! An instance is a simple graph, a list of destination robots (start,
//! target), a list of free robots (start only), and a move budget. Robot ids
//! are dense: destination robots come first (`0..m`), free robots after
//! (`m..k`). All starts are pairwise distinct and all targets are pairwise
//! distinct, but a start of one robot may coincide with the target of
//! another.
//!
//! Text format (`#` starts a comment, blank lines are ignored):
//!
//! ```text
//! CSMP 1
//! n <vertexCount>
//! e <u> <v>        # one per edge
//! m <start> <target># one per destination robot, in robot order
//! f <start>         # one per free robot, in robot order
//! L <budget>
//! planar <0|1>      # optional, defaults to 0
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::graph::{Graph, RootedGraph, Vertex};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DestRobot {
    pub start: Vertex,
    pub target: Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub dest_robots: Vec<DestRobot>,
    pub free_robots: Vec<Vertex>,
    pub budget: usize,
    pub planar_declared: bool,
}

impl Instance {
    pub fn new(
        graph: Graph,
        dest_robots: Vec<DestRobot>,
        free_robots: Vec<Vertex>,
        budget: usize,
        planar_declared: bool,
    ) -> Result<Instance> {
        let inst = Instance { graph, dest_robots, free_robots, budget, planar_declared };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<()> {
        let n = self.graph.n();
        let mut starts = BTreeSet::new();
        for (i, &s) in self.starts().iter().enumerate() {
            if s >= n {
                return Err(Error::InvalidInput(format!("robot {i} starts at invalid vertex {s}")));
            }
            if !starts.insert(s) {
                return Err(Error::InvalidInput(format!("duplicate start vertex {s}")));
            }
        }
        let mut targets = BTreeSet::new();
        for (i, r) in self.dest_robots.iter().enumerate() {
            if r.target >= n {
                return Err(Error::InvalidInput(format!(
                    "robot {i} targets invalid vertex {}",
                    r.target
                )));
            }
            if !targets.insert(r.target) {
                return Err(Error::InvalidInput(format!("duplicate target vertex {}", r.target)));
            }
        }
        if self.robot_count() > n {
            return Err(Error::InvalidInput(format!(
                "{} robots on {n} vertices",
                self.robot_count()
            )));
        }
        Ok(())
    }

    /// Total robot count `k`.
    pub fn robot_count(&self) -> usize {
        self.dest_robots.len() + self.free_robots.len()
    }

    /// Start vertices in robot-id order (destination robots first).
    pub fn starts(&self) -> Vec<Vertex> {
        self.dest_robots
            .iter()
            .map(|r| r.start)
            .chain(self.free_robots.iter().copied())
            .collect()
    }

    pub fn start_of(&self, robot: usize) -> Vertex {
        if robot < self.dest_robots.len() {
            self.dest_robots[robot].start
        } else {
            self.free_robots[robot - self.dest_robots.len()]
        }
    }

    pub fn is_dest_robot(&self, robot: usize) -> bool {
        robot < self.dest_robots.len()
    }

    /// All terminal vertices: every start and every target.
    pub fn terminal_vertices(&self) -> BTreeSet<Vertex> {
        let mut t: BTreeSet<Vertex> = self.starts().into_iter().collect();
        t.extend(self.dest_robots.iter().map(|r| r.target));
        t
    }

    /// Occupancy at time 0: `occupied[v] = Some(robot)`.
    pub fn initial_occupancy(&self) -> Vec<Option<usize>> {
        let mut occ = vec![None; self.graph.n()];
        for (i, s) in self.starts().into_iter().enumerate() {
            occ[s] = Some(i);
        }
        occ
    }

    /// Rebuilds the instance on a graph produced with an id remap from
    /// deleting vertices. Fails if any terminal was deleted.
    pub fn migrate(&self, graph: Graph, remap: &[Option<Vertex>]) -> Result<Instance> {
        let map = |v: Vertex, what: &str| -> Result<Vertex> {
            remap[v].ok_or_else(|| Error::InvalidInput(format!("{what} vertex {v} was removed")))
        };
        let dest = self
            .dest_robots
            .iter()
            .map(|r| {
                Ok(DestRobot { start: map(r.start, "start")?, target: map(r.target, "target")? })
            })
            .collect::<Result<Vec<_>>>()?;
        let free = self
            .free_robots
            .iter()
            .map(|&s| map(s, "start"))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(graph, dest, free, self.budget, self.planar_declared)
    }

    /// Same as [`Instance::migrate`] for total remaps (contractions).
    pub fn migrate_total(&self, graph: Graph, remap: &[Vertex]) -> Result<Instance> {
        let full: Vec<Option<Vertex>> = remap.iter().map(|&v| Some(v)).collect();
        self.migrate(graph, &full)
    }
}

/// Terminal labeling: destination starts get labels `1..=m`, targets
/// `m+1..=2m`, free starts `2m+1..=2m+f`. When one vertex is both a start and
/// a target, the single root carries the start label and the displaced target
/// label is recorded alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalSet {
    labels: BTreeMap<Vertex, u32>,
    shadowed_targets: BTreeMap<Vertex, u32>,
    slots: u32,
}

impl TerminalSet {
    pub fn of(inst: &Instance) -> TerminalSet {
        let m = inst.dest_robots.len() as u32;
        let mut labels = BTreeMap::new();
        for (i, r) in inst.dest_robots.iter().enumerate() {
            labels.insert(r.start, 1 + i as u32);
        }
        for (j, &s) in inst.free_robots.iter().enumerate() {
            labels.insert(s, 2 * m + 1 + j as u32);
        }
        let mut shadowed = BTreeMap::new();
        for (i, r) in inst.dest_robots.iter().enumerate() {
            let tl = m + 1 + i as u32;
            if let Some(&sl) = labels.get(&r.target) {
                // Start label wins; remember the target role.
                debug_assert_ne!(sl, 0);
                shadowed.insert(r.target, tl);
            } else {
                labels.insert(r.target, tl);
            }
        }
        let slots = 2 * m + inst.free_robots.len() as u32;
        TerminalSet { labels, shadowed_targets: shadowed, slots }
    }

    /// Primary label of a terminal (`None` for non-terminals, which all
    /// implicitly share the anonymous label `slots + 1`).
    pub fn label(&self, v: Vertex) -> Option<u32> {
        self.labels.get(&v).copied()
    }

    /// Target label displaced by a start label on the same vertex, if any.
    pub fn shadowed_target(&self, v: Vertex) -> Option<u32> {
        self.shadowed_targets.get(&v).copied()
    }

    pub fn labels(&self) -> &BTreeMap<Vertex, u32> {
        &self.labels
    }

    pub fn is_terminal(&self, v: Vertex) -> bool {
        self.labels.contains_key(&v)
    }

    /// Number of label slots (`2m + f`); non-terminals conceptually carry
    /// label `slots + 1`.
    pub fn slots(&self) -> u32 {
        self.slots
    }
}

/// The instance graph as a rooted graph whose roots are exactly the
/// terminals, labeled per [`TerminalSet`].
pub fn relabel_terminals(inst: &Instance) -> RootedGraph {
    let ts = TerminalSet::of(inst);
    RootedGraph::new(inst.graph.clone(), ts.labels().clone())
        .expect("terminal labels are valid roots")
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header_seen = false;
    let mut n: Option<usize> = None;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    let mut dest: Vec<DestRobot> = Vec::new();
    let mut free: Vec<Vertex> = Vec::new();
    let mut budget: Option<usize> = None;
    let mut planar: Option<bool> = None;

    let err = |line: usize, msg: String| Error::Parse { line, msg };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != "CSMP 1" {
                return Err(err(lineno, format!("expected header 'CSMP 1', found '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let mut args: Vec<&str> = parts.collect();
        let take_usizes = |args: &mut Vec<&str>, want: usize| -> Result<Vec<usize>> {
            if args.len() != want {
                return Err(err(lineno, format!("'{tag}' expects {want} argument(s)")));
            }
            args.iter()
                .map(|a| {
                    a.parse::<usize>()
                        .map_err(|_| err(lineno, format!("invalid number '{a}'")))
                })
                .collect()
        };
        match tag {
            "n" => {
                if n.is_some() {
                    return Err(err(lineno, "duplicate 'n' line".into()));
                }
                n = Some(take_usizes(&mut args, 1)?[0]);
            }
            "e" | "m" | "f" => {
                let count = n
                    .ok_or_else(|| err(lineno, format!("'{tag}' line before 'n'")))?;
                let check = |v: usize| -> Result<Vertex> {
                    if v >= count {
                        Err(err(lineno, format!("vertex {v} out of range (n = {count})")))
                    } else {
                        Ok(v)
                    }
                };
                match tag {
                    "e" => {
                        let vs = take_usizes(&mut args, 2)?;
                        edges.push((check(vs[0])?, check(vs[1])?));
                    }
                    "m" => {
                        let vs = take_usizes(&mut args, 2)?;
                        dest.push(DestRobot { start: check(vs[0])?, target: check(vs[1])? });
                    }
                    _ => {
                        let vs = take_usizes(&mut args, 1)?;
                        free.push(check(vs[0])?);
                    }
                }
            }
            "L" => {
                if budget.is_some() {
                    return Err(err(lineno, "duplicate 'L' line".into()));
                }
                budget = Some(take_usizes(&mut args, 1)?[0]);
            }
            "planar" => {
                if planar.is_some() {
                    return Err(err(lineno, "duplicate 'planar' line".into()));
                }
                match take_usizes(&mut args, 1)?[0] {
                    0 => planar = Some(false),
                    1 => planar = Some(true),
                    other => {
                        return Err(err(lineno, format!("'planar' expects 0 or 1, found {other}")))
                    }
                }
            }
            other => return Err(err(lineno, format!("unknown directive '{other}'"))),
        }
    }
    if !header_seen {
        return Err(err(1, "missing header 'CSMP 1'".into()));
    }
    let n = n.ok_or_else(|| err(1, "missing 'n' line".into()))?;
    let budget = budget.ok_or_else(|| err(1, "missing 'L' line".into()))?;
    let graph = Graph::from_edges(n, &edges)
        .map_err(|e| Error::InvalidInput(format!("bad edge list: {e}")))?;
    Instance::new(graph, dest, free, budget, planar.unwrap_or(false))
}

/// Canonical serialization: header, `n`, sorted `e` lines, `m`/`f` lines in
/// robot order, `L`, `planar`. Parsing the output reproduces the instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("CSMP 1\n");
    let _ = writeln!(out, "n {}", inst.graph.n());
    for (u, v) in inst.graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    for r in &inst.dest_robots {
        let _ = writeln!(out, "m {} {}", r.start, r.target);
    }
    for &s in &inst.free_robots {
        let _ = writeln!(out, "f {s}");
    }
    let _ = writeln!(out, "L {}", inst.budget);
    let _ = writeln!(out, "planar {}", inst.planar_declared as usize);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path_instance() -> Instance {
        // 4-vertex path, one destination robot 0 -> 3, one blocker at 2.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        Instance::new(g, vec![DestRobot { start: 0, target: 3 }], vec![2], 3, false).unwrap()
    }

    #[test]
    fn parses_minimal_instance() {
        let text = "\
# tiny example
CSMP 1
n 4
e 0 1
e 1 2
e 2 3
m 0 3
f 2
L 3
";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst, path_instance());
        assert_eq!(inst.robot_count(), 2);
        assert!(!inst.planar_declared);
    }

    #[test]
    fn duplicate_start_is_rejected_with_line() {
        let text = "CSMP 1\nn 3\ne 0 1\ne 1 2\nm 0 2\nf 0\nL 1\n";
        let e = parse_instance(text).unwrap_err();
        assert!(e.to_string().contains("duplicate start vertex 0"), "{e}");
    }

    #[test]
    fn missing_header_is_rejected() {
        let e = parse_instance("n 3\nL 1\n").unwrap_err();
        assert!(e.to_string().contains("CSMP 1"), "{e}");
    }

    #[test]
    fn out_of_range_vertex_names_line() {
        let text = "CSMP 1\nn 3\ne 0 5\nL 1\n";
        match parse_instance(text).unwrap_err() {
            Error::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("out of range"), "{msg}");
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn missing_budget_is_rejected() {
        let e = parse_instance("CSMP 1\nn 2\ne 0 1\n").unwrap_err();
        assert!(e.to_string().contains("missing 'L'"), "{e}");
    }

    #[test]
    fn serialization_round_trips() {
        let inst = path_instance();
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        // Canonical text is stable under a parse/serialize cycle.
        assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn canonical_corpus_is_byte_identical() {
        let canonical = "\
CSMP 1
n 4
e 0 1
e 1 2
e 2 3
m 0 3
f 2
L 3
planar 0
";
        assert_eq!(serialize_instance(&parse_instance(canonical).unwrap()), canonical);
    }

    #[test]
    fn labeling_scheme_is_deterministic() {
        // 2 dest + 1 free on a path of 6: starts 1,2; targets 3,4; free 5.
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let inst = Instance::new(
            g,
            vec![DestRobot { start: 0, target: 4 }, DestRobot { start: 1, target: 5 }],
            vec![2],
            4,
            false,
        )
        .unwrap();
        let ts = TerminalSet::of(&inst);
        assert_eq!(ts.label(0), Some(1));
        assert_eq!(ts.label(1), Some(2));
        assert_eq!(ts.label(4), Some(3));
        assert_eq!(ts.label(5), Some(4));
        assert_eq!(ts.label(2), Some(5));
        assert_eq!(ts.label(3), None);
        assert_eq!(ts.slots(), 5);
        let rooted = relabel_terminals(&inst);
        assert_eq!(rooted.roots.len(), 5);
        assert_eq!(rooted.label(2), Some(5));
    }

    #[test]
    fn start_and_target_share_one_composite_root() {
        // Robot 0: 0 -> 2; robot 1 (free) sits on 2's... instead: robot 1 is
        // a dest robot targeting robot 0's start.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let inst = Instance::new(
            g,
            vec![DestRobot { start: 0, target: 2 }, DestRobot { start: 2, target: 0 }],
            vec![],
            4,
            false,
        )
        .unwrap();
        let ts = TerminalSet::of(&inst);
        // Vertex 0: start label 1 wins; displaced target label 4 recorded.
        assert_eq!(ts.label(0), Some(1));
        assert_eq!(ts.shadowed_target(0), Some(4));
        // Vertex 2: start label 2 wins; displaced target label 3 recorded.
        assert_eq!(ts.label(2), Some(2));
        assert_eq!(ts.shadowed_target(2), Some(3));
        assert_eq!(relabel_terminals(&inst).roots.len(), 2);
    }

    #[test]
    fn instance_validation_catches_overlap_and_range() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(Instance::new(
            g.clone(),
            vec![DestRobot { start: 0, target: 2 }],
            vec![0],
            1,
            false
        )
        .is_err());
        assert!(Instance::new(g.clone(), vec![DestRobot { start: 0, target: 9 }], vec![], 1, false)
            .is_err());
        // Four robots on three vertices is impossible.
        assert!(Instance::new(
            g,
            vec![DestRobot { start: 0, target: 1 }],
            vec![1, 2, 9],
            1,
            false
        )
        .is_err());
    }
}
