//! Instance generators: rectangular grids with configurable occupancy, and
//! the hardness gadget translating Rectilinear Steiner Tree into
//! single-destination sliding motion, together with an independent
//! brute-force Steiner oracle used to cross-check the gadget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Vertex};
use crate::instance::{DestRobot, Instance};
use crate::{Error, Result};

/// An integer lattice point.
pub type Point = (i64, i64);

/// How a grid's vertices get occupied by free robots. No pattern ever
/// occupies the main robot's start (vertex 0).
#[derive(Clone, Debug, PartialEq)]
pub enum OccupancyPattern {
    /// Occupy each vertex independently with the given probability.
    Random { density: f64 },
    /// A solid wall of blockers down the middle column.
    Corridor,
    /// Exactly these vertices, row-major ids.
    Explicit(Vec<Vertex>),
}

fn grid_graph(rows: usize, cols: usize) -> Graph {
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
    Graph::from_edges(rows * cols, &edges).expect("grid edges are well-formed")
}

/// A `rows x cols` grid instance: the main robot walks from the top-left
/// corner (vertex 0) to the bottom-right corner, through blockers placed by
/// `pattern`. Placement is deterministic in `seed` (only the random pattern
/// consumes it).
pub fn grid_instance(
    rows: usize,
    cols: usize,
    pattern: &OccupancyPattern,
    seed: u64,
    budget: usize,
) -> Result<Instance> {
    let n = rows
        .checked_mul(cols)
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| Error::InvalidInput("grid dimensions out of range".into()))?;
    if n < 2 {
        return Err(Error::InvalidInput("grid needs at least two vertices".into()));
    }
    let start = 0;
    let target = n - 1;
    let blockers: Vec<Vertex> = match pattern {
        OccupancyPattern::Random { density } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Error::InvalidInput(format!(
                    "density {density} is not a probability"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).filter(|&v| v != start && rng.gen::<f64>() < *density).collect()
        }
        OccupancyPattern::Corridor => {
            let wall = cols / 2;
            (0..rows).map(|r| r * cols + wall).filter(|&v| v != start).collect()
        }
        OccupancyPattern::Explicit(list) => {
            let mut seen = vec![false; n];
            for &v in list {
                if v >= n {
                    return Err(Error::InvalidInput(format!(
                        "blocker vertex {v} is outside the grid"
                    )));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidInput(format!("duplicate blocker vertex {v}")));
                }
            }
            list.clone()
        }
    };
    if blockers.len() + 1 == n {
        return Err(Error::InvalidInput(
            "over-occupancy: the grid has no free vertex left".into(),
        ));
    }
    Instance::new(
        grid_graph(rows, cols),
        vec![DestRobot { start, target }],
        blockers,
        budget,
        true,
    )
}

/// The instance encoding a Rectilinear Steiner Tree question, together with
/// bookkeeping about how the input was massaged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RstGadget {
    pub instance: Instance,
    /// Terminal vertex ids, aligned with `points`.
    pub terminals: Vec<Vertex>,
    /// The points actually encoded: translated to nonnegative coordinates
    /// with a leftmost point first at x = 0.
    pub points: Vec<Point>,
    /// Whether the input needed translating or reordering.
    pub normalized: bool,
}

/// Brings a point set into gadget form: translate so the minimum x and y
/// coordinates are 0, and rotate a leftmost point (ties broken by smaller y)
/// to the front.
fn normalize_points(points: &[Point]) -> Result<(Vec<Point>, bool)> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point set must be nonempty".into()));
    }
    let min_x = points.iter().map(|p| p.0).min().unwrap();
    let min_y = points.iter().map(|p| p.1).min().unwrap();
    let mut out: Vec<Point> = points.iter().map(|&(x, y)| (x - min_x, y - min_y)).collect();
    let first = (0..out.len())
        .min_by_key(|&i| (out[i].0, out[i].1))
        .expect("nonempty");
    out.swap(0, first);
    for (i, a) in out.iter().enumerate() {
        if out[i + 1..].contains(a) {
            return Err(Error::InvalidInput(format!("duplicate point ({}, {})", a.0, a.1)));
        }
    }
    let normalized = out != points;
    Ok((out, normalized))
}

/// Builds the gadget for a Steiner length bound of `ell`: the bounding-box
/// grid of the points, an approach path of `n` new vertices ending at the
/// first point, the main robot at the path's far end targeting that point,
/// and every other vertex except the terminals occupied. Solvable within the
/// budget `ell + 1` exactly when the points admit a rectilinear Steiner tree
/// of length at most `ell`.
pub fn rst_gadget(points: &[Point], ell: usize) -> Result<RstGadget> {
    let (points, normalized) = normalize_points(points)?;
    let n = points.len();
    let w = points.iter().map(|p| p.0).max().unwrap() as usize;
    let h = points.iter().map(|p| p.1).max().unwrap() as usize;
    let box_vertices = (w + 1)
        .checked_mul(h + 1)
        .filter(|&b| b <= 4096)
        .ok_or_else(|| Error::InvalidInput("gadget bounding box too large".into()))?;
    let id = |x: usize, y: usize| y * (w + 1) + x;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for y in 0..=h {
        for x in 0..=w {
            if x < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    // Approach path s, q_1, .., q_{n-1} entering the box at the first point.
    let s = box_vertices;
    for i in 0..n - 1 {
        edges.push((s + i, s + i + 1));
    }
    let p1 = id(points[0].0 as usize, points[0].1 as usize);
    edges.push((s + n - 1, p1));
    let graph = Graph::from_edges(box_vertices + n, &edges)?;
    let terminals: Vec<Vertex> =
        points.iter().map(|&(x, y)| id(x as usize, y as usize)).collect();
    let mut occupied = vec![true; box_vertices + n];
    occupied[s] = false;
    for &t in &terminals {
        occupied[t] = false;
    }
    let blockers: Vec<Vertex> =
        (0..box_vertices + n).filter(|&v| occupied[v] && v != s).collect();
    let instance = Instance::new(
        graph,
        vec![DestRobot { start: s, target: p1 }],
        blockers,
        ell + 1,
        true,
    )?;
    Ok(RstGadget { instance, terminals, points, normalized })
}

/// Minimum total length of a rectilinear Steiner tree for up to 4 points in
/// a 4x4 box, by exhaustive search over connected edge subsets of the
/// bounding-box grid.
pub fn steiner_oracle(points: &[Point]) -> Result<usize> {
    let (points, _) = normalize_points(points)?;
    if points.len() > 4 {
        return Err(Error::InvalidInput(format!(
            "steiner oracle handles at most 4 points, got {}",
            points.len()
        )));
    }
    let w = points.iter().map(|p| p.0).max().unwrap() as usize;
    let h = points.iter().map(|p| p.1).max().unwrap() as usize;
    if w > 3 || h > 3 {
        return Err(Error::InvalidInput(
            "steiner oracle handles points spanning at most a 4x4 box".into(),
        ));
    }
    if points.len() == 1 {
        return Ok(0);
    }
    let id = |x: usize, y: usize| y * (w + 1) + x;
    let vertices = (w + 1) * (h + 1);
    let mut grid_edges: Vec<(usize, usize)> = Vec::new();
    for y in 0..=h {
        for x in 0..=w {
            if x < w {
                grid_edges.push((id(x, y), id(x + 1, y)));
            }
            if y < h {
                grid_edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let terminals: Vec<usize> =
        points.iter().map(|&(x, y)| id(x as usize, y as usize)).collect();
    let m = grid_edges.len();
    let mut best = usize::MAX;
    for mask in 0u32..(1u32 << m) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        // Union-find over the chosen edges.
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for (i, &(a, b)) in grid_edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let lead = root(&mut parent, terminals[0]);
        let covered = terminals.iter().all(|&t| root(&mut parent, t) == lead);
        let touched = terminals.iter().all(|&t| {
            grid_edges
                .iter()
                .enumerate()
                .any(|(i, &(a, b))| mask >> i & 1 == 1 && (a == t || b == t))
        });
        if covered && touched {
            best = size;
        }
    }
    Ok(best)
}
