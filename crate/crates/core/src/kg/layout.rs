use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::graph::WeightedGraph;
use crate::error::{Error, Result};

/// Node positions in graph node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutCoords {
    pub positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_stress: Option<f64>,
}

/// Nodes evenly spaced on the unit circle, the first at angle 0.
pub fn layout_circular(graph: &WeightedGraph) -> Result<LayoutCoords> {
    if graph.nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(LayoutCoords {
        positions: circle_points(graph.nodes.len()),
        stress: None,
        initial_stress: None,
    })
}

fn circle_points(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringParams {
    /// Layout length of one unit of graph distance.
    pub edge_length: f64,
    pub iterations: usize,
    /// Stop once the gradient norm falls below this.
    pub tolerance: f64,
    /// Gap between packed components, in layout units.
    pub padding: f64,
}

impl Default for SpringParams {
    fn default() -> Self {
        Self {
            edge_length: 1.0,
            iterations: 5000,
            tolerance: 1e-7,
            padding: 1.0,
        }
    }
}

#[derive(PartialEq)]
struct Visit(f64, usize);

impl Eq for Visit {}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// All-pairs shortest paths with edge length `1 / weight`; infinite between components.
pub fn shortest_path_lengths(graph: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = graph.nodes.len();
    let index = graph.node_index();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &graph.edges {
        let (a, b) = (index[e.source.as_str()], index[e.target.as_str()]);
        let len = 1.0 / e.weight.max(1) as f64;
        adj[a].push((b, len));
        adj[b].push((a, len));
    }
    (0..n)
        .map(|src| {
            let mut dist = vec![f64::INFINITY; n];
            dist[src] = 0.0;
            let mut heap = BinaryHeap::from([Visit(0.0, src)]);
            while let Some(Visit(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(v, len) in &adj[u] {
                    let nd = d + len;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Visit(nd, v));
                    }
                }
            }
            dist
        })
        .collect()
}

/// `sum_{i<j} (|x_i - x_j| - L d_ij)^2 / d_ij^2` over pairs with finite, positive `d_ij`.
pub fn stress(pos: &[[f64; 2]], dist: &[Vec<f64>], edge_length: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let d = dist[i][j];
            if !d.is_finite() || d <= 0.0 {
                continue;
            }
            let gap = norm(sub(pos[i], pos[j])) - edge_length * d;
            e += gap * gap / (d * d);
        }
    }
    e
}

pub fn stress_gradient(pos: &[[f64; 2]], dist: &[Vec<f64>], edge_length: f64) -> Vec<[f64; 2]> {
    let mut g = vec![[0.0; 2]; pos.len()];
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let d = dist[i][j];
            if !d.is_finite() || d <= 0.0 {
                continue;
            }
            let diff = sub(pos[i], pos[j]);
            let r = norm(diff);
            if r == 0.0 {
                continue;
            }
            let c = 2.0 * (r - edge_length * d) / (d * d * r);
            for a in 0..2 {
                g[i][a] += c * diff[a];
                g[j][a] -= c * diff[a];
            }
        }
    }
    g
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Gradient descent with Armijo backtracking. Never increases stress.
fn descend(pos: &mut [[f64; 2]], dist: &[Vec<f64>], params: &SpringParams) -> f64 {
    let mut energy = stress(pos, dist, params.edge_length);
    let mut step = 0.1;
    for _ in 0..params.iterations {
        let g = stress_gradient(pos, dist, params.edge_length);
        let gnorm2: f64 = g.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum();
        if gnorm2.sqrt() < params.tolerance {
            break;
        }
        step *= 2.0;
        let mut accepted = false;
        while step > 1e-16 {
            let trial: Vec<[f64; 2]> = pos
                .iter()
                .zip(&g)
                .map(|(p, d)| [p[0] - step * d[0], p[1] - step * d[1]])
                .collect();
            let e = stress(&trial, dist, params.edge_length);
            if e <= energy - 1e-4 * step * gnorm2 {
                pos.copy_from_slice(&trial);
                energy = e;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    energy
}

/// Stress-minimizing spring layout.
///
/// Target distances are weighted shortest paths with edge length
/// `1 / weight`, so heavier relations pull their concepts closer. Each
/// connected component starts from a circular layout and is optimized on
/// its own; components are then packed on a grid.
pub fn layout_kamada_kawai(graph: &WeightedGraph, params: &SpringParams) -> Result<LayoutCoords> {
    let n = graph.nodes.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let dist = shortest_path_lengths(graph);
    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if component[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| dist[i][j].is_finite()).collect();
        for &j in &members {
            component[j] = components.len();
        }
        components.push(members);
    }

    let mut local: Vec<Vec<[f64; 2]>> = Vec::with_capacity(components.len());
    let (mut initial, mut total) = (0.0, 0.0);
    for members in &components {
        let sub_dist: Vec<Vec<f64>> = members
            .iter()
            .map(|&a| members.iter().map(|&b| dist[a][b]).collect())
            .collect();
        let mut pos = if members.len() == 1 {
            vec![[0.0, 0.0]]
        } else {
            circle_points(members.len())
        };
        initial += stress(&pos, &sub_dist, params.edge_length);
        total += descend(&mut pos, &sub_dist, params);
        local.push(pos);
    }

    let positions = if components.len() == 1 {
        local.pop().expect("one component")
    } else {
        pack(&components, &local, n, params.padding)
    };
    Ok(LayoutCoords {
        positions,
        stress: Some(total),
        initial_stress: Some(initial),
    })
}

fn pack(components: &[Vec<usize>], local: &[Vec<[f64; 2]>], n: usize, padding: f64) -> Vec<[f64; 2]> {
    let bounds: Vec<([f64; 2], [f64; 2])> = local
        .iter()
        .map(|pts| {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in pts {
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            (lo, hi)
        })
        .collect();
    let cell = bounds
        .iter()
        .map(|(lo, hi)| (hi[0] - lo[0]).max(hi[1] - lo[1]))
        .fold(0.0, f64::max)
        + padding;
    let cols = (components.len() as f64).sqrt().ceil() as usize;
    let mut out = vec![[0.0; 2]; n];
    for (c, members) in components.iter().enumerate() {
        let (lo, hi) = bounds[c];
        let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let origin = [(c % cols) as f64 * cell, -((c / cols) as f64) * cell];
        for (k, &node) in members.iter().enumerate() {
            let p = local[c][k];
            out[node] = [p[0] - center[0] + origin[0], p[1] - center[1] + origin[1]];
        }
    }
    out
}
