//! Undirected multigraph with stable edge identities.
//!
//! Loops and parallel edges are first-class: a loop contributes 2 to the
//! degree of its vertex and occupies two adjacency slots there, so uniform
//! sampling over slots is exactly the simple-random-walk transition kernel.
//! Edge ids are dense integers `0..m` and survive contraction unchanged,
//! which is what lets walk processes color individual parallel edges.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// One adjacency entry. A vertex has exactly `degree` slots; a loop at `v`
/// contributes two slots at `v`. `arc` is `2*edge` when the slot sits at the
/// edge's first stored endpoint and `2*edge + 1` at the second (a loop gets
/// one of each), giving the directed-arc walk variant a stable arc id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub to: VertexId,
    pub edge: EdgeId,
    pub arc: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<Slot>>,
}

impl Graph {
    /// Build a graph from an explicit edge list. Duplicate pairs become
    /// parallel edges, `(v, v)` pairs become loops.
    pub fn build(n: usize, edge_list: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adj: Vec<Vec<Slot>> = vec![Vec::new(); n];
        for (index, &(u, v)) in edge_list.iter().enumerate() {
            for &x in &[u, v] {
                if x >= n {
                    return Err(Error::EndpointOutOfRange {
                        index,
                        vertex: x,
                        n,
                    });
                }
            }
            adj[u].push(Slot {
                to: v,
                edge: index,
                arc: 2 * index,
            });
            adj[v].push(Slot {
                to: u,
                edge: index,
                arc: 2 * index + 1,
            });
        }
        Ok(Graph {
            n,
            edges: edge_list.to_vec(),
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Degree of `v`; loops count twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        let (u, v) = self.edges[e];
        u == v
    }

    /// The endpoint of `e` opposite to `from` (loops return `from`).
    pub fn other_endpoint(&self, e: EdgeId, from: VertexId) -> VertexId {
        let (u, v) = self.edges[e];
        if u == from { v } else { u }
    }

    pub fn slots(&self, v: VertexId) -> &[Slot] {
        &self.adj[v]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// True iff every vertex is reachable from vertex 0 (vacuously true for
    /// the empty graph).
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for s in &self.adj[v] {
                if !seen[s.to] {
                    seen[s.to] = true;
                    count += 1;
                    stack.push(s.to);
                }
            }
        }
        count == self.n
    }

    pub fn all_even_degree(&self) -> bool {
        self.adj.iter().all(|a| a.len().is_multiple_of(2))
    }

    /// Sum of degrees over a vertex set.
    pub fn set_degree(&self, s: &VertexSet) -> usize {
        s.iter().map(|v| self.degree(v)).sum()
    }

    /// Contract `s` to a single vertex. The merged vertex gets id 0 in the
    /// new graph; the remaining vertices keep their relative order. Edge ids
    /// are preserved slot for slot, so edges inside `s` become loops at the
    /// merged vertex and edges leaving `s` become (possibly parallel) edges.
    pub fn contract(&self, s: &VertexSet) -> Result<(Graph, ContractionMap)> {
        if s.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        for v in s.iter() {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        let mut vertex_map = vec![0usize; self.n];
        let mut next = 1;
        for (v, image) in vertex_map.iter_mut().enumerate() {
            if !s.contains(v) {
                *image = next;
                next += 1;
            }
        }
        let new_edges: Vec<(VertexId, VertexId)> = self
            .edges
            .iter()
            .map(|&(u, v)| (vertex_map[u], vertex_map[v]))
            .collect();
        let contracted = Graph::build(next, &new_edges)?;
        Ok((
            contracted,
            ContractionMap {
                gamma: 0,
                vertex_map,
            },
        ))
    }

    /// Length of the shortest cycle: 1 for a loop, 2 for a parallel pair,
    /// otherwise a BFS from every vertex on the simple skeleton. `None` for
    /// forests.
    pub fn girth(&self) -> Option<usize> {
        if self.edges.iter().any(|&(u, v)| u == v) {
            return Some(1);
        }
        let mut sorted: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        sorted.sort_unstable();
        let has_parallel = sorted.windows(2).any(|w| w[0] == w[1]);
        if has_parallel {
            return Some(2);
        }

        // Simple skeleton from here on; parallel edges were already handled.
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut via_edge = vec![usize::MAX; self.n];
        for root in 0..self.n {
            dist.fill(usize::MAX);
            dist[root] = 0;
            via_edge[root] = usize::MAX;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                if let Some(b) = best {
                    // Cycles through deeper layers can only be longer.
                    if 2 * dist[u] + 1 >= b {
                        continue;
                    }
                }
                for slot in &self.adj[u] {
                    if slot.edge == via_edge[u] {
                        continue;
                    }
                    let w = slot.to;
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        via_edge[w] = slot.edge;
                        queue.push_back(w);
                    } else {
                        let cycle = dist[u] + dist[w] + 1;
                        if best.is_none_or(|b| cycle < b) {
                            best = Some(cycle);
                        }
                    }
                }
            }
        }
        best
    }

    /// Serialize to the plain edge-list format: a `n m` header line followed
    /// by one `u v` line per edge, in edge-id order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parse the edge-list format produced by [`Graph::to_edge_list`].
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (n, m) = loop {
            match lines.next() {
                Some((lineno, raw)) => {
                    let line = raw.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut it = line.split_whitespace();
                    let parse = |tok: Option<&str>, what: &str| -> Result<usize> {
                        tok.ok_or_else(|| Error::Parse {
                            line: lineno + 1,
                            message: format!("missing {what}"),
                        })?
                        .parse()
                        .map_err(|_| Error::Parse {
                            line: lineno + 1,
                            message: format!("invalid {what}"),
                        })
                    };
                    let n = parse(it.next(), "vertex count")?;
                    let m = parse(it.next(), "edge count")?;
                    if it.next().is_some() {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            message: "trailing tokens after header".into(),
                        });
                    }
                    break (n, m);
                }
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        message: "missing header".into(),
                    });
                }
            }
        };
        let mut edges = Vec::with_capacity(m);
        for (lineno, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut endpoint = |what: &str| -> Result<usize> {
                it.next()
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: format!("missing {what}"),
                    })?
                    .parse()
                    .map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("invalid {what}"),
                    })
            };
            let u = endpoint("first endpoint")?;
            let v = endpoint("second endpoint")?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "trailing tokens after edge".into(),
                });
            }
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("endpoint out of range (n = {n})"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: format!("header declared {m} edges, found {}", edges.len()),
            });
        }
        Graph::build(n, &edges)
    }

    /// Multiplicity count of edges between `u` and `v` (loop count if `u == v`).
    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
            .count()
    }

    /// Internal consistency check: degree sum equals `2m` and every edge id
    /// appears in exactly the slot lists of its endpoints (twice for loops).
    pub fn check_invariants(&self) -> Result<()> {
        let degree_sum: usize = self.adj.iter().map(Vec::len).sum();
        if degree_sum != 2 * self.m() {
            return Err(Error::InvariantViolation(format!(
                "degree sum {} != 2m = {}",
                degree_sum,
                2 * self.m()
            )));
        }
        let mut seen: HashMap<EdgeId, Vec<VertexId>> = HashMap::new();
        for (v, slots) in self.adj.iter().enumerate() {
            for s in slots {
                seen.entry(s.edge).or_default().push(v);
            }
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let mut at = seen.remove(&e).unwrap_or_default();
            at.sort_unstable();
            let mut want = vec![u, v];
            want.sort_unstable();
            if at != want {
                return Err(Error::InvariantViolation(format!(
                    "edge {e} endpoint slots {at:?} != {want:?}"
                )));
            }
        }
        if !seen.is_empty() {
            return Err(Error::InvariantViolation(
                "adjacency references unknown edge ids".into(),
            ));
        }
        Ok(())
    }
}

/// A set of vertices, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<VertexId>,
}

impl VertexSet {
    pub fn new(members: impl IntoIterator<Item = VertexId>) -> Self {
        let mut members: Vec<VertexId> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    pub fn singleton(v: VertexId) -> Self {
        VertexSet { members: vec![v] }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }
}

/// Relabeling produced by [`Graph::contract`]: `gamma` is the id of the
/// merged vertex and `vertex_map[old]` is the new id of each old vertex
/// (members of the contracted set all map to `gamma`).
#[derive(Clone, Debug)]
pub struct ContractionMap {
    pub gamma: VertexId,
    pub vertex_map: Vec<VertexId>,
}
