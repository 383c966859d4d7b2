//! Combinatorial structure checkers.
//!
//! * [`l_goodness`] — the minimum order of a connected even-degree subgraph
//!   containing every edge incident with a root vertex, by branch-and-bound
//!   over frontier edges with parity pruning. "Even-degree subgraph" is read
//!   as *connected through the root*: the walk-facing consequences only ever
//!   involve the blue component fanning out from an unvisited vertex, and an
//!   unreachable even component could never constrain it.
//! * [`count_rooted_subgraphs`] — exact count of connected edge-induced
//!   subgraphs on `s` vertices containing a root, with the `2^(s * max_deg)`
//!   ceiling enforced as an executable inequality.
//! * [`density_check`] — no small vertex set induces more than `s + a`
//!   edges, `a = ceil(2 s ln(r e) / ln n)`, exhaustively over connected sets
//!   (a maximum-excess set decomposes into connected components, one of
//!   which achieves at least proportional excess, so connected candidates
//!   suffice).
//! * [`p1_check`] — second adjacency eigenvalue of a regular graph against
//!   the near-Ramanujan threshold `2 sqrt(r - 1) + eps`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};

/// Outcome of the minimum even-subgraph search at one vertex.
#[derive(Clone, Debug, Serialize)]
pub struct GoodnessReport {
    pub vertex: VertexId,
    /// Minimum vertex count, or `None` when every candidate exceeds `cap`
    /// (which certifies the vertex is at least `(cap+1)`-good).
    pub ell: Option<usize>,
    pub cap: usize,
    /// Edge ids of a minimizing subgraph when one was found.
    pub witness: Option<Vec<EdgeId>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeMark {
    Untouched,
    Queued,
    Chosen,
    Excluded,
}

struct GoodnessSearch<'g> {
    g: &'g Graph,
    cap: usize,
    chosen: Vec<EdgeId>,
    mark: Vec<EdgeMark>,
    in_set: Vec<bool>,
    vertex_count: usize,
    /// Degree parity of each vertex in the chosen subgraph.
    odd: Vec<bool>,
    odd_count: usize,
    /// Undecided non-loop incident edges per vertex; an odd vertex with no
    /// undecided edge can never be repaired.
    avail: Vec<u32>,
    dead_odd: usize,
    queue: Vec<EdgeId>,
    best: Option<(usize, Vec<EdgeId>)>,
}

impl<'g> GoodnessSearch<'g> {
    fn flip_parity(&mut self, v: VertexId) {
        if self.odd[v] {
            self.odd[v] = false;
            self.odd_count -= 1;
            if self.avail[v] == 0 {
                self.dead_odd -= 1;
            }
        } else {
            self.odd[v] = true;
            self.odd_count += 1;
            if self.avail[v] == 0 {
                self.dead_odd += 1;
            }
        }
    }

    fn take_avail(&mut self, v: VertexId) {
        self.avail[v] -= 1;
        if self.avail[v] == 0 && self.odd[v] {
            self.dead_odd += 1;
        }
    }

    fn give_avail(&mut self, v: VertexId) {
        if self.avail[v] == 0 && self.odd[v] {
            self.dead_odd -= 1;
        }
        self.avail[v] += 1;
    }

    fn add_vertex(&mut self, v: VertexId, queued: &mut Vec<EdgeId>) {
        self.in_set[v] = true;
        self.vertex_count += 1;
        for slot in self.g.slots(v) {
            if self.mark[slot.edge] == EdgeMark::Untouched {
                self.mark[slot.edge] = EdgeMark::Queued;
                self.queue.push(slot.edge);
                queued.push(slot.edge);
            }
        }
    }

    fn record_if_goal(&mut self) {
        if self.odd_count == 0 && self.vertex_count <= self.cap {
            let better = self
                .best
                .as_ref()
                .is_none_or(|(b, _)| self.vertex_count < *b);
            if better {
                self.best = Some((self.vertex_count, self.chosen.clone()));
            }
        }
    }

    fn explore(&mut self, pos: usize) {
        // Bound: completions only add vertices.
        let limit = self
            .best
            .as_ref()
            .map_or(self.cap, |(b, _)| self.cap.min(b - 1));
        if self.vertex_count > limit || self.dead_odd > 0 {
            return;
        }
        if self.odd_count == 0 {
            // Minimal within this subtree: supersets cannot shrink.
            self.record_if_goal();
            return;
        }
        if pos == self.queue.len() {
            return;
        }
        let e = self.queue[pos];
        let (a, b) = self.g.endpoints(e);
        let is_loop = a == b;

        // Include branch. Optional loops never fix parity and never reduce
        // the order, so only the exclude branch applies to them.
        if !is_loop {
            let new_vertex = if !self.in_set[a] {
                Some(a)
            } else if !self.in_set[b] {
                Some(b)
            } else {
                None
            };
            let fits = self.vertex_count + usize::from(new_vertex.is_some()) <= limit;
            if fits {
                self.mark[e] = EdgeMark::Chosen;
                self.chosen.push(e);
                self.take_avail(a);
                self.take_avail(b);
                self.flip_parity(a);
                self.flip_parity(b);
                let mut queued = Vec::new();
                if let Some(w) = new_vertex {
                    self.add_vertex(w, &mut queued);
                }
                self.explore(pos + 1);
                for q in queued.into_iter().rev() {
                    self.mark[q] = EdgeMark::Untouched;
                    self.queue.pop();
                }
                if let Some(w) = new_vertex {
                    self.in_set[w] = false;
                    self.vertex_count -= 1;
                }
                self.flip_parity(b);
                self.flip_parity(a);
                self.give_avail(b);
                self.give_avail(a);
                self.chosen.pop();
                self.mark[e] = EdgeMark::Queued;
            }
        }

        // Exclude branch.
        self.mark[e] = EdgeMark::Excluded;
        if !is_loop {
            self.take_avail(a);
            self.take_avail(b);
        }
        self.explore(pos + 1);
        if !is_loop {
            self.give_avail(b);
            self.give_avail(a);
        }
        self.mark[e] = EdgeMark::Queued;
    }
}

/// Minimum vertex count of a connected even-degree subgraph containing all
/// edges incident with `v`, searched up to `cap` vertices.
pub fn l_goodness(g: &Graph, v: VertexId, cap: usize) -> Result<GoodnessReport> {
    if v >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: v,
            n: g.n(),
        });
    }
    let d = g.degree(v);
    if d == 0 {
        return Err(Error::IsolatedVertex(v));
    }
    if d % 2 == 1 {
        return Err(Error::OddDegree(v));
    }

    // Mandatory core: every edge at v.
    let mut star: Vec<EdgeId> = g.slots(v).iter().map(|s| s.edge).collect();
    star.sort_unstable();
    star.dedup();

    let mut search = GoodnessSearch {
        g,
        cap,
        chosen: star.clone(),
        mark: vec![EdgeMark::Untouched; g.m()],
        in_set: vec![false; g.n()],
        vertex_count: 0,
        odd: vec![false; g.n()],
        odd_count: 0,
        avail: vec![0; g.n()],
        dead_odd: 0,
        queue: Vec::new(),
        best: None,
    };
    for &e in &star {
        search.mark[e] = EdgeMark::Chosen;
    }
    for e in 0..g.m() {
        let (a, b) = g.endpoints(e);
        if a != b && search.mark[e] == EdgeMark::Untouched {
            search.avail[a] += 1;
            search.avail[b] += 1;
        }
    }
    let mut parity = vec![0usize; g.n()];
    parity[v] = d;
    for &e in &star {
        let w = g.other_endpoint(e, v);
        if w != v {
            parity[w] += 1;
        }
    }
    for (w, &p) in parity.iter().enumerate() {
        if p % 2 == 1 {
            search.odd[w] = true;
            search.odd_count += 1;
            if search.avail[w] == 0 {
                search.dead_odd += 1;
            }
        }
    }
    let mut queued = Vec::new();
    search.in_set[v] = true;
    search.vertex_count = 1;
    for slot in g.slots(v) {
        if slot.to != v && !search.in_set[slot.to] {
            search.add_vertex(slot.to, &mut queued);
        }
    }
    search.queue.sort_unstable();
    search.queue.dedup();

    search.record_if_goal();
    if search.best.is_none() {
        search.explore(0);
    }

    let (ell, witness) = match search.best {
        Some((k, edges)) => (Some(k), Some(edges)),
        None => (None, None),
    };
    Ok(GoodnessReport {
        vertex: v,
        ell,
        cap,
        witness,
    })
}

/// Graph-level goodness: the minimum of [`l_goodness`] over all vertices.
#[derive(Clone, Debug, Serialize)]
pub struct GraphGoodness {
    /// `None` when every vertex exceeds the cap.
    pub min_ell: Option<usize>,
    pub argmin: Option<VertexId>,
    pub cap: usize,
}

/// Minimum goodness over all vertices (all degrees must be even). With
/// `early_exit_below` set, vertices are scanned in order and the first value
/// strictly below the threshold is returned immediately.
pub fn graph_l_good(
    g: &Graph,
    cap: usize,
    early_exit_below: Option<usize>,
) -> Result<GraphGoodness> {
    if let Some(odd) = (0..g.n()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(Error::OddDegree(odd));
    }
    if let Some(threshold) = early_exit_below {
        let mut best: Option<(usize, VertexId)> = None;
        for v in 0..g.n() {
            let rep = l_goodness(g, v, cap)?;
            if let Some(ell) = rep.ell {
                if best.is_none_or(|(b, _)| ell < b) {
                    best = Some((ell, v));
                }
                if ell < threshold {
                    break;
                }
            }
        }
        return Ok(GraphGoodness {
            min_ell: best.map(|(e, _)| e),
            argmin: best.map(|(_, v)| v),
            cap,
        });
    }
    let reports: Vec<GoodnessReport> = (0..g.n())
        .into_par_iter()
        .map(|v| l_goodness(g, v, cap))
        .collect::<Result<_>>()?;
    let best = reports
        .iter()
        .filter_map(|r| r.ell.map(|e| (e, r.vertex)))
        .min();
    Ok(GraphGoodness {
        min_ell: best.map(|(e, _)| e),
        argmin: best.map(|(_, v)| v),
        cap,
    })
}

/// Count connected edge-induced subgraphs on exactly `s` vertices containing
/// `v`. The lone root (no edges) is the single subgraph of size 1. Errors if
/// the count would exceed `2^(s * max_degree)`, which would contradict the
/// enumeration's own fan-out bound.
pub fn count_rooted_subgraphs(g: &Graph, v: VertexId, s: usize) -> Result<u128> {
    if v >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: v,
            n: g.n(),
        });
    }
    if s == 0 {
        return Err(Error::InvalidInput("subgraph size must be >= 1".into()));
    }
    let exponent = (s as u32).saturating_mul(g.max_degree() as u32);
    let bound: u128 = if exponent >= 127 {
        u128::MAX
    } else {
        1u128 << exponent
    };

    struct Enumeration<'g> {
        g: &'g Graph,
        s: usize,
        mark: Vec<EdgeMark>,
        in_set: Vec<bool>,
        vertex_count: usize,
        queue: Vec<EdgeId>,
        count: u128,
        bound: u128,
    }

    impl Enumeration<'_> {
        fn explore(&mut self, pos: usize) -> Result<()> {
            if pos == self.queue.len() {
                if self.vertex_count == self.s {
                    self.count += 1;
                    if self.count > self.bound {
                        return Err(Error::InvariantViolation(format!(
                            "rooted subgraph count exceeded 2^(s*max_deg) = {}",
                            self.bound
                        )));
                    }
                }
                return Ok(());
            }
            let e = self.queue[pos];
            // Exclude.
            self.mark[e] = EdgeMark::Excluded;
            self.explore(pos + 1)?;
            self.mark[e] = EdgeMark::Queued;

            // Include, unless it would overshoot the target order.
            let (a, b) = self.g.endpoints(e);
            let new_vertex = if !self.in_set[a] {
                Some(a)
            } else if !self.in_set[b] {
                Some(b)
            } else {
                None
            };
            if self.vertex_count + usize::from(new_vertex.is_some()) <= self.s {
                self.mark[e] = EdgeMark::Chosen;
                let mut queued = Vec::new();
                if let Some(w) = new_vertex {
                    self.in_set[w] = true;
                    self.vertex_count += 1;
                    for slot in self.g.slots(w) {
                        if self.mark[slot.edge] == EdgeMark::Untouched {
                            self.mark[slot.edge] = EdgeMark::Queued;
                            self.queue.push(slot.edge);
                            queued.push(slot.edge);
                        }
                    }
                }
                self.explore(pos + 1)?;
                for q in queued.into_iter().rev() {
                    self.mark[q] = EdgeMark::Untouched;
                    self.queue.pop();
                }
                if let Some(w) = new_vertex {
                    self.in_set[w] = false;
                    self.vertex_count -= 1;
                }
                self.mark[e] = EdgeMark::Queued;
            }
            Ok(())
        }
    }

    let mut enumeration = Enumeration {
        g,
        s,
        mark: vec![EdgeMark::Untouched; g.m()],
        in_set: vec![false; g.n()],
        vertex_count: 1,
        queue: Vec::new(),
        count: 0,
        bound,
    };
    enumeration.in_set[v] = true;
    for slot in g.slots(v) {
        if enumeration.mark[slot.edge] == EdgeMark::Untouched {
            enumeration.mark[slot.edge] = EdgeMark::Queued;
            enumeration.queue.push(slot.edge);
        }
    }
    enumeration.queue.sort_unstable();
    enumeration.explore(0)?;
    Ok(enumeration.count)
}

#[derive(Clone, Copy, Debug)]
pub enum DensityMode {
    Exhaustive,
    /// Random BFS-ball samples; results are flagged probabilistic.
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub mode: String,
    /// Size, induced edge count, and excess `edges - s - a(s)` of the worst
    /// set found.
    pub worst_size: usize,
    pub worst_edges: usize,
    pub worst_excess: i64,
    pub sets_examined: u64,
    /// For regular inputs: sizes at or below this threshold must not induce
    /// more than `s` edges.
    pub small_s_threshold: Option<f64>,
    pub small_s_ok: Option<bool>,
}

fn excess_allowance(s: usize, r: usize, n: usize) -> i64 {
    let a = (2.0 * s as f64 * (r as f64 * std::f64::consts::E).ln() / (n as f64).ln()).ceil();
    a as i64
}

/// Check that no connected vertex set of size `<= s_max` induces more than
/// `s + a` edges, `a = ceil(2 s ln(r e) / ln n)` with `r` the maximum degree.
pub fn density_check(g: &Graph, s_max: usize, mode: DensityMode) -> Result<DensityReport> {
    if g.n() < 2 {
        return Err(Error::InvalidInput(
            "density check needs at least 2 vertices".into(),
        ));
    }
    if s_max == 0 || s_max > 30 {
        return Err(Error::InvalidInput(
            "s_max must be between 1 and 30".into(),
        ));
    }
    let r = g.max_degree().max(1);
    let n = g.n();
    let regular = g.min_degree() == g.max_degree();
    let threshold = if regular {
        Some((n as f64).ln() / (2.0 * (r as f64 * std::f64::consts::E).ln()))
    } else {
        None
    };

    let mut worst: Option<(i64, usize, usize)> = None; // (excess, size, edges)
    let mut small_s_ok = true;
    let mut examined = 0u64;
    let small_s_limit = threshold.unwrap_or(0.0);

    let mut evaluate = |size: usize, edges: usize| {
        examined += 1;
        let excess = edges as i64 - size as i64 - excess_allowance(size, r, n);
        if worst.is_none_or(|(w, _, _)| excess > w) {
            worst = Some((excess, size, edges));
        }
        if regular && (size as f64) <= small_s_limit && edges > size {
            small_s_ok = false;
        }
    };

    match mode {
        DensityMode::Exhaustive => {
            // Enumerate every connected set through its minimum vertex;
            // only larger vertices may join, so each set appears once.
            let budget = 20_000_000u64;
            let mut nodes = 0u64;
            for root in 0..n {
                let mut in_set = vec![false; n];
                let mut counted = vec![false; g.m()];
                in_set[root] = true;
                let root_loops = g
                    .slots(root)
                    .iter()
                    .filter(|s| s.to == root)
                    .count()
                    / 2;
                for slot in g.slots(root) {
                    if slot.to == root {
                        counted[slot.edge] = true;
                    }
                }
                let mut queue: Vec<VertexId> = g
                    .slots(root)
                    .iter()
                    .map(|s| s.to)
                    .filter(|&w| w > root)
                    .collect();
                queue.sort_unstable();
                queue.dedup();
                let mut queued = vec![false; n];
                for &w in &queue {
                    queued[w] = true;
                }
                enumerate_sets(
                    g,
                    root,
                    s_max,
                    &mut in_set,
                    &mut counted,
                    &mut queue,
                    &mut queued,
                    0,
                    1,
                    root_loops,
                    &mut nodes,
                    budget,
                    &mut evaluate,
                )?;
            }
        }
        DensityMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let root = rng.random_range(0..n);
                let target = rng.random_range(1..=s_max);
                let mut members = vec![root];
                let mut in_set = vec![false; n];
                in_set[root] = true;
                while members.len() < target {
                    let &anchor = &members[rng.random_range(0..members.len())];
                    let slots = g.slots(anchor);
                    let slot = slots[rng.random_range(0..slots.len())];
                    if !in_set[slot.to] {
                        in_set[slot.to] = true;
                        members.push(slot.to);
                    }
                }
                let mut edges = 0usize;
                let mut counted = vec![false; g.m()];
                for &w in &members {
                    for slot in g.slots(w) {
                        if in_set[slot.to] && !counted[slot.edge] {
                            counted[slot.edge] = true;
                            edges += 1;
                        }
                    }
                }
                evaluate(members.len(), edges);
            }
        }
    }

    let (excess, size, edges) = worst.unwrap_or((i64::MIN, 0, 0));
    Ok(DensityReport {
        mode: match mode {
            DensityMode::Exhaustive => "exhaustive".into(),
            DensityMode::Sample { .. } => "sampled".into(),
        },
        worst_size: size,
        worst_edges: edges,
        worst_excess: excess,
        sets_examined: examined,
        small_s_threshold: threshold,
        small_s_ok: if regular { Some(small_s_ok) } else { None },
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_sets(
    g: &Graph,
    root: VertexId,
    s_max: usize,
    in_set: &mut Vec<bool>,
    counted: &mut Vec<bool>,
    queue: &mut Vec<VertexId>,
    queued: &mut Vec<bool>,
    pos: usize,
    size: usize,
    edges: usize,
    nodes: &mut u64,
    budget: u64,
    evaluate: &mut impl FnMut(usize, usize),
) -> Result<()> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::InvalidInput(
            "exhaustive density enumeration budget exceeded; use sampling mode".into(),
        ));
    }
    if pos == queue.len() {
        evaluate(size, edges);
        return Ok(());
    }
    let w = queue[pos];
    // Exclude w.
    enumerate_sets(
        g, root, s_max, in_set, counted, queue, queued, pos + 1, size, edges, nodes, budget,
        evaluate,
    )?;
    // Include w.
    if size < s_max {
        in_set[w] = true;
        let mut new_edges = 0usize;
        let mut marked = Vec::new();
        for slot in g.slots(w) {
            if (in_set[slot.to] || slot.to == w) && !counted[slot.edge] {
                counted[slot.edge] = true;
                marked.push(slot.edge);
                new_edges += 1;
            }
        }
        let mut pushed = Vec::new();
        for slot in g.slots(w) {
            let x = slot.to;
            if x > root && !in_set[x] && !queued[x] {
                queued[x] = true;
                queue.push(x);
                pushed.push(x);
            }
        }
        enumerate_sets(
            g,
            root,
            s_max,
            in_set,
            counted,
            queue,
            queued,
            pos + 1,
            size + 1,
            edges + new_edges,
            nodes,
            budget,
            evaluate,
        )?;
        for x in pushed.into_iter().rev() {
            queued[x] = false;
            queue.pop();
        }
        for e in marked {
            counted[e] = false;
        }
        in_set[w] = false;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct P1Report {
    pub n: usize,
    pub r: usize,
    pub eps: f64,
    /// Second-largest adjacency eigenvalue (by value).
    pub lambda2_adjacency: f64,
    /// `2 sqrt(r - 1) + eps`.
    pub threshold: f64,
    pub pass: bool,
}

/// Second adjacency eigenvalue of an `r`-regular graph against the
/// near-Ramanujan threshold. For regular graphs the walk spectrum is the
/// adjacency spectrum scaled by `1/r`.
pub fn p1_check(g: &Graph, eps: f64) -> Result<P1Report> {
    let r = g.max_degree();
    if g.min_degree() != r {
        return Err(Error::NotRegular(g.min_degree(), r));
    }
    if r == 0 {
        return Err(Error::NoEdges);
    }
    let lambda2 = if g.n() <= DENSE_LIMIT {
        let n = g.n();
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for v in 0..n {
            for slot in g.slots(v) {
                a[(v, slot.to)] += 1.0;
            }
        }
        let mut vals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
        vals[1]
    } else {
        // lambda(A) = r * lambda(P) for regular graphs.
        let (l2, _) = crate::spectral::extreme_eigenvalues_iterative(g);
        r as f64 * l2
    };
    let threshold = 2.0 * ((r - 1) as f64).sqrt() + eps;
    Ok(P1Report {
        n: g.n(),
        r,
        eps,
        lambda2_adjacency: lambda2,
        threshold,
        pass: lambda2 <= threshold,
    })
}
