//! The walk engine.
//!
//! Three processes share one stepper and one instrumentation layer:
//!
//! * the *E-process*: traverse an unvisited ("blue") incident edge when one
//!   exists, chosen by a [`Rule`]; otherwise take a simple-random-walk step
//!   over the incident edge slots (parallel edges weighted by multiplicity,
//!   a loop by 2);
//! * the *directed-arc E-process*: every edge carries two independently
//!   colorable arcs, which turns the graph into a balanced digraph and lifts
//!   the even-degree requirement;
//! * the plain *simple random walk* baseline.
//!
//! A traversed blue edge is recolored red on arrival, i.e. at the start of
//! the next step. Maximal runs of same-colored transitions form *phases*;
//! on even-degree graphs every naturally ended blue phase must close at the
//! vertex it started from, and during red phases every blue degree is even.
//! Those facts are tracked incrementally (an odd-blue-degree counter for the
//! undirected walk, an arc-balance counter for the directed one) so strict
//! checking costs O(1) per step.

pub mod rules;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use rules::{FixedOrder, FnRule, RoundRobin, Rule, RuleKind, ScriptRule, UniformRandom};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    EdgeProcess,
    EdgeProcessDirected,
    SimpleWalk,
}

impl ProcessKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "e" => ProcessKind::EdgeProcess,
            "e-directed" => ProcessKind::EdgeProcessDirected,
            "srw" => ProcessKind::SimpleWalk,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown process `{other}` (expected e, e-directed, srw)"
                )));
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::EdgeProcess => "e",
            ProcessKind::EdgeProcessDirected => "e-directed",
            ProcessKind::SimpleWalk => "srw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop once every vertex has been visited.
    VertexCover,
    /// Stop once every edge (every arc, in the directed variant) has been
    /// traversed.
    EdgeCover,
}

impl StopRule {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "vertex" => StopRule::VertexCover,
            "edge" => StopRule::EdgeCover,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown stop rule `{other}` (expected vertex, edge)"
                )));
            }
        })
    }
}

/// How much per-step invariant checking the engine performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// No checks; full-speed production sweeps.
    Off,
    /// Universal checks always; parity and phase-closure checks whenever the
    /// graph supports them (even degrees for the undirected E-process).
    #[default]
    Auto,
    /// Full checks, rejecting the undirected E-process on odd-degree graphs.
    Strict,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub start: VertexId,
    pub seed: u64,
    /// Defaults to `50 n ln n` for the simple walk and `50 (n + n ln n)` for
    /// E-processes; generous enough that hitting it indicates a bug, not a
    /// tail event.
    pub max_steps: Option<u64>,
    pub stop: StopRule,
    pub checks: CheckMode,
    pub log_phases: bool,
}

impl RunConfig {
    pub fn new(start: VertexId, seed: u64) -> Self {
        RunConfig {
            start,
            seed,
            max_steps: None,
            stop: StopRule::VertexCover,
            checks: CheckMode::Auto,
            log_phases: true,
        }
    }

    pub fn stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn max_steps(mut self, max: u64) -> Self {
        self.max_steps = Some(max);
        self
    }

    pub fn checks(mut self, mode: CheckMode) -> Self {
        self.checks = mode;
        self
    }

    pub fn log_phases(mut self, log: bool) -> Self {
        self.log_phases = log;
        self
    }

    fn effective_max_steps(&self, g: &Graph, process: ProcessKind) -> u64 {
        self.max_steps.unwrap_or_else(|| {
            let n = g.n() as f64;
            let scale = match process {
                ProcessKind::SimpleWalk => 50.0 * n * n.ln(),
                _ => 50.0 * (n + n * n.ln()),
            };
            (scale.ceil() as u64).max(32)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Blue,
    Red,
}

/// One maximal run of same-colored transitions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseRecord {
    pub kind: PhaseKind,
    /// Step index of the phase's first transition.
    pub start_step: u64,
    /// Vertex the first transition departs from.
    pub start_vertex: VertexId,
    pub len: u64,
    pub end_vertex: VertexId,
    /// For blue phases: the phase ended because no blue edge remained at the
    /// end vertex (as opposed to being truncated by the stop condition).
    pub closed: bool,
}

/// Full per-trial walk state. Owns no graph reference; every stepper takes
/// the graph again so states stay `Send` and cheap to move.
#[derive(Clone, Debug)]
pub struct WalkState {
    directed: bool,
    srw: bool,
    pub position: VertexId,
    pub start: VertexId,
    /// Per edge (per arc when directed): true while unvisited.
    blue: Vec<bool>,
    blue_remaining: usize,
    /// Per vertex: blue incident slots (undirected) or blue out-arcs.
    blue_degree: Vec<u32>,
    /// Undirected: vertices with odd blue degree.
    odd_blue: usize,
    /// Directed: remaining out-arcs minus remaining in-arcs, and how many
    /// vertices have a nonzero value.
    balance: Vec<i32>,
    nonzero_balance: usize,
    pub t: u64,
    pub red_steps: u64,
    pub blue_steps: u64,
    visited: Vec<bool>,
    pub first_visit: Vec<Option<u64>>,
    unvisited_vertices: usize,
    pub vertex_cover_time: Option<u64>,
    pub edge_cover_time: Option<u64>,
    pub phase: Option<PhaseKind>,
    phase_start_step: u64,
    phase_start_vertex: VertexId,
    phases: Vec<PhaseRecord>,
    log_phases: bool,
    parity_checks: bool,
    offers: Vec<usize>,
}

/// Read-only projection of the walk state passed to rules.
pub struct WalkView<'a> {
    pub graph: &'a Graph,
    pub directed: bool,
    pub position: VertexId,
    pub start: VertexId,
    pub t: u64,
    pub red_steps: u64,
    pub blue_steps: u64,
    pub visited: &'a [bool],
    pub first_visit: &'a [Option<u64>],
    pub blue_degree: &'a [u32],
    blue: &'a [bool],
}

impl WalkView<'_> {
    /// Whether an edge id (arc id when directed) is still unvisited.
    pub fn is_blue(&self, item: usize) -> bool {
        self.blue[item]
    }
}

impl WalkState {
    pub fn new_undirected(g: &Graph, start: VertexId) -> Result<WalkState> {
        Self::new(g, start, false, false)
    }

    pub fn new_directed(g: &Graph, start: VertexId) -> Result<WalkState> {
        Self::new(g, start, true, false)
    }

    fn new(g: &Graph, start: VertexId, directed: bool, srw: bool) -> Result<WalkState> {
        if start >= g.n() {
            return Err(Error::VertexOutOfRange {
                vertex: start,
                n: g.n(),
            });
        }
        let items = if directed { 2 * g.m() } else { g.m() };
        let blue_degree: Vec<u32> = (0..g.n()).map(|v| g.degree(v) as u32).collect();
        let odd_blue = blue_degree.iter().filter(|&&d| d % 2 == 1).count();
        let mut first_visit = vec![None; g.n()];
        first_visit[start] = Some(0);
        let mut visited = vec![false; g.n()];
        visited[start] = true;
        let unvisited_vertices = g.n() - 1;
        let mut st = WalkState {
            directed,
            srw,
            position: start,
            start,
            blue: vec![true; items],
            blue_remaining: items,
            blue_degree,
            odd_blue,
            balance: vec![0; if directed { g.n() } else { 0 }],
            nonzero_balance: 0,
            t: 0,
            red_steps: 0,
            blue_steps: 0,
            visited,
            first_visit,
            unvisited_vertices,
            vertex_cover_time: None,
            edge_cover_time: None,
            phase: None,
            phase_start_step: 0,
            phase_start_vertex: start,
            phases: Vec::new(),
            log_phases: true,
            parity_checks: false,
            offers: Vec::new(),
        };
        if st.unvisited_vertices == 0 {
            st.vertex_cover_time = Some(0);
        }
        if st.blue_remaining == 0 {
            st.edge_cover_time = Some(0);
        }
        Ok(st)
    }

    pub fn view<'a>(&'a self, g: &'a Graph) -> WalkView<'a> {
        WalkView {
            graph: g,
            directed: self.directed,
            position: self.position,
            start: self.start,
            t: self.t,
            red_steps: self.red_steps,
            blue_steps: self.blue_steps,
            visited: &self.visited,
            first_visit: &self.first_visit,
            blue_degree: &self.blue_degree,
            blue: &self.blue,
        }
    }

    pub fn is_visited(&self, v: VertexId) -> bool {
        self.visited[v]
    }

    pub fn blue_edges_remaining(&self) -> usize {
        self.blue_remaining
    }

    pub fn blue_degree_of(&self, v: VertexId) -> u32 {
        self.blue_degree[v]
    }

    pub fn is_blue_edge(&self, item: usize) -> bool {
        self.blue[item]
    }

    pub fn unvisited_vertices(&self) -> usize {
        self.unvisited_vertices
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        &self.phases
    }

    /// Sorted blue offer list at the current position: edge ids, or out-arc
    /// ids when directed. Empty when every incident edge is red.
    pub fn blue_offers(&mut self, g: &Graph) -> &[usize] {
        self.offers.clear();
        if self.blue_degree[self.position] > 0 {
            for slot in g.slots(self.position) {
                let item = if self.directed { slot.arc } else { slot.edge };
                if self.blue[item] {
                    self.offers.push(item);
                }
            }
            self.offers.sort_unstable();
            self.offers.dedup(); // a blue loop occupies two slots but is one offer
        }
        &self.offers
    }

    fn recolor_undirected(&mut self, g: &Graph, e: EdgeId) {
        debug_assert!(self.blue[e]);
        self.blue[e] = false;
        self.blue_remaining -= 1;
        let (a, b) = g.endpoints(e);
        for x in [a, b] {
            self.blue_degree[x] -= 1;
            if self.blue_degree[x] % 2 == 1 {
                self.odd_blue += 1;
            } else {
                self.odd_blue -= 1;
            }
        }
    }

    fn recolor_arc(&mut self, g: &Graph, arc: usize) {
        debug_assert!(self.blue[arc]);
        self.blue[arc] = false;
        self.blue_remaining -= 1;
        let (a, b) = g.endpoints(arc / 2);
        let (from, to) = if arc.is_multiple_of(2) { (a, b) } else { (b, a) };
        self.blue_degree[from] -= 1;
        for (x, delta) in [(from, -1i32), (to, 1i32)] {
            let was = self.balance[x];
            self.balance[x] = was + delta;
            match (was == 0, self.balance[x] == 0) {
                (true, false) => self.nonzero_balance += 1,
                (false, true) => self.nonzero_balance -= 1,
                _ => {}
            }
        }
    }

    fn arrive(&mut self, v: VertexId) {
        self.position = v;
        if !self.visited[v] {
            self.visited[v] = true;
            self.first_visit[v] = Some(self.t);
            self.unvisited_vertices -= 1;
            if self.unvisited_vertices == 0 {
                self.vertex_cover_time = Some(self.t);
            }
        }
        if self.blue_remaining == 0 && self.edge_cover_time.is_none() {
            self.edge_cover_time = Some(self.t);
        }
    }

    fn note_transition(&mut self, kind: PhaseKind, from: VertexId) {
        if self.phase != Some(kind) {
            self.close_phase();
            self.phase = Some(kind);
            self.phase_start_step = self.t;
            self.phase_start_vertex = from;
        }
    }

    fn close_phase(&mut self) {
        let Some(kind) = self.phase else { return };
        let closed = match kind {
            PhaseKind::Blue => self.blue_degree[self.position] == 0,
            PhaseKind::Red => true,
        };
        if self.log_phases {
            self.phases.push(PhaseRecord {
                kind,
                start_step: self.phase_start_step,
                start_vertex: self.phase_start_vertex,
                len: self.t - self.phase_start_step,
                end_vertex: self.position,
                closed,
            });
        }
        self.phase = None;
    }

    fn check_step_invariants(&self, g: &Graph) -> Result<()> {
        if self.t != self.red_steps + self.blue_steps {
            return Err(Error::InvariantViolation(format!(
                "t = {} but red + blue = {}",
                self.t,
                self.red_steps + self.blue_steps
            )));
        }
        let budget = if self.directed { 2 * g.m() } else { g.m() } as u64;
        if self.blue_steps > budget {
            return Err(Error::InvariantViolation(format!(
                "blue steps {} exceed {}",
                self.blue_steps, budget
            )));
        }
        if !self.parity_checks {
            return Ok(());
        }
        if self.directed {
            // Mid-blue-phase the start vertex owes one exit (-1) and the
            // current vertex one entry (+1); everywhere else balanced.
            let ok = match self.phase {
                Some(PhaseKind::Blue) if self.position != self.phase_start_vertex => {
                    self.nonzero_balance == 2
                        && self.balance[self.position] == 1
                        && self.balance[self.phase_start_vertex] == -1
                }
                _ => self.nonzero_balance == 0,
            };
            if !ok {
                return Err(Error::InvariantViolation(format!(
                    "arc balance broken at step {} (phase {:?})",
                    self.t, self.phase
                )));
            }
        } else {
            // Even-degree graph: exactly the phase start and the current
            // vertex have odd blue degree mid-phase, nobody otherwise.
            let ok = match self.phase {
                Some(PhaseKind::Blue) if self.position != self.phase_start_vertex => {
                    self.odd_blue == 2
                        && self.blue_degree[self.position] % 2 == 1
                        && self.blue_degree[self.phase_start_vertex] % 2 == 1
                }
                _ => self.odd_blue == 0,
            };
            if !ok {
                return Err(Error::InvariantViolation(format!(
                    "blue-degree parity broken at step {} (phase {:?}, odd count {})",
                    self.t, self.phase, self.odd_blue
                )));
            }
        }
        Ok(())
    }
}

/// Uniform step over the `d(v)` incident edge slots: the simple-random-walk
/// kernel shared by red steps, the baseline walk, and the return-time
/// sampler. Returns the slot's far endpoint and edge.
pub fn random_neighbor(g: &Graph, v: VertexId, rng: &mut dyn RngCore) -> (VertexId, EdgeId) {
    let slots = g.slots(v);
    let slot = slots[rng.random_range(0..slots.len())];
    (slot.to, slot.edge)
}

/// Advance the walk by one transition: blue if the rule can be offered an
/// unvisited incident edge, red (simple random walk) otherwise.
pub fn e_step(
    g: &Graph,
    st: &mut WalkState,
    rule: &mut dyn Rule,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let from = st.position;
    let use_blue = !st.srw && st.blue_degree[from] > 0;
    if use_blue {
        st.blue_offers(g);
        let offers = std::mem::take(&mut st.offers);
        let chosen = rule.choose(&st.view(g), &offers, rng)?;
        if offers.binary_search(&chosen).is_err() {
            return Err(Error::RuleViolation {
                step: st.t,
                vertex: from,
                chosen,
            });
        }
        st.offers = offers;
        let to = if st.directed {
            let edge = chosen / 2;
            let (a, b) = g.endpoints(edge);
            let (origin, to) = if chosen.is_multiple_of(2) { (a, b) } else { (b, a) };
            debug_assert_eq!(origin, from);
            st.recolor_arc(g, chosen);
            to
        } else {
            st.recolor_undirected(g, chosen);
            g.other_endpoint(chosen, from)
        };
        st.note_transition(PhaseKind::Blue, from);
        st.t += 1;
        st.blue_steps += 1;
        st.arrive(to);
    } else {
        let (to, edge) = random_neighbor(g, from, rng);
        if st.srw && st.blue[edge] {
            // The baseline walk still tracks edge coverage.
            st.recolor_undirected(g, edge);
        }
        st.note_transition(PhaseKind::Red, from);
        st.t += 1;
        st.red_steps += 1;
        st.arrive(to);
    }
    Ok(())
}

/// Outcome of one exploration trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub process: String,
    pub rule: String,
    pub seed: u64,
    pub start: VertexId,
    pub n: usize,
    pub m: usize,
    /// Step at which the last vertex was first visited; `None` if the run
    /// was truncated before visiting everything.
    pub vertex_cover_time: Option<u64>,
    /// Step at which the last edge (arc, when directed) was traversed.
    pub edge_cover_time: Option<u64>,
    #[serde(rename = "t")]
    pub total_steps: u64,
    #[serde(rename = "t_R")]
    pub red_steps: u64,
    #[serde(rename = "t_B")]
    pub blue_steps: u64,
    pub timed_out: bool,
    /// Visited counts at the end of the run; interesting on timeouts.
    pub visited_vertices: usize,
    pub visited_edges: usize,
    pub phase_log: Vec<PhaseRecord>,
}

fn drive(
    g: &Graph,
    process: ProcessKind,
    rule: &mut dyn Rule,
    cfg: &RunConfig,
) -> Result<TrialRecord> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let directed = process == ProcessKind::EdgeProcessDirected;
    let srw = process == ProcessKind::SimpleWalk;
    let mut st = WalkState::new(g, cfg.start, directed, srw)?;
    st.log_phases = cfg.log_phases;

    let even = g.all_even_degree();
    let check = match cfg.checks {
        CheckMode::Off => false,
        CheckMode::Auto => true,
        CheckMode::Strict => {
            if process == ProcessKind::EdgeProcess && !even {
                let odd = (0..g.n()).find(|&v| g.degree(v) % 2 == 1).unwrap();
                return Err(Error::OddDegree(odd));
            }
            true
        }
    };
    // Parity and closure arguments need even degrees in the undirected walk;
    // the directed variant balances by construction.
    st.parity_checks = check && !srw && (directed || even);

    let max_steps = cfg.effective_max_steps(g, process);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut timed_out = false;
    loop {
        let done = match cfg.stop {
            StopRule::VertexCover => st.vertex_cover_time.is_some(),
            StopRule::EdgeCover => st.edge_cover_time.is_some(),
        };
        if done {
            break;
        }
        if st.t >= max_steps {
            timed_out = true;
            break;
        }
        e_step(g, &mut st, rule, &mut rng)?;
        if check {
            st.check_step_invariants(g)?;
        }
        if st.parity_checks
            && let Some(last) = st.phases.last()
            && last.kind == PhaseKind::Blue
            && last.closed
            && last.end_vertex != last.start_vertex
        {
            return Err(Error::InvariantViolation(format!(
                "blue phase starting at {} (step {}) closed at {}",
                last.start_vertex, last.start_step, last.end_vertex
            )));
        }
    }
    st.close_phase();
    if st.parity_checks
        && let Some(last) = st.phases.last()
        && last.kind == PhaseKind::Blue
        && last.closed
        && last.end_vertex != last.start_vertex
    {
        return Err(Error::InvariantViolation(format!(
            "final blue phase starting at {} closed at {}",
            last.start_vertex, last.end_vertex
        )));
    }

    let visited_edges = st.blue.iter().filter(|&&b| !b).count();
    Ok(TrialRecord {
        process: process.name().to_string(),
        rule: rule.kind().to_string(),
        seed: cfg.seed,
        start: cfg.start,
        n: g.n(),
        m: g.m(),
        vertex_cover_time: st.vertex_cover_time,
        edge_cover_time: st.edge_cover_time,
        total_steps: st.t,
        red_steps: st.red_steps,
        blue_steps: st.blue_steps,
        timed_out,
        visited_vertices: g.n() - st.unvisited_vertices,
        visited_edges,
        phase_log: std::mem::take(&mut st.phases),
    })
}

/// Run the undirected E-process to the stop condition.
pub fn run(g: &Graph, rule: &mut dyn Rule, cfg: &RunConfig) -> Result<TrialRecord> {
    drive(g, ProcessKind::EdgeProcess, rule, cfg)
}

/// Run the directed-arc E-process: each edge carries two independently
/// colorable arcs, so blue phases close at their start vertex on any
/// connected graph, even with odd degrees.
pub fn run_directed(g: &Graph, rule: &mut dyn Rule, cfg: &RunConfig) -> Result<TrialRecord> {
    drive(g, ProcessKind::EdgeProcessDirected, rule, cfg)
}

/// Run the simple-random-walk baseline with the same instrumentation.
pub fn simple_walk(g: &Graph, cfg: &RunConfig) -> Result<TrialRecord> {
    let mut rule = UniformRandom;
    drive(g, ProcessKind::SimpleWalk, &mut rule, cfg)
}

/// Dispatch on a [`ProcessKind`].
pub fn run_process(
    g: &Graph,
    process: ProcessKind,
    rule_kind: &RuleKind,
    cfg: &RunConfig,
) -> Result<TrialRecord> {
    let mut rule = rule_kind.instantiate(g)?;
    drive(g, process, rule.as_mut(), cfg)
}

/// The maximal blue edge-induced subgraph around an unvisited vertex.
#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    pub root: VertexId,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

/// Fan out from an unvisited vertex `v` along blue edges (undirected state,
/// outside any blue phase) and verify the structure that makes the E-process
/// analyzable: every edge at `v` is blue, every reached vertex has positive
/// even blue degree, and every edge leaving the reached set is red.
pub fn check_unvisited_star(g: &Graph, st: &WalkState, v: VertexId) -> Result<StarReport> {
    if st.directed {
        return Err(Error::InvalidInput(
            "unvisited-star check applies to the undirected walk".into(),
        ));
    }
    if v >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: v,
            n: g.n(),
        });
    }
    if st.visited[v] {
        return Err(Error::InvalidInput(format!("vertex {v} already visited")));
    }
    // An open blue phase (last transition blue and more blue edges at the
    // position) still owes the walk a return; the star structure is defined
    // once the phase has closed.
    if st.phase == Some(PhaseKind::Blue) && st.blue_degree[st.position] > 0 {
        return Err(Error::InvalidInput(
            "walk is mid-blue-phase; the star is defined during red phases".into(),
        ));
    }
    if st.blue_degree[v] as usize != g.degree(v) {
        return Err(Error::InvariantViolation(format!(
            "unvisited vertex {v} has a red incident edge"
        )));
    }

    let mut in_star = vec![false; g.n()];
    let mut edges_seen = vec![false; g.m()];
    let mut vertices = vec![v];
    let mut edges = Vec::new();
    in_star[v] = true;
    let mut queue = std::collections::VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for slot in g.slots(u) {
            if !st.blue[slot.edge] || edges_seen[slot.edge] {
                continue;
            }
            edges_seen[slot.edge] = true;
            edges.push(slot.edge);
            if !in_star[slot.to] {
                in_star[slot.to] = true;
                vertices.push(slot.to);
                queue.push_back(slot.to);
            }
        }
    }

    for &u in &vertices {
        let d = st.blue_degree[u];
        if d == 0 || d % 2 == 1 {
            return Err(Error::InvariantViolation(format!(
                "star vertex {u} has blue degree {d}, expected positive even"
            )));
        }
    }
    // Maximality: a blue edge with exactly one endpoint inside would have
    // pulled the other endpoint in.
    for e in 0..g.m() {
        let (a, b) = g.endpoints(e);
        if st.blue[e] && (in_star[a] != in_star[b]) {
            return Err(Error::InvariantViolation(format!(
                "blue edge {e} crosses the star boundary"
            )));
        }
    }
    edges.sort_unstable();
    vertices.sort_unstable();
    Ok(StarReport {
        root: v,
        vertices,
        edges,
    })
}

/// Empirical mean first-return time to `u` over `returns` excursions of the
/// simple random walk; by Kac's formula this approaches `1/pi_u`.
pub fn mean_return_time(g: &Graph, u: VertexId, returns: usize, seed: u64) -> Result<f64> {
    if u >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: u,
            n: g.n(),
        });
    }
    if !g.is_connected() || g.n() == 0 {
        return Err(Error::Disconnected);
    }
    if g.degree(u) == 0 {
        return Err(Error::IsolatedVertex(u));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = u;
    let mut steps = 0u64;
    let mut hits = 0usize;
    while hits < returns {
        pos = random_neighbor(g, pos, &mut rng).0;
        steps += 1;
        if pos == u {
            hits += 1;
        }
    }
    Ok(steps as f64 / returns as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::Graph;

    fn cfg(seed: u64) -> RunConfig {
        RunConfig::new(0, seed).checks(CheckMode::Strict)
    }

    fn all_rule_kinds() -> Vec<RuleKind> {
        vec![
            RuleKind::Uniform,
            RuleKind::Fixed,
            RuleKind::RoundRobin,
            RuleKind::Script("default 0\n3 1\n7 2\n".into()),
        ]
    }

    #[test]
    fn cycle_cover_times_forced_for_all_rules() {
        for n in 3..=10 {
            let g = generators::cycle(n).unwrap();
            for kind in all_rule_kinds() {
                for seed in [1, 99] {
                    let rec = run_process(
                        &g,
                        ProcessKind::EdgeProcess,
                        &kind,
                        &cfg(seed).stop(StopRule::EdgeCover),
                    )
                    .unwrap();
                    assert_eq!(rec.vertex_cover_time, Some(n as u64 - 1), "{kind:?} n={n}");
                    assert_eq!(rec.edge_cover_time, Some(n as u64));
                    assert_eq!(rec.blue_steps, n as u64);
                    assert_eq!(rec.red_steps, 0);
                }
            }
        }
    }

    #[test]
    fn double_edge_k2() {
        let g = Graph::build(2, &[(0, 1), (0, 1)]).unwrap();
        let rec = run(
            &g,
            &mut UniformRandom,
            &cfg(5).stop(StopRule::EdgeCover),
        )
        .unwrap();
        assert_eq!(rec.vertex_cover_time, Some(1));
        assert_eq!(rec.edge_cover_time, Some(2));
        assert_eq!(rec.blue_steps, 2);
    }

    #[test]
    fn single_vertex_loop() {
        let g = Graph::build(1, &[(0, 0)]).unwrap();
        let rec = run(&g, &mut UniformRandom, &cfg(1)).unwrap();
        assert_eq!(rec.vertex_cover_time, Some(0));
        assert_eq!(rec.total_steps, 0);
        let rec = run(&g, &mut UniformRandom, &cfg(1).stop(StopRule::EdgeCover)).unwrap();
        assert_eq!(rec.edge_cover_time, Some(1));
        assert_eq!(rec.blue_steps, 1);
    }

    #[test]
    fn bowtie_first_blue_phase_covers_both_triangles() {
        // From the center both triangles are forced before the phase can
        // close: after the first triangle the center still has blue degree 2.
        let g = generators::bowtie();
        for kind in all_rule_kinds() {
            for seed in 0..20 {
                let rec = run_process(
                    &g,
                    ProcessKind::EdgeProcess,
                    &kind,
                    &cfg(seed).stop(StopRule::EdgeCover),
                )
                .unwrap();
                let first = rec.phase_log[0];
                assert_eq!(first.kind, PhaseKind::Blue);
                assert_eq!(first.len, 6, "{kind:?} seed {seed}");
                assert_eq!(first.start_vertex, 0);
                assert_eq!(first.end_vertex, 0);
                assert!(first.closed);
            }
        }
    }

    #[test]
    fn blue_phases_close_on_even_degree_graphs() {
        let graphs = vec![
            generators::cycle(9).unwrap(),
            generators::torus_grid(16).unwrap(),
            generators::bowtie(),
            generators::random_regular(40, 4, 3).unwrap(),
        ];
        for g in &graphs {
            for kind in all_rule_kinds() {
                for seed in 0..5 {
                    let rec = run_process(
                        g,
                        ProcessKind::EdgeProcess,
                        &kind,
                        &cfg(seed).stop(StopRule::EdgeCover),
                    )
                    .unwrap();
                    assert!(!rec.timed_out);
                    for phase in &rec.phase_log {
                        if phase.kind == PhaseKind::Blue {
                            assert!(phase.closed);
                            assert_eq!(phase.start_vertex, phase.end_vertex);
                        }
                    }
                    assert!(rec.blue_steps <= g.m() as u64);
                    assert_eq!(rec.total_steps, rec.red_steps + rec.blue_steps);
                }
            }
        }
    }

    #[test]
    fn contracted_multigraph_keeps_invariants() {
        let g = generators::torus_grid(16).unwrap();
        let (cg, _) = g
            .contract(&crate::graph::VertexSet::new([0, 1, 5]))
            .unwrap();
        assert!(cg.all_even_degree());
        for seed in 0..10 {
            let rec = run(
                &cg,
                &mut UniformRandom,
                &cfg(seed).stop(StopRule::EdgeCover),
            )
            .unwrap();
            assert!(!rec.timed_out);
            assert!(rec.blue_steps <= cg.m() as u64);
        }
    }

    #[test]
    fn strict_mode_rejects_odd_degree_undirected() {
        let g = generators::petersen();
        let err = run(&g, &mut UniformRandom, &cfg(0)).unwrap_err();
        assert!(matches!(err, Error::OddDegree(_)));
        // Auto mode runs with parity checks silently limited.
        let rec = run(
            &g,
            &mut UniformRandom,
            &RunConfig::new(0, 0).stop(StopRule::EdgeCover),
        )
        .unwrap();
        assert!(!rec.timed_out);
    }

    #[test]
    fn directed_walk_handles_odd_degrees() {
        let path = Graph::build(3, &[(0, 1), (1, 2)]).unwrap();
        for seed in 0..10 {
            let rec = run_directed(
                &path,
                &mut UniformRandom,
                &cfg(seed).stop(StopRule::EdgeCover),
            )
            .unwrap();
            assert!(!rec.timed_out);
            assert!(rec.blue_steps <= 2 * path.m() as u64);
            for phase in &rec.phase_log {
                if phase.kind == PhaseKind::Blue && phase.closed {
                    assert_eq!(phase.start_vertex, phase.end_vertex);
                }
            }
        }
    }

    #[test]
    fn directed_c3_arc_budget() {
        let g = generators::cycle(3).unwrap();
        let rec = run_directed(
            &g,
            &mut UniformRandom,
            &cfg(2).stop(StopRule::EdgeCover),
        )
        .unwrap();
        assert!(rec.blue_steps <= 6);
        assert_eq!(rec.visited_edges, 6); // all arcs
    }

    #[test]
    fn directed_star_phases_return_to_center() {
        let star = Graph::build(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        for seed in 0..15 {
            let rec = run_directed(
                &star,
                &mut UniformRandom,
                &cfg(seed).stop(StopRule::EdgeCover),
            )
            .unwrap();
            for phase in rec.phase_log.iter().filter(|p| p.kind == PhaseKind::Blue) {
                if phase.start_vertex == 0 && phase.closed {
                    assert_eq!(phase.end_vertex, 0);
                }
            }
        }
    }

    #[test]
    fn simple_walk_has_no_blue_steps() {
        let g = generators::complete(4).unwrap();
        let rec = simple_walk(&g, &cfg(7)).unwrap();
        assert_eq!(rec.blue_steps, 0);
        assert!(!rec.timed_out);
        let k2 = Graph::build(2, &[(0, 1)]).unwrap();
        for seed in 0..5 {
            let rec = simple_walk(&k2, &cfg(seed)).unwrap();
            assert_eq!(rec.vertex_cover_time, Some(1));
        }
    }

    #[test]
    fn simple_walk_mean_cycle_cover_matches_closed_form() {
        // Cover time of a cycle by SRW is n(n-1)/2.
        let n = 6usize;
        let g = generators::cycle(n).unwrap();
        let trials = 4000;
        let mut total = 0u64;
        for seed in 0..trials {
            let rec = simple_walk(&g, &RunConfig::new(0, seed).max_steps(200_000)).unwrap();
            total += rec.vertex_cover_time.unwrap();
        }
        let mean = total as f64 / trials as f64;
        let want = (n * (n - 1)) as f64 / 2.0;
        assert!(
            (mean - want).abs() / want < 0.05,
            "mean {mean} vs closed form {want}"
        );
    }

    #[test]
    fn determinism_same_seed_same_record() {
        let g = generators::random_regular(60, 4, 8).unwrap();
        let a = run(&g, &mut UniformRandom, &cfg(123).stop(StopRule::EdgeCover)).unwrap();
        let b = run(&g, &mut UniformRandom, &cfg(123).stop(StopRule::EdgeCover)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = run(&g, &mut UniformRandom, &cfg(124).stop(StopRule::EdgeCover)).unwrap();
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn rule_violation_aborts_with_diagnostic() {
        let g = generators::cycle(5).unwrap();
        let mut hostile = FnRule::new("hostile", |_view: &WalkView<'_>, _offers: &[usize], _rng: &mut dyn RngCore| {
            usize::MAX // never a valid edge id
        });
        let err = run(&g, &mut hostile, &cfg(0)).unwrap_err();
        assert!(matches!(err, Error::RuleViolation { .. }));
    }

    #[test]
    fn timeout_reports_partial_coverage() {
        let g = generators::random_regular(50, 4, 2).unwrap();
        let rec = run(&g, &mut UniformRandom, &cfg(1).max_steps(3)).unwrap();
        assert!(rec.timed_out);
        assert_eq!(rec.vertex_cover_time, None);
        assert_eq!(rec.total_steps, 3);
        assert!(rec.visited_vertices >= 2);
    }

    #[test]
    fn unvisited_star_fresh_state_is_whole_graph() {
        let g = generators::torus_grid(9).unwrap();
        let st = WalkState::new_undirected(&g, 0).unwrap();
        let report = check_unvisited_star(&g, &st, 4).unwrap();
        assert_eq!(report.vertices.len(), g.n());
        assert_eq!(report.edges.len(), g.m());
    }

    #[test]
    fn unvisited_star_bowtie_far_triangle() {
        // Start at a leaf of one triangle; the first blue phase traverses
        // exactly that triangle (1 -> 0 -> 2 -> 1 under ascending order) and
        // closes. The star of a far vertex is then the untouched triangle.
        let g = generators::bowtie();
        let mut st = WalkState::new_undirected(&g, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut rule = FixedOrder::ascending();
        for _ in 0..3 {
            e_step(&g, &mut st, &mut rule, &mut rng).unwrap();
        }
        assert_eq!(st.position, 1);
        assert_eq!(st.blue_degree_of(1), 0);
        let report = check_unvisited_star(&g, &st, 4).unwrap();
        assert_eq!(report.vertices, vec![0, 3, 4]);
        assert_eq!(report.edges, vec![3, 4, 5]);

        // Visited vertices are rejected.
        let err = check_unvisited_star(&g, &st, 2).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        // Mid-open-blue-phase states are rejected.
        let mut st2 = WalkState::new_undirected(&g, 1).unwrap();
        e_step(&g, &mut st2, &mut rule, &mut rng).unwrap();
        let err = check_unvisited_star(&g, &st2, 4).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn kac_return_time_small_graphs() {
        let k4 = generators::complete(4).unwrap();
        let mean = mean_return_time(&k4, 0, 20_000, 42).unwrap();
        assert!((mean - 4.0).abs() / 4.0 < 0.05, "mean {mean}");

        let b = generators::bowtie();
        let mean = mean_return_time(&b, 0, 20_000, 42).unwrap();
        assert!((mean - 3.0).abs() / 3.0 < 0.05, "mean {mean}");
    }

    #[test]
    fn red_steps_uniform_over_slots() {
        // After edge cover everything is red; transition frequencies out of
        // a fixed vertex should be uniform over slots (loop counted twice).
        let g = Graph::build(3, &[(0, 1), (1, 2), (2, 0), (0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0u64; 3]; // to 1, to 2, loop back to 0
        let samples = 60_000;
        for _ in 0..samples {
            let (to, edge) = random_neighbor(&g, 0, &mut rng);
            if g.is_loop(edge) {
                counts[2] += 1;
            } else if to == 1 {
                counts[0] += 1;
            } else {
                counts[1] += 1;
            }
        }
        // d(0) = 4 slots: 1 to vertex 1, 1 to vertex 2, 2 for the loop.
        let f = |c: u64| c as f64 / samples as f64;
        assert!((f(counts[0]) - 0.25).abs() < 0.01);
        assert!((f(counts[1]) - 0.25).abs() < 0.01);
        assert!((f(counts[2]) - 0.50).abs() < 0.01);
    }
}
