//! Rules for choosing among the unvisited ("blue") edges at the current
//! vertex.
//!
//! A rule is handed the current vertex's blue offer list — sorted edge ids in
//! the undirected walk, sorted arc ids in the directed variant — together
//! with a read-only view of the full walk state, and must return one of the
//! offered items. The engine validates the choice and aborts the trial if a
//! rule ever returns something outside the offer list, so even a hostile
//! rule can only reorder blue edges, never force a revisit.

use std::collections::HashMap;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::WalkView;

pub trait Rule {
    /// Short stable name recorded in trial output.
    fn kind(&self) -> &str;

    /// Pick one item from `offers` (nonempty, sorted ascending).
    fn choose(&mut self, view: &WalkView<'_>, offers: &[usize], rng: &mut dyn RngCore)
    -> Result<usize>;
}

/// Uniform random choice over the offered blue edges.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformRandom;

impl Rule for UniformRandom {
    fn kind(&self) -> &str {
        "uniform"
    }

    fn choose(
        &mut self,
        _view: &WalkView<'_>,
        offers: &[usize],
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        Ok(offers[rng.random_range(0..offers.len())])
    }
}

/// Deterministic per-vertex priority order. Without an explicit table the
/// order is ascending item id; with one, the first listed blue item wins and
/// unlisted items fall back to the smallest offer.
#[derive(Clone, Debug, Default)]
pub struct FixedOrder {
    table: Option<Vec<Vec<usize>>>,
}

impl FixedOrder {
    pub fn ascending() -> Self {
        FixedOrder { table: None }
    }

    /// `table[v]` lists item ids in priority order for vertex `v`.
    pub fn with_table(table: Vec<Vec<usize>>) -> Self {
        FixedOrder { table: Some(table) }
    }
}

impl Rule for FixedOrder {
    fn kind(&self) -> &str {
        "fixed-order"
    }

    fn choose(
        &mut self,
        view: &WalkView<'_>,
        offers: &[usize],
        _rng: &mut dyn RngCore,
    ) -> Result<usize> {
        if let Some(table) = &self.table
            && let Some(order) = table.get(view.position)
        {
            for &item in order {
                if offers.binary_search(&item).is_ok() {
                    return Ok(item);
                }
            }
        }
        Ok(offers[0])
    }
}

/// Rotor-style circular order: each vertex remembers where its pointer
/// stopped and resumes scanning its incident slots from there, skipping red
/// ones.
#[derive(Clone, Debug)]
pub struct RoundRobin {
    pointer: Vec<usize>,
}

impl RoundRobin {
    pub fn new(g: &Graph) -> Self {
        RoundRobin {
            pointer: vec![0; g.n()],
        }
    }
}

impl Rule for RoundRobin {
    fn kind(&self) -> &str {
        "round-robin"
    }

    fn choose(
        &mut self,
        view: &WalkView<'_>,
        offers: &[usize],
        _rng: &mut dyn RngCore,
    ) -> Result<usize> {
        let v = view.position;
        let slots = view.graph.slots(v);
        let start = self.pointer[v] % slots.len();
        for step in 0..slots.len() {
            let i = (start + step) % slots.len();
            let item = if view.directed {
                slots[i].arc
            } else {
                slots[i].edge
            };
            if offers.binary_search(&item).is_ok() {
                self.pointer[v] = (i + 1) % slots.len();
                return Ok(item);
            }
        }
        // The engine only calls with nonempty offers built from these slots.
        Ok(offers[0])
    }
}

/// Scripted adversary: a line-oriented list of `step index` pairs choosing
/// the index-th offer at that step, with a default index for unlisted steps.
/// Indices are taken modulo the offer-list length, so a static script is
/// total no matter how the walk unfolds.
///
/// Script grammar: blank lines and `#` comments are skipped; an optional
/// `default <index>` line overrides the default index 0; every other line is
/// `<step> <index>`.
#[derive(Clone, Debug)]
pub struct ScriptRule {
    entries: HashMap<u64, usize>,
    default_index: usize,
}

impl ScriptRule {
    pub fn parse(source: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut default_index = 0usize;
        for (lineno, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let first = it.next().unwrap();
            if first == "default" {
                default_index = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: "expected `default <index>`".into(),
                    })?;
            } else {
                let step: u64 = first.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: "invalid step number".into(),
                })?;
                let index: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: "expected `<step> <index>`".into(),
                    })?;
                entries.insert(step, index);
            }
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "trailing tokens".into(),
                });
            }
        }
        Ok(ScriptRule {
            entries,
            default_index,
        })
    }
}

impl Rule for ScriptRule {
    fn kind(&self) -> &str {
        "script"
    }

    fn choose(
        &mut self,
        view: &WalkView<'_>,
        offers: &[usize],
        _rng: &mut dyn RngCore,
    ) -> Result<usize> {
        let idx = *self.entries.get(&view.t).unwrap_or(&self.default_index);
        Ok(offers[idx % offers.len()])
    }
}

/// Programmatic adversary built from a closure; used for heuristic rules
/// that inspect the walk state. The closure's return value is validated by
/// the engine like any other rule's.
pub struct FnRule<F> {
    name: String,
    f: F,
}

impl<F> FnRule<F>
where
    F: FnMut(&WalkView<'_>, &[usize], &mut dyn RngCore) -> usize,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnRule {
            name: name.into(),
            f,
        }
    }
}

impl<F> Rule for FnRule<F>
where
    F: FnMut(&WalkView<'_>, &[usize], &mut dyn RngCore) -> usize,
{
    fn kind(&self) -> &str {
        &self.name
    }

    fn choose(
        &mut self,
        view: &WalkView<'_>,
        offers: &[usize],
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        Ok((self.f)(view, offers, rng))
    }
}

/// Serializable description of a rule, instantiated fresh per trial so that
/// rotor pointers and script cursors never leak between runs.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RuleKind {
    Uniform,
    Fixed,
    RoundRobin,
    /// Script source text (not a path; the CLI reads the file).
    Script(String),
}

impl RuleKind {
    pub fn instantiate(&self, g: &Graph) -> Result<Box<dyn Rule>> {
        Ok(match self {
            RuleKind::Uniform => Box::new(UniformRandom),
            RuleKind::Fixed => Box::new(FixedOrder::ascending()),
            RuleKind::RoundRobin => Box::new(RoundRobin::new(g)),
            RuleKind::Script(src) => Box::new(ScriptRule::parse(src)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::Uniform => "uniform",
            RuleKind::Fixed => "fixed-order",
            RuleKind::RoundRobin => "round-robin",
            RuleKind::Script(_) => "script",
        }
    }
}
