//! Seeded graph generators: random regular graphs and deterministic gadgets.
//!
//! Everything here is a pure function of its parameters and a 64-bit seed.
//! Retry loops derive per-attempt sub-seeds from the master seed, so a failed
//! sample never perturbs the stream of a later one and every graph is
//! reproducible from `(spec, seed)` alone.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomRegular,
    Cycle,
    Complete,
    TorusGrid,
    Bowtie,
    Barbell,
    Petersen,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s {
            "random-regular" => Family::RandomRegular,
            "cycle" => Family::Cycle,
            "complete" => Family::Complete,
            "torus-grid" => Family::TorusGrid,
            "bowtie" => Family::Bowtie,
            "barbell" => Family::Barbell,
            "petersen" => Family::Petersen,
            other => return Err(Error::InvalidFamily(format!("unknown family `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
}

/// Build the requested deterministic family, or sample a random regular
/// graph when `family` is [`Family::RandomRegular`].
pub fn named(spec: &GenSpec) -> Result<Graph> {
    match spec.family {
        Family::RandomRegular => random_regular(spec.n, spec.r, spec.seed),
        Family::Cycle => cycle(spec.n),
        Family::Complete => complete(spec.n),
        Family::TorusGrid => torus_grid(spec.n),
        Family::Bowtie => Ok(bowtie()),
        Family::Barbell => barbell(spec.n, spec.r),
        Family::Petersen => Ok(petersen()),
    }
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidFamily(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::build(n, &edges)
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::InvalidFamily("complete graph needs n >= 1".into()));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::build(n, &edges)
}

/// 4-regular k x k torus; `n` must be a perfect square with k >= 3.
pub fn torus_grid(n: usize) -> Result<Graph> {
    let k = (n as f64).sqrt().round() as usize;
    if k * k != n || k < 3 {
        return Err(Error::InvalidFamily(format!(
            "torus-grid needs n = k^2 with k >= 3, got n = {n}"
        )));
    }
    let idx = |row: usize, col: usize| row * k + col;
    let mut edges = Vec::with_capacity(2 * n);
    for row in 0..k {
        for col in 0..k {
            edges.push((idx(row, col), idx(row, (col + 1) % k)));
            edges.push((idx(row, col), idx((row + 1) % k, col)));
        }
    }
    Graph::build(n, &edges)
}

/// Two triangles sharing one vertex: degrees (4, 2, 2, 2, 2).
pub fn bowtie() -> Graph {
    Graph::build(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap()
}

/// Two copies of K_r joined by a path. Total vertex count is `n`, so the
/// bridge path has `n - 2r` interior vertices (0 means a single joining edge).
pub fn barbell(n: usize, r: usize) -> Result<Graph> {
    if r < 3 || n < 2 * r {
        return Err(Error::InvalidFamily(format!(
            "barbell needs r >= 3 and n >= 2r, got n = {n}, r = {r}"
        )));
    }
    let mut edges = Vec::new();
    for offset in [0, r] {
        for u in 0..r {
            for v in (u + 1)..r {
                edges.push((offset + u, offset + v));
            }
        }
    }
    // Bridge from vertex 0 of the first clique to vertex r of the second,
    // through the interior path vertices 2r..n.
    let mut prev = 0;
    for interior in 2 * r..n {
        edges.push((prev, interior));
        prev = interior;
    }
    edges.push((prev, r));
    Graph::build(n, &edges)
}

/// The Petersen graph: outer 5-cycle, inner pentagram, five spokes.
pub fn petersen() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::build(10, &edges).unwrap()
}

/// Cap on total sampling attempts (simplicity and connectivity rejections
/// combined) before giving up with [`Error::RetriesExhausted`].
const MAX_ATTEMPTS: u64 = 200_000;

/// Sample a simple connected r-regular graph on n vertices, uniformly up to
/// the configuration model's known near-uniformity, deterministic in `seed`.
///
/// Small instances use pure rejection of the pairing model (provably uniform
/// among simple graphs); instances where rejection is too slow — many slots,
/// or r large enough that the ~e^((r^2-1)/4) simplicity rejection rate bites —
/// instead repair a random pairing with degree-preserving double-edge swaps
/// until simple. Disconnected samples are rejected in both regimes.
pub fn random_regular(n: usize, r: usize, seed: u64) -> Result<Graph> {
    if r < 1 || r >= n {
        return Err(Error::InfeasibleRegular { n, r });
    }
    if !(n * r).is_multiple_of(2) {
        return Err(Error::InfeasibleRegular { n, r });
    }
    if r == n - 1 {
        // The complete graph is the only simple (n-1)-regular graph; the
        // configuration model would reject almost surely for moderate n.
        return complete(n);
    }
    let slots = n * r;
    let reject_rate = (((r * r) as f64 - 1.0) / 4.0).exp();
    let use_rejection = slots <= 20_000 && reject_rate <= 10_000.0;

    for attempt in 0..MAX_ATTEMPTS {
        let sub_seed = derive_seed(seed, attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let candidate = if use_rejection {
            pairing_simple(n, r, &mut rng)
        } else {
            pairing_with_repair(n, r, &mut rng)
        };
        if let Some(edges) = candidate {
            let g = Graph::build(n, &edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::RetriesExhausted {
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

/// One configuration-model draw; `None` if the pairing has a loop or a
/// parallel edge.
fn pairing_simple(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n * r).collect();
    points.shuffle(rng);
    let mut seen = std::collections::HashSet::with_capacity(n * r / 2);
    let mut edges = Vec::with_capacity(n * r / 2);
    for pair in points.chunks_exact(2) {
        let (u, v) = (pair[0] / r, pair[1] / r);
        if u == v {
            return None;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return None;
        }
        edges.push((u, v));
    }
    Some(edges)
}

/// Configuration-model draw followed by double-edge-swap repair of loops and
/// parallel edges. Gives up (returns `None`, prompting a fresh sub-seeded
/// attempt) if the defect count stops shrinking within its swap budget.
fn pairing_with_repair(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n * r).collect();
    points.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = points
        .chunks_exact(2)
        .map(|p| (p[0] / r, p[1] / r))
        .collect();

    let mut mult: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    for &(u, v) in &edges {
        *mult.entry(key(u, v)).or_insert(0) += 1;
    }
    let is_defect = |(u, v): (usize, usize), mult: &HashMap<(usize, usize), usize>| {
        u == v || mult[&key(u, v)] > 1
    };

    let mut defects: Vec<usize> = (0..edges.len())
        .filter(|&i| is_defect(edges[i], &mult))
        .collect();
    let mut budget = 400 * (defects.len() as u64 + 16);
    while let Some(&i) = defects.last() {
        if budget == 0 {
            return None;
        }
        budget -= 1;
        if !is_defect(edges[i], &mult) {
            defects.pop();
            continue;
        }
        let j = rng.random_range(0..edges.len());
        if j == i {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        // Swap to (a, c), (b, d) or (a, d), (b, c), chosen at random.
        let ((p, q), (s, t)) = if rng.random_range(0..2) == 0 {
            ((a, c), (b, d))
        } else {
            ((a, d), (b, c))
        };
        if p == q || s == t {
            continue;
        }
        let new1 = key(p, q);
        let new2 = key(s, t);
        let occupied = |k: (usize, usize), mult: &HashMap<_, usize>| mult.get(&k).copied().unwrap_or(0);
        if occupied(new1, &mult) > 0 || occupied(new2, &mult) > 0 || new1 == new2 {
            continue;
        }
        for old in [key(a, b), key(c, d)] {
            if let Some(c) = mult.get_mut(&old) {
                *c -= 1;
                if *c == 0 {
                    mult.remove(&old);
                }
            }
        }
        *mult.entry(new1).or_insert(0) += 1;
        *mult.entry(new2).or_insert(0) += 1;
        edges[i] = (p, q);
        edges[j] = (s, t);
        if is_defect(edges[j], &mult) {
            defects.push(j);
        }
    }
    debug_assert!(edges.iter().all(|&(u, v)| u != v));
    Some(edges)
}
