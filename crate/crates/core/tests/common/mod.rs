//! Shared brute-force oracles and checkers for the integration suites.
//!
//! Everything here is deliberately independent of the library's search and
//! enumeration code paths: plain bitmask sweeps over edge subsets, a
//! hand-rolled XML well-formedness scan, and a closed-form chi-square
//! quantile. Slow and obviously correct.

// Each test binary uses a different subset of these oracles.
#![allow(dead_code)]

use eproc_core::graph::Graph;

/// Vertex set of an edge mask (empty mask -> just the root).
fn mask_vertices(g: &Graph, mask: u32, root: usize) -> Vec<usize> {
    let mut present = vec![false; g.n()];
    present[root] = true;
    for e in 0..g.m() {
        if mask & (1 << e) != 0 {
            let (a, b) = g.endpoints(e);
            present[a] = true;
            present[b] = true;
        }
    }
    (0..g.n()).filter(|&v| present[v]).collect()
}

/// Is the edge-induced subgraph of `mask` connected (single component over
/// its incident vertices)?
fn mask_connected(g: &Graph, mask: u32) -> bool {
    let mut anchor = None;
    for e in 0..g.m() {
        if mask & (1 << e) != 0 {
            anchor = Some(g.endpoints(e).0);
            break;
        }
    }
    let Some(anchor) = anchor else { return true };
    let mut seen = vec![false; g.n()];
    seen[anchor] = true;
    let mut stack = vec![anchor];
    while let Some(u) = stack.pop() {
        for slot in g.slots(u) {
            if mask & (1 << slot.edge) != 0 && !seen[slot.to] {
                seen[slot.to] = true;
                stack.push(slot.to);
            }
        }
    }
    for e in 0..g.m() {
        if mask & (1 << e) != 0 {
            let (a, b) = g.endpoints(e);
            if !seen[a] || !seen[b] {
                return false;
            }
        }
    }
    true
}

/// Brute-force minimum order of a connected even-degree subgraph containing
/// every edge at `v`: iterate every superset of the star mask (m <= 24).
pub fn brute_force_goodness(g: &Graph, v: usize) -> Option<usize> {
    assert!(g.m() <= 24, "oracle is exponential in m");
    let mut star: u32 = 0;
    for slot in g.slots(v) {
        star |= 1 << slot.edge;
    }
    let all = (1u32 << g.m()) - 1;
    let free = all & !star;
    let mut best: Option<usize> = None;
    let mut sub = free;
    loop {
        let mask = star | sub;
        let mut deg = vec![0usize; g.n()];
        for e in 0..g.m() {
            if mask & (1 << e) != 0 {
                let (a, b) = g.endpoints(e);
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        let even = deg.iter().all(|d| d % 2 == 0);
        if even && mask_connected(g, mask) {
            let order = deg.iter().filter(|&&d| d > 0).count();
            if best.is_none_or(|b| order < b) {
                best = Some(order);
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    best
}

/// Brute-force table of connected rooted subgraph counts: `table[v][s]` is
/// the number of connected edge-induced subgraphs on exactly `s` vertices
/// containing `v` (the lone root counts for s = 1). One pass over all 2^m
/// edge subsets.
pub fn brute_force_rooted_counts(g: &Graph, s_max: usize) -> Vec<Vec<u128>> {
    assert!(g.m() <= 24, "oracle is exponential in m");
    let mut table = vec![vec![0u128; s_max + 1]; g.n()];
    for row in table.iter_mut() {
        row[1] += 1; // empty subgraph rooted at each vertex
    }
    for mask in 1u32..(1 << g.m()) {
        if !mask_connected(g, mask) {
            continue;
        }
        let vertices = mask_vertices(g, mask, g.endpoints(mask.trailing_zeros() as usize).0);
        let s = vertices.len();
        if s > s_max {
            continue;
        }
        for &v in &vertices {
            table[v][s] += 1;
        }
    }
    table
}

/// Brute-force girth: minimum vertex count over edge subsets that form a
/// single cycle (every degree exactly 2, connected). Loops are 1-cycles and
/// parallel pairs 2-cycles by this definition automatically.
pub fn brute_force_girth(g: &Graph) -> Option<usize> {
    assert!(g.m() <= 16, "oracle is exponential in m");
    let mut best: Option<usize> = None;
    for mask in 1u32..(1 << g.m()) {
        let mut deg = vec![0usize; g.n()];
        for e in 0..g.m() {
            if mask & (1 << e) != 0 {
                let (a, b) = g.endpoints(e);
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        if !deg.iter().all(|&d| d == 0 || d == 2) {
            continue;
        }
        if !mask_connected(g, mask) {
            continue;
        }
        let order = deg.iter().filter(|&&d| d > 0).count();
        let edges = mask.count_ones() as usize;
        if order == edges && best.is_none_or(|b| order < b) {
            best = Some(order);
        }
    }
    best
}

/// Minimal XML well-formedness scan: every element closes in order,
/// attributes are quoted, exactly one root.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let tail = &rest[open + 1..];
        let close = tail.find('>').expect("unclosed tag");
        let tag = &tail[..close];
        rest = &tail[close + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{tag}>");
        if let Some(name) = tag.strip_prefix('/') {
            let top = stack.pop().unwrap_or_else(|| panic!("stray </{name}>"));
            assert_eq!(top, name.trim(), "mismatched closing tag");
            if stack.is_empty() {
                roots += 1;
            }
        } else if tag.ends_with('/') {
            if stack.is_empty() {
                roots += 1;
            }
        } else {
            let name = tag.split_whitespace().next().expect("empty tag").to_string();
            stack.push(name);
        }
    }
    assert!(stack.is_empty(), "unclosed elements: {stack:?}");
    assert_eq!(roots, 1, "expected exactly one root element");
}

/// Upper-tail chi-square quantile via the Wilson-Hilferty approximation.
/// `z` is the standard-normal quantile of the same tail (3.090232 for
/// p = 0.999).
pub fn chi_square_quantile(df: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}
