//! Spectral quantities of the simple random walk: stationary distribution,
//! eigenvalue gap, exact and bounded hitting times, mixing times.
//!
//! Dense linear algebra (full spectra, absorbing solves, the fundamental
//! matrix) is limited to graphs of at most [`crate::DENSE_LIMIT`] vertices —
//! the desk-scale oracle regime. Larger graphs get the closed-form stationary
//! distribution, power-iteration extreme eigenvalues, and analytic bounds.
//!
//! Eigenvalues are always computed on the symmetric conjugate
//! `D^{1/2} P D^{-1/2}` of the transition matrix, which has the same spectrum
//! and is exactly symmetric for reversible walks, so no complex arithmetic is
//! needed.
//!
//! `lambda_max` follows the convention used throughout this crate's bound
//! checks: for the lazy chain it is the second-largest eigenvalue (all lazy
//! eigenvalues are nonnegative, so this is also the largest non-principal
//! magnitude); for the non-lazy chain it is `min(|lambda_2|, |lambda_n|)` of
//! the descending-sorted spectrum. Gated bound comparisons are made on the
//! lazy chain, where `1/(1 - lambda_max)` rigorously dominates the tail sums
//! behind the hitting-time bounds.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};

const STATIONARITY_TOL: f64 = 1e-10;
const SOLVE_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-12;
const EIG_TOL: f64 = 1e-10;

/// Row-stochastic transition matrix of the walk; `lazy` applies
/// `P <- (I + P) / 2`. A loop at `v` contributes `2/d(v)` to `P[v][v]`.
pub fn transition_matrix(g: &Graph, lazy: bool) -> Result<DMatrix<f64>> {
    let n = g.n();
    for v in 0..n {
        if g.degree(v) == 0 {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let mut p = DMatrix::zeros(n, n);
    for v in 0..n {
        let d = g.degree(v) as f64;
        for slot in g.slots(v) {
            p[(v, slot.to)] += 1.0 / d;
        }
    }
    if lazy {
        for v in 0..n {
            for w in 0..n {
                p[(v, w)] *= 0.5;
            }
            p[(v, v)] += 0.5;
        }
    }
    debug_assert!((0..n).all(|v| {
        let row_sum: f64 = p.row(v).sum();
        (row_sum - 1.0).abs() < 1e-12
    }));
    Ok(p)
}

/// Stationary distribution `pi_v = d(v) / 2m`. On dense-regime graphs the
/// residual `||pi P - pi||_inf` is verified below 1e-10.
pub fn stationary(g: &Graph) -> Result<Vec<f64>> {
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    let two_m = (2 * g.m()) as f64;
    let pi: Vec<f64> = (0..g.n()).map(|v| g.degree(v) as f64 / two_m).collect();
    if g.n() <= DENSE_LIMIT && g.min_degree() > 0 {
        let p = transition_matrix(g, false)?;
        let mut residual = 0.0f64;
        for x in 0..g.n() {
            let px: f64 = (0..g.n()).map(|u| pi[u] * p[(u, x)]).sum();
            residual = residual.max((px - pi[x]).abs());
        }
        if residual >= STATIONARITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "stationarity residual {residual:e}"
            )));
        }
    }
    Ok(pi)
}

/// Full walk spectrum, sorted descending. Dense regime only.
pub fn spectrum(g: &Graph, lazy: bool) -> Result<Vec<f64>> {
    if g.n() > DENSE_LIMIT {
        return Err(Error::TooLargeForDense {
            n: g.n(),
            limit: DENSE_LIMIT,
        });
    }
    let n = g.n();
    for v in 0..n {
        if g.degree(v) == 0 {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for v in 0..n {
        let dv = g.degree(v) as f64;
        for slot in g.slots(v) {
            let dw = g.degree(slot.to) as f64;
            m[(v, slot.to)] += 1.0 / (dv * dw).sqrt();
        }
    }
    if lazy {
        m = (DMatrix::identity(n, n) + m) * 0.5;
    }
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

fn lambda_max_from_extremes(lambda_2: f64, lambda_n: f64, lazy: bool) -> f64 {
    if lazy {
        // Lazy spectrum is nonnegative; the second-largest eigenvalue is the
        // standing `lambda_2 = lambda_max` convention.
        lambda_2
    } else {
        lambda_2.abs().min(lambda_n.abs())
    }
}

/// Extreme non-principal eigenvalues `(lambda_2, lambda_n)` of the non-lazy
/// chain, by dense eigensolve or, beyond the dense limit, by shifted power
/// iteration with the known principal eigenvector deflated analytically.
pub fn extreme_eigenvalues(g: &Graph) -> Result<(f64, f64)> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.n() == 1 {
        return Ok((0.0, 0.0));
    }
    if g.n() <= DENSE_LIMIT {
        let vals = spectrum(g, false)?;
        Ok((vals[1], vals[vals.len() - 1]))
    } else {
        Ok(extreme_eigenvalues_iterative(g))
    }
}

/// `lambda_max` of the chain selected by `lazy`; see the module docs for the
/// exact convention.
pub fn lambda_max(g: &Graph, lazy: bool) -> Result<f64> {
    let (l2, ln_) = extreme_eigenvalues(g)?;
    let (l2, ln_) = if lazy {
        ((1.0 + l2) / 2.0, (1.0 + ln_) / 2.0)
    } else {
        (l2, ln_)
    };
    Ok(lambda_max_from_extremes(l2, ln_, lazy))
}

/// `1 - lambda_max`.
pub fn eigenvalue_gap(g: &Graph, lazy: bool) -> Result<f64> {
    Ok(1.0 - lambda_max(g, lazy)?)
}

fn conjugate_matvec(g: &Graph, inv_sqrt_deg: &[f64], x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for v in 0..g.n() {
        let mut acc = 0.0;
        for slot in g.slots(v) {
            acc += x[slot.to] * inv_sqrt_deg[slot.to];
        }
        out[v] = acc * inv_sqrt_deg[v];
    }
}

/// Power iteration for `(lambda_2, lambda_n)` on the symmetric conjugate.
/// The principal eigenvector is `w_v = sqrt(d(v)/2m)`, already unit-norm, and
/// is projected out each iteration.
pub(crate) fn extreme_eigenvalues_iterative(g: &Graph) -> (f64, f64) {
    let n = g.n();
    let two_m = (2 * g.m()) as f64;
    let inv_sqrt_deg: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let principal: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64 / two_m).sqrt()).collect();

    // Deterministic start vector.
    let seed_component = |i: usize, salt: u64| {
        let z = crate::derive_seed(salt, i as u64);
        (z as f64 / u64::MAX as f64) - 0.5
    };

    // shift = +1: dominant eigenvalue of M + I is 1 + lambda_2 after
    // deflation. shift = -1: dominant eigenvalue of M - I is lambda_n - 1
    // without any deflation (the principal maps to 0).
    let iterate = |shift: f64, deflate: bool, salt: u64| -> f64 {
        let mut x: Vec<f64> = (0..n).map(|i| seed_component(i, salt)).collect();
        let mut y = vec![0.0; n];
        let mut prev = f64::NAN;
        let mut stable = 0;
        for _ in 0..200_000 {
            if deflate {
                let dot: f64 = x.iter().zip(&principal).map(|(a, b)| a * b).sum();
                for (xi, wi) in x.iter_mut().zip(&principal) {
                    *xi -= dot * wi;
                }
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-300 {
                return shift;
            }
            for xi in x.iter_mut() {
                *xi /= norm;
            }
            conjugate_matvec(g, &inv_sqrt_deg, &x, &mut y);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += shift * xi;
            }
            let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            if (rayleigh - prev).abs() < EIG_TOL / 10.0 {
                stable += 1;
                if stable >= 3 {
                    prev = rayleigh;
                    break;
                }
            } else {
                stable = 0;
            }
            prev = rayleigh;
            std::mem::swap(&mut x, &mut y);
        }
        prev
    };

    let lambda_2 = iterate(1.0, true, 0x5eed_0001) - 1.0;
    let lambda_n = iterate(-1.0, false, 0x5eed_0002) + 1.0;
    (lambda_2.clamp(-1.0, 1.0), lambda_n.clamp(-1.0, 1.0))
}

/// Exact expected hitting time report for a vertex set.
#[derive(Clone, Debug, Serialize)]
pub struct HittingReport {
    pub target: Vec<VertexId>,
    /// `E_pi(H_target)`: expected hitting time from stationarity.
    pub exact: f64,
    /// The eigenvalue-gap upper bound `2m / (d(S) (1 - lambda_max))`.
    pub bound: f64,
    /// `E_u(H_target)` per start vertex (0 on the target itself).
    pub per_start: Option<Vec<f64>>,
}

/// Solve the absorbing linear system for `E_u(H_target)` and average it
/// against the stationary distribution.
pub fn hitting_exact(g: &Graph, target: &VertexSet, lazy: bool) -> Result<HittingReport> {
    if target.is_empty() || target.len() >= g.n() {
        return Err(Error::BadTarget);
    }
    for v in target.iter() {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: g.n(),
            });
        }
    }
    if g.n() > DENSE_LIMIT {
        return Err(Error::TooLargeForDense {
            n: g.n(),
            limit: DENSE_LIMIT,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let p = transition_matrix(g, lazy)?;
    let pi = stationary(g)?;

    let free: Vec<VertexId> = (0..n).filter(|&v| !target.contains(v)).collect();
    let mut index_of = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        index_of[v] = i;
    }
    let k = free.len();
    let mut a = DMatrix::zeros(k, k);
    for (i, &u) in free.iter().enumerate() {
        a[(i, i)] += 1.0;
        for (j, &w) in free.iter().enumerate() {
            a[(i, j)] -= p[(u, w)];
        }
    }
    let b = DVector::from_element(k, 1.0);
    let lu = a.clone().lu();
    let h = lu.solve(&b).ok_or(Error::Disconnected)?;

    let residual = (&a * &h - &b).amax();
    let scale = h.amax().max(1.0);
    if residual > SOLVE_TOL * scale {
        return Err(Error::SolveResidual {
            residual,
            tolerance: SOLVE_TOL * scale,
        });
    }

    let mut per_start = vec![0.0; n];
    for (i, &u) in free.iter().enumerate() {
        per_start[u] = h[i];
    }
    let exact: f64 = (0..n).map(|u| pi[u] * per_start[u]).sum();
    let bound = hitting_bound(g, target, lazy)?;
    Ok(HittingReport {
        target: target.members().to_vec(),
        exact,
        bound,
        per_start: Some(per_start),
    })
}

/// `E_pi(H_v)` for every target vertex at once, through the fundamental
/// matrix: `Z_vv / pi_v` with `Z = (I - P + 1 pi)^{-1} - 1 pi`. One dense
/// inverse covers all targets, where n absorbing solves would not scale.
pub fn pi_hitting_all(g: &Graph, lazy: bool) -> Result<Vec<f64>> {
    if g.n() > DENSE_LIMIT {
        return Err(Error::TooLargeForDense {
            n: g.n(),
            limit: DENSE_LIMIT,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let p = transition_matrix(g, lazy)?;
    let pi = stationary(g)?;
    let mut a = DMatrix::identity(n, n) - p;
    for u in 0..n {
        for x in 0..n {
            a[(u, x)] += pi[x];
        }
    }
    let w = a.lu().try_inverse().ok_or(Error::Disconnected)?;
    Ok((0..n).map(|v| (w[(v, v)] - pi[v]) / pi[v]).collect())
}

/// Eigenvalue-gap upper bound on `E_pi(H_S)`: `2m / (d(S) (1 - lambda_max))`.
/// For a singleton this is exactly `1 / ((1 - lambda_max) pi_v)`.
pub fn hitting_bound(g: &Graph, target: &VertexSet, lazy: bool) -> Result<f64> {
    if target.is_empty() || target.len() >= g.n() {
        return Err(Error::BadTarget);
    }
    let gap = eigenvalue_gap(g, lazy)?;
    if gap <= GAP_TOL {
        return Err(Error::ZeroGap);
    }
    let d_s = g.set_degree(target) as f64;
    Ok(2.0 * g.m() as f64 / (d_s * gap))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MixingReport {
    /// Smallest `t` with `max_{u,x} |P_u^t(x) - pi_x| <= 1/n^3`, found by
    /// repeated squaring and bisection over the stored powers. `None` beyond
    /// the dense regime.
    pub exact: Option<u64>,
    /// The sufficient analytic value
    /// `ceil((3 ln n + 0.5 ln max_degree) / (1 - lambda_max))`.
    pub analytic: u64,
}

/// Mixing time to sup-norm tolerance `1/n^3`.
pub fn mixing_time(g: &Graph, lazy: bool) -> Result<MixingReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.n() == 1 {
        return Ok(MixingReport {
            exact: Some(0),
            analytic: 0,
        });
    }
    let (l2, ln_) = extreme_eigenvalues(g)?;
    let (l2_c, ln_c) = if lazy {
        ((1.0 + l2) / 2.0, (1.0 + ln_) / 2.0)
    } else {
        (l2, ln_)
    };
    if l2_c >= 1.0 - GAP_TOL {
        return Err(Error::ZeroGap);
    }
    if ln_c.abs() >= 1.0 - 1e-9 {
        return Err(Error::Periodic);
    }
    let lmax = lambda_max_from_extremes(l2_c, ln_c, lazy);
    let gap = 1.0 - lmax;
    if gap <= GAP_TOL {
        return Err(Error::ZeroGap);
    }
    let n = g.n() as f64;
    let analytic = ((3.0 * n.ln() + 0.5 * (g.max_degree() as f64).ln()) / gap).ceil() as u64;

    let exact = if g.n() <= DENSE_LIMIT {
        Some(exact_mixing_search(g, lazy)?)
    } else {
        None
    };
    Ok(MixingReport { exact, analytic })
}

fn sup_distance(p_t: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = pi.len();
    let mut worst = 0.0f64;
    for u in 0..n {
        for x in 0..n {
            worst = worst.max((p_t[(u, x)] - pi[x]).abs());
        }
    }
    worst
}

fn exact_mixing_search(g: &Graph, lazy: bool) -> Result<u64> {
    let pi = stationary(g)?;
    let p = transition_matrix(g, lazy)?;
    let tol = 1.0 / (g.n() as f64).powi(3);

    // t = 0: P^0 = I.
    if 1.0 - pi.iter().fold(f64::INFINITY, |a, &b| a.min(b)) <= tol {
        return Ok(0);
    }
    // Doubling phase: squarings[k] = P^(2^k).
    let mut squarings = vec![p.clone()];
    let mut k = 0usize;
    loop {
        if sup_distance(&squarings[k], &pi) <= tol {
            break;
        }
        if k >= 60 {
            return Err(Error::InvariantViolation(
                "mixing-time doubling search exceeded 2^60 steps".into(),
            ));
        }
        let next = &squarings[k] * &squarings[k];
        squarings.push(next);
        k += 1;
    }
    if k == 0 {
        return Ok(1);
    }
    // First crossing between 2^(k-1) (fails) and 2^k (passes).
    let power_of = |t: u64| -> DMatrix<f64> {
        let mut acc = DMatrix::identity(g.n(), g.n());
        for (bit, sq) in squarings.iter().enumerate() {
            if t & (1u64 << bit) != 0 {
                acc *= sq;
            }
        }
        acc
    };
    let (mut lo, mut hi) = (1u64 << (k - 1), 1u64 << k);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if sup_distance(&power_of(mid), &pi) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Expected first return time to `u`: `1 / pi_u`.
pub fn return_time(g: &Graph, u: VertexId) -> Result<f64> {
    if u >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: u,
            n: g.n(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let pi = stationary(g)?;
    Ok(1.0 / pi[u])
}

/// Commute time `K(u, v) = E_u(H_v) + E_v(H_u)`.
pub fn commute_time(g: &Graph, u: VertexId, v: VertexId, lazy: bool) -> Result<f64> {
    if u == v {
        return Err(Error::InvalidInput("commute time needs u != v".into()));
    }
    let to_v = hitting_exact(g, &VertexSet::singleton(v), lazy)?;
    let to_u = hitting_exact(g, &VertexSet::singleton(u), lazy)?;
    let hu = to_v.per_start.as_ref().unwrap()[u];
    let hv = to_u.per_start.as_ref().unwrap()[v];
    Ok(hu + hv)
}

/// Universal cover-time lower bound for any weighted reversible walk:
/// `(n/4) ln(n/2)`.
pub fn weighted_lower_bound(g: &Graph) -> f64 {
    cover_lower_bound(g.n())
}

/// Same bound as a function of the vertex count alone.
pub fn cover_lower_bound(n: usize) -> f64 {
    let n = n as f64;
    (n / 4.0) * (n / 2.0).ln()
}

/// Summary of the walk spectrum for one graph.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub pi: Vec<f64>,
    pub lambda_max: f64,
    pub gap: f64,
    pub lazy: bool,
    pub t_mix_exact: Option<u64>,
    pub t_mix_analytic: Option<u64>,
}

impl SpectralSummary {
    pub fn compute(g: &Graph, lazy: bool) -> Result<SpectralSummary> {
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let pi = stationary(g)?;
        let lmax = lambda_max(g, lazy)?;
        let gap = 1.0 - lmax;
        let (t_mix_exact, t_mix_analytic) = match mixing_time(g, lazy) {
            Ok(report) => (report.exact, Some(report.analytic)),
            Err(Error::Periodic | Error::ZeroGap) => (None, None),
            Err(other) => return Err(other),
        };
        Ok(SpectralSummary {
            pi,
            lambda_max: lmax,
            gap,
            lazy,
            t_mix_exact,
            t_mix_analytic,
        })
    }
}
