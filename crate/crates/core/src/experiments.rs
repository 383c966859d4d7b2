//! Multi-trial cover-time sweeps over random regular graphs.
//!
//! Every trial gets a fresh graph and an RNG stream derived from the master
//! seed and the trial's `(degree, n, index)` key, so sweeps are replayable
//! bit for bit and trials can run on a worker pool in any order. Natural
//! logarithms throughout; the growth-model fit is `cover = c * n * ln n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::generators;
use crate::processes::{CheckMode, ProcessKind, RuleKind, RunConfig, StopRule, run_process};
use crate::spectral::cover_lower_bound;

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub degrees: Vec<usize>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub process: ProcessKind,
    pub rule: RuleKind,
    pub seed: u64,
    pub stop: StopRule,
    pub max_steps: Option<u64>,
    /// Re-assert walk invariants during the sweep (debug sweeps).
    pub checks: bool,
}

impl SweepSpec {
    pub fn new(degrees: Vec<usize>, sizes: Vec<usize>) -> Self {
        SweepSpec {
            degrees,
            sizes,
            trials: 5,
            process: ProcessKind::EdgeProcess,
            rule: RuleKind::Uniform,
            seed: 1,
            stop: StopRule::VertexCover,
            max_steps: None,
            checks: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.degrees.is_empty() || self.sizes.is_empty() {
            return Err(Error::InvalidInput(
                "degrees and sizes must be nonempty".into(),
            ));
        }
        for &n in &self.sizes {
            if n == 0 {
                return Err(Error::InvalidInput("sizes must be positive".into()));
            }
            for &d in &self.degrees {
                if (n * d) % 2 != 0 || d >= n {
                    return Err(Error::InfeasibleRegular { n, r: d });
                }
            }
        }
        Ok(())
    }
}

/// Seed for one trial, stable under reordering of the grid.
pub fn trial_seed(master: u64, degree: usize, n: usize, trial: usize) -> u64 {
    let key = derive_seed(master, degree as u64);
    let key = derive_seed(key, n as u64);
    derive_seed(key, trial as u64)
}

/// One row of the per-trial table.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub degree: usize,
    pub n: usize,
    pub trial: usize,
    /// Vertex cover time (the sweep's measurement target).
    pub cover_time: Option<u64>,
    pub edge_cover_time: Option<u64>,
    pub red_steps: u64,
    pub blue_steps: u64,
    pub seed: u64,
    pub timed_out: bool,
}

/// Aggregates for one `(degree, n)` grid point.
#[derive(Clone, Debug, Serialize)]
pub struct PointSummary {
    pub degree: usize,
    pub n: usize,
    /// Mean vertex cover time over completed trials.
    pub mean: f64,
    /// Sample standard deviation (0 for a single trial).
    pub stddev: f64,
    /// `mean / n`.
    pub normalized: f64,
    pub trials: usize,
    pub timeouts: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitResult {
    /// Least-squares `c` for `cover = c * n * ln n`.
    pub c_nlogn: f64,
    /// Sum of squared errors of that model.
    pub residual_nlogn: f64,
    /// Least-squares `c` for `cover = c * n`.
    pub c_flat: f64,
    pub residual_flat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeFit {
    pub degree: usize,
    #[serde(flatten)]
    pub fit: FitResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub rows: Vec<TrialRow>,
    pub points: Vec<PointSummary>,
    /// Per-degree growth fits; absent for degrees with fewer than 3 sizes.
    pub fits: Vec<DegreeFit>,
}

impl SweepResult {
    pub fn point(&self, degree: usize, n: usize) -> Option<&PointSummary> {
        self.points
            .iter()
            .find(|p| p.degree == degree && p.n == n)
    }

    pub fn fit_for(&self, degree: usize) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.degree == degree).map(|f| &f.fit)
    }

    pub fn any_timeout(&self) -> bool {
        self.points.iter().any(|p| p.timeouts > 0)
    }
}

/// Run the sweep: for every `(degree, n)` point, `trials` runs on fresh
/// sub-seeded random regular graphs, executed on the rayon pool.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut tasks = Vec::new();
    for &degree in &spec.degrees {
        for &n in &spec.sizes {
            for trial in 0..spec.trials {
                tasks.push((degree, n, trial));
            }
        }
    }
    let mut rows: Vec<TrialRow> = tasks
        .into_par_iter()
        .map(|(degree, n, trial)| -> Result<TrialRow> {
            let seed = trial_seed(spec.seed, degree, n, trial);
            let graph_seed = derive_seed(seed, 0);
            let walk_seed = derive_seed(seed, 1);
            let g = generators::random_regular(n, degree, graph_seed)?;
            let mut cfg = RunConfig::new(0, walk_seed)
                .stop(spec.stop)
                .checks(if spec.checks {
                    CheckMode::Auto
                } else {
                    CheckMode::Off
                })
                .log_phases(false);
            cfg.max_steps = spec.max_steps;
            let rec = run_process(&g, spec.process, &spec.rule, &cfg)?;
            Ok(TrialRow {
                degree,
                n,
                trial,
                cover_time: rec.vertex_cover_time,
                edge_cover_time: rec.edge_cover_time,
                red_steps: rec.red_steps,
                blue_steps: rec.blue_steps,
                seed,
                timed_out: rec.timed_out,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.degree, r.n, r.trial));

    let mut points = Vec::new();
    for &degree in &spec.degrees {
        for &n in &spec.sizes {
            let group: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.degree == degree && r.n == n)
                .collect();
            let covered: Vec<f64> = group
                .iter()
                .filter_map(|r| match spec.stop {
                    StopRule::VertexCover => r.cover_time,
                    StopRule::EdgeCover => r.edge_cover_time,
                })
                .map(|t| t as f64)
                .collect();
            let timeouts = group.iter().filter(|r| r.timed_out).count();
            let mean = if covered.is_empty() {
                f64::NAN
            } else {
                covered.iter().sum::<f64>() / covered.len() as f64
            };
            let stddev = if covered.len() > 1 {
                let var = covered.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                    / (covered.len() - 1) as f64;
                var.sqrt()
            } else {
                0.0
            };
            points.push(PointSummary {
                degree,
                n,
                mean,
                stddev,
                normalized: mean / n as f64,
                trials: group.len(),
                timeouts,
            });
        }
    }

    let mut fits = Vec::new();
    for &degree in &spec.degrees {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.degree == degree && p.mean.is_finite())
            .map(|p| (p.n as f64, p.mean))
            .collect();
        if pts.len() >= 3 {
            fits.push(DegreeFit {
                degree,
                fit: fit(&pts)?,
            });
        }
    }

    Ok(SweepResult { rows, points, fits })
}

/// Least-squares coefficients through the origin for the two growth models
/// `cover = c * n * ln n` and `cover = c * n`, with their sums of squared
/// errors for classification.
pub fn fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let solve = |basis: &dyn Fn(f64) -> f64| {
        let sxy: f64 = points.iter().map(|&(n, y)| basis(n) * y).sum();
        let sxx: f64 = points.iter().map(|&(n, _)| basis(n).powi(2)).sum();
        let c = sxy / sxx;
        let sse: f64 = points
            .iter()
            .map(|&(n, y)| (y - c * basis(n)).powi(2))
            .sum();
        (c, sse)
    };
    let (c_nlogn, residual_nlogn) = solve(&|n| n * n.ln());
    let (c_flat, residual_flat) = solve(&|n| n);
    Ok(FitResult {
        c_nlogn,
        residual_nlogn,
        c_flat,
        residual_flat,
    })
}

/// Per-point comparison against the universal reversible-walk lower bound
/// `(n/4) ln(n/2)`.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundRow {
    pub degree: usize,
    pub n: usize,
    pub mean_cover: f64,
    pub lower_bound: f64,
    /// `mean_cover / lower_bound`; below 1 exhibits cover times no
    /// reversible walk can reach.
    pub ratio: f64,
}

pub fn compare_lower_bound(result: &SweepResult) -> Vec<LowerBoundRow> {
    result
        .points
        .iter()
        .map(|p| {
            let bound = cover_lower_bound(p.n);
            LowerBoundRow {
                degree: p.degree,
                n: p.n,
                mean_cover: p.mean,
                lower_bound: bound,
                ratio: p.mean / bound,
            }
        })
        .collect()
}

fn fmt_opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-trial CSV: `degree,n,trial,cover_time,edge_cover_time,t_R,t_B,seed`.
pub fn trials_csv(result: &SweepResult) -> String {
    let mut out = String::from("degree,n,trial,cover_time,edge_cover_time,t_R,t_B,seed\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.degree,
            r.n,
            r.trial,
            fmt_opt(r.cover_time),
            fmt_opt(r.edge_cover_time),
            r.red_steps,
            r.blue_steps,
            r.seed
        ));
    }
    out
}

/// Summary CSV: `degree,n,mean,stddev,normalized,c_nlogn,c_flat`, one row per
/// grid point with the degree's fit repeated on each row.
pub fn summary_csv(result: &SweepResult) -> String {
    let mut out = String::from("degree,n,mean,stddev,normalized,c_nlogn,c_flat\n");
    for p in &result.points {
        let fit = result.fit_for(p.degree);
        let c_nlogn = fit.map(|f| f.c_nlogn.to_string()).unwrap_or_default();
        let c_flat = fit.map(|f| f.c_flat.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.degree, p.n, p.mean, p.stddev, p.normalized, c_nlogn, c_flat
        ));
    }
    out
}

/// One parsed summary row.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub degree: usize,
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub normalized: f64,
    pub c_nlogn: Option<f64>,
    pub c_flat: Option<f64>,
}

/// Parse [`summary_csv`] output back into rows.
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "degree,n,mean,stddev,normalized,c_nlogn,c_flat" {
                return Err(Error::Parse {
                    line: 1,
                    message: "unexpected summary header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid {what}"),
            })
        };
        let parse_opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f(s, what).map(Some)
            }
        };
        rows.push(SummaryRow {
            degree: fields[0].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: "invalid degree".into(),
            })?,
            n: fields[1].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: "invalid n".into(),
            })?,
            mean: parse_f(fields[2], "mean")?,
            stddev: parse_f(fields[3], "stddev")?,
            normalized: parse_f(fields[4], "normalized")?,
            c_nlogn: parse_opt(fields[5], "c_nlogn")?,
            c_flat: parse_opt(fields[6], "c_flat")?,
        });
    }
    Ok(rows)
}

const SVG_PALETTE: [&str; 6] = [
    "#1b6ca8", "#c0392b", "#1e8449", "#7d3c98", "#b7950b", "#34495e",
];

/// Normalized cover time vs n (log-x), one polyline per degree with its
/// fitted curve dashed behind it.
pub fn svg_plot(result: &SweepResult) -> String {
    let (width, height) = (820.0, 520.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let finite: Vec<&PointSummary> = result
        .points
        .iter()
        .filter(|p| p.normalized.is_finite())
        .collect();
    let (min_n, max_n) = finite
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p.n as f64), hi.max(p.n as f64))
        });
    let max_y = finite.iter().fold(1.0f64, |hi, p| hi.max(p.normalized)) * 1.1;
    let span = (max_n.ln() - min_n.ln()).max(1e-9);
    let x_of = |n: f64| left + (n.ln() - min_n.ln()) / span * plot_w;
    let y_of = |y: f64| top + (1.0 - y / max_y) * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    // Axes.
    s.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    s.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">n (log scale)</text>\n",
        left + plot_w / 2.0,
        height - 12.0
    ));
    s.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\" \
         text-anchor=\"middle\">cover time / n</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0
    ));

    let mut sizes: Vec<usize> = finite.iter().map(|p| p.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for &n in &sizes {
        let x = x_of(n as f64);
        s.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            top + plot_h,
            top + plot_h + 4.0
        ));
        s.push_str(&format!(
            "  <text x=\"{x}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{n}</text>\n",
            top + plot_h + 16.0
        ));
    }

    let mut degrees: Vec<usize> = finite.iter().map(|p| p.degree).collect();
    degrees.sort_unstable();
    degrees.dedup();
    for (i, &degree) in degrees.iter().enumerate() {
        let color = SVG_PALETTE[i % SVG_PALETTE.len()];
        let mut pts: Vec<&&PointSummary> =
            finite.iter().filter(|p| p.degree == degree).collect();
        pts.sort_by_key(|p| p.n);

        // Fitted curve, dashed: normalized n ln n model is c ln n; the flat
        // model is the constant c. Whichever fits better is drawn.
        if let Some(f) = result.fit_for(degree) {
            let curve: Vec<String> = sizes
                .iter()
                .map(|&n| {
                    let y = if f.residual_nlogn < f.residual_flat {
                        f.c_nlogn * (n as f64).ln()
                    } else {
                        f.c_flat
                    };
                    format!("{:.2},{:.2}", x_of(n as f64), y_of(y.min(max_y)))
                })
                .collect();
            s.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-dasharray=\"6 4\" opacity=\"0.6\"/>\n",
                curve.join(" ")
            ));
        }

        let coords: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", x_of(p.n as f64), y_of(p.normalized)))
            .collect();
        s.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        for p in &pts {
            s.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                x_of(p.n as f64),
                y_of(p.normalized)
            ));
        }
        s.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">d = {degree}</text>\n",
            left + plot_w - 60.0,
            top + 16.0 * (i + 1) as f64
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        let mut spec = SweepSpec::new(vec![2], vec![8, 16, 32]);
        spec.trials = 3;
        spec.seed = 7;
        spec
    }

    #[test]
    fn cycle_sweep_is_exact_and_deterministic() {
        let spec = tiny_spec();
        let result = sweep(&spec).unwrap();
        // 2-regular connected graphs are cycles: cover time is exactly n-1.
        for p in &result.points {
            assert_eq!(p.mean, (p.n - 1) as f64);
            assert_eq!(p.stddev, 0.0);
            assert_eq!(p.timeouts, 0);
        }
        let again = sweep(&spec).unwrap();
        assert_eq!(trials_csv(&result), trials_csv(&again));
        assert_eq!(summary_csv(&result), summary_csv(&again));

        let mut other = tiny_spec();
        other.seed = 8;
        let different = sweep(&other).unwrap();
        assert_ne!(trials_csv(&result), trials_csv(&different));
    }

    #[test]
    fn fit_recovers_exact_models() {
        let pts: Vec<(f64, f64)> = [1024.0f64, 4096.0, 16384.0]
            .iter()
            .map(|&n| (n, 0.93 * n * n.ln()))
            .collect();
        let f = fit(&pts).unwrap();
        assert!((f.c_nlogn - 0.93).abs() < 1e-12);
        assert!(f.residual_nlogn < 1e-12);

        let pts: Vec<(f64, f64)> = [1024.0f64, 4096.0, 16384.0]
            .iter()
            .map(|&n| (n, 7.0 * n))
            .collect();
        let f = fit(&pts).unwrap();
        assert!((f.c_flat - 7.0).abs() < 1e-12);
        assert!(f.residual_flat < 1e-10);

        // Noisy data: both fits still come back.
        let pts = vec![(10.0, 55.0), (20.0, 260.0), (40.0, 470.0), (80.0, 1400.0)];
        let f = fit(&pts).unwrap();
        assert!(f.c_nlogn.is_finite() && f.c_flat.is_finite());

        assert!(matches!(
            fit(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn summary_round_trips() {
        let result = sweep(&tiny_spec()).unwrap();
        let text = summary_csv(&result);
        let rows = parse_summary_csv(&text).unwrap();
        assert_eq!(rows.len(), result.points.len());
        for (row, p) in rows.iter().zip(&result.points) {
            assert_eq!(row.degree, p.degree);
            assert_eq!(row.n, p.n);
            assert_eq!(row.mean, p.mean);
            assert_eq!(row.stddev, p.stddev);
            assert_eq!(row.normalized, p.normalized);
        }
        // Emitting parsed rows again is byte-identical.
        let mut re = String::from("degree,n,mean,stddev,normalized,c_nlogn,c_flat\n");
        for row in &rows {
            re.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.degree,
                row.n,
                row.mean,
                row.stddev,
                row.normalized,
                row.c_nlogn.map(|c| c.to_string()).unwrap_or_default(),
                row.c_flat.map(|c| c.to_string()).unwrap_or_default()
            ));
        }
        assert_eq!(text, re);
    }

    #[test]
    fn trial_csv_shape() {
        let result = sweep(&tiny_spec()).unwrap();
        let text = trials_csv(&result);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "degree,n,trial,cover_time,edge_cover_time,t_R,t_B,seed");
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("2,8,0,7,"));
    }

    #[test]
    fn lower_bound_table() {
        let result = sweep(&tiny_spec()).unwrap();
        let table = compare_lower_bound(&result);
        assert_eq!(table.len(), result.points.len());
        for row in &table {
            assert!((row.lower_bound - cover_lower_bound(row.n)).abs() < 1e-12);
            assert!((row.ratio - row.mean_cover / row.lower_bound).abs() < 1e-12);
        }
    }

    #[test]
    fn svg_is_emitted_with_all_series() {
        let result = sweep(&tiny_spec()).unwrap();
        let svg = svg_plot(&result);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("d = 2"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = tiny_spec();
        spec.trials = 0;
        assert!(sweep(&spec).is_err());

        let mut spec = tiny_spec();
        spec.sizes = vec![9];
        spec.degrees = vec![3]; // odd product
        assert!(matches!(
            sweep(&spec),
            Err(Error::InfeasibleRegular { n: 9, r: 3 })
        ));
    }

    #[test]
    fn timeouts_are_flagged_not_fatal() {
        let mut spec = tiny_spec();
        spec.max_steps = Some(3);
        let result = sweep(&spec).unwrap();
        assert!(result.any_timeout());
        for p in &result.points {
            assert_eq!(p.timeouts, p.trials);
        }
    }
}
