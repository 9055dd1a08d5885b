//! Windowed Delone point patterns: generation, validation, truncation, Hausdorff
//! distances and the pattern metric.

use crate::rng::seeded;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

pub const DEFAULT_MATCH_TOL: f64 = 1e-9;

fn default_tol() -> f64 {
    DEFAULT_MATCH_TOL
}

/// A finite sample of a Delone set inside the ball `B(window_center, window_radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub dim: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub window_radius: f64,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub match_tol: f64,
    /// Center of the sampling window; empty means the origin.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub window_center: Vec<f64>,
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Largest pairwise distance of a finite point set (0 for fewer than two points).
pub fn diameter<'a>(pts: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let v: Vec<&[f64]> = pts.into_iter().collect();
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max(dist(v[i], v[j]));
        }
    }
    d
}

impl Pattern {
    pub fn new(dim: usize, r: f64, big_r: f64, window_radius: f64, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch(dim, p.len()));
        }
        if !(window_radius > 0.0) {
            return Err(Error::InvalidParams("window radius must be positive".into()));
        }
        Ok(Pattern { dim, r, big_r, window_radius, points, match_tol: DEFAULT_MATCH_TOL, window_center: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn center(&self) -> Vec<f64> {
        if self.window_center.is_empty() {
            vec![0.0; self.dim]
        } else {
            self.window_center.clone()
        }
    }

    /// Radius of the largest origin-centred ball contained in the window.
    pub fn origin_reach(&self) -> f64 {
        self.window_radius - norm(&self.center())
    }

    /// The translate `Λ − x`; the window moves with the points.
    pub fn translated(&self, x: &[f64]) -> Pattern {
        let mut p = self.clone();
        p.points = self.points.iter().map(|q| sub(q, x)).collect();
        p.window_center = sub(&self.center(), x);
        p
    }

    /// `(host − a) ∩ B(0, radius)`, re-windowed around the origin.
    pub fn rewindowed(host: &Pattern, a: &[f64], radius: f64) -> Result<Pattern> {
        let t = host.translated(a);
        if norm(&t.center()) + radius > host.window_radius + host.match_tol {
            return Err(Error::WindowExhausted(format!("radius {radius} around shift does not fit the host window")));
        }
        let points: Vec<Vec<f64>> = t.points.into_iter().filter(|p| norm(p) <= radius + host.match_tol).collect();
        let mut p = Pattern::new(host.dim, host.r, host.big_r, radius, points)?;
        p.match_tol = host.match_tol;
        Ok(p)
    }

    /// Index of the point within `match_tol` of `x`, if any.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| dist(p, x) <= self.match_tol)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Pattern = serde_json::from_str(s)?;
        Pattern::new(p.dim, p.r, p.big_r, p.window_radius, p.points.clone())?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().map(|e| e == "csv").unwrap_or(false) {
            return Err(Error::Parse("CSV patterns need metadata; use Pattern::read_csv".into()));
        }
        Pattern::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// One point per row, comma separated coordinates.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, big_r_meta: (f64, f64), window_radius: f64) -> Result<Self> {
        let mut points = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let p: std::result::Result<Vec<f64>, _> = t.split(',').map(|s| s.trim().parse::<f64>()).collect();
            points.push(p.map_err(|e| Error::Parse(e.to_string()))?);
        }
        let dim = points.first().map(|p| p.len()).ok_or(Error::EmptySet)?;
        Pattern::new(dim, big_r_meta.0, big_r_meta.1, window_radius, points)
    }
}

/// `Λ[ρ] = (Λ ∩ B(0,ρ)) ∪ ∂B(0,ρ)`; the sphere is kept implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPattern {
    pub points: Vec<Vec<f64>>,
    pub radius: f64,
}

pub fn truncate(p: &Pattern, rho: f64) -> Result<TruncatedPattern> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParams("truncation radius must be positive".into()));
    }
    if rho > p.origin_reach() + p.match_tol {
        return Err(Error::WindowExhausted(format!("radius {rho} exceeds window reach {}", p.origin_reach())));
    }
    let points = p.points.iter().filter(|x| norm(x) <= rho).cloned().collect();
    Ok(TruncatedPattern { points, radius: rho })
}

fn directed(a: &[Vec<f64>], b: &[Vec<f64>], sphere: Option<f64>) -> f64 {
    a.iter()
        .map(|x| {
            let to_set = b.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min);
            match sphere {
                Some(rho) => to_set.min((rho - norm(x)).abs()),
                None => to_set,
            }
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance of `A ∪ S` and `B ∪ S`, with `S = ∂B(0, ρ)` when a boundary radius is given.
///
/// Points of the sphere are at distance zero from the other set's copy of the sphere, so only
/// the point sets contribute, each through `min(d(x, other set), |ρ − |x||)`.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>], boundary_radius: Option<f64>) -> Result<f64> {
    if boundary_radius.is_none() && (a.is_empty() || b.is_empty()) {
        return Err(Error::EmptySet);
    }
    Ok(directed(a, b, boundary_radius).max(directed(b, a, boundary_radius)))
}

pub fn truncated_distance(a: &TruncatedPattern, b: &TruncatedPattern) -> Result<f64> {
    if (a.radius - b.radius).abs() > 0.0 {
        return Err(Error::InvalidParams("truncation radii differ".into()));
    }
    hausdorff(&a.points, &b.points, Some(a.radius))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub value: f64,
    /// Largest radius found to satisfy `d_H(Λ[r], Λ'[r]) < 1/r`.
    pub radius: f64,
    /// Radius up to which the two windows were compared (the smaller reach).
    pub comparison_radius: f64,
}

fn metric_condition(p1: &Pattern, p2: &Pattern, r: f64) -> Result<bool> {
    let a = truncate(p1, r)?;
    let b = truncate(p2, r)?;
    Ok(truncated_distance(&a, &b)? < 1.0 / r)
}

/// Grid approximation of `D(Λ,Λ') = inf{1/(1+r) : d_H(Λ[r],Λ'[r]) < 1/r}`.
///
/// Radii are scanned on `grid` geometrically spaced values in `[10⁻³ ρ, ρ]` with
/// `ρ` the smaller window reach; the bracket above the largest accepted radius is
/// then refined by bisection.
pub fn pattern_metric_report(p1: &Pattern, p2: &Pattern, grid: usize) -> Result<MetricReport> {
    if p1.dim != p2.dim {
        return Err(Error::DimensionMismatch(p1.dim, p2.dim));
    }
    if grid < 2 {
        return Err(Error::InvalidParams("grid must have at least two radii".into()));
    }
    let reach = p1.origin_reach().min(p2.origin_reach());
    if !(reach > 0.0) {
        return Err(Error::WindowExhausted("windows do not contain the origin".into()));
    }
    let r_min = reach * 1e-3;
    let q = (reach / r_min).powf(1.0 / (grid - 1) as f64);
    let radii: Vec<f64> = (0..grid).map(|k| if k == grid - 1 { reach } else { r_min * q.powi(k as i32) }).collect();
    let mut best: Option<usize> = None;
    for (k, &r) in radii.iter().enumerate() {
        if metric_condition(p1, p2, r)? {
            best = Some(k);
        }
    }
    let Some(k) = best else {
        return Ok(MetricReport { value: 1.0 / (1.0 + r_min / q), radius: 0.0, comparison_radius: reach });
    };
    let mut lo = radii[k];
    if k + 1 < radii.len() {
        let mut hi = radii[k + 1];
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if metric_condition(p1, p2, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(MetricReport { value: 1.0 / (1.0 + lo), radius: lo, comparison_radius: reach })
}

pub fn pattern_metric(p1: &Pattern, p2: &Pattern, grid: usize) -> Result<f64> {
    Ok(pattern_metric_report(p1, p2, grid)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Duplicate { i: usize, j: usize },
    Discreteness { i: usize, j: usize, distance: f64 },
    Density { at: Vec<f64>, nearest: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeloneReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks `r`-uniform discreteness on all pairs and `R`-relative density on a grid of
/// spacing `R/2` covering the ball of radius `window_radius − R`.
pub fn validate_delone(p: &Pattern) -> DeloneReport {
    let mut violations = Vec::new();
    let n = p.points.len();
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&p.points[i], &p.points[j]);
            if d <= p.match_tol {
                violations.push(Violation::Duplicate { i, j });
            } else if d < 2.0 * p.r {
                violations.push(Violation::Discreteness { i, j, distance: d });
            }
        }
    }
    let inner = p.window_radius - p.big_r;
    if inner >= 0.0 && p.big_r > 0.0 {
        let c = p.center();
        let h = p.big_r / 2.0;
        let steps = (inner / h).floor() as i64;
        let mut idx = vec![-steps; p.dim];
        loop {
            let x: Vec<f64> = idx.iter().zip(&c).map(|(&k, &c0)| c0 + k as f64 * h).collect();
            if dist(&x, &c) <= inner {
                let nearest = p.points.iter().map(|q| dist(q, &x)).fold(f64::INFINITY, f64::min);
                if nearest > p.big_r {
                    violations.push(Violation::Density { at: x, nearest });
                }
            }
            let mut axis = 0;
            loop {
                if axis == p.dim {
                    return DeloneReport { valid: violations.is_empty(), violations };
                }
                idx[axis] += 1;
                if idx[axis] <= steps {
                    break;
                }
                idx[axis] = -steps;
                axis += 1;
            }
        }
    }
    DeloneReport { valid: violations.is_empty(), violations }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternKind {
    Periodic { dim: usize },
    RandomDisplaced { dim: usize, lambda: f64 },
    TripletRotation { theta: f64, spacing: f64, r: f64, count: usize },
    PerturbedPeriodic { dim: usize, epsilon: f64 },
}

fn lattice_nodes(dim: usize, radius: f64) -> Vec<Vec<f64>> {
    let k = radius.floor() as i64 + 1;
    let mut out = Vec::new();
    let mut idx = vec![-k; dim];
    loop {
        out.push(idx.iter().map(|&v| v as f64).collect::<Vec<f64>>());
        let mut axis = 0;
        loop {
            if axis == dim {
                return out;
            }
            idx[axis] += 1;
            if idx[axis] <= k {
                break;
            }
            idx[axis] = -k;
            axis += 1;
        }
    }
}

fn sort_points(pts: &mut [Vec<f64>]) {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
}

/// Generates a pattern in the window `B(0, window)`.
///
/// Documented `(r, R)` per kind:
/// * `periodic(d)`: `Z^d`, `r = 0.45`, `R = √d/2 + 0.1`.
/// * `random_displaced(d, λ)`: `n + λ(ξ_n − 1/2)`, `ξ_n` uniform in `[0,1]^d`;
///   `r = 0.99(1−λ)/2`, `R = (1+λ)√d/2 + 0.1`.
/// * `perturbed_periodic(d, ε)`: `n + u_n` with `u_n` uniform in the open ball `B(0, ε)`;
///   `r = 0.99(1−2ε)/2`, `R = √d/2 + ε + 0.1`.
/// * `triplet_rotation(θ, D, r, count)`: planar row of `count` collinear triplets with
///   spacing `r`, the k-th centred at `(kD − c, 0)` and rotated by `kθ`; the row is only
///   relatively dense at the scale of its window, so `R` is the window radius.
pub fn generate(kind: &PatternKind, window: f64, seed: u64) -> Result<Pattern> {
    if !(window > 0.0) {
        return Err(Error::InvalidParams("window must be positive".into()));
    }
    let mut rng = seeded(seed);
    let in_window = |p: &Vec<f64>| norm(p) <= window + 1e-12;
    match *kind {
        PatternKind::Periodic { dim } => {
            if dim == 0 {
                return Err(Error::InvalidParams("dimension must be positive".into()));
            }
            let mut pts: Vec<Vec<f64>> = lattice_nodes(dim, window).into_iter().filter(in_window).collect();
            sort_points(&mut pts);
            Pattern::new(dim, 0.45, (dim as f64).sqrt() / 2.0 + 0.1, window, pts)
        }
        PatternKind::RandomDisplaced { dim, lambda } => {
            if dim == 0 || !(0.0..1.0).contains(&lambda) {
                return Err(Error::InvalidParams(format!("random_displaced needs 0 ≤ λ < 1, got {lambda}")));
            }
            let mut pts: Vec<Vec<f64>> = lattice_nodes(dim, window + 1.0)
                .into_iter()
                .map(|n| n.iter().map(|&c| c + lambda * (rng.gen::<f64>() - 0.5)).collect())
                .filter(in_window)
                .collect();
            sort_points(&mut pts);
            let sd = (dim as f64).sqrt();
            Pattern::new(dim, 0.99 * (1.0 - lambda) / 2.0, (1.0 + lambda) * sd / 2.0 + 0.1, window, pts)
        }
        PatternKind::PerturbedPeriodic { dim, epsilon } => {
            if dim == 0 || !(0.0..0.5).contains(&epsilon) {
                return Err(Error::InvalidParams(format!("perturbed_periodic needs 0 ≤ ε < 1/2, got {epsilon}")));
            }
            let mut pts: Vec<Vec<f64>> = lattice_nodes(dim, window + 1.0)
                .into_iter()
                .map(|n| {
                    let u = loop {
                        let u: Vec<f64> = (0..dim).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                        if norm(&u) < 1.0 {
                            break u;
                        }
                    };
                    n.iter().zip(&u).map(|(&c, &d)| c + epsilon * d).collect()
                })
                .filter(in_window)
                .collect();
            sort_points(&mut pts);
            let sd = (dim as f64).sqrt();
            Pattern::new(dim, 0.99 * (1.0 - 2.0 * epsilon) / 2.0, sd / 2.0 + epsilon + 0.1, window, pts)
        }
        PatternKind::TripletRotation { theta, spacing, r, count } => {
            if !(r > 0.0) || !(spacing > 2.0 * r) || count == 0 {
                return Err(Error::InvalidParams(format!("triplet_rotation needs D > 2r > 0, got D={spacing}, r={r}")));
            }
            let shift = (count / 2) as f64 * spacing;
            let mut pts = Vec::with_capacity(3 * count);
            for k in 0..count {
                let phi = k as f64 * theta;
                let cx = k as f64 * spacing - shift;
                for j in [-1.0, 0.0, 1.0] {
                    pts.push(vec![cx + j * r * phi.cos(), j * r * phi.sin()]);
                }
            }
            let reach = pts.iter().map(|p| norm(p)).fold(0.0, f64::max);
            let w = window.max(reach);
            // Neighbouring points of one triplet are `r` apart, so the discreteness radius is r/2.
            Pattern::new(2, 0.5 * r * 0.999, w, w, pts)
        }
    }
}
