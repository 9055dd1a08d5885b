//! The groupoid convolution algebra on finite arrow samples.
//!
//! Arrows of `𝒢_N` over a windowed lattice are pairs of ordered `N`-configurations on the
//! base pattern, anchored at the first point of the left entry; they are keyed by their two
//! index orders. The range fiber of `(ξ,ζ)` is `{(ξ,η)}` and `(ξ,η)⁻¹(ξ,ζ) = (η,ζ)`, so
//!
//! `(f∗g)(ξ,ζ) = Σ_η f(ξ,η) g(η,ζ)` over ordered `η`.
//!
//! The left regular representation is compressed to the antisymmetric sector,
//! `π(f) = (1/N!) Σ_{ξ,ζ} f(ξ,ζ) |ξ⟩⟨ζ|`, which is multiplicative on bi-equivariant
//! functions and sends a coefficient seed `q/N!` to the assembled Hamiltonian block.

use crate::fock::{frame_vector, SectorBasis, SectorOperator};
use crate::hamiltonian::{relabel_compare, BiEquivariantCoefficient, RelabelReport};
use crate::pattern::{dist, Pattern};
use crate::perm;
use crate::sparse::SparseMatrix;
use crate::{Error, Result, C64};
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub type ArrowKey = (Vec<usize>, Vec<usize>);
pub type KernelEval = Arc<dyn Fn(&Pattern, &[usize], &[usize]) -> C64 + Send + Sync>;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone)]
pub enum GFunction {
    /// Finitely supported function on arrows of one pattern.
    Table { arity: usize, range: f64, values: BTreeMap<ArrowKey, C64> },
    /// Kernel evaluator vanishing beyond arrow diameter `range`.
    Kernel { arity: usize, range: f64, eval: KernelEval },
    /// `c` times the indicator of the unit space.
    Unit { arity: usize, scale: C64 },
}

impl std::fmt::Debug for GFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GFunction::Table { arity, range, values } => write!(f, "Table(N={arity}, R={range}, {} arrows)", values.len()),
            GFunction::Kernel { arity, range, .. } => write!(f, "Kernel(N={arity}, R={range})"),
            GFunction::Unit { arity, scale } => write!(f, "Unit(N={arity}, {scale})"),
        }
    }
}

fn arrow_diameter(p: &Pattern, xi: &[usize], zeta: &[usize]) -> f64 {
    crate::pattern::diameter(xi.iter().chain(zeta).map(|&i| p.points[i].as_slice()))
}

fn check_orders(p: &Pattern, n: usize, xi: &[usize], zeta: &[usize]) -> Result<()> {
    for o in [xi, zeta] {
        if o.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: o.len() });
        }
        let set: BTreeSet<usize> = o.iter().copied().collect();
        if set.len() != n || o.iter().any(|&i| i >= p.len()) {
            return Err(Error::InvalidParams(format!("{o:?} is not an order on the lattice")));
        }
    }
    Ok(())
}

impl GFunction {
    pub fn kernel<F>(arity: usize, range: f64, f: F) -> Self
    where
        F: Fn(&Pattern, &[usize], &[usize]) -> C64 + Send + Sync + 'static,
    {
        GFunction::Kernel { arity, range, eval: Arc::new(f) }
    }

    pub fn table(pattern: &Pattern, arity: usize, entries: impl IntoIterator<Item = (ArrowKey, C64)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut range: f64 = 0.0;
        for ((xi, zeta), v) in entries {
            check_orders(pattern, arity, &xi, &zeta)?;
            range = range.max(arrow_diameter(pattern, &xi, &zeta));
            *values.entry((xi, zeta)).or_insert(ZERO) += v;
        }
        values.retain(|_, v| *v != ZERO);
        Ok(GFunction::Table { arity, range, values })
    }

    pub fn delta(pattern: &Pattern, xi: Vec<usize>, zeta: Vec<usize>, value: C64) -> Result<Self> {
        let n = xi.len();
        Self::table(pattern, n, [((xi, zeta), value)])
    }

    pub fn zero(arity: usize) -> Self {
        GFunction::Table { arity, range: 0.0, values: BTreeMap::new() }
    }

    /// Indicator of the unit space, the convolution unit.
    pub fn unit_indicator(arity: usize) -> Self {
        GFunction::Unit { arity, scale: C64::new(1.0, 0.0) }
    }

    pub fn arity(&self) -> usize {
        match self {
            GFunction::Table { arity, .. } | GFunction::Kernel { arity, .. } | GFunction::Unit { arity, .. } => *arity,
        }
    }

    pub fn range(&self) -> f64 {
        match self {
            GFunction::Table { range, .. } | GFunction::Kernel { range, .. } => *range,
            GFunction::Unit { .. } => 0.0,
        }
    }

    pub fn eval(&self, p: &Pattern, xi: &[usize], zeta: &[usize]) -> C64 {
        match self {
            GFunction::Table { values, .. } => values.get(&(xi.to_vec(), zeta.to_vec())).copied().unwrap_or(ZERO),
            GFunction::Kernel { range, eval, .. } => {
                if arrow_diameter(p, xi, zeta) > range + p.match_tol {
                    ZERO
                } else {
                    eval(p, xi, zeta)
                }
            }
            GFunction::Unit { scale, .. } => {
                if xi == zeta {
                    *scale
                } else {
                    ZERO
                }
            }
        }
    }

    pub fn eval_element(&self, g: &crate::groupoid::GroupoidElement) -> C64 {
        self.eval(g.pattern(), &g.xi().order, &g.zeta().order)
    }

    /// Lazy scalar multiple.
    pub fn scaled(&self, c: C64) -> Self {
        match self {
            GFunction::Table { arity, range, values } => {
                GFunction::Table { arity: *arity, range: *range, values: values.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
            }
            GFunction::Kernel { arity, range, eval } => {
                let e = eval.clone();
                GFunction::Kernel { arity: *arity, range: *range, eval: Arc::new(move |p, x, z| e(p, x, z) * c) }
            }
            GFunction::Unit { arity, scale } => GFunction::Unit { arity: *arity, scale: scale * c },
        }
    }

    /// Lazy sum.
    pub fn plus(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let unbounded = matches!(self, GFunction::Unit { .. }) || matches!(other, GFunction::Unit { .. });
        let range = if unbounded { f64::INFINITY } else { self.range().max(other.range()) };
        Self::kernel(self.arity(), range, move |p, x, z| a.eval(p, x, z) + b.eval(p, x, z))
    }

    /// Materializes the function on the given arrows.
    pub fn tabulate(&self, p: &Pattern, arrows: &[ArrowKey]) -> Result<GFunction> {
        Self::table(p, self.arity(), arrows.iter().map(|(x, z)| ((x.clone(), z.clone()), self.eval(p, x, z))))
    }
}

/// Ordered `n`-configurations of lattice points within `radius` of `anchor`.
pub fn ordered_near(p: &Pattern, anchor: usize, n: usize, radius: f64) -> Vec<Vec<usize>> {
    let near: Vec<usize> = (0..p.len()).filter(|&i| dist(&p.points[i], &p.points[anchor]) <= radius + p.match_tol).collect();
    near.into_iter().permutations(n).collect()
}

fn fiber_sum(f: &GFunction, g: &GFunction, p: &Pattern, xi: &[usize], zeta: &[usize]) -> C64 {
    if let GFunction::Unit { scale, .. } = f {
        return g.eval(p, xi, zeta) * scale;
    }
    if let GFunction::Unit { scale, .. } = g {
        return f.eval(p, xi, zeta) * scale;
    }
    let mut acc = ZERO;
    for eta in ordered_near(p, xi[0], f.arity(), f.range()) {
        let a = f.eval(p, xi, &eta);
        if a != ZERO {
            acc += a * g.eval(p, &eta, zeta);
        }
    }
    acc
}

/// `true` when the configuration lies `margin` inside the window.
pub fn is_interior(p: &Pattern, order: &[usize], margin: f64) -> bool {
    let c = p.center();
    order.iter().all(|&i| dist(&p.points[i], &c) <= p.window_radius - margin + p.match_tol)
}

fn check_margin(p: &Pattern, xi: &[usize], margin: f64) -> Result<()> {
    if is_interior(p, xi, margin) {
        Ok(())
    } else {
        Err(Error::WindowExhausted(format!("{xi:?} is within {margin} of the window edge")))
    }
}

/// `(f∗g)(ξ,ζ)` by the range-fiber sum; errors if the fiber leaves the window.
pub fn convolve_at(f: &GFunction, g: &GFunction, p: &Pattern, xi: &[usize], zeta: &[usize]) -> Result<C64> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), got: g.arity() });
    }
    check_orders(p, f.arity(), xi, zeta)?;
    check_margin(p, xi, f.range())?;
    Ok(fiber_sum(f, g, p, xi, zeta))
}

/// `(f∗g)(α) = Σ_{β ∈ 𝔰⁻¹(𝔰(α))} f(αβ⁻¹) g(β)`, with `β = (η,ζ)`, `αβ⁻¹ = (ξ,η)`.
pub fn convolve_at_source(f: &GFunction, g: &GFunction, p: &Pattern, xi: &[usize], zeta: &[usize]) -> Result<C64> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), got: g.arity() });
    }
    check_orders(p, f.arity(), xi, zeta)?;
    check_margin(p, zeta, g.range())?;
    let mut acc = ZERO;
    for eta in ordered_near(p, zeta[0], g.arity(), g.range()) {
        let b = g.eval(p, &eta, zeta);
        if b != ZERO {
            acc += f.eval(p, xi, &eta) * b;
        }
    }
    Ok(acc)
}

/// `f∗g` restricted to the range fiber of the unit at `unit`, as a table.
pub fn convolve(f: &GFunction, g: &GFunction, p: &Pattern, unit: &[usize]) -> Result<GFunction> {
    let reach = f.range() + g.range();
    check_margin(p, unit, reach)?;
    let entries: Vec<(ArrowKey, C64)> = ordered_near(p, unit[0], f.arity(), reach)
        .into_iter()
        .map(|zeta| {
            let v = fiber_sum(f, g, p, unit, &zeta);
            ((unit.to_vec(), zeta), v)
        })
        .collect();
    GFunction::table(p, f.arity(), entries)
}

/// Lazy window-truncated convolution `f∗g` with range `R_f + R_g`.
pub fn convolve_lazy(f: &GFunction, g: &GFunction) -> Result<GFunction> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), got: g.arity() });
    }
    let (a, b) = (f.clone(), g.clone());
    Ok(GFunction::kernel(f.arity(), f.range() + g.range(), move |p, x, z| fiber_sum(&a, &b, p, x, z)))
}

/// `f*(α) = conj f(α⁻¹)`.
pub fn involution(f: &GFunction) -> GFunction {
    match f {
        GFunction::Table { arity, range, values } => GFunction::Table {
            arity: *arity,
            range: *range,
            values: values.iter().map(|((x, z), v)| ((z.clone(), x.clone()), v.conj())).collect(),
        },
        GFunction::Kernel { arity, range, eval } => {
            let e = eval.clone();
            GFunction::Kernel { arity: *arity, range: *range, eval: Arc::new(move |p, x, z| e(p, z, x).conj()) }
        }
        GFunction::Unit { arity, scale } => GFunction::Unit { arity: *arity, scale: scale.conj() },
    }
}

/// `π(f) = (1/N!) Σ_{ξ,ζ} f(ξ,ζ) |ξ⟩⟨ζ|` on the `N`-particle sector of the pattern.
pub fn left_regular(f: &GFunction, p: &Pattern, basis: &Arc<SectorBasis>) -> Result<SectorOperator> {
    let n = f.arity();
    if basis.n != n || basis.sites != p.len() {
        return Err(Error::PatternMismatch);
    }
    let scale = 1.0 / perm::factorial(n) as f64;
    let mut m = SparseMatrix::zeros(basis.dim(), basis.dim());
    let mut put = |xi: &[usize], zeta: &[usize], v: C64| -> Result<()> {
        let (r, s1) = frame_vector(basis, xi)?;
        let (c, s2) = frame_vector(basis, zeta)?;
        m.add_entry(r, c, v * (scale * (s1 * s2) as f64));
        Ok(())
    };
    match f {
        GFunction::Table { values, .. } => {
            for ((x, z), v) in values {
                put(x, z, *v)?;
            }
        }
        GFunction::Unit { scale, .. } => {
            for i in 0..basis.dim() {
                m.add_entry(i, i, *scale);
            }
        }
        GFunction::Kernel { range, .. } => {
            let orders = perm::all(n);
            for u in &basis.states {
                let near: Vec<usize> = (0..p.len()).filter(|&i| dist(&p.points[i], &p.points[u[0]]) <= range + p.match_tol).collect();
                for v in near.into_iter().combinations(n) {
                    for s in &orders {
                        let x = perm::compose(u, s);
                        for t in &orders {
                            let z = perm::compose(&v, t);
                            let val = f.eval(p, &x, &z);
                            if val != ZERO {
                                put(&x, &z, val)?;
                            }
                        }
                    }
                }
            }
        }
    }
    m.prune();
    Ok(SectorOperator::from_matrix(basis.clone(), m))
}

fn left_orbit(xi: &[usize], zeta: &[usize], perms: &[Vec<usize>]) -> Vec<(ArrowKey, i64)> {
    let mut out = Vec::with_capacity(perms.len() * perms.len());
    for s1 in perms {
        let x = perm::compose(xi, &perm::inverse(s1));
        for s2 in perms {
            out.push(((x.clone(), perm::compose(zeta, s2)), perm::sign(s1) * perm::sign(s2)));
        }
    }
    out
}

/// `E(f)(α) = (N!)⁻² Σ_{s₁,s₂} (−1)^{s₁}(−1)^{s₂} f(s₁·α·s₂)`.
pub fn conditional_expectation(f: &GFunction) -> GFunction {
    let n = f.arity();
    let perms = Arc::new(perm::all(n));
    let norm2 = (perm::factorial(n) * perm::factorial(n)) as f64;
    match f {
        GFunction::Table { arity, range, values } => {
            let mut out: BTreeMap<ArrowKey, C64> = BTreeMap::new();
            for ((x, z), v) in values {
                // f(s₁·α·s₂) at α = s₁⁻¹·β·s₂⁻¹ picks up β with the same sign.
                for (key, s) in left_orbit(x, z, &perms) {
                    *out.entry(key).or_insert(ZERO) += v * (s as f64 / norm2);
                }
            }
            out.retain(|_, v| v.norm() > 0.0);
            GFunction::Table { arity: *arity, range: *range, values: out }
        }
        GFunction::Kernel { .. } | GFunction::Unit { .. } => {
            let range = if matches!(f, GFunction::Unit { .. }) { f64::INFINITY } else { f.range() };
            let e = f.clone();
            GFunction::Kernel {
                arity: n,
                range,
                eval: Arc::new(move |p, x, z| {
                    left_orbit(x, z, &perms).into_iter().map(|((a, b), s)| e.eval(p, &a, &b) * s as f64).sum::<C64>() / norm2
                }),
            }
        }
    }
}

/// Largest deviation from `f(s₁·α·s₂) = (−1)^{s₁} f(α) (−1)^{s₂}` over the arrows.
pub fn bi_equivariance_deviation(f: &GFunction, p: &Pattern, arrows: &[ArrowKey]) -> f64 {
    let perms = perm::all(f.arity());
    let mut worst: f64 = 0.0;
    for (x, z) in arrows {
        let base = f.eval(p, x, z);
        for ((a, b), s) in left_orbit(x, z, &perms) {
            worst = worst.max((f.eval(p, &a, &b) - base * s as f64).norm());
        }
    }
    worst
}

/// The seed `q/N!` of a coefficient, so that `π(seed) = π^N(Q)` on the arity sector.
pub fn seed_to_function(q: &BiEquivariantCoefficient) -> GFunction {
    let q = q.clone();
    let nf = perm::factorial(q.arity) as f64;
    GFunction::kernel(q.arity, q.range, move |p, x, z| q.eval_orders(p, x, z) / nf)
}

/// Compares `π_L(f)` with `π_{L−a}(f)` after relabeling, on the `N`-particle sectors of two
/// windows of radius `window` cut from `host` around `0` and `a`.
pub fn covariance_check(f: &GFunction, host: &Pattern, a: &[f64], window: f64, margin: f64) -> Result<RelabelReport> {
    if matches!(f, GFunction::Table { .. }) {
        return Err(Error::InvalidParams("covariance needs a kernel defined on every lattice".into()));
    }
    let origin = vec![0.0; host.dim];
    let l = Pattern::rewindowed(host, &origin, window)?;
    let la = Pattern::rewindowed(host, a, window)?;
    let bl = Arc::new(SectorBasis::new(l.len(), f.arity())?);
    let bla = Arc::new(SectorBasis::new(la.len(), f.arity())?);
    let pl = left_regular(f, &l, &bl)?;
    let pla = left_regular(f, &la, &bla)?;
    relabel_compare(&pl, &l, &pla, &la, a, margin)
}
