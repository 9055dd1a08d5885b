//! Bi-equivariant coefficients, many-body potentials and Galilean-invariant
//! finite-range Hamiltonians on Fock sectors.
//!
//! # Normalization
//!
//! A coefficient `q` of arity `n` stands for the CAR element
//! `Q = Σ_{J,J'} q(J↑, J'↑) a*_J(↑) a_{J'}(↑)`, one term per pair of `n`-subsets at their
//! ascending orders `↑`. Hence on the `n`-particle sector the matrix entry between
//! canonical frame vectors is exactly the kernel value. Relative to the literature
//! conventions that carry `1/n!` in front of a sum over all orders (so that
//! `π(Q) = (1/N!) Σ_{ordered ξ,ζ} q'(ξ,ζ)|ξ⟩⟨ζ|`), the dictionary is `q = n!·q'`; the
//! groupoid seed of `q` is `f = q/(N!)²` (see [`crate::galgebra::seed_to_function`]).

use crate::car_symbolic::{CARElement, LocalHamiltonian};
use crate::fock::{frame_vector, SectorBasis, SectorOperator};
use crate::groupoid::GroupoidElement;
use crate::pattern::{dist, norm, sub, Pattern};
use crate::perm::{self, sign_of_sequence};
use crate::sparse::SparseMatrix;
use crate::{Error, Result, C64};
use itertools::Itertools;
use rayon::prelude::*;
use std::collections::HashSet;
use std::sync::Arc;

/// Ordered configurations `ξ`, `ζ` in coordinates relative to the anchor `χ_ξ(1)`, with the
/// surrounding lattice available for environment-dependent kernels.
pub struct PairView<'a> {
    pub xi: &'a [Vec<f64>],
    pub zeta: &'a [Vec<f64>],
    pub pattern: &'a Pattern,
    pub origin: &'a [f64],
}

impl PairView<'_> {
    /// Lattice points within `radius` of the anchor, relative to it.
    pub fn lattice_near(&self, radius: f64) -> Vec<Vec<f64>> {
        self.pattern.points.iter().map(|p| sub(p, self.origin)).filter(|p| norm(p) <= radius).collect()
    }
}

pub type KernelFn = Arc<dyn Fn(&PairView) -> C64 + Send + Sync>;

#[derive(Clone)]
pub struct BiEquivariantCoefficient {
    pub arity: usize,
    pub range: f64,
    pub name: String,
    kernel: KernelFn,
}

impl std::fmt::Debug for BiEquivariantCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BiEquivariantCoefficient({}, n={}, R={})", self.name, self.arity, self.range)
    }
}

const SUPPORT_TOL: f64 = 1e-9;

fn same_point_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| dist(x, y) <= tol))
}

/// Sign of the order `b` relative to `a` on the same point set, by coordinate matching.
fn relative_point_sign(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> i64 {
    let rel: Vec<usize> = b.iter().map(|y| a.iter().position(|x| dist(x, y) <= tol).expect("same point set")).collect();
    perm::sign(&rel)
}

impl BiEquivariantCoefficient {
    pub fn new(arity: usize, range: f64, name: &str, kernel: KernelFn) -> Self {
        BiEquivariantCoefficient { arity, range, name: name.to_string(), kernel }
    }

    /// Evaluates on base orders, anchoring at `xi[0]`; zero outside the support ball.
    pub fn eval_orders(&self, pattern: &Pattern, xi: &[usize], zeta: &[usize]) -> C64 {
        debug_assert_eq!(xi.len(), self.arity);
        debug_assert_eq!(zeta.len(), self.arity);
        let pts: Vec<&[f64]> = xi.iter().chain(zeta).map(|&i| pattern.points[i].as_slice()).collect();
        if crate::pattern::diameter(pts) > self.range + SUPPORT_TOL {
            return C64::new(0.0, 0.0);
        }
        let origin = &pattern.points[xi[0]];
        let x: Vec<Vec<f64>> = xi.iter().map(|&i| sub(&pattern.points[i], origin)).collect();
        let z: Vec<Vec<f64>> = zeta.iter().map(|&i| sub(&pattern.points[i], origin)).collect();
        (self.kernel)(&PairView { xi: &x, zeta: &z, pattern, origin })
    }

    pub fn eval(&self, g: &GroupoidElement) -> C64 {
        self.eval_orders(g.pattern(), &g.xi().order, &g.zeta().order)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let k = self.kernel.clone();
        Self::new(self.arity, self.range, &self.name, Arc::new(move |v| k(v) * c))
    }

    pub fn zero(arity: usize) -> Self {
        Self::new(arity, 0.0, "zero", Arc::new(|_| C64::new(0.0, 0.0)))
    }

    /// One-body hopping `q(x, y) = −t` for `|y − x| = distance`.
    pub fn hopping(t: f64, distance: f64) -> Self {
        Self::new(
            1,
            distance,
            "hopping",
            Arc::new(move |v| if (norm(&v.zeta[0]) - distance).abs() <= SUPPORT_TOL { C64::new(-t, 0.0) } else { C64::new(0.0, 0.0) }),
        )
    }

    /// One-body kernel given by a function of the displacement `y − x`.
    pub fn one_body<F>(range: f64, name: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> C64 + Send + Sync + 'static,
    {
        Self::new(1, range, name, Arc::new(move |v| f(&v.zeta[0])))
    }

    /// `w_n(ξ,ζ) = (−1)^{χ_ξ⁻¹∘χ_ζ} δ_{V_ξ,V_ζ} w(d_ξ)`.
    pub fn diagonal<F>(n: usize, range: f64, w: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            n,
            range,
            "diagonal",
            Arc::new(move |v| {
                if !same_point_set(v.xi, v.zeta, SUPPORT_TOL) {
                    return C64::new(0.0, 0.0);
                }
                let d = crate::pattern::diameter(v.xi.iter().map(|p| p.as_slice()));
                C64::new(relative_point_sign(v.xi, v.zeta, SUPPORT_TOL) as f64 * w(d), 0.0)
            }),
        )
    }

    /// Pair potential `u` on pairs at distance `distance`.
    pub fn pair_diagonal(u: f64, distance: f64) -> Self {
        Self::diagonal(2, distance, move |d| if (d - distance).abs() <= SUPPORT_TOL { u } else { 0.0 })
    }

    /// Two-body exchange `q(ξ,ζ) = a (ξ₂−ξ₁)·e₁ (ζ₂−ζ₁)·e₁` inside the range: odd in each
    /// argument and real symmetric, so bi-equivariant and hermitian.
    pub fn pair_exchange(amplitude: f64, range: f64) -> Self {
        Self::new(
            2,
            range,
            "pair_exchange",
            Arc::new(move |v| C64::new(amplitude * (v.xi[1][0] - v.xi[0][0]) * (v.zeta[1][0] - v.zeta[0][0]), 0.0)),
        )
    }

    /// `q(ξ,ζ) = n! · w(χ_ξ(1),…,χ_ξ(n); χ_ζ(1),…,χ_ζ(n))`.
    pub fn from_potential(w: &ManyBodyPotential) -> Self {
        let f = w.w.clone();
        let nf = perm::factorial(w.arity) as f64;
        Self::new(w.arity, 2.0 * w.support_radius, "potential", Arc::new(move |v| f(v.xi, v.zeta) * nf))
    }

    /// `E(f)(ξ,ζ) = (n!)⁻² Σ_{s₁,s₂} (−1)^{s₁}(−1)^{s₂} f(s₁·(ξ,ζ)·s₂)` on a translation-invariant raw kernel.
    pub fn antisymmetrize(raw: KernelFn, n: usize, range: f64) -> Self {
        let perms: Vec<(Vec<usize>, i64)> = perm::all(n).into_iter().map(|p| {
            let s = perm::sign(&p);
            (p, s)
        }).collect();
        let norm2 = (perm::factorial(n) * perm::factorial(n)) as f64;
        Self::new(
            n,
            range,
            "antisymmetrized",
            Arc::new(move |v| {
                let mut acc = C64::new(0.0, 0.0);
                for (s1, e1) in &perms {
                    let inv1 = perm::inverse(s1);
                    // Λ_{s₁}ξ lists χ_ξ∘s₁⁻¹, Λ_{s₂⁻¹}ζ lists χ_ζ∘s₂; re-anchor at the new first point.
                    let x: Vec<Vec<f64>> = inv1.iter().map(|&k| v.xi[k].clone()).collect();
                    let o = x[0].clone();
                    let x: Vec<Vec<f64>> = x.iter().map(|p| sub(p, &o)).collect();
                    let origin = crate::pattern::add(v.origin, &o);
                    for (s2, e2) in &perms {
                        let z: Vec<Vec<f64>> = s2.iter().map(|&k| sub(&v.zeta[k], &o)).collect();
                        acc += raw(&PairView { xi: &x, zeta: &z, pattern: v.pattern, origin: &origin }) * (e1 * e2) as f64;
                    }
                }
                acc / norm2
            }),
        )
    }
}

/// Seed of an `n`-body potential: a translation-invariant function of `2n` points, odd
/// under each `S_n` factor and hermitian under exchanging the two blocks.
#[derive(Clone)]
pub struct ManyBodyPotential {
    pub arity: usize,
    pub support_radius: f64,
    pub w: Arc<dyn Fn(&[Vec<f64>], &[Vec<f64>]) -> C64 + Send + Sync>,
}

impl ManyBodyPotential {
    /// `w₂(x₁,x₂;x₁',x₂') = v₁(x₂−x₁) v₂(x₂'−x₁') φ(d_H({x₁,x₂},{x₁',x₂'}))`.
    pub fn two_body<V1, V2, P>(support_radius: f64, v1: V1, v2: V2, phi: P) -> Self
    where
        V1: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        V2: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ManyBodyPotential {
            arity: 2,
            support_radius,
            w: Arc::new(move |x, y| {
                let dh = crate::pattern::hausdorff(x, y, None).expect("nonempty");
                C64::new(v1(&sub(&x[1], &x[0])) * v2(&sub(&y[1], &y[0])) * phi(dh), 0.0)
            }),
        }
    }

    pub fn zero(arity: usize) -> Self {
        ManyBodyPotential { arity, support_radius: 0.0, w: Arc::new(|_, _| C64::new(0.0, 0.0)) }
    }
}

/// Largest deviation from `q(s₁·α·s₂) = (−1)^{s₁} q(α) (−1)^{s₂}` over the given arrows.
pub fn bi_equivariance_deviation(q: &BiEquivariantCoefficient, arrows: &[GroupoidElement]) -> Result<f64> {
    let perms = perm::all(q.arity);
    let mut worst: f64 = 0.0;
    for g in arrows {
        let base = q.eval(g);
        for s1 in &perms {
            for s2 in &perms {
                let h = crate::groupoid::two_action(s1, g, s2)?;
                let expect = base * (perm::sign(s1) * perm::sign(s2)) as f64;
                worst = worst.max((q.eval(&h) - expect).norm());
            }
        }
    }
    Ok(worst)
}

/// Largest deviation from `q = conj(q ∘ 𝔲)`, with `𝔲(ξ,ζ) = 𝔱̂_{χ_ζ(1)}(ζ,ξ)`.
pub fn hermiticity_deviation(q: &BiEquivariantCoefficient, arrows: &[GroupoidElement]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in arrows {
        let u = crate::groupoid::inverse(g)?;
        worst = worst.max((q.eval(g) - q.eval(&u).conj()).norm());
    }
    Ok(worst)
}

fn candidates(pattern: &Pattern, anchor: usize, range: f64, excluded: &[usize]) -> Vec<usize> {
    (0..pattern.len())
        .filter(|&i| !excluded.contains(&i) && dist(&pattern.points[i], &pattern.points[anchor]) <= range + SUPPORT_TOL)
        .collect()
}

fn check_ranges(coeffs: &[BiEquivariantCoefficient], pattern: &Pattern) -> Result<()> {
    for q in coeffs {
        if q.range > 2.0 * pattern.window_radius {
            return Err(Error::WindowExhausted(format!("range {} of {} exceeds the window", q.range, q.name)));
        }
    }
    Ok(())
}

/// `π^N(Σ Q)` on the `N`-particle sector: arity `n > N` contributes nothing, `n = N` gives
/// the kernel between canonical frame vectors, `n < N` is dressed by spectator sets `Γ`.
pub fn assemble_sector(coeffs: &[BiEquivariantCoefficient], pattern: &Pattern, basis: &Arc<SectorBasis>) -> Result<SectorOperator> {
    if basis.sites != pattern.len() {
        return Err(Error::PatternMismatch);
    }
    check_ranges(coeffs, pattern)?;
    let n_big = basis.n;
    let rows: Vec<Vec<(usize, usize, C64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|r| {
            let u = &basis.states[r];
            let mut out = Vec::new();
            for q in coeffs.iter().filter(|q| q.arity <= n_big && q.arity > 0) {
                for pos in (0..n_big).combinations(q.arity) {
                    let j: Vec<usize> = pos.iter().map(|&k| u[k]).collect();
                    let gamma: Vec<usize> = u.iter().copied().filter(|x| !j.contains(x)).collect();
                    let cand = candidates(pattern, j[0], q.range, &gamma);
                    for jp in cand.into_iter().combinations(q.arity) {
                        let v = q.eval_orders(pattern, &j, &jp);
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ket: Vec<usize> = j.iter().chain(&gamma).copied().collect();
                        let bra: Vec<usize> = jp.iter().chain(&gamma).copied().collect();
                        let s = sign_of_sequence(&ket) * sign_of_sequence(&bra);
                        let mut up = bra.clone();
                        up.sort_unstable();
                        let c = basis.row(&up).expect("subset of the lattice");
                        out.push((r, c, v * s as f64));
                    }
                }
            }
            out
        })
        .collect();
    let m = SparseMatrix::from_triplets(basis.dim(), basis.dim(), rows.into_iter().flatten());
    Ok(SectorOperator::from_matrix(basis.clone(), m))
}

/// A finite-range Hamiltonian evaluated on a windowed lattice.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub pattern: Arc<Pattern>,
    pub coeffs: Vec<BiEquivariantCoefficient>,
}

impl Hamiltonian {
    pub fn new(pattern: Arc<Pattern>, coeffs: Vec<BiEquivariantCoefficient>) -> Self {
        Hamiltonian { pattern, coeffs }
    }

    pub fn max_range(&self) -> f64 {
        self.coeffs.iter().map(|q| q.range).fold(0.0, f64::max)
    }

    fn terms_where(&self, keep: impl Fn(&[usize], &[usize]) -> bool) -> CARElement {
        let p = &self.pattern;
        let mut out = CARElement::zero(p.len());
        for q in &self.coeffs {
            for j in (0..p.len()).combinations(q.arity) {
                for jp in candidates(p, j[0], q.range, &[]).into_iter().combinations(q.arity) {
                    if !keep(&j, &jp) {
                        continue;
                    }
                    let v = q.eval_orders(p, &j, &jp);
                    if v != C64::new(0.0, 0.0) {
                        out.add_term((j.clone(), jp), v);
                    }
                }
            }
        }
        out
    }

    /// `Σ_{J,J'} q(J↑,J'↑) a*_J a_{J'}` over the whole window.
    pub fn to_car_element(&self) -> CARElement {
        self.terms_where(|_, _| true)
    }

    pub fn assemble(&self, basis: &Arc<SectorBasis>) -> Result<SectorOperator> {
        assemble_sector(&self.coeffs, &self.pattern, basis)
    }
}

impl LocalHamiltonian for Hamiltonian {
    fn sites(&self) -> usize {
        self.pattern.len()
    }

    fn truncation(&self, support: &[usize]) -> Result<CARElement> {
        let c = self.pattern.center();
        let reach = self.pattern.window_radius - self.max_range() + self.pattern.match_tol;
        if let Some(&i) = support.iter().find(|&&i| dist(&self.pattern.points[i], &c) > reach) {
            return Err(Error::WindowExhausted(format!("site {i} is within the interaction range of the window edge")));
        }
        let s: HashSet<usize> = support.iter().copied().collect();
        Ok(self.terms_where(|j, jp| j.iter().chain(jp).any(|x| s.contains(x))))
    }
}

/// `C¹` bump: `1` on `[0,1]`, `1 − 3s² + 2s³` with `s = t − 1` on `[1,2]`, `0` beyond.
pub fn bump(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let s = t - 1.0;
        1.0 - 3.0 * s * s + 2.0 * s * s * s
    }
}

/// `1_N^ε`: diagonal with entries `w(ε · diam U)`.
pub fn approximate_unit(basis: &Arc<SectorBasis>, pattern: &Pattern, epsilon: f64, profile: &dyn Fn(f64) -> f64) -> Result<SectorOperator> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams("ε must be positive".into()));
    }
    let mut m = SparseMatrix::zeros(basis.dim(), basis.dim());
    for (i, u) in basis.states.iter().enumerate() {
        let d = crate::pattern::diameter(u.iter().map(|&x| pattern.points[x].as_slice()));
        m.add_entry(i, i, C64::new(profile(epsilon * d), 0.0));
    }
    m.prune();
    Ok(SectorOperator::from_matrix(basis.clone(), m))
}

/// The derivation `i[·, π^N(Q)]` on the `N`-particle sector, with a direct combinatorial
/// evaluation on rank-one classes `|ξ⟩⟨ζ|`.
pub struct DescendedDerivation {
    pub pattern: Arc<Pattern>,
    pub coeffs: Vec<BiEquivariantCoefficient>,
    pub basis: Arc<SectorBasis>,
    pub generator: SectorOperator,
}

impl DescendedDerivation {
    pub fn new(pattern: Arc<Pattern>, coeffs: Vec<BiEquivariantCoefficient>, basis: Arc<SectorBasis>) -> Result<Self> {
        let generator = assemble_sector(&coeffs, &pattern, &basis)?;
        Ok(DescendedDerivation { pattern, coeffs, basis, generator })
    }

    /// `i[X, π^N(Q)]`.
    pub fn apply_commutator(&self, x: &SectorOperator) -> SectorOperator {
        x.commutator(&self.generator).scale(C64::new(0.0, 1.0))
    }

    /// Direct evaluation on `X = |ξ⟩⟨ζ|` by summing over all orderings:
    ///
    /// `QX = c Σ q(ξ',ζ') (−1)^{χ_ξ⁻¹∘χ_ξ̄} |ξ'∨(ξ̄∖ζ')⟩⟨ζ|` over `ζ' ≤ ξ̄`, `V_ξ̄ = V_ξ`, and
    /// `XQ = c Σ q(ξ',ζ') (−1)^{χ_ζ⁻¹∘χ_ζ̄} |ξ⟩⟨ζ'∨(ζ̄∖ξ')|` over `ξ' ≤ ζ̄`, `V_ζ̄ = V_ζ`,
    /// with `c = 1/((n!)²(N−n)!)`; the result is `i(XQ − QX)`.
    pub fn apply_direct(&self, xi: &[usize], zeta: &[usize]) -> Result<SectorOperator> {
        let big_n = self.basis.n;
        if xi.len() != big_n || zeta.len() != big_n {
            return Err(Error::ArityMismatch { expected: big_n, got: xi.len() });
        }
        let p = &*self.pattern;
        let d = self.basis.dim();
        let mut qx = SparseMatrix::zeros(d, d);
        let mut xq = SparseMatrix::zeros(d, d);
        let (cz, tz) = frame_vector(&self.basis, zeta)?;
        let (cx, tx) = frame_vector(&self.basis, xi)?;
        for q in self.coeffs.iter().filter(|q| q.arity <= big_n && q.arity > 0) {
            let n = q.arity;
            let c = 1.0 / (perm::factorial(n).pow(2) * perm::factorial(big_n - n)) as f64;
            for zp in xi.iter().copied().permutations(n) {
                let rest_set: Vec<usize> = xi.iter().copied().filter(|x| !zp.contains(x)).collect();
                let cand = candidates(p, zp[0], q.range, &[]);
                for rest in rest_set.iter().copied().permutations(big_n - n) {
                    let bar: Vec<usize> = zp.iter().chain(&rest).copied().collect();
                    let sgn = perm::relative_sign(xi, &bar);
                    for xp in cand.iter().copied().permutations(n) {
                        if xp.iter().any(|x| rest.contains(x)) {
                            continue;
                        }
                        let v = q.eval_orders(p, &xp, &zp);
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ket: Vec<usize> = xp.iter().chain(&rest).copied().collect();
                        let (r, s) = frame_vector(&self.basis, &ket)?;
                        qx.add_entry(r, cz, v * (c * (sgn * s * tz) as f64));
                    }
                }
            }
            for xp in zeta.iter().copied().permutations(n) {
                let rest_set: Vec<usize> = zeta.iter().copied().filter(|x| !xp.contains(x)).collect();
                let cand = candidates(p, xp[0], q.range, &[]);
                for rest in rest_set.iter().copied().permutations(big_n - n) {
                    let bar: Vec<usize> = xp.iter().chain(&rest).copied().collect();
                    let sgn = perm::relative_sign(zeta, &bar);
                    for zp in cand.iter().copied().permutations(n) {
                        if zp.iter().any(|x| rest.contains(x)) {
                            continue;
                        }
                        let v = q.eval_orders(p, &xp, &zp);
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let bra: Vec<usize> = zp.iter().chain(&rest).copied().collect();
                        let (col, s) = frame_vector(&self.basis, &bra)?;
                        xq.add_entry(cx, col, v * (c * (sgn * s * tx) as f64));
                    }
                }
            }
        }
        let out = xq.sub(&qx).scale(C64::new(0.0, 1.0));
        Ok(SectorOperator::from_matrix(self.basis.clone(), out))
    }
}

/// Result of comparing sector matrices on `L` and on `L − a` under `x ↦ x − a`.
#[derive(Clone, Debug, PartialEq)]
pub struct RelabelReport {
    pub max_deviation: f64,
    pub compared_states: usize,
    pub compared_nonzero: usize,
}

/// Compares `π_L` and `π_{L−a}` on the states whose points stay `margin` inside both windows.
pub fn relabel_compare(
    op_l: &SectorOperator,
    l: &Pattern,
    op_la: &SectorOperator,
    la: &Pattern,
    a: &[f64],
    margin: f64,
) -> Result<RelabelReport> {
    let bl = &op_l.basis;
    let bla = &op_la.basis;
    let inner = |p: &Pattern, x: &[f64]| norm(&sub(x, &p.center())) <= p.window_radius - margin + p.match_tol;
    let mut map: Vec<Option<usize>> = Vec::with_capacity(l.len());
    for x in &l.points {
        let y = sub(x, a);
        map.push(if inner(l, x) && inner(la, &y) { la.find(&y) } else { None });
    }
    let mut states: Vec<(usize, usize)> = Vec::new();
    for (i, u) in bl.states.iter().enumerate() {
        let img: Option<Vec<usize>> = u.iter().map(|&x| map[x]).collect();
        if let Some(img) = img {
            let mut sorted = img.clone();
            sorted.sort_unstable();
            // A relabeling that reorders points changes the frame sign of the image state.
            let s = sign_of_sequence(&img);
            let j = bla.row(&sorted).ok_or_else(|| Error::InvalidParams("image state missing".into()))?;
            states.push((i, j * 2 + usize::from(s < 0)));
        }
    }
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for &(i, jj) in &states {
        for &(k, ll) in &states {
            let (j, sj) = (jj / 2, if jj % 2 == 1 { -1.0 } else { 1.0 });
            let (l2, sl) = (ll / 2, if ll % 2 == 1 { -1.0 } else { 1.0 });
            let v1 = op_l.matrix.get(i, k);
            let v2 = op_la.matrix.get(j, l2) * (sj * sl);
            if v1 != C64::new(0.0, 0.0) {
                nonzero += 1;
            }
            worst = worst.max((v1 - v2).norm());
        }
    }
    Ok(RelabelReport { max_deviation: worst, compared_states: states.len(), compared_nonzero: nonzero })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{generate, PatternKind};

    fn chain(n: usize) -> Arc<Pattern> {
        Arc::new(Pattern::new(1, 0.4, 0.6, n as f64, (0..n).map(|x| vec![x as f64]).collect()).unwrap())
    }

    #[test]
    fn hopping_is_tridiagonal() {
        let p = chain(6);
        let b = Arc::new(SectorBasis::new(6, 1).unwrap());
        let h = assemble_sector(&[BiEquivariantCoefficient::hopping(1.0, 1.0)], &p, &b).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let e = if usize::abs_diff(i, j) == 1 { -1.0 } else { 0.0 };
                assert_eq!(h.matrix.get(i, j), C64::new(e, 0.0));
            }
        }
        assert!(h.hermitian);
    }

    #[test]
    fn higher_arity_vanishes() {
        let p = chain(5);
        let b = Arc::new(SectorBasis::new(5, 2).unwrap());
        let q = BiEquivariantCoefficient::diagonal(3, 3.0, |_| 1.0);
        assert!(assemble_sector(&[q], &p, &b).unwrap().matrix.is_zero());
    }

    #[test]
    fn diagonal_pair_entries() {
        let p = chain(6);
        let b = Arc::new(SectorBasis::new(6, 2).unwrap());
        let w = |d: f64| if d <= 3.0 { 10.0 - d } else { 0.0 };
        let h = assemble_sector(&[BiEquivariantCoefficient::diagonal(2, 3.0, w)], &p, &b).unwrap();
        for (i, s) in b.states.iter().enumerate() {
            assert_eq!(h.matrix.get(i, i), C64::new(w((s[1] - s[0]) as f64), 0.0));
        }
        assert_eq!(h.matrix.nnz(), b.states.iter().filter(|s| s[1] - s[0] <= 3).count());
    }

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(2.5), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=300 {
            let v = bump(k as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn antisymmetrize_kills_even_kernel() {
        let p = Arc::new(generate(&PatternKind::Periodic { dim: 1 }, 4.0, 0).unwrap());
        let even: KernelFn = Arc::new(|v| C64::new(1.0 + v.zeta[0][0].abs() + v.zeta[1][0].abs(), 0.0));
        let q = BiEquivariantCoefficient::antisymmetrize(even, 2, 3.0);
        let g = GroupoidElement::from_orders(p, vec![3, 4], vec![5, 2]).unwrap();
        assert_eq!(q.eval(&g), C64::new(0.0, 0.0));
    }
}
