//! N-fermion sectors, frame vectors `|U, χ⟩ = a*_{χ(1)}⋯a*_{χ(n)}|0⟩`, sector
//! representations of gauge-invariant monomials, and the full-Fock oracle.
//!
//! The oracle works on occupation-number states `|n⟩`, `n ∈ {0,1}^{|L|}` stored as bit
//! masks, with `a*_x|n⟩ = (−1)^{Σ_{y<x} n_y}|n + e_x⟩`. It never consults the symbolic
//! normal-ordering code, so the two paths check each other.

use crate::car_symbolic::{CARElement, Key, Monomial};
use crate::perm::{self, sign_of_sequence};
use crate::sparse::SparseMatrix;
use crate::{Error, Result, C64};
use itertools::Itertools;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;

pub const ORACLE_MAX_SITES: usize = 14;

/// Canonically ordered `N`-subsets of `0..sites`, lexicographic.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    pub sites: usize,
    pub n: usize,
    pub states: Vec<Vec<usize>>,
    pub index: HashMap<Vec<usize>, usize>,
}

impl SectorBasis {
    pub fn new(sites: usize, n: usize) -> Result<Self> {
        if n > sites {
            return Err(Error::InvalidParams(format!("N = {n} exceeds {sites} sites")));
        }
        let states: Vec<Vec<usize>> = (0..sites).combinations(n).collect();
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(SectorBasis { sites, n, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn row(&self, subset: &[usize]) -> Option<usize> {
        self.index.get(subset).copied()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, s) in self.states.iter().enumerate() {
            writeln!(w, "{},{}", i, s.iter().map(|x| x.to_string()).join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorOperator {
    pub basis: Arc<SectorBasis>,
    pub matrix: SparseMatrix,
    pub hermitian: bool,
}

impl SectorOperator {
    pub fn zero(basis: Arc<SectorBasis>) -> Self {
        let d = basis.dim();
        SectorOperator { basis, matrix: SparseMatrix::zeros(d, d), hermitian: true }
    }

    pub fn identity(basis: Arc<SectorBasis>) -> Self {
        let d = basis.dim();
        SectorOperator { basis, matrix: SparseMatrix::identity(d), hermitian: true }
    }

    pub fn from_matrix(basis: Arc<SectorBasis>, matrix: SparseMatrix) -> Self {
        let hermitian = matrix.hermitian_deviation() <= 1e-12;
        SectorOperator { basis, matrix, hermitian }
    }

    fn with(&self, matrix: SparseMatrix) -> Self {
        Self::from_matrix(self.basis.clone(), matrix)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.with(self.matrix.add(&o.matrix))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.with(self.matrix.sub(&o.matrix))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.with(self.matrix.mul(&o.matrix))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with(self.matrix.scale(s))
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.matrix.adjoint())
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.matrix.max_abs_diff(&o.matrix)
    }
}

/// `|U, χ⟩ = sign · |U, ascending⟩`; returns the row of `U` and the sign `(−1)^{χ_can⁻¹∘χ}`.
pub fn frame_vector(basis: &SectorBasis, order: &[usize]) -> Result<(usize, i64)> {
    if order.len() != basis.n {
        return Err(Error::ArityMismatch { expected: basis.n, got: order.len() });
    }
    let mut u = order.to_vec();
    u.sort_unstable();
    let row = basis.row(&u).ok_or_else(|| Error::InvalidParams(format!("{order:?} is not a subset of distinct sites")))?;
    Ok((row, sign_of_sequence(order)))
}

/// `⟨U, χ | V, χ'⟩` computed from frame vectors.
pub fn scalar_product(basis: &SectorBasis, chi: &[usize], chi_p: &[usize]) -> Result<i64> {
    let (r1, s1) = frame_vector(basis, chi)?;
    let (r2, s2) = frame_vector(basis, chi_p)?;
    Ok(if r1 == r2 { s1 * s2 } else { 0 })
}

/// The rank-one class `|J, χ⟩⟨J', χ'|` on the sector of `basis`.
pub fn rank_one(basis: &Arc<SectorBasis>, chi: &[usize], chi_p: &[usize]) -> Result<SectorOperator> {
    let (r, s) = frame_vector(basis, chi)?;
    let (c, t) = frame_vector(basis, chi_p)?;
    let mut m = SparseMatrix::zeros(basis.dim(), basis.dim());
    m.add_entry(r, c, C64::new((s * t) as f64, 0.0));
    Ok(SectorOperator::from_matrix(basis.clone(), m))
}

/// Sector image of a gauge-invariant monomial `a*_J(χ) a_{J'}(χ')` with `n = |J|`:
/// zero for `n > N`, `|J,χ⟩⟨J',χ'|` for `n = N`, and
/// `Σ_Γ |J∪Γ, χ∨χ_Γ⟩⟨J'∪Γ, χ'∨χ_Γ|` over `(N−n)`-subsets `Γ` disjoint from `J ∪ J'` for `n < N`.
pub fn represent_monomial(m: &Monomial, basis: &Arc<SectorBasis>) -> Result<SectorOperator> {
    if !m.is_gauge_invariant() {
        return Err(Error::NotGaugeInvariant);
    }
    let n = m.creation.len();
    let mut out = SparseMatrix::zeros(basis.dim(), basis.dim());
    if n > basis.n || m.canonical().is_none() {
        return Ok(SectorOperator::from_matrix(basis.clone(), out));
    }
    let used: Vec<bool> = {
        let mut u = vec![false; basis.sites];
        for &x in m.creation.iter().chain(&m.annihilation) {
            u[x] = true;
        }
        u
    };
    let free: Vec<usize> = (0..basis.sites).filter(|&x| !used[x]).collect();
    for gamma in free.into_iter().combinations(basis.n - n) {
        let ket: Vec<usize> = m.creation.iter().chain(&gamma).copied().collect();
        let bra: Vec<usize> = m.annihilation.iter().chain(&gamma).copied().collect();
        let (r, s) = frame_vector(basis, &ket)?;
        let (c, t) = frame_vector(basis, &bra)?;
        out.add_entry(r, c, C64::new((s * t) as f64, 0.0));
    }
    out.prune();
    Ok(SectorOperator::from_matrix(basis.clone(), out))
}

/// Sector image of a gauge-invariant element.
pub fn represent_element(a: &CARElement, basis: &Arc<SectorBasis>) -> Result<SectorOperator> {
    let mut acc = SparseMatrix::zeros(basis.dim(), basis.dim());
    for ((j, k), &c) in &a.terms {
        let op = represent_monomial(&Monomial::new(j.clone(), k.clone()), basis)?;
        acc = acc.add(&op.matrix.scale(c));
    }
    Ok(SectorOperator::from_matrix(basis.clone(), acc))
}

fn jw_apply(state: u32, op: (usize, bool)) -> Option<(u32, i64)> {
    let (x, dagger) = op;
    let bit = 1u32 << x;
    let occupied = state & bit != 0;
    if occupied == dagger {
        return None;
    }
    let sign = if (state & (bit - 1)).count_ones() % 2 == 0 { 1 } else { -1 };
    Some((state ^ bit, sign))
}

/// Full-Fock matrix of a key `a*_{j₁}⋯a*_{jₙ} a_{k_m}⋯a_{k₁}`: operators applied right to left.
fn oracle_key(sites: usize, key: &Key, c: C64, out: &mut SparseMatrix) {
    let mut ops: Vec<(usize, bool)> = key.0.iter().map(|&x| (x, true)).collect();
    ops.extend(key.1.iter().rev().map(|&x| (x, false)));
    for col in 0..(1u32 << sites) {
        let mut state = col;
        let mut sign = 1;
        let mut alive = true;
        for &op in ops.iter().rev() {
            match jw_apply(state, op) {
                Some((s, t)) => {
                    state = s;
                    sign *= t;
                }
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if alive {
            out.add_entry(state as usize, col as usize, c * sign as f64);
        }
    }
}

/// `π_η(A)` on the `2^{|L|}`-dimensional Fock space, as a sparse matrix.
pub fn full_fock_oracle(a: &CARElement) -> Result<SparseMatrix> {
    if a.sites > ORACLE_MAX_SITES {
        return Err(Error::OracleLimit(a.sites, ORACLE_MAX_SITES));
    }
    let dim = 1usize << a.sites;
    let mut out = SparseMatrix::zeros(dim, dim);
    for (key, &c) in &a.terms {
        oracle_key(a.sites, key, c, &mut out);
    }
    out.prune();
    Ok(out)
}

/// Dense form of [`full_fock_oracle`].
pub fn full_fock_oracle_dense(a: &CARElement) -> Result<nalgebra::DMatrix<C64>> {
    Ok(full_fock_oracle(a)?.to_dense())
}

/// Restriction of a full-Fock matrix to the block of `N`-particle states.
pub fn sector_block(full: &SparseMatrix, basis: &SectorBasis) -> SparseMatrix {
    let mask_of = |s: &Vec<usize>| s.iter().fold(0usize, |m, &x| m | (1 << x));
    let pos: HashMap<usize, usize> = basis.states.iter().enumerate().map(|(i, s)| (mask_of(s), i)).collect();
    let mut out = SparseMatrix::zeros(basis.dim(), basis.dim());
    for (&(r, c), &v) in &full.entries {
        if let (Some(&i), Some(&j)) = (pos.get(&r), pos.get(&c)) {
            out.add_entry(i, j, v);
        }
    }
    out
}

/// Bi-equivariant table `F_{U,U'}(χ,χ') = ⟨U,χ|F|U',χ'⟩ / √(|U|!|U'|!)`, stored at ascending orders.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTable {
    pub basis: Arc<SectorBasis>,
    pub values: BTreeMap<(usize, usize), C64>,
}

impl SymmetricTable {
    pub fn get(&self, chi: &[usize], chi_p: &[usize]) -> Result<C64> {
        let (r, s) = frame_vector(&self.basis, chi)?;
        let (c, t) = frame_vector(&self.basis, chi_p)?;
        Ok(self.values.get(&(r, c)).copied().unwrap_or_default() * (s * t) as f64)
    }

    /// `F = Σ_{U,U'} (|U|!|U'|!)^{-1/2} Σ_{χ,χ'} F_{U,U'}(χ,χ') |U,χ⟩⟨U',χ'|`, summed over all orders.
    pub fn reconstruct(&self) -> Result<SectorOperator> {
        let n = self.basis.n;
        let norm = 1.0 / perm::factorial(n) as f64;
        let perms = perm::all(n);
        let mut m = SparseMatrix::zeros(self.basis.dim(), self.basis.dim());
        for &(r, c) in self.values.keys() {
            let (u, up) = (&self.basis.states[r], &self.basis.states[c]);
            for p in &perms {
                let chi = perm::compose(u, p);
                for q in &perms {
                    let chi_p = perm::compose(up, q);
                    let (rr, s) = frame_vector(&self.basis, &chi)?;
                    let (cc, t) = frame_vector(&self.basis, &chi_p)?;
                    m.add_entry(rr, cc, self.get(&chi, &chi_p)? * norm * (s * t) as f64);
                }
            }
        }
        m.prune();
        Ok(SectorOperator::from_matrix(self.basis.clone(), m))
    }

    /// `(FF')_{U,U'}(χ,χ') = Σ_{V,χ_V} F_{U,V}(χ,χ_V) F'_{V,U'}(χ_V,χ')`, summed over all orders `χ_V`.
    pub fn convolve(&self, other: &SymmetricTable) -> Result<SymmetricTable> {
        let n = self.basis.n;
        let perms = perm::all(n);
        let mut by_row: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
        for (&(r, c), &v) in &other.values {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut values = BTreeMap::new();
        for (&(r, k), _) in &self.values {
            let Some(row) = by_row.get(&k) else { continue };
            let u = &self.basis.states[r];
            let v = &self.basis.states[k];
            for &(c, _) in row {
                let up = &self.basis.states[c];
                let mut acc = C64::new(0.0, 0.0);
                for p in &perms {
                    let chi_v = perm::compose(v, p);
                    acc += self.get(u, &chi_v)? * other.get(&chi_v, up)?;
                }
                *values.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += acc;
            }
        }
        values.retain(|_, v: &mut C64| *v != C64::new(0.0, 0.0));
        Ok(SymmetricTable { basis: self.basis.clone(), values })
    }
}

pub fn symmetric_coefficients(f: &SectorOperator) -> SymmetricTable {
    let nf = perm::factorial(f.basis.n) as f64;
    let values = f.matrix.entries.iter().map(|(&k, &v)| (k, v / nf)).collect();
    SymmetricTable { basis: f.basis.clone(), values }
}
