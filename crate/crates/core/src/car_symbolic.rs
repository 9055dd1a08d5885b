//! Exact CAR algebra on a finite set of sites.
//!
//! Elements are stored in normal-ordered form `Σ c_{J,K} a*_J a_K` with one key per
//! pair of subsets, both listed in ascending site order. With `J = (j₁<…<jₙ)` and
//! `K = (k₁<…<k_m)` the key stands for `a*_{j₁}⋯a*_{jₙ} a_{k_m}⋯a_{k₁}`, i.e.
//! `a_J(χ)* a_K(χ')` at the ascending orders. Any other ordering folds to a sign.

use crate::perm::sign_of_sequence;
use crate::{Error, Result, C64};
use std::collections::BTreeMap;

pub type Key = (Vec<usize>, Vec<usize>);

/// `a_J(χ_J)* a_{J'}(χ_{J'})` with explicit orders; an empty list is the arity-0 sentinel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub creation: Vec<usize>,
    pub annihilation: Vec<usize>,
}

impl Monomial {
    pub fn new(creation: Vec<usize>, annihilation: Vec<usize>) -> Self {
        Monomial { creation, annihilation }
    }

    pub fn from_configs(xi: &crate::cover::OrderedConfig, zeta: &crate::cover::OrderedConfig) -> Self {
        Monomial { creation: xi.order.clone(), annihilation: zeta.order.clone() }
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.creation.len() == self.annihilation.len()
    }

    /// Canonical key and sign, or `None` if an index repeats (the monomial vanishes).
    pub fn canonical(&self) -> Option<(Key, i64)> {
        let mut c = self.creation.clone();
        let mut a = self.annihilation.clone();
        c.sort_unstable();
        a.sort_unstable();
        if c.windows(2).any(|w| w[0] == w[1]) || a.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let s = sign_of_sequence(&self.creation) * sign_of_sequence(&self.annihilation);
        Some(((c, a), s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CARElement {
    pub sites: usize,
    pub terms: BTreeMap<Key, C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Create(usize),
    Annihilate(usize),
}

/// Normal orders a word of generators by elementary anticommutations, accumulating into `out`.
fn normal_order(word: Vec<Op>, coeff: C64, out: &mut BTreeMap<Key, C64>) {
    let mut stack = vec![(word, coeff)];
    while let Some((w, c)) = stack.pop() {
        match w.windows(2).position(|p| matches!(p, [Op::Annihilate(_), Op::Create(_)])) {
            Some(i) => {
                let (Op::Annihilate(x), Op::Create(y)) = (w[i], w[i + 1]) else { unreachable!() };
                if x == y {
                    let mut contracted = w.clone();
                    contracted.drain(i..i + 2);
                    stack.push((contracted, c));
                }
                let mut swapped = w;
                swapped.swap(i, i + 1);
                stack.push((swapped, -c));
            }
            None => {
                let creators: Vec<usize> = w.iter().filter_map(|o| if let Op::Create(x) = o { Some(*x) } else { None }).collect();
                // a_{y₁}⋯a_{y_m} is a_K at the order χ(t) = y_{m+1-t}.
                let annihilators: Vec<usize> = w.iter().rev().filter_map(|o| if let Op::Annihilate(x) = o { Some(*x) } else { None }).collect();
                if let Some((key, s)) = Monomial::new(creators, annihilators).canonical() {
                    *out.entry(key).or_insert(C64::new(0.0, 0.0)) += c * s as f64;
                }
            }
        }
    }
}

fn word(key: &Key) -> Vec<Op> {
    key.0.iter().map(|&x| Op::Create(x)).chain(key.1.iter().rev().map(|&x| Op::Annihilate(x))).collect()
}

impl CARElement {
    pub fn zero(sites: usize) -> Self {
        CARElement { sites, terms: BTreeMap::new() }
    }

    pub fn scalar(sites: usize, c: C64) -> Self {
        let mut e = Self::zero(sites);
        e.add_term((vec![], vec![]), c);
        e
    }

    pub fn one(sites: usize) -> Self {
        Self::scalar(sites, C64::new(1.0, 0.0))
    }

    pub fn monomial(sites: usize, m: &Monomial, c: C64) -> Result<Self> {
        if let Some(&x) = m.creation.iter().chain(&m.annihilation).find(|&&x| x >= sites) {
            return Err(Error::InvalidParams(format!("site {x} out of range")));
        }
        let mut e = Self::zero(sites);
        if let Some((key, s)) = m.canonical() {
            e.add_term(key, c * s as f64);
        }
        Ok(e)
    }

    pub fn create(sites: usize, x: usize) -> Self {
        Self::monomial(sites, &Monomial::new(vec![x], vec![]), C64::new(1.0, 0.0)).expect("site in range")
    }

    pub fn annihilate(sites: usize, x: usize) -> Self {
        Self::monomial(sites, &Monomial::new(vec![], vec![x]), C64::new(1.0, 0.0)).expect("site in range")
    }

    /// `n_J = a*_J a_J`.
    pub fn number(sites: usize, j: &[usize]) -> Self {
        Self::monomial(sites, &Monomial::new(j.to_vec(), j.to_vec()), C64::new(1.0, 0.0)).expect("sites in range")
    }

    pub fn add_term(&mut self, key: Key, c: C64) {
        let v = self.terms.entry(key.clone()).or_insert(C64::new(0.0, 0.0));
        *v += c;
        if *v == C64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn coefficient(&self, key: &Key) -> C64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut e = self.clone();
        for (k, &v) in &other.terms {
            e.add_term(k.clone(), v);
        }
        e
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut e = Self::zero(self.sites);
        for (k, &v) in &self.terms {
            e.add_term(k.clone(), v * s);
        }
        e
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.sites != other.sites {
            return Err(Error::PatternMismatch);
        }
        let mut out = BTreeMap::new();
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                let mut w = word(ka);
                w.extend(word(kb));
                normal_order(w, ca * cb, &mut out);
            }
        }
        out.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(CARElement { sites: self.sites, terms: out })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.multiply(other)?.sub(&other.multiply(self)?))
    }

    /// `(c a*_J a_K)* = c̄ a*_K a_J`.
    pub fn star(&self) -> Self {
        let mut e = Self::zero(self.sites);
        for ((j, k), &v) in &self.terms {
            e.add_term((k.clone(), j.clone()), v.conj());
        }
        e
    }

    /// `η(A) = c_{∅,∅}`.
    pub fn vacuum_state(&self) -> C64 {
        self.coefficient(&(vec![], vec![]))
    }

    /// The tracial state: `T(a*_J a_K) = δ_{J,K} 2^{-|J|}`.
    pub fn trace_state(&self) -> C64 {
        self.terms.iter().filter(|((j, k), _)| j == k).map(|((j, _), &v)| v * 0.5f64.powi(j.len() as i32)).sum()
    }

    /// Smallest `n` carrying a nonzero `(n, n)` term, for gauge-invariant nonzero elements.
    pub fn gi_degree(&self) -> Option<usize> {
        if self.terms.keys().any(|(j, k)| j.len() != k.len()) {
            return None;
        }
        self.terms.keys().map(|(j, _)| j.len()).min()
    }

    /// Union of all sites touched by the element.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.terms.keys().flat_map(|(j, k)| j.iter().chain(k).copied()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Supplies the finite truncation of a Hamiltonian relevant to a given support.
pub trait LocalHamiltonian {
    fn sites(&self) -> usize;
    /// Every term meeting the support, or an error when its neighbourhood leaves the window.
    fn truncation(&self, support: &[usize]) -> Result<CARElement>;
}

/// `ad_H(A) = i[A, H]`.
pub fn ad<H: LocalHamiltonian + ?Sized>(h: &H, a: &CARElement) -> Result<CARElement> {
    if a.sites != h.sites() {
        return Err(Error::PatternMismatch);
    }
    let ht = h.truncation(&a.support())?;
    Ok(a.commutator(&ht)?.scale(C64::new(0.0, 1.0)))
}

/// Any element used verbatim as its own truncation.
impl LocalHamiltonian for CARElement {
    fn sites(&self) -> usize {
        self.sites
    }

    fn truncation(&self, _support: &[usize]) -> Result<CARElement> {
        Ok(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn car_relations() {
        let n = 3;
        let ax = CARElement::annihilate(n, 0);
        assert!(ax.multiply(&ax).unwrap().is_zero());
        let axs = CARElement::create(n, 0);
        let expected = CARElement::one(n).sub(&CARElement::number(n, &[0]));
        assert_eq!(ax.multiply(&axs).unwrap(), expected);
        let ays = CARElement::create(n, 2);
        let lhs = ax.multiply(&ays).unwrap();
        let rhs = ays.multiply(&ax).unwrap().scale(c(-1.0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn monomial_sign_folding() {
        let m = Monomial::new(vec![2, 1], vec![0, 3]);
        let e = CARElement::monomial(4, &m, c(1.0)).unwrap();
        assert_eq!(e.coefficient(&(vec![1, 2], vec![0, 3])), c(-1.0));
        assert!(CARElement::monomial(4, &Monomial::new(vec![1, 1], vec![]), c(1.0)).unwrap().is_zero());
    }

    #[test]
    fn states() {
        let n = 4;
        assert_eq!(CARElement::one(n).vacuum_state(), c(1.0));
        assert_eq!(CARElement::number(n, &[1]).vacuum_state(), c(0.0));
        let a = CARElement::monomial(n, &Monomial::new(vec![], vec![0, 2]), c(1.0)).unwrap();
        let b = CARElement::monomial(n, &Monomial::new(vec![0, 2], vec![]), c(1.0)).unwrap();
        assert_eq!(a.multiply(&b).unwrap().vacuum_state(), c(1.0));
        assert_eq!(CARElement::number(n, &[1]).trace_state(), c(0.5));
        assert_eq!(CARElement::number(n, &[0, 1, 3]).trace_state(), c(0.125));
    }

    #[test]
    fn star_of_monomial() {
        let m = CARElement::monomial(4, &Monomial::new(vec![3, 0], vec![1]), C64::new(0.0, 2.0)).unwrap();
        let s = m.star();
        assert_eq!(s.coefficient(&(vec![1], vec![0, 3])), C64::new(0.0, 2.0));
        assert_eq!(s.star(), m);
    }

    #[test]
    fn degrees() {
        assert_eq!(CARElement::one(3).gi_degree(), Some(0));
        let hop = CARElement::monomial(3, &Monomial::new(vec![0], vec![1]), c(1.0)).unwrap();
        assert_eq!(hop.gi_degree(), Some(1));
        assert_eq!(CARElement::create(3, 0).gi_degree(), None);
    }
}
