//! Points of the many-body order covers: ordered finite configurations `ξ = (L, V, χ)`.
//!
//! A configuration refers to a base [`Pattern`] together with a translation `shift`, so
//! that the lattice it lives on is `L = base − shift`. Orders are stored as lists of base
//! point indices (`order[k] = χ(k+1)`), so all combinatorics is exact integer work and a
//! translation never moves a point out of the base sample.

use crate::pattern::{dist, norm, sub, Pattern};
use crate::perm;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct OrderedConfig {
    pub pattern: Arc<Pattern>,
    pub shift: Vec<f64>,
    /// `V_ξ` as sorted base indices.
    pub subset: Vec<usize>,
    /// `χ_ξ` as base indices.
    pub order: Vec<usize>,
}

impl PartialEq for OrderedConfig {
    fn eq(&self, other: &Self) -> bool {
        self.same_lattice(other) && self.order == other.order
    }
}

impl OrderedConfig {
    pub fn new(pattern: Arc<Pattern>, order: Vec<usize>) -> Result<Self> {
        let shift = vec![0.0; pattern.dim];
        Self::with_shift(pattern, shift, order)
    }

    pub fn with_shift(pattern: Arc<Pattern>, shift: Vec<f64>, order: Vec<usize>) -> Result<Self> {
        if shift.len() != pattern.dim {
            return Err(Error::DimensionMismatch(pattern.dim, shift.len()));
        }
        if let Some(&i) = order.iter().find(|&&i| i >= pattern.len()) {
            return Err(Error::InvalidParams(format!("point index {i} out of range")));
        }
        let mut subset = order.clone();
        subset.sort_unstable();
        if subset.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("repeated point in order".into()));
        }
        Ok(OrderedConfig { pattern, shift, subset, order })
    }

    /// The configuration translated so that its first point sits at the origin.
    pub fn anchored(pattern: Arc<Pattern>, order: Vec<usize>) -> Result<Self> {
        let shift = match order.first() {
            Some(&i) => pattern.points.get(i).cloned().ok_or_else(|| Error::InvalidParams("index out of range".into()))?,
            None => vec![0.0; pattern.dim],
        };
        Self::with_shift(pattern, shift, order)
    }

    /// The arity-0 sentinel (`a_∅ = 1`).
    pub fn empty(pattern: Arc<Pattern>) -> Self {
        let shift = vec![0.0; pattern.dim];
        OrderedConfig { pattern, shift, subset: Vec::new(), order: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.order.len()
    }

    /// Coordinates of `χ(k+1)` in the lattice `L = base − shift`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        sub(&self.pattern.points[self.order[k]], &self.shift)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.arity()).map(|k| self.point(k)).collect()
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern)
            && dist(&self.shift, &other.shift) <= self.pattern.match_tol
    }

    pub fn is_anchored(&self) -> bool {
        self.arity() > 0 && norm(&self.point(0)) <= self.pattern.match_tol
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<&[f64]> = self.order.iter().map(|&i| self.pattern.points[i].as_slice()).collect();
        crate::pattern::diameter(pts)
    }

    fn check_in_window(&self) -> Result<()> {
        let c = self.pattern.center();
        let w = self.pattern.window_radius + self.pattern.match_tol;
        if let Some(&i) = self.order.iter().find(|&&i| dist(&self.pattern.points[i], &c) > w) {
            return Err(Error::WindowExhausted(format!("point {i} lies outside the window")));
        }
        if dist(&self.shift, &c) > w {
            return Err(Error::WindowExhausted("translated origin lies outside the window".into()));
        }
        Ok(())
    }
}

/// `Λ_s(ξ) = (L, V, χ ∘ s⁻¹)`.
pub fn deck_transform(xi: &OrderedConfig, s: &[usize]) -> Result<OrderedConfig> {
    if s.len() != xi.arity() {
        return Err(Error::ArityMismatch { expected: xi.arity(), got: s.len() });
    }
    if !perm::is_permutation(s) {
        return Err(Error::InvalidParams("not a permutation".into()));
    }
    let order = perm::compose(&xi.order, &perm::inverse(s));
    Ok(OrderedConfig { order, ..xi.clone() })
}

/// `𝔱̂_x(ξ) = (L − x, V − x, 𝔱_x ∘ χ)`.
pub fn translate_config(xi: &OrderedConfig, x: &[f64]) -> Result<OrderedConfig> {
    if x.len() != xi.pattern.dim {
        return Err(Error::DimensionMismatch(xi.pattern.dim, x.len()));
    }
    let out = OrderedConfig { shift: crate::pattern::add(&xi.shift, x), ..xi.clone() };
    out.check_in_window()?;
    Ok(out)
}

/// `𝔱̂_{χ(k+1)}(ξ)`, snapping the new origin exactly onto the base point.
pub fn translate_to_point(xi: &OrderedConfig, k: usize) -> Result<OrderedConfig> {
    let i = *xi.order.get(k).ok_or(Error::ArityMismatch { expected: k + 1, got: xi.arity() })?;
    let out = OrderedConfig { shift: xi.pattern.points[i].clone(), ..xi.clone() };
    out.check_in_window()?;
    Ok(out)
}

/// Moves `xi` onto the lattice of `frame` (same base, shift of `frame`).
pub fn rebase(xi: &OrderedConfig, frame: &OrderedConfig) -> OrderedConfig {
    OrderedConfig { shift: frame.shift.clone(), ..xi.clone() }
}

/// `χ_ξ ∨ χ_ζ`: lists `ξ` first, then `ζ`. `None` is the sentinel `ø` for overlapping subsets.
pub fn wedge(xi: &OrderedConfig, zeta: &OrderedConfig) -> Result<Option<OrderedConfig>> {
    if !xi.same_lattice(zeta) {
        return Err(Error::PatternMismatch);
    }
    if xi.order.iter().any(|i| zeta.subset.binary_search(i).is_ok()) {
        return Ok(None);
    }
    let mut order = xi.order.clone();
    order.extend_from_slice(&zeta.order);
    OrderedConfig::with_shift(xi.pattern.clone(), xi.shift.clone(), order).map(Some)
}

/// `ξ ∖ ζ` when `ζ ≤ ξ`, i.e. `χ_ξ = χ_ζ ∨ χ_Γ`.
pub fn leq_and_diff(zeta: &OrderedConfig, xi: &OrderedConfig) -> Option<OrderedConfig> {
    if !xi.same_lattice(zeta) || zeta.arity() > xi.arity() || xi.order[..zeta.arity()] != zeta.order[..] {
        return None;
    }
    OrderedConfig::with_shift(xi.pattern.clone(), xi.shift.clone(), xi.order[zeta.arity()..].to_vec()).ok()
}

/// The graph `{(v, v') : v' ∈ B̊(v, ε)}` as a map `i ↦ j` from `V` to `V'`.
pub fn canonical_bijection(v: &[Vec<f64>], vp: &[Vec<f64>], eps: f64, r: f64) -> Result<Vec<usize>> {
    if !(eps < r / 2.0) {
        return Err(Error::InvalidParams(format!("need ε < r/2, got ε={eps}, r={r}")));
    }
    if v.len() != vp.len() {
        return Err(Error::NotCoverNeighborhood(format!("sizes {} and {}", v.len(), vp.len())));
    }
    let mut map = Vec::with_capacity(v.len());
    let mut used = vec![false; vp.len()];
    for (i, x) in v.iter().enumerate() {
        let cands: Vec<usize> = (0..vp.len()).filter(|&j| dist(x, &vp[j]) < eps).collect();
        if cands.len() != 1 || used[cands[0]] {
            return Err(Error::NotCoverNeighborhood(format!("point {i} has {} candidates", cands.len())));
        }
        used[cands[0]] = true;
        map.push(cands[0]);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<Pattern> {
        Arc::new(Pattern::new(1, 0.4, 0.6, n as f64, (0..n).map(|x| vec![x as f64]).collect()).unwrap())
    }

    #[test]
    fn deck_transposition() {
        let p = chain(4);
        let xi = OrderedConfig::new(p, vec![1, 3]).unwrap();
        let t = deck_transform(&xi, &[1, 0]).unwrap();
        assert_eq!(t.order, vec![3, 1]);
        assert_eq!(deck_transform(&xi, &[0, 1]).unwrap(), xi);
        assert!(deck_transform(&xi, &[0]).is_err());
    }

    #[test]
    fn wedge_and_diff() {
        let p = chain(4);
        let a = OrderedConfig::new(p.clone(), vec![0]).unwrap();
        let b = OrderedConfig::new(p.clone(), vec![1]).unwrap();
        let ab = wedge(&a, &b).unwrap().unwrap();
        assert_eq!(ab.order, vec![0, 1]);
        assert!(wedge(&ab, &a).unwrap().is_none());
        let xi = OrderedConfig::new(p.clone(), vec![0, 1, 2]).unwrap();
        assert_eq!(leq_and_diff(&a, &xi).unwrap().order, vec![1, 2]);
        assert_eq!(leq_and_diff(&xi, &xi).unwrap().arity(), 0);
        assert!(leq_and_diff(&b, &xi).is_none());
    }

    #[test]
    fn anchor_property() {
        let p = chain(5);
        let xi = OrderedConfig::new(p, vec![3, 1]).unwrap();
        let t = translate_to_point(&xi, 0).unwrap();
        assert_eq!(t.point(0), vec![0.0]);
        assert_eq!(t.point(1), vec![-2.0]);
        assert_eq!(translate_config(&xi, &[0.0]).unwrap(), xi);
    }

    #[test]
    fn canonical_bijection_examples() {
        let v = vec![vec![0.0], vec![1.0]];
        assert_eq!(canonical_bijection(&v, &[vec![0.1], vec![0.9]], 0.2, 0.5).unwrap(), vec![0, 1]);
        assert_eq!(canonical_bijection(&v, &v, 0.2, 0.5).unwrap(), vec![0, 1]);
        assert!(canonical_bijection(&v, &[vec![0.3], vec![0.7]], 0.2, 0.5).is_err());
    }
}
