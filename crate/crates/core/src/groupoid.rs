//! The N-fermion groupoid `𝒢_N`: arrows `(ξ, ζ)` on a common lattice with `χ_ξ(1) = 0`.

use crate::cover::{deck_transform, rebase, translate_to_point, OrderedConfig};
use crate::pattern::Pattern;
use crate::perm;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedPair {
    pub left: OrderedConfig,
    pub right: OrderedConfig,
}

impl OrderedPair {
    pub fn new(left: OrderedConfig, right: OrderedConfig) -> Result<Self> {
        if !left.same_lattice(&right) {
            return Err(Error::PatternMismatch);
        }
        Ok(OrderedPair { left, right })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidElement {
    pub pair: OrderedPair,
}

impl GroupoidElement {
    pub fn new(xi: OrderedConfig, zeta: OrderedConfig) -> Result<Self> {
        if xi.arity() != zeta.arity() {
            return Err(Error::ArityMismatch { expected: xi.arity(), got: zeta.arity() });
        }
        if xi.arity() == 0 {
            return Err(Error::InvalidParams("arrows need arity ≥ 1".into()));
        }
        if !xi.is_anchored() {
            return Err(Error::InvalidParams("χ_ξ(1) is not at the origin".into()));
        }
        Ok(GroupoidElement { pair: OrderedPair::new(xi, zeta)? })
    }

    /// The arrow with orders `xi`, `zeta` (base indices), anchored at `xi[0]`.
    pub fn from_orders(pattern: Arc<Pattern>, xi: Vec<usize>, zeta: Vec<usize>) -> Result<Self> {
        let x = OrderedConfig::anchored(pattern.clone(), xi)?;
        let z = OrderedConfig::with_shift(pattern, x.shift.clone(), zeta)?;
        Self::new(x, z)
    }

    /// `𝔱̂_{χ_ξ(1)}(ξ, ζ)` for an arbitrary pair on a common lattice.
    pub fn anchor(xi: &OrderedConfig, zeta: &OrderedConfig) -> Result<Self> {
        if !xi.same_lattice(zeta) {
            return Err(Error::PatternMismatch);
        }
        let x = translate_to_point(xi, 0)?;
        let z = rebase(zeta, &x);
        Self::new(x, z)
    }

    pub fn xi(&self) -> &OrderedConfig {
        &self.pair.left
    }

    pub fn zeta(&self) -> &OrderedConfig {
        &self.pair.right
    }

    pub fn arity(&self) -> usize {
        self.pair.left.arity()
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pair.left.pattern
    }

    /// Index key `(χ_ξ, χ_ζ)`; the anchor makes the lattice implicit.
    pub fn key(&self) -> (Vec<usize>, Vec<usize>) {
        (self.pair.left.order.clone(), self.pair.right.order.clone())
    }

    pub fn is_unit(&self) -> bool {
        self.pair.left.order == self.pair.right.order
    }

    /// Diameter of `V_ξ ∪ V_ζ`.
    pub fn diameter(&self) -> f64 {
        let p = self.pattern();
        let pts: Vec<&[f64]> = self.pair.left.order.iter().chain(&self.pair.right.order).map(|&i| p.points[i].as_slice()).collect();
        crate::pattern::diameter(pts)
    }
}

/// `(ξ, ζ)⁻¹ = 𝔱̂_{χ_ζ(1)}(ζ, ξ)`.
pub fn inverse(g: &GroupoidElement) -> Result<GroupoidElement> {
    GroupoidElement::anchor(g.zeta(), g.xi())
}

/// `(ξ, ζ) · 𝔱̂_{χ_ζ(1)}(ζ, ζ') = (ξ, ζ')`.
pub fn compose(g1: &GroupoidElement, g2: &GroupoidElement) -> Result<GroupoidElement> {
    if g1.arity() != g2.arity() {
        return Err(Error::ArityMismatch { expected: g1.arity(), got: g2.arity() });
    }
    if source(g1)? != range(g2) {
        return Err(Error::SourceRangeMismatch);
    }
    GroupoidElement::new(g1.xi().clone(), rebase(g2.zeta(), g1.xi()))
}

/// `𝔯(ξ, ζ) = (ξ, ξ)`.
pub fn range(g: &GroupoidElement) -> GroupoidElement {
    GroupoidElement { pair: OrderedPair { left: g.xi().clone(), right: g.xi().clone() } }
}

/// `𝔰(ξ, ζ) = 𝔱̂_{χ_ζ(1)}(ζ, ζ)`.
pub fn source(g: &GroupoidElement) -> Result<GroupoidElement> {
    GroupoidElement::anchor(g.zeta(), g.zeta())
}

pub fn unit(xi: &OrderedConfig) -> Result<GroupoidElement> {
    GroupoidElement::anchor(xi, xi)
}

/// `s₁ · (ξ, ζ) · s₂ = 𝔱̂_{χ_ξ∘s₁⁻¹(1)}(Λ_{s₁}ξ, Λ_{s₂⁻¹}ζ)`.
pub fn two_action(s1: &[usize], g: &GroupoidElement, s2: &[usize]) -> Result<GroupoidElement> {
    if s1.len() != g.arity() {
        return Err(Error::ArityMismatch { expected: g.arity(), got: s1.len() });
    }
    if s2.len() != g.arity() {
        return Err(Error::ArityMismatch { expected: g.arity(), got: s2.len() });
    }
    let x = deck_transform(g.xi(), s1)?;
    let z = deck_transform(g.zeta(), &perm::inverse(s2))?;
    GroupoidElement::anchor(&x, &z)
}

/// `τ_s(ξ) = 𝔱̂_{χ_ξ∘s⁻¹(1)}(Λ_s(ξ), ξ)` on a unit `(ξ, ξ)`.
pub fn tau(s: &[usize], unit: &GroupoidElement) -> Result<GroupoidElement> {
    if !unit.is_unit() {
        return Err(Error::InvalidParams("τ_s is evaluated on units".into()));
    }
    two_action(s, unit, &perm::identity(unit.arity()))
}

/// Product of bisections: `(b₁·b₂)(u) = b₁(𝔯(b₂(u))) · b₂(u)`.
pub fn bisection_product<F1, F2>(b1: F1, b2: F2, unit: &GroupoidElement) -> Result<GroupoidElement>
where
    F1: Fn(&GroupoidElement) -> Result<GroupoidElement>,
    F2: Fn(&GroupoidElement) -> Result<GroupoidElement>,
{
    let inner = b2(unit)?;
    compose(&b1(&range(&inner))?, &inner)
}

/// `𝔢(ξ₁∨ξ₂, ζ₁∨ζ₂) = ((ξ₁, ζ₁), 𝔱̂_{χ_{ξ₂}(1)}(ξ₂, ζ₂))` with `|ξ₁| = n`, `|ξ₂| = m`.
pub fn embed_morphism(g: &GroupoidElement, n: usize, m: usize) -> Result<(GroupoidElement, GroupoidElement)> {
    if n + m != g.arity() || n == 0 || m == 0 {
        return Err(Error::ArityMismatch { expected: g.arity(), got: n + m });
    }
    let split = |c: &OrderedConfig, a: usize, b: usize| OrderedConfig::with_shift(c.pattern.clone(), c.shift.clone(), c.order[a..b].to_vec());
    let (x1, x2) = (split(g.xi(), 0, n)?, split(g.xi(), n, n + m)?);
    let (z1, z2) = (split(g.zeta(), 0, n)?, split(g.zeta(), n, n + m)?);
    Ok((GroupoidElement::new(x1, z1)?, GroupoidElement::anchor(&x2, &z2)?))
}

/// An arrow `(L, x)` of `𝒢_1`, recorded by base indices: `L = base − base[from]`, `x = base[to] − base[from]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G1Arrow {
    pub from: usize,
    pub to: usize,
}

impl G1Arrow {
    pub fn compose(&self, other: &G1Arrow) -> Result<G1Arrow> {
        if self.to != other.from {
            return Err(Error::SourceRangeMismatch);
        }
        Ok(G1Arrow { from: self.from, to: other.to })
    }

    pub fn inverse(&self) -> G1Arrow {
        G1Arrow { from: self.to, to: self.from }
    }
}

/// Element `(ξ, (L, x), ζ̃)` of the blow-up groupoid.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowUpElement {
    pub xi: OrderedConfig,
    pub gamma: G1Arrow,
    pub zeta: OrderedConfig,
}

impl BlowUpElement {
    /// Blow-up compatibility: `f(ξ) = 𝔯(γ)` and `𝔰(γ) = f(ζ̃)`, with `f(L, V, χ) = (L, χ(1))`.
    pub fn is_consistent(&self) -> bool {
        self.xi.is_anchored()
            && self.zeta.is_anchored()
            && self.xi.order[0] == self.gamma.from
            && self.zeta.order[0] == self.gamma.to
    }

    pub fn compose(&self, other: &BlowUpElement) -> Result<BlowUpElement> {
        if self.zeta != other.xi {
            return Err(Error::SourceRangeMismatch);
        }
        Ok(BlowUpElement { xi: self.xi.clone(), gamma: self.gamma.compose(&other.gamma)?, zeta: other.zeta.clone() })
    }

    pub fn inverse(&self) -> BlowUpElement {
        BlowUpElement { xi: self.zeta.clone(), gamma: self.gamma.inverse(), zeta: self.xi.clone() }
    }
}

/// `(ξ, ζ) ↦ (ξ, (L_ξ, χ_ζ(1)), 𝔱_{χ_ζ(1)}(ζ))`.
pub fn blowup_iso(g: &GroupoidElement) -> Result<BlowUpElement> {
    Ok(BlowUpElement {
        xi: g.xi().clone(),
        gamma: G1Arrow { from: g.xi().order[0], to: g.zeta().order[0] },
        zeta: translate_to_point(g.zeta(), 0)?,
    })
}

pub fn blowup_inverse(b: &BlowUpElement) -> Result<GroupoidElement> {
    GroupoidElement::new(b.xi.clone(), rebase(&b.zeta, &b.xi))
}

/// A random ordered selection of `n` distinct indices from `0..m`.
pub fn random_order<R: Rng>(m: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    idx.partial_shuffle(rng, n).0.to_vec()
}

/// A random arrow whose points all lie within `radius` of some base point.
pub fn random_element<R: Rng>(pattern: &Arc<Pattern>, n: usize, radius: f64, rng: &mut R) -> Result<GroupoidElement> {
    let orders = random_orders_near(pattern, n, 2, radius, rng)?;
    GroupoidElement::from_orders(pattern.clone(), orders[0].clone(), orders[1].clone())
}

/// `count` random ordered `n`-configurations drawn from one ball of the given radius.
pub fn random_orders_near<R: Rng>(pattern: &Arc<Pattern>, n: usize, count: usize, radius: f64, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    for _ in 0..1000 {
        let c = rng.gen_range(0..pattern.len());
        let near: Vec<usize> = (0..pattern.len()).filter(|&i| crate::pattern::dist(&pattern.points[i], &pattern.points[c]) <= radius).collect();
        if near.len() >= n {
            return Ok((0..count).map(|_| random_order(near.len(), n, rng).into_iter().map(|k| near[k]).collect()).collect());
        }
    }
    Err(Error::InvalidParams(format!("no ball of radius {radius} holds {n} points")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<Pattern> {
        Arc::new(Pattern::new(1, 0.4, 0.6, n as f64, (0..n).map(|x| vec![x as f64]).collect()).unwrap())
    }

    #[test]
    fn inverse_of_explicit_element() {
        let p = chain(6);
        let g = GroupoidElement::from_orders(p.clone(), vec![0, 1], vec![2, 3]).unwrap();
        let inv = inverse(&g).unwrap();
        assert_eq!(inv.xi().points(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(inv.zeta().points(), vec![vec![-2.0], vec![-1.0]]);
        let s = source(&g).unwrap();
        assert_eq!(s.xi().points(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(s.zeta().points(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(inverse(&inv).unwrap(), g);
    }

    #[test]
    fn unit_inverse_is_itself() {
        let p = chain(4);
        let u = GroupoidElement::from_orders(p, vec![1, 2], vec![1, 2]).unwrap();
        assert_eq!(inverse(&u).unwrap(), u);
        assert_eq!(range(&u), u);
    }

    #[test]
    fn tau_explicit() {
        let p = chain(4);
        let u = GroupoidElement::from_orders(p, vec![0, 1], vec![0, 1]).unwrap();
        let t = tau(&[1, 0], &u).unwrap();
        assert_eq!(t.xi().points(), vec![vec![0.0], vec![-1.0]]);
        assert_eq!(t.zeta().points(), vec![vec![-1.0], vec![0.0]]);
        assert_eq!(source(&t).unwrap(), u);
    }

    #[test]
    fn blowup_round_trip() {
        let p = chain(6);
        let g = GroupoidElement::from_orders(p, vec![1, 4], vec![3, 2]).unwrap();
        let b = blowup_iso(&g).unwrap();
        assert!(b.is_consistent());
        assert_eq!(b.gamma, G1Arrow { from: 1, to: 3 });
        assert_eq!(b.zeta.points(), vec![vec![0.0], vec![-1.0]]);
        assert_eq!(blowup_inverse(&b).unwrap(), g);
    }

    #[test]
    fn non_composable_pair() {
        let p = chain(6);
        let g = GroupoidElement::from_orders(p.clone(), vec![0, 1], vec![2, 3]).unwrap();
        let h = GroupoidElement::from_orders(p, vec![4, 5], vec![0, 1]).unwrap();
        assert_eq!(compose(&g, &h), Err(Error::SourceRangeMismatch));
    }
}
