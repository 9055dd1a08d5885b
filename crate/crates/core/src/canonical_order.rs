//! Canonical orders on perturbed periodic lattices and the reduction of bi-equivariant
//! functions to canonically ordered arrows.

use crate::galgebra::{ordered_near, GFunction};
use crate::pattern::{dist, Pattern};
use crate::perm;
use crate::{Error, Result, C64};
use std::collections::HashMap;
use std::sync::Arc;

/// The bijection `l_L : L → Z^d` whose graph is `{(y_n, n) : {y_n} = L ∩ B(n, ε)}`.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub pattern: Arc<Pattern>,
    pub epsilon: f64,
    labels: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl Labeling {
    pub fn label(&self, i: usize) -> &[i64] {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn point_with_label(&self, n: &[i64]) -> Option<usize> {
        self.index.get(n).copied()
    }
}

/// Labels every point by its node; every node whose ball lies in the window must hold
/// exactly one point, and every point must lie within `ε` of a node.
pub fn label_bijection(pattern: Arc<Pattern>, epsilon: f64) -> Result<Labeling> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParams(format!("need 0 < ε < 1/2, got {epsilon}")));
    }
    let mut labels = Vec::with_capacity(pattern.len());
    let mut index = HashMap::new();
    for (i, x) in pattern.points.iter().enumerate() {
        let n: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
        let node: Vec<f64> = n.iter().map(|&k| k as f64).collect();
        if dist(x, &node) >= epsilon {
            return Err(Error::NotPerturbedPeriodic(format!("point {i} is not within ε of a node")));
        }
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::NotPerturbedPeriodic(format!("two points in the ball around {n:?}")));
        }
        labels.push(n);
    }
    check_nodes_covered(&pattern, epsilon, &index)?;
    Ok(Labeling { pattern, epsilon, labels, index })
}

fn check_nodes_covered(p: &Pattern, eps: f64, index: &HashMap<Vec<i64>, usize>) -> Result<()> {
    let c = p.center();
    let inner = p.window_radius - eps;
    let lo: Vec<i64> = c.iter().map(|x| (x - inner).floor() as i64).collect();
    let hi: Vec<i64> = c.iter().map(|x| (x + inner).ceil() as i64).collect();
    let mut n = lo.clone();
    loop {
        let node: Vec<f64> = n.iter().map(|&k| k as f64).collect();
        if dist(&node, &c) + eps <= p.window_radius - p.match_tol && !index.contains_key(&n) {
            return Err(Error::NotPerturbedPeriodic(format!("empty ball around {n:?}")));
        }
        let mut k = 0;
        loop {
            if k == n.len() {
                return Ok(());
            }
            n[k] += 1;
            if n[k] <= hi[k] {
                break;
            }
            n[k] = lo[k];
            k += 1;
        }
    }
}

/// `χ̄_V` by iterated extraction of the point minimizing the labels coordinate by
/// coordinate in `index_order` (the natural order is `0, 1, …, d−1`).
pub fn canonical_order_with(labeling: &Labeling, subset: &[usize], index_order: &[usize]) -> Vec<usize> {
    let mut rest: Vec<usize> = subset.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut w = rest.clone();
        for &j in index_order {
            let m = w.iter().map(|&i| labeling.labels[i][j]).min().expect("nonempty");
            w.retain(|&i| labeling.labels[i][j] == m);
        }
        debug_assert_eq!(w.len(), 1);
        out.push(w[0]);
        rest.retain(|&i| i != w[0]);
    }
    out
}

pub fn canonical_order(labeling: &Labeling, subset: &[usize]) -> Vec<usize> {
    let natural: Vec<usize> = (0..labeling.pattern.dim).collect();
    canonical_order_with(labeling, subset, &natural)
}

pub fn is_canonical(labeling: &Labeling, order: &[usize]) -> bool {
    canonical_order(labeling, order) == order
}

/// `Φ(f)(ξ̄,ζ̄) = N! f(ξ̄,ζ̄)` on canonically ordered arrows, zero elsewhere.
pub fn reduce_function(f: &GFunction, labeling: Arc<Labeling>) -> GFunction {
    let f = f.clone();
    let nf = perm::factorial(f.arity()) as f64;
    GFunction::kernel(f.arity(), f.range(), move |p, x, z| {
        if is_canonical(&labeling, x) && is_canonical(&labeling, z) {
            f.eval(p, x, z) * nf
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `Φ⁻¹(f̄)(ξ,ζ) = (1/N!) (−1)^{χ_ξ⁻¹∘χ̄_ξ} (−1)^{χ̄_ζ⁻¹∘χ_ζ} f̄(ξ̄,ζ̄)`.
pub fn inflate(fbar: &GFunction, labeling: Arc<Labeling>) -> GFunction {
    let fbar = fbar.clone();
    let nf = perm::factorial(fbar.arity()) as f64;
    GFunction::kernel(fbar.arity(), fbar.range(), move |p, x, z| {
        let cx = canonical_order(&labeling, x);
        let cz = canonical_order(&labeling, z);
        let s = perm::relative_sign(x, &cx) * perm::relative_sign(&cz, z);
        fbar.eval(p, &cx, &cz) * (s as f64 / nf)
    })
}

/// Convolution of the reduced groupoid: `Σ_{η̄} f̄(ξ̄,η̄) ḡ(η̄,ζ̄)` over canonical `η̄`.
pub fn reduced_convolve_at(fbar: &GFunction, gbar: &GFunction, labeling: &Labeling, xi: &[usize], zeta: &[usize]) -> Result<C64> {
    let p = &*labeling.pattern;
    if !crate::galgebra::is_interior(p, xi, fbar.range()) {
        return Err(Error::WindowExhausted(format!("{xi:?} is within {} of the window edge", fbar.range())));
    }
    let mut acc = C64::new(0.0, 0.0);
    for eta in ordered_near(p, xi[0], fbar.arity(), fbar.range()) {
        if is_canonical(labeling, &eta) {
            acc += fbar.eval(p, xi, &eta) * gbar.eval(p, &eta, zeta);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: i64) -> Arc<Pattern> {
        let mut pts = Vec::new();
        for x in -n..=n {
            for y in -n..=n {
                if ((x * x + y * y) as f64).sqrt() <= n as f64 {
                    pts.push(vec![x as f64, y as f64]);
                }
            }
        }
        Arc::new(Pattern::new(2, 0.45, 0.8, n as f64, pts).unwrap())
    }

    #[test]
    fn unperturbed_identity_labels() {
        let p = grid(3);
        let l = label_bijection(p.clone(), 0.2).unwrap();
        for (i, x) in p.points.iter().enumerate() {
            assert_eq!(l.label(i), &[x[0] as i64, x[1] as i64]);
        }
    }

    #[test]
    fn hand_run_order() {
        let p = grid(3);
        let l = label_bijection(p.clone(), 0.2).unwrap();
        let a = p.find(&[0.0, 0.0]).unwrap();
        let b = p.find(&[1.0, 0.0]).unwrap();
        let c = p.find(&[0.0, 1.0]).unwrap();
        assert_eq!(canonical_order(&l, &[b, c, a]), vec![a, c, b]);
        assert_eq!(canonical_order_with(&l, &[b, c, a], &[1, 0]), vec![a, b, c]);
        assert_eq!(canonical_order(&l, &[b]), vec![b]);
    }

    #[test]
    fn missing_node_rejected() {
        let mut p = (*grid(3)).clone();
        let i = p.find(&[1.0, 1.0]).unwrap();
        p.points.remove(i);
        assert!(matches!(label_bijection(Arc::new(p), 0.2), Err(Error::NotPerturbedPeriodic(_))));
    }
}
