#![allow(dead_code)]

use delone_fermions::car_symbolic::CARElement;
use delone_fermions::pattern::Pattern;
use delone_fermions::C64;
use itertools::Itertools;
use nalgebra::DMatrix;
use std::sync::Arc;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Jordan-Wigner annihilators built from explicit Kronecker products, site 0 leftmost.
pub fn kron_annihilators(m: usize) -> Vec<DMatrix<C64>> {
    let a = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let id = DMatrix::<C64>::identity(2, 2);
    (0..m)
        .map(|x| {
            let mut op = DMatrix::<C64>::identity(1, 1);
            for y in 0..m {
                let f = if y < x { &z } else if y == x { &a } else { &id };
                op = op.kronecker(f);
            }
            op
        })
        .collect()
}

pub fn dense_word(ops: &[DMatrix<C64>], creation: &[usize], annihilation: &[usize]) -> DMatrix<C64> {
    let d = ops[0].nrows();
    let mut out = DMatrix::<C64>::identity(d, d);
    for &x in creation {
        out *= ops[x].adjoint();
    }
    for &x in annihilation.iter().rev() {
        out *= &ops[x];
    }
    out
}

pub fn dense_element(ops: &[DMatrix<C64>], e: &CARElement) -> DMatrix<C64> {
    let d = ops[0].nrows();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for ((j, k), v) in &e.terms {
        out += dense_word(ops, j, k) * *v;
    }
    out
}

/// Restriction of a full Fock matrix to the `n`-particle sector, subsets in lexicographic order.
pub fn dense_sector(full: &DMatrix<C64>, m: usize, n: usize) -> DMatrix<C64> {
    let states: Vec<usize> = (0..m).combinations(n).map(|u| u.iter().map(|&x| 1usize << (m - 1 - x)).sum()).collect();
    DMatrix::from_fn(states.len(), states.len(), |i, j| full[(states[i], states[j])])
}

pub fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn chain(n: usize) -> Arc<Pattern> {
    Arc::new(Pattern::new(1, 0.4, 0.6, n as f64, (0..n).map(|x| vec![x as f64]).collect()).unwrap())
}

/// Chain of `n` sites centred in its window, with dyadic displacements in `(−1/8, 1/8)`.
pub fn dyadic_chain(n: usize, seed: u64) -> Arc<Pattern> {
    use rand::Rng;
    let mut rng = delone_fermions::rng::seeded(seed);
    let half = (n as f64 - 1.0) / 2.0;
    let pts = (0..n).map(|x| vec![x as f64 - half + rng.gen_range(-7i32..=7) as f64 / 64.0]).collect();
    let mut p = Pattern::new(1, 0.35, 0.65, half + 0.5, pts).unwrap();
    p.match_tol = 1e-12;
    Arc::new(p)
}
