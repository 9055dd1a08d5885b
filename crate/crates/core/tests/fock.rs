mod common;

use common::*;
use delone_fermions::car_symbolic::{CARElement, Monomial};
use delone_fermions::fock::*;
use delone_fermions::perm::binomial;
use delone_fermions::sparse::SparseMatrix;
use delone_fermions::{rng, C64};
use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use std::sync::Arc;

fn kron_frame(ops: &[DMatrix<C64>], order: &[usize]) -> DVector<C64> {
    let d = ops[0].nrows();
    let mut v = DVector::<C64>::zeros(d);
    v[0] = c(1.0);
    for &x in order.iter().rev() {
        v = ops[x].adjoint() * v;
    }
    v
}

#[test]
fn sector_dimensions() {
    for m in 1..=10 {
        for n in 0..=m {
            assert_eq!(SectorBasis::new(m, n).unwrap().dim() as u64, binomial(m, n));
        }
    }
    assert!(SectorBasis::new(3, 4).is_err());
}

#[test]
fn monomials_match_oracle_sectors_exhaustively() {
    let m = 5;
    let ops = kron_annihilators(m);
    for n in 0..=3usize {
        for cr in (0..m).permutations(n) {
            for an in (0..m).permutations(n) {
                let mono = Monomial::new(cr.clone(), an.clone());
                let full = dense_word(&ops, &cr, &an);
                for big_n in n..=m {
                    let b = Arc::new(SectorBasis::new(m, big_n).unwrap());
                    let rep = represent_monomial(&mono, &b).unwrap().matrix.to_dense();
                    assert_eq!(max_diff(&rep, &dense_sector(&full, m, big_n)), 0.0, "{cr:?} {an:?} N={big_n}");
                }
            }
        }
    }
}

#[test]
fn monomials_match_oracle_sectors_on_eight_sites() {
    let m = 8;
    let ops = kron_annihilators(m);
    let mut r = rng::seeded(12);
    for _ in 0..60 {
        let n = r.gen_range(0..=3usize);
        let mut s: Vec<usize> = (0..m).collect();
        s.shuffle(&mut r);
        let cr = s[..n].to_vec();
        s.shuffle(&mut r);
        let an = s[..n].to_vec();
        let full = dense_word(&ops, &cr, &an);
        let big_n = r.gen_range(n.max(1)..=5);
        let b = Arc::new(SectorBasis::new(m, big_n).unwrap());
        let rep = represent_monomial(&Monomial::new(cr, an), &b).unwrap().matrix.to_dense();
        assert_eq!(max_diff(&rep, &dense_sector(&full, m, big_n)), 0.0);
    }
}

#[test]
fn library_sector_block_matches() {
    let m = 6;
    let mut e = CARElement::zero(m);
    e = e.add(&CARElement::monomial(m, &Monomial::new(vec![1, 4], vec![2, 0]), C64::new(0.5, 1.0)).unwrap());
    e = e.add(&CARElement::number(m, &[3]));
    let full = full_fock_oracle(&e).unwrap();
    for n in 1..=4 {
        let b = Arc::new(SectorBasis::new(m, n).unwrap());
        assert_eq!(sector_block(&full, &b).max_abs_diff(&represent_element(&e, &b).unwrap().matrix), 0.0);
    }
}

#[test]
fn frame_sign_law_against_kronecker_vectors() {
    let m = 7;
    let ops = kron_annihilators(m);
    let mut r = rng::seeded(77);
    let mut checked = 0;
    for _ in 0..2000 {
        let n = r.gen_range(1..=4usize);
        let b = SectorBasis::new(m, n).unwrap();
        let mut s: Vec<usize> = (0..m).collect();
        s.shuffle(&mut r);
        let chi = s[..n].to_vec();
        // Half of the samples reorder the same subset.
        let chi_p = if r.gen_bool(0.5) {
            let mut t = chi.clone();
            t.shuffle(&mut r);
            t
        } else {
            s.shuffle(&mut r);
            s[..n].to_vec()
        };
        let oracle = kron_frame(&ops, &chi).dotc(&kron_frame(&ops, &chi_p));
        assert_eq!(c(scalar_product(&b, &chi, &chi_p).unwrap() as f64), oracle);
        checked += 1;
    }
    assert_eq!(checked, 2000);
}

#[test]
fn number_operators_sum_to_particle_number() {
    let m = 6;
    for n in 0..=m {
        let b = Arc::new(SectorBasis::new(m, n).unwrap());
        let mut total = SectorOperator::zero(b.clone());
        for x in 0..m {
            total = total.add(&represent_element(&CARElement::number(m, &[x]), &b).unwrap());
        }
        assert_eq!(total.max_abs_diff(&SectorOperator::identity(b.clone()).scale(c(n as f64))), 0.0);
    }
}

fn random_hermitian<R: Rng>(b: &Arc<SectorBasis>, r: &mut R) -> SectorOperator {
    let d = b.dim();
    let mut m = SparseMatrix::zeros(d, d);
    for _ in 0..3 * d {
        let (i, j) = (r.gen_range(0..d), r.gen_range(0..d));
        let v = C64::new(r.gen_range(-8..=8) as f64 / 8.0, r.gen_range(-8..=8) as f64 / 8.0);
        m.add_entry(i, j, v);
        m.add_entry(j, i, v.conj());
    }
    m.prune();
    SectorOperator::from_matrix(b.clone(), m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symmetric_presentation_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng::seeded(seed);
        let b = Arc::new(SectorBasis::new(6, n).unwrap());
        let f = random_hermitian(&b, &mut r);
        let g = random_hermitian(&b, &mut r);
        let tf = symmetric_coefficients(&f);
        prop_assert!(tf.reconstruct().unwrap().max_abs_diff(&f) < 1e-14);
        let prod = tf.convolve(&symmetric_coefficients(&g)).unwrap().reconstruct().unwrap();
        prop_assert!(prod.max_abs_diff(&f.mul(&g)) < 1e-12);
        prop_assert!(f.hermitian);
    }

    #[test]
    fn rank_one_products(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let b = Arc::new(SectorBasis::new(6, 2).unwrap());
        let mut s: Vec<usize> = (0..6).collect();
        s.shuffle(&mut r);
        let (a, bb, cc) = (s[..2].to_vec(), s[2..4].to_vec(), s[4..6].to_vec());
        let mut bp = bb.clone();
        bp.reverse();
        let x = rank_one(&b, &a, &bb).unwrap();
        let y = rank_one(&b, &bp, &cc).unwrap();
        // |a⟩⟨b|b'⟩⟨c| = ⟨b|b'⟩ |a⟩⟨c| with ⟨b|b'⟩ = −1 for a transposition.
        prop_assert_eq!(x.mul(&y).max_abs_diff(&rank_one(&b, &a, &cc).unwrap().scale(c(-1.0))), 0.0);
    }
}
