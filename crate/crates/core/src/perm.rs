//! Permutations of `0..n` stored as image lists: `p[k] = p(k)`.

use itertools::Itertools;

pub type Perm = Vec<usize>;

pub fn identity(n: usize) -> Perm {
    (0..n).collect()
}

/// `(a ∘ b)(k) = a(b(k))`.
pub fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&k| a[k]).collect()
}

pub fn inverse(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (k, &v) in p.iter().enumerate() {
        inv[v] = k;
    }
    inv
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Number of inversions of a sequence of distinct keys, by merge counting.
pub fn inversions<T: Ord + Copy>(seq: &[T]) -> u64 {
    fn rec<T: Ord + Copy>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = rec(&mut v[..mid], buf) + rec(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < n {
            if v[j] < v[i] {
                count += (mid - i) as u64;
                buf.push(v[j]);
                j += 1;
            } else {
                buf.push(v[i]);
                i += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..n]);
        v.copy_from_slice(buf);
        count
    }
    let mut v = seq.to_vec();
    let mut buf = Vec::with_capacity(v.len());
    rec(&mut v, &mut buf)
}

/// `(-1)^{inversions}` of a sequence of distinct keys; for a permutation this is its sign.
pub fn sign_of_sequence<T: Ord + Copy>(seq: &[T]) -> i64 {
    if inversions(seq) % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn sign(p: &[usize]) -> i64 {
    sign_of_sequence(p)
}

/// Sign of `a^{-1} ∘ b` for two orderings `a`, `b` of the same finite set.
pub fn relative_sign<T: Ord + Copy + std::hash::Hash>(a: &[T], b: &[T]) -> i64 {
    let pos: std::collections::HashMap<T, usize> = a.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let rel: Vec<usize> = b.iter().map(|v| pos[v]).collect();
    sign(&rel)
}

/// All permutations of `0..n` in lexicographic order.
pub fn all(n: usize) -> Vec<Perm> {
    (0..n).permutations(n).collect()
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
