//! Coordinate-format complex sparse matrices.

use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), C64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i), C64::new(1.0, 0.0));
        }
        m
    }

    /// Sums duplicate triplets and drops exact zeros.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c, v) in triplets {
            m.add_entry(r, c, v);
        }
        m.prune();
        m
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.rows && c < self.cols);
        *self.entries.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v;
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries.get(&(r, c)).copied().unwrap_or_default()
    }

    pub fn prune(&mut self) {
        self.entries.retain(|_, v| *v != C64::new(0.0, 0.0));
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| *v == C64::new(0.0, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        for v in m.entries.values_mut() {
            *v *= s;
        }
        m.prune();
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (&(r, c), &v) in &other.entries {
            m.add_entry(r, c, v);
        }
        m.prune();
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); other.rows];
        for (&(r, c), &v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for (&(r, k), &a) in &self.entries {
            for &(c, b) in &by_row[k] {
                m.add_entry(r, c, a * b);
            }
        }
        m.prune();
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for (&(r, c), &v) in &self.entries {
            m.entries.insert((c, r), v.conj());
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.entries.iter().filter(|((r, c), _)| r == c).map(|(_, v)| *v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (&(r, c), &v) in &self.entries {
            d[(r, c)] += v;
        }
        d
    }

    pub fn from_dense(d: &DMatrix<C64>) -> Self {
        let mut m = Self::zeros(d.nrows(), d.ncols());
        for r in 0..d.nrows() {
            for c in 0..d.ncols() {
                if d[(r, c)] != C64::new(0.0, 0.0) {
                    m.entries.insert((r, c), d[(r, c)]);
                }
            }
        }
        m
    }

    /// Matrix Market coordinate complex general, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.rows, self.cols, self.entries.len())?;
        for (&(r, c), v) in &self.entries {
            writeln!(w, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_matrix_market<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix market file".into()))??;
        if !header.starts_with("%%MatrixMarket matrix coordinate") {
            return Err(Error::Parse(format!("unsupported header: {header}")));
        }
        let complex = header.contains("complex");
        let mut size: Option<(usize, usize)> = None;
        let mut m = Self::zeros(0, 0);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            let idx = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
            match size {
                None => {
                    let (rows, cols) = (idx(f[0])?, idx(f[1])?);
                    size = Some((rows, cols));
                    m = Self::zeros(rows, cols);
                }
                Some(_) => {
                    let (r, c) = (idx(f[0])? - 1, idx(f[1])? - 1);
                    let re = num(f[2])?;
                    let im = if complex { num(f.get(3).copied().unwrap_or("0"))? } else { 0.0 };
                    m.add_entry(r, c, C64::new(re, im));
                }
            }
        }
        Ok(m)
    }
}
