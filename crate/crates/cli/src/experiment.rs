//! Self-binding versus scattered spectra of `N` fermions with hopping and a pair potential.

use crate::config::ExperimentConfig;
use crate::eigen::{eigensolve, Spectrum};
use crate::error::{Error, Result};
use delone_fermions::fock::SectorBasis;
use delone_fermions::hamiltonian::{assemble_sector, BiEquivariantCoefficient};
use delone_fermions::pattern::{dist, Pattern};
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct Island {
    pub id: usize,
    pub first: usize,
    pub last: usize,
    pub lo: f64,
    pub hi: f64,
    pub mean_pair_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfBindingReport {
    pub sites: usize,
    pub n: usize,
    pub t: f64,
    pub u: f64,
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    pub island_of: Vec<usize>,
    pub pair_distance: Vec<f64>,
    pub islands: Vec<Island>,
    pub max_residual: f64,
}

impl SelfBindingReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,eigenvalue,island,mean_pair_distance")?;
        for (k, e) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{k},{e:.15e},{},{:.15e}", self.island_of[k], self.pair_distance[k])?;
        }
        Ok(())
    }

    /// The island holding the ground state (the bound pairs for attractive `u`).
    pub fn bound_island(&self) -> &Island {
        if self.u <= 0.0 {
            &self.islands[0]
        } else {
            self.islands.last().expect("nonempty spectrum")
        }
    }

    /// Distance between the bound island and the nearest other eigenvalue.
    pub fn gap(&self) -> f64 {
        let b = self.bound_island();
        if self.u <= 0.0 {
            self.eigenvalues.get(b.last + 1).map_or(f64::INFINITY, |e| e - b.hi)
        } else {
            b.first.checked_sub(1).map_or(f64::INFINITY, |k| b.lo - self.eigenvalues[k])
        }
    }

    /// Mean pair distance over all states outside the bound island.
    pub fn continuum_pair_distance(&self) -> f64 {
        let b = self.bound_island();
        let rest: Vec<f64> = (0..self.eigenvalues.len()).filter(|k| *k < b.first || *k > b.last).map(|k| self.pair_distance[k]).collect();
        if rest.is_empty() {
            f64::NAN
        } else {
            rest.iter().sum::<f64>() / rest.len() as f64
        }
    }
}

pub fn unit_chain(sites: usize) -> Pattern {
    let half = (sites as f64 - 1.0) / 2.0;
    let mut p = Pattern::new(1, 0.45, 0.6, half + 0.5, (0..sites).map(|x| vec![x as f64 - half]).collect()).expect("valid chain");
    p.match_tol = 1e-12;
    p
}

/// Splits the sorted spectrum where a gap exceeds `gap_factor` times the median spacing.
pub fn detect_islands(values: &[f64], gap_factor: f64) -> Vec<(usize, usize)> {
    if values.is_empty() {
        return vec![];
    }
    let mut gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    let threshold = gap_factor * median;
    let mut out = Vec::new();
    let mut start = 0;
    for (k, g) in gaps.drain(..).enumerate() {
        if g > threshold && g > 0.0 {
            out.push((start, k));
            start = k + 1;
        }
    }
    out.push((start, values.len() - 1));
    out
}

fn pair_distances(basis: &SectorBasis, p: &Pattern, spec: &Spectrum) -> Vec<f64> {
    let v = spec.vectors.as_ref().expect("eigenvectors requested");
    let state_d: Vec<f64> = basis
        .states
        .iter()
        .map(|u| {
            let mut s = 0.0;
            let mut c = 0;
            for i in 0..u.len() {
                for j in i + 1..u.len() {
                    s += dist(&p.points[u[i]], &p.points[u[j]]);
                    c += 1;
                }
            }
            if c == 0 {
                0.0
            } else {
                s / c as f64
            }
        })
        .collect();
    (0..v.ncols()).map(|k| v.column(k).iter().zip(&state_d).map(|(a, d)| a.norm_sqr() * d).sum()).collect()
}

pub fn run_selfbinding(cfg: &ExperimentConfig) -> Result<SelfBindingReport> {
    let p = match &cfg.pattern {
        Some(path) => Pattern::load(path)?,
        None => unit_chain(cfg.sites),
    };
    if cfg.n == 0 || cfg.n > p.len() {
        return Err(Error::Config(format!("need 1 ≤ N ≤ {}, got {}", p.len(), cfg.n)));
    }
    let basis = Arc::new(SectorBasis::new(p.len(), cfg.n)?);
    if basis.dim() > cfg.cap {
        return Err(delone_fermions::Error::DimensionCap(basis.dim(), cfg.cap).into());
    }
    let coeffs = vec![BiEquivariantCoefficient::hopping(cfg.t, 1.0), BiEquivariantCoefficient::pair_diagonal(cfg.u, 1.0)];
    let h = assemble_sector(&coeffs, &p, &basis)?;
    let spec = eigensolve(&h, true, cfg.cap)?;
    let pair_distance = pair_distances(&basis, &p, &spec);
    let ranges = detect_islands(&spec.values, cfg.gap_factor);
    let mut island_of = vec![0; spec.values.len()];
    let islands = ranges
        .iter()
        .enumerate()
        .map(|(id, &(first, last))| {
            for k in first..=last {
                island_of[k] = id;
            }
            let mean = pair_distance[first..=last].iter().sum::<f64>() / (last - first + 1) as f64;
            Island { id, first, last, lo: spec.values[first], hi: spec.values[last], mean_pair_distance: mean }
        })
        .collect();
    Ok(SelfBindingReport {
        sites: p.len(),
        n: cfg.n,
        t: cfg.t,
        u: cfg.u,
        dimension: basis.dim(),
        eigenvalues: spec.values,
        island_of,
        pair_distance,
        islands,
        max_residual: spec.max_residual,
    })
}

/// Single-particle spectrum of the hopping term, for the free-fermion oracle.
pub fn single_particle_energies(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let p = match &cfg.pattern {
        Some(path) => Pattern::load(path)?,
        None => unit_chain(cfg.sites),
    };
    let basis = Arc::new(SectorBasis::new(p.len(), 1)?);
    let h = assemble_sector(&[BiEquivariantCoefficient::hopping(cfg.t, 1.0)], &p, &basis)?;
    Ok(eigensolve(&h, false, cfg.cap)?.values)
}
