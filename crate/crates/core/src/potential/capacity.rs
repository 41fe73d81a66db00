//! Capacity by minimizing the discretized energy over the probability simplex.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::riesz::{cell_self_energy, distance, kernel_unchecked, DiscreteMeasure, RieszOrder};
use super::sets::{Cell, CompactSetSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityOptions {
    /// Stop once the duality gap falls below `tol` times the energy.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            tol: 1e-7,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub beta: f64,
    pub mesh: f64,
    pub atoms: usize,
    /// Atoms with finite self-energy, the only ones that can carry mass.
    pub active_atoms: usize,
    pub capacity: f64,
    /// Energy of the returned measure, an upper bound on the discrete minimum.
    pub energy: f64,
    /// Frank–Wolfe dual bound: the discrete minimum is at least this.
    pub lower_bound: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    /// Energy of equal weights on the active atoms.
    pub uniform_energy: f64,
    #[serde(skip)]
    pub measure: Option<DiscreteMeasure>,
}

impl CapacityResult {
    fn trivial(beta: f64, mesh: f64, atoms: usize, capacity: f64) -> Self {
        let energy = if capacity == 0.0 { f64::INFINITY } else { 1.0 / capacity };
        CapacityResult {
            beta,
            mesh,
            atoms,
            active_atoms: if capacity == 0.0 { 0 } else { atoms },
            capacity,
            energy,
            lower_bound: energy,
            gap: 0.0,
            relative_gap: 0.0,
            iterations: 0,
            uniform_energy: energy,
            measure: None,
        }
    }
}

/// Symmetric energy matrix evaluated on demand.
struct EnergyMatrix<'a> {
    beta: f64,
    centers: Vec<&'a [f64]>,
    diagonal: Vec<f64>,
}

impl EnergyMatrix<'_> {
    fn len(&self) -> usize {
        self.centers.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diagonal[i]
        } else {
            kernel_unchecked(self.beta, distance(self.centers[i], self.centers[j]))
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| self.entry(i, j)).collect()
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                w.iter()
                    .enumerate()
                    .filter(|(_, wj)| **wj != 0.0)
                    .map(|(j, wj)| wj * self.entry(i, j))
                    .sum()
            })
            .collect()
    }
}

/// Active-set bookkeeping: energy `f = wᵀKw`, half-gradient `g = Kw`.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `[inf_μ I_β(μ)]^{-1}` over probability measures on the discretized set.
///
/// Cells carry the analytic self-energy of their uniform density, so the
/// discrete minimum tracks the continuum infimum as the mesh shrinks. Cells
/// whose self-energy is infinite (points, or `β` at or above the cell
/// dimension) cannot carry mass; if no cell can, the capacity is 0.
pub fn capacity(set: &CompactSetSpec, beta: RieszOrder, mesh: f64, opts: CapacityOptions) -> Result<CapacityResult> {
    let cells = set.cells(mesh)?;
    capacity_of_cells(&cells, beta, mesh, opts)
}

pub fn capacity_of_cells(cells: &[Cell], beta: RieszOrder, mesh: f64, opts: CapacityOptions) -> Result<CapacityResult> {
    let b = beta.value();
    if cells.is_empty() {
        return Err(Error::domain("no cells to charge"));
    }
    if b < 0.0 {
        return Ok(CapacityResult::trivial(b, mesh, cells.len(), 1.0));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("gap tolerance must be positive"));
    }
    let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut active = vec![];
    let mut diagonal = vec![];
    for c in cells {
        let key: Vec<u64> = c.widths.iter().map(|w| w.to_bits()).collect();
        let e = match cache.get(&key) {
            Some(e) => *e,
            None => {
                let e = cell_self_energy(beta, &c.widths)?;
                cache.insert(key, e);
                e
            }
        };
        if e.is_finite() {
            active.push(c);
            diagonal.push(e);
        }
    }
    if active.is_empty() {
        return Ok(CapacityResult::trivial(b, mesh, cells.len(), 0.0));
    }
    let k = EnergyMatrix {
        beta: b,
        centers: active.iter().map(|c| c.center.as_slice()).collect(),
        diagonal,
    };
    let n = k.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut g = k.apply(&w);
    let mut f = dot(&w, &g);
    let uniform_energy = f;
    if !f.is_finite() {
        return Err(Error::domain("coincident cells make the energy infinite"));
    }

    let mut iterations = 0;
    loop {
        let (s, gmin) = argmin(&g);
        let gap = 2.0 * (f - gmin);
        if gap <= opts.tol * f || n == 1 {
            // certify on an exactly recomputed gradient, not the running one
            g = k.apply(&w);
            f = dot(&w, &g);
            let (_, gmin) = argmin(&g);
            let gap = (2.0 * (f - gmin)).max(0.0);
            if gap <= opts.tol * f || n == 1 {
                let measure = DiscreteMeasure {
                    atoms: active.iter().map(|c| c.center.clone()).collect(),
                    weights: w,
                };
                return Ok(CapacityResult {
                    beta: b,
                    mesh,
                    atoms: cells.len(),
                    active_atoms: n,
                    capacity: 1.0 / f,
                    energy: f,
                    lower_bound: f - gap,
                    gap,
                    relative_gap: gap / f,
                    iterations,
                    uniform_energy,
                    measure: Some(measure),
                });
            }
            continue;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                method: "Frank-Wolfe",
                iterations,
                gap: gap / f,
            });
        }
        iterations += 1;

        // away vertex: the charged atom with the largest potential
        let (v, gmax) = g
            .iter()
            .enumerate()
            .filter(|(i, _)| w[*i] > 0.0)
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, gi)| if *gi > acc.1 { (i, *gi) } else { acc });
        if f - gmin >= gmax - f {
            let col = k.column(s);
            // d = e_s - w
            let slope = gmin - f;
            let curv = col[s] - 2.0 * gmin + f;
            let gamma = if curv > 0.0 { (-slope / curv).clamp(0.0, 1.0) } else { 1.0 };
            for i in 0..n {
                w[i] *= 1.0 - gamma;
                g[i] = (1.0 - gamma) * g[i] + gamma * col[i];
            }
            w[s] += gamma;
            f += 2.0 * gamma * slope + gamma * gamma * curv;
        } else {
            let col = k.column(v);
            // d = w - e_v
            let slope = f - gmax;
            let curv = f - 2.0 * gmax + col[v];
            let gamma_max = w[v] / (1.0 - w[v]);
            let gamma = if curv > 0.0 {
                (-slope / curv).clamp(0.0, gamma_max)
            } else {
                gamma_max
            };
            for i in 0..n {
                w[i] *= 1.0 + gamma;
                g[i] = (1.0 + gamma) * g[i] - gamma * col[i];
            }
            if gamma == gamma_max {
                w[v] = 0.0;
            } else {
                w[v] -= gamma;
            }
            f += 2.0 * gamma * slope + gamma * gamma * curv;
        }
        if iterations % 2000 == 0 {
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            g = k.apply(&w);
            f = dot(&w, &g);
        }
    }
}

fn argmin(g: &[f64]) -> (usize, f64) {
    g.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, gi)| if *gi < acc.1 { (i, *gi) } else { acc })
}
