//! Exact harmonic fields on finite regions: hitting probabilities and
//! their gradient sums.

use rustc_hash::FxHashSet;

use super::region::Region;
use super::solver::solve_region;
use super::PotentialError;
use crate::lattice::Site;

/// A discrete-harmonic function on a region with prescribed boundary
/// values.
#[derive(Debug, Clone)]
pub struct HarmonicField {
    pub region: Region,
    interior_values: Vec<f64>,
    boundary_values: Vec<f64>,
}

impl HarmonicField {
    /// Field value at an interior or boundary site.
    pub fn value(&self, x: &[i64]) -> Option<f64> {
        if let Some(i) = self.region.interior_index(x) {
            return Some(self.interior_values[i]);
        }
        self.region.boundary_index(x).map(|b| self.boundary_values[b])
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.interior_values
    }

    /// Max deviation from the mean-value relation over the interior.
    pub fn harmonic_residual(&self) -> f64 {
        let deg = 2 * self.region.dimension();
        let adj = self.region.adjacency();
        let mut worst = 0.0f64;
        for i in 0..self.interior_values.len() {
            let mut mean = 0.0;
            for &nb in &adj[i * deg..(i + 1) * deg] {
                mean += if nb >= 0 {
                    self.interior_values[nb as usize]
                } else {
                    self.boundary_values[(-nb - 1) as usize]
                };
            }
            worst = worst.max((self.interior_values[i] - mean / deg as f64).abs());
        }
        worst
    }
}

/// Solves the Dirichlet problem with arbitrary boundary data.
pub fn harmonic_solve(
    region: &Region,
    boundary_data: &[f64],
) -> Result<HarmonicField, PotentialError> {
    assert_eq!(boundary_data.len(), region.boundary().len());
    region.check_connected_to_boundary()?;
    let deg = 2 * region.dimension();
    let adj = region.adjacency();
    let n = region.interior().len();
    let mut b = vec![0.0; n];
    for i in 0..n {
        for &nb in &adj[i * deg..(i + 1) * deg] {
            if nb < 0 {
                b[i] += boundary_data[(-nb - 1) as usize];
            }
        }
    }
    let interior_values = solve_region(region, &b)?;
    Ok(HarmonicField {
        region: region.clone(),
        interior_values,
        boundary_values: boundary_data.to_vec(),
    })
}

/// `H(x) = P_x(X_T in target)`: the exact hitting probability of the
/// target subset of the boundary.
pub fn hitting_field(region: &Region, target: &[Site]) -> Result<HarmonicField, PotentialError> {
    let tset: FxHashSet<&Site> = target.iter().collect();
    for t in target {
        if region.boundary_index(t).is_none() {
            return Err(PotentialError::NotBoundary(t.clone()));
        }
    }
    let data: Vec<f64> = region
        .boundary()
        .iter()
        .map(|b| if tset.contains(b) { 1.0 } else { 0.0 })
        .collect();
    harmonic_solve(region, &data)
}

/// `sum_{u in B_rho} sum_{v ~ u} |H(u) - H(v)|` over interior `u` with
/// `|u| <= rho` and all lattice neighbors `v` inside the region or on
/// its boundary.
pub fn gradient_sum(field: &HarmonicField, rho: f64) -> f64 {
    let region = &field.region;
    let deg = 2 * region.dimension();
    let adj = region.adjacency();
    let mut total = 0.0;
    for (i, u) in region.interior().iter().enumerate() {
        let r2: f64 = u.iter().map(|&c| (c as f64).powi(2)).sum();
        if r2 > rho * rho {
            continue;
        }
        let hu = field.interior_values[i];
        for &nb in &adj[i * deg..(i + 1) * deg] {
            let hv = if nb >= 0 {
                field.interior_values[nb as usize]
            } else {
                field.boundary_values[(-nb - 1) as usize]
            };
            total += (hu - hv).abs();
        }
    }
    total
}
