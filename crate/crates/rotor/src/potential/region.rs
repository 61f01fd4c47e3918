//! Finite lattice regions with a designated boundary, in the adjacency
//! layout the solver consumes.

use rustc_hash::FxHashMap;

use super::PotentialError;
use crate::lattice::{Direction, Site};

/// Hard cap on interior size for exact solves. Large enough for the
/// calibration ball `B_60` in `d = 3`.
pub const MAX_INTERIOR: usize = 1_200_000;

/// A finite set of interior sites plus the adjacent boundary layer.
/// Interior adjacency is stored flat: entry `i * 2d + k` holds the
/// interior index of the neighbor of site `i` in direction `k`, or
/// `-(b + 1)` for boundary site `b`.
#[derive(Debug, Clone)]
pub struct Region {
    d: usize,
    interior: Vec<Site>,
    index: FxHashMap<Site, u32>,
    boundary: Vec<Site>,
    adj: Vec<i32>,
}

fn norm_sq(x: &[i64]) -> f64 {
    x.iter().map(|&c| (c as f64) * (c as f64)).sum()
}

impl Region {
    /// The open Euclidean ball `B_r` as interior; the boundary is every
    /// site outside with a neighbor inside.
    pub fn ball(d: usize, r: f64) -> Result<Region, PotentialError> {
        let hi = r.ceil() as i64;
        let mut interior = Vec::new();
        let mut x = vec![-hi; d];
        'outer: loop {
            if norm_sq(&x) < r * r {
                interior.push(x.clone());
            }
            for a in 0..d {
                x[a] += 1;
                if x[a] <= hi {
                    continue 'outer;
                }
                x[a] = -hi;
            }
            break;
        }
        Region::from_interior(d, interior)
    }

    /// Builds a region from an explicit interior set; the boundary is
    /// derived as the adjacent complement.
    pub fn from_interior(d: usize, mut interior: Vec<Site>) -> Result<Region, PotentialError> {
        interior.sort();
        interior.dedup();
        if interior.len() > MAX_INTERIOR {
            return Err(PotentialError::RegionTooLarge {
                actual: interior.len(),
                cap: MAX_INTERIOR,
            });
        }
        let index: FxHashMap<Site, u32> = interior
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let mut boundary = Vec::new();
        let mut bindex: FxHashMap<Site, i32> = FxHashMap::default();
        let mut adj = Vec::with_capacity(interior.len() * 2 * d);
        for site in &interior {
            for dir in Direction::all(d) {
                let mut nb = site.clone();
                nb[dir.axis] += dir.sign();
                match index.get(&nb) {
                    Some(&j) => adj.push(j as i32),
                    None => {
                        let b = *bindex.entry(nb.clone()).or_insert_with(|| {
                            boundary.push(nb.clone());
                            boundary.len() as i32 - 1
                        });
                        adj.push(-(b + 1));
                    }
                }
            }
        }
        Ok(Region {
            d,
            interior,
            index,
            boundary,
            adj,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn interior(&self) -> &[Site] {
        &self.interior
    }

    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }

    pub fn interior_index(&self, x: &[i64]) -> Option<usize> {
        self.index.get(x).map(|&i| i as usize)
    }

    pub fn boundary_index(&self, x: &[i64]) -> Option<usize> {
        self.boundary.iter().position(|b| b == x)
    }

    pub(crate) fn adjacency(&self) -> &[i32] {
        &self.adj
    }

    /// Errors unless every interior site can reach the boundary through
    /// interior moves.
    pub fn check_connected_to_boundary(&self) -> Result<(), PotentialError> {
        let n = self.interior.len();
        let deg = 2 * self.d;
        let mut reached = vec![false; n];
        let mut stack: Vec<usize> = (0..n)
            .filter(|&i| self.adj[i * deg..(i + 1) * deg].iter().any(|&v| v < 0))
            .collect();
        for &i in &stack {
            reached[i] = true;
        }
        while let Some(i) = stack.pop() {
            for &v in &self.adj[i * deg..(i + 1) * deg] {
                if v >= 0 && !reached[v as usize] {
                    reached[v as usize] = true;
                    stack.push(v as usize);
                }
            }
        }
        if reached.iter().all(|&b| b) {
            Ok(())
        } else {
            Err(PotentialError::DisconnectedInterior)
        }
    }
}
