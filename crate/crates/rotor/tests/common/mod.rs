//! Shared helpers for the integration tests: an independent dense-grid
//! reimplementation of the d = 2 rotor walk used as an oracle for the
//! sparse engine (deliberately sharing no code with the library), and
//! generators for random configurations plus the fast-vs-slow escape
//! detector comparison.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

use rotor::lattice::{CyclicOrder, DefaultRule, Direction, InitialRule, LatticeState};
use rotor::walk::{run_particle, EscapeDetector, StopRegime, WalkConfig};

/// A uniformly shuffled cyclic order satisfying the separation
/// assumption.
pub fn random_order(rng: &mut impl Rng, d: usize) -> CyclicOrder {
    use rand::seq::SliceRandom;
    loop {
        let mut dirs: Vec<Direction> = Direction::all(d).collect();
        dirs.shuffle(rng);
        if let Ok(order) = CyclicOrder::new(d, dirs) {
            if order.separating_axis().is_ok() {
                return order;
            }
        }
    }
}

/// A random initial rule: split, uniform-up, or a custom table with a
/// few overrides near the origin.
pub fn random_rule(rng: &mut impl Rng, d: usize) -> InitialRule {
    match rng.gen_range(0..3) {
        0 => InitialRule::Rho0,
        1 => InitialRule::UniformUp,
        _ => {
            let default = if rng.gen() {
                DefaultRule::Rho0
            } else {
                DefaultRule::UniformUp
            };
            let mut overrides = BTreeMap::new();
            for _ in 0..rng.gen_range(1..6) {
                let site: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
                let dir = Direction::from_index(rng.gen_range(0..2 * d));
                overrides.insert(site, dir);
            }
            InitialRule::custom(default, overrides)
        }
    }
}

/// Runs `n` particles under both escape detectors on fresh copies of the
/// same configuration and compares the outcome signatures particle by
/// particle.
pub fn signatures_match(order: CyclicOrder, rule: InitialRule, n: u64) -> Result<(), String> {
    let fast_cfg = WalkConfig::default();
    let slow_cfg = WalkConfig {
        detector: EscapeDetector::SlowRadius {
            factor: 10.0,
            offset: 100.0,
        },
        ..WalkConfig::default()
    };
    let d = order.dimension();
    let origin = vec![0i64; d];
    let mut fast = LatticeState::new(order.clone(), rule.clone()).map_err(|e| e.to_string())?;
    let mut slow = LatticeState::new(order, rule).map_err(|e| e.to_string())?;
    for i in 0..n {
        let a = run_particle(&mut fast, &origin, &StopRegime::AbsorbOriginOrEscape, &fast_cfg)
            .map_err(|e| e.to_string())?;
        let b = run_particle(&mut slow, &origin, &StopRegime::AbsorbOriginOrEscape, &slow_cfg)
            .map_err(|e| e.to_string())?;
        let (ka, sa, ca) = a.status.signature();
        let (kb, sb, cb) = b.status.signature();
        if (ka, sa, ca) != (kb, sb, cb) {
            return Err(format!(
                "particle {i} diverged: fast {:?} vs slow {:?}",
                a.status, b.status
            ));
        }
    }
    fast.audit().map_err(|e| e.to_string())?;
    slow.audit().map_err(|e| e.to_string())?;
    Ok(())
}

/// Counterclockwise cycle as coordinate steps: e1, e2, -e1, -e2.
pub const CCW: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

pub struct DenseOracle {
    l: i64,
    /// Index into the cycle of the NEXT exit at each site.
    rotor: Vec<u8>,
    odom: Vec<u32>,
    cycle: [(i64, i64); 4],
    breadth: i64,
}

impl DenseOracle {
    /// Grid covers `[-l, l]^2`; rotors start in the split configuration
    /// (up on y >= 0, down below).
    pub fn new(l: i64, cycle: [(i64, i64); 4]) -> DenseOracle {
        let side = (2 * l + 1) as usize;
        let mut rotor = vec![0u8; side * side];
        for x in -l..=l {
            for y in -l..=l {
                let want = if y >= 0 { (0, 1) } else { (0, -1) };
                let k = cycle.iter().position(|&c| c == want).unwrap() as u8;
                rotor[((x + l) * (2 * l + 1) + (y + l)) as usize] = k;
            }
        }
        DenseOracle {
            l,
            rotor,
            odom: vec![0; side * side],
            cycle,
            breadth: 0,
        }
    }

    fn idx(&self, x: i64, y: i64) -> usize {
        ((x + self.l) * (2 * self.l + 1) + (y + self.l)) as usize
    }

    pub fn odometer(&self, x: i64, y: i64) -> u32 {
        self.odom[self.idx(x, y)]
    }

    fn step(&mut self, x: i64, y: i64) -> (i64, i64) {
        let i = self.idx(x, y);
        let dir = self.cycle[self.rotor[i] as usize];
        self.rotor[i] = (self.rotor[i] + 1) % 4;
        self.odom[i] += 1;
        self.breadth = self.breadth.max(x.abs());
        (x + dir.0, y + dir.1)
    }

    /// One particle from the origin, absorbed on return, declared
    /// escaped once far outside every visited column. Returns true on
    /// escape along with the final position.
    pub fn run_absorbed(&mut self) -> (bool, (i64, i64)) {
        let (mut x, mut y) = (0i64, 0i64);
        loop {
            let threshold = 10 * self.breadth + 100;
            if x * x + y * y > threshold * threshold {
                return (true, (x, y));
            }
            let (nx, ny) = self.step(x, y);
            assert!(
                nx.abs() <= self.l && ny.abs() <= self.l,
                "oracle grid too small"
            );
            if nx == 0 && ny == 0 {
                return (false, (0, 0));
            }
            (x, y) = (nx, ny);
        }
    }

    /// The escape-rate series `I(rho0, n)` for `n = 1..=n_max`.
    pub fn escape_series(&mut self, n_max: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut escaped = 0u64;
        for _ in 0..n_max {
            if self.run_absorbed().0 {
                escaped += 1;
            }
            out.push(escaped);
        }
        out
    }

    /// Rotor-router aggregation: returns the sorted cluster.
    pub fn aggregate(&mut self, n: u64) -> Vec<(i64, i64)> {
        let mut occupied = std::collections::HashSet::new();
        for _ in 0..n {
            let (mut x, mut y) = (0i64, 0i64);
            while occupied.contains(&(x, y)) {
                (x, y) = self.step(x, y);
            }
            occupied.insert((x, y));
        }
        let mut cluster: Vec<(i64, i64)> = occupied.into_iter().collect();
        cluster.sort();
        cluster
    }
}
