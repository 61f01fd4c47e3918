//! Finite-graph rotor dynamics: schedule-invariant stabilization and the
//! Holroyd–Propp comparison between rotor and random-walk hitting
//! counts.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::potential::solver::solve_dense;

pub const GRAPH_HEADER: &str = "# rotor-graph schema=1";

/// A finite directed graph with per-vertex cyclic exit orders, a sink
/// set, rotor positions, and particle counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRotorGraph {
    /// `out[v]` is the cyclic exit order of vertex `v` (repeats allowed:
    /// each parallel edge is its own rotor slot). Sinks may be empty.
    pub out: Vec<Vec<usize>>,
    pub sink: Vec<bool>,
    /// Rotor of `v`: index into `out[v]` of the NEXT exit to use.
    pub rotor: Vec<usize>,
    pub particles: Vec<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum AbelianError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("schedule fires vertex {0}, which is a sink or holds no particle")]
    BadFiring(usize),
    #[error("explicit schedule ended with particles still outside the sinks")]
    ScheduleIncomplete,
    #[error("step budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("schedule tree exceeds the cap of {0} leaves")]
    LeafCapExceeded(u64),
    #[error("Y must be a subset of the sink set")]
    TargetNotSink,
    #[error("malformed graph fixture: {0}")]
    BadFixture(String),
    #[error("harmonic solve failed: {0}")]
    Solve(String),
}

/// Which occupied non-sink vertex fires next.
#[derive(Debug, Clone)]
pub enum Schedule {
    Fifo,
    Lifo,
    RoundRobin,
    Random(u64),
    /// Exact firing sequence; must drive the graph to quiescence.
    Explicit(Vec<usize>),
}

/// Quiescent result: particles on sinks, per-vertex exit counts, final
/// rotors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilization {
    pub placement: Vec<u64>,
    pub exits: Vec<u64>,
    pub rotors: Vec<usize>,
}

const STEP_BUDGET: u64 = 100_000_000;

impl FiniteRotorGraph {
    pub fn new(
        out: Vec<Vec<usize>>,
        sinks: &[usize],
        rotor: Vec<usize>,
        particles: Vec<u64>,
    ) -> Result<Self, AbelianError> {
        let n = out.len();
        let mut sink = vec![false; n];
        for &s in sinks {
            if s >= n {
                return Err(AbelianError::InvalidGraph(format!("sink {s} out of range")));
            }
            sink[s] = true;
        }
        let g = FiniteRotorGraph {
            out,
            sink,
            rotor,
            particles,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    fn validate(&self) -> Result<(), AbelianError> {
        let n = self.out.len();
        if self.rotor.len() != n || self.particles.len() != n || self.sink.len() != n {
            return Err(AbelianError::InvalidGraph("field length mismatch".into()));
        }
        for v in 0..n {
            if self.sink[v] {
                continue;
            }
            if self.out[v].is_empty() {
                return Err(AbelianError::InvalidGraph(format!(
                    "non-sink vertex {v} has no out-edges"
                )));
            }
            if self.rotor[v] >= self.out[v].len() {
                return Err(AbelianError::InvalidGraph(format!(
                    "rotor of {v} indexes past its out-degree"
                )));
            }
            for &w in &self.out[v] {
                if w >= n {
                    return Err(AbelianError::InvalidGraph(format!(
                        "edge {v} -> {w} out of range"
                    )));
                }
            }
        }
        // Every non-sink must reach a sink, else stabilization diverges.
        let mut reach = self.sink.clone();
        loop {
            let mut changed = false;
            for v in 0..n {
                if !reach[v] && self.out[v].iter().any(|&w| reach[w]) {
                    reach[v] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if let Some(v) = (0..n).find(|&v| !reach[v] && !self.sink[v]) {
            return Err(AbelianError::InvalidGraph(format!(
                "vertex {v} has no path to a sink"
            )));
        }
        Ok(())
    }

    /// Fires one rotor step at `v`: the particle leaves along the
    /// current rotor edge, then the rotor advances.
    fn fire(&mut self, v: usize, exits: &mut [u64]) -> Result<usize, AbelianError> {
        if self.sink[v] || self.particles[v] == 0 {
            return Err(AbelianError::BadFiring(v));
        }
        let target = self.out[v][self.rotor[v]];
        self.rotor[v] = (self.rotor[v] + 1) % self.out[v].len();
        self.particles[v] -= 1;
        self.particles[target] += 1;
        exits[v] += 1;
        Ok(target)
    }

    fn occupied(&self) -> Vec<usize> {
        (0..self.out.len())
            .filter(|&v| !self.sink[v] && self.particles[v] > 0)
            .collect()
    }

    /// Line-oriented fixture serialization.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(GRAPH_HEADER);
        s.push('\n');
        writeln!(s, "vertices {}", self.out.len()).unwrap();
        let sinks: Vec<String> = (0..self.out.len())
            .filter(|&v| self.sink[v])
            .map(|v| v.to_string())
            .collect();
        writeln!(s, "sinks {}", sinks.join(" ")).unwrap();
        for v in 0..self.out.len() {
            let edges: Vec<String> = self.out[v].iter().map(|w| w.to_string()).collect();
            writeln!(
                s,
                "vertex {} rotor {} particles {} edges {}",
                v,
                self.rotor[v],
                self.particles[v],
                edges.join(" ")
            )
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, AbelianError> {
        let bad = |m: &str| AbelianError::BadFixture(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(GRAPH_HEADER) {
            return Err(bad("missing schema header"));
        }
        let n: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("vertices "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing vertex count"))?;
        let sinks: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("sinks"))
            .ok_or_else(|| bad("missing sink list"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad sink id")))
            .collect::<Result<_, _>>()?;
        let mut out = vec![Vec::new(); n];
        let mut rotor = vec![0; n];
        let mut particles = vec![0; n];
        for line in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 6 || tok[0] != "vertex" || tok[2] != "rotor" || tok[4] != "particles" {
                return Err(bad(&format!("unrecognized line {line:?}")));
            }
            let v: usize = tok[1].parse().map_err(|_| bad("bad vertex id"))?;
            if v >= n {
                return Err(bad("vertex id out of range"));
            }
            rotor[v] = tok[3].parse().map_err(|_| bad("bad rotor"))?;
            particles[v] = tok[5].parse().map_err(|_| bad("bad particle count"))?;
            let epos = tok
                .iter()
                .position(|&t| t == "edges")
                .ok_or_else(|| bad("missing edges"))?;
            out[v] = tok[epos + 1..]
                .iter()
                .map(|t| t.parse().map_err(|_| bad("bad edge")))
                .collect::<Result<_, _>>()?;
        }
        FiniteRotorGraph::new(out, &sinks, rotor, particles)
    }
}

/// Runs the graph to quiescence under the given schedule and returns the
/// final (placement, exit counts, rotors).
pub fn stabilize(
    graph: &FiniteRotorGraph,
    schedule: &Schedule,
) -> Result<Stabilization, AbelianError> {
    let mut g = graph.clone();
    let n = g.vertex_count();
    let mut exits = vec![0u64; n];
    let mut steps = 0u64;
    let mut budget = || {
        steps += 1;
        if steps > STEP_BUDGET {
            Err(AbelianError::BudgetExceeded(STEP_BUDGET))
        } else {
            Ok(())
        }
    };
    match schedule {
        Schedule::Fifo | Schedule::Lifo => {
            let mut work: std::collections::VecDeque<usize> = g.occupied().into();
            let lifo = matches!(schedule, Schedule::Lifo);
            loop {
                let v = if lifo { work.pop_back() } else { work.pop_front() };
                let Some(v) = v else { break };
                if g.sink[v] || g.particles[v] == 0 {
                    continue;
                }
                budget()?;
                let t = g.fire(v, &mut exits)?;
                work.push_back(v);
                if !g.sink[t] {
                    work.push_back(t);
                }
            }
        }
        Schedule::RoundRobin => loop {
            let occ = g.occupied();
            if occ.is_empty() {
                break;
            }
            for v in occ {
                if g.particles[v] > 0 {
                    budget()?;
                    g.fire(v, &mut exits)?;
                }
            }
        },
        Schedule::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            loop {
                let occ = g.occupied();
                if occ.is_empty() {
                    break;
                }
                budget()?;
                let v = occ[rng.gen_range(0..occ.len())];
                g.fire(v, &mut exits)?;
            }
        }
        Schedule::Explicit(seq) => {
            for &v in seq {
                budget()?;
                g.fire(v, &mut exits)?;
            }
            if !g.occupied().is_empty() {
                return Err(AbelianError::ScheduleIncomplete);
            }
        }
    }
    Ok(Stabilization {
        placement: g.particles,
        exits,
        rotors: g.rotor,
    })
}

/// Walks the entire schedule tree (every maximal firing sequence) and
/// returns the number of leaves and the distinct outcomes; errors past
/// `leaf_cap` leaves.
pub fn enumerate_schedules(
    graph: &FiniteRotorGraph,
    leaf_cap: u64,
) -> Result<(u64, Vec<Stabilization>), AbelianError> {
    fn recurse(
        g: &mut FiniteRotorGraph,
        exits: &mut Vec<u64>,
        leaves: &mut u64,
        cap: u64,
        distinct: &mut Vec<Stabilization>,
    ) -> Result<(), AbelianError> {
        let occ = g.occupied();
        if occ.is_empty() {
            *leaves += 1;
            if *leaves > cap {
                return Err(AbelianError::LeafCapExceeded(cap));
            }
            let out = Stabilization {
                placement: g.particles.clone(),
                exits: exits.clone(),
                rotors: g.rotor.clone(),
            };
            if !distinct.contains(&out) {
                distinct.push(out);
            }
            return Ok(());
        }
        for v in occ {
            let t = g.fire(v, exits)?;
            recurse(g, exits, leaves, cap, distinct)?;
            // Undo the firing to explore the sibling branches.
            g.rotor[v] = (g.rotor[v] + g.out[v].len() - 1) % g.out[v].len();
            g.particles[v] += 1;
            g.particles[t] -= 1;
            exits[v] -= 1;
        }
        Ok(())
    }
    let mut g = graph.clone();
    let mut exits = vec![0u64; g.vertex_count()];
    let mut leaves = 0;
    let mut distinct = Vec::new();
    recurse(&mut g, &mut exits, &mut leaves, leaf_cap, &mut distinct)?;
    Ok((leaves, distinct))
}

/// Exact hitting probabilities `h(v) = P_v(X hits Y before the rest of
/// the sink set)` for the random walk that follows a uniformly random
/// out-edge.
pub fn graph_hitting_field(
    graph: &FiniteRotorGraph,
    y: &[usize],
) -> Result<Vec<f64>, AbelianError> {
    let n = graph.vertex_count();
    for &t in y {
        if t >= n || !graph.sink[t] {
            return Err(AbelianError::TargetNotSink);
        }
    }
    let in_y = {
        let mut m = vec![false; n];
        y.iter().for_each(|&t| m[t] = true);
        m
    };
    let interior: Vec<usize> = (0..n).filter(|&v| !graph.sink[v]).collect();
    let pos: Vec<Option<usize>> = {
        let mut p = vec![None; n];
        interior.iter().enumerate().for_each(|(i, &v)| p[v] = Some(i));
        p
    };
    let m = interior.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (i, &v) in interior.iter().enumerate() {
        a[i][i] += 1.0;
        let p = 1.0 / graph.out[v].len() as f64;
        for &w in &graph.out[v] {
            match pos[w] {
                Some(j) => a[i][j] -= p,
                None => {
                    if in_y[w] {
                        b[i] += p;
                    }
                }
            }
        }
    }
    let sol = solve_dense(a, b).map_err(|e| AbelianError::Solve(e.to_string()))?;
    let mut h = vec![0.0; n];
    for (i, &v) in interior.iter().enumerate() {
        h[v] = sol[i];
    }
    y.iter().for_each(|&t| h[t] = 1.0);
    Ok(h)
}

/// Outcome of one Holroyd–Propp comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct HpReport {
    /// Particles the rotor dynamics delivered into `Y`.
    pub h_r: f64,
    /// Expected deliveries under the random walk: `sum_x s(x) h(x)`.
    pub h_w: f64,
    /// `sum_{u not sink} sum_{v ~ u} |h(u) - h(v)|` over out-edges.
    pub bound: f64,
    pub verdict: bool,
}

/// Checks `|H_r(s, Y) - H_w(s, Y)| <= sum |h(u) - h(v)|` on the graph
/// with its current particle placement and rotors.
pub fn holroyd_propp_check(
    graph: &FiniteRotorGraph,
    y: &[usize],
) -> Result<HpReport, AbelianError> {
    let h = graph_hitting_field(graph, y)?;
    let stab = stabilize(graph, &Schedule::Fifo)?;
    let h_r: f64 = y.iter().map(|&t| stab.placement[t] as f64).sum();
    let h_w: f64 = (0..graph.vertex_count())
        .map(|v| graph.particles[v] as f64 * h[v])
        .sum();
    let mut bound = 0.0;
    for v in 0..graph.vertex_count() {
        if graph.sink[v] {
            continue;
        }
        for &w in &graph.out[v] {
            bound += (h[v] - h[w]).abs();
        }
    }
    let verdict = (h_r - h_w).abs() <= bound + 1e-9;
    Ok(HpReport {
        h_r,
        h_w,
        bound,
        verdict,
    })
}

/// The 3x3 grid with the boundary as sinks, four-cycle exit orders
/// (right, up, left, down), and `particles` at the center.
pub fn grid_3x3(particles: u64, center_rotor: usize) -> FiniteRotorGraph {
    // Vertex (i, j) -> 3 * i + j, i, j in 0..3; center = 4.
    let idx = |i: i64, j: i64| (3 * i + j) as usize;
    let mut out = vec![Vec::new(); 9];
    for i in 0..3i64 {
        for j in 0..3i64 {
            for (di, dj) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                let (ni, nj) = (i + di, j + dj);
                if (0..3).contains(&ni) && (0..3).contains(&nj) {
                    out[idx(i, j)].push(idx(ni, nj));
                }
            }
        }
    }
    let sinks: Vec<usize> = (0..9).filter(|&v| v != 4).collect();
    let mut p = vec![0; 9];
    p[4] = particles;
    let mut rotor = vec![0; 9];
    rotor[4] = center_rotor;
    FiniteRotorGraph::new(out, &sinks, rotor, p).unwrap()
}

/// A random valid instance: every vertex `v < n-1` keeps an edge toward
/// `v + 1` so the path-to-sink invariant holds by construction.
pub fn random_graph(rng: &mut impl Rng, max_vertices: usize, max_particles: u64) -> FiniteRotorGraph {
    let n = rng.gen_range(2..=max_vertices.max(2));
    let mut out: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if v + 1 >= n {
                return Vec::new();
            }
            let mut edges = vec![v + 1];
            for _ in 0..rng.gen_range(0..4) {
                edges.push(rng.gen_range(0..n));
            }
            edges.shuffle(rng);
            edges
        })
        .collect();
    let sinks = vec![n - 1];
    out[n - 1].clear();
    let rotor: Vec<usize> = out
        .iter()
        .map(|e| {
            if e.is_empty() {
                0
            } else {
                rng.gen_range(0..e.len())
            }
        })
        .collect();
    let mut particles = vec![0u64; n];
    let total = rng.gen_range(0..=max_particles);
    for _ in 0..total {
        particles[rng.gen_range(0..n)] += 1;
    }
    FiniteRotorGraph::new(out, &sinks, rotor, particles).unwrap()
}
