//! Multi-particle protocols: escape-rate and escape-only series, ball
//! odometers, rotor-router aggregation, and rate normalization.

use rustc_hash::FxHashSet;

use crate::lattice::{CyclicOrder, InitialRule, LatticeError, LatticeState, Site};
use crate::walk::{run_particle, Status, StopRegime, WalkConfig, WalkError};

/// One measurement row of a particle series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    /// Particles launched (escape-rate) or escaped (escape-only).
    pub n: u64,
    /// `I`: particles escaped so far.
    pub escaped: u64,
    /// Origin odometer `u(0)`.
    pub u0: u64,
    pub h_plus: i64,
    pub h_minus: i64,
    pub breadth: i64,
    pub total_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMetadata {
    pub d: usize,
    pub order: Vec<String>,
    pub rule: String,
    pub regime: String,
    pub axis_permutation: Option<Vec<usize>>,
}

impl SeriesMetadata {
    fn from_state(state: &LatticeState, regime: &str) -> Self {
        SeriesMetadata {
            d: state.dimension(),
            order: state
                .order()
                .sequence()
                .iter()
                .map(|dir| dir.to_string())
                .collect(),
            rule: state.rule().name().to_string(),
            regime: regime.to_string(),
            axis_permutation: state.axis_permutation().map(|p| p.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSeries {
    pub checkpoints: Vec<Checkpoint>,
    pub metadata: SeriesMetadata,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Geometric checkpoint schedule `ceil(1.3^k)`, deduplicated, capped at
/// and always including `n_max`.
pub fn geometric_checkpoints(n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut v = 1.0f64;
    loop {
        let n = v.ceil() as u64;
        if n >= n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        v *= 1.3;
    }
    out.push(n_max);
    out
}

fn record(state: &LatticeState, n: u64, escaped: u64, origin: &[i64]) -> Checkpoint {
    Checkpoint {
        n,
        escaped,
        u0: state.odometer_at(origin),
        h_plus: state.h_plus(),
        h_minus: state.h_minus(),
        breadth: state.breadth(),
        total_steps: state.total_exits(),
    }
}

/// Launches `n_max` particles one at a time under
/// absorb-origin-or-escape and records the escape count `I` at each
/// checkpoint.
pub fn escape_rate_series(
    order: CyclicOrder,
    rule: InitialRule,
    n_max: u64,
    checkpoints: &[u64],
    cfg: &WalkConfig,
) -> Result<(ExperimentSeries, LatticeState), ExperimentError> {
    let mut state = LatticeState::new(order, rule)?;
    let origin: Site = vec![0; state.dimension()];
    let metadata = SeriesMetadata::from_state(&state, "absorb-origin-or-escape");
    let mut rows = Vec::new();
    let mut escaped = 0u64;
    let mut next_cp = checkpoints.iter().copied().peekable();
    for n in 1..=n_max {
        let out = run_particle(&mut state, &origin, &StopRegime::AbsorbOriginOrEscape, cfg)?;
        if matches!(out.status, Status::Escaped { .. }) {
            escaped += 1;
        }
        while next_cp.peek() == Some(&n) {
            rows.push(record(&state, n, escaped, &origin));
            next_cp.next();
        }
    }
    Ok((
        ExperimentSeries {
            checkpoints: rows,
            metadata,
        },
        state,
    ))
}

/// When an escape-only run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeOnlyTarget {
    /// Run until this many particles have escaped.
    Escapes(u64),
    /// Run until the origin odometer reaches this value.
    OriginOdometer(u64),
}

/// Runs particles that ignore origin returns and stop only on escape.
/// Checkpoints index the number of escaped particles. Also returns
/// `u_k(0)` for every `k`, the origin odometer after the k-th escape.
pub fn escape_only_series(
    order: CyclicOrder,
    rule: InitialRule,
    target: EscapeOnlyTarget,
    checkpoints: &[u64],
    cfg: &WalkConfig,
) -> Result<(ExperimentSeries, Vec<u64>, LatticeState), ExperimentError> {
    let mut state = LatticeState::new(order, rule)?;
    let origin: Site = vec![0; state.dimension()];
    let metadata = SeriesMetadata::from_state(&state, "escape-only");
    let mut rows = Vec::new();
    let mut u_by_escape = Vec::new();
    let mut next_cp = checkpoints.iter().copied().peekable();
    let mut n = 0u64;
    loop {
        match target {
            EscapeOnlyTarget::Escapes(max) if n >= max => break,
            EscapeOnlyTarget::OriginOdometer(max) if state.odometer_at(&origin) >= max => break,
            _ => {}
        }
        run_particle(&mut state, &origin, &StopRegime::EscapeOnly, cfg)?;
        n += 1;
        u_by_escape.push(state.odometer_at(&origin));
        while next_cp.peek() == Some(&n) {
            rows.push(record(&state, n, n, &origin));
            next_cp.next();
        }
    }
    Ok((
        ExperimentSeries {
            checkpoints: rows,
            metadata,
        },
        u_by_escape,
        state,
    ))
}

/// `n` particles from the origin, each stopped on `|x| >= r`; returns
/// the final state carrying the odometer field `u_n^r`.
pub fn ball_odometer(
    order: CyclicOrder,
    rule: InitialRule,
    n: u64,
    r: f64,
    cfg: &WalkConfig,
) -> Result<LatticeState, ExperimentError> {
    let mut state = LatticeState::new(order, rule)?;
    let origin: Site = vec![0; state.dimension()];
    for _ in 0..n {
        let out = run_particle(&mut state, &origin, &StopRegime::AbsorbBallBoundary(r), cfg)?;
        debug_assert!(matches!(out.status, Status::AbsorbedBoundary(_)));
    }
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct AggregationResult {
    /// Occupied sites, sorted lexicographically.
    pub cluster: Vec<Site>,
    pub n: u64,
    /// `min |y|` over non-cluster sites: the largest `r` with `B_r`
    /// inside the cluster, up to lattice rounding.
    pub inradius: f64,
    /// `max |x|` over cluster sites.
    pub outradius: f64,
}

/// Rotor-router aggregation: each particle walks from the origin until
/// it steps onto a never-occupied site, which then joins the cluster.
pub fn aggregate(
    order: CyclicOrder,
    rule: InitialRule,
    n: u64,
    cfg: &WalkConfig,
) -> Result<(AggregationResult, LatticeState), ExperimentError> {
    let mut state = LatticeState::new(order, rule)?;
    let d = state.dimension();
    let origin: Site = vec![0; d];
    let mut occupied: FxHashSet<Site> = FxHashSet::default();
    for _ in 0..n {
        let mut pos = origin.clone();
        let mut steps = 0u64;
        while occupied.contains(&pos) {
            if steps >= cfg.step_budget {
                return Err(WalkError::BudgetExceeded {
                    limit: cfg.step_budget,
                }
                .into());
            }
            let dir = state.exit_once(&pos);
            steps += 1;
            pos[dir.axis] += dir.sign();
        }
        occupied.insert(pos);
    }
    let mut cluster: Vec<Site> = occupied.into_iter().collect();
    cluster.sort();
    let (inradius, outradius) = cluster_radii(&cluster, d);
    Ok((
        AggregationResult {
            cluster,
            n,
            inradius,
            outradius,
        },
        state,
    ))
}

fn cluster_radii(cluster: &[Site], d: usize) -> (f64, f64) {
    let norm = |x: &[i64]| x.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    let outradius = cluster.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let set: FxHashSet<&Site> = cluster.iter().collect();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for site in cluster {
        for (a, &c) in site.iter().enumerate() {
            lo[a] = lo[a].min(c);
            hi[a] = hi[a].max(c);
        }
    }
    // Nearest non-cluster site: scan the bounding box, then account for
    // the sites just outside it.
    let mut inradius = f64::INFINITY;
    for a in 0..d {
        let mut face = vec![0i64; d];
        face[a] = lo[a] - 1;
        inradius = inradius.min(norm(&face));
        face[a] = hi[a] + 1;
        inradius = inradius.min(norm(&face));
    }
    let mut x = lo.clone();
    'outer: loop {
        if !set.contains(&x) {
            inradius = inradius.min(norm(&x));
        }
        for a in 0..d {
            x[a] += 1;
            if x[a] <= hi[a] {
                continue 'outer;
            }
            x[a] = lo[a];
        }
        break;
    }
    (inradius, outradius)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Normalized escape rate per checkpoint: `I log n / n` for `d = 2`,
/// `I / n` for `d >= 3`. Checkpoints with `n < 2` are excluded from the
/// log normalization.
pub fn primal_normalized(series: &ExperimentSeries) -> Vec<(u64, f64)> {
    series
        .checkpoints
        .iter()
        .filter(|cp| series.metadata.d >= 3 || cp.n >= 2)
        .map(|cp| {
            let n = cp.n as f64;
            let i = cp.escaped as f64;
            let v = if series.metadata.d == 2 {
                i * n.ln() / n
            } else {
                i / n
            };
            (cp.n, v)
        })
        .collect()
}

/// The dual quotients of an escape-only series: `n log u_n(0) / u_n(0)`
/// for `d = 2` and `n / u_n(0)` for `d >= 3`, keyed by `u_n(0)`.
pub fn dual_normalized(series: &ExperimentSeries) -> Vec<(u64, f64)> {
    series
        .checkpoints
        .iter()
        .filter(|cp| series.metadata.d >= 3 || cp.u0 >= 2)
        .map(|cp| {
            let n = cp.n as f64;
            let u = cp.u0 as f64;
            let v = if series.metadata.d == 2 {
                n * u.ln() / u
            } else {
                n / u
            };
            (cp.u0, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CyclicOrder, DefaultRule, Direction, InitialRule};
    use std::collections::BTreeMap;

    fn ccw(d: usize) -> CyclicOrder {
        CyclicOrder::counterclockwise(d)
    }

    #[test]
    fn geometric_schedule_is_strictly_increasing() {
        let cps = geometric_checkpoints(1000);
        assert_eq!(cps[0], 1);
        assert_eq!(*cps.last().unwrap(), 1000);
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn first_particle_always_escapes() {
        for d in 2..=3 {
            let (series, _) = escape_rate_series(
                ccw(d),
                InitialRule::Rho0,
                1,
                &[1],
                &WalkConfig::default(),
            )
            .unwrap();
            assert_eq!(series.checkpoints[0].escaped, 1);
        }
    }

    #[test]
    fn u1_is_one_under_fresh_rho0() {
        let (_, u_by_escape, _) = escape_only_series(
            ccw(2),
            InitialRule::Rho0,
            EscapeOnlyTarget::Escapes(1),
            &[1],
            &WalkConfig::default(),
        )
        .unwrap();
        assert_eq!(u_by_escape, vec![1]);
    }

    #[test]
    fn series_invariants_hold_on_a_medium_run() {
        let cps = geometric_checkpoints(500);
        let (series, state) = escape_rate_series(
            ccw(2),
            InitialRule::Rho0,
            500,
            &cps,
            &WalkConfig::default(),
        )
        .unwrap();
        state.audit().unwrap();
        for cp in &series.checkpoints {
            assert!(cp.escaped <= cp.n);
            assert!(cp.h_plus <= cp.n as i64, "h+ {} > n {}", cp.h_plus, cp.n);
            assert!(cp.h_minus <= cp.n as i64);
            assert!(cp.breadth <= cp.n as i64, "breadth bound (d=2)");
        }
        assert!(series
            .checkpoints
            .windows(2)
            .all(|w| w[0].n < w[1].n));
    }

    #[test]
    fn reflecting_first_shell_keeps_escapes_at_zero() {
        let mut overrides = BTreeMap::new();
        for dir in Direction::all(2) {
            let mut site = vec![0i64, 0];
            site[dir.axis] += dir.sign();
            overrides.insert(site, dir.opposite());
        }
        let rule = InitialRule::custom(DefaultRule::Rho0, overrides);
        let (series, _) =
            escape_rate_series(ccw(2), rule, 3, &[1, 2, 3], &WalkConfig::default()).unwrap();
        assert!(series.checkpoints.iter().all(|cp| cp.escaped == 0));
    }

    #[test]
    fn single_particle_ball_odometer_is_the_ray() {
        let state = ball_odometer(ccw(2), InitialRule::Rho0, 1, 4.0, &WalkConfig::default())
            .unwrap();
        for k in 0..4 {
            assert_eq!(state.odometer_at(&[0, k]), 1);
        }
        assert_eq!(state.odometer_at(&[0, 4]), 0);
        assert_eq!(state.odometer_at(&[1, 0]), 0);
    }

    #[test]
    fn aggregation_base_cases() {
        let (res, _) = aggregate(ccw(2), InitialRule::Rho0, 1, &WalkConfig::default()).unwrap();
        assert_eq!(res.cluster, vec![vec![0, 0]]);
        assert!(res.outradius < 1.0);
        assert!(res.inradius >= 1.0);
        let (res5, state) =
            aggregate(ccw(2), InitialRule::Rho0, 5, &WalkConfig::default()).unwrap();
        assert_eq!(res5.cluster.len(), 5);
        assert!(res5.cluster.contains(&vec![0, 0]));
        state.audit().unwrap();
    }

    #[test]
    fn cluster_size_equals_n() {
        for n in [10u64, 100, 500] {
            let (res, _) =
                aggregate(ccw(2), InitialRule::Rho0, n, &WalkConfig::default()).unwrap();
            assert_eq!(res.cluster.len() as u64, n);
            assert!(res.inradius <= res.outradius + 1.0);
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalizer_arithmetic() {
        let meta = SeriesMetadata {
            d: 3,
            order: vec![],
            rule: "rho0".into(),
            regime: "absorb-origin-or-escape".into(),
            axis_permutation: None,
        };
        let series = ExperimentSeries {
            checkpoints: vec![Checkpoint {
                n: 10,
                escaped: 10,
                u0: 10,
                h_plus: 0,
                h_minus: 0,
                breadth: 0,
                total_steps: 0,
            }],
            metadata: meta.clone(),
        };
        assert_eq!(primal_normalized(&series)[0].1, 1.0);
        let series2 = ExperimentSeries {
            checkpoints: vec![Checkpoint {
                n: 8,
                escaped: 4,
                u0: 8,
                h_plus: 0,
                h_minus: 0,
                breadth: 0,
                total_steps: 0,
            }],
            metadata: SeriesMetadata { d: 2, ..meta },
        };
        let v = primal_normalized(&series2)[0].1;
        assert!((v - 4.0 * (8.0f64).ln() / 8.0).abs() < 1e-12);
        assert!((v - 1.0397).abs() < 1e-3);
    }

    #[test]
    fn escape_count_identity_small() {
        // I(rho0, u_n(0)) = n for n <= 12, d = 2.
        let (_, u_by_escape, _) = escape_only_series(
            ccw(2),
            InitialRule::Rho0,
            EscapeOnlyTarget::Escapes(12),
            &[],
            &WalkConfig::default(),
        )
        .unwrap();
        for (idx, &u) in u_by_escape.iter().enumerate() {
            let n = idx as u64 + 1;
            let (series, _) = escape_rate_series(
                ccw(2),
                InitialRule::Rho0,
                u,
                &[u],
                &WalkConfig::default(),
            )
            .unwrap();
            assert_eq!(series.checkpoints[0].escaped, n, "I(rho0, u_{n}(0)) != {n}");
        }
    }
}
