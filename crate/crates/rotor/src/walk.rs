//! Single-particle driver: stopping regimes, the infinite-lattice escape
//! criterion, and odometer/flux accounting.

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::lattice::state::split;
use crate::lattice::{Direction, LatticeState, Sign, Site};

/// When a particle stops.
#[derive(Debug, Clone, PartialEq)]
pub enum StopRegime {
    /// Stop on returning to the origin or on escaping to infinity. The
    /// first move away from the origin is always performed; stopping
    /// applies to returns.
    AbsorbOriginOrEscape,
    /// Stop on the first site with `|x| >= r` (the outer boundary of the
    /// open Euclidean ball `B_r`). Ties `|x| = r` are absorbed.
    AbsorbBallBoundary(f64),
    /// Stop only on escape; excursions through the origin continue.
    EscapeOnly,
    /// Stop on the first arrival at a site of the given finite set.
    AbsorbCustomSet(FxHashSet<Site>),
}

/// How escape to infinity is recognized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EscapeDetector {
    /// O(1) per fresh site via the per-column exited-range index.
    ColumnIndex,
    /// Reference oracle: walk on until `|x| > factor * breadth + offset`.
    SlowRadius { factor: f64, offset: f64 },
}

/// Terminal status of one particle.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    AbsorbedOrigin,
    AbsorbedBoundary(Site),
    Escaped {
        sign: Sign,
        /// Transverse coordinates of the escape column.
        column: Vec<i64>,
        /// The site from which the particle rides straight to infinity
        /// (for the slow detector, the site where the radius test fired).
        launch: Site,
    },
}

impl Status {
    /// The detector-independent part of the outcome: kind, escape sign,
    /// and escape column.
    pub fn signature(&self) -> (u8, Option<Sign>, Option<&[i64]>) {
        match self {
            Status::AbsorbedOrigin => (0, None, None),
            Status::AbsorbedBoundary(site) => (1, None, Some(site)),
            Status::Escaped { sign, column, .. } => (2, Some(*sign), Some(column)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub status: Status,
    /// Exits performed by this particle.
    pub steps: u64,
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("step budget of {limit} exceeded (runaway or non-escaping configuration)")]
    BudgetExceeded { limit: u64 },
    #[error("flux accounting requires a ball-stopped state, but escape rays are present")]
    NotBallState,
}

/// Per-particle driver configuration.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub detector: EscapeDetector,
    pub step_budget: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            detector: EscapeDetector::ColumnIndex,
            step_budget: 1_000_000_000_000,
        }
    }
}

#[inline]
fn norm_sq(x: &[i64]) -> f64 {
    x.iter().map(|&c| (c as f64) * (c as f64)).sum()
}

/// Escape sign a slow-detected particle is riding, read off the default
/// rule side of its current coordinate.
fn slow_sign(state: &LatticeState, xd: i64) -> Sign {
    use crate::lattice::DefaultRule;
    match state.rule().default_rule() {
        DefaultRule::UniformUp => Sign::Plus,
        DefaultRule::Rho0 => {
            if xd >= 0 {
                Sign::Plus
            } else {
                Sign::Minus
            }
        }
    }
}

/// Drives one particle from `source` until the regime absorbs it or the
/// escape detector fires. The state keeps every rotor turn and exit
/// count of the trajectory.
pub fn run_particle(
    state: &mut LatticeState,
    source: &[i64],
    regime: &StopRegime,
    cfg: &WalkConfig,
) -> Result<WalkOutcome, WalkError> {
    let d = state.dimension();
    debug_assert_eq!(source.len(), d);
    let mut pos: Site = source.to_vec();
    let mut steps: u64 = 0;
    let mut col: Option<u32> = None;
    let may_escape = !matches!(regime, StopRegime::AbsorbBallBoundary(_));
    loop {
        let col_id = match col {
            Some(id) => id,
            None => {
                let (t, _) = split(&pos);
                let id = state.col_id_or_create(t);
                col = Some(id);
                id
            }
        };
        if may_escape && !state.is_exited_in_col(col_id, pos[d - 1]) {
            match cfg.detector {
                EscapeDetector::ColumnIndex => {
                    if let Some(sign) = state.escape_probe(&pos) {
                        state.mark_escape_ray(&pos, sign);
                        let (t, _) = split(&pos);
                        return Ok(WalkOutcome {
                            status: Status::Escaped {
                                sign,
                                column: t.to_vec(),
                                launch: pos,
                            },
                            steps,
                        });
                    }
                }
                EscapeDetector::SlowRadius { factor, offset } => {
                    let threshold = factor * state.breadth() as f64 + offset;
                    if norm_sq(&pos) > threshold * threshold {
                        let sign = slow_sign(state, pos[d - 1]);
                        let (t, _) = split(&pos);
                        return Ok(WalkOutcome {
                            status: Status::Escaped {
                                sign,
                                column: t.to_vec(),
                                launch: pos,
                            },
                            steps,
                        });
                    }
                }
            }
        }
        if steps >= cfg.step_budget {
            return Err(WalkError::BudgetExceeded {
                limit: cfg.step_budget,
            });
        }
        let dir = state.exit_in_col(col_id, &pos);
        steps += 1;
        pos[dir.axis] += dir.sign();
        if dir.axis != d - 1 {
            col = None;
        }
        match regime {
            StopRegime::AbsorbOriginOrEscape => {
                if pos.iter().all(|&c| c == 0) {
                    // Return-absorption: the origin's rotor does not turn.
                    return Ok(WalkOutcome {
                        status: Status::AbsorbedOrigin,
                        steps,
                    });
                }
            }
            StopRegime::AbsorbBallBoundary(r) => {
                if norm_sq(&pos) >= r * r {
                    return Ok(WalkOutcome {
                        status: Status::AbsorbedBoundary(pos),
                        steps,
                    });
                }
            }
            StopRegime::EscapeOnly => {}
            StopRegime::AbsorbCustomSet(set) => {
                if set.contains(&pos) {
                    return Ok(WalkOutcome {
                        status: Status::AbsorbedBoundary(pos),
                        steps,
                    });
                }
            }
        }
    }
}

/// One edge of the flux/odometer residual field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeResidual {
    pub from: Site,
    pub direction: Direction,
    /// `u(y) - u(x)`.
    pub gradient: i64,
    /// Net flux `K(x, y)`.
    pub flux: i64,
    /// `grad u + 2d K` on this edge.
    pub residual: i64,
}

/// Evaluates `grad u + 2d K` on every lattice edge with both ends in the
/// open ball `B_r` and returns the maximum absolute residual, optionally
/// with the full field. The state must come from a ball-stopped
/// experiment.
pub fn flux_residual(
    state: &LatticeState,
    r: f64,
    collect: bool,
) -> Result<(i64, Vec<EdgeResidual>), WalkError> {
    if state.has_rays() {
        return Err(WalkError::NotBallState);
    }
    let d = state.dimension();
    let two_d = 2 * d as i64;
    let mut max_res = 0i64;
    let mut field = Vec::new();
    let mut x = vec![-(r.ceil() as i64); d];
    let hi = r.ceil() as i64;
    'outer: loop {
        if norm_sq(&x) < r * r {
            for axis in 0..d {
                let dir = Direction::new(axis, true);
                let mut y = x.clone();
                y[axis] += 1;
                if norm_sq(&y) < r * r {
                    let u_x = state.odometer_at(&x) as i64;
                    let u_y = state.odometer_at(&y) as i64;
                    let flux = state.exit_count(&x, dir) as i64
                        - state.exit_count(&y, dir.opposite()) as i64;
                    let residual = (u_y - u_x) + two_d * flux;
                    max_res = max_res.max(residual.abs());
                    if collect {
                        field.push(EdgeResidual {
                            from: x.clone(),
                            direction: dir,
                            gradient: u_y - u_x,
                            flux,
                            residual,
                        });
                    }
                }
            }
        }
        for axis in 0..d {
            x[axis] += 1;
            if x[axis] <= hi {
                continue 'outer;
            }
            x[axis] = -hi;
        }
        break;
    }
    Ok((max_res, field))
}

/// Checks particle conservation on a ball-stopped state: for every
/// interior site, arrivals (neighbor exits toward it, plus `n_launched`
/// at the origin) equal exits.
pub fn check_ball_conservation(
    state: &LatticeState,
    r: f64,
    n_launched: u64,
) -> Result<(), String> {
    if state.has_rays() {
        return Err("state contains escape rays".into());
    }
    let d = state.dimension();
    let mut x = vec![-(r.ceil() as i64); d];
    let hi = r.ceil() as i64;
    'outer: loop {
        if norm_sq(&x) < r * r {
            let exits = state.odometer_at(&x);
            let mut entries = if x.iter().all(|&c| c == 0) {
                n_launched
            } else {
                0
            };
            for dir in Direction::all(d) {
                let mut y = x.clone();
                y[dir.axis] += dir.sign();
                entries += state.exit_count(&y, dir.opposite());
            }
            if entries != exits {
                return Err(format!(
                    "site {:?}: {} arrivals vs {} exits",
                    x, entries, exits
                ));
            }
        }
        for axis in 0..d {
            x[axis] += 1;
            if x[axis] <= hi {
                continue 'outer;
            }
            x[axis] = -hi;
        }
        break;
    }
    Ok(())
}
