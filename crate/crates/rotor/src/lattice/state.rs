//! Sparse mutable rotor-walk state on `Z^d`.
//!
//! Sites are grouped into vertical columns (fixed first `d - 1`
//! coordinates). Each column stores a dense slab of 8-byte site records
//! covering the contiguous visited range, so the hot vertical moves are
//! array indexing rather than hashing. A particle that escapes to
//! infinity exits every site of a vertical ray exactly once; those rays
//! are stored per column as a base coordinate, and a ray site is
//! promoted to an explicit record the first time it is exited again.
//!
//! Per-direction exit counts are not stored: exits from a site follow
//! the cyclic order starting at the initial rotor, so they are fully
//! determined by the odometer (see [`LatticeState::exit_count`]).

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::order::{CyclicOrder, Direction, OrderError};
use super::rule::InitialRule;

/// A lattice site, one coordinate per axis.
pub type Site = Vec<i64>;

/// The two vertical escape directions of the `rho_0` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn direction(self, d: usize) -> Direction {
        match self {
            Sign::Plus => Direction::up(d),
            Sign::Minus => Direction::down(d),
        }
    }
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("initial rule does not match dimension {0}")]
    RuleDimension(usize),
    #[error("state audit failed: {0}")]
    Audit(String),
}

/// Rotor sentinel for a padding slot whose site was never touched.
const UNINIT: u8 = u8::MAX;

/// Per-site record. `rotor` is the dense index of the current rotor
/// direction, or [`UNINIT`] for a padding slot (odometer 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteState {
    pub odometer: u32,
    pub rotor: u8,
}

const FRESH: SiteState = SiteState {
    odometer: 0,
    rotor: UNINIT,
};

#[derive(Debug, Default, Clone)]
struct Column {
    /// `slots[i]` is the site at `x_d = base + i`.
    slots: Vec<SiteState>,
    base: i64,
    /// Whether any site of the column has been exited.
    exited: bool,
    /// Exited range; meaningful only when `exited`.
    min_x: i64,
    max_x: i64,
    /// Base of the upward escape ray: every site with `x_d >= base` has
    /// been exited exactly once along `+e_d` (unless later promoted).
    plus_ray: Option<i64>,
    /// Base of the downward escape ray, covering `x_d <= base`.
    minus_ray: Option<i64>,
}

impl Column {
    #[inline]
    fn on_plus_ray(&self, xd: i64) -> bool {
        self.plus_ray.is_some_and(|b| xd >= b)
    }

    #[inline]
    fn on_minus_ray(&self, xd: i64) -> bool {
        self.minus_ray.is_some_and(|b| xd <= b)
    }

    /// The record at `x_d`, if that site has been exited explicitly.
    #[inline]
    fn get(&self, xd: i64) -> Option<&SiteState> {
        if self.slots.is_empty() || xd < self.base {
            return None;
        }
        self.slots
            .get((xd - self.base) as usize)
            .filter(|s| s.odometer > 0)
    }

    /// Slot index for `x_d`, growing the slab as needed.
    fn slot_index(&mut self, xd: i64) -> usize {
        if self.slots.is_empty() {
            self.base = xd;
            self.slots.push(FRESH);
            return 0;
        }
        if xd < self.base {
            let add = (self.base - xd) as usize;
            let pad = add + self.slots.len() / 2 + 4;
            let mut slots = Vec::with_capacity(pad + self.slots.len());
            slots.resize(pad, FRESH);
            slots.extend_from_slice(&self.slots);
            self.slots = slots;
            self.base -= pad as i64;
        }
        let idx = (xd - self.base) as usize;
        if idx >= self.slots.len() {
            self.slots.resize(idx + 1, FRESH);
        }
        idx
    }
}

/// Sparse rotor-walk state: dimension, cyclic order, initial rule, and
/// the materialized sites grouped by column (the first `d - 1`
/// coordinates).
pub struct LatticeState {
    d: usize,
    order: CyclicOrder,
    rule: InitialRule,
    /// Axis relabeling applied at construction so the separating axis is
    /// `e_{d-1}`; `axis_perm[new] = old`. `None` when no relabeling was
    /// needed.
    axis_perm: Option<Vec<usize>>,
    col_ids: FxHashMap<Box<[i64]>, u32>,
    cols: Vec<Column>,
    override_bounds: Option<(Vec<i64>, Vec<i64>)>,
    breadth: i64,
    h_plus: i64,
    h_minus: i64,
    total_exits: u64,
    ray_count: u64,
}

impl LatticeState {
    pub fn new(order: CyclicOrder, rule: InitialRule) -> Result<Self, LatticeError> {
        let d = order.dimension();
        if !rule.dimension_ok(d) {
            return Err(LatticeError::RuleDimension(d));
        }
        let witness = order.separating_axis()?;
        let (order, rule, axis_perm) = if witness == d - 1 || d == 2 {
            (order, rule, None)
        } else {
            // Swap the witness axis with axis d-1 so downstream code can
            // assume the normalized layout.
            let mut perm: Vec<usize> = (0..d).collect();
            perm.swap(witness - 1, d - 2);
            let order = order.permute_axes(&perm);
            let rule = permute_rule(&rule, &perm, d);
            (order, rule, Some(perm))
        };
        let override_bounds = rule.override_bounds(d);
        Ok(LatticeState {
            d,
            order,
            rule,
            axis_perm,
            col_ids: FxHashMap::default(),
            cols: Vec::new(),
            override_bounds,
            breadth: 0,
            h_plus: 0,
            h_minus: 0,
            total_exits: 0,
            ray_count: 0,
        })
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> &CyclicOrder {
        &self.order
    }

    pub fn rule(&self) -> &InitialRule {
        &self.rule
    }

    pub fn axis_permutation(&self) -> Option<&[usize]> {
        self.axis_perm.as_deref()
    }

    /// Max transverse coordinate magnitude over all exited columns.
    pub fn breadth(&self) -> i64 {
        self.breadth
    }

    /// Max `x_d` over sites exited at least twice (0 when none).
    pub fn h_plus(&self) -> i64 {
        self.h_plus
    }

    /// Max `-x_d` over sites exited at least twice (0 when none).
    pub fn h_minus(&self) -> i64 {
        self.h_minus
    }

    /// Exits performed through `exit_once`; ray exits are not included.
    pub fn total_exits(&self) -> u64 {
        self.total_exits
    }

    /// Number of escape rays recorded.
    pub fn ray_count(&self) -> u64 {
        self.ray_count
    }

    pub fn has_rays(&self) -> bool {
        self.ray_count > 0
    }

    #[inline]
    fn col_get(&self, transverse: &[i64]) -> Option<&Column> {
        self.col_ids
            .get(transverse)
            .map(|&id| &self.cols[id as usize])
    }

    pub(crate) fn col_id_or_create(&mut self, transverse: &[i64]) -> u32 {
        if let Some(&id) = self.col_ids.get(transverse) {
            return id;
        }
        let id = self.cols.len() as u32;
        self.cols.push(Column::default());
        self.col_ids.insert(transverse.into(), id);
        for &c in transverse {
            self.breadth = self.breadth.max(c.abs());
        }
        id
    }

    /// Current rotor at `x` without mutating anything.
    pub fn rotor_at(&self, x: &[i64]) -> Direction {
        let (t, xd) = split(x);
        if let Some(col) = self.col_get(t) {
            if let Some(site) = col.get(xd) {
                return Direction::from_index(site.rotor as usize);
            }
            if col.on_plus_ray(xd) || col.on_minus_ray(xd) {
                return self.order.step(self.rule.rotor(x, self.d));
            }
        }
        self.rule.rotor(x, self.d)
    }

    /// Total exits from `x`, including the implicit single exit of a ray
    /// site.
    pub fn odometer_at(&self, x: &[i64]) -> u64 {
        let (t, xd) = split(x);
        match self.col_get(t) {
            Some(col) => match col.get(xd) {
                Some(site) => site.odometer as u64,
                None => u64::from(col.on_plus_ray(xd) || col.on_minus_ray(xd)),
            },
            None => 0,
        }
    }

    /// Exits from `x` along `dir`, derived from the odometer: the `j`-th
    /// exit goes along `m^j(initial rotor)`.
    pub fn exit_count(&self, x: &[i64], dir: Direction) -> u64 {
        let (t, xd) = split(x);
        let Some(col) = self.col_get(t) else { return 0 };
        match col.get(xd) {
            Some(site) => {
                let init = self.rule.rotor(x, self.d);
                let k = self.order.distance(init, dir) as u64;
                let u = site.odometer as u64;
                if u > k {
                    (u - 1 - k) / (2 * self.d as u64) + 1
                } else {
                    0
                }
            }
            None => {
                if col.on_plus_ray(xd) && dir == Direction::up(self.d) {
                    1
                } else if col.on_minus_ray(xd) && dir == Direction::down(self.d) {
                    1
                } else {
                    0
                }
            }
        }
    }

    /// Whether `x` has been exited at least once (explicitly or on a ray).
    pub fn is_exited(&self, x: &[i64]) -> bool {
        self.odometer_at(x) > 0
    }

    /// Column-local version of [`LatticeState::is_exited`] for the hot
    /// walk loop.
    #[inline]
    pub(crate) fn is_exited_in_col(&self, col_id: u32, xd: i64) -> bool {
        let col = &self.cols[col_id as usize];
        col.get(xd).is_some() || col.on_plus_ray(xd) || col.on_minus_ray(xd)
    }

    /// Performs one rotor-walk exit from `x`: returns the direction the
    /// particle departs along (the rotor before the turn), then advances
    /// the rotor and the exit counters.
    pub fn exit_once(&mut self, x: &[i64]) -> Direction {
        let (t, _) = split(x);
        let col = self.col_id_or_create(t);
        self.exit_in_col(col, x)
    }

    pub(crate) fn exit_in_col(&mut self, col_id: u32, x: &[i64]) -> Direction {
        let d = self.d;
        let xd = x[d - 1];
        let col = &mut self.cols[col_id as usize];
        let on_ray = col.on_plus_ray(xd) || col.on_minus_ray(xd);
        let idx = col.slot_index(xd);
        let slot = &mut col.slots[idx];
        if slot.rotor == UNINIT {
            // First touch: seed from the initial rule; a ray site starts
            // one exit ahead (the escape ride already exited it once).
            let init = self.rule.rotor(x, d).index() as u8;
            if on_ray {
                slot.odometer = 1;
                slot.rotor = self.order.step_index(init);
            } else {
                slot.rotor = init;
            }
        }
        let dir_idx = slot.rotor;
        slot.odometer += 1;
        debug_assert!(slot.odometer < u32::MAX);
        slot.rotor = self.order.step_index(dir_idx);
        let odometer = slot.odometer;
        if odometer == 1 || (odometer == 2 && on_ray) {
            if col.exited {
                col.min_x = col.min_x.min(xd);
                col.max_x = col.max_x.max(xd);
            } else {
                col.exited = true;
                col.min_x = xd;
                col.max_x = xd;
            }
        }
        self.total_exits += 1;
        if odometer == 2 {
            if xd > self.h_plus {
                self.h_plus = xd;
            }
            if -xd > self.h_minus {
                self.h_minus = -xd;
            }
        }
        Direction::from_index(dir_idx as usize)
    }

    /// If a particle standing on the never-exited site `x` is guaranteed
    /// to ride straight to infinity, returns the escape sign.
    pub fn escape_probe(&self, x: &[i64]) -> Option<Sign> {
        use super::rule::DefaultRule;
        let d = self.d;
        let (t, xd) = split(x);
        debug_assert!(!self.is_exited(x));
        let sign = match self.rule.default_rule() {
            DefaultRule::Rho0 => {
                if xd >= 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            }
            DefaultRule::UniformUp => Sign::Plus,
        };
        // The ray ahead must not cross the override box of a custom rule.
        if let Some((low, high)) = &self.override_bounds {
            let in_footprint = t
                .iter()
                .enumerate()
                .all(|(axis, &c)| low[axis] <= c && c <= high[axis]);
            if in_footprint {
                let blocked = match sign {
                    Sign::Plus => high[d - 1] >= xd,
                    Sign::Minus => low[d - 1] <= xd,
                };
                if blocked {
                    return None;
                }
            }
        }
        match self.col_get(t) {
            None => Some(sign),
            Some(col) => {
                let clear = match sign {
                    Sign::Plus => col.plus_ray.is_none() && (!col.exited || xd > col.max_x),
                    Sign::Minus => col.minus_ray.is_none() && (!col.exited || xd < col.min_x),
                };
                if clear {
                    Some(sign)
                } else {
                    None
                }
            }
        }
    }

    /// Records the infinite tail of an escape: every site of the vertical
    /// ray from `x` in direction `sign` is exited exactly once.
    pub fn mark_escape_ray(&mut self, x: &[i64], sign: Sign) {
        let (t, xd) = split(x);
        let t = t.to_vec();
        let id = self.col_id_or_create(&t) as usize;
        let col = &mut self.cols[id];
        match sign {
            Sign::Plus => {
                debug_assert!(col.plus_ray.is_none());
                debug_assert!(!col.exited || xd > col.max_x);
                col.plus_ray = Some(xd);
            }
            Sign::Minus => {
                debug_assert!(col.minus_ray.is_none());
                debug_assert!(!col.exited || xd < col.min_x);
                col.minus_ray = Some(xd);
            }
        }
        self.ray_count += 1;
    }

    /// All explicitly exited sites with their records, in unspecified
    /// order.
    pub fn materialized(&self) -> impl Iterator<Item = (Site, SiteState)> + '_ {
        self.col_ids.iter().flat_map(move |(t, &id)| {
            let col = &self.cols[id as usize];
            col.slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.odometer > 0)
                .map(move |(i, s)| {
                    let mut site: Site = t.to_vec();
                    site.push(col.base + i as i64);
                    (site, *s)
                })
        })
    }

    /// Column escape rays as `(transverse coords, base, sign)`.
    pub fn rays(&self) -> impl Iterator<Item = (Vec<i64>, i64, Sign)> + '_ {
        self.col_ids.iter().flat_map(move |(t, &id)| {
            let col = &self.cols[id as usize];
            let plus = col.plus_ray.map(|b| (t.to_vec(), b, Sign::Plus));
            let minus = col.minus_ray.map(|b| (t.to_vec(), b, Sign::Minus));
            plus.into_iter().chain(minus)
        })
    }

    /// Line-oriented text snapshot: one exited site per line plus one
    /// line per escape ray, sorted, for debugging and golden tests.
    pub fn snapshot(&self) -> String {
        let mut site_lines: Vec<String> = self
            .materialized()
            .map(|(site, s)| {
                let coords = site
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                format!(
                    "s {coords} {} {}",
                    Direction::from_index(s.rotor as usize),
                    s.odometer
                )
            })
            .collect();
        let mut ray_lines: Vec<String> = self
            .rays()
            .map(|(t, base, sign)| {
                let coords = t
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                let tag = match sign {
                    Sign::Plus => "r+",
                    Sign::Minus => "r-",
                };
                format!("{tag} {coords} {base}")
            })
            .collect();
        site_lines.sort();
        ray_lines.sort();
        let mut out = String::new();
        writeln!(out, "# rotor-snapshot schema=1 d={}", self.d).unwrap();
        for line in site_lines.into_iter().chain(ray_lines) {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Full-scan consistency audit of the per-site and per-column
    /// invariants.
    pub fn audit(&self) -> Result<(), LatticeError> {
        for (site, s) in self.materialized() {
            let init = self.rule.rotor(&site, self.d);
            let expect = self.order.step_n(init, s.odometer as u64);
            if expect.index() != s.rotor as usize {
                return Err(LatticeError::Audit(format!(
                    "rotor {} != m^{}(init) at {:?}",
                    Direction::from_index(s.rotor as usize),
                    s.odometer,
                    site
                )));
            }
            let sum: u64 = Direction::all(self.d)
                .map(|dir| self.exit_count(&site, dir))
                .sum();
            if sum != s.odometer as u64 {
                return Err(LatticeError::Audit(format!(
                    "odometer {} != derived exit sum {} at {:?}",
                    s.odometer, sum, site
                )));
            }
        }
        for (t, &id) in &self.col_ids {
            let col = &self.cols[id as usize];
            let exited: Vec<i64> = col
                .slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.odometer > 0)
                .map(|(i, _)| col.base + i as i64)
                .collect();
            if exited.is_empty() {
                if col.exited {
                    return Err(LatticeError::Audit(format!(
                        "column {t:?} flagged exited but has no exited site"
                    )));
                }
                continue;
            }
            let (min, max) = (exited[0], *exited.last().unwrap());
            if !col.exited || min != col.min_x || max != col.max_x {
                return Err(LatticeError::Audit(format!(
                    "column {:?} range ({}, {}) != recomputed ({}, {})",
                    t, col.min_x, col.max_x, min, max
                )));
            }
            for (i, s) in col.slots.iter().enumerate() {
                if s.odometer == 0 && s.rotor != UNINIT {
                    return Err(LatticeError::Audit(format!(
                        "padding slot {} of column {:?} has a rotor",
                        col.base + i as i64,
                        t
                    )));
                }
            }
        }
        Ok(())
    }
}

fn permute_rule(rule: &InitialRule, perm: &[usize], d: usize) -> InitialRule {
    match rule {
        InitialRule::CustomTable { default, overrides } => {
            let mut mapped = std::collections::BTreeMap::new();
            let mut inverse = vec![0usize; d];
            for (new_axis, &old_axis) in perm.iter().enumerate() {
                inverse[old_axis] = new_axis;
            }
            for (site, dir) in overrides {
                let new_site: Site = perm.iter().map(|&old| site[old]).collect();
                let new_dir = Direction::new(inverse[dir.axis], dir.positive);
                mapped.insert(new_site, new_dir);
            }
            InitialRule::CustomTable {
                default: *default,
                overrides: mapped,
            }
        }
        other => other.clone(),
    }
}

#[inline]
pub(crate) fn split(x: &[i64]) -> (&[i64], i64) {
    let (last, rest) = x.split_last().expect("site has at least one coordinate");
    (rest, *last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rule::DefaultRule;

    fn fresh_rho0(d: usize) -> LatticeState {
        LatticeState::new(CyclicOrder::counterclockwise(d), InitialRule::Rho0).unwrap()
    }

    #[test]
    fn rotor_at_fresh_state_follows_rho0() {
        let state = fresh_rho0(2);
        assert_eq!(state.rotor_at(&[5, 3]), Direction::up(2));
        assert_eq!(state.rotor_at(&[0, -1]), Direction::down(2));
    }

    #[test]
    fn exit_once_turns_the_rotor() {
        let mut state = fresh_rho0(2);
        let dir = state.exit_once(&[0, 0]);
        assert_eq!(dir, Direction::up(2));
        assert_eq!(state.odometer_at(&[0, 0]), 1);
        let m = state.order().step(Direction::up(2));
        assert_eq!(state.rotor_at(&[0, 0]), m);
    }

    #[test]
    fn rotor_cycles_through_all_directions() {
        let mut state = fresh_rho0(3);
        let mut seen = Vec::new();
        for _ in 0..6 {
            seen.push(state.exit_once(&[2, 1, 4]));
        }
        seen.sort();
        let mut all: Vec<_> = Direction::all(3).collect();
        all.sort();
        assert_eq!(seen, all);
    }

    #[test]
    fn first_five_exit_directions_from_origin() {
        // ccw d=2 starting at +e2: e2, -e1, -e2, e1, e2.
        let mut state = fresh_rho0(2);
        let dirs: Vec<Direction> = (0..5).map(|_| state.exit_once(&[0, 0])).collect();
        let e = |s: &str| match s {
            "+e1" => Direction::new(0, true),
            "-e1" => Direction::new(0, false),
            "+e2" => Direction::new(1, true),
            "-e2" => Direction::new(1, false),
            _ => unreachable!(),
        };
        assert_eq!(dirs, vec![e("+e2"), e("-e1"), e("-e2"), e("+e1"), e("+e2")]);
    }

    #[test]
    fn derived_exit_counts_follow_the_cycle() {
        let mut state = fresh_rho0(2);
        // Three exits from the origin: +e2, -e1, -e2.
        for _ in 0..3 {
            state.exit_once(&[0, 0]);
        }
        assert_eq!(state.exit_count(&[0, 0], Direction::up(2)), 1);
        assert_eq!(state.exit_count(&[0, 0], Direction::new(0, false)), 1);
        assert_eq!(state.exit_count(&[0, 0], Direction::down(2)), 1);
        assert_eq!(state.exit_count(&[0, 0], Direction::new(0, true)), 0);
        // Two more complete the cycle and start the next one.
        for _ in 0..2 {
            state.exit_once(&[0, 0]);
        }
        assert_eq!(state.exit_count(&[0, 0], Direction::up(2)), 2);
        assert_eq!(state.exit_count(&[0, 0], Direction::new(0, true)), 1);
        state.audit().unwrap();
    }

    #[test]
    fn escape_probe_on_fresh_state() {
        let state = fresh_rho0(2);
        assert_eq!(state.escape_probe(&[7, 3]), Some(Sign::Plus));
        assert_eq!(state.escape_probe(&[7, 0]), Some(Sign::Plus));
        assert_eq!(state.escape_probe(&[-2, -1]), Some(Sign::Minus));
    }

    #[test]
    fn escape_probe_blocked_by_turned_rotor_above() {
        let mut state = fresh_rho0(2);
        state.exit_once(&[5, 7]);
        assert_eq!(state.escape_probe(&[5, 3]), None);
        assert_eq!(state.escape_probe(&[5, 8]), Some(Sign::Plus));
        assert_eq!(state.escape_probe(&[6, 3]), Some(Sign::Plus));
    }

    #[test]
    fn ray_sites_count_as_exited_once() {
        let mut state = fresh_rho0(2);
        state.mark_escape_ray(&[0, 0], Sign::Plus);
        assert_eq!(state.odometer_at(&[0, 0]), 1);
        assert_eq!(state.odometer_at(&[0, 100]), 1);
        assert_eq!(state.odometer_at(&[0, -1]), 0);
        assert_eq!(state.exit_count(&[0, 5], Direction::up(2)), 1);
        assert_eq!(state.exit_count(&[0, 5], Direction::down(2)), 0);
        let m = state.order().step(Direction::up(2));
        assert_eq!(state.rotor_at(&[0, 3]), m);
        assert_eq!(state.escape_probe(&[0, -4]), Some(Sign::Minus));
    }

    #[test]
    fn ray_site_materializes_with_its_implicit_exit() {
        let mut state = fresh_rho0(2);
        state.mark_escape_ray(&[0, 0], Sign::Plus);
        // Second exit of the ray base: odometer 1 -> 2, rotor m^2.
        let dir = state.exit_once(&[0, 0]);
        assert_eq!(dir, state.order().step(Direction::up(2)));
        assert_eq!(state.odometer_at(&[0, 0]), 2);
        let m2 = state.order().step_n(Direction::up(2), 2);
        assert_eq!(state.rotor_at(&[0, 0]), m2);
        state.audit().unwrap();
    }

    #[test]
    fn heights_track_twice_exited_sites() {
        let mut state = fresh_rho0(2);
        assert_eq!((state.h_plus(), state.h_minus()), (0, 0));
        state.exit_once(&[1, 4]);
        assert_eq!(state.h_plus(), 0);
        state.exit_once(&[1, 4]);
        assert_eq!(state.h_plus(), 4);
        state.exit_once(&[2, -6]);
        state.exit_once(&[2, -6]);
        assert_eq!(state.h_minus(), 6);
        assert_eq!(state.breadth(), 2);
    }

    #[test]
    fn audit_checks_pass_after_mixed_activity() {
        let mut state = fresh_rho0(3);
        for _ in 0..7 {
            state.exit_once(&[1, 2, 3]);
        }
        state.exit_once(&[0, 0, -2]);
        state.mark_escape_ray(&[4, 4, 1], Sign::Plus);
        state.exit_once(&[4, 4, 1]);
        state.audit().unwrap();
    }

    #[test]
    fn custom_rule_blocks_escape_through_override_box() {
        let mut overrides = std::collections::BTreeMap::new();
        overrides.insert(vec![0, 5], Direction::down(2));
        let rule = InitialRule::custom(DefaultRule::Rho0, overrides);
        let state = LatticeState::new(CyclicOrder::counterclockwise(2), rule).unwrap();
        assert_eq!(state.escape_probe(&[0, 3]), None);
        assert_eq!(state.escape_probe(&[0, 6]), Some(Sign::Plus));
        assert_eq!(state.escape_probe(&[1, 3]), Some(Sign::Plus));
    }

    #[test]
    fn column_slabs_grow_in_both_directions() {
        let mut state = fresh_rho0(2);
        for xd in (-40..=40).rev() {
            state.exit_once(&[3, xd]);
        }
        for xd in -40..=40 {
            assert_eq!(state.odometer_at(&[3, xd]), 1, "xd {xd}");
        }
        assert_eq!(state.odometer_at(&[3, 41]), 0);
        assert_eq!(state.odometer_at(&[3, -41]), 0);
        state.audit().unwrap();
    }

    #[test]
    fn snapshot_is_sorted_and_stable() {
        let mut state = fresh_rho0(2);
        state.exit_once(&[1, 0]);
        state.exit_once(&[-1, 2]);
        state.mark_escape_ray(&[0, 0], Sign::Plus);
        let a = state.snapshot();
        let b = state.snapshot();
        assert_eq!(a, b);
        assert!(a.starts_with("# rotor-snapshot schema=1 d=2\n"));
        assert_eq!(a.lines().count(), 4);
    }
}
