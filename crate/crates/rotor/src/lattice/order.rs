//! Cardinal directions of `Z^d` and cyclic rotor orders over them.

use std::fmt;

use thiserror::Error;

/// One of the `2d` cardinal directions `±e_1, ..., ±e_d`.
///
/// `axis` is zero-based, so the paper-style direction `e_k` has `axis == k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub axis: usize,
    pub positive: bool,
}

impl Direction {
    pub fn new(axis: usize, positive: bool) -> Self {
        Direction { axis, positive }
    }

    /// Dense index in `[0, 2d)`: `2*axis` for the positive direction,
    /// `2*axis + 1` for the negative one.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.axis + usize::from(!self.positive)
    }

    #[inline]
    pub fn from_index(idx: usize) -> Self {
        Direction {
            axis: idx / 2,
            positive: idx % 2 == 0,
        }
    }

    #[inline]
    pub fn opposite(self) -> Self {
        Direction {
            axis: self.axis,
            positive: !self.positive,
        }
    }

    #[inline]
    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    /// `+e_d` for dimension `d`.
    pub fn up(d: usize) -> Self {
        Direction::new(d - 1, true)
    }

    /// `-e_d` for dimension `d`.
    pub fn down(d: usize) -> Self {
        Direction::new(d - 1, false)
    }

    /// All `2d` directions in dense-index order.
    pub fn all(d: usize) -> impl Iterator<Item = Direction> {
        (0..2 * d).map(Direction::from_index)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", if self.positive { "+" } else { "-" }, self.axis + 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("cyclic order must list {expected} directions, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("direction {0} appears more than once in the cyclic order")]
    Duplicate(Direction),
    #[error("direction {0} lies outside dimension {1}")]
    AxisOutOfRange(Direction, usize),
    #[error(
        "cyclic order does not separate e_d from -e_d by any axis pair \
         (assumption on the rotor order is violated)"
    )]
    Unseparated,
    #[error("unknown order preset `{0}`")]
    UnknownPreset(String),
}

/// A cyclic permutation of the `2d` cardinal directions.
///
/// `sequence[i]` is followed by `sequence[(i + 1) % 2d]`; the rotor map `m`
/// sends each direction to its successor in the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicOrder {
    d: usize,
    sequence: Vec<Direction>,
    // next[dense index] = dense index of m(direction)
    next: Vec<u8>,
    // eta[dense index] = k with m^k(e_d) = direction
    eta: Vec<u8>,
}

impl CyclicOrder {
    pub fn new(d: usize, sequence: Vec<Direction>) -> Result<Self, OrderError> {
        assert!(d >= 2, "dimension must be at least 2");
        if sequence.len() != 2 * d {
            return Err(OrderError::WrongLength {
                expected: 2 * d,
                got: sequence.len(),
            });
        }
        let mut seen = vec![false; 2 * d];
        for &dir in &sequence {
            if dir.axis >= d {
                return Err(OrderError::AxisOutOfRange(dir, d));
            }
            if seen[dir.index()] {
                return Err(OrderError::Duplicate(dir));
            }
            seen[dir.index()] = true;
        }
        let mut next = vec![0u8; 2 * d];
        for (i, &dir) in sequence.iter().enumerate() {
            let succ = sequence[(i + 1) % (2 * d)];
            next[dir.index()] = succ.index() as u8;
        }
        let mut eta = vec![0u8; 2 * d];
        let mut cur = Direction::up(d);
        for k in 0..2 * d {
            eta[cur.index()] = k as u8;
            cur = Direction::from_index(next[cur.index()] as usize);
        }
        Ok(CyclicOrder {
            d,
            sequence,
            next,
            eta,
        })
    }

    /// The rotation in the `(e_{d-1}, e_d)` plane extended to dimension `d`:
    /// `e_{d-1} -> e_d -> -e_{d-1} -> -e_d`, then the remaining axes
    /// interleaved in index order. For `d = 2` this is the counterclockwise
    /// rotation `e_1 -> e_2 -> -e_1 -> -e_2`.
    pub fn counterclockwise(d: usize) -> Self {
        let mut seq = vec![
            Direction::new(d - 2, true),
            Direction::new(d - 1, true),
            Direction::new(d - 2, false),
            Direction::new(d - 1, false),
        ];
        for axis in 0..d - 2 {
            seq.push(Direction::new(axis, true));
            seq.push(Direction::new(axis, false));
        }
        CyclicOrder::new(d, seq).expect("preset order is always well formed")
    }

    /// The inverse cycle of [`CyclicOrder::counterclockwise`]. For `d = 2`
    /// this is `e_1 -> -e_2 -> -e_1 -> e_2`.
    pub fn clockwise(d: usize) -> Self {
        let mut seq = CyclicOrder::counterclockwise(d).sequence;
        seq.reverse();
        CyclicOrder::new(d, seq).expect("preset order is always well formed")
    }

    pub fn from_preset(name: &str, d: usize) -> Result<Self, OrderError> {
        match name {
            "ccw" => Ok(CyclicOrder::counterclockwise(d)),
            "cw" => Ok(CyclicOrder::clockwise(d)),
            other => Err(OrderError::UnknownPreset(other.to_string())),
        }
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn sequence(&self) -> &[Direction] {
        &self.sequence
    }

    /// The rotor map `m`: the successor of `dir` in the cycle.
    #[inline]
    pub fn step(&self, dir: Direction) -> Direction {
        Direction::from_index(self.next[dir.index()] as usize)
    }

    /// Successor by dense index, for the hot loop.
    #[inline]
    pub fn step_index(&self, dir_idx: u8) -> u8 {
        self.next[dir_idx as usize]
    }

    /// `m` applied `k` times.
    pub fn step_n(&self, dir: Direction, k: u64) -> Direction {
        let k = k % (2 * self.d as u64);
        let mut cur = dir;
        for _ in 0..k {
            cur = self.step(cur);
        }
        cur
    }

    /// `eta(e) = k` with `m^k(e_d) = e`.
    #[inline]
    pub fn eta(&self, dir: Direction) -> u64 {
        self.eta[dir.index()] as u64
    }

    /// Cyclic distance from `from` to `to`: the least `k >= 0` with
    /// `m^k(from) = to`.
    #[inline]
    pub fn distance(&self, from: Direction, to: Direction) -> u64 {
        let m = 2 * self.d as u64;
        (self.eta(to) + m - self.eta(from)) % m
    }

    /// Checks the separation assumption: some axis pair `±e_i` with
    /// `i < d` must satisfy `(eta(e_i) - eta(-e_d)) * (eta(-e_i) - eta(-e_d)) < 0`.
    /// Returns the smallest witnessing one-based axis `i`.
    pub fn separating_axis(&self) -> Result<usize, OrderError> {
        let down = self.eta(Direction::down(self.d)) as i64;
        for axis in 0..self.d - 1 {
            let pos = self.eta(Direction::new(axis, true)) as i64;
            let neg = self.eta(Direction::new(axis, false)) as i64;
            if (pos - down) * (neg - down) < 0 {
                return Ok(axis + 1);
            }
        }
        Err(OrderError::Unseparated)
    }

    /// Relabels the axes by `perm`: new axis `i` carries what old axis
    /// `perm[i]` carried.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.d);
        let mut inverse = vec![0usize; self.d];
        for (new_axis, &old_axis) in perm.iter().enumerate() {
            inverse[old_axis] = new_axis;
        }
        let seq = self
            .sequence
            .iter()
            .map(|dir| Direction::new(inverse[dir.axis], dir.positive))
            .collect();
        CyclicOrder::new(self.d, seq).expect("axis relabeling preserves validity")
    }

    /// All `(2d-1)!` cyclic orders of dimension `d`, each anchored at `e_d`.
    pub fn enumerate_all(d: usize) -> Vec<CyclicOrder> {
        let rest: Vec<Direction> = Direction::all(d)
            .filter(|&dir| dir != Direction::up(d))
            .collect();
        let mut out = Vec::new();
        permute(&mut rest.clone(), 0, &mut |perm| {
            let mut seq = vec![Direction::up(d)];
            seq.extend_from_slice(perm);
            out.push(CyclicOrder::new(d, seq).unwrap());
        });
        out
    }
}

fn permute(items: &mut [Direction], k: usize, visit: &mut impl FnMut(&[Direction])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Checks that `order` is well formed and satisfies the separation
/// assumption, reporting the witnessing axis.
pub fn validate_order(order: &CyclicOrder, d: usize) -> Result<usize, OrderError> {
    assert_eq!(order.dimension(), d, "order dimension mismatch");
    order.separating_axis()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(s: &str) -> Direction {
        let positive = s.starts_with('+');
        let axis: usize = s[2..].parse::<usize>().unwrap() - 1;
        Direction::new(axis, positive)
    }

    fn order2(seq: [&str; 4]) -> Result<CyclicOrder, OrderError> {
        CyclicOrder::new(2, seq.iter().map(|s| dir(s)).collect())
    }

    #[test]
    fn direction_involution_and_count() {
        for d in 2..=5 {
            let all: Vec<_> = Direction::all(d).collect();
            assert_eq!(all.len(), 2 * d);
            for &e in &all {
                assert_eq!(e.opposite().opposite(), e);
                assert_eq!(Direction::from_index(e.index()), e);
            }
        }
    }

    #[test]
    fn counterclockwise_d2_is_the_plane_rotation() {
        let ccw = CyclicOrder::counterclockwise(2);
        assert_eq!(
            ccw.sequence(),
            &[dir("+e1"), dir("+e2"), dir("-e1"), dir("-e2")]
        );
        // north -> west -> south -> east
        assert_eq!(ccw.step(dir("+e2")), dir("-e1"));
        assert_eq!(ccw.step(dir("-e1")), dir("-e2"));
        assert_eq!(ccw.step(dir("-e2")), dir("+e1"));
        assert_eq!(ccw.step(dir("+e1")), dir("+e2"));
    }

    #[test]
    fn eta_basics() {
        let ccw = CyclicOrder::counterclockwise(2);
        assert_eq!(ccw.eta(dir("+e2")), 0);
        assert_eq!(ccw.eta(dir("-e1")), 1);
        assert_eq!(ccw.eta(dir("-e2")), 2);
        assert_eq!(ccw.eta(dir("+e1")), 3);
        // eta is a bijection onto 0..2d
        for d in 2..=4 {
            let order = CyclicOrder::counterclockwise(d);
            let mut hits = vec![0usize; 2 * d];
            for e in Direction::all(d) {
                hits[order.eta(e) as usize] += 1;
            }
            assert!(hits.iter().all(|&h| h == 1));
        }
    }

    #[test]
    fn eta_definition_matches_iterated_rotor_map() {
        for order in CyclicOrder::enumerate_all(2) {
            for e in Direction::all(2) {
                assert_eq!(order.step_n(Direction::up(2), order.eta(e)), e);
            }
        }
    }

    #[test]
    fn validate_counterclockwise_d2() {
        let order = order2(["+e1", "+e2", "-e1", "-e2"]).unwrap();
        assert_eq!(validate_order(&order, 2), Ok(1));
    }

    #[test]
    fn validate_rotation_written_from_north() {
        // e2 -> e1 -> -e2 -> -e1 is the same rotation written from a
        // different anchor; the sign test accepts it.
        let order = order2(["+e2", "+e1", "-e2", "-e1"]).unwrap();
        assert_eq!(order.eta(dir("+e1")), 1);
        assert_eq!(order.eta(dir("-e2")), 2);
        assert_eq!(order.eta(dir("-e1")), 3);
        assert_eq!(validate_order(&order, 2), Ok(1));
    }

    #[test]
    fn validate_rejects_unseparated_order() {
        let order = order2(["+e2", "+e1", "-e1", "-e2"]).unwrap();
        assert_eq!(order.eta(dir("+e1")), 1);
        assert_eq!(order.eta(dir("-e1")), 2);
        assert_eq!(order.eta(dir("-e2")), 3);
        assert_eq!(validate_order(&order, 2), Err(OrderError::Unseparated));
    }

    #[test]
    fn malformed_orders_are_rejected() {
        assert!(matches!(
            CyclicOrder::new(2, vec![dir("+e1"), dir("+e2"), dir("-e1")]),
            Err(OrderError::WrongLength { .. })
        ));
        assert!(matches!(
            order2(["+e1", "+e2", "-e1", "+e2"]),
            Err(OrderError::Duplicate(_))
        ));
        assert!(matches!(
            CyclicOrder::new(2, vec![dir("+e1"), dir("+e2"), dir("-e1"), dir("-e3")]),
            Err(OrderError::AxisOutOfRange(..))
        ));
    }

    #[test]
    fn presets_validate_in_higher_dimensions() {
        for d in 2..=5 {
            let ccw = CyclicOrder::counterclockwise(d);
            let cw = CyclicOrder::clockwise(d);
            assert_eq!(validate_order(&ccw, d), Ok(d - 1));
            assert_eq!(validate_order(&cw, d), Ok(d - 1));
        }
    }

    #[test]
    fn exhaustive_scan_matches_brute_force_eta() {
        // Self-consistency over every cyclic order for d = 2, 3: the sign
        // formula evaluated with a brute-force eta table (iterating m from
        // e_d) must agree with `separating_axis`.
        for d in [2usize, 3] {
            let orders = CyclicOrder::enumerate_all(d);
            let expected_count = (1..2 * d).product::<usize>();
            assert_eq!(orders.len(), expected_count);
            let mut ok = 0usize;
            for order in &orders {
                let mut brute_eta = vec![0i64; 2 * d];
                let mut cur = Direction::up(d);
                for k in 0..2 * d {
                    brute_eta[cur.index()] = k as i64;
                    cur = order.step(cur);
                }
                let down = brute_eta[Direction::down(d).index()];
                let brute_ok = (0..d - 1).any(|axis| {
                    let p = brute_eta[Direction::new(axis, true).index()];
                    let n = brute_eta[Direction::new(axis, false).index()];
                    (p - down) * (n - down) < 0
                });
                assert_eq!(order.separating_axis().is_ok(), brute_ok);
                ok += usize::from(brute_ok);
            }
            assert!(ok > 0 && ok < orders.len());
        }
    }

    #[test]
    fn permute_axes_moves_witness_to_last_transverse_axis() {
        // An order for d = 3 whose witness is axis 1 rather than axis 2.
        let d = 3;
        let seq = vec![
            dir("+e1"),
            dir("+e3"),
            dir("-e1"),
            dir("-e3"),
            dir("+e2"),
            dir("-e2"),
        ];
        let order = CyclicOrder::new(d, seq).unwrap();
        assert_eq!(order.separating_axis(), Ok(1));
        let perm = vec![1, 0, 2]; // swap axes 1 and 2 (zero-based 0 and 1)
        let reindexed = order.permute_axes(&perm);
        assert_eq!(reindexed.separating_axis(), Ok(2));
    }
}
