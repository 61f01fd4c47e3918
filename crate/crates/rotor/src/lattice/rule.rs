//! Initial rotor configurations.

use std::collections::BTreeMap;

use super::order::Direction;
use super::state::Site;

/// The default rule a custom table falls back to outside its overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultRule {
    /// `rho_0`: `+e_d` on `x_d >= 0`, `-e_d` on `x_d < 0`.
    Rho0,
    /// `rho~`: `+e_d` everywhere.
    UniformUp,
}

/// A total assignment of an initial rotor to every site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialRule {
    Rho0,
    UniformUp,
    /// Finitely many explicit overrides on top of a default rule.
    CustomTable {
        default: DefaultRule,
        overrides: BTreeMap<Site, Direction>,
    },
}

impl InitialRule {
    pub fn custom(default: DefaultRule, overrides: BTreeMap<Site, Direction>) -> Self {
        InitialRule::CustomTable { default, overrides }
    }

    pub fn dimension_ok(&self, d: usize) -> bool {
        match self {
            InitialRule::CustomTable { overrides, .. } => overrides
                .iter()
                .all(|(site, dir)| site.len() == d && dir.axis < d),
            _ => true,
        }
    }

    /// The initial rotor at `x` for dimension `d`.
    pub fn rotor(&self, x: &[i64], d: usize) -> Direction {
        debug_assert_eq!(x.len(), d);
        match self {
            InitialRule::Rho0 => rho0(x, d),
            InitialRule::UniformUp => Direction::up(d),
            InitialRule::CustomTable { default, overrides } => {
                if let Some(&dir) = overrides.get(x) {
                    return dir;
                }
                match default {
                    DefaultRule::Rho0 => rho0(x, d),
                    DefaultRule::UniformUp => Direction::up(d),
                }
            }
        }
    }

    pub fn default_rule(&self) -> DefaultRule {
        match self {
            InitialRule::Rho0 => DefaultRule::Rho0,
            InitialRule::UniformUp => DefaultRule::UniformUp,
            InitialRule::CustomTable { default, .. } => *default,
        }
    }

    /// Axis-aligned bounding box of the overrides, as inclusive
    /// `(low, high)` per axis. `None` when there are no overrides.
    pub fn override_bounds(&self, d: usize) -> Option<(Vec<i64>, Vec<i64>)> {
        match self {
            InitialRule::CustomTable { overrides, .. } if !overrides.is_empty() => {
                let mut low = vec![i64::MAX; d];
                let mut high = vec![i64::MIN; d];
                for site in overrides.keys() {
                    for (axis, &c) in site.iter().enumerate() {
                        low[axis] = low[axis].min(c);
                        high[axis] = high[axis].max(c);
                    }
                }
                Some((low, high))
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialRule::Rho0 => "rho0",
            InitialRule::UniformUp => "uniform-up",
            InitialRule::CustomTable { .. } => "custom-table",
        }
    }
}

#[inline]
fn rho0(x: &[i64], d: usize) -> Direction {
    if x[d - 1] >= 0 {
        Direction::up(d)
    } else {
        Direction::down(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho0_splits_on_the_hyperplane() {
        let rule = InitialRule::Rho0;
        assert_eq!(rule.rotor(&[5, 3], 2), Direction::up(2));
        assert_eq!(rule.rotor(&[0, 0], 2), Direction::up(2));
        assert_eq!(rule.rotor(&[0, -1], 2), Direction::down(2));
        assert_eq!(rule.rotor(&[1, 2, -4], 3), Direction::down(3));
    }

    #[test]
    fn uniform_up_everywhere() {
        let rule = InitialRule::UniformUp;
        assert_eq!(rule.rotor(&[0, -7], 2), Direction::up(2));
    }

    #[test]
    fn custom_table_overrides_then_falls_back() {
        let mut overrides = BTreeMap::new();
        overrides.insert(vec![0, 1], Direction::down(2));
        let rule = InitialRule::custom(DefaultRule::Rho0, overrides);
        assert_eq!(rule.rotor(&[0, 1], 2), Direction::down(2));
        assert_eq!(rule.rotor(&[0, 2], 2), Direction::up(2));
        let (low, high) = rule.override_bounds(2).unwrap();
        assert_eq!((low, high), (vec![0, 1], vec![0, 1]));
    }
}
