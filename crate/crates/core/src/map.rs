//! Self-maps of the supported spaces and their canonical forms.

use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{invalid, unsupported, Result};
use crate::rational::{fmt_q, frac, Q};
use crate::space::{Point, Space};

/// A continuous self-map drawn from the supported classes.
///
/// `Composite` lists maps applied right-to-left, so `Composite([a, b])` is
/// `a ∘ b`. Every other variant is already canonical once built through
/// [`MapSpec::canonical`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MapSpec {
    Identity,
    ShiftPower(i64),
    Rotation(Q),
    FiniteMap(Vec<usize>),
    Composite(Vec<MapSpec>),
}

impl MapSpec {
    pub fn shift(j: i64) -> MapSpec {
        if j == 0 {
            MapSpec::Identity
        } else {
            MapSpec::ShiftPower(j)
        }
    }

    pub fn rotation(alpha: Q) -> MapSpec {
        let a = frac(alpha);
        if a.is_zero() {
            MapSpec::Identity
        } else {
            MapSpec::Rotation(a)
        }
    }

    pub fn finite(table: Vec<usize>) -> MapSpec {
        if table.iter().enumerate().all(|(i, &t)| i == t) {
            MapSpec::Identity
        } else {
            MapSpec::FiniteMap(table)
        }
    }

    /// Canonical form: flattened, with shift exponents and rotation angles
    /// summed and finite tables multiplied out. Equality of canonical forms
    /// is map equality.
    pub fn canonical(&self) -> Result<MapSpec> {
        match self {
            MapSpec::Identity => Ok(MapSpec::Identity),
            MapSpec::ShiftPower(j) => Ok(MapSpec::shift(*j)),
            MapSpec::Rotation(a) => Ok(MapSpec::rotation(*a)),
            MapSpec::FiniteMap(t) => Ok(MapSpec::finite(t.clone())),
            MapSpec::Composite(parts) => {
                let mut acc = MapSpec::Identity;
                // right-to-left: the last element acts first
                for m in parts.iter().rev() {
                    acc = m.canonical()?.after(&acc)?;
                }
                Ok(acc)
            }
        }
    }

    /// `self ∘ inner`, in canonical form.
    pub fn after(&self, inner: &MapSpec) -> Result<MapSpec> {
        let outer = self.canonical_shallow()?;
        let inner = inner.canonical_shallow()?;
        match (&outer, &inner) {
            (MapSpec::Identity, m) | (m, MapSpec::Identity) => Ok(m.clone()),
            (MapSpec::ShiftPower(a), MapSpec::ShiftPower(b)) => Ok(MapSpec::shift(a + b)),
            (MapSpec::Rotation(a), MapSpec::Rotation(b)) => Ok(MapSpec::rotation(*a + *b)),
            (MapSpec::FiniteMap(f), MapSpec::FiniteMap(g)) => {
                if f.len() != g.len() {
                    return invalid(format!(
                        "finite maps over {} and {} points cannot be composed",
                        f.len(),
                        g.len()
                    ));
                }
                Ok(MapSpec::finite(g.iter().map(|&x| f[x]).collect()))
            }
            (a, b) => unsupported(format!("cannot compose {a} with {b}: different map classes")),
        }
    }

    fn canonical_shallow(&self) -> Result<MapSpec> {
        match self {
            MapSpec::Composite(_) => self.canonical(),
            other => Ok(other.clone()),
        }
    }

    pub fn inverse(&self) -> Result<MapSpec> {
        match self.canonical()? {
            MapSpec::Identity => Ok(MapSpec::Identity),
            MapSpec::ShiftPower(j) => Ok(MapSpec::shift(-j)),
            MapSpec::Rotation(a) => Ok(MapSpec::rotation(-a)),
            MapSpec::FiniteMap(t) => {
                let mut inv = vec![usize::MAX; t.len()];
                for (x, &y) in t.iter().enumerate() {
                    if y >= t.len() || inv[y] != usize::MAX {
                        return unsupported("finite map is not a bijection");
                    }
                    inv[y] = x;
                }
                Ok(MapSpec::finite(inv))
            }
            MapSpec::Composite(_) => unreachable!("canonical form is never composite"),
        }
    }

    /// `self^e`; negative exponents require an invertible map.
    pub fn pow(&self, e: i64) -> Result<MapSpec> {
        let base = self.canonical()?;
        match &base {
            MapSpec::Identity => Ok(MapSpec::Identity),
            MapSpec::ShiftPower(j) => Ok(MapSpec::shift(j * e)),
            MapSpec::Rotation(a) => Ok(MapSpec::rotation(*a * Q::from_integer(e))),
            MapSpec::FiniteMap(_) => {
                let step = if e < 0 { base.inverse()? } else { base.clone() };
                let mut acc = MapSpec::Identity;
                for _ in 0..e.unsigned_abs() {
                    acc = step.after(&acc)?;
                }
                Ok(acc)
            }
            MapSpec::Composite(_) => unreachable!(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.canonical(), Ok(MapSpec::Identity))
    }

    pub fn is_homeomorphism(&self) -> bool {
        self.inverse().is_ok()
    }

    /// Checks that the map acts on `space`.
    pub fn check_space(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (MapSpec::Identity, _) => Ok(()),
            (MapSpec::ShiftPower(_), Space::Shift { .. }) => Ok(()),
            (MapSpec::Rotation(_), Space::Circle) => Ok(()),
            (MapSpec::FiniteMap(t), Space::Finite(f)) => {
                if t.len() != f.len() || t.iter().any(|&y| y >= f.len()) {
                    invalid(format!("finite map table does not fit a {}-point space", f.len()))
                } else {
                    Ok(())
                }
            }
            (MapSpec::Composite(parts), s) => parts.iter().try_for_each(|m| m.check_space(s)),
            (m, s) => unsupported(format!("map {m} does not act on {s}")),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        match (self.canonical()?, x) {
            (MapSpec::Identity, p) => Ok(p.clone()),
            (MapSpec::ShiftPower(j), Point::Shift(p)) => Ok(Point::Shift(p.shifted(j))),
            (MapSpec::Rotation(a), Point::Circle(t)) => Ok(Point::Circle(frac(*t + a))),
            (MapSpec::FiniteMap(t), Point::Finite(i)) => t
                .get(*i)
                .map(|&y| Point::Finite(y))
                .ok_or_else(|| crate::Error::InvalidArgument(format!("point {i} outside map table"))),
            (m, p) => unsupported(format!("map {m} cannot be applied to {p}")),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Identity => write!(f, "id"),
            MapSpec::ShiftPower(j) => write!(f, "shift^{j}"),
            MapSpec::Rotation(a) => write!(f, "rot({})", fmt_q(a)),
            MapSpec::FiniteMap(t) => {
                let cells: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, "table[{}]", cells.join(","))
            }
            MapSpec::Composite(parts) => {
                let cells: Vec<String> = parts.iter().map(|m| m.to_string()).collect();
                write!(f, "({})", cells.join(" o "))
            }
        }
    }
}

impl Serialize for MapSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses the non-composite display forms: `id`, `shift`, `shift^j`,
/// `rot(p/q)`, `table[a,b,...]`.
impl std::str::FromStr for MapSpec {
    type Err = crate::Error;

    fn from_str(text: &str) -> Result<MapSpec> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || crate::Error::InvalidArgument(format!("cannot parse map \"{text}\""));
        if t == "id" {
            return Ok(MapSpec::Identity);
        }
        if t == "shift" {
            return Ok(MapSpec::shift(1));
        }
        if let Some(j) = t.strip_prefix("shift^") {
            return j.parse().map(MapSpec::shift).map_err(|_| bad());
        }
        if let Some(a) = t.strip_prefix("rot(").and_then(|r| r.strip_suffix(')')) {
            return crate::rational::parse_q(a).map(MapSpec::rotation).ok_or_else(bad);
        }
        if let Some(cells) = t.strip_prefix("table[").and_then(|r| r.strip_suffix(']')) {
            if cells.is_empty() {
                return Err(bad());
            }
            let table = cells.split(',').map(|c| c.parse::<usize>()).collect::<std::result::Result<_, _>>();
            return table.map(MapSpec::finite).map_err(|_| bad());
        }
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn display_forms_parse_back() {
        for m in [MapSpec::Identity, MapSpec::shift(-3), MapSpec::rotation(q(159, 257)), MapSpec::finite(vec![1, 0, 2])] {
            assert_eq!(m.to_string().parse::<MapSpec>().unwrap(), m);
        }
        assert_eq!("shift".parse::<MapSpec>().unwrap(), MapSpec::shift(1));
        assert!("rot(1/0)".parse::<MapSpec>().is_err());
        assert!("table[]".parse::<MapSpec>().is_err());
    }

    #[test]
    fn canonical_collapses_inverse_pairs() {
        let m = MapSpec::Composite(vec![MapSpec::ShiftPower(2), MapSpec::ShiftPower(-2)]);
        assert_eq!(m.canonical().unwrap(), MapSpec::Identity);
        let r = MapSpec::Composite(vec![MapSpec::rotation(q(1, 3)), MapSpec::rotation(q(2, 3))]);
        assert_eq!(r.canonical().unwrap(), MapSpec::Identity);
    }

    #[test]
    fn composite_applies_right_to_left() {
        let f = MapSpec::FiniteMap(vec![1, 1, 2]);
        let g = MapSpec::FiniteMap(vec![2, 0, 1]);
        let fg = MapSpec::Composite(vec![f.clone(), g.clone()]).canonical().unwrap();
        for x in 0..3 {
            let direct = f.apply(&g.apply(&Point::Finite(x)).unwrap()).unwrap();
            assert_eq!(fg.apply(&Point::Finite(x)).unwrap(), direct);
        }
    }

    #[test]
    fn mixed_classes_are_rejected() {
        let err = MapSpec::ShiftPower(1).after(&MapSpec::rotation(q(1, 2)));
        assert!(matches!(err, Err(crate::Error::Unsupported(_))));
    }

    #[test]
    fn non_bijective_table_has_no_inverse() {
        assert!(MapSpec::FiniteMap(vec![0, 0]).inverse().is_err());
        assert_eq!(
            MapSpec::FiniteMap(vec![1, 2, 0]).pow(-1).unwrap(),
            MapSpec::FiniteMap(vec![2, 0, 1])
        );
    }

    #[test]
    fn rotation_powers_wrap() {
        assert_eq!(MapSpec::rotation(q(1, 7)).pow(14).unwrap(), MapSpec::Identity);
        assert_eq!(MapSpec::rotation(q(1, 4)).pow(-1).unwrap(), MapSpec::Rotation(q(3, 4)));
    }
}
