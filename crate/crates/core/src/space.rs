//! Point-set universes, points, and the exact open-set algebra.
//!
//! Three families are supported: the two-sided full shift over a finite
//! alphabet, the circle `R/Z` with rational arithmetic, and finite metric
//! spaces. Open sets are finite unions of basis elements (cylinders, arcs,
//! point subsets) kept in a normalized sorted form so that equality is
//! structural.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, unsupported, Error, Result};
use crate::map::MapSpec;
use crate::rational::{circle_distance, fmt_q, frac, Q};

/// Largest finite space supported (subsets are stored as a 64-bit mask).
pub const MAX_FINITE_POINTS: usize = 64;

#[derive(Debug, PartialEq, Eq)]
pub struct FiniteMetric {
    labels: Vec<String>,
    dist: Vec<Vec<Q>>,
}

impl FiniteMetric {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, a: usize, b: usize) -> Q {
        self.dist[a][b]
    }

    pub fn diameter(&self) -> Q {
        self.dist.iter().flatten().copied().max().unwrap_or_else(Q::zero)
    }

    /// Smallest positive distance, `None` for a one-point space.
    pub fn min_positive_distance(&self) -> Option<Q> {
        self.dist.iter().flatten().copied().filter(|d| *d > Q::zero()).min()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    Shift { alphabet: u8 },
    Circle,
    Finite(Arc<FiniteMetric>),
}

impl Space {
    pub fn shift(alphabet: u8) -> Result<Space> {
        if alphabet < 2 {
            return invalid("shift alphabet must have at least 2 symbols");
        }
        Ok(Space::Shift { alphabet })
    }

    pub fn circle() -> Space {
        Space::Circle
    }

    /// A finite metric space; the distance matrix is validated as a metric.
    pub fn finite(labels: Vec<String>, dist: Vec<Vec<Q>>) -> Result<Space> {
        let n = labels.len();
        if n == 0 {
            return invalid("finite space needs at least one point");
        }
        if n > MAX_FINITE_POINTS {
            return invalid(format!("finite space limited to {MAX_FINITE_POINTS} points"));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return invalid("distance matrix must be square and match the point count");
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return invalid(format!("d({i},{i}) must be 0"));
            }
            for j in 0..n {
                if dist[i][j] < Q::zero() {
                    return invalid(format!("d({i},{j}) is negative"));
                }
                if i != j && dist[i][j].is_zero() {
                    return invalid(format!("distinct points {i},{j} at distance 0"));
                }
                if dist[i][j] != dist[j][i] {
                    return invalid(format!("distance is not symmetric at ({i},{j})"));
                }
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return invalid(format!("triangle inequality fails at ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(Space::Finite(Arc::new(FiniteMetric { labels, dist })))
    }

    /// `n` points, every pair at distance 1.
    pub fn discrete(n: usize) -> Result<Space> {
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::zero() } else { Q::one() }).collect())
            .collect();
        Space::finite(labels, dist)
    }

    /// Points `0..n` on a line at the given integer positions.
    pub fn line(positions: &[i64]) -> Result<Space> {
        let labels = positions.iter().map(|p| format!("x{p}")).collect();
        let dist = positions
            .iter()
            .map(|a| positions.iter().map(|b| Q::from_integer((a - b).abs())).collect())
            .collect();
        Space::finite(labels, dist)
    }

    pub fn finite_metric(&self) -> Option<&FiniteMetric> {
        match self {
            Space::Finite(f) => Some(f),
            _ => None,
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<Q> {
        match (self, a, b) {
            (Space::Shift { .. }, Point::Shift(x), Point::Shift(y)) => Ok(shift_distance(x, y)),
            (Space::Circle, Point::Circle(x), Point::Circle(y)) => Ok(circle_distance(*x, *y)),
            (Space::Finite(f), Point::Finite(x), Point::Finite(y)) if *x < f.len() && *y < f.len() => {
                Ok(f.distance(*x, *y))
            }
            _ => invalid(format!("points {a}, {b} do not both lie in {self}")),
        }
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        match (self, p) {
            (Space::Shift { alphabet }, Point::Shift(x)) => {
                x.fill < *alphabet && x.word.iter().all(|s| s < alphabet)
            }
            (Space::Circle, Point::Circle(t)) => *t >= Q::zero() && *t < Q::one(),
            (Space::Finite(f), Point::Finite(i)) => *i < f.len(),
            _ => false,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Shift { alphabet } => write!(f, "shift({alphabet})"),
            Space::Circle => write!(f, "circle"),
            Space::Finite(m) => write!(f, "finite({})", m.len()),
        }
    }
}

/// A bi-infinite word that is eventually constant: `x_i = word[i - offset]`
/// inside the support and `fill` outside it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftPoint {
    pub word: Vec<u8>,
    pub offset: i64,
    pub fill: u8,
}

impl ShiftPoint {
    pub fn new(word: Vec<u8>, offset: i64, fill: u8) -> ShiftPoint {
        ShiftPoint { word, offset, fill }
    }

    pub fn symbol(&self, i: i64) -> u8 {
        let k = i - self.offset;
        if k >= 0 && (k as usize) < self.word.len() {
            self.word[k as usize]
        } else {
            self.fill
        }
    }

    /// `σ^j` applied: `(σ^j x)_i = x_{i+j}`.
    pub fn shifted(&self, j: i64) -> ShiftPoint {
        ShiftPoint { word: self.word.clone(), offset: self.offset - j, fill: self.fill }
    }
}

fn shift_distance(x: &ShiftPoint, y: &ShiftPoint) -> Q {
    let lo = x.offset.min(y.offset);
    let hi = (x.offset + x.word.len() as i64).max(y.offset + y.word.len() as i64);
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as i64 + 1;
    for r in 0..=reach {
        if x.symbol(r) != y.symbol(r) || x.symbol(-r) != y.symbol(-r) {
            return Q::new(1, 1i64 << r.min(62));
        }
    }
    Q::zero()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Shift(ShiftPoint),
    Circle(Q),
    Finite(usize),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Shift(p) => {
                write!(f, "{}^inf.[{}]@{}.{}^inf", p.fill, join_symbols(&p.word), p.offset, p.fill)
            }
            Point::Circle(t) => write!(f, "{}", fmt_q(t)),
            Point::Finite(i) => write!(f, "#{i}"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn join_symbols(word: &[u8]) -> String {
    if word.iter().all(|&s| s < 10) {
        word.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Constraint set `{x : x_i = s for every (i, s)}`; sorted by coordinate.
/// No constraints is the whole shift space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    constraints: Vec<(i64, u8)>,
}

impl Cylinder {
    pub fn new(offset: i64, word: &[u8]) -> Cylinder {
        Cylinder {
            constraints: word.iter().enumerate().map(|(k, &s)| (offset + k as i64, s)).collect(),
        }
    }

    pub fn constraints(&self) -> &[(i64, u8)] {
        &self.constraints
    }

    pub fn intersect(&self, other: &Cylinder) -> Option<Cylinder> {
        let (a, b) = (&self.constraints, &other.constraints);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        return None;
                    }
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some(Cylinder { constraints: out })
    }

    /// Emptiness test of the intersection without building it.
    pub fn meets(&self, other: &Cylinder, shift: i64) -> bool {
        // compares self translated by `shift` against other
        let (a, b) = (&self.constraints, &other.constraints);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let ca = a[i].0 + shift;
            match ca.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    pub fn translated(&self, d: i64) -> Cylinder {
        Cylinder { constraints: self.constraints.iter().map(|&(i, s)| (i + d, s)).collect() }
    }

    pub fn contains(&self, x: &ShiftPoint) -> bool {
        self.constraints.iter().all(|&(i, s)| x.symbol(i) == s)
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Cylinder) -> bool {
        other.constraints.iter().all(|c| self.constraints.binary_search(c).is_ok())
    }

    /// Least completing point: unconstrained coordinates filled with 0.
    pub fn witness(&self) -> ShiftPoint {
        match (self.constraints.first(), self.constraints.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => {
                let mut word = vec![0u8; (hi - lo + 1) as usize];
                for &(i, s) in &self.constraints {
                    word[(i - lo) as usize] = s;
                }
                ShiftPoint::new(word, lo, 0)
            }
            _ => ShiftPoint::new(Vec::new(), 0, 0),
        }
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let contiguous = self.constraints.windows(2).all(|w| w[1].0 == w[0].0 + 1);
        match self.constraints.first() {
            None => write!(f, "[]@0"),
            Some(&(lo, _)) if contiguous => {
                let word: Vec<u8> = self.constraints.iter().map(|c| c.1).collect();
                write!(f, "[{}]@{}", join_symbols(&word), lo)
            }
            Some(_) => {
                let cells: Vec<String> =
                    self.constraints.iter().map(|(i, s)| format!("{i}:{s}")).collect();
                write!(f, "{{{}}}", cells.join(","))
            }
        }
    }
}

/// Half-open interval `[start, end)` with `0 <= start < end <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub start: Q,
    pub end: Q,
}

impl Interval {
    fn contains(&self, t: Q) -> bool {
        self.start <= t && t < self.end
    }

    fn intersect(&self, o: &Interval) -> Option<Interval> {
        let start = self.start.max(o.start);
        let end = self.end.min(o.end);
        (start < end).then_some(Interval { start, end })
    }
}

/// Splits the arc `[left, left + length)` (mod 1) into canonical intervals.
fn arc_intervals(left: Q, length: Q) -> Vec<Interval> {
    if length >= Q::one() {
        return vec![Interval { start: Q::zero(), end: Q::one() }];
    }
    let left = frac(left);
    let end = left + length;
    if end <= Q::one() {
        vec![Interval { start: left, end }]
    } else {
        vec![
            Interval { start: left, end: Q::one() },
            Interval { start: Q::zero(), end: end - Q::one() },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Parts {
    Cylinders(Vec<Cylinder>),
    Arcs(Vec<Interval>),
    Points(u64),
}

/// A finite union of basis elements of one space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSet {
    space: Space,
    parts: Parts,
}

impl OpenSet {
    pub fn empty(space: &Space) -> OpenSet {
        let parts = match space {
            Space::Shift { .. } => Parts::Cylinders(Vec::new()),
            Space::Circle => Parts::Arcs(Vec::new()),
            Space::Finite(_) => Parts::Points(0),
        };
        OpenSet { space: space.clone(), parts }
    }

    pub fn whole(space: &Space) -> OpenSet {
        let parts = match space {
            Space::Shift { .. } => Parts::Cylinders(vec![Cylinder::new(0, &[])]),
            Space::Circle => Parts::Arcs(arc_intervals(Q::zero(), Q::one())),
            Space::Finite(f) => Parts::Points(full_mask(f.len())),
        };
        OpenSet { space: space.clone(), parts }
    }

    /// The cylinder `[word]_offset`.
    pub fn cylinder(space: &Space, offset: i64, word: &[u8]) -> Result<OpenSet> {
        let Space::Shift { alphabet } = space else {
            return invalid(format!("cylinders live on shift spaces, not {space}"));
        };
        if let Some(s) = word.iter().find(|&&s| s >= *alphabet) {
            return invalid(format!("symbol {s} outside alphabet of size {alphabet}"));
        }
        Ok(OpenSet::from_cylinders(space, vec![Cylinder::new(offset, word)]))
    }

    pub fn from_cylinders(space: &Space, cylinders: Vec<Cylinder>) -> OpenSet {
        OpenSet { space: space.clone(), parts: Parts::Cylinders(normalize_cylinders(cylinders)) }
    }

    /// The arc `[left, left + length)` on the circle; `length = 1` is the
    /// whole circle.
    pub fn arc(left: Q, length: Q) -> Result<OpenSet> {
        if length <= Q::zero() || length > Q::one() {
            return invalid("arc length must lie in (0, 1]");
        }
        Ok(OpenSet::from_intervals(arc_intervals(left, length)))
    }

    fn from_intervals(intervals: Vec<Interval>) -> OpenSet {
        OpenSet { space: Space::Circle, parts: Parts::Arcs(normalize_intervals(intervals)) }
    }

    pub fn points(space: &Space, indices: &[usize]) -> Result<OpenSet> {
        let Space::Finite(f) = space else {
            return invalid(format!("point subsets live on finite spaces, not {space}"));
        };
        let mut mask = 0u64;
        for &i in indices {
            if i >= f.len() {
                return invalid(format!("point {i} outside a {}-point space", f.len()));
            }
            mask |= 1 << i;
        }
        Ok(OpenSet { space: space.clone(), parts: Parts::Points(mask) })
    }

    /// Open ball `B(center, radius)` in a finite space.
    pub fn ball(space: &Space, center: usize, radius: Q) -> Result<OpenSet> {
        let Space::Finite(f) = space else {
            return invalid("balls are only built on finite spaces");
        };
        if center >= f.len() {
            return invalid(format!("point {center} outside the space"));
        }
        let members: Vec<usize> = (0..f.len()).filter(|&j| f.distance(center, j) < radius).collect();
        OpenSet::points(space, &members)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn is_empty(&self) -> bool {
        match &self.parts {
            Parts::Cylinders(c) => c.is_empty(),
            Parts::Arcs(a) => a.is_empty(),
            Parts::Points(m) => *m == 0,
        }
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        match &self.parts {
            Parts::Cylinders(c) => c,
            _ => &[],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        match &self.parts {
            Parts::Arcs(a) => a,
            _ => &[],
        }
    }

    /// Arcs as `(left, length)` pairs.
    pub fn arcs(&self) -> Vec<(Q, Q)> {
        self.intervals().iter().map(|i| (i.start, i.end - i.start)).collect()
    }

    pub fn mask(&self) -> u64 {
        match &self.parts {
            Parts::Points(m) => *m,
            _ => 0,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&self.parts, p) {
            (Parts::Cylinders(cs), Point::Shift(x)) => cs.iter().any(|c| c.contains(x)),
            (Parts::Arcs(iv), Point::Circle(t)) => iv.iter().any(|i| i.contains(*t)),
            (Parts::Points(m), Point::Finite(i)) => *i < 64 && m & (1 << i) != 0,
            _ => false,
        }
    }

    fn same_space(&self, other: &OpenSet) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            invalid(format!("open sets over different spaces: {} vs {}", self.space, other.space))
        }
    }

    pub fn intersect(&self, other: &OpenSet) -> Result<OpenSet> {
        self.same_space(other)?;
        let parts = match (&self.parts, &other.parts) {
            (Parts::Cylinders(a), Parts::Cylinders(b)) => Parts::Cylinders(normalize_cylinders(
                a.iter().flat_map(|x| b.iter().filter_map(move |y| x.intersect(y))).collect(),
            )),
            (Parts::Arcs(a), Parts::Arcs(b)) => Parts::Arcs(normalize_intervals(
                a.iter().flat_map(|x| b.iter().filter_map(move |y| x.intersect(y))).collect(),
            )),
            (Parts::Points(a), Parts::Points(b)) => Parts::Points(a & b),
            _ => unreachable!("same space implies same part kind"),
        };
        Ok(OpenSet { space: self.space.clone(), parts })
    }

    /// Emptiness of `self ∩ other`, without materializing the intersection.
    pub fn meets(&self, other: &OpenSet) -> Result<bool> {
        self.same_space(other)?;
        Ok(match (&self.parts, &other.parts) {
            (Parts::Cylinders(a), Parts::Cylinders(b)) => {
                a.iter().any(|x| b.iter().any(|y| x.meets(y, 0)))
            }
            (Parts::Arcs(a), Parts::Arcs(b)) => {
                a.iter().any(|x| b.iter().any(|y| x.intersect(y).is_some()))
            }
            (Parts::Points(a), Parts::Points(b)) => a & b != 0,
            _ => unreachable!(),
        })
    }

    pub fn union(&self, other: &OpenSet) -> Result<OpenSet> {
        self.same_space(other)?;
        let parts = match (&self.parts, &other.parts) {
            (Parts::Cylinders(a), Parts::Cylinders(b)) => {
                Parts::Cylinders(normalize_cylinders(a.iter().chain(b).cloned().collect()))
            }
            (Parts::Arcs(a), Parts::Arcs(b)) => {
                Parts::Arcs(normalize_intervals(a.iter().chain(b).copied().collect()))
            }
            (Parts::Points(a), Parts::Points(b)) => Parts::Points(a | b),
            _ => unreachable!(),
        };
        Ok(OpenSet { space: self.space.clone(), parts })
    }

    /// Re-normalizes; normalized sets are returned unchanged.
    pub fn normalized(&self) -> OpenSet {
        let parts = match &self.parts {
            Parts::Cylinders(c) => Parts::Cylinders(normalize_cylinders(c.clone())),
            Parts::Arcs(a) => Parts::Arcs(normalize_intervals(a.clone())),
            Parts::Points(m) => Parts::Points(*m),
        };
        OpenSet { space: self.space.clone(), parts }
    }

    /// Canonical point of a non-empty set: least completing word, least
    /// rational, least index.
    pub fn witness(&self) -> Option<Point> {
        match &self.parts {
            Parts::Cylinders(c) => c.first().map(|c| Point::Shift(c.witness())),
            Parts::Arcs(a) => a.first().map(|i| Point::Circle(i.start)),
            Parts::Points(m) => (*m != 0).then(|| Point::Finite(m.trailing_zeros() as usize)),
        }
    }

    /// Exact image under a supported map.
    pub fn image(&self, m: &MapSpec) -> Result<OpenSet> {
        self.transport(m, true)
    }

    /// Exact preimage under a supported map.
    pub fn preimage(&self, m: &MapSpec) -> Result<OpenSet> {
        self.transport(m, false)
    }

    fn transport(&self, m: &MapSpec, forward: bool) -> Result<OpenSet> {
        m.check_space(&self.space)?;
        let m = m.canonical()?;
        let sign = if forward { 1 } else { -1 };
        let parts = match (&m, &self.parts) {
            (MapSpec::Identity, p) => p.clone(),
            (MapSpec::ShiftPower(j), Parts::Cylinders(cs)) => {
                Parts::Cylinders(cs.iter().map(|c| c.translated(-sign * j)).collect())
            }
            (MapSpec::Rotation(a), Parts::Arcs(iv)) => {
                let d = if forward { *a } else { -*a };
                Parts::Arcs(normalize_intervals(
                    iv.iter().flat_map(|i| arc_intervals(i.start + d, i.end - i.start)).collect(),
                ))
            }
            (MapSpec::FiniteMap(t), Parts::Points(mask)) => {
                let mut out = 0u64;
                for (x, &y) in t.iter().enumerate() {
                    if forward && mask & (1 << x) != 0 {
                        out |= 1 << y;
                    }
                    if !forward && mask & (1 << y) != 0 {
                        out |= 1 << x;
                    }
                }
                Parts::Points(out)
            }
            (m, _) => return unsupported(format!("no exact image of {self} under {m}")),
        };
        Ok(OpenSet { space: self.space.clone(), parts })
    }

    /// `self ⊆ other`, decided exactly.
    pub fn is_subset_of(&self, other: &OpenSet) -> Result<bool> {
        self.same_space(other)?;
        Ok(match (&self.parts, &other.parts) {
            (Parts::Cylinders(a), Parts::Cylinders(_)) => {
                // a cylinder lies in a union iff its constrained refinement
                // over the union's coordinates does; refine one coordinate at a time
                a.iter().all(|c| cylinder_covered(c, other, alphabet(&self.space)))
            }
            (Parts::Arcs(a), Parts::Arcs(b)) => a.iter().all(|x| {
                b.iter().any(|y| y.start <= x.start && x.end <= y.end)
            }),
            (Parts::Points(a), Parts::Points(b)) => a & !b == 0,
            _ => unreachable!(),
        })
    }
}

fn alphabet(space: &Space) -> u8 {
    match space {
        Space::Shift { alphabet } => *alphabet,
        _ => 0,
    }
}

fn cylinder_covered(c: &Cylinder, union: &OpenSet, alphabet: u8) -> bool {
    if union.cylinders().iter().any(|u| c.is_subset_of(u)) {
        return true;
    }
    // branch on a coordinate constrained by some member meeting c but not by c
    let pivot = union.cylinders().iter().filter(|u| c.meets(u, 0)).find_map(|u| {
        u.constraints().iter().find(|(i, _)| c.constraints().binary_search_by_key(i, |x| x.0).is_err())
    });
    match pivot {
        None => false,
        Some(&(i, _)) => (0..alphabet).all(|s| {
            let refined = c.intersect(&Cylinder { constraints: vec![(i, s)] }).expect("free coordinate");
            cylinder_covered(&refined, union, alphabet)
        }),
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn normalize_cylinders(mut cs: Vec<Cylinder>) -> Vec<Cylinder> {
    cs.sort();
    cs.dedup();
    let keep: Vec<bool> = (0..cs.len())
        .map(|i| !(0..cs.len()).any(|j| j != i && cs[i].is_subset_of(&cs[j])))
        .collect();
    cs.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

fn normalize_intervals(mut iv: Vec<Interval>) -> Vec<Interval> {
    iv.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(iv.len());
    for i in iv {
        match out.last_mut() {
            Some(last) if i.start <= last.end => last.end = last.end.max(i.end),
            _ => out.push(i),
        }
    }
    out
}

impl fmt::Display for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "empty");
        }
        let cells: Vec<String> = match &self.parts {
            Parts::Cylinders(c) => c.iter().map(|c| c.to_string()).collect(),
            Parts::Arcs(a) => {
                a.iter().map(|i| format!("[{},{})", fmt_q(&i.start), fmt_q(&i.end))).collect()
            }
            Parts::Points(m) => {
                let pts: Vec<String> =
                    (0..64).filter(|i| m & (1u64 << i) != 0).map(|i| i.to_string()).collect();
                vec![format!("{{{}}}", pts.join(","))]
            }
        };
        write!(f, "{}", cells.join(" u "))
    }
}

impl Serialize for OpenSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The canonical finite basis at `resolution`: offset-0 cylinders of that
/// length, `resolution` equal arcs, or all singletons.
pub fn basis(space: &Space, resolution: usize) -> Result<Vec<OpenSet>> {
    if resolution == 0 {
        return invalid("resolution must be at least 1");
    }
    match space {
        Space::Shift { alphabet } => {
            let count = (*alphabet as u128).checked_pow(resolution as u32).unwrap_or(u128::MAX);
            if count > 1 << 20 {
                return Err(Error::ResourceLimit { count, cap: 1 << 20 });
            }
            let mut out = Vec::with_capacity(count as usize);
            let mut word = vec![0u8; resolution];
            loop {
                out.push(OpenSet::from_cylinders(space, vec![Cylinder::new(0, &word)]));
                // odometer increment, last coordinate fastest
                let mut k = resolution;
                loop {
                    if k == 0 {
                        return Ok(out);
                    }
                    k -= 1;
                    word[k] += 1;
                    if word[k] < *alphabet {
                        break;
                    }
                    word[k] = 0;
                }
            }
        }
        Space::Circle => (0..resolution)
            .map(|k| OpenSet::arc(Q::new(k as i64, resolution as i64), Q::new(1, resolution as i64)))
            .collect(),
        Space::Finite(f) => (0..f.len()).map(|i| OpenSet::points(space, &[i])).collect(),
    }
}

/// True iff every basis element at `resolution` contains a listed point.
pub fn eps_dense(points: &[Point], space: &Space, resolution: usize) -> Result<bool> {
    Ok(first_missed(points, space, resolution)?.is_none())
}

/// The first basis element containing none of `points`.
pub fn first_missed(points: &[Point], space: &Space, resolution: usize) -> Result<Option<OpenSet>> {
    if points.is_empty() {
        return invalid("point list must be non-empty");
    }
    if let Some(p) = points.iter().find(|p| !space.contains_point(p)) {
        return invalid(format!("point {p} is not in {space}"));
    }
    Ok(basis(space, resolution)?.into_iter().find(|b| !points.iter().any(|p| b.contains(p))))
}
